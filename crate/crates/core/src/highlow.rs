//! High-low frequency iteration machinery: splitting the wave data at a
//! cutoff `N_HL`, evolving the low system next to the full system, tracking
//! the difference flow `(v, m̃±)` left after subtracting the linear wave
//! flow of the high data, scanning the smoothing exponent of that
//! remainder, and the full iteration driver that re-absorbs the remainder
//! every `δ` and ledgers the smoothed-energy growth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    build_imultiplier, i_energy, nonlinear_part_norm, sobolev_norm, IMultiplier,
};
use crate::dynamics::{step, wave_flow, IntegratorConfig};
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LineFit};
use crate::spectral::{project_gt, project_leq, SpectralField};
use crate::state::ZakharovState;

/// Fields are considered signal-free below this size in the scan fits.
pub const SIGNAL_FLOOR: f64 = 1e-13;

/// Parameter bundle for the high-low iteration.
///
/// `n_i` and `delta` are normally derived from the rules
/// `n_i = 2^round(α log₂ N_HL)` and `δ = ½ N^{−2−ε₀}` with
/// `N = max{K n_i^{1−s}, C₁ N_HL^{1/2−β}}`; the fields stay public so
/// degenerate configurations can be assembled directly in tests.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HighLowConfig {
    pub s: f64,
    pub beta: f64,
    pub n_hl: i64,
    pub alpha: f64,
    pub gamma: f64,
    pub n_i: i64,
    pub delta: f64,
    /// Schrödinger data norm bound `K = ‖u₀‖_{H^s}`.
    pub k_norm: f64,
    /// Fourier-Lebesgue coefficient bound of the wave data.
    pub c1: f64,
    pub epsilon0: f64,
}

impl HighLowConfig {
    /// Builds a configuration with `n_i` and `delta` from the construction
    /// rules.
    #[allow(clippy::too_many_arguments)]
    pub fn from_rule(
        s: f64,
        beta: f64,
        n_hl: i64,
        alpha: f64,
        gamma: f64,
        k_norm: f64,
        c1: f64,
        epsilon0: f64,
    ) -> Result<Self> {
        if n_hl < 2 || !(n_hl as u64).is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "n_hl must be a dyadic integer >= 2, got {n_hl}"
            )));
        }
        if epsilon0 <= 0.0 {
            return Err(Error::InvalidInput("epsilon0 must be positive".into()));
        }
        let n_i = dyadic_round_pow(n_hl, alpha);
        let mut cfg = HighLowConfig {
            s,
            beta,
            n_hl,
            alpha,
            gamma,
            n_i,
            delta: 0.0,
            k_norm,
            c1,
            epsilon0,
        };
        cfg.delta = cfg.delta_rule();
        Ok(cfg)
    }

    /// `δ = ½ N^{−2−ε₀}` with `N = max{K n_i^{1−s}, C₁ N_HL^{1/2−β}}`.
    pub fn delta_rule(&self) -> f64 {
        0.5 * self.norm_scale().powf(-2.0 - self.epsilon0)
    }

    /// The local-theory norm scale `N`.
    pub fn norm_scale(&self) -> f64 {
        let smooth = self.k_norm * (self.n_i as f64).powf(1.0 - self.s);
        let rough = self.c1 * (self.n_hl as f64).powf(0.5 - self.beta);
        smooth.max(rough)
    }

    /// `δ^{ε₀} C₁`; the iteration logs a warning above 1.
    pub fn delta_epsilon_check(&self) -> f64 {
        self.delta.powf(self.epsilon0) * self.c1
    }

    /// Hypotheses of the smoothing-exponent scan:
    /// `s ∈ (1/2, 1)`, `β ∈ (0, 1/2]`, and `s − β − 1/2 ≤ 0` (equality is
    /// the borderline case).
    pub fn validate_smoothing(&self) -> Result<()> {
        if !(0.5 < self.s && self.s < 1.0) {
            return Err(Error::InvalidInput(format!(
                "s must lie in (1/2, 1), got {}",
                self.s
            )));
        }
        if !(0.0 < self.beta && self.beta <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "beta must lie in (0, 1/2], got {}",
                self.beta
            )));
        }
        if self.s - self.beta - 0.5 > 0.0 {
            return Err(Error::InvalidInput(format!(
                "smoothing requires s - beta - 1/2 <= 0, got {}",
                self.s - self.beta - 0.5
            )));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::InvalidInput("delta must be positive".into()));
        }
        Ok(())
    }

    /// The admissible interval for `α` at these `(s, β)`.
    pub fn alpha_bounds(&self) -> (f64, f64) {
        let lower = 1.0 - 2.0 * self.beta;
        let upper = ((self.beta + 0.5 - self.s) / (2.0 * (1.0 - self.s)))
            .min((2.0 * self.beta - self.s) / (1.0 - self.s));
        (lower, upper)
    }

    /// The lower admissibility threshold for `γ` at these `(s, β, α)`.
    pub fn gamma_floor(&self) -> f64 {
        let a = 1.0 / ((2.0 * self.s - 1.0) * self.alpha);
        let b = 1.0 / (self.beta + 0.5 - self.s - 2.0 * self.alpha * (1.0 - self.s));
        let c = 1.0 / (self.alpha + 2.0 * self.beta - 1.0);
        let d = 1.0 / (2.0 * self.beta - self.s - self.alpha * (1.0 - self.s));
        a.max(b).max(c).max(d)
    }

    /// Full iteration hypotheses: smoothing hypotheses, plus
    /// `β > 1/(2(2−s))`, `α` in its interval, and `γ` above its floor.
    pub fn validate_iteration(&self) -> Result<()> {
        self.validate_smoothing()?;
        let beta_floor = 1.0 / (2.0 * (2.0 - self.s));
        if self.beta <= beta_floor {
            return Err(Error::InvalidInput(format!(
                "iteration requires beta > 1/(2(2-s)) = {beta_floor}, got {}",
                self.beta
            )));
        }
        let (lo, hi) = self.alpha_bounds();
        if !(lo < self.alpha && self.alpha < hi) {
            return Err(Error::InvalidInput(format!(
                "alpha = {} outside the admissible interval ({lo}, {hi})",
                self.alpha
            )));
        }
        let floor = self.gamma_floor();
        if self.gamma <= floor {
            return Err(Error::InvalidInput(format!(
                "gamma = {} not above its floor {floor}",
                self.gamma
            )));
        }
        if self.n_i < 1 || !(self.n_i as u64).is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "n_i must be dyadic, got {}",
                self.n_i
            )));
        }
        Ok(())
    }
}

/// `2^round(α log₂ n)` — the dyadic rounding used for `n_i`.
pub fn dyadic_round_pow(n: i64, alpha: f64) -> i64 {
    let exponent = (alpha * (n as f64).log2()).round().max(0.0) as u32;
    1_i64 << exponent
}

/// Splits mean-zero wave data at `n_hl`: `(P_{≤N} n₀, (Id − P_{≤N}) n₀)`.
pub fn split_data(n0: &SpectralField, n_hl: i64) -> Result<(SpectralField, SpectralField)> {
    if n0.coeff(0).norm() > crate::state::MEAN_ZERO_TOL {
        return Err(Error::InvalidInput(format!(
            "wave data has nonzero mean {:.3e}",
            n0.coeff(0).norm()
        )));
    }
    if n_hl < 0 {
        return Err(Error::InvalidInput(format!("n_hl must be >= 0, got {n_hl}")));
    }
    Ok((project_leq(n0, n_hl), project_gt(n0, n_hl)))
}

/// Snapshot of the difference flow at one record time.
#[derive(Debug, Clone)]
pub struct DifferenceDecomposition {
    /// Schrödinger difference `v = u_full − u_low`.
    pub v: SpectralField,
    /// Nonlinear wave remainders `m̃± = (n±_full − n±_low) − W±(t) m₀^H±`.
    pub m_tilde_plus: SpectralField,
    pub m_tilde_minus: SpectralField,
    /// The linear wave flows `W±(t) m₀^H±` of the high data.
    pub linear_high_plus: SpectralField,
    pub linear_high_minus: SpectralField,
    pub time: f64,
}

impl DifferenceDecomposition {
    /// `‖v‖_{H^s} + ‖m̃⁺‖_{L²} + ‖m̃⁻‖_{L²}`, the scanned size.
    pub fn remainder_norm(&self, s: f64) -> f64 {
        sobolev_norm(&self.v, s)
            + self.m_tilde_plus.l2_norm_sq().sqrt()
            + self.m_tilde_minus.l2_norm_sq().sqrt()
    }

    /// Max coefficient error in `n±_full = n±_low + W±(t)m₀^H± + m̃±`,
    /// recomputed from the stored pieces against the full solution.
    pub fn reconstruction_error(
        &self,
        full: &ZakharovState,
        low: &ZakharovState,
    ) -> Result<f64> {
        let plus = low
            .n_plus()
            .add(&self.linear_high_plus)?
            .add(&self.m_tilde_plus)?;
        let minus = low
            .n_minus()
            .add(&self.linear_high_minus)?
            .add(&self.m_tilde_minus)?;
        Ok(plus
            .max_abs_diff(full.n_plus())
            .max(minus.max_abs_diff(full.n_minus())))
    }
}

/// Steps two states with identical schedules until `t_final`, invoking the
/// callback once at the start and at every record point.
fn evolve_pair<F>(
    low: &mut ZakharovState,
    full: &mut ZakharovState,
    t_final: f64,
    icfg: &IntegratorConfig,
    emit_initial: bool,
    mut record: F,
) -> Result<()>
where
    F: FnMut(&ZakharovState, &ZakharovState) -> Result<()>,
{
    debug_assert_eq!(low.time(), full.time());
    if emit_initial {
        record(low, full)?;
    }
    let span = t_final - low.time();
    if span <= 0.0 {
        return Ok(());
    }
    let whole_steps = (span / icfg.dt - 1e-9).floor().max(0.0) as u64;
    for i in 1..=whole_steps {
        *low = step(low, icfg)?;
        *full = step(full, icfg)?;
        if i % icfg.record_every as u64 == 0 && i != whole_steps {
            record(low, full)?;
        }
    }
    let remainder = t_final - low.time();
    if remainder > 1e-12 * t_final.abs().max(1.0) {
        let partial = IntegratorConfig {
            dt: remainder,
            ..*icfg
        };
        *low = step(low, &partial)?;
        *full = step(full, &partial)?;
    }
    record(low, full)?;
    Ok(())
}

fn difference_at(
    low: &ZakharovState,
    full: &ZakharovState,
    high_plus: &SpectralField,
    high_minus: &SpectralField,
) -> Result<DifferenceDecomposition> {
    let t = full.time();
    let linear_high_plus = wave_flow(high_plus, true, t);
    let linear_high_minus = wave_flow(high_minus, false, t);
    let v = full.u().sub(low.u())?;
    let m_tilde_plus = full.n_plus().sub(low.n_plus())?.sub(&linear_high_plus)?;
    let m_tilde_minus = full.n_minus().sub(low.n_minus())?.sub(&linear_high_minus)?;
    Ok(DifferenceDecomposition {
        v,
        m_tilde_plus,
        m_tilde_minus,
        linear_high_plus,
        linear_high_minus,
        time: t,
    })
}

/// Evolves the full system `(u₀, n₀±)` and the low system
/// `(u₀, P_{≤N_HL} n₀±)` side by side and emits the difference
/// decomposition at every record point. On blow-up of either trajectory
/// the observer has already received every completed record.
pub fn run_difference_observed<F>(
    u0: &SpectralField,
    n0_plus: &SpectralField,
    n0_minus: &SpectralField,
    cfg: &HighLowConfig,
    t_final: f64,
    icfg: &IntegratorConfig,
    mut observer: F,
) -> Result<()>
where
    F: FnMut(&DifferenceDecomposition) -> Result<()>,
{
    let (low_plus, high_plus) = split_data(n0_plus, cfg.n_hl)?;
    let (low_minus, high_minus) = split_data(n0_minus, cfg.n_hl)?;
    let mut full = ZakharovState::new(u0.clone(), n0_plus.clone(), n0_minus.clone(), 0.0)?;
    let mut low = ZakharovState::new(u0.clone(), low_plus, low_minus, 0.0)?;
    evolve_pair(&mut low, &mut full, t_final, icfg, true, |low, full| {
        let dec = difference_at(low, full, &high_plus, &high_minus)?;
        debug_assert!(dec.reconstruction_error(full, low)? < 1e-11);
        observer(&dec)
    })
}

/// Collecting wrapper around [`run_difference_observed`].
pub fn run_difference(
    u0: &SpectralField,
    n0_plus: &SpectralField,
    n0_minus: &SpectralField,
    cfg: &HighLowConfig,
    t_final: f64,
    icfg: &IntegratorConfig,
) -> Result<Vec<DifferenceDecomposition>> {
    let mut records = Vec::new();
    run_difference_observed(u0, n0_plus, n0_minus, cfg, t_final, icfg, |dec| {
        records.push(dec.clone());
        Ok(())
    })?;
    Ok(records)
}

/// One cell of a smoothing-exponent scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothingCell {
    pub n_hl: i64,
    /// `‖v(T)‖_{H^s} + ‖m̃±(T)‖_{L²}` at the common measurement time.
    pub remainder_norm: f64,
    /// Sup of the same quantity over the recorded window.
    pub remainder_sup: f64,
}

/// Result of [`smoothing_scan`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothingScan {
    pub cells: Vec<SmoothingCell>,
    pub fitted_slope: f64,
    pub fit_residual_rms: f64,
    /// The predicted decay exponent `s − β − 1/2`.
    pub predicted_slope: f64,
    pub measurement_time: f64,
}

/// Runs the difference flow at each `n_hl` and fits
/// `log(‖v‖_{H^s} + ‖m̃‖_{L²})` against `log N_HL` at the common time `T`
/// (chosen ≈ δ of the template configuration).
pub fn smoothing_scan(
    u0: &SpectralField,
    n0_plus: &SpectralField,
    n0_minus: &SpectralField,
    template: &HighLowConfig,
    n_hl_list: &[i64],
    t_final: f64,
    icfg: &IntegratorConfig,
) -> Result<SmoothingScan> {
    template.validate_smoothing()?;
    if n_hl_list.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "smoothing scan needs at least 4 dyadic cutoffs, got {}",
            n_hl_list.len()
        )));
    }
    for &n in n_hl_list {
        if n < 2 || !(n as u64).is_power_of_two() {
            return Err(Error::InvalidInput(format!("cutoff {n} is not dyadic")));
        }
    }
    // Cells are independent deterministic jobs; run them concurrently
    // and collect in list order.
    let cells = n_hl_list
        .par_iter()
        .map(|&n_hl| {
            let cfg = HighLowConfig { n_hl, ..*template };
            let mut at_end = 0.0;
            let mut sup: f64 = 0.0;
            run_difference_observed(u0, n0_plus, n0_minus, &cfg, t_final, icfg, |dec| {
                let norm = dec.remainder_norm(cfg.s);
                sup = sup.max(norm);
                at_end = norm;
                Ok(())
            })?;
            Ok(SmoothingCell {
                n_hl,
                remainder_norm: at_end,
                remainder_sup: sup,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if cells.iter().all(|c| c.remainder_norm < SIGNAL_FLOOR) {
        return Err(Error::InsufficientSignal(
            "all remainder norms below the signal floor; is the high band empty?".into(),
        ));
    }
    if cells.iter().any(|c| c.remainder_norm < SIGNAL_FLOOR) {
        return Err(Error::InsufficientSignal(
            "some cells carry no signal; shrink the cutoff list".into(),
        ));
    }
    let xs: Vec<f64> = cells.iter().map(|c| c.n_hl as f64).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.remainder_norm).collect();
    let LineFit {
        slope,
        residual_rms,
        ..
    } = log_log_fit(&xs, &ys)?;
    Ok(SmoothingScan {
        cells,
        fitted_slope: slope,
        fit_residual_rms: residual_rms,
        predicted_slope: template.s - template.beta - 0.5,
        measurement_time: t_final,
    })
}

/// Per-interval entry of the iteration ledger.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Smoothed energy of the low solution entering the interval.
    pub i_energy_start: f64,
    /// Smoothed energy at the interval end, before absorption.
    pub i_energy_end: f64,
    /// `i_energy_end − i_energy_start` (flow-driven growth).
    pub drift_within: f64,
    /// Energy jump caused by absorbing `(v, m̃±)` at the interval end.
    pub absorption_jump: f64,
    /// `‖v‖_{H^s}` at the interval end, before absorption.
    pub v_norm: f64,
    /// `‖m̃⁺‖_{L²} + ‖m̃⁻‖_{L²}` at the interval end, before absorption.
    pub m_tilde_norm: f64,
    /// Nonlinear-part norm of the full solution at the interval end.
    pub nonlinear_part_norm: f64,
    /// Band-limited audit `max |low + W(t)m₀^H − full|` after absorption.
    pub reconstruction_error: f64,
    /// `‖v‖` recomputed right after absorption (should vanish).
    pub post_absorption_v_norm: f64,
}

/// Output of the iteration driver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthLedger {
    pub config: HighLowConfig,
    pub intervals: Vec<IntervalRecord>,
    pub i_energy_initial: f64,
    pub i_energy_final: f64,
    /// The footnote check `δ^{ε₀} C₁`; above 1 the small-δ hypothesis of
    /// the local theory is not honored.
    pub delta_epsilon_c1: f64,
    /// False when the interval budget truncated the run.
    pub complete: bool,
}

impl GrowthLedger {
    /// Telescoped sum of all within-interval drifts and absorption jumps;
    /// equals `i_energy_final − i_energy_initial` up to roundoff.
    pub fn telescoped_total(&self) -> f64 {
        self.intervals
            .iter()
            .map(|r| r.drift_within + r.absorption_jump)
            .sum()
    }

    pub fn max_reconstruction_error(&self) -> f64 {
        self.intervals
            .iter()
            .map(|r| r.reconstruction_error)
            .fold(0.0, f64::max)
    }

    /// Nonlinear-part norm at the end of the run.
    pub fn final_nonlinear_part_norm(&self) -> f64 {
        self.intervals
            .last()
            .map(|r| r.nonlinear_part_norm)
            .unwrap_or(0.0)
    }
}

/// The high-low iteration: on each interval `[jδ, (j+1)δ]` evolve the low
/// and full systems together, measure the remainder `(v, m̃±)`, absorb it
/// into the low solution at the interval end, and ledger the smoothed
/// energy of the low chain. The un-absorbed content of the low chain is
/// exactly the linear flow of the high data at all times.
///
/// Exceeding `max_intervals` returns the partial ledger with
/// `complete = false` rather than an error.
pub fn iterate_highlow(
    u0: &SpectralField,
    n0_plus: &SpectralField,
    n0_minus: &SpectralField,
    t_final: f64,
    cfg: &HighLowConfig,
    icfg: &IntegratorConfig,
    max_intervals: usize,
) -> Result<GrowthLedger> {
    if !cfg.delta.is_finite() || cfg.delta <= 0.0 {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    if t_final < 0.0 {
        return Err(Error::InvalidInput("t_final must be nonnegative".into()));
    }
    let grid = u0.grid();
    let im: IMultiplier = build_imultiplier(cfg.n_i, cfg.s, grid)?;
    let cutoff = grid.dealias_cutoff();

    let (low_plus, high_plus) = split_data(n0_plus, cfg.n_hl)?;
    let (low_minus, high_minus) = split_data(n0_minus, cfg.n_hl)?;
    let initial_full = ZakharovState::new(u0.clone(), n0_plus.clone(), n0_minus.clone(), 0.0)?;
    let mut full = initial_full.clone();
    let mut low = ZakharovState::new(u0.clone(), low_plus, low_minus, 0.0)?;

    let i_energy_initial = i_energy(&low, &im)?;
    let total_intervals = (t_final / cfg.delta).ceil() as usize;
    let run_intervals = total_intervals.min(max_intervals);

    let mut intervals = Vec::with_capacity(run_intervals);
    let mut e_start = i_energy_initial;
    for j in 0..run_intervals {
        let t_start = low.time();
        let t_end = ((j + 1) as f64 * cfg.delta).min(t_final);
        evolve_pair(&mut low, &mut full, t_end, icfg, false, |_, _| Ok(()))?;

        let dec = difference_at(&low, &full, &high_plus, &high_minus)?;
        let e_end = i_energy(&low, &im)?;
        let v_norm = sobolev_norm(&dec.v, cfg.s);
        let m_tilde_norm =
            dec.m_tilde_plus.l2_norm_sq().sqrt() + dec.m_tilde_minus.l2_norm_sq().sqrt();
        let nl_norm = nonlinear_part_norm(&full, &initial_full, cfg.s)?;

        // Absorption: the low chain takes over everything except the
        // linear high flow, then is re-projected onto the dealiased band.
        let absorbed = ZakharovState::new(
            project_leq(full.u(), cutoff),
            project_leq(&full.n_plus().sub(&dec.linear_high_plus)?, cutoff),
            project_leq(&full.n_minus().sub(&dec.linear_high_minus)?, cutoff),
            low.time(),
        )?;
        low = absorbed;
        let e_after = i_energy(&low, &im)?;

        // Band-limited audit of low + linear-high against the full flow.
        let recon_plus = project_leq(&low.n_plus().add(&dec.linear_high_plus)?, cutoff)
            .max_abs_diff(&project_leq(full.n_plus(), cutoff));
        let recon_minus = project_leq(&low.n_minus().add(&dec.linear_high_minus)?, cutoff)
            .max_abs_diff(&project_leq(full.n_minus(), cutoff));
        let recon_u = project_leq(&low.u().sub(full.u())?, cutoff).max_coeff_abs();
        let reconstruction_error = recon_plus.max(recon_minus).max(recon_u);

        let post_dec = difference_at(&low, &full, &high_plus, &high_minus)?;
        let post_v = sobolev_norm(&project_leq(&post_dec.v, cutoff), cfg.s);

        intervals.push(IntervalRecord {
            index: j,
            t_start,
            t_end,
            i_energy_start: e_start,
            i_energy_end: e_end,
            drift_within: e_end - e_start,
            absorption_jump: e_after - e_end,
            v_norm,
            m_tilde_norm,
            nonlinear_part_norm: nl_norm,
            reconstruction_error,
            post_absorption_v_norm: post_v,
        });
        e_start = e_after;
    }

    Ok(GrowthLedger {
        config: *cfg,
        intervals,
        i_energy_initial,
        i_energy_final: e_start,
        delta_epsilon_c1: cfg.delta_epsilon_check(),
        complete: run_intervals == total_intervals,
    })
}

/// One cell of a growth-in-time scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthCell {
    pub t_final: f64,
    pub nonlinear_part_norm: f64,
    pub max_reconstruction_error: f64,
}

/// Result of [`growth_time_scan`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthScan {
    pub cells: Vec<GrowthCell>,
    pub fitted_slope: f64,
    /// Admissible growth exponent `max{α(1−s)γ, (1/2−β)γ}`.
    pub predicted_exponent: f64,
}

/// Runs the iteration out to each horizon and fits the log-log growth of
/// the nonlinear-part norm against time.
pub fn growth_time_scan(
    u0: &SpectralField,
    n0_plus: &SpectralField,
    n0_minus: &SpectralField,
    t_values: &[f64],
    cfg: &HighLowConfig,
    icfg: &IntegratorConfig,
    max_intervals: usize,
) -> Result<GrowthScan> {
    if t_values.len() < 2 {
        return Err(Error::InvalidInput(
            "growth scan needs at least two horizons".into(),
        ));
    }
    let cells = t_values
        .par_iter()
        .map(|&t| {
            let ledger = iterate_highlow(u0, n0_plus, n0_minus, t, cfg, icfg, max_intervals)?;
            if !ledger.complete {
                return Err(Error::BudgetExceeded(format!(
                    "horizon {t} needs more than {max_intervals} intervals"
                )));
            }
            Ok(GrowthCell {
                t_final: t,
                nonlinear_part_norm: ledger.final_nonlinear_part_norm(),
                max_reconstruction_error: ledger.max_reconstruction_error(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = cells.iter().map(|c| c.t_final).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.nonlinear_part_norm).collect();
    if ys.iter().any(|y| *y < SIGNAL_FLOOR) {
        return Err(Error::InsufficientSignal(
            "nonlinear part below the signal floor at some horizon".into(),
        ));
    }
    let fit = log_log_fit(&xs, &ys)?;
    let predicted = (cfg.alpha * (1.0 - cfg.s) * cfg.gamma).max((0.5 - cfg.beta) * cfg.gamma);
    Ok(GrowthScan {
        cells,
        fitted_slope: fit.slope,
        predicted_exponent: predicted,
    })
}
