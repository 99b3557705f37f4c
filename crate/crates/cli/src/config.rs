//! Experiment configuration: a TOML file with nested sections. Unknown
//! keys are hard errors — a typo in an exponent name must not silently
//! change the science.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use zakharov::dynamics::{IntegratorConfig, SplitScheme};
use zakharov::spectral::{GridSpec, SpectralField};
use zakharov::state::{
    build_state, fl_data, fl_data_saturated, gibbs_sample, plane_wave, smooth_packet, u_gaussian,
    DataKind, DataRecipe, WaveCoupling, ZakharovState,
};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub data: Option<DataSection>,
    pub simulate: Option<SimulateSection>,
    pub conserve: Option<ConserveSection>,
    pub highlow: Option<HighlowSection>,
    pub estimates: Option<EstimatesSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub modes: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SplitScheme,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            dt: 1e-3,
            scheme: SplitScheme::Strang3,
            record_every: default_record_every(),
        }
    }
}

fn default_scheme() -> SplitScheme {
    SplitScheme::Strang3
}

fn default_record_every() -> usize {
    10
}

/// Initial-data selector. The random kinds mirror the library's data
/// recipes; `smooth_packet` draws band-limited Gaussian envelopes for
/// conservation and convergence studies.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub kind: String,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_one")]
    pub c1: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_one_u64")]
    pub seed: u64,
    #[serde(default = "default_one_i64")]
    pub kmin: i64,
    /// Lowest populated `|k|` of the Schrödinger draw (`fl_deterministic`
    /// and `gibbs_gaussian` kinds); 0 keeps the full spectrum.
    #[serde(default)]
    pub u_kmin: i64,
    /// Rescale the Schrödinger draw to this `H^s` norm when positive.
    #[serde(default)]
    pub u_norm: f64,
    #[serde(default)]
    pub coupling: WaveCoupling,
    /// `|h_k| = c1` exactly instead of uniform on the disk.
    #[serde(default)]
    pub saturated: bool,
    // smooth_packet parameters
    #[serde(default = "default_k0")]
    pub k0: f64,
    #[serde(default = "default_kmax")]
    pub kmax: i64,
    #[serde(default = "default_one")]
    pub amplitude: f64,
}

fn default_s() -> f64 {
    0.6
}
fn default_beta() -> f64 {
    0.45
}
fn default_one() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_one_u64() -> u64 {
    1
}
fn default_one_i64() -> i64 {
    1
}
fn default_k0() -> f64 {
    6.0
}
fn default_kmax() -> i64 {
    16
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub t_final: f64,
    /// Smoothing cutoff used for the `i_energy` diagnostic column.
    #[serde(default = "default_n_i")]
    pub n_i: i64,
    /// Write a state checkpoint every this many records (0 = off).
    #[serde(default)]
    pub checkpoint_every: usize,
}

fn default_n_i() -> i64 {
    16
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConserveSection {
    pub t_final: f64,
    pub dt_levels: Vec<f64>,
    #[serde(default = "default_mass_tol")]
    pub mass_tol: f64,
}

fn default_mass_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HighlowSection {
    pub s: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub n_hl_list: Vec<i64>,
    /// Measurement time for the smoothing scan; derived from the δ rule
    /// of the template (largest cutoff) when omitted.
    pub t: Option<f64>,
    pub dt: f64,
    pub m: usize,
    pub seed_list: Vec<u64>,
    pub epsilon0: f64,
    pub k: f64,
    pub c1: f64,
    /// Horizons for the iteration driver's growth scan; empty skips it.
    #[serde(default)]
    pub t_scan: Vec<f64>,
    /// Cutoff the iteration driver runs at (first of `n_hl_list` when 0).
    #[serde(default)]
    pub n_hl_iterate: i64,
    #[serde(default = "default_max_intervals")]
    pub max_intervals: usize,
}

fn default_max_intervals() -> usize {
    100_000
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesSection {
    pub n_values: Vec<i64>,
    pub l_values: Vec<i64>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default = "default_one_u64")]
    pub seed: u64,
    #[serde(default = "default_k1_max")]
    pub k1_max: i64,
    #[serde(default = "default_fuzz")]
    pub fuzz_tuples: u64,
    /// Certified envelope for `count/(L·N)`.
    #[serde(default = "default_count_envelope")]
    pub count_envelope: f64,
    /// Certified envelope for the bilinear ratio.
    #[serde(default = "default_ratio_envelope")]
    pub ratio_envelope: f64,
}

fn default_trials() -> u32 {
    1000
}
fn default_k1_max() -> i64 {
    1000
}
fn default_fuzz() -> u64 {
    1_000_000
}
fn default_count_envelope() -> f64 {
    16.0
}
fn default_ratio_envelope() -> f64 {
    4.0
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.grid.modes).map_err(CliError::from_lib)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        IntegratorConfig::new(
            self.integrator.dt,
            self.integrator.scheme,
            self.integrator.record_every,
        )
        .map_err(CliError::from_lib)
    }

    /// Accuracy guideline `dt ≤ ½ (2π/M)²`; exceeding it is flagged, not
    /// forbidden (the linear substep is exact).
    pub fn dt_flagged(&self) -> bool {
        let m = self.grid.modes as f64;
        let guideline = 0.5 * (std::f64::consts::TAU / m).powi(2);
        self.integrator.dt > guideline
    }

    pub fn require_data(&self) -> Result<&DataSection, CliError> {
        self.data
            .as_ref()
            .ok_or_else(|| CliError::usage("missing required section [data]".into()))
    }
}

impl DataSection {
    /// Builds the initial state, applying the seed override first.
    pub fn build(&self, grid: GridSpec, seed_override: Option<u64>) -> Result<ZakharovState, CliError> {
        let seed = seed_override.unwrap_or(self.seed);
        let state = match self.kind.as_str() {
            "fl_deterministic" | "gibbs_gaussian" | "plane_wave" => {
                let kind = match self.kind.as_str() {
                    "fl_deterministic" => DataKind::FlDeterministic,
                    "gibbs_gaussian" => DataKind::GibbsGaussian,
                    _ => DataKind::PlaneWave,
                };
                let recipe = DataRecipe {
                    kind,
                    s: self.s,
                    beta: self.beta,
                    c1: self.c1,
                    r: self.r,
                    epsilon: self.epsilon,
                    seed,
                    kmin: self.kmin,
                };
                let mut state = if self.saturated && kind == DataKind::FlDeterministic {
                    // Saturated variant: rebuild the wave pair with
                    // |h_k| = c1 draws.
                    let u = u_gaussian(self.s, self.epsilon, seed, grid)
                        .map_err(CliError::from_lib)?;
                    let a = fl_data_saturated(self.beta, self.c1, self.kmin, seed.wrapping_add(1), grid)
                        .map_err(CliError::from_lib)?;
                    let b = fl_data_saturated(self.beta, self.c1, self.kmin, seed.wrapping_add(2), grid)
                        .map_err(CliError::from_lib)?;
                    let ib = b.scale(Complex64::new(0.0, 1.0));
                    ZakharovState::new(
                        u,
                        a.add(&ib).map_err(CliError::from_lib)?,
                        a.sub(&ib).map_err(CliError::from_lib)?,
                        0.0,
                    )
                    .map_err(CliError::from_lib)?
                } else {
                    build_state(&recipe, self.coupling, grid).map_err(CliError::from_lib)?
                };
                if kind != DataKind::PlaneWave && (self.u_kmin > 0 || self.u_norm > 0.0) {
                    state = reshape_u(&state, self.u_kmin, self.u_norm, self.s)?;
                }
                state
            }
            "smooth_packet" => {
                let u = smooth_packet(self.amplitude, self.k0, self.kmax, seed, grid, false)
                    .map_err(CliError::from_lib)?;
                let a = smooth_packet(
                    self.amplitude,
                    self.k0,
                    self.kmax,
                    seed.wrapping_add(1),
                    grid,
                    true,
                )
                .map_err(CliError::from_lib)?;
                let b = smooth_packet(
                    self.amplitude,
                    self.k0,
                    self.kmax,
                    seed.wrapping_add(2),
                    grid,
                    true,
                )
                .map_err(CliError::from_lib)?;
                let ib = b.scale(Complex64::new(0.0, 1.0));
                ZakharovState::new(
                    u,
                    a.add(&ib).map_err(CliError::from_lib)?,
                    a.sub(&ib).map_err(CliError::from_lib)?,
                    0.0,
                )
                .map_err(CliError::from_lib)?
            }
            "zero" => ZakharovState::new(
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
                0.0,
            )
            .map_err(CliError::from_lib)?,
            other => {
                return Err(CliError::usage(format!(
                    "unknown data kind {other:?}; expected fl_deterministic, gibbs_gaussian, plane_wave, smooth_packet, or zero"
                )))
            }
        };
        Ok(state)
    }

    /// Wave-pair fields for scan commands that drive the library directly.
    pub fn wave_pair(
        &self,
        grid: GridSpec,
        seed: u64,
    ) -> Result<(SpectralField, SpectralField), CliError> {
        let draw = |sub: u64| -> Result<SpectralField, CliError> {
            if self.saturated {
                fl_data_saturated(self.beta, self.c1, self.kmin, seed.wrapping_add(sub), grid)
                    .map_err(CliError::from_lib)
            } else {
                fl_data(self.beta, self.c1, self.kmin, seed.wrapping_add(sub), grid)
                    .map_err(CliError::from_lib)
            }
        };
        let a = draw(1)?;
        let b = draw(2)?;
        let ib = b.scale(Complex64::new(0.0, 1.0));
        Ok((
            a.add(&ib).map_err(CliError::from_lib)?,
            a.sub(&ib).map_err(CliError::from_lib)?,
        ))
    }

    pub fn u_field(&self, grid: GridSpec, seed: u64) -> Result<SpectralField, CliError> {
        let raw = u_gaussian(self.s, self.epsilon, seed, grid).map_err(CliError::from_lib)?;
        let state = ZakharovState::new(
            raw,
            SpectralField::zeros(grid),
            SpectralField::zeros(grid),
            0.0,
        )
        .map_err(CliError::from_lib)?;
        let reshaped = reshape_u(&state, self.u_kmin, self.u_norm, self.s)?;
        Ok(reshaped.u().clone())
    }
}

fn reshape_u(
    state: &ZakharovState,
    u_kmin: i64,
    u_norm: f64,
    s: f64,
) -> Result<ZakharovState, CliError> {
    let mut u = state.u().clone();
    if u_kmin > 0 {
        u = zakharov::spectral::project_gt(&u, u_kmin - 1);
    }
    if u_norm > 0.0 {
        let current = zakharov::diagnostics::sobolev_norm(&u, s);
        if current == 0.0 {
            return Err(CliError::usage(
                "u_norm requested but the Schrödinger draw is empty".into(),
            ));
        }
        u = u.scale(Complex64::new(u_norm / current, 0.0));
    }
    ZakharovState::new(
        u,
        state.n_plus().clone(),
        state.n_minus().clone(),
        state.time(),
    )
    .map_err(CliError::from_lib)
}

/// Convenience used by `plane_wave` configs.
pub fn plane_wave_state(
    data: &DataSection,
    grid: GridSpec,
) -> Result<ZakharovState, CliError> {
    let u = plane_wave(Complex64::new(data.c1, 0.0), data.kmin, grid)
        .map_err(CliError::from_lib)?;
    ZakharovState::new(
        u,
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        0.0,
    )
    .map_err(CliError::from_lib)
}

/// Gibbs-style wave pair at regularity `r` (used by the conservation and
/// energy-trend studies).
pub fn gibbs_wave_pair(
    r: f64,
    epsilon: f64,
    amplitude: f64,
    seed: u64,
    grid: GridSpec,
) -> Result<(SpectralField, SpectralField), CliError> {
    let a = gibbs_sample(r, epsilon, seed, grid)
        .map_err(CliError::from_lib)?
        .scale(Complex64::new(amplitude, 0.0));
    let b = gibbs_sample(r, epsilon, seed.wrapping_add(1), grid)
        .map_err(CliError::from_lib)?
        .scale(Complex64::new(amplitude, 0.0));
    let ib = b.scale(Complex64::new(0.0, 1.0));
    Ok((
        a.add(&ib).map_err(CliError::from_lib)?,
        a.sub(&ib).map_err(CliError::from_lib)?,
    ))
}
