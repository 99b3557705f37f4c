//! Time integration by operator splitting with exact substeps.
//!
//! One step of the three-part `L/P/F` splitting:
//!
//! - `L(τ)`: exact linear flow, `û ← e^{−ik²τ} û`, `n̂± ← e^{∓i|k|τ} n̂±`;
//! - `P(τ)`: pointwise potential phase `u ← u · e^{−i n τ}` with
//!   `n = Re((n⁺+n⁻)/2)` frozen — unitary on the grid samples;
//! - `F(τ)`: wave forcing `n̂± ← n̂± ∓ i|k| (|u|²)^(k) τ` with `|u|²`
//!   frozen and dealiased.
//!
//! Every substep either is unitary on `u` or leaves `u` untouched, so the
//! mass is conserved to roundoff regardless of the step size.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{dealias, from_spectral, to_spectral, SpectralField};
use crate::state::ZakharovState;

/// Any coefficient above this magnitude (or non-finite) is a blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitScheme {
    /// Symmetric `L(dt/2) P(dt/2) F(dt) P(dt/2) L(dt/2)`; second order.
    Strang3,
    /// `L(dt) P(dt) F(dt)`; first order.
    Lie3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: SplitScheme,
    /// Emit a record to the observer every this many steps.
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, scheme: SplitScheme, record_every: usize) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        Ok(IntegratorConfig {
            dt,
            scheme,
            record_every,
        })
    }
}

/// Exact linear flow over time `t` (no coupling): solves
/// `iu_t + Δu = 0` and `in±_t ∓ Dn± = 0` by diagonal phases.
/// Satisfies the group law exactly up to roundoff.
pub fn linear_flow(state: &ZakharovState, t: f64) -> ZakharovState {
    let grid = state.grid();
    let mut u = state.u().clone();
    let mut n_plus = state.n_plus().clone();
    let mut n_minus = state.n_minus().clone();
    for k in grid.frequencies() {
        let schrodinger = Complex64::new(0.0, -((k * k) as f64) * t).exp();
        let wave = Complex64::new(0.0, -(k.abs() as f64) * t).exp();
        u.set_coeff(k, u.coeff(k) * schrodinger);
        n_plus.set_coeff(k, n_plus.coeff(k) * wave);
        n_minus.set_coeff(k, n_minus.coeff(k) * wave.conj());
    }
    ZakharovState::from_parts_unchecked(u, n_plus, n_minus, state.time() + t, state.real_wave())
}

/// Free wave flow `W±(t)` on a single field: `ĉ(k) ← e^{∓i|k|t} ĉ(k)`,
/// upper sign for the `n⁺` component.
pub fn wave_flow(field: &SpectralField, upper_sign: bool, t: f64) -> SpectralField {
    let sign = if upper_sign { -1.0 } else { 1.0 };
    crate::spectral::apply_symbol(field, |k| {
        Complex64::new(0.0, sign * k.abs() as f64 * t).exp()
    })
}

fn phase_substep(state: &mut ZakharovState, tau: f64) -> Result<()> {
    let half_sum = state
        .n_plus()
        .add(state.n_minus())?
        .scale(Complex64::new(0.5, 0.0));
    let n_phys = from_spectral(&half_sum);
    let mut u_phys = from_spectral(state.u());
    for (uj, nj) in u_phys.iter_mut().zip(&n_phys) {
        *uj *= Complex64::new(0.0, -nj.re * tau).exp();
    }
    // The exponential is not band-limited, so the product is dealiased;
    // for band-limited-preserving (smooth) dynamics the chopped mass is at
    // roundoff and the substep is unitary in practice.
    let u = dealias(&to_spectral(&u_phys, state.grid())?);
    *state = ZakharovState::from_parts_unchecked(
        u,
        state.n_plus().clone(),
        state.n_minus().clone(),
        state.time(),
        state.real_wave(),
    );
    Ok(())
}

fn forcing_substep(state: &mut ZakharovState, tau: f64) -> Result<()> {
    let u_phys = from_spectral(state.u());
    let sq: Vec<Complex64> = u_phys
        .iter()
        .map(|u| Complex64::new(u.norm_sqr(), 0.0))
        .collect();
    let h = dealias(&to_spectral(&sq, state.grid())?);
    let mut n_plus = state.n_plus().clone();
    let mut n_minus = state.n_minus().clone();
    for k in state.grid().frequencies() {
        let kick = Complex64::new(0.0, -(k.abs() as f64) * tau) * h.coeff(k);
        n_plus.set_coeff(k, n_plus.coeff(k) + kick);
        n_minus.set_coeff(k, n_minus.coeff(k) - kick);
    }
    *state = ZakharovState::from_parts_unchecked(
        state.u().clone(),
        n_plus,
        n_minus,
        state.time(),
        state.real_wave(),
    );
    Ok(())
}

fn linear_substep(state: &mut ZakharovState, tau: f64) {
    let t = state.time();
    *state = linear_flow(state, tau);
    // linear_flow advanced the clock; substeps manage it at step level.
    *state = ZakharovState::from_parts_unchecked(
        state.u().clone(),
        state.n_plus().clone(),
        state.n_minus().clone(),
        t,
        state.real_wave(),
    );
}

fn step_sized(state: &ZakharovState, dt: f64, scheme: SplitScheme) -> Result<ZakharovState> {
    let mut next = state.clone();
    match scheme {
        SplitScheme::Strang3 => {
            linear_substep(&mut next, 0.5 * dt);
            phase_substep(&mut next, 0.5 * dt)?;
            forcing_substep(&mut next, dt)?;
            phase_substep(&mut next, 0.5 * dt)?;
            linear_substep(&mut next, 0.5 * dt);
        }
        SplitScheme::Lie3 => {
            linear_substep(&mut next, dt);
            phase_substep(&mut next, dt)?;
            forcing_substep(&mut next, dt)?;
        }
    }
    let next = ZakharovState::from_parts_unchecked(
        next.u().clone(),
        next.n_plus().clone(),
        next.n_minus().clone(),
        state.time() + dt,
        next.real_wave(),
    );
    if !next.is_finite() || next.max_coeff_abs() > BLOWUP_THRESHOLD {
        return Err(Error::BlowUp {
            time: state.time(),
            last_state: Box::new(state.clone()),
        });
    }
    Ok(next)
}

/// Advances the state by one step of `cfg.dt`.
pub fn step(state: &ZakharovState, cfg: &IntegratorConfig) -> Result<ZakharovState> {
    step_sized(state, cfg.dt, cfg.scheme)
}

/// Advances by a step of the opposite sign (the adjoint direction).
pub fn step_back(state: &ZakharovState, cfg: &IntegratorConfig) -> Result<ZakharovState> {
    step_sized(state, -cfg.dt, cfg.scheme)
}

/// Evolves to time `T`, invoking the observer on the initial state, every
/// `record_every`-th step, and on the final state. The last partial step
/// is taken with exactly the remaining size, so the run ends at `T`.
pub fn evolve<F>(
    state: &ZakharovState,
    t_final: f64,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<ZakharovState>
where
    F: FnMut(&ZakharovState) -> Result<()>,
{
    if t_final < state.time() {
        return Err(Error::InvalidInput(format!(
            "target time {t_final} precedes state time {}",
            state.time()
        )));
    }
    observer(state)?;
    let span = t_final - state.time();
    if span == 0.0 {
        return Ok(state.clone());
    }
    let whole_steps = (span / cfg.dt - 1e-9).floor().max(0.0) as u64;
    let mut current = state.clone();
    for i in 1..=whole_steps {
        current = step(&current, cfg)?;
        if i % cfg.record_every as u64 == 0 {
            observer(&current)?;
        }
    }
    let remainder = t_final - current.time();
    if remainder > 1e-12 * t_final.abs().max(1.0) {
        current = step_sized(&current, remainder, cfg.scheme)?;
    }
    observer(&current)?;
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{hamiltonian, mass};
    use crate::spectral::GridSpec;
    use crate::state::{
        fl_data, plane_wave, smooth_packet, u_gaussian, wave_conjugation_deviation, ZakharovState,
    };

    fn grid(m: usize) -> GridSpec {
        GridSpec::new(m).unwrap()
    }

    fn smooth_state(seed: u64, m: usize, amplitude: f64) -> ZakharovState {
        let g = grid(m);
        let u = smooth_packet(amplitude, 3.0, 8, seed, g, false).unwrap();
        let a = smooth_packet(amplitude, 3.0, 8, seed ^ 0xa5a5, g, true).unwrap();
        let b = smooth_packet(amplitude, 3.0, 8, seed ^ 0x5a5a, g, true).unwrap();
        let ib = b.scale(Complex64::new(0.0, 1.0));
        ZakharovState::new(u, a.add(&ib).unwrap(), a.sub(&ib).unwrap(), 0.0).unwrap()
    }

    fn rough_state(seed: u64, m: usize) -> ZakharovState {
        let g = grid(m);
        let u = u_gaussian(0.6, 0.05, seed, g).unwrap();
        let a = fl_data(0.45, 1.0, 1, seed ^ 1, g).unwrap();
        let b = fl_data(0.45, 1.0, 1, seed ^ 2, g).unwrap();
        let ib = b.scale(Complex64::new(0.0, 1.0));
        ZakharovState::new(u, a.add(&ib).unwrap(), a.sub(&ib).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn integrator_config_validation() {
        assert!(IntegratorConfig::new(0.0, SplitScheme::Strang3, 1).is_err());
        assert!(IntegratorConfig::new(-1e-3, SplitScheme::Strang3, 1).is_err());
        assert!(IntegratorConfig::new(f64::NAN, SplitScheme::Strang3, 1).is_err());
        assert!(IntegratorConfig::new(1e-3, SplitScheme::Strang3, 0).is_err());
        assert!(IntegratorConfig::new(1e-3, SplitScheme::Lie3, 5).is_ok());
    }

    #[test]
    fn linear_flow_translates_plane_wave() {
        let g = grid(64);
        let st = ZakharovState::new(
            plane_wave(Complex64::new(1.0, 0.0), 1, g).unwrap(),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
            0.0,
        )
        .unwrap();
        let t = 0.37;
        let moved = linear_flow(&st, t);
        // e^{i(x−t)}: coefficient picks up e^{−it}.
        let expected = Complex64::new(0.0, -t).exp();
        assert!((moved.u().coeff(1) - expected).norm() < 1e-15);
        assert_eq!(moved.time(), t);

        let id = linear_flow(&st, 0.0);
        assert_eq!(id.max_abs_diff(&st), 0.0);
    }

    #[test]
    fn linear_flow_group_law() {
        let st = rough_state(3, 64);
        for (a, b) in [(0.3, 0.5), (1.7, -0.4), (0.05, 0.05)] {
            let two_step = linear_flow(&linear_flow(&st, a), b);
            let one_step = linear_flow(&st, a + b);
            assert!(two_step.max_abs_diff(&one_step) < 1e-13);
        }
    }

    #[test]
    fn plane_wave_is_an_exact_solution() {
        let g = grid(64);
        let st = ZakharovState::new(
            plane_wave(Complex64::new(1.0, 0.0), 1, g).unwrap(),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
            0.0,
        )
        .unwrap();
        let cfg = IntegratorConfig::new(1e-2, SplitScheme::Strang3, 100).unwrap();
        let end = evolve(&st, 2.0, &cfg, |_| Ok(())).unwrap();
        let expected = Complex64::new(0.0, -2.0).exp();
        assert!((end.u().coeff(1) - expected).norm() < 1e-10);
        assert!(end.n_plus().max_coeff_abs() < 1e-12);
        assert!(end.n_minus().max_coeff_abs() < 1e-12);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = grid(64);
        let st = ZakharovState::new(
            SpectralField::zeros(g),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
            0.0,
        )
        .unwrap();
        let cfg = IntegratorConfig::new(0.05, SplitScheme::Strang3, 1).unwrap();
        let end = evolve(&st, 1.0, &cfg, |_| Ok(())).unwrap();
        assert_eq!(end.max_coeff_abs(), 0.0);
    }

    #[test]
    fn strang_self_convergence_is_second_order() {
        let st = smooth_state(11, 64, 1.0);
        let t_final = 1.0;
        let run = |dt: f64| {
            let cfg = IntegratorConfig::new(dt, SplitScheme::Strang3, usize::MAX).unwrap();
            evolve(&st, t_final, &cfg, |_| Ok(())).unwrap()
        };
        let coarse = run(8e-3);
        let medium = run(4e-3);
        let fine = run(2e-3);
        let e_coarse = coarse.max_abs_diff(&medium);
        let e_fine = medium.max_abs_diff(&fine);
        let ratio = e_coarse / e_fine;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "self-convergence ratio {ratio}, errors {e_coarse:.3e}/{e_fine:.3e}"
        );
    }

    #[test]
    fn lie_splitting_is_first_order() {
        let st = smooth_state(12, 64, 1.0);
        let run = |dt: f64| {
            let cfg = IntegratorConfig::new(dt, SplitScheme::Lie3, usize::MAX).unwrap();
            evolve(&st, 1.0, &cfg, |_| Ok(())).unwrap()
        };
        let e_coarse = run(8e-3).max_abs_diff(&run(4e-3));
        let e_fine = run(4e-3).max_abs_diff(&run(2e-3));
        let ratio = e_coarse / e_fine;
        assert!(
            (1.6..=2.4).contains(&ratio),
            "first-order ratio came out {ratio}"
        );
    }

    #[test]
    fn mass_is_conserved_to_roundoff() {
        let st = smooth_state(5, 128, 1.0);
        let m0 = mass(st.u());
        let cfg = IntegratorConfig::new(2e-3, SplitScheme::Strang3, usize::MAX).unwrap();
        let end = evolve(&st, 2.0, &cfg, |_| Ok(())).unwrap();
        let drift = (mass(end.u()) - m0).abs() / m0;
        assert!(drift < 1e-12, "relative mass drift {drift}");
    }

    #[test]
    fn mass_leak_for_rough_data_shrinks_with_dt() {
        // Rough data pushes spectral content past the dealias cutoff, so
        // the phase substep's 2/3-rule chop costs a dt-proportional sliver
        // of mass.
        let st = rough_state(5, 128);
        let m0 = mass(st.u());
        let drift_at = |dt: f64| {
            let cfg = IntegratorConfig::new(dt, SplitScheme::Strang3, usize::MAX).unwrap();
            let end = evolve(&st, 1.0, &cfg, |_| Ok(())).unwrap();
            (mass(end.u()) - m0).abs() / m0
        };
        let coarse = drift_at(2e-3);
        let fine = drift_at(5e-4);
        assert!(coarse < 5e-4, "relative mass drift {coarse}");
        assert!(
            fine < 0.5 * coarse,
            "mass leak did not shrink with dt: {coarse:.3e} -> {fine:.3e}"
        );
    }

    #[test]
    fn hamiltonian_drift_scales_second_order() {
        let st = smooth_state(17, 64, 1.0);
        let h0 = hamiltonian(&st).unwrap();
        let max_drift = |dt: f64| {
            let cfg = IntegratorConfig::new(dt, SplitScheme::Strang3, 1).unwrap();
            let mut worst = 0.0f64;
            evolve(&st, 1.0, &cfg, |s| {
                worst = worst.max((hamiltonian(s).unwrap() - h0).abs());
                Ok(())
            })
            .unwrap();
            worst
        };
        let d1 = max_drift(4e-3);
        let d2 = max_drift(2e-3);
        let ratio = d1 / d2;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "hamiltonian drift ratio {ratio} ({d1:.3e} vs {d2:.3e})"
        );
    }

    #[test]
    fn reality_is_preserved_along_the_flow() {
        let st = rough_state(23, 64);
        assert!(st.real_wave());
        let cfg = IntegratorConfig::new(1e-3, SplitScheme::Strang3, usize::MAX).unwrap();
        let mut current = st;
        for _ in 0..200 {
            current = step(&current, &cfg).unwrap();
        }
        let dev = wave_conjugation_deviation(current.n_plus(), current.n_minus());
        assert!(dev < 1e-11, "conjugation symmetry drifted to {dev}");
    }

    #[test]
    fn strang_steps_reverse_exactly() {
        let st = smooth_state(31, 64, 1.0);
        let cfg = IntegratorConfig::new(5e-3, SplitScheme::Strang3, usize::MAX).unwrap();
        let mut current = st.clone();
        for _ in 0..100 {
            current = step(&current, &cfg).unwrap();
        }
        for _ in 0..100 {
            current = step_back(&current, &cfg).unwrap();
        }
        assert!(current.max_abs_diff(&st) < 1e-9);
        assert!(current.time().abs() < 1e-9);
    }

    #[test]
    fn evolve_handles_degenerate_spans() {
        let st = rough_state(41, 64);
        let cfg = IntegratorConfig::new(1e-2, SplitScheme::Strang3, 1).unwrap();
        let mut count = 0;
        let end = evolve(&st, 0.0, &cfg, |_| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 1);
        assert_eq!(end.max_abs_diff(&st), 0.0);

        // A span that is not a multiple of dt still lands exactly on T.
        let end = evolve(&st, 0.0351, &cfg, |_| Ok(())).unwrap();
        assert!((end.time() - 0.0351).abs() < 1e-14);

        assert!(evolve(&st, -1.0, &cfg, |_| Ok(())).is_err());
    }

    #[test]
    fn blow_up_is_detected_and_carries_the_last_state() {
        let g = grid(64);
        // Absurd amplitude forces the wave forcing to overflow quickly.
        let u = u_gaussian(0.6, 0.05, 3, g)
            .unwrap()
            .scale(Complex64::new(1e8, 0.0));
        let st = ZakharovState::new(u, SpectralField::zeros(g), SpectralField::zeros(g), 0.0)
            .unwrap();
        let cfg = IntegratorConfig::new(1e-2, SplitScheme::Strang3, 1).unwrap();
        match evolve(&st, 10.0, &cfg, |_| Ok(())) {
            Err(Error::BlowUp { time, last_state }) => {
                assert!(time >= 0.0);
                assert!(last_state.is_finite());
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
