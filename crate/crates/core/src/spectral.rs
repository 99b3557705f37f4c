//! Periodic spectral grid on `[0, 2π)`: discrete Fourier transforms,
//! Fourier-multiplier application, dealiasing, and frequency projections.
//!
//! Coefficient convention: `f(x) = Σ_k c_k e^{ikx}` over the symmetric
//! integer frequencies `k ∈ {−M/2, …, M/2−1}`. All norms downstream are
//! plain coefficient sums (no 2π factor), so Parseval reads
//! `(1/M) Σ_j |f(x_j)|² = Σ_k |c_k|²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Absolute tolerance for the hermitian-symmetry check `c(−k) = conj(c(k))`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Japanese bracket `⟨k⟩ = (1 + k²)^{1/2}`.
#[inline]
pub fn bracket(k: i64) -> f64 {
    (1.0 + (k * k) as f64).sqrt()
}

/// Uniform periodic grid with `M` modes on a domain of fixed length `2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    num_modes: usize,
    dealias_cutoff: i64,
}

impl GridSpec {
    /// `num_modes` must be a power of two, at least 16. The dealias cutoff
    /// is the 2/3-rule value `floor(M/3)`.
    pub fn new(num_modes: usize) -> Result<Self> {
        if num_modes < 16 || !num_modes.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size must be a power of two >= 16, got {num_modes}"
            )));
        }
        Ok(GridSpec {
            num_modes,
            dealias_cutoff: (num_modes / 3) as i64,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn dealias_cutoff(&self) -> i64 {
        self.dealias_cutoff
    }

    /// Domain length; fixed to 2π.
    pub fn domain_length(&self) -> f64 {
        2.0 * PI
    }

    /// Collocation points `x_j = 2π j / M`.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.num_modes as f64;
        (0..self.num_modes).map(move |j| 2.0 * PI * j as f64 / m)
    }

    /// Frequencies in storage order: `0, 1, …, M/2−1, −M/2, …, −1`.
    pub fn frequencies(&self) -> impl Iterator<Item = i64> + '_ {
        let m = self.num_modes as i64;
        (0..m).map(move |j| if j < m / 2 { j } else { j - m })
    }

    pub fn min_freq(&self) -> i64 {
        -(self.num_modes as i64) / 2
    }

    pub fn max_freq(&self) -> i64 {
        self.num_modes as i64 / 2 - 1
    }

    /// Storage index of frequency `k`.
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        debug_assert!(k >= self.min_freq() && k <= self.max_freq());
        k.rem_euclid(self.num_modes as i64) as usize
    }
}

/// Complex Fourier coefficients of a function on the periodic grid.
///
/// The `hermitian` flag records that the physical-space function is real,
/// i.e. `c(−k) = conj(c(k))` within [`HERMITIAN_TOL`]. Operations preserve
/// it only when they preserve reality.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

impl SpectralField {
    /// Zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.num_modes()],
            hermitian: true,
        }
    }

    /// Build from coefficients in storage order; the hermitian flag is
    /// detected from the data.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.num_modes() {
            return Err(Error::InvalidInput(format!(
                "coefficient count {} does not match grid size {}",
                coeffs.len(),
                grid.num_modes()
            )));
        }
        let mut field = SpectralField {
            grid,
            coeffs,
            hermitian: false,
        };
        field.hermitian = field.hermitian_deviation() <= HERMITIAN_TOL;
        Ok(field)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Coefficient at frequency `k`.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    #[inline]
    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        let idx = self.grid.index_of(k);
        self.coeffs[idx] = value;
    }

    /// Re-detect the hermitian flag after manual coefficient edits.
    pub fn refresh_hermitian(&mut self) {
        self.hermitian = self.hermitian_deviation() <= HERMITIAN_TOL;
    }

    /// Max absolute deviation from `c(−k) = conj(c(k))`.
    ///
    /// The frequencies `0` and `−M/2` are their own mirror images, so their
    /// imaginary parts enter directly.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = self.coeff(0).im.abs();
        dev = dev.max(self.coeff(self.grid.min_freq()).im.abs());
        for k in 1..=self.grid.max_freq() {
            let d = (self.coeff(-k) - self.coeff(k).conj()).norm();
            dev = dev.max(d);
        }
        dev
    }

    /// Σ |c_k|² (squared L² norm in the coefficient convention).
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Max |self_k − other_k| over all frequencies.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch in max_abs_diff");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Pointwise sum; hermitian when both summands are.
    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        check_grids(self, other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        check_grids(self, other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scale(&self, factor: Complex64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        SpectralField {
            grid: self.grid,
            coeffs,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }
}

pub(crate) fn check_grids(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(a.grid.num_modes(), b.grid.num_modes()));
    }
    Ok(())
}

// Transform plans are cached per length and direction; rustfft plans are
// Send + Sync so concurrent readers share the same Arc.
type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

pub(crate) fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Interpolating coefficients of grid samples: `c_k` such that
/// `Σ_k c_k e^{ikx_j}` reproduces `samples[j]` at `x_j = 2πj/M`.
pub fn to_spectral(samples: &[Complex64], grid: GridSpec) -> Result<SpectralField> {
    if samples.len() != grid.num_modes() {
        return Err(Error::InvalidInput(format!(
            "sample count {} does not match grid size {}",
            samples.len(),
            grid.num_modes()
        )));
    }
    let mut buf = samples.to_vec();
    plan(buf.len(), true).process(&mut buf);
    let scale = 1.0 / grid.num_modes() as f64;
    for c in &mut buf {
        *c *= scale;
    }
    SpectralField::from_coeffs(grid, buf)
}

/// Evaluates `Σ_k c_k e^{ikx_j}` on the grid.
pub fn from_spectral(field: &SpectralField) -> Vec<Complex64> {
    let mut buf = field.coeffs.clone();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Applies a Fourier multiplier: `c'(k) = symbol(k) · c(k)`.
///
/// The hermitian flag survives only when the multiplier maps real
/// functions to real functions on this grid: `symbol(−k) = conj(symbol(k))`
/// on paired frequencies, and the self-paired output coefficients at `0`
/// and `−M/2` staying real.
pub fn apply_symbol<F>(field: &SpectralField, symbol: F) -> SpectralField
where
    F: Fn(i64) -> Complex64,
{
    let grid = field.grid;
    let mut coeffs = field.coeffs.clone();
    let mut symmetric = true;
    for k in 0..=grid.max_freq() {
        let s = symbol(k);
        coeffs[grid.index_of(k)] *= s;
        if k > 0 {
            let s_neg = symbol(-k);
            coeffs[grid.index_of(-k)] *= s_neg;
            if (s_neg - s.conj()).norm() > HERMITIAN_TOL {
                symmetric = false;
            }
        }
    }
    let min_idx = grid.index_of(grid.min_freq());
    coeffs[min_idx] *= symbol(grid.min_freq());
    let self_paired_real = coeffs[grid.index_of(0)].im.abs() <= HERMITIAN_TOL
        && coeffs[min_idx].im.abs() <= HERMITIAN_TOL;
    SpectralField {
        grid,
        coeffs,
        hermitian: field.hermitian && symmetric && self_paired_real,
    }
}

/// Real even multiplier shortcut (always reality-preserving).
pub fn apply_real_even_symbol<F>(field: &SpectralField, symbol: F) -> SpectralField
where
    F: Fn(i64) -> f64,
{
    let grid = field.grid;
    let coeffs = grid
        .frequencies()
        .zip(&field.coeffs)
        .map(|(k, c)| c * symbol(k))
        .collect();
    SpectralField {
        grid,
        coeffs,
        hermitian: field.hermitian,
    }
}

/// Sharp projection onto frequencies `|k| ≤ n`.
pub fn project_leq(field: &SpectralField, n: i64) -> SpectralField {
    assert!(n >= 0, "projection cutoff must be nonnegative");
    let grid = field.grid;
    let coeffs = grid
        .frequencies()
        .zip(&field.coeffs)
        .map(|(k, c)| if k.abs() <= n { *c } else { Complex64::new(0.0, 0.0) })
        .collect();
    SpectralField {
        grid,
        coeffs,
        hermitian: field.hermitian,
    }
}

/// Complementary projection onto `|k| > n`.
pub fn project_gt(field: &SpectralField, n: i64) -> SpectralField {
    assert!(n >= 0, "projection cutoff must be nonnegative");
    let grid = field.grid;
    let coeffs = grid
        .frequencies()
        .zip(&field.coeffs)
        .map(|(k, c)| if k.abs() > n { *c } else { Complex64::new(0.0, 0.0) })
        .collect();
    SpectralField {
        grid,
        coeffs,
        hermitian: field.hermitian,
    }
}

/// Dyadic shell containing frequency `k`: `N = 1` covers `|k| ≤ 1`,
/// `N ≥ 2` covers `N ≤ |k| < 2N`. Shells partition the integers.
pub fn dyadic_shell_of(k: i64) -> i64 {
    let a = k.abs();
    if a <= 1 {
        1
    } else {
        // Largest power of two not exceeding |k|.
        1_i64 << (63 - a.leading_zeros() as i64)
    }
}

/// Dyadic shell values needed to cover a grid: 1, 2, 4, …, M/2.
pub fn shells(grid: GridSpec) -> Vec<i64> {
    let top = grid.num_modes() as i64 / 2;
    let mut out = vec![1_i64];
    let mut n = 2_i64;
    while n <= top {
        out.push(n);
        n *= 2;
    }
    out
}

/// Littlewood-Paley piece: retains exactly the shell of `n`.
pub fn project_dyadic(field: &SpectralField, n: i64) -> SpectralField {
    assert!(n >= 1 && (n as u64).is_power_of_two(), "shell index must be dyadic");
    let grid = field.grid;
    let coeffs = grid
        .frequencies()
        .zip(&field.coeffs)
        .map(|(k, c)| {
            if dyadic_shell_of(k) == n {
                *c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SpectralField {
        grid,
        coeffs,
        hermitian: field.hermitian,
    }
}

/// 2/3-rule dealiasing: zeroes all `|k| > floor(M/3)`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    project_leq(field, field.grid.dealias_cutoff())
}

/// Pointwise product on the grid followed by 2/3-rule dealiasing.
///
/// Both inputs must already be dealiased for the quadratic aliasing images
/// to fall entirely outside the retained band.
pub fn product_dealiased(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    check_grids(a, b)?;
    let pa = from_spectral(a);
    let pb = from_spectral(b);
    let prod: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    Ok(dealias(&to_spectral(&prod, a.grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid64() -> GridSpec {
        GridSpec::new(64).unwrap()
    }

    fn random_samples(seed: u64, m: usize, real: bool) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| {
                let re = rng.gen_range(-1.0..1.0);
                let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
                Complex64::new(re, im)
            })
            .collect()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(8).is_err());
        assert!(GridSpec::new(48).is_err());
        assert!(GridSpec::new(16).is_ok());
        assert_eq!(GridSpec::new(64).unwrap().dealias_cutoff(), 21);
    }

    #[test]
    fn constant_samples_give_zero_mode_only() {
        let g = grid64();
        let samples = vec![Complex64::new(1.0, 0.0); 64];
        let f = to_spectral(&samples, g).unwrap();
        assert!((f.coeff(0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for k in g.frequencies() {
            if k != 0 {
                assert!(f.coeff(k).norm() < 1e-14, "leak at k={k}");
            }
        }
    }

    #[test]
    fn pure_mode_samples_give_single_coefficient() {
        let g = grid64();
        let samples: Vec<Complex64> = g
            .points()
            .map(|x| Complex64::new(0.0, x).exp())
            .collect();
        let f = to_spectral(&samples, g).unwrap();
        assert!((f.coeff(1) - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        for k in g.frequencies() {
            if k != 1 {
                assert!(f.coeff(k).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn from_spectral_evaluates_modes() {
        let g = grid64();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(0, Complex64::new(1.0, 0.0));
        for s in from_spectral(&f) {
            assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }

        let mut f = SpectralField::zeros(g);
        f.set_coeff(1, Complex64::new(1.0, 0.0));
        let samples = from_spectral(&f);
        for (x, s) in g.points().zip(samples) {
            assert!((s - Complex64::new(0.0, x).exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn roundtrip_over_seeded_draws() {
        let g = grid64();
        for seed in 0..100 {
            let samples = random_samples(seed, 64, true);
            let f = to_spectral(&samples, g).unwrap();
            let back = from_spectral(&f);
            let dev = samples
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "roundtrip deviation {dev} at seed {seed}");
        }
    }

    #[test]
    fn hermitian_fields_have_real_samples() {
        let g = grid64();
        for seed in 0..20 {
            let samples = random_samples(seed, 64, true);
            let f = to_spectral(&samples, g).unwrap();
            assert!(f.is_hermitian());
            let back = from_spectral(&f);
            for s in back {
                assert!(s.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn length_mismatch_is_an_input_error() {
        let g = grid64();
        let samples = vec![Complex64::new(0.0, 0.0); 32];
        assert!(matches!(
            to_spectral(&samples, g),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn symbol_eigenfunction_examples() {
        let g = grid64();
        // D = |k| on e^{i3x}
        let mut f = SpectralField::zeros(g);
        f.set_coeff(3, Complex64::new(1.0, 0.0));
        let df = apply_symbol(&f, |k| Complex64::new(k.abs() as f64, 0.0));
        assert!((df.coeff(3) - Complex64::new(3.0, 0.0)).norm() < 1e-15);

        // Δ = −k² on e^{i2x}
        let mut f = SpectralField::zeros(g);
        f.set_coeff(2, Complex64::new(1.0, 0.0));
        let lf = apply_symbol(&f, |k| Complex64::new(-((k * k) as f64), 0.0));
        assert!((lf.coeff(2) - Complex64::new(-4.0, 0.0)).norm() < 1e-15);

        // e^{itΔ} at t = 0.5 on e^{ix}: phase e^{−i·0.5}
        let mut f = SpectralField::zeros(g);
        f.set_coeff(1, Complex64::new(1.0, 0.0));
        let t = 0.5;
        let uf = apply_symbol(&f, |k| (Complex64::new(0.0, -((k * k) as f64) * t)).exp());
        let expected = Complex64::new(0.0, -t).exp();
        assert!((uf.coeff(1) - expected).norm() < 1e-15);
    }

    #[test]
    fn symbol_preserves_hermitian_only_when_symmetric() {
        let g = grid64();
        let samples = random_samples(7, 64, true);
        let f = dealias(&to_spectral(&samples, g).unwrap());
        assert!(f.is_hermitian());
        // |k| is real and even: reality preserved.
        let d = apply_symbol(&f, |k| Complex64::new(k.abs() as f64, 0.0));
        assert!(d.is_hermitian());
        // i·k (a real derivative) is conjugate-symmetric: preserved.
        let dx = apply_symbol(&f, |k| Complex64::new(0.0, k as f64));
        assert!(dx.is_hermitian());
        // Schrödinger phase is not: flag drops.
        let s = apply_symbol(&f, |k| Complex64::new(0.0, -((k * k) as f64) * 0.3).exp());
        assert!(!s.is_hermitian());
    }

    #[test]
    fn symbol_composition_is_pointwise_product() {
        let g = grid64();
        let samples = random_samples(11, 64, false);
        let f = to_spectral(&samples, g).unwrap();
        let a = |k: i64| Complex64::new(1.0 / (1.0 + k.abs() as f64), 0.2);
        let b = |k: i64| Complex64::new(0.0, k as f64).exp();
        let two_step = apply_symbol(&apply_symbol(&f, a), b);
        let one_step = apply_symbol(&f, |k| a(k) * b(k));
        // Up to the non-associativity of complex float multiplication.
        assert!(two_step.max_abs_diff(&one_step) < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let g = grid64();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(5, Complex64::new(1.0, 0.0));
        assert_eq!(project_leq(&f, 4).l2_norm_sq(), 0.0);
        assert!((project_leq(&f, 5).l2_norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_parseval_split() {
        let g = grid64();
        for seed in 0..20 {
            let f = to_spectral(&random_samples(seed, 64, false), g).unwrap();
            for n in [0_i64, 3, 10, 21, 40] {
                let low = project_leq(&f, n);
                let high = project_gt(&f, n);
                let total = low.l2_norm_sq() + high.l2_norm_sq();
                assert!((total - f.l2_norm_sq()).abs() < 1e-12);
                // Reconstruction is exact.
                assert_eq!(low.add(&high).unwrap().max_abs_diff(&f), 0.0);
                // Idempotent.
                assert_eq!(project_leq(&low, n).max_abs_diff(&low), 0.0);
            }
        }
    }

    #[test]
    fn dyadic_shell_assignments() {
        assert_eq!(dyadic_shell_of(0), 1);
        assert_eq!(dyadic_shell_of(1), 1);
        assert_eq!(dyadic_shell_of(-1), 1);
        assert_eq!(dyadic_shell_of(3), 2);
        assert_eq!(dyadic_shell_of(-3), 2);
        assert_eq!(dyadic_shell_of(4), 4);
        assert_eq!(dyadic_shell_of(7), 4);
        assert_eq!(dyadic_shell_of(8), 8);
    }

    #[test]
    fn dyadic_shells_partition_mass() {
        let g = grid64();
        for seed in 0..10 {
            let f = to_spectral(&random_samples(seed, 64, false), g).unwrap();
            let total: f64 = shells(g)
                .into_iter()
                .map(|n| project_dyadic(&f, n).l2_norm_sq())
                .sum();
            assert!((total - f.l2_norm_sq()).abs() < 1e-12);
        }
        // Every representable frequency lands in exactly one listed shell.
        for k in g.frequencies() {
            let n = dyadic_shell_of(k);
            assert!(shells(g).contains(&n), "k={k} shell {n} missing");
        }
    }

    #[test]
    fn plancherel_identity() {
        let g = grid64();
        for seed in 0..10 {
            let samples = random_samples(seed, 64, false);
            let f = to_spectral(&samples, g).unwrap();
            let phys: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / 64.0;
            let spec: f64 = f.l2_norm_sq();
            assert!((phys - spec).abs() <= 1e-10 * spec.max(1.0));
        }
    }

    #[test]
    fn product_dealiased_kills_high_band_exactly() {
        let g = grid64();
        let c = g.dealias_cutoff();
        // Two saturated-band fields: the raw product reaches 2c > c.
        let mut a = SpectralField::zeros(g);
        a.set_coeff(c, Complex64::new(1.0, 0.0));
        a.set_coeff(-c, Complex64::new(1.0, 0.0));
        let p = product_dealiased(&a, &a).unwrap();
        for k in g.frequencies() {
            if k.abs() > c {
                assert_eq!(p.coeff(k).norm(), 0.0);
            }
        }
        // Zero mode of the product survives: 2 (from e^{icx}·e^{−icx} both ways).
        assert!((p.coeff(0) - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    }
}
