//! Zakharov states and the initial-data families used throughout:
//! Fourier-Lebesgue deterministic wave data, Gaussian random data, plane
//! waves, and the conversion between `(n, n_t)` and the first-order
//! variables `(n⁺, n⁻)`.
//!
//! All wave data is mean-zero; `D⁻¹` is only defined on mean-zero fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    apply_real_even_symbol, bracket, check_grids, GridSpec, SpectralField, HERMITIAN_TOL,
};

/// Tolerance on the zero mode of wave data.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// The evolving system state: Schrödinger envelope `u`, first-order wave
/// variables `n±`, and the model clock.
#[derive(Debug, Clone)]
pub struct ZakharovState {
    u: SpectralField,
    n_plus: SpectralField,
    n_minus: SpectralField,
    time: f64,
    real_wave: bool,
}

impl ZakharovState {
    /// Validating constructor. Requires mean-zero wave parts; pins their
    /// zero modes to exactly 0 and detects the physical-reality flag
    /// (`n̂⁻(k) = conj(n̂⁺(−k))`).
    pub fn new(
        u: SpectralField,
        mut n_plus: SpectralField,
        mut n_minus: SpectralField,
        time: f64,
    ) -> Result<Self> {
        check_grids(&u, &n_plus)?;
        check_grids(&u, &n_minus)?;
        for (name, f) in [("n_plus", &n_plus), ("n_minus", &n_minus)] {
            let mean = f.coeff(0).norm();
            if mean > MEAN_ZERO_TOL {
                return Err(Error::InvalidInput(format!(
                    "{name} has nonzero mean {mean:.3e}; de-mean the wave data first"
                )));
            }
        }
        n_plus.set_coeff(0, Complex64::new(0.0, 0.0));
        n_minus.set_coeff(0, Complex64::new(0.0, 0.0));
        let real_wave = wave_conjugation_deviation(&n_plus, &n_minus) <= HERMITIAN_TOL;
        Ok(ZakharovState {
            u,
            n_plus,
            n_minus,
            time,
            real_wave,
        })
    }

    /// Fast constructor for integrator internals; callers guarantee the
    /// grid agreement and mean-zero invariants are maintained.
    pub(crate) fn from_parts_unchecked(
        u: SpectralField,
        n_plus: SpectralField,
        n_minus: SpectralField,
        time: f64,
        real_wave: bool,
    ) -> Self {
        ZakharovState {
            u,
            n_plus,
            n_minus,
            time,
            real_wave,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.u.grid()
    }

    pub fn u(&self) -> &SpectralField {
        &self.u
    }

    pub fn n_plus(&self) -> &SpectralField {
        &self.n_plus
    }

    pub fn n_minus(&self) -> &SpectralField {
        &self.n_minus
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// True when the wave pair encodes real `(n, n_t)`.
    pub fn real_wave(&self) -> bool {
        self.real_wave
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.n_plus.is_finite() && self.n_minus.is_finite()
    }

    /// Largest coefficient magnitude across all three fields.
    pub fn max_coeff_abs(&self) -> f64 {
        self.u
            .max_coeff_abs()
            .max(self.n_plus.max_coeff_abs())
            .max(self.n_minus.max_coeff_abs())
    }

    /// Max coefficient deviation from another state, over all three fields.
    pub fn max_abs_diff(&self, other: &ZakharovState) -> f64 {
        self.u
            .max_abs_diff(&other.u)
            .max(self.n_plus.max_abs_diff(&other.n_plus))
            .max(self.n_minus.max_abs_diff(&other.n_minus))
    }
}

/// Max deviation from `n̂⁻(k) = conj(n̂⁺(−k))` over representable pairs.
pub fn wave_conjugation_deviation(n_plus: &SpectralField, n_minus: &SpectralField) -> f64 {
    let grid = n_plus.grid();
    let mut dev: f64 = 0.0;
    for k in -(grid.max_freq())..=grid.max_freq() {
        let d = (n_minus.coeff(k) - n_plus.coeff(-k).conj()).norm();
        dev = dev.max(d);
    }
    // k = −M/2 is its own mirror image modulo M.
    let kmin = grid.min_freq();
    dev.max((n_minus.coeff(kmin) - n_plus.coeff(kmin).conj()).norm())
}

/// First-order reduction `n± = n₀ ± i D⁻¹ n₁`.
///
/// Both inputs must be real (hermitian) and mean-zero; the zero mode of
/// the output pair is pinned to 0.
pub fn make_wave_pair(
    n0: &SpectralField,
    n1: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    check_grids(n0, n1)?;
    for (name, f) in [("n0", n0), ("n1", n1)] {
        if !f.is_hermitian() {
            return Err(Error::InvalidInput(format!(
                "{name} is not hermitian (real-valued); deviation {:.3e}",
                f.hermitian_deviation()
            )));
        }
        if f.coeff(0).norm() > MEAN_ZERO_TOL {
            return Err(Error::InvalidInput(format!(
                "{name} has nonzero mean {:.3e}",
                f.coeff(0).norm()
            )));
        }
    }
    // i·D⁻¹ n₁, with the zero mode left at 0.
    let grid = n0.grid();
    let mut plus = n0.clone();
    let mut minus = n0.clone();
    for k in grid.frequencies() {
        if k == 0 {
            plus.set_coeff(0, Complex64::new(0.0, 0.0));
            minus.set_coeff(0, Complex64::new(0.0, 0.0));
            continue;
        }
        let shift = Complex64::new(0.0, 1.0) * n1.coeff(k) / k.abs() as f64;
        plus.set_coeff(k, n0.coeff(k) + shift);
        minus.set_coeff(k, n0.coeff(k) - shift);
    }
    plus.refresh_hermitian();
    minus.refresh_hermitian();
    Ok((plus, minus))
}

/// Recovers the ion-density deviation `n = (n⁺ + n⁻)/2`.
pub fn recover_n(n_plus: &SpectralField, n_minus: &SpectralField) -> Result<SpectralField> {
    let mut n = n_plus.add(n_minus)?.scale(Complex64::new(0.5, 0.0));
    n.refresh_hermitian();
    Ok(n)
}

/// Recovers the time derivative `n_t = D (n⁺ − n⁻) / (2i)`.
pub fn recover_nt(n_plus: &SpectralField, n_minus: &SpectralField) -> Result<SpectralField> {
    let diff = n_plus.sub(n_minus)?;
    let mut nt = apply_real_even_symbol(&diff, |k| k.abs() as f64 / 2.0)
        .scale(Complex64::new(0.0, -1.0));
    nt.refresh_hermitian();
    Ok(nt)
}

fn complex_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Complex64::from_polar(r, theta)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Unit total variance: Re and Im each have variance 1/2.
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn fl_data_with<F>(
    beta: f64,
    kmin: i64,
    grid: GridSpec,
    mut draw: F,
) -> Result<SpectralField>
where
    F: FnMut() -> Complex64,
{
    if !(0.0 < beta && beta <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "beta must lie in (0, 1/2], got {beta}"
        )));
    }
    if kmin < 1 {
        return Err(Error::InvalidInput(format!("kmin must be >= 1, got {kmin}")));
    }
    let mut field = SpectralField::zeros(grid);
    // Ascending-k draw order: enlarging the grid extends the sequence
    // without disturbing the shared low modes.
    for k in kmin..=grid.dealias_cutoff() {
        let h = draw();
        let c = h / bracket(k).powf(beta);
        field.set_coeff(k, c);
        field.set_coeff(-k, c.conj());
    }
    field.refresh_hermitian();
    Ok(field)
}

/// Fourier-Lebesgue wave data: coefficients `h_k / ⟨k⟩^β` on
/// `kmin ≤ |k| ≤ dealias cutoff`, hermitian-symmetrized, zero mean.
///
/// The `h_k` are uniform on the complex disk of radius `c1`, so the
/// `FL^{β,∞}` norm is at most `c1` by construction.
pub fn fl_data(beta: f64, c1: f64, kmin: i64, seed: u64, grid: GridSpec) -> Result<SpectralField> {
    if c1 < 0.0 {
        return Err(Error::InvalidInput(format!("c1 must be >= 0, got {c1}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fl_data_with(beta, kmin, grid, || complex_disk(&mut rng, c1))
}

/// Variant with `|h_k| = c1` exactly (uniform random phase): saturates the
/// `FL^{β,∞}` norm at `c1`.
pub fn fl_data_saturated(
    beta: f64,
    c1: f64,
    kmin: i64,
    seed: u64,
    grid: GridSpec,
) -> Result<SpectralField> {
    if c1 < 0.0 {
        return Err(Error::InvalidInput(format!("c1 must be >= 0, got {c1}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fl_data_with(beta, kmin, grid, || {
        Complex64::from_polar(c1, 2.0 * std::f64::consts::PI * rng.gen::<f64>())
    })
}

/// Gaussian free-field wave data `g_k / ⟨k⟩^{r + 1/2 + ε}` with independent
/// standard complex Gaussians, hermitian-symmetrized, zero mean. Lands in
/// `H^r` as the grid grows; deterministic in the seed.
pub fn gibbs_sample(r: f64, epsilon: f64, seed: u64, grid: GridSpec) -> Result<SpectralField> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decay = r + 0.5 + epsilon;
    let mut field = SpectralField::zeros(grid);
    for k in 1..=grid.dealias_cutoff() {
        let g = complex_gaussian(&mut rng);
        let c = g / bracket(k).powf(decay);
        field.set_coeff(k, c);
        field.set_coeff(-k, c.conj());
    }
    field.refresh_hermitian();
    Ok(field)
}

/// Complex Gaussian Schrödinger data `g_k / ⟨k⟩^{s + 1/2 + ε}` on
/// `|k| ≤ dealias cutoff` with no reality symmetrization; a typical
/// `H^s` envelope draw.
pub fn u_gaussian(s: f64, epsilon: f64, seed: u64, grid: GridSpec) -> Result<SpectralField> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decay = s + 0.5 + epsilon;
    let mut field = SpectralField::zeros(grid);
    // Order 0, 1, −1, 2, −2, … so draws are grid-size independent.
    field.set_coeff(0, complex_gaussian(&mut rng));
    for k in 1..=grid.dealias_cutoff() {
        let w = 1.0 / bracket(k).powf(decay);
        field.set_coeff(k, complex_gaussian(&mut rng) * w);
        field.set_coeff(-k, complex_gaussian(&mut rng) * w);
    }
    field.refresh_hermitian();
    Ok(field)
}

/// Spectrally smooth random packet: coefficients `A e^{−(k/k0)²} g_k` on
/// `|k| ≤ kmax` with standard complex Gaussian `g_k`. With `hermitian`
/// set the draw is symmetrized and mean-zero (wave-data shape); otherwise
/// all modes including `k = 0` are independent (envelope shape).
///
/// Choosing `kmax` well inside the dealias cutoff gives data whose
/// nonlinear products stay band-limited to near roundoff.
pub fn smooth_packet(
    amplitude: f64,
    k0: f64,
    kmax: i64,
    seed: u64,
    grid: GridSpec,
    hermitian: bool,
) -> Result<SpectralField> {
    if k0 <= 0.0 {
        return Err(Error::InvalidInput(format!("k0 must be positive, got {k0}")));
    }
    if kmax < 1 || kmax > grid.dealias_cutoff() {
        return Err(Error::InvalidInput(format!(
            "kmax must lie in [1, dealias cutoff], got {kmax}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envelope = |k: i64| amplitude * (-((k * k) as f64) / (k0 * k0)).exp();
    let mut field = SpectralField::zeros(grid);
    if hermitian {
        for k in 1..=kmax {
            let c = complex_gaussian(&mut rng) * envelope(k);
            field.set_coeff(k, c);
            field.set_coeff(-k, c.conj());
        }
    } else {
        field.set_coeff(0, complex_gaussian(&mut rng) * envelope(0));
        for k in 1..=kmax {
            field.set_coeff(k, complex_gaussian(&mut rng) * envelope(k));
            field.set_coeff(-k, complex_gaussian(&mut rng) * envelope(k));
        }
    }
    field.refresh_hermitian();
    Ok(field)
}

/// Single-mode field `A e^{ikx}`.
pub fn plane_wave(amplitude: Complex64, k: i64, grid: GridSpec) -> Result<SpectralField> {
    if k.abs() > grid.dealias_cutoff() {
        return Err(Error::InvalidInput(format!(
            "plane-wave frequency {k} exceeds the dealias cutoff {}",
            grid.dealias_cutoff()
        )));
    }
    let mut field = SpectralField::zeros(grid);
    field.set_coeff(k, amplitude);
    field.refresh_hermitian();
    Ok(field)
}

/// Initial-data family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    FlDeterministic,
    GibbsGaussian,
    PlaneWave,
    Custom,
}

/// How the random `n₀⁺` and `n₀⁻` draws relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveCoupling {
    /// `n₀⁻ = conj(n₀⁺)` pointwise, i.e. real `(n, n_t)`.
    #[default]
    Physical,
    /// Independent draws for the two signs (breaks physical reality).
    Independent,
}

/// Parameter bundle describing an initial-data draw.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DataRecipe {
    pub kind: DataKind,
    /// Sobolev exponent for `u`; must lie in (1/2, 1) for the random kinds.
    pub s: f64,
    /// Fourier-Lebesgue exponent for the wave data, in (0, 1/2].
    pub beta: f64,
    /// Coefficient bound for `fl_deterministic` wave data (also the
    /// plane-wave amplitude).
    pub c1: f64,
    /// Sobolev exponent for `gibbs_gaussian` wave data.
    pub r: f64,
    /// Regularization exponent for the Gaussian decays.
    pub epsilon: f64,
    pub seed: u64,
    /// Lowest wave frequency populated (also the plane-wave mode number).
    pub kmin: i64,
}

impl DataRecipe {
    fn validate(&self) -> Result<()> {
        match self.kind {
            DataKind::FlDeterministic => {
                if !(0.5 < self.s && self.s < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "fl_deterministic requires s in (1/2, 1), got {}",
                        self.s
                    )));
                }
                if !(0.0 < self.beta && self.beta <= 0.5) {
                    return Err(Error::InvalidInput(format!(
                        "fl_deterministic requires beta in (0, 1/2], got {}",
                        self.beta
                    )));
                }
                if self.c1 <= 0.0 {
                    return Err(Error::InvalidInput("fl_deterministic requires c1 > 0".into()));
                }
            }
            DataKind::GibbsGaussian => {
                if self.epsilon <= 0.0 {
                    return Err(Error::InvalidInput("gibbs_gaussian requires epsilon > 0".into()));
                }
            }
            DataKind::PlaneWave | DataKind::Custom => {}
        }
        Ok(())
    }
}

/// Assembles a full state at `t = 0` from a recipe.
///
/// The wave pair is formed as `n₀± = a ± i b` from two real draws `a`, `b`
/// (physical coupling), or from four independent draws. `u` draws are left
/// at their natural Gaussian scale; callers rescale if a specific
/// `H^s`-norm is wanted. Sub-draws derive from `seed` via fixed offsets.
pub fn build_state(recipe: &DataRecipe, coupling: WaveCoupling, grid: GridSpec) -> Result<ZakharovState> {
    recipe.validate()?;
    match recipe.kind {
        DataKind::PlaneWave => {
            let u = plane_wave(Complex64::new(recipe.c1, 0.0), recipe.kmin, grid)?;
            ZakharovState::new(
                u,
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
                0.0,
            )
        }
        DataKind::FlDeterministic => {
            let u = u_gaussian(recipe.s, recipe.epsilon, recipe.seed, grid)?;
            let a = fl_data(recipe.beta, recipe.c1, recipe.kmin, recipe.seed.wrapping_add(1), grid)?;
            let b = fl_data(recipe.beta, recipe.c1, recipe.kmin, recipe.seed.wrapping_add(2), grid)?;
            let (n_plus, n_minus) = couple(&a, &b, recipe, coupling, grid)?;
            ZakharovState::new(u, n_plus, n_minus, 0.0)
        }
        DataKind::GibbsGaussian => {
            let u = u_gaussian(recipe.s, recipe.epsilon, recipe.seed, grid)?;
            let a = gibbs_sample(recipe.r, recipe.epsilon, recipe.seed.wrapping_add(1), grid)?;
            let b = gibbs_sample(recipe.r, recipe.epsilon, recipe.seed.wrapping_add(2), grid)?;
            let (n_plus, n_minus) = couple(&a, &b, recipe, coupling, grid)?;
            ZakharovState::new(u, n_plus, n_minus, 0.0)
        }
        DataKind::Custom => Err(Error::InvalidInput(
            "custom recipes are assembled by the caller from the generator functions".into(),
        )),
    }
}

fn couple(
    a: &SpectralField,
    b: &SpectralField,
    recipe: &DataRecipe,
    coupling: WaveCoupling,
    grid: GridSpec,
) -> Result<(SpectralField, SpectralField)> {
    let ib = b.scale(Complex64::new(0.0, 1.0));
    match coupling {
        WaveCoupling::Physical => Ok((a.add(&ib)?, a.sub(&ib)?)),
        WaveCoupling::Independent => {
            let (c, d) = match recipe.kind {
                DataKind::FlDeterministic => (
                    fl_data(recipe.beta, recipe.c1, recipe.kmin, recipe.seed.wrapping_add(3), grid)?,
                    fl_data(recipe.beta, recipe.c1, recipe.kmin, recipe.seed.wrapping_add(4), grid)?,
                ),
                DataKind::GibbsGaussian => (
                    gibbs_sample(recipe.r, recipe.epsilon, recipe.seed.wrapping_add(3), grid)?,
                    gibbs_sample(recipe.r, recipe.epsilon, recipe.seed.wrapping_add(4), grid)?,
                ),
                _ => unreachable!("couple is only called for random kinds"),
            };
            let id = d.scale(Complex64::new(0.0, 1.0));
            Ok((a.add(&ib)?, c.sub(&id)?))
        }
    }
}
