//! Computable Besov-type restriction norms on uniformly sampled
//! space-time blocks: a `2π`-periodic window in time, a taper, a 2D
//! transform, and dyadic bookkeeping in `(spatial shell N, modulation
//! shell L)` with `ℓ¹` summation over `L` inside an `ℓ²` sum over `N`.
//!
//! The spatial weight is applied pointwise as `⟨k⟩^s` inside each block
//! mass (an equivalent norming of the same space that makes single-mode
//! fixtures exact); the modulation weight is the shell value `L^b`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, IntegratorConfig};
use crate::error::{Error, Result};
use crate::spectral::{bracket, dyadic_shell_of, plan, GridSpec};
use crate::state::ZakharovState;

use super::{modulation, BlockKind};

/// Time-window taper applied before the 2D transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    /// `(1 − cos t)/2`, rescaled to unit mean square. Being a trig
    /// polynomial of degree one, it smears each time line across exactly
    /// three integer frequencies.
    Hann,
    None,
}

impl Taper {
    fn weight(self, t: f64) -> f64 {
        match self {
            // (1 − cos t)/2 has mean square 3/8.
            Taper::Hann => (1.0 - t.cos()) * 0.5 / (3.0f64 / 8.0).sqrt(),
            Taper::None => 1.0,
        }
    }
}

/// Uniform samples of a complex field on `[0, 2π) × [0, 2π)`:
/// `M` spatial points by `M_t` time points, time-major rows.
#[derive(Debug, Clone)]
pub struct SpaceTimeArray {
    grid: GridSpec,
    m_t: usize,
    taper: Taper,
    /// `samples[l * M + j] = f(x_j, t_l)`.
    samples: Vec<Complex64>,
}

impl SpaceTimeArray {
    pub fn from_rows(
        grid: GridSpec,
        rows: Vec<Vec<Complex64>>,
        taper: Taper,
    ) -> Result<Self> {
        let m_t = rows.len();
        if m_t < 16 || !m_t.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "need a power-of-two number of time rows >= 16, got {m_t}"
            )));
        }
        let m = grid.num_modes();
        let mut samples = Vec::with_capacity(m * m_t);
        for (l, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "row {l} has {} samples, expected {m}",
                    row.len()
                )));
            }
            samples.extend_from_slice(row);
        }
        Ok(SpaceTimeArray {
            grid,
            m_t,
            taper,
            samples,
        })
    }

    pub fn from_fn<F>(grid: GridSpec, m_t: usize, taper: Taper, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let two_pi = std::f64::consts::TAU;
        let rows = (0..m_t)
            .map(|l| {
                let t = two_pi * l as f64 / m_t as f64;
                grid.points().map(|x| f(x, t)).collect()
            })
            .collect();
        Self::from_rows(grid, rows, taper)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn time_points(&self) -> usize {
        self.m_t
    }

    /// Window length; fixed to 2π so time frequencies are integers.
    pub fn t_window(&self) -> f64 {
        std::f64::consts::TAU
    }

    /// Untapered `L²_{x,t}` norm in the coefficient convention.
    pub fn l2_norm(&self) -> f64 {
        let total: f64 = self.samples.iter().map(|c| c.norm_sqr()).sum();
        (total / (self.grid.num_modes() * self.m_t) as f64).sqrt()
    }

    /// Pointwise sum of two windows (same grid, time count, and taper).
    pub fn add(&self, other: &SpaceTimeArray) -> Result<SpaceTimeArray> {
        if self.grid != other.grid || self.m_t != other.m_t || self.taper != other.taper {
            return Err(Error::InvalidInput(
                "space-time arrays differ in shape or taper".into(),
            ));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SpaceTimeArray {
            grid: self.grid,
            m_t: self.m_t,
            taper: self.taper,
            samples,
        })
    }
}

/// Evolves a state across one `2π` window and records the chosen field's
/// physical-space samples at `M_t` uniform times.
pub fn record_space_time<F>(
    initial: &ZakharovState,
    icfg: &IntegratorConfig,
    m_t: usize,
    taper: Taper,
    extract: F,
) -> Result<SpaceTimeArray>
where
    F: Fn(&ZakharovState) -> Vec<Complex64>,
{
    let two_pi = std::f64::consts::TAU;
    let mut rows = Vec::with_capacity(m_t);
    let mut current = initial.clone();
    for l in 0..m_t {
        let target = initial.time() + two_pi * l as f64 / m_t as f64;
        if target > current.time() {
            current = evolve(&current, target, icfg, |_| Ok(()))?;
        }
        rows.push(extract(&current));
    }
    SpaceTimeArray::from_rows(initial.grid(), rows, taper)
}

/// The Besov-type restriction norm
/// `( Σ_N [ Σ_L L^b (Σ_{(k,τ): shells=(N,L)} ⟨k⟩^{2s} |ĉ(k,τ)|²)^{1/2} ]² )^{1/2}`
/// of the tapered window, with the modulation measured from the
/// dispersion surface selected by `kind`.
pub fn restriction_norm(arr: &SpaceTimeArray, s: f64, b: f64, kind: BlockKind) -> f64 {
    let m = arr.grid.num_modes();
    let m_t = arr.m_t;
    let two_pi = std::f64::consts::TAU;

    // Taper, then transform each time row in space (forward, scaled 1/M).
    let mut working = arr.samples.clone();
    for l in 0..m_t {
        let w = arr.taper.weight(two_pi * l as f64 / m_t as f64);
        for j in 0..m {
            working[l * m + j] *= w;
        }
    }
    let x_plan = plan(m, true);
    for l in 0..m_t {
        x_plan.process(&mut working[l * m..(l + 1) * m]);
    }
    let x_scale = 1.0 / m as f64;

    // Analysis in time with e^{+iτt} (inverse transform, scaled 1/M_t),
    // one k-column at a time, accumulating weighted block masses.
    let t_plan = plan(m_t, false);
    let t_scale = 1.0 / m_t as f64;
    let mut masses: HashMap<(i64, i64), f64> = HashMap::new();
    let mut column = vec![Complex64::new(0.0, 0.0); m_t];
    for k in arr.grid.frequencies() {
        let j = arr.grid.index_of(k);
        for l in 0..m_t {
            column[l] = working[l * m + j] * x_scale;
        }
        t_plan.process(&mut column);
        let weight = bracket(k).powf(2.0 * s);
        let n_shell = dyadic_shell_of(k);
        let half = m_t as i64 / 2;
        for (idx, c) in column.iter().enumerate() {
            let tau = if (idx as i64) < half {
                idx as i64
            } else {
                idx as i64 - m_t as i64
            };
            let l_shell = dyadic_shell_of(modulation(kind, k, tau));
            *masses.entry((n_shell, l_shell)).or_insert(0.0) +=
                weight * (c * t_scale).norm_sqr();
        }
    }

    // ℓ¹ over L inside, ℓ² over N outside.
    let mut per_n: HashMap<i64, f64> = HashMap::new();
    for ((n_shell, l_shell), mass) in masses {
        *per_n.entry(n_shell).or_insert(0.0) += (l_shell as f64).powf(b) * mass.sqrt();
    }
    per_n.values().map(|v| v * v).sum::<f64>().sqrt()
}
