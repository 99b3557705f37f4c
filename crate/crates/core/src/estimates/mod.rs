//! Brute-force and Monte-Carlo verification of the harmonic-analysis
//! ingredients: exact integer resonance algebra, the space-time counting
//! bound `|B(k,τ)| ≲ LN`, the bilinear `L⁴`-type product estimate on wave
//! blocks, and computable Besov-type restriction norms on sampled
//! space-time windows.
//!
//! All dyadic conventions follow the spectral module: shell `1` covers
//! `|·| ≤ 1`, shell `N ≥ 2` covers `[N, 2N)`. The modulation variable
//! lives on the integer lattice (spatial frequencies are integers and the
//! time window is `2π`, so time frequencies are integers too).

mod bilinear;
mod counting;
mod resonance;
mod restriction;

pub use bilinear::{
    bilinear_extremal_small, bilinear_l4_probe, bilinear_trial_ratios, BilinearProbe, BlockField,
};
pub use counting::{count_b, count_sweep, sign_pairs, CountSweepCell};
pub use resonance::{
    resonance_function, resonance_identity_check, resonance_identity_fuzz,
    resonant_frequencies, ResonanceSign,
};
pub use restriction::{record_space_time, restriction_norm, SpaceTimeArray, Taper};

use crate::spectral::dyadic_shell_of;

/// Which dispersion surface a block's modulation is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Schrodinger,
    WavePlus,
    WaveMinus,
}

/// One dyadic space-time block: spatial shell `N`, modulation shell `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicBlock {
    pub n: i64,
    pub l: i64,
    pub kind: BlockKind,
}

/// Signed distance from the free surface of the given flow, in the
/// analysis convention where the linear Schrödinger wave `e^{i(kx−k²t)}`
/// sits at `τ = k²` and the free wave flows `e^{∓i|k|t}` sit at
/// `τ = ±|k|`.
#[inline]
pub fn modulation(kind: BlockKind, k: i64, tau: i64) -> i64 {
    match kind {
        BlockKind::Schrodinger => tau - k * k,
        BlockKind::WavePlus => tau - k.abs(),
        BlockKind::WaveMinus => tau + k.abs(),
    }
}

/// The dyadic block containing a lattice point.
pub fn block_of(kind: BlockKind, k: i64, tau: i64) -> DyadicBlock {
    DyadicBlock {
        n: dyadic_shell_of(k),
        l: dyadic_shell_of(modulation(kind, k, tau)),
        kind,
    }
}

/// Integer members of a dyadic shell: `{−1, 0, 1}` for shell 1, otherwise
/// `±[N, 2N)`.
pub fn shell_members(n: i64) -> Vec<i64> {
    assert!(n >= 1 && (n as u64).is_power_of_two());
    if n == 1 {
        vec![-1, 0, 1]
    } else {
        (n..2 * n).chain(-2 * n + 1..=-n).collect()
    }
}
