//! Exhaustive verification of the space-time counting bound: the set
//!
//! ```text
//! B(k,τ) = { (k₁,τ₁) : |k₁| ≈ N, |k−k₁| ≈ N,
//!            |τ₁ ± |k₁|| ≈ L, |τ−τ₁ ± |k−k₁|| ≈ L }
//! ```
//!
//! has at most `O(LN)` points: `τ₁` ranges over an interval of length
//! `≈ L` for each of the `≈ N` admissible `k₁`. The certified envelope
//! used by callers is `count ≤ 16·L·N`, absorbing the two-sided shells
//! of width `[N, 2N)` and both sign choices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectral::dyadic_shell_of;

use super::shell_members;

/// The four `(±, ±)` sign assignments for the two wave factors.
pub fn sign_pairs() -> [(i8, i8); 4] {
    [(1, 1), (1, -1), (-1, 1), (-1, -1)]
}

#[inline]
fn in_shell(value: i64, shell: i64) -> bool {
    dyadic_shell_of(value) == shell
}

/// Exhaustive count of `B(k,τ)` for one lattice cell.
///
/// `signs = (s₁, s₂)` picks the branch in `|τ₁ + s₁|k₁|| ≈ L` and
/// `|τ − τ₁ + s₂|k−k₁|| ≈ L`.
pub fn count_b(k: i64, tau: i64, n: i64, l: i64, signs: (i8, i8)) -> u64 {
    let (s1, s2) = (signs.0 as i64, signs.1 as i64);
    let mut count = 0;
    for k1 in shell_members(n) {
        if !in_shell(k - k1, n) {
            continue;
        }
        // τ₁ = v − s₁|k₁| with v running over the L-shell.
        for v in shell_members_l(l) {
            let tau1 = v - s1 * k1.abs();
            if in_shell(tau - tau1 + s2 * (k - k1).abs(), l) {
                count += 1;
            }
        }
    }
    count
}

// Same as shell_members but kept monomorphic for the hot loop.
fn shell_members_l(l: i64) -> Vec<i64> {
    shell_members(l)
}

/// Maximizing cell of a `(N, L, signs)` sweep over the admissible domain
/// `|k| ≤ 8N`, `|τ| ≤ 8(L+N)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CountSweepCell {
    pub n: i64,
    pub l: i64,
    pub sign1: i8,
    pub sign2: i8,
    /// Arg-max location.
    pub k: i64,
    pub tau: i64,
    pub count: u64,
    /// `count / (L·N)`.
    pub ratio: f64,
}

/// Sweeps all `(k, τ)` in the admissible domain for each `(N, L)` pair and
/// sign assignment, returning the maximizing cell of each.
///
/// For fixed `k` the count as a function of `τ` is the sum over admissible
/// `k₁` of the shifted autocorrelation of the `L`-shell indicator, so each
/// `(k₁, k)` contributes one precomputed profile added at offset
/// `−(s₁|k₁| + s₂|k−k₁|)`; the per-`k` maximum is then a single pass.
pub fn count_sweep(n_values: &[i64], l_values: &[i64]) -> Vec<CountSweepCell> {
    let mut jobs = Vec::new();
    for &n in n_values {
        for &l in l_values {
            for signs in sign_pairs() {
                jobs.push((n, l, signs));
            }
        }
    }
    jobs.par_iter()
        .map(|&(n, l, signs)| sweep_one(n, l, signs))
        .collect()
}

/// Autocorrelation of the `L`-shell indicator:
/// `conv[t] = #{(v, w) ∈ S_L × S_L : v + w = t}` for the *correlation*
/// form `#{v : v ∈ S_L, t − v ∈ S_L}`.
fn shell_autocorrelation(l: i64) -> (Vec<u32>, i64) {
    let members = shell_members(l);
    let min_t = -2 * (2 * l - 1).max(1);
    let max_t = -min_t;
    let len = (max_t - min_t + 1) as usize;
    let mut conv = vec![0u32; len];
    // O(|S_L|²) with |S_L| ≤ 2L: fine for L ≤ 64.
    for &v in &members {
        for &w in &members {
            conv[(v + w - min_t) as usize] += 1;
        }
    }
    (conv, min_t)
}

fn sweep_one(n: i64, l: i64, signs: (i8, i8)) -> CountSweepCell {
    let (s1, s2) = (signs.0 as i64, signs.1 as i64);
    let (conv, conv_min) = shell_autocorrelation(l);
    let conv_max = conv_min + conv.len() as i64 - 1;
    let tau_bound = 8 * (l + n);
    let tau_len = (2 * tau_bound + 1) as usize;

    let mut best = CountSweepCell {
        n,
        l,
        sign1: signs.0,
        sign2: signs.1,
        k: 0,
        tau: 0,
        count: 0,
        ratio: 0.0,
    };
    let shell = shell_members(n);
    let mut counts = vec![0u64; tau_len];
    for k in -8 * n..=8 * n {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut any = false;
        for &k1 in &shell {
            if !in_shell(k - k1, n) {
                continue;
            }
            any = true;
            // count(k, τ) += conv(τ + c) with c = s₁|k₁| + s₂|k−k₁|.
            let c = s1 * k1.abs() + s2 * (k - k1).abs();
            // τ + c must land inside the conv support.
            let lo = (-tau_bound).max(conv_min - c);
            let hi = tau_bound.min(conv_max - c);
            for tau in lo..=hi {
                counts[(tau + tau_bound) as usize] += conv[(tau + c - conv_min) as usize] as u64;
            }
        }
        if !any {
            continue;
        }
        for (idx, &count) in counts.iter().enumerate() {
            if count > best.count {
                best.count = count;
                best.k = k;
                best.tau = idx as i64 - tau_bound;
            }
        }
    }
    best.ratio = best.count as f64 / (l * n) as f64;
    best
}
