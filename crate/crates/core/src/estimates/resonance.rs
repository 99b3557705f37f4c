//! Exact integer arithmetic for the Schrödinger–wave resonance algebra.
//!
//! With wave input frequency `k₀`, Schrödinger input `k₂`, and output
//! `k₀ + k₂`, the modulation identity reads
//!
//! ```text
//! |L₁ − L₂ − L₀| = |τ₀ + τ₂ − (k₀+k₂)² − τ₂ + k₂² − τ₀ ∓ |k₀||
//!               = |k₀| · |k₀ + 2k₂ ± λ(k₀)|,
//! ```
//!
//! where `λ` is the sign function. Everything here is pure `i128`
//! arithmetic; residuals are exact integers.

use crate::error::{Error, Result};

/// The `±` branch in `τ ∓ |k₀|` / `k₀ + 2k₂ ± λ(k₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceSign {
    Upper,
    Lower,
}

impl ResonanceSign {
    pub const BOTH: [ResonanceSign; 2] = [ResonanceSign::Upper, ResonanceSign::Lower];

    fn unit(self) -> i128 {
        match self {
            ResonanceSign::Upper => 1,
            ResonanceSign::Lower => -1,
        }
    }
}

fn lambda(k: i128) -> i128 {
    k.signum()
}

/// The resonant pair for output frequency `k₁ ≠ 0`:
/// `k₀ = 2k₁ ± λ(k₁)`, `k₂ = ∓λ(k₁) − k₁`.
pub fn resonant_frequencies(k1: i64, sign: ResonanceSign) -> Result<(i64, i64)> {
    if k1 == 0 {
        return Err(Error::InvalidInput(
            "resonant frequencies require k1 != 0".into(),
        ));
    }
    let k1 = k1 as i128;
    let s = sign.unit();
    let k0 = 2 * k1 + s * lambda(k1);
    let k2 = -s * lambda(k1) - k1;
    Ok((k0 as i64, k2 as i64))
}

/// `|k₀| · |k₀ + 2k₂ ± λ(k₀)|`; zero exactly on resonant pairs.
pub fn resonance_function(k0: i64, k2: i64, sign: ResonanceSign) -> i64 {
    let k0 = k0 as i128;
    let k2 = k2 as i128;
    let value = k0.abs() * (k0 + 2 * k2 + sign.unit() * lambda(k0)).abs();
    value as i64
}

/// Difference between the raw modulation expansion
/// `|τ₀ + τ₂ − (k₀+k₂)² − τ₂ + k₂² − τ₀ ∓ |k₀||` and the factored form
/// `|k₀||k₀ + 2k₂ ± λ(k₀)|`. Identically zero for every integer input.
pub fn resonance_identity_check(
    k0: i64,
    k2: i64,
    tau0: i64,
    tau2: i64,
    sign: ResonanceSign,
) -> Result<i64> {
    if k0 == 0 {
        return Err(Error::InvalidInput(
            "the identity is stated for k0 != 0".into(),
        ));
    }
    let (k0w, k2w, t0, t2) = (k0 as i128, k2 as i128, tau0 as i128, tau2 as i128);
    let s = sign.unit();
    let left = (t0 + t2 - (k0w + k2w) * (k0w + k2w) - t2 + k2w * k2w - t0 - s * k0w.abs()).abs();
    let right = k0w.abs() * (k0w + 2 * k2w + s * lambda(k0w)).abs();
    Ok((left - right) as i64)
}

/// Seeded fuzz sweep of the identity over random integer tuples with
/// `|k|, |τ| ≤ 10⁶`; returns `(cases, nonzero residuals)`.
pub fn resonance_identity_fuzz(tuples: u64, seed: u64) -> (u64, u64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..tuples {
        let k0 = loop {
            let v = rng.gen_range(-1_000_000_i64..=1_000_000);
            if v != 0 {
                break v;
            }
        };
        let k2 = rng.gen_range(-1_000_000_i64..=1_000_000);
        let tau0 = rng.gen_range(-1_000_000_i64..=1_000_000);
        let tau2 = rng.gen_range(-1_000_000_i64..=1_000_000);
        let sign = if rng.gen::<bool>() {
            ResonanceSign::Upper
        } else {
            ResonanceSign::Lower
        };
        if resonance_identity_check(k0, k2, tau0, tau2, sign).unwrap() != 0 {
            violations += 1;
        }
    }
    (tuples, violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worked_examples() {
        // k1 = 3, upper sign.
        let (k0, k2) = resonant_frequencies(3, ResonanceSign::Upper).unwrap();
        assert_eq!((k0, k2), (7, -4));
        assert_eq!(resonance_function(k0, k2, ResonanceSign::Upper), 0);

        // k1 = −2, upper sign.
        let (k0, k2) = resonant_frequencies(-2, ResonanceSign::Upper).unwrap();
        assert_eq!((k0, k2), (-5, 3));
        assert_eq!(resonance_function(k0, k2, ResonanceSign::Upper), 0);

        assert!(resonant_frequencies(0, ResonanceSign::Upper).is_err());
    }

    #[test]
    fn identity_worked_example() {
        // (k0, k2, τ0, τ2) = (1, 1, 0, 0), upper: both sides equal 4.
        let res = resonance_identity_check(1, 1, 0, 0, ResonanceSign::Upper).unwrap();
        assert_eq!(res, 0);
        // Direct check of the left side: |−(2)² + 1 − 1| = 4.
        assert_eq!(resonance_function(1, 1, ResonanceSign::Upper), 4);
        assert!(resonance_identity_check(0, 1, 2, 3, ResonanceSign::Upper).is_err());
    }

    #[test]
    fn exhaustive_resonance_sweep() {
        for k1 in -1000_i64..=1000 {
            if k1 == 0 {
                continue;
            }
            for sign in ResonanceSign::BOTH {
                let (k0, k2) = resonant_frequencies(k1, sign).unwrap();
                assert_eq!(
                    resonance_function(k0, k2, sign),
                    0,
                    "nonzero resonance at k1={k1}, {sign:?}"
                );
            }
        }
    }

    #[test]
    fn identity_fuzz_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1_000_000 {
            let k0 = loop {
                let v = rng.gen_range(-1_000_000_i64..=1_000_000);
                if v != 0 {
                    break v;
                }
            };
            let k2 = rng.gen_range(-1_000_000_i64..=1_000_000);
            let tau0 = rng.gen_range(-1_000_000_i64..=1_000_000);
            let tau2 = rng.gen_range(-1_000_000_i64..=1_000_000);
            let sign = if rng.gen::<bool>() {
                ResonanceSign::Upper
            } else {
                ResonanceSign::Lower
            };
            let res = resonance_identity_check(k0, k2, tau0, tau2, sign).unwrap();
            assert_eq!(res, 0, "residual at ({k0},{k2},{tau0},{tau2},{sign:?})");
        }
    }

    #[test]
    fn resonant_pairs_zero_the_identity() {
        for k1 in [-37_i64, -5, 1, 4, 250] {
            for sign in ResonanceSign::BOTH {
                let (k0, k2) = resonant_frequencies(k1, sign).unwrap();
                // Any τ values: they cancel inside the expansion.
                let res = resonance_identity_check(k0, k2, 123, -456, sign).unwrap();
                assert_eq!(res, 0);
                assert_eq!(resonance_function(k0, k2, sign), 0);
            }
        }
    }
}
