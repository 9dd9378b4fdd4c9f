//! Closed-form sizes of mismatch-neighborhood intersections.
//!
//! For two k-mers at Hamming distance d, the number of k-mers within
//! distance m of both depends only on (k, m, |Σ|, d). This module evaluates
//! that count exactly and tabulates it for d = 0..min(2m, k); the table is
//! what turns per-pair kernel evaluation into a weighted sum of distance
//! counts. Everything here is exact big-integer arithmetic: for protein
//! alphabets the intermediate terms overflow 64 bits quickly.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// C(a, b) with the zero convention: 0 when b < 0 or b > a.
/// Callers pass `i64` so out-of-range differences need no special-casing.
pub fn binomial(a: i64, b: i64) -> BigUint {
    if b < 0 || a < 0 || b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b) as u64;
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= BigUint::from((a as u64) - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// `base^exp` with 0^0 = 1.
fn pow_u(base: u64, exp: i64) -> BigUint {
    debug_assert!(exp >= 0);
    BigUint::from(base).pow(exp as u32)
}

/// |N_q(α) ∩ N_r(β)| for any two k-mers at Hamming distance d, where
/// N_q(α) is the set of k-mers differing from α in exactly q positions.
///
/// The count is independent of the actual k-mers. It is 0 whenever
/// q + r < d, and the summation term vanishes on its own whenever
/// q + r − d is odd relative to the available positions.
pub fn n_qr(q: usize, r: usize, d: usize, k: usize, s: usize) -> Result<BigUint> {
    check_params(k, s)?;
    if q > k || r > k || d > k {
        return Err(Error::InvalidParam(format!(
            "n_qr arguments out of range: q={q}, r={r}, d={d}, k={k}"
        )));
    }
    let (q, r, d, k, s) = (q as i64, r as i64, d as i64, k as i64, s as i64);

    let mut total = BigUint::zero();
    if q + r < d {
        return Ok(total);
    }
    let t_max = (q + r - d) / 2; // floor
    for t in 0..=t_max {
        let term = binomial(2 * d - q - r + 2 * t, d - (q - t))
            * binomial(d, q + r - 2 * t - d)
            * pow_u((s - 2) as u64, q + r - 2 * t - d)
            * binomial(k - d, t)
            * pow_u((s - 1) as u64, t);
        total += term;
    }
    Ok(total)
}

/// Precomputed intersection sizes I_0..I_t for fixed (k, m, s), t = min(2m, k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionTable {
    pub k: usize,
    pub m: usize,
    pub s: usize,
    values: Vec<BigUint>,
}

impl IntersectionTable {
    /// I_d = Σ_{q=0..m} Σ_{r=0..m} n_qr(q, r, d, k, s) for d = 0..min(2m, k).
    pub fn build(k: usize, m: usize, s: usize) -> Result<Self> {
        check_params(k, s)?;
        let t = (2 * m).min(k);
        let mut values = Vec::with_capacity(t + 1);
        for d in 0..=t {
            let mut total = BigUint::zero();
            for q in 0..=m.min(k) {
                for r in 0..=m.min(k) {
                    total += n_qr(q, r, d, k, s)?;
                }
            }
            values.push(total);
        }
        Ok(Self { k, m, s, values })
    }

    /// Builds a table from explicit values (exactly min(2m,k)+1 of them).
    /// Useful for harnesses that need a deliberately wrong table.
    pub fn from_values(k: usize, m: usize, s: usize, values: Vec<BigUint>) -> Result<Self> {
        check_params(k, s)?;
        let t = (2 * m).min(k);
        if values.len() != t + 1 {
            return Err(Error::InvalidParam(format!(
                "expected {} values for (k={k}, m={m}), got {}",
                t + 1,
                values.len()
            )));
        }
        Ok(Self { k, m, s, values })
    }

    /// t = min(2m, k); the table holds t + 1 values.
    pub fn t(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, d: usize) -> &BigUint {
        &self.values[d]
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Largest I_d, as f64. This is the scale of the additive approximation
    /// guarantee ε·I_max.
    pub fn max_value_f64(&self) -> f64 {
        self.values
            .iter()
            .map(big_to_f64)
            .fold(0.0, f64::max)
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(big_to_f64).collect()
    }
}

pub fn big_to_f64(v: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::INFINITY)
}

fn check_params(k: usize, s: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    if s < 2 {
        return Err(Error::InvalidParam("alphabet size must be >= 2".into()));
    }
    Ok(())
}

/// Enumeration cap for the brute-force oracle below.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Counts γ ∈ Σ^k with d(γ,α) ≤ m and d(γ,β) ≤ m by exhaustive enumeration
/// of Σ^k. Verification oracle for the closed form; refuses s^k beyond
/// [`ENUMERATION_CAP`].
pub fn brute_force_intersection(alpha: &[u8], beta: &[u8], m: usize, s: usize) -> Result<u64> {
    if alpha.len() != beta.len() {
        return Err(Error::InvalidParam(format!(
            "k-mer lengths differ: {} vs {}",
            alpha.len(),
            beta.len()
        )));
    }
    let k = alpha.len();
    check_params(k, s)?;
    let size = (s as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            size,
            cap: ENUMERATION_CAP,
        });
    }

    let mut gamma = vec![0u8; k];
    let mut count = 0u64;
    loop {
        if hamming(&gamma, alpha) <= m && hamming(&gamma, beta) <= m {
            count += 1;
        }
        // odometer increment over Σ^k
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(count);
            }
            pos -= 1;
            gamma[pos] += 1;
            if (gamma[pos] as usize) < s {
                break;
            }
            gamma[pos] = 0;
        }
    }
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
