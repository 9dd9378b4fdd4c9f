//! Exact mismatch-kernel evaluation via sort-enumerate over index subsets.
//!
//! The pair counts M_i(X,Y) (number of k-mer occurrence pairs at Hamming
//! distance exactly i) are recovered from the agreement counts
//! F_i = Σ_{θ ∈ Q_k(k−i)} f_θ through the triangular identity
//! F_i = Σ_{j≤i} C(k−j, k−i) M_j. Each f_θ is computed by sorting the
//! θ-restricted k-mers of both sets and multiplying run lengths.
//!
//! Brute-force counterparts (`brute_force_profile`, `brute_force_kernel`)
//! stay deliberately naive; they are the oracles the fast path is checked
//! against.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::intersect::{big_to_f64, binomial, brute_force_intersection, hamming, IntersectionTable};
use crate::seq::{extract_kmers, KmerSet, SequenceRecord};

/// A sorted set of distinct positions in 0..k. Positions are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSubset {
    positions: Vec<usize>,
}

impl IndexSubset {
    pub fn new(mut positions: Vec<usize>, k: usize) -> Result<Self> {
        positions.sort_unstable();
        let strictly_increasing = positions.windows(2).all(|w| w[0] < w[1]);
        if !strictly_increasing || positions.iter().any(|&p| p >= k) {
            return Err(Error::InvalidParam(format!(
                "index subset {positions:?} invalid for k={k}"
            )));
        }
        Ok(Self { positions })
    }

    /// The full index set 0..k.
    pub fn full(k: usize) -> Self {
        Self {
            positions: (0..k).collect(),
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Iterates all j-subsets of 0..k in lexicographic order.
pub struct Combinations {
    k: usize,
    j: usize,
    state: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(k: usize, j: usize) -> Self {
        let state = if j <= k {
            Some((0..j).collect())
        } else {
            None
        };
        Self { k, j, state }
    }

    /// C(k, j) as u64, erroring if it does not fit.
    pub fn count(k: usize, j: usize) -> Result<u64> {
        use num_traits::ToPrimitive;
        binomial(k as i64, j as i64).to_u64().ok_or_else(|| {
            Error::Numeric(format!("C({k},{j}) exceeds 64 bits"))
        })
    }
}

impl Iterator for Combinations {
    type Item = IndexSubset;

    fn next(&mut self) -> Option<IndexSubset> {
        let current = self.state.as_ref()?.clone();
        // advance: find rightmost position that can move up
        let state = self.state.as_mut().unwrap();
        let mut i = self.j;
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            if state[i] < self.k - self.j + i {
                state[i] += 1;
                for l in i + 1..self.j {
                    state[l] = state[l - 1] + 1;
                }
                break;
            }
        }
        Some(IndexSubset { positions: current })
    }
}

/// Sorting backend for the sort-enumerate subroutine. Counting sort runs
/// positional counting passes (O(j·(n+s))); comparison sort packs the
/// restriction into machine words where it fits and uses `sort_unstable`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortBackend {
    #[default]
    Comparison,
    Counting,
}

/// f_θ(X,Y): the number of occurrence pairs (α,β) ∈ S_X×S_Y whose
/// restrictions to θ agree. Empty θ matches every pair.
pub fn f_theta(sx: &KmerSet, sy: &KmerSet, theta: &IndexSubset) -> Result<u64> {
    f_theta_with(sx, sy, theta, SortBackend::Comparison)
}

pub fn f_theta_with(
    sx: &KmerSet,
    sy: &KmerSet,
    theta: &IndexSubset,
    backend: SortBackend,
) -> Result<u64> {
    if sx.k != sy.k {
        return Err(Error::InvalidParam(format!(
            "k-mer sets have mismatched k: {} vs {}",
            sx.k, sy.k
        )));
    }
    if let Some(&max) = theta.positions().last() {
        if max >= sx.k {
            return Err(Error::InvalidParam(format!(
                "theta position {max} out of range for k={}",
                sx.k
            )));
        }
    }
    if sx.is_empty() || sy.is_empty() {
        return Ok(0);
    }
    if theta.is_empty() {
        return (sx.len() as u64)
            .checked_mul(sy.len() as u64)
            .ok_or_else(|| Error::Numeric("pair count overflows u64".into()));
    }

    match backend {
        SortBackend::Comparison => {
            let max_res = max_residue(sx).max(max_residue(sy));
            let bits = bits_for(max_res);
            let j = theta.len();
            if bits * j <= 64 {
                let xs = pack_restrictions_u64(sx, theta, bits);
                let ys = pack_restrictions_u64(sy, theta, bits);
                Ok(count_equal_runs(xs, ys))
            } else if bits * j <= 128 {
                let xs = pack_restrictions_u128(sx, theta, bits);
                let ys = pack_restrictions_u128(sy, theta, bits);
                Ok(count_equal_runs(xs, ys))
            } else {
                let xs = restrictions(sx, theta);
                let ys = restrictions(sy, theta);
                Ok(count_equal_runs(xs, ys))
            }
        }
        SortBackend::Counting => {
            let s = (max_residue(sx).max(max_residue(sy)) as usize) + 1;
            let mut xs = restrictions(sx, theta);
            let mut ys = restrictions(sy, theta);
            counting_sort_rows(&mut xs, s);
            counting_sort_rows(&mut ys, s);
            Ok(merge_equal_runs(&xs, &ys))
        }
    }
}

fn max_residue(set: &KmerSet) -> u8 {
    set.kmers
        .iter()
        .flat_map(|kmer| kmer.iter().copied())
        .max()
        .unwrap_or(0)
}

fn bits_for(max_res: u8) -> usize {
    (8 - max_res.leading_zeros() as usize).max(1)
}

fn pack_restrictions_u64(set: &KmerSet, theta: &IndexSubset, bits: usize) -> Vec<u64> {
    set.kmers
        .iter()
        .map(|kmer| {
            let mut v = 0u64;
            for &p in theta.positions() {
                v = (v << bits) | kmer[p] as u64;
            }
            v
        })
        .collect()
}

fn pack_restrictions_u128(set: &KmerSet, theta: &IndexSubset, bits: usize) -> Vec<u128> {
    set.kmers
        .iter()
        .map(|kmer| {
            let mut v = 0u128;
            for &p in theta.positions() {
                v = (v << bits) | kmer[p] as u128;
            }
            v
        })
        .collect()
}

fn restrictions(set: &KmerSet, theta: &IndexSubset) -> Vec<Vec<u8>> {
    set.kmers
        .iter()
        .map(|kmer| theta.positions().iter().map(|&p| kmer[p]).collect())
        .collect()
}

fn count_equal_runs<T: Ord>(mut xs: Vec<T>, mut ys: Vec<T>) -> u64 {
    xs.sort_unstable();
    ys.sort_unstable();
    merge_equal_runs(&xs, &ys)
}

/// One linear scan over two sorted lists, accumulating
/// (run length in X)·(run length in Y) for each shared value.
fn merge_equal_runs<T: Ord>(xs: &[T], ys: &[T]) -> u64 {
    let mut total = 0u64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let mut run_x = 1;
                while i + run_x < xs.len() && xs[i + run_x] == xs[i] {
                    run_x += 1;
                }
                let mut run_y = 1;
                while j + run_y < ys.len() && ys[j + run_y] == ys[j] {
                    run_y += 1;
                }
                total += (run_x as u64) * (run_y as u64);
                i += run_x;
                j += run_y;
            }
        }
    }
    total
}

/// Stable LSD counting sort of fixed-width rows, one pass per position.
fn counting_sort_rows(rows: &mut Vec<Vec<u8>>, s: usize) {
    if rows.is_empty() {
        return;
    }
    let width = rows[0].len();
    let n = rows.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut next = vec![0usize; n];
    for pos in (0..width).rev() {
        let mut counts = vec![0usize; s + 1];
        for &idx in &order {
            counts[rows[idx][pos] as usize + 1] += 1;
        }
        for b in 1..=s {
            counts[b] += counts[b - 1];
        }
        for &idx in &order {
            let b = rows[idx][pos] as usize;
            next[counts[b]] = idx;
            counts[b] += 1;
        }
        std::mem::swap(&mut order, &mut next);
    }
    let sorted: Vec<Vec<u8>> = order.iter().map(|&i| rows[i].clone()).collect();
    *rows = sorted;
}

/// The per-pair distance profile: F_i and M_i for i = 0..t, t = min(2m, k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchProfile {
    pub t: usize,
    pub f: Vec<u64>,
    pub m: Vec<u64>,
}

/// Computes F_0..F_t by full enumeration of Q_k(k−i) and recovers M_i via
/// the triangular recurrence M_i = F_i − Σ_{j<i} C(k−j, k−i) M_j.
pub fn exact_profile(sx: &KmerSet, sy: &KmerSet, m: usize) -> Result<MismatchProfile> {
    exact_profile_with(sx, sy, m, SortBackend::Comparison)
}

pub fn exact_profile_with(
    sx: &KmerSet,
    sy: &KmerSet,
    m: usize,
    backend: SortBackend,
) -> Result<MismatchProfile> {
    let k = sx.k;
    let t = (2 * m).min(k);
    let mut f = Vec::with_capacity(t + 1);
    for i in 0..=t {
        let mut total = 0u64;
        for theta in Combinations::new(k, k - i) {
            let c = f_theta_with(sx, sy, &theta, backend)?;
            total = total
                .checked_add(c)
                .ok_or_else(|| Error::Numeric("F_i overflows u64".into()))?;
        }
        f.push(total);
    }
    let m_counts = profile_from_agreements(&f, k)?;
    Ok(MismatchProfile { t, f, m: m_counts })
}

/// M_i from F_i via the triangular recurrence, in checked u64 arithmetic.
fn profile_from_agreements(f: &[u64], k: usize) -> Result<Vec<u64>> {
    use num_traits::ToPrimitive;
    let mut m_counts: Vec<u64> = Vec::with_capacity(f.len());
    for (i, &fi) in f.iter().enumerate() {
        let mut value = fi;
        for (j, &mj) in m_counts.iter().enumerate() {
            let coeff = binomial((k - j) as i64, (k - i) as i64)
                .to_u64()
                .ok_or_else(|| Error::Numeric("binomial coefficient exceeds u64".into()))?;
            let sub = coeff
                .checked_mul(mj)
                .ok_or_else(|| Error::Numeric("M recurrence term overflows u64".into()))?;
            value = value.checked_sub(sub).ok_or_else(|| {
                Error::Numeric(format!("negative M_{i}: inconsistent agreement counts"))
            })?;
        }
        m_counts.push(value);
    }
    Ok(m_counts)
}

/// Σ_i M_i · I_i in exact integer arithmetic.
pub fn kernel_from_profile(profile: &MismatchProfile, table: &IntersectionTable) -> BigUint {
    let mut total = BigUint::zero();
    for (i, &mi) in profile.m.iter().enumerate() {
        total += table.value(i) * BigUint::from(mi);
    }
    total
}

/// K(X,Y|k,m) = Σ_i M_i · I_i, accumulated exactly.
pub fn exact_kernel_int(
    x: &SequenceRecord,
    y: &SequenceRecord,
    k: usize,
    m: usize,
    table: &IntersectionTable,
) -> Result<BigUint> {
    validate_table(x, y, k, m, table)?;
    let sx = extract_kmers(x, k);
    let sy = extract_kmers(y, k);
    if sx.is_empty() || sy.is_empty() {
        return Ok(BigUint::zero());
    }
    let profile = exact_profile(&sx, &sy, m)?;
    Ok(kernel_from_profile(&profile, table))
}

/// As [`exact_kernel_int`], converted to f64 at the end.
pub fn exact_kernel_value(
    x: &SequenceRecord,
    y: &SequenceRecord,
    k: usize,
    m: usize,
    table: &IntersectionTable,
) -> Result<f64> {
    Ok(big_to_f64(&exact_kernel_int(x, y, k, m, table)?))
}

fn validate_table(
    x: &SequenceRecord,
    y: &SequenceRecord,
    k: usize,
    m: usize,
    table: &IntersectionTable,
) -> Result<()> {
    if table.k != k || table.m != m {
        return Err(Error::InvalidParam(format!(
            "intersection table built for (k={}, m={}), asked for (k={k}, m={m})",
            table.k, table.m
        )));
    }
    for rec in [x, y] {
        if let Some(&r) = rec.residues.iter().find(|&&r| r as usize >= table.s) {
            return Err(Error::InvalidParam(format!(
                "record '{}' has residue index {r} outside alphabet of size {}",
                rec.id, table.s
            )));
        }
    }
    Ok(())
}

/// All-pairs Hamming distance histogram over the full range 0..k.
/// O(n_X·n_Y·k); this is the oracle for `exact_profile`.
pub fn brute_force_profile(sx: &KmerSet, sy: &KmerSet) -> Vec<u64> {
    let k = sx.k;
    let mut hist = vec![0u64; k + 1];
    for a in &sx.kmers {
        for b in &sy.kmers {
            hist[hamming(a, b)] += 1;
        }
    }
    hist
}

/// Σ over all k-mer occurrence pairs of the enumerated neighborhood
/// intersection. Oracle for [`exact_kernel_int`]; subject to the
/// enumeration cap of the intersect module.
pub fn brute_force_kernel_int(
    x: &SequenceRecord,
    y: &SequenceRecord,
    k: usize,
    m: usize,
    s: usize,
) -> Result<BigUint> {
    let sx = extract_kmers(x, k);
    let sy = extract_kmers(y, k);
    let mut total = BigUint::zero();
    for a in &sx.kmers {
        for b in &sy.kmers {
            total += BigUint::from(brute_force_intersection(a, b, m, s)?);
        }
    }
    Ok(total)
}

pub fn brute_force_kernel(
    x: &SequenceRecord,
    y: &SequenceRecord,
    k: usize,
    m: usize,
    s: usize,
) -> Result<f64> {
    Ok(big_to_f64(&brute_force_kernel_int(x, y, k, m, s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Alphabet;

    fn toy_sets() -> (KmerSet, KmerSet) {
        let a = Alphabet::dna();
        let x = SequenceRecord::encode("x", "ACGT", &a).unwrap();
        let y = SequenceRecord::encode("y", "ACGA", &a).unwrap();
        (extract_kmers(&x, 3), extract_kmers(&y, 3))
    }

    #[test]
    fn combinations_lexicographic() {
        let got: Vec<Vec<usize>> = Combinations::new(4, 2)
            .map(|c| c.positions().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1); // the empty subset
        assert_eq!(Combinations::new(3, 3).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
    }

    #[test]
    fn f_theta_toy_values() {
        let (sx, sy) = toy_sets();
        let theta01 = IndexSubset::new(vec![0, 1], 3).unwrap();
        assert_eq!(f_theta(&sx, &sy, &theta01).unwrap(), 2);
        let full = IndexSubset::full(3);
        assert_eq!(f_theta(&sx, &sy, &full).unwrap(), 1);
        let empty = IndexSubset::new(vec![], 3).unwrap();
        assert_eq!(f_theta(&sx, &sy, &empty).unwrap(), 4);
    }

    #[test]
    fn f_theta_backends_agree() {
        let (sx, sy) = toy_sets();
        for j in 0..=3usize {
            for theta in Combinations::new(3, j) {
                let a = f_theta_with(&sx, &sy, &theta, SortBackend::Comparison).unwrap();
                let b = f_theta_with(&sx, &sy, &theta, SortBackend::Counting).unwrap();
                assert_eq!(a, b, "theta={:?}", theta.positions());
            }
        }
    }

    #[test]
    fn f_theta_mismatched_k_rejected() {
        let a = Alphabet::dna();
        let x = SequenceRecord::encode("x", "ACGT", &a).unwrap();
        let sx3 = extract_kmers(&x, 3);
        let sx2 = extract_kmers(&x, 2);
        let theta = IndexSubset::new(vec![0], 2).unwrap();
        assert!(f_theta(&sx3, &sx2, &theta).is_err());
    }

    #[test]
    fn exact_profile_toy_trace() {
        let (sx, sy) = toy_sets();
        let p = exact_profile(&sx, &sy, 1).unwrap();
        assert_eq!(p.t, 2);
        assert_eq!(p.f, vec![1, 4, 5]);
        assert_eq!(p.m, vec![1, 1, 0]);
    }

    #[test]
    fn exact_profile_single_identical_pair() {
        let a = Alphabet::dna();
        let x = SequenceRecord::encode("x", "AAA", &a).unwrap();
        let sx = extract_kmers(&x, 3);
        let p = exact_profile(&sx, &sx, 1).unwrap();
        assert_eq!(p.m, vec![1, 0, 0]);
    }

    #[test]
    fn exact_profile_mass_outside_table() {
        let a = Alphabet::dna();
        let x = SequenceRecord::encode("x", "AAA", &a).unwrap();
        let y = SequenceRecord::encode("y", "TTT", &a).unwrap();
        let p = exact_profile(&extract_kmers(&x, 3), &extract_kmers(&y, 3), 1).unwrap();
        assert_eq!(p.m, vec![0, 0, 0]); // all mass at distance 3 > t = 2
    }

    #[test]
    fn exact_kernel_toy_pair() {
        let a = Alphabet::dna();
        let table = IntersectionTable::build(3, 1, 4).unwrap();
        let x = SequenceRecord::encode("x", "ACGT", &a).unwrap();
        let y = SequenceRecord::encode("y", "ACGA", &a).unwrap();
        assert_eq!(exact_kernel_value(&x, &y, 3, 1, &table).unwrap(), 14.0);
    }

    #[test]
    fn exact_kernel_m0_is_spectrum_kernel() {
        let a = Alphabet::dna();
        let table = IntersectionTable::build(3, 0, 4).unwrap();
        let x = SequenceRecord::encode("x", "ACGT", &a).unwrap();
        assert_eq!(exact_kernel_value(&x, &x, 3, 0, &table).unwrap(), 2.0);
    }

    #[test]
    fn exact_kernel_short_sequence_is_zero() {
        let a = Alphabet::dna();
        let table = IntersectionTable::build(3, 1, 4).unwrap();
        let x = SequenceRecord::encode("x", "AC", &a).unwrap();
        let y = SequenceRecord::encode("y", "ACGT", &a).unwrap();
        assert_eq!(exact_kernel_value(&x, &y, 3, 1, &table).unwrap(), 0.0);
    }

    #[test]
    fn exact_kernel_rejects_inconsistent_table() {
        let a = Alphabet::dna();
        let table = IntersectionTable::build(3, 1, 4).unwrap();
        let x = SequenceRecord::encode("x", "ACGT", &a).unwrap();
        assert!(exact_kernel_value(&x, &x, 4, 1, &table).is_err());
        assert!(exact_kernel_value(&x, &x, 3, 2, &table).is_err());
        // residues outside the table alphabet
        let p = Alphabet::protein();
        let z = SequenceRecord::encode("z", "WYWY", &p).unwrap();
        assert!(exact_kernel_value(&z, &z, 3, 1, &table).is_err());
    }

    #[test]
    fn brute_profile_toy() {
        let (sx, sy) = toy_sets();
        assert_eq!(brute_force_profile(&sx, &sy), vec![1, 1, 0, 2]);
        assert_eq!(brute_force_profile(&sy, &sx), brute_force_profile(&sx, &sy));
        let empty = KmerSet { k: 3, kmers: vec![] };
        assert_eq!(brute_force_profile(&empty, &sy), vec![0, 0, 0, 0]);
    }

    #[test]
    fn brute_kernel_toy() {
        let a = Alphabet::dna();
        let x = SequenceRecord::encode("x", "ACGT", &a).unwrap();
        let y = SequenceRecord::encode("y", "ACGA", &a).unwrap();
        assert_eq!(brute_force_kernel(&x, &y, 3, 1, 4).unwrap(), 14.0);
        // single self-pair: the ball size
        let z = SequenceRecord::encode("z", "ACG", &a).unwrap();
        assert_eq!(brute_force_kernel(&z, &z, 3, 1, 4).unwrap(), 10.0);
    }

    #[test]
    fn profile_identity_holds() {
        use num_traits::ToPrimitive;
        let (sx, sy) = toy_sets();
        let p = exact_profile(&sx, &sy, 1).unwrap();
        for i in 0..=p.t {
            let mut expect = 0u64;
            for j in 0..=i {
                let c = binomial((3 - j) as i64, (3 - i) as i64).to_u64().unwrap();
                expect += c * p.m[j];
            }
            assert_eq!(p.f[i], expect);
        }
    }
}
