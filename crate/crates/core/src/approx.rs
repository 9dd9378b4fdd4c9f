//! Sampling-based estimation of the mismatch kernel.
//!
//! Instead of enumerating all C(k, k−i) index subsets per level, a plan
//! draws a capped number of subsets B_i ⊆ Q_k(k−i) and scales the mean of
//! f_θ back up by the population size. The estimate is unbiased; one plan
//! shared across every pair of a Gram computation acts as a random
//! projection of the underlying agreement vectors, which is what keeps the
//! assembled matrix (empirically) positive semidefinite.
//!
//! Two regimes:
//! - fixed: B_i drawn once, without replacement, from a seeded generator;
//!   covering the whole population makes the estimator exact.
//! - adaptive: per-pair draws with replacement, stopping when the running
//!   sample variance of the scaled draws falls below σ² = ε²δ or the cap
//!   is reached.
//!
//! All randomness comes from ChaCha12 seeded with caller-supplied 64-bit
//! seeds, so plans and estimates are reproducible across platforms.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{f_theta, Combinations, IndexSubset};
use crate::intersect::IntersectionTable;
use crate::seq::KmerSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    #[default]
    Fixed,
    Adaptive,
}

/// Estimator parameters: accuracy knobs (ε, δ), the per-level sample cap B,
/// the regime, and the seed all randomness flows from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub cap: u64,
    pub mode: SamplingMode,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            delta: 0.25,
            cap: 300,
            mode: SamplingMode::Fixed,
            seed: 0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParam(format!(
                "epsilon must be in (0,1), got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "delta must be in (0,1), got {}",
                self.delta
            )));
        }
        if self.cap < 1 {
            return Err(Error::InvalidParam("sample cap B must be >= 1".into()));
        }
        Ok(())
    }

    /// Variance target σ² = ε²δ of the adaptive stopping rule.
    pub fn sigma_squared(&self) -> f64 {
        self.epsilon * self.epsilon * self.delta
    }
}

/// The seeded collection of index subsets B_0..B_t shared by all pairs of
/// one Gram computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledThetaPlan {
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    levels: Vec<Vec<IndexSubset>>,
}

impl SampledThetaPlan {
    /// Draws |B_i| = min(B, C(k, k−i)) distinct subsets per level. When the
    /// cap covers the whole population the level is enumerated outright, so
    /// the estimator degenerates to the exact computation.
    pub fn build(k: usize, m: usize, config: &SamplingConfig) -> Result<Self> {
        config.validate()?;
        if k < 1 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        let t = (2 * m).min(k);
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        let mut levels = Vec::with_capacity(t + 1);
        for i in 0..=t {
            let j = k - i;
            let population = Combinations::count(k, j)?;
            let want = config.cap.min(population);
            let subsets = if want == population {
                Combinations::new(k, j).collect()
            } else {
                sample_distinct_subsets(&mut rng, k, j, want as usize)
            };
            levels.push(subsets);
        }
        Ok(Self {
            k,
            m,
            seed: config.seed,
            levels,
        })
    }

    /// Builds a plan from explicit levels. B_0 must hold exactly the full
    /// index set; every θ in B_i must have size k−i and be distinct.
    pub fn from_levels(
        k: usize,
        m: usize,
        seed: u64,
        levels: Vec<Vec<IndexSubset>>,
    ) -> Result<Self> {
        let t = (2 * m).min(k);
        if levels.len() != t + 1 {
            return Err(Error::InvalidParam(format!(
                "expected {} levels, got {}",
                t + 1,
                levels.len()
            )));
        }
        if levels[0].len() != 1 || levels[0][0] != IndexSubset::full(k) {
            return Err(Error::InvalidParam(
                "level 0 must contain exactly the full index set".into(),
            ));
        }
        for (i, level) in levels.iter().enumerate() {
            if level.is_empty() {
                return Err(Error::InvalidParam(format!("level {i} is empty")));
            }
            let mut seen = HashSet::new();
            for theta in level {
                if theta.len() != k - i {
                    return Err(Error::InvalidParam(format!(
                        "level {i} subset has size {}, expected {}",
                        theta.len(),
                        k - i
                    )));
                }
                if !seen.insert(theta.clone()) {
                    return Err(Error::InvalidParam(format!(
                        "level {i} contains a duplicate subset"
                    )));
                }
            }
        }
        Ok(Self { k, m, seed, levels })
    }

    pub fn t(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, i: usize) -> &[IndexSubset] {
        &self.levels[i]
    }

    /// True when every level enumerates its whole population.
    pub fn is_full_coverage(&self) -> Result<bool> {
        for (i, level) in self.levels.iter().enumerate() {
            if (level.len() as u64) < Combinations::count(self.k, self.k - i)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// SHA-256 over the canonical plan description; recorded in Gram
    /// metadata so outputs are traceable to the exact subsets used.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("k={};m={};seed={}", self.k, self.m, self.seed));
        for (i, level) in self.levels.iter().enumerate() {
            hasher.update(format!(";L{i}:"));
            for theta in level {
                let positions: Vec<String> =
                    theta.positions().iter().map(|p| p.to_string()).collect();
                hasher.update(positions.join(","));
                hasher.update("|");
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// Smallest cap that makes every level of a (k, m) plan exhaustive.
pub fn full_coverage_cap(k: usize, m: usize) -> Result<u64> {
    let t = (2 * m).min(k);
    let mut max = 1u64;
    for i in 0..=t {
        max = max.max(Combinations::count(k, k - i)?);
    }
    Ok(max)
}

/// Uniform random j-subset of 0..k (Floyd's algorithm), returned sorted.
fn random_subset(rng: &mut ChaCha12Rng, k: usize, j: usize) -> IndexSubset {
    let mut chosen = HashSet::with_capacity(j);
    for pos in (k - j)..k {
        let r = rng.gen_range(0..=pos);
        if !chosen.insert(r) {
            chosen.insert(pos);
        }
    }
    let mut positions: Vec<usize> = chosen.into_iter().collect();
    positions.sort_unstable();
    IndexSubset::new(positions, k).expect("Floyd sample is a valid subset")
}

/// Draws `want` distinct subsets by rejection; each accepted subset is
/// uniform over the not-yet-drawn ones, so the collection is a uniform
/// without-replacement sample in draw order.
fn sample_distinct_subsets(
    rng: &mut ChaCha12Rng,
    k: usize,
    j: usize,
    want: usize,
) -> Vec<IndexSubset> {
    let mut seen = HashSet::with_capacity(want);
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        let theta = random_subset(rng, k, j);
        if seen.insert(theta.clone()) {
            out.push(theta);
        }
    }
    out
}

/// Estimated agreement and distance counts. Unlike the exact profile these
/// are reals, and the M̂_i may be negative; they are propagated unclamped
/// so the estimator stays unbiased.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxProfile {
    pub t: usize,
    pub f_hat: Vec<f64>,
    pub m_hat: Vec<f64>,
}

/// F̂_i = (C(k, k−i) / |B_i|) · Σ_{θ ∈ B_i} f_θ, then the M̂ recurrence.
/// M̂_0 is exact because B_0 is always the singleton full set.
pub fn approx_profile(sx: &KmerSet, sy: &KmerSet, plan: &SampledThetaPlan) -> Result<ApproxProfile> {
    if sx.k != plan.k || sy.k != plan.k {
        return Err(Error::InvalidParam(format!(
            "plan built for k={}, k-mer sets have k={}/{}",
            plan.k, sx.k, sy.k
        )));
    }
    let k = plan.k;
    let t = plan.t();
    let mut f_hat = Vec::with_capacity(t + 1);
    for i in 0..=t {
        let level = plan.level(i);
        let mut sum = 0.0;
        for theta in level {
            sum += f_theta(sx, sy, theta)? as f64;
        }
        let population = Combinations::count(k, k - i)? as f64;
        f_hat.push(sum / level.len() as f64 * population);
    }
    let m_hat = profile_from_estimates(&f_hat, k)?;
    Ok(ApproxProfile { t, f_hat, m_hat })
}

fn profile_from_estimates(f_hat: &[f64], k: usize) -> Result<Vec<f64>> {
    use num_traits::ToPrimitive;
    let mut m_hat: Vec<f64> = Vec::with_capacity(f_hat.len());
    for (i, &fi) in f_hat.iter().enumerate() {
        let mut value = fi;
        for (j, &mj) in m_hat.iter().enumerate() {
            let coeff = crate::intersect::binomial((k - j) as i64, (k - i) as i64)
                .to_f64()
                .ok_or_else(|| Error::Numeric("binomial coefficient overflows f64".into()))?;
            value -= coeff * mj;
        }
        m_hat.push(value);
    }
    Ok(m_hat)
}

/// K' = Σ_i I_i · M̂_i. May be negative for a single pair; callers must not
/// clamp it.
pub fn approx_kernel_value(
    sx: &KmerSet,
    sy: &KmerSet,
    table: &IntersectionTable,
    plan: &SampledThetaPlan,
) -> Result<f64> {
    if table.k != plan.k || table.m != plan.m {
        return Err(Error::InvalidParam(format!(
            "table (k={}, m={}) does not match plan (k={}, m={})",
            table.k, table.m, plan.k, plan.m
        )));
    }
    let profile = approx_profile(sx, sy, plan)?;
    Ok(kernel_from_m_hat(&profile.m_hat, table))
}

pub fn kernel_from_m_hat(m_hat: &[f64], table: &IntersectionTable) -> f64 {
    let weights = table.values_f64();
    m_hat
        .iter()
        .zip(weights.iter())
        .map(|(m, w)| m * w)
        .sum()
}

/// Per-level outcome of the adaptive stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub draws: u64,
    /// Welford sample variance of the scaled draws f_θ · C(k, k−i);
    /// infinite until two draws exist.
    pub sample_variance: f64,
    /// Whether the rule stopped because the variance target was met rather
    /// than because the cap ran out.
    pub achieved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveEstimate {
    pub profile: ApproxProfile,
    pub levels: Vec<LevelStats>,
}

impl AdaptiveEstimate {
    /// True when every level met the σ² = ε²δ target before the cap.
    pub fn all_achieved(&self) -> bool {
        self.levels.iter().all(|l| l.achieved)
    }
}

/// Adaptive estimation: per level, draws θ uniformly with replacement and
/// stops when the sample variance of the scaled draws reaches σ² = ε²δ or
/// the cap B. Randomness comes from `config.seed`; Gram assembly derives a
/// distinct seed per pair via [`pair_seed`].
pub fn adaptive_profile(
    sx: &KmerSet,
    sy: &KmerSet,
    k: usize,
    m: usize,
    config: &SamplingConfig,
) -> Result<AdaptiveEstimate> {
    adaptive_profile_seeded(sx, sy, k, m, config, config.seed)
}

pub fn adaptive_profile_seeded(
    sx: &KmerSet,
    sy: &KmerSet,
    k: usize,
    m: usize,
    config: &SamplingConfig,
    seed: u64,
) -> Result<AdaptiveEstimate> {
    config.validate()?;
    if sx.k != k || sy.k != k {
        return Err(Error::InvalidParam(format!(
            "k-mer sets have k={}/{}, expected {k}",
            sx.k, sy.k
        )));
    }
    let sigma2 = config.sigma_squared();
    let t = (2 * m).min(k);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut f_hat = Vec::with_capacity(t + 1);
    let mut levels = Vec::with_capacity(t + 1);
    for i in 0..=t {
        let j = k - i;
        let scale = Combinations::count(k, j)? as f64;
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        let mut draws = 0u64;
        let variance = loop {
            let theta = random_subset(&mut rng, k, j);
            let x = f_theta(sx, sy, &theta)? as f64 * scale;
            draws += 1;
            let delta = x - mean;
            mean += delta / draws as f64;
            m2 += delta * (x - mean);
            let var = if draws >= 2 {
                m2 / (draws - 1) as f64
            } else {
                f64::INFINITY
            };
            if draws >= config.cap || var <= sigma2 {
                break var;
            }
        };
        levels.push(LevelStats {
            draws,
            sample_variance: variance,
            achieved: variance <= sigma2,
        });
        f_hat.push(mean);
    }
    let m_hat = profile_from_estimates(&f_hat, k)?;
    Ok(AdaptiveEstimate {
        profile: ApproxProfile { t, f_hat, m_hat },
        levels,
    })
}

/// Stable FNV-1a mix of the run seed and a pair of record ids. Keeps
/// per-pair adaptive generators deterministic under any work schedule.
pub fn pair_seed(seed: u64, id_x: &str, id_y: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h = (h ^ b as u64).wrapping_mul(PRIME);
        }
        h = (h ^ 0x1f).wrapping_mul(PRIME); // field separator
    };
    eat(&seed.to_le_bytes());
    eat(id_x.as_bytes());
    eat(id_y.as_bytes());
    h
}
