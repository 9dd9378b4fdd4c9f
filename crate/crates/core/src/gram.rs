//! Gram matrix assembly, PSD inspection, centering, and kernel PCA.
//!
//! All N(N+1)/2 unordered pairs (self-pairs included) are computed once and
//! mirrored. Pairs are independent units of work and run on the current
//! rayon pool; results are identical regardless of thread count. For the
//! approximate method one sampling plan is built per Gram computation and
//! shared by every pair — sharing is what makes the estimate a random
//! projection of the per-sequence agreement vectors rather than N²
//! unrelated noisy numbers.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{
    adaptive_profile_seeded, approx_kernel_value, kernel_from_m_hat, pair_seed, SampledThetaPlan,
    SamplingConfig, SamplingMode,
};
use crate::error::{Error, Result};
use crate::exact::{exact_profile_with, kernel_from_profile};
use crate::intersect::{big_to_f64, IntersectionTable};
use crate::seq::{extract_kmers, Alphabet, KmerSet, SequenceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramMethod {
    Exact,
    Approx,
}

/// Provenance carried in the JSON sidecar next to a Gram matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMeta {
    pub method: GramMethod,
    pub k: usize,
    pub m: usize,
    pub alphabet: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_digest: Option<String>,
}

impl GramMeta {
    pub fn exact(k: usize, m: usize, alphabet: &Alphabet) -> Self {
        Self {
            method: GramMethod::Exact,
            k,
            m,
            alphabet: alphabet.to_string(),
            mode: None,
            seed: None,
            epsilon: None,
            delta: None,
            cap: None,
            plan_digest: None,
        }
    }
}

/// N×N symmetric kernel matrix plus the id manifest and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub meta: GramMeta,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

/// Computes the full Gram matrix for a dataset.
///
/// Exact method: per-pair profile + intersection table. Approximate method:
/// fixed mode shares one seeded plan across all pairs; adaptive mode gives
/// each pair a private generator seeded from (seed, id, id) so results do
/// not depend on scheduling.
pub fn compute_gram(
    dataset: &[SequenceRecord],
    alphabet: &Alphabet,
    k: usize,
    m: usize,
    method: GramMethod,
    config: &SamplingConfig,
) -> Result<GramMatrix> {
    compute_gram_with(
        dataset,
        alphabet,
        k,
        m,
        method,
        config,
        crate::exact::SortBackend::Comparison,
    )
}

/// As [`compute_gram`], choosing the sort-enumerate backend for the exact
/// method (the approximate estimators always use comparison sort).
pub fn compute_gram_with(
    dataset: &[SequenceRecord],
    alphabet: &Alphabet,
    k: usize,
    m: usize,
    method: GramMethod,
    config: &SamplingConfig,
    backend: crate::exact::SortBackend,
) -> Result<GramMatrix> {
    if dataset.is_empty() {
        return Err(Error::InvalidParam("empty dataset".into()));
    }
    let s = alphabet.size();
    for rec in dataset {
        if let Some(&r) = rec.residues.iter().find(|&&r| r as usize >= s) {
            return Err(Error::InvalidParam(format!(
                "record '{}' has residue index {r} outside alphabet of size {s}",
                rec.id
            )));
        }
    }

    let table = IntersectionTable::build(k, m, s)?;
    let sets: Vec<KmerSet> = dataset.iter().map(|rec| extract_kmers(rec, k)).collect();
    let n = dataset.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();

    let mut meta = match method {
        GramMethod::Exact => GramMeta::exact(k, m, alphabet),
        GramMethod::Approx => {
            config.validate()?;
            GramMeta {
                method: GramMethod::Approx,
                k,
                m,
                alphabet: alphabet.to_string(),
                mode: Some(
                    match config.mode {
                        SamplingMode::Fixed => "fixed",
                        SamplingMode::Adaptive => "adaptive",
                    }
                    .to_string(),
                ),
                seed: Some(config.seed),
                epsilon: Some(config.epsilon),
                delta: Some(config.delta),
                cap: Some(config.cap),
                plan_digest: None,
            }
        }
    };

    let entries: Vec<f64> = match method {
        GramMethod::Exact => pairs
            .par_iter()
            .map(|&(i, j)| -> Result<f64> {
                let profile = exact_profile_with(&sets[i], &sets[j], m, backend)?;
                Ok(big_to_f64(&kernel_from_profile(&profile, &table)))
            })
            .collect::<Result<_>>()?,
        GramMethod::Approx => match config.mode {
            SamplingMode::Fixed => {
                let plan = SampledThetaPlan::build(k, m, config)?;
                meta.plan_digest = Some(plan.digest());
                pairs
                    .par_iter()
                    .map(|&(i, j)| approx_kernel_value(&sets[i], &sets[j], &table, &plan))
                    .collect::<Result<_>>()?
            }
            SamplingMode::Adaptive => pairs
                .par_iter()
                .map(|&(i, j)| -> Result<f64> {
                    let seed = pair_seed(config.seed, &dataset[i].id, &dataset[j].id);
                    let est = adaptive_profile_seeded(&sets[i], &sets[j], k, m, config, seed)?;
                    Ok(kernel_from_m_hat(&est.profile.m_hat, &table))
                })
                .collect::<Result<_>>()?,
        },
    };

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), &v) in pairs.iter().zip(entries.iter()) {
        values[i][j] = v;
        values[j][i] = v;
    }

    Ok(GramMatrix {
        ids: dataset.iter().map(|r| r.id.clone()).collect(),
        values,
        meta,
    })
}

fn symmetric_eigen(values: &[Vec<f64>]) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = values.len();
    let mat = DMatrix::from_fn(n, n, |i, j| values[i][j]);
    let max_iters = 10usize.saturating_mul(n).saturating_mul(n).max(100);
    SymmetricEigen::try_new(mat, 1e-10, max_iters)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))
}

/// Eigenvalues of the (symmetric) Gram matrix, descending.
pub fn eigenvalues_desc(gram: &GramMatrix) -> Result<Vec<f64>> {
    let eig = symmetric_eigen(&gram.values)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(vals)
}

/// Smallest eigenvalue; the PSD check is `min >= -tol * lambda_max`.
pub fn min_eigenvalue(gram: &GramMatrix) -> Result<f64> {
    Ok(*eigenvalues_desc(gram)?
        .last()
        .expect("non-empty eigenvalue list"))
}

/// Double centering: K_c = K − 1K/N − K1/N + 1K1/N².
pub fn center_gram(gram: &GramMatrix) -> GramMatrix {
    let n = gram.n();
    let nf = n as f64;
    let row_mean: Vec<f64> = gram
        .values
        .iter()
        .map(|row| row.iter().sum::<f64>() / nf)
        .collect();
    let grand_mean = row_mean.iter().sum::<f64>() / nf;
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            // symmetric input: column means equal row means
            values[i][j] = gram.values[i][j] - row_mean[i] - row_mean[j] + grand_mean;
        }
    }
    GramMatrix {
        ids: gram.ids.clone(),
        values,
        meta: gram.meta.clone(),
    }
}

/// Kernel-PCA output: the top-c scaled eigenvectors of the centered Gram.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub ids: Vec<String>,
    pub components: usize,
    /// N×c, row per sequence: (√λ_1 v_1[i], ..., √λ_c v_c[i]).
    pub vectors: Vec<Vec<f64>>,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
}

/// Centers the Gram, eigendecomposes, and keeps the top c eigenpairs.
///
/// Kept eigenvalues within −1e−8·λ_max of zero are clamped to 0 (noise from
/// the approximate method); anything more negative is an error carrying the
/// offending eigenvalue, since it signals a materially non-PSD matrix.
pub fn kernel_pca(gram: &GramMatrix, c: usize) -> Result<Embedding> {
    let n = gram.n();
    if c < 1 || c > n {
        return Err(Error::InvalidParam(format!(
            "components must satisfy 1 <= c <= N = {n}, got {c}"
        )));
    }
    let centered = center_gram(gram);
    let eig = symmetric_eigen(&centered.values)?;

    let mut order: Vec<usize> = (0..n).collect();
    let vals = &eig.eigenvalues;
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).expect("finite eigenvalues"));

    let lambda_max = order.first().map(|&i| vals[i]).unwrap_or(0.0).max(0.0);
    let neg_tol = 1e-8 * lambda_max + f64::EPSILON;

    let mut eigenvalues = Vec::with_capacity(c);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(c);
    for &idx in order.iter().take(c) {
        let lambda = vals[idx];
        let clamped = if lambda >= 0.0 {
            lambda
        } else if lambda >= -neg_tol {
            0.0
        } else {
            return Err(Error::Numeric(format!(
                "significantly negative eigenvalue {lambda:e} (limit {:e}): non-PSD Gram matrix",
                -neg_tol
            )));
        };
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        fix_sign(&mut v);
        eigenvalues.push(clamped);
        columns.push(v);
    }

    let mut vectors = vec![vec![0.0; c]; n];
    for (j, (v, &lambda)) in columns.iter().zip(eigenvalues.iter()).enumerate() {
        let scale = lambda.sqrt();
        for i in 0..n {
            vectors[i][j] = scale * v[i];
        }
    }

    Ok(Embedding {
        ids: gram.ids.clone(),
        components: c,
        vectors,
        eigenvalues,
    })
}

/// Deterministic eigenvector orientation: first non-negligible component
/// is made positive.
fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return;
    }
    for &x in v.iter() {
        if x.abs() > 1e-12 * scale {
            if x < 0.0 {
                v.iter_mut().for_each(|y| *y = -*y);
            }
            return;
        }
    }
}

// ── Text formats ──────────────────────────────────────────────────────────
//
// Gram file: "N <count>" / comma-separated ids / N rows of N space-separated
// decimals with 13 significant digits. The JSON sidecar carries the meta.

fn fmt_value(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn gram_to_text(gram: &GramMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("N {}\n", gram.n()));
    out.push_str(&gram.ids.join(","));
    out.push('\n');
    for row in &gram.values {
        let cells: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_gram(path: impl AsRef<Path>, gram: &GramMatrix) -> Result<()> {
    fs::write(path, gram_to_text(gram))?;
    Ok(())
}

pub fn write_gram_sidecar(path: impl AsRef<Path>, sidecar: &impl Serialize) -> Result<()> {
    let json = serde_json::to_string_pretty(sidecar)
        .map_err(|e| Error::Numeric(format!("sidecar serialization failed: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_gram(path: impl AsRef<Path>) -> Result<GramMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_gram(&text, &path.display().to_string())
}

pub fn parse_gram(text: &str, path: &str) -> Result<GramMatrix> {
    let bad = |msg: String| Error::Format {
        path: path.to_string(),
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty gram file".into()))?;
    let n: usize = header
        .strip_prefix("N ")
        .and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| bad(format!("expected 'N <count>' header, got '{header}'")))?;
    let ids: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("missing id line".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if ids.len() != n {
        return Err(bad(format!("expected {n} ids, got {}", ids.len())));
    }
    let mut values = Vec::with_capacity(n);
    for (r, line) in lines.take(n).enumerate() {
        let row: std::result::Result<Vec<f64>, _> = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect();
        let row = row.map_err(|e| bad(format!("row {}: {e}", r + 1)))?;
        if row.len() != n {
            return Err(bad(format!(
                "row {}: expected {n} values, got {}",
                r + 1,
                row.len()
            )));
        }
        values.push(row);
    }
    if values.len() != n {
        return Err(bad(format!("expected {n} rows, got {}", values.len())));
    }
    Ok(GramMatrix {
        ids,
        values,
        meta: GramMeta {
            method: GramMethod::Exact,
            k: 0,
            m: 0,
            alphabet: String::new(),
            mode: None,
            seed: None,
            epsilon: None,
            delta: None,
            cap: None,
            plan_digest: None,
        },
    })
}

/// Embedding file: an eigenvalue comment line, a CSV header `id,e1..ec`,
/// then one row per sequence.
pub fn embedding_to_csv(emb: &Embedding) -> String {
    let mut out = String::new();
    let eig: Vec<String> = emb.eigenvalues.iter().map(|&v| fmt_value(v)).collect();
    out.push_str(&format!("# eigenvalues: {}\n", eig.join(",")));
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain((1..=emb.components).map(|i| format!("e{i}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (id, row) in emb.ids.iter().zip(emb.vectors.iter()) {
        let cells: Vec<String> = std::iter::once(id.clone())
            .chain(row.iter().map(|&v| fmt_value(v)))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_embedding(path: impl AsRef<Path>, emb: &Embedding) -> Result<()> {
    fs::write(path, embedding_to_csv(emb))?;
    Ok(())
}
