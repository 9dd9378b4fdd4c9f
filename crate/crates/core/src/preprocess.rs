//! Minimizer compression and information-gain position selection.
//!
//! Three pipelines feed the kernel: ordered-minimizer concatenation (each
//! k-mer window contributes its smallest canonical m-mer, in window order),
//! selection of the highest information-gain positions of aligned labeled
//! sequences, and their composition. Reduced sequences keep the selected
//! positions in original left-to-right order so downstream k-mers still
//! reflect sequence locality.

use std::collections::HashMap;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::SequenceRecord;

/// Window length k and minimizer length m_len < k. Defaults follow the
/// spike-protein setting (k = 9, m_len = 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimizerParams {
    pub k: usize,
    pub m_len: usize,
}

impl Default for MinimizerParams {
    fn default() -> Self {
        Self { k: 9, m_len: 3 }
    }
}

impl MinimizerParams {
    pub fn validate(&self) -> Result<()> {
        if self.m_len < 1 || self.m_len >= self.k {
            return Err(Error::InvalidParam(format!(
                "minimizer params need 1 <= m_len < k, got m_len={}, k={}",
                self.m_len, self.k
            )));
        }
        Ok(())
    }
}

/// min(mmer, reverse(mmer)) under symbol-index lexicographic order.
pub fn canonical_mmer(mmer: &[u8]) -> Vec<u8> {
    let mut rev: Vec<u8> = mmer.to_vec();
    rev.reverse();
    if rev.as_slice() < mmer {
        rev
    } else {
        mmer.to_vec()
    }
}

/// One canonical m-mer per k-mer window, in window order: the smallest
/// canonical m-mer of the window, ties broken by leftmost occurrence.
///
/// Maintains a queue of the window's m-mers; the minimum index only moves
/// on strict '<', and the queue is rescanned when the current minimizer
/// slides out of the window. A sequence shorter than k yields no windows.
pub fn minimizers(seq: &SequenceRecord, params: &MinimizerParams) -> Result<Vec<Vec<u8>>> {
    params.validate()?;
    let (k, m_len) = (params.k, params.m_len);
    let residues = &seq.residues;
    if residues.len() < k {
        return Ok(Vec::new());
    }

    let mut out = Vec::with_capacity(residues.len() - k + 1);
    let mut queue: VecDeque<Vec<u8>> = VecDeque::with_capacity(k - m_len + 1);
    let mut idx = 0usize;

    for start in 0..=(residues.len() - k) {
        if start > 0 && idx > 0 {
            // previous minimizer still inside the window after the shift
            queue.pop_front();
            idx -= 1;
            let tail = start + k - m_len;
            let mmer = canonical_mmer(&residues[tail..tail + m_len]);
            queue.push_back(mmer);
            if queue[queue.len() - 1] < queue[idx] {
                idx = queue.len() - 1;
            }
        } else {
            queue.clear();
            idx = 0;
            for j in 0..=(k - m_len) {
                let pos = start + j;
                let mmer = canonical_mmer(&residues[pos..pos + m_len]);
                queue.push_back(mmer);
                if queue[j] < queue[idx] {
                    idx = j;
                }
            }
        }
        out.push(queue[idx].clone());
    }
    Ok(out)
}

/// Concatenates the per-window minimizers into a new record of length
/// (L − k + 1)·m_len, preserving id and label.
pub fn ordered_minimizer_sequence(
    seq: &SequenceRecord,
    params: &MinimizerParams,
) -> Result<SequenceRecord> {
    let mins = minimizers(seq, params)?;
    let mut residues = Vec::with_capacity(mins.len() * params.m_len);
    for mmer in mins {
        residues.extend_from_slice(&mmer);
    }
    Ok(SequenceRecord {
        id: seq.id.clone(),
        residues,
        label: seq.label.clone(),
    })
}

/// A position with its information gain, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionScore {
    pub position: usize,
    pub ig: f64,
}

fn entropy_from_counts<'a>(counts: impl Iterator<Item = &'a usize>, total: usize) -> f64 {
    let total = total as f64;
    counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

fn check_aligned_labeled(dataset: &[SequenceRecord]) -> Result<usize> {
    let len = dataset
        .first()
        .map(|r| r.len())
        .ok_or_else(|| Error::InvalidParam("empty dataset".into()))?;
    for rec in dataset {
        if rec.label.is_none() {
            return Err(Error::InvalidParam(format!(
                "record '{}' has no label",
                rec.id
            )));
        }
        if rec.len() != len {
            return Err(Error::InvalidParam(format!(
                "ragged lengths: record '{}' has length {}, expected {}",
                rec.id,
                rec.len(),
                len
            )));
        }
    }
    Ok(len)
}

/// IG(Class, position) = H(Class) − H(Class | symbol at position), log base 2.
pub fn information_gain(dataset: &[SequenceRecord], position: usize) -> Result<f64> {
    let len = check_aligned_labeled(dataset)?;
    if position >= len {
        return Err(Error::InvalidParam(format!(
            "position {position} out of range for aligned length {len}"
        )));
    }
    Ok(information_gain_all(dataset)?[position].ig)
}

/// IG for every position, one pass over the dataset.
pub fn information_gain_all(dataset: &[SequenceRecord]) -> Result<Vec<PositionScore>> {
    let len = check_aligned_labeled(dataset)?;
    let n = dataset.len();

    let mut class_ids: HashMap<&str, usize> = HashMap::new();
    let mut class_of: Vec<usize> = Vec::with_capacity(n);
    for rec in dataset {
        let label = rec.label.as_deref().expect("checked above");
        let next = class_ids.len();
        let id = *class_ids.entry(label).or_insert(next);
        class_of.push(id);
    }
    let n_classes = class_ids.len();

    let mut class_counts = vec![0usize; n_classes];
    for &c in &class_of {
        class_counts[c] += 1;
    }
    let h_class = entropy_from_counts(class_counts.iter(), n);

    let mut scores = Vec::with_capacity(len);
    for pos in 0..len {
        // per-symbol class histograms at this position
        let mut by_symbol: HashMap<u8, Vec<usize>> = HashMap::new();
        for (rec, &class) in dataset.iter().zip(class_of.iter()) {
            by_symbol
                .entry(rec.residues[pos])
                .or_insert_with(|| vec![0usize; n_classes])[class] += 1;
        }
        let mut h_cond = 0.0;
        for counts in by_symbol.values() {
            let group: usize = counts.iter().sum();
            let p_v = group as f64 / n as f64;
            h_cond += p_v * entropy_from_counts(counts.iter(), group);
        }
        let ig = h_class - h_cond;
        debug_assert!(ig >= -1e-12, "negative IG {ig} at position {pos}");
        scores.push(PositionScore {
            position: pos,
            ig: ig.max(0.0),
        });
    }
    Ok(scores)
}

/// Ranks positions by IG descending (ties: ascending index), keeps the top
/// `top_t`, and reduces every sequence to those positions in original
/// left-to-right order. Returns the kept scores in rank order.
pub fn select_top_positions(
    dataset: &[SequenceRecord],
    top_t: usize,
) -> Result<(Vec<PositionScore>, Vec<SequenceRecord>)> {
    let len = check_aligned_labeled(dataset)?;
    if top_t < 1 || top_t > len {
        return Err(Error::InvalidParam(format!(
            "top_t must satisfy 1 <= top_t <= {len}, got {top_t}"
        )));
    }
    let mut scores = information_gain_all(dataset)?;
    scores.sort_by(|a, b| {
        b.ig.partial_cmp(&a.ig)
            .expect("IG values are finite")
            .then(a.position.cmp(&b.position))
    });
    let ranked: Vec<PositionScore> = scores.into_iter().take(top_t).collect();

    let mut keep: Vec<usize> = ranked.iter().map(|s| s.position).collect();
    keep.sort_unstable();

    let reduced = dataset
        .iter()
        .map(|rec| SequenceRecord {
            id: rec.id.clone(),
            residues: keep.iter().map(|&p| rec.residues[p]).collect(),
            label: rec.label.clone(),
        })
        .collect();
    Ok((ranked, reduced))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineVariant {
    Plain,
    Omk,
    Igk,
    OmkIg,
}

impl PipelineVariant {
    /// Validation-set defaults for the position budget: 243 on raw aligned
    /// sequences, 2184 after minimizer expansion.
    pub fn default_top_t(&self) -> Option<usize> {
        match self {
            PipelineVariant::Igk => Some(243),
            PipelineVariant::OmkIg => Some(2184),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineParams {
    pub minimizer: MinimizerParams,
    /// Overrides the variant default when set.
    pub top_t: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub records: Vec<SequenceRecord>,
    /// Rank-ordered selected positions, for variants that select.
    pub selected: Option<Vec<PositionScore>>,
}

/// Applies a preprocessing variant to the whole dataset.
pub fn pipeline(
    dataset: &[SequenceRecord],
    variant: PipelineVariant,
    params: &PipelineParams,
) -> Result<PipelineOutput> {
    if dataset.is_empty() {
        return Err(Error::InvalidParam("empty dataset".into()));
    }
    let top_t = params.top_t.or(variant.default_top_t());
    match variant {
        PipelineVariant::Plain => Ok(PipelineOutput {
            records: dataset.to_vec(),
            selected: None,
        }),
        PipelineVariant::Omk => {
            let records = dataset
                .iter()
                .map(|rec| ordered_minimizer_sequence(rec, &params.minimizer))
                .collect::<Result<Vec<_>>>()?;
            Ok(PipelineOutput {
                records,
                selected: None,
            })
        }
        PipelineVariant::Igk => {
            let top_t = top_t.expect("IGK has a default top_t");
            let (selected, records) = select_top_positions(dataset, top_t)?;
            Ok(PipelineOutput {
                records,
                selected: Some(selected),
            })
        }
        PipelineVariant::OmkIg => {
            let top_t = top_t.expect("OMK+IG has a default top_t");
            let expanded = dataset
                .iter()
                .map(|rec| ordered_minimizer_sequence(rec, &params.minimizer))
                .collect::<Result<Vec<_>>>()?;
            let (selected, records) = select_top_positions(&expanded, top_t)?;
            Ok(PipelineOutput {
                records,
                selected: Some(selected),
            })
        }
    }
}
