//! Exact and sampling-approximated k,m-mismatch string kernels.
//!
//! The kernel value of two sequences is the inner product of their
//! mismatch spectra: the number of k-mer occurrence pairs weighted by the
//! size of the intersection of their m-mismatch neighborhoods. Evaluation
//! splits into two parts:
//!
//! - [`intersect`]: closed-form intersection sizes I_d, tabulated once per
//!   (k, m, alphabet) in exact integer arithmetic;
//! - [`exact`] / [`approx`]: the per-pair distance counts M_i, either by
//!   full enumeration of index subsets or by seeded sampling with an
//!   unbiasedness guarantee.
//!
//! [`gram`] assembles the N×N kernel matrix (one shared sampling plan per
//! matrix), verifies positive semidefiniteness, and extracts kernel-PCA
//! embeddings. [`preprocess`] holds the minimizer and information-gain
//! pipelines that shrink sequences before kernel computation.

pub mod approx;
pub mod error;
pub mod exact;
pub mod gram;
pub mod intersect;
pub mod preprocess;
pub mod seq;

pub use approx::{
    adaptive_profile, approx_kernel_value, approx_profile, pair_seed, SampledThetaPlan,
    SamplingConfig, SamplingMode,
};
pub use error::{Error, ErrorCategory, Result};
pub use exact::{
    brute_force_kernel, brute_force_profile, exact_kernel_value, exact_profile, f_theta,
    IndexSubset, MismatchProfile, SortBackend,
};
pub use gram::{
    center_gram, compute_gram, kernel_pca, min_eigenvalue, Embedding, GramMatrix, GramMeta,
    GramMethod,
};
pub use intersect::{brute_force_intersection, n_qr, IntersectionTable};
pub use preprocess::{
    canonical_mmer, information_gain, minimizers, ordered_minimizer_sequence, pipeline,
    select_top_positions, MinimizerParams, PipelineParams, PipelineVariant, PositionScore,
};
pub use seq::{extract_kmers, load_fasta, load_labels, Alphabet, KmerSet, SequenceRecord};
