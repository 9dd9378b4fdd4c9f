//! Python bindings for the mismatch-kernel library: kernel values and
//! profiles, Gram assembly, kernel PCA, and the preprocessing pipelines.
//! Sequences cross the boundary as strings; matrices as nested lists.

use num_bigint::BigUint;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use seqkernel::exact::exact_kernel_int;
use seqkernel::gram::{compute_gram, GramMethod};
use seqkernel::preprocess::{
    information_gain_all, ordered_minimizer_sequence, select_top_positions as select_top,
    MinimizerParams,
};
use seqkernel::seq::extract_kmers;
use seqkernel::{
    Alphabet, Error, GramMatrix, GramMeta, IntersectionTable, SampledThetaPlan, SamplingConfig,
    SamplingMode, SequenceRecord,
};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_alphabet(spec: &str) -> PyResult<Alphabet> {
    Alphabet::from_spec(spec).map_err(to_py_err)
}

fn encode(alphabet: &Alphabet, id: &str, text: &str) -> PyResult<SequenceRecord> {
    SequenceRecord::encode(id, text, alphabet).map_err(to_py_err)
}

fn sampling_config(
    seed: u64,
    cap_b: u64,
    epsilon: f64,
    delta: f64,
    adaptive: bool,
) -> SamplingConfig {
    SamplingConfig {
        epsilon,
        delta,
        cap: cap_b,
        mode: if adaptive {
            SamplingMode::Adaptive
        } else {
            SamplingMode::Fixed
        },
        seed,
    }
}

/// I_0..I_t for (k, m, alphabet size s): the number of k-mers within
/// distance m of both members of a pair at Hamming distance d.
#[pyfunction]
#[pyo3(signature = (k, m, s))]
fn intersection_table(k: usize, m: usize, s: usize) -> PyResult<Vec<BigUint>> {
    let table = IntersectionTable::build(k, m, s).map_err(to_py_err)?;
    Ok(table.values().to_vec())
}

/// Exact k,m-mismatch kernel value of two sequences.
#[pyfunction]
#[pyo3(signature = (x, y, k=3, m=0, alphabet="dna"))]
fn exact_kernel(x: &str, y: &str, k: usize, m: usize, alphabet: &str) -> PyResult<f64> {
    let ab = parse_alphabet(alphabet)?;
    let rx = encode(&ab, "x", x)?;
    let ry = encode(&ab, "y", y)?;
    let table = IntersectionTable::build(k, m, ab.size()).map_err(to_py_err)?;
    seqkernel::exact_kernel_value(&rx, &ry, k, m, &table).map_err(to_py_err)
}

/// Exact kernel value as an arbitrary-precision integer.
#[pyfunction]
#[pyo3(signature = (x, y, k=3, m=0, alphabet="dna"))]
fn exact_kernel_exact(x: &str, y: &str, k: usize, m: usize, alphabet: &str) -> PyResult<BigUint> {
    let ab = parse_alphabet(alphabet)?;
    let rx = encode(&ab, "x", x)?;
    let ry = encode(&ab, "y", y)?;
    let table = IntersectionTable::build(k, m, ab.size()).map_err(to_py_err)?;
    exact_kernel_int(&rx, &ry, k, m, &table).map_err(to_py_err)
}

/// (F, M) distance profile of a pair: agreement counts and per-distance
/// pair counts for i = 0..min(2m, k).
#[pyfunction]
#[pyo3(signature = (x, y, k=3, m=0, alphabet="dna"))]
fn exact_profile(
    x: &str,
    y: &str,
    k: usize,
    m: usize,
    alphabet: &str,
) -> PyResult<(Vec<u64>, Vec<u64>)> {
    let ab = parse_alphabet(alphabet)?;
    let sx = extract_kmers(&encode(&ab, "x", x)?, k);
    let sy = extract_kmers(&encode(&ab, "y", y)?, k);
    let p = seqkernel::exact_profile(&sx, &sy, m).map_err(to_py_err)?;
    Ok((p.f, p.m))
}

/// Sampling-based kernel estimate (fixed plan, without-replacement draws).
/// With cap_b covering every C(k, k-i) the estimate is exact.
#[pyfunction]
#[pyo3(signature = (x, y, k=3, m=0, alphabet="dna", seed=0, cap_b=300, epsilon=0.5, delta=0.25))]
#[allow(clippy::too_many_arguments)]
fn approx_kernel(
    x: &str,
    y: &str,
    k: usize,
    m: usize,
    alphabet: &str,
    seed: u64,
    cap_b: u64,
    epsilon: f64,
    delta: f64,
) -> PyResult<f64> {
    let ab = parse_alphabet(alphabet)?;
    let sx = extract_kmers(&encode(&ab, "x", x)?, k);
    let sy = extract_kmers(&encode(&ab, "y", y)?, k);
    let table = IntersectionTable::build(k, m, ab.size()).map_err(to_py_err)?;
    let config = sampling_config(seed, cap_b, epsilon, delta, false);
    let plan = SampledThetaPlan::build(k, m, &config).map_err(to_py_err)?;
    seqkernel::approx_kernel_value(&sx, &sy, &table, &plan).map_err(to_py_err)
}

/// Full Gram matrix over (id, sequence) pairs. Returns (ids, matrix).
#[pyfunction]
#[pyo3(signature = (sequences, k=3, m=0, alphabet="dna", method="exact", seed=0, cap_b=300,
                    epsilon=0.5, delta=0.25, adaptive=false))]
#[allow(clippy::too_many_arguments)]
fn gram_matrix(
    sequences: Vec<(String, String)>,
    k: usize,
    m: usize,
    alphabet: &str,
    method: &str,
    seed: u64,
    cap_b: u64,
    epsilon: f64,
    delta: f64,
    adaptive: bool,
) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    let ab = parse_alphabet(alphabet)?;
    let dataset: Vec<SequenceRecord> = sequences
        .iter()
        .map(|(id, text)| encode(&ab, id, text))
        .collect::<PyResult<_>>()?;
    let method = match method {
        "exact" => GramMethod::Exact,
        "approx" => GramMethod::Approx,
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    let config = sampling_config(seed, cap_b, epsilon, delta, adaptive);
    let gram = compute_gram(&dataset, &ab, k, m, method, &config).map_err(to_py_err)?;
    Ok((gram.ids, gram.values))
}

fn gram_from_values(ids: Option<Vec<String>>, matrix: Vec<Vec<f64>>) -> PyResult<GramMatrix> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let ids = match ids {
        Some(ids) if ids.len() == n => ids,
        Some(ids) => {
            return Err(PyValueError::new_err(format!(
                "got {} ids for a {n}x{n} matrix",
                ids.len()
            )))
        }
        None => (0..n).map(|i| i.to_string()).collect(),
    };
    Ok(GramMatrix {
        ids,
        values: matrix,
        meta: GramMeta::exact(1, 0, &Alphabet::dna()),
    })
}

/// Kernel-PCA embedding of a symmetric kernel matrix: centers, keeps the
/// top-c eigenpairs, returns (rows, eigenvalues).
#[pyfunction]
#[pyo3(signature = (matrix, components, ids=None))]
fn kernel_pca(
    matrix: Vec<Vec<f64>>,
    components: usize,
    ids: Option<Vec<String>>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let gram = gram_from_values(ids, matrix)?;
    let emb = seqkernel::kernel_pca(&gram, components).map_err(to_py_err)?;
    Ok((emb.vectors, emb.eigenvalues))
}

/// Smallest eigenvalue of a symmetric matrix (PSD check).
#[pyfunction]
fn min_eigenvalue(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    let gram = gram_from_values(None, matrix)?;
    seqkernel::min_eigenvalue(&gram).map_err(to_py_err)
}

/// Ordered-minimizer compression: concatenates each k-mer window's
/// smallest canonical m-mer.
#[pyfunction]
#[pyo3(signature = (sequence, k=9, m_len=3, alphabet="protein"))]
fn minimizer_sequence(sequence: &str, k: usize, m_len: usize, alphabet: &str) -> PyResult<String> {
    let ab = parse_alphabet(alphabet)?;
    let rec = encode(&ab, "s", sequence)?;
    let out = ordered_minimizer_sequence(&rec, &MinimizerParams { k, m_len }).map_err(to_py_err)?;
    Ok(ab.decode(&out.residues))
}

fn labeled_dataset(
    sequences: Vec<(String, String)>,
    labels: Vec<String>,
    alphabet: &Alphabet,
) -> PyResult<Vec<SequenceRecord>> {
    if sequences.len() != labels.len() {
        return Err(PyValueError::new_err(format!(
            "{} sequences but {} labels",
            sequences.len(),
            labels.len()
        )));
    }
    sequences
        .iter()
        .zip(labels)
        .map(|((id, text), label)| {
            let mut rec = encode(alphabet, id, text)?;
            rec.label = Some(label);
            Ok(rec)
        })
        .collect()
}

/// Per-position information gain (bits) of aligned labeled sequences.
#[pyfunction]
#[pyo3(signature = (sequences, labels, alphabet="protein"))]
fn information_gain(
    sequences: Vec<(String, String)>,
    labels: Vec<String>,
    alphabet: &str,
) -> PyResult<Vec<f64>> {
    let ab = parse_alphabet(alphabet)?;
    let dataset = labeled_dataset(sequences, labels, &ab)?;
    let scores = information_gain_all(&dataset).map_err(to_py_err)?;
    Ok(scores.into_iter().map(|s| s.ig).collect())
}

/// Keeps the top_t highest-IG positions (rank order returned) and reduces
/// each sequence to them in original position order.
#[pyfunction]
#[pyo3(signature = (sequences, labels, top_t, alphabet="protein"))]
#[allow(clippy::type_complexity)]
fn select_top_positions(
    sequences: Vec<(String, String)>,
    labels: Vec<String>,
    top_t: usize,
    alphabet: &str,
) -> PyResult<(Vec<usize>, Vec<(String, String)>)> {
    let ab = parse_alphabet(alphabet)?;
    let dataset = labeled_dataset(sequences, labels, &ab)?;
    let (ranked, reduced) = select_top(&dataset, top_t).map_err(to_py_err)?;
    let positions = ranked.into_iter().map(|s| s.position).collect();
    let out = reduced
        .into_iter()
        .map(|rec| {
            let text = ab.decode(&rec.residues);
            (rec.id, text)
        })
        .collect();
    Ok((positions, out))
}

#[pymodule]
fn seqkernel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(intersection_table, m)?)?;
    m.add_function(wrap_pyfunction!(exact_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(exact_kernel_exact, m)?)?;
    m.add_function(wrap_pyfunction!(exact_profile, m)?)?;
    m.add_function(wrap_pyfunction!(approx_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(gram_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_pca, m)?)?;
    m.add_function(wrap_pyfunction!(min_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(minimizer_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(information_gain, m)?)?;
    m.add_function(wrap_pyfunction!(select_top_positions, m)?)?;
    Ok(())
}
