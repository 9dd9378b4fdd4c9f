//! Command-line surface: kernel computation, preprocessing, kernel PCA,
//! and the built-in selftest. Data goes to files, logs to stderr; every
//! output gets a JSON sidecar with enough metadata to reproduce it.

mod selftest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use seqkernel::gram::{
    compute_gram_with, kernel_pca, read_gram, write_embedding, write_gram, write_gram_sidecar,
    GramMethod,
};
use seqkernel::preprocess::{pipeline, MinimizerParams, PipelineParams, PipelineVariant};
use seqkernel::seq::{apply_labels, load_fasta, load_labels, write_fasta, Alphabet};
use seqkernel::{Error, ErrorCategory, SamplingConfig, SamplingMode, SortBackend};

const EXIT_IO: i32 = 2;
const EXIT_VALIDATION: i32 = 3;
const EXIT_NUMERIC: i32 = 4;

#[derive(Parser)]
#[command(
    name = "seqkernel",
    version,
    about = "Mismatch string kernels: Gram matrices, embeddings, and sequence preprocessing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a kernel (Gram) matrix from a FASTA file
    Kernel(KernelArgs),
    /// Apply minimizer / information-gain preprocessing to a FASTA file
    Preprocess(PreprocessArgs),
    /// Kernel-PCA embedding from a stored Gram matrix
    Pca(PcaArgs),
    /// Run the built-in oracle-equivalence checks
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    Omk,
    Igk,
    OmkIg,
}

#[derive(Args)]
struct KernelArgs {
    /// Input FASTA file
    #[arg(long = "in")]
    input: PathBuf,
    /// Output Gram matrix file (JSON sidecar written next to it)
    #[arg(long = "out")]
    output: PathBuf,
    /// Alphabet preset (dna, protein) or explicit symbols
    #[arg(long, default_value = "dna")]
    alphabet: String,
    /// k-mer length
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Mismatch budget
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// exact or approx
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Sampling regime for --method approx
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    mode: ModeArg,
    /// Additive-approximation epsilon
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Additive-approximation delta
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Per-level sample cap B
    #[arg(long = "cap-b", default_value_t = 300)]
    cap_b: u64,
    /// Seed for all sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for pair computation (0 = rayon default); output is
    /// independent of this
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Use counting sort in the exact sort-enumerate (small alphabets)
    #[arg(long = "counting-sort", default_value_t = false)]
    counting_sort: bool,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input FASTA file
    #[arg(long = "in")]
    input: PathBuf,
    /// Output FASTA file (JSON sidecar written next to it)
    #[arg(long = "out")]
    output: PathBuf,
    /// Alphabet preset (dna, protein) or explicit symbols
    #[arg(long, default_value = "protein")]
    alphabet: String,
    /// plain, omk, igk, or omk-ig
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    variant: VariantArg,
    /// Minimizer window length
    #[arg(long, default_value_t = 9)]
    k: usize,
    /// Minimizer length
    #[arg(long = "mlen", default_value_t = 3)]
    m_len: usize,
    /// Positions to keep for igk / omk-ig (defaults: 243 / 2184)
    #[arg(long = "top")]
    top_t: Option<usize>,
    /// Label CSV ("id,label") required by igk / omk-ig
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct PcaArgs {
    /// Input Gram matrix file
    #[arg(long = "in")]
    input: PathBuf,
    /// Output embedding CSV
    #[arg(long = "out")]
    output: PathBuf,
    /// Principal components to keep (default 50, clamped to N−1)
    #[arg(long)]
    components: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Test hook: run against a deliberately wrong intersection table
    #[arg(long = "corrupt-table", hide = true, default_value_t = false)]
    corrupt_table: bool,
}

#[derive(Serialize)]
struct KernelSidecar<'a> {
    command: String,
    input: String,
    gram: &'a seqkernel::GramMeta,
}

#[derive(Serialize)]
struct PreprocessSidecar {
    command: String,
    input: String,
    alphabet: String,
    variant: PipelineVariant,
    minimizer: MinimizerParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selected: Option<Vec<seqkernel::PositionScore>>,
}

#[derive(Serialize)]
struct PcaSidecar {
    command: String,
    input: String,
    components: usize,
    eigenvalues: Vec<f64>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kernel(args) => cmd_kernel(args),
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Pca(args) => cmd_pca(args),
        Command::Selftest(args) => selftest::run(args.corrupt_table),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        let code = match err.category() {
            ErrorCategory::Io => EXIT_IO,
            ErrorCategory::Validation => EXIT_VALIDATION,
            ErrorCategory::Numeric => EXIT_NUMERIC,
        };
        std::process::exit(code);
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_os_string();
    os.push(".json");
    PathBuf::from(os)
}

fn cmd_kernel(args: KernelArgs) -> Result<(), Error> {
    let alphabet = Alphabet::from_spec(&args.alphabet)?;
    let dataset = load_fasta(&args.input, &alphabet)?;
    let config = SamplingConfig {
        epsilon: args.epsilon,
        delta: args.delta,
        cap: args.cap_b,
        mode: match args.mode {
            ModeArg::Fixed => SamplingMode::Fixed,
            ModeArg::Adaptive => SamplingMode::Adaptive,
        },
        seed: args.seed,
    };
    let method = match args.method {
        MethodArg::Exact => GramMethod::Exact,
        MethodArg::Approx => GramMethod::Approx,
    };
    let backend = if args.counting_sort {
        SortBackend::Counting
    } else {
        SortBackend::Comparison
    };

    let compute = || {
        compute_gram_with(
            &dataset, &alphabet, args.k, args.m, method, &config, backend,
        )
    };
    let gram = if args.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
        pool.install(compute)?
    } else {
        compute()?
    };

    write_gram(&args.output, &gram)?;
    let mut command = format!(
        "seqkernel kernel --in {} --out {} --alphabet {} --k {} --m {} --method {}",
        args.input.display(),
        args.output.display(),
        args.alphabet,
        args.k,
        args.m,
        match method {
            GramMethod::Exact => "exact",
            GramMethod::Approx => "approx",
        },
    );
    if matches!(method, GramMethod::Approx) {
        command.push_str(&format!(
            " --mode {} --epsilon {} --delta {} --cap-b {} --seed {}",
            match config.mode {
                SamplingMode::Fixed => "fixed",
                SamplingMode::Adaptive => "adaptive",
            },
            config.epsilon,
            config.delta,
            config.cap,
            config.seed
        ));
    }
    if args.counting_sort {
        command.push_str(" --counting-sort");
    }
    write_gram_sidecar(
        sidecar_path(&args.output),
        &KernelSidecar {
            command,
            input: args.input.display().to_string(),
            gram: &gram.meta,
        },
    )?;
    eprintln!(
        "wrote {} ({}x{} gram) and sidecar",
        args.output.display(),
        gram.n(),
        gram.n()
    );
    Ok(())
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<(), Error> {
    let alphabet = Alphabet::from_spec(&args.alphabet)?;
    let mut dataset = load_fasta(&args.input, &alphabet)?;

    let variant = match args.variant {
        VariantArg::Plain => PipelineVariant::Plain,
        VariantArg::Omk => PipelineVariant::Omk,
        VariantArg::Igk => PipelineVariant::Igk,
        VariantArg::OmkIg => PipelineVariant::OmkIg,
    };
    let needs_labels = matches!(variant, PipelineVariant::Igk | PipelineVariant::OmkIg);
    match (&args.labels, needs_labels) {
        (Some(path), _) => {
            let labels = load_labels(path)?;
            apply_labels(&mut dataset, &labels)?;
        }
        (None, true) => {
            return Err(Error::InvalidParam(format!(
                "--variant {} requires --labels",
                variant_name(variant)
            )));
        }
        (None, false) => {}
    }

    let params = PipelineParams {
        minimizer: MinimizerParams {
            k: args.k,
            m_len: args.m_len,
        },
        top_t: args.top_t,
    };
    let out = pipeline(&dataset, variant, &params)?;
    write_fasta(&args.output, &out.records, &alphabet)?;

    let mut command = format!(
        "seqkernel preprocess --in {} --out {} --alphabet {} --variant {} --k {} --mlen {}",
        args.input.display(),
        args.output.display(),
        args.alphabet,
        variant_name(variant),
        args.k,
        args.m_len,
    );
    if let Some(top) = args.top_t {
        command.push_str(&format!(" --top {top}"));
    }
    if let Some(labels) = &args.labels {
        command.push_str(&format!(" --labels {}", labels.display()));
    }
    write_gram_sidecar(
        sidecar_path(&args.output),
        &PreprocessSidecar {
            command,
            input: args.input.display().to_string(),
            alphabet: args.alphabet.clone(),
            variant,
            minimizer: params.minimizer,
            top_t: args.top_t.or(variant.default_top_t()),
            labels: args.labels.as_ref().map(|p| p.display().to_string()),
            selected: out.selected,
        },
    )?;
    eprintln!(
        "wrote {} ({} records) and sidecar",
        args.output.display(),
        out.records.len()
    );
    Ok(())
}

fn variant_name(v: PipelineVariant) -> &'static str {
    match v {
        PipelineVariant::Plain => "plain",
        PipelineVariant::Omk => "omk",
        PipelineVariant::Igk => "igk",
        PipelineVariant::OmkIg => "omk-ig",
    }
}

fn cmd_pca(args: PcaArgs) -> Result<(), Error> {
    let gram = read_gram(&args.input)?;
    let n = gram.n();
    let components = match args.components {
        Some(c) => c,
        None => {
            let c = 50.min(n.saturating_sub(1)).max(1);
            if c < 50 {
                eprintln!("warning: clamping components to {c} for N = {n}");
            }
            c
        }
    };
    let emb = kernel_pca(&gram, components)?;
    if components == n {
        // full-rank embeddings should reproduce the centered Gram
        let centered = seqkernel::center_gram(&gram);
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..components)
                    .map(|l| emb.vectors[i][l] * emb.vectors[j][l])
                    .sum();
                err += (dot - centered.values[i][j]).powi(2);
                norm += centered.values[i][j].powi(2);
            }
        }
        let rel = if norm > 0.0 {
            err.sqrt() / norm.sqrt()
        } else {
            err.sqrt()
        };
        eprintln!("full-rank reconstruction: relative Frobenius error {rel:.3e}");
    }
    write_embedding(&args.output, &emb)?;
    write_gram_sidecar(
        sidecar_path(&args.output),
        &PcaSidecar {
            command: format!(
                "seqkernel pca --in {} --out {} --components {components}",
                args.input.display(),
                args.output.display()
            ),
            input: args.input.display().to_string(),
            components,
            eigenvalues: emb.eigenvalues.clone(),
        },
    )?;
    eprintln!(
        "wrote {} ({} components over {} sequences)",
        args.output.display(),
        emb.components,
        n
    );
    Ok(())
}
