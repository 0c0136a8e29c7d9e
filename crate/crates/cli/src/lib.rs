//! Subcommands of the `treeshift` binary.
//!
//! Every command reads a model file (see [`treeshift::model_file`]), writes
//! its data to stdout or to `--out`, and embeds a [`RunManifest`] in every
//! artifact. CSV files get the manifest as a `<file>.manifest.json` sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use treeshift::alphabet_graph::{
    find_a0_and_period, is_irreducible, linear_spectral_radius, reachability, reduce_a0_indices,
};
use treeshift::dimension::{dimension_auto, optimal_markov_measure, DimensionProblem};
use treeshift::optimize::compositions;
use treeshift::oracle::{
    enumerate_blocks, enumerate_type_classes, exact_mean_distribution, recursive_block_counts,
    DEFAULT_CLASS_LIMIT, DEFAULT_ENUMERATION_LIMIT,
};
use treeshift::rate_function::{beta_bounds, class_stationary, lln_phases, rate_curve, GridSpec};
use treeshift::stochastic::{lln_experiment, tail_estimate, DEFAULT_MAX_NODES};
use treeshift::transfer_op::entropy_iterate;
use treeshift::{
    AdjacencyModel, EigenOptions, ErrorKind, ModelFile, RateOptions, RootSpec, SampleConfig, SearchOptions,
    SimplexPoint, WeightMatrix, WeightedChainModel,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error(transparent)]
    Core(#[from] treeshift::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 parse, 3 validation, 4 numeric, 5 resource guard, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Usage(_) => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 3,
                ErrorKind::Numeric => 4,
                ErrorKind::Resource => 5,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "treeshift", version, about = "Markov chains and tree-shifts on rooted d-trees")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Leave wall time out of manifests, for byte-stable output.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Period, classes, irreducibility and reachability of the adjacency matrix.
    Analyze(ModelArg),
    /// Hausdorff dimension (or the general upper bound for reducible models).
    Dimension(DimensionArgs),
    /// Rate function curve of the tree sample mean for one class.
    Rate(RateArgs),
    /// LLN limits per phase and the unconditional bounds.
    Lln(LlnArgs),
    /// Monte-Carlo LLN experiment, optionally with tail frequencies.
    Simulate(SimulateArgs),
    /// Exact block counts, type classes and the law of the sample mean.
    Oracle(OracleArgs),
    /// Topological entropy from the block-count recursion.
    Entropy(EntropyArgs),
    /// Markov measure attaining the dimension, with its validation value.
    Measure(MeasureArgs),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model JSON file.
    pub model: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    /// Relative tolerance of the nonlinear eigenvalue iteration.
    #[arg(long, default_value_t = 1e-11)]
    pub eigen_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub eigen_max_iter: usize,
}

impl EigenArgs {
    fn options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.eigen_tol,
            max_iter: self.eigen_max_iter,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    /// Simplex grid denominator (chosen from the period if unset).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Interior offset of the grid points, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub grid_phase: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_grid_points: usize,
    /// Grid points refined by Nelder–Mead.
    #[arg(long, default_value_t = 3)]
    pub starts: usize,
    /// Restart Nelder–Mead until a restart gains less than this.
    #[arg(long, default_value_t = 1e-10)]
    pub improvement_tol: f64,
    /// Depth of the block-count recursion used for h_top.
    #[arg(long, default_value_t = 40)]
    pub entropy_depth: usize,
    #[command(flatten)]
    pub eigen: EigenArgs,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            grid_resolution: self.grid,
            grid_phase: self.grid_phase,
            max_grid_points: self.max_grid_points,
            starts: self.starts,
            improvement_tol: self.improvement_tol,
            eigen: self.eigen.options(),
            entropy_depth: self.entropy_depth,
            ..SearchOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    pub model: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Also write the class-0 objective over the simplex grid to this CSV.
    #[arg(long)]
    pub scan: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RateTolArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub pressure_tol: f64,
    /// Relative tolerance of each golden-section search in μ.
    #[arg(long, default_value_t = 1e-10)]
    pub xtol: f64,
    /// Starting |μ| for the domain endpoint slopes.
    #[arg(long, default_value_t = 1e3)]
    pub mu_big: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub endpoint_tol: f64,
}

impl RateTolArgs {
    fn options(&self) -> RateOptions {
        RateOptions {
            pressure_tol: self.pressure_tol,
            xtol: self.xtol,
            mu_big: self.mu_big,
            endpoint_tol: self.endpoint_tol,
            ..RateOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct RateArgs {
    pub model: PathBuf,
    /// Class of the deepest level.
    #[arg(long, default_value_t = 0)]
    pub class: usize,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Extension beyond the finiteness domain (5% of its width if unset).
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[command(flatten)]
    pub tol: RateTolArgs,
    /// CSV destination; the curve goes to stdout if unset.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LlnArgs {
    pub model: PathBuf,
    /// Initial law for the unconditional bounds, comma separated (stationary if unset).
    #[arg(long, value_delimiter = ',')]
    pub init: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Root symbol, by name or index (the distinguished symbol if unset).
    #[arg(long)]
    pub root: Option<String>,
    /// Also estimate P(lo ≤ mean ≤ hi) at every depth.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    pub tail: Option<Vec<f64>>,
    /// Per-trial CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Root symbol for type classes (the distinguished symbol if unset).
    #[arg(long)]
    pub root: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    pub enumeration_limit: f64,
    #[arg(long, default_value_t = DEFAULT_CLASS_LIMIT)]
    pub class_limit: usize,
    /// Include every type class in the output.
    #[arg(long)]
    pub classes: bool,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub model: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Allowed gap between the validation value and the dimension.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
}

/// Provenance attached to every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: String,
    pub input_sha256: String,
    pub config: Value,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

struct Loaded {
    file: ModelFile,
    path: String,
    sha256: String,
}

fn load(path: &Path) -> CliResult<Loaded> {
    let bytes = fs::read(path)?;
    let file: ModelFile = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    Ok(Loaded {
        file,
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn require_chain(m: &Loaded) -> CliResult<WeightedChainModel> {
    m.file
        .chain()?
        .ok_or_else(|| CliError::Usage(format!("{} has no transition matrix M", m.path)))
}

/// The weighted chain, or the uniform-children chain observed through `W = 1/M`.
fn chain_or_uniform(m: &Loaded, base: &AdjacencyModel) -> CliResult<WeightedChainModel> {
    if let Some(c) = m.file.chain()? {
        return Ok(c);
    }
    let n = base.size();
    let mut mm = vec![vec![0.0; n]; n];
    let mut exact = vec![vec![BigRational::zero(); n]; n];
    for b in 0..n {
        let k = base.column_sum(b);
        for a in base.children(b) {
            mm[a][b] = 1.0 / k as f64;
            exact[a][b] = BigRational::new(1.into(), k.into());
        }
    }
    let w: Vec<Vec<f64>> = mm
        .iter()
        .map(|r| r.iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect())
        .collect();
    Ok(WeightedChainModel::new(base.clone(), &mm, &w)?.with_exact_m(exact)?)
}

fn symbol(model: &AdjacencyModel, name: &str) -> CliResult<usize> {
    model
        .symbol_index(name)
        .or_else(|| name.parse().ok().filter(|&i: &usize| i < model.size()))
        .ok_or_else(|| CliError::Usage(format!("unknown symbol {name:?}")))
}

struct Session {
    command: &'static str,
    start: Instant,
    timing: bool,
}

impl Session {
    fn manifest(&self, m: &Loaded, config: Value) -> RunManifest {
        RunManifest {
            command: self.command.into(),
            input: m.path.clone(),
            input_sha256: m.sha256.clone(),
            config,
            version: VERSION.into(),
            wall_time_secs: self.timing.then(|| self.start.elapsed().as_secs_f64()),
        }
    }
}

fn emit(out: &mut dyn Write, manifest: &RunManifest, result: impl Serialize) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, &json!({ "manifest": manifest, "result": result }))?;
    writeln!(out)?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_sidecar(path: &Path, manifest: &RunManifest) -> CliResult<()> {
    fs::write(sidecar(path), serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}

/// CSV number with the `inf` sentinel for infinities.
fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

/// Runs `cli` on a worker pool of the requested size.
pub fn run(cli: Cli, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let timing = !cli.no_timing;
    pool.install(|| dispatch(cli.command, timing, out))
}

fn dispatch(command: Command, timing: bool, out: &mut dyn Write) -> CliResult<()> {
    let session = |command| Session {
        command,
        start: Instant::now(),
        timing,
    };
    match command {
        Command::Analyze(a) => cmd_analyze(&a, &session("analyze"), out),
        Command::Dimension(a) => cmd_dimension(&a, &session("dimension"), out),
        Command::Rate(a) => cmd_rate(&a, &session("rate"), out),
        Command::Lln(a) => cmd_lln(&a, &session("lln"), out),
        Command::Simulate(a) => cmd_simulate(&a, &session("simulate"), out),
        Command::Oracle(a) => cmd_oracle(&a, &session("oracle"), out),
        Command::Entropy(a) => cmd_entropy(&a, &session("entropy"), out),
        Command::Measure(a) => cmd_measure(&a, &session("measure"), out),
    }
}

fn cmd_analyze(args: &ModelArg, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let model = m.file.adjacency_model()?;
    let reduced = reduce_a0_indices(&model);
    let reach = reachability(&model);
    let (a1, period, a1_error) = match find_a0_and_period(&model) {
        Ok(p) => (true, Some(p), None),
        Err(e) => (false, None, Some(e.to_string())),
    };
    let reduced_json = match &reduced {
        Ok(keep) => {
            let sub = model.submodel(keep);
            json!({ "kept": keep, "symbols": sub.symbols(), "adjacency": sub.rows() })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    let result = json!({
        "symbols": model.symbols(),
        "arity": model.arity(),
        "a0_holds": model.satisfies_a0(),
        "a0_reduced": reduced_json,
        "a1_holds": a1,
        "a1_error": a1_error,
        "period": period,
        "irreducible": is_irreducible(&model),
        "constant_column_sums": model.has_constant_column_sums(),
        "reachability": reach,
    });
    emit(out, &s.manifest(&m, json!({})), result)
}

fn cmd_dimension(args: &DimensionArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let model = m.file.adjacency_model()?;
    let opts = args.search.options();
    let report = dimension_auto(&model, &opts)?;
    let config = json!({ "search": &args.search, "scan": args.scan });
    let manifest = s.manifest(&m, config);
    if let Some(path) = &args.scan {
        write_scan(&model, &opts, path)?;
        write_sidecar(path, &manifest)?;
    }
    emit(out, &manifest, &report)
}

/// Class-0 objective over the search grid, one row per grid point.
fn write_scan(model: &AdjacencyModel, opts: &SearchOptions, path: &Path) -> CliResult<()> {
    let period = find_a0_and_period(model)?;
    let p = period.period;
    let problem = DimensionProblem::new(model, period, opts.eigen, opts.rotation);
    let n = opts.grid_resolution.unwrap_or(if p <= 3 { 50 } else { 12 });
    let denom = n as f64 + p as f64 * opts.grid_phase;
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..p).map(|i| format!("s{i}")).collect();
    header.push("objective".into());
    w.write_record(&header)?;
    for k in compositions(n, p) {
        let pt: Vec<f64> = k.iter().map(|&ki| (ki as f64 + opts.grid_phase) / denom).collect();
        let v = problem.objective(&SimplexPoint(pt.clone()), 0).unwrap_or(f64::NAN);
        let mut row: Vec<String> = pt.into_iter().map(csv_float).collect();
        row.push(csv_float(v));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_rate(args: &RateArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let chain = require_chain(&m)?;
    let grid = GridSpec {
        points: args.points,
        margin: args.margin,
        lo: args.lo,
        hi: args.hi,
    };
    let curve = rate_curve(&chain, args.class, &grid, &args.tol.options())?;
    let config = json!({
        "class": args.class, "points": args.points, "margin": args.margin,
        "lo": args.lo, "hi": args.hi, "tolerances": &args.tol,
    });
    let manifest = s.manifest(&m, config);
    let summary = json!({
        "class_index": curve.class_index,
        "alpha1": curve.alpha1,
        "alpha2": curve.alpha2,
        "alpha_star": curve.alpha_star,
        "points": curve.points.len(),
    });
    match &args.out {
        Some(path) => {
            write_curve(csv::Writer::from_path(path)?, &curve.points)?;
            write_sidecar(path, &manifest)?;
            emit(out, &manifest, summary)
        }
        None => write_curve(csv::Writer::from_writer(out), &curve.points),
    }
}

fn write_curve<W: Write>(mut w: csv::Writer<W>, points: &[treeshift::rate_function::RatePoint]) -> CliResult<()> {
    w.write_record(["alpha", "rate", "argmax_mu", "finite"])?;
    for p in points {
        w.write_record([
            csv_float(p.alpha),
            csv_float(p.rate),
            csv_float(p.argmax_mu),
            p.finite.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_lln(args: &LlnArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let chain = require_chain(&m)?;
    let result = json!({
        "period": chain.period(),
        "phases": lln_phases(&chain)?,
        "class_stationary": class_stationary(&chain)?,
        "beta": beta_bounds(&chain, args.init.as_deref())?,
    });
    emit(out, &s.manifest(&m, json!({ "init": args.init })), result)
}

fn cmd_simulate(args: &SimulateArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let chain = require_chain(&m)?;
    let root = match &args.root {
        Some(r) => symbol(chain.base(), r)?,
        None => chain.period().a0,
    };
    let config = SampleConfig::new(args.depth, args.trials, args.seed, RootSpec::Fixed(root));
    let report = lln_experiment(&chain, &config)?;
    let tail = match &args.tail {
        Some(t) => Some(tail_estimate(&chain, &config, t[0], t[1])?),
        None => None,
    };
    let manifest = s.manifest(
        &m,
        json!({
            "depth": args.depth, "trials": args.trials, "seed": args.seed, "root": root,
            "tail": args.tail, "max_nodes": DEFAULT_MAX_NODES,
        }),
    );
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["trial", "mean"])?;
        for (t, x) in report.per_trial_means.iter().enumerate() {
            w.write_record([t.to_string(), csv_float(*x)])?;
        }
        w.flush()?;
        write_sidecar(path, &manifest)?;
    }
    emit(out, &manifest, json!({ "experiment": report, "tail": tail }))
}

fn cmd_oracle(args: &OracleArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let model = m.file.adjacency_model()?;
    let blocks = enumerate_blocks(&model, args.n, None, false, args.enumeration_limit)?;
    let recursion: Vec<String> = recursive_block_counts(&model, args.n)[args.n]
        .iter()
        .map(|c| c.to_string())
        .collect();
    let chain = chain_or_uniform(&m, &model)?;
    let root = match &args.root {
        Some(r) => symbol(&model, r)?,
        None => chain.period().a0,
    };
    let classes = enumerate_type_classes(&chain, args.n, root, args.class_limit)?;
    let total: f64 = classes.iter().map(|c| c.log_probability.exp()).sum();
    let exact_total = classes
        .iter()
        .map(|c| c.probability.clone())
        .sum::<Option<BigRational>>()
        .map(|r| r.to_string());
    let dist = exact_mean_distribution(&chain, args.n, root, args.class_limit)?;
    let result = json!({
        "depth": args.n,
        "root": root,
        "enumerated_counts": blocks.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "recursion_counts": recursion,
        "counts_agree": blocks.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>() == recursion,
        "type_class_count": classes.len(),
        "probability_sum": total,
        "exact_probability_sum": exact_total,
        "type_classes": args.classes.then_some(&classes),
        "mean_distribution": dist,
    });
    let config = json!({
        "n": args.n, "root": root, "enumeration_limit": args.enumeration_limit,
        "class_limit": args.class_limit, "uniform_default": m.file.m.is_none(),
    });
    emit(out, &s.manifest(&m, config), result)
}

fn cmd_entropy(args: &EntropyArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let model = m.file.adjacency_model()?;
    let series = entropy_iterate(&model, args.depth);
    let log_rho = linear_spectral_radius(&WeightMatrix::from_adjacency(&model)).ok();
    emit(
        out,
        &s.manifest(&m, json!({ "depth": args.depth })),
        json!({ "series": series, "log_rho": log_rho }),
    )
}

fn cmd_measure(args: &MeasureArgs, s: &Session, out: &mut dyn Write) -> CliResult<()> {
    let m = load(&args.model)?;
    let model = m.file.adjacency_model()?;
    let opts = args.search.options();
    let report = dimension_auto(&model, &opts)?;
    let measure = optimal_markov_measure(&model, &report, &opts.eigen, args.tol)?;
    emit(
        out,
        &s.manifest(&m, json!({ "search": &args.search, "tol": args.tol })),
        json!({ "measure": measure, "dimension": report }),
    )
}
