use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sbm_pcc::io::{load_graph, read_partition, save_instance, write_graph_text, write_partition};
use sbm_pcc::linops::{dense_threshold_from_env, DENSE_THRESHOLD_ENV};
use sbm_pcc::oracle::brute_force_bisection;
use sbm_pcc::{
    certify, make_params, pcc, sample_instance, CertificateReport, CertifyConfig, CertifyMethod,
    Graph, ParamMode, SbmParams, SignedAdjacency, SolverConfig,
};

use crate::config::{parse_grid, KeyValues};
use crate::sweep::{run_sweep, summarize, write_csv, SweepConfig};

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_SURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sbm-pcc", version, about = "Certified minimum bisection for the stochastic block model")]
pub struct Cli {
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an SBM instance and write it as a graph file.
    Gen(GenArgs),
    /// Solve and certify; exit 0 when certified, 2 when not sure.
    Pcc(PccArgs),
    /// Sweep (alpha, beta) cells and write one CSV row per trial.
    Sweep(SweepArgs),
    /// Brute-force minimum bisection (n <= 24).
    Oracle(OracleArgs),
    /// Certify a given partition; exit 0 when certified, 2 when not sure.
    Certify(CertifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct CertArgs {
    /// auto, dense, cholesky, lanczos or exact.
    #[arg(long)]
    pub method: Option<CertifyMethod>,
    /// Lanczos steps per restart for the certifier.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Slack τ in λ₂ > τ (default 100·u·n·max|Mᵢᵢ|).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    /// Lanczos steps for the spectral candidate.
    #[arg(long)]
    pub solver_iters: Option<usize>,
    #[arg(long)]
    pub refine_passes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path (`.json` selects the JSON form); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PccArgs {
    /// Graph file; when absent an instance is sampled from the model flags.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub cert: CertArgs,
    /// Write the candidate partition here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated alpha values.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Comma-separated beta values.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; every per-trial seed derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub cert: CertArgs,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// File with one line of ±1 labels.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub cert: CertArgs,
}

fn params_from(model: &ModelArgs, kv: &KeyValues) -> Result<SbmParams> {
    let n = kv.or(model.n, "n")?.ok_or_else(|| anyhow!("--n is required"))?;
    let alpha = kv.or(model.alpha, "alpha")?;
    let beta = kv.or(model.beta, "beta")?;
    let p = kv.or(model.p, "p")?;
    let q = kv.or(model.q, "q")?;
    let mode = match (p, q, alpha, beta) {
        (Some(p), Some(q), None, None) => ParamMode::Direct { p, q },
        (None, None, Some(alpha), Some(beta)) => ParamMode::LogScale { alpha, beta },
        _ => bail!("give either --p and --q or --alpha and --beta"),
    };
    Ok(make_params(n, mode)?)
}

fn certify_config(args: &CertArgs, seed: u64, kv: &KeyValues) -> Result<CertifyConfig> {
    let defaults = CertifyConfig::default();
    let dense_threshold = match kv.get::<usize>("dense_threshold")? {
        Some(t) if std::env::var(DENSE_THRESHOLD_ENV).is_err() => t,
        _ => dense_threshold_from_env(),
    };
    let restarts = kv.or(args.restarts, "restarts")?.unwrap_or(defaults.restarts);
    if restarts == 0 {
        bail!("--restarts must be at least 1");
    }
    let psd_tol = kv.or(args.tol, "tol")?;
    if psd_tol.is_some_and(|t| !(t >= 0.0)) {
        bail!("--tol must be nonnegative");
    }
    Ok(CertifyConfig {
        method: kv.or(args.method, "method")?.unwrap_or(defaults.method),
        dense_threshold,
        psd_tol,
        lanczos_iters: kv.or(args.iters, "iters")?.unwrap_or(defaults.lanczos_iters).max(1),
        restarts,
        seed,
        ..defaults
    })
}

fn solver_config(args: &SolverArgs, seed: u64, kv: &KeyValues) -> Result<SolverConfig> {
    let defaults = SolverConfig::default();
    Ok(SolverConfig {
        lanczos_iters: kv
            .or(args.solver_iters, "solver_iters")?
            .unwrap_or(defaults.lanczos_iters)
            .max(1),
        refine_passes: kv
            .or(args.refine_passes, "refine_passes")?
            .unwrap_or(defaults.refine_passes),
        tol: kv.get("solver_tol")?.unwrap_or(defaults.tol),
        seed,
    })
}

fn path_or(flag: &Option<PathBuf>, kv: &KeyValues, key: &str) -> Result<Option<PathBuf>> {
    Ok(flag.clone().or(kv.get::<PathBuf>(key)?))
}

fn load_required_graph(flag: &Option<PathBuf>, kv: &KeyValues) -> Result<sbm_pcc::io::GraphFile> {
    let path = path_or(flag, kv, "graph")?.ok_or_else(|| anyhow!("--graph is required"))?;
    load_graph(&path).with_context(|| format!("loading {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn report_exit(report: &CertificateReport) -> i32 {
    if report.is_certified() {
        EXIT_CERTIFIED
    } else {
        EXIT_NOT_SURE
    }
}

fn require_even(graph: &Graph) -> Result<()> {
    if graph.n() < 2 || graph.n() % 2 != 0 {
        bail!("graph must have an even number of vertices, got {}", graph.n());
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs, kv: &KeyValues) -> Result<i32> {
    let params = params_from(&args.model, kv)?;
    let seed = kv.or(args.seed, "seed")?.unwrap_or(0);
    let inst = sample_instance(&params, seed)?;
    match path_or(&args.out, kv, "out")? {
        Some(path) => save_instance(&path, &inst)?,
        None => write_graph_text(std::io::stdout().lock(), &inst.graph, Some(&inst.hidden))?,
    }
    Ok(0)
}

fn cmd_pcc(args: &PccArgs, kv: &KeyValues) -> Result<i32> {
    let seed = kv.or(args.seed, "seed")?.unwrap_or(0);
    let graph = match path_or(&args.graph, kv, "graph")? {
        Some(path) => {
            load_graph(&path)
                .with_context(|| format!("loading {}", path.display()))?
                .graph
        }
        None => sample_instance(&params_from(&args.model, kv)?, seed)?.graph,
    };
    require_even(&graph)?;
    let b = SignedAdjacency::from_graph(&graph);
    let (solution, report) = pcc(
        &b,
        &solver_config(&args.solver, seed, kv)?,
        &certify_config(&args.cert, seed, kv)?,
    )?;
    if !solution.meta.converged {
        eprintln!(
            "warning: leading eigenvector did not converge (residual {:e}); candidate is best effort",
            solution.meta.residual
        );
    }
    if let Some(path) = &args.out {
        write_partition(path, &solution.partition)?;
    }
    print_json(&report)?;
    Ok(report_exit(&report))
}

fn cmd_certify(args: &CertifyArgs, kv: &KeyValues) -> Result<i32> {
    let file = load_required_graph(&args.graph, kv)?;
    let path = path_or(&args.partition, kv, "partition")?
        .ok_or_else(|| anyhow!("--partition is required"))?;
    let x = read_partition(&path).with_context(|| format!("loading {}", path.display()))?;
    let seed = kv.or(args.seed, "seed")?.unwrap_or(0);
    let b = SignedAdjacency::from_graph(&file.graph);
    let report = certify(&b, &x, &certify_config(&args.cert, seed, kv)?)?;
    print_json(&report)?;
    Ok(report_exit(&report))
}

fn cmd_oracle(args: &OracleArgs, kv: &KeyValues) -> Result<i32> {
    let file = load_required_graph(&args.graph, kv)?;
    print_json(&brute_force_bisection(&file.graph)?)?;
    Ok(0)
}

pub fn sweep_config(args: &SweepArgs, kv: &KeyValues) -> Result<SweepConfig> {
    let grid = |flag: &Option<String>, key: &str| -> Result<Vec<f64>> {
        match flag.clone().or(kv.get::<String>(key)?) {
            Some(s) => parse_grid(&s),
            None => Ok(Vec::new()),
        }
    };
    let master_seed = kv.or(args.seed, "seed")?.unwrap_or(0);
    Ok(SweepConfig {
        n: kv.or(args.n, "n")?.ok_or_else(|| anyhow!("--n is required"))?,
        alpha_grid: grid(&args.alpha, "alpha")?,
        beta_grid: grid(&args.beta, "beta")?,
        trials: kv.or(args.trials, "trials")?.unwrap_or(1),
        solver: solver_config(&args.solver, 0, kv)?,
        certify: certify_config(&args.cert, 0, kv)?,
        master_seed,
        threads: kv.or(args.threads, "threads")?,
    })
}

fn cmd_sweep(args: &SweepArgs, kv: &KeyValues) -> Result<i32> {
    let cfg = sweep_config(args, kv)?;
    let rows = run_sweep(&cfg)?;
    match path_or(&args.out, kv, "out")? {
        Some(path) => write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), &rows)?,
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    for (a, b, recovered, certified, errors) in summarize(&rows) {
        eprintln!(
            "alpha={a} beta={b}: recovered {recovered:.3} certified {certified:.3}{}",
            if errors > 0 { format!(" ({errors} errors)") } else { String::new() }
        );
    }
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let kv = match &cli.config {
        Some(path) => KeyValues::load(path)?,
        None => KeyValues::default(),
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, &kv),
        Command::Pcc(a) => cmd_pcc(a, &kv),
        Command::Sweep(a) => cmd_sweep(a, &kv),
        Command::Oracle(a) => cmd_oracle(a, &kv),
        Command::Certify(a) => cmd_certify(a, &kv),
    }
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Parse `args` (including the program name) and run; usage errors exit 1.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            code
        }
    }
}
