//! Phase-diagram sweeps over the log-scale parameters `(alpha, beta)`.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;

use sbm_pcc::{
    certify, make_params, sample_instance, solve, CertifyConfig, ParamMode, SignedAdjacency,
    SolverConfig,
};

pub const CSV_HEADER: &str = "alpha,beta,trial,match,certified,lambda2,objective,wall_ms";

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: usize,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub trials: usize,
    pub solver: SolverConfig,
    pub certify: CertifyConfig,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub beta: f64,
    pub trial: usize,
    pub solved_matches_hidden: bool,
    pub certified: bool,
    pub lambda2: Option<f64>,
    pub objective: i64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepRow {
    Record(SweepRecord),
    /// The cell's parameters were invalid (e.g. `p > 1`).
    Error {
        alpha: f64,
        beta: f64,
        trial: usize,
        message: String,
    },
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial; `salt` separates the sampling, solver and certifier streams.
pub fn derive_seed(master: u64, cell: usize, trial: usize, salt: u64) -> u64 {
    let mut h = splitmix64(master);
    for v in [cell as u64, trial as u64, salt] {
        h = splitmix64(h ^ v);
    }
    h
}

fn run_trial(cfg: &SweepConfig, cell: usize, alpha: f64, beta: f64, trial: usize) -> SweepRow {
    let params = match make_params(cfg.n, ParamMode::LogScale { alpha, beta }) {
        Ok(p) => p,
        Err(e) => {
            return SweepRow::Error {
                alpha,
                beta,
                trial,
                message: e.to_string(),
            }
        }
    };
    let result = (|| -> sbm_pcc::Result<SweepRecord> {
        let inst = sample_instance(&params, derive_seed(cfg.master_seed, cell, trial, 0))?;
        let b = SignedAdjacency::from_graph(&inst.graph);
        let solver_cfg = SolverConfig {
            seed: derive_seed(cfg.master_seed, cell, trial, 1),
            ..cfg.solver
        };
        let certify_cfg = CertifyConfig {
            seed: derive_seed(cfg.master_seed, cell, trial, 2),
            ..cfg.certify
        };
        let start = Instant::now();
        let sol = solve(&b, &solver_cfg)?;
        let report = certify(&b, &sol.partition, &certify_cfg)?;
        let wall_ms = start.elapsed().as_millis() as u64;
        Ok(SweepRecord {
            alpha,
            beta,
            trial,
            solved_matches_hidden: sol.partition.eq_up_to_sign(&inst.hidden),
            certified: report.is_certified(),
            lambda2: report.lambda2,
            objective: report.objective,
            wall_ms,
        })
    })();
    match result {
        Ok(r) => SweepRow::Record(r),
        Err(e) => SweepRow::Error {
            alpha,
            beta,
            trial,
            message: e.to_string(),
        },
    }
}

/// Run every `(alpha, beta, trial)`; rows come back in `(cell, trial)` order
/// regardless of how many threads run them.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.alpha_grid.is_empty() || cfg.beta_grid.is_empty() {
        bail!("sweep grids must be non-empty");
    }
    if cfg.trials == 0 {
        bail!("trials must be at least 1");
    }
    let jobs: Vec<(usize, f64, f64, usize)> = cfg
        .alpha_grid
        .iter()
        .flat_map(|&a| cfg.beta_grid.iter().map(move |&b| (a, b)))
        .enumerate()
        .flat_map(|(cell, (a, b))| (0..cfg.trials).map(move |t| (cell, a, b, t)))
        .collect();
    let work = || -> Vec<SweepRow> {
        jobs.par_iter()
            .map(|&(cell, a, b, t)| run_trial(cfg, cell, a, b, t))
            .collect()
    };
    Ok(match cfg.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()?
            .install(work),
        None => work(),
    })
}

pub fn write_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        match row {
            SweepRow::Record(r) => writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.alpha,
                r.beta,
                r.trial,
                r.solved_matches_hidden,
                r.certified,
                r.lambda2.map(|l| l.to_string()).unwrap_or_default(),
                r.objective,
                r.wall_ms
            )?,
            SweepRow::Error {
                alpha, beta, trial, ..
            } => writeln!(w, "{alpha},{beta},{trial},error,error,,,0")?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-cell `(alpha, beta, recovery rate, certified rate, errors)`.
pub fn summarize(rows: &[SweepRow]) -> Vec<(f64, f64, f64, f64, usize)> {
    let mut out: Vec<(f64, f64, usize, usize, usize, usize)> = Vec::new();
    for row in rows {
        let (a, b) = match row {
            SweepRow::Record(r) => (r.alpha, r.beta),
            SweepRow::Error { alpha, beta, .. } => (*alpha, *beta),
        };
        if out.last().map(|c| (c.0, c.1)) != Some((a, b)) {
            out.push((a, b, 0, 0, 0, 0));
        }
        let cell = out.last_mut().unwrap();
        match row {
            SweepRow::Record(r) => {
                cell.2 += r.solved_matches_hidden as usize;
                cell.3 += r.certified as usize;
                cell.4 += 1;
            }
            SweepRow::Error { .. } => cell.5 += 1,
        }
    }
    out.into_iter()
        .map(|(a, b, m, c, ok, err)| {
            let denom = ok.max(1) as f64;
            (a, b, m as f64 / denom, c as f64 / denom, err)
        })
        .collect()
}
