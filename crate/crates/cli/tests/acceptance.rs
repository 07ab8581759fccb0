//! Acceptance suite. Runs each criterion in sequence (so the timing limits are
//! not skewed by sibling tests) and prints one PASS/FAIL line per criterion.
//!
//! cargo test -p sbm-pcc-cli --test acceptance -- --nocapture

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbm_pcc::certifier::{lambda2_dense, lambda2_lanczos, sos_factor, sos_gap_check};
use sbm_pcc::model::random_balanced;
use sbm_pcc::oracle::{brute_force_bisection, exhaustive_identity_check};
use sbm_pcc::{
    certify, make_params, sample_instance, solve, CertifyConfig, CertifyMethod, Instance,
    ParamMode, Partition, PccError, SbmParams, SignedAdjacency, SolverConfig,
};
use sbm_pcc_cli::sweep::{run_sweep, summarize, SweepConfig};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn in_regime(n: usize, alpha: f64, beta: f64, seed: u64) -> (Instance, SignedAdjacency) {
    let params = make_params(n, ParamMode::LogScale { alpha, beta }).unwrap();
    let inst = sample_instance(&params, seed).unwrap();
    let b = SignedAdjacency::from_graph(&inst.graph);
    (inst, b)
}

fn random_signs(n: usize, rng: &mut ChaCha8Rng) -> Partition {
    Partition::new((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()).unwrap()
}

/// Swap one `+1` vertex with one `-1` vertex.
fn swapped(x: &Partition, rng: &mut ChaCha8Rng) -> Partition {
    let plus: Vec<usize> = (0..x.len()).filter(|&i| x.get(i) == 1).collect();
    let minus: Vec<usize> = (0..x.len()).filter(|&i| x.get(i) == -1).collect();
    let mut y = x.clone();
    y.swap(
        plus[rng.random_range(0..plus.len())],
        minus[rng.random_range(0..minus.len())],
    );
    y
}

fn identity_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for (k, n) in [6, 8, 10, 12].into_iter().cycle().take(50).enumerate() {
        let p = rng.random_range(0.0..=1.0);
        let q = rng.random_range(0.0..=1.0);
        let inst = sample_instance(&SbmParams::unchecked(n, p, q).unwrap(), k as u64).unwrap();
        for x_nat in [inst.hidden.clone(), random_balanced(n, 500 + k as u64), random_signs(n, &mut rng)] {
            ensure(exhaustive_identity_check(&inst.graph, &x_nat).unwrap(), || {
                format!("identity failed: instance {k}, n={n}, p={p:.3}, q={q:.3}")
            })?;
            checked += 1 << n;
        }
    }
    Ok(format!("50 instances, {checked} (x♮, x) pairs, 0 mismatches"))
}

fn kernel_and_trace() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pairs = 0;
    for k in 0..1000u64 {
        let n = 2 * rng.random_range(2..=250);
        let p = rng.random_range(0.0..=1.0);
        let q = rng.random_range(0.0..=1.0);
        let inst = sample_instance(&SbmParams::unchecked(n, p, q).unwrap(), k).unwrap();
        let b = SignedAdjacency::from_graph(&inst.graph);
        for j in 0..10 {
            let x = match j {
                0 => inst.hidden.clone(),
                1..=4 => random_balanced(n, rng.random()),
                _ => random_signs(n, &mut rng),
            };
            let d = b.build_dual_diagonal(&x).unwrap();
            let mx = b.m_matvec_i64(&d, &x.to_i64()).unwrap();
            ensure(mx.iter().all(|&v| v == 0), || format!("(D - B)x != 0 at n={n}, seed {k}"))?;
            ensure(d.trace() == b.quad_form(&x).unwrap(), || {
                format!("trace(D) != xᵀBx at n={n}, seed {k}")
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, 0 violations"))
}

fn soundness() -> Check {
    let grid = [0.0, 0.2, 0.5, 0.8, 1.0];
    let pq: Vec<(f64, f64)> = grid
        .iter()
        .flat_map(|&p| grid.iter().filter(move |&&q| q < p).map(move |&q| (p, q)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let methods = [CertifyMethod::Auto, CertifyMethod::Lanczos, CertifyMethod::Exact];
    let (mut pairs, mut certified) = (0, 0);
    let mut seed = 0u64;
    while pairs < 1000 {
        for n in [8, 10, 12, 14] {
            for &(p, q) in &pq {
                seed += 1;
                let inst = sample_instance(&SbmParams::unchecked(n, p, q).unwrap(), seed).unwrap();
                let b = SignedAdjacency::from_graph(&inst.graph);
                let bf = brute_force_bisection(&inst.graph).unwrap();
                let candidates = [
                    inst.hidden.clone(),
                    solve(&b, &SolverConfig { seed, ..Default::default() }).unwrap().partition,
                    random_balanced(n, seed ^ 0xABCD),
                    swapped(&bf.optima[0], &mut rng),
                    swapped(&inst.hidden, &mut rng),
                ];
                for x in &candidates {
                    let unique = bf.num_optima == 1 && bf.optima[0].eq_up_to_sign(x);
                    for method in methods {
                        let cfg = CertifyConfig { method, seed, ..Default::default() };
                        if certify(&b, x, &cfg).unwrap().is_certified() {
                            certified += 1;
                            ensure(unique, || {
                                format!("{method:?} certified a non-unique optimum: n={n}, p={p}, q={q}, seed {seed}")
                            })?;
                        }
                    }
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} pairs x {} methods, {certified} certified, 0 violations", methods.len()))
}

fn lanczos_fidelity() -> Check {
    let mut worst_rel = 0.0f64;
    let mut count = 0;
    for (k, n) in [200, 500, 1000].into_iter().cycle().take(50).enumerate() {
        let seed = 4000 + k as u64;
        let (_, b) = in_regime(n, 16.0, 2.0, seed);
        let x = solve(&b, &SolverConfig { seed, ..Default::default() }).unwrap().partition;
        let d = b.build_dual_diagonal(&x).unwrap();
        let dense = lambda2_dense(&b.assemble_dense_m(&d, n).unwrap(), &x, n).unwrap();
        let cfg = CertifyConfig { lanczos_iters: 200, restarts: 3, seed, ..Default::default() };
        let est = lambda2_lanczos(|v, w| b.m_matvec_into(&d, v, w).unwrap(), &x, &cfg).estimate;
        let rel = (est - dense).abs() / dense.abs().max(1.0);
        worst_rel = worst_rel.max(rel);
        ensure(rel <= 1e-6, || format!("n={n}: relative error {rel:e} (dense {dense}, lanczos {est})"))?;
        ensure(est >= dense - 1e-9 * n as f64, || {
            format!("n={n}: lanczos {est} below dense {dense}")
        })?;
        count += 1;
    }
    Ok(format!("{count} instances, worst relative error {worst_rel:.2e}"))
}

fn phase_behavior() -> Check {
    let cell = |n, alpha, beta, trials| {
        let cfg = SweepConfig {
            n,
            alpha_grid: vec![alpha],
            beta_grid: vec![beta],
            trials,
            solver: SolverConfig::default(),
            certify: CertifyConfig::default(),
            master_seed: 5,
            threads: None,
        };
        let (_, _, recovered, certified, errors) = summarize(&run_sweep(&cfg).unwrap())[0];
        assert_eq!(errors, 0);
        (recovered, certified)
    };
    let (rec_hi, cert_hi) = cell(300, 16.0, 2.0, 50);
    let (rec_lo, cert_lo) = cell(1000, 3.0, 1.0, 20);
    let detail = format!(
        "(16,2) n=300: certified {cert_hi:.2}, recovered {rec_hi:.2}; (3,1) n=1000: certified {cert_lo:.2}, recovered {rec_lo:.2}"
    );
    ensure(cert_hi >= 0.8 && rec_hi >= 0.9 && cert_lo <= 0.2, || detail.clone())?;
    Ok(detail)
}

fn sos_certificate() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut done = Vec::new();
    for (n, p, q, want) in [(10, 0.9, 0.1, 10), (50, 0.8, 0.2, 10)] {
        let mut found = 0;
        let mut seed = 0u64;
        while found < want {
            seed += 1;
            ensure(seed < 1000, || format!("too few certified instances at n={n}"))?;
            let inst = sample_instance(&SbmParams::unchecked(n, p, q).unwrap(), seed).unwrap();
            let b = SignedAdjacency::from_graph(&inst.graph);
            let x = &inst.hidden;
            if !certify(&b, x, &CertifyConfig::default()).unwrap().is_certified() {
                continue;
            }
            let d = b.build_dual_diagonal(x).unwrap();
            let m = b.assemble_dense_m(&d, n).unwrap().map(|v| v as f64);
            let f = sos_factor(&m, x).map_err(|e| format!("n={n}, seed {seed}: {e}"))?;
            ensure(f.residual <= 1e-8 * n as f64, || format!("residual {:e} at n={n}", f.residual))?;
            worst = worst.max(f.residual);
            let ok = if n <= 10 {
                (0u64..1 << n).all(|mask| sos_gap_check(&f.v, &b, x, &Partition::from_mask(n, mask)).unwrap())
            } else {
                (0..1000).all(|_| sos_gap_check(&f.v, &b, x, &random_signs(n, &mut rng)).unwrap())
            };
            ensure(ok, || format!("gap check failed at n={n}, seed {seed}"))?;
            found += 1;
        }
        done.push(format!("{found} at n={n}"));
    }
    Ok(format!("{} certified instances, worst residual {worst:.1e}", done.join(" + ")))
}

fn performance() -> Check {
    let n = 100_000;
    let t = Instant::now();
    let (inst, b) = in_regime(n, 16.0, 2.0, 7);
    let sample_time = t.elapsed();
    ensure(
        matches!(b.assemble_dense_m(&b.build_dual_diagonal(&inst.hidden).unwrap(), sbm_pcc::linops::DEFAULT_DENSE_THRESHOLD), Err(PccError::TooLarge { .. })),
        || "dense assembly was not refused at n = 1e5".into(),
    )?;
    let t = Instant::now();
    let sol = solve(&b, &SolverConfig::default()).unwrap();
    let cfg = CertifyConfig { method: CertifyMethod::Lanczos, ..Default::default() };
    let report = certify(&b, &sol.partition, &cfg).unwrap();
    let elapsed = t.elapsed();
    let detail = format!(
        "m={}, sampling {:.1}s, solve+certify {:.1}s, status {:?}, recovered {}",
        b.num_edges(),
        sample_time.as_secs_f64(),
        elapsed.as_secs_f64(),
        report.status,
        sol.partition.eq_up_to_sign(&inst.hidden)
    );
    ensure(elapsed < Duration::from_secs(60), || detail.clone())?;
    Ok(detail)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: usize, tag: &str| -> String {
        let out = dir.path().join(format!("{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_sbm-pcc"))
            .args(["sweep", "--n", "120", "--alpha", "16,8,4", "--beta", "2,1", "--trials", "4"])
            .args(["--seed", "42", "--threads", &threads.to_string()])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read_to_string(&out)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
            .collect()
    };
    let a = run(4, "a");
    let b = run(4, "b");
    let c = run(1, "c");
    ensure(a == b, || "two runs with 4 threads differ".into())?;
    ensure(a == c, || "1-thread and 4-thread runs differ".into())?;
    Ok(format!("{} rows identical across 2 runs and 1/4 threads", a.lines().count() - 1))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 8] = [
        ("1 identity suite (exhaustive)", 30, identity_suite),
        ("2 kernel and trace identities", 60, kernel_and_trace),
        ("3 soundness vs brute force", 300, soundness),
        ("4 lanczos fidelity", 300, lanczos_fidelity),
        ("5 phase behavior", 600, phase_behavior),
        ("6 sos certificate", 120, sos_certificate),
        ("7 performance at n = 1e5", 60, performance),
        ("8 sweep determinism", 600, determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        let secs = t.elapsed().as_secs_f64();
        let result = result.and_then(|d| {
            if secs < limit as f64 {
                Ok(d)
            } else {
                Err(format!("{d}; took {secs:.1}s, limit {limit}s"))
            }
        });
        match result {
            Ok(d) => println!("PASS  {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
