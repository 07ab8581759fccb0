//! A-posteriori optimality certificates for a candidate bisection.
//!
//! For a ±1 candidate `x`, the diagonal `dᵢ = xᵢ (Bx)ᵢ` makes `M = D - B`
//! satisfy `Mx = 0` exactly. If `x` is balanced and the second smallest
//! eigenvalue of `M` is strictly positive, `D` is a dual feasible point of the
//! semidefinite relaxation whose value matches `xᵀBx`, and `x` is the unique
//! minimum bisection up to global sign. This module decides `λ₂(M) > τ` in four
//! ways:
//!
//! * `dense`: full symmetric eigendecomposition;
//! * `cholesky`: Cholesky of `M + (c/n) xxᵀ - τI`, which is positive definite
//!   iff `λ₂(M) > τ` (given `c > τ`);
//! * `exact`: fraction-free elimination of `M + xxᵀ` in big integers, deciding
//!   `λ₂(M) > 0` with no rounding at all;
//! * `lanczos`: restarted Lanczos on `M` restricted to `x⊥`, matrix-free.
//!   Its smallest Ritz value upper-bounds `λ₂`, so this path is a randomized
//!   certificate: with small probability over its own start vectors it can
//!   overestimate `λ₂`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::lanczos::{self, Extreme, LanczosOptions};
use crate::linops::{DualDiagonal, SignedAdjacency, DEFAULT_DENSE_THRESHOLD};
use crate::model::Partition;
use crate::solver::SolverMeta;

/// Largest `n` accepted by the exact big-integer path.
pub const EXACT_THRESHOLD: usize = 256;

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertifyMethod {
    /// Dense when `n <= dense_threshold`, Lanczos otherwise.
    Auto,
    Dense,
    Cholesky,
    Lanczos,
    Exact,
}

impl std::str::FromStr for CertifyMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(CertifyMethod::Auto),
            "dense" => Ok(CertifyMethod::Dense),
            "cholesky" => Ok(CertifyMethod::Cholesky),
            "lanczos" => Ok(CertifyMethod::Lanczos),
            "exact" => Ok(CertifyMethod::Exact),
            other => Err(format!(
                "unknown method `{other}` (expected auto, dense, cholesky, lanczos or exact)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub method: CertifyMethod,
    pub dense_threshold: usize,
    /// Slack `τ` in `λ₂ > τ`; `None` uses `100 u n maxᵢ|Mᵢᵢ|`.
    pub psd_tol: Option<f64>,
    pub lanczos_iters: usize,
    pub restarts: usize,
    /// Early-stop residual tolerance for each Lanczos run (relative).
    pub lanczos_tol: f64,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            method: CertifyMethod::Auto,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            psd_tol: None,
            lanczos_iters: 200,
            restarts: 3,
            lanczos_tol: 1e-10,
            seed: 0,
        }
    }
}

impl CertifyConfig {
    pub fn resolve_method(&self, n: usize) -> CertifyMethod {
        match self.method {
            CertifyMethod::Auto if n <= self.dense_threshold => CertifyMethod::Dense,
            CertifyMethod::Auto => CertifyMethod::Lanczos,
            m => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Certified,
    NotSure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    BalanceFailed,
    Lambda2Nonpositive,
    Lambda2BelowTolerance,
    RandomizedPass,
    DeterministicPass,
    /// The eigenvalue estimate was not finite.
    NumericalFailure,
}

pub const RANDOMIZED_NOTE: &str = "randomized certificate: the Lanczos estimate upper-bounds \
lambda2 and may overestimate it with small probability over the independent start vectors; \
repeat with more restarts or fresh seeds to reduce that probability";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub balance: i64,
    pub psd_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_trace: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_restart: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub iterations: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdowns: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_pivot: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub status: Status,
    pub reason: Reason,
    /// Estimate of `λ₂(D - B)`; absent for the factorization-based methods and
    /// for unbalanced candidates.
    pub lambda2: Option<f64>,
    pub method: CertifyMethod,
    pub objective: i64,
    #[serde(rename = "uniqueness")]
    pub uniqueness_claimed: bool,
    pub randomized: bool,
    pub diagnostics: Diagnostics,
    pub seed: u64,
}

impl CertificateReport {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }
}

pub fn check_balance(x: &Partition) -> bool {
    x.is_balanced()
}

/// `τ = 100 u n maxᵢ |Mᵢᵢ|`.
pub fn default_psd_tol(n: usize, d: &DualDiagonal) -> f64 {
    100.0 * UNIT_ROUNDOFF * n as f64 * d.max_abs() as f64
}

fn check_dense_kernel(m: &DMatrix<i64>, x: &Partition) -> Result<()> {
    let n = x.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(PccError::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    for i in 0..n {
        let value: i64 = (0..n).map(|j| m[(i, j)] * x.get(j) as i64).sum();
        if value != 0 {
            return Err(PccError::KernelMismatch { index: i, value });
        }
    }
    Ok(())
}

/// Second smallest eigenvalue of the dense integer matrix `m`, which must have
/// `x` in its kernel.
pub fn lambda2_dense(m: &DMatrix<i64>, x: &Partition, dense_threshold: usize) -> Result<f64> {
    if m.nrows() > dense_threshold {
        return Err(PccError::TooLarge {
            n: m.nrows(),
            limit: dense_threshold,
        });
    }
    check_dense_kernel(m, x)?;
    if m.nrows() < 2 {
        return Err(PccError::TooLarge {
            n: m.nrows(),
            limit: 1,
        });
    }
    let mf = m.map(|v| v as f64);
    let mut eig: Vec<f64> = mf.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig[1])
}

/// Plain Cholesky; on failure returns the index and value of the first
/// nonpositive pivot.
fn cholesky_in_place(a: &mut DMatrix<f64>) -> std::result::Result<(), (usize, f64)> {
    let n = a.nrows();
    for k in 0..n {
        let mut pivot = a[(k, k)];
        for p in 0..k {
            pivot -= a[(k, p)] * a[(k, p)];
        }
        if !(pivot > 0.0) {
            return Err((k, pivot));
        }
        let l = pivot.sqrt();
        a[(k, k)] = l;
        for i in k + 1..n {
            let mut s = a[(i, k)];
            for p in 0..k {
                s -= a[(i, p)] * a[(k, p)];
            }
            a[(i, k)] = s / l;
        }
    }
    Ok(())
}

/// Outcome of the deflated Cholesky test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholeskyOutcome {
    pub positive_definite: bool,
    pub failed_pivot: Option<(usize, f64)>,
}

/// Decide `λ₂(D - B) > τ` by factoring `M + (c/n) xxᵀ - τI` with
/// `c = 1 + maxᵢ Mᵢᵢ`.
pub fn psd_cholesky_deflated(
    b: &SignedAdjacency,
    d: &DualDiagonal,
    x: &Partition,
    psd_tol: f64,
    dense_threshold: usize,
) -> Result<CholeskyOutcome> {
    b.check_kernel(d, x)?;
    let n = b.n();
    let m = b.assemble_dense_m(d, dense_threshold)?;
    let c = 1.0 + d.values().iter().copied().max().unwrap_or(0) as f64;
    let shift = c / n as f64;
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        let mut v = m[(i, j)] as f64 + shift * (x.get(i) * x.get(j)) as f64;
        if i == j {
            v -= psd_tol;
        }
        v
    });
    Ok(match cholesky_in_place(&mut a) {
        Ok(()) => CholeskyOutcome {
            positive_definite: true,
            failed_pivot: None,
        },
        Err(p) => CholeskyOutcome {
            positive_definite: false,
            failed_pivot: Some(p),
        },
    })
}

/// Exact test of `λ₂(D - B) > 0`: `M + xxᵀ` is positive definite iff every
/// leading principal minor is positive, and fraction-free (Bareiss)
/// elimination produces those minors as its pivots.
pub fn psd_exact(b: &SignedAdjacency, d: &DualDiagonal, x: &Partition) -> Result<CholeskyOutcome> {
    b.check_kernel(d, x)?;
    let n = b.n();
    if n > EXACT_THRESHOLD {
        return Err(PccError::TooLarge {
            n,
            limit: EXACT_THRESHOLD,
        });
    }
    let m = b.assemble_dense_m(d, EXACT_THRESHOLD)?;
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigInt::from(m[(i, j)] + (x.get(i) * x.get(j)) as i64))
                .collect()
        })
        .collect();
    let mut prev = BigInt::from(1);
    for k in 0..n {
        let pivot = a[k][k].clone();
        if !pivot.is_positive() {
            let approx = if pivot.is_zero() { 0.0 } else { -1.0 };
            return Ok(CholeskyOutcome {
                positive_definite: false,
                failed_pivot: Some((k, approx)),
            });
        }
        for i in k + 1..n {
            for j in i..n {
                let v = (&a[i][j] * &pivot - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v.clone();
                a[j][i] = v;
            }
        }
        prev = pivot;
    }
    Ok(CholeskyOutcome {
        positive_definite: true,
        failed_pivot: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosEstimate {
    /// Minimum over restarts of the smallest Ritz value.
    pub estimate: f64,
    pub per_restart: Vec<f64>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub breakdowns: usize,
}

/// Randomized estimate of `λ₂(M)` for an operator with known kernel vector `x`.
///
/// Each restart draws its own Gaussian start vector from stream `r` of the
/// seed, so the first `r` restarts do not depend on how many are requested.
pub fn lambda2_lanczos<F>(matvec: F, x: &Partition, cfg: &CertifyConfig) -> LanczosEstimate
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let n = x.len();
    let deflate = lanczos::orthonormal_deflation(&[x.to_f64()]);
    let opts = LanczosOptions {
        max_iters: cfg.lanczos_iters,
        tol: cfg.lanczos_tol,
        extreme: Extreme::Smallest,
        check_every: 10,
        want_vector: false,
    };
    let runs: Vec<lanczos::LanczosOutcome> = (0..cfg.restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r);
            let start = lanczos::random_vector(n, &mut rng);
            lanczos::lanczos(n, &matvec, &deflate, start, &opts, &mut rng)
        })
        .collect();
    let per_restart: Vec<f64> = runs.iter().map(|o| o.value).collect();
    let estimate = per_restart
        .iter()
        .copied()
        .fold(f64::INFINITY, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.min(v) });
    LanczosEstimate {
        estimate,
        per_restart,
        iterations: runs.iter().map(|o| o.iterations).collect(),
        residuals: runs.iter().map(|o| o.residual).collect(),
        breakdowns: runs.iter().map(|o| o.breakdowns).sum(),
    }
}

/// Algorithm: reject unbalanced candidates, build `D` from `x`, and certify iff
/// the configured `λ₂` test passes with slack `τ`.
pub fn certify(b: &SignedAdjacency, x: &Partition, cfg: &CertifyConfig) -> Result<CertificateReport> {
    if x.len() != b.n() {
        return Err(PccError::DimensionMismatch {
            expected: b.n(),
            got: x.len(),
        });
    }
    let d = b.build_dual_diagonal(x)?;
    certify_with_dual(b, x, &d, cfg)
}

/// [`certify`] with a caller-supplied dual diagonal. A `d` that was not built
/// from `x` is rejected with `KernelMismatch`.
pub fn certify_with_dual(
    b: &SignedAdjacency,
    x: &Partition,
    d: &DualDiagonal,
    cfg: &CertifyConfig,
) -> Result<CertificateReport> {
    let n = b.n();
    if x.len() != n || d.len() != n {
        return Err(PccError::DimensionMismatch {
            expected: n,
            got: if x.len() != n { x.len() } else { d.len() },
        });
    }
    let method = cfg.resolve_method(n);
    let objective = b.quad_form(x)?;
    let tau = cfg.psd_tol.unwrap_or_else(|| default_psd_tol(n, d)).max(0.0);
    let mut report = CertificateReport {
        status: Status::NotSure,
        reason: Reason::BalanceFailed,
        lambda2: None,
        method,
        objective,
        uniqueness_claimed: false,
        randomized: method == CertifyMethod::Lanczos,
        diagnostics: Diagnostics {
            n,
            balance: x.balance(),
            psd_tol: tau,
            ..Default::default()
        },
        seed: cfg.seed,
    };
    if !check_balance(x) {
        return Ok(report);
    }
    b.check_kernel(d, x)?;
    report.diagnostics.dual_trace = Some(d.trace());

    let classify = |lambda: f64| {
        if lambda.is_nan() {
            Reason::NumericalFailure
        } else if lambda <= 0.0 {
            Reason::Lambda2Nonpositive
        } else if lambda <= tau {
            Reason::Lambda2BelowTolerance
        } else if method == CertifyMethod::Lanczos {
            Reason::RandomizedPass
        } else {
            Reason::DeterministicPass
        }
    };

    let reason = match method {
        CertifyMethod::Dense | CertifyMethod::Auto => {
            let m = b.assemble_dense_m(d, cfg.dense_threshold)?;
            let lambda = lambda2_dense(&m, x, cfg.dense_threshold)?;
            report.lambda2 = Some(lambda);
            classify(lambda)
        }
        CertifyMethod::Cholesky => {
            let out = psd_cholesky_deflated(b, d, x, tau, cfg.dense_threshold)?;
            report.diagnostics.failed_pivot = out.failed_pivot.map(|p| p.0);
            if out.positive_definite {
                Reason::DeterministicPass
            } else {
                Reason::Lambda2BelowTolerance
            }
        }
        CertifyMethod::Exact => {
            let out = psd_exact(b, d, x)?;
            report.diagnostics.failed_pivot = out.failed_pivot.map(|p| p.0);
            if out.positive_definite {
                Reason::DeterministicPass
            } else {
                Reason::Lambda2Nonpositive
            }
        }
        CertifyMethod::Lanczos => {
            let est = lambda2_lanczos(
                |v, w| b.m_matvec_into(d, v, w).expect("dimensions fixed"),
                x,
                cfg,
            );
            report.lambda2 = est.estimate.is_finite().then_some(est.estimate);
            report.diagnostics.per_restart = est.per_restart;
            report.diagnostics.iterations = est.iterations;
            report.diagnostics.residuals = est.residuals;
            report.diagnostics.breakdowns = Some(est.breakdowns);
            report.diagnostics.note = Some(RANDOMIZED_NOTE.to_string());
            classify(est.estimate)
        }
    };
    report.reason = reason;
    if matches!(reason, Reason::DeterministicPass | Reason::RandomizedPass) {
        report.status = Status::Certified;
        report.uniqueness_claimed = reason == Reason::DeterministicPass;
    }
    Ok(report)
}

/// Factor `M = V Vᵀ`.
#[derive(Debug, Clone)]
pub struct SosFactor {
    pub v: DMatrix<f64>,
    pub rank: usize,
    /// `‖V Vᵀ - M‖_∞` (largest absolute entry).
    pub residual: f64,
}

/// Pivoted Cholesky of a positive semidefinite `M` with `Mx = 0`.
pub fn sos_factor(m: &DMatrix<f64>, x: &Partition) -> Result<SosFactor> {
    let n = m.nrows();
    if m.ncols() != n || x.len() != n {
        return Err(PccError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    for i in 0..n {
        let value: f64 = (0..n).map(|j| m[(i, j)] * x.get(j) as f64).sum();
        if value != 0.0 {
            return Err(PccError::KernelMismatch {
                index: i,
                value: value.round() as i64,
            });
        }
    }
    let max_diag = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max);
    let stop = 1e3 * UNIT_ROUNDOFF * n as f64 * max_diag.max(1.0);

    let mut residual = m.clone();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut done = vec![false; n];
    for _ in 0..n {
        let (p, &diag) = (0..n)
            .filter(|&i| !done[i])
            .map(|i| (i, &residual[(i, i)]))
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap_or((0, &0.0));
        if done.iter().all(|&x| x) || diag <= stop {
            break;
        }
        let l = diag.sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| if done[i] { 0.0 } else { residual[(i, p)] / l })
            .collect();
        for i in 0..n {
            for j in 0..n {
                residual[(i, j)] -= col[i] * col[j];
            }
        }
        done[p] = true;
        cols.push(col);
    }
    if let Some(i) = (0..n).find(|&i| !done[i] && residual[(i, i)] < -stop) {
        return Err(PccError::NotPsd {
            pivot: i,
            value: residual[(i, i)],
        });
    }
    let rank = cols.len();
    let v = DMatrix::from_fn(n, rank, |i, j| cols[j][i]);
    let err = (&v * v.transpose() - m).abs().max();
    if err > 1e-8 * n as f64 {
        let (pivot, _) = (0..n)
            .map(|i| (i, residual[(i, i)]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        return Err(PccError::NotPsd { pivot, value: err });
    }
    Ok(SosFactor {
        v,
        rank,
        residual: err,
    })
}

/// `‖Vᵀx‖²`, the sum-of-squares value at `x`.
pub fn sos_value(v: &DMatrix<f64>, x: &Partition) -> Result<f64> {
    if v.nrows() != x.len() {
        return Err(PccError::DimensionMismatch {
            expected: v.nrows(),
            got: x.len(),
        });
    }
    Ok((0..v.ncols())
        .map(|j| {
            let s: f64 = (0..v.nrows()).map(|i| v[(i, j)] * x.get(i) as f64).sum();
            s * s
        })
        .sum())
}

/// Check `x♮ᵀBx♮ - xᵀBx = ‖Vᵀx‖²` within `1e-6 n`.
pub fn sos_gap_check(
    v: &DMatrix<f64>,
    b: &SignedAdjacency,
    x_nat: &Partition,
    x: &Partition,
) -> Result<bool> {
    let n = b.n();
    for len in [x_nat.len(), x.len(), v.nrows()] {
        if len != n {
            return Err(PccError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let gap = (b.quad_form(x_nat)? - b.quad_form(x)?) as f64;
    Ok((gap - sos_value(v, x)?).abs() <= 1e-6 * n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;

    fn cliques() -> SignedAdjacency {
        SignedAdjacency::from_graph(&Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap())
    }

    fn x_nat() -> Partition {
        Partition::new(vec![1, 1, -1, -1]).unwrap()
    }

    fn alternating() -> Partition {
        Partition::new(vec![1, -1, 1, -1]).unwrap()
    }

    fn dense_m(b: &SignedAdjacency, x: &Partition) -> DMatrix<i64> {
        let d = b.build_dual_diagonal(x).unwrap();
        b.assemble_dense_m(&d, 4096).unwrap()
    }

    #[test]
    fn balance_checks() {
        assert!(check_balance(&x_nat()));
        assert!(!check_balance(&Partition::new(vec![1, 1, 1, -1]).unwrap()));
        assert!(!check_balance(&Partition::new(vec![1; 4]).unwrap()));
    }

    #[test]
    fn dense_lambda2_examples() {
        let b = cliques();
        let l2 = lambda2_dense(&dense_m(&b, &x_nat()), &x_nat(), 4096).unwrap();
        assert!((l2 - 4.0).abs() < 1e-12);

        let empty = SignedAdjacency::from_graph(&Graph::empty(6));
        let x = Partition::new(vec![1, -1, 1, -1, 1, -1]).unwrap();
        let l2 = lambda2_dense(&dense_m(&empty, &x), &x, 4096).unwrap();
        assert!(l2.abs() < 1e-12);

        // D built from the alternating labels does not annihilate x♮.
        let m = dense_m(&b, &alternating());
        assert!(matches!(
            lambda2_dense(&m, &x_nat(), 4096),
            Err(PccError::KernelMismatch { .. })
        ));
        assert_eq!(m[(0, 0)], -1);
        let l2 = lambda2_dense(&m, &alternating(), 4096).unwrap();
        assert!(l2 <= 0.0);
        assert!(matches!(
            lambda2_dense(&m, &alternating(), 3),
            Err(PccError::TooLarge { .. })
        ));
    }

    #[test]
    fn cholesky_examples() {
        let b = cliques();
        let d = b.build_dual_diagonal(&x_nat()).unwrap();
        assert!(psd_cholesky_deflated(&b, &d, &x_nat(), 1e-12, 4096).unwrap().positive_definite);
        // Slack above the true λ₂ = 4 must fail.
        assert!(!psd_cholesky_deflated(&b, &d, &x_nat(), 4.5, 4096).unwrap().positive_definite);

        let empty = SignedAdjacency::from_graph(&Graph::empty(4));
        let x = alternating();
        let d = empty.build_dual_diagonal(&x).unwrap();
        let tau = default_psd_tol(4, &d);
        assert!(!psd_cholesky_deflated(&empty, &d, &x, tau, 4096).unwrap().positive_definite);

        let d_alt = b.build_dual_diagonal(&alternating()).unwrap();
        let out = psd_cholesky_deflated(&b, &d_alt, &alternating(), 1e-12, 4096).unwrap();
        assert!(!out.positive_definite);
        assert!(matches!(
            psd_cholesky_deflated(&b, &d_alt, &x_nat(), 1e-12, 4096),
            Err(PccError::KernelMismatch { .. })
        ));
    }

    #[test]
    fn exact_examples() {
        let b = cliques();
        let d = b.build_dual_diagonal(&x_nat()).unwrap();
        assert!(psd_exact(&b, &d, &x_nat()).unwrap().positive_definite);
        let d = b.build_dual_diagonal(&alternating()).unwrap();
        assert!(!psd_exact(&b, &d, &alternating()).unwrap().positive_definite);
        let empty = SignedAdjacency::from_graph(&Graph::empty(4));
        let d = empty.build_dual_diagonal(&x_nat()).unwrap();
        assert!(!psd_exact(&empty, &d, &x_nat()).unwrap().positive_definite);
    }

    #[test]
    fn lanczos_examples() {
        let b = cliques();
        let x = x_nat();
        let d = b.build_dual_diagonal(&x).unwrap();
        let cfg = CertifyConfig::default();
        let est = lambda2_lanczos(|v, w| b.m_matvec_into(&d, v, w).unwrap(), &x, &cfg);
        assert!((est.estimate - 4.0).abs() < 1e-10, "{est:?}");
        assert_eq!(est.per_restart.len(), 3);

        let empty = SignedAdjacency::from_graph(&Graph::empty(8));
        let x = Partition::new(vec![1, -1, 1, -1, 1, -1, -1, 1]).unwrap();
        let d = empty.build_dual_diagonal(&x).unwrap();
        let est = lambda2_lanczos(|v, w| empty.m_matvec_into(&d, v, w).unwrap(), &x, &cfg);
        assert!(est.estimate.abs() < 1e-10, "{est:?}");
    }

    #[test]
    fn certify_examples() {
        let b = cliques();
        for method in [
            CertifyMethod::Dense,
            CertifyMethod::Cholesky,
            CertifyMethod::Exact,
            CertifyMethod::Lanczos,
        ] {
            let cfg = CertifyConfig {
                method,
                ..Default::default()
            };
            let r = certify(&b, &x_nat(), &cfg).unwrap();
            assert_eq!(r.status, Status::Certified, "{method:?}");
            assert_eq!(r.objective, 12);
            assert_eq!(r.uniqueness_claimed, method != CertifyMethod::Lanczos);
            assert_eq!(r.randomized, method == CertifyMethod::Lanczos);

            let r = certify(&b, &alternating(), &cfg).unwrap();
            assert_eq!(r.status, Status::NotSure, "{method:?}");
            assert_eq!(r.objective, -4);

            let empty = SignedAdjacency::from_graph(&Graph::empty(4));
            let r = certify(&empty, &x_nat(), &cfg).unwrap();
            assert_eq!(r.status, Status::NotSure, "{method:?}");

            let r = certify(&b, &Partition::new(vec![1, 1, 1, -1]).unwrap(), &cfg).unwrap();
            assert_eq!(r.reason, Reason::BalanceFailed);
            assert_eq!(r.status, Status::NotSure);
        }
        let r = certify(&b, &x_nat(), &CertifyConfig::default()).unwrap();
        assert_eq!(r.lambda2.map(|l| (l - 4.0).abs() < 1e-12), Some(true));
        assert_eq!(r.reason, Reason::DeterministicPass);
    }

    #[test]
    fn corrupted_dual_is_rejected() {
        let b = cliques();
        let mut d = b.build_dual_diagonal(&x_nat()).unwrap();
        d.0[0] += 1;
        assert!(matches!(
            certify_with_dual(&b, &x_nat(), &d, &CertifyConfig::default()),
            Err(PccError::KernelMismatch { index: 0, value: 1 })
        ));
    }

    #[test]
    fn report_json_shape() {
        let b = cliques();
        let r = certify(&b, &x_nat(), &CertifyConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in [
            "status",
            "reason",
            "lambda2",
            "method",
            "objective",
            "uniqueness",
            "randomized",
            "diagnostics",
            "seed",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["status"], "Certified");
        assert_eq!(v["reason"], "deterministic_pass");
        assert_eq!(v["method"], "dense");
    }

    #[test]
    fn sos_examples() {
        let b = cliques();
        let m = dense_m(&b, &x_nat()).map(|v| v as f64);
        let f = sos_factor(&m, &x_nat()).unwrap();
        assert!(f.residual <= 1e-12);
        assert_eq!(f.rank, 3);
        assert!(sos_gap_check(&f.v, &b, &x_nat(), &x_nat()).unwrap());
        assert!(sos_gap_check(&f.v, &b, &x_nat(), &x_nat().negated()).unwrap());
        assert!((sos_value(&f.v, &alternating()).unwrap() - 16.0).abs() < 1e-12);
        assert!(sos_gap_check(&f.v, &b, &x_nat(), &alternating()).unwrap());

        let empty = SignedAdjacency::from_graph(&Graph::empty(4));
        let m = dense_m(&empty, &x_nat()).map(|v| v as f64);
        let f = sos_factor(&m, &x_nat()).unwrap();
        assert_eq!(f.rank, 1);
        for i in 0..4 {
            assert!((f.v[(i, 0)] - 1.0).abs() < 1e-15);
        }

        let bad = dense_m(&b, &alternating()).map(|v| v as f64);
        assert!(matches!(
            sos_factor(&bad, &alternating()),
            Err(PccError::NotPsd { .. })
        ));
    }
}
