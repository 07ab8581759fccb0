//! Symmetric Lanczos with full reorthogonalization and explicit deflation.
//!
//! The operator is only touched through a matvec closure. Every new Krylov
//! vector is orthogonalized (twice) against the deflation vectors and the whole
//! basis, so the iteration lives in the orthogonal complement of the deflated
//! directions and produces no spurious copies of converged Ritz values.
//!
//! On breakdown (an invariant subspace has been found) the iteration continues
//! from a fresh random vector orthogonal to everything seen so far, which keeps
//! the Ritz values of the full tridiagonal matrix valid eigenvalue bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_iters: usize,
    /// Stop once the target Ritz pair has residual `<= tol * max(1, |ritz|)`.
    /// Zero disables early stopping.
    pub tol: f64,
    pub extreme: Extreme,
    /// Solve the tridiagonal eigenproblem every this many steps.
    pub check_every: usize,
    pub want_vector: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_iters: 200,
            tol: 1e-10,
            extreme: Extreme::Smallest,
            check_every: 10,
            want_vector: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    /// Target Ritz value.
    pub value: f64,
    /// Ritz vector for `value`, if requested.
    pub vector: Option<Vec<f64>>,
    /// All Ritz values of the final tridiagonal matrix, ascending.
    pub ritz_values: Vec<f64>,
    pub iterations: usize,
    /// Residual norm estimate of the target Ritz pair.
    pub residual: f64,
    pub converged: bool,
    /// Number of breakdowns recovered with a fresh start vector.
    pub breakdowns: usize,
    /// The Krylov basis spans the whole deflated space, so the Ritz values are exact.
    pub exhausted: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Subtract the components along `deflate` and `basis`; two classical
/// Gram-Schmidt passes.
fn orthogonalize(w: &mut [f64], deflate: &[Vec<f64>], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in deflate.iter().chain(basis) {
            let c = dot(u, w);
            axpy(-c, u, w);
        }
    }
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Unit-normalize the columns of `vectors` for use as deflation directions.
pub fn orthonormal_deflation(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        orthogonalize(&mut w, &out, &[]);
        let nw = norm(&w);
        if nw > 1e-12 * norm(v).max(1.0) {
            w.iter_mut().for_each(|x| *x /= nw);
            out.push(w);
        }
    }
    out
}

struct Tridiagonal {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn solve_tridiagonal(alpha: &[f64], beta: &[f64]) -> Tridiagonal {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    Tridiagonal { values, vectors }
}

/// Run Lanczos on the operator `matvec` restricted to the orthogonal complement
/// of `deflate` (which must be orthonormal).
pub fn lanczos<F, R>(
    n: usize,
    mut matvec: F,
    deflate: &[Vec<f64>],
    start: Vec<f64>,
    opts: &LanczosOptions,
    rng: &mut R,
) -> LanczosOutcome
where
    F: FnMut(&[f64], &mut [f64]),
    R: Rng + ?Sized,
{
    let dim = n.saturating_sub(deflate.len());
    let max_iters = opts.max_iters.min(dim).max(1);
    let check_every = opts.check_every.max(1);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut breakdowns = 0;
    let mut exhausted = false;
    let mut scale = 0.0f64;

    let mut q = start;
    orthogonalize(&mut q, deflate, &[]);
    let mut nq = norm(&q);
    let mut attempts = 0;
    while nq == 0.0 || !nq.is_finite() {
        attempts += 1;
        if attempts > 8 || dim == 0 {
            return LanczosOutcome {
                value: f64::NAN,
                vector: None,
                ritz_values: Vec::new(),
                iterations: 0,
                residual: f64::INFINITY,
                converged: false,
                breakdowns,
                exhausted: dim == 0,
            };
        }
        q = random_vector(n, rng);
        orthogonalize(&mut q, deflate, &[]);
        nq = norm(&q);
    }
    q.iter_mut().for_each(|v| *v /= nq);

    let mut w = vec![0.0; n];
    let mut last: Option<(Tridiagonal, usize, f64)> = None;
    let mut converged = false;

    for _ in 0..max_iters {
        matvec(&q, &mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(std::mem::replace(&mut q, Vec::new()));
        alpha.push(a);
        orthogonalize(&mut w, deflate, &basis);
        let mut b = norm(&w);
        scale = scale.max(a.abs()).max(b);

        let k = alpha.len();
        let breakdown = b <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        let done = k == max_iters;

        if breakdown && !done {
            // Invariant subspace: restart from a fresh direction orthogonal to
            // the basis, leaving a zero off-diagonal in T.
            let mut fresh = None;
            for _ in 0..8 {
                let mut r = random_vector(n, rng);
                let raw = norm(&r);
                orthogonalize(&mut r, deflate, &basis);
                let nr = norm(&r);
                if nr > 1e-8 * raw {
                    r.iter_mut().for_each(|v| *v /= nr);
                    fresh = Some(r);
                    break;
                }
            }
            match fresh {
                Some(r) => {
                    breakdowns += 1;
                    beta.push(0.0);
                    q = r;
                    continue;
                }
                None => {
                    exhausted = true;
                    b = 0.0;
                }
            }
        }
        if breakdown && k == dim {
            exhausted = true;
            b = 0.0;
        }

        let finished = exhausted || done;
        if finished || (k % check_every == 0 && breakdowns == 0 && opts.tol > 0.0) {
            let tri = solve_tridiagonal(&alpha, &beta);
            let target = match opts.extreme {
                Extreme::Smallest => 0,
                Extreme::Largest => k - 1,
            };
            let theta = tri.values[target];
            let residual = b * tri.vectors[(k - 1, target)].abs();
            let ok = exhausted || (opts.tol > 0.0 && residual <= opts.tol * theta.abs().max(1.0));
            last = Some((tri, target, residual));
            if ok || finished {
                converged = ok;
                break;
            }
        }
        w.iter_mut().for_each(|v| *v /= b);
        beta.push(b);
        q = std::mem::replace(&mut w, vec![0.0; n]);
    }

    let (tri, target, residual) = last.expect("loop always records a final tridiagonal solve");
    let value = tri.values[target];
    let vector = opts.want_vector.then(|| {
        let mut y = vec![0.0; n];
        for (j, qj) in basis.iter().enumerate() {
            axpy(tri.vectors[(j, target)], qj, &mut y);
        }
        y
    });
    LanczosOutcome {
        value,
        vector,
        ritz_values: tri.values,
        iterations: alpha.len(),
        residual,
        converged,
        breakdowns,
        exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_op(d: Vec<f64>) -> impl FnMut(&[f64], &mut [f64]) {
        move |v, out| {
            for i in 0..v.len() {
                out[i] = d[i] * v[i];
            }
        }
    }

    #[test]
    fn diagonal_extremes() {
        let n = 50;
        let d: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = random_vector(n, &mut rng);
        let opts = LanczosOptions {
            max_iters: 50,
            ..Default::default()
        };
        let out = lanczos(n, diag_op(d.clone()), &[], start.clone(), &opts, &mut rng);
        assert!((out.value - 1.0).abs() < 1e-9, "{}", out.value);
        let opts = LanczosOptions {
            extreme: Extreme::Largest,
            want_vector: true,
            ..opts
        };
        let out = lanczos(n, diag_op(d), &[], start, &opts, &mut rng);
        assert!((out.value - n as f64).abs() < 1e-9);
        let v = out.vector.unwrap();
        assert!((v[n - 1].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deflation_removes_direction() {
        let n = 10;
        let mut d = vec![5.0; n];
        d[3] = -100.0;
        let mut e3 = vec![0.0; n];
        e3[3] = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let start = random_vector(n, &mut rng);
        let out = lanczos(n, diag_op(d), &[e3], start, &LanczosOptions::default(), &mut rng);
        assert!((out.value - 5.0).abs() < 1e-10);
        assert!(out.exhausted || out.converged);
    }

    #[test]
    fn breakdown_recovers_and_exhausts() {
        // Start vector inside an invariant subspace of a 2-level spectrum.
        let n = 6;
        let d = vec![1.0, 1.0, 1.0, 7.0, 7.0, 7.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let start = vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        let opts = LanczosOptions {
            max_iters: 6,
            ..Default::default()
        };
        let out = lanczos(n, diag_op(d), &[], start, &opts, &mut rng);
        assert!(out.breakdowns >= 1);
        assert!((out.value - 1.0).abs() < 1e-12);
    }
}
