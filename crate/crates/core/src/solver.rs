//! Fast candidate recovery: spectral rounding followed by greedy swap refinement.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::lanczos::{self, Extreme, LanczosOptions};
use crate::linops::SignedAdjacency;
use crate::model::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lanczos_iters: usize,
    pub refine_passes: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lanczos_iters: 300,
            refine_passes: 50,
            seed: 0,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub lanczos_iterations: usize,
    pub ritz_value: f64,
    pub residual: f64,
    /// False when the eigenvector residual stayed above `tol`; the candidate is
    /// still returned.
    pub converged: bool,
    pub balance_moves: usize,
    pub swaps: usize,
    pub passes: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub partition: Partition,
    pub meta: SolverMeta,
}

/// Round a real vector by sign (zeros go to +1) and move the smallest-magnitude
/// vertices off the larger side until both sides have `n / 2` vertices.
pub fn round_balanced(v: &[f64]) -> (Partition, usize) {
    let n = v.len();
    let mut labels: Vec<i8> = v.iter().map(|&x| if x >= 0.0 { 1 } else { -1 }).collect();
    let plus = labels.iter().filter(|&&l| l == 1).count();
    let (from, excess) = if plus > n / 2 {
        (1i8, plus - n / 2)
    } else {
        (-1i8, n / 2 - plus)
    };
    let mut movable: Vec<usize> = (0..n).filter(|&i| labels[i] == from).collect();
    movable.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(a.cmp(&b)));
    for &i in movable.iter().take(excess) {
        labels[i] = -from;
    }
    (Partition::new(labels).expect("labels are ±1"), excess)
}

/// Leading eigenvector of `B` on the complement of the all-ones vector, rounded
/// to a balanced partition.
pub fn spectral_candidate(b: &SignedAdjacency, cfg: &SolverConfig) -> Result<SolveOutcome> {
    let n = b.n();
    if n % 2 != 0 || n == 0 {
        return Err(PccError::OddN(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let deflate = lanczos::orthonormal_deflation(&[vec![1.0; n]]);
    let start = lanczos::random_vector(n, &mut rng);
    let opts = LanczosOptions {
        max_iters: cfg.lanczos_iters,
        tol: cfg.tol,
        extreme: Extreme::Largest,
        check_every: 5,
        want_vector: true,
    };
    let out = lanczos::lanczos(
        n,
        |v, w| b.b_matvec_into(v, w).expect("dimensions fixed"),
        &deflate,
        start,
        &opts,
        &mut rng,
    );
    let vector = out.vector.unwrap_or_else(|| vec![0.0; n]);
    let (partition, balance_moves) = round_balanced(&vector);
    Ok(SolveOutcome {
        partition,
        meta: SolverMeta {
            lanczos_iterations: out.iterations,
            ritz_value: out.value,
            residual: out.residual,
            converged: out.converged,
            balance_moves,
            ..Default::default()
        },
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefineStats {
    pub swaps: usize,
    pub passes: usize,
    /// `xᵀBx` of the refined partition.
    pub objective: i64,
}

/// Greedy swap refinement.
///
/// Swapping `i` (label +1) with `j` (label -1) changes `xᵀBx` by
/// `-4 (dᵢ + dⱼ) - 8 Bᵢⱼ` where `d = x ∘ Bx`. Each pass applies the best
/// strictly improving swap among vertices not yet moved in that pass until none
/// is left; passes repeat until one makes no swap or `refine_passes` is reached.
pub fn refine(
    b: &SignedAdjacency,
    x: &Partition,
    cfg: &SolverConfig,
) -> Result<(Partition, RefineStats)> {
    let n = b.n();
    if x.len() != n {
        return Err(PccError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if !x.is_balanced() {
        return Err(PccError::Unbalanced(x.balance()));
    }
    let mut x = x.clone();
    let mut labels = x.to_i64();
    let mut g = b.b_matvec_i64(&labels)?;
    let mut objective: i64 = labels.iter().zip(&g).map(|(a, c)| a * c).sum();
    let dval = |labels: &[i64], g: &[i64], k: usize| labels[k] * g[k];

    let mut stats = RefineStats::default();
    for _ in 0..cfg.refine_passes {
        stats.passes += 1;
        let mut plus = BTreeSet::new();
        let mut minus = BTreeSet::new();
        for k in 0..n {
            let entry = (dval(&labels, &g, k), k);
            if labels[k] == 1 {
                plus.insert(entry);
            } else {
                minus.insert(entry);
            }
        }
        let mut locked = vec![false; n];
        let mut swapped = 0;
        loop {
            // Minimize dᵢ + dⱼ + 2Bᵢⱼ; only strictly negative values improve.
            let mut best: Option<(usize, usize)> = None;
            let mut best_val = 0i64;
            let Some(&(d_min_minus, _)) = minus.first() else {
                break;
            };
            for &(di, i) in &plus {
                if di + d_min_minus - 2 >= best_val {
                    break;
                }
                for &(dj, j) in &minus {
                    if di + dj - 2 >= best_val {
                        break;
                    }
                    let val = di + dj + 2 * b.entry(i, j);
                    if val < best_val {
                        best_val = val;
                        best = Some((i, j));
                    }
                }
            }
            let Some((i, j)) = best else { break };

            let mut touched: Vec<usize> = vec![i, j];
            touched.extend(b.neighbors(i).iter().map(|&k| k as usize));
            touched.extend(b.neighbors(j).iter().map(|&k| k as usize));
            touched.sort_unstable();
            touched.dedup();
            for &k in &touched {
                let entry = (dval(&labels, &g, k), k);
                if labels[k] == 1 {
                    plus.remove(&entry);
                } else {
                    minus.remove(&entry);
                }
            }
            // δ = -2xᵢeᵢ - 2xⱼeⱼ sums to zero, so Bδ = 2Aδ + δ.
            let (di, dj) = (-2 * labels[i], -2 * labels[j]);
            for &k in b.neighbors(i) {
                g[k as usize] += 2 * di;
            }
            for &k in b.neighbors(j) {
                g[k as usize] += 2 * dj;
            }
            g[i] += di;
            g[j] += dj;
            labels[i] = -labels[i];
            labels[j] = -labels[j];
            x.swap(i, j);
            objective -= 4 * best_val;
            locked[i] = true;
            locked[j] = true;
            for &k in &touched {
                if locked[k] {
                    continue;
                }
                let entry = (dval(&labels, &g, k), k);
                if labels[k] == 1 {
                    plus.insert(entry);
                } else {
                    minus.insert(entry);
                }
            }
            swapped += 1;
        }
        stats.swaps += swapped;
        if swapped == 0 {
            break;
        }
    }
    stats.objective = objective;
    Ok((x, stats))
}

/// Spectral candidate followed by refinement.
pub fn solve(b: &SignedAdjacency, cfg: &SolverConfig) -> Result<SolveOutcome> {
    let mut out = spectral_candidate(b, cfg)?;
    let (partition, stats) = refine(b, &out.partition, cfg)?;
    out.partition = partition;
    out.meta.swaps = stats.swaps;
    out.meta.passes = stats.passes;
    Ok(out)
}
