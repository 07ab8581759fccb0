//! Exhaustive ground truth for small graphs.
//!
//! Objective values here are computed from the edge list (bitmask popcounts) or
//! from a locally built dense `B`, never through the sparse operators in
//! [`crate::linops`], so they can be used to check those.

use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::linops::SignedAdjacency;
use crate::model::{Graph, Partition};

/// Largest `n` for exhaustive bisection enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 24;
/// Largest `n` for the all-sign-vectors identity check.
pub const IDENTITY_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForce {
    pub opt_value: i64,
    pub num_optima: usize,
    /// Maximizers with first label +1.
    pub optima: Vec<Partition>,
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(PccError::TooLarge { n, limit })
    } else {
        Ok(())
    }
}

fn neighbor_masks(graph: &Graph) -> Vec<u32> {
    let mut adj = vec![0u32; graph.n()];
    for &(a, b) in graph.edges() {
        adj[a as usize] |= 1 << b;
        adj[b as usize] |= 1 << a;
    }
    adj
}

/// `xᵀBx` for the labelling with +1 exactly on the bits of `mask`:
/// `4 Σ_{ij ∈ E} xᵢxⱼ - (Σx)² + n`.
fn objective_from_mask(adj: &[u32], m: usize, mask: u32) -> i64 {
    let n = adj.len();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let plus = mask & full;
    let minus = !mask & full;
    let mut same2 = 0i64;
    for (i, &a) in adj.iter().enumerate() {
        let side = if plus >> i & 1 == 1 { plus } else { minus };
        same2 += (a & side).count_ones() as i64;
    }
    let same = same2 / 2;
    let sum = 2 * plus.count_ones() as i64 - n as i64;
    4 * (2 * same - m as i64) - sum * sum + n as i64
}

/// Next integer with the same popcount (Gosper's hack).
fn next_combination(v: u32) -> Option<u32> {
    let t = v | v.wrapping_sub(1);
    let shifted = (!t & t.wrapping_add(1)).wrapping_sub(1) >> (v.trailing_zeros() + 1);
    t.checked_add(1).map(|u| u | shifted)
}

/// Exact maximum of `xᵀBx` over balanced labellings, with every maximizer.
pub fn brute_force_bisection(graph: &Graph) -> Result<BruteForce> {
    let n = graph.n();
    guard(n, BRUTE_FORCE_LIMIT)?;
    if n < 2 || n % 2 != 0 {
        return Err(PccError::OddN(n));
    }
    let adj = neighbor_masks(graph);
    let m = graph.num_edges();
    // Vertex 0 is always +1; choose n/2 - 1 more among vertices 1..n.
    let free = n - 1;
    let k = n / 2 - 1;
    let mut best = i64::MIN;
    let mut optima = Vec::new();
    let mut comb: u32 = if k == 0 { 0 } else { (1u32 << k) - 1 };
    loop {
        let mask = 1 | comb << 1;
        let value = objective_from_mask(&adj, m, mask);
        if value > best {
            best = value;
            optima.clear();
        }
        if value == best {
            optima.push(mask);
        }
        if k == 0 {
            break;
        }
        match next_combination(comb) {
            Some(next) if next < 1u32 << free => comb = next,
            _ => break,
        }
    }
    let optima: Vec<Partition> = optima
        .into_iter()
        .map(|mask| Partition::from_mask(n, mask as u64))
        .collect();
    Ok(BruteForce {
        opt_value: best,
        num_optima: optima.len(),
        optima,
    })
}

/// True iff `x` is, up to global sign, the only maximizer.
pub fn uniqueness_witness(graph: &Graph, x: &Partition) -> Result<bool> {
    let bf = brute_force_bisection(graph)?;
    Ok(bf.optima.len() == 1 && bf.optima[0].eq_up_to_sign(x))
}

fn dense_b(graph: &Graph) -> Vec<Vec<i64>> {
    let n = graph.n();
    let mut b = vec![vec![-1i64; n]; n];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(i, j) in graph.edges() {
        b[i as usize][j as usize] = 1;
        b[j as usize][i as usize] = 1;
    }
    b
}

fn quad(mat: &[Vec<i64>], x: &[i64]) -> i64 {
    mat.iter()
        .zip(x)
        .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, b)| a * b).sum::<i64>())
        .sum()
}

/// For every `x ∈ {±1}ⁿ`, check in integers that
/// `x♮ᵀBx♮ - xᵀBx = xᵀ(D - B)ᵀx + Σᵢ dᵢ(1 - xᵢ²) = xᵀ(D - B)x`,
/// with `D` from [`SignedAdjacency::build_dual_diagonal`].
pub fn exhaustive_identity_check(graph: &Graph, x_nat: &Partition) -> Result<bool> {
    guard(graph.n(), IDENTITY_LIMIT)?;
    let d = SignedAdjacency::from_graph(graph).build_dual_diagonal(x_nat)?;
    exhaustive_identity_check_with_dual(graph, x_nat, d.values())
}

/// [`exhaustive_identity_check`] against an arbitrary diagonal `d`.
pub fn exhaustive_identity_check_with_dual(
    graph: &Graph,
    x_nat: &Partition,
    d: &[i64],
) -> Result<bool> {
    let n = graph.n();
    guard(n, IDENTITY_LIMIT)?;
    for len in [x_nat.len(), d.len()] {
        if len != n {
            return Err(PccError::DimensionMismatch { expected: n, got: len });
        }
    }
    let b = dense_b(graph);
    let m: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { d[i] } else { 0 } - b[i][j])
                .collect()
        })
        .collect();
    let mt: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect();
    let nat = x_nat.to_i64();
    let nat_value = quad(&b, &nat);
    for mask in 0u64..1 << n {
        let x = Partition::from_mask(n, mask).to_i64();
        let lhs = nat_value - quad(&b, &x);
        let slack: i64 = d.iter().zip(&x).map(|(di, xi)| di * (1 - xi * xi)).sum();
        let first = quad(&mt, &x) + slack;
        let second = quad(&m, &x);
        if slack != 0 || lhs != first || lhs != second {
            return Ok(false);
        }
    }
    Ok(true)
}
