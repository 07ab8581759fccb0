//! Matrix-free operators for the signed adjacency `B = 2A - (11ᵀ - I)` and the
//! dual slack `M = D - B`.
//!
//! `B` is stored as the sparse neighbor lists of `A`; the rank-one `-11ᵀ` and
//! the `+I` terms are applied analytically, so every product costs O(m + n).
//! Products with ±1 vectors run in `i64` and are exact.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::model::{Graph, Partition};

/// Default largest `n` for which dense `n × n` matrices are assembled.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

/// Environment variable overriding [`DEFAULT_DENSE_THRESHOLD`].
pub const DENSE_THRESHOLD_ENV: &str = "PCC_DENSE_THRESHOLD";

/// Row count above which products are split across the rayon pool. Each row is
/// reduced sequentially, so results do not depend on the thread count.
const PARALLEL_ROWS: usize = 16_384;

pub fn dense_threshold_from_env() -> usize {
    std::env::var(DENSE_THRESHOLD_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_THRESHOLD)
}

/// Implicit signed adjacency matrix of a simple graph.
#[derive(Debug, Clone)]
pub struct SignedAdjacency {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

/// Diagonal of `D_x = diag(x) B diag(x) 1`, i.e. `dᵢ = xᵢ (Bx)ᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualDiagonal(pub Vec<i64>);

impl DualDiagonal {
    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|d| d.abs()).max().unwrap_or(0)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(PccError::DimensionMismatch { expected, got })
    }
}

impl SignedAdjacency {
    pub fn from_graph(graph: &Graph) -> Self {
        let n = graph.n();
        let mut degree = vec![0usize; n];
        for &(a, b) in graph.edges() {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        // Edges are sorted, so each neighbor list comes out sorted.
        for &(a, b) in graph.edges() {
            neighbors[fill[a as usize]] = b;
            fill[a as usize] += 1;
        }
        for &(a, b) in graph.edges() {
            neighbors[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        SignedAdjacency {
            n,
            offsets,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// `B[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        if i == j {
            0
        } else if self.has_edge(i, j) {
            1
        } else {
            -1
        }
    }

    fn for_each_row<T: Send>(&self, out: &mut [T], row: impl Fn(usize) -> T + Sync + Send) {
        if self.n >= PARALLEL_ROWS {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = row(i));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = row(i);
            }
        }
    }

    /// `out = B v`.
    pub fn b_matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n, v.len())?;
        check_len(self.n, out.len())?;
        let total: f64 = v.iter().sum();
        self.for_each_row(out, |i| {
            let adj: f64 = self.neighbors(i).iter().map(|&j| v[j as usize]).sum();
            2.0 * adj - total + v[i]
        });
        Ok(())
    }

    pub fn b_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.b_matvec_into(v, &mut out)?;
        Ok(out)
    }

    /// Exact `B v` for integer `v`.
    pub fn b_matvec_i64(&self, v: &[i64]) -> Result<Vec<i64>> {
        check_len(self.n, v.len())?;
        let total = v
            .iter()
            .try_fold(0i64, |acc, &x| acc.checked_add(x))
            .ok_or(PccError::Overflow)?;
        let mut out = vec![None; self.n];
        self.for_each_row(&mut out, |i| {
            let adj = self
                .neighbors(i)
                .iter()
                .try_fold(0i64, |acc, &j| acc.checked_add(v[j as usize]))?;
            adj.checked_mul(2)?.checked_sub(total)?.checked_add(v[i])
        });
        out.into_iter()
            .map(|o| o.ok_or(PccError::Overflow))
            .collect()
    }

    /// `xᵀBx`, exact. Always even.
    pub fn quad_form(&self, x: &Partition) -> Result<i64> {
        let xi = x.to_i64();
        let bx = self.b_matvec_i64(&xi)?;
        xi.iter()
            .zip(&bx)
            .try_fold(0i64, |acc, (a, b)| acc.checked_add(a * b))
            .ok_or(PccError::Overflow)
    }

    pub fn build_dual_diagonal(&self, x: &Partition) -> Result<DualDiagonal> {
        let xi = x.to_i64();
        let bx = self.b_matvec_i64(&xi)?;
        Ok(DualDiagonal(
            xi.iter().zip(&bx).map(|(a, b)| a * b).collect(),
        ))
    }

    /// `out = (D - B) v`.
    pub fn m_matvec_into(&self, d: &DualDiagonal, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n, d.len())?;
        check_len(self.n, v.len())?;
        check_len(self.n, out.len())?;
        let total: f64 = v.iter().sum();
        let d = d.values();
        self.for_each_row(out, |i| {
            let adj: f64 = self.neighbors(i).iter().map(|&j| v[j as usize]).sum();
            d[i] as f64 * v[i] - (2.0 * adj - total + v[i])
        });
        Ok(())
    }

    pub fn m_matvec(&self, d: &DualDiagonal, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.m_matvec_into(d, v, &mut out)?;
        Ok(out)
    }

    /// Exact `(D - B) v` for integer `v`.
    pub fn m_matvec_i64(&self, d: &DualDiagonal, v: &[i64]) -> Result<Vec<i64>> {
        check_len(self.n, d.len())?;
        let bv = self.b_matvec_i64(v)?;
        d.values()
            .iter()
            .zip(v)
            .zip(&bv)
            .map(|((di, vi), bi)| {
                di.checked_mul(*vi)
                    .and_then(|dv| dv.checked_sub(*bi))
                    .ok_or(PccError::Overflow)
            })
            .collect()
    }

    /// Verify `(D - B) x = 0` exactly; the first nonzero entry is reported.
    pub fn check_kernel(&self, d: &DualDiagonal, x: &Partition) -> Result<()> {
        let mx = self.m_matvec_i64(d, &x.to_i64())?;
        match mx.iter().position(|&v| v != 0) {
            Some(index) => Err(PccError::KernelMismatch {
                index,
                value: mx[index],
            }),
            None => Ok(()),
        }
    }

    /// Dense integer `M = D - B`, refused above `threshold` rows.
    pub fn assemble_dense_m(&self, d: &DualDiagonal, threshold: usize) -> Result<DMatrix<i64>> {
        if self.n > threshold {
            return Err(PccError::TooLarge {
                n: self.n,
                limit: threshold,
            });
        }
        check_len(self.n, d.len())?;
        let mut m = DMatrix::from_element(self.n, self.n, 1i64);
        for i in 0..self.n {
            m[(i, i)] = d.values()[i];
            for &j in self.neighbors(i) {
                m[(i, j as usize)] = -1;
            }
        }
        Ok(m)
    }
}
