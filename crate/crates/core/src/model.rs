//! Two-community stochastic block model: parameters, partitions and seeded sampling.
//!
//! Sampling is reproducible and parallel. Every random draw comes from a
//! ChaCha8 stream keyed by the instance seed: stream 0 picks the planted
//! partition, stream `i + 1` generates the edges `(i, j)` with `j > i`. Within a
//! row, edges are drawn by geometric skipping over the same-side and
//! opposite-side suffixes, which is distributionally identical to one Bernoulli
//! trial per pair but costs O(degree) instead of O(n).

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};

/// Validated SBM parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// How edge probabilities are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamMode {
    Direct { p: f64, q: f64 },
    /// `p = alpha * ln(n) / n`, `q = beta * ln(n) / n`.
    LogScale { alpha: f64, beta: f64 },
}

pub fn make_params(n: usize, mode: ParamMode) -> Result<SbmParams> {
    if n < 4 || n % 2 != 0 {
        return Err(PccError::OddN(n));
    }
    let (p, q, alpha, beta) = match mode {
        ParamMode::Direct { p, q } => (p, q, None, None),
        ParamMode::LogScale { alpha, beta } => {
            let scale = (n as f64).ln() / n as f64;
            (alpha * scale, beta * scale, Some(alpha), Some(beta))
        }
    };
    for (name, value) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(PccError::OutOfRange { name, value });
        }
    }
    if q >= p {
        return Err(PccError::Degenerate { p, q });
    }
    Ok(SbmParams {
        n,
        p,
        q,
        alpha,
        beta,
    })
}

impl SbmParams {
    /// Re-run the full validation of [`make_params`], e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        make_params(self.n, ParamMode::Direct { p: self.p, q: self.q }).map(|_| ())
    }

    /// Parity and range checks only. Sampling also accepts `q >= p`, which
    /// covers null models such as the empty graph (`p = q = 0`).
    pub fn validate_for_sampling(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(PccError::OddN(self.n));
        }
        for (name, value) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(PccError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    /// Direct parameters without the `q < p` requirement; see [`Self::validate_for_sampling`].
    pub fn unchecked(n: usize, p: f64, q: f64) -> Result<Self> {
        let params = SbmParams {
            n,
            p,
            q,
            alpha: None,
            beta: None,
        };
        params.validate_for_sampling()?;
        Ok(params)
    }

    /// `sqrt(alpha) - sqrt(beta) > sqrt(2)`, when the log-scale parameters are known.
    pub fn above_exact_recovery_threshold(&self) -> Option<bool> {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => Some(a.sqrt() - b.sqrt() > 2f64.sqrt()),
            _ => None,
        }
    }
}

/// A ±1 labelling of the vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Partition(Vec<i8>);

impl Partition {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        if let Some(index) = labels.iter().position(|&l| l != 1 && l != -1) {
            return Err(PccError::NonBinary {
                index,
                value: labels[index] as i64,
            });
        }
        Ok(Partition(labels))
    }

    pub fn from_i64(labels: &[i64]) -> Result<Self> {
        labels
            .iter()
            .enumerate()
            .map(|(index, &value)| match value {
                1 => Ok(1i8),
                -1 => Ok(-1i8),
                _ => Err(PccError::NonBinary { index, value }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Partition)
    }

    /// Label +1 for every vertex whose bit is set in `mask`, -1 otherwise.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Partition(
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    /// Σ xᵢ.
    pub fn balance(&self) -> i64 {
        self.0.iter().map(|&l| l as i64).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.balance() == 0
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&l| l as i64).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&l| l as f64).collect()
    }

    pub fn negated(&self) -> Self {
        Partition(self.0.iter().map(|&l| -l).collect())
    }

    /// Flip the global sign so that the first label is +1.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(-1) => self.negated(),
            _ => self.clone(),
        }
    }

    pub fn eq_up_to_sign(&self, other: &Partition) -> bool {
        self.len() == other.len()
            && (self.0 == other.0 || self.0.iter().zip(&other.0).all(|(a, b)| *a == -*b))
    }

    /// Exchange the labels of vertices `i` and `j`.
    pub fn swap(&mut self, i: usize, j: usize) {
        self.0.swap(i, j);
    }
}

impl TryFrom<Vec<i64>> for Partition {
    type Error = PccError;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Partition::from_i64(&v)
    }
}

impl From<Partition> for Vec<i64> {
    fn from(p: Partition) -> Self {
        p.to_i64()
    }
}

/// Undirected simple graph as a lexicographically sorted list of pairs `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    /// Build from an arbitrary edge list; endpoints are ordered and the list is
    /// sorted. Self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b || a >= n || b >= n || n > u32::MAX as usize {
                return Err(PccError::InvalidEdge(a, b));
            }
            out.push((a.min(b) as u32, a.max(b) as u32));
        }
        out.sort_unstable();
        if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
            return Err(PccError::InvalidEdge(w[0].0 as usize, w[0].1 as usize));
        }
        Ok(Graph { n, edges: out })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Check the simple-graph invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= b || b as usize >= self.n {
                return Err(PccError::InvalidEdge(a as usize, b as usize));
            }
            if k > 0 && self.edges[k - 1] >= (a, b) {
                return Err(PccError::InvalidEdge(a as usize, b as usize));
            }
        }
        Ok(())
    }
}

/// A sampled graph with its planted partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(flatten)]
    pub graph: Graph,
    pub hidden: Partition,
    pub seed: u64,
    pub params: SbmParams,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Append every element of `pool` that survives an independent coin with
/// success probability `prob`.
fn bernoulli_subset(pool: &[u32], prob: f64, rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
    if pool.is_empty() || prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        out.extend_from_slice(pool);
        return;
    }
    let skip = Geometric::new(prob).expect("probability in (0, 1)");
    let mut idx = skip.sample(rng);
    while idx < pool.len() as u64 {
        out.push(pool[idx as usize]);
        idx = idx.saturating_add(1 + skip.sample(rng));
    }
}

/// Draw a planted balanced partition and an SBM graph; deterministic in `(params, seed)`.
pub fn sample_instance(params: &SbmParams, seed: u64) -> Result<Instance> {
    params.validate_for_sampling()?;
    let n = params.n;

    let mut labels = vec![-1i8; n];
    let mut rng = stream_rng(seed, 0);
    for i in index::sample(&mut rng, n, n / 2) {
        labels[i] = 1;
    }
    let hidden = Partition(labels);

    let plus: Vec<u32> = (0..n as u32).filter(|&i| hidden.get(i as usize) == 1).collect();
    let minus: Vec<u32> = (0..n as u32).filter(|&i| hidden.get(i as usize) == -1).collect();

    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (same, other) = if hidden.get(i) == 1 {
                (&plus, &minus)
            } else {
                (&minus, &plus)
            };
            let after = |side: &Vec<u32>| side.partition_point(|&v| v as usize <= i);
            let mut rng = stream_rng(seed, i as u64 + 1);
            let mut row = Vec::new();
            bernoulli_subset(&same[after(same)..], params.p, &mut rng, &mut row);
            bernoulli_subset(&other[after(other)..], params.q, &mut rng, &mut row);
            row.sort_unstable();
            row
        })
        .collect();

    let mut edges = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    for (i, row) in rows.into_iter().enumerate() {
        edges.extend(row.into_iter().map(|j| (i as u32, j)));
    }

    Ok(Instance {
        graph: Graph { n, edges },
        hidden,
        seed,
        params: *params,
    })
}

/// Uniformly random balanced partition of `n` vertices.
pub fn random_balanced(n: usize, seed: u64) -> Partition {
    let mut labels = vec![-1i8; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in index::sample(&mut rng, n, n / 2) {
        labels[i] = 1;
    }
    Partition(labels)
}
