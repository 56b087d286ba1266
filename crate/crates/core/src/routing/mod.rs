//! Single-vehicle sequencing over an abstract cost matrix.
//!
//! Nodes are `0..n`. Ties are broken by node index everywhere, so callers
//! that index nodes in identifier order get lexicographic tie-breaking.

mod brute;
mod improve;
mod savings;

pub use brute::{brute_force, BruteMode, BRUTE_FORCE_MAX_NODES};
pub use improve::{two_opt_path, two_opt_tour};
pub use savings::{savings_path, savings_tour};

use crate::error::{Error, Result};
use crate::model::TravelTimeMatrix;

/// Square matrix of nonnegative arc costs, possibly asymmetric. Entries may
/// be `+inf` to mark missing arcs; solvers reject those.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_flat(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidCosts(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if let Some(v) = data.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::InvalidCosts(format!("entry {v} is not a nonnegative cost")));
        }
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCosts("matrix is not square".into()));
        }
        Self::from_flat(n, rows.concat())
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(if i == j { 0.0 } else { f(i, j) });
            }
        }
        Self::from_flat(n, data)
    }

    /// Restriction to `nodes`; node `k` of the result is `nodes[k]`.
    pub fn from_times_subset(times: &TravelTimeMatrix, nodes: &[usize]) -> Self {
        let n = nodes.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in nodes {
            for &j in nodes {
                data.push(times.get(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_times(times: &TravelTimeMatrix) -> Self {
        Self {
            n: times.len(),
            data: times.as_slice().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.n + to]
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::InvalidCosts(format!(
                "arc {} -> {} is disconnected",
                k / self.n,
                k % self.n
            ))),
            None => Ok(()),
        }
    }

    /// Cost of traversing `order` without returning.
    pub fn path_cost(&self, order: &[usize]) -> f64 {
        order.windows(2).map(|w| self.get(w[0], w[1])).sum()
    }

    /// Cost of traversing `order` and returning to its first node.
    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        match (order.first(), order.last()) {
            (Some(&first), Some(&last)) if order.len() > 1 => self.path_cost(order) + self.get(last, first),
            _ => 0.0,
        }
    }
}

/// Closed tour starting at its depot; the return arc is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    pub fn cost(&self, costs: &CostMatrix) -> f64 {
        costs.tour_cost(&self.order)
    }
}

/// Open Hamiltonian path with fixed first and last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub order: Vec<usize>,
}

impl Path {
    pub fn cost(&self, costs: &CostMatrix) -> f64 {
        costs.path_cost(&self.order)
    }
}

/// True when `order` visits each of `0..n` exactly once.
pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}
