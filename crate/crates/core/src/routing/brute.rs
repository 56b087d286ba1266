use super::{CostMatrix, is_permutation};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_NODES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteMode {
    Tour { depot: usize },
    Path { origin: usize, destination: usize },
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Exhaustive optimum. Among equal-cost sequences the lexicographically
/// smallest is returned. Returns the node order and its cost.
pub fn brute_force(costs: &CostMatrix, mode: BruteMode) -> Result<(Vec<usize>, f64)> {
    let n = costs.len();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            got: n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    costs.ensure_finite()?;
    let (head, tail) = match mode {
        BruteMode::Tour { depot } => (depot, None),
        BruteMode::Path { origin, destination } => {
            if origin == destination && n > 1 {
                return Err(Error::InvalidArgument("origin equals destination".into()));
            }
            (origin, (n > 1).then_some(destination))
        }
    };
    if head >= n || tail.is_some_and(|t| t >= n) {
        return Err(Error::InvalidArgument("endpoint outside the matrix".into()));
    }
    let mut middle: Vec<usize> = (0..n).filter(|&v| v != head && Some(v) != tail).collect();
    let evaluate = |middle: &[usize], buf: &mut Vec<usize>| {
        buf.clear();
        buf.push(head);
        buf.extend_from_slice(middle);
        if let Some(t) = tail {
            buf.push(t);
        }
        match mode {
            BruteMode::Tour { .. } => costs.tour_cost(buf),
            BruteMode::Path { .. } => costs.path_cost(buf),
        }
    };
    let mut buf = Vec::with_capacity(n);
    let mut best_cost = evaluate(&middle, &mut buf);
    let mut best = buf.clone();
    while next_permutation(&mut middle) {
        let c = evaluate(&middle, &mut buf);
        if c < best_cost - 1e-12 * best_cost.abs().max(1.0) {
            best_cost = c;
            best.clone_from(&buf);
        }
    }
    debug_assert!(is_permutation(&best, n));
    Ok((best, best_cost))
}
