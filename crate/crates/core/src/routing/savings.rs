//! Clarke-Wright savings for one uncapacitated vehicle.

use super::{CostMatrix, Path, Tour};
use crate::error::{Error, Result};

/// Merges `nodes` into one directed chain. `to_depot(i)` and `from_depot(j)`
/// are the depot arcs; the saving of appending `j` after `i` is
/// `to_depot(i) + from_depot(j) - cost(i, j)`. Arcs rejected by `allowed`
/// are never used.
fn merge_by_savings(
    nodes: &[usize],
    to_depot: impl Fn(usize) -> f64,
    from_depot: impl Fn(usize) -> f64,
    cost: impl Fn(usize, usize) -> f64,
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    if nodes.len() <= 1 {
        return nodes.to_vec();
    }
    let mut savings = Vec::with_capacity(nodes.len() * (nodes.len() - 1));
    for &i in nodes {
        for &j in nodes {
            if i != j && allowed(i, j) {
                savings.push((to_depot(i) + from_depot(j) - cost(i, j), i, j));
            }
        }
    }
    savings.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let size = nodes.iter().copied().max().unwrap_or(0) + 1;
    let mut succ: Vec<Option<usize>> = vec![None; size];
    let mut pred: Vec<Option<usize>> = vec![None; size];
    // for a fragment endpoint, the opposite endpoint
    let mut other_end: Vec<usize> = (0..size).collect();
    let mut merges_left = nodes.len() - 1;

    for &(_, i, j) in &savings {
        if merges_left == 0 {
            break;
        }
        if succ[i].is_some() || pred[j].is_some() || other_end[i] == j {
            continue;
        }
        let head = other_end[i];
        let tail = other_end[j];
        succ[i] = Some(j);
        pred[j] = Some(i);
        other_end[head] = tail;
        other_end[tail] = head;
        merges_left -= 1;
    }
    debug_assert_eq!(merges_left, 0, "a feasible tail/head pair is always offered");

    let start = *nodes.iter().find(|&&v| pred[v].is_none()).expect("chain has a head");
    let mut chain = Vec::with_capacity(nodes.len());
    let mut cur = Some(start);
    while let Some(v) = cur {
        chain.push(v);
        cur = succ[v];
    }
    chain
}

/// Savings tour from `depot` over every node of `costs`.
pub fn savings_tour(costs: &CostMatrix, depot: usize) -> Result<Tour> {
    let n = costs.len();
    if depot >= n {
        return Err(Error::InvalidArgument(format!("depot {depot} outside a {n}-node matrix")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("a tour needs at least one non-depot node".into()));
    }
    costs.ensure_finite()?;
    let nodes: Vec<usize> = (0..n).filter(|&v| v != depot).collect();
    let chain = merge_by_savings(
        &nodes,
        |i| costs.get(i, depot),
        |j| costs.get(depot, j),
        |i, j| costs.get(i, j),
        |_, _| true,
    );
    let mut order = Vec::with_capacity(n);
    order.push(depot);
    order.extend(chain);
    Ok(Tour { order })
}

/// Savings Hamiltonian path from `origin` to `destination` over every node.
///
/// Three savings constructions are run and the cheapest path is kept (ties
/// in the order listed):
/// - origin and destination merged into one virtual depot, leaving through
///   the origin's outbound arcs and returning through the destination's
///   inbound arcs;
/// - the origin as depot, with the destination forbidden a successor, so the
///   tour closes with the fixed arc destination -> origin;
/// - the destination as depot, with the origin forbidden a predecessor.
pub fn savings_path(costs: &CostMatrix, origin: usize, destination: usize) -> Result<Path> {
    let n = costs.len();
    if origin >= n || destination >= n {
        return Err(Error::InvalidArgument("path endpoints outside the matrix".into()));
    }
    if origin == destination {
        if n == 1 {
            return Ok(Path { order: vec![origin] });
        }
        return Err(Error::InvalidArgument("origin equals destination in a multi-node path".into()));
    }
    costs.ensure_finite()?;
    let (o, d) = (origin, destination);
    let c = |i: usize, j: usize| costs.get(i, j);

    let interior: Vec<usize> = (0..n).filter(|&v| v != o && v != d).collect();
    let chain = merge_by_savings(&interior, |i| c(i, d), |j| c(o, j), c, |_, _| true);
    let mut contracted = Vec::with_capacity(n);
    contracted.push(o);
    contracted.extend(chain);
    contracted.push(d);

    let without_o: Vec<usize> = (0..n).filter(|&v| v != o).collect();
    let mut from_origin = Vec::with_capacity(n);
    from_origin.push(o);
    from_origin.extend(merge_by_savings(&without_o, |i| c(i, o), |j| c(o, j), c, |i, _| i != d));

    let without_d: Vec<usize> = (0..n).filter(|&v| v != d).collect();
    let mut to_destination = merge_by_savings(&without_d, |i| c(i, d), |j| c(d, j), c, |_, j| j != o);
    to_destination.push(d);

    let best = [contracted, from_origin, to_destination]
        .into_iter()
        .map(|order| (costs.path_cost(&order), order))
        .reduce(|best, cand| if cand.0 < best.0 { cand } else { best })
        .expect("three candidates");
    debug_assert!(best.1.first() == Some(&o) && best.1.last() == Some(&d));
    Ok(Path { order: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::{brute_force, is_permutation, BruteMode};

    fn line(xs: &[f64]) -> CostMatrix {
        CostMatrix::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs()).unwrap()
    }

    #[test]
    fn single_node_tour() {
        let c = line(&[0.0, 3.0]);
        assert_eq!(savings_tour(&c, 0).unwrap().order, vec![0, 1]);
        assert!(savings_tour(&line(&[0.0]), 0).is_err());
    }

    #[test]
    fn collinear_tour_is_monotone_sweep_and_optimal() {
        let c = line(&[0.0, 1.0, 2.0, 3.0]);
        let tour = savings_tour(&c, 0).unwrap();
        let best = brute_force(&c, BruteMode::Tour { depot: 0 }).unwrap();
        assert_eq!(tour.cost(&c), best.1);
        assert!(tour.order == vec![0, 1, 2, 3] || tour.order == vec![0, 3, 2, 1]);
    }

    #[test]
    fn two_node_path() {
        let c = line(&[0.0, 5.0]);
        assert_eq!(savings_path(&c, 0, 1).unwrap().order, vec![0, 1]);
        assert_eq!(savings_path(&c, 1, 0).unwrap().order, vec![1, 0]);
    }

    #[test]
    fn path_endpoint_rules() {
        let c = line(&[0.0, 1.0, 2.0]);
        assert!(savings_path(&c, 1, 1).is_err());
        assert_eq!(savings_path(&line(&[0.0]), 0, 0).unwrap().order, vec![0]);
    }

    #[test]
    fn collinear_path_matches_brute_force() {
        let xs = [0.0, 4.0, 1.0, 2.0, 3.0];
        let c = line(&xs);
        let path = savings_path(&c, 0, 1).unwrap();
        let best = brute_force(&c, BruteMode::Path { origin: 0, destination: 1 }).unwrap();
        assert_eq!(path.cost(&c), best.1);
        assert_eq!(path.order, vec![0, 2, 3, 4, 1]);
    }

    #[test]
    fn disconnected_costs_rejected() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0, f64::INFINITY], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        assert!(savings_tour(&c, 0).is_err());
        assert!(savings_path(&c, 0, 1).is_err());
    }

    #[test]
    fn asymmetric_outputs_are_permutations() {
        let c = CostMatrix::from_fn(6, |i, j| ((i * 7 + j * 3) % 11) as f64 + 1.0).unwrap();
        for d in 0..6 {
            let t = savings_tour(&c, d).unwrap();
            assert!(is_permutation(&t.order, 6));
            assert_eq!(t.order[0], d);
        }
        let p = savings_path(&c, 2, 4).unwrap();
        assert!(is_permutation(&p.order, 6));
        assert_eq!((p.order[0], p.order[5]), (2, 4));
    }
}
