//! Exact transport via the transportation simplex (MODI) method.

use std::collections::VecDeque;

use ndarray::Array2;

use super::{check_ids, ground_distance, DocDistribution, TransportConfig};
use crate::embedding::Vectors;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    pub cost: T,
    /// Nonzero `(supply index, demand index, flow)` entries.
    pub flows: Vec<(usize, usize, T)>,
}

struct Basis {
    cells: Vec<(usize, usize)>,
    in_basis: Array2<bool>,
}

/// Minimum-cost transport of `supply` onto `demand` under `cost`.
/// Total supply and demand must agree to within rounding.
pub fn solve_transport<T: Real>(supply: &[T], demand: &[T], cost: &Array2<T>) -> Result<TransportPlan<T>> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty transport problem".into()));
    }
    if cost.dim() != (m, n) {
        return Err(Error::DimensionMismatch { expected: m * n, found: cost.len() });
    }
    let total_s: T = supply.iter().copied().sum();
    let total_d: T = demand.iter().copied().sum();
    let mass_tol = T::of(1e-9).max(T::epsilon() * T::of(64.0)) * total_s.max(T::one());
    if (total_s - total_d).abs() > mass_tol {
        return Err(Error::UnbalancedMass(total_s.to_f64_lossy(), total_d.to_f64_lossy()));
    }

    let mut flow = Array2::<T>::zeros((m, n));
    let mut basis = northwest_corner(supply, demand, &mut flow);

    let max_cost = cost.iter().fold(T::zero(), |a, &c| a.max(c.abs()));
    let tol = T::epsilon() * T::of(1024.0) * max_cost.max(T::one());
    let max_pivots = 200 * m * n + 1000;
    let mut degenerate_run = 0usize;
    let mut bland = false;

    let mut u = vec![T::zero(); m];
    let mut v = vec![T::zero(); n];
    for _ in 0..max_pivots {
        potentials(&basis, cost, &mut u, &mut v, m, n);

        let mut entering: Option<(usize, usize)> = None;
        let mut best = -tol;
        'scan: for i in 0..m {
            for j in 0..n {
                if basis.in_basis[[i, j]] {
                    continue;
                }
                let r = cost[[i, j]] - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let cost_total = basis
                .cells
                .iter()
                .map(|&(i, j)| flow[[i, j]] * cost[[i, j]])
                .fold(T::zero(), |a, x| a + x);
            let flows = basis
                .cells
                .iter()
                .filter(|&&(i, j)| flow[[i, j]] > T::zero())
                .map(|&(i, j)| (i, j, flow[[i, j]]))
                .collect();
            return Ok(TransportPlan { cost: cost_total, flows });
        };

        // Tree path from row node `ei` to column node `ej`; edges alternate -, +, -, ...
        let path = tree_path(&basis, ei, ej, m, n);
        let mut theta = T::infinity();
        let mut leaving = usize::MAX;
        for (k, &b) in path.iter().enumerate().filter(|(k, _)| k % 2 == 0) {
            let (i, j) = basis.cells[b];
            let f = flow[[i, j]];
            let better = f < theta
                || (bland && f == theta && basis.cells[b] < basis.cells[leaving]);
            if better {
                theta = f;
                leaving = b;
            }
            let _ = k;
        }
        for (k, &b) in path.iter().enumerate() {
            let (i, j) = basis.cells[b];
            if k % 2 == 0 {
                flow[[i, j]] -= theta;
            } else {
                flow[[i, j]] += theta;
            }
        }
        let (li, lj) = basis.cells[leaving];
        flow[[li, lj]] = T::zero();
        flow[[ei, ej]] = theta;
        basis.in_basis[[li, lj]] = false;
        basis.in_basis[[ei, ej]] = true;
        basis.cells[leaving] = (ei, ej);

        if theta.is_zero() {
            degenerate_run += 1;
            if degenerate_run > m * n {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }
    Err(Error::NoConvergence(max_pivots))
}

/// Initial basic feasible solution with exactly `m + n - 1` basic cells.
fn northwest_corner<T: Real>(supply: &[T], demand: &[T], flow: &mut Array2<T>) -> Basis {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let mut in_basis = Array2::from_elem((m, n), false);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = if i == m - 1 && j == n - 1 {
            s[i].max(T::zero())
        } else {
            s[i].min(d[j]).max(T::zero())
        };
        flow[[i, j]] = x;
        cells.push((i, j));
        in_basis[[i, j]] = true;
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Basis { cells, in_basis }
}

fn adjacency(basis: &Basis, m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    // Node ids: rows 0..m, columns m..m+n. Entries are (neighbor, basis index).
    let mut adj = vec![Vec::new(); m + n];
    for (b, &(i, j)) in basis.cells.iter().enumerate() {
        adj[i].push((m + j, b));
        adj[m + j].push((i, b));
    }
    adj
}

fn potentials<T: Real>(basis: &Basis, cost: &Array2<T>, u: &mut [T], v: &mut [T], m: usize, n: usize) {
    let adj = adjacency(basis, m, n);
    let mut seen = vec![false; m + n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    u[0] = T::zero();
    while let Some(node) = queue.pop_front() {
        for &(next, b) in &adj[node] {
            if seen[next] {
                continue;
            }
            let (i, j) = basis.cells[b];
            if next >= m {
                v[j] = cost[[i, j]] - u[i];
            } else {
                u[i] = cost[[i, j]] - v[j];
            }
            seen[next] = true;
            queue.push_back(next);
        }
    }
}

/// Basis indices on the tree path from column `col` back to row `row`.
fn tree_path(basis: &Basis, row: usize, col: usize, m: usize, n: usize) -> Vec<usize> {
    let adj = adjacency(basis, m, n);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    let mut queue = VecDeque::from([row]);
    seen[row] = true;
    while let Some(node) = queue.pop_front() {
        if node == m + col {
            break;
        }
        for &(next, b) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, b));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = m + col;
    while node != row {
        let (prev, b) = parent[node].expect("basis is a spanning tree");
        path.push(b);
        node = prev;
    }
    path
}

/// Exact word mover's distance between two documents.
pub fn exact_wmd<T: Real, V: Vectors<T> + ?Sized>(
    a: &DocDistribution<T>,
    b: &DocDistribution<T>,
    emb: &V,
    cfg: &TransportConfig,
) -> Result<T> {
    check_ids(a, emb)?;
    check_ids(b, emb)?;
    let mut support: Vec<usize> = a.terms().iter().chain(b.terms()).copied().collect();
    support.sort_unstable();
    support.dedup();
    if support.len() > cfg.oracle_cap {
        return Err(Error::SupportOverCap { support: support.len(), cap: cfg.oracle_cap });
    }
    let cost = Array2::from_shape_fn((a.len(), b.len()), |(i, j)| {
        ground_distance(emb, a.terms()[i], b.terms()[j], cfg)
    });
    let plan = solve_transport(a.weights(), b.weights(), &cost)?;
    Ok(plan.cost.max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn classic_three_by_three() {
        let supply = [0.3, 0.4, 0.3];
        let demand = [0.4, 0.2, 0.4];
        let cost = array![[1.0, 2.0, 3.0], [4.0, 1.0, 5.0], [3.0, 6.0, 1.0]];
        let plan = solve_transport(&supply, &demand, &cost).unwrap();
        // Optimal: row0->col0 .3, row1->col1 .2, row1->col0 .1, row1->col2 .1, row2->col2 .3
        let expected: f64 = 0.3 * 1.0 + 0.2 * 1.0 + 0.1 * 4.0 + 0.1 * 5.0 + 0.3 * 1.0;
        assert!((plan.cost - expected).abs() < 1e-12, "{}", plan.cost);
        let shipped: f64 = plan.flows.iter().map(|f| f.2).sum();
        assert!((shipped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        let supply = [0.5, 0.5];
        let demand = [0.5, 0.5];
        let cost = array![[1.0, 0.0], [0.0, 1.0]];
        let plan = solve_transport(&supply, &demand, &cost).unwrap();
        assert_eq!(plan.cost, 0.0);
    }

    #[test]
    fn unbalanced_rejected() {
        let cost = array![[1.0]];
        assert!(matches!(solve_transport(&[1.0], &[2.0], &cost), Err(Error::UnbalancedMass(..))));
    }
}
