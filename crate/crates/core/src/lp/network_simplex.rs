use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::PIVOT_EPS;
use crate::error::{Error, Result};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub plan: Table,
    pub value: f64,
    /// Potentials with `u[i] + v[j] >= profit[i][j]`, tight on the basis.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations: usize,
}

/// Maximizes `sum profit[i][j] * p[i][j]` over plans with row sums `a` and
/// column sums `b` (which must have equal totals).
pub fn solve_transport_max(profit: &Table, a: &[f64], b: &[f64], max_iter: usize) -> Result<TransportSolution> {
    let (n, m) = profit.shape();
    if a.len() != n || b.len() != m || n == 0 || m == 0 {
        return Err(Error::invalid("marginals do not match the profit table"));
    }
    if a.iter().chain(b).any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("marginals must be finite and nonnegative"));
    }
    if !profit.is_all_finite() {
        return Err(Error::invalid("profit table must be finite"));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(1.0) {
        return Err(Error::invalid(format!("marginal totals differ: {sa} vs {sb}")));
    }
    let scale = profit.as_slice().iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let eps = PIVOT_EPS * scale;

    // Northwest corner start: a monotone staircase of exactly n + m - 1 cells.
    let mut flow = Table::zeros(n, m);
    let mut basic = vec![false; n * m];
    let mut cells = Vec::with_capacity(n + m - 1);
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let q = if i == n - 1 && j == m - 1 { ra[i].max(0.0) } else { ra[i].min(rb[j]) };
        flow[(i, j)] = q;
        ra[i] -= q;
        rb[j] -= q;
        basic[i * m + j] = true;
        cells.push((i, j));
        if i == n - 1 && j == m - 1 {
            break;
        }
        if (ra[i] <= 0.0 && i < n - 1) || j == m - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut iterations = 0;
    loop {
        potentials(profit, &cells, &mut u, &mut v);
        // Bland: first cell in row-major order that improves the objective.
        let entering = (0..n * m).find(|&k| {
            let (i, j) = (k / m, k % m);
            !basic[k] && profit[(i, j)] - u[i] - v[j] > eps
        });
        let Some(k) = entering else { break };
        if iterations == max_iter {
            return Err(Error::SolverError(format!(
                "transport simplex did not finish within {max_iter} pivots"
            )));
        }
        iterations += 1;
        let (ei, ej) = (k / m, k % m);
        let path = tree_path(&cells, n, m, ej, ei);
        // path runs from column ej to row ei; its cells alternate -, +, -, ...
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &c) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let (ci, cj) = cells[c];
                let f = flow[(ci, cj)];
                let key = ci * m + cj;
                if f < theta || (f == theta && key < cells[leave].0 * m + cells[leave].1) {
                    theta = f;
                    leave = c;
                }
            }
        }
        for (pos, &c) in path.iter().enumerate() {
            let (ci, cj) = cells[c];
            if pos % 2 == 0 {
                flow[(ci, cj)] -= theta;
            } else {
                flow[(ci, cj)] += theta;
            }
        }
        flow[(ei, ej)] = theta;
        let (li, lj) = cells[leave];
        flow[(li, lj)] = 0.0;
        basic[li * m + lj] = false;
        basic[k] = true;
        cells[leave] = (ei, ej);
    }

    for f in flow.as_slice().iter() {
        debug_assert!(*f >= -1e-9);
    }
    let plan = flow.map(|f| f.max(0.0));
    let value = plan
        .iter_indexed()
        .map(|(i, j, p)| p * profit[(i, j)])
        .sum();
    Ok(TransportSolution { plan, value, u, v, iterations })
}

/// Solves `u[i] + v[j] = profit[i][j]` on the spanning tree with `u[0] = 0`.
fn potentials(profit: &Table, cells: &[(usize, usize)], u: &mut [f64], v: &mut [f64]) {
    let (n, m) = (u.len(), v.len());
    let adj = adjacency(cells, n, m);
    let mut seen = vec![false; n + m];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    u[0] = 0.0;
    while let Some(node) = queue.pop_front() {
        for &c in &adj[node] {
            let (i, j) = cells[c];
            let other = if node < n { n + j } else { i };
            if seen[other] {
                continue;
            }
            seen[other] = true;
            if other < n {
                u[i] = profit[(i, j)] - v[j];
            } else {
                v[j] = profit[(i, j)] - u[i];
            }
            queue.push_back(other);
        }
    }
}

fn adjacency(cells: &[(usize, usize)], n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n + m];
    for (c, &(i, j)) in cells.iter().enumerate() {
        adj[i].push(c);
        adj[n + j].push(c);
    }
    adj
}

/// Basis cells on the tree path from column node `col` to row node `row`.
fn tree_path(cells: &[(usize, usize)], n: usize, m: usize, col: usize, row: usize) -> Vec<usize> {
    let adj = adjacency(cells, n, m);
    let start = n + col;
    let mut via = vec![usize::MAX; n + m];
    let mut seen = vec![false; n + m];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == row {
            break;
        }
        for &c in &adj[node] {
            let (i, j) = cells[c];
            let other = if node < n { n + j } else { i };
            if !seen[other] {
                seen[other] = true;
                via[other] = c;
                queue.push_back(other);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = row;
    while node != start {
        let c = via[node];
        path.push(c);
        let (i, j) = cells[c];
        node = if node < n { n + j } else { i };
    }
    path.reverse();
    path
}
