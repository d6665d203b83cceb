use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::PIVOT_EPS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Equality duals: `A^T y >= c` and `b . y = value`. Rows found to be
    /// redundant get `y = 0`.
    pub y: Vec<f64>,
    pub redundant_rows: Vec<usize>,
    pub iterations: usize,
}

/// Maximizes `c . x` subject to `A x = b`, `x >= 0` with a dense two-phase
/// simplex (Bland's rule). `a` is row-major with `b.len()` rows.
pub fn solve_lp_max(a: &[Vec<f64>], b: &[f64], c: &[f64], max_iter: usize) -> Result<LpSolution> {
    let m = b.len();
    let nv = c.len();
    if a.len() != m || a.iter().any(|r| r.len() != nv) {
        return Err(Error::invalid("constraint matrix has the wrong shape"));
    }
    if a.iter().flatten().chain(b).chain(c).any(|v| !v.is_finite()) {
        return Err(Error::invalid("LP data must be finite"));
    }
    // Columns: structural 0..nv, artificial nv..nv+m, rhs at nv+m.
    let width = nv + m + 1;
    let rhs = nv + m;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nv {
            t[i][j] = sign * a[i][j];
        }
        t[i][nv + i] = 1.0;
        t[i][rhs] = sign * b[i];
    }
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    let scale = a
        .iter()
        .flatten()
        .chain(b)
        .chain(c)
        .fold(1.0f64, |s, v| s.max(v.abs()));
    let eps = PIVOT_EPS * scale;
    let mut iterations = 0;

    let phase1: Vec<f64> = (0..nv + m).map(|j| if j < nv { 0.0 } else { -1.0 }).collect();
    run(&mut t, &mut basis, &phase1, nv + m, eps, &mut iterations, max_iter)?;
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= nv)
        .map(|(i, _)| t[i][rhs].abs())
        .sum();
    if infeasibility > 1e-9 * scale {
        return Err(Error::invalid(format!("LP is infeasible (phase one residual {infeasibility})")));
    }

    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are linear combinations of the others.
    let mut redundant = Vec::new();
    for i in 0..m {
        if basis[i] < nv {
            continue;
        }
        match (0..nv).find(|&j| t[i][j].abs() > eps) {
            Some(j) => pivot(&mut t, &mut basis, i, j),
            None => redundant.push(i),
        }
    }

    let mut phase2 = c.to_vec();
    phase2.resize(nv + m, 0.0);
    let active: Vec<usize> = (0..m).filter(|i| !redundant.contains(i)).collect();
    let mut sub: Vec<Vec<f64>> = active.iter().map(|&i| t[i].clone()).collect();
    let mut sub_basis: Vec<usize> = active.iter().map(|&i| basis[i]).collect();
    run(&mut sub, &mut sub_basis, &phase2, nv, eps, &mut iterations, max_iter)?;

    let mut x = vec![0.0; nv];
    for (row, &j) in sub.iter().zip(&sub_basis) {
        if j < nv {
            x[j] = row[rhs];
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    // The artificial column of row k holds B^{-1} e_k, so y_k = c_B B^{-1} e_k.
    let mut y = vec![0.0; m];
    for k in 0..m {
        if redundant.contains(&k) {
            continue;
        }
        let sign = if b[k] < 0.0 { -1.0 } else { 1.0 };
        y[k] = sign
            * sub
                .iter()
                .zip(&sub_basis)
                .map(|(row, &j)| phase2[j] * row[nv + k])
                .sum::<f64>();
    }
    Ok(LpSolution {
        x,
        value,
        y,
        redundant_rows: redundant,
        iterations,
    })
}

/// Primal simplex on the tableau; only columns below `enter_limit` may enter.
fn run(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    enter_limit: usize,
    eps: f64,
    iterations: &mut usize,
    max_iter: usize,
) -> Result<()> {
    let rhs = cost.len();
    loop {
        let reduced = |j: usize, t: &[Vec<f64>], basis: &[usize]| {
            cost[j] - t.iter().zip(basis.iter()).map(|(row, &bj)| cost[bj] * row[j]).sum::<f64>()
        };
        let Some(enter) = (0..enter_limit).find(|&j| !basis.contains(&j) && reduced(j, t, basis) > eps)
        else {
            return Ok(());
        };
        let mut leave: Option<usize> = None;
        for i in 0..t.len() {
            if t[i][enter] > eps {
                let ratio = t[i][rhs] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][rhs] / t[l][enter];
                        if ratio < best || (ratio == best && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(leave) = leave else {
            return Err(Error::SolverError("LP is unbounded".into()));
        };
        if *iterations == max_iter {
            return Err(Error::SolverError(format!("simplex did not finish within {max_iter} pivots")));
        }
        *iterations += 1;
        pivot(t, basis, leave, enter);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[col];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
    }
    basis[r] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_textbook_problem() {
        // max 3x + 5y, x + s1 = 4, 2y + s2 = 12, 3x + 2y + s3 = 18
        let a = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 1.0, 0.0],
            vec![3.0, 2.0, 0.0, 0.0, 1.0],
        ];
        let s = solve_lp_max(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0, 0.0, 0.0, 0.0], 100).unwrap();
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        let dual: f64 = s.y.iter().zip([4.0, 12.0, 18.0]).map(|(y, b)| y * b).sum();
        assert!((dual - 36.0).abs() < 1e-9);
    }

    #[test]
    fn transport_rows_are_redundant_once() {
        // 2x2 transportation: four marginal rows, one redundant.
        let a = vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ];
        let s = solve_lp_max(&a, &[0.5, 0.5, 0.5, 0.5], &[0.0, 1.0, 1.0, 0.0], 100).unwrap();
        assert_eq!(s.redundant_rows.len(), 1);
        assert!((s.value - 1.0).abs() < 1e-12);
        for j in 0..4 {
            let col: f64 = (0..4).map(|i| a[i][j] * s.y[i]).sum();
            assert!(col >= [0.0, 1.0, 1.0, 0.0][j] - 1e-12);
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert!(matches!(solve_lp_max(&a, &[-1.0], &[0.0, 0.0], 10), Err(Error::InvalidInput(_))));
        let a = vec![vec![1.0, -1.0]];
        assert!(matches!(solve_lp_max(&a, &[0.0], &[1.0, 1.0], 10), Err(Error::SolverError(_))));
    }
}
