//! Hamiltonians `H_L(z, x) = max_y c(x, y) - L(z, y)` of Lagrangians and
//! the diagnostics built on them.

use alloc::format;
use alloc::vec::Vec;

use crate::ctransform::{c_conjugate, c_double_conjugate, c_subdifferential, ValueTable};
use crate::error::{Error, Result};
use crate::report::CheckResult;
use crate::selfdual::{partial_conjugate, Lagrangian};
use crate::space::{Coupling, FiniteSpace, Geometry};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    lagrangian: Lagrangian,
    /// `H[z][x]`.
    table: Table,
}

impl Hamiltonian {
    /// Wraps an arbitrary table as the Hamiltonian of `lagrangian`. Used for
    /// fault injection and for Hamiltonians given directly.
    pub fn from_table(lagrangian: Lagrangian, table: Table) -> Result<Self> {
        let n = lagrangian.coupling().nx();
        if table.shape() != (n, n) {
            return Err(Error::invalid(format!("Hamiltonian must be {n}x{n}")));
        }
        if !table.is_all_finite() {
            return Err(Error::invalid("Hamiltonian entries must be finite"));
        }
        Ok(Hamiltonian { lagrangian, table })
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    pub fn coupling(&self) -> &Coupling {
        self.lagrangian.coupling()
    }

    pub fn space(&self) -> &FiniteSpace {
        self.coupling().xspace()
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    #[inline]
    pub fn value(&self, z: usize, x: usize) -> f64 {
        self.table[(z, x)]
    }

    /// `H^as(x, z) = (H(x, z) - H(z, x)) / 2`.
    pub fn antisymmetric_part(&self) -> Table {
        let h = &self.table;
        Table::from_fn(h.rows(), h.cols(), |x, z| (h[(x, z)] - h[(z, x)]) / 2.0)
    }

    /// `max |H(x, z) + H(z, x)|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let h = &self.table;
        h.iter_indexed()
            .map(|(x, z, v)| (v + h[(z, x)]).abs())
            .fold(0.0, f64::max)
    }

    fn row(&self, z: usize) -> ValueTable {
        ValueTable::new(self.table.row(z).to_vec()).expect("finite rows")
    }
}

pub fn hamiltonian_of(l: &Lagrangian) -> Result<Hamiltonian> {
    let t = l.table();
    if let Some(z) = (0..t.rows()).find(|&z| !t.row(z).iter().any(|v| v.is_finite())) {
        return Err(Error::invalid(format!("row {z} of the Lagrangian is identically +inf")));
    }
    Ok(Hamiltonian {
        table: partial_conjugate(t, l.coupling()),
        lagrangian: l.clone(),
    })
}

/// `D_{c,L} = {x : exists y, L(x, y) - c(x, y) <= tol}`.
pub fn dbar_domain(l: &Lagrangian, tol: f64) -> Vec<usize> {
    let c = l.coupling();
    (0..c.nx())
        .filter(|&x| (0..c.ny()).any(|y| l.value(x, y) - c.c(x, y) <= tol))
        .collect()
}

/// `max_z c(z, y) - K(x, z)` on `Y x X`.
fn reconstruct(c: &Coupling, k: &Table) -> Table {
    Table::from_fn(c.ny(), c.nx(), |y, x| {
        (0..c.nx())
            .map(|z| c.c(z, y) - k[(x, z)])
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Property suite for the Hamiltonian of a selfdual Lagrangian.
///
/// Asserted: row c-convexity, `(-H(., x))^cc = H(x, .)`, sub-antisymmetry,
/// reconstruction of `L^C` from `H` and from `H^as`, and `H(x, x) = 0` on
/// `D_{c,L}`. c-convexity of the rows of `H^as` is reported only.
pub fn check_hamiltonian_properties(h: &Hamiltonian, tol: f64) -> Result<Vec<CheckResult>> {
    let c = h.coupling();
    let n = c.nx();
    let mut checks = Vec::with_capacity(7);

    let mut worst = (0.0f64, 0usize);
    for z in 0..n {
        let row = h.row(z);
        let r = c_double_conjugate(&row, c)?.max_abs_diff(&row);
        if r > worst.0 {
            worst = (r, z);
        }
    }
    checks.push(CheckResult::new("row_c_convexity", worst.0, tol).with_witness(alloc::vec![worst.1]));

    let mut worst = (0.0f64, 0usize);
    for x in 0..n {
        let neg_col = ValueTable::new((0..n).map(|z| -h.value(z, x)).collect())?;
        let r = c_double_conjugate(&neg_col, c)?.max_abs_diff(&h.row(x));
        if r > worst.0 {
            worst = (r, x);
        }
    }
    checks.push(
        CheckResult::new("double_conjugate_identity", worst.0, tol).with_witness(alloc::vec![worst.1]),
    );

    let mut worst = (0.0f64, 0usize, 0usize);
    for x in 0..n {
        for z in 0..n {
            let s = h.value(x, z) + h.value(z, x);
            if s > worst.0 {
                worst = (s, x, z);
            }
        }
    }
    checks.push(
        CheckResult::new("sub_antisymmetry", worst.0, tol).with_witness(alloc::vec![worst.1, worst.2]),
    );

    let lc = h.lagrangian().conjugate();
    let r = reconstruct(c, h.table()).max_abs_diff(&lc);
    checks.push(CheckResult::new("conjugate_reconstruction", r, tol));

    let domain = dbar_domain(h.lagrangian(), tol);
    let mut worst = (0.0f64, usize::MAX);
    for &x in &domain {
        let d = h.value(x, x).abs();
        if d > worst.0 {
            worst = (d, x);
        }
    }
    let mut diag = CheckResult::new("diagonal_zero", worst.0, tol);
    if worst.1 != usize::MAX {
        diag = diag.with_witness(alloc::vec![worst.1]);
    }
    checks.push(diag);

    let has = h.antisymmetric_part();
    let r = reconstruct(c, &has).max_abs_diff(&lc);
    checks.push(CheckResult::new("antisymmetric_reconstruction", r, tol));

    let mut worst = 0.0f64;
    for z in 0..n {
        let row = ValueTable::new(has.row(z).to_vec())?;
        worst = worst.max(c_double_conjugate(&row, c)?.max_abs_diff(&row));
    }
    checks.push(CheckResult::new("antisymmetric_row_c_convexity", worst, tol).informational());

    Ok(checks)
}

/// c-subdifferential of `x' -> H(z, x')` at `x`.
pub fn partial_c_subdiff_2(h: &Hamiltonian, z: usize, x: usize, tol: f64) -> Result<Vec<usize>> {
    c_subdifferential(&h.row(z), h.coupling(), x, tol)
}

/// `x -> ∂²_c H(x, x)` on `D_{c,L}` and the empty set elsewhere.
pub fn diagonal_subdifferential(h: &Hamiltonian, tol: f64) -> Result<Vec<Vec<usize>>> {
    let domain = dbar_domain(h.lagrangian(), tol);
    (0..h.coupling().nx())
        .map(|x| {
            if domain.binary_search(&x).is_ok() {
                partial_c_subdiff_2(h, x, x, tol)
            } else {
                Ok(Vec::new())
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleValuedness {
    pub fraction: f64,
    /// Diagonal points with more than one class of subgradients.
    pub multivalued: Vec<usize>,
    /// Diagonal points with an empty subdifferential.
    pub empty: Vec<usize>,
}

/// Fraction of `x` with a singleton `∂²_c H(x, x)`. Candidates within
/// `tie_tol` of the Young equality are merged when `grad1` (the partial
/// derivative of `c` in its first slot) agrees within `tie_tol`.
pub fn single_valuedness_scan(
    h: &Hamiltonian,
    tie_tol: f64,
    grad1: Option<&dyn Fn(usize, usize) -> f64>,
) -> Result<SingleValuedness> {
    let n = h.coupling().nx();
    let mut multivalued = Vec::new();
    let mut empty = Vec::new();
    for x in 0..n {
        let set = partial_c_subdiff_2(h, x, x, tie_tol)?;
        let classes = match grad1 {
            Some(g) => {
                let mut reps: Vec<f64> = Vec::new();
                for &y in &set {
                    let gy = g(x, y);
                    if !reps.iter().any(|r| (r - gy).abs() <= tie_tol) {
                        reps.push(gy);
                    }
                }
                reps.len()
            }
            None => set.len(),
        };
        match classes {
            0 => empty.push(x),
            1 => {}
            _ => multivalued.push(x),
        }
    }
    let bad = multivalued.len() + empty.len();
    Ok(SingleValuedness {
        fraction: (n - bad) as f64 / n as f64,
        multivalued,
        empty,
    })
}

/// `∂₁c(x, y)` for `c = -d^2/2` on circles and intervals: the signed
/// displacement from `x` to `y`.
pub fn neg_half_sqdist_grad1(space: &FiniteSpace) -> Result<impl Fn(usize, usize) -> f64 + '_> {
    if !matches!(space.geometry(), Geometry::Circle | Geometry::Interval) {
        return Err(Error::invalid("closed-form gradient needs a circle or interval grid"));
    }
    Ok(move |x, y| space.displacement(x, y).expect("geometry checked"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    Central,
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientConsistency {
    pub spacing: f64,
    pub max_deviation: f64,
    pub deviations: Vec<f64>,
    pub stencils: Vec<Stencil>,
}

/// Compares a finite difference of `x' -> H(x, x')` at `x' = x` with
/// `grad1(x, T x)`. Central differences are used wherever both neighbours
/// exist (always on a circle), one-sided ones at interval endpoints.
pub fn gradient_consistency_check(
    h: &Hamiltonian,
    map_t: &[usize],
    grad1: &dyn Fn(usize, usize) -> f64,
) -> Result<GradientConsistency> {
    let space = h.space();
    let n = space.len();
    let spacing = space
        .spacing()
        .ok_or_else(|| Error::invalid("gradient check needs a uniform interval or circle grid"))?;
    if map_t.len() != n || map_t.iter().any(|&y| y >= h.coupling().ny()) {
        return Err(Error::invalid("map T must be total on X with values in Y"));
    }
    if n < 2 {
        return Err(Error::invalid("gradient check needs at least two grid points"));
    }
    let periodic = space.geometry() == Geometry::Circle;
    let mut deviations = Vec::with_capacity(n);
    let mut stencils = Vec::with_capacity(n);
    for x in 0..n {
        let (fd, st) = if periodic || (x > 0 && x + 1 < n) {
            let (next, prev) = ((x + 1) % n, (x + n - 1) % n);
            ((h.value(x, next) - h.value(x, prev)) / (2.0 * spacing), Stencil::Central)
        } else if x == 0 {
            ((h.value(x, 1) - h.value(x, 0)) / spacing, Stencil::Forward)
        } else {
            ((h.value(x, x) - h.value(x, x - 1)) / spacing, Stencil::Backward)
        };
        deviations.push((fd - grad1(x, map_t[x])).abs());
        stencils.push(st);
    }
    Ok(GradientConsistency {
        spacing,
        max_deviation: deviations.iter().copied().fold(0.0, f64::max),
        deviations,
        stencils,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck {
    pub ratio: f64,
    /// `2 diam`, with `diam` the larger of the two slot diameters.
    pub bound: f64,
}

impl LipschitzCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.ratio <= self.bound + tol
    }
}

/// Largest `|T(p) - T(q)| / d(p, q)` over pairs differing in one slot.
pub fn lipschitz_ratio(t: &Table, rows: &FiniteSpace, cols: &FiniteSpace) -> Result<LipschitzCheck> {
    let dr = rows.require_metric()?;
    let dc = cols.require_metric()?;
    if t.shape() != (rows.len(), cols.len()) {
        return Err(Error::invalid("table does not match the spaces"));
    }
    let mut ratio = 0.0f64;
    for j in 0..t.cols() {
        for a in 0..t.rows() {
            for b in a + 1..t.rows() {
                let d = dr[(a, b)];
                if d > 0.0 {
                    ratio = ratio.max((t[(a, j)] - t[(b, j)]).abs() / d);
                }
            }
        }
    }
    for i in 0..t.rows() {
        for a in 0..t.cols() {
            for b in a + 1..t.cols() {
                let d = dc[(a, b)];
                if d > 0.0 {
                    ratio = ratio.max((t[(i, a)] - t[(i, b)]).abs() / d);
                }
            }
        }
    }
    let diam = rows.diameter().unwrap_or(0.0).max(cols.diameter().unwrap_or(0.0));
    Ok(LipschitzCheck {
        ratio,
        bound: 2.0 * diam,
    })
}

pub fn lipschitz_bound_check_lagrangian(l: &Lagrangian) -> Result<LipschitzCheck> {
    let c = l.coupling();
    lipschitz_ratio(l.table(), c.xspace(), c.yspace())
}

pub fn lipschitz_bound_check_hamiltonian(h: &Hamiltonian) -> Result<LipschitzCheck> {
    lipschitz_ratio(h.table(), h.space(), h.space())
}

/// Diagonal values `H(x, x)` for `x` in `D_{c,L}`, largest in magnitude.
pub fn diagonal_defect(h: &Hamiltonian, tol: f64) -> f64 {
    dbar_domain(h.lagrangian(), tol)
        .into_iter()
        .map(|x| h.value(x, x).abs())
        .fold(0.0, f64::max)
}

/// `f^c` of the row `H(z, .)`, a function on `Y`.
pub fn row_conjugate(h: &Hamiltonian, z: usize) -> Result<ValueTable> {
    c_conjugate(&h.row(z), h.coupling())
}
