//! Symmetric Monge–Kantorovich transport on a finite space and its dual
//! over C-selfdual Lagrangians.
//!
//! For a map `T: X -> Y` and a measure `mu` on `X`, the primal problem
//! maximizes `sum pi[x][z] c(x, T z)` over symmetric plans with both
//! marginals `mu`. Because a symmetric plan only sees the symmetrized cost
//! `(c(x, T z) + c(z, T x)) / 2`, it is solved as an ordinary transport
//! problem and the optimizer symmetrized afterwards.
//!
//! Finite measures are atomic, so optimal plans need not be supported on
//! graphs; [`extract_involution`] reports that case instead of choosing.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hamiltonian::{hamiltonian_of, partial_c_subdiff_2, Hamiltonian};
use crate::lp::{solve_lp_max, solve_transport_max};
use crate::monotone::{is_c_monotone, Relation};
use crate::selfdual::{bar, synthesize_selfdual, Lagrangian, SynthesisOptions};
use crate::space::{Coupling, FiniteSpace};
use crate::table::Table;

/// Default pivot budget for the LP solvers.
pub const DEFAULT_LP_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    space: FiniteSpace,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(space: FiniteSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::invalid(format!(
                "{} weights for a space of {} points",
                weights.len(),
                space.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { space, weights })
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let n = space.len();
        DiscreteMeasure {
            space,
            weights: alloc::vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `1e-9 * max weight`, the default support threshold.
    pub fn support_tol(&self) -> f64 {
        1e-9 * self.weights.iter().copied().fold(0.0, f64::max)
    }
}

/// A symmetric plan with both marginals equal to a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    table: Table,
}

impl Plan {
    pub fn new(table: Table, mu: &DiscreteMeasure, tol: f64) -> Result<Self> {
        let n = mu.len();
        if table.shape() != (n, n) {
            return Err(Error::invalid(format!("plan must be {n}x{n}")));
        }
        if table.as_slice().iter().any(|p| !p.is_finite() || *p < -tol) {
            return Err(Error::invalid("plan entries must be nonnegative"));
        }
        if table.max_abs_diff(&table.transpose()) > tol {
            return Err(Error::invalid("plan is not symmetric"));
        }
        for (i, w) in mu.weights().iter().enumerate() {
            let row: f64 = table.row(i).iter().sum();
            if (row - w).abs() > tol {
                return Err(Error::invalid(format!("row {i} sums to {row}, expected {w}")));
            }
        }
        Ok(Plan { table })
    }

    /// `pi[x][z] = mu(x)` on the diagonal.
    pub fn diagonal(mu: &DiscreteMeasure) -> Self {
        let n = mu.len();
        Plan {
            table: Table::from_fn(n, n, |i, j| if i == j { mu.weights()[i] } else { 0.0 }),
        }
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.table.rows() == 0
    }

    /// Cells with mass above `tol`, row-major.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        self.table
            .iter_indexed()
            .filter(|&(_, _, p)| p > tol)
            .map(|(i, j, _)| (i, j))
            .collect()
    }

    /// `sum pi[i][j] k[i][j]`.
    pub fn integrate(&self, k: &Table) -> f64 {
        self.table.iter_indexed().map(|(i, j, p)| p * k[(i, j)]).sum()
    }
}

fn check_map(c: &Coupling, map_t: &[usize]) -> Result<()> {
    if map_t.len() != c.nx() {
        return Err(Error::invalid(format!(
            "map has {} entries, expected {}",
            map_t.len(),
            c.nx()
        )));
    }
    if let Some(x) = map_t.iter().position(|&y| y >= c.ny()) {
        return Err(Error::invalid(format!("T({x}) = {} is outside Y", map_t[x])));
    }
    Ok(())
}

fn check_measure(c: &Coupling, mu: &DiscreteMeasure) -> Result<()> {
    if mu.len() != c.nx() {
        return Err(Error::invalid("measure does not live on X"));
    }
    Ok(())
}

/// `c_hat[i][j] = (c(i, T j) + c(j, T i)) / 2`.
pub fn symmetrized_cost(c: &Coupling, map_t: &[usize]) -> Result<Table> {
    check_map(c, map_t)?;
    let n = c.nx();
    Ok(Table::from_fn(n, n, |i, j| {
        (c.c(i, map_t[j]) + c.c(j, map_t[i])) / 2.0
    }))
}

/// Optimal symmetric plan with its value and the transport potentials
/// `u[i] + v[j] >= c_hat[i][j]` (tight on the basis).
#[derive(Debug, Clone, PartialEq)]
pub struct MkSolution {
    pub plan: Plan,
    pub value: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn solve_mk_sym_full(
    c: &Coupling,
    map_t: &[usize],
    mu: &DiscreteMeasure,
    max_iter: usize,
) -> Result<MkSolution> {
    check_measure(c, mu)?;
    let chat = symmetrized_cost(c, map_t)?;
    let w = mu.weights();
    let sol = solve_transport_max(&chat, w, w, max_iter)?;
    let sym = sol.plan.zip_map(&sol.plan.transpose(), |a, b| (a + b) / 2.0);
    Ok(MkSolution {
        value: sym.iter_indexed().map(|(i, j, p)| p * chat[(i, j)]).sum(),
        plan: Plan { table: sym },
        u: sol.u,
        v: sol.v,
    })
}

pub fn solve_mk_sym(c: &Coupling, map_t: &[usize], mu: &DiscreteMeasure) -> Result<(Plan, f64)> {
    let s = solve_mk_sym_full(c, map_t, mu, DEFAULT_LP_ITER)?;
    Ok((s.plan, s.value))
}

/// The lifted problem between `mu~1` on `{(x, T x)}` and `mu~2` on
/// `{(T x, x)}` with cost `C`, solved by the dense simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSolution {
    /// `gamma[i][j]`: mass from `(x_i, T x_i)` to `(T x_j, x_j)`.
    pub plan: Table,
    pub value: f64,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
}

pub fn solve_lifted_mk(
    c: &Coupling,
    map_t: &[usize],
    mu: &DiscreteMeasure,
    max_iter: usize,
) -> Result<LiftedSolution> {
    check_map(c, map_t)?;
    check_measure(c, mu)?;
    let n = c.nx();
    let sc = c.symmetrize();
    let mut profit = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            profit.push(sc.eval((i, map_t[i]), (map_t[j], j))?);
        }
    }
    let mut a = alloc::vec![alloc::vec![0.0; n * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            a[i][i * n + j] = 1.0;
            a[n + j][i * n + j] = 1.0;
        }
    }
    let mut b = mu.weights().to_vec();
    b.extend_from_slice(mu.weights());
    let s = solve_lp_max(&a, &b, &profit, max_iter)?;
    Ok(LiftedSolution {
        plan: Table::from_fn(n, n, |i, j| s.x[i * n + j].max(0.0)),
        value: s.value,
        psi: s.y[..n].to_vec(),
        phi: s.y[n..].to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    /// Canonical potential on `X x Y`.
    pub psi: Table,
    /// Canonical potential on `Y x X`.
    pub phi: Table,
    pub lagrangian: Lagrangian,
    /// `sum mu(x) L(x, T x)`.
    pub objective: f64,
}

/// Builds an optimal C-selfdual Lagrangian for the dual problem.
///
/// Transport potentials give support potentials `psi_i = 2 u_i`,
/// `phi_j = 2 v_j` for the lifted problem; one C-transform in each
/// direction extends them to feasible potentials on the full products.
pub fn solve_dk_sym(
    c: &Coupling,
    map_t: &[usize],
    mu: &DiscreteMeasure,
    opts: SynthesisOptions,
) -> Result<DualCertificate> {
    let sol = solve_mk_sym_full(c, map_t, mu, DEFAULT_LP_ITER)?;
    certificate_from_potentials(c, map_t, mu, &sol.u, opts)
}

fn certificate_from_potentials(
    c: &Coupling,
    map_t: &[usize],
    mu: &DiscreteMeasure,
    u: &[f64],
    opts: SynthesisOptions,
) -> Result<DualCertificate> {
    let (n, m) = (c.nx(), c.ny());
    // phi(y', x') = max_i C((x_i, T x_i), (y', x')) - psi_i, stored transposed.
    let phi_t = Table::from_fn(n, m, |xp, yp| {
        (0..n)
            .map(|i| c.c(i, yp) + c.c(xp, map_t[i]) - 2.0 * u[i])
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let psi = bar(&phi_t, c)?;
    let phi = phi_t.transpose();
    let lagrangian = synthesize_selfdual(&psi, &phi, c, opts)?;
    let objective = mu
        .weights()
        .iter()
        .enumerate()
        .map(|(x, w)| w * lagrangian.value(x, map_t[x]))
        .sum();
    Ok(DualCertificate {
        psi,
        phi,
        lagrangian,
        objective,
    })
}

pub fn verify_duality(plan_value: f64, certificate: &DualCertificate, tol: f64) -> bool {
    (plan_value - certificate.objective).abs() <= tol
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    /// Support cells checked.
    pub support: Vec<(usize, usize)>,
    /// Largest `|c(z, T x) - H(x, z) - L(x, T x)|` on the support.
    pub max_violation: f64,
    /// `sum pi[x][z] H(x, z)`.
    pub integral_h: f64,
}

/// Checks `c(z, T x) - H_L(x, z) - L(x, T x) = 0` wherever `pi > tol`.
pub fn extract_support_inclusion(
    plan: &Plan,
    h: &Hamiltonian,
    map_t: &[usize],
    tol: f64,
) -> Result<SupportReport> {
    let c = h.coupling();
    check_map(c, map_t)?;
    if plan.len() != c.nx() {
        return Err(Error::invalid("plan does not live on X x X"));
    }
    let l = h.lagrangian();
    let support = plan.support(tol);
    let mut max_violation = 0.0f64;
    for &(x, z) in &support {
        let r = (c.c(z, map_t[x]) - h.value(x, z) - l.value(x, map_t[x])).abs();
        if r > tol {
            return Err(Error::CertificateMismatch { x, z, residual: r });
        }
        max_violation = max_violation.max(r);
    }
    Ok(SupportReport {
        support,
        max_violation,
        integral_h: plan.integrate(h.table()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    pub map: Vec<usize>,
    pub is_involution: bool,
    /// `max |H(x, S x) + H(S x, x)|`.
    pub antisymmetry_residual: f64,
    pub preserves_measure: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InvolutionOutcome {
    Graph(Involution),
    /// Rows whose mass is split (or missing).
    NotAGraph { rows: Vec<usize> },
}

/// Reads `S` off a plan whose rows each carry exactly one entry above `tol`.
pub fn extract_involution(
    plan: &Plan,
    h: &Hamiltonian,
    mu: &DiscreteMeasure,
    tol: f64,
) -> InvolutionOutcome {
    let n = plan.len();
    let mut map = Vec::with_capacity(n);
    let mut bad = Vec::new();
    for x in 0..n {
        let hits: Vec<usize> = (0..n).filter(|&z| plan.table()[(x, z)] > tol).collect();
        match hits.as_slice() {
            [z] => map.push(*z),
            _ => bad.push(x),
        }
    }
    if !bad.is_empty() {
        return InvolutionOutcome::NotAGraph { rows: bad };
    }
    let is_involution = (0..n).all(|x| map[map[x]] == x);
    let antisymmetry_residual = (0..n)
        .map(|x| (h.value(x, map[x]) + h.value(map[x], x)).abs())
        .fold(0.0, f64::max);
    let w = mu.weights();
    let mut pushed = alloc::vec![0.0; n];
    for x in 0..n {
        pushed[map[x]] += w[x];
    }
    let preserves_measure = pushed.iter().zip(w).all(|(p, q)| (p - q).abs() <= 1e-12);
    InvolutionOutcome::Graph(Involution {
        map,
        is_involution,
        antisymmetry_residual,
        preserves_measure,
    })
}

/// Graph-plan marginal identities for a lifted plan `gamma` between
/// `(x_i, T x_i)` and `(T x_j, x_j)`, evaluated on all singletons. Each side
/// reads a different coordinate, so the residual is zero exactly when the
/// second marginal really sits on `{(T x, x)}`.
pub fn graph_plan_marginal_residual(gamma: &Table, c: &Coupling, map_t: &[usize]) -> Result<f64> {
    check_map(c, map_t)?;
    let n = c.nx();
    if gamma.shape() != (n, n) {
        return Err(Error::invalid("lifted plan must be indexed by support points"));
    }
    let u = |i: usize| (i, map_t[i]);
    let v = |j: usize| (map_t[j], j);
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..c.ny() {
            // (A x X) x (X x T^-1 B)  vs  (A x X) x (B x X)
            let mut l1 = 0.0;
            let mut r1 = 0.0;
            for (i, j, g) in gamma.iter_indexed() {
                if u(i).0 == a && map_t[v(j).1] == b {
                    l1 += g;
                }
                if u(i).0 == a && v(j).0 == b {
                    r1 += g;
                }
            }
            worst = worst.max((l1 - r1).abs());
        }
    }
    for a in 0..c.ny() {
        for b in 0..n {
            // (T^-1 A x X) x (X x B)  vs  (X x A) x (X x B)
            let mut l2 = 0.0;
            let mut r2 = 0.0;
            for (i, j, g) in gamma.iter_indexed() {
                if map_t[u(i).0] == a && v(j).1 == b {
                    l2 += g;
                }
                if u(i).1 == a && v(j).1 == b {
                    r2 += g;
                }
            }
            worst = worst.max((l2 - r2).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub plan: Plan,
    pub value: f64,
    pub certificate: DualCertificate,
    pub hamiltonian: Hamiltonian,
    pub support: SupportReport,
    pub involution: InvolutionOutcome,
    /// Whether the graph of `T` is c-monotone.
    pub monotone: bool,
    /// Value of the diagonal plan `pi[x][x] = mu(x)`.
    pub diagonal_value: f64,
    /// Weighted points where `T x` is not in `∂²_c H_L(x, x)`.
    pub inclusion_failures: Vec<usize>,
    /// c-monotonicity of `{(S x, T x)}` when `S` is a graph.
    pub composite_monotone: Option<bool>,
}

impl Rearrangement {
    pub fn duality_gap(&self) -> f64 {
        (self.value - self.certificate.objective).abs()
    }

    /// The diagonal plan is optimal (within `tol`).
    pub fn diagonal_optimal(&self, tol: f64) -> bool {
        self.diagonal_value >= self.value - tol
    }
}

/// Full pipeline: optimal plan, selfdual certificate, Hamiltonian, support
/// inclusion, involution and, for c-monotone `T`, the diagonal inclusion.
pub fn monotone_rearrangement(
    c: &Coupling,
    map_t: &[usize],
    mu: &DiscreteMeasure,
    opts: SynthesisOptions,
) -> Result<Rearrangement> {
    let sol = solve_mk_sym_full(c, map_t, mu, DEFAULT_LP_ITER)?;
    let certificate = certificate_from_potentials(c, map_t, mu, &sol.u, opts)?;
    let hamiltonian = hamiltonian_of(&certificate.lagrangian)?;
    let scale = 1.0 + c.table().as_slice().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let check_tol = (opts.tol * 1e3).max(1e-9) * scale;
    let support_tol = mu.support_tol();

    let mut support = SupportReport {
        support: sol.plan.support(support_tol),
        max_violation: 0.0,
        integral_h: sol.plan.integrate(hamiltonian.table()),
    };
    for &(x, z) in &support.support {
        let r = (c.c(z, map_t[x]) - hamiltonian.value(x, z) - certificate.lagrangian.value(x, map_t[x])).abs();
        support.max_violation = support.max_violation.max(r);
    }

    let involution = extract_involution(&sol.plan, &hamiltonian, mu, support_tol);
    let graph = Relation::graph(map_t)?;
    let monotone = is_c_monotone(&graph, c, check_tol)?.holds;
    let diagonal_value = (0..c.nx()).map(|x| mu.weights()[x] * c.c(x, map_t[x])).sum();
    let mut inclusion_failures = Vec::new();
    for x in 0..c.nx() {
        if mu.weights()[x] > 0.0 && !partial_c_subdiff_2(&hamiltonian, x, x, check_tol)?.contains(&map_t[x]) {
            inclusion_failures.push(x);
        }
    }
    let composite_monotone = match &involution {
        InvolutionOutcome::Graph(inv) => {
            let mut pairs: Vec<(usize, usize)> = (0..c.nx()).map(|x| (inv.map[x], map_t[x])).collect();
            pairs.sort_unstable();
            pairs.dedup();
            Some(is_c_monotone(&Relation::new(pairs)?, c, check_tol)?.holds)
        }
        InvolutionOutcome::NotAGraph { .. } => None,
    };
    Ok(Rearrangement {
        plan: sol.plan,
        value: sol.value,
        certificate,
        hamiltonian,
        support,
        involution,
        monotone,
        diagonal_value,
        inclusion_failures,
        composite_monotone,
    })
}
