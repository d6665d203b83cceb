//! Variational inversion of c-monotone maps: minimizing
//! `I_p(x) = L(x, p) - c(x, p)`, minimax for skew-adjoint maps, and the
//! arc-wise convexity criteria along discrete curve families.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::ctransform::{c_conjugate, c_double_conjugate, c_subdifferential, ValueTable};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::selfdual::Lagrangian;
use crate::space::{Coupling, FiniteSpace, Geometry};
use crate::table::Table;

/// A total map `B: X -> Y`. Skewness is checked separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMap {
    map: Vec<usize>,
}

impl SkewMap {
    pub fn new(map: Vec<usize>, c: &Coupling) -> Result<Self> {
        if map.len() != c.nx() {
            return Err(Error::invalid(format!("B has {} entries, expected {}", map.len(), c.nx())));
        }
        if let Some(x) = map.iter().position(|&y| y >= c.ny()) {
            return Err(Error::invalid(format!("B({x}) = {} is outside Y", map[x])));
        }
        Ok(SkewMap { map })
    }

    pub fn constant(p: usize, c: &Coupling) -> Result<Self> {
        Self::new(alloc::vec![p; c.nx()], c)
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn at(&self, x: usize) -> usize {
        self.map[x]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewCheck {
    pub holds: bool,
    pub residual: f64,
    pub witness: Option<(usize, usize)>,
}

/// `max |c(x1, B x1) + c(x2, B x2) - c(x1, B x2) - c(x2, B x1)|`.
pub fn is_c_skew(b: &SkewMap, c: &Coupling, tol: f64) -> SkewCheck {
    let n = c.nx();
    let mut residual = 0.0f64;
    let mut witness = None;
    for x1 in 0..n {
        for x2 in x1 + 1..n {
            let r = (c.c(x1, b.at(x1)) + c.c(x2, b.at(x2)) - c.c(x1, b.at(x2)) - c.c(x2, b.at(x1))).abs();
            if r > residual {
                residual = r;
                witness = Some((x1, x2));
            }
        }
    }
    SkewCheck {
        holds: residual <= tol,
        residual,
        witness,
    }
}

/// Minimum value and the indices within `tol` of it (lowest first).
#[derive(Debug, Clone, PartialEq)]
pub struct Argmin {
    pub min: f64,
    pub argmin: Vec<usize>,
}

fn argmin_of(values: &[f64], tol: f64) -> Argmin {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Argmin {
        min,
        argmin: (0..values.len()).filter(|&i| values[i] <= min + tol).collect(),
    }
}

/// Exact minimum of `I_p(x) = L(x, p) - c(x, p)` over `X`.
pub fn minimize_ip(l: &Lagrangian, p: usize, tol: f64) -> Result<Argmin> {
    let c = l.coupling();
    if p >= c.ny() {
        return Err(Error::invalid(format!("target {p} is outside Y")));
    }
    if l.residual() > tol.max(l.tol()) {
        return Err(Error::invalid(format!(
            "Lagrangian is not selfdual (residual {:e})",
            l.residual()
        )));
    }
    let values: Vec<f64> = (0..c.nx()).map(|x| l.value(x, p) - c.c(x, p)).collect();
    Ok(argmin_of(&values, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimax {
    /// `inf_x sup_z G(x, z)`.
    pub inf_sup: f64,
    /// `sup_z inf_x G(x, z)`.
    pub sup_inf: f64,
    /// `I(x) = L_H(x, B x) - c(x, B x)`.
    pub i_values: Vec<f64>,
    pub inf_i: f64,
    /// `|inf_sup - inf I|`.
    pub upper_identity_residual: f64,
    /// `|sup_inf + inf I|`.
    pub lower_identity_residual: f64,
    pub skew_residual: f64,
}

impl Minimax {
    pub fn gap(&self) -> f64 {
        self.inf_sup - self.sup_inf
    }
}

/// `(inf_x sup_z, sup_z inf_x)` of a table `G[x][z]`.
pub fn minimax_values(g: &Table) -> (f64, f64) {
    let inf_sup = (0..g.rows())
        .map(|x| g.row(x).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    let sup_inf = (0..g.cols())
        .map(|z| (0..g.rows()).map(|x| g[(x, z)]).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    (inf_sup, sup_inf)
}

/// Minimax for `G(x, z) = H(z, x) + c(z, B z) - c(x, B z)`.
pub fn minimax_gap(h: &Hamiltonian, b: &SkewMap, tol: f64) -> Result<Minimax> {
    let c = h.coupling();
    if b.map().len() != c.nx() {
        return Err(Error::invalid("B does not live on X"));
    }
    let defect = h.antisymmetry_defect();
    if defect > tol {
        return Err(Error::invalid(format!("H is not antisymmetric (defect {defect:e})")));
    }
    let n = c.nx();
    let g = Table::from_fn(n, n, |x, z| h.value(z, x) + c.c(z, b.at(z)) - c.c(x, b.at(z)));
    let (inf_sup, sup_inf) = minimax_values(&g);
    let i_values: Vec<f64> = (0..n)
        .map(|x| {
            let y = b.at(x);
            let lh = (0..n)
                .map(|z| c.c(z, y) - h.value(x, z))
                .fold(f64::NEG_INFINITY, f64::max);
            lh - c.c(x, y)
        })
        .collect();
    let inf_i = i_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Minimax {
        inf_sup,
        sup_inf,
        upper_identity_residual: (inf_sup - inf_i).abs(),
        lower_identity_residual: (sup_inf + inf_i).abs(),
        i_values,
        inf_i,
        skew_residual: is_c_skew(b, c, tol).residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewInversion {
    /// `J(x) = phi(x) + phi^c(B x) - c(x, B x)`.
    pub j_values: Vec<f64>,
    pub argmin: Argmin,
    /// For each argmin `x0` (when the minimum is within `tol` of zero):
    /// whether `B x0` lies in `∂_c phi(x0)`.
    pub verified: Vec<bool>,
}

impl SkewInversion {
    pub fn solved(&self, tol: f64) -> bool {
        self.argmin.min <= tol && !self.verified.is_empty() && self.verified.iter().all(|v| *v)
    }
}

pub fn invert_via_skew(phi: &ValueTable, b: &SkewMap, c: &Coupling, tol: f64) -> Result<SkewInversion> {
    let skew = is_c_skew(b, c, tol);
    if !skew.holds {
        return Err(Error::invalid(format!("B is not c-skew (residual {:e})", skew.residual)));
    }
    if phi.len() != c.nx() {
        return Err(Error::invalid("phi does not live on X"));
    }
    let fc = c_conjugate(phi, c)?;
    let j_values: Vec<f64> = (0..c.nx())
        .map(|x| phi.get(x) + fc.get(b.at(x)) - c.c(x, b.at(x)))
        .collect();
    let argmin = argmin_of(&j_values, tol);
    let mut verified = Vec::new();
    if argmin.min <= tol {
        for &x0 in &argmin.argmin {
            verified.push(c_subdifferential(phi, c, x0, tol)?.contains(&b.at(x0)));
        }
    }
    Ok(SkewInversion {
        j_values,
        argmin,
        verified,
    })
}

/// A discrete path from `a` to `b` with parameters `0 = t_0 < ... < t_k = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub nodes: Vec<usize>,
    pub t: Vec<f64>,
}

/// Discrete curves for ordered endpoint pairs; several curves per pair are
/// allowed. Pairs with `a == b` need no curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveFamily {
    n: usize,
    curves: BTreeMap<(usize, usize), Vec<Curve>>,
}

impl CurveFamily {
    pub fn new(n: usize) -> Self {
        CurveFamily {
            n,
            curves: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn insert(&mut self, nodes: Vec<usize>, t: Vec<f64>) -> Result<()> {
        if nodes.len() < 2 || nodes.len() != t.len() {
            return Err(Error::invalid("a curve needs at least two nodes and one parameter per node"));
        }
        if nodes.iter().any(|&i| i >= self.n) {
            return Err(Error::invalid("curve node out of range"));
        }
        let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
        if a == b {
            return Err(Error::invalid("curve endpoints must differ"));
        }
        if t[0] != 0.0 || t[t.len() - 1] != 1.0 || t.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less)) {
            return Err(Error::invalid(format!(
                "curve {a}->{b}: parameters must run strictly from 0 to 1"
            )));
        }
        self.curves.entry((a, b)).or_default().push(Curve { nodes, t });
        Ok(())
    }

    pub fn curves(&self, a: usize, b: usize) -> &[Curve] {
        self.curves.get(&(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<Curve>)> {
        self.curves.iter()
    }

    /// Index paths on an interval grid with `t` proportional to the
    /// coordinate, i.e. straight lines.
    pub fn straight_lines(space: &FiniteSpace) -> Result<Self> {
        if space.geometry() != Geometry::Interval {
            return Err(Error::invalid("straight lines need an interval grid"));
        }
        let n = space.len();
        let x = |i: usize| space.coord(i).expect("interval coordinates");
        let mut fam = CurveFamily::new(n);
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let nodes: Vec<usize> = if a < b { (a..=b).collect() } else { (b..=a).rev().collect() };
                let span = x(b) - x(a);
                let mut t: Vec<f64> = nodes.iter().map(|&k| (x(k) - x(a)) / span).collect();
                *t.last_mut().expect("two nodes") = 1.0;
                fam.insert(nodes, t)?;
            }
        }
        Ok(fam)
    }

    /// Shortest arcs on a circle grid, uniformly parameterized; antipodal
    /// pairs take the positive direction.
    pub fn geodesics(space: &FiniteSpace) -> Result<Self> {
        if space.geometry() != Geometry::Circle {
            return Err(Error::invalid("geodesic paths need a circle grid"));
        }
        let n = space.len();
        let mut fam = CurveFamily::new(n);
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let fwd = (b + n - a) % n;
                let (steps, dir) = if 2 * fwd <= n { (fwd, 1) } else { (n - fwd, n - 1) };
                let nodes: Vec<usize> = (0..=steps).map(|k| (a + k * dir) % n).collect();
                let t = (0..=steps).map(|k| k as f64 / steps as f64).collect();
                fam.insert(nodes, t)?;
            }
        }
        Ok(fam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcWitness {
    /// Frozen index of the other variable.
    pub other: usize,
    pub a: usize,
    pub b: usize,
    pub node: usize,
    pub t: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcwiseCheck {
    pub holds: bool,
    pub worst_excess: f64,
    pub witness: Option<ArcWitness>,
}

/// Checks `F(zeta(t)) <= (1 - t) F(a) + t F(b)` along the family.
///
/// With `uniform`, each endpoint pair needs one curve that works for every
/// frozen value of the other variable; otherwise the curve may depend on
/// it.
pub fn check_arcwise_convexity(
    f: &Table,
    curves: &CurveFamily,
    variable: Variable,
    uniform: bool,
    tol: f64,
) -> Result<ArcwiseCheck> {
    let (moving, frozen) = match variable {
        Variable::First => (f.rows(), f.cols()),
        Variable::Second => (f.cols(), f.rows()),
    };
    if curves.len() != moving {
        return Err(Error::invalid(format!(
            "curve family covers {} points, the variable has {moving}",
            curves.len()
        )));
    }
    let value = |o: usize, k: usize| match variable {
        Variable::First => f[(k, o)],
        Variable::Second => f[(o, k)],
    };
    // Worst chord excess of one curve at one frozen index.
    let excess = |curve: &Curve, o: usize| -> ArcWitness {
        let (a, b) = (curve.nodes[0], curve.nodes[curve.nodes.len() - 1]);
        let (fa, fb) = (value(o, a), value(o, b));
        let mut w = ArcWitness { other: o, a, b, node: a, t: 0.0, excess: f64::NEG_INFINITY };
        for (&k, &t) in curve.nodes.iter().zip(&curve.t) {
            let e = value(o, k) - ((1.0 - t) * fa + t * fb);
            if e > w.excess {
                w = ArcWitness { node: k, t, excess: e, ..w };
            }
        }
        w
    };
    let mut worst: Option<ArcWitness> = None;
    let mut keep = |w: ArcWitness| {
        if worst.as_ref().is_none_or(|cur| w.excess > cur.excess) {
            worst = Some(w);
        }
    };
    for a in 0..moving {
        for b in 0..moving {
            if a == b {
                continue;
            }
            let family = curves.curves(a, b);
            if family.is_empty() {
                return Err(Error::invalid(format!("no curve from {a} to {b}")));
            }
            if uniform {
                // best curve = smallest worst-case excess over frozen indices
                let best = family
                    .iter()
                    .map(|cv| {
                        (0..frozen)
                            .map(|o| excess(cv, o))
                            .reduce(|p, q| if q.excess > p.excess { q } else { p })
                            .expect("nonempty frozen range")
                    })
                    .reduce(|p, q| if q.excess < p.excess { q } else { p })
                    .expect("nonempty family");
                keep(best);
            } else {
                for o in 0..frozen {
                    let best = family
                        .iter()
                        .map(|cv| excess(cv, o))
                        .reduce(|p, q| if q.excess < p.excess { q } else { p })
                        .expect("nonempty family");
                    keep(best);
                }
            }
        }
    }
    let worst_excess = worst.map_or(0.0, |w| w.excess.max(0.0));
    let holds = worst_excess <= tol;
    Ok(ArcwiseCheck {
        holds,
        worst_excess,
        witness: if holds { None } else { worst },
    })
}

/// Arc-wise convexity of a single function along the family.
pub fn check_arcwise_convexity_fn(f: &[f64], curves: &CurveFamily, tol: f64) -> Result<ArcwiseCheck> {
    let t = Table::from_fn(1, f.len(), |_, j| f[j]);
    check_arcwise_convexity(&t, curves, Variable::Second, true, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    /// `max_{x,z} (phi(x) - phi(z)) - max_y (c(x, y) - c(z, y))`; the
    /// hypothesis holds when this is `<= tol`.
    pub hypothesis_excess: f64,
    pub hypothesis_holds: bool,
    /// `max |phi^cc - phi|`.
    pub double_conjugate_gap: f64,
    pub c_convex: bool,
    /// `max_x |sup_y inf_z F_x - phi^cc(x)|`, zero by construction.
    pub sup_inf_residual: f64,
    /// `max_x |inf_z sup_y F_x - phi(x)|`, zero under the hypothesis.
    pub inf_sup_residual: f64,
    /// The hypothesis implies c-convexity on this instance.
    pub implication_holds: bool,
}

/// Exercises the c-convexity criterion: the oscillation hypothesis, the
/// verdict of [`crate::ctransform::is_c_convex`], and both sides of the
/// minimax for `F_x(z, y) = c(x, y) - c(z, y) + phi(z)`.
pub fn check_cconvexity_criterion(phi: &ValueTable, c: &Coupling, tol: f64) -> Result<CriterionReport> {
    let (n, m) = (c.nx(), c.ny());
    if phi.len() != n {
        return Err(Error::invalid("phi does not live on X"));
    }
    if phi.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("the criterion needs a finite phi"));
    }
    let osc = |x: usize, z: usize| (0..m).map(|y| c.c(x, y) - c.c(z, y)).fold(f64::NEG_INFINITY, f64::max);
    let mut hypothesis_excess = f64::NEG_INFINITY;
    for x in 0..n {
        for z in 0..n {
            hypothesis_excess = hypothesis_excess.max(phi.get(x) - phi.get(z) - osc(x, z));
        }
    }
    let pcc = c_double_conjugate(phi, c)?;
    let double_conjugate_gap = pcc.max_abs_diff(phi);
    let mut sup_inf_residual = 0.0f64;
    let mut inf_sup_residual = 0.0f64;
    for x in 0..n {
        let fx = Table::from_fn(n, m, |z, y| c.c(x, y) - c.c(z, y) + phi.get(z));
        let (inf_sup, sup_inf) = minimax_values(&fx);
        sup_inf_residual = sup_inf_residual.max((sup_inf - pcc.get(x)).abs());
        inf_sup_residual = inf_sup_residual.max((inf_sup - phi.get(x)).abs());
    }
    let hypothesis_holds = hypothesis_excess <= tol;
    let c_convex = double_conjugate_gap <= tol;
    Ok(CriterionReport {
        hypothesis_excess,
        hypothesis_holds,
        double_conjugate_gap,
        c_convex,
        sup_inf_residual,
        inf_sup_residual,
        implication_holds: !hypothesis_holds || c_convex,
    })
}
