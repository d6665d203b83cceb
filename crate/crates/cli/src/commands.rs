//! The `check-monotone`, `represent`, `rearrange` and `invert` pipelines.

use std::fmt;

use cselfdual_core::ctransform::c_conjugate;
use cselfdual_core::hamiltonian::{
    check_hamiltonian_properties, gradient_consistency_check, hamiltonian_of, neg_half_sqdist_grad1,
};
use cselfdual_core::inversion::{
    check_arcwise_convexity, check_arcwise_convexity_fn, invert_via_skew, Argmin, is_c_skew, minimize_ip, SkewMap, Variable,
};
use cselfdual_core::monotone::{is_c_cyclically_monotone, is_c_monotone, is_maximal_c_monotone, CycleCaps};
use cselfdual_core::selfdual::{graph_of_dbar, round_trip, synthesize_selfdual, fitzpatrick, SynthesisOptions};
use cselfdual_core::space::Geometry;
use cselfdual_core::transport::{monotone_rearrangement, DiscreteMeasure, InvolutionOutcome};
use cselfdual_core::{CheckResult, Coupling, Error, ValueTable};
use serde_json::json;

use crate::formats::{
    parse, FormatError, InvertInstance, LagrangianJson, RelationInstance, RelationJson, TransportInstance,
};
use crate::report::{flag, RunReport};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const SOLVER: i32 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::EmptyResult(_) => exit::INPUT,
            Error::ResourceLimit(_) => exit::RESOURCE,
            Error::NonConvergence { .. } | Error::SolverError(_) => exit::SOLVER,
            Error::CertificateMismatch { .. } => exit::ASSERTION,
        };
        CmdError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for CmdError {
    fn from(e: FormatError) -> Self {
        CmdError {
            code: exit::INPUT,
            message: e.0,
        }
    }
}

pub type CmdResult = Result<RunReport, CmdError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Settings {
    pub fn synthesis(&self) -> SynthesisOptions {
        SynthesisOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    /// Tolerance for identities that inherit the synthesis residual.
    pub fn check_tol(&self) -> f64 {
        (10.0 * self.tol).max(1e-8)
    }
}

fn flatten(pairs: &[(usize, usize)]) -> Vec<usize> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

pub fn check_monotone(
    text: &str,
    command: Vec<String>,
    order: Option<usize>,
    maximal: bool,
    s: Settings,
) -> CmdResult {
    let inst: RelationInstance = parse(text)?;
    let c = inst.coupling.build()?;
    let m = inst.relation()?;
    let mut rep = RunReport::new(command).with_instance(text.as_bytes());

    let mc = is_c_monotone(&m, &c, s.tol)?;
    let mut chk = CheckResult::new("c_monotone", mc.worst_excess.max(0.0), s.tol);
    if let Some(w) = mc.witness {
        chk = chk.with_witness(flatten(&w));
    }
    rep.check(chk);

    if let Some(n) = order {
        let cy = is_c_cyclically_monotone(&m, &c, n, s.tol, &CycleCaps::default())?;
        let mut chk = CheckResult::new(format!("c_cyclically_monotone_order_{n}"), (-cy.min_sum).max(0.0), s.tol);
        if let Some(w) = &cy.witness {
            chk = chk.with_witness(flatten(w));
        }
        rep.check(chk);
    }
    if maximal {
        let mx = is_maximal_c_monotone(&m, &c, s.tol)?;
        rep.check(CheckResult::new("maximal", mx.extensions.len() as f64, 0.5).with_witness(flatten(&mx.extensions)));
        rep.artifact("extensions", RelationJson::from_pairs(&mx.extensions).pairs);
    }
    Ok(rep)
}

pub fn represent(text: &str, command: Vec<String>, s: Settings) -> CmdResult {
    let inst: RelationInstance = parse(text)?;
    let c = inst.coupling.build()?;
    let m = inst.relation()?;
    let mut rep = RunReport::new(command).with_instance(text.as_bytes());
    let tol = s.check_tol();

    let mono = is_c_monotone(&m, &c, s.tol)?;
    if !mono.holds {
        rep.warn("input relation is not c-monotone; the Fitzpatrick bounds carry no guarantee");
    }
    let mx = is_maximal_c_monotone(&m, &c, s.tol)?;
    if !mx.maximal {
        rep.warn(format!(
            "input relation is not maximal ({} single-pair extensions); the recovered graph may be larger",
            mx.extensions.len()
        ));
        rep.artifact("extensions", RelationJson::from_pairs(&mx.extensions).pairs);
    }

    let rt = round_trip(&m, &c, s.synthesis(), tol)?;
    let l = &rt.lagrangian;
    rep.check(CheckResult::new("selfdual_residual", l.residual(), s.tol));
    let sw = rt.sandwich;
    let sandwich = sw.c_above_f.max(sw.f_above_l).max(sw.l_above_fc).max(sw.spread_on_m).max(0.0);
    let mut chk = CheckResult::new("sandwich", sandwich, tol);
    if !mono.holds {
        chk = chk.informational();
    }
    rep.check(chk);

    let missing: Vec<(usize, usize)> =
        m.pairs().iter().copied().filter(|p| !rt.recovered.pairs.contains(p)).collect();
    let extra: Vec<(usize, usize)> =
        rt.recovered.pairs.iter().copied().filter(|&p| !m.contains(p)).collect();
    let mut chk = flag("round_trip", rt.exact()).with_witness(flatten(if missing.is_empty() { &extra } else { &missing }));
    if !mx.maximal || !mono.holds {
        chk = chk.informational();
    }
    rep.check(chk);

    let h = hamiltonian_of(l)?;
    for chk in check_hamiltonian_properties(&h, tol)? {
        rep.check(chk);
    }
    rep.artifact("lagrangian", LagrangianJson::from_lagrangian(l));
    rep.artifact("hamiltonian", json!({ "values": h.table().to_rows() }));
    rep.artifact("recovered", RelationJson::from_pairs(&rt.recovered.pairs));
    Ok(rep)
}

/// True when the cost is `-d^2/2` for the metric of `X = Y`.
fn is_neg_half_sqdist(c: &Coupling) -> bool {
    let (Some(dx), Some(_)) = (c.xspace().metric(), c.yspace().metric()) else {
        return false;
    };
    c.nx() == c.ny()
        && c.table()
            .iter_indexed()
            .all(|(i, j, v)| (v + dx[(i, j)] * dx[(i, j)] / 2.0).abs() <= 1e-12)
}

pub fn rearrange(text: &str, command: Vec<String>, s: Settings) -> CmdResult {
    let inst: TransportInstance = parse(text)?;
    let c = inst.coupling.build()?;
    let mu = match &inst.mu {
        Some(w) => DiscreteMeasure::new(c.xspace().clone(), w.clone())?,
        None => DiscreteMeasure::uniform(c.xspace().clone()),
    };
    let t = &inst.map_t;
    let mut rep = RunReport::new(command).with_instance(text.as_bytes());
    let tol = s.check_tol();

    let r = monotone_rearrangement(&c, t, &mu, s.synthesis())?;
    rep.check(CheckResult::new("duality_gap", r.duality_gap(), tol));
    rep.check(
        CheckResult::new("support_inclusion", r.support.max_violation, tol)
            .with_witness(flatten(&r.support.support)),
    );
    rep.check(CheckResult::new("hamiltonian_integral", r.support.integral_h.abs(), tol));
    match &r.involution {
        InvolutionOutcome::Graph(inv) => {
            rep.check(flag("involution", inv.is_involution));
            rep.check(CheckResult::new("antisymmetry_on_orbits", inv.antisymmetry_residual, tol));
            rep.check(flag("measure_preserved", inv.preserves_measure));
            rep.artifact("S", &inv.map);
            let identity = inv.map.iter().enumerate().all(|(x, &s)| x == s);
            if let (Some(ok), false) = (r.composite_monotone, identity) {
                rep.check(flag("rearranged_composite_monotone", ok));
            }
        }
        InvolutionOutcome::NotAGraph { rows } => {
            rep.warn(format!("optimal plan is not supported on a graph (split rows {rows:?})"));
            rep.artifact("S", serde_json::Value::Null);
        }
    }
    if r.monotone {
        rep.check(CheckResult::new("diagonal_optimal", (r.value - r.diagonal_value).max(0.0), tol));
        rep.check(
            CheckResult::new("diagonal_inclusion", r.inclusion_failures.len() as f64, 0.5)
                .with_witness(r.inclusion_failures.clone()),
        );
    }
    let space = c.xspace();
    if r.monotone && space.spacing().is_some() && is_neg_half_sqdist(&c) {
        let g = neg_half_sqdist_grad1(space)?;
        let gc = gradient_consistency_check(&r.hamiltonian, t, &g)?;
        let h = gc.spacing;
        rep.check(CheckResult::new("gradient_consistency", gc.max_deviation, 2.0 * h).informational());
        rep.artifact(
            "gradient_consistency",
            json!({
                "spacing": h,
                "max_deviation": gc.max_deviation,
                "stencil": if space.geometry() == Geometry::Circle { "central_periodic" } else { "central_with_one_sided_ends" },
            }),
        );
    }
    rep.artifact("plan", r.plan.table().to_rows());
    rep.artifact("value", r.value);
    rep.artifact(
        "certificate",
        json!({
            "objective": r.certificate.objective,
            "lagrangian": LagrangianJson::from_lagrangian(&r.certificate.lagrangian),
        }),
    );
    Ok(rep)
}

fn phi_table(phi: &[Option<f64>]) -> Result<ValueTable, CmdError> {
    Ok(ValueTable::new(phi.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())?)
}

pub fn invert(text: &str, command: Vec<String>, s: Settings) -> CmdResult {
    let inst: InvertInstance = parse(text)?;
    let c = inst.coupling.build()?;
    let mut rep = RunReport::new(command).with_instance(text.as_bytes());
    let tol = s.check_tol();

    match (&inst.phi, &inst.b, inst.p) {
        (Some(phi), Some(b), None) => {
            let phi = phi_table(phi)?;
            let b = SkewMap::new(b.clone(), &c)?;
            let sk = is_c_skew(&b, &c, s.tol);
            let mut chk = CheckResult::new("c_skew", sk.residual, s.tol);
            if let Some((a, bb)) = sk.witness {
                chk = chk.with_witness(vec![a, bb]);
            }
            rep.check(chk);
            if !sk.holds {
                return Ok(rep);
            }
            let inv = invert_via_skew(&phi, &b, &c, s.tol)?;
            rep.check(CheckResult::new("young_lower_bound", (-inv.argmin.min).max(0.0), s.tol));
            report_argmin(&mut rep, inv.argmin.min, &inv.argmin.argmin, s.tol);
            if inv.argmin.min <= s.tol {
                rep.check(flag("skew_inclusion", inv.verified.iter().all(|v| *v)));
            }
            rep.artifact("J", &inv.j_values);
            if let Some(curves) = &inst.curves {
                let fam = curves.build(c.ny())?;
                let cv = check_arcwise_convexity(c.table(), &fam, Variable::Second, true, s.tol)?;
                rep.check(CheckResult::new("coupling_arcwise_convex_in_y", cv.worst_excess, s.tol).informational());
                let fc = c_conjugate(&phi, &c)?;
                let cc = check_arcwise_convexity_fn(fc.values(), &fam, s.tol)?;
                rep.check(CheckResult::new("conjugate_arcwise_convex", cc.worst_excess, s.tol).informational());
            }
        }
        (None, None, Some(p)) => {
            let l = match (&inst.lagrangian, &inst.pairs) {
                (Some(lj), None) => lj.build(&c)?,
                (None, Some(pairs)) => {
                    let m = RelationJson { pairs: pairs.clone() }.build()?;
                    let f = fitzpatrick(&m, &c, s.tol)?;
                    synthesize_selfdual(&f.table, &f.conjugate, &c, s.synthesis())?
                }
                _ => {
                    return Err(CmdError {
                        code: exit::INPUT,
                        message: "give exactly one of \"lagrangian\" or \"pairs\" with \"p\"".into(),
                    })
                }
            };
            if p >= c.ny() {
                return Err(CmdError { code: exit::INPUT, message: format!("p = {p} is not an index of Y") });
            }
            let selfdual = l.residual() <= tol;
            let am = if selfdual {
                rep.check(CheckResult::new("selfdual_residual", l.residual(), tol));
                minimize_ip(&l, p, tol)?
            } else {
                // e.g. a closed-form Lagrangian restricted to a grid that
                // misses the preimage of p: I_p is still defined, but a zero
                // minimum is no longer guaranteed
                rep.check(CheckResult::new("selfdual_residual", l.residual(), tol).informational());
                rep.warn(format!("L is not selfdual on this grid (residual {:.3e})", l.residual()));
                let values: Vec<f64> = (0..c.nx()).map(|x| l.value(x, p) - c.c(x, p)).collect();
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let argmin = (0..c.nx()).filter(|&x| values[x] <= min + tol).collect();
                Argmin { min, argmin }
            };
            rep.check(CheckResult::new("ip_lower_bound", (-am.min).max(0.0), tol));
            report_argmin(&mut rep, am.min, &am.argmin, tol);
            if selfdual && am.min <= tol {
                let g = graph_of_dbar(&l, tol)?;
                let ok = am.argmin.iter().all(|&x| g.at(x).contains(&p));
                rep.check(flag("dbar_inclusion", ok).with_witness(am.argmin.clone()));
            }
        }
        _ => {
            return Err(CmdError {
                code: exit::INPUT,
                message: "invert needs either \"phi\" and \"B\", or \"p\" with \"lagrangian\" or \"pairs\"".into(),
            })
        }
    }
    Ok(rep)
}

fn report_argmin(rep: &mut RunReport, min: f64, argmin: &[usize], tol: f64) {
    rep.artifact("min", min);
    rep.artifact("argmin", argmin);
    let solved = min <= tol;
    rep.artifact("solution_on_grid", solved);
    if !solved {
        rep.warn(format!("no solution on the grid: minimum {min:.6e} > tol"));
    }
}
