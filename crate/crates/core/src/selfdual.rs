//! Fitzpatrick functions, C-conjugation of Lagrangians, and the constructive
//! synthesis of C-selfdual Lagrangians.
//!
//! A Lagrangian is a table `L[x][y]` on `X x Y`. Its C-conjugate lives on
//! `Y x X`:
//!
//! ```text
//! L^C(y, x) = max_{x1, y1} c(x1, y) + c(x, y1) - L(x1, y1)
//! ```
//!
//! The right-hand side is also `max_v C(u, v) - L(R2 v)` at `u = (x, y)`, so
//! the same kernel ([`bar`]) serves conjugation, the selfduality residual and
//! the synthesis step. It factors through the partial conjugate
//! `H(x1, x) = max_{y1} c(x, y1) - L(x1, y1)`, which costs `O(n^2 m)` instead
//! of the `O(n^2 m^2)` double loop.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::monotone::{is_c_monotone, is_maximal_c_monotone, Relation};
use crate::space::{Coupling, Pairing, SymmetrizedCoupling};
use crate::table::Table;
use crate::DEFAULT_TOL;

/// `H(z, x) = max_y c(x, y) - L(z, y)`, skipping `+inf` entries. Rows of `L`
/// that are entirely `+inf` give `-inf` rows.
pub(crate) fn partial_conjugate(l: &Table, c: &Coupling) -> Table {
    let (n, m) = (c.nx(), c.ny());
    let mut h = Table::filled(n, n, f64::NEG_INFINITY);
    for z in 0..n {
        let lz = l.row(z);
        for x in 0..n {
            let cx = c.table().row(x);
            let mut best = f64::NEG_INFINITY;
            for y in 0..m {
                if lz[y].is_finite() {
                    best = best.max(cx[y] - lz[y]);
                }
            }
            h[(z, x)] = best;
        }
    }
    h
}

/// `bar(P)(x, y) = max_{x1, y1} c(x, y1) + c(x1, y) - P(x1, y1)`.
///
/// Equal to `P^C(y, x)`. Fails when `P` is identically `+inf`.
pub fn bar(p: &Table, c: &Coupling) -> Result<Table> {
    let (n, m) = (c.nx(), c.ny());
    if p.shape() != (n, m) {
        return Err(Error::invalid(format!(
            "Lagrangian table is {}x{}, expected {n}x{m}",
            p.rows(),
            p.cols()
        )));
    }
    if !p.as_slice().iter().any(|v| v.is_finite()) {
        return Err(Error::invalid("Lagrangian is identically +inf"));
    }
    let h = partial_conjugate(p, c);
    let mut out = Table::filled(n, m, f64::NEG_INFINITY);
    for x in 0..n {
        for x1 in 0..n {
            let hx = h[(x1, x)];
            if hx == f64::NEG_INFINITY {
                continue;
            }
            let c1 = c.table().row(x1);
            for y in 0..m {
                let cand = c1[y] + hx;
                if cand > out[(x, y)] {
                    out[(x, y)] = cand;
                }
            }
        }
    }
    Ok(out)
}

/// `L^C` as a table on `Y x X` (rows indexed by `y`).
pub fn c_conjugate_lagrangian(l: &Table, c: &Coupling) -> Result<Table> {
    Ok(bar(l, c)?.transpose())
}

/// `max |L^C(y, x) - L(x, y)|`. Infinite where exactly one side is `+inf`.
pub fn selfdual_residual(l: &Table, c: &Coupling) -> Result<f64> {
    Ok(bar(l, c)?.max_abs_diff(l))
}

/// A Lagrangian on `X x Y` together with its cached selfduality residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    coupling: Coupling,
    table: Table,
    residual: f64,
    tol: f64,
    iterations: usize,
}

impl Lagrangian {
    pub fn new(coupling: Coupling, table: Table) -> Result<Self> {
        if table.as_slice().iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::invalid("Lagrangian entries must be real or +inf"));
        }
        let residual = selfdual_residual(&table, &coupling)?;
        Ok(Lagrangian {
            coupling,
            table,
            residual,
            tol: DEFAULT_TOL,
            iterations: 0,
        })
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.table[(x, y)]
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Tolerance the Lagrangian was synthesized or checked against.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Averaging steps used by synthesis (0 for hand-built Lagrangians).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn conjugate(&self) -> Table {
        c_conjugate_lagrangian(&self.table, &self.coupling)
            .expect("Lagrangian tables are proper by construction")
    }

    /// `min (L - c)`; nonnegative up to rounding when selfdual.
    pub fn min_excess_over_coupling(&self) -> f64 {
        self.table
            .iter_indexed()
            .map(|(x, y, l)| l - self.coupling.c(x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Returns `(residual <= tol, residual)`.
pub fn is_selfdual(l: &Lagrangian, tol: f64) -> (bool, f64) {
    (l.residual <= tol, l.residual)
}

/// Which of the Fitzpatrick guarantees apply to the input relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guarantee {
    /// `M` is maximal c-monotone: `c <= F <= F^C o swap` with equality
    /// exactly on `M`.
    Maximal,
    /// `M` is c-monotone but admits extensions; `F = c` on `M` still holds.
    Monotone,
    /// `M` is not c-monotone; only the formula is computed.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitzpatrickFunction {
    pub relation: Relation,
    pub coupling: Coupling,
    /// `F[x][y]`.
    pub table: Table,
    /// `F^C[y][x]`.
    pub conjugate: Table,
    pub guarantee: Guarantee,
}

impl FitzpatrickFunction {
    /// `F^C(y, x)` laid out on `X x Y`.
    pub fn conjugate_swapped(&self) -> Table {
        self.conjugate.transpose()
    }
}

/// `F(x, y) = max_{(a, b) in M} c(x, b) + c(a, y) - c(a, b)`.
pub fn fitzpatrick(m: &Relation, c: &Coupling, tol: f64) -> Result<FitzpatrickFunction> {
    m.check_bounds(c)?;
    let table = Table::from_fn(c.nx(), c.ny(), |x, y| {
        m.pairs()
            .iter()
            .map(|&(a, b)| c.c(x, b) + c.c(a, y) - c.c(a, b))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let conjugate = c_conjugate_lagrangian(&table, c)?;
    let guarantee = if !is_c_monotone(m, c, tol)?.holds {
        Guarantee::None
    } else if is_maximal_c_monotone(m, c, tol)?.maximal {
        Guarantee::Maximal
    } else {
        Guarantee::Monotone
    };
    Ok(FitzpatrickFunction {
        relation: m.clone(),
        coupling: c.clone(),
        table,
        conjugate,
        guarantee,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            tol: DEFAULT_TOL,
            max_iter: 10_000,
        }
    }
}

/// One averaging step, handed to the observer of
/// [`synthesize_selfdual_with`].
#[derive(Debug)]
pub struct SynthesisStep<'a> {
    pub iteration: usize,
    /// `L_k`.
    pub current: &'a Table,
    /// `bar(L_k)(u) = max_v C(u, v) - L_k(R2 v)`.
    pub bar: &'a Table,
    /// `Phi_C`, the lower envelope of the admissible class.
    pub lower: &'a Table,
    /// `Phi o R1`, the upper envelope.
    pub upper: &'a Table,
    /// `max |L_k - bar(L_k)|`.
    pub residual: f64,
}

/// Synthesizes a C-selfdual Lagrangian between the bounds `psi` (on `X x Y`)
/// and `phi` (on `Y x X`), which must satisfy `psi(u) + phi(v) >= C(u, v)`.
///
/// Starts from `K = (Phi_C + Phi o R1) / 2` with
/// `Phi(y, x) = (phi(y, x) + psi(x, y)) / 2` and iterates
/// `L <- (L + bar(L)) / 2`, which decreases pointwise and stays admissible.
pub fn synthesize_selfdual(
    psi: &Table,
    phi: &Table,
    c: &Coupling,
    opts: SynthesisOptions,
) -> Result<Lagrangian> {
    synthesize_selfdual_with(psi, phi, c, opts, |_| {})
}

pub fn synthesize_selfdual_with(
    psi: &Table,
    phi: &Table,
    c: &Coupling,
    opts: SynthesisOptions,
    mut observe: impl FnMut(&SynthesisStep<'_>),
) -> Result<Lagrangian> {
    let (n, m) = (c.nx(), c.ny());
    if psi.shape() != (n, m) || phi.shape() != (m, n) {
        return Err(Error::invalid(format!(
            "bounds must be {n}x{m} (psi) and {m}x{n} (phi)"
        )));
    }
    if !psi.is_all_finite() || !phi.is_all_finite() {
        return Err(Error::invalid("synthesis bounds must be finite"));
    }
    let phi_swapped = phi.transpose();
    // hypothesis: psi(u) >= max_v C(u, v) - phi(v) = bar(phi o R1)(u)
    let needed = bar(&phi_swapped, c)?;
    if let Some((x, y, gap)) = psi
        .iter_indexed()
        .map(|(x, y, p)| (x, y, needed[(x, y)] - p))
        .find(|(_, _, gap)| *gap > opts.tol)
    {
        return Err(Error::invalid(format!(
            "psi + phi >= C fails at u = ({x}, {y}) by {gap:e}"
        )));
    }

    let upper = psi.zip_map(&phi_swapped, |a, b| (a + b) / 2.0);
    let lower = bar(&upper, c)?;
    let mut current = lower.zip_map(&upper, |a, b| (a + b) / 2.0);
    for iteration in 0..=opts.max_iter {
        let b = bar(&current, c)?;
        let residual = current.max_abs_diff(&b);
        observe(&SynthesisStep {
            iteration,
            current: &current,
            bar: &b,
            lower: &lower,
            upper: &upper,
            residual,
        });
        if residual <= opts.tol {
            return Ok(Lagrangian {
                coupling: c.clone(),
                table: current,
                residual,
                tol: opts.tol,
                iterations: iteration,
            });
        }
        if iteration == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
            });
        }
        current = current.zip_map(&b, |a, b| (a + b) / 2.0);
    }
    unreachable!("loop returns on its last iteration")
}

/// A coupling `C` on `U x V` with an invertible `R: V -> U` satisfying
/// `C(u, v) = C(R^{-1} v, R u)`.
pub trait SelfdualStructure: Pairing {
    /// `R^{-1}: U -> V`.
    fn r1(&self, u: usize) -> usize;
    /// `R: V -> U`.
    fn r2(&self, v: usize) -> usize;
}

impl SelfdualStructure for SymmetrizedCoupling {
    fn r1(&self, u: usize) -> usize {
        SymmetrizedCoupling::r1(self, u)
    }

    fn r2(&self, v: usize) -> usize {
        SymmetrizedCoupling::r2(self, v)
    }
}

/// Same averaging scheme for an arbitrary [`SelfdualStructure`], by direct
/// `O(|U| |V|)` conjugation. Returns `L` on `U` with `L^C = L o R`.
pub fn synthesize_selfdual_general<S: SelfdualStructure + ?Sized>(
    psi: &[f64],
    phi: &[f64],
    s: &S,
    opts: SynthesisOptions,
) -> Result<(Vec<f64>, usize)> {
    let (nu, nv) = (s.left_len(), s.right_len());
    if psi.len() != nu || phi.len() != nv {
        return Err(Error::invalid("bound lengths do not match the structure"));
    }
    if psi.iter().chain(phi).any(|v| !v.is_finite()) {
        return Err(Error::invalid("synthesis bounds must be finite"));
    }
    // lbar(w)(u) = max_v C(u, v) - w(R v)
    let lbar = |w: &[f64]| -> Vec<f64> {
        (0..nu)
            .map(|u| {
                (0..nv)
                    .map(|v| s.value(u, v) - w[s.r2(v)])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    };
    let phi_on_u: Vec<f64> = (0..nu).map(|u| phi[s.r1(u)]).collect();
    for (u, (&p, need)) in psi.iter().zip(lbar(&phi_on_u)).enumerate() {
        if need - p > opts.tol {
            return Err(Error::invalid(format!("psi + phi >= C fails at u = {u}")));
        }
    }
    let upper: Vec<f64> = (0..nu).map(|u| (phi[s.r1(u)] + psi[u]) / 2.0).collect();
    let lower = lbar(&upper);
    let mut current: Vec<f64> = lower.iter().zip(&upper).map(|(a, b)| (a + b) / 2.0).collect();
    for iteration in 0..=opts.max_iter {
        let b = lbar(&current);
        let residual = current
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= opts.tol {
            return Ok((current, iteration));
        }
        current = current.iter().zip(&b).map(|(a, b)| (a + b) / 2.0).collect();
        if iteration == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Graph of `x -> {y : L(x, y) = c(x, y)}` and its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DbarGraph {
    pub pairs: Vec<(usize, usize)>,
    pub domain: Vec<usize>,
}

impl DbarGraph {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn at(&self, x: usize) -> Vec<usize> {
        self.pairs.iter().filter(|p| p.0 == x).map(|p| p.1).collect()
    }

    pub fn to_relation(&self) -> Result<Relation> {
        Relation::new(self.pairs.clone())
    }
}

/// `{(x, y) : L(x, y) - c(x, y) <= tol}` for a selfdual `L`.
pub fn graph_of_dbar(l: &Lagrangian, tol: f64) -> Result<DbarGraph> {
    if l.residual > tol {
        return Err(Error::invalid(format!(
            "Lagrangian is not selfdual: residual {:e} > {tol:e}",
            l.residual
        )));
    }
    let pairs: Vec<(usize, usize)> = l
        .table
        .iter_indexed()
        .filter(|&(x, y, v)| v - l.coupling.c(x, y) <= tol)
        .map(|(x, y, _)| (x, y))
        .collect();
    let mut domain: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    domain.dedup();
    Ok(DbarGraph { pairs, domain })
}

/// Fitzpatrick function, synthesized Lagrangian and recovered graph of one
/// relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    pub fitzpatrick: FitzpatrickFunction,
    pub lagrangian: Lagrangian,
    pub recovered: DbarGraph,
    pub sandwich: Sandwich,
}

impl RoundTrip {
    /// The recovered graph equals the input relation as a set.
    pub fn exact(&self) -> bool {
        self.recovered.pairs == self.fitzpatrick.relation.pairs()
    }
}

/// `M -> F_M -> L -> graph of ∂̄_c L`. For maximal `M` the recovered graph
/// is `M` itself.
pub fn round_trip(m: &Relation, c: &Coupling, opts: SynthesisOptions, recover_tol: f64) -> Result<RoundTrip> {
    let f = fitzpatrick(m, c, opts.tol)?;
    let l = synthesize_selfdual(&f.table, &f.conjugate, c, opts)?;
    let recovered = graph_of_dbar(&l, recover_tol)?;
    let sandwich = check_sandwich(&f, &l);
    Ok(RoundTrip {
        fitzpatrick: f,
        lagrangian: l,
        recovered,
        sandwich,
    })
}

/// Worst violations of `c <= F <= L <= F^C o swap`, and of the four-way
/// equality on `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub c_above_f: f64,
    pub f_above_l: f64,
    pub l_above_fc: f64,
    pub spread_on_m: f64,
}

impl Sandwich {
    pub fn holds(&self, tol: f64) -> bool {
        self.c_above_f <= tol && self.f_above_l <= tol && self.l_above_fc <= tol && self.spread_on_m <= tol
    }
}

pub fn check_sandwich(f: &FitzpatrickFunction, l: &Lagrangian) -> Sandwich {
    let c = &f.coupling;
    let fcs = f.conjugate_swapped();
    let mut s = Sandwich {
        c_above_f: f64::NEG_INFINITY,
        f_above_l: f64::NEG_INFINITY,
        l_above_fc: f64::NEG_INFINITY,
        spread_on_m: 0.0,
    };
    for (x, y, fv) in f.table.iter_indexed() {
        let (cv, lv, gv) = (c.c(x, y), l.value(x, y), fcs[(x, y)]);
        s.c_above_f = s.c_above_f.max(cv - fv);
        s.f_above_l = s.f_above_l.max(fv - lv);
        s.l_above_fc = s.l_above_fc.max(lv - gv);
        if f.relation.contains((x, y)) {
            let hi = cv.max(fv).max(lv).max(gv);
            let lo = cv.min(fv).min(lv).min(gv);
            s.spread_on_m = s.spread_on_m.max(hi - lo);
        }
    }
    s
}
