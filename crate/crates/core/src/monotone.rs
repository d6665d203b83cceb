//! c-monotonicity, c-cyclic monotonicity, maximality by single-pair
//! extension, and the symmetric enlargement `E_M`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::space::{Coupling, Pairing, SymmetrizedCoupling};

/// A nonempty set of index pairs, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    pairs: Vec<(usize, usize)>,
}

impl Relation {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("relation is empty"));
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate pair {:?}", w[0])));
        }
        Ok(Relation { pairs })
    }

    /// Graph `{(x, map[x])}` of a total map.
    pub fn graph(map: &[usize]) -> Result<Self> {
        Self::new(map.iter().copied().enumerate().collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    /// Distinct first coordinates, ascending.
    pub fn domain(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        d.dedup();
        d
    }

    pub fn check_bounds<P: Pairing + ?Sized>(&self, c: &P) -> Result<()> {
        match self
            .pairs
            .iter()
            .find(|(u, v)| *u >= c.left_len() || *v >= c.right_len())
        {
            Some(p) => Err(Error::invalid(format!(
                "pair {p:?} outside {}x{}",
                c.left_len(),
                c.right_len()
            ))),
            None => Ok(()),
        }
    }
}

/// `c(u1, v2) + c(u2, v1) - c(u1, v1) - c(u2, v2)`; positive means the two
/// pairs violate monotonicity.
#[inline]
fn pair_excess<P: Pairing + ?Sized>(c: &P, a: (usize, usize), b: (usize, usize)) -> f64 {
    c.value(a.0, b.1) + c.value(b.0, a.1) - c.value(a.0, a.1) - c.value(b.0, b.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCheck {
    pub holds: bool,
    /// Lexicographically first violating pair of pairs.
    pub witness: Option<[(usize, usize); 2]>,
    /// Largest `c(x1,y2) + c(x2,y1) - c(x1,y1) - c(x2,y2)` over pairs.
    pub worst_excess: f64,
}

pub fn is_c_monotone<P: Pairing + ?Sized>(m: &Relation, c: &P, tol: f64) -> Result<MonotoneCheck> {
    m.check_bounds(c)?;
    let p = m.pairs();
    let mut witness = None;
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let e = pair_excess(c, p[i], p[j]);
            worst = worst.max(e);
            if e > tol && witness.is_none() {
                witness = Some([p[i], p[j]]);
            }
        }
    }
    Ok(MonotoneCheck {
        holds: witness.is_none(),
        witness,
        worst_excess: worst,
    })
}

/// Enumeration guards for cycle checks. `max_pairs[n]` bounds `|M|` at order
/// `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCaps {
    pub max_order: usize,
    pub max_pairs: [usize; 6],
}

impl Default for CycleCaps {
    fn default() -> Self {
        CycleCaps {
            max_order: 5,
            max_pairs: [0, 0, 5000, 40, 16, 10],
        }
    }
}

impl CycleCaps {
    fn check(&self, order: usize, size: usize) -> Result<()> {
        if order < 2 {
            return Err(Error::invalid("cycle order must be at least 2"));
        }
        if order > self.max_order || order >= self.max_pairs.len() {
            return Err(Error::ResourceLimit(format!(
                "cycle order {order} exceeds cap {}",
                self.max_order
            )));
        }
        if size > self.max_pairs[order] {
            return Err(Error::ResourceLimit(format!(
                "{size} pairs exceed the cap of {} at order {order}",
                self.max_pairs[order]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleCheck {
    pub order: usize,
    pub holds: bool,
    /// First cycle (lexicographic in pair indices) whose sum is below `-tol`.
    pub witness: Option<Vec<(usize, usize)>>,
    /// Smallest cycle sum seen.
    pub min_sum: f64,
}

/// Checks `sum_i [c(u_i, v_i) - c(u_{i+1}, v_i)] >= -tol` over every
/// `order`-tuple of pairs from `m`, with `u_{order+1} = u_1`.
pub fn is_c_cyclically_monotone<P: Pairing + ?Sized>(
    m: &Relation,
    c: &P,
    order: usize,
    tol: f64,
    caps: &CycleCaps,
) -> Result<CycleCheck> {
    m.check_bounds(c)?;
    caps.check(order, m.len())?;
    let p = m.pairs();
    let k = p.len();
    let mut idx = vec![0usize; order];
    let mut witness = None;
    let mut min_sum = f64::INFINITY;
    loop {
        let mut sum = 0.0;
        for i in 0..order {
            let (u, v) = p[idx[i]];
            let next_u = p[idx[(i + 1) % order]].0;
            sum += c.value(u, v) - c.value(next_u, v);
        }
        min_sum = min_sum.min(sum);
        if sum < -tol && witness.is_none() {
            witness = Some(idx.iter().map(|&i| p[i]).collect());
        }
        // odometer increment
        let mut pos = order;
        loop {
            if pos == 0 {
                return Ok(CycleCheck {
                    order,
                    holds: witness.is_none(),
                    witness,
                    min_sum,
                });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalityCheck {
    pub maximal: bool,
    /// Every pair outside `m` compatible with all pairs of `m`, ascending.
    pub extensions: Vec<(usize, usize)>,
}

/// Exhaustive single-pair extension search over the full product. A pair is
/// admissible when it is c-monotone against every pair of `m`; violations
/// inside `m` itself are not re-examined.
pub fn is_maximal_c_monotone<P: Pairing + ?Sized>(
    m: &Relation,
    c: &P,
    tol: f64,
) -> Result<MaximalityCheck> {
    m.check_bounds(c)?;
    let mut extensions = Vec::new();
    for u in 0..c.left_len() {
        for v in 0..c.right_len() {
            if m.contains((u, v)) {
                continue;
            }
            if m.pairs().iter().all(|&q| pair_excess(c, (u, v), q) <= tol) {
                extensions.push((u, v));
            }
        }
    }
    Ok(MaximalityCheck {
        maximal: extensions.is_empty(),
        extensions,
    })
}

/// `E_M = {((x, y), (y, x)) : (x, y) in M}` inside `U x V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Enlargement {
    source: Relation,
    lifted: Relation,
}

impl Enlargement {
    pub fn source(&self) -> &Relation {
        &self.source
    }

    /// The lifted pairs as `(u, v)` indices of the symmetrized coupling.
    pub fn lifted(&self) -> &Relation {
        &self.lifted
    }

    pub fn len(&self) -> usize {
        self.lifted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifted.is_empty()
    }
}

pub fn enlarge(m: &Relation, sc: &SymmetrizedCoupling) -> Result<Enlargement> {
    m.check_bounds(sc.base())?;
    let lifted = m
        .pairs()
        .iter()
        .map(|&(x, y)| (sc.u_index(x, y), sc.v_index(y, x)))
        .collect();
    Ok(Enlargement {
        source: m.clone(),
        lifted: Relation::new(lifted)?,
    })
}

/// `C(u1,v1) + C(u2,v2) - C(u1,v2) - C(u2,v1) - 2 (c(x1,y1) + c(x2,y2) - c(x1,y2) - c(x2,y1))`
/// for `u_i = (x_i, y_i)`, `v_i = (y_i, x_i)`. Zero for every coupling.
pub fn enlargement_identity_residual(c: &Coupling, a: (usize, usize), b: (usize, usize)) -> f64 {
    let sc = SymmetrizedCoupling::new(c.clone());
    let (u1, v1) = (sc.u_index(a.0, a.1), sc.v_index(a.1, a.0));
    let (u2, v2) = (sc.u_index(b.0, b.1), sc.v_index(b.1, b.0));
    let lifted = sc.value(u1, v1) + sc.value(u2, v2) - sc.value(u1, v2) - sc.value(u2, v1);
    let base = c.c(a.0, a.1) + c.c(b.0, b.1) - c.c(a.0, b.1) - c.c(b.0, a.1);
    lifted - 2.0 * base
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnlargementReport {
    pub monotone: MonotoneCheck,
    /// C-cyclic monotonicity of `E_M` for orders `2..=n_max`.
    pub lifted: Vec<CycleCheck>,
    /// Both sides agree: `M` c-monotone iff `E_M` passes every order.
    pub equivalent: bool,
    /// Largest `|identity residual|` over all pairs of pairs in `M`.
    pub identity_residual: f64,
}

pub fn check_enlargement_equivalence(
    m: &Relation,
    c: &Coupling,
    n_max: usize,
    tol: f64,
    caps: &CycleCaps,
) -> Result<EnlargementReport> {
    let sc = c.symmetrize();
    let e = enlarge(m, &sc)?;
    let monotone = is_c_monotone(m, c, tol)?;
    let lifted = (2..=n_max)
        .map(|n| is_c_cyclically_monotone(e.lifted(), &sc, n, tol, caps))
        .collect::<Result<Vec<_>>>()?;
    let lifted_ok = lifted.iter().all(|r| r.holds);
    let mut identity_residual = 0.0f64;
    for &a in m.pairs() {
        for &b in m.pairs() {
            identity_residual = identity_residual.max(enlargement_identity_residual(c, a, b).abs());
        }
    }
    Ok(EnlargementReport {
        equivalent: monotone.holds == lifted_ok,
        monotone,
        lifted,
        identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{make_inner_product_coupling, make_neg_half_sqdist_coupling, FiniteSpace};
    use crate::table::Table;

    fn ip(n: usize) -> Coupling {
        let g: Vec<f64> = (0..n).map(|i| i as f64).collect();
        make_inner_product_coupling(&g, &g).unwrap()
    }

    #[test]
    fn relation_rejects_empty_and_duplicates() {
        assert!(Relation::new(vec![]).is_err());
        assert!(Relation::new(vec![(0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn monotone_examples() {
        let c = ip(2);
        let m = Relation::new(vec![(0, 0), (1, 1)]).unwrap();
        assert!(is_c_monotone(&m, &c, 1e-9).unwrap().holds);
        let bad = Relation::new(vec![(0, 1), (1, 0)]).unwrap();
        let r = is_c_monotone(&bad, &c, 1e-9).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness, Some([(0, 1), (1, 0)]));
        assert_eq!(r.worst_excess, 1.0);
    }

    #[test]
    fn identity_on_circle_is_monotone() {
        let c = make_neg_half_sqdist_coupling(&FiniteSpace::circle(8).unwrap()).unwrap();
        let m = Relation::graph(&(0..8).collect::<Vec<_>>()).unwrap();
        assert!(is_c_monotone(&m, &c, 1e-12).unwrap().holds);
    }

    #[test]
    fn cyclic_examples() {
        let c = ip(2);
        let caps = CycleCaps::default();
        let m = Relation::new(vec![(0, 0), (1, 1)]).unwrap();
        assert!(is_c_cyclically_monotone(&m, &c, 2, 1e-9, &caps).unwrap().holds);
        let single = Relation::new(vec![(1, 0)]).unwrap();
        for n in 2..=5 {
            let r = is_c_cyclically_monotone(&single, &c, n, 0.0, &caps).unwrap();
            assert!(r.holds);
            assert_eq!(r.min_sum, 0.0);
        }
    }

    #[test]
    fn cycle_caps_are_enforced() {
        let c = Coupling::from_table(Table::zeros(5, 5)).unwrap();
        let all: Vec<_> = (0..5).flat_map(|x| (0..5).map(move |y| (x, y))).collect();
        let m = Relation::new(all).unwrap();
        let caps = CycleCaps::default();
        assert!(matches!(
            is_c_cyclically_monotone(&m, &c, 4, 1e-9, &caps),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            is_c_cyclically_monotone(&m, &c, 6, 1e-9, &caps),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            is_c_cyclically_monotone(&m, &c, 1, 1e-9, &caps),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn maximality_examples() {
        let c = ip(2);
        let m = Relation::new(vec![(0, 0), (1, 1)]).unwrap();
        let r = is_maximal_c_monotone(&m, &c, 1e-9).unwrap();
        assert!(!r.maximal);
        assert!(r.extensions.contains(&(0, 1)));

        let zero = Coupling::from_table(Table::zeros(3, 3)).unwrap();
        let all: Vec<_> = (0..3).flat_map(|x| (0..3).map(move |y| (x, y))).collect();
        let full = Relation::new(all).unwrap();
        assert!(is_maximal_c_monotone(&full, &zero, 0.0).unwrap().maximal);
    }

    #[test]
    fn enlargement_examples() {
        let c = ip(2);
        let sc = c.symmetrize();
        let m = Relation::new(vec![(0, 1)]).unwrap();
        let e = enlarge(&m, &sc).unwrap();
        assert_eq!(e.lifted().pairs(), &[(sc.u_index(0, 1), sc.v_index(1, 0))]);
        assert_eq!(e.source(), &m);

        let m3 = Relation::new(vec![(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(enlarge(&m3, &sc).unwrap().len(), 3);
    }

    #[test]
    fn enlargement_equivalence_examples() {
        let caps = CycleCaps::default();
        let c = ip(4);
        let id = Relation::graph(&[0, 1, 2, 3]).unwrap();
        let r = check_enlargement_equivalence(&id, &c, 4, 1e-9, &caps).unwrap();
        assert!(r.monotone.holds && r.lifted.iter().all(|l| l.holds) && r.equivalent);

        let c2 = ip(2);
        let bad = Relation::new(vec![(0, 1), (1, 0)]).unwrap();
        let r = check_enlargement_equivalence(&bad, &c2, 3, 1e-9, &caps).unwrap();
        assert!(!r.monotone.holds);
        assert!(r.lifted.iter().all(|l| !l.holds));
        assert!(r.equivalent);
        // the lifted order-2 cycle through the witness sums to 2 * (c11 + c22 - c12 - c21) = -2
        assert_eq!(r.lifted[0].min_sum, -2.0);
        let sc = c2.symmetrize();
        let w = r.lifted[0].witness.clone().unwrap();
        let back: Vec<_> = w.iter().map(|&(u, _)| sc.u_pair(u)).collect();
        assert_eq!(back, r.monotone.witness.unwrap().to_vec());
    }
}
