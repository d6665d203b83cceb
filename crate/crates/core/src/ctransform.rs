//! c-conjugation and its consequences, for any [`Pairing`].
//!
//! For `f` on the left index set, `f^c(v) = max_u { c(u, v) - f(u) }`, with
//! `+inf` entries of `f` skipped. Conjugating a function of the right index
//! set goes the other way: `g^c(u) = max_v { c(u, v) - g(v) }`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::space::Pairing;

/// Extended-real function on a finite index set. Entries are finite or
/// `+inf`; at least one entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || **v == f64::NEG_INFINITY)
        {
            return Err(Error::invalid(format!("value[{i}] = {v} is not in R or +inf")));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::invalid("function is identically +inf (not proper)"));
        }
        Ok(ValueTable { values })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(alloc::vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max)
    }
}

fn check_len(f: &ValueTable, expected: usize, side: &str) -> Result<()> {
    if f.len() == expected {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "function has {} entries but the {side} space has {expected}",
            f.len()
        )))
    }
}

/// `f^c(v) = max_u c(u, v) - f(u)`.
pub fn c_conjugate<P: Pairing + ?Sized>(f: &ValueTable, c: &P) -> Result<ValueTable> {
    check_len(f, c.left_len(), "left")?;
    let out = (0..c.right_len())
        .map(|v| {
            f.values
                .iter()
                .enumerate()
                .filter(|(_, fu)| fu.is_finite())
                .map(|(u, &fu)| c.value(u, v) - fu)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    ValueTable::new(out)
}

/// `g^c(u) = max_v c(u, v) - g(v)` for `g` on the right index set.
pub fn c_conjugate_right<P: Pairing + ?Sized>(g: &ValueTable, c: &P) -> Result<ValueTable> {
    check_len(g, c.right_len(), "right")?;
    let out = (0..c.left_len())
        .map(|u| {
            g.values
                .iter()
                .enumerate()
                .filter(|(_, gv)| gv.is_finite())
                .map(|(v, &gv)| c.value(u, v) - gv)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    ValueTable::new(out)
}

/// `f^cc`, the largest c-convex minorant of `f`.
pub fn c_double_conjugate<P: Pairing + ?Sized>(f: &ValueTable, c: &P) -> Result<ValueTable> {
    c_conjugate_right(&c_conjugate(f, c)?, c)
}

/// True iff `max_u |f^cc(u) - f(u)| <= tol`.
pub fn is_c_convex<P: Pairing + ?Sized>(f: &ValueTable, c: &P, tol: f64) -> Result<bool> {
    Ok(c_double_conjugate(f, c)?.max_abs_diff(f) <= tol)
}

/// `∂_c f(u0)` through the Young equality `f(u0) + f^c(v) = c(u0, v)`,
/// accepting every `v` within `tol`. Ties are all kept.
pub fn c_subdifferential<P: Pairing + ?Sized>(
    f: &ValueTable,
    c: &P,
    u0: usize,
    tol: f64,
) -> Result<Vec<usize>> {
    check_len(f, c.left_len(), "left")?;
    if u0 >= f.len() {
        return Err(Error::invalid(format!("index {u0} out of range 0..{}", f.len())));
    }
    let f0 = f.get(u0);
    if !f0.is_finite() {
        return Err(Error::EmptyResult(format!("f({u0}) = +inf")));
    }
    let fc = c_conjugate(f, c)?;
    Ok((0..c.right_len())
        .filter(|&v| f0 + fc.get(v) <= c.value(u0, v) + tol)
        .collect())
}

/// Largest value of `c(u, v) - f(u) - f^c(v)` over pairs with `f(u)` finite.
/// Nonpositive up to rounding by construction of the conjugate.
pub fn check_young<P: Pairing + ?Sized>(f: &ValueTable, c: &P) -> Result<f64> {
    let fc = c_conjugate(f, c)?;
    let mut worst = f64::NEG_INFINITY;
    for u in 0..c.left_len() {
        let fu = f.get(u);
        if !fu.is_finite() {
            continue;
        }
        for v in 0..c.right_len() {
            worst = worst.max(c.value(u, v) - fu - fc.get(v));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{make_inner_product_coupling, Coupling};
    use crate::table::Table;
    use alloc::vec;

    fn ip3() -> Coupling {
        make_inner_product_coupling(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap()
    }

    fn sym3() -> Coupling {
        make_inner_product_coupling(&[-1.0, 0.0, 1.0], &[-1.0, 0.0, 1.0]).unwrap()
    }

    fn half_square() -> ValueTable {
        ValueTable::new(vec![0.5, 0.0, 0.5]).unwrap()
    }

    /// `{v : f(u0) - f(u) <= c(u0, v) - c(u, v) for all u}`, straight from the
    /// definition.
    fn subdiff_by_definition(f: &ValueTable, c: &Coupling, u0: usize, tol: f64) -> Vec<usize> {
        (0..c.ny())
            .filter(|&v| {
                (0..c.nx()).all(|u| {
                    !f.get(u).is_finite() || f.get(u0) - f.get(u) <= c.c(u0, v) - c.c(u, v) + tol
                })
            })
            .collect()
    }

    #[test]
    fn conjugate_of_zero() {
        let f = ValueTable::constant(3, 0.0).unwrap();
        assert_eq!(c_conjugate(&f, &ip3()).unwrap().values(), &[0.0, 2.0, 4.0]);
        assert_eq!(c_double_conjugate(&f, &ip3()).unwrap().values(), &[0.0, 0.0, 0.0]);
        assert!(is_c_convex(&f, &ip3(), 1e-9).unwrap());
    }

    #[test]
    fn quadratic_is_self_conjugate() {
        let f = half_square();
        let c = sym3();
        assert_eq!(c_conjugate(&f, &c).unwrap().values(), &[0.5, 0.0, 0.5]);
        assert_eq!(c_double_conjugate(&f, &c).unwrap(), f);
    }

    #[test]
    fn conjugate_matches_double_loop() {
        let vals = [0.3, -1.2, 2.5, 0.0, 0.7, -0.4, 1.1];
        let ys = [-1.5, -0.5, 0.0, 0.25, 1.0, 2.0, 3.0];
        let c = make_inner_product_coupling(&ys, &ys).unwrap();
        let f = ValueTable::new(vals.to_vec()).unwrap();
        let fc = c_conjugate(&f, &c).unwrap();
        for v in 0..7 {
            let mut best = f64::NEG_INFINITY;
            for u in 0..7 {
                let cand = ys[u] * ys[v] - vals[u];
                if cand > best {
                    best = cand;
                }
            }
            assert_eq!(fc.get(v), best);
        }
    }

    #[test]
    fn lowered_entry_breaks_c_convexity() {
        let c = Coupling::from_table(
            Table::from_rows(&[
                vec![0.0, 1.0, -2.0],
                vec![1.5, 0.0, 0.5],
                vec![-1.0, 2.0, 0.0],
                vec![0.3, -0.7, 1.2],
            ])
            .unwrap(),
        )
        .unwrap();
        let f = ValueTable::new(vec![0.2, -0.1, 0.9, 0.4]).unwrap();
        let fcc = c_double_conjugate(&f, &c).unwrap();
        assert!(is_c_convex(&fcc, &c, 1e-9).unwrap());
        let mut lowered = fcc.values().to_vec();
        lowered[1] -= 1.0;
        let lowered = ValueTable::new(lowered).unwrap();
        assert!(!is_c_convex(&lowered, &c, 1e-9).unwrap());
    }

    #[test]
    fn subdifferential_examples() {
        let f = ValueTable::constant(3, 0.0).unwrap();
        assert_eq!(c_subdifferential(&f, &ip3(), 1, 1e-9).unwrap(), vec![0]);
        assert_eq!(c_subdifferential(&f, &ip3(), 2, 1e-9).unwrap(), vec![0, 1, 2]);
        assert_eq!(c_subdifferential(&half_square(), &sym3(), 1, 1e-9).unwrap(), vec![1]);
        for u0 in 0..3 {
            assert_eq!(
                c_subdifferential(&f, &ip3(), u0, 1e-9).unwrap(),
                subdiff_by_definition(&f, &ip3(), u0, 1e-9)
            );
        }
    }

    #[test]
    fn subdifferential_at_infinity_is_empty_result() {
        let f = ValueTable::new(vec![0.0, f64::INFINITY, 1.0]).unwrap();
        assert!(matches!(
            c_subdifferential(&f, &ip3(), 1, 1e-9),
            Err(Error::EmptyResult(_))
        ));
    }

    #[test]
    fn improper_functions_rejected() {
        assert!(ValueTable::new(vec![f64::INFINITY; 3]).is_err());
        assert!(ValueTable::new(vec![0.0, f64::NAN]).is_err());
        assert!(ValueTable::new(vec![f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn young_gap_examples() {
        let f = ValueTable::constant(3, 0.0).unwrap();
        assert_eq!(check_young(&f, &ip3()).unwrap(), 0.0);
        assert_eq!(check_young(&half_square(), &sym3()).unwrap(), 0.0);
    }

    #[test]
    fn infinite_entries_are_skipped() {
        let f = ValueTable::new(vec![f64::INFINITY, 0.0, f64::INFINITY]).unwrap();
        let fc = c_conjugate(&f, &ip3()).unwrap();
        assert_eq!(fc.values(), &[0.0, 1.0, 2.0]);
        assert!(!is_c_convex(&f, &ip3(), 1e-9).unwrap());
    }
}
