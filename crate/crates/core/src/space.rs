//! Finite spaces, ground metrics and couplings.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::table::Table;

/// How a space was discretized. Closed-form geodesics and gradients are only
/// available for the non-`Discrete` variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// Bare index set, possibly with a user supplied metric.
    Discrete,
    /// Points on the real line with `d(x, y) = |x - y|`.
    Interval,
    /// `n` equally spaced points on the unit circle at angles `2 pi k / n`,
    /// with arclength distance.
    Circle,
    /// Product of two circles with the flat product metric.
    Torus { n1: usize, n2: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    len: usize,
    coords: Option<Vec<Vec<f64>>>,
    metric: Option<Table>,
    geometry: Geometry,
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs() % (2.0 * PI);
    diff.min(2.0 * PI - diff)
}

impl FiniteSpace {
    /// Index set `{0, .., n-1}` with no geometry.
    pub fn indexed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a finite space needs at least one point"));
        }
        Ok(FiniteSpace {
            len: n,
            coords: None,
            metric: None,
            geometry: Geometry::Discrete,
        })
    }

    /// Index set carrying an explicit metric table.
    pub fn with_metric(metric: Table) -> Result<Self> {
        let n = metric.rows();
        if n == 0 || metric.cols() != n {
            return Err(Error::invalid("metric must be a nonempty square table"));
        }
        for i in 0..n {
            if metric[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("metric has d[{i}][{i}] != 0")));
            }
            for j in 0..n {
                let d = metric[(i, j)];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::invalid(format!("metric entry d[{i}][{j}] = {d}")));
                }
                if d != metric[(j, i)] {
                    return Err(Error::invalid(format!("metric is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(FiniteSpace {
            len: n,
            coords: None,
            metric: Some(metric),
            geometry: Geometry::Discrete,
        })
    }

    /// Points on the line; the metric is `|x - y|`.
    pub fn interval(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("interval grid is empty"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("interval grid has non-finite points"));
        }
        let metric = Table::from_fn(points.len(), points.len(), |i, j| (points[i] - points[j]).abs());
        Ok(FiniteSpace {
            len: points.len(),
            coords: Some(points.iter().map(|&p| alloc::vec![p]).collect()),
            metric: Some(metric),
            geometry: Geometry::Interval,
        })
    }

    /// `n` equally spaced points on `[a, b]`.
    pub fn uniform_interval(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("interval grid is empty"));
        }
        let pts: Vec<f64> = if n == 1 {
            alloc::vec![a]
        } else {
            (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
        };
        Self::interval(&pts)
    }

    /// `n` points on the unit circle at angles `2 pi k / n`.
    pub fn circle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("circle needs at least one point"));
        }
        let angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let metric = Table::from_fn(n, n, |i, j| {
            // index arithmetic keeps d exactly symmetric
            let steps = i.abs_diff(j).min(n - i.abs_diff(j));
            2.0 * PI * steps as f64 / n as f64
        });
        Ok(FiniteSpace {
            len: n,
            coords: Some(angles.into_iter().map(|a| alloc::vec![a]).collect()),
            metric: Some(metric),
            geometry: Geometry::Circle,
        })
    }

    /// Flat torus `S^1 x S^1` discretized as an `n1 x n2` grid, row-major.
    pub fn torus(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid("torus needs at least one point per factor"));
        }
        let n = n1 * n2;
        let coords: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                alloc::vec![
                    2.0 * PI * (k / n2) as f64 / n1 as f64,
                    2.0 * PI * (k % n2) as f64 / n2 as f64,
                ]
            })
            .collect();
        let metric = Table::from_fn(n, n, |i, j| {
            let a = circle_gap(coords[i][0], coords[j][0]);
            let b = circle_gap(coords[i][1], coords[j][1]);
            libm::sqrt(a * a + b * b)
        });
        Ok(FiniteSpace {
            len: n,
            coords: Some(coords),
            metric: Some(metric),
            geometry: Geometry::Torus { n1, n2 },
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    /// First coordinate of point `i`, if the space has coordinates.
    pub fn coord(&self, i: usize) -> Option<f64> {
        self.coords.as_ref().map(|c| c[i][0])
    }

    pub fn metric(&self) -> Option<&Table> {
        self.metric.as_ref()
    }

    pub fn require_metric(&self) -> Result<&Table> {
        self.metric
            .as_ref()
            .ok_or_else(|| Error::invalid("space has no metric"))
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<f64> {
        self.metric.as_ref().map(|d| d[(i, j)])
    }

    pub fn diameter(&self) -> Option<f64> {
        self.metric
            .as_ref()
            .map(|d| d.as_slice().iter().copied().fold(0.0, f64::max))
    }

    /// Grid spacing for circles and uniform intervals.
    pub fn spacing(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Circle => Some(2.0 * PI / self.len as f64),
            Geometry::Interval if self.len >= 2 => {
                let c = self.coords.as_ref()?;
                let h = c[1][0] - c[0][0];
                let uniform = c
                    .windows(2)
                    .all(|w| ((w[1][0] - w[0][0]) - h).abs() <= 1e-12 * h.abs().max(1.0));
                uniform.then_some(h)
            }
            _ => None,
        }
    }

    /// Signed geodesic displacement from `i` to `j`: the tangent vector at `i`
    /// pointing to `j` along a shortest path. On the circle antipodal pairs
    /// resolve to `+pi`.
    pub fn displacement(&self, i: usize, j: usize) -> Option<f64> {
        match self.geometry {
            Geometry::Interval => Some(self.coord(j)? - self.coord(i)?),
            Geometry::Circle => {
                let n = self.len as i64;
                let mut steps = (j as i64 - i as i64).rem_euclid(n);
                if 2 * steps > n {
                    steps -= n;
                }
                Some(2.0 * PI * steps as f64 / n as f64)
            }
            _ => None,
        }
    }
}

/// A real-valued pairing between a left index set and a right index set.
///
/// Both the base coupling `c` on `X x Y` and its symmetrization `C` on
/// `(X x Y) x (Y x X)` implement this, so conjugation and monotonicity checks
/// are written once.
pub trait Pairing {
    fn left_len(&self) -> usize;
    fn right_len(&self) -> usize;
    fn value(&self, left: usize, right: usize) -> f64;
}

/// Dense coupling `c[i][j]` on `X x Y` with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    xspace: FiniteSpace,
    yspace: FiniteSpace,
    table: Table,
}

impl Coupling {
    pub fn new(xspace: FiniteSpace, yspace: FiniteSpace, table: Table) -> Result<Self> {
        if table.shape() != (xspace.len(), yspace.len()) {
            return Err(Error::invalid(format!(
                "cost table is {}x{} but spaces have {} and {} points",
                table.rows(),
                table.cols(),
                xspace.len(),
                yspace.len()
            )));
        }
        if let Some((i, j, v)) = table.iter_indexed().find(|(_, _, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("cost entry c[{i}][{j}] = {v} is not finite")));
        }
        Ok(Coupling { xspace, yspace, table })
    }

    /// Coupling on bare index sets.
    pub fn from_table(table: Table) -> Result<Self> {
        let x = FiniteSpace::indexed(table.rows())?;
        let y = FiniteSpace::indexed(table.cols())?;
        Self::new(x, y, table)
    }

    pub fn from_fn(
        xspace: FiniteSpace,
        yspace: FiniteSpace,
        f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let table = Table::from_fn(xspace.len(), yspace.len(), f);
        Self::new(xspace, yspace, table)
    }

    pub fn xspace(&self) -> &FiniteSpace {
        &self.xspace
    }

    pub fn yspace(&self) -> &FiniteSpace {
        &self.yspace
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn nx(&self) -> usize {
        self.xspace.len()
    }

    pub fn ny(&self) -> usize {
        self.yspace.len()
    }

    #[inline]
    pub fn c(&self, x: usize, y: usize) -> f64 {
        self.table[(x, y)]
    }

    pub fn shifted(&self, k: f64) -> Result<Self> {
        Self::new(self.xspace.clone(), self.yspace.clone(), self.table.map(|v| v + k))
    }

    pub fn symmetrize(&self) -> SymmetrizedCoupling {
        SymmetrizedCoupling { base: self.clone() }
    }

    pub(crate) fn check_x(&self, x: usize) -> Result<()> {
        if x < self.nx() {
            Ok(())
        } else {
            Err(Error::invalid(format!("x index {x} out of range 0..{}", self.nx())))
        }
    }

    pub(crate) fn check_y(&self, y: usize) -> Result<()> {
        if y < self.ny() {
            Ok(())
        } else {
            Err(Error::invalid(format!("y index {y} out of range 0..{}", self.ny())))
        }
    }
}

impl Pairing for Coupling {
    fn left_len(&self) -> usize {
        self.nx()
    }

    fn right_len(&self) -> usize {
        self.ny()
    }

    #[inline]
    fn value(&self, left: usize, right: usize) -> f64 {
        self.table[(left, right)]
    }
}

/// `c[i][j] = xgrid[i] * ygrid[j]`.
pub fn make_inner_product_coupling(xgrid: &[f64], ygrid: &[f64]) -> Result<Coupling> {
    let x = FiniteSpace::interval(xgrid)?;
    let y = FiniteSpace::interval(ygrid)?;
    Coupling::from_fn(x, y, |i, j| xgrid[i] * ygrid[j])
}

/// `c(x, y) = -d(x, y)^2 / 2` on `space x space`.
pub fn make_neg_half_sqdist_coupling(space: &FiniteSpace) -> Result<Coupling> {
    let d = space.require_metric()?.clone();
    Coupling::new(space.clone(), space.clone(), d.map(|v| -v * v / 2.0))
}

/// `c(x, y) = d(x, y)` on a circle discretization.
pub fn make_arclength_coupling(circle: &FiniteSpace) -> Result<Coupling> {
    let d = circle.require_metric()?.clone();
    if circle.geometry() != Geometry::Circle {
        return Err(Error::invalid("arclength coupling needs a circle discretization"));
    }
    Coupling::new(circle.clone(), circle.clone(), d)
}

/// The lift `C((x1, y1), (y2, x2)) = c(x1, y2) + c(x2, y1)` of a coupling to
/// `U x V` with `U = X x Y` and `V = Y x X`.
///
/// Points of `U` are encoded as `x * ny + y` and points of `V` as
/// `y * nx + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedCoupling {
    base: Coupling,
}

impl SymmetrizedCoupling {
    pub fn new(base: Coupling) -> Self {
        SymmetrizedCoupling { base }
    }

    pub fn base(&self) -> &Coupling {
        &self.base
    }

    #[inline]
    pub fn u_index(&self, x: usize, y: usize) -> usize {
        x * self.base.ny() + y
    }

    #[inline]
    pub fn v_index(&self, y: usize, x: usize) -> usize {
        y * self.base.nx() + x
    }

    /// `u -> (x, y)`.
    #[inline]
    pub fn u_pair(&self, u: usize) -> (usize, usize) {
        (u / self.base.ny(), u % self.base.ny())
    }

    /// `v -> (y, x)`.
    #[inline]
    pub fn v_pair(&self, v: usize) -> (usize, usize) {
        (v / self.base.nx(), v % self.base.nx())
    }

    /// `R1(x, y) = (y, x)`.
    #[inline]
    pub fn r1(&self, u: usize) -> usize {
        let (x, y) = self.u_pair(u);
        self.v_index(y, x)
    }

    /// `R2(y, x) = (x, y)`.
    #[inline]
    pub fn r2(&self, v: usize) -> usize {
        let (y, x) = self.v_pair(v);
        self.u_index(x, y)
    }

    /// `C(u, v)` for `u = (x1, y1)` and `v = (y2, x2)`, with range checks.
    pub fn eval(&self, u: (usize, usize), v: (usize, usize)) -> Result<f64> {
        let (x1, y1) = u;
        let (y2, x2) = v;
        self.base.check_x(x1)?;
        self.base.check_x(x2)?;
        self.base.check_y(y1)?;
        self.base.check_y(y2)?;
        Ok(self.base.c(x1, y2) + self.base.c(x2, y1))
    }
}

impl Pairing for SymmetrizedCoupling {
    fn left_len(&self) -> usize {
        self.base.nx() * self.base.ny()
    }

    fn right_len(&self) -> usize {
        self.base.nx() * self.base.ny()
    }

    #[inline]
    fn value(&self, u: usize, v: usize) -> f64 {
        let (x1, y1) = self.u_pair(u);
        let (y2, x2) = self.v_pair(v);
        self.base.c(x1, y2) + self.base.c(x2, y1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_product_examples() {
        let c = make_inner_product_coupling(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.c(2, 2), 4.0);
        let z = make_inner_product_coupling(&[0.0], &[0.0]).unwrap();
        assert_eq!(z.table().shape(), (1, 1));
        assert_eq!(z.c(0, 0), 0.0);
        let s = make_inner_product_coupling(&[-1.0, 0.0, 1.0], &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.c(0, 2), -1.0);
        assert_eq!(s.table(), &s.table().transpose());
        assert!(make_inner_product_coupling(&[], &[1.0]).is_err());
    }

    #[test]
    fn neg_half_sqdist_examples() {
        let circle = FiniteSpace::circle(8).unwrap();
        let c = make_neg_half_sqdist_coupling(&circle).unwrap();
        assert!((c.c(0, 2) + (PI / 2.0).powi(2) / 2.0).abs() < 1e-15);
        for i in 0..8 {
            assert_eq!(c.c(i, i), 0.0);
        }
        let iv = FiniteSpace::interval(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(make_neg_half_sqdist_coupling(&iv).unwrap().c(0, 2), -0.5);
        assert!(make_neg_half_sqdist_coupling(&FiniteSpace::indexed(3).unwrap()).is_err());
    }

    #[test]
    fn arclength_examples() {
        let circle = FiniteSpace::circle(8).unwrap();
        let c = make_arclength_coupling(&circle).unwrap();
        assert_eq!(c.c(0, 2), PI / 2.0);
        assert_eq!(c.c(3, 3), 0.0);
        assert_eq!(c.c(1, 5), PI);
        let iv = FiniteSpace::interval(&[0.0, 1.0]).unwrap();
        assert!(make_arclength_coupling(&iv).is_err());
    }

    #[test]
    fn non_finite_cost_rejected() {
        let t = Table::from_rows(&[alloc::vec![0.0, f64::NAN]]).unwrap();
        assert!(Coupling::from_table(t).is_err());
        let t = Table::from_rows(&[alloc::vec![f64::INFINITY]]).unwrap();
        assert!(Coupling::from_table(t).is_err());
    }

    #[test]
    fn eval_symmetrized() {
        let c = make_inner_product_coupling(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        let sc = c.symmetrize();
        assert_eq!(sc.eval((1, 2), (2, 0)).unwrap(), 2.0);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(sc.eval((x, y), (y, x)).unwrap(), 2.0 * c.c(x, y));
            }
        }
        assert!(sc.eval((3, 0), (0, 0)).is_err());
    }

    #[test]
    fn swap_maps_are_inverse() {
        let c = Coupling::from_table(Table::zeros(3, 4)).unwrap();
        let sc = c.symmetrize();
        for u in 0..12 {
            assert_eq!(sc.r2(sc.r1(u)), u);
        }
        for v in 0..12 {
            assert_eq!(sc.r1(sc.r2(v)), v);
        }
    }

    #[test]
    fn circle_displacement_and_spacing() {
        let s = FiniteSpace::circle(8).unwrap();
        assert_eq!(s.spacing(), Some(PI / 4.0));
        assert_eq!(s.displacement(0, 1), Some(PI / 4.0));
        assert_eq!(s.displacement(0, 7), Some(-PI / 4.0));
        assert_eq!(s.displacement(7, 0), Some(PI / 4.0));
        assert_eq!(s.displacement(0, 4), Some(PI));
        assert_eq!(s.diameter(), Some(PI));
    }

    #[test]
    fn torus_metric_is_product() {
        let t = FiniteSpace::torus(4, 4).unwrap();
        assert_eq!(t.len(), 16);
        let d = t.distance(0, 5).unwrap();
        assert!((d - libm::sqrt(2.0) * PI / 2.0).abs() < 1e-12);
        assert!((t.diameter().unwrap() - libm::sqrt(2.0) * PI).abs() < 1e-12);
    }
}
