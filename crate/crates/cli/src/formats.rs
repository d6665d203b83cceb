//! JSON file formats.
//!
//! A coupling instance is
//!
//! ```json
//! {"x_points": [..], "y_points": [..], "cost": [[..]], "metric": [[..]]}
//! ```
//!
//! where `y_points` defaults to `x_points`, `metric` (optional) replaces the
//! `|x - y|` metric on `X`, and `cost` is either a matrix or one of the
//! named costs `"inner_product"`, `"neg_half_sqdist"`, `"sqdist"`,
//! `"neg_sqdist"`, `"arclength"`. With `"geometry": "circle"` both spaces are
//! the equally spaced circle with as many points as `x_points`.
//!
//! Other commands add their own keys (`pairs`, `mu`, `map_T`, `lagrangian`,
//! `p`, `phi`, `B`, `curves`) to the same object.

use std::fmt;

use cselfdual_core::inversion::CurveFamily;
use cselfdual_core::space::{make_arclength_coupling, make_inner_product_coupling, make_neg_half_sqdist_coupling};
use cselfdual_core::{Coupling, FiniteSpace, Lagrangian, Relation, Table};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct FormatError(pub String);

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FormatError {}

impl From<cselfdual_core::Error> for FormatError {
    fn from(e: cselfdual_core::Error) -> Self {
        FormatError(e.to_string())
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError(format!("malformed JSON: {e}"))
    }
}

type Result<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCost {
    InnerProduct,
    NegHalfSqdist,
    Sqdist,
    NegSqdist,
    Arclength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostJson {
    Matrix(Vec<Vec<f64>>),
    Named(NamedCost),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryJson {
    #[default]
    Interval,
    Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingJson {
    pub x_points: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_points: Option<Vec<f64>>,
    pub cost: CostJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub geometry: GeometryJson,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn table(rows: &[Vec<f64>], what: &str) -> Result<Table> {
    Table::from_rows(rows).ok_or_else(|| FormatError(format!("{what} is ragged")))
}

impl CouplingJson {
    pub fn build(&self) -> Result<Coupling> {
        let ypts = self.y_points.as_ref().unwrap_or(&self.x_points);
        let (xs, ys) = match self.geometry {
            GeometryJson::Circle => (
                FiniteSpace::circle(self.x_points.len())?,
                FiniteSpace::circle(ypts.len())?,
            ),
            GeometryJson::Interval => {
                let xs = match &self.metric {
                    Some(m) => {
                        let t = table(m, "metric")?;
                        if t.rows() != self.x_points.len() {
                            return Err(FormatError("metric does not match x_points".into()));
                        }
                        FiniteSpace::with_metric(t)?
                    }
                    None => FiniteSpace::interval(&self.x_points)?,
                };
                (xs, FiniteSpace::interval(ypts)?)
            }
        };
        let same = self.y_points.is_none();
        match &self.cost {
            CostJson::Matrix(rows) => {
                let t = table(rows, "cost")?;
                if t.as_slice().iter().any(|v| !v.is_finite()) {
                    return Err(FormatError("cost entries must be finite".into()));
                }
                Ok(Coupling::new(xs, ys, t)?)
            }
            CostJson::Named(NamedCost::InnerProduct) => {
                if self.geometry == GeometryJson::Circle {
                    return Err(FormatError("inner_product cost needs interval points".into()));
                }
                Ok(make_inner_product_coupling(&self.x_points, ypts)?)
            }
            CostJson::Named(name) => {
                if !same {
                    return Err(FormatError(format!("{name:?} cost needs X = Y (omit y_points)")));
                }
                let d = xs.require_metric()?.clone();
                match name {
                    NamedCost::NegHalfSqdist => Ok(make_neg_half_sqdist_coupling(&xs)?),
                    NamedCost::Arclength => Ok(make_arclength_coupling(&xs)?),
                    NamedCost::Sqdist => Ok(Coupling::new(xs.clone(), xs, d.map(|v| v * v))?),
                    NamedCost::NegSqdist => Ok(Coupling::new(xs.clone(), xs, d.map(|v| -v * v))?),
                    NamedCost::InnerProduct => unreachable!("handled above"),
                }
            }
        }
    }

    pub fn from_points(x: &[f64], y: Option<&[f64]>, cost: &Table) -> Self {
        CouplingJson {
            x_points: x.to_vec(),
            y_points: y.map(<[f64]>::to_vec),
            cost: CostJson::Matrix(cost.to_rows()),
            metric: None,
            geometry: GeometryJson::Interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationJson {
    pub pairs: Vec<[usize; 2]>,
}

impl RelationJson {
    pub fn build(&self) -> Result<Relation> {
        Ok(Relation::new(self.pairs.iter().map(|p| (p[0], p[1])).collect())?)
    }

    pub fn from_relation(r: &Relation) -> Self {
        RelationJson {
            pairs: r.pairs().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        RelationJson {
            pairs: pairs.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

/// A Lagrangian matrix with its synthesis metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianJson {
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

impl LagrangianJson {
    pub fn from_lagrangian(l: &Lagrangian) -> Self {
        LagrangianJson {
            values: l.table().to_rows(),
            residual: Some(l.residual()),
            tol: Some(l.tol()),
            iterations: Some(l.iterations()),
        }
    }

    /// The residual is recomputed; stored metadata is informational.
    pub fn build(&self, c: &Coupling) -> Result<Lagrangian> {
        let t = table(&self.values, "lagrangian")?;
        if !t.is_all_finite() {
            return Err(FormatError("Lagrangian entries must be finite".into()));
        }
        Ok(Lagrangian::new(c.clone(), t)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvesJson {
    pub pairs: Vec<[usize; 2]>,
    pub paths: Vec<Vec<usize>>,
    pub t: Vec<Vec<f64>>,
}

impl CurvesJson {
    pub fn build(&self, n: usize) -> Result<CurveFamily> {
        if self.pairs.len() != self.paths.len() || self.paths.len() != self.t.len() {
            return Err(FormatError("curves: pairs, paths and t must have equal length".into()));
        }
        let mut fam = CurveFamily::new(n);
        for ((pair, path), t) in self.pairs.iter().zip(&self.paths).zip(&self.t) {
            if path.first() != Some(&pair[0]) || path.last() != Some(&pair[1]) {
                return Err(FormatError(format!("curve for {:?} has wrong endpoints", pair)));
            }
            fam.insert(path.clone(), t.clone())?;
        }
        Ok(fam)
    }

    pub fn from_family(fam: &CurveFamily) -> Self {
        let mut out = CurvesJson {
            pairs: Vec::new(),
            paths: Vec::new(),
            t: Vec::new(),
        };
        for (&(a, b), curves) in fam.iter() {
            for cv in curves {
                out.pairs.push([a, b]);
                out.paths.push(cv.nodes.clone());
                out.t.push(cv.t.clone());
            }
        }
        out
    }
}

/// `check-monotone` and `represent` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationInstance {
    #[serde(flatten)]
    pub coupling: CouplingJson,
    pub pairs: Vec<[usize; 2]>,
}

impl RelationInstance {
    pub fn relation(&self) -> Result<Relation> {
        RelationJson { pairs: self.pairs.clone() }.build()
    }
}

/// `rearrange` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportInstance {
    #[serde(flatten)]
    pub coupling: CouplingJson,
    /// Defaults to the uniform measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(rename = "map_T")]
    pub map_t: Vec<usize>,
}

/// `invert` input: either a Lagrangian (or a relation to synthesize one
/// from) with a target `p`, or a function `phi` with a skew map `B`.
/// `null` entries of `phi` stand for `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertInstance {
    #[serde(flatten)]
    pub coupling: CouplingJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<LagrangianJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Option<f64>>>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurvesJson>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}
