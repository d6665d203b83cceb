//! Metric (c-)convex analysis on finite spaces.
//!
//! Every supremum in the continuum theory becomes a maximum over a finite
//! index set here, so conjugates, Fitzpatrick functions, Hamiltonians and
//! transport values are all computed exactly up to float rounding.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and instance generators live in the companion `cselfdual` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ctransform;
pub mod error;
pub mod hamiltonian;
pub mod inversion;
pub mod lp;
pub mod monotone;
pub mod report;
pub mod selfdual;
pub mod space;
pub mod table;
pub mod transport;

pub use ctransform::ValueTable;
pub use error::{Error, Result};
pub use hamiltonian::Hamiltonian;
pub use monotone::Relation;
pub use report::CheckResult;
pub use selfdual::{FitzpatrickFunction, Lagrangian};
pub use space::{Coupling, FiniteSpace, Pairing, SymmetrizedCoupling};
pub use table::Table;
pub use transport::{DiscreteMeasure, Plan};

/// Absolute tolerance used for equality tests unless the caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;
