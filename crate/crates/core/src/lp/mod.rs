//! Exact linear programming at desk scale: a transportation simplex for
//! plans between two marginals and a dense two-phase simplex for general
//! equality-form problems. Both use Bland-style lowest-index pivoting so
//! results are deterministic.

mod network_simplex;
mod simplex;

pub use network_simplex::{solve_transport_max, TransportSolution};
pub use simplex::{solve_lp_max, LpSolution};

/// Reduced costs smaller than this (relative to the cost scale) do not pivot.
pub(crate) const PIVOT_EPS: f64 = 1e-12;
