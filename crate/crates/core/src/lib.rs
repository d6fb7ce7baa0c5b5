//! Upwind finite-difference solvers for the Hamilton-Jacobi equation
//! `(u_x1)_+ ... (u_xn)_+ = f` on `[0,1]^n`, the continuum limit of
//! nondominated sorting.
//!
//! * [`grid`]: uniform grids, sweep order, rolling storage and field I/O.
//! * [`schemes`]: node updates and single-pass solves for the three schemes.
//! * [`testcases`]: benchmark right-hand sides with exact solutions.
//! * [`convergence`]: error/order studies over mesh sequences.
//! * [`pareto`]: Pareto-front peeling and PDE-based ranking of point clouds.

pub mod convergence;
pub mod error;
pub mod grid;
pub mod pareto;
pub mod schemes;
pub mod testcases;

pub use error::{Error, Result};
pub use grid::{GridField, GridSpec};
pub use schemes::{Method, SchemeKind};
pub use testcases::TestCase;
