//! Upwind schemes for `(u_x1)_+ ... (u_xn)_+ = f` on `[0,1]^n`.
//!
//! * [`SchemeKind::S1`] discretizes the equation for `u` directly.
//! * [`SchemeKind::S2`] solves for `v = u^n / n^n`, which satisfies
//!   `prod (v_xi)_+ = v^(n-1) f` and stays Lipschitz near the boundary.
//! * [`SchemeKind::S3`] solves for `w` in `u = n (x_1 ... x_n)^(1/n) w`,
//!   i.e. `prod (w + n x_i w_xi)_+ = f`, with no boundary condition.
//!
//! All three are solved in one lexicographic pass. In two dimensions each node
//! update has a closed form; otherwise a bisection stops once the residual is
//! within a factor `1 + h` of its target.

use serde::{Deserialize, Serialize};

mod bisect;
mod solve;
mod update;

pub use bisect::{bisect_max_root, widen_upper, Band, ResidualForm, Root, LOWER_EDGE_TOL, MAX_BISECTIONS};
pub use solve::{solve, solve_rolling, update, SolveOptions, SolveReport, SolveStats, Source};
pub use update::{s1_update, s2_update, s3_update};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    S1,
    S2,
    S3,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::S1, SchemeKind::S2, SchemeKind::S3];

    /// Whether nodes with a zero coordinate are pinned to 0.
    pub fn has_boundary_condition(self) -> bool {
        !matches!(self, SchemeKind::S3)
    }

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::S1 => "S1",
            SchemeKind::S2 => "S2",
            SchemeKind::S3 => "S3",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(SchemeKind::S1),
            "s2" => Ok(SchemeKind::S2),
            "s3" => Ok(SchemeKind::S3),
            other => Err(format!("unknown scheme `{other}` (expected s1, s2 or s3)")),
        }
    }
}

/// How a node update is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Closed form in two dimensions, bisection otherwise.
    #[default]
    Auto,
    /// Bisection in every dimension (cross-validation of the closed forms).
    Bisection,
}

/// Local data for one node update.
#[derive(Clone, Copy, Debug)]
pub struct UpdateInputs<'a> {
    pub h: f64,
    /// Node coordinates.
    pub x: &'a [f64],
    /// Right-hand side at the node, `>= 0`.
    pub f: f64,
    /// Values at `x - h e_i`; 0 beyond the boundary.
    pub a: &'a [f64],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeValue {
    pub value: f64,
    /// Bisection steps taken (0 for closed forms and degenerate cases).
    pub iterations: u32,
    /// `residual / target - 1`, absent when the value is exact by construction.
    pub residual: Option<f64>,
    pub saturated: bool,
}

impl NodeValue {
    fn exact(value: f64) -> Self {
        NodeValue { value, iterations: 0, residual: None, saturated: false }
    }

    fn closed(value: f64, residual: f64) -> Self {
        NodeValue { value, iterations: 0, residual: Some(residual), saturated: false }
    }
}
