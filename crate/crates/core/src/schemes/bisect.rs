//! Bracketed bisection with a multiplicative acceptance band.
//!
//! Each scheme reduces its node update to finding the largest `t` at which a
//! residual function reaches a target. The residual forms here are all
//! nondecreasing on the bracket, so the search keeps the invariant that the
//! upper endpoint never undershoots the target and stops at the first point
//! whose residual lands in `[target, (1 + slack) target]`.

use crate::error::{Error, Result};

/// Hard limit on bisection steps per node.
pub const MAX_BISECTIONS: u32 = 200;

/// Relative rounding allowance on the lower edge of the band.
pub const LOWER_EDGE_TOL: f64 = 1e-12;

/// Residual functions of the three node updates.
#[derive(Clone, Copy, Debug)]
pub enum ResidualForm<'a> {
    /// `prod (t - a_i)_+`.
    Product { a: &'a [f64] },
    /// `prod (t - a_i)_+ / t^(n-1)`; increasing past `max a_i` when `max a_i > 0`.
    Ratio { a: &'a [f64] },
    /// `prod ((1 + c_i) t - c_i a_i)_+`.
    Weighted { a: &'a [f64], c: &'a [f64] },
}

impl ResidualForm<'_> {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ResidualForm::Product { a } => a.iter().map(|&ai| (t - ai).max(0.0)).product(),
            ResidualForm::Ratio { a } => {
                if t <= 0.0 {
                    return 0.0;
                }
                // Interleave the division so the product stays O(1)-scaled.
                let mut acc = t;
                for &ai in a {
                    acc *= (t - ai).max(0.0) / t;
                }
                acc
            }
            ResidualForm::Weighted { a, c } => {
                a.iter().zip(c).map(|(&ai, &ci)| ((1.0 + ci) * t - ci * ai).max(0.0)).product()
            }
        }
    }
}

/// Acceptance band `[target, (1 + slack) target]` on the residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub target: f64,
    pub slack: f64,
}

impl Band {
    pub fn new(target: f64, slack: f64) -> Self {
        Band { target, slack }
    }

    #[inline]
    fn lower(&self) -> f64 {
        self.target * (1.0 - LOWER_EDGE_TOL)
    }

    #[inline]
    fn upper(&self) -> f64 {
        self.target * (1.0 + self.slack)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lower() && r <= self.upper()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: f64,
    pub iterations: u32,
    /// The bracket shrank to adjacent doubles before the band was entered;
    /// `value` is then the upper endpoint, which still meets the target.
    pub saturated: bool,
}

/// Moves `hi` up until the residual there reaches the band.
///
/// The analytic brackets meet the target in exact arithmetic, but rounding in
/// `t - a_i` can leave them a few ulps short when `hi - lo` is tiny next to `lo`.
pub fn widen_upper(form: &ResidualForm<'_>, hi: f64, band: Band) -> f64 {
    let mut hi = hi;
    let mut step = (4.0 * hi.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
    for _ in 0..64 {
        if form.eval(hi) >= band.lower() {
            break;
        }
        hi += step;
        step *= 2.0;
    }
    hi
}

/// Finds `t` in `[lo, hi]` with `form(t)` inside `band`.
///
/// Requires `form(hi) >= band.target`. Endpoint hits are returned as-is.
pub fn bisect_max_root(form: &ResidualForm<'_>, lo: f64, hi: f64, band: Band) -> Result<Root> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidInterval { lo, hi, reason: "endpoints must be finite with lo <= hi" });
    }
    if !(band.target > 0.0 && band.target.is_finite()) || band.slack.is_nan() || band.slack < 0.0 {
        return Err(Error::InvalidInterval { lo, hi, reason: "band needs a positive target and nonnegative slack" });
    }
    let r_hi = form.eval(hi);
    if r_hi < band.lower() {
        return Err(Error::InvalidInterval { lo, hi, reason: "residual at upper endpoint is below the target" });
    }
    if r_hi <= band.upper() {
        return Ok(Root { value: hi, iterations: 0, saturated: false });
    }
    if band.contains(form.eval(lo)) {
        return Ok(Root { value: lo, iterations: 0, saturated: false });
    }

    let (mut lo, mut hi) = (lo, hi);
    for it in 1..=MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(Root { value: hi, iterations: it, saturated: true });
        }
        let r = form.eval(mid);
        if r < band.lower() {
            lo = mid;
        } else if r <= band.upper() {
            return Ok(Root { value: mid, iterations: it, saturated: false });
        } else {
            hi = mid;
        }
    }
    Err(Error::IterationCap { cap: MAX_BISECTIONS, lo, hi })
}
