//! Single-node updates. Each returns the largest root of the scheme equation
//! at a node given its backward-neighbor values.

use super::bisect::{bisect_max_root, widen_upper, Band, ResidualForm};
use super::{Method, NodeValue, UpdateInputs};
use crate::error::{Error, Result};
use crate::grid::MAX_DIM;

fn validate(inp: &UpdateInputs<'_>) -> Result<()> {
    if inp.a.len() < 2 || inp.a.len() > MAX_DIM || inp.x.len() != inp.a.len() {
        return Err(Error::InvalidGrid(format!(
            "update needs 2..={MAX_DIM} neighbors matching the coordinates, got {} and {}",
            inp.a.len(),
            inp.x.len()
        )));
    }
    if inp.h.is_nan() || inp.h <= 0.0 {
        return Err(Error::Domain { what: "h", value: inp.h });
    }
    if !inp.f.is_finite() || inp.f < 0.0 {
        return Err(Error::Domain { what: "f(x)", value: inp.f });
    }
    if let Some(&bad) = inp.a.iter().find(|&&ai| !ai.is_finite() || ai < 0.0) {
        return Err(Error::Domain { what: "neighbor value", value: bad });
    }
    Ok(())
}

fn max_of(a: &[f64]) -> f64 {
    a.iter().copied().fold(0.0, f64::max)
}

fn relative(residual: f64, target: f64) -> f64 {
    residual / target - 1.0
}

fn from_root(root: super::bisect::Root, form: &ResidualForm<'_>, target: f64) -> NodeValue {
    NodeValue {
        value: root.value,
        iterations: root.iterations,
        residual: Some(relative(form.eval(root.value), target)),
        saturated: root.saturated,
    }
}

/// Update for `prod_i (D^-_i u)_+ = f`: largest `t` with `prod (t - a_i)_+ = h^n f`.
pub fn s1_update(inp: &UpdateInputs<'_>, method: Method) -> Result<NodeValue> {
    validate(inp)?;
    let n = inp.a.len();
    let amax = max_of(inp.a);
    if inp.f == 0.0 {
        return Ok(NodeValue::exact(amax));
    }
    let target = inp.h.powi(n as i32) * inp.f;
    let form = ResidualForm::Product { a: inp.a };
    if n == 2 && method == Method::Auto {
        let (a1, a2) = (inp.a[0], inp.a[1]);
        let d = a1 - a2;
        let t = 0.5 * (a1 + a2) + 0.5 * (d * d + 4.0 * inp.h * inp.h * inp.f).sqrt();
        return Ok(NodeValue::closed(t, relative(form.eval(t), target)));
    }
    let band = Band::new(target, inp.h);
    let hi = widen_upper(&form, amax + inp.h * inp.f.powf(1.0 / n as f64), band);
    let root = bisect_max_root(&form, amax, hi, band)?;
    Ok(from_root(root, &form, target))
}

/// Update for `prod_i (D^-_i v)_+ = v^(n-1) f`: the maximal root of
/// `prod (t - a_i)_+ = b t^(n-1)` with `b = h^n f`.
pub fn s2_update(inp: &UpdateInputs<'_>, method: Method) -> Result<NodeValue> {
    validate(inp)?;
    let n = inp.a.len();
    let amax = max_of(inp.a);
    let b = inp.h.powi(n as i32) * inp.f;
    if b == 0.0 {
        return Ok(NodeValue::exact(amax));
    }
    if amax == 0.0 {
        return Ok(NodeValue::exact(b));
    }
    let form = ResidualForm::Ratio { a: inp.a };
    if n == 2 && method == Method::Auto {
        let (a1, a2) = (inp.a[0], inp.a[1]);
        let sum = a1 + a2;
        let diff = a1 - a2;
        let t = 0.5 * (sum + b) + 0.5 * (diff * diff + 2.0 * b * sum + b * b).sqrt();
        return Ok(NodeValue::closed(t, relative(form.eval(t), b)));
    }
    // The maximal root never exceeds the sum of its arguments.
    let band = Band::new(b, inp.h);
    let hi = widen_upper(&form, inp.a.iter().sum::<f64>() + b, band);
    let root = bisect_max_root(&form, amax, hi, band)?;
    Ok(from_root(root, &form, b))
}

/// Update for `prod_i (w + n x_i D^-_i w)_+ = f`: with `c_i = n x_i / h`, the
/// largest `t` with `prod ((1 + c_i) t - c_i a_i)_+ = f`.
///
/// Where `x_i = 0` the coefficient vanishes and `a_i` is ignored.
pub fn s3_update(inp: &UpdateInputs<'_>, method: Method) -> Result<NodeValue> {
    validate(inp)?;
    let n = inp.a.len();
    let nf = n as f64;
    let h = inp.h;
    let mut c = [0.0; MAX_DIM];
    let mut sigma: f64 = 0.0;
    for ((ci, &xi), &ai) in c.iter_mut().zip(inp.x).zip(inp.a) {
        let nx = nf * xi;
        *ci = nx / h;
        sigma = sigma.max(nx * ai / (nx + h));
    }
    let c = &c[..n];
    if inp.f == 0.0 {
        return Ok(NodeValue::exact(sigma));
    }
    let form = ResidualForm::Weighted { a: inp.a, c };
    if n == 2 && method == Method::Auto {
        let (x1, x2) = (inp.x[0], inp.x[1]);
        let p = 2.0 * x1 + h;
        let q = 2.0 * x2 + h;
        let l = x1 * q * inp.a[0];
        let r = x2 * p * inp.a[1];
        let cc = l + r;
        let dd = l - r;
        let t = (cc + (dd * dd + p * q * h * h * inp.f).sqrt()) / (p * q);
        return Ok(NodeValue::closed(t, relative(form.eval(t), inp.f)));
    }
    let scale: f64 = inp.x.iter().map(|&xi| nf * xi + h).product();
    let band = Band::new(inp.f, h);
    let hi = widen_upper(&form, sigma + h * (inp.f / scale).powf(1.0 / nf), band);
    let root = bisect_max_root(&form, sigma, hi, band)?;
    Ok(from_root(root, &form, inp.f))
}
