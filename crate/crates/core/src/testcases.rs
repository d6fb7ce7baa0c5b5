//! Benchmark right-hand sides with known viscosity solutions, and the changes
//! of variable between `u`, `v = u^n / n^n` and `w = u / (n (x_1...x_n)^(1/n))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::schemes::SchemeKind;

pub const DEFAULT_K: f64 = 20.0;
pub const DEFAULT_BIG_C: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TestCase {
    /// Indicator of `max x_i > 1/2`.
    F1,
    /// Smooth oscillatory case with frequency `k`.
    F2 {
        k: f64,
    },
    /// Lipschitz case whose solution has a gradient kink on `{x_i = x_j}`.
    F3 {
        c: f64,
    },
    Const {
        c: f64,
    },
}

impl TestCase {
    /// Parses `f1`, `f2`, `f3` or `const:<c>`; `k` and `big_c` parameterize f2 and f3.
    pub fn parse(name: &str, k: f64, big_c: f64) -> Result<Self> {
        let name = name.trim();
        match name {
            "f1" => Ok(TestCase::F1),
            "f2" => Ok(TestCase::F2 { k }),
            "f3" => Ok(TestCase::F3 { c: big_c }),
            _ => {
                let c = name
                    .strip_prefix("const:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownCase(name.to_string()))?;
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::UnknownCase(name.to_string()));
                }
                Ok(TestCase::Const { c })
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestCase::F1 => "f1".into(),
            TestCase::F2 { .. } => "f2".into(),
            TestCase::F3 { .. } => "f3".into(),
            TestCase::Const { c } => format!("const:{c}"),
        }
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        match *self {
            TestCase::F1 => f1(x),
            TestCase::F2 { k } => f2(x, k),
            TestCase::F3 { c } => f3(x, c),
            TestCase::Const { c } => c,
        }
    }

    /// Exact solution on the `u` scale.
    pub fn u(&self, x: &[f64]) -> f64 {
        match *self {
            TestCase::F1 => u1(x),
            TestCase::F2 { k } => u2(x, k),
            TestCase::F3 { c } => u3(x, c),
            TestCase::Const { c } => {
                let n = x.len() as f64;
                n * (c * coord_product(x)).powf(1.0 / n)
            }
        }
    }
}

fn coord_product(x: &[f64]) -> f64 {
    x.iter().product()
}

/// `(x_1 ... x_n)^(1/n)`.
pub fn geometric_mean(x: &[f64]) -> f64 {
    let p = coord_product(x);
    if p <= 0.0 {
        0.0
    } else if x.len() == 2 {
        p.sqrt()
    } else {
        p.powf(1.0 / x.len() as f64)
    }
}

pub fn f1(x: &[f64]) -> f64 {
    if x.iter().any(|&xi| xi > 0.5) {
        1.0
    } else {
        0.0
    }
}

pub fn u1(x: &[f64]) -> f64 {
    let n = x.len();
    let best = (0..n)
        .map(|i| {
            let others: f64 = (0..n).filter(|&j| j != i).map(|j| x[j]).product();
            (x[i] - 0.5).max(0.0) * others
        })
        .fold(0.0, f64::max);
    n as f64 * best.powf(1.0 / n as f64)
}

pub fn f2(x: &[f64], k: f64) -> f64 {
    let n = x.len() as f64;
    let s: f64 = x.iter().map(|&xj| (k * xj).sin().powi(2)).sum();
    let prod: f64 = x.iter().map(|&xi| s + n * k + n * k * xi * (2.0 * k * xi).sin()).product();
    prod / (n * (k + 1.0)).powi(x.len() as i32)
}

pub fn u2(x: &[f64], k: f64) -> f64 {
    let n = x.len() as f64;
    let s: f64 = x.iter().map(|&xj| (k * xj).sin().powi(2)).sum();
    geometric_mean(x) * (s + n * k) / (k + 1.0)
}

pub fn w3(x: &[f64], c: f64) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    c * max + x.iter().sum::<f64>()
}

pub fn f3(x: &[f64], c: f64) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let w = w3(x, c);
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let top = w + nf * (1.0 + c) * sorted[n - 1];
    let rest: f64 = sorted[..n - 1].iter().map(|&xi| w + nf * xi).product();
    top * rest / (c + nf).powi(n as i32)
}

/// `n (x_1...x_n)^(1/n) w3(x) / (C + n)`, the solution whose gradient product is [`f3`].
pub fn u3(x: &[f64], c: f64) -> f64 {
    let n = x.len() as f64;
    n * geometric_mean(x) * w3(x, c) / (c + n)
}

/// Changes of variable between the three unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    UFromV,
    UFromW,
    VFromU,
    /// Undefined where some `x_i = 0`; those nodes map to NaN.
    WFromU,
}

const NEGATIVE_NOISE: f64 = 1e-12;

impl Transform {
    pub fn apply(self, x: &[f64], value: f64) -> Result<f64> {
        if value < -NEGATIVE_NOISE || value.is_nan() {
            return Err(Error::Domain { what: "transformed value", value });
        }
        let value = value.max(0.0);
        let n = x.len() as f64;
        Ok(match self {
            Transform::UFromV => u_from_v_value(value, x.len()),
            Transform::UFromW => n * geometric_mean(x) * value,
            Transform::VFromU => (value / n).powi(x.len() as i32),
            Transform::WFromU => {
                let g = geometric_mean(x);
                if g == 0.0 {
                    f64::NAN
                } else {
                    value / (n * g)
                }
            }
        })
    }

    pub fn apply_field(self, field: &GridField) -> Result<GridField> {
        let mut err = None;
        let out = field.map(|x, v| match self.apply(x, v) {
            Ok(t) => t,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

fn u_from_v_value(v: f64, n: usize) -> f64 {
    if n == 2 {
        2.0 * v.sqrt()
    } else {
        n as f64 * v.powf(1.0 / n as f64)
    }
}

pub fn u_from_v(field: &GridField) -> Result<GridField> {
    Transform::UFromV.apply_field(field)
}

pub fn u_from_w(field: &GridField) -> Result<GridField> {
    Transform::UFromW.apply_field(field)
}

pub fn v_from_u(field: &GridField) -> Result<GridField> {
    Transform::VFromU.apply_field(field)
}

/// Maps a scheme's native unknown to the `u` scale. Tiny negative noise is clamped.
#[inline]
pub fn to_u_scale(kind: SchemeKind, x: &[f64], value: f64) -> f64 {
    let value = value.max(0.0);
    match kind {
        SchemeKind::S1 => value,
        SchemeKind::S2 => u_from_v_value(value, x.len()),
        SchemeKind::S3 => x.len() as f64 * geometric_mean(x) * value,
    }
}
