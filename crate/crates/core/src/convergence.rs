//! Convergence studies: solve each scheme over a mesh sequence, measure the
//! sup-norm error on the `u` scale against an exact solution, and chain
//! observed orders between consecutive meshes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridField, GridSpec};
use crate::schemes::{solve, solve_rolling, Method, SchemeKind, SolveOptions, SolveStats};
use crate::testcases::{to_u_scale, TestCase};

/// Mesh sequence matching the published tables: `m = 40*4^k` in 2D,
/// `20*2^k` in 3D and `4*2^k` from 4D on, for `k = 0..levels`.
pub fn default_meshes(n: usize, levels: usize) -> Vec<usize> {
    let (base, ratio): (usize, usize) = match n {
        2 => (40, 4),
        3 => (20, 2),
        _ => (4, 2),
    };
    (0..levels).map(|k| base * ratio.pow(k as u32)).collect()
}

#[derive(Clone, Debug)]
pub struct StudySpec {
    pub schemes: Vec<SchemeKind>,
    pub case: TestCase,
    pub n: usize,
    /// Strictly increasing `m` values.
    pub meshes: Vec<usize>,
    pub method: Method,
    /// Maximum number of solves running at once.
    pub jobs: usize,
}

impl StudySpec {
    pub fn new(case: TestCase, n: usize, meshes: Vec<usize>) -> Self {
        StudySpec { schemes: SchemeKind::ALL.to_vec(), case, n, meshes, method: Method::Auto, jobs: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::InvalidStudy("no schemes selected".into()));
        }
        if self.meshes.is_empty() {
            return Err(Error::InvalidStudy("empty mesh sequence".into()));
        }
        if self.meshes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStudy(format!("mesh sequence {:?} is not strictly increasing", self.meshes)));
        }
        for &m in &self.meshes {
            GridSpec::new(self.n, m)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub h: f64,
    pub error: f64,
    /// Observed order against the previous row; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemeStudy {
    pub scheme: SchemeKind,
    pub rows: Vec<ConvergenceRow>,
    /// Per-row solver statistics (timing included, so kept out of serialized tables).
    #[serde(skip)]
    pub stats: Vec<SolveStats>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Study {
    pub case: String,
    pub n: usize,
    pub schemes: Vec<SchemeStudy>,
}

/// Sup-norm distance between a field and an exact solution, boundary included.
pub fn linf_error(numeric: &GridField, exact: impl Fn(&[f64]) -> f64) -> f64 {
    let mut err = ErrorAccumulator::default();
    numeric.for_each_node(|_, x, v| err.push(v, exact(x)));
    err.value()
}

#[derive(Default)]
struct ErrorAccumulator {
    max: f64,
    nan: bool,
}

impl ErrorAccumulator {
    #[inline]
    fn push(&mut self, numeric: f64, exact: f64) {
        let d = (numeric - exact).abs();
        if d.is_nan() {
            self.nan = true;
        } else if d > self.max {
            self.max = d;
        }
    }

    fn value(&self) -> f64 {
        if self.nan {
            f64::NAN
        } else {
            self.max
        }
    }
}

/// `log(e_prev / e_cur) / log(h_prev / h_cur)`.
pub fn observed_order(e_prev: f64, e_cur: f64, h_prev: f64, h_cur: f64) -> Result<f64> {
    let ok = |v: f64| v > 0.0 && v.is_finite();
    if !(ok(e_prev) && ok(e_cur)) {
        return Err(Error::UndefinedOrder { prev: e_prev, cur: e_cur });
    }
    if !(ok(h_prev) && ok(h_cur)) || h_prev == h_cur {
        return Err(Error::UndefinedOrder { prev: h_prev, cur: h_cur });
    }
    Ok((e_prev / e_cur).ln() / (h_prev / h_cur).ln())
}

/// Solves one scheme and returns its sup-norm error on the `u` scale without
/// keeping the grid.
pub fn scheme_error(spec: GridSpec, kind: SchemeKind, case: &TestCase, method: Method) -> Result<(f64, SolveStats)> {
    let mut err = ErrorAccumulator::default();
    let f = |x: &[f64]| case.f(x);
    let (stats, _) = solve_rolling(spec, kind, &f, SolveOptions { method }, |_, x, v| {
        err.push(to_u_scale(kind, x, v), case.u(x));
    })?;
    Ok((err.value(), stats))
}

/// Full-grid solve mapped to the `u` scale.
pub fn solve_u_field(
    spec: GridSpec,
    kind: SchemeKind,
    f: &dyn Fn(&[f64]) -> f64,
    method: Method,
) -> Result<(GridField, SolveStats)> {
    let rep = solve(spec, kind, f, SolveOptions { method })?;
    let u = rep.field.map(|x, v| to_u_scale(kind, x, v));
    Ok((u, rep.stats))
}

pub fn run_study(study: &StudySpec) -> Result<Study> {
    study.validate()?;
    let tasks: Vec<(SchemeKind, usize)> =
        study.schemes.iter().flat_map(|&kind| study.meshes.iter().map(move |&m| (kind, m))).collect();
    let run = |&(kind, m): &(SchemeKind, usize)| -> Result<(f64, SolveStats)> {
        scheme_error(GridSpec::new(study.n, m)?, kind, &study.case, study.method)
    };
    let results: Vec<Result<(f64, SolveStats)>> = if study.jobs <= 1 {
        tasks.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(study.jobs)
            .build()
            .map_err(|e| Error::InvalidStudy(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run).collect())
    };

    let mut results = results.into_iter();
    let mut schemes = Vec::with_capacity(study.schemes.len());
    for &kind in &study.schemes {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(study.meshes.len());
        let mut stats = Vec::with_capacity(study.meshes.len());
        for &m in &study.meshes {
            let (error, st) = results.next().expect("one result per task")?;
            let h = 1.0 / m as f64;
            let order = rows.last().and_then(|prev| observed_order(prev.error, error, prev.h, h).ok());
            rows.push(ConvergenceRow { m, h, error, order });
            stats.push(st);
        }
        schemes.push(SchemeStudy { scheme: kind, rows, stats });
    }
    Ok(Study { case: study.case.name(), n: study.n, schemes })
}

fn sig2(v: f64) -> String {
    format!("{v:.1e}")
}

impl Study {
    /// Table in the published layout: one row per mesh, error/order pairs per scheme.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Rates of convergence for {} in dimension n={}", self.case, self.n);
        let _ = writeln!(out);
        let mut header = String::from("| Mesh size h |");
        let mut rule = String::from("|---|");
        for s in &self.schemes {
            let _ = write!(header, " ({}) ℓ∞ Error | ({}) Order |", s.scheme, s.scheme);
            rule.push_str("---|---|");
        }
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{rule}");
        let nrows = self.schemes.first().map_or(0, |s| s.rows.len());
        for r in 0..nrows {
            let first = &self.schemes[0].rows[r];
            let _ = write!(out, "| {} (m={}) |", sig2(first.h), first.m);
            for s in &self.schemes {
                let row = &s.rows[r];
                let order = row.order.map(|o| format!("{o:.2}")).unwrap_or_default();
                let _ = write!(out, " {} | {} |", sig2(row.error), order);
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Full-precision CSV: `scheme,n,case,m,h,error,order`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,n,case,m,h,error,order\n");
        for s in &self.schemes {
            for row in &s.rows {
                let order = row.order.map(|o| format!("{o:.16e}")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.16e},{:.16e},{}",
                    s.scheme, self.n, self.case, row.m, row.h, row.error, order
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study serializes")
    }

    pub fn scheme(&self, kind: SchemeKind) -> Option<&SchemeStudy> {
        self.schemes.iter().find(|s| s.scheme == kind)
    }
}
