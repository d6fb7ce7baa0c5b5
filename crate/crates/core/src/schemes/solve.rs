use std::time::Instant;

use serde::Serialize;

use super::{s1_update, s2_update, s3_update, Method, NodeValue, SchemeKind, UpdateInputs};
use crate::error::{Error, Result};
use crate::grid::{Cursor, GridField, GridSpec, NodeStore, RollingWindow, MAX_DIM};

/// Right-hand side of the equation, sampled node by node.
pub trait Source {
    fn value(&self, linear: usize, x: &[f64]) -> f64;

    fn check(&self, _spec: GridSpec) -> Result<()> {
        Ok(())
    }
}

impl<F: Fn(&[f64]) -> f64 + ?Sized> Source for F {
    fn value(&self, _linear: usize, x: &[f64]) -> f64 {
        self(x)
    }
}

impl Source for GridField {
    fn value(&self, linear: usize, _x: &[f64]) -> f64 {
        self.values()[linear]
    }

    fn check(&self, spec: GridSpec) -> Result<()> {
        if self.spec() != spec {
            return Err(Error::SpecMismatch {
                expected_n: spec.n(),
                expected_m: spec.m(),
                found_n: self.spec().n(),
                found_m: self.spec().m(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub method: Method,
}

impl SolveOptions {
    pub fn bisection() -> Self {
        SolveOptions { method: Method::Bisection }
    }
}

/// Residual and iteration statistics of one pass.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct SolveStats {
    /// Nodes where an update was evaluated (boundary nodes of S1/S2 excluded).
    pub updated_nodes: usize,
    /// Largest `residual / target - 1` over nodes with a residual.
    pub max_residual: f64,
    /// Smallest `residual / target - 1`; slightly negative only through rounding.
    pub min_residual: f64,
    pub max_iterations: u32,
    /// Mean bisection steps over updated nodes.
    pub mean_iterations: f64,
    pub saturated_nodes: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub field: GridField,
    pub stats: SolveStats,
}

/// Dispatches the node update of a scheme.
pub fn update(kind: SchemeKind, inp: &UpdateInputs<'_>, method: Method) -> Result<NodeValue> {
    match kind {
        SchemeKind::S1 => s1_update(inp, method),
        SchemeKind::S2 => s2_update(inp, method),
        SchemeKind::S3 => s3_update(inp, method),
    }
}

/// Solves a scheme on the full grid and keeps every node value.
pub fn solve<S: Source + ?Sized>(spec: GridSpec, kind: SchemeKind, f: &S, opts: SolveOptions) -> Result<SolveReport> {
    let mut values = vec![0.0; spec.len()];
    let stats = sweep(spec, kind, f, opts, &mut values, |_, _, _| {})?;
    Ok(SolveReport { field: GridField::from_values(spec, values)?, stats })
}

/// Solves a scheme keeping only a rolling window of values.
///
/// `visit` sees every node (multi-index, coordinates, value) in sweep order,
/// which is enough to accumulate errors without storing the grid.
pub fn solve_rolling<S, V>(
    spec: GridSpec,
    kind: SchemeKind,
    f: &S,
    opts: SolveOptions,
    visit: V,
) -> Result<(SolveStats, RollingWindow)>
where
    S: Source + ?Sized,
    V: FnMut(&[usize], &[f64], f64),
{
    let mut window = RollingWindow::new(spec);
    let stats = sweep(spec, kind, f, opts, &mut window, visit)?;
    Ok((stats, window))
}

fn sweep<S, St, V>(
    spec: GridSpec,
    kind: SchemeKind,
    f: &S,
    opts: SolveOptions,
    store: &mut St,
    mut visit: V,
) -> Result<SolveStats>
where
    S: Source + ?Sized,
    St: NodeStore,
    V: FnMut(&[usize], &[f64], f64),
{
    f.check(spec)?;
    let start = Instant::now();
    let n = spec.n();
    let h = spec.h();
    let offsets = spec.backward_offsets();
    let mut x = [0.0; MAX_DIM];
    let mut a = [0.0; MAX_DIM];
    let mut stats = SolveStats { max_residual: f64::NEG_INFINITY, min_residual: f64::INFINITY, ..Default::default() };
    let mut total_iterations: u64 = 0;
    let pinned = kind.has_boundary_condition();

    let mut cursor = Cursor::new(spec);
    loop {
        let linear = cursor.linear;
        spec.coords_into(&cursor.index, &mut x[..n]);
        let on_boundary = cursor.index.contains(&0);
        let value = if pinned && on_boundary {
            0.0
        } else {
            for j in 0..n {
                a[j] = if cursor.index[j] == 0 { 0.0 } else { store.get(linear - offsets[j]) };
            }
            let inp = UpdateInputs { h, x: &x[..n], f: f.value(linear, &x[..n]), a: &a[..n] };
            let node = update(kind, &inp, opts.method)
                .map_err(|e| Error::Node { index: cursor.index.clone(), source: Box::new(e) })?;
            stats.updated_nodes += 1;
            total_iterations += u64::from(node.iterations);
            stats.max_iterations = stats.max_iterations.max(node.iterations);
            if node.saturated {
                stats.saturated_nodes += 1;
            }
            if let Some(r) = node.residual {
                stats.max_residual = stats.max_residual.max(r);
                stats.min_residual = stats.min_residual.min(r);
            }
            node.value
        };
        store.set(linear, value);
        visit(&cursor.index, &x[..n], value);
        if !cursor.advance() {
            break;
        }
    }

    if stats.max_residual == f64::NEG_INFINITY {
        stats.max_residual = 0.0;
        stats.min_residual = 0.0;
    }
    if stats.updated_nodes > 0 {
        stats.mean_iterations = total_iterations as f64 / stats.updated_nodes as f64;
    }
    stats.wall_seconds = start.elapsed().as_secs_f64();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2_constant_rhs_is_exact_in_two_dims() {
        let spec = GridSpec::new(2, 40).unwrap();
        for c in [0.5, 1.0, 2.0] {
            let rep = solve(spec, SchemeKind::S2, &|_: &[f64]| c, SolveOptions::default()).unwrap();
            rep.field.for_each_node(|_, x, v| {
                let exact = c * x[0] * x[1];
                assert!((v - exact).abs() <= 1e-12 * exact.max(1e-300) + 1e-300, "{v} vs {exact}");
            });
        }
    }

    #[test]
    fn s1_boundary_layer_bound() {
        // u_h(h, 1) <= 2^(1/2) h^(1/2) for f = 1.
        for m in [10, 40, 160] {
            let spec = GridSpec::new(2, m).unwrap();
            let rep = solve(spec, SchemeKind::S1, &|_: &[f64]| 1.0, SolveOptions::default()).unwrap();
            let h = spec.h();
            let v = rep.field.get(&[1, m]);
            assert!(v <= 2f64.sqrt() * h.sqrt() * (1.0 + 1e-12), "m={m}: {v}");
            // exact solution there is 2 sqrt(h), so the gap is O(h^(1/2))
            assert!(2.0 * h.sqrt() - v > 0.5 * h.sqrt());
        }
    }

    #[test]
    fn node_errors_carry_the_index() {
        let spec = GridSpec::new(2, 3).unwrap();
        let err = solve(
            spec,
            SchemeKind::S1,
            &|x: &[f64]| if x[0] > 0.5 && x[1] > 0.5 { -1.0 } else { 1.0 },
            SolveOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::Node { index, .. } => assert_eq!(index, vec![2, 2]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn field_source_must_match_grid() {
        let f = GridField::zeros(GridSpec::new(2, 4).unwrap());
        let spec = GridSpec::new(2, 5).unwrap();
        assert!(matches!(solve(spec, SchemeKind::S3, &f, SolveOptions::default()), Err(Error::SpecMismatch { .. })));
    }

    #[test]
    fn rolling_matches_full() {
        let f = |x: &[f64]| 1.0 + 0.5 * (7.0 * x[0]).sin() * x[1] + x.iter().sum::<f64>();
        for (n, m) in [(2, 30), (3, 12), (4, 5)] {
            let spec = GridSpec::new(n, m).unwrap();
            for kind in SchemeKind::ALL {
                let full = solve(spec, kind, &f, SolveOptions::default()).unwrap();
                let mut seen = Vec::with_capacity(spec.len());
                let (stats, window) =
                    solve_rolling(spec, kind, &f, SolveOptions::default(), |_, _, v| seen.push(v)).unwrap();
                assert_eq!(seen, full.field.values());
                let slab = window.final_slab();
                assert_eq!(&full.field.values()[spec.len() - slab.len()..], &slab[..]);
                assert_eq!(stats.max_residual, full.stats.max_residual);
            }
        }
    }
}
