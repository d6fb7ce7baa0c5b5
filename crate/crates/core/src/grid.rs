//! Uniform grids over the unit cube `[0,1]^n` with mesh size `h = 1/m`.
//!
//! Nodes are stored lexicographically with the last axis fastest, so a single
//! forward pass over the linear index visits every node after all of its
//! backward neighbors `x - h e_j`.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// Grid over `[0,1]^n` with `m` subdivisions per axis.
///
/// The mesh size is always derived as `1/m`; it is never stored as a float.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
    m: usize,
}

impl GridSpec {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension n={n} outside 2..={MAX_DIM}")));
        }
        if m == 0 {
            return Err(Error::InvalidGrid("m must be at least 1".into()));
        }
        let side = m.checked_add(1).ok_or_else(|| Error::InvalidGrid("m too large".into()))?;
        let mut total: usize = 1;
        for _ in 0..n {
            total = total
                .checked_mul(side)
                .ok_or_else(|| Error::InvalidGrid(format!("(m+1)^n overflows for n={n}, m={m}")))?;
        }
        Ok(GridSpec { n, m })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Nodes per axis, `m + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        self.m + 1
    }

    /// Total node count `(m+1)^n`.
    pub fn len(&self) -> usize {
        self.side().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bytes needed to hold one double per node.
    pub fn field_bytes(&self) -> u128 {
        (self.side() as u128).pow(self.n as u32) * 8
    }

    /// Linear offsets of the backward neighbors: entry `j` is `(m+1)^(n-1-j)`.
    pub fn backward_offsets(&self) -> Vec<usize> {
        let side = self.side();
        (0..self.n).map(|j| side.pow((self.n - 1 - j) as u32)).collect()
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.n);
        let side = self.side();
        index.iter().fold(0, |acc, &i| acc * side + i)
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let side = self.side();
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = linear % side;
            linear /= side;
        }
        out
    }

    /// Coordinates `i_j * h` of a node.
    pub fn coords_into(&self, index: &[usize], out: &mut [f64]) {
        let m = self.m as f64;
        for (x, &i) in out.iter_mut().zip(index) {
            *x = i as f64 / m;
        }
    }

    pub fn coords(&self, index: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.coords_into(index, &mut out);
        out
    }
}

/// Lexicographic enumeration of all multi-indices of a grid.
pub fn sweep_order(spec: GridSpec) -> SweepOrder {
    SweepOrder { cursor: Some(Cursor::new(spec)) }
}

pub struct SweepOrder {
    cursor: Option<Cursor>,
}

impl Iterator for SweepOrder {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cursor = self.cursor.as_mut()?;
        let out = cursor.index.clone();
        if !cursor.advance() {
            self.cursor = None;
        }
        Some(out)
    }
}

/// In-place odometer over the grid in sweep order.
#[derive(Clone, Debug)]
pub(crate) struct Cursor {
    pub index: Vec<usize>,
    pub linear: usize,
    m: usize,
}

impl Cursor {
    pub fn new(spec: GridSpec) -> Self {
        Cursor { index: vec![0; spec.n], linear: 0, m: spec.m }
    }

    /// Steps to the next node; returns false once the last node has been passed.
    pub fn advance(&mut self) -> bool {
        self.linear += 1;
        for slot in self.index.iter_mut().rev() {
            if *slot < self.m {
                *slot += 1;
                return true;
            }
            *slot = 0;
        }
        false
    }
}

/// Storage that the sweep reads backward neighbors from and writes node values to.
pub trait NodeStore {
    fn get(&self, linear: usize) -> f64;
    fn set(&mut self, linear: usize, value: f64);
}

impl NodeStore for Vec<f64> {
    #[inline]
    fn get(&self, linear: usize) -> f64 {
        self[linear]
    }

    #[inline]
    fn set(&mut self, linear: usize, value: f64) {
        self[linear] = value;
    }
}

/// Ring buffer holding the most recent `(m+1)^(n-1) + 1` node values.
///
/// Sufficient for a lexicographic sweep: the farthest backward neighbor, along
/// the first axis, is exactly `(m+1)^(n-1)` positions behind the current node.
#[derive(Clone, Debug)]
pub struct RollingWindow {
    spec: GridSpec,
    buf: Vec<f64>,
    written: usize,
}

impl RollingWindow {
    pub fn new(spec: GridSpec) -> Self {
        let cap = spec.side().pow(spec.n as u32 - 1) + 1;
        RollingWindow { spec, buf: vec![0.0; cap], written: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.buf.len()
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Values of the last slab `i_1 = m`, in lexicographic order.
    ///
    /// Only meaningful once the sweep has finished.
    pub fn final_slab(&self) -> Vec<f64> {
        let slab = self.buf.len() - 1;
        let start = self.spec.len() - slab;
        (start..self.spec.len()).map(|i| self.get(i)).collect()
    }
}

impl NodeStore for RollingWindow {
    #[inline]
    fn get(&self, linear: usize) -> f64 {
        debug_assert!(linear < self.written && linear + self.buf.len() >= self.written);
        self.buf[linear % self.buf.len()]
    }

    #[inline]
    fn set(&mut self, linear: usize, value: f64) {
        let cap = self.buf.len();
        self.buf[linear % cap] = value;
        self.written = self.written.max(linear + 1);
    }
}

/// One double per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Self {
        GridField { spec, values: vec![0.0; spec.len()] }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", spec.len(), values.len())));
        }
        Ok(GridField { spec, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(spec.len());
        let mut x = vec![0.0; spec.n()];
        let mut cursor = Cursor::new(spec);
        loop {
            spec.coords_into(&cursor.index, &mut x);
            values.push(f(&x));
            if !cursor.advance() {
                break;
            }
        }
        GridField { spec, values }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.spec.linear_index(index)]
    }

    /// Visits every node with its multi-index, coordinates and value.
    pub fn for_each_node(&self, mut visit: impl FnMut(&[usize], &[f64], f64)) {
        let mut x = vec![0.0; self.spec.n()];
        let mut cursor = Cursor::new(self.spec);
        loop {
            self.spec.coords_into(&cursor.index, &mut x);
            visit(&cursor.index, &x, self.values[cursor.linear]);
            if !cursor.advance() {
                break;
            }
        }
    }

    /// Applies `f(x, value)` pointwise, producing a new field on the same grid.
    pub fn map(&self, mut f: impl FnMut(&[f64], f64) -> f64) -> GridField {
        let mut values = Vec::with_capacity(self.values.len());
        self.for_each_node(|_, x, v| values.push(f(x, v)));
        GridField { spec: self.spec, values }
    }

    /// Multilinear interpolation at a point of `[0,1]^n`.
    ///
    /// Points are clamped into the unit cube; callers validate the domain.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.spec.n();
        let m = self.spec.m();
        debug_assert_eq!(x.len(), n);
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for j in 0..n {
            let mut s = x[j].clamp(0.0, 1.0) * m as f64;
            let r = s.round();
            if (s - r).abs() < 1e-9 {
                s = r;
            }
            let cell = (s.floor() as usize).min(m - 1);
            base[j] = cell;
            frac[j] = s - cell as f64;
        }
        let offsets = self.spec.backward_offsets();
        let origin: usize = (0..n).map(|j| base[j] * offsets[j]).sum();
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut linear = origin;
            for j in 0..n {
                if corner >> (n - 1 - j) & 1 == 1 {
                    weight *= frac[j];
                    linear += offsets[j];
                } else {
                    weight *= 1.0 - frac[j];
                }
            }
            if weight != 0.0 {
                acc += weight * self.values[linear];
            }
        }
        acc
    }

    /// Flat little-endian binary: `n`, `m` as `u64`, then `(m+1)^n` doubles.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.spec.n() as u64).to_le_bytes())?;
        w.write_all(&(self.spec.m() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let m = u64::from_le_bytes(word) as usize;
        let spec = GridSpec::new(n, m)?;
        let mut values = Vec::with_capacity(spec.len());
        for _ in 0..spec.len() {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Ok(GridField { spec, values })
    }

    /// One row per node: coordinates, then the value, at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header: Vec<String> = (1..=self.spec.n()).map(|j| format!("x{j}")).collect();
        header.push("value".into());
        writeln!(w, "{}", header.join(","))?;
        let mut err = None;
        self.for_each_node(|_, x, v| {
            if err.is_some() {
                return;
            }
            let mut line = String::new();
            for xi in x {
                line.push_str(&format!("{xi:.16e},"));
            }
            line.push_str(&format!("{v:.16e}"));
            if let Err(e) = writeln!(w, "{line}") {
                err = Some(e);
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`GridField::write_csv`] for a known grid.
    pub fn read_csv<R: BufRead>(spec: GridSpec, r: R) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().unwrap_or("");
            let v: f64 = last
                .trim()
                .parse()
                .map_err(|_| Error::Parse { line: lineno + 1, msg: format!("bad value `{last}`") })?;
            values.push(v);
        }
        GridField::from_values(spec, values)
    }
}
