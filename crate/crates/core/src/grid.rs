//! Uniform rectangular grids and fields sampled on them.
//!
//! Values sit at cell centres; node `(ix, iy)` is at
//! `origin + (ix dx, iy dy)` and carries the midpoint weight `dx dy`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Vec2,
    pub spacing: Vec2,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Vec2, spacing: Vec2, nx: usize, ny: usize) -> Result<Self> {
        if !(spacing.x > 0.0 && spacing.y > 0.0) || !origin.is_finite() || !spacing.is_finite() {
            return Err(Error::Config(format!(
                "grid needs positive finite spacing, got ({}, {})",
                spacing.x, spacing.y
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::Config("grid needs at least one cell per axis".into()));
        }
        Ok(GridSpec { origin, spacing, nx, ny })
    }

    /// `n x n` square grid with nodes `-half + j (2 half / n)`: the periodic
    /// layout of `[-half, half)^2`.
    pub fn periodic_square(half: f64, n: usize) -> Result<Self> {
        let h = 2.0 * half / n as f64;
        GridSpec::new(Vec2::new(-half, -half), Vec2::new(h, h), n, n)
    }

    /// Grid with the given spacing whose nodes cover `[lo, hi]` and are
    /// placed symmetrically about its centre.
    pub fn covering(lo: Vec2, hi: Vec2, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {spacing}")));
        }
        let nx = ((hi.x - lo.x) / spacing).ceil().max(0.0) as usize + 1;
        let ny = ((hi.y - lo.y) / spacing).ceil().max(0.0) as usize + 1;
        let cx = 0.5 * (lo.x + hi.x);
        let cy = 0.5 * (lo.y + hi.y);
        let origin = Vec2::new(
            cx - 0.5 * (nx - 1) as f64 * spacing,
            cy - 0.5 * (ny - 1) as f64 * spacing,
        );
        GridSpec::new(origin, Vec2::new(spacing, spacing), nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing.x * self.spacing.y
    }

    /// Node position for row-major index `ix + nx iy`.
    pub fn node(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + ix as f64 * self.spacing.x,
            self.origin.y + iy as f64 * self.spacing.y,
        )
    }

    pub fn node_at(&self, idx: usize) -> Vec2 {
        self.node(idx % self.nx, idx / self.nx)
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.len()).map(move |i| self.node_at(i))
    }

    /// Lowest and highest node positions.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        (self.origin, self.node(self.nx - 1, self.ny - 1))
    }

    /// Region covered by the cells, i.e. the node box grown by half a cell.
    pub fn cell_bounds(&self) -> (Vec2, Vec2) {
        let (lo, hi) = self.bounds();
        let h = self.spacing * 0.5;
        (lo - h, hi + h)
    }

    /// Stable 64-bit fingerprint of the grid geometry.
    pub fn fingerprint(&self) -> u64 {
        let words = [
            self.origin.x.to_bits(),
            self.origin.y.to_bits(),
            self.spacing.x.to_bits(),
            self.spacing.y.to_bits(),
            self.nx as u64,
            self.ny as u64,
        ];
        // FNV-1a over the bytes
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for w in words {
            for b in w.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// Analytic vorticity with a known bounding box of its support.
pub trait VorticitySource: Sync {
    fn vorticity(&self, x: Vec2) -> f64;
    /// Lower-left and upper-right corners of a box containing the support.
    fn support_box(&self) -> (Vec2, Vec2);
    /// Average over the cell of size `h` centred at `c`; sources with
    /// integrable singularities override the midpoint value.
    fn cell_average(&self, c: Vec2, _h: Vec2) -> f64 {
        self.vorticity(c)
    }
}

/// Values a grid field may carry.
pub trait FieldValue: Copy + Send + Sync + Default + std::fmt::Debug {
    /// Number of numbers per value in snapshot files.
    const WIDTH: usize;
    /// Absolute value or Euclidean magnitude.
    fn magnitude(&self) -> f64;
    fn finite(&self) -> bool;
    fn write_text(&self, out: &mut String);
    fn from_numbers(v: &[f64]) -> Self;
}

impl FieldValue for f64 {
    const WIDTH: usize = 1;
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn write_text(&self, out: &mut String) {
        let _ = writeln!(out, "{self:?}");
    }
    fn from_numbers(v: &[f64]) -> Self {
        v[0]
    }
}

impl FieldValue for Vec2 {
    const WIDTH: usize = 2;
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn write_text(&self, out: &mut String) {
        let _ = writeln!(out, "{:?} {:?}", self.x, self.y);
    }
    fn from_numbers(v: &[f64]) -> Self {
        Vec2::new(v[0], v[1])
    }
}

/// Field sampled on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    spec: GridSpec,
    values: Vec<T>,
    /// Set when the field was produced under a violated precondition that
    /// did not warrant an error.
    pub warning: Option<String>,
}

pub type ScalarField = GridField<f64>;
pub type VectorField = GridField<Vec2>;

impl<T: FieldValue> GridField<T> {
    pub fn new(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Data(format!(
                "field has {} values for a {}x{} grid",
                values.len(),
                spec.nx,
                spec.ny
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.finite()) {
            return Err(Error::Data(format!("non-finite field value at index {i}")));
        }
        Ok(GridField { spec, values, warning: None })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridField { spec, values: vec![T::default(); spec.len()], warning: None }
    }

    /// Samples `f` at every node. Panics are the caller's; non-finite
    /// samples are rejected.
    pub fn from_fn(spec: GridSpec, f: impl Fn(Vec2) -> T) -> Result<Self> {
        GridField::new(spec, spec.nodes().map(f).collect())
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        GridField { spec, values, warning: None }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> T {
        self.values[ix + self.spec.nx * iy]
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> GridField<U> {
        GridField {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
            warning: self.warning.clone(),
        }
    }

    /// Pointwise magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.map(|v| v.magnitude())
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.finite()) {
            Some(i) => Err(Error::Data(format!("non-finite field value at index {i}"))),
            None => Ok(()),
        }
    }
}

impl ScalarField {
    /// Midpoint-rule integral.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }
}

impl VectorField {
    pub fn component(&self, i: usize) -> ScalarField {
        self.map(|v| v.get(i))
    }
}

/// Checks that two fields live on the same grid.
pub fn same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::Config(format!(
            "grid mismatch: {}x{} at {:?} vs {}x{} at {:?}",
            a.nx, a.ny, a.origin, b.nx, b.ny, b.origin
        )));
    }
    Ok(())
}

/// Writes `# t=.. nx=.. ny=.. x0=.. y0=.. dx=.. dy=..` and then one value
/// per line in row-major order.
pub fn write_grid_snapshot<T: FieldValue>(path: &Path, t: f64, field: &GridField<T>) -> Result<()> {
    let s = field.spec();
    let mut out = String::with_capacity(24 * T::WIDTH * s.len() + 128);
    let _ = writeln!(
        out,
        "# t={t:?} nx={} ny={} x0={:?} y0={:?} dx={:?} dy={:?}",
        s.nx, s.ny, s.origin.x, s.origin.y, s.spacing.x, s.spacing.y
    );
    for v in field.values() {
        v.write_text(&mut out);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_grid_snapshot`]; returns the time too.
pub fn read_grid_snapshot<T: FieldValue>(path: &Path) -> Result<(f64, GridField<T>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::parse(path, "missing `#` header line"))?;
    let key = |k: &str| -> Result<f64> {
        header
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix(k).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| Error::parse(path, format!("header lacks `{k}`")))?
            .parse::<f64>()
            .map_err(|e| Error::parse(path, format!("bad `{k}`: {e}")))
    };
    let t = key("t")?;
    let spec = GridSpec::new(
        Vec2::new(key("x0")?, key("y0")?),
        Vec2::new(key("dx")?, key("dy")?),
        key("nx")? as usize,
        key("ny")? as usize,
    )?;
    let mut values = Vec::with_capacity(spec.len());
    let mut nums = Vec::with_capacity(T::WIDTH);
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        nums.clear();
        for tok in line.split_whitespace() {
            nums.push(tok.parse::<f64>().map_err(|e| Error::parse(path, format!("line {}: {e}", k + 2)))?);
        }
        if nums.len() != T::WIDTH {
            return Err(Error::parse(path, format!("line {}: expected {} numbers", k + 2, T::WIDTH)));
        }
        values.push(T::from_numbers(&nums));
    }
    if values.len() != spec.len() {
        return Err(Error::parse(path, format!("{} values for a {}x{} grid", values.len(), spec.nx, spec.ny)));
    }
    Ok((t, GridField::new(spec, values)?))
}
