use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform periodic grid on `center + [-T, T)^n` with `2^J` cells per axis.
/// Samples sit at cell centres, flattened row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    level: u32,
    half_width: f64,
    center: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, level: u32, half_width: f64) -> Result<Self> {
        Self::with_center(dim, level, half_width, vec![0.0; dim])
    }

    pub fn with_center(dim: usize, level: u32, half_width: f64, center: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("grid dimension must be positive"));
        }
        if level == 0 || level as usize * dim > 28 {
            return Err(invalid(format!("grid with 2^{level} points per axis in dimension {dim} is out of range")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid("grid half-width must be positive and finite"));
        }
        if center.len() != dim || center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("grid centre must be a finite point of the grid's dimension"));
        }
        Ok(Self { dim, level, half_width, center })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn points_per_axis(&self) -> usize {
        1 << self.level
    }

    pub fn len(&self) -> usize {
        1 << (self.level as usize * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis() as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lower corner of the box on `axis`.
    pub fn origin(&self, axis: usize) -> f64 {
        self.center[axis] - self.half_width
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin(axis) + (i as f64 + 0.5) * self.spacing()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let n = self.points_per_axis();
        let mut idx = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let n = self.points_per_axis();
        idx.iter().fold(0, |acc, i| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    /// Cell indices (unwrapped, possibly outside `0..2^J`) whose centres lie
    /// in `[lo, hi]`, or in `[lo, hi)` when `half_open`.
    pub fn index_span(&self, axis: usize, lo: f64, hi: f64, half_open: bool) -> (i64, i64) {
        let h = self.spacing();
        let o = self.origin(axis);
        // centre(i) = o + (i + 1/2) h
        let a = ((lo - o) / h - 0.5).ceil() as i64;
        let b_real = (hi - o) / h - 0.5;
        let mut b = b_real.floor() as i64;
        if half_open && b as f64 == b_real {
            b -= 1;
        }
        (a, b)
    }

    /// The same cells rescaled by `2^nu`: samples of `x -> g(2^-nu x)`.
    pub fn dilated(&self, nu: u32) -> Self {
        let s = (nu as f64).exp2();
        Self {
            dim: self.dim,
            level: self.level,
            half_width: self.half_width * s,
            center: self.center.iter().map(|c| c * s).collect(),
        }
    }

    /// Ordinary frequency of FFT bin `k` on `axis`: `k / (2T)` with the upper
    /// half wrapped to negative frequencies.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.points_per_axis();
        let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        kk / (2.0 * self.half_width)
    }

    /// Largest representable frequency magnitude per axis.
    pub fn nyquist(&self) -> f64 {
        self.points_per_axis() as f64 / (4.0 * self.half_width)
    }

    pub fn same_layout(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Complex samples on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_real(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        Self::from_values(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| Complex64::new(f(&grid.point(k)), 0.0)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_complex_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn scaled_real(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        if !self.grid.same_layout(&other.grid) {
            return Err(invalid("cannot add functions on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.add(&other.scaled_real(-1.0))
    }

    /// Pointwise product with a real multiplier.
    pub fn weighted(&self, w: impl Fn(&[f64]) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(k, v)| v * w(&self.grid.point(k))).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Zeroes every sample whose point fails `keep`.
    pub fn masked(&self, keep: impl Fn(&[f64]) -> bool) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let values =
            self.values.iter().enumerate().map(|(k, v)| if keep(&self.grid.point(k)) { *v } else { zero }).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Same samples read as the function `x -> f(2^-nu x)`.
    pub fn dilated(&self, nu: u32) -> Self {
        Self { grid: self.grid.dilated(nu), values: self.values.clone() }
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Functions `f_0, ..., f_{nu_max}` on one shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSequence {
    levels: Vec<GridFunction>,
}

impl GridSequence {
    pub fn new(levels: Vec<GridFunction>) -> Result<Self> {
        let Some(first) = levels.first() else {
            return Err(invalid("a grid sequence needs at least one level"));
        };
        if levels.iter().any(|f| !f.grid.same_layout(&first.grid)) {
            return Err(invalid("all levels of a grid sequence must share one grid"));
        }
        Ok(Self { levels })
    }

    pub fn grid(&self) -> &Grid {
        &self.levels[0].grid
    }

    pub fn levels(&self) -> &[GridFunction] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_levels(self) -> Vec<GridFunction> {
        self.levels
    }

    pub fn scaled_real(&self, c: f64) -> Self {
        Self { levels: self.levels.iter().map(|f| f.scaled_real(c)).collect() }
    }

    pub fn sum(&self) -> GridFunction {
        let mut acc = GridFunction::zeros(self.grid());
        for f in &self.levels {
            for (a, v) in acc.values.iter_mut().zip(&f.values) {
                *a += v;
            }
        }
        acc
    }
}
