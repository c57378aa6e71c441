//! Axis-aligned boxes and the uniform sample sets used for sup/inf estimates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Closed axis-aligned box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid("box corners must be nonempty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a.is_nan() || b.is_nan() || a > b) {
            return Err(invalid("box requires lo <= hi on every axis"));
        }
        Ok(Self { lo, hi })
    }

    /// The whole space; used as the mask for fields that are infinite everywhere.
    pub fn everything(dim: usize) -> Self {
        Self { lo: vec![f64::NEG_INFINITY; dim], hi: vec![f64::INFINITY; dim] }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

/// Uniform tensor grid of sample points on a closed box, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub bounds: AxisBox,
    pub samples_per_axis: usize,
}

impl SampleBox {
    pub fn new(bounds: AxisBox, samples_per_axis: usize) -> Result<Self> {
        if samples_per_axis < 2 {
            return Err(invalid("a sample box needs at least 2 samples per axis"));
        }
        if bounds.lo.iter().chain(&bounds.hi).any(|v| !v.is_finite()) {
            return Err(invalid("sample boxes must be bounded"));
        }
        Ok(Self { bounds, samples_per_axis })
    }

    pub fn interval(lo: f64, hi: f64, samples: usize) -> Result<Self> {
        Self::new(AxisBox::new(vec![lo], vec![hi])?, samples)
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis_value(&self, axis: usize, i: usize) -> f64 {
        let (a, b) = (self.bounds.lo[axis], self.bounds.hi[axis]);
        let t = i as f64 / (self.samples_per_axis - 1) as f64;
        if i + 1 == self.samples_per_axis {
            b
        } else {
            a + (b - a) * t
        }
    }

    /// The `k`-th sample point in row-major order (last axis fastest).
    pub fn point(&self, mut k: usize) -> Vec<f64> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        for axis in (0..n).rev() {
            x[axis] = self.axis_value(axis, k % self.samples_per_axis);
            k /= self.samples_per_axis;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }

    /// Largest distance between neighbouring samples along any axis.
    pub fn spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| (self.bounds.hi[a] - self.bounds.lo[a]) / (self.samples_per_axis - 1) as f64)
            .fold(0.0, f64::max)
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
