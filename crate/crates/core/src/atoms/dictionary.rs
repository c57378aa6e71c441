//! Finite stand-in for "every `psi` in `C^L`": a list of closed-form test
//! functions with their `C^L` norms measured on a window that must contain
//! the supports of the atoms being tested.
//!
//! Passing against a dictionary means "not falsified"; the moment condition
//! is linear in `psi`, so the list only needs to span low-order behaviour.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::norms::{Grid, GridFunction};
use crate::sampling::AxisBox;

use super::holder::{holder_decompose, holder_parts_masked, multi_indices, HolderOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `x^beta`.
    Monomial { powers: Vec<u32> },
    /// `exp(-|x - center|^2 / width^2)`.
    Gaussian { center: Vec<f64>, width: f64 },
    /// `cos(2 pi frequency . x)`.
    Cosine { frequency: Vec<f64> },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Monomial { powers } => x.iter().zip(powers).map(|(v, &p)| v.powi(p as i32)).product(),
            Self::Gaussian { center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum();
                (-r2 / (width * width)).exp()
            }
            Self::Cosine { frequency } => (2.0 * PI * x.iter().zip(frequency).map(|(v, f)| v * f).sum::<f64>()).cos(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Monomial { powers } => powers.len(),
            Self::Gaussian { center, .. } => center.len(),
            Self::Cosine { frequency } => frequency.len(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Monomial { powers } => format!("x^{powers:?}"),
            Self::Gaussian { center, width } => format!("gauss({center:?}, {width})"),
            Self::Cosine { frequency } => format!("cos({frequency:?})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionDictionary {
    order: f64,
    window: AxisBox,
    entries: Vec<(TestFunction, f64)>,
}

impl TestFunctionDictionary {
    /// Monomials up to degree `ceil(L)`, Gaussians at the window centre and
    /// off centre at two widths, and cosines along the first axis.
    pub fn standard(order: f64, window: &AxisBox) -> Result<Self> {
        let n = window.dim();
        let mut fns = Vec::new();
        for deg in 0..=(order.ceil() as usize) {
            for powers in multi_indices(n, deg) {
                fns.push(TestFunction::Monomial { powers: powers.into_iter().map(|p| p as u32).collect() });
            }
        }
        let mid: Vec<f64> = window.lo.iter().zip(&window.hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let off: Vec<f64> = window.lo.iter().zip(&window.hi).map(|(a, b)| a + 0.3 * (b - a)).collect();
        for width in [0.25, 1.0] {
            fns.push(TestFunction::Gaussian { center: mid.clone(), width });
            fns.push(TestFunction::Gaussian { center: off.clone(), width });
        }
        for f in [1.0, 4.0] {
            let mut frequency = vec![0.0; n];
            frequency[0] = f;
            fns.push(TestFunction::Cosine { frequency });
        }
        Self::from_functions(order, window, fns)
    }

    /// Measures `||psi | C^L||` on the window for every function.
    pub fn from_functions(order: f64, window: &AxisBox, fns: Vec<TestFunction>) -> Result<Self> {
        if !(order >= 0.0) || !order.is_finite() {
            return Err(invalid(format!("moment order must be finite and nonnegative, got {order}")));
        }
        if window.lo.iter().chain(&window.hi).any(|v| !v.is_finite()) || window.volume() <= 0.0 {
            return Err(invalid("dictionary window must be a bounded box with interior"));
        }
        let n = window.dim();
        if fns.iter().any(|f| f.dim() != n) {
            return Err(invalid("test function dimension differs from the window"));
        }
        let grid = norm_grid(order, window)?;
        let mask: Vec<bool> = (0..grid.len()).map(|k| window.contains(&grid.point(k))).collect();
        let opts = HolderOptions::default();
        let entries = fns
            .into_iter()
            .map(|f| {
                let samples = GridFunction::from_fn(&grid, |x| f.eval(x));
                let norm = holder_parts_masked(&samples, order, Some(&mask), &opts)?.total();
                Ok((f, norm))
            })
            .collect::<Result<_>>()?;
        Ok(Self { order, window: window.clone(), entries })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn window(&self) -> &AxisBox {
        &self.window
    }

    /// `(psi, ||psi | C^L||)` pairs.
    pub fn entries(&self) -> &[(TestFunction, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A cubic grid around the window, fine enough for the difference stencils.
fn norm_grid(order: f64, window: &AxisBox) -> Result<Grid> {
    let n = window.dim();
    let center: Vec<f64> = window.lo.iter().zip(&window.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    // A little slack so the closed window is covered by cell centres.
    let half = window.lo.iter().zip(&window.hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max) * 1.0625;
    let k = if order > 0.0 { holder_decompose(order)?.floor_minus } else { 0 };
    let needed = ((1u64 << (k + 3)) as f64 * 2.0 * half).log2().ceil().max(0.0) as u32;
    let base = match n {
        1 => 10,
        2 => 7,
        _ => 5,
    };
    Grid::with_center(n, needed.max(base), half, center)
}
