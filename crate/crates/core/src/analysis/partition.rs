//! Smooth dyadic resolution of unity on the frequency grid and the
//! Littlewood-Paley pieces it induces.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::norms::{Grid, GridFunction, GridSequence};

use super::fft::{frequency_radii, transform};

pub const DEFAULT_SMOOTHSTEP_ORDER: u32 = 7;

/// `phi_0 = 1` on `|xi| <= 1`, `0` on `|xi| >= 2`, a `C^order` smoothstep
/// in between; `phi_j = phi_0(2^-j .) - phi_0(2^{1-j} .)` for `j >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    grid: Grid,
    max_level: u32,
    order: u32,
    /// `levels[j][k]` is `phi_j` at frequency bin `k`.
    levels: Vec<Vec<f64>>,
}

/// Levels `0..=max_level` with the default smoothstep order.
pub fn build_partition(max_level: u32, grid: &Grid) -> Result<PartitionOfUnity> {
    build_partition_with_order(max_level, grid, DEFAULT_SMOOTHSTEP_ORDER)
}

pub fn build_partition_with_order(max_level: u32, grid: &Grid, order: u32) -> Result<PartitionOfUnity> {
    if max_level < 1 {
        return Err(invalid("the partition needs at least levels 0 and 1"));
    }
    let top = ((max_level + 1) as f64).exp2();
    if grid.nyquist() < top {
        return Err(invalid(format!(
            "grid Nyquist frequency {} is below 2^(J+1) = {top}; refine the grid or lower J",
            grid.nyquist()
        )));
    }
    let radii = frequency_radii(grid);
    let levels = (0..=max_level)
        .map(|j| {
            radii
                .iter()
                .map(|&r| {
                    let outer = phi0(r * (-(j as f64)).exp2(), order);
                    if j == 0 {
                        outer
                    } else {
                        outer - phi0(r * (1.0 - j as f64).exp2(), order)
                    }
                })
                .collect()
        })
        .collect();
    Ok(PartitionOfUnity { grid: grid.clone(), max_level, order, levels })
}

impl PartitionOfUnity {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `phi_j` on the frequency bins, in the grid's flat layout.
    pub fn level(&self, j: u32) -> &[f64] {
        &self.levels[j as usize]
    }

    /// `phi_j(xi)` off the grid.
    pub fn phi(&self, j: u32, radius: f64) -> f64 {
        let outer = phi0(radius * (-(j as f64)).exp2(), self.order);
        if j == 0 {
            outer
        } else {
            outer - phi0(radius * (1.0 - j as f64).exp2(), self.order)
        }
    }
}

/// `phi_0` as a function of `|xi|`.
pub fn phi0(radius: f64, order: u32) -> f64 {
    if radius <= 1.0 {
        1.0
    } else if radius >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep(radius - 1.0, order)
    }
}

/// `x^{N+1} sum_k C(N+k, k) C(2N+1, N-k) (-x)^k`: rises from 0 to 1 on `[0, 1]`
/// with `N` vanishing derivatives at both ends.
fn smoothstep(x: f64, order: u32) -> f64 {
    // S(x) = 1 - S(1 - x); the expansion cancels badly near 1.
    if x > 0.5 {
        return 1.0 - smoothstep(1.0 - x, order);
    }
    let n = order as u64;
    let mut sum = 0.0;
    for k in 0..=n {
        sum += binom(n + k, k) * binom(2 * n + 1, n - k) * (-x).powi(k as i32);
    }
    x.powi(order as i32 + 1) * sum
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(phi_j f^)^v` for `j = 0..=J`.
pub fn lp_pieces(f: &GridFunction, pou: &PartitionOfUnity) -> Result<GridSequence> {
    if !f.grid().same_layout(&pou.grid) {
        return Err(invalid("function and partition live on different grids"));
    }
    let mut spectrum = f.values().to_vec();
    transform(f.grid(), &mut spectrum, false);
    let pieces = pou
        .levels
        .iter()
        .map(|phi| {
            let mut v: Vec<Complex64> = spectrum.iter().zip(phi).map(|(s, w)| s * w).collect();
            transform(f.grid(), &mut v, true);
            GridFunction::from_values(f.grid(), v)
        })
        .collect::<Result<_>>()?;
    GridSequence::new(pieces)
}
