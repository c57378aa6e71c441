//! The kernels `eta_{nu,R}(x) = 2^{n nu} / (1 + 2^nu |x|)^R` and level-wise
//! periodic convolution with them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norms::{Grid, GridFunction, GridSequence};

use super::fft::transform;

pub fn eta(level: u32, r: f64, x: &[f64]) -> f64 {
    let s = (level as f64).exp2();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    s.powi(x.len() as i32) / (1.0 + s * norm).powf(r)
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] =
    [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];

/// Kernel on the grid's periodic offsets, each cell holding the cell
/// average of `eta`: exact in one dimension, Gauss-Legendre on `2^n`
/// sub-cells otherwise. Offsets use the nearest periodic image.
pub fn eta_kernel(level: u32, r: f64, grid: &Grid) -> Result<GridFunction> {
    let n = grid.dim();
    if !(r > n as f64) {
        return Err(Error::Precondition(format!("eta kernels need R > n = {n}, got R = {r}")));
    }
    let h = grid.spacing();
    let per_axis = grid.points_per_axis();
    let offset = |i: usize| if i < per_axis / 2 { i as f64 } else { i as f64 - per_axis as f64 };
    let s = (level as f64).exp2();
    let values: Vec<f64> = (0..grid.len())
        .map(|flat| {
            let centre: Vec<f64> = grid.multi_index(flat).iter().map(|&i| offset(i) * h).collect();
            if n == 1 {
                // F(x) = sign(x) (1 - (1 + s|x|)^{1-R}) / (R - 1) is an antiderivative.
                let anti = |x: f64| x.signum() * (1.0 - (1.0 + s * x.abs()).powf(1.0 - r)) / (r - 1.0);
                (anti(centre[0] + 0.5 * h) - anti(centre[0] - 0.5 * h)) / h
            } else {
                cell_average(level, r, &centre, h)
            }
        })
        .collect();
    GridFunction::from_real(grid, values)
}

fn cell_average(level: u32, r: f64, centre: &[f64], h: f64) -> f64 {
    let n = centre.len();
    let q = h / 4.0;
    let points = 10usize.pow(n as u32);
    let mut total = 0.0;
    let mut x = vec![0.0; n];
    for code in 0..points {
        let mut c = code;
        let mut weight = 1.0;
        for (a, xa) in x.iter_mut().enumerate() {
            let digit = c % 10;
            c /= 10;
            let (sub, node) = (digit / 5, digit % 5);
            let mid = centre[a] + (sub as f64 - 0.5) * 2.0 * q;
            *xa = mid + q * GL_NODES[node];
            weight *= GL_WEIGHTS[node] * 0.25;
        }
        total += weight * eta(level, r, &x);
    }
    total
}

/// Level `nu` of the output is `eta_{nu,R} * seq_nu`, convolved periodically.
pub fn eta_convolve(seq: &GridSequence, r: f64) -> Result<GridSequence> {
    let grid = seq.grid();
    let vol = grid.cell_volume();
    let levels = seq
        .levels()
        .iter()
        .enumerate()
        .map(|(nu, f)| {
            let mut kernel = eta_kernel(nu as u32, r, grid)?.into_values();
            transform(grid, &mut kernel, false);
            let mut spec = f.values().to_vec();
            transform(grid, &mut spec, false);
            let mut out: Vec<Complex64> = spec.iter().zip(&kernel).map(|(a, b)| a * b * vol).collect();
            transform(grid, &mut out, true);
            GridFunction::from_values(grid, out)
        })
        .collect::<Result<_>>()?;
    GridSequence::new(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_value() {
        assert_eq!(eta(0, 3.0, &[0.0, 0.0]), 1.0);
        assert_eq!(eta(2, 3.0, &[0.0]), 4.0);
    }

    #[test]
    fn threshold_enforced() {
        let g = Grid::new(2, 4, 1.0).unwrap();
        assert!(matches!(eta_kernel(0, 2.0, &g), Err(Error::Precondition(_))));
        let seq = GridSequence::new(vec![GridFunction::zeros(&g)]).unwrap();
        assert!(eta_convolve(&seq, 1.5).is_err());
        assert!(eta_convolve(&seq, 3.0).unwrap().levels()[0].sup_abs() < 1e-300);
    }

    #[test]
    fn cell_averages_integrate_the_kernel() {
        // int_R 2^nu / (1 + 2^nu |x|)^R = 2 / (R - 1).
        let g = Grid::new(1, 12, 64.0).unwrap();
        let k = eta_kernel(3, 4.0, &g).unwrap();
        let mass: f64 = k.real_parts().iter().sum::<f64>() * g.cell_volume();
        assert!((mass - 2.0 / 3.0).abs() < 1e-6, "{mass}");
        // Gauss-Legendre agrees with the exact average away from the origin in 2-D.
        let g2 = Grid::new(2, 4, 1.0).unwrap();
        let h = g2.spacing();
        let avg = cell_average(0, 3.0, &[3.0 * h, -2.0 * h], h);
        assert!((avg - eta(0, 3.0, &[3.0 * h, -2.0 * h])).abs() < 1e-3);
    }

    #[test]
    fn cube_indicator_dominated_by_smoothed_subset() {
        // chi_Q <= c eta * chi_E for E inside d Q with |E| >= eps |Q|,
        // c = (1 + sqrt(n) d)^R / eps.
        let grid = Grid::new(1, 10, 2.0).unwrap();
        let (nu, r, d, eps): (u32, f64, f64, f64) = (3, 3.0, 2.0, 0.5);
        let side = 0.125;
        let chi_e = GridFunction::from_fn(&grid, |x| if (0.0..side * eps).contains(&x[0]) { 1.0 } else { 0.0 });
        let levels: Vec<GridFunction> = (0..=nu).map(|_| chi_e.clone()).collect();
        let conv = eta_convolve(&GridSequence::new(levels).unwrap(), r).unwrap();
        let smooth = &conv.levels()[nu as usize];
        let c = (1.0 + d).powf(r) / eps;
        for k in 0..grid.len() {
            let x = grid.point(k)[0];
            if (0.0..side).contains(&x) {
                assert!(1.0 <= c * smooth.values()[k].re, "at {x}");
            }
        }
    }
}
