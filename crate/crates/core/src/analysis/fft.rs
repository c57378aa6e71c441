//! Multidimensional transforms on row-major grids, one axis at a time.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::norms::Grid;

/// In-place unnormalised forward transform, or inverse scaled by `1 / len`.
pub(crate) fn transform(grid: &Grid, values: &mut [Complex64], inverse: bool) {
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..values.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    values[base + i * stride] = *v;
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / values.len() as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

/// Euclidean length of the ordinary frequency of every bin.
pub(crate) fn frequency_radii(grid: &Grid) -> Vec<f64> {
    let n = grid.points_per_axis();
    let freqs: Vec<f64> = (0..n).map(|k| grid.frequency(k)).collect();
    (0..grid.len())
        .map(|flat| grid.multi_index(flat).iter().map(|&k| freqs[k] * freqs[k]).sum::<f64>().sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let grid = Grid::new(2, 4, 1.0).unwrap();
        let orig: Vec<Complex64> = (0..grid.len()).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let mut v = orig.clone();
        transform(&grid, &mut v, false);
        transform(&grid, &mut v, true);
        let err = v.iter().zip(&orig).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        // cos(2 pi x) on [-1, 1) has frequency 1, i.e. bins +-2.
        let grid = Grid::new(1, 5, 1.0).unwrap();
        let mut v: Vec<Complex64> =
            (0..grid.len()).map(|k| Complex64::new((2.0 * std::f64::consts::PI * grid.point(k)[0]).cos(), 0.0)).collect();
        transform(&grid, &mut v, false);
        for (k, c) in v.iter().enumerate() {
            let expected = if k == 2 || k == 30 { 16.0 } else { 0.0 };
            assert!((c.norm() - expected).abs() < 1e-9, "bin {k}: {c}");
        }
        assert_eq!(grid.frequency(2), 1.0);
    }
}
