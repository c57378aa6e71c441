//! Besov and Triebel-Lizorkin norms of grid functions through their
//! Littlewood-Paley pieces.

use crate::error::{Error, Result};
use crate::exponents::ExponentField;
use crate::geometry::RasterDomain;
use crate::norms::{norm_lp_lq, norm_lq_lp, GridFunction, GridSequence};
use crate::weights::WeightSequence;

use super::partition::{lp_pieces, PartitionOfUnity};

/// `w_j (phi_j f^)^v` for every level, optionally zeroed off `domain`.
pub fn weighted_pieces(
    f: &GridFunction,
    w: &WeightSequence,
    pou: &PartitionOfUnity,
    domain: Option<&RasterDomain>,
) -> Result<GridSequence> {
    let pieces = lp_pieces(f, pou)?;
    let grid = f.grid();
    let inside: Option<Vec<bool>> = domain.map(|d| (0..grid.len()).map(|k| d.contains(&grid.point(k))).collect());
    let levels = pieces
        .into_levels()
        .into_iter()
        .enumerate()
        .map(|(j, piece)| {
            let mut out = piece.weighted(|x| w.value(j as u32, x));
            if let Some(mask) = &inside {
                for (v, keep) in out.values_mut().iter_mut().zip(mask) {
                    if !keep {
                        *v = 0.0.into();
                    }
                }
            }
            out
        })
        .collect();
    GridSequence::new(levels)
}

/// `||(w_j (phi_j f^)^v)_j | l_q(L_p)||`.
pub fn besov_norm(
    f: &GridFunction,
    p: &ExponentField,
    q: &ExponentField,
    w: &WeightSequence,
    pou: &PartitionOfUnity,
    tol: f64,
) -> Result<f64> {
    norm_lq_lp(&weighted_pieces(f, w, pou, None)?, p, q, tol)
}

/// `||(w_j (phi_j f^)^v)_j | L_p(l_q)||`; needs bounded `p` and `q`.
pub fn triebel_norm(
    f: &GridFunction,
    p: &ExponentField,
    q: &ExponentField,
    w: &WeightSequence,
    pou: &PartitionOfUnity,
    tol: f64,
) -> Result<f64> {
    require_bounded(p, q)?;
    norm_lp_lq(&weighted_pieces(f, w, pou, None)?, p, q, tol)
}

/// Besov expression with the pieces of `f` (zero outside the sampled
/// function's support) integrated over `domain` only.
pub fn besov_norm_masked(
    f: &GridFunction,
    p: &ExponentField,
    q: &ExponentField,
    w: &WeightSequence,
    pou: &PartitionOfUnity,
    domain: &RasterDomain,
    tol: f64,
) -> Result<f64> {
    norm_lq_lp(&weighted_pieces(f, w, pou, Some(domain))?, p, q, tol)
}

pub fn triebel_norm_masked(
    f: &GridFunction,
    p: &ExponentField,
    q: &ExponentField,
    w: &WeightSequence,
    pou: &PartitionOfUnity,
    domain: &RasterDomain,
    tol: f64,
) -> Result<f64> {
    require_bounded(p, q)?;
    norm_lp_lq(&weighted_pieces(f, w, pou, Some(domain))?, p, q, tol)
}

pub(crate) fn require_bounded(p: &ExponentField, q: &ExponentField) -> Result<()> {
    if !p.p_plus().is_finite() || !q.p_plus().is_finite() {
        return Err(Error::Precondition("the L_p(l_q) scale needs p+ and q+ finite".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_partition;
    use crate::norms::Grid;
    use crate::weights::weight_classical;
    use std::f64::consts::PI;

    fn setup() -> (Grid, PartitionOfUnity, ExponentField) {
        let grid = Grid::new(1, 10, 1.0).unwrap();
        let pou = build_partition(7, &grid).unwrap();
        (grid, pou, ExponentField::constant(1, 2.0).unwrap())
    }

    #[test]
    fn band_limited_gives_l2_norm() {
        let (grid, pou, two) = setup();
        let f = GridFunction::from_fn(&grid, |x| (PI * x[0]).cos() + 0.5);
        // int_{-1}^{1} (cos + 1/2)^2 = 1 + 1/2.
        let expect = 1.5f64.sqrt();
        let w = weight_classical(0.0);
        let b = besov_norm(&f, &two, &two, &w, &pou, 1e-12).unwrap();
        let t = triebel_norm(&f, &two, &two, &w, &pou, 1e-12).unwrap();
        assert!((b - expect).abs() < 1e-6, "{b}");
        assert!((t - expect).abs() < 1e-6, "{t}");
        assert_eq!(besov_norm(&GridFunction::zeros(&grid), &two, &two, &w, &pou, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn constant_exponents_match_direct_sum() {
        let (grid, pou, two) = setup();
        let f = GridFunction::from_fn(&grid, |x| (-(x[0] * 8.0).powi(2)).exp() * (30.0 * x[0]).sin());
        let s = 0.7;
        let pieces = lp_pieces(&f, &pou).unwrap();
        let direct: f64 = pieces
            .levels()
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let l2sq: f64 = p.abs_values().iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
                (2.0 * j as f64 * s).exp2() * l2sq
            })
            .sum::<f64>()
            .sqrt();
        let b = besov_norm(&f, &two, &two, &weight_classical(s), &pou, 1e-13).unwrap();
        assert!((b - direct).abs() < 1e-8 * direct, "{b} vs {direct}");
    }

    #[test]
    fn smoothness_weight_is_monotone() {
        let (grid, pou, two) = setup();
        let f = GridFunction::from_fn(&grid, |x| (50.0 * PI * x[0]).sin() + (5.0 * PI * x[0]).cos());
        let lo = besov_norm(&f, &two, &two, &weight_classical(0.5), &pou, 1e-12).unwrap();
        let hi = besov_norm(&f, &two, &two, &weight_classical(1.5), &pou, 1e-12).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn unbounded_exponent_rejected_for_triebel() {
        let (grid, pou, two) = setup();
        let inf = ExponentField::constant(1, f64::INFINITY).unwrap();
        let f = GridFunction::zeros(&grid);
        let r = triebel_norm(&f, &inf, &two, &weight_classical(0.0), &pou, 1e-10);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
