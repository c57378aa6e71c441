//! Raster audits of the MR, IR and ER regularity classes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::index::{corners, strides, unflat};
use super::raster::RasterDomain;

pub const DEFAULT_FLOOR: f64 = 1e-3;

/// Outcome of an IR or ER sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityEstimate {
    pub pass: bool,
    pub c_estimate: f64,
    pub floor: f64,
    /// Minimum ratio observed at each side length, in sweep order.
    pub per_side: Vec<(f64, f64)>,
    pub worst_center: Option<Vec<f64>>,
    pub worst_side: Option<f64>,
}

/// `{1, 1/2, ..., 2^-nu_max}`.
pub fn default_sides(nu_max: u32) -> Vec<f64> {
    (0..=nu_max).map(|k| (-(k as f64)).exp2()).collect()
}

/// Closing with the `3^n` neighbourhood leaves the occupancy unchanged, i.e.
/// the domain equals the interior of its closure at pixel scale.
pub fn check_mr(dom: &RasterDomain) -> bool {
    let n = dom.dim();
    let pad = 2usize;
    let dims: Vec<usize> = dom.dims().iter().map(|d| d + 2 * pad).collect();
    let st = strides(&dims);
    let total: usize = dims.iter().product();
    let mut grid = vec![false; total];
    for (k, &o) in dom.occupancy().iter().enumerate() {
        if o {
            let idx = dom.pixel_multi_index(k);
            grid[idx.iter().zip(&st).map(|(i, s)| (i + pad) * s).sum::<usize>()] = true;
        }
    }
    let dilated = sweep(&grid, &dims, &st, n, true);
    let closed = sweep(&dilated, &dims, &st, n, false);
    closed == grid
}

/// Separable 3-wide max (`grow`) or min filter; outside the array counts as free.
fn sweep(src: &[bool], dims: &[usize], st: &[usize], n: usize, grow: bool) -> Vec<bool> {
    let mut cur = src.to_vec();
    for a in 0..n {
        let mut next = cur.clone();
        for k in 0..cur.len() {
            let i = (k / st[a]) % dims[a];
            let left = if i > 0 { cur[k - st[a]] } else { false };
            let right = if i + 1 < dims[a] { cur[k + st[a]] } else { false };
            next[k] = if grow { cur[k] || left || right } else { cur[k] && left && right };
        }
        cur = next;
    }
    cur
}

/// Half-width in whole pixels of a cube of side `side`.
fn half_pixels(dom: &RasterDomain, side: f64) -> Result<usize> {
    let half = 0.5 * side / dom.pixel();
    let r = half.round();
    if r < 1.0 || (half - r).abs() > 1e-9 * half.max(1.0) {
        return Err(invalid(format!(
            "side {side} is not an even multiple of the pixel size {}",
            dom.pixel()
        )));
    }
    Ok(r as usize)
}

fn finish(per_side: Vec<(f64, f64, Option<Vec<i64>>)>, dom: &RasterDomain, floor: f64) -> RegularityEstimate {
    let mut c = f64::INFINITY;
    let mut worst_center = None;
    let mut worst_side = None;
    for (side, ratio, v) in &per_side {
        if *ratio < c {
            c = *ratio;
            worst_center = v.as_ref().map(|v| dom.vertex_point(v));
            worst_side = Some(*side);
        }
    }
    if per_side.is_empty() || dom.boundary_vertices().is_empty() {
        c = 1.0;
    }
    RegularityEstimate {
        pass: c >= floor,
        c_estimate: c,
        floor,
        per_side: per_side.into_iter().map(|(s, r, _)| (s, r)).collect(),
        worst_center,
        worst_side,
    }
}

fn argmin(values: impl ParallelIterator<Item = (f64, usize)>) -> Option<(f64, usize)> {
    values.min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
}

/// Minimum of `|Q cap Omega| / |Q|` over boundary-centred cubes of the given sides.
pub fn check_ir(dom: &RasterDomain, sides: &[f64], floor: f64) -> Result<RegularityEstimate> {
    let verts = dom.boundary_vertices();
    let mut per_side = Vec::with_capacity(sides.len());
    for &side in sides {
        let h = half_pixels(dom, side)? as i64;
        let best = argmin(verts.par_iter().enumerate().map(|(k, v)| {
            let lo: Vec<i64> = v.iter().map(|c| c - h).collect();
            let hi: Vec<i64> = v.iter().map(|c| c + h).collect();
            let (occ, total) = dom.count_pixels(&lo, &hi);
            (occ as f64 / total as f64, k)
        }));
        if let Some((r, k)) = best {
            per_side.push((side, r, Some(verts[k].clone())));
        }
    }
    Ok(finish(per_side, dom, floor))
}

/// Largest exterior cube inside each boundary-centred cube, as a side ratio.
///
/// Exterior pixels are padded around the raster; `S(p)` is the side of the
/// largest free cube with lower corner `p`, and a square sparse table of
/// range maxima of `S` answers "is there a free cube of side `s` inside `Q`"
/// in constant time, so the best `s` is found by binary search.
pub fn check_er(dom: &RasterDomain, sides: &[f64], floor: f64) -> Result<RegularityEstimate> {
    let n = dom.dim();
    let halves: Vec<usize> = sides.iter().map(|&s| half_pixels(dom, s)).collect::<Result<_>>()?;
    let hmax = halves.iter().copied().max().unwrap_or(1);
    let pad = hmax + 1;
    let dims: Vec<usize> = dom.dims().iter().map(|d| d + 2 * pad).collect();
    let st = strides(&dims);
    let total: usize = dims.iter().product();
    let mut free = vec![true; total];
    for (k, &o) in dom.occupancy().iter().enumerate() {
        if o {
            let idx = dom.pixel_multi_index(k);
            free[idx.iter().zip(&st).map(|(i, s)| (i + pad) * s).sum::<usize>()] = false;
        }
    }
    // S(p) = 1 + min over forward neighbours, scanning backwards.
    let mut size = vec![0u16; total];
    for k in (0..total).rev() {
        if !free[k] {
            continue;
        }
        let idx = unflat(k, &dims);
        let mut m = u16::MAX;
        for mask in corners(n).skip(1) {
            let mut nb = k;
            let mut inside = true;
            for a in 0..n {
                if mask >> a & 1 == 1 {
                    if idx[a] + 1 >= dims[a] {
                        inside = false;
                        break;
                    }
                    nb += st[a];
                }
            }
            m = m.min(if inside { size[nb] } else { 0 });
        }
        size[k] = m.saturating_add(1);
    }
    // table[t][p] = max of S over p + [0, 2^t)^n.
    let levels = usize::BITS as usize - (2 * hmax).leading_zeros() as usize;
    let mut table = vec![size];
    for t in 1..levels {
        let prev = &table[t - 1];
        let off = 1usize << (t - 1);
        let next: Vec<u16> = (0..total)
            .into_par_iter()
            .map(|k| {
                let idx = unflat(k, &dims);
                let mut m = 0u16;
                for mask in corners(n) {
                    let mut nb = k;
                    for a in 0..n {
                        if mask >> a & 1 == 1 && idx[a] + off < dims[a] {
                            nb += off * st[a];
                        }
                    }
                    m = m.max(prev[nb]);
                }
                m
            })
            .collect();
        table.push(next);
    }
    let range_max = |lo: &[usize], w: usize| -> u16 {
        let t = (usize::BITS - 1 - w.leading_zeros()) as usize;
        let span = 1usize << t;
        let mut m = 0u16;
        for mask in corners(n) {
            let mut k = 0;
            for a in 0..n {
                let p = if mask >> a & 1 == 1 { lo[a] + w - span } else { lo[a] };
                k += p * st[a];
            }
            m = m.max(table[t][k]);
        }
        m
    };
    let verts = dom.boundary_vertices();
    let mut per_side = Vec::with_capacity(sides.len());
    for (&side, &h) in sides.iter().zip(&halves) {
        let best = argmin(verts.par_iter().enumerate().map(|(k, v)| {
            let lo: Vec<usize> = v.iter().map(|&c| (c + pad as i64) as usize - h).collect();
            // Largest s with a free cube of side s whose corner lies in lo + [0, 2h - s]^n.
            let (mut good, mut bad) = (0usize, 2 * h + 1);
            while bad - good > 1 {
                let s = (good + bad) / 2;
                if range_max(&lo, 2 * h - s + 1) as usize >= s {
                    good = s;
                } else {
                    bad = s;
                }
            }
            (good as f64 / (2 * h) as f64, k)
        }));
        if let Some((r, k)) = best {
            per_side.push((side, r, Some(verts[k].clone())));
        }
    }
    Ok(finish(per_side, dom, floor))
}

#[cfg(test)]
mod tests {
    use super::super::shapes;
    use super::*;

    #[test]
    fn square_is_regular() {
        let d = shapes::unit_square(2, 6).unwrap();
        assert!(check_mr(&d));
        let sides = default_sides(4);
        let ir = check_ir(&d, &sides, DEFAULT_FLOOR).unwrap();
        assert!(ir.pass);
        assert!((ir.c_estimate - 0.25).abs() < 1e-12, "{}", ir.c_estimate);
        let er = check_er(&d, &sides, DEFAULT_FLOOR).unwrap();
        assert!(er.pass);
        assert!((er.c_estimate - 0.5).abs() < 1e-12, "{}", er.c_estimate);
    }

    #[test]
    fn slit_breaks_mr() {
        assert!(!check_mr(&shapes::slit_square(6).unwrap()));
    }

    #[test]
    fn side_must_fit_pixels() {
        let d = shapes::unit_square(2, 3).unwrap();
        assert!(check_ir(&d, &[0.1], DEFAULT_FLOOR).is_err());
    }

    #[test]
    fn er_matches_brute_force_on_small_raster() {
        let d = shapes::l_hexomino(4).unwrap();
        let sides = [0.5, 0.25];
        let er = check_er(&d, &sides, DEFAULT_FLOOR).unwrap();
        // Brute force: try every sub-cube corner and size.
        let h = d.pixel();
        let mut best_overall = f64::INFINITY;
        for &side in &sides {
            let hp = (0.5 * side / h).round() as i64;
            for v in d.boundary_vertices() {
                let mut best = 0i64;
                for s in 1..=2 * hp {
                    let mut found = false;
                    'corner: for cx in v[0] - hp..=v[0] + hp - s {
                        for cy in v[1] - hp..=v[1] + hp - s {
                            let (occ, _) = d.count_pixels(&[cx, cy], &[cx + s, cy + s]);
                            if occ == 0 {
                                found = true;
                                break 'corner;
                            }
                        }
                    }
                    if found {
                        best = s;
                    }
                }
                best_overall = best_overall.min(best as f64 / (2 * hp) as f64);
            }
        }
        assert_eq!(er.c_estimate, best_overall);
    }
}
