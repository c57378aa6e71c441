//! Hoelder norms `||f | C^s||` of grid samples, on all of the grid or on
//! the closure of a raster domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::RasterDomain;
use crate::norms::{Grid, GridFunction};

/// `s = floor_minus + frac_plus` with `frac_plus` in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderIndex {
    pub s: f64,
    pub floor_minus: u32,
    pub frac_plus: f64,
}

pub fn holder_decompose(s: f64) -> Result<HolderIndex> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("Hoelder index must be positive and finite, got {s}")));
    }
    let floor_minus = s.ceil() - 1.0;
    Ok(HolderIndex { s, floor_minus: floor_minus as u32, frac_plus: s - floor_minus })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderOptions {
    /// Every pair within this many cells (sup-norm) is examined.
    pub near_radius: usize,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self { near_radius: 8, random_pairs: 10_000, seed: 0x686f_6c64 }
    }
}

/// `sum_{|a| <= k} sup |D^a f| + sum_{|a| = k} sup |D^a f(x) - D^a f(y)| / |x - y|^{frac}`
/// with `k = floor_minus(s)`; `s = 0` gives the sup norm.
///
/// Derivatives are central differences, one-sided where the stencil would
/// leave the region. Without a region the grid is treated as periodic.
pub fn holder_norm(f: &GridFunction, s: f64, region: Option<&RasterDomain>, opts: &HolderOptions) -> Result<f64> {
    Ok(holder_parts(f, s, region, opts)?.total())
}

/// The two halves of a Hoelder norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderParts {
    pub sup_terms: f64,
    pub seminorm: f64,
}

impl HolderParts {
    pub fn total(&self) -> f64 {
        self.sup_terms + self.seminorm
    }
}

pub fn holder_parts(f: &GridFunction, s: f64, region: Option<&RasterDomain>, opts: &HolderOptions) -> Result<HolderParts> {
    let grid = f.grid();
    let mask: Option<Vec<bool>> = region
        .map(|dom| {
            if dom.dim() != grid.dim() {
                return Err(invalid("region and grid dimensions differ"));
            }
            Ok((0..grid.len()).map(|k| dom.in_closure(&grid.point(k))).collect())
        })
        .transpose()?;
    holder_parts_masked(f, s, mask.as_deref(), opts)
}

/// As [`holder_parts`] with an explicit cell mask; `None` means the whole
/// grid with periodic stencils, `Some` restricts to the marked cells with
/// one-sided stencils at their edge.
pub(crate) fn holder_parts_masked(f: &GridFunction, s: f64, mask: Option<&[bool]>, opts: &HolderOptions) -> Result<HolderParts> {
    let grid = f.grid();
    let values = f.real_parts();
    if mask.is_some_and(|m| !m.iter().any(|&b| b)) {
        return Err(Error::Data("region contains no grid points".into()));
    }
    if s == 0.0 {
        return Ok(HolderParts { sup_terms: masked_sup(&values, mask), seminorm: 0.0 });
    }
    let idx = holder_decompose(s)?;
    let k = idx.floor_minus as usize;
    let per_unit = 1.0 / grid.spacing();
    if per_unit < (1u64 << (k + 3)) as f64 * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "grid has {per_unit} points per unit; order-{k} differences need at least {}",
            1u64 << (k + 3)
        )));
    }
    let ops = Stencils { grid, mask };
    let mut sup_terms = 0.0;
    let mut top: Vec<Vec<f64>> = Vec::new();
    for order in 0..=k {
        for alpha in multi_indices(grid.dim(), order) {
            let d = ops.derivative(&values, &alpha)?;
            sup_terms += masked_sup(&d, mask);
            if order == k {
                top.push(d);
            }
        }
    }
    let pairs = pair_set(grid, mask, opts);
    let frac = idx.frac_plus;
    let h = grid.spacing();
    let mut seminorm = 0.0;
    for d in &top {
        let mut best = 0.0f64;
        for &(a, b, dist_cells) in &pairs {
            let q = (d[a] - d[b]).abs() / (dist_cells * h).powf(frac);
            best = best.max(q);
        }
        seminorm += best;
    }
    Ok(HolderParts { sup_terms, seminorm })
}

fn masked_sup(v: &[f64], mask: Option<&[bool]>) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(k, _)| mask.map_or(true, |m| m[*k]))
        .map(|(_, x)| x.abs())
        .fold(0.0, f64::max)
}

/// All multi-indices of the given order in `n` variables, lexicographic.
pub fn multi_indices(n: usize, order: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(n - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct Stencils<'a> {
    grid: &'a Grid,
    mask: Option<&'a [bool]>,
}

impl Stencils<'_> {
    /// Index of the neighbour `steps` cells along `axis`, if it is usable.
    fn neighbour(&self, k: usize, axis: usize, steps: i64) -> Option<usize> {
        let n = self.grid.points_per_axis() as i64;
        let stride = n.pow((self.grid.dim() - 1 - axis) as u32);
        let i = (k as i64 / stride) % n;
        let j = i + steps;
        let j = match self.mask {
            // Periodic on the whole grid.
            None => j.rem_euclid(n),
            Some(_) if j < 0 || j >= n => return None,
            Some(_) => j,
        };
        let nb = (k as i64 + (j - i) * stride) as usize;
        match self.mask {
            Some(m) if !m[nb] => None,
            _ => Some(nb),
        }
    }

    fn derivative(&self, values: &[f64], alpha: &[usize]) -> Result<Vec<f64>> {
        let mut cur = values.to_vec();
        for (axis, &order) in alpha.iter().enumerate() {
            let mut left = order;
            while left > 0 {
                let step = left.min(2);
                cur = self.apply(&cur, axis, step)?;
                left -= step;
            }
        }
        Ok(cur)
    }

    /// One first- or second-order difference along `axis`.
    fn apply(&self, v: &[f64], axis: usize, order: usize) -> Result<Vec<f64>> {
        let h = self.grid.spacing();
        let mut out = vec![0.0; v.len()];
        for k in 0..v.len() {
            if self.mask.is_some_and(|m| !m[k]) {
                continue;
            }
            let at = |s: i64| self.neighbour(k, axis, s);
            let val = match order {
                1 => match (at(-1), at(1)) {
                    (Some(l), Some(r)) => (v[r] - v[l]) / (2.0 * h),
                    (None, Some(r)) => match at(2) {
                        Some(r2) => (-3.0 * v[k] + 4.0 * v[r] - v[r2]) / (2.0 * h),
                        None => (v[r] - v[k]) / h,
                    },
                    (Some(l), None) => match at(-2) {
                        Some(l2) => (3.0 * v[k] - 4.0 * v[l] + v[l2]) / (2.0 * h),
                        None => (v[k] - v[l]) / h,
                    },
                    (None, None) => return Err(stencil_error(self.grid, k, axis)),
                },
                _ => match (at(-1), at(1)) {
                    (Some(l), Some(r)) => (v[r] - 2.0 * v[k] + v[l]) / (h * h),
                    (None, Some(r)) => match at(2) {
                        Some(r2) => (v[k] - 2.0 * v[r] + v[r2]) / (h * h),
                        None => return Err(stencil_error(self.grid, k, axis)),
                    },
                    (Some(l), None) => match at(-2) {
                        Some(l2) => (v[k] - 2.0 * v[l] + v[l2]) / (h * h),
                        None => return Err(stencil_error(self.grid, k, axis)),
                    },
                    (None, None) => return Err(stencil_error(self.grid, k, axis)),
                },
            };
            out[k] = val;
        }
        Ok(out)
    }
}

fn stencil_error(grid: &Grid, k: usize, axis: usize) -> Error {
    Error::Data(format!("region too thin for a difference stencil along axis {axis} at {:?}", grid.point(k)))
}

/// `(a, b, |x_a - x_b| in cells)`: all pairs within the near radius plus
/// seeded random pairs. Without a region, distances are not wrapped.
fn pair_set(grid: &Grid, mask: Option<&[bool]>, opts: &HolderOptions) -> Vec<(usize, usize, f64)> {
    let n = grid.dim();
    let per_axis = grid.points_per_axis() as i64;
    let r = opts.near_radius as i64;
    let usable = |k: usize| mask.map_or(true, |m| m[k]);
    // Offsets in the half-space that is lexicographically positive.
    let side = (2 * r + 1) as usize;
    let offsets: Vec<Vec<i64>> = (0..side.pow(n as u32))
        .map(|mut code| {
            let mut off = vec![0i64; n];
            for a in (0..n).rev() {
                off[a] = (code % side) as i64 - r;
                code /= side;
            }
            off
        })
        .filter(|off| off.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0))
        .collect();
    let mut pairs = Vec::new();
    for k in 0..grid.len() {
        if !usable(k) {
            continue;
        }
        let idx = grid.multi_index(k);
        'off: for off in &offsets {
            let mut nb = 0usize;
            for a in 0..n {
                let j = idx[a] as i64 + off[a];
                if j < 0 || j >= per_axis {
                    continue 'off;
                }
                nb = nb * per_axis as usize + j as usize;
            }
            if usable(nb) {
                let dist = off.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
                pairs.push((k, nb, dist));
            }
        }
    }
    let candidates: Vec<usize> = (0..grid.len()).filter(|&k| usable(k)).collect();
    if candidates.len() >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.random_pairs {
            let a = candidates[rng.gen_range(0..candidates.len())];
            let b = candidates[rng.gen_range(0..candidates.len())];
            if a == b {
                continue;
            }
            let (ia, ib) = (grid.multi_index(a), grid.multi_index(b));
            let dist = ia.iter().zip(&ib).map(|(x, y)| (*x as f64 - *y as f64).powi(2)).sum::<f64>().sqrt();
            pairs.push((a, b, dist));
        }
    }
    pairs
}
