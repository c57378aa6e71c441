use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::sampling::AxisBox;

use super::index::{corners, flat, next_in_box, strides, unflat};

/// A domain given by occupied pixels of side `2^-pixel_level` on the grid
/// `origin + h * Z^n`. The domain is the interior of the union of the
/// closed occupied pixels restricted to pixel semantics: a point belongs to
/// it when every pixel whose closure contains the point is occupied.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterDomain {
    origin: Vec<f64>,
    pixel_level: i32,
    dims: Vec<usize>,
    occupied: Vec<bool>,
    /// Summed-area table over `dims + 1` entries per axis.
    prefix: Vec<u32>,
    /// Vertex indices adjacent to both occupied and free pixels, sorted.
    boundary: Vec<Vec<i64>>,
}

/// How an axis box sits relative to the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxPlacement {
    /// Every pixel meeting the box is occupied.
    Inside,
    /// No pixel meeting the box is occupied.
    Outside,
    /// The box meets the raster boundary.
    Straddles,
}

impl RasterDomain {
    pub fn from_occupancy(origin: Vec<f64>, pixel_level: i32, dims: Vec<usize>, occupied: Vec<bool>) -> Result<Self> {
        let n = dims.len();
        if n == 0 || origin.len() != n {
            return Err(invalid("raster origin and dims must share a positive dimension"));
        }
        if dims.iter().any(|&d| d == 0) || dims.iter().product::<usize>() != occupied.len() {
            return Err(invalid("occupancy length does not match the raster dimensions"));
        }
        if !occupied.iter().any(|&o| o) {
            return Err(invalid("raster domain is empty"));
        }
        if !face_connected(&dims, &occupied) {
            return Err(invalid("raster domain is not connected"));
        }
        let prefix = summed_area(&dims, &occupied);
        let mut dom = Self { origin, pixel_level, dims, occupied, prefix, boundary: Vec::new() };
        dom.boundary = dom.compute_boundary();
        Ok(dom)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn pixel_level(&self) -> i32 {
        self.pixel_level
    }

    pub fn pixel(&self) -> f64 {
        (-self.pixel_level as f64).exp2()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn measure(&self) -> f64 {
        self.occupied_count() as f64 * self.pixel().powi(self.dim() as i32)
    }

    pub fn bounding_box(&self) -> AxisBox {
        let h = self.pixel();
        AxisBox {
            lo: self.origin.clone(),
            hi: self.origin.iter().zip(&self.dims).map(|(o, d)| o + *d as f64 * h).collect(),
        }
    }

    pub fn is_occupied(&self, idx: &[i64]) -> bool {
        if idx.iter().zip(&self.dims).any(|(&i, &d)| i < 0 || i >= d as i64) {
            return false;
        }
        let st = strides(&self.dims);
        self.occupied[idx.iter().zip(&st).map(|(&i, s)| i as usize * s).sum::<usize>()]
    }

    /// Pixel indices whose closure contains `x`, per axis (one or two each).
    fn pixels_at(&self, x: &[f64]) -> Vec<(i64, i64)> {
        let h = self.pixel();
        x.iter()
            .zip(&self.origin)
            .map(|(v, o)| {
                let u = (v - o) / h;
                let f = u.floor();
                if f == u {
                    (f as i64 - 1, f as i64)
                } else {
                    (f as i64, f as i64)
                }
            })
            .collect()
    }

    fn pixel_votes(&self, x: &[f64]) -> (bool, bool) {
        let spans = self.pixels_at(x);
        let lo: Vec<i64> = spans.iter().map(|s| s.0).collect();
        let hi: Vec<i64> = spans.iter().map(|s| s.1).collect();
        let mut idx = lo.clone();
        let (mut any, mut all) = (false, true);
        loop {
            let o = self.is_occupied(&idx);
            any |= o;
            all &= o;
            if !next_in_box(&mut idx, &lo, &hi) {
                break;
            }
        }
        (any, all)
    }

    /// `x` lies in the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.pixel_votes(x).1
    }

    /// `x` lies in the closure.
    pub fn in_closure(&self, x: &[f64]) -> bool {
        self.pixel_votes(x).0
    }

    pub fn on_boundary(&self, x: &[f64]) -> bool {
        let (any, all) = self.pixel_votes(x);
        any && !all
    }

    /// Occupied and total pixel counts over the index box `[lo, hi)`, where
    /// pixels outside the raster count as free.
    pub fn count_pixels(&self, lo: &[i64], hi: &[i64]) -> (u64, u64) {
        let n = self.dim();
        let total: u64 = lo.iter().zip(hi).map(|(a, b)| (b - a).max(0) as u64).product();
        if total == 0 {
            return (0, 0);
        }
        let clo: Vec<usize> = lo.iter().zip(&self.dims).map(|(&a, &d)| a.clamp(0, d as i64) as usize).collect();
        let chi: Vec<usize> = hi.iter().zip(&self.dims).map(|(&b, &d)| b.clamp(0, d as i64) as usize).collect();
        if clo.iter().zip(&chi).any(|(a, b)| a >= b) {
            return (0, total);
        }
        let pdims: Vec<usize> = self.dims.iter().map(|d| d + 1).collect();
        let st = strides(&pdims);
        let mut occ: i64 = 0;
        for mask in corners(n) {
            let mut k = 0;
            let mut sign = 1i64;
            for a in 0..n {
                if mask >> a & 1 == 1 {
                    k += clo[a] * st[a];
                    sign = -sign;
                } else {
                    k += chi[a] * st[a];
                }
            }
            occ += sign * self.prefix[k] as i64;
        }
        (occ as u64, total)
    }

    /// Placement of the closed box `center + [-half, half]^n`.
    pub fn place_box(&self, center: &[f64], half: f64) -> BoxPlacement {
        let h = self.pixel();
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for (c, o) in center.iter().zip(&self.origin) {
            let ulo = (c - half - o) / h;
            let uhi = (c + half - o) / h;
            // Pixels k with [k, k+1] meeting [ulo, uhi].
            lo.push(ulo.ceil() as i64 - 1);
            hi.push(uhi.floor() as i64 + 1);
        }
        let (occ, total) = self.count_pixels(&lo, &hi);
        if occ == total {
            BoxPlacement::Inside
        } else if occ == 0 {
            BoxPlacement::Outside
        } else {
            BoxPlacement::Straddles
        }
    }

    /// Raster boundary vertices as integer indices, lexicographically sorted.
    pub fn boundary_vertices(&self) -> &[Vec<i64>] {
        &self.boundary
    }

    pub fn vertex_point(&self, v: &[i64]) -> Vec<f64> {
        let h = self.pixel();
        v.iter().zip(&self.origin).map(|(&i, o)| o + i as f64 * h).collect()
    }

    /// Boundary vertex nearest to `x` in the max norm, so that any vertex
    /// within a cube around `x` is found. Ties go to the smaller Euclidean
    /// distance, then to the lexicographically smallest vertex.
    pub fn nearest_boundary_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut best: Option<((f64, f64), &Vec<i64>)> = None;
        for v in &self.boundary {
            let p = self.vertex_point(v);
            let sup = p.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let e2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.map_or(true, |(bd, _)| (sup, e2) < bd) {
                best = Some(((sup, e2), v));
            }
        }
        best.map(|(_, v)| self.vertex_point(v))
    }

    fn compute_boundary(&self) -> Vec<Vec<i64>> {
        let n = self.dim();
        let lo = vec![0i64; n];
        let hi: Vec<i64> = self.dims.iter().map(|&d| d as i64).collect();
        let mut v = lo.clone();
        let mut out = Vec::new();
        let mut pix = vec![0i64; n];
        loop {
            let (mut any, mut all) = (false, true);
            for mask in corners(n) {
                for a in 0..n {
                    pix[a] = v[a] - (mask >> a & 1) as i64;
                }
                let o = self.is_occupied(&pix);
                any |= o;
                all &= o;
            }
            if any && !all {
                out.push(v.clone());
            }
            if !next_in_box(&mut v, &lo, &hi) {
                break;
            }
        }
        out
    }

    /// The domain `2^nu * Omega`: same occupancy with pixels and origin scaled by `2^nu`.
    pub fn rescaled(&self, nu: u32) -> Self {
        let s = (nu as f64).exp2();
        Self {
            origin: self.origin.iter().map(|o| o * s).collect(),
            pixel_level: self.pixel_level - nu as i32,
            dims: self.dims.clone(),
            occupied: self.occupied.clone(),
            prefix: self.prefix.clone(),
            boundary: self.boundary.clone(),
        }
    }

    /// Row-major flat index of a pixel multi-index.
    pub fn pixel_index(&self, idx: &[usize]) -> usize {
        flat(idx, &strides(&self.dims))
    }

    pub fn pixel_multi_index(&self, k: usize) -> Vec<usize> {
        unflat(k, &self.dims)
    }
}

/// `Omega^nu = { x : 2^-nu x in Omega }`.
pub fn rescale_domain(dom: &RasterDomain, nu: u32) -> RasterDomain {
    dom.rescaled(nu)
}

fn summed_area(dims: &[usize], occupied: &[bool]) -> Vec<u32> {
    let n = dims.len();
    let pdims: Vec<usize> = dims.iter().map(|d| d + 1).collect();
    let pst = strides(&pdims);
    let total: usize = pdims.iter().product();
    let mut table = vec![0u32; total];
    for k in 0..occupied.len() {
        if occupied[k] {
            let idx = unflat(k, dims);
            let shifted: usize = idx.iter().zip(&pst).map(|(i, s)| (i + 1) * s).sum();
            table[shifted] = 1;
        }
    }
    // Cumulative sums along each axis in turn.
    for a in 0..n {
        for k in 0..total {
            let i = (k / pst[a]) % pdims[a];
            if i > 0 {
                table[k] += table[k - pst[a]];
            }
        }
    }
    table
}

fn face_connected(dims: &[usize], occupied: &[bool]) -> bool {
    let st = strides(dims);
    let Some(start) = occupied.iter().position(|&o| o) else {
        return false;
    };
    let mut seen = vec![false; occupied.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1usize;
    while let Some(k) = queue.pop_front() {
        for a in 0..dims.len() {
            let i = (k / st[a]) % dims[a];
            let mut push = |nb: usize| {
                if occupied[nb] && !seen[nb] {
                    seen[nb] = true;
                    count += 1;
                    queue.push_back(nb);
                }
            };
            if i > 0 {
                push(k - st[a]);
            }
            if i + 1 < dims[a] {
                push(k + st[a]);
            }
        }
    }
    count == occupied.iter().filter(|&&o| o).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(level: i32) -> RasterDomain {
        let n = 1usize << level;
        let h = (-level as f64).exp2();
        let dims = vec![n + 2, n + 2];
        let mut occ = vec![false; dims[0] * dims[1]];
        for i in 1..=n {
            for j in 1..=n {
                occ[i * dims[1] + j] = true;
            }
        }
        RasterDomain::from_occupancy(vec![-h, -h], level, dims, occ).unwrap()
    }

    #[test]
    fn membership_semantics() {
        let d = square(3);
        assert!(d.contains(&[0.5, 0.5]));
        assert!(!d.contains(&[0.0, 0.5]));
        assert!(d.in_closure(&[0.0, 0.5]));
        assert!(d.on_boundary(&[1.0, 1.0]));
        assert!(!d.in_closure(&[1.1, 0.5]));
    }

    #[test]
    fn boundary_vertices_of_square() {
        let d = square(3);
        // 4 * 8 vertices on the perimeter of an 8x8 pixel square.
        assert_eq!(d.boundary_vertices().len(), 32);
        assert_eq!(d.nearest_boundary_point(&[0.5, 0.1]).unwrap(), vec![0.5, 0.0]);
    }

    #[test]
    fn counts_and_placement() {
        let d = square(3);
        assert_eq!(d.count_pixels(&[1, 1], &[9, 9]), (64, 64));
        assert_eq!(d.count_pixels(&[-3, -3], &[1, 1]), (0, 16));
        assert_eq!(d.place_box(&[0.5, 0.5], 0.25), BoxPlacement::Inside);
        assert_eq!(d.place_box(&[0.5, 0.5], 0.5), BoxPlacement::Straddles);
        assert_eq!(d.place_box(&[3.0, 3.0], 0.5), BoxPlacement::Outside);
    }

    #[test]
    fn disconnected_raster_is_rejected() {
        let occ = vec![true, false, true];
        assert!(RasterDomain::from_occupancy(vec![0.0], 0, vec![3], occ).is_err());
    }

    #[test]
    fn rescaling_scales_measure() {
        let d = square(3);
        assert_eq!(d.rescaled(0), d);
        let r = rescale_domain(&d, 1);
        assert!((r.measure() - 4.0).abs() < 1e-12);
        assert!(r.contains(&[1.9, 1.9]) && !r.contains(&[2.1, 1.0]));
    }
}
