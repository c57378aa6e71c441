//! Built-in raster domains. Every shape is sampled at pixel centres on a
//! grid aligned with `2^-level Z^n`, with two free pixels of margin.

use crate::error::{invalid, Result};

use super::index::unflat;
use super::raster::RasterDomain;

const MARGIN: usize = 2;

/// Occupies the pixels of `[lo, hi]^n` (plus margin) whose centres satisfy `inside`.
pub fn from_predicate(lo: &[f64], hi: &[f64], level: i32, inside: impl Fn(&[f64]) -> bool) -> Result<RasterDomain> {
    let h = (-level as f64).exp2();
    let mut dims = Vec::with_capacity(lo.len());
    let mut origin = Vec::with_capacity(lo.len());
    for (a, b) in lo.iter().zip(hi) {
        let cells = (b - a) / h;
        if (cells - cells.round()).abs() > 1e-9 || (a / h - (a / h).round()).abs() > 1e-9 {
            return Err(invalid("shape bounding box must align with the pixel grid"));
        }
        dims.push(cells.round() as usize + 2 * MARGIN);
        origin.push(a - MARGIN as f64 * h);
    }
    let total: usize = dims.iter().product();
    let occupied = (0..total)
        .map(|k| {
            let idx = unflat(k, &dims);
            let x: Vec<f64> = idx.iter().zip(&origin).map(|(&i, o)| o + (i as f64 + 0.5) * h).collect();
            inside(&x)
        })
        .collect();
    RasterDomain::from_occupancy(origin, level, dims, occupied)
}

/// `(0, 1)^n`.
pub fn unit_square(dim: usize, level: i32) -> Result<RasterDomain> {
    from_predicate(&vec![0.0; dim], &vec![1.0; dim], level, |x| x.iter().all(|v| (0.0..1.0).contains(v)))
}

/// Six cells of side 1/2 in an L: a bar of four along the x axis and two
/// more stacked on its left end; bounding box `[0, 2] x [0, 1.5]`.
pub fn l_hexomino(level: i32) -> Result<RasterDomain> {
    from_predicate(&[0.0, 0.0], &[2.0, 1.5], level, |x| {
        let (u, v) = (x[0], x[1]);
        u > 0.0 && v > 0.0 && ((u < 2.0 && v < 0.5) || (u < 0.5 && v < 1.5))
    })
}

/// Disk of the given radius (at most 1) centred at the origin.
pub fn disk(level: i32, radius: f64) -> Result<RasterDomain> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(invalid("disk radius must lie in (0, 1]"));
    }
    from_predicate(&[-1.0, -1.0], &[1.0, 1.0], level, |x| x[0] * x[0] + x[1] * x[1] < radius * radius)
}

/// Unit square with a one-pixel-wide slit from the top edge down to the centre.
pub fn slit_square(level: i32) -> Result<RasterDomain> {
    let h = (-level as f64).exp2();
    from_predicate(&[0.0, 0.0], &[1.0, 1.0], level, |x| {
        let in_square = x.iter().all(|v| (0.0..1.0).contains(v));
        let in_slit = x[0] > 0.5 && x[0] < 0.5 + h && x[1] > 0.5;
        in_square && !in_slit
    })
}

/// Unit square with the open middle-third holes of the first `depth`
/// Sierpinski carpet generations removed.
pub fn carpet(level: i32, depth: u32) -> Result<RasterDomain> {
    from_predicate(&[0.0, 0.0], &[1.0, 1.0], level, |x| {
        if !x.iter().all(|v| (0.0..1.0).contains(v)) {
            return false;
        }
        let (mut u, mut v) = (x[0], x[1]);
        for _ in 0..depth {
            u *= 3.0;
            v *= 3.0;
            let (iu, iv) = (u.floor(), v.floor());
            if iu == 1.0 && iv == 1.0 {
                return false;
            }
            u -= iu;
            v -= iv;
        }
        true
    })
}

/// A horn `{0 < x <= 1, |y| < x^2}` attached to the box `[1, 2) x (-1, 1)`:
/// an outward cusp at the origin where interior regularity degenerates.
pub fn cusp(level: i32) -> Result<RasterDomain> {
    from_predicate(&[0.0, -1.0], &[2.0, 1.0], level, |x| {
        let (u, v) = (x[0], x[1]);
        (u > 0.0 && u <= 1.0 && v.abs() < u * u) || (u > 1.0 && u < 2.0 && v.abs() < 1.0)
    })
}

/// Unit square with an exterior horn `{x < 1/2, |y - 1/2| < (1/2 - x)^2}`
/// cut in from the left edge: the free region thins to a cusp inside the
/// square, where exterior regularity degenerates.
pub fn notched_square(level: i32) -> Result<RasterDomain> {
    from_predicate(&[0.0, 0.0], &[1.0, 1.0], level, |x| {
        let (u, v) = (x[0], x[1]);
        let in_square = (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v);
        let t = 0.5 - u;
        let in_notch = t > 0.0 && (v - 0.5).abs() < t * t;
        in_square && !in_notch
    })
}
