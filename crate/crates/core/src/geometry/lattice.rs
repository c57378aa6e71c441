use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sampling::{AxisBox, SampleBox};

use super::index::next_in_box;
use super::raster::{BoxPlacement, RasterDomain};

/// Dyadic cube `Q_{nu,m}` of side `2^-nu` with a possibly shifted centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub level: u32,
    pub index: Vec<i64>,
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    /// The unshifted cube with centre `2^-nu m`.
    pub fn unshifted(level: u32, index: Vec<i64>) -> Self {
        let side = (-(level as f64)).exp2();
        let center = index.iter().map(|&m| m as f64 * side).collect();
        Self { level, index, center, side }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// `2^-nu m`.
    pub fn lattice_point(&self) -> Vec<f64> {
        self.index.iter().map(|&m| m as f64 * self.side).collect()
    }

    /// `x` in the closed dilated cube `d Q`.
    pub fn dilated_contains(&self, d: f64, x: &[f64]) -> bool {
        let half = 0.5 * d * self.side;
        x.iter().zip(&self.center).all(|(v, c)| (v - c).abs() <= half)
    }

    pub fn dilated_box(&self, d: f64) -> AxisBox {
        let half = 0.5 * d * self.side;
        AxisBox { lo: self.center.iter().map(|c| c - half).collect(), hi: self.center.iter().map(|c| c + half).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeClass {
    Interior,
    Boundary,
    Exterior,
    Unclassified,
}

/// All cubes of one level over a finite index window, with classification
/// relative to an optional domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeLattice {
    level: u32,
    b: f64,
    d: f64,
    lo: Vec<i64>,
    hi: Vec<i64>,
    cubes: Vec<Cube>,
    classes: Vec<CubeClass>,
}

pub const DEFAULT_SHIFT_BUDGET: f64 = 0.5;
pub const DEFAULT_DILATION: f64 = 2.0;
/// With `b >= d / 2` every cube whose closed dilation meets the boundary has a
/// boundary vertex within its shift budget, so snapping never fails.
pub const DOMAIN_SHIFT_BUDGET: f64 = 1.0;

/// Builds the level-`nu` lattice over every cube whose dilation can meet
/// `region`. With a domain, cubes whose closed dilation meets the raster
/// boundary get their centre snapped to the nearest boundary vertex.
pub fn build_lattice(nu: u32, b: f64, d: f64, region: &AxisBox, domain: Option<&RasterDomain>) -> Result<CubeLattice> {
    if !(d > 1.0) {
        return Err(Error::Precondition(format!("dilation must exceed 1, got {d}")));
    }
    if !(b >= 0.0) {
        return Err(invalid(format!("shift budget must be nonnegative, got {b}")));
    }
    if region.lo.iter().chain(&region.hi).any(|v| !v.is_finite()) {
        return Err(invalid("lattice region must be bounded"));
    }
    if let Some(dom) = domain {
        if dom.dim() != region.dim() {
            return Err(invalid("domain and region dimensions differ"));
        }
        if dom.pixel_level() < nu as i32 {
            return Err(Error::Precondition(format!(
                "raster pixel level {} is coarser than lattice level {nu}",
                dom.pixel_level()
            )));
        }
    }
    let scale = (nu as f64).exp2();
    let reach = b + 0.5 * d;
    let lo: Vec<i64> = region.lo.iter().map(|v| (v * scale - reach).floor() as i64).collect();
    let hi: Vec<i64> = region.hi.iter().map(|v| (v * scale + reach).ceil() as i64).collect();
    let mut cubes = Vec::new();
    let mut classes = Vec::new();
    let mut m = lo.clone();
    loop {
        let mut cube = Cube::unshifted(nu, m.clone());
        let class = match domain {
            None => CubeClass::Unclassified,
            Some(dom) => match dom.place_box(&cube.center, 0.5 * d * cube.side) {
                BoxPlacement::Inside => CubeClass::Interior,
                BoxPlacement::Outside => CubeClass::Exterior,
                BoxPlacement::Straddles => {
                    let target = dom
                        .nearest_boundary_point(&cube.center)
                        .ok_or_else(|| Error::Construction("domain has no boundary vertices".into()))?;
                    let budget = b * cube.side;
                    let off = target.iter().zip(&cube.center).map(|(t, c)| (t - c).abs()).fold(0.0, f64::max);
                    if off > budget * (1.0 + 1e-12) {
                        return Err(Error::Construction(format!(
                            "cube m = {m:?} at level {nu}: nearest boundary point is {off} away, beyond the shift budget {budget}"
                        )));
                    }
                    cube.center = target;
                    CubeClass::Boundary
                }
            },
        };
        cubes.push(cube);
        classes.push(class);
        if !next_in_box(&mut m, &lo, &hi) {
            break;
        }
    }
    Ok(CubeLattice { level: nu, b, d, lo, hi, cubes, classes })
}

impl CubeLattice {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn shift_budget(&self) -> f64 {
        self.b
    }

    pub fn dilation(&self) -> f64 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn window(&self) -> (&[i64], &[i64]) {
        (&self.lo, &self.hi)
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn classes(&self) -> &[CubeClass] {
        &self.classes
    }

    fn slot(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.dim() {
            return None;
        }
        let mut k = 0usize;
        for a in 0..m.len() {
            if m[a] < self.lo[a] || m[a] > self.hi[a] {
                return None;
            }
            k = k * (self.hi[a] - self.lo[a] + 1) as usize + (m[a] - self.lo[a]) as usize;
        }
        Some(k)
    }

    pub fn cube(&self, m: &[i64]) -> Option<&Cube> {
        self.slot(m).map(|k| &self.cubes[k])
    }

    pub fn class(&self, m: &[i64]) -> Option<CubeClass> {
        self.slot(m).map(|k| self.classes[k])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Cube, CubeClass)> {
        self.cubes.iter().zip(self.classes.iter().copied())
    }

    /// Moves the centre of cube `m`, keeping `|x_i - 2^-nu m_i| <= b 2^-nu`.
    pub fn shift_center(&mut self, m: &[i64], center: Vec<f64>) -> Result<()> {
        let k = self.slot(m).ok_or_else(|| invalid(format!("index {m:?} outside the lattice window")))?;
        let cube = &mut self.cubes[k];
        if center.len() != cube.dim() {
            return Err(invalid("centre dimension differs from the lattice"));
        }
        let budget = self.b * cube.side;
        let base = cube.lattice_point();
        if center.iter().zip(&base).any(|(c, p)| (c - p).abs() > budget * (1.0 + 1e-12)) {
            return Err(invalid(format!("centre {center:?} exceeds the shift budget {budget} around {base:?}")));
        }
        cube.center = center;
        Ok(())
    }

    /// Independent uniform shifts within the budget for every cube.
    pub fn randomize_shifts(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = self.b;
        for cube in &mut self.cubes {
            let base = cube.lattice_point();
            cube.center = base.iter().map(|p| if b > 0.0 { p + rng.gen_range(-b..=b) * cube.side } else { *p }).collect();
        }
    }

    pub fn census(&self) -> (usize, usize, usize, usize) {
        let count = |c: CubeClass| self.classes.iter().filter(|&&k| k == c).count();
        (count(CubeClass::Interior), count(CubeClass::Boundary), count(CubeClass::Exterior), count(CubeClass::Unclassified))
    }
}

/// `2^n floor(2b + d)^n`.
pub fn overlap_bound(n: usize, b: f64, d: f64) -> u64 {
    (2 * (2.0 * b + d).floor() as u64).pow(n as u32)
}

/// Number of cubes whose closed dilation contains `x`.
pub fn overlap_count(lat: &CubeLattice, x: &[f64]) -> usize {
    let scale = (lat.level as f64).exp2();
    let reach = lat.b + 0.5 * lat.d;
    let mut lo = Vec::with_capacity(x.len());
    let mut hi = Vec::with_capacity(x.len());
    for (a, v) in x.iter().enumerate() {
        let l = ((v * scale - reach).ceil() as i64).max(lat.lo[a]);
        let h = ((v * scale + reach).floor() as i64).min(lat.hi[a]);
        if l > h {
            return 0;
        }
        lo.push(l);
        hi.push(h);
    }
    let mut m = lo.clone();
    let mut count = 0;
    loop {
        if lat.cube(&m).is_some_and(|c| c.dilated_contains(lat.d, x)) {
            count += 1;
        }
        if !next_in_box(&mut m, &lo, &hi) {
            break;
        }
    }
    count
}

/// Every sample point lies in at least one dilated cube.
pub fn covering_check(lat: &CubeLattice, samples: &SampleBox) -> bool {
    samples.points().all(|x| overlap_count(lat, &x) >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64) -> AxisBox {
        AxisBox::new(vec![lo], vec![hi]).unwrap()
    }

    #[test]
    fn unshifted_centres_at_level_zero() {
        let lat = build_lattice(0, 0.0, 2.0, &interval(-2.0, 2.0), None).unwrap();
        for c in lat.cubes() {
            assert_eq!(c.center, vec![c.index[0] as f64]);
        }
    }

    #[test]
    fn dilation_must_exceed_one() {
        assert!(matches!(build_lattice(0, 0.0, 1.0, &interval(0.0, 1.0), None), Err(Error::Precondition(_))));
    }

    #[test]
    fn overlap_examples() {
        let lat = build_lattice(0, 0.0, 2.0, &interval(-3.0, 3.0), None).unwrap();
        assert_eq!(overlap_count(&lat, &[0.0]), 3);
        assert_eq!(overlap_bound(1, 0.0, 2.0), 4);
        let lat = build_lattice(0, 0.0, 1.5, &interval(-3.0, 3.0), None).unwrap();
        assert_eq!(overlap_count(&lat, &[0.75]), 2);
        let sq = AxisBox::cube(2, -3.0, 3.0).unwrap();
        let lat2 = build_lattice(0, 0.0, 1.5, &sq, None).unwrap();
        assert_eq!(overlap_count(&lat2, &[0.75, 0.75]), 4);
        assert_eq!(overlap_count(&lat2, &[0.75, 0.1]), 2);
    }

    #[test]
    fn covering_examples() {
        let region = interval(-1.0, 1.0);
        let samples = SampleBox::interval(-1.0, 1.0, 2001).unwrap();
        assert!(covering_check(&build_lattice(3, 0.0, 2.0, &region, None).unwrap(), &samples));
        assert!(covering_check(&build_lattice(3, 0.0, 1.01, &region, None).unwrap(), &samples));

        let mut lat = build_lattice(0, 1.0, 1.01, &region, None).unwrap();
        lat.shift_center(&[0], vec![-1.0]).unwrap();
        lat.shift_center(&[1], vec![2.0]).unwrap();
        lat.shift_center(&[-1], vec![-2.0]).unwrap();
        lat.shift_center(&[2], vec![3.0]).unwrap();
        assert!(!covering_check(&lat, &SampleBox::interval(0.0, 1.0, 101).unwrap()));
    }

    #[test]
    fn shift_budget_is_enforced() {
        let mut lat = build_lattice(1, 0.25, 2.0, &interval(0.0, 1.0), None).unwrap();
        assert!(lat.shift_center(&[1], vec![0.5 + 0.125]).is_ok());
        assert!(lat.shift_center(&[1], vec![0.5 + 0.13]).is_err());
    }
}
