//! Coefficient sequences over cube lattices and the `b` / `f` sequence norms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exponents::ExponentField;
use crate::geometry::{build_lattice, Cube, CubeClass, CubeLattice, RasterDomain};
use crate::norms::{norm_lp_lq, norm_lq_lp, Grid, GridFunction, GridSequence};
use crate::sampling::AxisBox;
use crate::weights::WeightSequence;

use super::spaces::require_bounded;

/// One lattice per level `0..=max_level`, sharing `b`, `d`, region and domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFamily {
    lattices: Vec<CubeLattice>,
    region: AxisBox,
}

impl LatticeFamily {
    pub fn build(max_level: u32, b: f64, d: f64, region: &AxisBox, domain: Option<&RasterDomain>) -> Result<Self> {
        let lattices = (0..=max_level).map(|nu| build_lattice(nu, b, d, region, domain)).collect::<Result<_>>()?;
        Ok(Self { lattices, region: region.clone() })
    }

    pub fn max_level(&self) -> u32 {
        self.lattices.len() as u32 - 1
    }

    pub fn region(&self) -> &AxisBox {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn shift_budget(&self) -> f64 {
        self.lattices[0].shift_budget()
    }

    pub fn dilation(&self) -> f64 {
        self.lattices[0].dilation()
    }

    pub fn level(&self, nu: u32) -> Option<&CubeLattice> {
        self.lattices.get(nu as usize)
    }

    pub fn lattices(&self) -> &[CubeLattice] {
        &self.lattices
    }

    /// The cube `(nu, m)` and its class, or an error naming the key.
    pub fn lookup(&self, nu: u32, m: &[i64]) -> Result<(&Cube, CubeClass)> {
        let lat = self.level(nu).ok_or_else(|| invalid(format!("level {nu} exceeds the lattice family")))?;
        match (lat.cube(m), lat.class(m)) {
            (Some(c), Some(k)) => Ok((c, k)),
            _ => Err(invalid(format!("index {m:?} is outside the level-{nu} lattice window"))),
        }
    }
}

/// Sparse `lambda_{nu,m}`. When restricted, only interior and boundary
/// cubes may carry coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientSequence {
    pub b: f64,
    pub d: f64,
    pub restricted: bool,
    entries: BTreeMap<(u32, Vec<i64>), Complex64>,
}

impl CoefficientSequence {
    pub fn new(b: f64, d: f64, restricted: bool) -> Self {
        Self { b, d, restricted, entries: BTreeMap::new() }
    }

    /// Sets `lambda_{nu,m}`; zero removes the key.
    pub fn insert(&mut self, nu: u32, m: Vec<i64>, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&(nu, m));
        } else {
            self.entries.insert((nu, m), value);
        }
    }

    pub fn get(&self, nu: u32, m: &[i64]) -> Complex64 {
        self.entries.get(&(nu, m.to_vec())).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keys in `(nu, m)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &[i64], Complex64)> {
        self.entries.iter().map(|((nu, m), v)| (*nu, m.as_slice(), *v))
    }

    pub fn max_level(&self) -> Option<u32> {
        self.entries.keys().map(|(nu, _)| *nu).max()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::new(self.b, self.d, self.restricted);
        for (nu, m, v) in self.iter() {
            out.insert(nu, m.to_vec(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.restricted |= other.restricted;
        for (nu, m, v) in other.iter() {
            let cur = out.get(nu, m);
            out.insert(nu, m.to_vec(), cur + v);
        }
        out
    }

    /// Every key exists in `family` (and is interior or boundary when restricted).
    pub fn check_against(&self, family: &LatticeFamily) -> Result<()> {
        if (self.b - family.shift_budget()).abs() > 1e-12 || (self.d - family.dilation()).abs() > 1e-12 {
            return Err(invalid("sequence and lattice family disagree on (b, d)"));
        }
        for (nu, m, _) in self.iter() {
            let (_, class) = family.lookup(nu, m)?;
            if self.restricted && !matches!(class, CubeClass::Interior | CubeClass::Boundary) {
                return Err(invalid(format!("key ({nu}, {m:?}) is a {class:?} cube in a domain-restricted sequence")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// `l_q(L_p)`.
    B,
    /// `L_p(l_q)`.
    F,
}

/// Level `nu` is `sum_m |lambda_{nu,m}| w_nu(2^-nu m) chi_{S(nu,m)}` where
/// `S` is the half-open box returned by `set_of`; cells outside `domain` are zero.
pub fn step_sequence(
    lambda: &CoefficientSequence,
    w: &WeightSequence,
    family: &LatticeFamily,
    grid: &Grid,
    set_of: &dyn Fn(&Cube) -> AxisBox,
    domain: Option<&RasterDomain>,
) -> Result<GridSequence> {
    lambda.check_against(family)?;
    if grid.dim() != family.dim() {
        return Err(invalid("grid and lattice dimensions differ"));
    }
    let n = grid.dim();
    let per_axis = grid.points_per_axis() as i64;
    let mut levels: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; family.max_level() as usize + 1];
    for (nu, m, value) in lambda.iter() {
        let (cube, _) = family.lookup(nu, m)?;
        let corner: Vec<f64> = m.iter().map(|&k| k as f64 * cube.side).collect();
        let height = value.norm() * w.value(nu, &corner);
        let set = set_of(cube);
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for a in 0..n {
            let (i, j) = grid.index_span(a, set.lo[a], set.hi[a], true);
            if i < 0 || j >= per_axis {
                return Err(invalid(format!("cube ({nu}, {m:?}) leaves the working grid")));
            }
            lo.push(i);
            hi.push(j);
        }
        if lo.iter().zip(&hi).any(|(i, j)| i > j) {
            continue;
        }
        let level = &mut levels[nu as usize];
        let mut idx = lo.clone();
        loop {
            let flat = grid.flat_index(&idx.iter().map(|&i| i as usize).collect::<Vec<_>>());
            level[flat] += height;
            let mut a = n;
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                if idx[a] < hi[a] {
                    idx[a] += 1;
                    break;
                }
                idx[a] = lo[a];
            }
            if idx == lo {
                break;
            }
        }
    }
    if let Some(dom) = domain {
        let inside: Vec<bool> = (0..grid.len()).map(|k| dom.contains(&grid.point(k))).collect();
        for level in &mut levels {
            for (v, keep) in level.iter_mut().zip(&inside) {
                if !keep {
                    *v = 0.0;
                }
            }
        }
    }
    GridSequence::new(levels.into_iter().map(|v| GridFunction::from_real(grid, v)).collect::<Result<_>>()?)
}

/// The undilated cube `x^{nu,m} + [-2^-nu / 2, 2^-nu / 2)^n`.
pub fn cube_set(cube: &Cube) -> AxisBox {
    cube.dilated_box(1.0)
}

/// `||lambda | b||` (scale B) or `||lambda | f||` (scale F).
#[allow(clippy::too_many_arguments)]
pub fn sequence_norm(
    lambda: &CoefficientSequence,
    w: &WeightSequence,
    p: &ExponentField,
    q: &ExponentField,
    scale: Scale,
    family: &LatticeFamily,
    grid: &Grid,
    domain: Option<&RasterDomain>,
    tol: f64,
) -> Result<f64> {
    sequence_norm_with_sets(lambda, w, p, q, scale, family, grid, &cube_set, domain, tol)
}

/// [`sequence_norm`] with each `chi_{nu,m}` replaced by the indicator of `set_of(Q_{nu,m})`.
#[allow(clippy::too_many_arguments)]
pub fn sequence_norm_with_sets(
    lambda: &CoefficientSequence,
    w: &WeightSequence,
    p: &ExponentField,
    q: &ExponentField,
    scale: Scale,
    family: &LatticeFamily,
    grid: &Grid,
    set_of: &dyn Fn(&Cube) -> AxisBox,
    domain: Option<&RasterDomain>,
    tol: f64,
) -> Result<f64> {
    if scale == Scale::F {
        require_bounded(p, q)?;
    }
    let seq = step_sequence(lambda, w, family, grid, set_of, domain)?;
    match scale {
        Scale::B => norm_lq_lp(&seq, p, q, tol),
        Scale::F => norm_lp_lq(&seq, p, q, tol),
    }
}
