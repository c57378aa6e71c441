//! Reference `[K, L]`-atoms and their validation.
//!
//! A reference atom is `A prod_i g((x_i - c_i) / (r 2^-nu))` with
//! `g = D^M (1 - t^2)^P` on `[-1, 1]`, `r = d / 2` and `M` vanishing moments
//! per axis. `P = M + ceil(K) + 2` keeps `g` in `C^{ceil(K) + 1}` across the
//! edge of its support. `A` is fixed once per family from the measured
//! `C^K` norm of the level-0 atom, so every level shares the same bound.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BoxPlacement, Cube, RasterDomain};
use crate::norms::{Grid, GridFunction};

use super::dictionary::TestFunctionDictionary;
use super::holder::{holder_decompose, holder_norm, HolderOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    Global,
    Interior,
    Boundary,
}

/// Local sampling grids extend this far past the support, relative to its radius.
const GRID_SLACK: f64 = 1.25;

/// Fraction of the budget spent by interior and global atoms.
const SAFETY: f64 = 0.999;

/// Boundary atoms are measured with one-sided stencils on `Omega-bar`,
/// which can overshoot the two-sided reference slightly.
const BOUNDARY_SAFETY: f64 = 0.9;

/// Profile and normalisation shared by every atom of one `(K, L, n, d, kind)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomFamily {
    k_smooth: f64,
    l_moment: f64,
    dim: usize,
    dilation: f64,
    kind: AtomKind,
    moments: u32,
    /// Coefficients of `g` in ascending powers of `t`.
    profile: Vec<f64>,
    amplitude: f64,
    local_level: u32,
}

impl AtomFamily {
    /// Atoms with `floor(L) + 1` vanishing moments per axis when `L > 0`
    /// (none for boundary atoms, which carry no moment condition).
    pub fn new(k_smooth: f64, l_moment: f64, dim: usize, dilation: f64, kind: AtomKind) -> Result<Self> {
        let moments = if kind == AtomKind::Boundary || l_moment == 0.0 { 0 } else { l_moment.floor() as u32 + 1 };
        Self::build(k_smooth, l_moment, dim, dilation, kind, moments)
    }

    /// Plain nonnegative bumps that still declare moment order `L`; they fail
    /// the moment condition at fine levels whenever `L > 0`.
    pub fn without_moments(k_smooth: f64, l_moment: f64, dim: usize, dilation: f64) -> Result<Self> {
        Self::build(k_smooth, l_moment, dim, dilation, AtomKind::Global, 0)
    }

    fn build(k_smooth: f64, l_moment: f64, dim: usize, dilation: f64, kind: AtomKind, moments: u32) -> Result<Self> {
        if !(k_smooth >= 0.0) || !k_smooth.is_finite() || !(l_moment >= 0.0) || !l_moment.is_finite() {
            return Err(invalid(format!("K and L must be finite and nonnegative, got K = {k_smooth}, L = {l_moment}")));
        }
        if dim == 0 {
            return Err(invalid("atom dimension must be positive"));
        }
        if !(dilation > 1.0) || !dilation.is_finite() {
            return Err(Error::Precondition(format!("dilation must exceed 1, got {dilation}")));
        }
        let power = moments + k_smooth.ceil() as u32 + 2;
        let mut profile = vec![0.0; 2 * power as usize + 1];
        let mut binom = 1.0;
        for j in 0..=power as usize {
            profile[2 * j] = if j % 2 == 0 { binom } else { -binom };
            binom = binom * (power as usize - j) as f64 / (j + 1) as f64;
        }
        for _ in 0..moments {
            profile = profile.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect();
        }
        let k = if k_smooth > 0.0 { holder_decompose(k_smooth)?.floor_minus } else { 0 };
        let half = GRID_SLACK * 0.5 * dilation;
        let needed = ((1u64 << (k + 3)) as f64 * 2.0 * half).log2().ceil() as u32;
        let base = match dim {
            1 => 9,
            2 => 7,
            _ => 5,
        };
        let mut family = Self {
            k_smooth,
            l_moment,
            dim,
            dilation,
            kind,
            moments,
            profile,
            amplitude: 1.0,
            local_level: needed.max(base),
        };
        let reference = Grid::new(dim, family.local_level, half)?;
        let unit = GridFunction::from_fn(&reference, |x| family.shape(x.iter().map(|v| v / (0.5 * dilation))));
        let norm = holder_norm(&unit, k_smooth, None, &HolderOptions::default())?;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numeric(format!("reference atom has C^K norm {norm}")));
        }
        let safety = if kind == AtomKind::Boundary { BOUNDARY_SAFETY } else { SAFETY };
        family.amplitude = safety / norm;
        Ok(family)
    }

    pub fn k_smooth(&self) -> f64 {
        self.k_smooth
    }

    pub fn l_moment(&self) -> f64 {
        self.l_moment
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    /// Vanishing moments per axis.
    pub fn moments(&self) -> u32 {
        self.moments
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `prod_i g(t_i)` without the amplitude.
    fn shape(&self, t: impl Iterator<Item = f64>) -> f64 {
        let mut out = 1.0;
        for v in t {
            if v.abs() >= 1.0 {
                return 0.0;
            }
            out *= self.profile.iter().rev().fold(0.0, |acc, c| acc * v + c);
        }
        out
    }

    /// The atom centred at `center` on level `level`, at `x`.
    pub fn eval(&self, center: &[f64], level: u32, x: &[f64]) -> f64 {
        let radius = 0.5 * self.dilation * (-(level as f64)).exp2();
        self.amplitude * self.shape(x.iter().zip(center).map(|(v, c)| (v - c) / radius))
    }

    /// Cell-centred grid around `d Q` with room to spare on every side.
    pub fn local_grid(&self, cube: &Cube) -> Result<Grid> {
        Grid::with_center(self.dim, self.local_level, GRID_SLACK * 0.5 * self.dilation * cube.side, cube.center.clone())
    }

    /// Samples the atom for `cube` on its local grid, masked to `Omega-bar`
    /// for boundary atoms.
    pub fn candidate(&self, cube: &Cube, domain: Option<&RasterDomain>) -> Result<AtomCandidate> {
        if cube.dim() != self.dim {
            return Err(invalid("cube dimension differs from the atom family"));
        }
        let grid = self.local_grid(cube)?;
        let values = match (self.kind, domain) {
            (AtomKind::Boundary, None) => {
                return Err(Error::Precondition("boundary atoms need a domain".into()));
            }
            (AtomKind::Boundary, Some(dom)) => GridFunction::from_fn(&grid, |x| {
                if dom.in_closure(x) {
                    self.eval(&cube.center, cube.level, x)
                } else {
                    0.0
                }
            }),
            _ => GridFunction::from_fn(&grid, |x| self.eval(&cube.center, cube.level, x)),
        };
        Ok(AtomCandidate {
            values,
            cube: cube.clone(),
            kind: self.kind,
            k_smooth: self.k_smooth,
            l_moment: self.l_moment,
            c_budget: 1.0,
            dilation: self.dilation,
        })
    }
}

/// Samples of a candidate atom on a grid around its cube.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomCandidate {
    pub values: GridFunction,
    pub cube: Cube,
    pub kind: AtomKind,
    pub k_smooth: f64,
    pub l_moment: f64,
    pub c_budget: f64,
    pub dilation: f64,
}

/// A reference atom for `cube` that passes validation with `c = 1`.
pub fn make_atom(
    cube: &Cube,
    k_smooth: f64,
    l_moment: f64,
    kind: AtomKind,
    dilation: f64,
    domain: Option<&RasterDomain>,
) -> Result<AtomCandidate> {
    AtomFamily::new(k_smooth, l_moment, cube.dim(), dilation, kind)?.candidate(cube, domain)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MomentCheck {
    Skipped { reason: String },
    Checked { pass: bool, worst_ratio: f64, worst_function: String },
}

impl MomentCheck {
    pub fn passed(&self) -> bool {
        match self {
            Self::Skipped { .. } => true,
            Self::Checked { pass, .. } => *pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub kind: AtomKind,
    pub level: u32,
    pub c_budget: f64,
    pub support_pass: bool,
    /// Largest `|a|` found outside the allowed support.
    pub support_leak: f64,
    /// Measured `||a(2^-nu .) | C^K||`.
    pub smoothness_norm: f64,
    pub smoothness_pass: bool,
    pub moments: MomentCheck,
    pub pass: bool,
}

/// Checks support, the scaled `C^K` bound and, where it applies, the moment
/// bound against every dictionary entry.
pub fn validate_atom(
    atom: &AtomCandidate,
    dict: &TestFunctionDictionary,
    domain: Option<&RasterDomain>,
) -> Result<AtomReport> {
    let grid = atom.values.grid();
    let cube = &atom.cube;
    let n = cube.dim();
    if grid.dim() != n {
        return Err(invalid("atom samples and cube dimensions differ"));
    }
    if !(atom.c_budget > 0.0) {
        return Err(invalid("atom budget must be positive"));
    }
    let half = 0.5 * atom.dilation * cube.side;
    let region = match atom.kind {
        AtomKind::Global => None,
        AtomKind::Interior => {
            let dom = domain.ok_or_else(|| Error::Precondition("interior atoms need a domain".into()))?;
            if dom.place_box(&cube.center, half) != BoxPlacement::Inside {
                return Err(Error::Precondition(format!("cube at {:?} is not an interior cube", cube.center)));
            }
            Some(dom)
        }
        AtomKind::Boundary => {
            let dom = domain.ok_or_else(|| Error::Precondition("boundary atoms need a domain".into()))?;
            if !dom.on_boundary(&cube.center) {
                return Err(Error::Precondition(format!("cube centre {:?} is not on the boundary", cube.center)));
            }
            Some(dom)
        }
    };

    // (i) support.
    let slack = half * (1.0 + 1e-12);
    let mut support_leak = 0.0f64;
    for (k, v) in atom.values.values().iter().enumerate() {
        let x = grid.point(k);
        let in_cube = x.iter().zip(&cube.center).all(|(a, c)| (a - c).abs() <= slack);
        let allowed = in_cube && (atom.kind != AtomKind::Boundary || region.is_some_and(|d| d.in_closure(&x)));
        if !allowed {
            support_leak = support_leak.max(v.norm());
        }
    }

    // (ii) scaled smoothness.
    let dilated = atom.values.dilated(cube.level);
    let rescaled = region.map(|d| d.rescaled(cube.level));
    let smoothness_norm = holder_norm(&dilated, atom.k_smooth, rescaled.as_ref(), &HolderOptions::default())?;

    // (iii) moments.
    let moments = if atom.kind == AtomKind::Boundary {
        MomentCheck::Skipped { reason: "boundary atoms carry no moment condition".into() }
    } else if atom.l_moment == 0.0 {
        MomentCheck::Skipped { reason: "L = 0".into() }
    } else {
        let window = dict.window();
        if window.dim() != n {
            return Err(invalid("dictionary and atom dimensions differ"));
        }
        if !window.contains(&cube.dilated_box(atom.dilation).lo) || !window.contains(&cube.dilated_box(atom.dilation).hi) {
            return Err(Error::Precondition("dictionary window does not contain the atom support".into()));
        }
        if (dict.order() - atom.l_moment).abs() > 1e-12 {
            return Err(invalid(format!(
                "dictionary norms are for L = {}, atom has L = {}",
                dict.order(),
                atom.l_moment
            )));
        }
        let scale = (-(cube.level as f64) * (atom.l_moment + n as f64)).exp2() * atom.c_budget;
        let vol = grid.cell_volume();
        let mut worst = (0.0f64, String::new());
        for (psi, norm) in dict.entries() {
            let integral: num_complex::Complex64 =
                atom.values.values().iter().enumerate().map(|(k, v)| v * psi.eval(&grid.point(k))).sum();
            let ratio = integral.norm() * vol / (scale * norm);
            if ratio > worst.0 || worst.1.is_empty() {
                worst = (ratio, psi.label());
            }
        }
        MomentCheck::Checked { pass: worst.0 <= 1.0, worst_ratio: worst.0, worst_function: worst.1 }
    };

    let support_pass = support_leak == 0.0;
    let smoothness_pass = smoothness_norm <= atom.c_budget;
    let pass = support_pass && smoothness_pass && moments.passed();
    Ok(AtomReport {
        kind: atom.kind,
        level: cube.level,
        c_budget: atom.c_budget,
        support_pass,
        support_leak,
        smoothness_norm,
        smoothness_pass,
        moments,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use crate::sampling::AxisBox;

    fn dict(l: f64, n: usize) -> TestFunctionDictionary {
        TestFunctionDictionary::standard(l, &AxisBox::cube(n, -2.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn plain_bump_passes_with_its_own_norm() {
        let cube = Cube::unshifted(0, vec![0]);
        let a = make_atom(&cube, 1.5, 0.0, AtomKind::Global, 2.0, None).unwrap();
        let r = validate_atom(&a, &dict(0.0, 1), None).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.smoothness_norm - SAFETY).abs() < 1e-9, "{}", r.smoothness_norm);
        assert!(matches!(r.moments, MomentCheck::Skipped { .. }));
    }

    #[test]
    fn one_moment_integrates_to_zero() {
        let fam = AtomFamily::new(1.0, 1.0, 1, 2.0, AtomKind::Global).unwrap();
        assert_eq!(fam.moments(), 2);
        for level in [0, 3] {
            let a = fam.candidate(&Cube::unshifted(level, vec![1]), None).unwrap();
            let vol = a.values.grid().cell_volume();
            let total: f64 = a.values.real_parts().iter().sum::<f64>() * vol;
            let mass: f64 = a.values.abs_values().iter().sum::<f64>() * vol;
            assert!(total.abs() < 1e-8 * mass, "{total} vs {mass}");
        }
    }

    #[test]
    fn levels_are_rescaled_copies() {
        let fam = AtomFamily::new(1.7, 1.0, 1, 2.0, AtomKind::Global).unwrap();
        let a0 = fam.candidate(&Cube::unshifted(0, vec![0]), None).unwrap();
        let a3 = fam.candidate(&Cube::unshifted(3, vec![5]), None).unwrap();
        assert!(a0.values.max_abs_diff(&GridFunction::from_values(a0.values.grid(), a3.values.values().to_vec()).unwrap()) < 1e-12);
    }

    #[test]
    fn moment_free_bump_fails_at_fine_levels() {
        let fam = AtomFamily::without_moments(1.0, 1.0, 1, 2.0).unwrap();
        let d = dict(1.0, 1);
        let coarse = validate_atom(&fam.candidate(&Cube::unshifted(0, vec![0]), None).unwrap(), &d, None).unwrap();
        assert!(coarse.pass, "{coarse:?}");
        let fine = validate_atom(&fam.candidate(&Cube::unshifted(6, vec![3]), None).unwrap(), &d, None).unwrap();
        assert!(fine.support_pass && fine.smoothness_pass);
        assert!(!fine.moments.passed(), "{fine:?}");
    }

    #[test]
    fn leak_is_reported() {
        let cube = Cube::unshifted(0, vec![0]);
        let mut a = make_atom(&cube, 0.5, 0.0, AtomKind::Global, 2.0, None).unwrap();
        let last = a.values.values().len() - 1;
        a.values.values_mut()[last] = 0.25.into();
        let r = validate_atom(&a, &dict(0.0, 1), None).unwrap();
        assert!(!r.support_pass && !r.pass);
        assert_eq!(r.support_leak, 0.25);
    }

    #[test]
    fn interior_and_boundary_need_matching_cubes() {
        let dom = shapes::unit_square(2, 7).unwrap();
        let d = dict(1.0, 2);
        let inner = Cube::unshifted(3, vec![4, 4]);
        let a = make_atom(&inner, 1.0, 1.0, AtomKind::Interior, 2.0, Some(&dom)).unwrap();
        assert!(validate_atom(&a, &d, Some(&dom)).unwrap().pass);
        let edge = Cube { center: vec![0.0, 0.5], ..Cube::unshifted(3, vec![0, 4]) };
        let mut wrong = a.clone();
        wrong.cube = edge.clone();
        assert!(matches!(validate_atom(&wrong, &d, Some(&dom)), Err(Error::Precondition(_))));
        let b = make_atom(&edge, 1.0, 1.0, AtomKind::Boundary, 2.0, Some(&dom)).unwrap();
        let r = validate_atom(&b, &d, Some(&dom)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(matches!(r.moments, MomentCheck::Skipped { .. }));
    }
}
