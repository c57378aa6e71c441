//! `f = sum_nu sum_m lambda_{nu,m} a_{nu,m}` on a working grid.

use num_complex::Complex64;

use crate::atoms::{AtomFamily, AtomKind};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Cube, CubeClass, RasterDomain};
use crate::norms::{Grid, GridFunction};

use super::sequences::{CoefficientSequence, LatticeFamily};

/// Supplies the atom attached to each cube.
pub trait AtomFactory: Sync {
    /// Value at `x` of the atom for `cube`; zero off its support.
    fn value(&self, cube: &Cube, class: CubeClass, x: &[f64]) -> f64;
}

/// Reference atoms: the main family everywhere except boundary cubes, which
/// use the boundary family masked to the closure of the domain.
#[derive(Clone, Debug)]
pub struct ReferenceAtoms {
    main: AtomFamily,
    boundary: Option<(AtomFamily, RasterDomain)>,
}

impl ReferenceAtoms {
    /// Atoms on all of `R^n`.
    pub fn global(k_smooth: f64, l_moment: f64, dim: usize, dilation: f64) -> Result<Self> {
        Ok(Self { main: AtomFamily::new(k_smooth, l_moment, dim, dilation, AtomKind::Global)?, boundary: None })
    }

    /// Interior and boundary atoms for `domain`.
    pub fn on_domain(k_smooth: f64, l_moment: f64, dilation: f64, domain: &RasterDomain) -> Result<Self> {
        let n = domain.dim();
        Ok(Self {
            main: AtomFamily::new(k_smooth, l_moment, n, dilation, AtomKind::Interior)?,
            boundary: Some((AtomFamily::new(k_smooth, l_moment, n, dilation, AtomKind::Boundary)?, domain.clone())),
        })
    }

    pub fn main_family(&self) -> &AtomFamily {
        &self.main
    }

    pub fn boundary_family(&self) -> Option<&AtomFamily> {
        self.boundary.as_ref().map(|(f, _)| f)
    }
}

impl AtomFactory for ReferenceAtoms {
    fn value(&self, cube: &Cube, class: CubeClass, x: &[f64]) -> f64 {
        match (&self.boundary, class) {
            (Some((fam, dom)), CubeClass::Boundary) => {
                if dom.in_closure(x) {
                    fam.eval(&cube.center, cube.level, x)
                } else {
                    0.0
                }
            }
            _ => self.main.eval(&cube.center, cube.level, x),
        }
    }
}

/// Samples `sum lambda_{nu,m} a_{nu,m}` over the keys of `lambda` on `grid`.
/// Every dilated cube must fit inside the grid box, so that no atom wraps.
pub fn synthesize(
    lambda: &CoefficientSequence,
    factory: &dyn AtomFactory,
    family: &LatticeFamily,
    max_level: u32,
    grid: &Grid,
) -> Result<GridFunction> {
    lambda.check_against(family)?;
    if grid.dim() != family.dim() {
        return Err(invalid("grid and lattice dimensions differ"));
    }
    let n = grid.dim();
    let per_axis = grid.points_per_axis() as i64;
    let d = family.dilation();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (nu, m, coeff) in lambda.iter() {
        if nu > max_level {
            return Err(invalid(format!("key ({nu}, {m:?}) is above the synthesis level {max_level}")));
        }
        let (cube, class) = family.lookup(nu, m)?;
        let support = cube.dilated_box(d);
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for a in 0..n {
            if support.lo[a] < grid.origin(a) || support.hi[a] > grid.origin(a) + 2.0 * grid.half_width() {
                return Err(Error::Precondition(format!("atom ({nu}, {m:?}) would wrap around the working box")));
            }
            let (i, j) = grid.index_span(a, support.lo[a], support.hi[a], false);
            lo.push(i.max(0));
            hi.push(j.min(per_axis - 1));
        }
        if lo.iter().zip(&hi).any(|(i, j)| i > j) {
            continue;
        }
        let mut idx = lo.clone();
        let mut x = vec![0.0; n];
        loop {
            for a in 0..n {
                x[a] = grid.coord(a, idx[a] as usize);
            }
            let v = factory.value(cube, class, &x);
            if v != 0.0 {
                let flat = grid.flat_index(&idx.iter().map(|&i| i as usize).collect::<Vec<_>>());
                values[flat] += coeff * v;
            }
            let mut a = n;
            while a > 0 {
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
    GridFunction::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::AxisBox;

    fn setup() -> (LatticeFamily, Grid, ReferenceAtoms) {
        let region = AxisBox::cube(1, -0.5, 0.5).unwrap();
        let fam = LatticeFamily::build(3, 0.5, 2.0, &region, None).unwrap();
        let grid = Grid::new(1, 10, 4.0).unwrap();
        (fam, grid, ReferenceAtoms::global(1.5, 1.0, 1, 2.0).unwrap())
    }

    #[test]
    fn single_key_is_the_atom() {
        let (fam, grid, atoms) = setup();
        let mut lam = CoefficientSequence::new(0.5, 2.0, false);
        lam.insert(0, vec![0], Complex64::new(1.0, 0.0));
        let f = synthesize(&lam, &atoms, &fam, 3, &grid).unwrap();
        let cube = fam.lookup(0, &[0]).unwrap().0;
        let direct = GridFunction::from_fn(&grid, |x| atoms.main_family().eval(&cube.center, 0, x));
        assert_eq!(f.max_abs_diff(&direct), 0.0);
        assert!(synthesize(&CoefficientSequence::new(0.5, 2.0, false), &atoms, &fam, 3, &grid).unwrap().is_zero());
    }

    #[test]
    fn synthesis_is_linear() {
        let (fam, grid, atoms) = setup();
        let mut a = CoefficientSequence::new(0.5, 2.0, false);
        let mut b = CoefficientSequence::new(0.5, 2.0, false);
        a.insert(1, vec![1], Complex64::new(2.0, -1.0));
        a.insert(3, vec![-2], Complex64::new(0.5, 0.0));
        b.insert(1, vec![1], Complex64::new(-1.0, 0.0));
        b.insert(2, vec![0], Complex64::new(0.0, 3.0));
        let lhs = synthesize(&a.add(&b), &atoms, &fam, 3, &grid).unwrap();
        let rhs = synthesize(&a, &atoms, &fam, 3, &grid).unwrap().add(&synthesize(&b, &atoms, &fam, 3, &grid).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn level_and_wrap_are_checked() {
        let (fam, _, atoms) = setup();
        let mut lam = CoefficientSequence::new(0.5, 2.0, false);
        lam.insert(3, vec![0], Complex64::new(1.0, 0.0));
        assert!(synthesize(&lam, &atoms, &fam, 2, &Grid::new(1, 10, 4.0).unwrap()).is_err());
        let mut wide = CoefficientSequence::new(0.5, 2.0, false);
        wide.insert(0, vec![1], Complex64::new(1.0, 0.0));
        assert!(matches!(synthesize(&wide, &atoms, &fam, 3, &Grid::new(1, 10, 1.5).unwrap()), Err(Error::Precondition(_))));
    }
}
