//! Reference atoms pass their own validation across smoothness, moment
//! order and level, on the line and on the unit square.

use varspace_core::atoms::{validate_atom, AtomFamily, AtomKind, TestFunctionDictionary};
use varspace_core::geometry::{build_lattice, shapes, Cube, CubeClass};
use varspace_core::sampling::AxisBox;

const KS: [f64; 4] = [0.5, 1.0, 1.7, 2.5];
const LS: [f64; 3] = [0.0, 1.0, 2.3];

#[test]
fn global_atoms_on_the_line() {
    let window = AxisBox::cube(1, -2.0, 2.0).unwrap();
    for l in LS {
        let dict = TestFunctionDictionary::standard(l, &window).unwrap();
        for k in KS {
            let fam = AtomFamily::new(k, l, 1, 2.0, AtomKind::Global).unwrap();
            for nu in 0..=5u32 {
                let cube = Cube::unshifted(nu, vec![(1i64 << nu) / 3]);
                let r = validate_atom(&fam.candidate(&cube, None).unwrap(), &dict, None).unwrap();
                assert!(r.pass, "K = {k}, L = {l}, nu = {nu}: {r:?}");
            }
        }
    }
}

#[test]
fn domain_atoms_on_the_square() {
    let dom = shapes::unit_square(2, 9).unwrap();
    let window = AxisBox::cube(2, -1.0, 2.0).unwrap();
    let region = AxisBox::cube(2, 0.0, 1.0).unwrap();
    for l in LS {
        let dict = TestFunctionDictionary::standard(l, &window).unwrap();
        for k in KS {
            let interior = AtomFamily::new(k, l, 2, 2.0, AtomKind::Interior).unwrap();
            let boundary = AtomFamily::new(k, l, 2, 2.0, AtomKind::Boundary).unwrap();
            for nu in 0..=5u32 {
                let lat = build_lattice(nu, 1.0, 2.0, &region, Some(&dom)).unwrap();
                let mut checked = (0, 0);
                for (cube, class) in lat.entries() {
                    let (fam, slot) = match class {
                        CubeClass::Interior if checked.0 < 1 => (&interior, &mut checked.0),
                        // A corner and an edge cube.
                        CubeClass::Boundary if checked.1 < 2 && (checked.1 == 0) == (cube.center == vec![0.0, 0.0]) => {
                            (&boundary, &mut checked.1)
                        }
                        _ => continue,
                    };
                    *slot += 1;
                    let r = validate_atom(&fam.candidate(cube, Some(&dom)).unwrap(), &dict, Some(&dom)).unwrap();
                    assert!(r.pass, "K = {k}, L = {l}, nu = {nu}, {class:?} at {:?}: {r:?}", cube.center);
                }
            }
        }
    }
}
