//! Shifted dyadic cube lattices, raster domains, cube classification and
//! regularity audits.

mod index;
mod lattice;
mod pbm;
mod raster;
mod regularity;
pub mod shapes;

pub use lattice::{
    build_lattice, covering_check, overlap_bound, overlap_count, Cube, CubeClass, CubeLattice, DEFAULT_DILATION,
    DEFAULT_SHIFT_BUDGET, DOMAIN_SHIFT_BUDGET,
};
pub use pbm::parse_pbm;
pub use raster::{rescale_domain, BoxPlacement, RasterDomain};
pub use regularity::{check_er, check_ir, check_mr, default_sides, RegularityEstimate, DEFAULT_FLOOR};
