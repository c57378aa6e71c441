//! Variable-exponent modulars and the Luxemburg, `l_q(L_p)` and `L_p(l_q)`
//! norms on grid samples.

mod grid;
mod modular;

pub use grid::{Grid, GridFunction, GridSequence};
pub use modular::{
    luxemburg_norm, modular_lp, modular_mixed, modular_mixed_simple, norm_lp_lq, norm_lq_lp, pointwise_lq,
    sample_exponent,
};
