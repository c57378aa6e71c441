//! Littlewood-Paley pieces, Besov and Triebel-Lizorkin norms, atomic
//! synthesis, sequence norms and `eta` convolutions.

mod eta;
mod fft;
mod partition;
mod sequences;
mod spaces;
mod synthesis;

pub use eta::{eta, eta_convolve, eta_kernel};
pub use partition::{build_partition, build_partition_with_order, lp_pieces, phi0, PartitionOfUnity, DEFAULT_SMOOTHSTEP_ORDER};
pub use sequences::{
    cube_set, sequence_norm, sequence_norm_with_sets, step_sequence, CoefficientSequence, LatticeFamily, Scale,
};
pub use spaces::{besov_norm, besov_norm_masked, triebel_norm, triebel_norm_masked, weighted_pieces};
pub use synthesis::{synthesize, AtomFactory, ReferenceAtoms};
