//! Hoelder norms, non-smooth atoms on `R^n` and on domains, and their
//! validation against a finite dictionary of test functions.

mod atom;
mod dictionary;
mod holder;

pub use atom::{make_atom, validate_atom, AtomCandidate, AtomFamily, AtomKind, AtomReport, MomentCheck};
pub use dictionary::{TestFunction, TestFunctionDictionary};
pub use holder::{
    holder_decompose, holder_norm, holder_parts, multi_indices, HolderIndex, HolderOptions, HolderParts,
};
