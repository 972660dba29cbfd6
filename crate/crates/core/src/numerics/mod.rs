//! Unitary DFT primitives and the orthogonal projector onto the
//! symbol-modulated channel subspace.

mod dft;
mod projector;

pub use dft::{apply_partial_dft, unitary_dft, unitary_idft, Dft};
pub use projector::ProjectorB;
