//! Tensor product structures on finite-dimensional Hilbert spaces.
//!
//! A structure is a unitary identification of `C^D` with `C^d1 (x) ... (x) C^dn`,
//! up to local unitaries and permutations of equal-dimension factors. The
//! crate decides equality of structures, measures how local a Hamiltonian is
//! relative to one, tracks how time evolution moves it, fingerprints it with
//! entanglement entropies and searches for structures in which a given
//! Hamiltonian is K-local.
//!
//! Dense complex matrices throughout; intended dimensions are `D <= 64`.

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod kinds;
pub mod locality;
pub mod models;
pub mod rng;
pub mod search;
pub mod tps;

pub use error::{Error, Hypothesis, Result};
pub use hilbert::{DensityOp, Dims, HermitianOp, StateVec, UnitaryOp};
pub use rng::Stream;
pub use tps::Tps;
