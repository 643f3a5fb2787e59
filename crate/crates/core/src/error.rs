use std::fmt;

use thiserror::Error;

/// The two open conditions under which an (H, psi) pair pins down a TPS
/// through its entanglement fingerprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// The spectrum of H has no repeated eigenvalue.
    NonDegenerate,
    /// psi overlaps every eigenvector of H.
    NonZeroProjections,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::NonDegenerate => f.write_str("non-degenerate"),
            Hypothesis::NonZeroProjections => f.write_str("non-zero projections"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid factor dimensions {0:?}: need at least two factors, each of dimension >= 2")]
    InvalidDims(Vec<usize>),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U'U - I| = {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density operator: {0}")]
    NotDensity(String),

    #[error("index {index} out of range for {len} factors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("locality order K = {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("probe {probe} is not a product state (max site entropy {entropy:.3e})")]
    NotProductProbe { probe: usize, entropy: f64 },

    #[error("hypothesis violated ({hypothesis}): {detail}")]
    Hypothesis {
        hypothesis: Hypothesis,
        detail: String,
    },

    #[error("no orbit witness: {0}")]
    NoWitness(String),

    #[error("fingerprints are incomparable: {0}")]
    Incomparable(String),

    #[error("objective undefined: Hamiltonian is proportional to the identity")]
    UndefinedObjective,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
