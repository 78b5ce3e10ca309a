//! Exact quantum mechanics for small dimensions: bipartite pure states,
//! traceless binary observables, measurement expectations and the embedding
//! of observables into real unit vectors.

mod expectation;
mod matrix;
mod observable;
mod state;

use thiserror::Error;

use crate::sphere::GeometryError;

pub use expectation::{
    apply_local, joint_expectation, joint_expectation_raw, marginal_expectation, tsirelson_embed,
    EmbeddedVector, Side,
};
pub use matrix::{ComplexMatrix, MatrixDocument};
pub use observable::{
    haar_unitary, random_tbo, validate_tbo, Tolerances, TracelessBinaryObservable,
};
pub use state::{
    maximally_entangled, random_pure_state, schmidt_state, singlet, PureBipartiteState,
    StateDocument,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("observable is not Hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("observable is not traceless (|Tr M| = {trace:e})")]
    NotTraceless { trace: f64 },
    #[error("observable does not square to the identity (max |M² - I| = {deviation:e})")]
    NotInvolutory { deviation: f64 },
    #[error("dimension {dim} is odd; a traceless ±1 observable needs an even dimension")]
    OddDimension { dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("all coefficients are zero")]
    AllZeroCoefficients,
    #[error("Schmidt coefficient {value} is not a finite nonnegative real")]
    InvalidCoefficient { value: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
