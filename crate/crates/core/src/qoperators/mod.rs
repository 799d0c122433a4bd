//! Sparse operators on truncated windows, the generators of π_ℓ and the
//! checks built on them.

mod dump;
mod generators;
mod norm;
mod relations;
mod sparse;

use thiserror::Error;

pub use dump::{read_coo, write_coo};
pub(crate) use generators::check_q;
pub use generators::{
    apply_word_unbounded, compressed_word, covariance_residual, generator_coefficient, generator_z,
    torus_unitary, GeneratorSet,
};
pub use norm::{op_norm, op_norm_with, NORM_MAX_ITER, NORM_TOLERANCE};
pub use relations::{
    relation_residuals, RelationReport, RelationResidual, CROSS, NORMALITY_DEFECT, Q_COMMUTATION,
    SPHERE,
};
pub use sparse::{SparseOperator, DROP_TOLERANCE};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("operands live on different windows")]
    SpaceMismatch,
    #[error("entry ({row}, {col}) outside a {dim}-dimensional window")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("norm iteration did not converge within {iterations} steps")]
    NormNotConverged { iterations: usize },
    #[error("q = {0} must lie strictly between 0 and 1")]
    QOutOfRange(f64),
    #[error("generator index {k} outside 1..={}", ell + 1)]
    BadGenerator { k: usize, ell: usize },
    #[error("expected {expected} phases, got {got}")]
    PhaseLength { expected: usize, got: usize },
    #[error("phase of modulus {0} is not unimodular")]
    NotUnimodular(f64),
    #[error("operator dump, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
