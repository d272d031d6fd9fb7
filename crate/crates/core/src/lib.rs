//! Construction of classical BRST–anti-BRST charges for finite-dimensional,
//! reducible first-class constraint systems, with exact verification.
//!
//! The pipeline is: [`model::Model`] → [`resolve::IndexSplit`] →
//! [`solver::solve_lowest`] → [`solver::solve_higher`] →
//! [`solver::assemble_and_verify`]. Observables are lifted with
//! [`observables::lift_observable`].

pub mod fixtures;
pub mod groebner;
pub mod identities;
pub mod koszul;
pub mod model;
pub mod observables;
pub mod resolve;
pub mod sampling;
pub mod solver;
pub mod sp2tensor;
pub mod superalgebra;

use superalgebra::Var;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("derivative requested with respect to {found}, expected a {expected} variable")]
    WrongConjugacy { expected: &'static str, found: String },
    #[error("no value assigned to even variable {0}")]
    MissingAssignment(Var),
    #[error("invalid model: {identity} fails: {detail}")]
    InvalidModel { identity: String, detail: String },
    #[error("index split: {0}")]
    Split(String),
    #[error("operator needs an element of V, but a monomial has resolution count 0: {0}")]
    OutsideV(String),
    #[error("grading violation: {0}")]
    Grading(String),
    #[error("series did not terminate: {0}")]
    NotTerminated(String),
    #[error("free term is not delta-closed: {0}")]
    NotClosed(String),
    #[error("not first class: {0}")]
    NotFirstClass(String),
    #[error("stage data missing: {0}")]
    MissingStage(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
