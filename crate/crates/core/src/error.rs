use thiserror::Error;

/// Errors produced by the statistical primitives.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Two inputs that must share a length do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The multinomial weight vector is all ones, so every centered-weight
    /// sum vanishes and no randomized pivot is defined.
    #[error("degenerate weight vector (all counts equal 1)")]
    DegenerateWeights,

    /// A Studentizer radicand came out nonpositive; the pivot is undefined
    /// for this (data, weights) pair.
    #[error("nonpositive Studentizer radicand: {0}")]
    NonpositiveStudentizer(f64),

    /// A computation produced a non-finite intermediate value.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
