//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid conductivity: {0}")]
    InvalidConductivity(String),

    #[error("point coincides with the centre of disk {disk}")]
    PoleAtCenter { disk: u8 },

    #[error("iterate {step} of the composed inversion hit a disk centre")]
    PoleEncountered { step: usize },

    #[error("|I_2k| = {magnitude:e} is below the degeneracy threshold {threshold:e}")]
    DegenerateI { magnitude: f64, threshold: f64 },

    #[error("evaluation point coincides with the source point")]
    CoincidentPoints,

    #[error("series did not reach tolerance {tol:e} within {k_max} terms (tail estimate {tail:e})")]
    TruncationFailure { k_max: usize, tol: f64, tail: f64 },

    #[error("source point sits on an image point of the evaluation point (divergent series term)")]
    SingularSourcePoint,

    #[error("correction factor diverges: {0}")]
    DegenerateCorrection(String),

    #[error("derivative order {0} is not supported (maximum is 6)")]
    DerivativeOrderUnsupported(usize),

    #[error("quadrature did not converge: doubling the nodes changed the result by {change:e} (tolerance {tol:e})")]
    QuadratureNonConvergent { change: f64, tol: f64 },

    #[error("evaluation point lies inside the source support; derivative order {order} of the kernel is not integrable there")]
    EvaluationInSupport { order: usize },

    #[error("linear solver failed after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("grid spacing {h:e} does not resolve the gap (need h <= eps/8 = {limit:e})")]
    GapUnderresolved { h: f64, limit: f64 },

    #[error("inclusions have equal radii; use the scaling reduction instead")]
    EqualRadii,

    #[error("conformal pole z0 = {0} falls inside the closed inclusions")]
    MapDegenerate(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
