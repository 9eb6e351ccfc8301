// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the workbench.

use thiserror::Error;

/// Failure modes reported by the workbench.
#[derive(Debug, Error)]
pub enum MacrolabError {
    /// A matrix operation received operands of the wrong shape.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The divisor handed to a remainder computation is not monic in τ.
    #[error("divisor is not monic in tau: {0}")]
    NotMonic(String),

    /// A symbolic expression could not be parsed.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A pipeline step failed its identity check.
    #[error("verification step `{0}` failed")]
    StepFailed(String),

    /// An invalid geometric input (degenerate axes, bad mesh file).
    #[error("mesh error: {0}")]
    Mesh(String),

    /// An iterative solver stopped before reaching its tolerance.
    #[error("solver did not converge: {what} (relative residual {residual:.3e})")]
    NoConvergence { what: String, residual: f64 },

    /// The source of a symmetric Poisson solve is not orthogonal to the rigid modes.
    #[error("source violates the compatibility condition (|∫R·h| = {0:.3e}); project it with compatibility_project first")]
    Incompatible(f64),

    /// A time step larger than the upwind stability bound.
    #[error("time step {dt} exceeds the CFL bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    /// A forcing term with a nonzero macroscopic part.
    #[error("forcing has a macroscopic component of size {0:.3e}")]
    ForcingNotMicroscopic(f64),

    /// A velocity normal that is not of unit length.
    #[error("normal vector is not of unit length (|n| = {0})")]
    NonUnitNormal(f64),

    /// Adaptive quadrature could not reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Missing input data for an evaluator.
    #[error("missing data: {0}")]
    MissingData(String),

    /// Malformed run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Filesystem failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, MacrolabError>;
