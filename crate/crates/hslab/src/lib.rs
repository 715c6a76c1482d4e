//! Numerical laboratory for the singular Hardy-Sobolev inequality on model
//! Riemannian manifolds.
//!
//! The crate computes the explicit extremal bubbles of the Euclidean
//! Hardy-Sobolev inequality together with every closed-form constant attached
//! to them, minimizes the associated Rayleigh quotient on round spheres with
//! the singularity at a pole, evaluates the Pohozaev boundary/volume balance
//! on metric balls in normal coordinates, and extracts Green-function masses
//! on three-dimensional models. Everything is pure `f64` numerics with
//! deterministic quadrature; there is no global state.
//!
//! Modules mirror the major subsystems:
//!
//! * [`bubbles`] — extremal profiles, best constant, quadrature identities
//! * [`geometry`] — model metrics in normal coordinates, curvature extraction,
//!   sphere moments
//! * [`radial_solver`] — constrained minimization of the Hardy-Sobolev
//!   functional on radially symmetric manifolds, threshold sweeps, blow-up
//!   ladders
//! * [`pohozaev`] — the boundary/volume decomposition and its asymptotic
//!   slopes in the blow-up scale
//! * [`green_mass`] — radial Green functions, parametrix decomposition and the
//!   mass at the singular point
//! * [`report`] — machine-readable check records shared with the CLI
//! * [`acceptance`] — the end-to-end verification suite

pub mod acceptance;
pub mod bubbles;
pub mod geometry;
pub mod green_mass;
pub mod pohozaev;
pub mod quad;
pub mod radial_solver;
pub mod report;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum HsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("quadrature did not converge: achieved error {achieved:e} > requested {requested:e}")]
    QuadratureNonConvergent { achieved: f64, requested: f64 },
    #[error("integrand not integrable: {0}")]
    Integrability(String),
    #[error("operator is not coercive: smallest generalized eigenvalue {0:e}")]
    NonCoercive(f64),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("finite-difference step {step:e} too large relative to chart radius {delta:e}")]
    StepTooLarge { step: f64, delta: f64 },
    #[error("extrapolation unstable: {0}")]
    UnstableFit(String),
    #[error("no sign change in bracket [{lo}, {hi}]: f(lo)={flo:e}, f(hi)={fhi:e}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("richardson extrapolation non-convergent: {0}")]
    NonConvergentExtrapolation(String),
}

pub type Result<T> = std::result::Result<T, HsError>;
