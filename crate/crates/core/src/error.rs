//! One crate-wide error enum; variants name the precise precondition or
//! degeneracy that was violated so callers can match on them.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("points {i} and {j} coincide (pairwise distance {dist:.3e} below 1e-12 of the local scale)")]
    CoincidentPoints { i: usize, j: usize, dist: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),

    #[error("coordinate is not finite at point {index}, component {component}")]
    NonFinite { index: usize, component: usize },

    #[error("need more than {dim} points in dimension {dim}, got {n}")]
    TooFewPoints { n: usize, dim: usize },

    #[error("no simple (non-self-crossing) path found within the {budget}-move 2-opt budget; {crossings} crossing(s) remain")]
    PathNotSimple { budget: usize, crossings: usize },

    #[error("cap radius delta {delta:.3e} too large for the fit (limit {limit:.3e}: min of the fit's epsilon and the sphere diameter)")]
    DeltaTooLarge { delta: f64, limit: f64 },

    #[error("apex is not on the fitted surface (residual {residual:.3e} exceeds tolerance {tol:.3e})")]
    ApexNotOnSphere { residual: f64, tol: f64 },

    #[error("the hyperplane at level {level} does not intersect the sphere")]
    NoIntersection { level: f64 },

    #[error("caps at apexes {i} and {j} overlap (apex distance {dist:.3e} <= 2*delta = {limit:.3e})")]
    CapsOverlap { i: usize, j: usize, dist: f64, limit: f64 },

    #[error("strip routing failed: detour still intersects component {component}")]
    RoutingFailed { component: String },

    #[error("component mismatch during assembly: {detail}")]
    ComponentMismatch { detail: String },

    #[error("no concrete mesh available in dimension {dim}; {check} not verified")]
    NoMesh { dim: usize, check: &'static str },

    #[error("degenerate path: consecutive apexes {i} and {j} coincide")]
    DegeneratePath { i: usize, j: usize },

    #[error("chart does not match the surface: {detail}")]
    ChartMismatch { detail: String },

    #[error("induction infeasible at dimension {dim}: need more than {dim} points, got {n} ({achieved} level(s) achieved)")]
    LevelInfeasible { dim: usize, n: usize, achieved: usize },

    #[error("empty radius profile: no entries to aggregate")]
    EmptyProfile,

    #[error("verification failed: {detail}")]
    VerificationFailed { detail: String },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
