//! Smooth strongly convex minimization over polytopes.
//!
//! The library is organized around the *parametric projections curve*
//! `g(lambda) = proj_P(x0 - lambda * w)`: a piecewise-linear path whose
//! segments can be walked exactly using two local oracles, the **shadow**
//! (projection of `-w` onto the tangent cone at a point) and the **in-face
//! shadow** (projection of `-w` onto the linear span of the active face).
//! On top of the curve tracer sit first-order solvers: Shadow-Walk,
//! Shadow-CG, Shadow-CG2, projected gradient descent, and the classical
//! Frank-Wolfe family (vanilla, away-step, pairwise, decomposition-invariant)
//! used as baselines.
//!
//! Modules build bottom-up:
//!
//! * [`linalg`]: dense matrices, min-norm least squares, nullspace
//!   projectors, nonnegative least squares.
//! * [`lp`]: a deterministic two-phase simplex and the in-face
//!   lambda-maximization LP.
//! * [`polytope`]: H-polytopes with structured kinds (box, simplex, l1 ball,
//!   flow) and their active-set / ratio-test / linear-oracle machinery.
//! * [`projection`]: exact Euclidean projection (active-set QP plus closed
//!   forms) and the brute-force curve sampler.
//! * [`shadow`]: shadow and in-face shadow oracles via Moreau decomposition.
//! * [`trace`]: breakpoint-by-breakpoint curve tracing and the Trace-Opt
//!   line-search walk.
//! * [`problems`]: reproducible benchmark instances (lasso on an l1 ball,
//!   quadratics on flow polytopes).
//! * [`solvers`]: the solver suite with per-iteration telemetry.

pub mod linalg;
pub mod logging;
pub mod lp;
pub mod polytope;
pub mod problems;
pub mod projection;
pub mod shadow;
pub mod solvers;
pub mod trace;

/// Crate-wide error type.
///
/// Variants are grouped by the module that raises them; they share one enum
/// so that cross-module pipelines (trace calls lp, lp calls linalg) propagate
/// with `?` and no wrapping layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input contained NaN or an infinity.
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),
    /// Two arguments disagree on dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An iterative kernel hit its iteration cap without converging.
    #[error("iteration cap exceeded in {0}")]
    IterationCap(&'static str),
    /// The simplex solver made no progress within its pivot budget.
    #[error("simplex stalled after {pivots} pivots")]
    NumericalStall { pivots: usize },
    /// A point violates the polytope constraints beyond tolerance.
    #[error("point is infeasible: constraint {row} violated by {violation:.3e}")]
    Infeasible { row: usize, violation: f64 },
    /// Polytope construction found an empty feasible region.
    #[error("polytope is empty")]
    EmptyPolytope,
    /// Polytope construction found an unbounded feasible region.
    #[error("polytope is unbounded along coordinate {0}")]
    UnboundedPolytope(usize),
    /// The flow builder was handed a graph with a directed cycle.
    #[error("graph is not a dag")]
    NotADag,
    /// The flow builder was handed a graph with no source-to-sink path.
    #[error("graph has no path from source to sink")]
    Disconnected,
    /// The in-face LP was infeasible at lambda_x, contradicting its contract.
    #[error("in-face lambda LP infeasible at its anchor lambda")]
    InfeasibleContract,
    /// A trace entry point was handed a point that is not on the curve.
    #[error("point is not on the projections curve: certificate error {0:.3e}")]
    OffCurve(f64),
    /// Curve tracing exceeded the breakpoint cap.
    #[error("breakpoint cap {0} exceeded while tracing the curve")]
    CapExceeded(usize),
    /// A solver was run on a polytope kind it does not support.
    #[error("solver does not support this polytope kind: {0}")]
    UnsupportedPolytope(&'static str),
    /// Objective construction rejected its matrix input.
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    /// Instance or polytope deserialization failed.
    #[error("invalid instance data: {0}")]
    InvalidData(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
