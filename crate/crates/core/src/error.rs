//! Error taxonomy for the workbench.
//!
//! Every fallible operation in the crate returns [`ForgeError`].  The
//! variants are deliberately specific: callers (in particular the CLI) map
//! them onto exit codes and user-facing diagnostics, and the verification
//! suites distinguish "the construction is outside its validity domain"
//! (e.g. a vanishing generating derivative) from "the numerics failed"
//! (e.g. quadrature that will not converge).

use thiserror::Error;

/// Unified error type for all fallible operations in `forge-core`.
#[derive(Debug, Error)]
pub enum ForgeError {
    /// A finite-difference stencil would sample outside the declared
    /// sampling box of a grid.
    #[error("finite-difference stencil for axis {axis} at {coordinate} spans [{lo}, {hi}], outside the declared domain [{dom_lo}, {dom_hi}]")]
    StencilOutOfDomain {
        axis: &'static str,
        coordinate: f64,
        lo: f64,
        hi: f64,
        dom_lo: f64,
        dom_hi: f64,
    },

    /// A differentiation point sits too close to a sign change (kink) of a
    /// coefficient that enters the residuals through `ln |·|` or `√|·|`;
    /// finite differencing across the kink would be meaningless.
    #[error("coefficient {field} changes sign within {guard} of the evaluation point along {axis}; residuals are not finite-difference safe here")]
    KinkTooClose {
        field: &'static str,
        axis: &'static str,
        guard: f64,
    },

    /// The generating function has (numerically) vanishing v-derivative, so
    /// quotients like `∂ᵢφ / φ*` are undefined at this point.
    #[error("the generating function has |φ*| = {magnitude:.3e} ≤ {floor:.3e} at the evaluation point; the w-coefficient quotient is undefined")]
    PhiStarZero { magnitude: f64, floor: f64 },

    /// A coefficient that must stay away from zero (e.g. h₄, h₅ in the
    /// residual denominators) is numerically zero.
    #[error("coefficient {name} is {value:.3e} at the evaluation point, below the degeneracy floor {floor:.3e}")]
    DegenerateCoefficient {
        name: &'static str,
        value: f64,
        floor: f64,
    },

    /// Adaptive quadrature failed to reach the requested tolerance within
    /// its recursion budget.
    #[error("adaptive quadrature on [{lo}, {hi}] did not reach tolerance {tol:.3e} (deepest interval {deepest:.3e})")]
    QuadratureDepthExhausted {
        lo: f64,
        hi: f64,
        tol: f64,
        deepest: f64,
    },

    /// A bracketed root finder was called with endpoints that do not
    /// bracket a sign change.
    #[error("root bracket [{lo}, {hi}] has no sign change: f(lo) = {flo:.6e}, f(hi) = {fhi:.6e}")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },

    /// An iterative solver (Newton, conjugate gradients, …) hit its
    /// iteration cap before meeting its convergence target.
    #[error("{solver} did not converge within {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    IterationCap {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        target: f64,
    },

    /// Expression-language parse failure.
    #[error("expression parse error at byte {offset}: {message} (in {source_text:?})")]
    ExprParse {
        offset: usize,
        message: String,
        source_text: String,
    },

    /// A requested symbolic partial derivative does not exist (the field has
    /// an external leaf with no derivative rule along that axis).
    #[error("field {field} has no exact partial along {axis}")]
    NoExactPartial { field: String, axis: &'static str },

    /// A scenario or parameter set is structurally invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Catalog lookup failure, with a nearest-match hint.
    #[error("unknown catalog id {requested:?}; nearest match is {nearest:?}")]
    UnknownCatalogId { requested: String, nearest: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, ForgeError>;
