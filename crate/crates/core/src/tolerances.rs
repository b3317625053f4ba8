//! Central registry of numeric tolerances.
//!
//! Every tolerance used by the library and its verification suites lives
//! here, with a justification.  No ad-hoc magic numbers elsewhere: code
//! refers to these constants so that the numeric contract of the crate can
//! be audited in one place.
//!
//! We distinguish three regimes:
//!
//! * **identity checks** — both sides are closed forms evaluated in f64;
//!   the only error is rounding, amplified by modest condition numbers.
//!   Bounds sit at 10⁻¹²…10⁻¹⁰: a few hundred ULP on O(1) quantities.
//! * **quadrature / iterative solvers** — error is controlled explicitly
//!   by the algorithm; bounds restate the requested control.
//! * **finite-difference envelopes** — truncation scales like C·hᵖ with a
//!   scenario-dependent C (it carries 6th derivatives of the coefficients).
//!   Scenario constants are pinned next to the scenarios; this module pins
//!   the exponents and the fit thresholds.

/// Closed-form identities (soliton profile relations, conformal
/// round-trips, exact horizon limits).  All operands are O(1)–O(10³) with
/// benign cancellation, so a few hundred ULP ≈ 10⁻¹² is both achievable
/// and strict.
pub const EXACT_IDENTITY: f64 = 1e-12;

/// Harmonicity of closed-form wave profiles under *exact* differentiation:
/// second symbolic derivatives of products/quotients of elementary
/// functions.  Larger than [`EXACT_IDENTITY`] only because the packet
/// profile divides by (x²+y²)² and amplifies rounding near small radii.
pub const HARMONIC_TOL: f64 = 1e-10;

/// Default absolute tolerance for adaptive quadrature in coefficient
/// construction.  The running integrals feeding `n`-coefficients are
/// O(1)–O(10) over O(1) intervals; 10⁻¹¹ absolute keeps the induced
/// coefficient noise two orders below every residual gate that consumes
/// them.
pub const QUAD_TOL_DEFAULT: f64 = 1e-11;

/// Radial chart quadrature `ξ(r) = ∫√|ϖ²| dr` tolerance.  Fixed by the
/// chart-accuracy contract of the Schwarzschild seeds.
pub const QUAD_TOL_CHART: f64 = 1e-10;

/// Adaptive-quadrature recursion budget.  48 halvings shrink an O(1)
/// interval to ≈ 10⁻¹⁴ of its length — below that, f64 cannot represent
/// interior points and continuing is meaningless.
pub const QUAD_MAX_DEPTH: usize = 48;

/// Cross-check gate between the adaptive rule and the independent
/// fixed-panel oracles (midpoint with ≥ 10⁶ panels, composite Simpson).
/// The midpoint rule at 10⁶ panels has error ≈ (b−a)³ f'' / (24·10¹²)
/// ≲ 10⁻⁹ for the profiles under test; 10⁻⁷ gives two orders of slack
/// while still catching any transcription error in either rule.
pub const QUAD_CROSS_CHECK: f64 = 1e-7;

/// Bracketed root-finder stopping width.  Roots are simple and O(1); the
/// Illinois iteration reaches bracket widths near machine precision in
/// under 40 iterations.
pub const ROOT_TOL: f64 = 1e-13;

/// Poisson solver: maximum interior residual of the discrete 5-point
/// system, measured in the max norm.  This is the *algebraic* solve
/// target, separate from the O(h²) discretisation error of the stencil.
pub const POISSON_RESIDUAL: f64 = 1e-8;

/// Poisson conjugate-gradient iteration cap.  CG on the 2-D Laplacian
/// needs O(n) iterations for an n×n grid; 20·n covers 257² grids with a
/// wide margin, and hitting the cap signals a genuinely broken system.
pub const POISSON_MAX_ITER_PER_N: usize = 20;

/// Degeneracy floor for coefficients that appear in residual denominators
/// (h₄, h₅).  Scenario coefficients are ≥ 10⁻³ in magnitude by
/// construction; 10⁻¹⁰ separates "legitimately small" from "the
/// construction degenerated" by seven orders.
pub const COEFF_DEGENERACY_FLOOR: f64 = 1e-10;

/// Floor for |φ*| below which the w-coefficient quotient ∂ᵢφ/φ* is
/// refused.  At 10⁻¹² the quotient would amplify rounding in ∂ᵢφ by 10¹²
/// and carry no information.  This gate applies to *generator* code,
/// where φ* is available in closed form and an analytic zero really
/// evaluates near machine epsilon.
pub const PHI_STAR_FLOOR: f64 = 1e-12;

/// Skip floor for the diagnostic gradient constraint wᵢ = ∂ᵢφ/φ*.  In
/// value-differencing mode φ* is assembled from second differences whose
/// rounding noise is ≈ ε·|h₅|·h⁻² ≈ 10⁻⁸ at unit coefficient scale and
/// the default step; an analytically vanishing generator therefore
/// evaluates near 10⁻⁸, never at the machine-epsilon floor.  Below 10⁻⁶
/// the measured φ* is indistinguishable from that noise and the quotient
/// ∂ᵢφ/φ* would amplify its own error by ≥ 10⁶, so the constraint is
/// reported as carrying no information (skipped) rather than as a number.
pub const LC_GRADIENT_SKIP_FLOOR: f64 = 1e-6;

/// Kink guard: residual evaluation refuses points whose distance along v
/// to a sign change of h₄, h₅ or h₅* is below this many finite-difference
/// steps.  A 5-point second-derivative stencil spans ±2h and the nested
/// first-derivative chains reach ±4h; 10 h keeps one diameter of slack.
pub const KINK_GUARD_STEPS: f64 = 10.0;

/// Minimum acceptable fitted convergence order for 4th-order
/// finite-difference residual sweeps.  The theoretical slope is 4; floors
/// from rounding and from quadrature noise bite at the smallest step, so
/// the gate is set at 3.5 — low enough to tolerate one marginal sweep
/// point, high enough to exclude any O(h²) or O(1) error source.
pub const ORDER_FIT_MIN: f64 = 3.5;

/// Closed-form vs Runge–Kutta flow cross-checks at χ = 0.5.  RK4 with the
/// pinned step (10⁻³) has global error ≈ (χ/h)·h⁵ = 5·10⁻¹³ for O(1)
/// right-hand sides; 10⁻⁸ leaves five orders for the stiffer λ = ±1
/// families.
pub const FLOW_CLOSED_FORM_TOL: f64 = 1e-8;

/// Flow fixed-point / constraint residual gate (analytically zero
/// quantities evaluated through exact differentiation).
pub const FLOW_CONSTRAINT_TOL: f64 = 1e-8;

/// RK4 step for the flow oracle.
pub const RK4_STEP: f64 = 1e-3;

/// Sensitivity factor: a deliberate 10⁻³ perturbation of a polarization
/// must raise the affected residual at least this far above the
/// finite-difference noise envelope of the unperturbed configuration.
pub const SENSITIVITY_FACTOR: f64 = 10.0;
