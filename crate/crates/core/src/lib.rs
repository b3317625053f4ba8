//! # forge-core
//!
//! A numerics workbench for five-dimensional metric ansatz families of the
//! anholonomic-frame type.  The crate builds exact symbolic coefficient
//! fields for metrics of the block form
//!
//! ```text
//! ds² = g₁ (dx¹)² + g₂(x²,x³) (dx²)² + g₃(x²,x³) (dx³)²
//!     + h₄(x²,x³,v) δv²      + h₅(x²,x³,v) δy²
//! δv  = dv  + wᵢ(x²,x³,v) dxⁱ
//! δy  = dy⁵ + nᵢ(x²,x³,v) dxⁱ
//! ```
//!
//! and verifies, numerically and to measured convergence order, that the
//! generator pipelines in [`generators`] produce coefficient sets whose
//! reduced curvature residuals vanish.  The crate is organised as:
//!
//! * [`chart`]      — coordinate points, axes, grids, sampling boxes;
//! * [`field`]      — lazily differentiated scalar coefficient fields;
//! * [`expr`]       — a small expression language parsed into fields;
//! * [`quad`]       — adaptive quadrature and running-integral fields;
//! * [`rootfind`]   — bracketed scalar root finding;
//! * [`poisson`]    — a 2-D Dirichlet Poisson solver with bicubic sampling;
//! * [`diff`]       — finite-difference / exact differentiation policies;
//! * [`ansatz`]     — the metric container, frame data and primary seeds;
//! * [`dcalculus`]  — reduced residual, constraint and flow-rate evaluators;
//! * [`generators`] — solitonic / vacuum / higher-dimension pipelines;
//! * [`transforms`] — polarization, conformal and composition maps;
//! * [`flows`]      — one-parameter metric families and flow checks;
//! * [`convergence`] — order fitting for step sweeps;
//! * [`report`]     — deterministic residual-suite reports (JSON / CSV);
//! * [`tolerances`] — every pinned numeric tolerance, with justification.
//!
//! Design rule: all analytic differentiation is performed symbolically on a
//! small AST ([`field::ScalarField`]); finite differencing, when requested,
//! is applied to *values only*, so that verification is independent of the
//! construction route.

pub mod ansatz;
pub mod chart;
pub mod convergence;
pub mod dcalculus;
pub mod diff;
pub mod error;
pub mod expr;
pub mod field;
pub mod flows;
pub mod generators;
pub mod poisson;
pub mod quad;
pub mod report;
pub mod rootfind;
pub mod tolerances;
pub mod transforms;

pub use chart::{Axis, ChartPoint, GridSpec};
pub use error::ForgeError;
pub use field::ScalarField;
