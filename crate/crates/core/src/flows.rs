//! χ-parametrized families of anholonomic metrics and their flow
//! diagnostics.
//!
//! A *flow family* is a map `χ ↦ metric(χ)` on a parameter interval
//! `[0, χ₀]`, realised here as a single [`AnsatzMetric`] whose coefficient
//! fields may depend on the `chi` coordinate of a [`ChartPoint`].  The
//! normalized-flow equations that such a family is expected to satisfy are
//! checked in two layers:
//!
//! * the **evolution residuals** of [`crate::dcalculus`] compare `∂_χ` of
//!   each block against twice the block times its curvature residual (with
//!   the normalisation constant λ folded into the residuals via
//!   [`crate::dcalculus::ResidualCtx`]);
//! * the **constraint residuals** of this module check the additional
//!   first-order relations that single out self-similar families:
//!
//!   ```text
//!   horizontal drift:      ∂_χ [ g_i + h₅ n_i² ]                  (i = 2, 3)
//!   frame-rate balance:    h₀² [(√|h₅|)*]² ∂_χ(w_i²) − h₅ ∂_χ(n_i²)
//!   envelope ODE:          ∂_χ b̆² − 2 λ b̆²
//!   amplitude ODE:         ∂_χ [ b̆² (n⁰)² ] + 2 λ
//!   ```
//!
//! The last two only apply to families that factorise their vertical block
//! as `h₅ = b̆²(χ) q²(x, v)` with frame coefficients `n_i = n⁰(χ) ν_i(x)`;
//! for such families the closed forms
//!
//! ```text
//! b̆²(χ)   = b̆²(0) · e^{2λχ}
//! (n⁰)²(χ) = ( b̆²(0) n₀² − 2λχ ) / b̆²(χ)
//! ```
//!
//! solve both ODEs exactly, and [`exponential_flow_family`] assembles the
//! corresponding metric.  Because the vertical block keeps the factorised
//! vacuum structure for *every* χ, its curvature residual equals the bare
//! normalisation constant and the vertical evolution residuals vanish
//! identically; the unit tests verify the closed forms against a classic
//! fourth-order Runge–Kutta integration of the two ODEs.
//!
//! Families that do not admit closed forms (χ-dependent polarisations of
//! the other generator pipelines) are wrapped with [`FlowFamily::from_metric`]:
//! any χ-dependence baked into the coefficient fields is picked up by the
//! same residual suites, since every derivative is taken per-axis on the
//! full chart.

use crate::ansatz::AnsatzMetric;
use crate::chart::{Axis, ChartPoint};
use crate::diff::{DiffMode, Differentiator};
use crate::error::{ForgeError, Result};
use crate::field::ScalarField;
use crate::generators::{GeneratedSolution, VacuumPipeline};

/// Residuals of the first-order flow constraints at a single chart point.
///
/// All entries are plain equation left-hand sides: a family satisfies a
/// constraint at the point iff the entry is (numerically) zero.  The two
/// ODE entries are `None` for families that do not carry a factorised
/// vertical envelope (there is then no `b̆²` to differentiate).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConstraintResiduals {
    /// `∂_χ [ g_i + h₅ n_i² ]` for i = 2, 3.
    pub horizontal_drift: [f64; 2],
    /// `h₀² [(√|h₅|)*]² ∂_χ(w_i²) − h₅ ∂_χ(n_i²)` for i = 2, 3.
    pub frame_rate_balance: [f64; 2],
    /// `∂_χ b̆² − 2 λ b̆²` when the family carries an envelope.
    pub envelope_ode: Option<f64>,
    /// `∂_χ [ b̆² (n⁰)² ] + 2 λ` when the family carries an amplitude.
    pub amplitude_ode: Option<f64>,
}

impl FlowConstraintResiduals {
    /// Largest absolute entry, treating absent ODE entries as zero.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for x in self.horizontal_drift.iter().chain(self.frame_rate_balance.iter()) {
            m = m.max(x.abs());
        }
        if let Some(e) = self.envelope_ode {
            m = m.max(e.abs());
        }
        if let Some(a) = self.amplitude_ode {
            m = m.max(a.abs());
        }
        m
    }
}

/// A χ-parametrized family of metrics on the interval `[0, chi0]`.
#[derive(Clone)]
pub struct FlowFamily {
    /// The family itself: coefficient fields may depend on the `chi`
    /// coordinate.  Snapshots at fixed χ are taken with [`Self::metric_at`].
    pub metric: AnsatzMetric,
    /// Normalisation constant λ of the flow.
    pub lambda: f64,
    /// Upper end of the parameter interval `[0, chi0]`.
    pub chi0: f64,
    /// Frame constant entering the frame-rate balance (the same h₀ that
    /// fixes the static vertical block `h₄ = −h₀² [(√|h₅|)*]²`).
    pub h0: f64,
    /// Envelope `b̆²(χ)` for factorised families, if any.
    pub envelope_sq: Option<ScalarField>,
    /// Amplitude energy `b̆²(χ) (n⁰)²(χ)` for factorised families, if any.
    pub n_energy: Option<ScalarField>,
}

impl FlowFamily {
    /// Wrap an arbitrary (possibly χ-dependent) metric as a flow family.
    ///
    /// This is the constructor for families assembled from the generator
    /// pipelines with χ-dependent polarisations; no envelope/amplitude
    /// closed forms are attached, so only the drift and balance residuals
    /// are reported.
    pub fn from_metric(metric: AnsatzMetric, lambda: f64, chi0: f64, h0: f64) -> Result<Self> {
        if !(chi0 > 0.0) || !chi0.is_finite() {
            return Err(ForgeError::InvalidConfig(format!(
                "flow parameter range must be a positive finite interval, got chi0 = {chi0}"
            )));
        }
        if h0 == 0.0 || !h0.is_finite() {
            return Err(ForgeError::InvalidConfig(format!(
                "frame constant h0 must be finite and nonzero, got {h0}"
            )));
        }
        if !lambda.is_finite() {
            return Err(ForgeError::InvalidConfig(format!(
                "normalisation constant must be finite, got {lambda}"
            )));
        }
        Ok(FlowFamily { metric, lambda, chi0, h0, envelope_sq: None, n_energy: None })
    }

    /// Lift a static generated solution to a χ-constant family.
    ///
    /// Every flow residual of the lift vanishes identically; this is the
    /// baseline for regression tests and for running the static suites
    /// through the flow plumbing.
    pub fn lift_static(solution: &GeneratedSolution, chi0: f64, h0: f64) -> Result<Self> {
        Self::from_metric(solution.metric.clone(), solution.lambda, chi0, h0)
    }

    /// Snapshot of the family at a fixed parameter value.
    ///
    /// All coefficient fields are pinned at `chi`, so the returned metric
    /// is χ-independent and can be handed to any static residual suite.
    pub fn metric_at(&self, chi: f64) -> Result<AnsatzMetric> {
        if !(0.0..=self.chi0).contains(&chi) {
            return Err(ForgeError::InvalidConfig(format!(
                "flow parameter {chi} outside family range [0, {}]",
                self.chi0
            )));
        }
        let pin = |f: &ScalarField| f.pinned(Axis::Chi, chi);
        Ok(AnsatzMetric {
            name: format!("{}[chi={chi}]", self.metric.name),
            g1: self.metric.g1,
            g2: pin(&self.metric.g2),
            g3: pin(&self.metric.g3),
            h4: pin(&self.metric.h4),
            h5: pin(&self.metric.h5),
            w: [pin(&self.metric.w[0]), pin(&self.metric.w[1])],
            n: [pin(&self.metric.n[0]), pin(&self.metric.n[1])],
        })
    }

    /// Evaluate the first-order flow-constraint residuals at a point.
    ///
    /// χ-derivatives are taken by the supplied differentiator: exact
    /// partials when the coefficient fields carry them, value stencils
    /// otherwise.  The point's χ must lie inside the family range (with a
    /// stencil margin in pure value-stencil mode).
    pub fn constraint_residuals_at(
        &self,
        d: &Differentiator,
        p: &ChartPoint,
    ) -> Result<FlowConstraintResiduals> {
        self.check_chi_window(d, p)?;
        let m = &self.metric;
        let mut horizontal_drift = [0.0; 2];
        let mut frame_rate_balance = [0.0; 2];
        let sqrt_h5 = m.h5.sqrt_abs();
        let sqrt_h5_star = d.d1(&sqrt_h5, p, Axis::V)?;
        let h5_val = m.h5.eval(p);
        for i in 0..2 {
            let g = if i == 0 { &m.g2 } else { &m.g3 };
            let tracked = g.add(&m.h5.mul(&m.n[i].powi(2)));
            horizontal_drift[i] = d.d1(&tracked, p, Axis::Chi)?;
            let w2_dot = d.d1(&m.w[i].powi(2), p, Axis::Chi)?;
            let n2_dot = d.d1(&m.n[i].powi(2), p, Axis::Chi)?;
            frame_rate_balance[i] =
                self.h0 * self.h0 * sqrt_h5_star * sqrt_h5_star * w2_dot - h5_val * n2_dot;
        }
        let envelope_ode = match &self.envelope_sq {
            Some(b) => Some(d.d1(b, p, Axis::Chi)? - 2.0 * self.lambda * b.eval(p)),
            None => None,
        };
        let amplitude_ode = match &self.n_energy {
            Some(z) => Some(d.d1(z, p, Axis::Chi)? + 2.0 * self.lambda),
            None => None,
        };
        Ok(FlowConstraintResiduals {
            horizontal_drift,
            frame_rate_balance,
            envelope_ode,
            amplitude_ode,
        })
    }

    /// Reject evaluation points whose χ (plus the stencil, in value mode)
    /// leaves the declared family range.
    fn check_chi_window(&self, d: &Differentiator, p: &ChartPoint) -> Result<()> {
        let margin = if d.mode == DiffMode::ValueFd {
            d.stencil_half_span(Axis::Chi)
        } else {
            0.0
        };
        let lo = p.chi - margin;
        let hi = p.chi + margin;
        if lo < 0.0 || hi > self.chi0 {
            return Err(ForgeError::StencilOutOfDomain {
                axis: Axis::Chi.name(),
                coordinate: p.chi,
                lo,
                hi,
                dom_lo: 0.0,
                dom_hi: self.chi0,
            });
        }
        Ok(())
    }
}

/// Assemble the closed-form exponential flow family over a factorised
/// vacuum background.
///
/// The vertical block is `h₅ = b̆²(χ) q²`, `h₄ = −h₀² b̆²(χ) (q*)²` with
/// `b̆²(χ) = b0sq · e^{2λχ}`; the frame coefficients are `w_i = 0` and
/// `n_i = n⁰(χ) ν_i(x², x³)` with `(n⁰)² = (b0sq·n0² − 2λχ)/b̆²(χ)`.  The
/// horizontal blocks are the flat `g₂ = g₃ = −1`.
///
/// * `b0sq` — initial envelope `b̆²(0)`, must be positive;
/// * `n0` — initial amplitude `n⁰(0)`;
/// * `lambda` — flow normalisation constant;
/// * `chi0` — parameter range; for λ > 0 it must satisfy
///   `chi0 < b0sq·n0²/(2λ)` so the amplitude stays real on the range;
/// * `q` — vertical factor with exact partials and nonvanishing `q*`;
/// * `h0` — frame constant of the static route;
/// * `n_shape` — the χ-independent shape functions `ν_i`.
pub fn exponential_flow_family(
    b0sq: f64,
    n0: f64,
    lambda: f64,
    chi0: f64,
    q: ScalarField,
    h0: f64,
    n_shape: [ScalarField; 2],
) -> Result<FlowFamily> {
    if !(b0sq > 0.0) || !b0sq.is_finite() {
        return Err(ForgeError::InvalidConfig(format!(
            "initial envelope must be positive and finite, got b0sq = {b0sq}"
        )));
    }
    if !(chi0 > 0.0) || !chi0.is_finite() {
        return Err(ForgeError::InvalidConfig(format!(
            "flow parameter range must be a positive finite interval, got chi0 = {chi0}"
        )));
    }
    let amplitude_energy0 = b0sq * n0 * n0;
    if lambda > 0.0 && chi0 >= amplitude_energy0 / (2.0 * lambda) {
        return Err(ForgeError::InvalidConfig(format!(
            "amplitude energy b0sq*n0^2 - 2*lambda*chi = {amplitude_energy0} - {}*chi turns \
             negative inside [0, {chi0}]; shrink chi0 below {}",
            2.0 * lambda,
            amplitude_energy0 / (2.0 * lambda)
        )));
    }

    // Envelope and amplitude closed forms as exact-differentiable fields.
    let two_lambda_chi = ScalarField::chi().mul(&ScalarField::constant(2.0 * lambda));
    let envelope_sq = ScalarField::constant(b0sq).mul(&two_lambda_chi.exp());
    let n_energy = ScalarField::constant(amplitude_energy0).sub(&two_lambda_chi);
    let n0_of_chi = n_energy.div(&envelope_sq).sqrt_abs();

    // The vacuum pipeline accepts the χ-dependence through its flow factor
    // k(χ) = e^{λχ}: (b̆(0)·k)² reproduces the envelope closed form.
    let k = ScalarField::chi().mul(&ScalarField::constant(lambda)).exp();
    let base = VacuumPipeline::new(ScalarField::constant(b0sq.sqrt()), q, k, h0).build()?;
    let mut metric = base.metric;
    metric.name = "exponential-flow".into();
    let metric = metric.with_n(
        n0_of_chi.mul(&n_shape[0]),
        n0_of_chi.mul(&n_shape[1]),
    );

    Ok(FlowFamily {
        metric,
        lambda,
        chi0,
        h0,
        envelope_sq: Some(envelope_sq),
        n_energy: Some(n_energy),
    })
}
