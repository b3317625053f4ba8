//! Differentiation policy: exact symbolic partials vs value differencing.
//!
//! Residual verification must be *independent* of the construction route:
//! a pipeline that built `h₄` symbolically could hide an algebra error if
//! the verifier reused the same symbolic derivatives.  The suites therefore
//! run in [`DiffMode::ValueFd`], differencing raw field values with central
//! stencils, so the only thing shared between generator and verifier is the
//! coefficient values themselves.
//!
//! Two exceptions are handled explicitly:
//!
//! * fields flagged [`fd_unsafe`](crate::field::ScalarField::fd_unsafe)
//!   (quadrature-backed, grid-interpolated) carry value noise at the
//!   controlling tolerance τ; differencing them yields τ/h² garbage.  For
//!   these the policy uses the field's *exact* first-derivative rule — for
//!   a running integral that rule is the integrand, which is itself an
//!   independent object — and resumes value differencing one level down
//!   (so a second derivative costs one exact rule plus one clean stencil).
//! * [`DiffMode::ExactPreferred`] uses symbolic partials whenever they
//!   exist, falling back to stencils otherwise.  Constraint suites whose
//!   quantities are analytically zero (torsion-freeness, flow fixed
//!   points) run in this mode: there the point is the identity itself, not
//!   route independence.
//!
//! Stencils: 4th order (5-point) by default, 2nd order (3-point) on
//! request.  Steps are physical per-axis steps, normally derived from a
//! [`GridSpec`] so that a step sweep is expressed in scaled coordinates.

use crate::chart::{Axis, ChartPoint, GridSpec};
use crate::error::{ForgeError, Result};
use crate::field::ScalarField;

/// Differentiation policy for a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    /// Central differences over raw values (route-independent check).
    ValueFd,
    /// Exact symbolic partials when available, stencils otherwise.
    ExactPreferred,
}

/// A differentiation context: mode, per-axis physical steps, stencil order
/// and (optionally) the sampling domain for stencil bounds checks.
#[derive(Clone)]
pub struct Differentiator {
    pub mode: DiffMode,
    steps: [f64; 4],
    order: usize,
    domain: Option<GridSpec>,
}

impl Differentiator {
    /// Context bound to a grid: steps are the grid's physical steps and
    /// stencils are bounds-checked when the grid is marked bounded.
    pub fn for_grid(grid: &GridSpec, mode: DiffMode) -> Self {
        let steps = [
            grid.physical_step(Axis::X2),
            grid.physical_step(Axis::X3),
            grid.physical_step(Axis::V),
            grid.physical_step(Axis::Chi),
        ];
        Differentiator {
            mode,
            steps,
            order: grid.fd_order,
            domain: grid.bounded.then(|| grid.clone()),
        }
    }

    /// Free-standing context with explicit physical steps.
    pub fn with_steps(steps: [f64; 4], order: usize, mode: DiffMode) -> Self {
        Differentiator { mode, steps, order, domain: None }
    }

    /// Uniform step on all axes.
    pub fn uniform(h: f64, order: usize, mode: DiffMode) -> Self {
        Differentiator::with_steps([h; 4], order, mode)
    }

    pub fn step(&self, axis: Axis) -> f64 {
        self.steps[axis.index()]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Half-width (in physical units) of the widest stencil this context
    /// may apply around a point, including one nested level.
    pub fn stencil_half_span(&self, axis: Axis) -> f64 {
        let reach = if self.order == 4 { 2.0 } else { 1.0 };
        // Nested first-derivative chains (d2 of an fd-unsafe field) double
        // the reach.
        2.0 * reach * self.step(axis)
    }

    fn check_bounds(&self, p: &ChartPoint, axis: Axis, half_span: f64) -> Result<()> {
        match &self.domain {
            Some(grid) => grid.check_stencil(p, axis, half_span),
            None => Ok(()),
        }
    }

    // ---- raw stencils ----------------------------------------------------

    fn fd1(&self, f: &ScalarField, p: &ChartPoint, axis: Axis) -> Result<f64> {
        let h = self.step(axis);
        let reach = if self.order == 4 { 2.0 } else { 1.0 };
        self.check_bounds(p, axis, reach * h)?;
        let fv = |k: f64| f.eval(&p.shifted(axis, k * h));
        Ok(if self.order == 4 {
            (fv(-2.0) - 8.0 * fv(-1.0) + 8.0 * fv(1.0) - fv(2.0)) / (12.0 * h)
        } else {
            (fv(1.0) - fv(-1.0)) / (2.0 * h)
        })
    }

    fn fd2(&self, f: &ScalarField, p: &ChartPoint, axis: Axis) -> Result<f64> {
        let h = self.step(axis);
        let reach = if self.order == 4 { 2.0 } else { 1.0 };
        self.check_bounds(p, axis, reach * h)?;
        let fv = |k: f64| f.eval(&p.shifted(axis, k * h));
        Ok(if self.order == 4 {
            (-fv(-2.0) + 16.0 * fv(-1.0) - 30.0 * fv(0.0) + 16.0 * fv(1.0) - fv(2.0))
                / (12.0 * h * h)
        } else {
            (fv(-1.0) - 2.0 * fv(0.0) + fv(1.0)) / (h * h)
        })
    }

    fn exact_partial(&self, f: &ScalarField, axis: Axis) -> Result<ScalarField> {
        f.partial(axis).ok_or_else(|| ForgeError::NoExactPartial {
            field: f.describe(),
            axis: axis.name(),
        })
    }

    // ---- policy-driven derivatives ----------------------------------------

    /// First derivative of `f` along `axis` at `p`.
    pub fn d1(&self, f: &ScalarField, p: &ChartPoint, axis: Axis) -> Result<f64> {
        match self.mode {
            DiffMode::ExactPreferred => match f.partial(axis) {
                Some(g) => Ok(g.eval(p)),
                None => self.fd1(f, p, axis),
            },
            DiffMode::ValueFd => {
                if f.fd_unsafe() {
                    // Exact rule required: value noise would be divided by h.
                    let g = self.exact_partial(f, axis)?;
                    Ok(g.eval(p))
                } else {
                    self.fd1(f, p, axis)
                }
            }
        }
    }

    /// Second derivative of `f` along `axis` at `p`.
    ///
    /// In `ValueFd` mode an fd-unsafe field is differentiated exactly once
    /// and the resulting field is handled recursively, so the check always
    /// ends with at least one independent stencil unless every level is
    /// quadrature-backed.
    pub fn d2(&self, f: &ScalarField, p: &ChartPoint, axis: Axis) -> Result<f64> {
        match self.mode {
            DiffMode::ExactPreferred => match f.partial_n(axis, 2) {
                Some(g) => Ok(g.eval(p)),
                None => match f.partial(axis) {
                    Some(g) => self.fd1(&g, p, axis),
                    None => self.fd2(f, p, axis),
                },
            },
            DiffMode::ValueFd => {
                if f.fd_unsafe() {
                    let g = self.exact_partial(f, axis)?;
                    self.d1(&g, p, axis)
                } else {
                    self.fd2(f, p, axis)
                }
            }
        }
    }

    /// Mixed second derivative ∂_a ∂_b f (a ≠ b), via nested first
    /// derivatives: the outer derivative is differenced over values of the
    /// inner policy-driven derivative.
    pub fn d1d1(
        &self,
        f: &ScalarField,
        p: &ChartPoint,
        outer: Axis,
        inner: Axis,
    ) -> Result<f64> {
        match self.mode {
            DiffMode::ExactPreferred => {
                if let Some(g) = f.partial(inner) {
                    if let Some(gg) = g.partial(outer) {
                        return Ok(gg.eval(p));
                    }
                }
            }
            DiffMode::ValueFd => {}
        }
        let h = self.step(outer);
        let reach = if self.order == 4 { 2.0 } else { 1.0 };
        self.check_bounds(p, outer, reach * h)?;
        let dv = |k: f64| self.d1(f, &p.shifted(outer, k * h), inner);
        Ok(if self.order == 4 {
            (dv(-2.0)? - 8.0 * dv(-1.0)? + 8.0 * dv(1.0)? - dv(2.0)?) / (12.0 * h)
        } else {
            (dv(1.0)? - dv(-1.0)?) / (2.0 * h)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::RunningIntegral;

    fn sin_v() -> ScalarField {
        ScalarField::v().sin()
    }

    #[test]
    fn stencils_converge_at_their_nominal_order() {
        let p = ChartPoint::new(0.0, 0.0, 0.6);
        let f = sin_v();
        let exact1 = 0.6f64.cos();
        let exact2 = -0.6f64.sin();
        for (order, expo) in [(2usize, 2.0f64), (4, 4.0)] {
            let e = |h: f64| {
                let d = Differentiator::uniform(h, order, DiffMode::ValueFd);
                (d.d1(&f, &p, Axis::V).unwrap() - exact1).abs()
                    + (d.d2(&f, &p, Axis::V).unwrap() - exact2).abs()
            };
            let (e1, e2) = (e(2e-2), e(1e-2));
            let measured = (e1 / e2).log2();
            assert!(
                (measured - expo).abs() < 0.4,
                "order-{order} stencil measured order {measured}"
            );
        }
    }

    #[test]
    fn exact_mode_is_machine_precision() {
        let p = ChartPoint::new(0.0, 0.0, 0.6);
        let d = Differentiator::uniform(1e-3, 4, DiffMode::ExactPreferred);
        assert!((d.d1(&sin_v(), &p, Axis::V).unwrap() - 0.6f64.cos()).abs() < 1e-15);
        assert!((d.d2(&sin_v(), &p, Axis::V).unwrap() + 0.6f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn value_fd_uses_exact_rule_on_quadrature_fields() {
        // F(v) = ∫₀ᵛ cos t dt: raw values have ~1e-11 quadrature noise, so
        // a naive 5-point second difference at h = 1e-3 would see
        // ~1e-11/1e-6 = 1e-5 garbage.  The policy must fall back to the
        // exact rule F' = cos, then difference that cleanly.
        let field = RunningIntegral::along_v(ScalarField::v().cos(), 0.0);
        let p = ChartPoint::new(0.0, 0.0, 0.8);
        let d = Differentiator::uniform(1e-3, 4, DiffMode::ValueFd);
        let d1 = d.d1(&field, &p, Axis::V).unwrap();
        let d2 = d.d2(&field, &p, Axis::V).unwrap();
        assert!((d1 - 0.8f64.cos()).abs() < 1e-14, "d1 error {:e}", (d1 - 0.8f64.cos()).abs());
        assert!((d2 + 0.8f64.sin()).abs() < 1e-10, "d2 error {:e}", (d2 + 0.8f64.sin()).abs());
    }

    #[test]
    fn mixed_partial_matches_hand_value() {
        // f = x2² · sin v: ∂ₓ∂ᵥ f = 2 x2 cos v.
        let f = ScalarField::x2().powi(2).mul(&ScalarField::v().sin());
        let p = ChartPoint::new(1.3, 0.0, 0.4);
        let expect = 2.0 * 1.3 * 0.4f64.cos();
        for mode in [DiffMode::ValueFd, DiffMode::ExactPreferred] {
            let d = Differentiator::uniform(1e-3, 4, mode);
            let got = d.d1d1(&f, &p, Axis::X2, Axis::V).unwrap();
            assert!((got - expect).abs() < 1e-9, "{mode:?}: {got} vs {expect}");
        }
    }

    #[test]
    fn bounded_grids_reject_edge_stencils() {
        use crate::chart::AxisSpec;
        let grid = GridSpec::new(
            AxisSpec::new(0.0, 1.0, 3),
            AxisSpec::new(0.0, 1.0, 3),
            AxisSpec::new(0.0, 1.0, 3),
        )
        .with_fd_step(1e-2)
        .bounded_with_margin(0.0);
        let d = Differentiator::for_grid(&grid, DiffMode::ValueFd);
        let inside = ChartPoint::new(0.5, 0.5, 0.5);
        assert!(d.d1(&sin_v(), &inside, Axis::V).is_ok());
        let edge = ChartPoint::new(0.5, 0.5, 1.0);
        assert!(matches!(
            d.d1(&sin_v(), &edge, Axis::V).unwrap_err(),
            ForgeError::StencilOutOfDomain { .. }
        ));
    }

    #[test]
    fn missing_exact_rule_on_noisy_field_is_reported() {
        use crate::chart::ChartPoint;
        use crate::field::ExternField;
        use std::sync::Arc;
        struct NoisyNoRule;
        impl ExternField for NoisyNoRule {
            fn eval(&self, p: &ChartPoint) -> f64 {
                p.v
            }
            fn partial(&self, _: Axis) -> Option<ScalarField> {
                None
            }
            fn name(&self) -> String {
                "opaque".into()
            }
            fn fd_unsafe(&self) -> bool {
                true
            }
        }
        let f = ScalarField::external(Arc::new(NoisyNoRule));
        let d = Differentiator::uniform(1e-3, 4, DiffMode::ValueFd);
        let err = d.d1(&f, &ChartPoint::new(0.0, 0.0, 0.0), Axis::V).unwrap_err();
        assert!(matches!(err, ForgeError::NoExactPartial { .. }));
    }
}
