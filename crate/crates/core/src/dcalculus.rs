//! Residual calculus for the block ansatz.
//!
//! For a metric in the ansatz form the relevant curvature content reduces
//! to four scalar residual groups (all derivatives use `• = ∂/∂x²`,
//! `′ = ∂/∂x³`, `* = ∂/∂v`):
//!
//! * **horizontal**
//!   `r_h = [g₂•g₃•/2g₂ + (g₃•)²/2g₃ − g₃•• + g₂′g₃′/2g₃ + (g₂′)²/2g₂ − g₂″]
//!          / (2 g₂ g₃) + λ`;
//! * **vertical**
//!   `r_v = [h₅* L* − h₅**] / (2 h₄ h₅) + λ` with `L = ln √|h₄ h₅|`;
//! * **w-mixing** `r_wᵢ = −(wᵢ β + αᵢ) / 2h₅`;
//! * **n-mixing** `r_nᵢ = −(h₅ / 2h₄)(nᵢ** + γ nᵢ*)`.
//!
//! The auxiliary coefficients are
//! `φ = ln |h₅* / √|h₄h₅||`, `αᵢ = h₅* ∂ᵢφ`, `β = h₅* φ*`,
//! `γ = 3h₅*/2h₅ − h₄*/h₄`.  Internally α and β are evaluated through the
//! exact rearrangements `β = h₅** − h₅* L*` and `αᵢ = ∂ᵢ(h₅*) − h₅* ∂ᵢL`,
//! which are regular even where `h₅*` crosses zero (the φ-based forms
//! divide by `h₅*`).  A metric solves the reduced field equations with
//! effective constant λ iff all four residual groups vanish.
//!
//! Additional evaluators cover:
//!
//! * the Levi-Civita (torsion-free) constraints, which select the subclass
//!   of solutions whose distortion vanishes;
//! * the anholonomy data of the frame (vertical derivatives of the frame
//!   coefficients and the curvature of the non-integrable distribution);
//! * the flow-rate residuals `∂χ(coefficient) − 2·(coefficient)·residual`
//!   that vanish on self-similar families and fixed points.
//!
//! Every evaluator takes a [`ResidualCtx`], which fixes the differentiation
//! policy ([`DiffMode::ValueFd`] for route-independent verification) and
//! the effective constant λ, and performs degeneracy and kink guards
//! before touching stencils.

use crate::ansatz::AnsatzMetric;
use crate::chart::{Axis, ChartPoint};
use crate::diff::{DiffMode, Differentiator};
use crate::error::{ForgeError, Result};
use crate::field::ScalarField;
use crate::tolerances;

/// Context for residual evaluation.
#[derive(Clone)]
pub struct ResidualCtx {
    pub diff: Differentiator,
    /// Effective constant λ of the field equations (0 for vacuum).
    pub lambda: f64,
    /// Refuse evaluation points whose v-distance to a sign change of h₄,
    /// h₅ or h₅* is below `KINK_GUARD_STEPS` finite-difference steps.
    pub guard_kinks: bool,
}

impl ResidualCtx {
    pub fn new(diff: Differentiator, lambda: f64) -> Self {
        ResidualCtx { diff, lambda, guard_kinks: true }
    }

    pub fn without_kink_guard(mut self) -> Self {
        self.guard_kinks = false;
        self
    }
}

/// Auxiliary coefficients of the vertical equations at a point.
#[derive(Debug, Clone, Copy)]
pub struct AuxCoefficients {
    /// φ = ln |h₅* / √|h₄ h₅||  (−∞ where h₅* = 0).
    pub phi: f64,
    /// φ* computed from the regular form β/h₅* (NaN where h₅* = 0).
    pub phi_star: f64,
    /// αᵢ = h₅* ∂ᵢφ along (x², x³), in the regular form.
    pub alpha: [f64; 2],
    /// β = h₅* φ* in the regular form h₅** − h₅* L*.
    pub beta: f64,
    /// γ = 3h₅*/2h₅ − h₄*/h₄.
    pub gamma: f64,
}

/// The four reduced residual groups at a point.
#[derive(Debug, Clone, Copy)]
pub struct ReducedResiduals {
    pub horizontal: f64,
    pub vertical: f64,
    pub mixing_w: [f64; 2],
    pub mixing_n: [f64; 2],
}

impl ReducedResiduals {
    /// Largest absolute residual of the group.
    pub fn max_abs(&self) -> f64 {
        self.horizontal
            .abs()
            .max(self.vertical.abs())
            .max(self.mixing_w[0].abs())
            .max(self.mixing_w[1].abs())
            .max(self.mixing_n[0].abs())
            .max(self.mixing_n[1].abs())
    }
}

/// Torsion-free (Levi-Civita) constraint residuals at a point.
#[derive(Debug, Clone, Copy)]
pub struct LcResiduals {
    /// ε₂ψ•• + ε₃ψ″ − λ for ψ = ln|g₂| (horizontal conformal trace).
    pub horizontal_trace: f64,
    /// h₅* φ / (h₄ h₅) − λ (vertical closure).
    pub vertical_closure: f64,
    /// w₂′ − w₃• + w₃w₂* − w₂w₃* (w-curl with frame-quadratic terms).
    pub w_curl: f64,
    /// n₂′ − n₃• (n-curl).
    pub n_curl: f64,
    /// wᵢ − ∂ᵢφ/φ*; `None` where |φ*| is below the floor (constraint
    /// degenerates and carries no information).
    pub w_gradient: [Option<f64>; 2],
}

/// Frame anholonomy data at a point.
#[derive(Debug, Clone, Copy)]
pub struct AnholonomyData {
    /// ∂ᵥwᵢ: the nontrivial anholonomy coefficients of the δv frame.
    pub dv_w: [f64; 2],
    /// ∂ᵥnᵢ: the nontrivial anholonomy coefficients of the δy frame.
    pub dv_n: [f64; 2],
    /// Curvature of the v-distribution:
    /// e₃(w₂) − e₂(w₃) with eᵢ = ∂ᵢ − wᵢ∂ᵥ.
    pub curvature_v: f64,
    /// Curvature of the y-distribution: e₃(n₂) − e₂(n₃).
    pub curvature_y: f64,
}

/// Flow-rate residuals at a point: deviation of ∂χ(coefficient) from the
/// value demanded by the field-equation residuals.
#[derive(Debug, Clone, Copy)]
pub struct EvolutionResiduals {
    /// Horizontal pair (g₂, g₃): ∂χgᵢ − 2gᵢ r_h + h₄ ∂χ(wᵢ²) + h₅ ∂χ(nᵢ²).
    pub horizontal: [f64; 2],
    /// Vertical pair (h₄, h₅): ∂χhₐ − 2hₐ r_v.
    pub vertical: [f64; 2],
}

impl EvolutionResiduals {
    pub fn max_abs(&self) -> f64 {
        self.horizontal[0]
            .abs()
            .max(self.horizontal[1].abs())
            .max(self.vertical[0].abs())
            .max(self.vertical[1].abs())
    }
}

/// Residual evaluator bound to one metric and one context.
///
/// Construction precomputes the compound fields (`ln √|h₄h₅|`, φ) in the
/// representation dictated by the differentiation policy: exact trees in
/// [`DiffMode::ExactPreferred`], opaque value closures in
/// [`DiffMode::ValueFd`] so stencils see only values.
pub struct ResidualEvaluator {
    metric: AnsatzMetric,
    ctx: ResidualCtx,
    /// L = ln √|h₄ h₅|.
    log_block: ScalarField,
    /// φ = ln |h₅*/√|h₄h₅|| (for reporting and the LC closure residual).
    phi: ScalarField,
}

impl ResidualEvaluator {
    pub fn new(metric: &AnsatzMetric, ctx: ResidualCtx) -> Self {
        let log_block = Self::build_log_block(metric, &ctx.diff);
        let phi = Self::build_phi(metric, &ctx.diff);
        ResidualEvaluator { metric: metric.clone(), ctx, log_block, phi }
    }

    pub fn metric(&self) -> &AnsatzMetric {
        &self.metric
    }

    pub fn ctx(&self) -> &ResidualCtx {
        &self.ctx
    }

    fn build_log_block(m: &AnsatzMetric, d: &Differentiator) -> ScalarField {
        let product = m.h4.mul(&m.h5);
        if d.mode == DiffMode::ExactPreferred && product.partial(Axis::V).is_some() {
            return ScalarField::constant(0.5).mul(&product.ln_abs());
        }
        // Value closure: differencing this sees raw coefficient values
        // only, independent of how the pipeline built them.
        ScalarField::from_fn("log_block", move |p| 0.5 * product.eval(p).abs().ln())
    }

    fn build_phi(m: &AnsatzMetric, d: &Differentiator) -> ScalarField {
        if d.mode == DiffMode::ExactPreferred {
            if let Some(h5s) = m.h5.partial(Axis::V) {
                return h5s.div(&m.h4.mul(&m.h5).sqrt_abs()).ln_abs();
            }
        }
        let (h4, h5, dd) = (m.h4.clone(), m.h5.clone(), d.clone());
        ScalarField::from_fn("phi", move |p| {
            let h5s = match dd.d1(&h5, p, Axis::V) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            (h5s / (h4.eval(p) * h5.eval(p)).abs().sqrt()).abs().ln()
        })
    }

    // ---- guards ------------------------------------------------------------

    fn check_denominators(&self, p: &ChartPoint) -> Result<(f64, f64)> {
        let h4 = self.metric.h4.eval(p);
        let h5 = self.metric.h5.eval(p);
        for (name, value) in [("h4", h4), ("h5", h5)] {
            if value.abs() < tolerances::COEFF_DEGENERACY_FLOOR {
                return Err(ForgeError::DegenerateCoefficient {
                    name,
                    value,
                    floor: tolerances::COEFF_DEGENERACY_FLOOR,
                });
            }
        }
        Ok((h4, h5))
    }

    /// Refuse points whose v-neighbourhood (the stencil reach plus slack)
    /// contains a sign change of h₄, h₅ or h₅*: the residuals contain
    /// `ln |·|` and `√|·|` of these quantities, and differencing across
    /// their kinks is meaningless.
    fn check_kinks(&self, p: &ChartPoint) -> Result<()> {
        if !self.ctx.guard_kinks {
            return Ok(());
        }
        let d = &self.ctx.diff;
        let span = tolerances::KINK_GUARD_STEPS * d.step(Axis::V);
        let probes: [f64; 9] = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0];
        for (name, field) in [("h4", &self.metric.h4), ("h5", &self.metric.h5)] {
            let mut sign = 0.0f64;
            for &t in probes.iter() {
                let val = field.eval(&p.shifted(Axis::V, t * span));
                let s = val.signum();
                if sign == 0.0 {
                    sign = s;
                } else if s != 0.0 && s != sign {
                    return Err(ForgeError::KinkTooClose { field: name, axis: "v", guard: span });
                }
            }
        }
        // h₅* is probed more coarsely: each probe costs a stencil.
        let mut sign = 0.0f64;
        for &t in [-1.0f64, -0.5, 0.0, 0.5, 1.0].iter() {
            let val = d.d1(&self.metric.h5, &p.shifted(Axis::V, t * span), Axis::V)?;
            let s = val.signum();
            if sign == 0.0 {
                sign = s;
            } else if s != 0.0 && s != sign {
                return Err(ForgeError::KinkTooClose { field: "h5*", axis: "v", guard: span });
            }
        }
        Ok(())
    }

    // ---- auxiliary coefficients ---------------------------------------------

    /// Auxiliary coefficients (φ, φ*, α, β, γ) at a point.
    pub fn aux_at(&self, p: &ChartPoint) -> Result<AuxCoefficients> {
        let (h4, h5) = self.check_denominators(p)?;
        self.check_kinks(p)?;
        let d = &self.ctx.diff;

        let h5s = d.d1(&self.metric.h5, p, Axis::V)?;
        let h5ss = d.d2(&self.metric.h5, p, Axis::V)?;
        let h4s = d.d1(&self.metric.h4, p, Axis::V)?;
        let l_star = d.d1(&self.log_block, p, Axis::V)?;

        // β = h₅* φ* = h₅** − h₅* L* (regular where h₅* = 0).
        let beta = h5ss - h5s * l_star;
        // αᵢ = h₅* ∂ᵢφ = ∂ᵢ(h₅*) − h₅* ∂ᵢL.
        let mut alpha = [0.0; 2];
        for (k, axis) in [(0usize, Axis::X2), (1usize, Axis::X3)] {
            let dih5s = d.d1d1(&self.metric.h5, p, axis, Axis::V)?;
            let dil = d.d1(&self.log_block, p, axis)?;
            alpha[k] = dih5s - h5s * dil;
        }
        let gamma = 1.5 * h5s / h5 - h4s / h4;
        let phi = self.phi.eval(p);
        let phi_star = beta / h5s;
        Ok(AuxCoefficients { phi, phi_star, alpha, beta, gamma })
    }

    // ---- reduced residuals ---------------------------------------------------

    /// The four reduced residual groups at a point.
    pub fn reduced_at(&self, p: &ChartPoint) -> Result<ReducedResiduals> {
        let (h4, h5) = self.check_denominators(p)?;
        self.check_kinks(p)?;
        let d = &self.ctx.diff;
        let m = &self.metric;
        let lambda = self.ctx.lambda;

        // Horizontal residual.
        let g2 = m.g2.eval(p);
        let g3 = m.g3.eval(p);
        let g2_b = d.d1(&m.g2, p, Axis::X2)?;
        let g2_p = d.d1(&m.g2, p, Axis::X3)?;
        let g2_pp = d.d2(&m.g2, p, Axis::X3)?;
        let g3_b = d.d1(&m.g3, p, Axis::X2)?;
        let g3_bb = d.d2(&m.g3, p, Axis::X2)?;
        let g3_p = d.d1(&m.g3, p, Axis::X3)?;
        let numerator = g2_b * g3_b / (2.0 * g2) + g3_b * g3_b / (2.0 * g3) - g3_bb
            + g2_p * g3_p / (2.0 * g3)
            + g2_p * g2_p / (2.0 * g2)
            - g2_pp;
        let horizontal = numerator / (2.0 * g2 * g3) + lambda;

        // Vertical residual.
        let h5s = d.d1(&m.h5, p, Axis::V)?;
        let h5ss = d.d2(&m.h5, p, Axis::V)?;
        let l_star = d.d1(&self.log_block, p, Axis::V)?;
        let vertical = (h5s * l_star - h5ss) / (2.0 * h4 * h5) + lambda;

        // Mixing residuals.
        let aux = self.aux_at(p)?;
        let mut mixing_w = [0.0; 2];
        let mut mixing_n = [0.0; 2];
        for k in 0..2 {
            let w = m.w[k].eval(p);
            mixing_w[k] = -(w * aux.beta + aux.alpha[k]) / (2.0 * h5);
            let ns = d.d1(&m.n[k], p, Axis::V)?;
            let nss = d.d2(&m.n[k], p, Axis::V)?;
            mixing_n[k] = -(h5 / (2.0 * h4)) * (nss + aux.gamma * ns);
        }

        Ok(ReducedResiduals { horizontal, vertical, mixing_w, mixing_n })
    }

    // ---- torsion-free constraints ----------------------------------------------

    /// Levi-Civita constraint residuals.  `signs` fixes the (ε₂, ε₃)
    /// convention of the horizontal trace; `None` takes the signs of
    /// (g₂, g₃) at the point.
    pub fn lc_at(&self, p: &ChartPoint, signs: Option<(f64, f64)>) -> Result<LcResiduals> {
        let (h4, h5) = self.check_denominators(p)?;
        self.check_kinks(p)?;
        let d = &self.ctx.diff;
        let m = &self.metric;
        let lambda = self.ctx.lambda;

        // ψ = ln|g₂| (the constraint presumes |g₂| = |g₃| up to sign).
        let psi = {
            let g2 = m.g2.clone();
            if d.mode == DiffMode::ExactPreferred && g2.partial(Axis::X2).is_some() {
                g2.ln_abs()
            } else {
                ScalarField::from_fn("psi", move |q| g2.eval(q).abs().ln())
            }
        };
        let (eps2, eps3) = signs.unwrap_or_else(|| {
            (m.g2.eval(p).signum(), m.g3.eval(p).signum())
        });
        let horizontal_trace =
            eps2 * d.d2(&psi, p, Axis::X2)? + eps3 * d.d2(&psi, p, Axis::X3)? - lambda;

        let h5s = d.d1(&m.h5, p, Axis::V)?;
        let phi = self.phi.eval(p);
        let vertical_closure = h5s * phi / (h4 * h5) - lambda;

        let w2 = m.w[0].eval(p);
        let w3 = m.w[1].eval(p);
        let w2_p = d.d1(&m.w[0], p, Axis::X3)?;
        let w3_b = d.d1(&m.w[1], p, Axis::X2)?;
        let w2_s = d.d1(&m.w[0], p, Axis::V)?;
        let w3_s = d.d1(&m.w[1], p, Axis::V)?;
        let w_curl = w2_p - w3_b + w3 * w2_s - w2 * w3_s;

        let n2_p = d.d1(&m.n[0], p, Axis::X3)?;
        let n3_b = d.d1(&m.n[1], p, Axis::X2)?;
        let n_curl = n2_p - n3_b;

        // wᵢ = ∂ᵢφ/φ* where the quotient carries information: below the
        // skip floor a measured φ* is indistinguishable from differencing
        // noise and the constraint is meaningless.
        let aux = self.aux_at(p)?;
        let mut w_gradient = [None, None];
        if h5s.abs() > tolerances::LC_GRADIENT_SKIP_FLOOR
            && (aux.beta / h5s).abs() > tolerances::LC_GRADIENT_SKIP_FLOOR
        {
            for k in 0..2 {
                // ∂ᵢφ/φ* = αᵢ/β.
                let target = aux.alpha[k] / aux.beta;
                let w = m.w[k].eval(p);
                w_gradient[k] = Some(w - target);
            }
        }

        Ok(LcResiduals { horizontal_trace, vertical_closure, w_curl, n_curl, w_gradient })
    }

    // ---- anholonomy ---------------------------------------------------------

    /// Frame anholonomy data at a point.
    pub fn anholonomy_at(&self, p: &ChartPoint) -> Result<AnholonomyData> {
        let d = &self.ctx.diff;
        let m = &self.metric;
        let w2 = m.w[0].eval(p);
        let w3 = m.w[1].eval(p);

        let dv_w = [d.d1(&m.w[0], p, Axis::V)?, d.d1(&m.w[1], p, Axis::V)?];
        let dv_n = [d.d1(&m.n[0], p, Axis::V)?, d.d1(&m.n[1], p, Axis::V)?];

        // eᵢ = ∂ᵢ − wᵢ ∂ᵥ; curvature = e₃(f₂) − e₂(f₃) for f = w, n.
        let w2_p = d.d1(&m.w[0], p, Axis::X3)?;
        let w3_b = d.d1(&m.w[1], p, Axis::X2)?;
        let curvature_v = (w2_p - w3 * dv_w[0]) - (w3_b - w2 * dv_w[1]);

        let n2_p = d.d1(&m.n[0], p, Axis::X3)?;
        let n3_b = d.d1(&m.n[1], p, Axis::X2)?;
        let curvature_y = (n2_p - w3 * dv_n[0]) - (n3_b - w2 * dv_n[1]);

        Ok(AnholonomyData { dv_w, dv_n, curvature_v, curvature_y })
    }

    // ---- flow rates -----------------------------------------------------------

    /// Flow-rate residuals at a point: a flowing family solves the
    /// evolution system iff every coefficient's χ-rate matches twice the
    /// coefficient times its field-equation residual (the horizontal rates
    /// additionally carry the frame-coefficient rates weighted by the
    /// vertical block).
    pub fn evolution_at(&self, p: &ChartPoint) -> Result<EvolutionResiduals> {
        let d = &self.ctx.diff;
        let m = &self.metric;
        let reduced = self.reduced_at(p)?;
        let (h4, h5) = (m.h4.eval(p), m.h5.eval(p));

        let mut vertical = [0.0; 2];
        for (k, field) in [(0usize, &m.h4), (1usize, &m.h5)] {
            let rate = d.d1(field, p, Axis::Chi)?;
            let value = field.eval(p);
            vertical[k] = rate - 2.0 * value * reduced.vertical;
        }

        let mut horizontal = [0.0; 2];
        for k in 0..2 {
            let g = [&m.g2, &m.g3][k];
            let rate = d.d1(g, p, Axis::Chi)?;
            let value = g.eval(p);
            let w = m.w[k].eval(p);
            let w_rate = d.d1(&m.w[k], p, Axis::Chi)?;
            let n = m.n[k].eval(p);
            let n_rate = d.d1(&m.n[k], p, Axis::Chi)?;
            horizontal[k] = rate - 2.0 * value * reduced.horizontal
                + h4 * 2.0 * w * w_rate
                + h5 * 2.0 * n * n_rate;
        }

        Ok(EvolutionResiduals { horizontal, vertical })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;

    fn ctx(mode: DiffMode) -> ResidualCtx {
        ResidualCtx::new(Differentiator::uniform(1e-3, 4, mode), 0.0)
    }

    /// Hand-derived horizontal residual oracle for
    /// g₂ = −(1 + x²y), g₃ = −(2 + sin x)   (x = x², y = x³).
    fn rh_oracle(x: f64, y: f64) -> f64 {
        let g2 = -(1.0 + x * x * y);
        let g3 = -(2.0 + x.sin());
        let g2_b = -2.0 * x * y;
        let g2_p = -x * x;
        let g2_pp = 0.0;
        let g3_b = -x.cos();
        let g3_bb = x.sin();
        let g3_p = 0.0;
        let num = g2_b * g3_b / (2.0 * g2) + g3_b * g3_b / (2.0 * g3) - g3_bb
            + g2_p * g3_p / (2.0 * g3)
            + g2_p * g2_p / (2.0 * g2)
            - g2_pp;
        num / (2.0 * g2 * g3)
    }

    fn simple_metric() -> AnsatzMetric {
        AnsatzMetric::diagonal(
            "test",
            1.0,
            parse_field("-(1 + x2^2*x3)").unwrap(),
            parse_field("-(2 + sin(x2))").unwrap(),
            parse_field("-(1 + v^2)").unwrap(),
            parse_field("2 + sin(v)").unwrap(),
        )
    }

    #[test]
    fn horizontal_residual_matches_hand_oracle() {
        let m = simple_metric();
        for mode in [DiffMode::ValueFd, DiffMode::ExactPreferred] {
            let ev = ResidualEvaluator::new(&m, ctx(mode));
            for &(x, y) in &[(0.7, 0.4), (1.2, -0.3)] {
                let p = ChartPoint::new(x, y, 0.3);
                let got = ev.reduced_at(&p).unwrap().horizontal;
                let want = rh_oracle(x, y);
                assert!(
                    (got - want).abs() < 1e-8,
                    "{mode:?} at ({x},{y}): {got} vs {want}"
                );
            }
        }
    }

    /// Hand-derived vertical residual oracle for
    /// h₄ = −(1 + v²), h₅ = 2 + sin v.
    fn rv_oracle(v: f64) -> f64 {
        let h4 = -(1.0 + v * v);
        let h5 = 2.0 + v.sin();
        let h4s = -2.0 * v;
        let h5s = v.cos();
        let h5ss = -v.sin();
        let l_star = (h4s * h5 + h4 * h5s) / (2.0 * h4 * h5);
        (h5s * l_star - h5ss) / (2.0 * h4 * h5)
    }

    #[test]
    fn vertical_residual_matches_hand_oracle() {
        let m = simple_metric();
        for mode in [DiffMode::ValueFd, DiffMode::ExactPreferred] {
            let ev = ResidualEvaluator::new(&m, ctx(mode));
            for &v in &[0.3, 1.1, -0.6] {
                let p = ChartPoint::new(0.9, 0.2, v);
                let got = ev.reduced_at(&p).unwrap().vertical;
                let want = rv_oracle(v);
                assert!((got - want).abs() < 1e-8, "{mode:?} at v={v}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn aux_coefficients_match_hand_formulas() {
        let m = simple_metric();
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ExactPreferred));
        let v: f64 = 0.4;
        let p = ChartPoint::new(0.9, 0.2, v);
        let aux = ev.aux_at(&p).unwrap();

        let h4 = -(1.0 + v * v);
        let h5 = 2.0 + v.sin();
        let h4s = -2.0 * v;
        let h5s = v.cos();
        let h5ss = -v.sin();
        let l_star = (h4s * h5 + h4 * h5s) / (2.0 * h4 * h5);
        let phi = (h5s / (h4 * h5).abs().sqrt()).abs().ln();
        let beta = h5ss - h5s * l_star;
        let gamma = 1.5 * h5s / h5 - h4s / h4;

        assert!((aux.phi - phi).abs() < 1e-10);
        assert!((aux.beta - beta).abs() < 1e-10);
        assert!((aux.gamma - gamma).abs() < 1e-10);
        // v-only coefficients have vanishing horizontal gradients.
        assert!(aux.alpha[0].abs() < 1e-10);
        assert!(aux.alpha[1].abs() < 1e-10);
        // φ* agrees with the direct derivative of φ.
        let phi_star_direct = h5ss / h5s - l_star;
        assert!((aux.phi_star - phi_star_direct).abs() < 1e-10);
    }

    #[test]
    fn constant_h5_gives_vertical_residual_lambda() {
        // h₅* = 0 collapses the vertical equation to r_v = λ; the regular
        // α/β forms must not blow up.
        let m = AnsatzMetric::diagonal(
            "const-h5",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            parse_field("-(1 + v^2)").unwrap(),
            ScalarField::constant(3.0),
        );
        let mut c = ctx(DiffMode::ValueFd);
        c.lambda = 0.25;
        let ev = ResidualEvaluator::new(&m, c);
        let p = ChartPoint::new(0.5, 0.5, 0.7);
        let r = ev.reduced_at(&p).unwrap();
        assert!((r.vertical - 0.25).abs() < 1e-9);
        assert!(r.mixing_w[0].abs() < 1e-9);
        assert!(r.mixing_n[0].abs() < 1e-9);
    }

    #[test]
    fn mixing_residuals_vanish_for_gradient_matched_w() {
        // With φ built from h₄, h₅ and w = −∂ᵢφ/φ*, the w-residual
        // vanishes identically; cross-check with x-dependent h₅.
        let h5 = parse_field("2 + sin(v)*exp(x2)").unwrap();
        let h4 = parse_field("-(1 + v^2)").unwrap();
        // Exact fields: α/β quotient is representible symbolically.
        let phi = h5
            .partial(Axis::V)
            .unwrap()
            .div(&h4.mul(&h5).sqrt_abs())
            .ln_abs();
        let phi_star = phi.partial(Axis::V).unwrap();
        let w2 = phi.partial(Axis::X2).unwrap().div(&phi_star).neg();
        let w3 = phi.partial(Axis::X3).unwrap().div(&phi_star).neg();
        let m = AnsatzMetric::diagonal(
            "w-matched",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            h4,
            h5,
        )
        .with_w(w2, w3);
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ExactPreferred));
        let p = ChartPoint::new(0.4, -0.2, 0.5);
        let r = ev.reduced_at(&p).unwrap();
        assert!(r.mixing_w[0].abs() < 1e-11, "r_w2 = {:e}", r.mixing_w[0]);
        assert!(r.mixing_w[1].abs() < 1e-11, "r_w3 = {:e}", r.mixing_w[1]);
    }

    #[test]
    fn lc_curls_match_hand_formulas() {
        let m = AnsatzMetric::diagonal(
            "curl",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            parse_field("-(1 + v^2)").unwrap(),
            parse_field("2 + sin(v)").unwrap(),
        )
        .with_w(
            parse_field("v * x3").unwrap(),
            parse_field("v^2").unwrap(),
        )
        .with_n(
            parse_field("x3 * x2").unwrap(),
            parse_field("x2^2").unwrap(),
        );
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        let (x, y, v) = (0.8, 0.5, 0.6);
        let p = ChartPoint::new(x, y, v);
        let lc = ev.lc_at(&p, None).unwrap();
        // c3 = ∂₃w₂ − ∂₂w₃ + w₃w₂* − w₂w₃* = v + v²·y − vy·2v = v − v²y.
        let want_c3 = v - v * v * y;
        assert!((lc.w_curl - want_c3).abs() < 1e-9, "{} vs {want_c3}", lc.w_curl);
        // c4 = ∂₃n₂ − ∂₂n₃ = x − 2x.
        let want_c4 = x - 2.0 * x;
        assert!((lc.n_curl - want_c4).abs() < 1e-9);
    }

    #[test]
    fn lc_horizontal_trace_sign_conventions() {
        // g₂ = g₃ = −e^(x2²): ψ = x2², ψ•• = 2, ψ″ = 0.
        let g = parse_field("-exp(x2^2)").unwrap();
        let m = AnsatzMetric::diagonal(
            "trace",
            1.0,
            g.clone(),
            g,
            parse_field("-(1+v^2)").unwrap(),
            parse_field("2 + sin(v)").unwrap(),
        );
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        let p = ChartPoint::new(0.3, 0.1, 0.4);
        // Default signs: ε₂ = ε₃ = −1 (signs of g at the point).
        let lc = ev.lc_at(&p, None).unwrap();
        assert!((lc.horizontal_trace + 2.0).abs() < 1e-7);
        // Flipped convention negates the trace.
        let lc = ev.lc_at(&p, Some((1.0, 1.0))).unwrap();
        assert!((lc.horizontal_trace - 2.0).abs() < 1e-7);
    }

    #[test]
    fn w_gradient_constraint_is_skipped_when_phi_is_static() {
        // h₄ = −1, h₅ = v+10 ⇒ φ = −½ln(v+10) has φ* ≈ −0.05: the
        // gradient constraint is well defined and must be reported.
        let m = AnsatzMetric::diagonal(
            "static-phi",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            parse_field("v + 10").unwrap(),
        );
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        let p = ChartPoint::new(0.2, 0.3, 0.5);
        let lc = ev.lc_at(&p, None).unwrap();
        assert!(lc.w_gradient[0].is_some());

        // A genuinely static φ: h₄ = −1/(v+10), h₅ = v + 10 gives
        // |h₄h₅| = 1 and h₅* = 1, so φ = 0 identically and the measured
        // φ* is pure differencing noise (≈ 10⁻⁸) — must be skipped.
        let m2 = AnsatzMetric::diagonal(
            "static-phi-2",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            parse_field("-1/(v + 10)").unwrap(),
            parse_field("v + 10").unwrap(),
        );
        let ev2 = ResidualEvaluator::new(&m2, ctx(DiffMode::ValueFd));
        let lc2 = ev2.lc_at(&p, None).unwrap();
        assert!(lc2.w_gradient[0].is_none());
        assert!(lc2.w_gradient[1].is_none());
    }

    #[test]
    fn anholonomy_matches_hand_formulas() {
        let m = AnsatzMetric::diagonal(
            "anholonomy",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            parse_field("-(1+v^2)").unwrap(),
            parse_field("2+sin(v)").unwrap(),
        )
        .with_w(parse_field("v").unwrap(), parse_field("x2").unwrap())
        .with_n(parse_field("x3*v").unwrap(), parse_field("0").unwrap());
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        let (x, y, v) = (0.7, 0.4, 0.9);
        let p = ChartPoint::new(x, y, v);
        let a = ev.anholonomy_at(&p).unwrap();
        assert!((a.dv_w[0] - 1.0).abs() < 1e-10);
        assert!((a.dv_w[1] - 0.0).abs() < 1e-10);
        assert!((a.dv_n[0] - y).abs() < 1e-10);
        // Ω_v = [∂₃w₂ − w₃ ∂ᵥw₂] − [∂₂w₃ − w₂ ∂ᵥw₃] = [0 − x·1] − [1 − 0].
        assert!((a.curvature_v - (-x - 1.0)).abs() < 1e-9);
        // Ω_y = [∂₃n₂ − w₃ ∂ᵥn₂] − [∂₂n₃ − w₂ ∂ᵥn₃] = [v − x·y] − 0.
        assert!((a.curvature_y - (v - x * y)).abs() < 1e-9);
    }

    #[test]
    fn evolution_rates_reduce_to_scaled_residuals() {
        // χ-independent metric: the flow-rate residual must equal
        // −2 × coefficient × field-equation residual.
        let m = simple_metric();
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        let p = ChartPoint::new(0.8, 0.3, 0.5);
        let r = ev.reduced_at(&p).unwrap();
        let e = ev.evolution_at(&p).unwrap();
        let h4 = m.h4.eval(&p);
        let h5 = m.h5.eval(&p);
        assert!((e.vertical[0] + 2.0 * h4 * r.vertical).abs() < 1e-9);
        assert!((e.vertical[1] + 2.0 * h5 * r.vertical).abs() < 1e-9);
        let g2 = m.g2.eval(&p);
        assert!((e.horizontal[0] + 2.0 * g2 * r.horizontal).abs() < 1e-9);

        // Exponentially flowing h₄ = e^(2χ)·(−(1+v²)): rate is 2h₄.
        let flowing = AnsatzMetric::diagonal(
            "flowing",
            1.0,
            m.g2.clone(),
            m.g3.clone(),
            parse_field("-exp(2*chi)*(1+v^2)").unwrap(),
            m.h5.clone(),
        );
        let ev = ResidualEvaluator::new(&flowing, ctx(DiffMode::ExactPreferred));
        let r = ev.reduced_at(&p).unwrap();
        let e = ev.evolution_at(&p).unwrap();
        let h4 = flowing.h4.eval(&p);
        let want = 2.0 * h4 - 2.0 * h4 * r.vertical;
        assert!((e.vertical[0] - want).abs() < 1e-9);
    }

    #[test]
    fn kink_guard_refuses_sign_changes() {
        let m = AnsatzMetric::diagonal(
            "kinked",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            parse_field("v").unwrap(), // h₄ crosses zero at v = 0
            parse_field("2 + sin(v)").unwrap(),
        );
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        // Within the guard distance of the kink (10 steps × 1e-3).
        let near = ChartPoint::new(0.5, 0.5, 5e-3);
        assert!(matches!(
            ev.reduced_at(&near).unwrap_err(),
            ForgeError::KinkTooClose { .. }
        ));
        // Far from the kink the evaluation succeeds.
        let far = ChartPoint::new(0.5, 0.5, 0.5);
        assert!(ev.reduced_at(&far).is_ok());
    }

    #[test]
    fn degenerate_denominators_are_refused() {
        let m = AnsatzMetric::diagonal(
            "degenerate",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            ScalarField::constant(1e-12),
        );
        let ev = ResidualEvaluator::new(&m, ctx(DiffMode::ValueFd));
        let p = ChartPoint::new(0.5, 0.5, 0.5);
        assert!(matches!(
            ev.reduced_at(&p).unwrap_err(),
            ForgeError::DegenerateCoefficient { name: "h5", .. }
        ));
    }
}
