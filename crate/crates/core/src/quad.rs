//! Adaptive quadrature and running-integral fields.
//!
//! The generator pipelines need antiderivatives along the anisotropic
//! direction (the `n`-coefficient is `n⁰ + n¹ ∫ h₄ |h₅|^(−3/2) dv`) and the
//! radial chart map needs `ξ(r) = ∫ √|ϖ²| dr`.  Both are served by
//! adaptive Simpson quadrature with Richardson correction: the classic
//! estimate `S(a,m) + S(m,b)` is compared against `S(a,b)` and the
//! interval splits until `|ΔS| ≤ 15 ε`, at which point the corrected value
//! `S₂ + ΔS/15` is sixth-order accurate.
//!
//! [`RunningIntegral`] wraps the rule as an [`ExternField`] whose upper
//! limit is the evaluation point's coordinate.  Its derivative rules use
//! differentiation under the integral sign: the derivative along the
//! integration axis is the integrand itself (exact — no quadrature), and
//! derivatives along the other axes integrate the differentiated integrand.
//! The field reports [`ExternField::fd_unsafe`] because raw values carry
//! noise at the quadrature tolerance, which value-differencing would divide
//! by powers of the step.

use std::sync::Arc;

use crate::chart::{Axis, ChartPoint};
use crate::error::{ForgeError, Result};
use crate::field::{ExternField, ScalarField};
use crate::tolerances;

/// Adaptive Simpson configuration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the whole-interval integral.
    pub tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tol: tolerances::QUAD_TOL_DEFAULT,
            max_depth: tolerances::QUAD_MAX_DEPTH,
        }
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (fa + 4.0 * fm + fb) * h / 6.0
}

/// Integrate `f` over `[lo, hi]` (either orientation) to tolerance `cfg.tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if hi < lo {
        return integrate(f, hi, lo, cfg).map(|v| -v);
    }
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    let whole = simpson(fa, fm, fb, hi - lo);
    adaptive(f, lo, hi, fa, fm, fb, whole, cfg.tol, cfg.max_depth).map_err(|deepest| {
        ForgeError::QuadratureDepthExhausted { lo, hi, tol: cfg.tol, deepest }
    })
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> std::result::Result<f64, f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    // 15 = 2⁴ − 1: Richardson factor for Simpson's fourth-order rule.
    if delta.abs() <= 15.0 * tol || (b - a) < f64::EPSILON * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(b - a);
    }
    let half_tol = 0.5 * tol;
    let l = adaptive(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?;
    let r = adaptive(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?;
    Ok(l + r)
}

/// Fixed-panel midpoint rule.  Deliberately primitive: it shares no code
/// path or error machinery with the adaptive rule, so it serves as an
/// independent cross-check oracle in the verification suites.
pub fn riemann_midpoint(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let t = lo + (i as f64 + 0.5) * h;
        acc += f(t);
    }
    acc * h
}

/// Fixed-panel composite Simpson rule (`panels` must be even; rounded up).
/// Second independent oracle, distinct from both the adaptive rule and the
/// midpoint rule.
pub fn simpson_composite(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = (panels.max(2) + 1) & !1usize; // round up to even
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let t = lo + i as f64 * h;
        acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Antiderivative field `F(u) = ∫_{base}^{u_axis} g dt` along one axis.
///
/// The integrand is evaluated on the chart with the integration coordinate
/// replaced by the dummy variable; all other coordinates are held at the
/// evaluation point, so the result is again a field on the chart.
pub struct RunningIntegral {
    integrand: ScalarField,
    axis: Axis,
    base: f64,
    cfg: QuadratureConfig,
    label: String,
}

impl RunningIntegral {
    pub fn new(integrand: ScalarField, axis: Axis, base: f64, cfg: QuadratureConfig) -> Self {
        let label = format!("int_{}", axis.name());
        RunningIntegral { integrand, axis, base, cfg, label }
    }

    /// Wrap into a [`ScalarField`] leaf.
    pub fn into_field(self) -> ScalarField {
        ScalarField::external(Arc::new(self))
    }

    /// Convenience: running integral along `v` from `base` with tolerance
    /// suited to coefficient construction.
    pub fn along_v(integrand: ScalarField, base: f64) -> ScalarField {
        RunningIntegral::new(integrand, Axis::V, base, QuadratureConfig::default()).into_field()
    }
}

impl ExternField for RunningIntegral {
    fn eval(&self, p: &ChartPoint) -> f64 {
        let upper = p.get(self.axis);
        let g = |t: f64| self.integrand.eval(&p.with(self.axis, t));
        // The adaptive rule converges for every integrand used by the
        // pipelines (smooth on the sampling boxes); depth exhaustion
        // signals a configuration error, surfaced as NaN so that residual
        // suites fail loudly rather than silently truncating.
        integrate(&g, self.base, upper, &self.cfg).unwrap_or(f64::NAN)
    }

    fn partial(&self, axis: Axis) -> Option<ScalarField> {
        if axis == self.axis {
            // Fundamental theorem of calculus: exact, noise-free.
            return Some(self.integrand.clone());
        }
        // Differentiation under the integral sign (the base is constant).
        let dg = self.integrand.partial(axis)?;
        Some(
            RunningIntegral::new(dg, self.axis, self.base, self.cfg)
                .into_field(),
        )
    }

    fn name(&self) -> String {
        self.label.clone()
    }

    fn fd_unsafe(&self) -> bool {
        true
    }
}
