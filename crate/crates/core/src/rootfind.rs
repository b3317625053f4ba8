//! Bracketed scalar root finding.
//!
//! Horizon probing and chart inversion both reduce to solving `f(r) = 0`
//! for a monotone-in-the-bracket `f`.  The Illinois variant of regula falsi
//! is used throughout: derivative-free, guaranteed to keep a bracket,
//! superlinearly convergent on smooth roots, and fully deterministic.

use crate::error::{ForgeError, Result};
use crate::tolerances;

/// Configuration for [`solve_bracketed`].
#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Stop when the bracket width or |f| falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig { tol: tolerances::ROOT_TOL, max_iter: 200 }
    }
}

/// Find the root of `f` inside `[lo, hi]`, which must bracket a sign change.
pub fn solve_bracketed(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(ForgeError::NoBracket { lo, hi, flo: fa, fhi: fb });
    }
    // Illinois bookkeeping: which side was retained last.
    let mut last_kept: i8 = 0;
    for _ in 0..cfg.max_iter {
        let x = (a * fb - b * fa) / (fb - fa);
        let fx = f(x);
        if fx == 0.0 || (b - a).abs() <= cfg.tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if last_kept == 1 {
                fb *= 0.5; // halve the stale endpoint to force progress
            }
            last_kept = 1;
        } else {
            b = x;
            fb = fx;
            if last_kept == -1 {
                fa *= 0.5;
            }
            last_kept = -1;
        }
        if (b - a).abs() <= cfg.tol {
            return Ok(0.5 * (a + b));
        }
    }
    Err(ForgeError::IterationCap {
        solver: "illinois root finder",
        iterations: cfg.max_iter,
        residual: (b - a).abs(),
        target: cfg.tol,
    })
}

/// Solve `g(x) = target` for monotone `g` on `[lo, hi]`.
pub fn invert_monotone(
    g: &dyn Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    solve_bracketed(&|x| g(x) - target, lo, hi, cfg)
}
