//! Convergence-order measurement for residual sweeps.
//!
//! Verification differentiates coefficient *values* with central stencils,
//! so on an exact solution the measured residuals must shrink like the
//! stencil truncation order as the step decreases.  This module fits that
//! order: given (step, error) samples it least-squares fits
//! `ln err = p·ln h + ln C` and reports the slope p and envelope constant
//! C.  A fitted order compatible with the stencil order — together with
//! an envelope below a pinned constant — is the acceptance signal that a
//! pipeline output solves the equations rather than merely evaluating
//! small at one step.

use crate::error::{ForgeError, Result};

/// Result of fitting `err ≈ C·hᵖ` through measured samples.
#[derive(Debug, Clone)]
pub struct OrderFit {
    /// Fitted convergence order p (slope in log-log).
    pub order: f64,
    /// Fitted envelope constant C.
    pub constant: f64,
    /// The samples the fit used, as (step, error).
    pub samples: Vec<(f64, f64)>,
}

impl OrderFit {
    /// Predicted error at a given step from the fitted envelope.
    pub fn predict(&self, h: f64) -> f64 {
        self.constant * h.powf(self.order)
    }
}

/// Least-squares fit of the convergence order through (step, error)
/// samples.  Requires at least two samples with positive finite entries:
/// a zero measured error has no magnitude to fit (and already signals an
/// exact match), so it is rejected rather than silently dropped.
pub fn fit_order(samples: &[(f64, f64)]) -> Result<OrderFit> {
    if samples.len() < 2 {
        return Err(ForgeError::InvalidConfig(format!(
            "order fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    for &(h, e) in samples {
        if !(h > 0.0 && h.is_finite() && e > 0.0 && e.is_finite()) {
            return Err(ForgeError::InvalidConfig(format!(
                "order fit needs positive finite samples, got ({h:e}, {e:e})"
            )));
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(h, _)| h.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, e)| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if sxx == 0.0 {
        return Err(ForgeError::InvalidConfig(
            "order fit needs at least two distinct steps".into(),
        ));
    }
    let order = sxy / sxx;
    let constant = (ybar - order * xbar).exp();
    Ok(OrderFit {
        order,
        constant,
        samples: samples.to_vec(),
    })
}

/// Evaluate an error measure over a sequence of steps, producing the
/// sample table for [`fit_order`].
pub fn sweep(steps: &[f64], mut measure: impl FnMut(f64) -> Result<f64>) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(steps.len());
    for &h in steps {
        out.push((h, measure(h)?));
    }
    Ok(out)
}
