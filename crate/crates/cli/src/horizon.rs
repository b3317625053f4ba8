//! Horizon sweep: deformed-lapse root location around the full angle range.
//!
//! For a deformed spherically symmetric metric the horizon radius at angle
//! φ solves `lapse(r, φ) = 0`.  The sweep samples φ_j = 2πj/N for
//! j = 0..N−1 (strictly increasing, N ≥ 2) and reports, per angle,
//!
//! * the numerically root-found radius,
//! * the first-order (linearized in the deformation amplitude) radius, and
//! * their difference, which is quadratic in the deformation amplitude.
//!
//! Angles where the solver finds no sign change are recorded as gap rows;
//! the sweep itself still succeeds so long as at least one angle yields a
//! root.

use crate::emit::HorizonRow;
use crate::scenario::RotoidSweep;
use crate::CliError;

/// Run the sweep, producing one row per angle.
pub fn sweep_rows(sweep: &RotoidSweep) -> Result<Vec<HorizonRow>, CliError> {
    let n = sweep.points;
    let mut rows = Vec::with_capacity(n);
    let mut any_root = false;
    for j in 0..n {
        let phi = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
        let formula = sweep.params.linearized_root(phi);
        let root = match sweep.params.solved_root(phi) {
            Ok(r) => {
                any_root = true;
                Some(r)
            }
            Err(_) => None,
        };
        rows.push(HorizonRow { phi, root, formula });
    }
    if !any_root {
        return Err(CliError::config(
            "horizon sweep found no root at any angle; deformation parameters leave no horizon".to_string(),
        ));
    }
    Ok(rows)
}
