//! Acceptance gate: the end-to-end checks that decide whether a build of
//! this workspace is fit for use.  Each check prints exactly one
//! `[ACCEPTANCE]` pass/fail line (visible with `--nocapture`, and always
//! visible on failure) and enforces its own runtime budget.
//!
//! Every numeric gate below is an *envelope pinned from measurement*: the
//! value was observed on a clean build, then frozen with a safety margin so
//! regressions trip it while platform-level arithmetic jitter does not.
//! The margins are documented next to each constant.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use forge_core::ansatz::WaveProfile;
use forge_core::chart::{Axis, AxisSpec, ChartPoint, GridSpec};
use forge_core::diff::DiffMode;
use forge_core::expr::parse_field;
use forge_core::field::ScalarField;
use forge_core::flows::exponential_flow_family;
use forge_core::generators::{
    sine_gordon_kink, ExtradimPipeline, RotoidParams, RotoidTerm, StringPipeline, VacuumPipeline,
};
use forge_core::poisson::solve_dirichlet;
use forge_core::quad::{integrate, riemann_midpoint, QuadratureConfig, RunningIntegral};
use forge_core::report::{Suite, SuiteRequest, SuiteRunner};
use forge_core::tolerances;
use forge_core::transforms::{
    apply_polarizations, compose_two_parameter, conformal_renormalize, PolarizationSet,
};

// ---------------------------------------------------------------------------
// Pinned envelopes (measured on a clean build, frozen with margin)
// ---------------------------------------------------------------------------

/// Soliton identity |q** − sin q| with exact derivative routes.  Measured
/// 6.7e-16 (pure rounding); the gate is the workspace-wide exact-identity
/// tolerance.
const SOLITON_IDENTITY_TOL: f64 = 1e-12;

/// Wave-profile harmonicity |κ_xx + κ_yy| with exact derivatives.
/// Measured 0 (plane) and 9.3e-14 (packet: quotient-rule cancellation);
/// gate 1e-10 ≈ 10³ × the worst observation.
const HARMONICITY_TOL: f64 = 1e-10;

/// Fourth-order envelope constant for the string-background sweep, in the
/// relative-step form max_norm ≤ C·h⁴.  The fit over h ∈ {2e-3, 1e-3,
/// 5e-4} (axis scale 20) measured C ≈ 2.74e6 with order 4.000; pinned at
/// 4.4× margin.
const STRING_SWEEP_CONSTANT: f64 = 1.2e7;

/// Verification tolerance derived from the same envelope at the default
/// relative step h = 1e-3: C·h⁴ = 1.2e-5.  The vacuum background measures
/// 2.7e-10 (reduced) and 1.3e-13 (closure) on the 9×9×9 grid — far below.
const BACKGROUND_ENVELOPE: f64 = STRING_SWEEP_CONSTANT * 1e-12;

/// Levi-Civita curl residuals on a gradient-sourced frame field.  Measured
/// c3 = 2.4e-14, c4 = 1.4e-13 (first-difference noise); gate per contract.
const CURL_TOL: f64 = 1e-10;

/// Horizon sweep: |root-found − first-order| ≤ K·ε².  K measured 0.1253
/// at ε ∈ {1e-2, 1e-3, 1e-4} (flat across the sweep); pinned at 4×.
const ROTOID_K: f64 = 0.5;

/// Reduced-suite envelope for the extra-dimension background on its
/// off-degenerate window.  Measured max 2.36e-8 (roundoff-floor dominated:
/// the quotient r_v ∝ h₅**/(h₄h₅) amplifies the ≈3e-10 second-difference
/// floor); pinned at 8.5× margin.
const EXTRADIM_ENVELOPE: f64 = 2e-7;

/// Poisson boundary-value recovery.  The five-point stencil is exact on
/// the cubic harmonic used here, so the error is pure solver tolerance;
/// measured 7.0e-12, gate per contract.
const POISSON_TOL: f64 = 1e-6;

/// Clean finite-difference envelope of the vertical residual r_v on the
/// verified vacuum background (3×3×3 window).  Measured 3.9e-11; pinned
/// at ≈25× so the sensitivity check (must exceed 10× this) stays honest.
const RV_FD_ENVELOPE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Reporting helper
// ---------------------------------------------------------------------------

fn criterion(index: usize, label: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    match result {
        Ok(()) => {
            println!("[ACCEPTANCE] {index:02} {label}: PASS ({elapsed:.2?})");
            assert!(
                elapsed <= budget,
                "{label}: runtime {elapsed:.2?} exceeds budget {budget:?}"
            );
        }
        Err(msg) => {
            println!("[ACCEPTANCE] {index:02} {label}: FAIL ({elapsed:.2?}) — {msg}");
            panic!("{label}: {msg}");
        }
    }
}

fn gate(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------------------
// Shared fixtures (the catalog defaults, rebuilt against the core API so a
// catalog regression cannot mask a physics regression)
// ---------------------------------------------------------------------------

fn string_solution() -> forge_core::generators::GeneratedSolution {
    let eta = sine_gordon_kink(0.3).unwrap();
    let mut pipe = StringPipeline::new(eta, std::f64::consts::SQRT_2);
    pipe.n0 = [0.3, -0.2];
    pipe.n1 = [0.4, 0.7];
    pipe.build().unwrap()
}

fn vacuum_solution() -> forge_core::generators::GeneratedSolution {
    let envelope = ScalarField::constant(1.0)
        .add(&ScalarField::x2().powi(2).mul(&ScalarField::constant(0.2)));
    let potential = ScalarField::x2().sin().mul(&ScalarField::x3().cos());
    VacuumPipeline::new(envelope, sine_gordon_kink(0.3).unwrap(), ScalarField::one(), 2.0)
        .with_n_potential(potential)
        .build()
        .unwrap()
}

fn nine_cube(v_lo: f64, v_hi: f64) -> GridSpec {
    GridSpec::new(
        AxisSpec::new(-0.4, 0.4, 9),
        AxisSpec::new(-0.4, 0.4, 9),
        AxisSpec::new(v_lo, v_hi, 9),
    )
}

/// Deterministic pseudo-random points (LCG) in (−1, 1)³.
fn sample_points(count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
    };
    (0..count).map(|_| ChartPoint::new(next(), next(), next())).collect()
}

// ---------------------------------------------------------------------------
// 1. Soliton identity with exact derivatives
// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_soliton_identity() {
    criterion(1, "soliton identity q** = sin q", Duration::from_secs(1), || {
        let q = sine_gordon_kink(0.0).map_err(|e| e.to_string())?;
        let qpp = q
            .partial(Axis::V)
            .and_then(|d| d.partial(Axis::V))
            .ok_or("kink must expose exact second derivatives")?;
        let mut worst = 0.0_f64;
        for i in 0..=1000 {
            let p = -5.0 + 10.0 * (i as f64) / 1000.0;
            let pt = ChartPoint::new(0.0, 0.0, p);
            worst = worst.max((qpp.eval(&pt) - q.eval(&pt).sin()).abs());
        }
        gate(
            worst <= SOLITON_IDENTITY_TOL,
            format!("max |q** − sin q| = {worst:.3e} > {SOLITON_IDENTITY_TOL:.1e}"),
        )
    });
}

// ---------------------------------------------------------------------------
// 2. Harmonicity of both builtin wave profiles
// ---------------------------------------------------------------------------

#[test]
fn acceptance_02_wave_profile_harmonicity() {
    criterion(2, "wave profiles are harmonic", Duration::from_secs(1), || {
        for (name, profile) in [
            ("plane", WaveProfile::Plane),
            ("packet", WaveProfile::Packet { p0: 1.0 }),
        ] {
            let kappa = profile.kappa();
            let lap = |axis: Axis| {
                kappa
                    .partial(axis)
                    .and_then(|d| d.partial(axis))
                    .ok_or_else(|| format!("{name} profile must expose exact second derivatives"))
            };
            let dxx = lap(Axis::X2)?;
            let dyy = lap(Axis::X3)?;
            let mut worst = 0.0_f64;
            // 10×10×10 interior points: radius bounded away from the packet
            // profile's coordinate singularity, |v| inside its support.
            for i in 0..10 {
                for j in 0..10 {
                    for k in 0..10 {
                        let pt = ChartPoint::new(
                            0.3 + (i as f64) / 9.0,
                            0.25 + (j as f64) / 9.0,
                            -0.9 + 1.8 * (k as f64) / 9.0,
                        );
                        worst = worst.max((dxx.eval(&pt) + dyy.eval(&pt)).abs());
                    }
                }
            }
            if worst > HARMONICITY_TOL {
                return Err(format!(
                    "{name}: max |κ_xx + κ_yy| = {worst:.3e} > {HARMONICITY_TOL:.1e}"
                ));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 3. Generator–verifier duality: string background at fourth order
// ---------------------------------------------------------------------------

#[test]
fn acceptance_03_string_duality_fourth_order() {
    criterion(3, "string background verifies at 4th order", Duration::from_secs(30), || {
        let sol = string_solution();
        // The axis scale stretches the physical steps to {4e-2, 2e-2, 1e-2}
        // so every entry of the sweep sits far above the second-difference
        // roundoff floor (≈2e-12 at the finest step).
        let grid = GridSpec::new(
            AxisSpec::new(-0.3, 0.3, 9).with_scale(20.0),
            AxisSpec::new(-0.3, 0.3, 9).with_scale(20.0),
            AxisSpec::new(-0.4, 0.4, 9).with_scale(20.0),
        );
        let runner = SuiteRunner::for_metric(&sol.metric, grid, sol.lambda, DiffMode::ValueFd);
        let steps = [2e-3, 1e-3, 5e-4];
        let table = runner
            .convergence_sweep(Suite::Reduced, &steps)
            .map_err(|e| e.to_string())?;
        for e in &table.entries {
            let bound = STRING_SWEEP_CONSTANT * e.fd_step.powi(4);
            if e.max_norm > bound {
                return Err(format!(
                    "h = {:.1e}: norm {:.3e} above envelope C·h⁴ = {:.3e}",
                    e.fd_step, e.max_norm, bound
                ));
            }
        }
        let order = table.fitted_order.ok_or("order fit failed")?;
        gate(
            order >= tolerances::ORDER_FIT_MIN,
            format!("fitted order {order:.2} < {}", tolerances::ORDER_FIT_MIN),
        )
    });
}

// ---------------------------------------------------------------------------
// 4. Generator–verifier duality: vacuum background, reduced + closure
// ---------------------------------------------------------------------------

#[test]
fn acceptance_04_vacuum_duality_with_closure() {
    criterion(4, "vacuum background passes reduced and closure", Duration::from_secs(30), || {
        let sol = vacuum_solution();
        if sol.lambda != 0.0 {
            return Err(format!("vacuum background must have λ = 0, got {}", sol.lambda));
        }
        let report = SuiteRunner::for_metric(
            &sol.metric,
            nine_cube(-0.4, 0.4),
            sol.lambda,
            DiffMode::ValueFd,
        )
        .run(&[
            SuiteRequest::new(Suite::Reduced).with_tolerance(BACKGROUND_ENVELOPE),
            SuiteRequest::new(Suite::Lc).with_tolerance(BACKGROUND_ENVELOPE),
        ])
        .map_err(|e| e.to_string())?;
        if !report.pass {
            return Err(format!(
                "suite norms {:?} above envelope {BACKGROUND_ENVELOPE:.1e}",
                report.suites.iter().map(|s| s.max_norm).collect::<Vec<_>>()
            ));
        }
        // The frame field is gradient-sourced, so both closure curls must
        // vanish to first-difference accuracy.
        let lc = &report.suites[1];
        let c3 = lc.component_max[2].ok_or("w-curl missing")?;
        let c4 = lc.component_max[3].ok_or("n-curl missing")?;
        gate(
            c3 <= CURL_TOL && c4 <= CURL_TOL,
            format!("curl residuals c3 = {c3:.3e}, c4 = {c4:.3e} above {CURL_TOL:.1e}"),
        )
    });
}

// ---------------------------------------------------------------------------
// 5. Closed-form flow family against a Runge–Kutta oracle
// ---------------------------------------------------------------------------

/// Classic fixed-step fourth-order Runge–Kutta for the envelope/amplitude
/// pair y' = 2λy, u' = −2λ (u is linear in χ, but it is integrated with
/// the same machinery to keep the oracle uniform).
fn rk4_envelope(lambda: f64, y0: f64, u0: f64, chi_end: f64, h: f64) -> (f64, f64) {
    let fy = |y: f64| 2.0 * lambda * y;
    let (mut y, mut u) = (y0, u0);
    let steps = (chi_end / h).round() as usize;
    for _ in 0..steps {
        let k1 = fy(y);
        let k2 = fy(y + 0.5 * h * k1);
        let k3 = fy(y + 0.5 * h * k2);
        let k4 = fy(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        u -= 2.0 * lambda * h;
    }
    (y, u)
}

#[test]
fn acceptance_05_flow_family_against_ode_oracle() {
    criterion(5, "flow family matches ODE oracle and its constraints", Duration::from_secs(5), || {
        let (b0sq, n0) = (2.0, 1.5);
        for lambda in [-1.0, 0.0, 1.0] {
            let family = exponential_flow_family(
                b0sq,
                n0,
                lambda,
                1.0,
                sine_gordon_kink(0.25).map_err(|e| e.to_string())?,
                2.0,
                [ScalarField::one(), ScalarField::constant(0.5)],
            )
            .map_err(|e| e.to_string())?;

            // Closed forms vs the independent integration at mid-range.
            let (y_rk, u_rk) = rk4_envelope(lambda, b0sq, b0sq * n0 * n0, 0.5, tolerances::RK4_STEP);
            let at = ChartPoint::new(0.0, 0.0, 0.0).at_chi(0.5);
            let y_closed = family.envelope_sq.as_ref().ok_or("missing envelope")?.eval(&at);
            let u_closed = family.n_energy.as_ref().ok_or("missing amplitude energy")?.eval(&at);
            let n0_closed = (u_closed / y_closed).sqrt();
            let n0_rk = (u_rk / y_rk).sqrt();
            if (y_closed - y_rk).abs() > tolerances::FLOW_CLOSED_FORM_TOL
                || (n0_closed - n0_rk).abs() > tolerances::FLOW_CLOSED_FORM_TOL
            {
                return Err(format!(
                    "λ = {lambda}: closed forms vs oracle differ by ({:.3e}, {:.3e})",
                    (y_closed - y_rk).abs(),
                    (n0_closed - n0_rk).abs()
                ));
            }

            // Vertical-sector evolution residuals and the envelope/amplitude
            // constraint pair at five interior parameter samples.  Both
            // derivative routes must hold the contract: the exact route is
            // the family's own closed forms; the value-stencil route is the
            // independent check (measured 2.2e-9, floor-limited).
            let grid = GridSpec::new(
                AxisSpec::new(-0.4, 0.4, 3),
                AxisSpec::new(-0.4, 0.4, 3),
                AxisSpec::new(-0.4, 0.4, 3),
            );
            let chis: Vec<f64> = (0..5).map(|k| (k as f64 + 0.5) / 5.0).collect();
            for mode in [DiffMode::ExactPreferred, DiffMode::ValueFd] {
                let report = SuiteRunner::for_family(&family, grid.clone(), mode, chis.clone())
                    .map_err(|e| e.to_string())?
                    .run(&[
                        SuiteRequest::new(Suite::Evolution),
                        SuiteRequest::new(Suite::FlowConstraints),
                    ])
                    .map_err(|e| e.to_string())?;
                let ev = &report.suites[0];
                let fc = &report.suites[1];
                let checks = [
                    ("vertical evolution (h4)", ev.component_max[2]),
                    ("vertical evolution (h5)", ev.component_max[3]),
                    ("envelope constraint", fc.component_max[4]),
                    ("amplitude constraint", fc.component_max[5]),
                ];
                for (what, value) in checks {
                    let value = value.ok_or_else(|| format!("{what} not reported"))?;
                    if value > tolerances::FLOW_CONSTRAINT_TOL {
                        return Err(format!(
                            "λ = {lambda}, {mode:?}: {what} = {value:.3e} > {:.1e}",
                            tolerances::FLOW_CONSTRAINT_TOL
                        ));
                    }
                }
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 6. Deformed-horizon root finding against the first-order formula
// ---------------------------------------------------------------------------

#[test]
fn acceptance_06_horizon_quadratic_deviation() {
    criterion(6, "horizon root deviates quadratically from the formula", Duration::from_secs(5), || {
        let sweep = |eps: f64| -> Result<f64, String> {
            let params = RotoidParams {
                mu: 1.0,
                epsilon: eps,
                term: RotoidTerm::Sinusoid { q0: 1.0, omega0: 1.0, theta0: 0.0 },
            };
            let mut worst = 0.0_f64;
            for j in 0..360 {
                let phi = 2.0 * std::f64::consts::PI * (j as f64) / 360.0;
                let solved = params.solved_root(phi).map_err(|e| e.to_string())?;
                worst = worst.max((solved - params.linearized_root(phi)).abs());
            }
            Ok(worst)
        };

        let mut ks = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let dev = sweep(eps)?;
            if dev > ROTOID_K * eps * eps {
                return Err(format!(
                    "ε = {eps:.0e}: deviation {dev:.3e} above K·ε² = {:.3e}",
                    ROTOID_K * eps * eps
                ));
            }
            ks.push(dev / (eps * eps));
        }
        let (k_min, k_max) = ks.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &k| {
            (lo.min(k), hi.max(k))
        });
        if k_max / k_min > 4.0 {
            return Err(format!("K unstable across the sweep: {ks:?}"));
        }

        // Undeformed limit: the root matches the bare radius exactly.
        let bare = RotoidParams {
            mu: 1.0,
            epsilon: 0.0,
            term: RotoidTerm::Sinusoid { q0: 1.0, omega0: 1.0, theta0: 0.0 },
        };
        for j in 0..360 {
            let phi = 2.0 * std::f64::consts::PI * (j as f64) / 360.0;
            let solved = bare.solved_root(phi).map_err(|e| e.to_string())?;
            if (solved - 2.0).abs() > tolerances::EXACT_IDENTITY {
                return Err(format!("ε = 0 root at φ = {phi}: {solved} ≠ 2μ"));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 7. Extra-dimension background and its quadrature cross-checks
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_extradim_duality_and_quadratures() {
    criterion(7, "extra-dimension background verifies; quadratures match brute force", Duration::from_secs(60), || {
        let f = ScalarField::constant(2.0)
            .add(&ScalarField::v().sech().powi(2).mul(&ScalarField::constant(0.5)));
        let inv_sigma0 = ScalarField::one().add(
            &ScalarField::x2().sin().mul(&ScalarField::x3().cos()).mul(&ScalarField::constant(0.1)),
        );
        let pipe = ExtradimPipeline {
            f: f.clone(),
            f0: 1.0,
            h0: 2.0,
            eps4: -1.0,
            lambda_h: std::f64::consts::SQRT_2,
            inv_sigma0,
            v_base: 0.3,
            b: 1.0,
        };
        let sol = pipe.build().map_err(|e| e.to_string())?;
        let expected_lambda = -0.5 * std::f64::consts::SQRT_2.powi(2);
        if (sol.lambda - expected_lambda).abs() > f64::EPSILON {
            return Err(format!("λ = {} ≠ −λ_h²/2", sol.lambda));
        }

        // Reduced residuals on the off-degenerate window (the generating
        // profile's v-derivative vanishes at v = 0, so the window sits on
        // one side of that plane).
        let grid = GridSpec::new(
            AxisSpec::new(-0.3, 0.3, 9),
            AxisSpec::new(-0.3, 0.3, 9),
            AxisSpec::new(0.7, 1.6, 9),
        );
        let report = SuiteRunner::for_metric(&sol.metric, grid, sol.lambda, DiffMode::ValueFd)
            .run(&[SuiteRequest::new(Suite::Reduced).with_tolerance(EXTRADIM_ENVELOPE)])
            .map_err(|e| e.to_string())?;
        if !report.pass {
            return Err(format!(
                "reduced max {:.3e} above envelope {EXTRADIM_ENVELOPE:.1e}",
                report.suites[0].max_norm
            ));
        }

        // Running-polarisation integral: adaptive quadrature vs a
        // million-panel midpoint oracle.
        let f_star = f.partial(Axis::V).ok_or("profile must expose exact derivatives")?;
        let integrand = f.sub(&ScalarField::constant(1.0)).mul(&f_star);
        let running = RunningIntegral::along_v(integrand.clone(), 0.3);
        for v in [0.8, 1.3] {
            let p = ChartPoint::new(0.1, -0.2, v);
            let adaptive = running.eval(&p);
            let brute = riemann_midpoint(
                &|vv| integrand.eval(&ChartPoint::new(0.1, -0.2, vv)),
                0.3,
                v,
                1_000_000,
            );
            if (adaptive - brute).abs() > tolerances::QUAD_CROSS_CHECK {
                return Err(format!(
                    "running integral at v = {v}: |adaptive − brute| = {:.3e}",
                    (adaptive - brute).abs()
                ));
            }
        }

        // Frame-coefficient quadrature of the string background against the
        // same brute-force oracle.
        let ssol = string_solution();
        let (h4, h5) = (ssol.metric.h4.clone(), ssol.metric.h5.clone());
        let frame_integrand = move |v: f64| {
            let p = ChartPoint::new(0.2, -0.1, v);
            h4.eval(&p).abs() * h5.eval(&p).abs().powf(-1.5)
        };
        for v in [0.5, -0.35] {
            let oracle = 0.3 + 0.4 * riemann_midpoint(&frame_integrand, 0.0, v, 1_000_000);
            let built = ssol.metric.n[0].eval(&ChartPoint::new(0.2, -0.1, v));
            if (built - oracle).abs() > tolerances::QUAD_CROSS_CHECK {
                return Err(format!(
                    "frame coefficient at v = {v}: |built − oracle| = {:.3e}",
                    (built - oracle).abs()
                ));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 8. Poisson recovery and adaptive-quadrature oracles
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_poisson_and_quadrature_infrastructure() {
    criterion(8, "Poisson solver and adaptive quadratures match oracles", Duration::from_secs(30), || {
        // x³ − 3xy² is harmonic and cubic, so the five-point stencil is
        // exact on it: any interior error is pure solver error.
        let cubic = parse_field("x2^3 - 3*x2*x3^2").map_err(|e| e.to_string())?;
        let grid = solve_dirichlet(
            &AxisSpec::new(-1.0, 1.0, 65),
            &AxisSpec::new(-1.0, 1.0, 65),
            &ScalarField::zero(),
            &cubic,
        )
        .map_err(|e| e.to_string())?;
        let mut worst = 0.0_f64;
        for ix in 1..64 {
            for iy in 1..64 {
                let p = ChartPoint::new(grid.x(ix), grid.y(iy), 0.0);
                worst = worst.max((grid.value(ix, iy) - cubic.eval(&p)).abs());
            }
        }
        if worst > POISSON_TOL {
            return Err(format!("interior max error {worst:.3e} > {POISSON_TOL:.1e}"));
        }

        // Adaptive quadrature vs million-panel midpoint oracles on a
        // smooth bump, an oscillatory-growing integrand, and the kink-like
        // shape the pipelines integrate.
        let cfg = QuadratureConfig::default();
        let cases: [(&str, Box<dyn Fn(f64) -> f64>, f64, f64); 3] = [
            ("gaussian bump", Box::new(|x: f64| (-x * x).exp()), -2.0, 2.0),
            ("oscillatory", Box::new(|x: f64| (5.0 * x).sin() * x.cosh()), 0.0, 3.0),
            ("kink shape", Box::new(|x: f64| x.tanh() / x.cosh()), -1.0, 4.0),
        ];
        for (name, f, lo, hi) in cases {
            let adaptive = integrate(&f, lo, hi, &cfg).map_err(|e| e.to_string())?;
            let brute = riemann_midpoint(&f, lo, hi, 1_000_000);
            if (adaptive - brute).abs() > tolerances::QUAD_CROSS_CHECK {
                return Err(format!(
                    "{name}: |adaptive − brute| = {:.3e} > {:.1e}",
                    (adaptive - brute).abs(),
                    tolerances::QUAD_CROSS_CHECK
                ));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// 9. Transform algebra: invariance, round-trip, order, sensitivity
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_transform_algebra() {
    criterion(9, "transform algebra invariants hold", Duration::from_secs(10), || {
        let metric = vacuum_solution().metric;

        // Identity deformation changes nothing, pointwise, at 100
        // deterministic pseudo-random points.
        let identity = PolarizationSet::identity(0.0);
        let same = apply_polarizations(&metric, &identity)
            .map_err(|e| e.to_string())?
            .into_inner();
        for p in sample_points(100, 41) {
            for (a, b) in [
                (metric.g2.eval(&p), same.g2.eval(&p)),
                (metric.g3.eval(&p), same.g3.eval(&p)),
                (metric.h4.eval(&p), same.h4.eval(&p)),
                (metric.h5.eval(&p), same.h5.eval(&p)),
                (metric.w[0].eval(&p), same.w[0].eval(&p)),
                (metric.n[1].eval(&p), same.n[1].eval(&p)),
            ] {
                if a != b {
                    return Err(format!("identity deformation moved a value: {a} → {b}"));
                }
            }
        }

        // Conformal round-trip: rescale by f, then by 1/f; blocks must
        // return to their original values.
        let f = parse_field("1.5 + 0.4*cos(x2)*sin(x3)").map_err(|e| e.to_string())?;
        let mut fwd = PolarizationSet::identity(0.0);
        fwd.g2 = f.clone();
        let mut back = PolarizationSet::identity(0.0);
        back.g2 = ScalarField::one().div(&f);
        let round = conformal_renormalize(
            &conformal_renormalize(&metric, &fwd).map_err(|e| e.to_string())?.into_inner(),
            &back,
        )
        .map_err(|e| e.to_string())?
        .into_inner();
        for p in sample_points(100, 59) {
            for (a, b) in [
                (metric.g2.eval(&p), round.g2.eval(&p)),
                (metric.h5.eval(&p), round.h5.eval(&p)),
            ] {
                if (a - b).abs() > tolerances::EXACT_IDENTITY * a.abs().max(1.0) {
                    return Err(format!("conformal round-trip drifted: {a} vs {b}"));
                }
            }
        }

        // Two-parameter composition is order-sensitive: an explicit witness.
        let mut a = PolarizationSet::identity(0.0);
        a.g2 = ScalarField::constant(2.0);
        let mut b = PolarizationSet::identity(0.0);
        b.g2 = ScalarField::constant(3.0);
        let p = ChartPoint::new(0.2, 0.3, 0.1);
        let ab = compose_two_parameter(&a, &b).g2.eval(&p);
        let ba = compose_two_parameter(&b, &a).g2.eval(&p);
        if ab == ba {
            return Err("composition unexpectedly commuted on the witness".to_string());
        }

        // Sensitivity: a small multiplicative defect on the first vertical
        // block must push the vertical residual far above the clean
        // finite-difference envelope.
        let grid = GridSpec::new(
            AxisSpec::new(-0.4, 0.4, 3),
            AxisSpec::new(-0.4, 0.4, 3),
            AxisSpec::new(-0.4, 0.4, 3),
        );
        let request = [SuiteRequest::new(Suite::Reduced)];
        let clean = SuiteRunner::for_metric(&metric, grid.clone(), 0.0, DiffMode::ValueFd)
            .run(&request)
            .map_err(|e| e.to_string())?;
        let clean_rv = clean.suites[0].component_max[1].ok_or("clean r_v missing")?;
        if clean_rv > RV_FD_ENVELOPE {
            return Err(format!(
                "clean vertical residual {clean_rv:.3e} already above the pinned envelope"
            ));
        }
        let mut defect = PolarizationSet::identity(0.0);
        defect.h4 = parse_field("1 + 1e-3*v").map_err(|e| e.to_string())?;
        let warped = apply_polarizations(&metric, &defect)
            .map_err(|e| e.to_string())?
            .into_inner();
        let bad = SuiteRunner::for_metric(&warped, grid, 0.0, DiffMode::ValueFd)
            .run(&request)
            .map_err(|e| e.to_string())?;
        let bad_rv = bad.suites[0].component_max[1].ok_or("perturbed r_v missing")?;
        gate(
            bad_rv > tolerances::SENSITIVITY_FACTOR * RV_FD_ENVELOPE,
            format!(
                "perturbed r_v = {bad_rv:.3e} not above {} × envelope {RV_FD_ENVELOPE:.1e}",
                tolerances::SENSITIVITY_FACTOR
            ),
        )
    });
}

// ---------------------------------------------------------------------------
// 10. Report reproducibility and the exit-code contract
// ---------------------------------------------------------------------------

fn write_scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn acceptance_10_reproducibility_and_exit_codes() {
    criterion(10, "reports reproduce byte-for-byte; exit codes honored", Duration::from_secs(10), || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let scenario = write_scenario(
            dir.path(),
            "repro.json",
            r#"{
                "name": "repro",
                "builder": {"id": "vacuum.pp-soliton"},
                "grid": {
                    "x2": {"lo": -0.4, "hi": 0.4, "count": 3},
                    "x3": {"lo": -0.4, "hi": 0.4, "count": 3},
                    "v":  {"lo": -0.4, "hi": 0.4, "count": 3}
                },
                "suites": ["reduced", "lc"],
                "tolerances": {"reduced": 1e-6, "lc": 1e-6}
            }"#,
        );
        let run = |out: &Path| -> Result<i32, String> {
            let output = Command::new(env!("CARGO_BIN_EXE_forge"))
                .arg("run")
                .arg(&scenario)
                .arg("--out-dir")
                .arg(out)
                .output()
                .map_err(|e| e.to_string())?;
            output.status.code().ok_or("no exit code".to_string())
        };

        let (dir_a, dir_b) = (dir.path().join("a"), dir.path().join("b"));
        if run(&dir_a)? != 0 {
            return Err("passing scenario must exit 0".to_string());
        }
        if run(&dir_b)? != 0 {
            return Err("second run must exit 0".to_string());
        }
        let json_a = std::fs::read(dir_a.join("repro.report.json")).map_err(|e| e.to_string())?;
        let json_b = std::fs::read(dir_b.join("repro.report.json")).map_err(|e| e.to_string())?;
        if json_a != json_b {
            return Err("reports differ between identical runs".to_string());
        }
        let csv_a = std::fs::read(dir_a.join("repro.report.csv")).map_err(|e| e.to_string())?;
        let csv_b = std::fs::read(dir_b.join("repro.report.csv")).map_err(|e| e.to_string())?;
        if csv_a != csv_b {
            return Err("CSV tables differ between identical runs".to_string());
        }

        // Suite failure: an impossible tolerance must exit 1 and still
        // write the report.
        let failing = write_scenario(
            dir.path(),
            "failing.json",
            r#"{
                "name": "failing",
                "builder": {"id": "vacuum.pp-soliton"},
                "suites": ["reduced"],
                "tolerances": {"reduced": 1e-300}
            }"#,
        );
        let out = Command::new(env!("CARGO_BIN_EXE_forge"))
            .arg("run")
            .arg(&failing)
            .arg("--out-dir")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.code() != Some(1) {
            return Err(format!("failing suite must exit 1, got {:?}", out.status.code()));
        }
        if !dir.path().join("failing.report.json").exists() {
            return Err("failing run must still write its report".to_string());
        }

        // Infrastructure errors: unreadable scenario and unknown catalog id.
        let missing = Command::new(env!("CARGO_BIN_EXE_forge"))
            .arg("run")
            .arg(dir.path().join("does-not-exist.json"))
            .output()
            .map_err(|e| e.to_string())?;
        if missing.status.code() != Some(2) {
            return Err(format!("missing scenario must exit 2, got {:?}", missing.status.code()));
        }
        let typo = write_scenario(
            dir.path(),
            "typo.json",
            r#"{"name": "typo", "builder": {"id": "pp.plain"}}"#,
        );
        let out = Command::new(env!("CARGO_BIN_EXE_forge"))
            .arg("run")
            .arg(&typo)
            .output()
            .map_err(|e| e.to_string())?;
        gate(
            out.status.code() == Some(2),
            format!("bad catalog id must exit 2, got {:?}", out.status.code()),
        )
    });
}
