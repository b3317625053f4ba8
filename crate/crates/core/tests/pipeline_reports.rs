//! End-to-end verification of the generator pipelines through the public
//! report runner: build a background with one module, verify it with
//! another, and check that the finite-difference verification route
//! behaves like a fourth-order method (so that a *passing* report is
//! evidence about the solution, not about the step size).

use forge_core::chart::{AxisSpec, ChartPoint, GridSpec};
use forge_core::diff::DiffMode;
use forge_core::expr::parse_field;
use forge_core::field::ScalarField;
use forge_core::generators::{sine_gordon_kink, ExtradimPipeline, StringPipeline, VacuumPipeline};
use forge_core::quad::simpson_composite;
use forge_core::report::{Suite, SuiteRequest, SuiteRunner};
use forge_core::transforms::{apply_polarizations, PolarizationSet};

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

#[test]
fn string_background_reduced_residuals_shrink_at_fourth_order() {
    let sol = string_solution();
    // Window where the generating kink is active: the vertical block decays
    // exponentially outside it and the residual quotients lose conditioning.
    let grid = GridSpec::new(
        AxisSpec::new(-0.3, 0.3, 2),
        AxisSpec::new(-0.3, 0.3, 2),
        AxisSpec::new(-0.4, 0.4, 3),
    );
    let runner = SuiteRunner::for_metric(&sol.metric, grid, sol.lambda, DiffMode::ValueFd);
    // On this window the truncation constants are small (measured max norm
    // ≈ 2·10⁻⁹ at a relative step of 4·10⁻³), so finer steps would sink
    // into the second-difference roundoff floor (≈ 10⁻¹⁰ here); the sweep
    // stays coarse enough that truncation dominates every entry.
    let table = runner
        .convergence_sweep(Suite::Reduced, &[3.2e-2, 1.6e-2, 8e-3])
        .unwrap();
    let order = table.fitted_order.expect("fit must succeed");
    assert!(
        order >= 3.5,
        "verification stencils must be 4th order; fitted {order:.2}, entries {:?}",
        table.entries
    );
    // The finest step's norm is the working envelope of this scenario.
    assert!(table.entries[2].max_norm < 1e-4);
}

#[test]
fn vacuum_background_passes_and_a_seeded_defect_is_flagged() {
    let sol = vacuum_solution();
    let grid = GridSpec::new(
        AxisSpec::new(-0.4, 0.4, 3),
        AxisSpec::new(-0.4, 0.4, 3),
        AxisSpec::new(-0.4, 0.4, 3),
    );
    let requests = [
        SuiteRequest::new(Suite::Reduced).with_tolerance(1e-6),
        SuiteRequest::new(Suite::Lc).with_tolerance(1e-6),
    ];
    let clean = SuiteRunner::for_metric(&sol.metric, grid.clone(), sol.lambda, DiffMode::ValueFd)
        .run(&requests)
        .unwrap();
    assert!(clean.pass, "clean background must verify");
    let clean_vertical = clean.suites[0].component_max[1].unwrap();

    // Deform the vertical block by a factor 1 + 10⁻³·v and re-verify: the
    // vertical residual must rise far above the clean envelope.
    let mut pol = PolarizationSet::identity(0.0);
    pol.h4 = parse_field("1 + 1e-3*v").unwrap();
    let warped = apply_polarizations(&sol.metric, &pol).unwrap().candidate().clone();
    let report = SuiteRunner::for_metric(&warped, grid, sol.lambda, DiffMode::ValueFd)
        .run(&requests)
        .unwrap();
    assert!(!report.pass, "the seeded defect must fail verification");
    let defect_vertical = report.suites[0].component_max[1].unwrap();
    assert!(
        defect_vertical > 10.0 * clean_vertical.max(1e-8),
        "defect {defect_vertical:.3e} vs clean {clean_vertical:.3e}"
    );
}

#[test]
fn extradim_background_verifies_away_from_the_degenerate_plane() {
    // The generating function's v-derivative vanishes at v = 0, so the
    // verification window sits on one side of it.
    let f = ScalarField::constant(2.0)
        .add(&ScalarField::v().sech().powi(2).mul(&ScalarField::constant(0.5)));
    let inv_sigma0 = ScalarField::one().add(
        &ScalarField::x2()
            .sin()
            .mul(&ScalarField::x3().cos())
            .mul(&ScalarField::constant(0.1)),
    );
    let pipe = ExtradimPipeline {
        f,
        f0: 1.0,
        h0: 2.0,
        eps4: -1.0,
        lambda_h: std::f64::consts::SQRT_2,
        inv_sigma0,
        v_base: 0.3,
        b: 1.0,
    };
    let sol = pipe.build().unwrap();
    let grid = GridSpec::new(
        AxisSpec::new(-0.3, 0.3, 3),
        AxisSpec::new(-0.3, 0.3, 3),
        AxisSpec::new(0.7, 1.6, 3),
    );
    let report = SuiteRunner::for_metric(&sol.metric, grid, sol.lambda, DiffMode::ValueFd)
        .run(&[SuiteRequest::new(Suite::Reduced).with_tolerance(1e-5)])
        .unwrap();
    assert!(
        report.pass,
        "max norm {:.3e}",
        report.suites[0].max_norm
    );
}

#[test]
fn quadrature_backed_frame_coefficients_match_a_composite_oracle() {
    // The string pipeline's n-coefficients are running v-quadratures of
    // |h₄| |h₅|^{−3/2}; recompute them with a plain composite Simpson rule
    // over many panels as an independent oracle.
    let sol = string_solution();
    let (n1, n_base) = ([0.4, 0.7], 0.0);
    let h4 = sol.metric.h4.clone();
    let h5 = sol.metric.h5.clone();
    let integrand =
        move |v: f64| -> f64 {
            let p = ChartPoint::new(0.2, -0.1, v);
            h4.eval(&p).abs() * h5.eval(&p).abs().powf(-1.5)
        };
    for (i, n0) in [(0usize, 0.3), (1usize, -0.2)] {
        for v in [0.5, -0.35] {
            let oracle = n0 + n1[i] * simpson_composite(&integrand, n_base, v, 20_001);
            let built = sol.metric.n[i].eval(&ChartPoint::new(0.2, -0.1, v));
            assert!(
                (built - oracle).abs() <= 1e-7,
                "n{i} at v={v}: built {built:.12e} vs oracle {oracle:.12e}"
            );
        }
    }
}
