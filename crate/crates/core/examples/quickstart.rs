//! Minimal library-use example: build a vacuum background and verify it.
//!
//! Run with `cargo run -p forge-core --example quickstart`.

use forge_core::chart::{AxisSpec, GridSpec};
use forge_core::diff::DiffMode;
use forge_core::expr::parse_field;
use forge_core::field::ScalarField;
use forge_core::generators::{sine_gordon_kink, VacuumPipeline};
use forge_core::report::{Suite, SuiteRequest, SuiteRunner};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let envelope = parse_field("1 + 0.2*x2^2")?;
    let solution =
        VacuumPipeline::new(envelope, sine_gordon_kink(0.3)?, ScalarField::one(), 2.0).build()?;
    let grid = GridSpec::new(
        AxisSpec::new(-0.4, 0.4, 5),
        AxisSpec::new(-0.4, 0.4, 5),
        AxisSpec::new(-0.4, 0.4, 5),
    );
    let report =
        SuiteRunner::for_metric(&solution.metric, grid, solution.lambda, DiffMode::ValueFd)
            .run(&[SuiteRequest::new(Suite::Reduced).with_tolerance(1e-6)])?;
    assert!(report.pass);
    println!(
        "vacuum background: reduced residual max {:.3e} (pass = {})",
        report.suites[0].max_norm, report.pass
    );
    Ok(())
}
