//! Orchestration: turn a validated [`Scenario`] into reports on disk.
//!
//! The run path is: build the catalog target (already done at load time),
//! apply the optional polarization deformation, lift static metrics into a
//! χ-family when a `flow` block is present, execute the requested suites
//! with value finite differences (the verifier never trusts the builder's
//! exact derivative routes), optionally run a convergence sweep, and emit
//! deterministic JSON/CSV.
//!
//! Verification always uses [`DiffMode::ValueFd`]: reports measure what
//! the coefficient *values* satisfy, independent of how the builder
//! represents them internally.

use std::path::{Path, PathBuf};

use forge_core::chart::AxisSpec;
use forge_core::diff::DiffMode;
use forge_core::flows::FlowFamily;
use forge_core::report::{ResidualReport, SuiteRunner};
use forge_core::transforms::apply_polarizations;

use crate::catalog::BuiltTarget;
use crate::emit::{self, Provenance};
use crate::scenario::{slug, Scenario};
use crate::{CliError, Outcome};

/// Flag overrides applied on top of a loaded scenario.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    /// Multiplies every grid axis point count (result floored at 1).
    pub grid_scale: Option<f64>,
    /// Replaces the finite-difference order (2 or 4).
    pub fd_order: Option<usize>,
    /// `suite=value` tolerance replacements.
    pub tolerances: Vec<(String, f64)>,
}

impl Overrides {
    /// Parse a repeated `--tol suite=value` flag.
    pub fn parse_tol(spec: &str) -> Result<(String, f64), CliError> {
        let (suite, value) = spec.split_once('=').ok_or_else(|| {
            CliError::config(format!("--tol expects suite=value, got {spec:?}"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::config(format!("--tol {spec:?}: {value:?} is not a number")))?;
        if !(value > 0.0) {
            return Err(CliError::config(format!(
                "--tol {spec:?}: tolerance must be positive"
            )));
        }
        Ok((suite.to_string(), value))
    }
}

/// Apply flag overrides to a loaded scenario.
pub fn apply_overrides(scenario: &mut Scenario, overrides: &Overrides) -> Result<(), CliError> {
    if let Some(scale) = overrides.grid_scale {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(CliError::config(format!(
                "--grid-scale must be positive and finite, got {scale}"
            )));
        }
        let rescale = |a: &AxisSpec| -> AxisSpec {
            let count = ((a.count as f64 * scale).round() as usize).max(1);
            let spec = AxisSpec::new(a.lo, a.hi, count);
            match a.derivative_scale {
                Some(s) => spec.with_scale(s),
                None => spec,
            }
        };
        scenario.grid.x2 = rescale(&scenario.grid.x2);
        scenario.grid.x3 = rescale(&scenario.grid.x3);
        scenario.grid.v = rescale(&scenario.grid.v);
    }
    if let Some(order) = overrides.fd_order {
        scenario.grid = scenario
            .grid
            .clone()
            .with_fd_order(order)
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    for (suite_id, tol) in &overrides.tolerances {
        let suite = forge_core::report::Suite::from_id(suite_id)
            .ok_or_else(|| CliError::config(format!("--tol names unknown suite {suite_id:?}")))?;
        let request = scenario
            .requests
            .iter_mut()
            .find(|r| r.suite == suite)
            .ok_or_else(|| {
                CliError::config(format!(
                    "--tol names suite {suite_id:?} which the scenario does not run"
                ))
            })?;
        *request = request.with_tolerance(*tol);
    }
    Ok(())
}

/// Everything a `forge run` produces.
pub struct RunProducts {
    pub report: ResidualReport,
    pub json: String,
    pub csv: String,
    pub summary: String,
    pub outcome: Outcome,
}

/// Tolerance on the λ agreement between a scenario's `flow` block and a
/// static builder being lifted: the lifted family evolves with the
/// builder's own normalisation constant, so the block must restate it
/// exactly (up to float parsing noise).
const LIFT_LAMBDA_TOL: f64 = 1e-12;

fn family_for_run(scenario: &Scenario) -> Result<Option<FlowFamily>, CliError> {
    match (&scenario.target, &scenario.flow) {
        (BuiltTarget::Family(family), _) => Ok(Some(family.clone())),
        (BuiltTarget::Metric { metric, lambda }, Some(flow)) => {
            if (flow.lambda - lambda).abs() > LIFT_LAMBDA_TOL {
                return Err(CliError::config(format!(
                    "flow.lambda = {} but builder {:?} fixes lambda = {}; a lifted static \
                     solution evolves with its own normalisation constant",
                    flow.lambda, scenario.builder_id, lambda
                )));
            }
            // h0 only scales the frame-rate constraint's w-term, which is
            // identically zero for a χ-independent lift; 1 is as good as any.
            let metric = polarized(scenario, metric)?;
            FlowFamily::from_metric(metric, *lambda, flow.chi0, 1.0)
                .map(Some)
                .map_err(|e| CliError::config(e.to_string()))
        }
        _ => Ok(None),
    }
}

fn polarized(
    scenario: &Scenario,
    metric: &forge_core::ansatz::AnsatzMetric,
) -> Result<forge_core::ansatz::AnsatzMetric, CliError> {
    match &scenario.polarization {
        None => Ok(metric.clone()),
        Some(pol) => {
            // Degenerate factors on the evaluation grid are configuration
            // errors, not suite failures: the deformed metric would not be
            // an ansatz metric at all.
            pol.check_nonvanishing(&scenario.grid.points())
                .map_err(|e| CliError::config(format!("polarize: {e}")))?;
            let candidate = apply_polarizations(metric, pol)
                .map_err(|e| CliError::config(format!("polarize: {e}")))?;
            // The whole run re-verifies the candidate, which is exactly the
            // contract the wrapper asks for.
            Ok(candidate.into_inner())
        }
    }
}

/// Execute the suites of a scenario.  Pure except for thread-pool use; all
/// file IO lives in [`write_run_products`].
pub fn execute_run(scenario: &Scenario) -> Result<RunProducts, CliError> {
    let (report, metric_name) = match &scenario.target {
        BuiltTarget::Field { description, .. } => {
            if !scenario.requests.is_empty() {
                return Err(CliError::config(format!(
                    "builder {:?} is a scalar field ({description}); residual suites need a \
                     metric or family builder",
                    scenario.builder_id
                )));
            }
            // Provenance-only report for a field target.
            let report = ResidualReport {
                metric_name: description.to_string(),
                lambda: 0.0,
                fd_step: scenario.grid.fd_step,
                fd_order: scenario.grid.fd_order,
                chi_samples: Vec::new(),
                suites: Vec::new(),
                convergence: Vec::new(),
                pass: true,
            };
            let name = report.metric_name.clone();
            (report, name)
        }
        BuiltTarget::Metric { metric, lambda } => {
            let runner = match family_for_run(scenario)? {
                Some(family) => SuiteRunner::for_family(
                    &family,
                    scenario.grid.clone(),
                    DiffMode::ValueFd,
                    scenario.flow.as_ref().expect("family implies flow").chi_samples(),
                )
                .map_err(|e| CliError::config(e.to_string()))?,
                None => {
                    let metric = polarized(scenario, metric)?;
                    SuiteRunner::for_metric(&metric, scenario.grid.clone(), *lambda, DiffMode::ValueFd)
                }
            };
            let mut report = runner
                .run(&scenario.requests)
                .map_err(|e| CliError::config(e.to_string()))?;
            if let Some(conv) = &scenario.convergence {
                let table = runner
                    .convergence_sweep(conv.suite, &conv.fd_steps)
                    .map_err(|e| CliError::config(format!("convergence sweep: {e}")))?;
                report.convergence.push(table);
            }
            let name = report.metric_name.clone();
            (report, name)
        }
        BuiltTarget::Family(_) => {
            let family = family_for_run(scenario)?.expect("family target");
            let flow = scenario
                .flow
                .as_ref()
                .ok_or_else(|| CliError::config("family builders need a `flow` block"))?;
            let runner = SuiteRunner::for_family(
                &family,
                scenario.grid.clone(),
                DiffMode::ValueFd,
                flow.chi_samples(),
            )
            .map_err(|e| CliError::config(e.to_string()))?;
            let mut report = runner
                .run(&scenario.requests)
                .map_err(|e| CliError::config(e.to_string()))?;
            if let Some(conv) = &scenario.convergence {
                let table = runner
                    .convergence_sweep(conv.suite, &conv.fd_steps)
                    .map_err(|e| CliError::config(format!("convergence sweep: {e}")))?;
                report.convergence.push(table);
            }
            let name = report.metric_name.clone();
            (report, name)
        }
    };

    let prov = Provenance {
        scenario_name: &scenario.name,
        scenario_sha256: &scenario.sha256,
        builder_id: &scenario.builder_id,
        metric_name: &metric_name,
    };
    let json = emit::report_json(&report, &prov, &scenario.grid);
    let csv = emit::report_csv(&report);
    let summary = summarize(scenario, &report);
    let outcome = if report.pass { Outcome::Pass } else { Outcome::SuiteFailure };
    Ok(RunProducts { report, json, csv, summary, outcome })
}

fn summarize(scenario: &Scenario, report: &ResidualReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario {} (builder {})\n",
        scenario.name, scenario.builder_id
    ));
    out.push_str(&format!("metric {}\n", report.metric_name));
    if report.suites.is_empty() {
        out.push_str("no suites requested: provenance-only report\n");
    }
    for s in &report.suites {
        let tol = match s.tolerance {
            Some(t) => format!("{t:.3e}"),
            None => "none".to_string(),
        };
        let verdict = if s.pass { "PASS" } else { "FAIL" };
        let errs = if s.errors.is_empty() {
            String::new()
        } else {
            format!(" ({} point errors)", s.errors.len())
        };
        out.push_str(&format!(
            "suite {}: max {:.3e} tol {} {}{}\n",
            s.suite.id(),
            s.max_norm,
            tol,
            verdict,
            errs
        ));
    }
    for t in &report.convergence {
        match t.fitted_order {
            Some(order) => out.push_str(&format!(
                "convergence {}: fitted order {:.2} over {} steps\n",
                t.suite.id(),
                order,
                t.entries.len()
            )),
            None => out.push_str(&format!(
                "convergence {}: no order fit ({} steps)\n",
                t.suite.id(),
                t.entries.len()
            )),
        }
    }
    out.push_str(if report.pass { "PASS\n" } else { "FAIL\n" });
    out
}

/// Resolve an output path: explicit scenario paths land inside `out_dir`
/// unless absolute; defaults derive from the scenario name.
fn resolve(out_dir: &Path, explicit: &Option<PathBuf>, default_name: String) -> PathBuf {
    match explicit {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => out_dir.join(p),
        None => out_dir.join(default_name),
    }
}

/// Write the JSON and CSV reports; returns the paths written.
pub fn write_run_products(
    scenario: &Scenario,
    products: &RunProducts,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::infra(format!("cannot create {}: {e}", out_dir.display())))?;
    let stem = slug(&scenario.name);
    let json_path = resolve(out_dir, &scenario.output_json, format!("{stem}.report.json"));
    let csv_path = resolve(out_dir, &scenario.output_csv, format!("{stem}.report.csv"));
    std::fs::write(&json_path, &products.json)
        .map_err(|e| CliError::infra(format!("cannot write {}: {e}", json_path.display())))?;
    std::fs::write(&csv_path, &products.csv)
        .map_err(|e| CliError::infra(format!("cannot write {}: {e}", csv_path.display())))?;
    Ok(vec![json_path, csv_path])
}

/// Execute `forge horizon`: the rotoid sweep tables.
pub struct HorizonProducts {
    pub table: String,
    pub companion: String,
    pub gaps: usize,
}

pub fn execute_horizon(scenario: &Scenario) -> Result<HorizonProducts, CliError> {
    let sweep = scenario.rotoid.as_ref().ok_or_else(|| {
        CliError::config("`forge horizon` needs a `rotoid` block in the scenario")
    })?;
    let rows = crate::horizon::sweep_rows(sweep)?;
    let gaps = rows.iter().filter(|r| r.root.is_none()).count();
    Ok(HorizonProducts {
        table: emit::horizon_csv(&rows),
        companion: emit::horizon_companion(&rows),
        gaps,
    })
}

/// Write the horizon tables; returns the paths written.
pub fn write_horizon_products(
    scenario: &Scenario,
    products: &HorizonProducts,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::infra(format!("cannot create {}: {e}", out_dir.display())))?;
    let stem = slug(&scenario.name);
    let table_path = resolve(out_dir, &scenario.output_csv, format!("{stem}.horizon.csv"));
    let companion_path = table_path.with_extension("dat");
    std::fs::write(&table_path, &products.table)
        .map_err(|e| CliError::infra(format!("cannot write {}: {e}", table_path.display())))?;
    std::fs::write(&companion_path, &products.companion)
        .map_err(|e| CliError::infra(format!("cannot write {}: {e}", companion_path.display())))?;
    Ok(vec![table_path, companion_path])
}
