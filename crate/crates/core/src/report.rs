//! Residual suite runner and the report data model.
//!
//! A *suite* is one named group of residuals evaluated over a sampling
//! grid: the reduced field-equation residuals, the Levi-Civita closure
//! constraints, the anholonomy diagnostics, the χ-evolution residuals, or
//! the first-order flow constraints.  The [`SuiteRunner`] walks a
//! [`GridSpec`] (optionally crossed with a list of χ-samples), evaluates
//! the requested suites at every point, and aggregates the results into a
//! [`ResidualReport`] with max / mean / rms norms, per-component maxima
//! and a pass verdict against per-suite tolerances.
//!
//! Reports are **deterministic**: points are generated in a fixed
//! lexicographic order, per-point work is farmed out with rayon but
//! collected back in index order, and every aggregate is reduced
//! sequentially over that order.  Two runs over the same inputs produce
//! bit-identical reports.
//!
//! Evaluation failures at individual points (kink guards, degenerate
//! coefficients, stencil violations) do not abort the run; they are
//! recorded per point in [`SuiteOutcome::errors`] and fail the suite, so
//! a report always states what was checked and what could not be.

use rayon::prelude::*;

use crate::ansatz::AnsatzMetric;
use crate::chart::{ChartPoint, GridSpec};
use crate::convergence::fit_order;
use crate::dcalculus::{ResidualCtx, ResidualEvaluator};
use crate::diff::{DiffMode, Differentiator};
use crate::error::{ForgeError, Result};
use crate::flows::FlowFamily;

/// The residual suites a run can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    /// Reduced field-equation residuals (horizontal, vertical, mixing).
    Reduced,
    /// Levi-Civita (torsion-free) closure constraints.
    Lc,
    /// Anholonomy diagnostics of the frame coefficients.
    Anholonomy,
    /// χ-evolution residuals of the four blocks.
    Evolution,
    /// First-order flow constraints of a χ-family.
    FlowConstraints,
}

impl Suite {
    /// All suites in canonical report order.
    pub const ALL: [Suite; 5] = [
        Suite::Reduced,
        Suite::Lc,
        Suite::Anholonomy,
        Suite::Evolution,
        Suite::FlowConstraints,
    ];

    /// Stable identifier used in configuration files and reports.
    pub fn id(self) -> &'static str {
        match self {
            Suite::Reduced => "reduced",
            Suite::Lc => "lc",
            Suite::Anholonomy => "anholonomy",
            Suite::Evolution => "evolution",
            Suite::FlowConstraints => "flow-constraints",
        }
    }

    /// Parse a suite identifier.
    pub fn from_id(id: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.id() == id)
    }

    /// Labels of the residual components, in row order.
    pub fn component_labels(self) -> &'static [&'static str] {
        match self {
            Suite::Reduced => &[
                "r_horizontal",
                "r_vertical",
                "r_mixing_w2",
                "r_mixing_w3",
                "r_mixing_n2",
                "r_mixing_n3",
            ],
            Suite::Lc => &[
                "c_horizontal_trace",
                "c_vertical_closure",
                "c_w_curl",
                "c_n_curl",
                "c_w_gradient2",
                "c_w_gradient3",
            ],
            Suite::Anholonomy => &["dv_w2", "dv_w3", "dv_n2", "dv_n3", "omega_v", "omega_y"],
            Suite::Evolution => &["e_horizontal2", "e_horizontal3", "e_vertical4", "e_vertical5"],
            Suite::FlowConstraints => &[
                "drift2",
                "drift3",
                "balance2",
                "balance3",
                "envelope_ode",
                "amplitude_ode",
            ],
        }
    }
}

/// One evaluated grid point of one suite.
///
/// `components` is aligned with [`Suite::component_labels`]; entries are
/// `None` where a constraint is undefined at the point (e.g. the
/// w-gradient quotient where the generating derivative vanishes).
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub point: ChartPoint,
    pub components: Vec<Option<f64>>,
    /// Max-abs over the present components.
    pub norm: f64,
}

/// A point whose evaluation failed, with the failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub point: ChartPoint,
    pub message: String,
}

/// Request one suite, optionally gated by a tolerance on its max norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteRequest {
    pub suite: Suite,
    pub tolerance: Option<f64>,
}

impl SuiteRequest {
    pub fn new(suite: Suite) -> Self {
        SuiteRequest { suite, tolerance: None }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }
}

/// Aggregated result of one suite over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub tolerance: Option<f64>,
    pub rows: Vec<PointRecord>,
    pub errors: Vec<PointFailure>,
    /// Max of the row norms.
    pub max_norm: f64,
    /// Mean of the row norms.
    pub mean_norm: f64,
    /// Root-mean-square of the row norms.
    pub rms_norm: f64,
    /// Per-component max-abs across rows (`None`: absent at every point).
    pub component_max: Vec<Option<f64>>,
    /// True iff no point failed and the max norm meets the tolerance
    /// (suites without a tolerance are informational and pass unless a
    /// point failed to evaluate).
    pub pass: bool,
}

/// One step of a convergence sweep: relative step vs suite max norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceEntry {
    pub fd_step: f64,
    pub max_norm: f64,
}

/// Convergence table of a suite under fd-step refinement, with the fitted
/// order of the max norm (absent when the fit is impossible, e.g. exact
/// zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub suite: Suite,
    pub entries: Vec<ConvergenceEntry>,
    pub fitted_order: Option<f64>,
    pub fit_constant: Option<f64>,
}

/// Full result of a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub metric_name: String,
    pub lambda: f64,
    pub fd_step: f64,
    pub fd_order: usize,
    pub chi_samples: Vec<f64>,
    pub suites: Vec<SuiteOutcome>,
    pub convergence: Vec<ConvergenceTable>,
    /// All requested suites passed.
    pub pass: bool,
}

/// Runs residual suites for one metric (or flow family) over a grid.
pub struct SuiteRunner {
    metric: AnsatzMetric,
    family: Option<FlowFamily>,
    grid: GridSpec,
    lambda: f64,
    mode: DiffMode,
    chi_samples: Vec<f64>,
}

impl SuiteRunner {
    /// Runner for a static metric (evaluated at χ = 0).
    pub fn for_metric(metric: &AnsatzMetric, grid: GridSpec, lambda: f64, mode: DiffMode) -> Self {
        SuiteRunner {
            metric: metric.clone(),
            family: None,
            grid,
            lambda,
            mode,
            chi_samples: vec![0.0],
        }
    }

    /// Runner for a flow family: the grid is crossed with the χ-samples,
    /// which must lie inside the family range.
    pub fn for_family(
        family: &FlowFamily,
        grid: GridSpec,
        mode: DiffMode,
        chi_samples: Vec<f64>,
    ) -> Result<Self> {
        if chi_samples.is_empty() {
            return Err(ForgeError::InvalidConfig(
                "a flow run needs at least one chi sample".into(),
            ));
        }
        for &chi in &chi_samples {
            if !(0.0..=family.chi0).contains(&chi) {
                return Err(ForgeError::InvalidConfig(format!(
                    "chi sample {chi} outside family range [0, {}]",
                    family.chi0
                )));
            }
        }
        Ok(SuiteRunner {
            metric: family.metric.clone(),
            family: Some(family.clone()),
            grid,
            lambda: family.lambda,
            mode,
            chi_samples,
        })
    }

    /// Evaluation points: χ-major, then the grid's lexicographic order.
    fn eval_points(&self) -> Vec<ChartPoint> {
        let base = self.grid.points();
        let mut out = Vec::with_capacity(base.len() * self.chi_samples.len());
        for &chi in &self.chi_samples {
            out.extend(base.iter().map(|p| p.at_chi(chi)));
        }
        out
    }

    /// Execute the requested suites and aggregate a report.
    pub fn run(&self, requests: &[SuiteRequest]) -> Result<ResidualReport> {
        if requests.iter().any(|r| r.suite == Suite::FlowConstraints) && self.family.is_none() {
            return Err(ForgeError::InvalidConfig(
                "the flow-constraints suite needs a flow family, not a static metric".into(),
            ));
        }
        let diff = Differentiator::for_grid(&self.grid, self.mode);
        let evaluator =
            ResidualEvaluator::new(&self.metric, ResidualCtx::new(diff.clone(), self.lambda));
        let points = self.eval_points();

        let mut suites = Vec::with_capacity(requests.len());
        for request in requests {
            suites.push(self.run_suite(&evaluator, &diff, &points, *request));
        }
        let pass = suites.iter().all(|s| s.pass);
        Ok(ResidualReport {
            metric_name: self.metric.name.clone(),
            lambda: self.lambda,
            fd_step: self.grid.fd_step,
            fd_order: self.grid.fd_order,
            chi_samples: self.chi_samples.clone(),
            suites,
            convergence: Vec::new(),
            pass,
        })
    }

    fn run_suite(
        &self,
        evaluator: &ResidualEvaluator,
        diff: &Differentiator,
        points: &[ChartPoint],
        request: SuiteRequest,
    ) -> SuiteOutcome {
        let results: Vec<std::result::Result<PointRecord, PointFailure>> = points
            .par_iter()
            .map(|p| {
                self.record(evaluator, diff, request.suite, p)
                    .map_err(|e| PointFailure { point: *p, message: e.to_string() })
            })
            .collect();

        let n_components = request.suite.component_labels().len();
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for r in results {
            match r {
                Ok(row) => rows.push(row),
                Err(f) => errors.push(f),
            }
        }

        let mut max_norm: f64 = 0.0;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut component_max: Vec<Option<f64>> = vec![None; n_components];
        for row in &rows {
            max_norm = max_norm.max(row.norm);
            sum += row.norm;
            sum_sq += row.norm * row.norm;
            for (slot, value) in component_max.iter_mut().zip(&row.components) {
                if let Some(v) = value {
                    let cur = slot.unwrap_or(0.0);
                    *slot = Some(cur.max(v.abs()));
                }
            }
        }
        let count = rows.len().max(1) as f64;
        let mean_norm = if rows.is_empty() { 0.0 } else { sum / count };
        let rms_norm = if rows.is_empty() { 0.0 } else { (sum_sq / count).sqrt() };
        let pass = errors.is_empty() && request.tolerance.map_or(true, |t| max_norm <= t);

        SuiteOutcome {
            suite: request.suite,
            tolerance: request.tolerance,
            rows,
            errors,
            max_norm,
            mean_norm,
            rms_norm,
            component_max,
            pass,
        }
    }

    fn record(
        &self,
        evaluator: &ResidualEvaluator,
        diff: &Differentiator,
        suite: Suite,
        p: &ChartPoint,
    ) -> Result<PointRecord> {
        let components: Vec<Option<f64>> = match suite {
            Suite::Reduced => {
                let r = evaluator.reduced_at(p)?;
                vec![
                    Some(r.horizontal),
                    Some(r.vertical),
                    Some(r.mixing_w[0]),
                    Some(r.mixing_w[1]),
                    Some(r.mixing_n[0]),
                    Some(r.mixing_n[1]),
                ]
            }
            Suite::Lc => {
                let c = evaluator.lc_at(p, None)?;
                vec![
                    Some(c.horizontal_trace),
                    Some(c.vertical_closure),
                    Some(c.w_curl),
                    Some(c.n_curl),
                    c.w_gradient[0],
                    c.w_gradient[1],
                ]
            }
            Suite::Anholonomy => {
                let a = evaluator.anholonomy_at(p)?;
                vec![
                    Some(a.dv_w[0]),
                    Some(a.dv_w[1]),
                    Some(a.dv_n[0]),
                    Some(a.dv_n[1]),
                    Some(a.curvature_v),
                    Some(a.curvature_y),
                ]
            }
            Suite::Evolution => {
                let e = evaluator.evolution_at(p)?;
                vec![
                    Some(e.horizontal[0]),
                    Some(e.horizontal[1]),
                    Some(e.vertical[0]),
                    Some(e.vertical[1]),
                ]
            }
            Suite::FlowConstraints => {
                // Presence of the family is checked in `run`.
                let family = self.family.as_ref().expect("family checked in run()");
                let f = family.constraint_residuals_at(diff, p)?;
                vec![
                    Some(f.horizontal_drift[0]),
                    Some(f.horizontal_drift[1]),
                    Some(f.frame_rate_balance[0]),
                    Some(f.frame_rate_balance[1]),
                    f.envelope_ode,
                    f.amplitude_ode,
                ]
            }
        };
        let norm = components
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(PointRecord { point: *p, components, norm })
    }

    /// Measure how a suite's max norm scales with the relative fd step.
    ///
    /// The sweep always uses pure value stencils (that is what refines with
    /// the step) and fails on the first evaluation error: a convergence
    /// measurement over a partially evaluable grid would be meaningless.
    pub fn convergence_sweep(&self, suite: Suite, fd_steps: &[f64]) -> Result<ConvergenceTable> {
        if suite == Suite::FlowConstraints && self.family.is_none() {
            return Err(ForgeError::InvalidConfig(
                "the flow-constraints suite needs a flow family, not a static metric".into(),
            ));
        }
        let points = self.eval_points();
        let mut entries = Vec::with_capacity(fd_steps.len());
        for &h in fd_steps {
            let mut grid = self.grid.clone();
            grid.fd_step = h;
            let diff = Differentiator::for_grid(&grid, DiffMode::ValueFd);
            let evaluator =
                ResidualEvaluator::new(&self.metric, ResidualCtx::new(diff.clone(), self.lambda));
            let norms: Vec<f64> = points
                .par_iter()
                .map(|p| self.record(&evaluator, &diff, suite, p).map(|r| r.norm))
                .collect::<Result<Vec<f64>>>()?;
            let max_norm = norms.into_iter().fold(0.0f64, f64::max);
            entries.push(ConvergenceEntry { fd_step: h, max_norm });
        }
        let fit = fit_order(
            &entries
                .iter()
                .map(|e| (e.fd_step, e.max_norm))
                .collect::<Vec<_>>(),
        );
        let (fitted_order, fit_constant) = match fit {
            Ok(f) => (Some(f.order), Some(f.constant)),
            Err(_) => (None, None),
        };
        Ok(ConvergenceTable { suite, entries, fitted_order, fit_constant })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::AxisSpec;
    use crate::field::ScalarField;
    use crate::flows::exponential_flow_family;
    use crate::generators::{sine_gordon_kink, VacuumPipeline};

    fn vacuum_solution() -> crate::generators::GeneratedSolution {
        let envelope = ScalarField::constant(1.0)
            .add(&ScalarField::x2().powi(2).mul(&ScalarField::constant(0.2)));
        let potential = ScalarField::x2().sin().mul(&ScalarField::x3().cos());
        VacuumPipeline::new(envelope, sine_gordon_kink(0.3).unwrap(), ScalarField::one(), 2.0)
            .with_n_potential(potential)
            .build()
            .unwrap()
    }

    fn small_grid() -> GridSpec {
        GridSpec::new(
            AxisSpec::new(-0.4, 0.4, 3),
            AxisSpec::new(-0.4, 0.4, 3),
            AxisSpec::new(-0.4, 0.4, 3),
        )
    }

    #[test]
    fn vacuum_metric_passes_all_static_suites_at_the_fd_envelope() {
        let sol = vacuum_solution();
        let runner = SuiteRunner::for_metric(&sol.metric, small_grid(), sol.lambda, DiffMode::ValueFd);
        let report = runner
            .run(&[
                SuiteRequest::new(Suite::Reduced).with_tolerance(1e-6),
                SuiteRequest::new(Suite::Lc).with_tolerance(1e-6),
                SuiteRequest::new(Suite::Anholonomy),
                SuiteRequest::new(Suite::Evolution).with_tolerance(1e-6),
            ])
            .unwrap();
        assert!(report.pass, "norms: {:?}", report.suites.iter().map(|s| s.max_norm).collect::<Vec<_>>());
        assert_eq!(report.suites.len(), 4);
        for s in &report.suites {
            assert_eq!(s.rows.len(), 27);
            assert!(s.errors.is_empty());
        }
        // The anholonomy suite is informational: the frame coefficients are
        // genuinely anholonomic here, so its norm is O(1) yet it passes.
        let anh = &report.suites[2];
        assert!(anh.max_norm > 1e-3);
        assert!(anh.pass);
    }

    #[test]
    fn reports_are_bit_identical_across_runs() {
        let sol = vacuum_solution();
        let requests = [
            SuiteRequest::new(Suite::Reduced).with_tolerance(1e-6),
            SuiteRequest::new(Suite::Lc),
        ];
        let runner = SuiteRunner::for_metric(&sol.metric, small_grid(), sol.lambda, DiffMode::ValueFd);
        let a = runner.run(&requests).unwrap();
        let b = runner.run(&requests).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flow_family_reports_cover_chi_samples_and_the_ode_pair() {
        let fam = exponential_flow_family(
            2.0,
            1.5,
            0.6,
            0.8,
            sine_gordon_kink(0.25).unwrap(),
            2.0,
            [ScalarField::one(), ScalarField::constant(0.5)],
        )
        .unwrap();
        let chis = vec![0.1, 0.4, 0.7];
        let runner =
            SuiteRunner::for_family(&fam, small_grid(), DiffMode::ExactPreferred, chis.clone())
                .unwrap();
        let report = runner
            .run(&[SuiteRequest::new(Suite::FlowConstraints), SuiteRequest::new(Suite::Evolution)])
            .unwrap();
        assert!(report.pass);
        assert_eq!(report.chi_samples, chis);
        let fc = &report.suites[0];
        assert_eq!(fc.rows.len(), 27 * 3);
        // The family satisfies its two defining ODEs to roundoff while the
        // drift components are genuinely nonzero.
        assert!(fc.component_max[4].unwrap() <= 1e-10, "envelope ODE");
        assert!(fc.component_max[5].unwrap() <= 1e-10, "amplitude ODE");
        assert!(fc.component_max[0].unwrap() > 1e-2, "drift should be nonzero");
        // Vertical evolution vanishes under the flow normalisation.
        let ev = &report.suites[1];
        assert!(ev.component_max[2].unwrap() <= 1e-9);
        assert!(ev.component_max[3].unwrap() <= 1e-9);
    }

    #[test]
    fn per_point_failures_are_recorded_not_fatal() {
        // h₅ = v crosses zero inside the grid: points near v = 0 must be
        // refused by the degeneracy/kink guards, the rest still evaluate.
        let metric = crate::ansatz::AnsatzMetric::diagonal(
            "kinked",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            ScalarField::v(),
        );
        let grid = GridSpec::new(
            AxisSpec::new(-0.4, 0.4, 2),
            AxisSpec::new(-0.4, 0.4, 2),
            AxisSpec::new(-0.5, 0.5, 3),
        );
        let runner = SuiteRunner::for_metric(&metric, grid, 0.0, DiffMode::ValueFd);
        let report = runner
            .run(&[SuiteRequest::new(Suite::Reduced).with_tolerance(1e-6)])
            .unwrap();
        let s = &report.suites[0];
        assert!(!s.errors.is_empty(), "the v = 0 plane must be refused");
        assert!(!s.rows.is_empty(), "points away from the kink must evaluate");
        assert_eq!(s.rows.len() + s.errors.len(), 12);
        assert!(!s.pass);
        assert!(!report.pass);
    }

    #[test]
    fn convergence_sweep_recovers_fourth_order_stencils() {
        let sol = vacuum_solution();
        // Two points suffice: the sweep measures truncation scaling.
        let grid = GridSpec::new(
            AxisSpec::new(0.1, 0.5, 2),
            AxisSpec::new(-0.3, 0.1, 1),
            AxisSpec::new(-0.2, 0.2, 2),
        );
        let runner = SuiteRunner::for_metric(&sol.metric, grid, sol.lambda, DiffMode::ValueFd);
        // Steps stay well above the second-difference roundoff floor
        // (≈ ε/h_phys² ≈ 10⁻¹¹ at the finest step here) so the fit sees
        // pure truncation scaling.
        let table = runner
            .convergence_sweep(Suite::Reduced, &[4e-2, 2e-2, 1e-2])
            .unwrap();
        let order = table.fitted_order.expect("fit must succeed on smooth data");
        assert!(
            (3.3..=4.7).contains(&order),
            "expected 4th-order truncation, fitted {order:.2}; entries {:?}",
            table.entries
        );
    }

    #[test]
    fn empty_requests_yield_an_empty_passing_report() {
        let sol = vacuum_solution();
        let runner = SuiteRunner::for_metric(&sol.metric, small_grid(), sol.lambda, DiffMode::ValueFd);
        let report = runner.run(&[]).unwrap();
        assert!(report.pass);
        assert!(report.suites.is_empty());
    }

    #[test]
    fn flow_constraints_require_a_family() {
        let sol = vacuum_solution();
        let runner = SuiteRunner::for_metric(&sol.metric, small_grid(), sol.lambda, DiffMode::ValueFd);
        assert!(runner.run(&[SuiteRequest::new(Suite::FlowConstraints)]).is_err());
    }

    #[test]
    fn suite_ids_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_id(s.id()), Some(s));
        }
        assert_eq!(Suite::from_id("unknown"), None);
    }
}
