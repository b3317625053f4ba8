//! Scenario files: the JSON configuration consumed by `forge run` and
//! `forge horizon`.
//!
//! A scenario names a catalog builder (plus parameters), a sampling grid,
//! the residual suites to run with their tolerances, and optionally a flow
//! block (χ-family runs), a polarization block (multiplicative
//! deformations applied before verification), a convergence block and a
//! rotoid block (horizon sweeps).  Loading validates everything up front:
//! expressions are compiled, catalog ids resolved, suite names checked,
//! so a loaded [`Scenario`] cannot fail for configuration reasons later.
//!
//! The raw file bytes are hashed (SHA-256) at load time; the hash is
//! embedded in every report as provenance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use forge_core::chart::{AxisSpec, GridSpec};
use forge_core::error::ForgeError;
use forge_core::expr::parse_field;
use forge_core::field::ScalarField;
use forge_core::generators::{RotoidParams, RotoidTerm};
use forge_core::report::{Suite, SuiteRequest};
use forge_core::transforms::PolarizationSet;

use crate::catalog::{self, BuiltTarget};
use crate::CliError;

// ---------------------------------------------------------------------------
// Raw (serde) schema
// ---------------------------------------------------------------------------

/// A builder parameter: a plain number or an expression string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    builder: BuilderFile,
    #[serde(default)]
    grid: Option<GridFile>,
    #[serde(default)]
    suites: Vec<String>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    polarize: Option<BTreeMap<String, String>>,
    #[serde(default)]
    flow: Option<FlowFile>,
    #[serde(default)]
    convergence: Option<ConvergenceFile>,
    #[serde(default)]
    rotoid: Option<RotoidFile>,
    #[serde(default)]
    output: Option<OutputFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuilderFile {
    id: String,
    #[serde(default)]
    params: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisFile {
    lo: f64,
    hi: f64,
    count: usize,
    #[serde(default)]
    scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    x2: AxisFile,
    x3: AxisFile,
    v: AxisFile,
    #[serde(default)]
    fd_step: Option<f64>,
    #[serde(default)]
    fd_order: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowFile {
    lambda: f64,
    chi0: f64,
    #[serde(default = "default_flow_samples")]
    samples: usize,
}

fn default_flow_samples() -> usize {
    5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergenceFile {
    suite: String,
    fd_steps: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RotoidFile {
    mu: f64,
    epsilon: f64,
    #[serde(default = "one")]
    q0: f64,
    #[serde(default = "one")]
    omega0: f64,
    #[serde(default)]
    theta0: f64,
    /// Angular profile expression (over `theta`); overrides the sinusoid.
    #[serde(default)]
    profile: Option<String>,
    #[serde(default = "default_sweep_points")]
    points: usize,
}

fn one() -> f64 {
    1.0
}

fn default_sweep_points() -> usize {
    360
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    #[serde(default)]
    json: Option<String>,
    #[serde(default)]
    csv: Option<String>,
}

// ---------------------------------------------------------------------------
// Validated scenario
// ---------------------------------------------------------------------------

/// A flow block: χ-range, normalisation constant and sample count.
#[derive(Debug, Clone, Copy)]
pub struct FlowBlock {
    pub lambda: f64,
    pub chi0: f64,
    pub samples: usize,
}

impl FlowBlock {
    /// Interior χ-samples `(k + ½)/n · χ₀`, safely away from the range
    /// boundaries for value-stencil χ-derivatives.
    pub fn chi_samples(&self) -> Vec<f64> {
        (0..self.samples)
            .map(|k| self.chi0 * (k as f64 + 0.5) / self.samples as f64)
            .collect()
    }
}

/// Rotoid sweep parameters for `forge horizon`.
pub struct RotoidSweep {
    pub params: RotoidParams,
    pub points: usize,
}

/// Convergence sweep request.
#[derive(Debug, Clone)]
pub struct ConvergenceRequest {
    pub suite: Suite,
    pub fd_steps: Vec<f64>,
}

/// A fully validated scenario: every expression compiled, every identifier
/// resolved.
pub struct Scenario {
    pub name: String,
    /// SHA-256 of the scenario file bytes (hex), for provenance.
    pub sha256: String,
    pub builder_id: String,
    pub target: BuiltTarget,
    pub polarization: Option<PolarizationSet>,
    pub grid: GridSpec,
    pub requests: Vec<SuiteRequest>,
    pub flow: Option<FlowBlock>,
    pub convergence: Option<ConvergenceRequest>,
    pub rotoid: Option<RotoidSweep>,
    pub output_json: Option<PathBuf>,
    pub output_csv: Option<PathBuf>,
}

/// Default grid when a scenario omits one: 3×3×3 points on [−0.4, 0.4]³.
fn default_grid() -> GridSpec {
    GridSpec::new(
        AxisSpec::new(-0.4, 0.4, 3),
        AxisSpec::new(-0.4, 0.4, 3),
        AxisSpec::new(-0.4, 0.4, 3),
    )
}

fn compile_expr(context: &str, src: &str) -> Result<ScalarField, CliError> {
    parse_field(src)
        .map_err(|e| CliError::config(format!("{context}: {e} (in expression {src:?})")))
}

/// Load and validate a scenario file.
pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::infra(format!("cannot read scenario {}: {e}", path.display())))?;
    let sha256 = hex(&Sha256::digest(&bytes));
    let file: ScenarioFile = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::config(format!(
            "scenario {} is not valid JSON for the expected schema: {e}",
            path.display()
        ))
    })?;
    validate(file, sha256)
}

/// Validate a parsed scenario (exposed for in-memory tests).
fn validate(file: ScenarioFile, sha256: String) -> Result<Scenario, CliError> {
    let flow = file.flow.as_ref().map(|f| FlowBlock {
        lambda: f.lambda,
        chi0: f.chi0,
        samples: f.samples,
    });
    if let Some(f) = &flow {
        if !(f.chi0 > 0.0) || f.samples == 0 {
            return Err(CliError::config(format!(
                "flow block needs chi0 > 0 and samples ≥ 1 (got chi0 = {}, samples = {})",
                f.chi0, f.samples
            )));
        }
    }

    let target = catalog::build(&file.builder.id, &file.builder.params, flow.as_ref())?;

    // Suites: ordered as written, duplicates rejected.
    let mut requests = Vec::new();
    for name in &file.suites {
        let suite = Suite::from_id(name).ok_or_else(|| {
            CliError::config(format!(
                "unknown suite {name:?}; valid suites: {}",
                Suite::ALL.map(|s| s.id()).join(", ")
            ))
        })?;
        if requests.iter().any(|r: &SuiteRequest| r.suite == suite) {
            return Err(CliError::config(format!("suite {name:?} listed twice")));
        }
        requests.push(SuiteRequest::new(suite));
    }
    for (key, &tol) in &file.tolerances {
        let suite = Suite::from_id(key).ok_or_else(|| {
            CliError::config(format!("tolerance for unknown suite {key:?}"))
        })?;
        let request = requests
            .iter_mut()
            .find(|r| r.suite == suite)
            .ok_or_else(|| {
                CliError::config(format!(
                    "tolerance given for suite {key:?} which is not in `suites`"
                ))
            })?;
        if !(tol > 0.0) {
            return Err(CliError::config(format!(
                "tolerance for {key:?} must be positive, got {tol}"
            )));
        }
        *request = request.with_tolerance(tol);
    }

    // Polarization block: expression per slot, identity elsewhere.
    let polarization = match &file.polarize {
        None => None,
        Some(map) => {
            if !matches!(target, BuiltTarget::Metric { .. }) {
                return Err(CliError::config(
                    "`polarize` applies to metric builders only",
                ));
            }
            let mut pol = PolarizationSet::identity(0.0);
            for (slot, src) in map {
                let field = compile_expr(&format!("polarize.{slot}"), src)?;
                match slot.as_str() {
                    "g2" => pol.g2 = field,
                    "g3" => pol.g3 = field,
                    "h4" => pol.h4 = field,
                    "h5" => pol.h5 = field,
                    "w2" => pol.w[0] = field,
                    "w3" => pol.w[1] = field,
                    "n2" => pol.n[0] = field,
                    "n3" => pol.n[1] = field,
                    other => {
                        return Err(CliError::config(format!(
                            "unknown polarization slot {other:?}; valid: g2 g3 h4 h5 w2 w3 n2 n3"
                        )))
                    }
                }
            }
            pol.validate_literal()
                .map_err(|e| CliError::config(format!("polarize: {e}")))?;
            Some(pol)
        }
    };

    // Grid.
    let grid = match &file.grid {
        None => default_grid(),
        Some(g) => {
            let axis = |a: &AxisFile| {
                let spec = AxisSpec::new(a.lo, a.hi, a.count);
                match a.scale {
                    Some(s) => spec.with_scale(s),
                    None => spec,
                }
            };
            let mut grid = GridSpec::new(axis(&g.x2), axis(&g.x3), axis(&g.v));
            if let Some(step) = g.fd_step {
                if !(step > 0.0) {
                    return Err(CliError::config(format!(
                        "grid.fd_step must be positive, got {step}"
                    )));
                }
                grid = grid.with_fd_step(step);
            }
            if let Some(order) = g.fd_order {
                grid = grid
                    .with_fd_order(order)
                    .map_err(|e| CliError::config(e.to_string()))?;
            }
            grid
        }
    };

    let convergence = match &file.convergence {
        None => None,
        Some(c) => {
            let suite = Suite::from_id(&c.suite).ok_or_else(|| {
                CliError::config(format!("convergence block names unknown suite {:?}", c.suite))
            })?;
            if c.fd_steps.len() < 2 || c.fd_steps.iter().any(|&h| !(h > 0.0)) {
                return Err(CliError::config(
                    "convergence.fd_steps needs at least two positive steps",
                ));
            }
            Some(ConvergenceRequest { suite, fd_steps: c.fd_steps.clone() })
        }
    };

    let rotoid = match &file.rotoid {
        None => None,
        Some(r) => {
            if !(r.mu > 0.0) {
                return Err(CliError::config(format!("rotoid.mu must be positive, got {}", r.mu)));
            }
            if r.points < 2 {
                return Err(CliError::config("rotoid.points must be at least 2"));
            }
            let term = match &r.profile {
                Some(src) => RotoidTerm::Custom(compile_expr("rotoid.profile", src)?),
                None => RotoidTerm::Sinusoid { q0: r.q0, omega0: r.omega0, theta0: r.theta0 },
            };
            Some(RotoidSweep {
                params: RotoidParams { mu: r.mu, epsilon: r.epsilon, term },
                points: r.points,
            })
        }
    };

    let (output_json, output_csv) = match &file.output {
        Some(o) => (o.json.as_ref().map(PathBuf::from), o.csv.as_ref().map(PathBuf::from)),
        None => (None, None),
    };

    Ok(Scenario {
        name: file.name,
        sha256,
        builder_id: file.builder.id,
        target,
        polarization,
        grid,
        requests,
        flow,
        convergence,
        rotoid,
        output_json,
        output_csv,
    })
}

fn hex(digest: &[u8]) -> String {
    let mut s = String::with_capacity(digest.len() * 2);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// File-name slug of a scenario name (for default output paths).
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("scenario");
    }
    out
}

/// Convert a core error into the message used in reports.
pub fn core_error_message(e: &ForgeError) -> String {
    e.to_string()
}
