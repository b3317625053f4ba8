//! Deterministic report serialization.
//!
//! Reports must be byte-identical across runs with the same inputs, so
//! everything here is hand-rolled: fixed field order, floats always as
//! `{:.16e}` (17 significant digits — enough to round-trip any f64), no
//! timestamps, no environment echoes.
//!
//! Two formats are written per run:
//!
//! * **JSON** — the full report: provenance (scenario hash, artifact
//!   version), configuration echo, per-suite aggregates, per-point rows
//!   and evaluation errors, convergence tables, overall verdict.  Points
//!   are 6-arrays `[x1, x2, x3, v, y5, chi]`; per-row components are
//!   arrays aligned with the suite's `component_max` keys.
//! * **CSV** — one row per point per suite with fixed columns
//!   `suite,x1,x2,x3,v,y5,chi,c1,c2,c3,c4,c5,c6,norm`; `c<k>` is the k-th
//!   component of the suite (see the JSON `component_max` keys for the
//!   mapping), empty where a suite has fewer components or a component is
//!   undefined at the point.

use forge_core::chart::{AxisSpec, ChartPoint};
use forge_core::report::{ResidualReport, SuiteOutcome};

/// Provenance block embedded in every JSON report.
pub struct Provenance<'a> {
    pub scenario_name: &'a str,
    pub scenario_sha256: &'a str,
    pub builder_id: &'a str,
    pub metric_name: &'a str,
}

/// Artifact version recorded in reports (the crate version).
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Format a float with 17 significant digits; non-finite values map to
/// JSON null (and empty CSV cells).
pub fn fnum(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn fnum_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fnum(v),
        None => "null".to_string(),
    }
}

/// JSON string escaping (control characters, quotes, backslash).
pub fn jstr(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn point_json(p: &ChartPoint) -> String {
    format!(
        "[{},{},{},{},{},{}]",
        fnum(p.x1),
        fnum(p.x2),
        fnum(p.x3),
        fnum(p.v),
        fnum(p.y5),
        fnum(p.chi)
    )
}

fn axis_json(a: &AxisSpec) -> String {
    format!(
        "{{\"lo\":{},\"hi\":{},\"count\":{},\"scale\":{}}}",
        fnum(a.lo),
        fnum(a.hi),
        a.count,
        fnum_opt(a.derivative_scale)
    )
}

fn suite_json(s: &SuiteOutcome, indent: &str) -> String {
    let labels = s.suite.component_labels();
    let mut out = String::new();
    out.push_str(&format!("{indent}{{\n"));
    out.push_str(&format!("{indent}  \"suite\": {},\n", jstr(s.suite.id())));
    out.push_str(&format!("{indent}  \"tolerance\": {},\n", fnum_opt(s.tolerance)));
    out.push_str(&format!("{indent}  \"points\": {},\n", s.rows.len()));
    out.push_str(&format!("{indent}  \"max_norm\": {},\n", fnum(s.max_norm)));
    out.push_str(&format!("{indent}  \"mean_norm\": {},\n", fnum(s.mean_norm)));
    out.push_str(&format!("{indent}  \"rms_norm\": {},\n", fnum(s.rms_norm)));
    let cm: Vec<String> = labels
        .iter()
        .zip(&s.component_max)
        .map(|(label, v)| format!("{}: {}", jstr(label), fnum_opt(*v)))
        .collect();
    out.push_str(&format!("{indent}  \"component_max\": {{{}}},\n", cm.join(", ")));
    out.push_str(&format!("{indent}  \"pass\": {},\n", s.pass));
    let errors: Vec<String> = s
        .errors
        .iter()
        .map(|e| {
            format!(
                "{indent}    {{\"point\": {}, \"message\": {}}}",
                point_json(&e.point),
                jstr(&e.message)
            )
        })
        .collect();
    if errors.is_empty() {
        out.push_str(&format!("{indent}  \"errors\": [],\n"));
    } else {
        out.push_str(&format!("{indent}  \"errors\": [\n{}\n{indent}  ],\n", errors.join(",\n")));
    }
    let rows: Vec<String> = s
        .rows
        .iter()
        .map(|r| {
            let comps: Vec<String> = r.components.iter().map(|c| fnum_opt(*c)).collect();
            format!(
                "{indent}    {{\"point\": {}, \"components\": [{}], \"norm\": {}}}",
                point_json(&r.point),
                comps.join(","),
                fnum(r.norm)
            )
        })
        .collect();
    if rows.is_empty() {
        out.push_str(&format!("{indent}  \"rows\": []\n"));
    } else {
        out.push_str(&format!("{indent}  \"rows\": [\n{}\n{indent}  ]\n", rows.join(",\n")));
    }
    out.push_str(&format!("{indent}}}"));
    out
}

/// Serialize a full report as deterministic JSON.
pub fn report_json(
    report: &ResidualReport,
    prov: &Provenance,
    grid: &forge_core::chart::GridSpec,
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "  \"artifact\": {{\"name\": \"forge\", \"version\": {}}},\n",
        jstr(ARTIFACT_VERSION)
    ));
    out.push_str("  \"provenance\": {\n");
    out.push_str(&format!("    \"scenario_name\": {},\n", jstr(prov.scenario_name)));
    out.push_str(&format!("    \"scenario_sha256\": {},\n", jstr(prov.scenario_sha256)));
    out.push_str(&format!("    \"builder\": {},\n", jstr(prov.builder_id)));
    out.push_str(&format!("    \"metric\": {}\n", jstr(prov.metric_name)));
    out.push_str("  },\n");
    out.push_str("  \"config\": {\n");
    out.push_str(&format!("    \"lambda\": {},\n", fnum(report.lambda)));
    out.push_str(&format!("    \"fd_step\": {},\n", fnum(report.fd_step)));
    out.push_str(&format!("    \"fd_order\": {},\n", report.fd_order));
    let chis: Vec<String> = report.chi_samples.iter().map(|&c| fnum(c)).collect();
    out.push_str(&format!("    \"chi_samples\": [{}],\n", chis.join(",")));
    out.push_str(&format!("    \"grid\": {}\n", grid_json(grid)));
    out.push_str("  },\n");
    let suites: Vec<String> = report.suites.iter().map(|s| suite_json(s, "    ")).collect();
    if suites.is_empty() {
        out.push_str("  \"suites\": [],\n");
    } else {
        out.push_str(&format!("  \"suites\": [\n{}\n  ],\n", suites.join(",\n")));
    }
    let conv: Vec<String> = report
        .convergence
        .iter()
        .map(|t| {
            let entries: Vec<String> = t
                .entries
                .iter()
                .map(|e| format!("{{\"fd_step\": {}, \"max_norm\": {}}}", fnum(e.fd_step), fnum(e.max_norm)))
                .collect();
            format!(
                "    {{\"suite\": {}, \"entries\": [{}], \"fitted_order\": {}, \"fit_constant\": {}}}",
                jstr(t.suite.id()),
                entries.join(", "),
                fnum_opt(t.fitted_order),
                fnum_opt(t.fit_constant)
            )
        })
        .collect();
    if conv.is_empty() {
        out.push_str("  \"convergence\": [],\n");
    } else {
        out.push_str(&format!("  \"convergence\": [\n{}\n  ],\n", conv.join(",\n")));
    }
    out.push_str(&format!("  \"pass\": {}\n", report.pass));
    out.push_str("}\n");
    out
}

/// Serialize the grid block used inside the JSON config echo.
fn grid_json(grid: &forge_core::chart::GridSpec) -> String {
    format!(
        "{{\"x2\": {}, \"x3\": {}, \"v\": {}}}",
        axis_json(&grid.x2),
        axis_json(&grid.x3),
        axis_json(&grid.v)
    )
}

fn csv_cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.16e}"),
        _ => String::new(),
    }
}

/// Serialize the per-point rows of every suite as CSV.
pub fn report_csv(report: &ResidualReport) -> String {
    let mut out = String::from("suite,x1,x2,x3,v,y5,chi,c1,c2,c3,c4,c5,c6,norm\n");
    for s in &report.suites {
        for r in &s.rows {
            let p = &r.point;
            let mut cells: Vec<String> = vec![
                s.suite.id().to_string(),
                format!("{:.16e}", p.x1),
                format!("{:.16e}", p.x2),
                format!("{:.16e}", p.x3),
                format!("{:.16e}", p.v),
                format!("{:.16e}", p.y5),
                format!("{:.16e}", p.chi),
            ];
            for k in 0..6 {
                cells.push(csv_cell(r.components.get(k).copied().flatten()));
            }
            cells.push(format!("{:.16e}", r.norm));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Horizon tables
// ---------------------------------------------------------------------------

/// One row of the horizon sweep.
pub struct HorizonRow {
    pub phi: f64,
    /// Root-found radius; `None` when the solver found no crossing (gap row).
    pub root: Option<f64>,
    /// First-order (linearized) radius.
    pub formula: f64,
}

/// Main horizon table: `phi, r_plus_rootfind, r_plus_formula, difference`;
/// gap rows keep the φ and formula cells and leave the others empty.
pub fn horizon_csv(rows: &[HorizonRow]) -> String {
    let mut out = String::from("phi,r_plus_rootfind,r_plus_formula,difference\n");
    for r in rows {
        let root = csv_cell(r.root);
        let diff = csv_cell(r.root.map(|x| x - r.formula));
        out.push_str(&format!("{:.16e},{root},{:.16e},{diff}\n", r.phi, r.formula));
    }
    out
}

/// Plot-ready two-column companion (φ and root-found radius, space
/// separated, gap rows skipped).
pub fn horizon_companion(rows: &[HorizonRow]) -> String {
    let mut out = String::new();
    for r in rows {
        if let Some(root) = r.root {
            out.push_str(&format!("{:.16e} {root:.16e}\n", r.phi));
        }
    }
    out
}
