//! The builder catalog: named metric seeds, generator pipelines and
//! builtin fields that scenarios can reference by id.
//!
//! Every entry takes its parameters from the scenario's `builder.params`
//! map: plain numbers for scalar knobs, expression strings for coefficient
//! fields.  Unknown ids fail with a nearest-match hint; unknown parameter
//! names fail listing the valid ones — a misspelled scenario never runs
//! half-configured.

use std::collections::{BTreeMap, BTreeSet};

use forge_core::ansatz::{build_primary, AnsatzMetric, PrimaryKind, SchwarzschildParams, WaveProfile};
use forge_core::error::ForgeError;
use forge_core::expr::parse_field;
use forge_core::field::ScalarField;
use forge_core::flows::{exponential_flow_family, FlowFamily};
use forge_core::generators::{
    kdv_line_soliton, sine_gordon_kink, ExtradimPipeline, StringPipeline, VacuumPipeline,
};

use crate::scenario::{FlowBlock, ParamValue};
use crate::CliError;

/// What a catalog builder produces.
pub enum BuiltTarget {
    /// A static metric with its normalisation constant λ.
    Metric { metric: AnsatzMetric, lambda: f64 },
    /// A χ-family (requires a `flow` block in the scenario).
    Family(FlowFamily),
    /// A named scalar field (usable for expression cross-checks; running
    /// residual suites against it is a configuration error).
    Field { field: ScalarField, description: &'static str },
}

/// One catalog row, as shown by `forge catalog`.
pub struct CatalogEntry {
    pub id: &'static str,
    pub kind: &'static str,
    pub summary: &'static str,
    /// `name=default` pairs accepted in `builder.params`.
    pub params: &'static str,
}

/// All entries, in the fixed order used by `forge catalog`.
pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "pp.plane",
        kind: "metric",
        summary: "plane-wave seed: harmonic profile (x2^2 - x3^2) sin v, h4 h5 = -1/4",
        params: "eps1=1",
    },
    CatalogEntry {
        id: "pp.packet",
        kind: "metric",
        summary: "compact wave-packet seed, window |v| < p0",
        params: "p0=1, eps1=1",
    },
    CatalogEntry {
        id: "schw.spherical",
        kind: "metric",
        summary: "spherical mass in the radial chart; azimuthal anisotropy",
        params: "mu=1, epsilon=0, eps1=1",
    },
    CatalogEntry {
        id: "schw.spherical-swapped",
        kind: "metric",
        summary: "spherical mass with time as the anisotropic coordinate",
        params: "mu=1, epsilon=0, eps1=1",
    },
    CatalogEntry {
        id: "schw.conformal",
        kind: "metric",
        summary: "conformally rescaled spherical seed in the compressed charts",
        params: "mu=1, epsilon=0, eps1=1",
    },
    CatalogEntry {
        id: "schw.conformal-time",
        kind: "metric",
        summary: "conformally rescaled seed, time-anisotropic variant",
        params: "mu=1, epsilon=0, eps1=1",
    },
    CatalogEntry {
        id: "soliton.sg1d",
        kind: "field",
        summary: "sine-Gordon kink 4 atan exp[(v - c x2)/sqrt(1 - c^2)]",
        params: "speed=0",
    },
    CatalogEntry {
        id: "soliton.kdv-travel",
        kind: "field",
        summary: "KdV line soliton 2 B^2 sech^2(B v + 2 B^2 x2)",
        params: "width=1",
    },
    CatalogEntry {
        id: "string.pp-wave",
        kind: "pipeline",
        summary: "string-source background generated from a kink profile (lambda = -lambda_h^2/2)",
        params: "profile=<sg kink of `speed`>, speed=0.3, lambda_h=sqrt(2), h50=0, b=1, n0_2=0.3, n0_3=-0.2, n1_2=0.4, n1_3=0.7, n_base=0",
    },
    CatalogEntry {
        id: "vacuum.pp-soliton",
        kind: "pipeline",
        summary: "vacuum background with factorised vertical blocks over a kink",
        params: "envelope=\"1 + 0.2*x2^2\", q=<sg kink of `speed`>, speed=0.3, k=\"1\", h0=2, n_potential=\"sin(x2)*cos(x3)\"",
    },
    CatalogEntry {
        id: "extradim.sech",
        kind: "pipeline",
        summary: "extra-dimension background with reciprocal running polarisation",
        params: "f=\"2 + 0.5*sech(v)^2\", f0=1, h0=2, eps4=-1, lambda_h=sqrt(2), inv_sigma0=\"1 + 0.1*sin(x2)*cos(x3)\", v_base=0.3, b=1",
    },
    CatalogEntry {
        id: "flow.exponential",
        kind: "family",
        summary: "closed-form exponential flow family over a factorised vacuum background (needs a `flow` block)",
        params: "b0sq=2, n0=1.5, q=<sg kink of `speed`>, speed=0.25, h0=2, nu2=\"1\", nu3=\"0.5\"",
    },
];

/// Nearest catalog id by edit distance (for typo hints).
pub fn nearest(id: &str) -> &'static str {
    ENTRIES
        .iter()
        .map(|e| (levenshtein(id, e.id), e.id))
        .min_by_key(|&(d, _)| d)
        .map(|(_, id)| id)
        .unwrap_or("pp.plane")
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

// ---------------------------------------------------------------------------
// Parameter plumbing
// ---------------------------------------------------------------------------

struct Params<'a> {
    id: &'a str,
    map: &'a BTreeMap<String, ParamValue>,
    used: BTreeSet<&'a str>,
}

impl<'a> Params<'a> {
    fn new(id: &'a str, map: &'a BTreeMap<String, ParamValue>) -> Self {
        Params { id, map, used: BTreeSet::new() }
    }

    fn number(&mut self, name: &'a str, default: f64) -> Result<f64, CliError> {
        self.used.insert(name);
        match self.map.get(name) {
            None => Ok(default),
            Some(ParamValue::Number(x)) => Ok(*x),
            Some(ParamValue::Expr(s)) => s.parse::<f64>().map_err(|_| {
                CliError::config(format!(
                    "parameter {name:?} of {:?} must be a number, got {s:?}",
                    self.id
                ))
            }),
        }
    }

    fn field(&mut self, name: &'a str, default: &str) -> Result<ScalarField, CliError> {
        self.used.insert(name);
        let src = match self.map.get(name) {
            None => default.to_string(),
            Some(ParamValue::Number(x)) => return Ok(ScalarField::constant(*x)),
            Some(ParamValue::Expr(s)) => s.clone(),
        };
        parse_field(&src).map_err(|e| {
            CliError::config(format!("parameter {name:?} of {:?}: {e}", self.id))
        })
    }

    /// Field parameter without a default expression: `None` when absent.
    fn field_opt(&mut self, name: &'a str) -> Result<Option<ScalarField>, CliError> {
        self.used.insert(name);
        match self.map.get(name) {
            None => Ok(None),
            Some(ParamValue::Number(x)) => Ok(Some(ScalarField::constant(*x))),
            Some(ParamValue::Expr(s)) => parse_field(s)
                .map(Some)
                .map_err(|e| CliError::config(format!("parameter {name:?} of {:?}: {e}", self.id))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .map
            .keys()
            .map(String::as_str)
            .filter(|k| !self.used.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::config(format!(
                "unknown parameter(s) {:?} for catalog id {:?}; accepted: {}",
                unknown,
                self.id,
                self.used.into_iter().collect::<Vec<_>>().join(", ")
            )))
        }
    }
}

fn core_err(e: ForgeError) -> CliError {
    CliError::config(e.to_string())
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Build a catalog target.  `flow` is consumed by family builders and must
/// agree with static builders when present (the runner lifts those).
pub fn build(
    id: &str,
    params: &BTreeMap<String, ParamValue>,
    flow: Option<&FlowBlock>,
) -> Result<BuiltTarget, CliError> {
    if !ENTRIES.iter().any(|e| e.id == id) {
        return Err(CliError::config(
            ForgeError::UnknownCatalogId {
                requested: id.to_string(),
                nearest: nearest(id).to_string(),
            }
            .to_string(),
        ));
    }
    let mut p = Params::new(id, params);
    let target = match id {
        "pp.plane" => {
            let eps1 = p.number("eps1", 1.0)?;
            let metric = build_primary(&PrimaryKind::Wave { profile: WaveProfile::Plane, eps1 });
            BuiltTarget::Metric { metric, lambda: 0.0 }
        }
        "pp.packet" => {
            let p0 = p.number("p0", 1.0)?;
            let eps1 = p.number("eps1", 1.0)?;
            let metric =
                build_primary(&PrimaryKind::Wave { profile: WaveProfile::Packet { p0 }, eps1 });
            BuiltTarget::Metric { metric, lambda: 0.0 }
        }
        "schw.spherical" | "schw.spherical-swapped" | "schw.conformal" | "schw.conformal-time" => {
            let mut sp = SchwarzschildParams::new(p.number("mu", 1.0)?)
                .with_epsilon(p.number("epsilon", 0.0)?);
            sp.eps1 = p.number("eps1", 1.0)?;
            let kind = match id {
                "schw.spherical" => PrimaryKind::SphericalEmbedding(sp),
                "schw.spherical-swapped" => PrimaryKind::SphericalTimeSwapped(sp),
                "schw.conformal" => PrimaryKind::ConformalSpherical(sp),
                _ => PrimaryKind::ConformalTimeAnisotropic(sp),
            };
            BuiltTarget::Metric { metric: build_primary(&kind), lambda: 0.0 }
        }
        "soliton.sg1d" => {
            let speed = p.number("speed", 0.0)?;
            let field = sine_gordon_kink(speed).map_err(core_err)?;
            BuiltTarget::Field { field, description: "sine-Gordon kink" }
        }
        "soliton.kdv-travel" => {
            let width = p.number("width", 1.0)?;
            let field = kdv_line_soliton(width).map_err(core_err)?;
            BuiltTarget::Field { field, description: "KdV line soliton" }
        }
        "string.pp-wave" => {
            let speed = p.number("speed", 0.3)?;
            let profile = match p.field_opt("profile")? {
                Some(f) => f,
                None => sine_gordon_kink(speed).map_err(core_err)?,
            };
            let mut pipe = StringPipeline::new(profile, p.number("lambda_h", std::f64::consts::SQRT_2)?);
            pipe.h50 = p.number("h50", 0.0)?;
            pipe.b = p.number("b", 1.0)?;
            pipe.n0 = [p.number("n0_2", 0.3)?, p.number("n0_3", -0.2)?];
            pipe.n1 = [p.number("n1_2", 0.4)?, p.number("n1_3", 0.7)?];
            pipe.n_base = p.number("n_base", 0.0)?;
            let sol = pipe.build().map_err(core_err)?;
            BuiltTarget::Metric { metric: sol.metric, lambda: sol.lambda }
        }
        "vacuum.pp-soliton" => {
            let speed = p.number("speed", 0.3)?;
            let q = match p.field_opt("q")? {
                Some(f) => f,
                None => sine_gordon_kink(speed).map_err(core_err)?,
            };
            let envelope = p.field("envelope", "1 + 0.2*x2^2")?;
            let k = p.field("k", "1")?;
            let h0 = p.number("h0", 2.0)?;
            let potential = p.field("n_potential", "sin(x2)*cos(x3)")?;
            let sol = VacuumPipeline::new(envelope, q, k, h0)
                .with_n_potential(potential)
                .build()
                .map_err(core_err)?;
            BuiltTarget::Metric { metric: sol.metric, lambda: sol.lambda }
        }
        "extradim.sech" => {
            let pipe = ExtradimPipeline {
                f: p.field("f", "2 + 0.5*sech(v)^2")?,
                f0: p.number("f0", 1.0)?,
                h0: p.number("h0", 2.0)?,
                eps4: p.number("eps4", -1.0)?,
                lambda_h: p.number("lambda_h", std::f64::consts::SQRT_2)?,
                inv_sigma0: p.field("inv_sigma0", "1 + 0.1*sin(x2)*cos(x3)")?,
                v_base: p.number("v_base", 0.3)?,
                b: p.number("b", 1.0)?,
            };
            let sol = pipe.build().map_err(core_err)?;
            BuiltTarget::Metric { metric: sol.metric, lambda: sol.lambda }
        }
        "flow.exponential" => {
            let flow = flow.ok_or_else(|| {
                CliError::config(
                    "catalog id \"flow.exponential\" needs a `flow` block (lambda, chi0, samples)",
                )
            })?;
            let speed = p.number("speed", 0.25)?;
            let q = match p.field_opt("q")? {
                Some(f) => f,
                None => sine_gordon_kink(speed).map_err(core_err)?,
            };
            let family = exponential_flow_family(
                p.number("b0sq", 2.0)?,
                p.number("n0", 1.5)?,
                flow.lambda,
                flow.chi0,
                q,
                p.number("h0", 2.0)?,
                [p.field("nu2", "1")?, p.field("nu3", "0.5")?],
            )
            .map_err(core_err)?;
            BuiltTarget::Family(family)
        }
        _ => unreachable!("id validated above"),
    };
    p.finish()?;
    Ok(target)
}
