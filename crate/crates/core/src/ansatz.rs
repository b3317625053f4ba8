//! The metric ansatz container and the primary seed metrics.
//!
//! All constructions in this crate target the 5-D block ansatz
//!
//! ```text
//! ds² = g₁ (dx¹)² + g₂(x²,x³) (dx²)² + g₃(x²,x³) (dx³)²
//!     + h₄(x²,x³,v) δv² + h₅(x²,x³,v) δy²,
//! δv  = dv  + w₂ dx² + w₃ dx³,      δy = dy⁵ + n₂ dx² + n₃ dx³,
//! ```
//!
//! stored as an [`AnsatzMetric`]: one constant (`g₁ = ±1` or a squared
//! length), six coefficient fields and the four off-diagonal coefficients
//! `wᵢ`, `nᵢ` that define the frame distortion `δv`, `δy`.  Coefficients
//! may additionally depend on the family parameter χ when the metric is a
//! point on a geometric flow.
//!
//! The module also builds the *seed* metrics from which the generator
//! pipelines start:
//!
//! * a spherically symmetric mass embedded into 5-D, in the radial chart
//!   `ξ(r) = ∫ √|1 − 2μ/r + ε/r²| dr` (numeric chart map, inverted on
//!   demand), with either angle or time as the anisotropic direction;
//! * the same solution conformally rescaled by `(r sin ϑ)⁻²` in charts
//!   `ϑ̌ = ∫ dϑ/sin ϑ`, `ξ̌ = ∫ dr/√|r² − 2μr + ε|`, which makes the
//!   horizontal block constant and has *closed-form* chart inversions
//!   `ϑ(ϑ̌) = 2 atan eᶿ̌`, `r(ξ̌) = μ + E/2 + (μ² − ε)/2E`, `E = e^ξ̌`;
//! * a vacuum wave metric with harmonic profile κ(x², x³, v):
//!   `h₄ = −2κ`, `h₅ = 1/8κ` (so `h₄h₅ = −1/4`), with a plane-wave and a
//!   compactly supported wave-packet profile built in.

use std::sync::Arc;

use crate::chart::{Axis, ChartPoint};
use crate::error::{ForgeError, Result};
use crate::field::{ExternField, ScalarField};
use crate::quad::{integrate, QuadratureConfig};
use crate::rootfind::{solve_bracketed, RootConfig};
use crate::tolerances;

/// Names for the eight non-trivial coefficient slots, used by reports and
/// the transform layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    G2,
    G3,
    H4,
    H5,
    W2,
    W3,
    N2,
    N3,
}

impl Slot {
    pub const ALL: [Slot; 8] = [
        Slot::G2,
        Slot::G3,
        Slot::H4,
        Slot::H5,
        Slot::W2,
        Slot::W3,
        Slot::N2,
        Slot::N3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::G2 => "g2",
            Slot::G3 => "g3",
            Slot::H4 => "h4",
            Slot::H5 => "h5",
            Slot::W2 => "w2",
            Slot::W3 => "w3",
            Slot::N2 => "n2",
            Slot::N3 => "n3",
        }
    }
}

/// The 5-D block metric with anholonomic frame coefficients.
#[derive(Clone)]
pub struct AnsatzMetric {
    /// Human-readable identifier used in reports.
    pub name: String,
    /// Constant first-block coefficient (±1 for embeddings, or a squared
    /// length for conformally rescaled seeds).
    pub g1: f64,
    pub g2: ScalarField,
    pub g3: ScalarField,
    pub h4: ScalarField,
    pub h5: ScalarField,
    /// Frame coefficients of δv along (x², x³).
    pub w: [ScalarField; 2],
    /// Frame coefficients of δy along (x², x³).
    pub n: [ScalarField; 2],
}

impl AnsatzMetric {
    /// Diagonal metric: all frame coefficients zero.
    pub fn diagonal(
        name: impl Into<String>,
        g1: f64,
        g2: ScalarField,
        g3: ScalarField,
        h4: ScalarField,
        h5: ScalarField,
    ) -> Self {
        AnsatzMetric {
            name: name.into(),
            g1,
            g2,
            g3,
            h4,
            h5,
            w: [ScalarField::zero(), ScalarField::zero()],
            n: [ScalarField::zero(), ScalarField::zero()],
        }
    }

    pub fn with_w(mut self, w2: ScalarField, w3: ScalarField) -> Self {
        self.w = [w2, w3];
        self
    }

    pub fn with_n(mut self, n2: ScalarField, n3: ScalarField) -> Self {
        self.n = [n2, n3];
        self
    }

    pub fn slot(&self, slot: Slot) -> &ScalarField {
        match slot {
            Slot::G2 => &self.g2,
            Slot::G3 => &self.g3,
            Slot::H4 => &self.h4,
            Slot::H5 => &self.h5,
            Slot::W2 => &self.w[0],
            Slot::W3 => &self.w[1],
            Slot::N2 => &self.n[0],
            Slot::N3 => &self.n[1],
        }
    }

    pub fn set_slot(&mut self, slot: Slot, field: ScalarField) {
        match slot {
            Slot::G2 => self.g2 = field,
            Slot::G3 => self.g3 = field,
            Slot::H4 => self.h4 = field,
            Slot::H5 => self.h5 = field,
            Slot::W2 => self.w[0] = field,
            Slot::W3 => self.w[1] = field,
            Slot::N2 => self.n[0] = field,
            Slot::N3 => self.n[1] = field,
        }
    }

    /// Coefficient table in report order.
    pub fn slots(&self) -> impl Iterator<Item = (Slot, &ScalarField)> {
        Slot::ALL.iter().map(move |&s| (s, self.slot(s)))
    }
}

// ---------------------------------------------------------------------------
// Spherically symmetric seeds
// ---------------------------------------------------------------------------

/// Parameters of the spherically symmetric seed family.
#[derive(Debug, Clone, Copy)]
pub struct SchwarzschildParams {
    /// Point mass (geometric units; the gravitational radius is 2μ).
    pub mu: f64,
    /// Quadratic deformation parameter in `ϖ² = 1 − 2μ/r + ε/r²`
    /// (0 recovers the exact solution).
    pub epsilon: f64,
    /// Sign of the passive first-block coefficient.
    pub eps1: f64,
}

impl SchwarzschildParams {
    pub fn new(mu: f64) -> Self {
        SchwarzschildParams { mu, epsilon: 0.0, eps1: 1.0 }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Gravitational radius 2μ (geometric units).
    pub fn r_g(&self) -> f64 {
        2.0 * self.mu
    }

    /// Outer root of `r² − 2μr + ε`: the degeneracy radius of the deformed
    /// lapse, below which the charts are not defined.
    pub fn outer_root(&self) -> f64 {
        self.mu + (self.mu * self.mu - self.epsilon).max(0.0).sqrt()
    }

    /// `ϖ²(r) = 1 − 2μ/r + ε/r²`.
    pub fn varpi_sq(&self, r: f64) -> f64 {
        1.0 - 2.0 * self.mu / r + self.epsilon / (r * r)
    }
}

/// Radial chart maps for the spherical seeds.
///
/// The forward map `ξ(r) = ∫_{r_ref}^r √|ϖ²| dr'` is adaptive quadrature at
/// the chart tolerance; the inverse is a bracketed monotone solve.  The
/// reference radius fixing `ξ(r_ref) = 0` is pinned at twice the
/// gravitational radius, safely outside the degeneracy radius for every
/// admissible ε.
#[derive(Clone)]
pub struct SchwarzschildChart {
    pub params: SchwarzschildParams,
    pub r_ref: f64,
    quad: QuadratureConfig,
}

impl SchwarzschildChart {
    pub fn new(params: SchwarzschildParams) -> Self {
        SchwarzschildChart {
            params,
            r_ref: 2.0 * params.r_g(),
            quad: QuadratureConfig {
                tol: tolerances::QUAD_TOL_CHART,
                max_depth: tolerances::QUAD_MAX_DEPTH,
            },
        }
    }

    /// Forward chart map ξ(r).
    pub fn xi_of_r(&self, r: f64) -> Result<f64> {
        let floor = self.params.outer_root();
        if r <= floor {
            return Err(ForgeError::InvalidConfig(format!(
                "radius {r} is inside the degeneracy radius {floor}"
            )));
        }
        let p = self.params;
        integrate(
            &|t: f64| p.varpi_sq(t).abs().sqrt(),
            self.r_ref,
            r,
            &self.quad,
        )
    }

    /// Inverse chart map r(ξ), solved on a geometrically expanded bracket.
    pub fn r_of_xi(&self, xi: f64) -> Result<f64> {
        let floor = self.params.outer_root();
        let eps_in = 1e-12 * self.r_ref.max(1.0);
        let mut lo = floor + eps_in;
        let mut hi = self.r_ref;
        // ξ is strictly increasing in r.  Expand the bracket upward until it
        // contains the target; the lower end is pinned just outside the
        // degeneracy radius.
        let mut f_hi = self.xi_of_r(hi)? - xi;
        let mut guard = 0;
        while f_hi < 0.0 {
            hi = floor + 2.0 * (hi - floor);
            f_hi = self.xi_of_r(hi)? - xi;
            guard += 1;
            if guard > 200 {
                return Err(ForgeError::InvalidConfig(format!(
                    "radial chart inversion could not bracket ξ = {xi}"
                )));
            }
        }
        let f_lo = self.xi_of_r(lo)? - xi;
        if f_lo > 0.0 {
            // Target lies between the degeneracy radius and the numerical
            // floor; tighten as far as f64 allows.
            lo = floor + f64::EPSILON * floor.abs().max(1.0);
        }
        let f = |r: f64| self.xi_of_r(r).map(|v| v - xi).unwrap_or(f64::NAN);
        solve_bracketed(&f, lo, hi, &RootConfig::default())
    }

    /// The radius as a field of the chart coordinate x² (for seeds whose
    /// second coordinate is ξ).  Quadrature/root-solver backed, so flagged
    /// unsafe for value differencing; its exact x²-derivative is
    /// `1/√|ϖ²(r)|` by the inverse-function rule.
    pub fn r_field(&self) -> ScalarField {
        ScalarField::external(Arc::new(RadialChartField { chart: self.clone() }))
    }
}

struct RadialChartField {
    chart: SchwarzschildChart,
}

impl ExternField for RadialChartField {
    fn eval(&self, p: &ChartPoint) -> f64 {
        self.chart.r_of_xi(p.x2).unwrap_or(f64::NAN)
    }

    fn partial(&self, axis: Axis) -> Option<ScalarField> {
        if axis != Axis::X2 {
            return Some(ScalarField::zero());
        }
        // dr/dξ = 1/√|ϖ²(r(ξ))|.
        let r = ScalarField::external(Arc::new(RadialChartField { chart: self.chart.clone() }));
        let p = self.chart.params;
        let varpi_sq = varpi_sq_of(&r, p);
        Some(ScalarField::one().div(&varpi_sq.sqrt_abs()))
    }

    fn name(&self) -> String {
        format!("r(xi; mu={}, eps={})", self.chart.params.mu, self.chart.params.epsilon)
    }

    fn fd_unsafe(&self) -> bool {
        true
    }
}

/// `ϖ²` as a field of a radius field.
fn varpi_sq_of(r: &ScalarField, p: SchwarzschildParams) -> ScalarField {
    ScalarField::one()
        .sub(&ScalarField::constant(2.0 * p.mu).div(r))
        .add(&ScalarField::constant(p.epsilon).div(&r.powi(2)))
}

/// Closed-form radius of the compressed radial chart
/// `ξ̌ = ∫ dr/√|r² − 2μr + ε|` (integration constant pinned to 0):
/// `r(ξ̌) = μ + E/2 + (μ² − ε)/2E` with `E = e^ξ̌`, valid outside the
/// degeneracy radius.  Exact identity: `dr/dξ̌ = √(r² − 2μr + ε)`.
pub fn radius_of_compressed_chart(params: SchwarzschildParams, coordinate: ScalarField) -> ScalarField {
    let e = coordinate.exp();
    let half = ScalarField::constant(0.5);
    ScalarField::constant(params.mu)
        .add(&half.mul(&e))
        .add(&ScalarField::constant(0.5 * (params.mu * params.mu - params.epsilon)).div(&e))
}

/// sin ϑ in the compressed angular chart `ϑ̌ = ∫ dϑ/sin ϑ`
/// (i.e. ϑ = 2 atan e^ϑ̌): `sin ϑ = sech ϑ̌`.
pub fn sin_theta_of_compressed_chart(coordinate: ScalarField) -> ScalarField {
    coordinate.sech()
}

/// cos ϑ in the compressed angular chart: `cos ϑ = −tanh ϑ̌`.
pub fn cos_theta_of_compressed_chart(coordinate: ScalarField) -> ScalarField {
    coordinate.tanh().neg()
}

// ---------------------------------------------------------------------------
// Wave seeds
// ---------------------------------------------------------------------------

/// Harmonic wave profile κ(x², x³, v) for the wave seed.
#[derive(Clone)]
pub enum WaveProfile {
    /// κ = (x² − y²) sin p: a plane monochromatic wave.
    Plane,
    /// κ = x y e^(p² − p₀²) / (x² + y²)² inside |p| < p₀, exactly 0 outside:
    /// a compactly supported packet (discontinuous at |p| = p₀).
    Packet { p0: f64 },
    /// User-supplied profile; must be harmonic in (x², x³) for the seed to
    /// be a vacuum solution.
    Custom(ScalarField),
}

impl WaveProfile {
    /// The profile as a field.
    pub fn kappa(&self) -> ScalarField {
        match self {
            WaveProfile::Plane => {
                let x = ScalarField::x2();
                let y = ScalarField::x3();
                x.powi(2).sub(&y.powi(2)).mul(&ScalarField::v().sin())
            }
            WaveProfile::Packet { p0 } => {
                let x = ScalarField::x2();
                let y = ScalarField::x3();
                let p = ScalarField::v();
                let body = x
                    .mul(&y)
                    .mul(&p.powi(2).sub(&ScalarField::constant(p0 * p0)).exp())
                    .div(&x.powi(2).add(&y.powi(2)).powi(2));
                windowed_in_v(body, *p0)
            }
            WaveProfile::Custom(field) => field.clone(),
        }
    }
}

/// Restrict a field to the window |v| < half_width (exactly zero outside).
///
/// The derivative rule differentiates the interior and keeps the window, so
/// it is exact away from the boundary surface |v| = half_width, where the
/// field is allowed to jump.
pub fn windowed_in_v(inner: ScalarField, half_width: f64) -> ScalarField {
    ScalarField::external(Arc::new(VWindow { inner, half_width }))
}

struct VWindow {
    inner: ScalarField,
    half_width: f64,
}

impl ExternField for VWindow {
    fn eval(&self, p: &ChartPoint) -> f64 {
        if p.v.abs() < self.half_width {
            self.inner.eval(p)
        } else {
            0.0
        }
    }

    fn partial(&self, axis: Axis) -> Option<ScalarField> {
        let d = self.inner.partial(axis)?;
        Some(windowed_in_v(d, self.half_width))
    }

    fn name(&self) -> String {
        format!("window(|v|<{})", self.half_width)
    }
}

// ---------------------------------------------------------------------------
// Primary seed builder
// ---------------------------------------------------------------------------

/// The five primary seed metrics.
#[derive(Clone)]
pub enum PrimaryKind {
    /// Spherical mass in the (ξ, ϑ) chart; anisotropic coordinate is the
    /// azimuthal angle, y⁵ is time.
    SphericalEmbedding(SchwarzschildParams),
    /// Same chart with the last two coordinates swapped: time is the
    /// anisotropic coordinate.
    SphericalTimeSwapped(SchwarzschildParams),
    /// Conformally rescaled seed in the compressed charts (ϑ̌, ξ̌); the
    /// anisotropic coordinate is the extra dimension, y⁵ is time.  Not a
    /// vacuum solution — a deformation target.
    ConformalSpherical(SchwarzschildParams),
    /// Conformally rescaled seed with time as the anisotropic coordinate.
    ConformalTimeAnisotropic(SchwarzschildParams),
    /// Vacuum wave seed with harmonic profile; h₄h₅ = −¼ identically.
    Wave { profile: WaveProfile, eps1: f64 },
}

/// Build a primary seed metric (diagonal: all frame coefficients zero).
pub fn build_primary(kind: &PrimaryKind) -> AnsatzMetric {
    match kind {
        PrimaryKind::SphericalEmbedding(p) => {
            let chart = SchwarzschildChart::new(*p);
            let r = chart.r_field();
            let sin_th = ScalarField::x3().sin();
            AnsatzMetric::diagonal(
                "spherical-embedding",
                p.eps1,
                ScalarField::constant(-1.0),
                r.powi(2).neg(),
                r.powi(2).mul(&sin_th.powi(2)).neg(),
                varpi_sq_of(&r, *p),
            )
        }
        PrimaryKind::SphericalTimeSwapped(p) => {
            let chart = SchwarzschildChart::new(*p);
            let r = chart.r_field();
            let sin_th = ScalarField::x3().sin();
            AnsatzMetric::diagonal(
                "spherical-time-swapped",
                p.eps1,
                ScalarField::constant(-1.0),
                r.powi(2).neg(),
                varpi_sq_of(&r, *p),
                r.powi(2).mul(&sin_th.powi(2)).neg(),
            )
        }
        PrimaryKind::ConformalSpherical(p) => {
            let r = radius_of_compressed_chart(*p, ScalarField::x3());
            let cosh_sq = ScalarField::x2().cosh().powi(2);
            let rg = p.r_g();
            AnsatzMetric::diagonal(
                "conformal-spherical",
                -rg * rg,
                ScalarField::constant(-rg * rg),
                cosh_sq.neg(),
                ScalarField::constant(p.eps1),
                varpi_sq_of(&r, *p).mul(&cosh_sq).div(&r.powi(2)),
            )
        }
        PrimaryKind::ConformalTimeAnisotropic(p) => {
            let r = radius_of_compressed_chart(*p, ScalarField::x3());
            let cosh_sq = ScalarField::x2().cosh().powi(2);
            let rg = p.r_g();
            AnsatzMetric::diagonal(
                "conformal-time-anisotropic",
                -rg * rg,
                ScalarField::constant(-rg * rg),
                cosh_sq.neg(),
                varpi_sq_of(&r, *p).mul(&cosh_sq).div(&r.powi(2)),
                ScalarField::constant(p.eps1),
            )
        }
        PrimaryKind::Wave { profile, eps1 } => {
            let kappa = profile.kappa();
            AnsatzMetric::diagonal(
                "wave-seed",
                *eps1,
                ScalarField::constant(-1.0),
                ScalarField::constant(-1.0),
                ScalarField::constant(-2.0).mul(&kappa),
                ScalarField::one().div(&ScalarField::constant(8.0).mul(&kappa)),
            )
        }
    }
}
