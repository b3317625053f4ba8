//! Solution generators: pipelines that construct ansatz metrics solving
//! the reduced field equations by design.
//!
//! Every generator returns a [`GeneratedSolution`] carrying the metric,
//! the effective constant λ it solves for, and the generating function φ
//! in closed form.  Generators build coefficients as differentiable
//! expression trees so their own derivatives are exact; *verification*
//! of the outputs goes through the residual evaluators in value-stencil
//! mode, a fully independent route.
//!
//! The v-sector construction underlying all pipelines: with
//! `φ = ln |h₅*/√|h₄h₅||` the vertical equation collapses to
//! `h₅* φ* = 2λ h₄ h₅`, solved by
//!
//! * **anisotropic route** (λ ≠ 0): prescribe φ, set
//!   `h₅ = h₅₀ + s·e^{2φ}/4λ` and `h₄ = −4e^{−2φ}[(√|h₅|)*]²`,
//! * **static route** (λ = 0): hold φ = const and take
//!   `h₄ = −h₀² [(√|h₅|)*]²` with `h₀ = 2e^{−φ}` for any h₅,
//!
//! and the mixing equations are solved by `wᵢ = −∂ᵢφ/φ*` (or are
//! identically degenerate when φ is constant) and
//! `nᵢ = nᵢ⁰ + nᵢ¹ ∫ |h₄| |h₅|^{−3/2} dv`.
//!
//! The horizontal sector is covered by the Liouville construction
//! (exact, nonlinear) and by the Poisson solver in [`crate::poisson`]
//! (linearised source form).


use crate::ansatz::AnsatzMetric;
use crate::chart::{Axis, ChartPoint};
use crate::diff::Differentiator;
use crate::error::{ForgeError, Result};
use crate::field::ScalarField;
use crate::quad::RunningIntegral;
use crate::rootfind::{solve_bracketed, RootConfig};
use crate::tolerances;

/// A generated exact solution: the metric, the effective constant λ of
/// the equations it solves, and its generating function φ in closed form.
#[derive(Clone)]
pub struct GeneratedSolution {
    pub metric: AnsatzMetric,
    pub lambda: f64,
    pub phi: ScalarField,
}

// ---------------------------------------------------------------------------
// Soliton profiles
// ---------------------------------------------------------------------------

/// Sine-Gordon kink moving along x² with speed `c` (|c| < 1):
/// `q = 4·atan exp[(v − c·x²)/√(1−c²)]`, which satisfies
/// `∂ᵥᵥq − ∂₂₂q = sin q` exactly.
pub fn sine_gordon_kink(c: f64) -> Result<ScalarField> {
    if !(c.abs() < 1.0) {
        return Err(ForgeError::InvalidConfig(format!(
            "kink speed must satisfy |c| < 1, got {c}"
        )));
    }
    let gamma = 1.0 / (1.0 - c * c).sqrt();
    let arg = ScalarField::v()
        .sub(&ScalarField::x2().mul(&ScalarField::constant(c)))
        .mul(&ScalarField::constant(gamma));
    Ok(arg.exp().atan().mul(&ScalarField::constant(4.0)))
}

/// Line soliton of the two-dimensional KdV-type equation
/// `η•• + ε (η′ + 6 η η* + η***)* = 0` with ε = −1:
/// `η = 2B² sech²(B v + 2B² x²)`.
pub fn kdv_line_soliton(b: f64) -> Result<ScalarField> {
    if b == 0.0 || !b.is_finite() {
        return Err(ForgeError::InvalidConfig(format!(
            "soliton parameter must be finite and nonzero, got {b}"
        )));
    }
    let theta = ScalarField::v()
        .mul(&ScalarField::constant(b))
        .add(&ScalarField::x2().mul(&ScalarField::constant(2.0 * b * b)));
    Ok(theta
        .sech()
        .powi(2)
        .mul(&ScalarField::constant(2.0 * b * b)))
}

/// Residual of the two-dimensional KdV-type equation
/// `η•• + ε (η′ + 6 η η* + η***)*` measured with value stencils only:
/// the third derivative is an outer first difference over second
/// differences, so the check is independent of how η was built.
pub fn kdv_residual(
    eta: &ScalarField,
    eps: f64,
    d: &Differentiator,
    p: &ChartPoint,
) -> Result<f64> {
    let inner = {
        let eta = eta.clone();
        let d = d.clone();
        ScalarField::from_fn("kdv-inner", move |q| {
            let e = eta.eval(q);
            let e_p = match d.d1(&eta, q, Axis::X3) {
                Ok(x) => x,
                Err(_) => return f64::NAN,
            };
            let e_s = match d.d1(&eta, q, Axis::V) {
                Ok(x) => x,
                Err(_) => return f64::NAN,
            };
            // η*** as a first difference of the second difference.
            let second = {
                let eta = eta.clone();
                let d = d.clone();
                ScalarField::from_fn("kdv-second", move |r| match d.d2(&eta, r, Axis::V) {
                    Ok(x) => x,
                    Err(_) => f64::NAN,
                })
            };
            let e_sss = match d.d1(&second, q, Axis::V) {
                Ok(x) => x,
                Err(_) => return f64::NAN,
            };
            e_p + 6.0 * e * e_s + e_sss
        })
    };
    let curvature = d.d2(eta, p, Axis::X2)?;
    let dispersion = d.d1(&inner, p, Axis::V)?;
    Ok(curvature + eps * dispersion)
}

// ---------------------------------------------------------------------------
// Horizontal sector
// ---------------------------------------------------------------------------

/// Exact Liouville solution of the horizontal equation for λ < 0:
/// returns (ψ, g) with `g₂ = g₃ = g = e^{2ψ}`,
/// `ψ = ½ ln(−b²/λ) − ln cosh(b x²)`, which satisfies
/// `ψ•• + ψ″ = λ e^{2ψ}` and therefore drives the horizontal residual
/// to λ-balanced zero.
pub fn liouville_horizontal(lambda: f64, b: f64) -> Result<(ScalarField, ScalarField)> {
    if !(lambda < 0.0) {
        return Err(ForgeError::InvalidConfig(format!(
            "the cosh-profile horizontal solution needs λ < 0, got {lambda}"
        )));
    }
    if b == 0.0 || !b.is_finite() {
        return Err(ForgeError::InvalidConfig(format!(
            "profile width must be finite and nonzero, got {b}"
        )));
    }
    let amp = -b * b / lambda;
    let sech = ScalarField::x2()
        .mul(&ScalarField::constant(b))
        .sech();
    // g = e^{2ψ} = amp · sech²(b x²); ψ = ½ ln amp + ln sech(b x²).
    let g = sech.powi(2).mul(&ScalarField::constant(amp));
    let psi = ScalarField::constant(0.5 * amp.ln()).add(&sech.ln_abs());
    Ok((psi, g))
}

// ---------------------------------------------------------------------------
// Mixing sector
// ---------------------------------------------------------------------------

/// Frame coefficients `wᵢ = −∂ᵢφ/φ*` as expression trees.  Requires φ to
/// carry exact partials; evaluation at points where φ* vanishes yields
/// non-finite values, so callers must gate the domain with
/// [`check_phi_star`].
pub fn w_from_phi(phi: &ScalarField) -> Result<[ScalarField; 2]> {
    let phi_star = phi
        .partial(Axis::V)
        .ok_or(ForgeError::NoExactPartial { field: "phi".into(), axis: "v" })?;
    let mut out = Vec::with_capacity(2);
    for (axis, name) in [(Axis::X2, "x2"), (Axis::X3, "x3")] {
        let dphi = phi
            .partial(axis)
            .ok_or(ForgeError::NoExactPartial { field: "phi".into(), axis: name })?;
        out.push(dphi.div(&phi_star).neg());
    }
    Ok([out.remove(0), out.remove(0)])
}

/// Reject points where the generating derivative φ* is below the quotient
/// floor: `wᵢ = −∂ᵢφ/φ*` carries no information there.
pub fn check_phi_star(phi: &ScalarField, points: &[ChartPoint]) -> Result<()> {
    let phi_star = phi
        .partial(Axis::V)
        .ok_or(ForgeError::NoExactPartial { field: "phi".into(), axis: "v" })?;
    for p in points {
        let val = phi_star.eval(p);
        if val.abs() <= tolerances::PHI_STAR_FLOOR {
            return Err(ForgeError::PhiStarZero {
                magnitude: val.abs(),
                floor: tolerances::PHI_STAR_FLOOR,
            });
        }
    }
    Ok(())
}

/// Frame coefficients `nᵢ = nᵢ⁰ + nᵢ¹ ∫ᵥ |h₄| |h₅|^{−3/2} dp` from the
/// running quadrature of the generated vertical blocks.  The integral
/// carries an exact v-derivative (the integrand), so verification in
/// value mode differentiates it cleanly.
pub fn n_from_quadrature(
    h4: &ScalarField,
    h5: &ScalarField,
    n0: [f64; 2],
    n1: [f64; 2],
    base: f64,
) -> [ScalarField; 2] {
    let integrand = h4.abs().mul(&h5.abs().powf_abs(-1.5));
    let primitive = RunningIntegral::along_v(integrand, base);
    let build = |k: usize| {
        ScalarField::constant(n0[k])
            .add(&primitive.mul(&ScalarField::constant(n1[k])))
    };
    [build(0), build(1)]
}

// ---------------------------------------------------------------------------
// Pipeline: solitonic string background
// ---------------------------------------------------------------------------

/// Parameters of the string-background pipeline: a prescribed generating
/// profile η and the constant-source magnitude `lambda_h` (the effective
/// constant is λ = −lambda_h²/2).
pub struct StringPipeline {
    /// Generating profile η(x², x³, v); must carry exact partials.
    pub profile: ScalarField,
    /// Source magnitude; λ = −lambda_h²/2.
    pub lambda_h: f64,
    /// Constant offset of h₅.
    pub h50: f64,
    /// Width of the horizontal cosh profile.
    pub b: f64,
    /// n-coefficient constants (nᵢ⁰) and quadrature weights (nᵢ¹).
    pub n0: [f64; 2],
    pub n1: [f64; 2],
    /// Base point of the running n-quadrature.
    pub n_base: f64,
}

impl StringPipeline {
    pub fn new(profile: ScalarField, lambda_h: f64) -> Self {
        StringPipeline {
            profile,
            lambda_h,
            h50: 0.0,
            b: 1.0,
            n0: [0.0, 0.0],
            n1: [0.0, 0.0],
            n_base: 0.0,
        }
    }

    /// Build the metric.  With φ = η the vertical pair is
    /// `h₅ = h₅₀ + e^{2η}/(2·lambda_h²)`, `h₄ = −4e^{−2η}[(√|h₅|)*]²`,
    /// the mixing coefficients are the gradient quotient and the
    /// n-quadrature, and the horizontal blocks are the Liouville profile
    /// for the same λ.
    pub fn build(&self) -> Result<GeneratedSolution> {
        if self.lambda_h == 0.0 || !self.lambda_h.is_finite() {
            return Err(ForgeError::InvalidConfig(format!(
                "source magnitude must be finite and nonzero, got {}",
                self.lambda_h
            )));
        }
        let lambda = -0.5 * self.lambda_h * self.lambda_h;
        let eta = &self.profile;
        let h5 = ScalarField::constant(self.h50).add(
            &eta.mul(&ScalarField::constant(2.0))
                .exp()
                .mul(&ScalarField::constant(0.5 / (self.lambda_h * self.lambda_h))),
        );
        let sqrt_h5_star = h5
            .sqrt_abs()
            .partial(Axis::V)
            .ok_or(ForgeError::NoExactPartial { field: "sqrt(h5)".into(), axis: "v" })?;
        let h4 = eta
            .mul(&ScalarField::constant(-2.0))
            .exp()
            .mul(&sqrt_h5_star.powi(2))
            .mul(&ScalarField::constant(-4.0));
        let w = w_from_phi(eta)?;
        let n = n_from_quadrature(&h4, &h5, self.n0, self.n1, self.n_base);
        let (_, g) = liouville_horizontal(lambda, self.b)?;
        let metric = AnsatzMetric::diagonal("string-background", 1.0, g.clone(), g, h4, h5)
            .with_w(w[0].clone(), w[1].clone())
            .with_n(n[0].clone(), n[1].clone());
        Ok(GeneratedSolution { metric, lambda, phi: eta.clone() })
    }
}

// ---------------------------------------------------------------------------
// Pipeline: vacuum background with factorised vertical blocks
// ---------------------------------------------------------------------------

/// Parameters of the vacuum (λ = 0) pipeline with factorised
/// `h₅ = b̆²(x²,x³) · [q(v) k(χ)]²`.
pub struct VacuumPipeline {
    /// Horizontal envelope b̆(x², x³); must carry exact partials.
    pub envelope: ScalarField,
    /// Vertical factor q(v); must be monotone on the domain of interest.
    pub q: ScalarField,
    /// Flow factor k(χ).
    pub k: ScalarField,
    /// Static-route constant; φ = ln(2/h₀).
    pub h0: f64,
    /// Optional potential for gradient-sourced n-coefficients
    /// `nᵢ = ∂ᵢ(potential)`; `None` leaves the n's at zero.
    pub n_potential: Option<ScalarField>,
}

impl VacuumPipeline {
    pub fn new(envelope: ScalarField, q: ScalarField, k: ScalarField, h0: f64) -> Self {
        VacuumPipeline { envelope, q, k, h0, n_potential: None }
    }

    pub fn with_n_potential(mut self, potential: ScalarField) -> Self {
        self.n_potential = Some(potential);
        self
    }

    /// Build the metric: `h₅ = (b̆ q k)²`, `h₄ = −h₀² b̆² k² (q*)²`
    /// (the static route with φ = ln(2/h₀) constant), and
    /// `wᵢ = ∂ᵢ(ln|b̆|) / (ln|q|)*`, which closes the torsion-free curl
    /// identically.
    pub fn build(&self) -> Result<GeneratedSolution> {
        if self.h0 == 0.0 || !self.h0.is_finite() {
            return Err(ForgeError::InvalidConfig(format!(
                "static-route constant must be finite and nonzero, got {}",
                self.h0
            )));
        }
        let bqk = self.envelope.mul(&self.q).mul(&self.k);
        let h5 = bqk.powi(2);
        let q_star = self
            .q
            .partial(Axis::V)
            .ok_or(ForgeError::NoExactPartial { field: "q".into(), axis: "v" })?;
        let h4 = self
            .envelope
            .mul(&self.k)
            .mul(&q_star)
            .powi(2)
            .mul(&ScalarField::constant(-self.h0 * self.h0));

        // wᵢ = ∂ᵢ(ln|b̆|)/(ln|q k|)* = q·∂ᵢb̆ / (b̆·q*).
        let mut w = Vec::with_capacity(2);
        for (axis, name) in [(Axis::X2, "x2"), (Axis::X3, "x3")] {
            let db = self
                .envelope
                .partial(axis)
                .ok_or(ForgeError::NoExactPartial { field: "envelope".into(), axis: name })?;
            w.push(self.q.mul(&db).div(&self.envelope.mul(&q_star)));
        }

        let (n2, n3) = match &self.n_potential {
            Some(pot) => (
                pot.partial(Axis::X2)
                    .ok_or(ForgeError::NoExactPartial { field: "n-potential".into(), axis: "x2" })?,
                pot.partial(Axis::X3)
                    .ok_or(ForgeError::NoExactPartial { field: "n-potential".into(), axis: "x3" })?,
            ),
            None => (ScalarField::zero(), ScalarField::zero()),
        };

        let metric = AnsatzMetric::diagonal(
            "vacuum-factorised",
            1.0,
            ScalarField::constant(-1.0),
            ScalarField::constant(-1.0),
            h4,
            h5,
        )
        .with_w(w.remove(0), w.remove(0))
        .with_n(n2, n3);
        let phi = ScalarField::constant((2.0 / self.h0.abs()).ln());
        Ok(GeneratedSolution { metric, lambda: 0.0, phi })
    }
}

// ---------------------------------------------------------------------------
// Pipeline: extra-dimension anisotropy with reciprocal polarisation
// ---------------------------------------------------------------------------

/// Parameters of the extra-dimension pipeline:
/// `h₅ = (f − f₀)²`, `h₄ = ε₄ h₀² (f*)² ς` with the *reciprocal* running
/// polarisation `1/ς = inv_sigma0(x²,x³) − ε₄ λ_h² h₀² ∫ᵥ (f−f₀) f* dp`.
/// The quadrature has the closed antiderivative `½(f−f₀)²`, which the
/// builder uses directly; tests cross-check it against the adaptive
/// quadrature route.
pub struct ExtradimPipeline {
    /// Prescribing profile f(v) (may also vary over x², x³).
    pub f: ScalarField,
    pub f0: f64,
    /// Static-route constant of the v-sector.
    pub h0: f64,
    /// Sign ε₄ = ±1 of the h₄ block.
    pub eps4: f64,
    /// Source magnitude; λ = −lambda_h²/2.
    pub lambda_h: f64,
    /// Horizontal seed 1/ς₀ as a field over (x², x³).
    pub inv_sigma0: ScalarField,
    /// Base point of the running polarisation integral.
    pub v_base: f64,
    /// Width of the horizontal cosh profile.
    pub b: f64,
}

impl ExtradimPipeline {
    pub fn build(&self) -> Result<GeneratedSolution> {
        if self.eps4.abs() != 1.0 {
            return Err(ForgeError::InvalidConfig(format!(
                "block sign must be ±1, got {}",
                self.eps4
            )));
        }
        if self.lambda_h == 0.0 || !self.lambda_h.is_finite() {
            return Err(ForgeError::InvalidConfig(format!(
                "source magnitude must be finite and nonzero, got {}",
                self.lambda_h
            )));
        }
        let lambda = -0.5 * self.lambda_h * self.lambda_h;
        let shifted = self.f.sub(&ScalarField::constant(self.f0));
        let f_star = self
            .f
            .partial(Axis::V)
            .ok_or(ForgeError::NoExactPartial { field: "f".into(), axis: "v" })?;
        let h5 = shifted.powi(2);

        // ∫ᵥ (f−f₀) f* dp = ½(f−f₀)²(v) − ½(f−f₀)²(base), exactly.
        let at_base = shifted.pinned(Axis::V, self.v_base);
        let integral = h5
            .mul(&ScalarField::constant(0.5))
            .sub(&at_base.powi(2).mul(&ScalarField::constant(0.5)));

        let coupling = -self.eps4 * self.lambda_h * self.lambda_h * self.h0 * self.h0;
        let inv_sigma = self
            .inv_sigma0
            .add(&integral.mul(&ScalarField::constant(coupling)));
        let sigma = ScalarField::one().div(&inv_sigma);
        let h4 = f_star
            .powi(2)
            .mul(&sigma)
            .mul(&ScalarField::constant(self.eps4 * self.h0 * self.h0));

        // φ = ln(2/h₀) − ½ ln|ς| and wᵢ = −∂ᵢφ/φ* = −∂ᵢς/ς*.
        let phi = ScalarField::constant((2.0 / self.h0.abs()).ln())
            .sub(&sigma.ln_abs().mul(&ScalarField::constant(0.5)));
        let w = w_from_phi(&phi)?;

        let (_, g) = liouville_horizontal(lambda, self.b)?;
        let metric = AnsatzMetric::diagonal("extradim-reciprocal", 1.0, g.clone(), g, h4, h5)
            .with_w(w[0].clone(), w[1].clone());
        Ok(GeneratedSolution { metric, lambda, phi })
    }
}

// ---------------------------------------------------------------------------
// Deformed-horizon geometry
// ---------------------------------------------------------------------------

/// Angular deformation term of the lapse-like function
/// `F(r, θ) = 1 − 2μ/r + ε (1/r² + 2q(θ))`.
pub enum RotoidTerm {
    /// `2q(θ) = q₀ sin(ω₀ θ + θ₀)/(4μ²) − 1/r²` — the sinusoid replaces
    /// the monopole correction entirely, so
    /// `F = 1 − 2μ/r + ε q₀ sin(ω₀ θ + θ₀)/(4μ²)`.
    Sinusoid { q0: f64, omega0: f64, theta0: f64 },
    /// No angular term: `F = 1 − 2μ/r + ε/r²` (static deformation).
    /// Note this is *not* the ω₀ → 0 member of the sinusoid family,
    /// which retains the constant `q₀ sin θ₀/(4μ²)`.
    Zero,
    /// Arbitrary angular profile `2q(θ)` supplied as a field of x³.
    Custom(ScalarField),
}

/// Deformed-horizon parameters.
pub struct RotoidParams {
    pub mu: f64,
    pub epsilon: f64,
    pub term: RotoidTerm,
}

impl RotoidParams {
    /// The lapse-like function F(r, θ).
    pub fn lapse(&self, r: f64, theta: f64) -> f64 {
        let base = 1.0 - 2.0 * self.mu / r;
        match &self.term {
            RotoidTerm::Sinusoid { q0, omega0, theta0 } => {
                base + self.epsilon * q0 * (omega0 * theta + theta0).sin()
                    / (4.0 * self.mu * self.mu)
            }
            RotoidTerm::Zero => base + self.epsilon / (r * r),
            RotoidTerm::Custom(q) => {
                base + self.epsilon * (1.0 / (r * r) + q.eval(&ChartPoint::new(0.0, theta, 0.0)))
            }
        }
    }

    /// Outer zero of F at fixed angle, in closed form where available.
    pub fn exact_root(&self, theta: f64) -> Result<f64> {
        match &self.term {
            RotoidTerm::Sinusoid { q0, omega0, theta0 } => {
                // 1 + x = 2μ/r with x = ε q₀ sin(ω₀θ+θ₀)/4μ².
                let x = self.epsilon * q0 * (omega0 * theta + theta0).sin()
                    / (4.0 * self.mu * self.mu);
                if x <= -1.0 {
                    return Err(ForgeError::InvalidConfig(format!(
                        "deformation {x} destroys the horizon (needs x > −1)"
                    )));
                }
                Ok(2.0 * self.mu / (1.0 + x))
            }
            RotoidTerm::Zero => {
                let disc = self.mu * self.mu - self.epsilon;
                if disc < 0.0 {
                    return Err(ForgeError::InvalidConfig(format!(
                        "deformation ε = {} removes the outer zero (μ² − ε < 0)",
                        self.epsilon
                    )));
                }
                Ok(self.mu + disc.sqrt())
            }
            RotoidTerm::Custom(_) => self.solved_root(theta),
        }
    }

    /// First-order (in the deformation) approximation of the outer zero:
    /// `r ≈ 2μ(1 − x)` for the sinusoid, `r ≈ 2μ − ε/2μ` for the static
    /// term.
    pub fn linearized_root(&self, theta: f64) -> f64 {
        match &self.term {
            RotoidTerm::Sinusoid { q0, omega0, theta0 } => {
                let x = self.epsilon * q0 * (omega0 * theta + theta0).sin()
                    / (4.0 * self.mu * self.mu);
                2.0 * self.mu * (1.0 - x)
            }
            RotoidTerm::Zero | RotoidTerm::Custom(_) => {
                2.0 * self.mu - self.epsilon / (2.0 * self.mu)
            }
        }
    }

    /// Outer zero found by bracketed root solving on F — the verification
    /// route, independent of the closed forms.
    pub fn solved_root(&self, theta: f64) -> Result<f64> {
        let f = |r: f64| self.lapse(r, theta);
        // Bracket around the undeformed zero 2μ, widening geometrically.
        let mut lo = self.mu; // F(μ) = −1 + O(ε) < 0
        let mut hi = 4.0 * self.mu;
        let mut tries = 0;
        while f(lo) >= 0.0 && tries < 60 {
            lo = self.mu + 0.5 * (lo - self.mu);
            tries += 1;
        }
        while f(hi) <= 0.0 && tries < 120 {
            hi *= 2.0;
            tries += 1;
        }
        solve_bracketed(&f, lo, hi, &RootConfig::default())
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
