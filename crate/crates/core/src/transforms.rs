//! Parametric deformations: polarization sets, conformal renormalisation,
//! and two-parameter composition.
//!
//! A polarization set multiplies the coefficients of an ansatz metric
//! slot-by-slot: the four block coefficients pick up factors
//! (η₂, η₃, η₄, η₅) and the four frame coefficients pick up their own
//! factors.  Applying a set to a solution produces a *candidate*: the
//! output is wrapped in [`Unverified`] and only a residual-suite run can
//! promote it, because a deformed solution is generally not a solution.
//!
//! Composition of two sets folds the first set's conformal
//! renormalisation into the product: block entries compose as
//! `(a/|a_g2|)·b`, frame entries as plain products.  The absolute value
//! makes composition order-sensitive (the left identity holds, the right
//! one does not), while keeping it associative — both properties are
//! tested.

use crate::ansatz::AnsatzMetric;
use crate::chart::ChartPoint;
use crate::error::{ForgeError, Result};
use crate::field::ScalarField;
use crate::tolerances;

/// A metric produced by a transform and not yet checked against the
/// field equations.  Call sites must run a residual suite on
/// [`Unverified::candidate`] before treating the contents as a solution;
/// `into_inner` documents that hand-off.
#[derive(Clone)]
pub struct Unverified<T>(T);

impl<T> Unverified<T> {
    pub fn new(value: T) -> Self {
        Unverified(value)
    }

    /// Borrow the candidate for verification runs.
    pub fn candidate(&self) -> &T {
        &self.0
    }

    /// Unwrap.  The caller asserts a residual suite has examined the
    /// candidate (or deliberately wants the raw object).
    pub fn into_inner(self) -> T {
        self.0
    }
}

/// Multiplicative deformation factors for every coefficient slot, with
/// the family parameter they are labelled by.
#[derive(Clone)]
pub struct PolarizationSet {
    /// Family parameter this set is labelled by.
    pub theta: f64,
    /// Block multipliers (η₂, η₃, η₄, η₅).
    pub g2: ScalarField,
    pub g3: ScalarField,
    pub h4: ScalarField,
    pub h5: ScalarField,
    /// Frame multipliers for the two w-slots and the two n-slots.
    pub w: [ScalarField; 2],
    pub n: [ScalarField; 2],
}

impl PolarizationSet {
    /// The identity deformation: every factor ≡ 1.
    pub fn identity(theta: f64) -> Self {
        let one = ScalarField::one;
        PolarizationSet {
            theta,
            g2: one(),
            g3: one(),
            h4: one(),
            h5: one(),
            w: [one(), one()],
            n: [one(), one()],
        }
    }

    fn entries(&self) -> [(&'static str, &ScalarField); 8] {
        [
            ("g2", &self.g2),
            ("g3", &self.g3),
            ("h4", &self.h4),
            ("h5", &self.h5),
            ("w2", &self.w[0]),
            ("w3", &self.w[1]),
            ("n2", &self.n[0]),
            ("n3", &self.n[1]),
        ]
    }

    /// Reject sets containing a literal zero factor (a degenerate
    /// deformation that annihilates a coefficient).  Pointwise zeros of
    /// non-constant factors surface during evaluation; use
    /// [`PolarizationSet::check_nonvanishing`] to sweep a domain.
    pub fn validate_literal(&self) -> Result<()> {
        for (name, field) in self.entries() {
            if field.constant_value() == Some(0.0) {
                return Err(ForgeError::InvalidConfig(format!(
                    "polarization factor {name} is identically zero"
                )));
            }
        }
        Ok(())
    }

    /// Check every factor stays away from zero on the given points.
    pub fn check_nonvanishing(&self, points: &[ChartPoint]) -> Result<()> {
        for (name, field) in self.entries() {
            for p in points {
                let v = field.eval(p);
                if !(v.abs() > tolerances::COEFF_DEGENERACY_FLOOR) {
                    return Err(ForgeError::DegenerateCoefficient {
                        name: match name {
                            "g2" => "eta(g2)",
                            "g3" => "eta(g3)",
                            "h4" => "eta(h4)",
                            "h5" => "eta(h5)",
                            "w2" => "eta(w2)",
                            "w3" => "eta(w3)",
                            "n2" => "eta(n2)",
                            _ => "eta(n3)",
                        },
                        value: v,
                        floor: tolerances::COEFF_DEGENERACY_FLOOR,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Multiply every coefficient slot of the metric by the corresponding
/// polarization factor.  The result is a candidate metric that must be
/// re-verified.
pub fn apply_polarizations(
    metric: &AnsatzMetric,
    pol: &PolarizationSet,
) -> Result<Unverified<AnsatzMetric>> {
    pol.validate_literal()?;
    let out = AnsatzMetric::diagonal(
        format!("{}+pol[{}]", metric.name, pol.theta),
        metric.g1,
        pol.g2.mul(&metric.g2),
        pol.g3.mul(&metric.g3),
        pol.h4.mul(&metric.h4),
        pol.h5.mul(&metric.h5),
    )
    .with_w(pol.w[0].mul(&metric.w[0]), pol.w[1].mul(&metric.w[1]))
    .with_n(pol.n[0].mul(&metric.n[0]), pol.n[1].mul(&metric.n[1]));
    Ok(Unverified::new(out))
}

/// Conformal renormalisation: divide the four block coefficients by the
/// set's horizontal factor η₂, so the g₂-slot's net polarization becomes
/// 1 and the others carry the ratios (η₃/η₂ on g₃, and so on).  Frame
/// coefficients are untouched — a conformal factor rescales the blocks,
/// not the frame.
pub fn conformal_renormalize(
    metric: &AnsatzMetric,
    pol: &PolarizationSet,
) -> Result<Unverified<AnsatzMetric>> {
    if pol.g2.constant_value() == Some(0.0) {
        return Err(ForgeError::InvalidConfig(
            "conformal factor is identically zero".into(),
        ));
    }
    let out = AnsatzMetric::diagonal(
        format!("{}+conf", metric.name),
        metric.g1,
        metric.g2.div(&pol.g2),
        metric.g3.div(&pol.g2),
        metric.h4.div(&pol.g2),
        metric.h5.div(&pol.g2),
    )
    .with_w(metric.w[0].clone(), metric.w[1].clone())
    .with_n(metric.n[0].clone(), metric.n[1].clone());
    Ok(Unverified::new(out))
}

/// Compose two deformations: the result of applying `a`, conformally
/// renormalising by |η₂ᵃ|, then applying `b`.  Block entries therefore
/// compose as `(aᵢ/|a.g2|)·bᵢ` and frame entries as plain products.
///
/// The absolute value in the folded conformal step makes the operation
/// order-sensitive — `compose(a, b)` and `compose(b, a)` differ whenever
/// `|a.g2| ≠ |b.g2|` — while `compose(identity, s) = s` exactly and the
/// operation stays associative.
pub fn compose_two_parameter(a: &PolarizationSet, b: &PolarizationSet) -> PolarizationSet {
    let norm = a.g2.abs();
    let block = |x: &ScalarField, y: &ScalarField| x.div(&norm).mul(y);
    PolarizationSet {
        theta: b.theta,
        g2: block(&a.g2, &b.g2),
        g3: block(&a.g3, &b.g3),
        h4: block(&a.h4, &b.h4),
        h5: block(&a.h5, &b.h5),
        w: [a.w[0].mul(&b.w[0]), a.w[1].mul(&b.w[1])],
        n: [a.n[0].mul(&b.n[0]), a.n[1].mul(&b.n[1])],
    }
}
