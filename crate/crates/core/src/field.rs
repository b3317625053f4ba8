//! Scalar coefficient fields with exact, memoized partial derivatives.
//!
//! Every metric coefficient, polarization and auxiliary quantity in the
//! workbench is a [`ScalarField`]: an immutable expression tree over the
//! chart coordinates.  Fields are cheap to clone (shared via `Arc`) and
//! carry lazily computed symbolic partials along each [`Axis`], so that
//! higher derivatives like `h₅**` or `∂ᵥ∂ₓ` chains are built once and
//! reused.
//!
//! Two kinds of leaves exist:
//!
//! * closed-form nodes (constants, coordinates, arithmetic, elementary
//!   functions), differentiated by the usual calculus rules;
//! * [`ExternField`] leaves — procedurally evaluated quantities such as
//!   running integrals, numeric chart inversions or grid interpolants.
//!   Each declares its own derivative rule per axis (possibly none) and
//!   whether its raw values carry controlled numerical noise, in which case
//!   finite differencing of *values* is meaningless and the exact rule must
//!   be used (see [`crate::diff`]).
//!
//! The constructors apply a small peephole simplifier (`x·0 → 0`,
//! `x + 0 → x`, constant folding, `−(−x) → x`…).  This is not for speed of
//! construction but to keep derivative trees compact: the product and
//! quotient rules generate many trivial factors whose removal keeps deep
//! derivative chains (up to fourth order in the soliton checks) both fast
//! and numerically clean.
//!
//! `ln` and square roots act on absolute values (`ln|u|`, `√|u|`)
//! throughout, matching how they enter the curvature residuals; their
//! derivative rules (`u'/u`, `sgn(u)·u'/(2√|u|)`) are exact away from
//! `u = 0`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::chart::{Axis, ChartPoint};

/// Chart coordinate usable in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
    X3,
    V,
    Y5,
    Chi,
}

impl Var {
    fn eval(self, p: &ChartPoint) -> f64 {
        match self {
            Var::X1 => p.x1,
            Var::X2 => p.x2,
            Var::X3 => p.x3,
            Var::V => p.v,
            Var::Y5 => p.y5,
            Var::Chi => p.chi,
        }
    }

    /// ∂(coordinate)/∂(axis): 1 on the matching axis, else 0.  The passive
    /// coordinates x¹ and y⁵ have zero derivative along every axis.
    fn partial_is_one(self, axis: Axis) -> bool {
        matches!(
            (self, axis),
            (Var::X2, Axis::X2) | (Var::X3, Axis::X3) | (Var::V, Axis::V) | (Var::Chi, Axis::Chi)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::X3 => "x3",
            Var::V => "v",
            Var::Y5 => "y5",
            Var::Chi => "chi",
        }
    }
}

/// Procedurally evaluated field leaf (running integral, chart inversion,
/// grid interpolant, …).
pub trait ExternField: Send + Sync {
    /// Value at a chart point.
    fn eval(&self, p: &ChartPoint) -> f64;

    /// Exact partial derivative along `axis`, if the leaf has one.
    fn partial(&self, axis: Axis) -> Option<ScalarField>;

    /// Short name for diagnostics.
    fn name(&self) -> String;

    /// True when raw values carry controlled numerical noise (e.g. adaptive
    /// quadrature at tolerance τ): finite differences of such values divide
    /// τ by powers of the step and must be avoided in favour of the exact
    /// derivative rule.
    fn fd_unsafe(&self) -> bool {
        false
    }
}

pub(crate) enum Node {
    Const(f64),
    Coord(Var),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Neg(ScalarField),
    /// Integer power uⁿ (n may be negative; u⁰ folds to 1 at construction).
    Powi(ScalarField, i32),
    /// |u|^a for real a.
    PowfAbs(ScalarField, f64),
    Exp(ScalarField),
    /// ln |u|.
    LnAbs(ScalarField),
    /// √|u|.
    SqrtAbs(ScalarField),
    Abs(ScalarField),
    /// sign(u) ∈ {−1, 0, 1}; derivative taken as 0 (a.e.).
    Signum(ScalarField),
    Sin(ScalarField),
    Cos(ScalarField),
    Tan(ScalarField),
    Atan(ScalarField),
    Sinh(ScalarField),
    Cosh(ScalarField),
    Tanh(ScalarField),
    Sech(ScalarField),
    Extern(Arc<dyn ExternField>),
}

struct FieldInner {
    node: Node,
    /// True when any leaf in the tree is an `ExternField` with noisy values.
    fd_unsafe: bool,
    /// Memoized symbolic partials along [x2, x3, v, chi].
    partials: [OnceLock<Option<ScalarField>>; 4],
}

/// An immutable scalar field on the chart; clones share the tree.
#[derive(Clone)]
pub struct ScalarField {
    inner: Arc<FieldInner>,
}

fn mk(node: Node, fd_unsafe: bool) -> ScalarField {
    ScalarField {
        inner: Arc::new(FieldInner {
            node,
            fd_unsafe,
            partials: [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()],
        }),
    }
}

impl ScalarField {
    // ---- constructors ---------------------------------------------------

    pub fn constant(c: f64) -> ScalarField {
        mk(Node::Const(c), false)
    }

    pub fn zero() -> ScalarField {
        ScalarField::constant(0.0)
    }

    pub fn one() -> ScalarField {
        ScalarField::constant(1.0)
    }

    pub fn coord(v: Var) -> ScalarField {
        mk(Node::Coord(v), false)
    }

    pub fn x2() -> ScalarField {
        ScalarField::coord(Var::X2)
    }

    pub fn x3() -> ScalarField {
        ScalarField::coord(Var::X3)
    }

    pub fn v() -> ScalarField {
        ScalarField::coord(Var::V)
    }

    pub fn chi() -> ScalarField {
        ScalarField::coord(Var::Chi)
    }

    pub fn external(ext: Arc<dyn ExternField>) -> ScalarField {
        let unsafe_values = ext.fd_unsafe();
        mk(Node::Extern(ext), unsafe_values)
    }

    /// Opaque value-only field from a closure: no exact partials, clean
    /// values (safe to difference).  Used for compound verification
    /// quantities that are deliberately built from *values* of other
    /// fields so that their differentiation stays route-independent.
    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(&ChartPoint) -> f64 + Send + Sync + 'static,
    ) -> ScalarField {
        struct Closure<F> {
            name: String,
            f: F,
        }
        impl<F: Fn(&ChartPoint) -> f64 + Send + Sync> ExternField for Closure<F> {
            fn eval(&self, p: &ChartPoint) -> f64 {
                (self.f)(p)
            }
            fn partial(&self, _: Axis) -> Option<ScalarField> {
                None
            }
            fn name(&self) -> String {
                self.name.clone()
            }
        }
        ScalarField::external(Arc::new(Closure { name: name.into(), f }))
    }

    /// The field with one coordinate pinned to a constant:
    /// `g(p) = f(p with axis = value)`.  The pinned axis's partial is
    /// zero; partials along the other axes commute with the substitution,
    /// so the result stays exactly differentiable when `self` is.
    pub fn pinned(&self, axis: Axis, value: f64) -> ScalarField {
        struct Pinned {
            inner: ScalarField,
            axis: Axis,
            value: f64,
        }
        impl ExternField for Pinned {
            fn eval(&self, p: &ChartPoint) -> f64 {
                self.inner.eval(&p.with(self.axis, self.value))
            }
            fn partial(&self, axis: Axis) -> Option<ScalarField> {
                if axis == self.axis {
                    return Some(ScalarField::zero());
                }
                Some(self.inner.partial(axis)?.pinned(self.axis, self.value))
            }
            fn name(&self) -> String {
                format!("pin[{}={}]", self.axis.name(), self.value)
            }
            fn fd_unsafe(&self) -> bool {
                self.inner.fd_unsafe()
            }
        }
        ScalarField::external(Arc::new(Pinned { inner: self.clone(), axis, value }))
    }

    fn as_const(&self) -> Option<f64> {
        match self.inner.node {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// The value of a literal constant field, if this is one.
    pub fn constant_value(&self) -> Option<f64> {
        self.as_const()
    }

    /// True when the tree contains an extern leaf with noisy raw values.
    pub fn fd_unsafe(&self) -> bool {
        self.inner.fd_unsafe
    }

    // ---- binary operations (peephole-simplified) ------------------------

    pub fn add(&self, rhs: &ScalarField) -> ScalarField {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => ScalarField::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => mk(
                Node::Add(self.clone(), rhs.clone()),
                self.fd_unsafe() || rhs.fd_unsafe(),
            ),
        }
    }

    pub fn sub(&self, rhs: &ScalarField) -> ScalarField {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => ScalarField::constant(a - b),
            (_, Some(b)) if b == 0.0 => self.clone(),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            _ => mk(
                Node::Sub(self.clone(), rhs.clone()),
                self.fd_unsafe() || rhs.fd_unsafe(),
            ),
        }
    }

    pub fn mul(&self, rhs: &ScalarField) -> ScalarField {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => ScalarField::constant(a * b),
            (Some(a), _) if a == 0.0 => ScalarField::zero(),
            (_, Some(b)) if b == 0.0 => ScalarField::zero(),
            (Some(a), _) if a == 1.0 => rhs.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => rhs.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => mk(
                Node::Mul(self.clone(), rhs.clone()),
                self.fd_unsafe() || rhs.fd_unsafe(),
            ),
        }
    }

    pub fn div(&self, rhs: &ScalarField) -> ScalarField {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => ScalarField::constant(a / b),
            (Some(a), _) if a == 0.0 => ScalarField::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => mk(
                Node::Div(self.clone(), rhs.clone()),
                self.fd_unsafe() || rhs.fd_unsafe(),
            ),
        }
    }

    pub fn neg(&self) -> ScalarField {
        match &self.inner.node {
            Node::Const(c) => ScalarField::constant(-c),
            Node::Neg(u) => u.clone(),
            _ => mk(Node::Neg(self.clone()), self.fd_unsafe()),
        }
    }

    // ---- unary operations ------------------------------------------------

    fn unary(&self, build: impl FnOnce(ScalarField) -> Node, fold: impl FnOnce(f64) -> f64) -> ScalarField {
        match self.as_const() {
            Some(c) => ScalarField::constant(fold(c)),
            None => mk(build(self.clone()), self.fd_unsafe()),
        }
    }

    pub fn powi(&self, n: i32) -> ScalarField {
        match n {
            0 => ScalarField::one(),
            1 => self.clone(),
            _ => self.unary(|u| Node::Powi(u, n), |c| c.powi(n)),
        }
    }

    /// |self|^a.
    pub fn powf_abs(&self, a: f64) -> ScalarField {
        if a == 0.0 {
            return ScalarField::one();
        }
        self.unary(|u| Node::PowfAbs(u, a), |c| c.abs().powf(a))
    }

    pub fn exp(&self) -> ScalarField {
        self.unary(Node::Exp, f64::exp)
    }

    /// ln |self|.
    pub fn ln_abs(&self) -> ScalarField {
        self.unary(Node::LnAbs, |c| c.abs().ln())
    }

    /// √|self|.
    pub fn sqrt_abs(&self) -> ScalarField {
        self.unary(Node::SqrtAbs, |c| c.abs().sqrt())
    }

    pub fn abs(&self) -> ScalarField {
        self.unary(Node::Abs, f64::abs)
    }

    pub fn signum(&self) -> ScalarField {
        self.unary(Node::Signum, |c| if c == 0.0 { 0.0 } else { c.signum() })
    }

    pub fn sin(&self) -> ScalarField {
        self.unary(Node::Sin, f64::sin)
    }

    pub fn cos(&self) -> ScalarField {
        self.unary(Node::Cos, f64::cos)
    }

    pub fn tan(&self) -> ScalarField {
        self.unary(Node::Tan, f64::tan)
    }

    pub fn atan(&self) -> ScalarField {
        self.unary(Node::Atan, f64::atan)
    }

    pub fn sinh(&self) -> ScalarField {
        self.unary(Node::Sinh, f64::sinh)
    }

    pub fn cosh(&self) -> ScalarField {
        self.unary(Node::Cosh, f64::cosh)
    }

    pub fn tanh(&self) -> ScalarField {
        self.unary(Node::Tanh, f64::tanh)
    }

    /// sech u = 1 / cosh u.
    pub fn sech(&self) -> ScalarField {
        self.unary(Node::Sech, |c| 1.0 / c.cosh())
    }

    // ---- evaluation -------------------------------------------------------

    /// Value of the field at a chart point.
    pub fn eval(&self, p: &ChartPoint) -> f64 {
        match &self.inner.node {
            Node::Const(c) => *c,
            Node::Coord(var) => var.eval(p),
            Node::Add(a, b) => a.eval(p) + b.eval(p),
            Node::Sub(a, b) => a.eval(p) - b.eval(p),
            Node::Mul(a, b) => a.eval(p) * b.eval(p),
            Node::Div(a, b) => a.eval(p) / b.eval(p),
            Node::Neg(u) => -u.eval(p),
            Node::Powi(u, n) => u.eval(p).powi(*n),
            Node::PowfAbs(u, a) => u.eval(p).abs().powf(*a),
            Node::Exp(u) => u.eval(p).exp(),
            Node::LnAbs(u) => u.eval(p).abs().ln(),
            Node::SqrtAbs(u) => u.eval(p).abs().sqrt(),
            Node::Abs(u) => u.eval(p).abs(),
            Node::Signum(u) => {
                let x = u.eval(p);
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
            Node::Sin(u) => u.eval(p).sin(),
            Node::Cos(u) => u.eval(p).cos(),
            Node::Tan(u) => u.eval(p).tan(),
            Node::Atan(u) => u.eval(p).atan(),
            Node::Sinh(u) => u.eval(p).sinh(),
            Node::Cosh(u) => u.eval(p).cosh(),
            Node::Tanh(u) => u.eval(p).tanh(),
            Node::Sech(u) => 1.0 / u.eval(p).cosh(),
            Node::Extern(e) => e.eval(p),
        }
    }

    // ---- differentiation --------------------------------------------------

    /// Exact symbolic partial along `axis`, memoized; `None` when the tree
    /// contains an extern leaf without a derivative rule for that axis.
    pub fn partial(&self, axis: Axis) -> Option<ScalarField> {
        self.inner.partials[axis.index()]
            .get_or_init(|| self.derive(axis))
            .clone()
    }

    /// Repeated exact partial along one axis (`order` ≥ 1).
    pub fn partial_n(&self, axis: Axis, order: usize) -> Option<ScalarField> {
        let mut f = self.clone();
        for _ in 0..order {
            f = f.partial(axis)?;
        }
        Some(f)
    }

    fn derive(&self, axis: Axis) -> Option<ScalarField> {
        let d = |u: &ScalarField| u.partial(axis);
        Some(match &self.inner.node {
            Node::Const(_) => ScalarField::zero(),
            Node::Coord(var) => {
                if var.partial_is_one(axis) {
                    ScalarField::one()
                } else {
                    ScalarField::zero()
                }
            }
            Node::Add(a, b) => d(a)?.add(&d(b)?),
            Node::Sub(a, b) => d(a)?.sub(&d(b)?),
            Node::Mul(a, b) => d(a)?.mul(b).add(&a.mul(&d(b)?)),
            Node::Div(a, b) => d(a)?.mul(b).sub(&a.mul(&d(b)?)).div(&b.powi(2)),
            Node::Neg(u) => d(u)?.neg(),
            Node::Powi(u, n) => ScalarField::constant(*n as f64)
                .mul(&u.powi(n - 1))
                .mul(&d(u)?),
            // d/dx |u|^a = a · |u|^(a−1) · sgn(u) · u'
            Node::PowfAbs(u, a) => ScalarField::constant(*a)
                .mul(&u.powf_abs(a - 1.0))
                .mul(&u.signum())
                .mul(&d(u)?),
            Node::Exp(u) => self.mul(&d(u)?),
            // d/dx ln|u| = u'/u
            Node::LnAbs(u) => d(u)?.div(u),
            // d/dx √|u| = sgn(u) · u' / (2√|u|)
            Node::SqrtAbs(u) => u
                .signum()
                .mul(&d(u)?)
                .div(&ScalarField::constant(2.0).mul(self)),
            Node::Abs(u) => u.signum().mul(&d(u)?),
            Node::Signum(_) => ScalarField::zero(),
            Node::Sin(u) => u.cos().mul(&d(u)?),
            Node::Cos(u) => u.sin().neg().mul(&d(u)?),
            // d/dx tan u = (1 + tan²u) u'
            Node::Tan(u) => ScalarField::one().add(&self.powi(2)).mul(&d(u)?),
            Node::Atan(u) => d(u)?.div(&ScalarField::one().add(&u.powi(2))),
            Node::Sinh(u) => u.cosh().mul(&d(u)?),
            Node::Cosh(u) => u.sinh().mul(&d(u)?),
            Node::Tanh(u) => u.sech().powi(2).mul(&d(u)?),
            Node::Sech(u) => self.mul(&u.tanh()).neg().mul(&d(u)?),
            Node::Extern(e) => return e.partial(axis),
        })
    }

    // ---- diagnostics ------------------------------------------------------

    /// Compact rendering for error messages; deep trees are elided.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        self.render(&mut s, 4);
        s
    }

    fn render(&self, out: &mut String, depth: usize) {
        if depth == 0 {
            out.push('…');
            return;
        }
        let bin = |out: &mut String, a: &ScalarField, op: &str, b: &ScalarField| {
            out.push('(');
            a.render(out, depth - 1);
            out.push_str(op);
            b.render(out, depth - 1);
            out.push(')');
        };
        let un = |out: &mut String, name: &str, u: &ScalarField| {
            out.push_str(name);
            out.push('(');
            u.render(out, depth - 1);
            out.push(')');
        };
        match &self.inner.node {
            Node::Const(c) => out.push_str(&format!("{c}")),
            Node::Coord(v) => out.push_str(v.name()),
            Node::Add(a, b) => bin(out, a, " + ", b),
            Node::Sub(a, b) => bin(out, a, " - ", b),
            Node::Mul(a, b) => bin(out, a, "*", b),
            Node::Div(a, b) => bin(out, a, "/", b),
            Node::Neg(u) => un(out, "-", u),
            Node::Powi(u, n) => {
                u.render(out, depth - 1);
                out.push_str(&format!("^{n}"));
            }
            Node::PowfAbs(u, a) => {
                out.push('|');
                u.render(out, depth - 1);
                out.push_str(&format!("|^{a}"));
            }
            Node::Exp(u) => un(out, "exp", u),
            Node::LnAbs(u) => un(out, "ln|", u),
            Node::SqrtAbs(u) => un(out, "sqrt|", u),
            Node::Abs(u) => un(out, "abs", u),
            Node::Signum(u) => un(out, "sgn", u),
            Node::Sin(u) => un(out, "sin", u),
            Node::Cos(u) => un(out, "cos", u),
            Node::Tan(u) => un(out, "tan", u),
            Node::Atan(u) => un(out, "atan", u),
            Node::Sinh(u) => un(out, "sinh", u),
            Node::Cosh(u) => un(out, "cosh", u),
            Node::Tanh(u) => un(out, "tanh", u),
            Node::Sech(u) => un(out, "sech", u),
            Node::Extern(e) => out.push_str(&format!("<{}>", e.name())),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.describe())
    }
}

// Operator sugar on references; trees are shared, so cloning is cheap.
macro_rules! impl_bin_op {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl std::ops::$trait for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$impl_fn(self, rhs)
            }
        }
        impl std::ops::$trait for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$impl_fn(&self, &rhs)
            }
        }
    };
}

impl_bin_op!(Add, add, add);
impl_bin_op!(Sub, sub, sub);
impl_bin_op!(Mul, mul, mul);
impl_bin_op!(Div, div, div);

impl std::ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(self)
    }
}

impl std::ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(&self)
    }
}
