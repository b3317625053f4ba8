//! Coordinate charts, axes and sampling grids.
//!
//! The ansatz lives on a 5-D chart `u = (x¹, x², x³, v, y⁵)` in which the
//! coefficients depend on `(x², x³, v)` only, plus an external family
//! parameter `χ` used by the flow module.  A [`ChartPoint`] carries all six
//! numbers; an [`Axis`] names one of the four directions along which the
//! calculus ever differentiates (x², x³, v, χ — nothing in the ansatz
//! depends on x¹ or y⁵).
//!
//! A [`GridSpec`] describes a rectangular sampling box together with the
//! finite-difference step policy.  Steps are given *in scaled coordinates*:
//! the physical step along an axis is `step × scale(axis)`, where the scale
//! defaults to the axis extent and may be overridden when an axis has a
//! natural length different from the sampled window (e.g. a narrow sampling
//! window across a wide soliton).  Expressing steps this way keeps a step
//! sweep such as `{2·10⁻³, 10⁻³, 5·10⁻⁴}` meaningful across scenarios whose
//! coordinate extents differ by orders of magnitude.

use crate::error::{ForgeError, Result};

/// A point of the 5-D chart, extended by the flow parameter χ.
///
/// Coefficient fields never depend on `x1` or `y5`; they are carried so that
/// reports can state the full evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub v: f64,
    pub y5: f64,
    /// Flow family parameter; 0 for static metrics.
    pub chi: f64,
}

impl ChartPoint {
    /// Point with the three active coordinates set and `x1 = y5 = χ = 0`.
    pub fn new(x2: f64, x3: f64, v: f64) -> Self {
        ChartPoint { x1: 0.0, x2, x3, v, y5: 0.0, chi: 0.0 }
    }

    /// Same point at flow parameter `chi`.
    pub fn at_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    /// Coordinate along a differentiation axis.
    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X2 => self.x2,
            Axis::X3 => self.x3,
            Axis::V => self.v,
            Axis::Chi => self.chi,
        }
    }

    /// Copy of the point with the coordinate along `axis` replaced.
    pub fn with(&self, axis: Axis, value: f64) -> Self {
        let mut p = *self;
        match axis {
            Axis::X2 => p.x2 = value,
            Axis::X3 => p.x3 = value,
            Axis::V => p.v = value,
            Axis::Chi => p.chi = value,
        }
        p
    }

    /// Copy of the point shifted by `delta` along `axis`.
    pub fn shifted(&self, axis: Axis, delta: f64) -> Self {
        self.with(axis, self.get(axis) + delta)
    }
}

/// A differentiation direction.
///
/// `X2`, `X3` are the anisotropy-free horizontal directions, `V` is the
/// anisotropic direction all starred derivatives refer to, and `Chi` is the
/// flow family parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X2,
    X3,
    V,
    Chi,
}

impl Axis {
    /// All four axes, in storage order.
    pub const ALL: [Axis; 4] = [Axis::X2, Axis::X3, Axis::V, Axis::Chi];

    /// Index used by per-axis storage (`[T; 4]`).
    pub fn index(self) -> usize {
        match self {
            Axis::X2 => 0,
            Axis::X3 => 1,
            Axis::V => 2,
            Axis::Chi => 3,
        }
    }

    /// Human-readable name used in errors and reports.
    pub fn name(self) -> &'static str {
        match self {
            Axis::X2 => "x2",
            Axis::X3 => "x3",
            Axis::V => "v",
            Axis::Chi => "chi",
        }
    }
}

/// One axis of a sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    /// Number of sample points along the axis (≥ 1; a single point sits at
    /// the interval midpoint).
    pub count: usize,
    /// Length scale used to convert the grid's relative finite-difference
    /// step into a physical step.  `None` means "use the extent `hi − lo`".
    pub derivative_scale: Option<f64>,
}

impl AxisSpec {
    /// Axis over `[lo, hi]` with `count` samples and default scale.
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        AxisSpec { lo, hi, count, derivative_scale: None }
    }

    /// Override the derivative length scale.
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.derivative_scale = Some(scale);
        self
    }

    /// Effective derivative length scale.
    pub fn scale(&self) -> f64 {
        self.derivative_scale.unwrap_or(self.hi - self.lo)
    }

    /// Sample coordinates: `count` points evenly spaced over `[lo, hi]`
    /// inclusive (midpoint when `count == 1`).
    pub fn samples(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        let n = self.count;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * (i as f64) / ((n - 1) as f64))
            .collect()
    }
}

/// A rectangular sampling grid over `(x², x³, v)` with a finite-difference
/// step policy and optional hard sampling domain used for stencil checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x2: AxisSpec,
    pub x3: AxisSpec,
    pub v: AxisSpec,
    /// Relative finite-difference step; physical step along an axis is
    /// `fd_step × axis.scale()`.
    pub fd_step: f64,
    /// Central-difference order: 2 (3-point) or 4 (5-point).
    pub fd_order: usize,
    /// When true, stencils must stay inside the axis interval extended by
    /// `stencil_margin`; when false the fields are assumed globally defined.
    pub bounded: bool,
    /// Extra room outside `[lo, hi]` a stencil may use when `bounded`.
    pub stencil_margin: f64,
}

/// Default relative finite-difference step, in scaled coordinates.
///
/// With fourth-order central stencils and second derivatives this sits well
/// above the f64 round-off floor (≈ (ε/scale)^(1/6) ≈ 2·10⁻³) while keeping
/// truncation error near 10⁻¹¹ relative for O(1)-smooth coefficients.
pub const DEFAULT_FD_STEP: f64 = 1.0e-3;

impl GridSpec {
    /// Grid with the given axes, default step `10⁻³` and 4th-order stencils.
    pub fn new(x2: AxisSpec, x3: AxisSpec, v: AxisSpec) -> Self {
        GridSpec {
            x2,
            x3,
            v,
            fd_step: DEFAULT_FD_STEP,
            fd_order: 4,
            bounded: false,
            stencil_margin: 0.0,
        }
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn with_fd_order(mut self, order: usize) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(ForgeError::InvalidConfig(format!(
                "finite-difference order must be 2 or 4, got {order}"
            )));
        }
        self.fd_order = order;
        self
            .validate()
            .map(|()| self)
    }

    /// Mark the grid as bounded: stencils may not leave the axis intervals
    /// extended by `margin`.
    pub fn bounded_with_margin(mut self, margin: f64) -> Self {
        self.bounded = true;
        self.stencil_margin = margin;
        self
    }

    fn validate(&self) -> Result<()> {
        for (axis, spec) in [(Axis::X2, &self.x2), (Axis::X3, &self.x3), (Axis::V, &self.v)] {
            if !(spec.lo < spec.hi) {
                return Err(ForgeError::InvalidConfig(format!(
                    "axis {} has empty interval [{}, {}]",
                    axis.name(),
                    spec.lo,
                    spec.hi
                )));
            }
            if spec.count == 0 {
                return Err(ForgeError::InvalidConfig(format!(
                    "axis {} has zero sample count",
                    axis.name()
                )));
            }
        }
        if !(self.fd_step > 0.0) {
            return Err(ForgeError::InvalidConfig(format!(
                "finite-difference step must be positive, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }

    /// Axis spec along a spatial axis (panics for `Chi`, which has no grid).
    pub fn axis(&self, axis: Axis) -> &AxisSpec {
        match axis {
            Axis::X2 => &self.x2,
            Axis::X3 => &self.x3,
            Axis::V => &self.v,
            Axis::Chi => panic!("chi is not a grid axis"),
        }
    }

    /// Physical finite-difference step along an axis.
    ///
    /// χ has no sampling interval; its derivatives use the raw relative step
    /// (the flow parameter is already O(1) by construction).
    pub fn physical_step(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Chi => self.fd_step,
            _ => self.fd_step * self.axis(axis).scale(),
        }
    }

    /// All grid points, x2-major then x3 then v (deterministic order).
    pub fn points(&self) -> Vec<ChartPoint> {
        let xs = self.x2.samples();
        let ys = self.x3.samples();
        let vs = self.v.samples();
        let mut out = Vec::with_capacity(xs.len() * ys.len() * vs.len());
        for &x in &xs {
            for &y in &ys {
                for &v in &vs {
                    out.push(ChartPoint::new(x, y, v));
                }
            }
        }
        out
    }

    /// Check that a centred stencil of half-width `half_span` (physical
    /// units) around `p` along `axis` stays inside the sampling domain.
    pub fn check_stencil(&self, p: &ChartPoint, axis: Axis, half_span: f64) -> Result<()> {
        if !self.bounded || axis == Axis::Chi {
            return Ok(());
        }
        let spec = self.axis(axis);
        let c = p.get(axis);
        let (lo, hi) = (c - half_span, c + half_span);
        let (dom_lo, dom_hi) = (spec.lo - self.stencil_margin, spec.hi + self.stencil_margin);
        if lo < dom_lo || hi > dom_hi {
            return Err(ForgeError::StencilOutOfDomain {
                axis: axis.name(),
                coordinate: c,
                lo,
                hi,
                dom_lo,
                dom_hi,
            });
        }
        Ok(())
    }
}
