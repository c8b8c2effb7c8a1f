//! BSDE coefficients `g(t, z)` and constraint penalties `phi(t, z)`, and the
//! two operations on coefficients that carry over to the induced risk
//! measures: dilatation `g_lam(z) = lam * g(z / lam)` and inf-convolution
//! `(g1 □ g2)(z) = inf_y { g1(z - y) + g2(y) }`.
//!
//! Coefficients never take `y` as an argument, so independence of `y` holds
//! by construction. Structural properties (convexity, subadditivity,
//! positive homogeneity, lower-affine bounds) are declared by the
//! constructors and can be spot-verified with [`Driver::spot_check`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::minimize::{closest_to_zero_in_level_set, scan_then_refine};

type CoefFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DriverFlags {
    pub convex: bool,
    pub subadditive: bool,
    pub positively_homogeneous: bool,
}

impl DriverFlags {
    pub const SUBLINEAR: Self = Self { convex: true, subadditive: true, positively_homogeneous: true };
    pub const CONVEX: Self = Self { convex: true, subadditive: false, positively_homogeneous: false };
}

/// Certificate `g(t, z) >= a * z + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerAffine {
    pub a: f64,
    pub b: f64,
}

/// Parameters of the built-in coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverSpec {
    Zero,
    /// `mu * z`
    Linear { mu: f64 },
    /// `mu * |z|`
    Abs { mu: f64 },
    /// `z^2 / (2 gamma)`, the entropic coefficient with risk tolerance `gamma`.
    Quadratic { gamma: f64 },
}

/// Radius on which the Lipschitz constant of a quadratic coefficient is declared.
pub const QUADRATIC_LIPSCHITZ_RADIUS: f64 = 10.0;

pub fn builtin_driver(spec: DriverSpec) -> Result<Driver> {
    match spec {
        DriverSpec::Zero => Ok(Driver::zero()),
        DriverSpec::Linear { mu } => Driver::linear(mu),
        DriverSpec::Abs { mu } => Driver::abs(mu),
        DriverSpec::Quadratic { gamma } => Driver::quadratic(gamma),
    }
}

#[derive(Clone)]
enum Shape {
    Zero,
    Linear(f64),
    Abs(f64),
    Quadratic(f64),
    Dilated { base: Arc<Driver>, lam: f64 },
    Sum(Arc<Driver>, Arc<Driver>),
    InfConv(Arc<InfConv>),
    Custom(CoefFn),
}

/// A BSDE coefficient `g(t, z)` with its declared structure.
#[derive(Clone)]
pub struct Driver {
    shape: Shape,
    lipschitz_m: f64,
    lipschitz_radius: f64,
    flags: DriverFlags,
    lower_affine: Option<LowerAffine>,
    label: String,
}

impl fmt::Debug for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Driver")
            .field("label", &self.label)
            .field("lipschitz_m", &self.lipschitz_m)
            .field("lipschitz_radius", &self.lipschitz_radius)
            .field("flags", &self.flags)
            .field("lower_affine", &self.lower_affine)
            .finish()
    }
}

fn check_real(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

impl Driver {
    pub fn zero() -> Self {
        Self {
            shape: Shape::Zero,
            lipschitz_m: 0.0,
            lipschitz_radius: f64::INFINITY,
            flags: DriverFlags::SUBLINEAR,
            lower_affine: Some(LowerAffine { a: 0.0, b: 0.0 }),
            label: "zero".into(),
        }
    }

    pub fn linear(mu: f64) -> Result<Self> {
        check_real("mu", mu)?;
        Ok(Self {
            shape: Shape::Linear(mu),
            lipschitz_m: mu.abs(),
            lipschitz_radius: f64::INFINITY,
            flags: DriverFlags::SUBLINEAR,
            lower_affine: Some(LowerAffine { a: mu, b: 0.0 }),
            label: format!("linear(mu={mu})"),
        })
    }

    /// `mu * |z|`; convex and sublinear only for `mu >= 0`.
    pub fn abs(mu: f64) -> Result<Self> {
        check_real("mu", mu)?;
        let sublinear = mu >= 0.0;
        Ok(Self {
            shape: Shape::Abs(mu),
            lipschitz_m: mu.abs(),
            lipschitz_radius: f64::INFINITY,
            flags: DriverFlags {
                convex: sublinear,
                subadditive: sublinear,
                positively_homogeneous: true,
            },
            lower_affine: sublinear.then_some(LowerAffine { a: 0.0, b: 0.0 }),
            label: format!("abs(mu={mu})"),
        })
    }

    pub fn quadratic(gamma: f64) -> Result<Self> {
        check_positive("gamma", gamma)?;
        Ok(Self {
            shape: Shape::Quadratic(gamma),
            lipschitz_m: QUADRATIC_LIPSCHITZ_RADIUS / gamma,
            lipschitz_radius: QUADRATIC_LIPSCHITZ_RADIUS,
            flags: DriverFlags::CONVEX,
            lower_affine: Some(LowerAffine { a: 0.0, b: 0.0 }),
            label: format!("quadratic(gamma={gamma})"),
        })
    }

    /// Arbitrary coefficient. The caller declares its structure; nothing is
    /// verified until [`Driver::spot_check`] is run.
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz_m: f64,
        flags: DriverFlags,
        lower_affine: Option<LowerAffine>,
    ) -> Self {
        Self {
            shape: Shape::Custom(Arc::new(f)),
            lipschitz_m,
            lipschitz_radius: f64::INFINITY,
            flags,
            lower_affine,
            label: label.into(),
        }
    }

    /// Pointwise sum `self + other`.
    pub fn plus(&self, other: &Driver) -> Driver {
        let f1 = self.flags;
        let f2 = other.flags;
        Driver {
            shape: Shape::Sum(Arc::new(self.clone()), Arc::new(other.clone())),
            lipschitz_m: self.lipschitz_m + other.lipschitz_m,
            lipschitz_radius: self.lipschitz_radius.min(other.lipschitz_radius),
            flags: DriverFlags {
                convex: f1.convex && f2.convex,
                subadditive: f1.subadditive && f2.subadditive,
                positively_homogeneous: f1.positively_homogeneous && f2.positively_homogeneous,
            },
            lower_affine: match (self.lower_affine, other.lower_affine) {
                (Some(l1), Some(l2)) => Some(LowerAffine { a: l1.a + l2.a, b: l1.b + l2.b }),
                _ => None,
            },
            label: format!("{} + {}", self.label, other.label),
        }
    }

    /// Replace the declared flags (they are spot-checked, not trusted).
    pub fn with_flags(mut self, flags: DriverFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, z: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Linear(mu) => mu * z,
            Shape::Abs(mu) => mu * z.abs(),
            Shape::Quadratic(gamma) => z * z / (2.0 * gamma),
            Shape::Dilated { base, lam } => lam * base.eval(t, z / lam),
            Shape::Sum(a, b) => a.eval(t, z) + b.eval(t, z),
            Shape::InfConv(ic) => ic.value(t, z),
            Shape::Custom(f) => f(t, z),
        }
    }

    pub fn lipschitz_m(&self) -> f64 {
        self.lipschitz_m
    }

    /// Radius of the `z`-range on which [`Driver::lipschitz_m`] holds
    /// (infinite for globally Lipschitz coefficients).
    pub fn lipschitz_radius(&self) -> f64 {
        self.lipschitz_radius
    }

    pub fn flags(&self) -> DriverFlags {
        self.flags
    }

    pub fn lower_affine(&self) -> Option<LowerAffine> {
        self.lower_affine
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Points where the coefficient is known not to be differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Abs(_) => vec![0.0],
            Shape::Dilated { base, lam } => base.kinks().into_iter().map(|k| k * lam).collect(),
            Shape::Sum(a, b) => {
                let mut k = a.kinks();
                k.extend(b.kinks());
                k
            }
            Shape::InfConv(ic) if ic.rule == ArgminRule::Breakpoints => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// Dilatation `lam * g(t, z / lam)`.
    pub fn dilate(&self, lam: f64) -> Result<Driver> {
        check_positive("dilatation factor", lam)?;
        let label = format!("dilate({}, {lam})", self.label);
        let shape = match &self.shape {
            // positively homogeneous built-ins are fixed points
            Shape::Zero | Shape::Linear(_) | Shape::Abs(_) => self.shape.clone(),
            Shape::Quadratic(gamma) => Shape::Quadratic(gamma * lam),
            Shape::Dilated { base, lam: inner } => {
                Shape::Dilated { base: base.clone(), lam: inner * lam }
            }
            _ => Shape::Dilated { base: Arc::new(self.clone()), lam },
        };
        Ok(Driver {
            shape,
            lipschitz_m: self.lipschitz_m,
            lipschitz_radius: self.lipschitz_radius * lam,
            flags: self.flags,
            lower_affine: self.lower_affine.map(|l| LowerAffine { a: l.a, b: lam * l.b }),
            label,
        })
    }

    /// Inf-convolution `inf_y { g1(t, z - y) + g2(t, y) }`.
    ///
    /// Both coefficients must be declared convex and carry lower-affine
    /// certificates with a common slope, which keeps the infimum finite and
    /// attained. Quadratic pairs and pairs of positively homogeneous
    /// built-ins use closed forms; everything else is minimized numerically.
    pub fn infconv(g1: &Driver, g2: &Driver, opts: InfConvOptions) -> Result<Driver> {
        if !(g1.flags.convex && g2.flags.convex) {
            return Err(Error::Unsupported(format!(
                "inf-convolution needs convex coefficients ({} / {})",
                g1.label, g2.label
            )));
        }
        let (l1, l2) = match (g1.lower_affine, g2.lower_affine) {
            (Some(l1), Some(l2)) => (l1, l2),
            _ => {
                return Err(Error::IllPosed(
                    "inf-convolution needs lower-affine certificates on both coefficients".into(),
                ))
            }
        };
        if (l1.a - l2.a).abs() > 1e-12 * (1.0 + l1.a.abs()) {
            return Err(Error::IllPosed(format!(
                "lower-affine slopes differ ({} vs {}); the infimum may be -inf",
                l1.a, l2.a
            )));
        }
        if !(opts.refine_tol > 0.0) || opts.grid_points < 3 {
            return Err(Error::InvalidInput("inf-convolution needs refine_tol > 0 and at least 3 grid points".into()));
        }
        if let Some(w) = opts.half_width {
            check_positive("half_width", w)?;
        }
        let rule = match (&g1.shape, &g2.shape) {
            (Shape::Quadratic(a), Shape::Quadratic(b)) => ArgminRule::Proportional(b / (a + b)),
            (s1, s2) if s1.is_homogeneous_builtin() && s2.is_homogeneous_builtin() => {
                ArgminRule::Breakpoints
            }
            _ => ArgminRule::Numeric,
        };
        let f1 = g1.flags;
        let f2 = g2.flags;
        let label = format!("infconv({}, {})", g1.label, g2.label);
        Ok(Driver {
            lipschitz_m: g1.lipschitz_m.min(g2.lipschitz_m),
            lipschitz_radius: g1.lipschitz_radius.min(g2.lipschitz_radius),
            flags: DriverFlags {
                convex: true,
                subadditive: f1.subadditive && f2.subadditive,
                positively_homogeneous: f1.positively_homogeneous && f2.positively_homogeneous,
            },
            lower_affine: Some(LowerAffine { a: l1.a, b: l1.b + l2.b }),
            shape: Shape::InfConv(Arc::new(InfConv { g1: g1.clone(), g2: g2.clone(), opts, rule })),
            label,
        })
    }

    /// The minimizing `y` of `g1(t, z - y) + g2(t, y)` for a coefficient
    /// built by [`Driver::infconv`]. Ties go to the smallest `|y|`.
    pub fn infconv_argmin(&self, t: f64, z: f64) -> Result<f64> {
        match &self.shape {
            Shape::InfConv(ic) => Ok(ic.argmin(t, z)),
            _ => Err(Error::Usage(format!("{} is not an inf-convolution", self.label))),
        }
    }

    /// The two factors of an inf-convolution.
    pub fn infconv_factors(&self) -> Option<(&Driver, &Driver)> {
        match &self.shape {
            Shape::InfConv(ic) => Some((&ic.g1, &ic.g2)),
            _ => None,
        }
    }

    /// True for inf-convolutions evaluated through a closed-form minimizer.
    pub fn uses_closed_form(&self) -> bool {
        matches!(&self.shape, Shape::InfConv(ic) if ic.rule != ArgminRule::Numeric)
    }

    /// Sample the declared structure and report the largest violation of
    /// each property. Flags that are not declared report zero.
    pub fn spot_check(&self) -> DriverCheck {
        let radius = self.lipschitz_radius.min(5.0);
        let zs: Vec<f64> = (0..=40).map(|i| -radius + 2.0 * radius * i as f64 / 40.0).collect();
        let ts = [0.0, 0.5, 1.0];
        let mut check = DriverCheck::default();
        for &t in &ts {
            check.zero_at_zero = check.zero_at_zero.max(self.eval(t, 0.0).abs());
            for &z1 in &zs {
                let g1 = self.eval(t, z1);
                if let Some(l) = self.lower_affine {
                    check.lower_affine = check.lower_affine.max(l.a * z1 + l.b - g1);
                }
                for &z2 in &zs {
                    let g2 = self.eval(t, z2);
                    check.lipschitz = check
                        .lipschitz
                        .max((g1 - g2).abs() - self.lipschitz_m * (z1 - z2).abs());
                    if self.flags.convex {
                        let mid = self.eval(t, 0.5 * (z1 + z2));
                        check.convexity = check.convexity.max(mid - 0.5 * (g1 + g2));
                    }
                    if self.flags.subadditive && (z1 + z2).abs() <= radius {
                        let s = self.eval(t, z1 + z2);
                        check.subadditivity = check.subadditivity.max(s - g1 - g2);
                    }
                }
                if self.flags.positively_homogeneous {
                    for lam in [0.5, 2.0, 5.0] {
                        let scaled = self.eval(t, lam * z1 / 5.0);
                        let expect = lam * self.eval(t, z1 / 5.0);
                        check.homogeneity = check.homogeneity.max((scaled - expect).abs());
                    }
                }
            }
        }
        check
    }
}

impl Shape {
    fn is_homogeneous_builtin(&self) -> bool {
        matches!(self, Shape::Zero | Shape::Linear(_) | Shape::Abs(_))
    }
}

/// Largest sampled violation of each declared driver property.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DriverCheck {
    pub lipschitz: f64,
    pub zero_at_zero: f64,
    pub lower_affine: f64,
    pub convexity: f64,
    pub subadditivity: f64,
    pub homogeneity: f64,
}

impl DriverCheck {
    pub fn failures(&self, tol: f64) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, v) in [
            ("lipschitz", self.lipschitz),
            ("zero_at_zero", self.zero_at_zero),
            ("lower_affine", self.lower_affine),
            ("convexity", self.convexity),
            ("subadditivity", self.subadditivity),
            ("homogeneity", self.homogeneity),
        ] {
            if v > tol {
                out.push(name);
            }
        }
        out
    }
}

/// Numeric settings for [`Driver::infconv`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfConvOptions {
    /// Half width of the search window for `y`; `None` uses `10 * (1 + |z|)`.
    pub half_width: Option<f64>,
    pub grid_points: usize,
    /// Golden-section tolerance on `y`.
    pub refine_tol: f64,
}

impl Default for InfConvOptions {
    fn default() -> Self {
        Self { half_width: None, grid_points: 1001, refine_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ArgminRule {
    /// Quadratic pair: `y = gamma2 / (gamma1 + gamma2) * z`.
    Proportional(f64),
    /// Positively homogeneous pair: the objective is piecewise linear in `y`
    /// with breaks at `0` and `z`, so one of them is optimal.
    Breakpoints,
    Numeric,
}

struct InfConv {
    g1: Driver,
    g2: Driver,
    opts: InfConvOptions,
    rule: ArgminRule,
}

impl InfConv {
    #[inline]
    fn objective(&self, t: f64, z: f64, y: f64) -> f64 {
        self.g1.eval(t, z - y) + self.g2.eval(t, y)
    }

    fn argmin(&self, t: f64, z: f64) -> f64 {
        match self.rule {
            ArgminRule::Proportional(share) => share * z,
            ArgminRule::Breakpoints => {
                if self.objective(t, z, z) < self.objective(t, z, 0.0) {
                    z
                } else {
                    0.0
                }
            }
            ArgminRule::Numeric => {
                let w = self.opts.half_width.unwrap_or(10.0 * (1.0 + z.abs()));
                let f = |y: f64| self.objective(t, z, y);
                let (y, fy) = scan_then_refine(f, -w, w, self.opts.grid_points, self.opts.refine_tol);
                let slack = 16.0 * f64::EPSILON * (1.0 + fy.abs());
                closest_to_zero_in_level_set(f, y, fy, slack, self.opts.refine_tol)
            }
        }
    }

    fn value(&self, t: f64, z: f64) -> f64 {
        self.objective(t, z, self.argmin(t, z))
    }
}

/// Parameters of the built-in constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSpec {
    /// `phi = 0`: unconstrained.
    None,
    /// `phi = max(|z| - k, 0)`: `|z| <= k`.
    ZBand { k: f64 },
    /// `phi = max(k - z, 0)`: `z >= k`.
    ZFloor { k: f64 },
    /// `phi = max(-z, 0)`: `z >= 0`.
    ZSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConstraintFlags {
    pub zero_at_zero: bool,
    pub subadditive: bool,
    pub positively_homogeneous: bool,
}

#[derive(Clone)]
enum ConstraintShape {
    None,
    ZBand(f64),
    ZFloor(f64),
    Custom(CoefFn, Vec<f64>),
}

/// Penalty `phi(t, z) >= 0` whose zero set is the admissible set of `z`.
#[derive(Clone)]
pub struct Constraint {
    shape: ConstraintShape,
    flags: ConstraintFlags,
    label: String,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint").field("label", &self.label).field("flags", &self.flags).finish()
    }
}

pub fn builtin_constraint(spec: ConstraintSpec) -> Result<Constraint> {
    match spec {
        ConstraintSpec::None => Ok(Constraint::none()),
        ConstraintSpec::ZBand { k } => Constraint::z_band(k),
        ConstraintSpec::ZFloor { k } => Constraint::z_floor(k),
        ConstraintSpec::ZSign => Ok(Constraint::z_sign()),
    }
}

impl Constraint {
    pub fn none() -> Self {
        Self {
            shape: ConstraintShape::None,
            flags: ConstraintFlags { zero_at_zero: true, subadditive: true, positively_homogeneous: true },
            label: "none".into(),
        }
    }

    pub fn z_band(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidInput(format!("z_band needs k >= 0, got {k}")));
        }
        Ok(Self {
            shape: ConstraintShape::ZBand(k),
            // |z1 + z2| - k <= (|z1| - k) + (|z2| - k) needs k <= 0
            flags: ConstraintFlags { zero_at_zero: true, subadditive: k == 0.0, positively_homogeneous: k == 0.0 },
            label: format!("z_band(k={k})"),
        })
    }

    /// `z >= k`. Contains `0` only for `k <= 0` and is subadditive only for `k >= 0`.
    pub fn z_floor(k: f64) -> Result<Self> {
        check_real("k", k)?;
        Ok(Self {
            shape: ConstraintShape::ZFloor(k),
            flags: ConstraintFlags {
                zero_at_zero: k <= 0.0,
                subadditive: k >= 0.0,
                positively_homogeneous: k == 0.0,
            },
            label: format!("z_floor(k={k})"),
        })
    }

    pub fn z_sign() -> Self {
        Self {
            shape: ConstraintShape::ZFloor(0.0),
            flags: ConstraintFlags { zero_at_zero: true, subadditive: true, positively_homogeneous: true },
            label: "z_sign".into(),
        }
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        flags: ConstraintFlags,
        kinks: Vec<f64>,
    ) -> Self {
        Self { shape: ConstraintShape::Custom(Arc::new(f), kinks), flags, label: label.into() }
    }

    #[inline]
    pub fn eval(&self, t: f64, z: f64) -> f64 {
        match &self.shape {
            ConstraintShape::None => 0.0,
            ConstraintShape::ZBand(k) => (z.abs() - k).max(0.0),
            ConstraintShape::ZFloor(k) => (k - z).max(0.0),
            ConstraintShape::Custom(f, _) => f(t, z),
        }
    }

    /// True for the unconstrained penalty `phi = 0`.
    pub fn is_trivial(&self) -> bool {
        matches!(self.shape, ConstraintShape::None)
    }

    pub fn flags(&self) -> ConstraintFlags {
        self.flags
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Boundary points of the admissible set, where the penalty has kinks.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.shape {
            ConstraintShape::None => Vec::new(),
            ConstraintShape::ZBand(k) if *k == 0.0 => vec![0.0],
            ConstraintShape::ZBand(k) => vec![-k, *k],
            ConstraintShape::ZFloor(k) => vec![*k],
            ConstraintShape::Custom(_, kinks) => kinks.clone(),
        }
    }

    pub fn spot_check(&self) -> ConstraintCheck {
        let zs: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
        let mut check = ConstraintCheck::default();
        for t in [0.0, 0.5, 1.0] {
            if self.flags.zero_at_zero {
                check.zero_at_zero = check.zero_at_zero.max(self.eval(t, 0.0).abs());
            }
            for &z1 in &zs {
                let p1 = self.eval(t, z1);
                check.nonnegativity = check.nonnegativity.max(-p1);
                if self.flags.subadditive {
                    for &z2 in &zs {
                        let s = self.eval(t, z1 + z2);
                        check.subadditivity = check.subadditivity.max(s - p1 - self.eval(t, z2));
                    }
                }
                if self.flags.positively_homogeneous {
                    for lam in [0.5, 2.0, 5.0] {
                        let diff = self.eval(t, lam * z1) - lam * p1;
                        check.homogeneity = check.homogeneity.max(diff.abs());
                    }
                }
            }
        }
        check
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstraintCheck {
    pub nonnegativity: f64,
    pub zero_at_zero: f64,
    pub subadditivity: f64,
    pub homogeneity: f64,
}

impl ConstraintCheck {
    pub fn failures(&self, tol: f64) -> Vec<&'static str> {
        [
            ("nonnegativity", self.nonnegativity),
            ("zero_at_zero", self.zero_at_zero),
            ("subadditivity", self.subadditivity),
            ("homogeneity", self.homogeneity),
        ]
        .into_iter()
        .filter(|(_, v)| *v > tol)
        .map(|(n, _)| n)
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=100).map(|i| -5.0 + 0.1 * i as f64).collect()
    }

    #[test]
    fn builtin_values() {
        let q = builtin_driver(DriverSpec::Quadratic { gamma: 1.0 }).unwrap();
        assert_eq!(q.eval(0.0, 2.0), 2.0);
        let a = builtin_driver(DriverSpec::Abs { mu: 0.5 }).unwrap();
        assert_eq!(a.eval(0.3, -3.0), 1.5);
        let z = builtin_driver(DriverSpec::Zero).unwrap();
        assert_eq!(z.eval(0.7, 12.0), 0.0);
        assert_eq!(z.lipschitz_m(), 0.0);
        assert!(matches!(Driver::quadratic(0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(Driver::quadratic(-1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn builtin_flags_survive_spot_checks() {
        for d in [
            Driver::zero(),
            Driver::linear(-0.7).unwrap(),
            Driver::abs(0.5).unwrap(),
            Driver::quadratic(0.8).unwrap(),
        ] {
            let check = d.spot_check();
            assert!(check.failures(1e-12).is_empty(), "{d:?}: {check:?}");
        }
        let abs = Driver::abs(1.0).unwrap().flags();
        assert!(abs.convex && abs.subadditive && abs.positively_homogeneous);
        let quad = Driver::quadratic(1.0).unwrap().flags();
        assert!(quad.convex && !quad.positively_homogeneous);
    }

    #[test]
    fn misdeclared_homogeneity_is_caught() {
        let d = Driver::quadratic(1.0).unwrap().with_flags(DriverFlags::SUBLINEAR);
        let fails = d.spot_check().failures(1e-9);
        assert!(fails.contains(&"homogeneity"));
        assert!(fails.contains(&"subadditivity"));
    }

    #[test]
    fn constraint_values() {
        assert_eq!(Constraint::none().eval(0.0, 9.0), 0.0);
        assert_eq!(builtin_constraint(ConstraintSpec::ZBand { k: 1.0 }).unwrap().eval(0.0, 1.5), 0.5);
        let s = builtin_constraint(ConstraintSpec::ZSign).unwrap();
        assert_eq!(s.eval(0.0, 2.0), 0.0);
        assert_eq!(s.eval(0.0, -2.0), 2.0);
        assert!(matches!(Constraint::z_band(-0.1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn constraint_flags_survive_spot_checks() {
        for c in [
            Constraint::none(),
            Constraint::z_band(0.0).unwrap(),
            Constraint::z_band(1.0).unwrap(),
            Constraint::z_floor(1.0).unwrap(),
            Constraint::z_floor(-1.0).unwrap(),
            Constraint::z_sign(),
        ] {
            assert!(c.spot_check().failures(1e-12).is_empty(), "{c:?}");
        }
        assert!(!Constraint::z_band(1.0).unwrap().flags().positively_homogeneous);
        assert!(!Constraint::z_band(1.0).unwrap().flags().subadditive);
        assert!(Constraint::z_band(0.0).unwrap().flags().positively_homogeneous);
        assert!(!Constraint::z_floor(1.0).unwrap().flags().zero_at_zero);
    }

    #[test]
    fn dilate_examples() {
        let a = Driver::abs(1.0).unwrap();
        let a7 = a.dilate(7.0).unwrap();
        let q3 = Driver::quadratic(1.0).unwrap().dilate(3.0).unwrap();
        for z in grid() {
            assert_eq!(a7.eval(0.0, z), a.eval(0.0, z));
            assert!((q3.eval(0.0, z) - z * z / 6.0).abs() < 1e-15);
        }
        let g = Driver::infconv(&Driver::quadratic(1.0).unwrap(), &Driver::abs(0.3).unwrap(), Default::default()).unwrap();
        let g1 = g.dilate(1.0).unwrap();
        for z in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            assert_eq!(g1.eval(0.0, z), g.eval(0.0, z));
        }
        assert!(matches!(a.dilate(0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(a.dilate(-2.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dilate_keeps_structure() {
        let q = Driver::quadratic(2.0).unwrap();
        let d = q.dilate(4.0).unwrap();
        assert_eq!(d.lipschitz_m(), q.lipschitz_m());
        assert!(d.flags().convex);
        assert!(d.spot_check().failures(1e-12).is_empty());
    }

    #[test]
    fn dilate_semigroup() {
        let custom = Driver::custom("soft", |_, z: f64| (1.0 + z * z).sqrt() - 1.0, 1.0, DriverFlags::CONVEX, Some(LowerAffine { a: 0.0, b: 0.0 }));
        for g in [Driver::quadratic(0.7).unwrap(), Driver::abs(0.4).unwrap(), custom] {
            for (a, b) in [(0.5, 3.0), (2.0, 5.0), (0.1, 0.2)] {
                let two = g.dilate(a).unwrap().dilate(b).unwrap();
                let one = g.dilate(a * b).unwrap();
                for z in grid() {
                    let (x, y) = (two.eval(0.0, z), one.eval(0.0, z));
                    assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn quadratic_pair_infconv() {
        let g = Driver::infconv(&Driver::quadratic(1.0).unwrap(), &Driver::quadratic(2.0).unwrap(), Default::default()).unwrap();
        assert!(g.uses_closed_form());
        for (z, v) in [(-1.0, 1.0 / 6.0), (0.0, 0.0), (1.0, 1.0 / 6.0)] {
            assert!((g.eval(0.0, z) - v).abs() < 1e-15);
        }
        for z in [-3.0, -1.0, 0.5, 2.0] {
            assert!((g.infconv_argmin(0.0, z).unwrap() - 2.0 / 3.0 * z).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_pair_matches_brute_force_scan() {
        // independent check: scan y on a 1e-4 grid
        let g = Driver::infconv(&Driver::quadratic(1.0).unwrap(), &Driver::quadratic(2.0).unwrap(), Default::default()).unwrap();
        for z in [-1.0f64, 0.0, 1.0] {
            let mut best = f64::INFINITY;
            let mut y = -3.0;
            while y <= 3.0 {
                best = best.min((z - y).powi(2) / 2.0 + y * y / 4.0);
                y += 1e-4;
            }
            assert!((g.eval(0.0, z) - best).abs() < 1e-8);
        }
    }

    #[test]
    fn numeric_and_closed_form_agree() {
        let q1 = Driver::quadratic(1.0).unwrap();
        let q2 = Driver::quadratic(2.0).unwrap();
        let closed = Driver::infconv(&q1, &q2, Default::default()).unwrap();
        // a custom factor has no closed form, so this goes through the grid scan
        let wrapped = Driver::custom("q2", |_, z| z * z / 4.0, 5.0, DriverFlags::CONVEX, q2.lower_affine());
        let numeric = Driver::infconv(&q1, &wrapped, Default::default()).unwrap();
        assert!(!numeric.uses_closed_form());
        for i in 0..=100 {
            let z = -5.0 + 0.1 * i as f64;
            let (c, n) = (closed.eval(0.0, z), numeric.eval(0.0, z));
            assert!((c - n).abs() < 1e-6, "z={z}: {c} vs {n}");
            let (yc, yn) = (closed.infconv_argmin(0.0, z).unwrap(), numeric.infconv_argmin(0.0, z).unwrap());
            assert!((yc - yn).abs() < 1e-5, "z={z}: {yc} vs {yn}");
        }
    }

    #[test]
    fn abs_pair_keeps_everything() {
        let a = Driver::abs(1.0).unwrap();
        let g = Driver::infconv(&a, &a, Default::default()).unwrap();
        for z in grid() {
            assert_eq!(g.eval(0.0, z), z.abs());
            assert_eq!(g.infconv_argmin(0.0, z).unwrap(), 0.0);
        }
        // numeric path with the same functions agrees, including the tie-break
        let c = Driver::custom("abs", |_, z: f64| z.abs(), 1.0, DriverFlags::SUBLINEAR, Some(LowerAffine { a: 0.0, b: 0.0 }));
        let n = Driver::infconv(&c, &c, Default::default()).unwrap();
        for z in [-2.0, -0.3, 0.0, 0.9, 4.0] {
            assert!((n.eval(0.0, z) - z.abs()).abs() < 1e-12);
            assert!(n.infconv_argmin(0.0, z).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn convolution_with_zero_driver_is_min_of_g() {
        let q = Driver::quadratic(1.5).unwrap();
        let g = Driver::infconv(&q, &Driver::zero(), Default::default()).unwrap();
        for z in [-4.0, -1.0, 0.0, 2.5] {
            assert!(g.eval(0.0, z).abs() < 1e-12, "{}", g.eval(0.0, z));
        }
        let h = Driver::infconv(&Driver::abs(0.5).unwrap(), &Driver::zero(), Default::default()).unwrap();
        for z in grid() {
            assert_eq!(h.eval(0.0, z), 0.0);
        }
    }

    #[test]
    fn argmin_at_zero() {
        let pairs = [
            (Driver::quadratic(1.0).unwrap(), Driver::quadratic(3.0).unwrap()),
            (Driver::abs(0.5).unwrap(), Driver::abs(0.2).unwrap()),
            (Driver::quadratic(1.0).unwrap(), Driver::abs(0.2).unwrap()),
        ];
        for (a, b) in pairs {
            let g = Driver::infconv(&a, &b, Default::default()).unwrap();
            assert_eq!(g.infconv_argmin(0.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn infconv_lower_bound_and_convexity() {
        let g1 = Driver::quadratic(1.0).unwrap();
        let g2 = Driver::abs(0.3).unwrap();
        let g3 = Driver::infconv(&g1, &g2, Default::default()).unwrap();
        for z in grid() {
            let v = g3.eval(0.0, z);
            let y = g3.infconv_argmin(0.0, z).unwrap();
            assert!((v - (g1.eval(0.0, z - y) + g2.eval(0.0, y))).abs() < 1e-15);
            for i in 0..=60 {
                let y = -3.0 + 0.1 * i as f64;
                assert!(v <= g1.eval(0.0, z - y) + g2.eval(0.0, y) + 1e-12);
            }
        }
        assert!(g3.spot_check().convexity <= 1e-12);
    }

    #[test]
    fn infconv_errors() {
        let concave = Driver::abs(-1.0).unwrap();
        let q = Driver::quadratic(1.0).unwrap();
        assert!(matches!(Driver::infconv(&concave, &q, Default::default()), Err(Error::Unsupported(_))));
        let l = Driver::linear(0.5).unwrap();
        assert!(matches!(Driver::infconv(&l, &q, Default::default()), Err(Error::IllPosed(_))));
        assert!(matches!(q.infconv_argmin(0.0, 1.0), Err(Error::Usage(_))));
    }
}
