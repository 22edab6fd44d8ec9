//! Test functions on R^n with decay and smoothness metadata, and numerical
//! probes of that metadata.
//!
//! A [`ScalarField`] is an evaluator plus what the continuation machinery
//! needs to know about it: the decay exponent `a` in `f = O(|x|^-a)`, the
//! local regularity class at each point, and optional closed forms for
//! spherical means, radial Taylor data and the Laplacian.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::specfun::{binomial, ln_gamma_real};

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type MeanFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
type TaylorFn = Arc<dyn Fn(&[f64], usize) -> Option<Vec<f64>> + Send + Sync>;
type ClassFn = Arc<dyn Fn(&[f64]) -> LocalClass + Send + Sync>;

/// Regularity of a field near a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalClass {
    Smooth,
    /// `C^order` with the `order`-th derivatives Hölder of the given index.
    /// An index of `1.0` stands for "every index below one".
    Hoelder { order: usize, index: f64 },
    /// `C^order` with no Hölder control on the top derivatives.
    Continuous { order: usize },
}

impl LocalClass {
    /// `l + eps`, the amount by which the admissible strip extends to the left.
    pub fn regularity(&self) -> f64 {
        match *self {
            LocalClass::Smooth => f64::INFINITY,
            LocalClass::Hoelder { order, index } => order as f64 + index,
            LocalClass::Continuous { order } => order as f64,
        }
    }

    /// Number of derivatives available, `None` for smooth.
    pub fn order(&self) -> Option<usize> {
        match *self {
            LocalClass::Smooth => None,
            LocalClass::Hoelder { order, .. } | LocalClass::Continuous { order } => Some(order),
        }
    }

    pub fn has_hoelder(&self) -> bool {
        !matches!(self, LocalClass::Continuous { .. })
    }

    /// The less regular of the two.
    pub fn worse(self, other: LocalClass) -> LocalClass {
        let (a, b) = (self.regularity(), other.regularity());
        if a < b || (a == b && !self.has_hoelder()) {
            self
        } else {
            other
        }
    }

    /// Class after gaining `k` orders of smoothness, as for a potential of order `k`.
    pub fn gain(self, k: usize) -> LocalClass {
        match self {
            LocalClass::Smooth => LocalClass::Smooth,
            LocalClass::Hoelder { order, index } => LocalClass::Hoelder {
                order: order + k,
                index,
            },
            LocalClass::Continuous { order } if order + k >= 1 => LocalClass::Hoelder {
                order: order + k - 1,
                index: 1.0,
            },
            c @ LocalClass::Continuous { .. } => c,
        }
    }
}

impl fmt::Display for LocalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalClass::Smooth => write!(f, "C^inf"),
            LocalClass::Hoelder { order, index } => write!(f, "C^{order}+({index})"),
            LocalClass::Continuous { order } => write!(f, "C^{order}"),
        }
    }
}

/// Pointwise regularity description.
#[derive(Clone)]
pub struct Smoothness {
    worst: LocalClass,
    at: ClassFn,
    description: String,
}

impl Smoothness {
    pub fn smooth() -> Self {
        Self::uniform(LocalClass::Smooth, "smooth everywhere")
    }

    pub fn uniform(class: LocalClass, description: impl Into<String>) -> Self {
        Self {
            worst: class,
            at: Arc::new(move |_| class),
            description: description.into(),
        }
    }

    /// `at` must never report a class worse than `worst`.
    pub fn custom(
        worst: LocalClass,
        description: impl Into<String>,
        at: impl Fn(&[f64]) -> LocalClass + Send + Sync + 'static,
    ) -> Self {
        Self {
            worst,
            at: Arc::new(at),
            description: description.into(),
        }
    }

    pub fn at(&self, x: &[f64]) -> LocalClass {
        (self.at)(x)
    }

    pub fn worst(&self) -> LocalClass {
        self.worst
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl Default for Smoothness {
    fn default() -> Self {
        Self::smooth()
    }
}

impl fmt::Debug for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Smoothness")
            .field("worst", &self.worst)
            .field("description", &self.description)
            .finish()
    }
}

/// Closed ball containing the support.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Evaluable function on R^n with class metadata.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    dim: usize,
    eval: EvalFn,
    decay: f64,
    smoothness: Smoothness,
    support: Option<Ball>,
    exact_mean: Option<MeanFn>,
    taylor: Option<TaylorFn>,
    laplacian: Option<EvalFn>,
    expensive: bool,
    noise: f64,
    radial_center: Option<Vec<f64>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("decay", &self.decay)
            .field("smoothness", &self.smoothness)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        decay: f64,
        smoothness: Smoothness,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            decay,
            smoothness,
            support: None,
            exact_mean: None,
            taylor: None,
            laplacian: None,
            expensive: false,
            noise: 0.0,
            radial_center: None,
        }
    }

    pub fn with_support(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.support = Some(Ball { center, radius });
        self
    }

    /// Closed form of the mean over the sphere `|y - center| = r`.
    pub fn with_exact_mean(
        mut self,
        mean: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.exact_mean = Some(Arc::new(mean));
        self
    }

    /// Exact Taylor coefficients `c_0..=c_order` of the spherical-mean profile at `center`.
    pub fn with_radial_taylor(
        mut self,
        taylor: impl Fn(&[f64], usize) -> Option<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.taylor = Some(Arc::new(taylor));
        self
    }

    pub fn with_laplacian(mut self, lap: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.laplacian = Some(Arc::new(lap));
        self
    }

    /// Marks evaluation as costly, so that quadrature parallelizes over nodes.
    pub fn expensive(mut self) -> Self {
        self.expensive = true;
        self
    }

    /// Absolute accuracy of evaluations, for fields that are themselves computed numerically.
    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Declares `f(x)` to depend only on `|x - center|`.
    pub fn with_radial_center(mut self, center: Vec<f64>) -> Self {
        self.radial_center = Some(center);
        self
    }

    pub fn radial_center(&self) -> Option<&[f64]> {
        self.radial_center.as_deref()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    pub fn class_at(&self, x: &[f64]) -> LocalClass {
        self.smoothness.at(x)
    }

    pub fn support(&self) -> Option<&Ball> {
        self.support.as_ref()
    }

    pub fn is_expensive(&self) -> bool {
        self.expensive
    }

    /// Raw closed-form hook; NaN where the closed form does not apply.
    pub fn exact_spherical_mean(&self, center: &[f64], r: f64) -> Option<f64> {
        self.exact_mean.as_ref().map(|m| m(center, r.abs()))
    }

    pub fn has_exact_mean(&self) -> bool {
        self.exact_mean.is_some()
    }

    pub fn radial_taylor_at(&self, center: &[f64], order: usize) -> Option<Vec<f64>> {
        self.taylor.as_ref().and_then(|t| t(center, order))
    }

    pub fn has_laplacian(&self) -> bool {
        self.laplacian.is_some()
    }

    /// The closed-form Laplacian as a field, if one is known.
    pub fn laplacian_field(&self) -> Option<ScalarField> {
        let lap = self.laplacian.clone()?;
        let mut out = ScalarField::new(
            format!("lap({})", self.name),
            self.dim,
            self.decay,
            Smoothness::smooth(),
            move |x| lap(x),
        );
        out.smoothness = self.smoothness.clone();
        out.support = self.support.clone();
        out.radial_center = self.radial_center.clone();
        Some(out)
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `x -> exp(-|x|^2)`.
///
/// The declared support radius 6.5 is effective: the field is below `5e-19` outside it.
pub fn gaussian(n: usize) -> ScalarField {
    ScalarField::new("gaussian", n, f64::INFINITY, Smoothness::smooth(), |x| {
        (-norm2(x)).exp()
    })
    .with_support(vec![0.0; n], 6.5)
    .with_radial_center(vec![0.0; n])
    .with_exact_mean(move |c, r| gaussian_sphere_mean(n, norm2(c), r))
    .with_radial_taylor(move |c, order| Some(gaussian_profile_taylor(n, norm2(c), order)))
    .with_laplacian(move |x| {
        let s = norm2(x);
        (4.0 * s - 2.0 * n as f64) * (-s).exp()
    })
}

/// Mean of `exp(-|y|^2)` over the sphere of radius `r` about a center with `|c|^2 = c2`:
/// `exp(-c2 - r^2) 0F1(; n/2; r^2 c2)`, summed in log space.
fn gaussian_sphere_mean(n: usize, c2: f64, r: f64) -> f64 {
    let base = -c2 - r * r;
    let z = r * r * c2;
    if z == 0.0 {
        return base.exp();
    }
    let b = n as f64 / 2.0;
    let nu = b - 1.0;
    if 2.0 * z.sqrt() > 40.0 + nu * nu {
        // exp(-c2 - r^2 + 2 r |c|) = exp(-(|c| - r)^2), kept exact for far centers
        let d = c2.sqrt();
        return (-(d - r) * (d - r) + ln_0f1_asymptotic_scaled(b, z)).exp();
    }
    (base + ln_0f1_series(b, z)).exp()
}

fn ln_0f1_series(b: f64, z: f64) -> f64 {
    // only used below the asymptotic threshold, where terms stay far from overflow
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    let mut j = 0.0f64;
    loop {
        term *= z / ((j + 1.0) * (b + j));
        sum += term;
        j += 1.0;
        if term < 1e-17 * sum && j * (b + j) > z {
            break;
        }
    }
    sum.ln()
}

/// `0F1(; b; z) = Gamma(b) z^((1-b)/2) I_(b-1)(2 sqrt z)` with the large-argument
/// expansion of `I_nu`, less the leading `2 sqrt z`.
fn ln_0f1_asymptotic_scaled(b: f64, z: f64) -> f64 {
    let x = 2.0 * z.sqrt();
    let nu = b - 1.0;
    let mu = 4.0 * nu * nu;
    let (mut term, mut series) = (1.0f64, 1.0f64);
    for k in 1..60 {
        let kf = k as f64;
        term *= -(mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        series += term;
        if term.abs() < 1e-17 * series.abs() {
            break;
        }
    }
    ln_gamma_real(b).unwrap_or(0.0) + 0.5 * (1.0 - b) * z.ln()
        - 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + series.ln()
}

fn gaussian_profile_taylor(n: usize, c2: f64, order: usize) -> Vec<f64> {
    let b = n as f64 / 2.0;
    let half = order / 2;
    let mut a = vec![0.0; half + 1];
    let mut h = vec![0.0; half + 1];
    let (mut ai, mut hj) = (1.0, 1.0);
    for i in 0..=half {
        if i > 0 {
            ai *= -1.0 / i as f64;
            hj *= c2 / (i as f64 * (b + i as f64 - 1.0));
        }
        a[i] = ai;
        h[i] = hj;
    }
    let scale = (-c2).exp();
    let mut out = vec![0.0; order + 1];
    for m in 0..=half {
        let s: f64 = (0..=m).map(|i| a[i] * h[m - i]).sum();
        out[2 * m] = scale * s;
    }
    out
}

/// `x -> max(0, 1 - |x|^2)^eps`, Hölder of index `eps` on the unit sphere.
pub fn hoelder_cap(n: usize, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cap exponent must lie in (0, 1), got {eps}"
        )));
    }
    let class = LocalClass::Hoelder {
        order: 0,
        index: eps,
    };
    let smoothness = Smoothness::custom(
        class,
        format!("smooth off the unit sphere, Hölder {eps} on it"),
        move |x| {
            if (norm2(x).sqrt() - 1.0).abs() < 1e-9 {
                class
            } else {
                LocalClass::Smooth
            }
        },
    );
    Ok(ScalarField::new(
        format!("cap:{eps}"),
        n,
        f64::INFINITY,
        smoothness,
        move |x| (1.0 - norm2(x)).max(0.0).powf(eps),
    )
    .with_support(vec![0.0; n], 1.0)
    .with_radial_center(vec![0.0; n])
    .with_exact_mean(move |c, r| {
        if norm2(c) == 0.0 {
            (1.0 - r * r).max(0.0).powf(eps)
        } else {
            f64::NAN
        }
    })
    .with_radial_taylor(move |c, order| {
        (norm2(c) == 0.0).then(|| {
            (0..=order)
                .map(|j| {
                    if j % 2 == 1 {
                        0.0
                    } else {
                        let i = j / 2;
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial(eps, i)
                    }
                })
                .collect()
        })
    }))
}

impl ScalarField {
    /// Closed-form spherical mean, when one is known at `center`.
    pub fn exact_mean_at(&self, center: &[f64], r: f64) -> Option<f64> {
        self.exact_spherical_mean(center, r).filter(|v| !v.is_nan())
    }
}

/// Quintic smoothstep cutoff: 1 on `[0, 1/2]`, 0 on `[1, inf)`, C^2 in between.
///
/// `b(r) = 1 - S(2r - 1)` with `S(u) = 6u^5 - 15u^4 + 10u^3`.
pub fn smooth_cutoff(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        let u = 2.0 * r - 1.0;
        1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// `x -> b(|x|) / log(e + 1/|x|)`: continuous, Hölder of no index at 0.
pub fn log_modulus(n: usize) -> ScalarField {
    let worst = LocalClass::Continuous { order: 0 };
    let smoothness = Smoothness::custom(
        worst,
        "continuous at 0 without Hölder bound, C^2 on |x| = 1/2 and |x| = 1, smooth elsewhere",
        move |x| {
            let r = norm2(x).sqrt();
            if r < 1e-12 {
                worst
            } else if (r - 0.5).abs() < 1e-9 || (r - 1.0).abs() < 1e-9 {
                LocalClass::Hoelder {
                    order: 2,
                    index: 1.0,
                }
            } else {
                LocalClass::Smooth
            }
        },
    );
    let profile = |r: f64| {
        if r == 0.0 {
            0.0
        } else {
            smooth_cutoff(r) / (std::f64::consts::E + 1.0 / r).ln()
        }
    };
    ScalarField::new("logmod", n, f64::INFINITY, smoothness, move |x| {
        profile(norm2(x).sqrt())
    })
    .with_support(vec![0.0; n], 1.0)
    .with_radial_center(vec![0.0; n])
    .with_exact_mean(move |c, r| if norm2(c) == 0.0 { profile(r) } else { f64::NAN })
    .with_radial_taylor(move |c, order| (norm2(c) == 0.0 && order == 0).then(|| vec![0.0]))
}

/// `x -> (1 + |x|^2)^(-p/2)`, decay exponent `p`.
pub fn algebraic(n: usize, p: f64) -> Result<ScalarField> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "algebraic decay must be positive, got {p}"
        )));
    }
    let nf = n as f64;
    Ok(ScalarField::new(
        format!("algebraic:{p}"),
        n,
        p,
        Smoothness::smooth(),
        move |x| (1.0 + norm2(x)).powf(-p / 2.0),
    )
    .with_radial_center(vec![0.0; n])
    .with_exact_mean(move |c, r| {
        if norm2(c) == 0.0 {
            (1.0 + r * r).powf(-p / 2.0)
        } else {
            f64::NAN
        }
    })
    .with_radial_taylor(move |c, order| {
        (norm2(c) == 0.0).then(|| {
            (0..=order)
                .map(|j| {
                    if j % 2 == 1 {
                        0.0
                    } else {
                        binomial(-p / 2.0, j / 2)
                    }
                })
                .collect()
        })
    })
    .with_laplacian(move |x| {
        let s = norm2(x);
        -p * nf * (1.0 + s).powf(-p / 2.0 - 1.0) + p * (p + 2.0) * s * (1.0 + s).powf(-p / 2.0 - 2.0)
    }))
}

/// `x -> f(x - v)`.
pub fn translate(field: &ScalarField, v: &[f64]) -> ScalarField {
    assert_eq!(v.len(), field.dim, "translation vector dimension");
    let v: Arc<[f64]> = v.into();
    let shift = {
        let v = v.clone();
        move |x: &[f64]| -> Vec<f64> { x.iter().zip(v.iter()).map(|(a, b)| a - b).collect() }
    };
    let f = field.clone();
    let mut out = {
        let (f, shift) = (f.clone(), shift.clone());
        ScalarField::new(
            format!("translate({})", f.name),
            f.dim,
            f.decay,
            Smoothness::smooth(),
            move |x| f.eval(&shift(x)),
        )
    };
    let s = field.smoothness.clone();
    let sh = shift.clone();
    out.smoothness = Smoothness::custom(s.worst, s.description.clone(), move |x| s.at(&sh(x)));
    out.support = field.support.as_ref().map(|b| Ball {
        center: b.center.iter().zip(v.iter()).map(|(c, d)| c + d).collect(),
        radius: b.radius,
    });
    if let Some(m) = field.exact_mean.clone() {
        let sh = shift.clone();
        out.exact_mean = Some(Arc::new(move |c, r| m(&sh(c), r)));
    }
    if let Some(t) = field.taylor.clone() {
        let sh = shift.clone();
        out.taylor = Some(Arc::new(move |c, o| t(&sh(c), o)));
    }
    if let Some(l) = field.laplacian.clone() {
        let sh = shift;
        out.laplacian = Some(Arc::new(move |x| l(&sh(x))));
    }
    out.expensive = field.expensive;
    out.noise = field.noise;
    out.radial_center = field
        .radial_center
        .as_ref()
        .map(|c| c.iter().zip(v.iter()).map(|(a, b)| a + b).collect());
    out
}

/// `x -> c f(x)`.
pub fn scale(field: &ScalarField, c: f64) -> ScalarField {
    let mut out = field.clone();
    out.name = format!("{c}*{}", field.name);
    out.noise = field.noise * c.abs();
    let e = field.eval.clone();
    out.eval = Arc::new(move |x| c * e(x));
    if let Some(m) = field.exact_mean.clone() {
        out.exact_mean = Some(Arc::new(move |x, r| c * m(x, r)));
    }
    if let Some(t) = field.taylor.clone() {
        out.taylor = Some(Arc::new(move |x, o| {
            t(x, o).map(|v| v.into_iter().map(|a| c * a).collect())
        }));
    }
    if let Some(l) = field.laplacian.clone() {
        out.laplacian = Some(Arc::new(move |x| c * l(x)));
    }
    out
}

/// `x -> f(x) + g(x)`.
pub fn sum(f: &ScalarField, g: &ScalarField) -> ScalarField {
    assert_eq!(f.dim, g.dim, "summands must share a dimension");
    let (fe, ge) = (f.eval.clone(), g.eval.clone());
    let (fs, gs) = (f.smoothness.clone(), g.smoothness.clone());
    let smoothness = Smoothness::custom(
        fs.worst.worse(gs.worst),
        format!("{}; {}", fs.description, gs.description),
        move |x| fs.at(x).worse(gs.at(x)),
    );
    let mut out = ScalarField::new(
        format!("{}+{}", f.name, g.name),
        f.dim,
        f.decay.min(g.decay),
        smoothness,
        move |x| fe(x) + ge(x),
    );
    if let (Some(a), Some(b)) = (&f.support, &g.support) {
        let d = a
            .center
            .iter()
            .zip(&b.center)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        out.support = Some(Ball {
            center: a.center.clone(),
            radius: a.radius.max(d + b.radius),
        });
    }
    if let (Some(a), Some(b)) = (f.exact_mean.clone(), g.exact_mean.clone()) {
        out.exact_mean = Some(Arc::new(move |c, r| a(c, r) + b(c, r)));
    }
    if let (Some(a), Some(b)) = (f.taylor.clone(), g.taylor.clone()) {
        out.taylor = Some(Arc::new(move |c, o| {
            let (x, y) = (a(c, o)?, b(c, o)?);
            Some(x.iter().zip(&y).map(|(p, q)| p + q).collect())
        }));
    }
    if let (Some(a), Some(b)) = (f.laplacian.clone(), g.laplacian.clone()) {
        out.laplacian = Some(Arc::new(move |x| a(x) + b(x)));
    }
    out.expensive = f.expensive || g.expensive;
    out.noise = f.noise + g.noise;
    if f.radial_center.is_some() && f.radial_center == g.radial_center {
        out.radial_center = f.radial_center.clone();
    }
    out
}

/// Catalog entry addressable by name.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub field: ScalarField,
    pub closed_form_notes: &'static str,
}

/// The named test functions in dimension `n`.
pub fn catalog(n: usize) -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "gaussian",
            field: gaussian(n),
            closed_form_notes: "spherical means via 0F1; I^a f(0) = G((n-a)/2) / (2^a G(n/2)); \
                                plane integrals pi^(k/2) exp(-d^2)",
        },
        CatalogEntry {
            name: "cap:0.75",
            field: hoelder_cap(n, 0.75).expect("valid exponent"),
            closed_form_notes: "radial; means at the origin only",
        },
        CatalogEntry {
            name: "logmod",
            field: log_modulus(n),
            closed_form_notes: "radial; continuous only at the origin",
        },
        CatalogEntry {
            name: "algebraic:3",
            field: algebraic(n, 3.0).expect("valid exponent"),
            closed_form_notes: "radial; Laplacian in closed form",
        },
    ]
}

/// Parses `gaussian`, `cap:<eps>`, `logmod` or `algebraic:<p>`.
pub fn by_name(name: &str, n: usize) -> Result<ScalarField> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let param = |default: Option<f64>| -> Result<f64> {
        match arg {
            Some(a) => a
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad parameter in field `{name}`"))),
            None => default
                .ok_or_else(|| Error::InvalidArgument(format!("field `{name}` needs a parameter"))),
        }
    };
    match head.trim() {
        "gaussian" if arg.is_none() => Ok(gaussian(n)),
        "cap" => hoelder_cap(n, param(Some(0.75))?),
        "logmod" if arg.is_none() => Ok(log_modulus(n)),
        "algebraic" => algebraic(n, param(None)?),
        _ => Err(Error::InvalidArgument(format!("unknown field `{name}`"))),
    }
}

/// `count` unit vectors in R^n, reproducible from `seed`.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = norm2(&v).sqrt();
        if r > 1e-8 {
            out.push(v.into_iter().map(|a| a / r).collect());
        }
    }
    out
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Negated log-log slope of `|f(r d)|` over `radii`.
///
/// Returns `+inf` when the field vanishes on part of the sampled tail
/// (faster than any power), and an error when it vanishes on all of it.
pub fn estimate_decay_exponent(field: &ScalarField, direction: &[f64], radii: &[f64]) -> Result<f64> {
    if radii.len() < 4 || radii.iter().any(|&r| r <= 1.0) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "need at least 4 increasing radii above 1".into(),
        ));
    }
    let vals: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let x: Vec<f64> = direction.iter().map(|d| r * d).collect();
            field.eval(&x).abs()
        })
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!(
            "non-finite samples of {} along the tail",
            field.name
        )));
    }
    if vals.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate(format!(
            "{} vanishes at every sampled radius",
            field.name
        )));
    }
    if vals.iter().any(|&v| v == 0.0) {
        return Ok(f64::INFINITY);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    Ok(-ls_slope(&xs, &ys))
}

/// Log-log slope of the local oscillation `max |f(x + s u) - f(x)|` over 32
/// seeded directions `u`, clamped to `(0, 1]`.
pub fn estimate_hoelder_index(field: &ScalarField, x: &[f64], probe_scales: &[f64]) -> Result<f64> {
    if probe_scales.len() < 4
        || probe_scales.iter().any(|&s| !(s > 0.0 && s < 1.0))
        || probe_scales.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "need at least 4 decreasing probe scales in (0, 1)".into(),
        ));
    }
    let dirs = random_directions(field.dim, 32, 0x5eed);
    let f0 = field.eval(x);
    let osc = |s: f64| -> f64 {
        let vals: Vec<f64> = if field.expensive {
            use rayon::prelude::*;
            dirs.par_iter().map(|u| probe(field, x, u, s, f0)).collect()
        } else {
            dirs.iter().map(|u| probe(field, x, u, s, f0)).collect()
        };
        vals.into_iter().fold(0.0, f64::max)
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &s in probe_scales {
        let o = osc(s);
        if o > 0.0 && o.is_finite() {
            xs.push(s.ln());
            ys.push(o.ln());
        }
    }
    if xs.len() < 2 {
        return Ok(1.0);
    }
    Ok(ls_slope(&xs, &ys).clamp(f64::MIN_POSITIVE, 1.0))
}

fn probe(field: &ScalarField, x: &[f64], u: &[f64], s: f64, f0: f64) -> f64 {
    let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + s * b).collect();
    (field.eval(&y) - f0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn bessel_expansion_matches_series() {
        for n in [1usize, 2, 3, 4, 5] {
            let b = n as f64 / 2.0;
            let nu = b - 1.0;
            for x in [40.0 + nu * nu, 60.0, 120.0] {
                let z: f64 = (x / 2.0) * (x / 2.0);
                let (a, s) = (ln_0f1_asymptotic_scaled(b, z) + x, ln_0f1_series(b, z));
                assert!((a - s).abs() < 1e-12 * s.abs(), "n={n} x={x}: {a} vs {s}");
            }
        }
    }

    #[test]
    fn catalog_point_values() {
        let g = gaussian(3);
        assert_eq!(g.eval(&[0.0, 0.0, 0.0]), 1.0);
        assert_relative_eq!(g.eval(&[1.0, 0.0, 0.0]), (-1.0f64).exp(), max_relative = 1e-15);
        let cap = hoelder_cap(2, 0.75).unwrap();
        assert_eq!(cap.eval(&[0.0, 0.0]), 1.0);
        assert_eq!(cap.eval(&[1.0, 0.0]), 0.0);
        assert_eq!(cap.eval(&[0.8, 0.9]), 0.0);
        let t: f64 = 1e-3;
        let x = (1.0 - t).sqrt();
        assert_relative_eq!(cap.eval(&[x, 0.0]), t.powf(0.75), max_relative = 1e-9);
        let lm = log_modulus(2);
        assert_eq!(lm.eval(&[0.0, 0.0]), 0.0);
        assert_eq!(lm.eval(&[1.0, 0.0]), 0.0);
        assert_eq!(lm.eval(&[0.0, 1.5]), 0.0);
        let r = (-9.0f64).exp();
        // 1 / log(e + e^9), computed without the field code.
        let want = 1.0 / (9.0 + (1.0 + std::f64::consts::E * (-9.0f64).exp()).ln());
        assert_relative_eq!(lm.eval(&[r, 0.0]), want, max_relative = 1e-14);
        assert!((1.0 / lm.eval(&[r, 0.0]) - 9.000_335).abs() < 1e-6);
    }

    #[test]
    fn combinators() {
        let g = gaussian(2);
        let v = [0.3, -1.2];
        let t = translate(&g, &v);
        assert_eq!(t.eval(&v), 1.0);
        assert_eq!(scale(&g, 2.0).eval(&[0.0, 0.0]), 2.0);
        let back = translate(&t, &[-0.3, 1.2]);
        for x in random_directions(2, 10, 3) {
            let y = [1.7 * x[0], 0.4 * x[1]];
            assert_relative_eq!(back.eval(&y), g.eval(&y), max_relative = 1e-14);
        }
        assert_eq!(t.decay(), g.decay());
        assert_eq!(t.support().unwrap().center, v.to_vec());
        let cap = hoelder_cap(2, 0.5).unwrap();
        let tc = translate(&cap, &v);
        let on = [v[0] + 1.0, v[1]];
        assert_eq!(tc.class_at(&on), cap.class_at(&[1.0, 0.0]));
    }

    #[test]
    fn by_name_parsing() {
        assert_eq!(by_name("gaussian", 2).unwrap().name(), "gaussian");
        assert_eq!(by_name("cap:0.5", 2).unwrap().name(), "cap:0.5");
        assert_eq!(by_name("logmod", 3).unwrap().dim(), 3);
        assert_eq!(by_name("algebraic:2.5", 2).unwrap().decay(), 2.5);
        assert!(by_name("cap:1.5", 2).is_err());
        assert!(by_name("nonsense", 2).is_err());
        assert!(by_name("algebraic", 2).is_err());
        let names: Vec<_> = catalog(2).iter().map(|e| e.name).collect();
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(names.len(), dedup.len());
    }

    #[test]
    fn decay_estimates() {
        let f = algebraic(2, 2.0).unwrap();
        let a = estimate_decay_exponent(&f, &[1.0, 0.0], &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert!((a - 2.0).abs() < 0.05, "{a}");
        let g = gaussian(2);
        let a = estimate_decay_exponent(&g, &[0.6, 0.8], &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert!(a > 100.0);
        let tail = ScalarField::new("tail", 2, 1.0, Smoothness::smooth(), |x| {
            let r = norm2(x).sqrt();
            if r > 1.0 {
                1.0 / r
            } else {
                1.0
            }
        });
        let a = estimate_decay_exponent(&tail, &[0.0, 1.0], &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert!((a - 1.0).abs() < 0.05);
        let cap = hoelder_cap(2, 0.5).unwrap();
        assert!(matches!(
            estimate_decay_exponent(&cap, &[1.0, 0.0], &[2.0, 3.0, 4.0, 5.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn hoelder_estimates() {
        let scales = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
        let cap = hoelder_cap(2, 0.5).unwrap();
        let e = estimate_hoelder_index(&cap, &[0.6, 0.8], &scales).unwrap();
        assert!((e - 0.5).abs() < 0.1, "{e}");
        let e = estimate_hoelder_index(&gaussian(2), &[0.0, 0.0], &scales).unwrap();
        assert_eq!(e, 1.0);
        let lm = log_modulus(2);
        let coarse = estimate_hoelder_index(&lm, &[0.0, 0.0], &[1e-2, 5e-3, 2e-3, 1e-3]).unwrap();
        let fine = estimate_hoelder_index(&lm, &[0.0, 0.0], &[1e-8, 5e-9, 2e-9, 1e-9]).unwrap();
        assert!(fine < coarse && fine < 0.1, "{coarse} {fine}");
    }

    #[test]
    fn gaussian_closed_forms() {
        let tay = gaussian_profile_taylor(2, 0.0, 4);
        assert_eq!(tay, vec![1.0, 0.0, -1.0, 0.0, 0.5]);
        // Mean over the circle about c: exp(-|c|^2 - r^2) I_0(2 r |c|).
        let (c, r) = (0.7f64, 1.3f64);
        let z = 2.0 * r * c;
        let i0: f64 = (0..40)
            .map(|j| (z / 2.0).powi(2 * j) / (1..=j).map(|i| (i * i) as f64).product::<f64>())
            .sum();
        let want = (-c * c - r * r).exp() * i0;
        assert_relative_eq!(gaussian_sphere_mean(2, c * c, r), want, max_relative = 1e-13);
        // Large arguments stay finite.
        let v = gaussian_sphere_mean(3, 400.0, 20.0);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn local_class_algebra() {
        let h = LocalClass::Hoelder {
            order: 0,
            index: 0.5,
        };
        let c = LocalClass::Continuous { order: 0 };
        assert_eq!(h.worse(c), c);
        assert_eq!(LocalClass::Smooth.worse(h), h);
        assert_eq!(
            h.gain(1),
            LocalClass::Hoelder {
                order: 1,
                index: 0.5
            }
        );
        assert_eq!(
            c.gain(1),
            LocalClass::Hoelder {
                order: 0,
                index: 1.0
            }
        );
        assert_eq!(c.gain(0), c);
        assert_eq!(h.regularity(), 0.5);
    }

    proptest! {
        #[test]
        fn algebraic_tails_match_declared_decay(p in 0.5f64..6.0, seed in 0u64..1000) {
            let f = algebraic(3, p).unwrap();
            for d in random_directions(3, 8, seed) {
                let a = estimate_decay_exponent(&f, &d, &[50.0, 100.0, 200.0, 400.0]).unwrap();
                prop_assert!(a >= p - 0.1);
            }
        }

        #[test]
        fn scale_multiplies_exactly(c in -5.0f64..5.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let g = gaussian(2);
            prop_assert_eq!(scale(&g, c).eval(&[x, y]), c * g.eval(&[x, y]));
        }

        #[test]
        fn translate_group_law(vx in -3.0f64..3.0, vy in -3.0f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let f = algebraic(2, 1.5).unwrap();
            let t = translate(&translate(&f, &[vx, vy]), &[-vx, -vy]);
            prop_assert!((t.eval(&[x, y]) - f.eval(&[x, y])).abs() < 1e-14);
        }
    }
}
