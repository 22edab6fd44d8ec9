//! Riesz potentials `I^alpha f(x) = (1/H_n(alpha)) \int |y|^(alpha-n) f(x - y) dy`
//! and their continuation to `Re alpha <= 0`.
//!
//! Evaluation goes through polar coordinates about `x`:
//! `I^alpha f(x) = Omega_n / H_n(alpha) * [x_+^(alpha-1) bracket of M]`, where `M` is
//! the spherical-mean profile of `f` about `x`. The `Gamma(alpha)` of the
//! Riesz normalization and the `1/Gamma(alpha)` of `x_+^(alpha-1)` are
//! cancelled before evaluation. At `alpha = -2m` the pole of `H_n` meets the
//! pole of the resonant `B` term and the value is their ratio.

use num_complex::Complex64;

use crate::alphaline::{
    bracket, extrapolate_limit, negative_integer, profile_for, ContinuationConfig, LimitEstimate,
};
use crate::error::{Error, Result};
use crate::fields::{LocalClass, ScalarField, Smoothness};
use crate::quadrature::{graded_breaks, integrate_panels, GaussJacobi, GaussLegendre};
use crate::specfun::{h_n, h_n_residue, omega, reciprocal_h_n};
use crate::spherical::SphereRule;

/// A single evaluation of `I^alpha f(x)`.
#[derive(Debug, Clone)]
pub struct RieszRequest<'a> {
    pub field: &'a ScalarField,
    pub alpha: Complex64,
    pub x: &'a [f64],
    pub cfg: &'a ContinuationConfig,
    pub rule: &'a SphereRule,
}

impl RieszRequest<'_> {
    pub fn evaluate(&self) -> Result<Complex64> {
        riesz(self.field, self.alpha, self.x, self.cfg, self.rule)
    }
}

/// Admissible strip `-l - eps < Re alpha < a` at `x`.
pub fn riesz_strip(field: &ScalarField, x: &[f64]) -> (f64, f64) {
    let upper = if field.support().is_some() {
        f64::INFINITY
    } else {
        field.decay()
    };
    (-field.class_at(x).regularity(), upper)
}

/// Whether `alpha` lies in `n + 2 N0`, where the continued potential has its poles.
pub fn is_pole(n: usize, alpha: Complex64) -> bool {
    let d = alpha.re - n as f64;
    alpha.im == 0.0 && d >= 0.0 && d == d.round() && (d as i64) % 2 == 0
}

/// `I^alpha f(x)`.
pub fn riesz(
    field: &ScalarField,
    alpha: Complex64,
    x: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<Complex64> {
    let n = field.dim();
    if x.len() != n || rule.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: field {n}, point {}, rule {}",
            x.len(),
            rule.dim()
        )));
    }
    let (lower, upper) = riesz_strip(field, x);
    if !(alpha.re > lower && alpha.re < upper) {
        return Err(Error::StripViolation { alpha, lower, upper });
    }
    if is_pole(n, alpha) {
        return Err(Error::RieszPole {
            alpha,
            residue: residue_estimate(field, alpha, x, cfg, rule),
        });
    }
    riesz_unchecked(field, alpha, x, cfg, rule)
}

fn riesz_unchecked(
    field: &ScalarField,
    alpha: Complex64,
    x: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<Complex64> {
    let n = field.dim();
    let beta = alpha - 1.0;
    let prof = profile_for(field, x, rule, beta, cfg)?;
    let om = omega::<f64>(n);
    if let Some(m) = negative_integer(alpha).or((alpha == Complex64::new(0.0, 0.0)).then_some(0)) {
        if m % 2 == 0 {
            let j = (-m) as usize;
            let c = *prof.taylor().get(j).ok_or(Error::MissingCoefficient(j))?;
            return Ok(Complex64::new(om * c / h_n_residue::<f64>(n, j / 2), 0.0));
        }
    }
    let br = bracket(&prof, beta, cfg)?;
    Ok(reciprocal_h_n(n, alpha)? * br.value * om)
}

fn residue_estimate(
    field: &ScalarField,
    alpha: Complex64,
    x: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Complex64 {
    let t = 1e-4;
    let side = |d: f64| riesz_unchecked(field, alpha + d, x, cfg, rule).map(|v| v * d);
    match (side(t), side(-t)) {
        (Ok(a), Ok(b)) => (a + b) / 2.0,
        _ => Complex64::new(f64::NAN, f64::NAN),
    }
}

/// `I^s f(x)` along `s_j` approaching `target` from above, with the extrapolated limit.
///
/// With `target = 0` this is the limit route to `I^0 f = f` for fields
/// without Hölder metadata.
pub fn riesz_right_limit(
    field: &ScalarField,
    target: f64,
    x: &[f64],
    s_sequence: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<LimitEstimate> {
    if s_sequence.iter().any(|&s| s <= target) {
        return Err(Error::InvalidArgument(format!(
            "orders must lie above the limit point {target}"
        )));
    }
    let values = s_sequence
        .iter()
        .map(|&s| riesz(field, Complex64::new(s, 0.0), x, cfg, rule))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = s_sequence.iter().map(|s| s - target).collect();
    extrapolate_limit(&h, &values)
}

/// Which part of a complex potential a derived field carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// `y -> Re or Im I^beta f(y)` as a field, with propagated metadata.
///
/// Decay is `min(a, n) - Re beta`; the local class gains `[Re beta]` orders.
/// Evaluation errors surface as NaN, which downstream quadrature rejects.
pub fn potential_field(
    field: &ScalarField,
    beta: Complex64,
    part: Part,
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<ScalarField> {
    let n = field.dim();
    if !(beta.re > 0.0) {
        return Err(Error::StripViolation {
            alpha: beta,
            lower: 0.0,
            upper: field.decay().min(n as f64),
        });
    }
    let b = field.decay().min(n as f64);
    let decay = b - beta.re;
    let gain = beta.re.floor().max(0.0) as usize;
    let base = field.smoothness().clone();
    let worst = base.worst().gain(gain);
    let smoothness = Smoothness::custom(
        worst,
        format!("order {beta} potential of: {}", base.description()),
        move |y| base.at(y).gain(gain),
    );
    let (f, c, r) = (field.clone(), cfg.clone(), rule.clone());
    let mut out = ScalarField::new(
        format!("I^{beta}({})", field.name()),
        n,
        decay,
        smoothness,
        move |y| match riesz(&f, beta, y, &c, &r) {
            Ok(v) => match part {
                Part::Re => v.re,
                Part::Im => v.im,
            },
            Err(_) => f64::NAN,
        },
    )
    .expensive()
    .with_noise(cfg.tolerance);
    if let Some(center) = field.radial_center() {
        out = out.with_radial_center(center.to_vec());
    }
    Ok(out)
}

/// `|I^alpha (I^beta f)(x) - I^(alpha+beta) f(x)|`.
pub fn semigroup_defect(
    field: &ScalarField,
    alpha: Complex64,
    beta: Complex64,
    x: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<f64> {
    let bound = field.decay().min(field.dim() as f64);
    let s = alpha + beta;
    if !(alpha.re > 0.0 && beta.re > 0.0 && s.re < bound) {
        let bad = if alpha.re <= 0.0 {
            alpha
        } else if beta.re <= 0.0 {
            beta
        } else {
            s
        };
        return Err(Error::StripViolation {
            alpha: bad,
            lower: 0.0,
            upper: bound,
        });
    }
    let re = potential_field(field, beta, Part::Re, cfg, rule)?;
    let mut lhs = riesz(&re, alpha, x, cfg, rule)?;
    if beta.im != 0.0 {
        let im = potential_field(field, beta, Part::Im, cfg, rule)?;
        lhs += Complex64::i() * riesz(&im, alpha, x, cfg, rule)?;
    }
    let rhs = riesz(field, s, x, cfg, rule)?;
    Ok((lhs - rhs).norm())
}

/// Numerical `\int_{R^n} |e - v|^(beta-n) |v|^(alpha-n) dv` for a unit vector `e`,
/// against `H_n(alpha) H_n(beta) / H_n(alpha+beta)`.
///
/// `resolution` is the number of nodes per panel.
pub fn beta_identity_check(n: usize, alpha: f64, beta: f64, resolution: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    if !(alpha > 0.0 && beta > 0.0 && alpha + beta < nf) {
        return Err(Error::StripViolation {
            alpha: Complex64::new(alpha + beta, 0.0),
            lower: 0.0,
            upper: nf,
        });
    }
    let closed = (h_n(n, Complex64::new(alpha, 0.0))? * h_n(n, Complex64::new(beta, 0.0))?
        / h_n(n, Complex64::new(alpha + beta, 0.0))?)
    .re;
    let numeric = match n {
        1 => beta_integral_1d(alpha, beta, resolution)?,
        2 => half_plane(alpha, beta, resolution)? + half_plane(beta, alpha, resolution)?,
        _ => {
            return Err(Error::InvalidArgument(
                "beta-integral check is implemented for n = 1, 2".into(),
            ))
        }
    };
    Ok((numeric, closed))
}

/// `\int_R |1 - v|^(b-1) |v|^(a-1) dv` split at 0 and 1, each piece mapped to a
/// Jacobi-weighted integral on `[0, 1]`.
fn beta_integral_1d(a: f64, b: f64, deg: usize) -> Result<f64> {
    // v < 0 (v = -u): \int_0^1 u^(a-1)(1+u)^(b-1) du + \int_0^1 t^(-a-b)(1+t)^(b-1) dt
    let left = GaussJacobi::new(deg, 0.0, a - 1.0)?.integrate(0.0, 1.0, |u: f64| (1.0 + u).powf(b - 1.0))
        + GaussJacobi::new(deg, 0.0, -a - b)?.integrate(0.0, 1.0, |t: f64| (1.0 + t).powf(b - 1.0));
    // 0 < v < 1
    let mid = GaussJacobi::new(deg, b - 1.0, a - 1.0)?.integrate(0.0, 1.0, |_| 1.0);
    // v > 1 (v = 1/t): \int_0^1 (1-t)^(b-1) t^(-a-b) dt
    let right = GaussJacobi::new(deg, b - 1.0, -a - b)?.integrate(0.0, 1.0, |_| 1.0);
    Ok(left + mid + right)
}

/// `\int_{x < 1/2} |v|^(a-2) |e - v|^(b-2) dv` in polar coordinates about 0.
fn half_plane(a: f64, b: f64, deg: usize) -> Result<f64> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let near = GaussJacobi::new(deg, 0.0, a - 1.0)?;
    let far = GaussJacobi::new(deg, 0.0, 1.0 - a - b)?;
    let gl = GaussLegendre::new(deg)?;
    let kernel = |r: f64, c: f64| (1.0 - 2.0 * r * c + r * r).powf((b - 2.0) / 2.0);
    // far part in t = 1/r: t^(1-a-b) (1 - 2 t c + t^2)^((b-2)/2)
    let far_kernel = |t: f64, c: f64| (1.0 - 2.0 * t * c + t * t).powf((b - 2.0) / 2.0);
    let radial = |theta: f64| -> f64 {
        let c = theta.cos();
        let r_max = if c > 0.0 { 0.5 / c } else { f64::INFINITY };
        let r1 = r_max.min(1.0);
        let mut v = near.integrate(0.0, r1, |r| kernel(r, c));
        if r_max > 1.0 {
            let t_min = if r_max.is_finite() { 1.0 / r_max } else { 0.0 };
            let full = far.integrate(0.0, 1.0, |t| far_kernel(t, c));
            let cut = if t_min > 0.0 {
                far.integrate(0.0, t_min, |t| far_kernel(t, c))
            } else {
                0.0
            };
            v += full - cut;
        }
        v
    };
    let lower = graded_breaks(0.0, FRAC_PI_2, false, true, 30, 0.5);
    let upper = graded_breaks(FRAC_PI_2, PI, true, false, 30, 0.5);
    let total = integrate_panels(&gl, &lower, radial) + integrate_panels(&gl, &upper, radial);
    Ok(2.0 * total)
}

/// Class of the potential `I^k f` near `x`, as propagated to derived fields.
pub fn potential_class(field: &ScalarField, x: &[f64], k: usize) -> LocalClass {
    field.class_at(x).gain(k)
}
