//! Spherical means `F(r, x) = (1/Omega_n) \int f(x + r w) dw` and the radial
//! profiles built from them.
//!
//! Rules on `S^{n-1}` are antipodally closed: equispaced points on the
//! circle, and for `n >= 3` a Gauss-Jacobi rule in the last coordinate times
//! a rule on `S^{n-2}`. When a field declares a bounded support, spheres
//! that leave the support ball are integrated over the spherical cap inside
//! it instead of over the whole sphere.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{LocalClass, ScalarField};
use crate::quadrature::{graded_breaks, GaussJacobi, GaussLegendre};
use crate::specfun::omega;

/// Quadrature rule on the unit sphere `S^{n-1}`, weights summing to `Omega_n`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    sub: Option<Box<SphereRule>>,
}

impl SphereRule {
    /// Rule exact for polynomials of degree `<= order` (for `n = 2`, trigonometric degree).
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sphere dimension must be >= 1".into()));
        }
        match dim {
            1 => Ok(Self {
                dim,
                order: usize::MAX,
                nodes: vec![1.0, -1.0],
                weights: vec![1.0, 1.0],
                sub: None,
            }),
            2 => {
                let half = order / 2 + 1;
                let count = 2 * half;
                let w = 2.0 * PI / count as f64;
                let mut nodes = vec![0.0; 2 * count];
                for j in 0..half {
                    let t = 2.0 * PI * j as f64 / count as f64;
                    let (s, c) = t.sin_cos();
                    nodes[2 * j] = c;
                    nodes[2 * j + 1] = s;
                    nodes[2 * (j + half)] = -c;
                    nodes[2 * (j + half) + 1] = -s;
                }
                Ok(Self {
                    dim,
                    order: count - 1,
                    nodes,
                    weights: vec![w; count],
                    sub: Some(Box::new(SphereRule::new(1, 0)?)),
                })
            }
            _ => {
                let sub = SphereRule::new(dim - 1, order)?;
                let m = order / 2 + 1;
                let lam = (dim as f64 - 3.0) / 2.0;
                let gj = GaussJacobi::new(m, lam, lam)?;
                // Symmetrize the nodes so that the node set is exactly closed under negation.
                let (tn, tw) = (gj.nodes(), gj.weights());
                let mut t = vec![0.0; m];
                let mut tw_s = vec![0.0; m];
                for i in 0..m {
                    let j = m - 1 - i;
                    t[i] = 0.5 * (tn[i] - tn[j]);
                    tw_s[i] = 0.5 * (tw[i] + tw[j]);
                }
                if m % 2 == 1 {
                    t[m / 2] = 0.0;
                }
                let sn = sub.nodes.len() / (dim - 1);
                let mut nodes = Vec::with_capacity(m * sn * dim);
                let mut weights = Vec::with_capacity(m * sn);
                for i in 0..m {
                    let st = (1.0 - t[i] * t[i]).max(0.0).sqrt();
                    for j in 0..sn {
                        let w = &sub.nodes[j * (dim - 1)..(j + 1) * (dim - 1)];
                        nodes.extend(w.iter().map(|v| st * v));
                        nodes.push(t[i]);
                        weights.push(tw_s[i] * sub.weights[j]);
                    }
                }
                Ok(Self {
                    dim,
                    order: 2 * m - 1,
                    nodes,
                    weights,
                    sub: Some(Box::new(sub)),
                })
            }
        }
    }

    /// The default rule used by the pipelines.
    pub fn default_for(dim: usize) -> Self {
        let order = match dim {
            1 | 2 => 63,
            3 => 31,
            _ => 15,
        };
        Self::new(dim, order).expect("valid default rule")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rule on the equatorial `S^{n-2}` used for caps.
    pub fn sub_rule(&self) -> Option<&SphereRule> {
        self.sub.as_deref()
    }

    /// Applies the rule to `g`, without normalization.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * g(self.node(i))).sum()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// Orthonormal basis of the complement of the unit vector `e`.
fn complement_basis(e: &[f64]) -> Vec<Vec<f64>> {
    let n = e.len();
    let skip = (0..n)
        .max_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != skip) {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in std::iter::once(e).chain(basis.iter().map(|b| b.as_slice())) {
            let d: f64 = v.iter().zip(b).map(|(p, q)| p * q).sum();
            v.iter_mut().zip(b).for_each(|(p, q)| *p -= d * q);
        }
        let r = v.iter().map(|p| p * p).sum::<f64>().sqrt();
        v.iter_mut().for_each(|p| *p /= r);
        basis.push(v);
    }
    basis
}

fn full_sphere_mean(field: &ScalarField, center: &[f64], r: f64, rule: &SphereRule) -> f64 {
    let n = field.dim();
    let point = |i: usize| -> f64 {
        let w = rule.node(i);
        let y: Vec<f64> = (0..n).map(|d| center[d] + r * w[d]).collect();
        rule.weights[i] * field.eval(&y)
    };
    let total: f64 = if field.is_expensive() {
        (0..rule.len()).into_par_iter().map(point).sum()
    } else {
        (0..rule.len()).map(point).sum()
    };
    total / omega::<f64>(n)
}

thread_local! {
    static CAP_RULE: GaussLegendre<f64> = GaussLegendre::new(16).expect("fixed degree");
}

/// Mean over the part of the sphere inside the ball `|y - c| <= radius`, i.e. the
/// polar cap `w . e >= tau` about `e = (c - center)/d`.
fn cap_mean(
    field: &ScalarField,
    center: &[f64],
    r: f64,
    e: &[f64],
    tau: f64,
    rule: &SphereRule,
) -> f64 {
    let n = field.dim();
    let sub = rule.sub_rule().expect("cap route needs n >= 2");
    let basis = complement_basis(e);
    let theta_max = tau.clamp(-1.0, 1.0).acos();
    let breaks = graded_breaks(0.0, theta_max, false, true, 14, 0.35);
    let nodes: Vec<(f64, f64)> = CAP_RULE.with(|gl| {
        breaks
            .windows(2)
            .flat_map(|w| gl.mapped(w[0], w[1]).collect::<Vec<_>>())
            .collect()
    });
    let ring = |&(th, wt): &(f64, f64)| -> f64 {
        let (s, c) = th.sin_cos();
        let mut acc = 0.0;
        for j in 0..sub.len() {
            let xi = sub.node(j);
            let mut y = center.to_vec();
            for d in 0..n {
                let mut dir = c * e[d];
                for (b, &coef) in basis.iter().zip(xi) {
                    dir += s * coef * b[d];
                }
                y[d] += r * dir;
            }
            acc += sub.weights[j] * field.eval(&y);
        }
        wt * s.powi(n as i32 - 2) * acc
    };
    let total: f64 = if field.is_expensive() {
        nodes.par_iter().map(ring).sum()
    } else {
        nodes.iter().map(ring).sum()
    };
    total / omega::<f64>(n)
}

/// Mean of a field radial about `c0`, as a single integral over the angle to
/// `c0`, graded toward the nearest point and toward the edge of the support.
fn radial_mean(field: &ScalarField, c0: &[f64], center: &[f64], r: f64) -> f64 {
    let n = field.dim();
    let d = dist(c0, center);
    let mut theta_max = std::f64::consts::PI;
    let mut clipped = false;
    if let Some(ball) = field.support() {
        if dist(&ball.center, c0) <= 1e-14 * (1.0 + ball.radius) {
            let tau = (r * r + d * d - ball.radius * ball.radius) / (2.0 * r * d);
            if tau >= 1.0 {
                return 0.0;
            }
            if tau > -1.0 {
                theta_max = tau.acos();
                clipped = true;
            }
        }
    }
    let width = (d - r).abs().max(1.0) / (d * r).sqrt().max(1.0);
    let mut levels = ((std::f64::consts::PI / width).ln() / (1.0f64 / 0.35).ln()).ceil().max(0.0) as usize + 1;
    if clipped {
        levels = levels.max(14);
    }
    let breaks = graded_breaks(0.0, theta_max, true, clipped, levels, 0.35);
    let nodes: Vec<(f64, f64)> = CAP_RULE.with(|gl| {
        breaks
            .windows(2)
            .flat_map(|w| gl.mapped(w[0], w[1]).collect::<Vec<_>>())
            .collect()
    });
    let at = |&(th, wt): &(f64, f64)| -> f64 {
        let h = (0.5 * th).sin();
        let rho = ((d - r) * (d - r) + 4.0 * d * r * h * h).sqrt();
        let mut y = c0.to_vec();
        y[0] += rho;
        wt * th.sin().powi(n as i32 - 2) * field.eval(&y)
    };
    let total: f64 = if field.is_expensive() {
        nodes.par_iter().map(at).sum()
    } else {
        nodes.iter().map(at).sum()
    };
    total * omega::<f64>(n - 1) / omega::<f64>(n)
}

/// Spherical mean of `field` over the sphere of radius `r` about `center`.
///
/// Exact at `r = 0`. Uses the field's closed form when it has one at `center`,
/// and restricts to the support ball when the sphere leaves it.
pub fn mean_value(field: &ScalarField, center: &[f64], r: f64, rule: &SphereRule) -> f64 {
    assert_eq!(rule.dim(), field.dim(), "rule and field dimension differ");
    assert_eq!(center.len(), field.dim(), "center dimension");
    if r == 0.0 {
        return field.eval(center);
    }
    if let Some(v) = field.exact_mean_at(center, r) {
        return v;
    }
    if field.radial_center() == Some(center) {
        let mut y = center.to_vec();
        y[0] += r.abs();
        return field.eval(&y);
    }
    if field.dim() >= 2 {
        if let Some(c0) = field.radial_center() {
            return radial_mean(field, c0, center, r.abs());
        }
        if let Some(ball) = field.support() {
            let ra = r.abs();
            let d = dist(&ball.center, center);
            if d < 1e-14 * (1.0 + ball.radius) {
                if ra > ball.radius {
                    return 0.0;
                }
            } else {
                let tau = (ra * ra + d * d - ball.radius * ball.radius) / (2.0 * ra * d);
                if tau >= 1.0 {
                    return 0.0;
                }
                if tau > -1.0 {
                    let e: Vec<f64> = ball
                        .center
                        .iter()
                        .zip(center)
                        .map(|(c, x)| (c - x) / d)
                        .collect();
                    return cap_mean(field, center, ra, &e, tau, rule);
                }
            }
        }
    }
    full_sphere_mean(field, center, r, rule)
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Function on `[0, inf)` with decay and Taylor data at 0.
#[derive(Clone)]
pub struct RadialProfile {
    eval: ProfileFn,
    decay: f64,
    taylor: Vec<f64>,
    taylor_error: Vec<f64>,
    even: bool,
    class: LocalClass,
    support_end: Option<f64>,
    support_start: f64,
    breakpoints: Vec<f64>,
    peaks: Vec<f64>,
    expensive: bool,
    noise: f64,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("decay", &self.decay)
            .field("taylor", &self.taylor)
            .field("even", &self.even)
            .field("class", &self.class)
            .field("support_end", &self.support_end)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    /// A smooth profile with no Taylor data.
    pub fn new(decay: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            decay,
            taylor: Vec::new(),
            taylor_error: Vec::new(),
            even: false,
            class: LocalClass::Smooth,
            support_end: None,
            support_start: 0.0,
            breakpoints: Vec::new(),
            peaks: Vec::new(),
            expensive: false,
            noise: 0.0,
        }
    }

    /// Exact Taylor coefficients `c_j = f^(j)(0)/j!`.
    pub fn with_taylor(mut self, coeffs: Vec<f64>) -> Self {
        self.taylor_error = vec![0.0; coeffs.len()];
        self.taylor = coeffs;
        self
    }

    /// Declares the profile even; odd Taylor coefficients are set to zero.
    pub fn even(mut self) -> Self {
        self.even = true;
        for (j, c) in self.taylor.iter_mut().enumerate() {
            if j % 2 == 1 {
                *c = 0.0;
            }
        }
        self
    }

    pub fn with_class(mut self, class: LocalClass) -> Self {
        self.class = class;
        self
    }

    /// The profile vanishes beyond `end`.
    pub fn with_support_end(mut self, end: f64) -> Self {
        self.support_end = Some(end);
        self
    }

    /// Points where the profile may be less regular; quadrature splits there.
    /// The profile vanishes on `[0, start)`.
    pub fn with_support_start(mut self, start: f64) -> Self {
        self.support_start = start.max(0.0);
        self
    }

    /// Adds points where the profile is not smooth or is concentrated.
    pub fn with_breakpoints(mut self, mut pts: Vec<f64>) -> Self {
        pts.append(&mut self.breakpoints);
        pts.retain(|p| p.is_finite() && *p > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.breakpoints = pts;
        self
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    /// Evaluates at many radii, in parallel when evaluation is costly.
    pub fn eval_many(&self, rs: &[f64]) -> Vec<f64> {
        if self.expensive && rs.len() > 1 {
            rs.par_iter().map(|&r| self.eval(r)).collect()
        } else {
            rs.iter().map(|&r| self.eval(r)).collect()
        }
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn taylor(&self) -> &[f64] {
        &self.taylor
    }

    /// Error estimates of the Taylor coefficients (zero when exact).
    pub fn taylor_error(&self) -> &[f64] {
        &self.taylor_error
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn class(&self) -> LocalClass {
        self.class
    }

    pub fn support_end(&self) -> Option<f64> {
        self.support_end
    }

    pub fn support_start(&self) -> f64 {
        self.support_start
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Radii where the profile is smooth but concentrated on a unit scale.
    pub fn with_peaks(mut self, mut pts: Vec<f64>) -> Self {
        pts.append(&mut self.peaks);
        pts.retain(|p| p.is_finite() && *p > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.peaks = pts;
        self
    }

    pub fn peaks(&self) -> &[f64] {
        &self.peaks
    }

    pub fn is_expensive(&self) -> bool {
        self.expensive
    }

    /// Absolute accuracy of evaluations.
    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

/// The profile `r -> F(r, center)` with Taylor coefficients up to `taylor_order`.
///
/// `c_0` is the field value at the center. Higher even coefficients are exact
/// when the field supplies them and otherwise come from extrapolated
/// finite differences in `r^2`; odd coefficients are zero.
pub fn profile_of(
    field: &ScalarField,
    center: &[f64],
    rule: &SphereRule,
    taylor_order: usize,
) -> Result<RadialProfile> {
    let f = field.clone();
    let c: Arc<[f64]> = center.into();
    let rl = rule.clone();
    let eval = {
        let c = c.clone();
        move |r: f64| mean_value(&f, &c, r, &rl)
    };
    let mut prof = RadialProfile::new(field.decay(), eval);
    prof.even = true;
    prof.class = field.class_at(center);
    prof.expensive = field.is_expensive();
    prof.noise = field.noise();
    if let Some(c0) = field.radial_center() {
        let d = dist(c0, center);
        if d > 0.0 {
            prof = prof.with_peaks(vec![d]);
        }
    }
    if let Some(ball) = field.support() {
        let d = dist(&ball.center, center);
        prof = prof
            .with_support_end(d + ball.radius)
            .with_support_start(d - ball.radius)
            .with_breakpoints(vec![(ball.radius - d).abs(), d + ball.radius]);
    }
    let (coeffs, errs) = match field.radial_taylor_at(center, taylor_order) {
        Some(t) if t.len() > taylor_order => (t[..=taylor_order].to_vec(), vec![0.0; taylor_order + 1]),
        _ => numerical_taylor(&prof, field.eval(center), taylor_order)?,
    };
    prof.taylor = coeffs;
    prof.taylor_error = errs;
    prof.taylor[0] = field.eval(center);
    Ok(prof.even())
}

const TAYLOR_TOL: f64 = 1e-4;

/// Coefficients of an even profile from forward differences of `u -> M(sqrt u)`,
/// extrapolated to zero step.
fn numerical_taylor(prof: &RadialProfile, c0: f64, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut coeffs = vec![0.0; order + 1];
    let mut errs = vec![0.0; order + 1];
    coeffs[0] = c0;
    let reach = prof.breakpoints.first().copied().unwrap_or(2.0).min(2.0);
    for m in 1..=order / 2 {
        let (c, e) = even_coefficient(prof, c0, m, reach)?;
        coeffs[2 * m] = c;
        errs[2 * m] = e;
    }
    Ok((coeffs, errs))
}

fn even_coefficient(prof: &RadialProfile, c0: f64, m: usize, reach: f64) -> Result<(f64, f64)> {
    const LEVELS: usize = 12;
    let mut s = (0.5 * reach).powi(2) / m as f64;
    let mut fact = 1.0;
    for i in 1..=m {
        fact *= i as f64;
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(LEVELS);
    let mut best = f64::NAN;
    let mut err = f64::INFINITY;
    for i in 0..LEVELS {
        let rs: Vec<f64> = (1..=m).map(|j| (j as f64 * s).sqrt()).collect();
        let mut g = vec![c0];
        g.extend(prof.eval_many(&rs));
        // m-th forward difference
        for lvl in 0..m {
            for j in 0..m - lvl {
                g[j] = g[j + 1] - g[j];
            }
        }
        let mut row = vec![g[0] / (s.powi(m as i32) * fact)];
        for j in 1..=i {
            let p = 2f64.powi(j as i32);
            let prev = &table[i - 1];
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (p - 1.0);
            let e = (v - row[j - 1]).abs().max((v - prev[j - 1]).abs());
            if e <= err {
                err = e;
                best = v;
            }
            row.push(v);
        }
        if i > 0 {
            let last = table[i - 1][i - 1];
            if (row[i] - last).abs() >= 2.0 * err && err < f64::INFINITY {
                table.push(row);
                break;
            }
        }
        table.push(row);
        s *= 0.5;
    }
    if !(err <= TAYLOR_TOL * best.abs().max(1.0)) {
        return Err(Error::TaylorFailure {
            order: 2 * m,
            estimate: err,
        });
    }
    Ok((best, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{algebraic, gaussian, hoelder_cap, log_modulus, scale, sum, translate};
    use crate::specfun::gamma_real;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn monomial_integral(exps: &[usize]) -> f64 {
        // \int_{S^{n-1}} x^a = 2 prod G((a_i+1)/2) / G(sum (a_i+1)/2), zero if any a_i odd
        if exps.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        let b: Vec<f64> = exps.iter().map(|&a| (a as f64 + 1.0) / 2.0).collect();
        2.0 * b.iter().map(|&x| gamma_real(x).unwrap()).product::<f64>()
            / gamma_real(b.iter().sum::<f64>()).unwrap()
    }

    #[test]
    fn rules_are_exact_on_monomials() {
        for (n, order) in [(2, 10), (3, 9), (4, 7), (5, 5)] {
            let rule = SphereRule::new(n, order).unwrap();
            assert!(rule.order() >= order);
            let total: f64 = rule.weights().iter().sum();
            assert_relative_eq!(total, omega::<f64>(n), max_relative = 1e-13);
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            for i in 0..rule.len() {
                let r: f64 = rule.node(i).iter().map(|v| v * v).sum();
                assert!((r - 1.0).abs() < 1e-14);
            }
            let mut exps = vec![0usize; n];
            for a in 0..=order.min(6) {
                for b in 0..=(order - a).min(4) {
                    exps[0] = a;
                    exps[n - 1] = b;
                    let got = rule.integrate(|x| x[0].powi(a as i32) * x[n - 1].powi(b as i32));
                    let want = monomial_integral(&exps);
                    assert!((got - want).abs() < 1e-12, "n={n} a={a} b={b}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn rules_are_antipodally_closed() {
        for n in 2..=4 {
            let rule = SphereRule::new(n, 9).unwrap();
            for i in 0..rule.len() {
                let p = rule.node(i);
                let found = (0..rule.len()).any(|j| {
                    rule.node(j).iter().zip(p).all(|(a, b)| a == &-b) && rule.weights()[j] == rule.weights()[i]
                });
                assert!(found, "n={n} node {i} has no exact antipode");
            }
        }
    }

    #[test]
    fn mean_values() {
        let g = gaussian(2);
        let rule = SphereRule::default_for(2);
        for r in [0.3, 1.0, 2.5] {
            let full = full_sphere_mean(&g, &[0.0, 0.0], r, &rule);
            assert_relative_eq!(full, (-r * r).exp(), max_relative = 1e-13);
            let v = [0.4, -0.9];
            let t = translate(&g, &v);
            assert_relative_eq!(full_sphere_mean(&t, &v, r, &rule), (-r * r).exp(), max_relative = 1e-13);
        }
        let cap = hoelder_cap(2, 0.75).unwrap();
        assert_eq!(mean_value(&cap, &[0.3, 0.2], 0.0, &rule), cap.eval(&[0.3, 0.2]));
        assert_eq!(mean_value(&cap, &[3.0, 0.0], 1.5, &rule), 0.0);
    }

    #[test]
    fn exact_means_agree_with_quadrature() {
        let g3 = gaussian(3);
        let rule = SphereRule::new(3, 61).unwrap();
        let dirs = crate::fields::random_directions(3, 10, 11);
        for (i, d) in dirs.iter().enumerate() {
            let c: Vec<f64> = d.iter().map(|v| v * 0.15 * i as f64).collect();
            let r = 0.2 + 0.25 * i as f64;
            let q = full_sphere_mean(&g3, &c, r, &rule);
            let e = g3.exact_mean_at(&c, r).unwrap();
            assert!((q - e).abs() < 1e-8, "{q} vs {e}");
        }
        let g2 = gaussian(2);
        let rule2 = SphereRule::default_for(2);
        for i in 0..10 {
            let c = [0.1 * i as f64, -0.05 * i as f64];
            let r = 0.1 + 0.3 * i as f64;
            let q = full_sphere_mean(&g2, &c, r, &rule2);
            assert!((q - g2.exact_mean_at(&c, r).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn cap_route_matches_fine_full_rule() {
        // smooth field with a declared support ball larger than its effective support
        let g = gaussian(3);
        let plain = crate::fields::ScalarField::new("plain", 3, f64::INFINITY, Default::default(), |x| {
            (-x.iter().map(|v| v * v).sum::<f64>()).exp()
        });
        let rule = SphereRule::new(3, 61).unwrap();
        let c = [2.0, 1.0, -1.0];
        for r in [3.0, 5.0, 7.0] {
            let ball = plain.clone().with_support(vec![0.0; 3], 6.5);
            let a = mean_value(&ball, &c, r, &rule);
            let b = g.exact_mean_at(&c, r).unwrap();
            assert!((a - b).abs() < 1e-12 + 1e-9 * b, "r={r}: {a} vs {b}");
        }
        let logm = log_modulus(2);
        let rule2 = SphereRule::new(2, 2047).unwrap();
        let x = [0.8, 0.1];
        for r in [0.5, 1.2] {
            let a = mean_value(&logm, &x, r, &SphereRule::default_for(2));
            let b = full_sphere_mean(&logm, &x, r, &rule2);
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn gaussian_profile_taylor() {
        let g = gaussian(2);
        let rule = SphereRule::default_for(2);
        let p = profile_of(&g, &[0.0, 0.0], &rule, 4).unwrap();
        assert_eq!(p.taylor(), &[1.0, 0.0, -1.0, 0.0, 0.5]);
        let v = [0.6, 0.3];
        let p = profile_of(&g, &v, &rule, 0).unwrap();
        assert_eq!(p.taylor()[0], (-0.45f64).exp());
        let cap = hoelder_cap(2, 0.75).unwrap();
        assert_eq!(profile_of(&cap, &[0.0, 0.0], &rule, 0).unwrap().taylor(), &[1.0]);
    }

    #[test]
    fn numerical_taylor_matches_exact() {
        // same field without closed-form hooks
        let plain = crate::fields::ScalarField::new("plain", 2, f64::INFINITY, Default::default(), |x| {
            (-x.iter().map(|v| v * v).sum::<f64>()).exp()
        });
        let rule = SphereRule::default_for(2);
        let v = [0.5, -0.2];
        let num = profile_of(&plain, &v, &rule, 4).unwrap();
        let exact = profile_of(&gaussian(2), &v, &rule, 4).unwrap();
        for j in 0..=4 {
            assert!((num.taylor()[j] - exact.taylor()[j]).abs() < 1e-6, "c{j}");
            assert!(num.taylor_error()[j] < 1e-4);
        }
        // second derivative of exp(-r^2) at 0 by a plain central difference
        let fd = |h: f64| ((-h * h).exp() - 2.0 + (-h * h).exp()) / (h * h);
        let p0 = profile_of(&plain, &[0.0, 0.0], &rule, 2).unwrap();
        assert!((2.0 * p0.taylor()[2] - fd(1e-4)).abs() < 1e-6);
    }

    #[test]
    fn doubling_rule_order_is_stable() {
        let f = algebraic(3, 3.0).unwrap();
        let plain = scale(&f, 1.0);
        let c = [0.3, -0.4, 0.2];
        let coarse = SphereRule::new(3, 31).unwrap();
        let fine = SphereRule::new(3, 63).unwrap();
        for r in [0.5, 2.0, 5.0, 10.0] {
            let a = full_sphere_mean(&plain, &c, r, &coarse);
            let b = full_sphere_mean(&plain, &c, r, &fine);
            assert!((a - b).abs() < 1e-8, "r={r}");
        }
    }

    proptest! {
        #[test]
        fn evenness(r in 0.01f64..5.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
            let f = algebraic(2, 2.0).unwrap();
            let g = translate(&f, &[0.2, 0.1]);
            let rule = SphereRule::default_for(2);
            let c = [cx, cy];
            let a = full_sphere_mean(&g, &c, r, &rule);
            let b = full_sphere_mean(&g, &c, -r, &rule);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn evenness_3d(r in 0.01f64..5.0, cx in -1.0f64..1.0) {
            let f = translate(&algebraic(3, 2.0).unwrap(), &[0.2, 0.1, -0.3]);
            let rule = SphereRule::default_for(3);
            let c = [cx, 0.1, 0.0];
            let a = full_sphere_mean(&f, &c, r, &rule);
            let b = full_sphere_mean(&f, &c, -r, &rule);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn linearity(r in 0.0f64..4.0, cx in -1.5f64..1.5) {
            let f = translate(&algebraic(2, 2.0).unwrap(), &[0.5, 0.0]);
            let g = algebraic(2, 3.0).unwrap();
            let h = sum(&f, &g);
            let rule = SphereRule::default_for(2);
            let c = [cx, 0.3];
            let lhs = mean_value(&h, &c, r, &rule);
            let rhs = mean_value(&f, &c, r, &rule) + mean_value(&g, &c, r, &rule);
            prop_assert!((lhs - rhs).abs() < 1e-10, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn profile_keeps_hoelder_index_of_field() {
        use crate::fields::{estimate_hoelder_index, ScalarField, Smoothness};
        let rule = SphereRule::default_for(2);
        let cap = hoelder_cap(2, 0.5).unwrap();
        let p = profile_of(&cap, &[0.3, 0.0], &rule, 0).unwrap();
        let line = ScalarField::new("profile", 1, f64::INFINITY, Smoothness::smooth(), move |r| p.eval(r[0].abs()));
        // the sphere about (0.3, 0) meets the unit circle first at r = 0.7, last at r = 1.3
        for r in [0.7, 1.3] {
            let idx = estimate_hoelder_index(&line, &[r], &[0.04, 0.02, 0.01, 0.005, 0.0025]).unwrap();
            assert!(idx > 0.45, "r = {r}: {idx}");
        }
    }
}
