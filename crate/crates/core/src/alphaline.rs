//! The functional `x_+^alpha(f) = (1/Gamma(alpha+1)) \int_0^inf x^alpha f(x) dx`
//! and its continuation to `Re alpha <= -1` by Taylor subtraction:
//!
//! ```text
//! x_+^alpha(f) = 1/Gamma(alpha+1) [ \int_0^rho x^alpha A(x) dx + \int_rho^inf x^alpha f(x) dx + B(alpha) ]
//! A(x) = f(x) - sum_{j<=l} c_j x^j,   B(alpha) = sum_{j<=l} c_j rho^(alpha+j+1) / (alpha+j+1)
//! ```
//!
//! The bracket is evaluated without the Gamma prefactor by [`bracket`], so
//! that callers can cancel it against their own Gamma factors.
//!
//! Quadrature: `[0, rho]` is covered by geometric panels shrinking toward 0,
//! `[rho, R]` by panels graded toward the profile's breakpoints, and
//! `[R, inf)` by the substitution `x = R/u` followed by geometric panels in `u`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::quadrature::{graded_breaks, GaussLegendre};
use crate::specfun::{omega, reciprocal_gamma};
use crate::spherical::{profile_of, RadialProfile, SphereRule};

/// Parameters of the continued evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationConfig {
    /// Split radius `rho` in `(0, 1)`.
    pub rho: f64,
    /// Fixed Taylor order `l`; `None` picks the smallest admissible order
    /// (plus extra terms when they are known exactly).
    pub taylor_order: Option<usize>,
    /// Radius `R` beyond which the substitution `x = R/u` is used.
    pub truncation: f64,
    /// Gauss-Legendre nodes per panel on `[0, rho]`.
    pub inner_nodes: usize,
    /// Gauss-Legendre nodes per panel on `[rho, inf)`.
    pub outer_nodes: usize,
    pub tolerance: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            taylor_order: None,
            truncation: 8.0,
            inner_nodes: 16,
            outer_nodes: 16,
            tolerance: 1e-9,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "split radius must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if !(self.truncation >= 1.0 && self.truncation > self.rho) {
            return Err(Error::InvalidArgument(format!(
                "truncation radius must be >= 1 and > rho, got {}",
                self.truncation
            )));
        }
        if self.inner_nodes == 0 || self.outer_nodes == 0 {
            return Err(Error::InvalidArgument("quadrature resolutions must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }
}

/// A computed value with an a posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub error: f64,
}

/// Smallest Taylor order that makes `\int_0^rho x^beta A(x) dx` converge.
pub fn required_order(beta: Complex64) -> usize {
    (-beta.re - 1.0).floor().max(0.0) as usize
}

/// If `z` is a negative integer, returns it.
pub(crate) fn negative_integer(z: Complex64) -> Option<i64> {
    (z.im == 0.0 && z.re < 0.0 && z.re == z.re.round()).then(|| z.re as i64)
}

/// Admissible strip `-l - eps - 1 < Re beta < a - 1` of a profile.
pub fn strip(profile: &RadialProfile) -> (f64, f64) {
    let a = if profile.support_end().is_some() {
        f64::INFINITY
    } else {
        profile.decay()
    };
    (-profile.class().regularity() - 1.0, a - 1.0)
}

fn check_strip(profile: &RadialProfile, beta: Complex64) -> Result<()> {
    let (lower, upper) = strip(profile);
    if beta.re > lower && beta.re < upper {
        Ok(())
    } else {
        Err(Error::StripViolation {
            alpha: beta,
            lower,
            upper,
        })
    }
}

#[inline]
fn cpow(x: f64, beta: Complex64) -> Complex64 {
    (beta * x.ln()).exp()
}

fn finite(vals: &[f64], xs: &[f64]) -> Result<()> {
    match vals.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::Quadrature(format!(
            "non-finite profile value at r = {}",
            xs[i]
        ))),
    }
}

/// `p / q` without underflow in `|q|^2`.
fn ratio_of(p: Complex64, q: Complex64) -> Complex64 {
    let s = q.re.abs().max(q.im.abs());
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (p / s) / (q / s)
}

/// Sum of the panels after the last of `h`, assuming `p_j = A q^j / (j + b)`.
///
/// That is the shape left by a slowly varying factor such as `1/log(1/x)`;
/// geometric sequences (`b -> inf`) are rejected. The error is the change
/// against the fit one panel earlier.
fn slow_tail(h: &[Complex64]) -> Option<(Complex64, f64)> {
    let fit = |p1: Complex64, p2: Complex64, p3: Complex64| -> Option<Complex64> {
        let r = ratio_of(p3, p2);
        let e = 1.0 - ratio_of(p1 * p3, p2 * p2).re;
        if !(e > 1e-12 && e < 0.5 && r.norm() > 0.5) {
            return None;
        }
        let u = (1.0 / e).sqrt();
        let q = r * (u + 1.0) / u;
        if !(q.norm() < 1.0) {
            return None;
        }
        let mut tail = Complex64::new(0.0, 0.0);
        let mut qj = Complex64::new(1.0, 0.0);
        for j in 1..=20_000_000u64 {
            qj *= q;
            let term = p3 * qj * ((u + 1.0) / (u + 1.0 + j as f64));
            tail += term;
            if term.norm() < 1e-16 * tail.norm() {
                break;
            }
        }
        Some(tail)
    };
    let n = h.len();
    if n < 4 {
        return None;
    }
    let t = fit(h[n - 3], h[n - 2], h[n - 1])?;
    let err = match fit(h[n - 4], h[n - 3], h[n - 2]) {
        Some(prev) => (prev - h[n - 1] - t).norm(),
        None => t.norm(),
    };
    Some((t, err))
}

struct Panels {
    sum: Complex64,
    error: f64,
    ratio: f64,
    reached_floor: bool,
}

/// `\int_0^top g(x) dx` over panels `[q^(i+1) top, q^i top]`, stopping once the
/// contributions fall below `abs_tol`, once they are swamped by the noise
/// bound, or at `floor`.
fn geometric_to_zero(
    top: f64,
    floor: f64,
    abs_tol: f64,
    gl: &GaussLegendre<f64>,
    mut panel: impl FnMut(&[(f64, f64)]) -> Result<(Complex64, f64)>,
) -> Result<Panels> {
    const Q: f64 = 0.25;
    let mut hi = top;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev: Option<Complex64> = None;
    let mut history: Vec<Complex64> = Vec::new();
    let mut count = 0usize;
    loop {
        let lo = hi * Q;
        let nodes: Vec<(f64, f64)> = gl.mapped(lo, hi).collect();
        let (p, noise) = panel(&nodes)?;
        if !p.is_finite() {
            return Err(Error::Quadrature(format!("non-finite panel on [{lo:e}, {hi:e}]")));
        }
        sum += p;
        count += 1;
        let ratio = prev.map(|q| if q.norm() > 0.0 { p.norm() / q.norm() } else { 0.0 });
        if p.norm() == 0.0 && prev.is_some_and(|q| q.norm() == 0.0) {
            return Ok(Panels {
                sum,
                error: 0.0,
                ratio: 0.0,
                reached_floor: false,
            });
        }
        if count >= 3 {
            if let (Some(q), Some(r)) = (prev, ratio) {
                if p.norm() <= abs_tol && r < 0.9 {
                    let c = ratio_of(p, q);
                    let tail = p * c / (1.0 - c);
                    return Ok(Panels {
                        sum: sum + tail,
                        error: tail.norm().max(p.norm() * 1e-3),
                        ratio: r,
                        reached_floor: false,
                    });
                }
                if p.norm() <= 4.0 * noise {
                    if let Some((tail, err)) = slow_tail(&history) {
                        return Ok(Panels {
                            sum: sum - p + tail,
                            error: err + p.norm() + noise,
                            ratio: r,
                            reached_floor: true,
                        });
                    }
                    return Ok(Panels {
                        sum,
                        error: p.norm() + noise,
                        ratio: r,
                        reached_floor: true,
                    });
                }
            }
        }
        if lo <= floor || count > 2000 {
            let r = ratio.unwrap_or(1.0);
            history.push(p);
            if r >= 0.99 {
                if let Some((tail, err)) = slow_tail(&history) {
                    return Ok(Panels {
                        sum: sum + tail,
                        error: err,
                        ratio: r,
                        reached_floor: true,
                    });
                }
            }
            // geometric continuation past the floor, counted in full as error
            let (tail, error) = match prev {
                Some(q) if r < 0.99 => {
                    let c = ratio_of(p, q);
                    let t = p * c / (1.0 - c);
                    (t, t.norm())
                }
                _ => (Complex64::new(0.0, 0.0), f64::INFINITY),
            };
            return Ok(Panels {
                sum: sum + tail,
                error,
                ratio: r,
                reached_floor: true,
            });
        }
        history.push(p);
        prev = Some(p);
        hi = lo;
    }
}

/// Breaks on `[lo, hi]` split at `bps` and graded toward each breakpoint.
///
/// Panels are at most `width` wide or, further out, as wide as their distance
/// to the nearest breakpoint, peak, or the origin.
fn graded_mesh(lo: f64, hi: f64, bps: &[f64], peaks: &[f64], width: f64) -> Vec<f64> {
    let mut cuts = vec![lo];
    cuts.extend(bps.iter().copied().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    let is_bp = |x: f64| bps.contains(&x);
    let nearest = |x: f64| {
        bps.iter()
            .chain(peaks)
            .chain(std::iter::once(&0.0))
            .map(|b| (x - b).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let mut out = vec![lo];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let levels = ((b - a) / (0.1 * width)).log(4.0).ceil().max(10.0) as usize;
        let g = graded_breaks(a, b, is_bp(a), is_bp(b), levels, 0.25);
        for s in g.windows(2) {
            // split toward the end nearer a breakpoint until panels fit
            let mut stack = vec![(s[0], s[1])];
            while let Some((p, q)) = stack.pop() {
                let (np, nq) = (nearest(p), nearest(q));
                if q - p <= width.max(np.min(nq)).max(1e-12 * q.abs()) {
                    out.push(q);
                } else if np <= nq {
                    let m = p + 0.25 * (q - p);
                    stack.push((m, q));
                    stack.push((p, m));
                } else {
                    let m = q - 0.25 * (q - p);
                    stack.push((m, q));
                    stack.push((p, m));
                }
            }
        }
    }
    out
}

/// Regularized `\int_0^inf x^beta f(x) dx` (the bracket of the continuation formula).
///
/// At negative integers `beta = -j-1` the value is returned only when the
/// resonant coefficient `c_j` vanishes (the bracket is then regular there).
pub fn bracket(profile: &RadialProfile, beta: Complex64, cfg: &ContinuationConfig) -> Result<Evaluation> {
    cfg.validate()?;
    check_strip(profile, beta)?;
    let needed = required_order(beta);
    let coeffs = profile.taylor();
    let terms = if beta.re >= 0.0 {
        0
    } else {
        match cfg.taylor_order {
            Some(l) if l < needed => {
                return Err(Error::InvalidArgument(format!(
                    "Taylor order {l} too small for Re order {}: need at least {needed}",
                    beta.re
                )))
            }
            Some(l) => l + 1,
            None => coeffs.len().max(needed + 1),
        }
    };
    if coeffs.len() < terms {
        return Err(Error::MissingCoefficient(coeffs.len()));
    }
    let coeffs = &coeffs[..terms];
    let errs = profile.taylor_error();
    if let Some(m) = negative_integer(beta) {
        let j = (-m - 1) as usize;
        if j < terms && coeffs[j] != 0.0 {
            return Err(Error::NegativeInteger(m));
        }
    }
    let rho = cfg.rho;
    let tol = cfg.tolerance;
    let noise = profile_noise(profile);
    let gl_in = GaussLegendre::new(cfg.inner_nodes)?;
    let gl_out = GaussLegendre::new(cfg.outer_nodes)?;

    let poly = |x: f64| -> f64 {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };

    // B term
    let mut b = Complex64::new(0.0, 0.0);
    let mut coeff_err = 0.0;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 && errs.get(j).copied().unwrap_or(0.0) == 0.0 {
            continue;
        }
        let e = beta + (j as f64 + 1.0);
        if e.norm() == 0.0 {
            continue;
        }
        let t = cpow(rho, e) / e;
        b += t * c;
        if e.re <= 0.0 {
            coeff_err += errs.get(j).copied().unwrap_or(0.0) * t.norm();
        }
    }

    // Inner region: graded panels above the smallest breakpoint, geometric below it.
    let bps: Vec<f64> = profile.breakpoints().to_vec();
    let peaks = profile.peaks();
    let inner_top = bps
        .iter()
        .copied()
        .filter(|&p| p < rho)
        .fold(rho, f64::min);
    let subtracted = |xs: &[f64]| -> Result<Vec<f64>> {
        let vals = profile.eval_many(xs);
        finite(&vals, xs)?;
        Ok(xs.iter().zip(vals).map(|(&x, v)| v - poly(x)).collect())
    };
    let mut inner = Complex64::new(0.0, 0.0);
    if inner_top < rho {
        let breaks = graded_mesh(inner_top, rho, &bps, peaks, 0.25);
        let nodes = crate::quadrature::composite_nodes(&gl_in, &breaks);
        let xs: Vec<f64> = nodes.iter().map(|p| p.0).collect();
        let a = subtracted(&xs)?;
        for ((x, w), av) in nodes.iter().zip(a) {
            inner += cpow(*x, beta) * (w * av);
        }
    }
    let floor = {
        let overflow = (-690.0 / beta.re.abs().max(1.0)).exp();
        overflow.max(1e-300)
    };
    let inner_panels = geometric_to_zero(inner_top, floor, 0.1 * tol, &gl_in, |nodes| {
        let xs: Vec<f64> = nodes.iter().map(|p| p.0).collect();
        let a = subtracted(&xs)?;
        let mut s = Complex64::new(0.0, 0.0);
        let mut nz = 0.0;
        for ((x, w), av) in nodes.iter().zip(a) {
            let xb = cpow(*x, beta);
            s += xb * (w * av);
            nz += w * xb.norm();
        }
        Ok((s, noise * nz))
    })?;
    inner += inner_panels.sum;

    // Outer region.
    let mut outer = Complex64::new(0.0, 0.0);
    let mut outer_err = 0.0;
    let plain = |nodes: &[(f64, f64)]| -> Result<Complex64> {
        let xs: Vec<f64> = nodes.iter().map(|p| p.0).collect();
        let vals = profile.eval_many(&xs);
        finite(&vals, &xs)?;
        Ok(nodes
            .iter()
            .zip(vals)
            .map(|((x, w), v)| cpow(*x, beta) * (w * v))
            .sum())
    };
    match profile.support_end() {
        Some(end) => {
            let start = rho.max(profile.support_start());
            if end > start {
                let breaks = graded_mesh(start, end, &bps, peaks, 1.0);
                outer += plain(&crate::quadrature::composite_nodes(&gl_out, &breaks))?;
            }
        }
        None => {
            let far = bps.iter().chain(peaks).copied().fold(0.0, f64::max);
            let r = cfg.truncation.max(rho).max(2.0 * far);
            let breaks = graded_mesh(rho, r, &bps, peaks, 1.0);
            outer += plain(&crate::quadrature::composite_nodes(&gl_out, &breaks))?;
            let tail = geometric_to_zero(1.0, 1e-150, 0.1 * tol, &gl_out, |nodes| {
                let mapped: Vec<(f64, f64)> = nodes
                    .iter()
                    .map(|&(u, w)| (r / u, w * (r / u) / u))
                    .collect();
                Ok((plain(&mapped)?, 0.0))
            })?;
            if tail.reached_floor && tail.ratio >= 0.95 {
                return Err(Error::Divergence(format!(
                    "tail of the order {beta} integral does not decay beyond R = {r}; declared decay {}",
                    profile.decay()
                )));
            }
            outer += tail.sum;
            outer_err = tail.error;
        }
    }
    Ok(Evaluation {
        value: inner + outer + b,
        error: inner_panels.error + outer_err + coeff_err,
    })
}

fn profile_noise(profile: &RadialProfile) -> f64 {
    let scale = profile.taylor().first().copied().unwrap_or(0.0).abs().max(1.0);
    profile.noise().max(4.0 * f64::EPSILON * scale)
}

/// Continued `x_+^alpha` of a profile.
///
/// Negative integers are rejected with [`Error::NegativeInteger`]; use
/// [`xplus_at_negative_integer`] there.
pub fn xplus(profile: &RadialProfile, alpha: Complex64, cfg: &ContinuationConfig) -> Result<Complex64> {
    if let Some(m) = negative_integer(alpha) {
        return Err(Error::NegativeInteger(m));
    }
    let br = bracket(profile, alpha, cfg)?;
    Ok(reciprocal_gamma(alpha + 1.0) * br.value)
}

/// `x_+^m(f) = (-1)^(-m-1) f^(-m-1)(0)` for `m = -1, -2, ...`.
pub fn xplus_at_negative_integer(profile: &RadialProfile, m: i64) -> Result<Complex64> {
    if m >= 0 {
        return Err(Error::InvalidArgument(format!("{m} is not a negative integer")));
    }
    let j = (-m - 1) as usize;
    let c = *profile.taylor().get(j).ok_or(Error::MissingCoefficient(j))?;
    let mut fact = 1.0;
    for i in 2..=j {
        fact *= i as f64;
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    Ok(Complex64::new(sign * fact * c, 0.0))
}

/// A sequence of values approaching a limit, with its extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    /// Distances `h_j` to the limit point.
    pub h: Vec<f64>,
    pub values: Vec<Complex64>,
    pub limit: Complex64,
    /// Observed convergence order `p` in `value ~ limit + C h^p`, from the last three points.
    pub rate: f64,
    /// Whether `rate` could be estimated (otherwise `p = 1` is reported).
    pub rate_estimated: bool,
    pub error_estimate: f64,
}

fn basis(h: f64, j: usize) -> f64 {
    match j {
        0 => 1.0,
        1 => h,
        2 => h * h.ln(),
        3 => h * h,
        _ => h * h * h.ln(),
    }
}

/// Interpolates the last `m` points by `L + a h + b h ln h + c h^2 + d h^2 ln h`
/// (truncated to `m` terms) and returns `L`.
fn fit_limit(h: &[f64], values: &[Complex64], m: usize) -> Option<Complex64> {
    let n = h.len();
    let hs = &h[n - m..];
    let ys = &values[n - m..];
    // Gaussian elimination with partial pivoting on the m x m system.
    let mut a: Vec<Vec<f64>> = hs.iter().map(|&x| (0..m).map(|j| basis(x, j)).collect()).collect();
    let mut rhs: Vec<Complex64> = ys.to_vec();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= f * a[col][k];
            }
            let r = rhs[col] * f;
            rhs[row] -= r;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for k in row + 1..m {
            acc -= x[k] * a[row][k];
        }
        x[row] = acc / a[row][row];
    }
    x[0].is_finite().then_some(x[0])
}

/// Extrapolates `values` at distances `h` (positive, decreasing) to `h = 0`.
///
/// The expansion `L + a h + b h ln h + ...` covers both analytic dependence on
/// `h` and the `h log(1/h)` approach seen for merely continuous functions.
/// The observed order from the last three points is reported alongside, and
/// growing successive differences are flagged as non-convergence.
pub fn extrapolate_limit(h: &[f64], values: &[Complex64]) -> Result<LimitEstimate> {
    let n = h.len();
    if n < 3 || values.len() != n {
        return Err(Error::InvalidArgument("need at least three points to extrapolate".into()));
    }
    if h.iter().any(|&x| !(x > 0.0)) || h.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("distances must be positive and decreasing".into()));
    }
    let trace = || values.iter().map(|v| v.re).collect::<Vec<_>>();
    let d1 = values[n - 2] - values[n - 3];
    let d2 = values[n - 1] - values[n - 2];
    let scale = values[n - 1].norm().max(1.0);
    if d2.norm() > 1.5 * d1.norm() && d2.norm() > 1e-12 * scale {
        return Err(Error::NonConvergence { trace: trace() });
    }
    let ratio = h[n - 2] / h[n - 1];
    let mut rate = 1.0;
    let mut estimated = false;
    if d2.norm() > 1e-14 * scale && d1.norm() > 0.0 {
        let p = (d1.norm() / d2.norm()).ln() / ratio.ln();
        if p.is_finite() && p > 0.0 {
            rate = p;
            estimated = true;
        }
    }
    let m = n.min(5);
    let limit = fit_limit(h, values, m).ok_or(Error::NonConvergence { trace: trace() })?;
    let coarser = fit_limit(&h[..n - 1], &values[..n - 1], m.min(n - 1))
        .into_iter()
        .chain(fit_limit(h, values, m - 1))
        .map(|l| (l - limit).norm())
        .fold(0.0, f64::max);
    Ok(LimitEstimate {
        h: h.to_vec(),
        values: values.to_vec(),
        limit,
        rate,
        rate_estimated: estimated,
        error_estimate: coarser,
    })
}

/// `x_+^s` along `s_j -> -1+`, with the extrapolated limit (which is `f(0)`).
pub fn xplus_right_limit(
    profile: &RadialProfile,
    s_sequence: &[f64],
    cfg: &ContinuationConfig,
) -> Result<LimitEstimate> {
    if s_sequence.iter().any(|&s| !(s > -1.0 && s < 0.0)) {
        return Err(Error::InvalidArgument("orders must lie in (-1, 0)".into()));
    }
    let values = s_sequence
        .iter()
        .map(|&s| xplus(profile, Complex64::new(s, 0.0), cfg))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = s_sequence.iter().map(|s| s + 1.0).collect();
    extrapolate_limit(&h, &values)
}

/// Radial profile of `field` about `center` with enough Taylor data for order `beta`.
///
/// Exact coefficients are taken generously; numerical ones are limited to
/// one even order beyond the requirement and dropped if they fail to converge.
pub fn profile_for(
    field: &ScalarField,
    center: &[f64],
    rule: &SphereRule,
    beta: Complex64,
    cfg: &ContinuationConfig,
) -> Result<RadialProfile> {
    let mut needed = cfg.taylor_order.unwrap_or_else(|| required_order(beta));
    if let Some(m) = negative_integer(beta) {
        needed = needed.max((-m - 1) as usize);
    }
    if beta.re >= 0.0 && cfg.taylor_order.is_none() {
        return profile_of(field, center, rule, 0);
    }
    let max_order = field.class_at(center).order().unwrap_or(usize::MAX);
    if cfg.taylor_order.is_some() {
        return profile_of(field, center, rule, needed);
    }
    let generous = (needed + 4).min(max_order.max(needed));
    if field.radial_taylor_at(center, generous).is_some() {
        return profile_of(field, center, rule, generous);
    }
    let extra = needed + 2 - needed % 2;
    if extra <= max_order {
        if let Ok(p) = profile_of(field, center, rule, extra) {
            return Ok(p);
        }
    }
    profile_of(field, center, rule, needed)
}

/// `r^alpha(f) = \int |y|^(alpha) ... = Omega_n x_+^(alpha+n-1)(M_f)`, about `center`.
pub fn r_alpha(
    field: &ScalarField,
    alpha: Complex64,
    center: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<Complex64> {
    let n = field.dim();
    let beta = alpha + (n as f64 - 1.0);
    let prof = profile_for(field, center, rule, beta, cfg)?;
    let om = omega::<f64>(n);
    match negative_integer(beta) {
        Some(m) => Ok(om * xplus_at_negative_integer(&prof, m)?),
        None => Ok(om * xplus(&prof, beta, cfg)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gaussian, log_modulus, smooth_cutoff};
    use crate::quadrature::GaussLegendre;
    use crate::specfun::gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gauss_profile() -> RadialProfile {
        RadialProfile::new(f64::INFINITY, |r| (-r * r).exp())
            .with_taylor(vec![1.0, 0.0, -1.0, 0.0, 0.5, 0.0, -1.0 / 6.0])
            .even()
    }

    /// Gamma((a+1)/2) / (2 Gamma(a+1)): x_+^a of exp(-x^2).
    fn gauss_closed(a: Complex64) -> Complex64 {
        gamma((a + 1.0) / 2.0).unwrap() * reciprocal_gamma(a + 1.0) / 2.0
    }

    #[test]
    fn gaussian_profile_values() {
        let cfg = ContinuationConfig::default();
        let p = gauss_profile();
        assert_relative_eq!(xplus(&p, c(0.0), &cfg).unwrap().re, PI.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(xplus(&p, c(1.0), &cfg).unwrap().re, 0.5, max_relative = 1e-12);
        let v = xplus(&p, c(-1.5), &cfg).unwrap();
        let want = gamma(c(-0.25)).unwrap() / (2.0 * gamma(c(-0.5)).unwrap());
        assert!((v - want).norm() < 1e-10, "{v} vs {want}");
        assert!((want.re - 0.691_367_339_036_293).abs() < 1e-12);
        for a in [-2.5, -3.3, -4.7, 0.3, 2.2] {
            let v = xplus(&p, c(a), &cfg).unwrap();
            assert!((v - gauss_closed(c(a))).norm() < 1e-9, "a = {a}");
        }
        let z = Complex64::new(-2.6, 0.7);
        assert!((xplus(&p, z, &cfg).unwrap() - gauss_closed(z)).norm() < 1e-9);
    }

    #[test]
    fn plain_integral_oracle() {
        // independent quadrature: exp(-x^2) x^0.5 via x = t^2 substitution on [0, 8]
        let gl = GaussLegendre::<f64>::new(60).unwrap();
        let direct: f64 = (0..16)
            .map(|i| gl.integrate(0.5 * i as f64, 0.5 * (i + 1) as f64, |t: f64| 2.0 * t * t * (-t.powi(4)).exp()))
            .sum();
        let v = xplus(&gauss_profile(), c(0.5), &ContinuationConfig::default()).unwrap();
        let want = direct * reciprocal_gamma(c(1.5)).re;
        assert!((v.re - want).abs() < 1e-12);
    }

    #[test]
    fn negative_integers() {
        let p = gauss_profile();
        assert_eq!(xplus_at_negative_integer(&p, -1).unwrap().re, 1.0);
        assert_eq!(xplus_at_negative_integer(&p, -2).unwrap().re, 0.0);
        assert_eq!(xplus_at_negative_integer(&p, -3).unwrap().re, -2.0);
        // second derivative of exp(-r^2) at 0 by central differences
        let h: f64 = 1e-4;
        let fd = ((-h * h).exp() - 2.0 + (-h * h).exp()) / (h * h);
        assert!((fd + 2.0).abs() < 1e-6);
        assert!(matches!(xplus(&p, c(-2.0), &ContinuationConfig::default()), Err(Error::NegativeInteger(-2))));
        assert!(matches!(xplus_at_negative_integer(&p, -9), Err(Error::MissingCoefficient(8))));
        // continuity through the negative integers
        let cfg = ContinuationConfig::default();
        for m in [-1i64, -2, -3, -4] {
            let exact = xplus_at_negative_integer(&p, m).unwrap();
            for d in [1e-4, -1e-4] {
                let v = xplus(&p, c(m as f64 + d), &cfg).unwrap();
                assert!((v - exact).norm() < 1e-3, "m={m} d={d}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn right_limits() {
        let cfg = ContinuationConfig::default();
        let s: Vec<f64> = (1..=4).map(|j| -1.0 + 10f64.powi(-j)).collect();
        let est = xplus_right_limit(&gauss_profile(), &s, &cfg).unwrap();
        assert!((est.limit.re - 1.0).abs() < 1e-3, "{est:?}");
        let cut = RadialProfile::new(f64::INFINITY, smooth_cutoff)
            .with_taylor(vec![1.0, 0.0, 0.0])
            .even()
            .with_support_end(1.0)
            .with_breakpoints(vec![0.5, 1.0]);
        let est = xplus_right_limit(&cut, &s, &cfg).unwrap();
        assert!((est.limit.re - 1.0).abs() < 1e-3, "{est:?}");
    }

    #[test]
    fn log_modulus_limit() {
        let f = log_modulus(2);
        let rule = SphereRule::default_for(2);
        let prof = profile_of(&f, &[0.0, 0.0], &rule, 0).unwrap();
        let cfg = ContinuationConfig::default();
        let s: Vec<f64> = (2..=8).map(|j| -1.0 + 2f64.powi(-j)).collect();
        let est = xplus_right_limit(&prof, &s, &cfg).unwrap();
        assert!(est.limit.norm() < 1e-3, "{est:?}");
        let raw = xplus(&prof, c(-1.0 + 1e-4), &cfg).unwrap();
        assert!(raw.norm() < 1e-2, "{raw}");
    }

    #[test]
    fn strip_and_config_errors() {
        let alg = RadialProfile::new(3.0, |r| (1.0 + r * r).powf(-1.5)).with_taylor(vec![1.0]).even();
        let cfg = ContinuationConfig::default();
        assert!(matches!(xplus(&alg, c(2.5), &cfg), Err(Error::StripViolation { .. })));
        assert!(xplus(&alg, c(1.5), &cfg).is_ok());
        let cont = RadialProfile::new(f64::INFINITY, |r| (-r).exp())
            .with_taylor(vec![1.0])
            .with_class(crate::fields::LocalClass::Continuous { order: 0 });
        assert!(matches!(xplus(&cont, c(-1.2), &cfg), Err(Error::StripViolation { .. })));
        let bad = ContinuationConfig { rho: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let lie = RadialProfile::new(2.5, |r| 1.0 / (1.0 + r));
        assert!(matches!(xplus(&lie, c(0.0), &cfg), Err(Error::Divergence(_))));
    }

    #[test]
    fn r_alpha_values() {
        let g = gaussian(2);
        let rule = SphereRule::default_for(2);
        let cfg = ContinuationConfig::default();
        let o = [0.0, 0.0];
        assert_relative_eq!(r_alpha(&g, c(0.0), &o, &cfg, &rule).unwrap().re, PI, max_relative = 1e-11);
        assert_relative_eq!(
            r_alpha(&g, c(-1.0), &o, &cfg, &rule).unwrap().re,
            PI.powf(1.5),
            max_relative = 1e-11
        );
        assert_relative_eq!(r_alpha(&g, c(-2.0), &o, &cfg, &rule).unwrap().re, 2.0 * PI, max_relative = 1e-14);
        // polar-coordinate oracle on the definition: \int |y|^-1 exp(-|y|^2) dy = 2 pi \int exp(-r^2) dr
        let gl = GaussLegendre::<f64>::new(40).unwrap();
        let direct: f64 = (0..14).map(|i| gl.integrate(0.5 * i as f64, 0.5 * (i + 1) as f64, |r: f64| (-r * r).exp())).sum();
        assert_relative_eq!(r_alpha(&g, c(-1.0), &o, &cfg, &rule).unwrap().re, 2.0 * PI * direct, max_relative = 1e-11);
    }

    #[test]
    fn extrapolation() {
        let h: Vec<f64> = (2..=8).map(|j| 2f64.powi(-j)).collect();
        let v: Vec<Complex64> = h.iter().map(|&x| c(1.0 + 0.3 * x + 0.1 * x * x)).collect();
        let est = extrapolate_limit(&h, &v).unwrap();
        assert!((est.limit.re - 1.0).abs() < 1e-8);
        assert!((est.rate - 1.0).abs() < 0.1);
        // h log(1/h) approach
        let v: Vec<Complex64> = h.iter().map(|&x| c(2.0 - x * x.ln() + 0.5 * x)).collect();
        let est = extrapolate_limit(&h, &v).unwrap();
        assert!((est.limit.re - 2.0).abs() < 1e-8);
        let bad: Vec<Complex64> = h.iter().map(|&x| c(1.0 / x)).collect();
        assert!(matches!(extrapolate_limit(&h, &bad), Err(Error::NonConvergence { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn rho_independence(re in -4.5f64..1.5, im in -1.0f64..1.0) {
            let z = Complex64::new(re, im);
            prop_assume!(negative_integer(Complex64::new(re.round(), 0.0)).is_none() || (re - re.round()).abs() > 0.05 || im.abs() > 0.05);
            let p = gauss_profile();
            let base = ContinuationConfig::default();
            let a = xplus(&p, z, &base.clone().with_rho(0.3)).unwrap();
            let b = xplus(&p, z, &base.clone().with_rho(0.5)).unwrap();
            let d = xplus(&p, z, &base.with_rho(0.8)).unwrap();
            prop_assert!((a - b).norm() < 1e-8 && (b - d).norm() < 1e-8);
        }

        #[test]
        fn holomorphic_mean_value(re in -3.8f64..0.8) {
            let center = Complex64::new(re, 0.3);
            let p = gauss_profile();
            let cfg = ContinuationConfig::default();
            let radius = 0.1;
            let mean: Complex64 = (0..16)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / 16.0;
                    xplus(&p, center + Complex64::from_polar(radius, t), &cfg).unwrap()
                })
                .sum::<Complex64>()
                / 16.0;
            let v = xplus(&p, center, &cfg).unwrap();
            prop_assert!((mean - v).norm() < 1e-8);
        }

        #[test]
        fn linear_in_profile(a in -3.7f64..-0.1, s in -3.0f64..3.0) {
            prop_assume!((a - a.round()).abs() > 0.05);
            let p = gauss_profile();
            let q = RadialProfile::new(f64::INFINITY, |r| (-2.0 * r * r).exp())
                .with_taylor(vec![1.0, 0.0, -2.0, 0.0, 2.0, 0.0, -4.0 / 3.0])
                .even();
            let pq = RadialProfile::new(f64::INFINITY, move |r| (-r * r).exp() + s * (-2.0 * r * r).exp())
                .with_taylor(vec![1.0 + s, 0.0, -1.0 - 2.0 * s, 0.0, 0.5 + 2.0 * s, 0.0, -1.0 / 6.0 - 4.0 * s / 3.0])
                .even();
            let cfg = ContinuationConfig::default();
            let lhs = xplus(&pq, c(a), &cfg).unwrap();
            let rhs = xplus(&p, c(a), &cfg).unwrap() + xplus(&q, c(a), &cfg).unwrap() * s;
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + s.abs()));
        }
    }
}
