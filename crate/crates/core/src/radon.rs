//! The k-plane transform, its dual, and the proportionality of the dual of
//! the transform to `I^k`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::alphaline::{bracket, profile_for, ContinuationConfig};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, Smoothness};
use crate::quadrature::{graded_breaks, GaussLegendre};
use crate::riesz::riesz;
use crate::specfun::{inversion_constant, omega, Dimension};
use crate::spherical::SphereRule;

const ORTHO_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Gram-Schmidt (twice, for stability) on `vectors`; errors on rank deficiency.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                let d = dot(&w, e);
                w.iter_mut().zip(e).for_each(|(p, q)| *p -= d * q);
            }
        }
        let r = dot(&w, &w).sqrt();
        if !(r > 1e-10 * dot(v, v).sqrt()) || r == 0.0 {
            return Err(Error::Degenerate("frame vectors are linearly dependent".into()));
        }
        w.iter_mut().for_each(|p| *p /= r);
        out.push(w);
    }
    Ok(out)
}

/// An affine k-plane `{offset + sum t_i frame_i}` with `offset` orthogonal to the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct KPlane {
    frame: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl KPlane {
    pub fn new(frame: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let n = offset.len();
        if frame.is_empty() || frame.len() >= n || frame.iter().any(|e| e.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k < n frame vectors of length n = {n}"
            )));
        }
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - target).abs() > ORTHO_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "frame is not orthonormal: <e{i}, e{j}> = {}",
                        dot(a, b)
                    )));
                }
            }
            if dot(a, &offset).abs() > ORTHO_TOL * (1.0 + dot(&offset, &offset).sqrt()) {
                return Err(Error::InvalidArgument(format!(
                    "offset is not orthogonal to e{i}: {}",
                    dot(a, &offset)
                )));
            }
        }
        Ok(Self { frame, offset })
    }

    /// The plane spanned by `frame` through `x`.
    pub fn through(frame: Vec<Vec<f64>>, x: &[f64]) -> Result<Self> {
        let mut offset = x.to_vec();
        for e in &frame {
            let d = dot(x, e);
            offset.iter_mut().zip(e).for_each(|(p, q)| *p -= d * q);
        }
        // second pass removes rounding left by the first
        for e in &frame {
            let d = dot(&offset, e);
            offset.iter_mut().zip(e).for_each(|(p, q)| *p -= d * q);
        }
        Self::new(frame, offset)
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn n(&self) -> usize {
        self.offset.len()
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    /// Distance from the origin.
    pub fn distance(&self) -> f64 {
        dot(&self.offset, &self.offset).sqrt()
    }

    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        let mut y = self.offset.clone();
        for (e, &ti) in self.frame.iter().zip(t) {
            y.iter_mut().zip(e).for_each(|(p, q)| *p += ti * q);
        }
        y
    }

    /// In-plane coordinates of the orthogonal projection of `y`.
    pub fn coordinates(&self, y: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|e| dot(y, e)).collect()
    }

    /// Distance from `y` to the plane.
    pub fn distance_to(&self, y: &[f64]) -> f64 {
        let t = self.coordinates(y);
        let p = self.point(&t);
        y.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Where plane-integral data came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Computed by [`forward`] from a named field.
    Synthesized(String),
    /// Supplied from outside.
    External(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Synthesized(s) => write!(f, "synthesized from {s}"),
            Provenance::External(s) => write!(f, "external: {s}"),
        }
    }
}

type PlaneFn = Arc<dyn Fn(&KPlane) -> Result<f64> + Send + Sync>;

/// k-plane transform data: a map from planes to reals.
#[derive(Clone)]
pub struct PlaneIntegralOracle {
    eval: PlaneFn,
    provenance: Provenance,
}

impl fmt::Debug for PlaneIntegralOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlaneIntegralOracle")
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl PlaneIntegralOracle {
    pub fn external(name: impl Into<String>, f: impl Fn(&KPlane) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            provenance: Provenance::External(name.into()),
        }
    }

    /// The transform of `field`, computed by [`forward`] on demand.
    pub fn from_field(field: &ScalarField, quad: PlaneQuadrature) -> Self {
        let f = field.clone();
        Self {
            eval: Arc::new(move |p| forward(&f, p, &quad)),
            provenance: Provenance::Synthesized(field.name().to_string()),
        }
    }

    pub fn eval(&self, plane: &KPlane) -> Result<f64> {
        let v = (self.eval)(plane)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Quadrature(format!("oracle returned {v} ({})", self.provenance)))
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Per-axis quadrature for plane integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneQuadrature {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Largest panel width.
    pub width: f64,
    /// Geometric grading levels toward support edges.
    pub grading: usize,
    /// Half-width of the central box for fields without support.
    pub box_half_width: f64,
    /// Tolerance driving the number of tail panels for fields without support.
    pub tolerance: f64,
}

impl Default for PlaneQuadrature {
    fn default() -> Self {
        Self {
            nodes: 16,
            width: 0.5,
            grading: 12,
            box_half_width: 8.0,
            tolerance: 1e-10,
        }
    }
}

impl PlaneQuadrature {
    /// `nodes` Gauss points per panel, other settings default.
    pub fn with_nodes(nodes: usize) -> Self {
        Self {
            nodes,
            ..Self::default()
        }
    }
}

fn interval_nodes(gl: &GaussLegendre<f64>, a: f64, b: f64, quad: &PlaneQuadrature, out: &mut Vec<(f64, f64)>) {
    if !(b > a) {
        return;
    }
    let g = graded_breaks(a, b, true, true, quad.grading, 0.25);
    for s in g.windows(2) {
        let pieces = ((s[1] - s[0]) / quad.width).ceil().max(1.0) as usize;
        let h = (s[1] - s[0]) / pieces as f64;
        for i in 0..pieces {
            out.extend(gl.mapped(s[0] + h * i as f64, s[0] + h * (i + 1) as f64));
        }
    }
}

/// Nodes for `\int_R g(t) dt` with `g = O(|t - c|^-a)`: a central box plus
/// `t = c +- L/u` tails with geometric panels in `u`.
fn line_nodes(gl: &GaussLegendre<f64>, c: f64, a: f64, quad: &PlaneQuadrature) -> Vec<(f64, f64)> {
    let l = quad.box_half_width;
    let mut out = Vec::new();
    let g = graded_breaks(c - l, c + l, false, false, 1, 0.5);
    for s in g.windows(2) {
        let pieces = ((s[1] - s[0]) / quad.width).ceil().max(1.0) as usize;
        let h = (s[1] - s[0]) / pieces as f64;
        for i in 0..pieces {
            out.extend(gl.mapped(s[0] + h * i as f64, s[0] + h * (i + 1) as f64));
        }
    }
    // tail integrand in u behaves like u^(a-2); stop where the skipped piece is below tolerance
    let excess = (a - 1.0).max(1e-3);
    let u_min = quad.tolerance.powf(1.0 / excess).max(1e-150);
    let mut hi = 1.0f64;
    loop {
        let lo = if hi * 0.25 < u_min { 0.0 } else { hi * 0.25 };
        for (u, w) in gl.mapped(lo, hi) {
            if u > 0.0 {
                let jac = w * (l / u) / u;
                out.push((c + l / u, jac));
                out.push((c - l / u, jac));
            }
        }
        if lo == 0.0 {
            break;
        }
        hi = lo;
    }
    out
}

/// `\int_{R^k} f(offset + sum t_i e_i) dt`.
///
/// Supported fields are integrated over the disc where the plane meets the
/// support, axis by axis with panels graded toward its edge. Otherwise each
/// axis is a central box plus mapped tails about the foot of the field's
/// radial center.
pub fn forward(field: &ScalarField, plane: &KPlane, quad: &PlaneQuadrature) -> Result<f64> {
    let n = field.dim();
    let k = plane.k();
    if plane.n() != n {
        return Err(Error::InvalidArgument(format!(
            "plane lives in R^{}, field in R^{n}",
            plane.n()
        )));
    }
    let gl = GaussLegendre::new(quad.nodes)?;
    let value = match field.support() {
        Some(ball) => {
            let dist = plane.distance_to(&ball.center);
            if dist >= ball.radius {
                return Ok(0.0);
            }
            let radius = (ball.radius * ball.radius - dist * dist).sqrt();
            let q = plane.coordinates(&ball.center);
            nested_disc(field, plane, &gl, quad, &q, &mut Vec::with_capacity(k), radius * radius)
        }
        None => {
            if !(field.decay() > k as f64) {
                return Err(Error::Divergence(format!(
                    "decay exponent {} does not exceed the plane dimension {k}",
                    field.decay()
                )));
            }
            let foot = match field.radial_center() {
                Some(c) => plane.coordinates(c),
                None => vec![0.0; k],
            };
            let a = field.decay() - (k as f64 - 1.0);
            let axes: Vec<Vec<(f64, f64)>> = foot.iter().map(|&c| line_nodes(&gl, c, a, quad)).collect();
            nested_box(field, plane, &axes, &mut Vec::with_capacity(k))
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Quadrature(format!("non-finite plane integral of {}", field.name())))
    }
}

fn nested_disc(
    field: &ScalarField,
    plane: &KPlane,
    gl: &GaussLegendre<f64>,
    quad: &PlaneQuadrature,
    q: &[f64],
    t: &mut Vec<f64>,
    remaining: f64,
) -> f64 {
    let i = t.len();
    if i == q.len() {
        return field.eval(&plane.point(t));
    }
    let half = remaining.max(0.0).sqrt();
    let mut nodes = Vec::new();
    interval_nodes(gl, q[i] - half, q[i] + half, quad, &mut nodes);
    let mut acc = 0.0;
    for (ti, w) in nodes {
        let rest = remaining - (ti - q[i]).powi(2);
        t.push(ti);
        acc += w * nested_disc(field, plane, gl, quad, q, t, rest);
        t.pop();
    }
    acc
}

fn nested_box(field: &ScalarField, plane: &KPlane, axes: &[Vec<(f64, f64)>], t: &mut Vec<f64>) -> f64 {
    let i = t.len();
    if i == axes.len() {
        return field.eval(&plane.point(t));
    }
    let mut acc = 0.0;
    for &(ti, w) in &axes[i] {
        t.push(ti);
        acc += w * nested_box(field, plane, axes, t);
        t.pop();
    }
    acc
}

/// Dual of the k-plane transform at `x`: `Omega_k \int_0^inf F(r, x) r^(k-1) dr`,
/// with `F(r, x)` the spherical mean of `f` about `x`.
pub fn dual_composite(
    field: &ScalarField,
    x: &[f64],
    dim: Dimension,
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<f64> {
    check_dims(field, x, dim)?;
    let k = dim.k();
    if field.support().is_none() && !(field.decay() > k as f64) {
        return Err(Error::Divergence(format!(
            "decay exponent {} does not exceed k = {k}",
            field.decay()
        )));
    }
    let beta = Complex64::new(k as f64 - 1.0, 0.0);
    let prof = profile_for(field, x, rule, beta, cfg)?;
    Ok(omega::<f64>(k) * bracket(&prof, beta, cfg)?.value.re)
}

fn check_dims(field: &ScalarField, x: &[f64], dim: Dimension) -> Result<()> {
    if field.dim() != dim.n() || x.len() != dim.n() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: field R^{}, point R^{}, requested n = {}",
            field.dim(),
            x.len(),
            dim.n()
        )));
    }
    Ok(())
}

/// `x -> dual_composite(field, x)` as a field.
///
/// Decay is `min(a, n) - k`; local classes gain `k` orders. Evaluation errors
/// surface as NaN.
pub fn dual_field(field: &ScalarField, dim: Dimension, cfg: &ContinuationConfig, rule: &SphereRule) -> Result<ScalarField> {
    let (n, k) = (dim.n(), dim.k());
    if field.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "field lives in R^{}, requested n = {n}",
            field.dim()
        )));
    }
    if field.support().is_none() && !(field.decay() > k as f64) {
        return Err(Error::Divergence(format!(
            "decay exponent {} does not exceed k = {k}",
            field.decay()
        )));
    }
    let base = field.smoothness().clone();
    let worst = base.worst().gain(k);
    let smoothness = Smoothness::custom(
        worst,
        format!("dual transform of: {}", base.description()),
        move |y| base.at(y).gain(k),
    );
    let (f, c, r) = (field.clone(), cfg.clone(), rule.clone());
    let mut out = ScalarField::new(
        format!("dual{k}({})", field.name()),
        n,
        field.decay().min(n as f64) - k as f64,
        smoothness,
        move |y| dual_composite(&f, y, dim, &c, &r).unwrap_or(f64::NAN),
    )
    .expensive()
    .with_noise(1e-3 * cfg.tolerance);
    if let Some(center) = field.radial_center() {
        out = out.with_radial_center(center.to_vec());
    }
    Ok(out)
}

/// How [`sample_frames`] draws frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameSampling {
    /// Orthonormalized Gaussian vectors.
    Uniform,
    /// For lines in the plane, one uniform angle per equal stratum of `[0, pi)`;
    /// elsewhere the same as `Uniform`.
    #[default]
    Stratified,
}

/// `count` random orthonormal k-frames in `R^n` from a seeded generator.
pub fn sample_frames(dim: Dimension, count: usize, seed: u64, scheme: FrameSampling) -> Vec<Vec<Vec<f64>>> {
    let (n, k) = (dim.n(), dim.k());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if scheme == FrameSampling::Stratified && n == 2 && k == 1 {
        let u = Uniform::new(0.0, 1.0);
        return (0..count)
            .map(|i| {
                let th = std::f64::consts::PI * (i as f64 + u.sample(&mut rng)) / count as f64;
                vec![vec![th.cos(), th.sin()]]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let vs: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        if let Ok(frame) = orthonormalize(&vs) {
            out.push(frame);
        }
    }
    out
}

/// Average of `oracle` over the planes through `x` spanned by `frames`.
pub fn dual_sampled(oracle: &PlaneIntegralOracle, x: &[f64], frames: &[Vec<Vec<f64>>]) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::InvalidArgument("no frames to average over".into()));
    }
    let vals = frames
        .iter()
        .map(|fr| oracle.eval(&KPlane::through(fr.clone(), x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// `|dual_composite(f)(x) - (4 pi)^(k/2) Gamma(n/2) / Gamma((n-k)/2) I^k f(x)|`.
pub fn eq25_defect(
    field: &ScalarField,
    x: &[f64],
    dim: Dimension,
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<f64> {
    let lhs = dual_composite(field, x, dim, cfg, rule)?;
    let ik = riesz(field, Complex64::new(dim.k() as f64, 0.0), x, cfg, rule)?;
    Ok((lhs - ik.re / inversion_constant::<f64>(dim)).abs())
}

/// One sample of a line sinogram in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramRow {
    /// Angle of the line direction in `[0, pi)`.
    pub angle: f64,
    /// Offset vector, orthogonal to the direction.
    pub offset: [f64; 2],
    pub value: f64,
}

/// Line integrals of a planar field on an `angles x offsets` grid, with signed
/// offsets equispaced in `[-extent, extent]`.
pub fn sinogram(
    field: &ScalarField,
    angles: usize,
    offsets: usize,
    extent: f64,
    quad: &PlaneQuadrature,
) -> Result<Vec<SinogramRow>> {
    use rayon::prelude::*;
    if field.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "sinograms are for fields in the plane; got R^{}",
            field.dim()
        )));
    }
    if angles == 0 || offsets == 0 || !(extent > 0.0) {
        return Err(Error::InvalidArgument("empty sinogram grid".into()));
    }
    let cells: Vec<(usize, usize)> = (0..angles).flat_map(|i| (0..offsets).map(move |j| (i, j))).collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let angle = std::f64::consts::PI * i as f64 / angles as f64;
            let s = if offsets == 1 {
                0.0
            } else {
                -extent + 2.0 * extent * j as f64 / (offsets - 1) as f64
            };
            let (sn, cs) = angle.sin_cos();
            let offset = [-s * sn, s * cs];
            let plane = KPlane::new(vec![vec![cs, sn]], offset.to_vec())?;
            Ok(SinogramRow {
                angle,
                offset,
                value: forward(field, &plane, quad)?,
            })
        })
        .collect()
}
