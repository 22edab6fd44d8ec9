//! Recovering a field from its k-plane transform: through `I^(-k)` of the dual
//! transform for Hölder fields, as a limit `s -> -k+` for continuous fields, and
//! through the Laplacian for even `k`.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::alphaline::{extrapolate_limit, ContinuationConfig};
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::radon::{dual_composite, dual_field};
use crate::riesz::riesz;
use crate::specfun::{inversion_constant, omega, Dimension};
use crate::spherical::SphereRule;
use crate::table::radial_table;

/// Convergence record of a limit route at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTrace {
    pub s: Vec<f64>,
    /// Scaled values along `s`, already multiplied by the inversion constant.
    pub values: Vec<f64>,
    pub limit: f64,
    /// Observed convergence order in `s + k`.
    pub rate: f64,
    pub rate_estimated: bool,
    pub error_estimate: f64,
}

/// Recovered values against direct field evaluation.
#[derive(Debug, Clone)]
pub struct InversionReport {
    pub route: &'static str,
    pub dim: Dimension,
    pub points: Vec<Vec<f64>>,
    pub recovered: Vec<f64>,
    pub reference: Vec<f64>,
    pub abs_error: Vec<f64>,
    pub traces: Vec<LimitTrace>,
    pub elapsed: Duration,
}

impl InversionReport {
    fn new(
        route: &'static str,
        dim: Dimension,
        field: &ScalarField,
        points: Vec<Vec<f64>>,
        recovered: Vec<f64>,
        traces: Vec<LimitTrace>,
        start: Instant,
    ) -> Self {
        let reference: Vec<f64> = points.iter().map(|x| field.eval(x)).collect();
        let abs_error = recovered.iter().zip(&reference).map(|(a, b)| (a - b).abs()).collect();
        Self {
            route,
            dim,
            points,
            recovered,
            reference,
            abs_error,
            traces,
            elapsed: start.elapsed(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_abs_error(&self) -> f64 {
        self.abs_error.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with point coordinates, recovered, reference, abs_error and, for
    /// limit routes, the extrapolation data and the raw trace.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.dim.n();
        let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        header.extend(["recovered", "reference", "abs_error"].map(String::from));
        let s_values = self.traces.first().map(|t| t.s.clone()).unwrap_or_default();
        if !self.traces.is_empty() {
            header.extend(["rate", "error_estimate"].map(String::from));
            header.extend(s_values.iter().map(|s| format!("trace[s={}]", fmt17(*s))));
        }
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.points[i].iter().map(|v| fmt17(*v)).collect();
            row.push(fmt17(self.recovered[i]));
            row.push(fmt17(self.reference[i]));
            row.push(fmt17(self.abs_error[i]));
            if let Some(t) = self.traces.get(i) {
                row.push(fmt17(t.rate));
                row.push(fmt17(t.error_estimate));
                row.extend(t.values.iter().map(|v| fmt17(*v)));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A double with 17 significant digits, which round-trips exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_points(field: &ScalarField, dim: Dimension, points: &[Vec<f64>]) -> Result<()> {
    if field.dim() != dim.n() {
        return Err(Error::InvalidArgument(format!(
            "field lives in R^{}, requested n = {}",
            field.dim(),
            dim.n()
        )));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points requested".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim.n()) {
        return Err(Error::InvalidArgument(format!("point {p:?} is not in R^{}", dim.n())));
    }
    Ok(())
}

/// Dual of the transform; tabulated once when it is radial, since the
/// potential on top of it queries it tens of thousands of times.
fn tabulated_dual(
    field: &ScalarField,
    dim: Dimension,
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<ScalarField> {
    let g = dual_field(field, dim, cfg, rule)?;
    let Some(c0) = g.radial_center() else {
        return Ok(g);
    };
    let mut breaks = Vec::new();
    if let Some(ball) = field.support() {
        let d = ball.center.iter().zip(c0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        breaks.push(d + ball.radius);
        if d > ball.radius {
            breaks.push(d - ball.radius);
        }
    }
    Ok(radial_table(&g, &breaks, g.noise()).unwrap_or(g))
}

/// `f(x) = c I^(-k) (dual of the transform)(x)` at each point.
///
/// Requires Hölder metadata everywhere; continuous fields go through
/// [`invert_limit`].
pub fn invert_hoelder(
    field: &ScalarField,
    dim: Dimension,
    points: &[Vec<f64>],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<InversionReport> {
    let start = Instant::now();
    check_points(field, dim, points)?;
    let worst = field.smoothness().worst();
    if !worst.has_hoelder() {
        return Err(Error::ClassViolation(format!(
            "{} has no Hölder control ({}: {worst:?}); use invert_limit",
            field.name(),
            field.smoothness().description()
        )));
    }
    let g = tabulated_dual(field, dim, cfg, rule)?;
    let c = inversion_constant::<f64>(dim);
    let alpha = Complex64::new(-(dim.k() as f64), 0.0);
    let recovered = points
        .par_iter()
        .map(|x| riesz(&g, alpha, x, cfg, rule).map(|v| c * v.re))
        .collect::<Result<Vec<_>>>()?;
    Ok(InversionReport::new("hoelder", dim, field, points.to_vec(), recovered, Vec::new(), start))
}

/// `s_j = -k + 2^-j`, `j = 2..=8`.
pub fn default_s_sequence(k: usize) -> Vec<f64> {
    (2..=8).map(|j| -(k as f64) + 2f64.powi(-j)).collect()
}

/// `f(x) = c lim_{s -> -k+} I^s (dual of the transform)(x)`, extrapolated from
/// the values along `s_sequence`.
pub fn invert_limit(
    field: &ScalarField,
    dim: Dimension,
    points: &[Vec<f64>],
    s_sequence: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<InversionReport> {
    let start = Instant::now();
    check_points(field, dim, points)?;
    let k = dim.k() as f64;
    if s_sequence.len() < 3 {
        return Err(Error::InvalidArgument("need at least three orders for the limit".into()));
    }
    if let Some(s) = s_sequence.iter().find(|&&s| !(s > -k && s < -k + 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "order {s} is outside (-k, -k + 1) = ({}, {})",
            -k,
            -k + 1.0
        )));
    }
    let g = dual_field(field, dim, cfg, rule)?;
    let c = inversion_constant::<f64>(dim);
    let traces = points
        .par_iter()
        .map(|x| {
            let values = s_sequence
                .iter()
                .map(|&s| riesz(&g, Complex64::new(s, 0.0), x, cfg, rule).map(|v| v * c))
                .collect::<Result<Vec<_>>>()?;
            let h: Vec<f64> = s_sequence.iter().map(|s| s + k).collect();
            let est = extrapolate_limit(&h, &values)?;
            Ok(LimitTrace {
                s: s_sequence.to_vec(),
                values: values.iter().map(|v| v.re).collect(),
                limit: est.limit.re,
                rate: est.rate,
                rate_estimated: est.rate_estimated,
                error_estimate: est.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let recovered = traces.iter().map(|t| t.limit).collect();
    Ok(InversionReport::new("limit", dim, field, points.to_vec(), recovered, traces, start))
}

/// A rectangular grid `corner + h * (i_1, ..., i_n)`, `0 <= i_d < counts[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    corner: Vec<f64>,
    counts: Vec<usize>,
    h: f64,
}

impl GridSpec {
    pub fn new(corner: Vec<f64>, extent: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if corner.is_empty() || corner.len() != extent.len() || corner.len() != counts.len() {
            return Err(Error::InvalidArgument("corner, extent and counts need one entry per axis".into()));
        }
        if counts.iter().any(|&c| c < 2) || extent.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidArgument("need positive extents and at least two samples per axis".into()));
        }
        let h = extent[0] / (counts[0] - 1) as f64;
        for (e, &c) in extent.iter().zip(&counts) {
            let hd = e / (c - 1) as f64;
            if (hd - h).abs() > 1e-12 * h {
                return Err(Error::InvalidArgument(format!(
                    "spacing differs between axes: {h} vs {hd}"
                )));
            }
        }
        Ok(Self { corner, counts, h })
    }

    /// `2 m + 1` samples per axis centered at `center`.
    pub fn centered(center: &[f64], half_cells: usize, h: f64) -> Result<Self> {
        let ext = 2.0 * half_cells as f64 * h;
        Self::new(
            center.iter().map(|c| c - half_cells as f64 * h).collect(),
            vec![ext; center.len()],
            vec![2 * half_cells + 1; center.len()],
        )
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn corner(&self) -> &[f64] {
        &self.corner
    }

    pub fn extent(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| (c - 1) as f64 * self.h).collect()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index(&self, i: usize) -> Vec<usize> {
        let mut rest = i;
        let mut out = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            out[d] = rest % self.counts[d];
            rest /= self.counts[d];
        }
        out
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.index(i)
            .iter()
            .zip(&self.corner)
            .map(|(&j, c)| c + self.h * j as f64)
            .collect()
    }
}

/// Second-order `2n + 1`-point Laplacian on the grid, dropping one boundary layer.
fn discrete_laplacian(values: &[f64], counts: &[usize], h: f64) -> (Vec<f64>, Vec<usize>) {
    let n = counts.len();
    let inner: Vec<usize> = counts.iter().map(|c| c - 2).collect();
    let total: usize = inner.iter().product();
    let mut strides = vec![1usize; n];
    for d in (0..n.saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * counts[d + 1];
    }
    let mut out = Vec::with_capacity(total);
    for i in 0..total {
        let mut rest = i;
        let mut idx = vec![0usize; n];
        for d in (0..n).rev() {
            idx[d] = rest % inner[d] + 1;
            rest /= inner[d];
        }
        let at: usize = idx.iter().zip(&strides).map(|(a, s)| a * s).sum();
        let mut acc = -2.0 * n as f64 * values[at];
        for s in &strides {
            acc += values[at + s] + values[at - s];
        }
        out.push(acc / (h * h));
    }
    (out, inner)
}

/// `f = c (-Delta)^(k/2)` of the dual transform, tabulated on `grid` and
/// reported at the points left after `k/2` stencil applications.
pub fn invert_laplacian(
    field: &ScalarField,
    dim: Dimension,
    grid: &GridSpec,
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<InversionReport> {
    let start = Instant::now();
    let (n, k) = (dim.n(), dim.k());
    if k % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "the Laplacian route needs even k; got k = {k}"
        )));
    }
    if grid.dim() != n || field.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "grid R^{}, field R^{}, requested n = {n}",
            grid.dim(),
            field.dim()
        )));
    }
    let layers = k / 2;
    if grid.counts().iter().any(|&c| c < 2 * layers + 1) {
        return Err(Error::InvalidArgument(format!(
            "grid too small: {layers} stencil applications need at least {} samples per axis",
            2 * layers + 1
        )));
    }
    let mut values = (0..grid.len())
        .into_par_iter()
        .map(|i| dual_composite(field, &grid.point(i), dim, cfg, rule))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = grid.counts().to_vec();
    for _ in 0..layers {
        let (v, c) = discrete_laplacian(&values, &counts, grid.h());
        values = v;
        counts = c;
    }
    let sign = if layers % 2 == 0 { 1.0 } else { -1.0 };
    let c = sign * inversion_constant::<f64>(dim);
    let recovered: Vec<f64> = values.iter().map(|v| c * v).collect();
    let inner = GridSpec::new(
        grid.corner().iter().map(|x| x + layers as f64 * grid.h()).collect(),
        counts.iter().map(|&m| (m.max(2) - 1) as f64 * grid.h()).collect(),
        counts.iter().map(|&m| m.max(2)).collect(),
    );
    let points: Vec<Vec<f64>> = match inner {
        Ok(g) if counts.iter().all(|&m| m >= 2) => (0..g.len()).map(|i| g.point(i)).collect(),
        _ => {
            // a single surviving row along some axis
            let mut pts = Vec::with_capacity(recovered.len());
            for i in 0..recovered.len() {
                let mut rest = i;
                let mut p = vec![0.0; n];
                for d in (0..n).rev() {
                    let j = rest % counts[d];
                    rest /= counts[d];
                    p[d] = grid.corner()[d] + (layers + j) as f64 * grid.h();
                }
                pts.push(p);
            }
            pts
        }
    };
    Ok(InversionReport::new("laplacian", dim, field, points, recovered, Vec::new(), start))
}

/// Discrete Laplacian of the dual transform at `x` with step `h`, and the value
/// `-Omega_k (n - k) f(x)` it approximates when `k = 2`.
pub fn dual_laplacian_check(
    field: &ScalarField,
    dim: Dimension,
    x: &[f64],
    h: f64,
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<(f64, f64)> {
    let n = dim.n();
    if x.len() != n || !(h > 0.0) {
        return Err(Error::InvalidArgument("need a point in R^n and h > 0".into()));
    }
    let center = dual_composite(field, x, dim, cfg, rule)?;
    let shifts: Vec<Vec<f64>> = (0..2 * n)
        .map(|i| {
            let mut y = x.to_vec();
            y[i / 2] += if i % 2 == 0 { h } else { -h };
            y
        })
        .collect();
    let sides = shifts
        .par_iter()
        .map(|y| dual_composite(field, y, dim, cfg, rule))
        .collect::<Result<Vec<_>>>()?;
    let lap = (sides.iter().sum::<f64>() - 2.0 * n as f64 * center) / (h * h);
    let expected = -omega::<f64>(dim.k()) * (n - dim.k()) as f64 * field.eval(x);
    Ok((lap, expected))
}

/// Central-difference Laplacian of `field` with step `h`, keeping its metadata.
pub fn difference_laplacian(field: &ScalarField, h: f64) -> ScalarField {
    let f = field.clone();
    let n = field.dim();
    let mut out = ScalarField::new(
        format!("fdlap({})", field.name()),
        n,
        field.decay() + 2.0,
        field.smoothness().clone(),
        move |x| {
            let mut y = x.to_vec();
            let mut acc = -2.0 * n as f64 * f.eval(x);
            for d in 0..n {
                y[d] = x[d] + h;
                acc += f.eval(&y);
                y[d] = x[d] - h;
                acc += f.eval(&y);
                y[d] = x[d];
            }
            acc / (h * h)
        },
    );
    if let Some(b) = field.support() {
        out = out.with_support(b.center.clone(), b.radius + h);
    }
    if let Some(c) = field.radial_center() {
        out = out.with_radial_center(c.to_vec());
    }
    out
}

/// `|I^alpha (Delta phi)(x) + I^(alpha - 2) phi(x)|`.
///
/// Uses the field's closed-form Laplacian when it has one and central
/// differences otherwise.
pub fn laplacian_commutation_defect(
    phi: &ScalarField,
    alpha: Complex64,
    x: &[f64],
    cfg: &ContinuationConfig,
    rule: &SphereRule,
) -> Result<f64> {
    if !(alpha.re > 2.0) {
        return Err(Error::StripViolation {
            alpha,
            lower: 2.0,
            upper: phi.decay(),
        });
    }
    let lap = phi
        .laplacian_field()
        .unwrap_or_else(|| difference_laplacian(phi, 1e-3));
    let a = riesz(&lap, alpha, x, cfg, rule)?;
    let b = riesz(phi, alpha - 2.0, x, cfg, rule)?;
    Ok((a + b).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gaussian, log_modulus, scale};

    fn dim(n: usize, k: usize) -> Dimension {
        Dimension::new(n, k).unwrap()
    }

    #[test]
    fn hoelder_route_gaussian() {
        let cfg = ContinuationConfig::default();
        let rule = SphereRule::default_for(2);
        let pts = vec![vec![0.0, 0.0], vec![0.5, -0.5]];
        let rep = invert_hoelder(&gaussian(2), dim(2, 1), &pts, &cfg, &rule).unwrap();
        assert!(rep.max_abs_error() < 1e-3, "{:?}", rep.abs_error);
        let rep2 = invert_hoelder(&scale(&gaussian(2), 3.0), dim(2, 1), &pts[..1], &cfg, &rule).unwrap();
        assert!((rep2.recovered[0] - 3.0 * rep.recovered[0]).abs() < 1e-9);
    }

    #[test]
    fn class_violation_for_continuous_fields() {
        let cfg = ContinuationConfig::default();
        let rule = SphereRule::default_for(2);
        let r = invert_hoelder(&log_modulus(2), dim(2, 1), &[vec![0.0, 0.0]], &cfg, &rule);
        assert!(matches!(r, Err(Error::ClassViolation(_))));
    }

    #[test]
    fn laplacian_route_rejects_odd_k() {
        let cfg = ContinuationConfig::default();
        let rule = SphereRule::default_for(2);
        let g = GridSpec::centered(&[0.0, 0.0], 1, 0.1).unwrap();
        assert!(invert_laplacian(&gaussian(2), dim(2, 1), &g, &cfg, &rule).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = GridSpec::centered(&[1.0, 2.0, 3.0], 2, 0.5).unwrap();
        assert_eq!(g.len(), 125);
        assert_eq!(g.point(0), vec![0.0, 1.0, 2.0]);
        assert_eq!(g.point(62), vec![1.0, 2.0, 3.0]);
        assert!(GridSpec::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![3, 3]).is_err());
        // discrete Laplacian is exact on quadratics
        let counts = vec![5, 5];
        let vals: Vec<f64> = (0..25)
            .map(|i| {
                let (a, b) = ((i / 5) as f64 * 0.1, (i % 5) as f64 * 0.1);
                a * a + 3.0 * b * b
            })
            .collect();
        let (lap, c) = discrete_laplacian(&vals, &counts, 0.1);
        assert_eq!(c, vec![3, 3]);
        assert!(lap.iter().all(|v| (v - 8.0).abs() < 1e-9));
    }

    #[test]
    fn commutation() {
        let cfg = ContinuationConfig::default();
        let rule = SphereRule::default_for(2);
        let a = Complex64::new(2.5, 0.0);
        let d = laplacian_commutation_defect(&gaussian(2), a, &[0.0, 0.0], &cfg, &rule).unwrap();
        assert!(d < 1e-8, "{d}");
        let d3 = laplacian_commutation_defect(&scale(&gaussian(2), 3.0), a, &[0.4, 0.0], &cfg, &rule).unwrap();
        assert!(d3 < 1e-8, "{d3}");
    }

    #[test]
    fn csv_shape() {
        let rep = InversionReport::new(
            "limit",
            dim(2, 1),
            &gaussian(2),
            vec![vec![0.0, 0.0]],
            vec![1.0],
            vec![LimitTrace {
                s: vec![-0.75, -0.875],
                values: vec![0.9, 0.95],
                limit: 1.0,
                rate: 1.0,
                rate_estimated: true,
                error_estimate: 1e-3,
            }],
            Instant::now(),
        );
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[0].starts_with("x0,x1,recovered,reference,abs_error,rate,error_estimate,trace[s="));
        let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 1.0);
    }
}
