//! Radial fields replaced by an error-controlled piecewise Chebyshev table of
//! their profile, for fields that are costly to evaluate (the derived dual
//! and potential fields) but are queried many times.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::ScalarField;

const DEG: usize = 16;
const CHECKS: [usize; 4] = [1, 5, 10, 14];
const MAX_PANELS: usize = 600;

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    vals: [f64; DEG + 1],
}

impl Panel {
    fn node(a: f64, b: f64, j: usize) -> f64 {
        0.5 * (a + b) + 0.5 * (b - a) * (PI * j as f64 / DEG as f64).cos()
    }

    fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..=DEG {
            let d = x - Panel::node(self.a, self.b, j);
            if d == 0.0 {
                return self.vals[j];
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == DEG {
                w *= 0.5;
            }
            num += w / d * self.vals[j];
            den += w / d;
        }
        num / den
    }
}

/// Piecewise interpolant on an interval, refined by bisection until the
/// interpolant matches the function at off-node probes to `tol`.
#[derive(Debug, Clone)]
struct Piecewise {
    panels: Vec<Panel>,
}

impl Piecewise {
    fn build(f: &(dyn Fn(f64) -> f64 + Sync), cuts: &[f64], tol: f64) -> Result<Self> {
        let mut panels = Vec::new();
        let mut stack: Vec<(f64, f64)> = cuts.windows(2).rev().map(|w| (w[0], w[1])).collect();
        let mut visited = 0;
        while let Some((a, b)) = stack.pop() {
            visited += 1;
            if visited > MAX_PANELS {
                return Err(Error::Quadrature(format!(
                    "profile table needs more than {MAX_PANELS} panels for tolerance {tol:e}"
                )));
            }
            let xs: Vec<f64> = (0..=DEG)
                .map(|j| Panel::node(a, b, j))
                .chain(CHECKS.iter().map(|&j| {
                    0.5 * (a + b) + 0.5 * (b - a) * (PI * (j as f64 + 0.5) / DEG as f64).cos()
                }))
                .collect();
            let ys: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect();
            if let Some(bad) = ys.iter().position(|y| !y.is_finite()) {
                return Err(Error::Quadrature(format!(
                    "non-finite profile value at {} while tabulating",
                    xs[bad]
                )));
            }
            let mut vals = [0.0; DEG + 1];
            vals.copy_from_slice(&ys[..=DEG]);
            let panel = Panel { a, b, vals };
            let err = xs[DEG + 1..]
                .iter()
                .zip(&ys[DEG + 1..])
                .map(|(&x, &y)| (panel.eval(x) - y).abs())
                .fold(0.0, f64::max);
            if err <= tol || b - a <= 1e-9 * a.abs().max(1.0) {
                panels.push(panel);
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
            }
        }
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        Ok(Self { panels })
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.panels.partition_point(|p| p.b < x);
        let p = &self.panels[i.min(self.panels.len() - 1)];
        p.eval(x)
    }
}

/// Tabulates a field that is radial about its declared center.
///
/// The profile `G(ρ)` is interpolated on `[0, ρmax]` with cuts at `breaks`
/// (distances from the center where `G` is not smooth), and in `u = 1/ρ` on
/// the tail, where `G -> 0`. `tol` is the absolute interpolation tolerance,
/// recorded as the noise of the returned field. Fails when the profile is
/// too rough (or too noisy) to meet `tol` within a bounded number of panels.
pub fn radial_table(field: &ScalarField, breaks: &[f64], tol: f64) -> Result<ScalarField> {
    let center = field
        .radial_center()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not radial", field.name())))?
        .to_vec();
    if field.decay() <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{} does not vanish at infinity",
            field.name()
        )));
    }
    let n = field.dim();
    let outer = breaks.iter().cloned().fold(1.0, f64::max);
    let rho_max = 4.0 * outer;
    let profile = |rho: f64| {
        let mut y = center.clone();
        y[0] += rho;
        field.eval(&y)
    };
    let mut cuts = vec![0.0];
    let mut inner: Vec<f64> = breaks.iter().cloned().filter(|&b| b > 0.0 && b < rho_max).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.extend([2.0 * outer, rho_max]);
    cuts.dedup();
    let near = Piecewise::build(&profile, &cuts, tol)?;
    let tail_fn = |u: f64| if u == 0.0 { 0.0 } else { profile(1.0 / u) };
    let tail = Piecewise::build(&tail_fn, &[0.0, 0.5 / rho_max, 1.0 / rho_max], tol)?;
    let (near, tail) = (Arc::new(near), Arc::new(tail));
    let c = center.clone();
    let mut out = ScalarField::new(
        format!("table({})", field.name()),
        n,
        field.decay(),
        field.smoothness().clone(),
        move |y| {
            let rho = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if rho <= rho_max {
                near.eval(rho)
            } else {
                tail.eval(1.0 / rho)
            }
        },
    )
    .with_noise(tol.max(field.noise()))
    .with_radial_center(center);
    if let Some(ball) = field.support() {
        out = out.with_support(ball.center.clone(), ball.radius);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{algebraic, hoelder_cap};

    #[test]
    fn table_of_cap_matches_field() {
        let f = hoelder_cap(2, 0.5).unwrap();
        let t = radial_table(&f, &[1.0], 1e-10).unwrap();
        for r in [0.0, 0.3, 0.77, 0.999, 1.0, 1.2, 7.0, 100.0] {
            let y = [r * 0.6, r * 0.8];
            assert!((t.eval(&y) - f.eval(&y)).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn tail_follows_algebraic_decay() {
        let f = algebraic(2, 3.0).unwrap();
        let t = radial_table(&f, &[], 1e-12).unwrap();
        for r in [0.5, 3.9, 4.1, 30.0, 1e4] {
            let y = [r, 0.0];
            assert!((t.eval(&y) - f.eval(&y)).abs() < 1e-11, "r={r}");
        }
    }

    #[test]
    fn noisy_profile_exhausts_budget() {
        let f = hoelder_cap(2, 0.5).unwrap();
        let g = ScalarField::new("noisy", 2, f64::INFINITY, f.smoothness().clone(), move |y| {
            f.eval(y) + 1e-6 * (1e4 * y[0]).sin()
        })
        .with_radial_center(vec![0.0, 0.0]);
        assert!(radial_table(&g, &[1.0], 1e-12).is_err());
    }

    #[test]
    fn rejects_non_radial() {
        let f = crate::fields::translate(&hoelder_cap(2, 0.5).unwrap(), &[0.5, 0.0]);
        let f = ScalarField::new("plain", 2, 1.0, f.smoothness().clone(), move |y| f.eval(y));
        assert!(radial_table(&f, &[1.0], 1e-9).is_err());
    }
}
