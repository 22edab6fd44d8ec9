//! Gauss rules and composite panel integration.
//!
//! Gauss-Legendre nodes come from Newton iteration on the three-term
//! recurrence; Gauss-Jacobi nodes from the Golub-Welsch eigenproblem of the
//! Jacobi matrix, solved by implicit QL keeping only the first eigenvector
//! components.

use std::ops::{Add, Mul};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::ln_gamma_real;

/// Values that can be accumulated by a quadrature rule with real weights.
pub trait Integrand<T>: Copy + Zero + Add<Output = Self> + Mul<T, Output = Self> {}
impl<T, V> Integrand<T> for V where V: Copy + Zero + Add<Output = V> + Mul<T, Output = V> {}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(deg: usize) -> Result<Self> {
        if deg == 0 {
            return Err(Error::InvalidArgument("Gauss-Legendre degree must be >= 1".into()));
        }
        let n = deg;
        let nf = T::from_usize_lossy(n);
        let one = T::one();
        let two = T::lit(2.0);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let eps = T::epsilon() * T::lit(4.0);
        for i in 0..(n + 1) / 2 {
            let fi = T::from_usize_lossy(i + 1);
            let mut z = (T::PI() * (fi - T::lit(0.25)) / (nf + T::lit(0.5))).cos();
            let mut pp = one;
            for _ in 0..100 {
                let mut p1 = one;
                let mut p2 = T::zero();
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let fj = T::from_usize_lossy(j);
                    p1 = ((two * fj + one) * z * p2 - fj * p3) / (fj + one);
                }
                pp = nf * (z * p1 - p2) / (z * z - one);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= eps {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = two / ((one - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<V: Integrand<T>>(&self, a: T, b: T, mut f: impl FnMut(T) -> V) -> V {
        let half = T::lit(0.5);
        let c = (a + b) * half;
        let h = (b - a) * half;
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = T::lit(0.5);
        let c = (a + b) * half;
        let h = (b - a) * half;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, w * h))
    }
}

/// Gauss-Jacobi rule for the weight `(1 - x)^alpha (1 + x)^beta` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobi<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    alpha: T,
    beta: T,
}

impl<T: Real> GaussJacobi<T> {
    pub fn new(deg: usize, alpha: T, beta: T) -> Result<Self> {
        let m1 = -T::one();
        if deg == 0 || !(alpha > m1) || !(beta > m1) {
            return Err(Error::InvalidArgument(format!(
                "Gauss-Jacobi needs deg >= 1 and exponents > -1 (deg {deg}, alpha {alpha:?}, beta {beta:?})"
            )));
        }
        let (a, b) = (alpha, beta);
        let one = T::one();
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let ab = a + b;
        let mut diag = vec![T::zero(); deg];
        let mut off = vec![T::zero(); deg];
        for (k, d) in diag.iter_mut().enumerate() {
            let fk = T::from_usize_lossy(k);
            let s = two * fk + ab;
            *d = if k == 0 {
                (b - a) / (ab + two)
            } else {
                (b * b - a * a) / (s * (s + two))
            };
        }
        for k in 1..deg {
            let fk = T::from_usize_lossy(k);
            let s = two * fk + ab;
            let v = if k == 1 {
                four * (one + a) * (one + b) / ((two + ab) * (two + ab) * (T::lit(3.0) + ab))
            } else {
                four * fk * (fk + a) * (fk + b) * (fk + ab) / (s * s * (s + one) * (s - one))
            };
            off[k - 1] = v.sqrt();
        }
        let mut z0 = vec![T::zero(); deg];
        z0[0] = one;
        tridiagonal_ql(&mut diag, &mut off, &mut z0)?;
        let ln_mu0 = (ab + one) * T::LN_2() + ln_gamma_real(a + one)? + ln_gamma_real(b + one)?
            - ln_gamma_real(ab + two)?;
        let mu0 = ln_mu0.exp();
        let mut pairs: Vec<(T, T)> = diag
            .into_iter()
            .zip(z0)
            .map(|(x, v)| (x, mu0 * v * v))
            .collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite nodes"));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self {
            nodes,
            weights,
            alpha,
            beta,
        })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Integrates `(b - x)^alpha (x - a)^beta f(x)` over `[a, b]`.
    pub fn integrate<V: Integrand<T>>(&self, a: T, b: T, mut f: impl FnMut(T) -> V) -> V {
        let half = T::lit(0.5);
        let c = (a + b) * half;
        let h = (b - a) * half;
        let scale = h.powf(self.alpha + self.beta + T::one());
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * scale);
        }
        acc
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. On return `diag` holds the
/// eigenvalues and `z0` the first components of the normalized eigenvectors.
/// `off[i]` couples rows `i` and `i + 1`.
fn tridiagonal_ql<T: Real>(diag: &mut [T], off: &mut [T], z0: &mut [T]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::Quadrature("tridiagonal QL did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (two * off[l]);
            let mut r = g.hypot(T::one());
            let sign_r = if g >= T::zero() { r } else { -r };
            g = diag[m] - diag[l] + off[l] / (g + sign_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] = diag[i + 1] - p;
                    off[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + two * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let fz = z0[i + 1];
                z0[i + 1] = s * z0[i] + c * fz;
                z0[i] = c * z0[i] - s * fz;
            }
            if underflow {
                continue;
            }
            diag[l] = diag[l] - p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
    Ok(())
}

/// Breakpoints on `[a, b]` refined geometrically toward the chosen ends.
///
/// Each graded end receives `levels` panels whose widths shrink by `ratio`.
pub fn graded_breaks<T: Real>(
    a: T,
    b: T,
    grade_left: bool,
    grade_right: bool,
    levels: usize,
    ratio: T,
) -> Vec<T> {
    let mut pts = vec![a];
    let len = b - a;
    let half = T::lit(0.5);
    match (grade_left, grade_right) {
        (false, false) => {}
        (true, false) => {
            let mut w = len;
            let mut left = Vec::with_capacity(levels);
            for _ in 0..levels {
                w = w * ratio;
                left.push(a + w);
            }
            left.reverse();
            pts.extend(left);
        }
        (false, true) => {
            let mut w = len;
            for _ in 0..levels {
                w = w * ratio;
                pts.push(b - w);
            }
        }
        (true, true) => {
            let mid = a + len * half;
            let mut w = len * half;
            let mut left = Vec::with_capacity(levels);
            for _ in 0..levels {
                w = w * ratio;
                left.push(a + w);
            }
            left.reverse();
            pts.extend(left);
            pts.push(mid);
            let mut w = len * half;
            for _ in 0..levels {
                w = w * ratio;
                pts.push(b - w);
            }
        }
    }
    pts.push(b);
    pts
}

/// Applies `rule` on each consecutive pair of `breaks`.
pub fn integrate_panels<T: Real, V: Integrand<T>>(
    rule: &GaussLegendre<T>,
    breaks: &[T],
    mut f: impl FnMut(T) -> V,
) -> V {
    let mut acc = V::zero();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            acc = acc + rule.integrate(w[0], w[1], &mut f);
        }
    }
    acc
}

/// Flattened node/weight list of a composite rule over `breaks`.
pub fn composite_nodes<T: Real>(rule: &GaussLegendre<T>, breaks: &[T]) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(rule.len() * breaks.len());
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            out.extend(rule.mapped(w[0], w[1]));
        }
    }
    out
}
