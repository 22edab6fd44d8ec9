//! Complex Gamma function and the normalizing constants of Riesz potentials
//! and the k-plane inversion formula.
//!
//! `gamma` uses a 14-term Lanczos approximation (g = 671/128) on
//! `Re z >= 1/2` and the reflection formula elsewhere. Poles are never
//! evaluated: callers that need values near `-N0` go through
//! [`reciprocal_gamma`], which is entire and exactly zero on the poles.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Ambient dimension `n` and plane dimension `k`, with `1 <= k <= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    n: usize,
    k: usize,
}

impl Dimension {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "need n >= 2 and 1 <= k <= n-1, got n = {n}, k = {k}"
            )));
        }
        Ok(Self { n, k })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }
}

/// If `z` is exactly a non-positive integer, returns it.
fn nonpositive_integer<T: Real>(z: Complex<T>) -> Option<i64> {
    if z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round() {
        z.re.to_i64()
    } else {
        None
    }
}

/// `sin(pi z)` with the argument reduced to `|Re| <= 1/2` first, so that the
/// zeros at the integers are reproduced without cancellation.
pub fn sin_pi<T: Real>(z: Complex<T>) -> Complex<T> {
    let shift = z.re.round();
    let w = Complex::new(z.re - shift, z.im);
    let (a, b) = (w.re * T::PI(), w.im * T::PI());
    let s = Complex::new(a.sin() * b.cosh(), a.cos() * b.sinh());
    let odd = shift.to_i64().map_or(false, |m| m.rem_euclid(2) == 1);
    if odd {
        -s
    } else {
        s
    }
}

/// Lanczos `ln Gamma(z)` for `Re z >= 1/2` (any branch; only `exp` of it is used).
fn ln_gamma_right<T: Real>(z: Complex<T>) -> Complex<T> {
    let one = T::one();
    let half = T::lit(0.5);
    let tmp = z + T::lit(LANCZOS_G);
    let tmp = (z + half) * tmp.ln() - tmp;
    let mut ser = Complex::new(T::lit(LANCZOS_C0), T::zero());
    let mut y = z;
    for &c in LANCZOS_COEFFS.iter() {
        y = y + one;
        ser = ser + Complex::new(T::lit(c), T::zero()) / y;
    }
    tmp + (ser * T::lit(SQRT_TWO_PI) / z).ln()
}

/// Logarithm of `Gamma(z)` (branch unspecified), valid away from the poles.
pub fn ln_gamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if let Some(m) = nonpositive_integer(z) {
        return Err(Error::Pole {
            what: "Gamma",
            at: num_complex::Complex64::new(m as f64, 0.0),
        });
    }
    let half = T::lit(0.5);
    if z.re >= half {
        Ok(ln_gamma_right(z))
    } else {
        let one = Complex::new(T::one(), T::zero());
        let pi = Complex::new(T::PI(), T::zero());
        Ok(pi.ln() - sin_pi(z).ln() - ln_gamma_right(one - z))
    }
}

/// Complex Gamma function. Errors on the poles `z in -N0`.
pub fn gamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if let Some(m) = nonpositive_integer(z) {
        return Err(Error::Pole {
            what: "Gamma",
            at: num_complex::Complex64::new(m as f64, 0.0),
        });
    }
    if z.re >= T::lit(0.5) {
        Ok(ln_gamma_right(z).exp())
    } else {
        let one = Complex::new(T::one(), T::zero());
        Ok(Complex::new(T::PI(), T::zero()) / (sin_pi(z) * ln_gamma_right(one - z).exp()))
    }
}

/// `1 / Gamma(z)`, entire; exactly zero on `-N0`.
pub fn reciprocal_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    if nonpositive_integer(z).is_some() {
        return Complex::new(T::zero(), T::zero());
    }
    if z.re >= T::lit(0.5) {
        (-ln_gamma_right(z)).exp()
    } else {
        let one = Complex::new(T::one(), T::zero());
        sin_pi(z) * ln_gamma_right(one - z).exp() / T::PI()
    }
}

/// Real Gamma function for arguments off the poles.
pub fn gamma_real<T: Real>(x: T) -> Result<T> {
    gamma(Complex::new(x, T::zero())).map(|g| g.re)
}

/// Real `ln|Gamma(x)|`.
pub fn ln_gamma_real<T: Real>(x: T) -> Result<T> {
    ln_gamma(Complex::new(x, T::zero())).map(|g| {
        // the real part of any branch of ln Gamma is ln|Gamma|
        g.re
    })
}

fn half_n<T: Real>(n: usize) -> T {
    T::from_usize_lossy(n) * T::lit(0.5)
}

/// `H_n(alpha) = 2^alpha pi^{n/2} Gamma(alpha/2) / Gamma((n - alpha)/2)`.
///
/// Poles at `alpha in -2 N0` are reported as errors (use [`h_n_residue`]);
/// at `alpha in n + 2 N0` the result is exactly zero.
pub fn h_n<T: Real>(n: usize, alpha: Complex<T>) -> Result<Complex<T>> {
    let half = T::lit(0.5);
    let a2 = alpha * half;
    if nonpositive_integer(a2).is_some() {
        return Err(Error::Pole {
            what: "H_n",
            at: num_complex::Complex64::new(
                alpha.re.to_f64().unwrap_or(f64::NAN),
                alpha.im.to_f64().unwrap_or(f64::NAN),
            ),
        });
    }
    let nh = Complex::new(half_n::<T>(n), T::zero());
    let rg = reciprocal_gamma(nh - a2);
    if rg == Complex::new(T::zero(), T::zero()) {
        return Ok(rg);
    }
    let pow2 = (alpha * T::LN_2()).exp();
    let pin = T::PI().powf(half_n::<T>(n));
    Ok(pow2 * pin * gamma(a2)? * rg)
}

/// `1 / H_n(alpha)`, finite everywhere except `alpha in n + 2 N0`; zero on `-2 N0`.
pub fn reciprocal_h_n<T: Real>(n: usize, alpha: Complex<T>) -> Result<Complex<T>> {
    let half = T::lit(0.5);
    let nh = Complex::new(half_n::<T>(n), T::zero());
    let g = gamma(nh - alpha * half).map_err(|_| Error::Pole {
        what: "1/H_n",
        at: num_complex::Complex64::new(
            alpha.re.to_f64().unwrap_or(f64::NAN),
            alpha.im.to_f64().unwrap_or(f64::NAN),
        ),
    })?;
    let pow2 = (-alpha * T::LN_2()).exp();
    let pin = T::PI().powf(-half_n::<T>(n));
    Ok(pow2 * pin * reciprocal_gamma(alpha * half) * g)
}

/// `lim_{alpha -> -2m} (alpha + 2m) H_n(alpha)`.
pub fn h_n_residue<T: Real>(n: usize, m: usize) -> T {
    // Gamma(alpha/2) ~ 2 (-1)^m / (m! (alpha + 2m)) near alpha = -2m
    let mf = T::from_usize_lossy(m);
    let ln_fact = ln_gamma_real(mf + T::one()).expect("factorial");
    let ln_den = ln_gamma_real(half_n::<T>(n) + mf).expect("positive argument");
    let sign = if m % 2 == 0 { T::one() } else { -T::one() };
    let ln_mag = -T::lit(2.0) * mf * T::LN_2() + half_n::<T>(n) * T::PI().ln() + T::LN_2()
        - ln_fact
        - ln_den;
    sign * ln_mag.exp()
}

/// Surface measure of the unit sphere `S^{n-1}`.
pub fn omega<T: Real>(n: usize) -> T {
    let h = half_n::<T>(n);
    T::lit(2.0) * T::PI().powf(h) / gamma_real(h).expect("n >= 1")
}

/// `(4 pi)^{-k/2} Gamma((n-k)/2) / Gamma(n/2)`.
pub fn inversion_constant<T: Real>(dim: Dimension) -> T {
    let (n, k) = (dim.n(), dim.k());
    let four_pi = T::lit(4.0) * T::PI();
    four_pi.powf(-half_n::<T>(k)) * gamma_real(half_n::<T>(n - k)).expect("n > k")
        / gamma_real(half_n::<T>(n)).expect("n >= 2")
}

/// Binomial coefficient `C(x, j)` for real `x`.
pub fn binomial<T: Real>(x: T, j: usize) -> T {
    let mut acc = T::one();
    for i in 0..j {
        let fi = T::from_usize_lossy(i);
        acc = acc * (x - fi) / (fi + T::one());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_trivial_values() {
        assert_relative_eq!(gamma(c(1.0, 0.0)).unwrap().re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(c(0.5, 0.0)).unwrap().re, PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(c(5.0, 0.0)).unwrap().re, 24.0, max_relative = 1e-14);
    }

    #[test]
    fn gamma_negative_half_matches_reflection() {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z) at z = -1/2
        let g = gamma(c(-0.5, 0.0)).unwrap().re;
        let oracle = PI / ((-0.5 * PI).sin() * gamma(c(1.5, 0.0)).unwrap().re);
        assert_relative_eq!(g, oracle, max_relative = 1e-14);
        assert_relative_eq!(g, -3.544_907_701_811_032, max_relative = 1e-13);
    }

    #[test]
    fn gamma_poles_error_and_reciprocal_vanishes() {
        for m in 0..5 {
            let z = c(-(m as f64), 0.0);
            assert!(matches!(gamma(z), Err(Error::Pole { .. })));
            assert_eq!(reciprocal_gamma(z), c(0.0, 0.0));
        }
        assert_relative_eq!(reciprocal_gamma(c(1.0, 0.0)).re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(reciprocal_gamma(c(2.0, 0.0)).re, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn reciprocal_times_gamma_is_one() {
        for &(re, im) in &[(0.3, 0.2), (-3.7, 1.1), (7.5, -4.0), (-12.2, 0.0), (2.0, 15.0)] {
            let z = c(re, im);
            let p = reciprocal_gamma(z) * gamma(z).unwrap();
            assert!((p - c(1.0, 0.0)).norm() < 1e-12, "{z}: {p}");
        }
    }

    #[test]
    fn h_n_values() {
        assert_relative_eq!(h_n(2, c(1.0, 0.0)).unwrap().re, 2.0 * PI, max_relative = 1e-13);
        assert_eq!(h_n(2, c(2.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(h_n(3, c(7.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(h_n(3, c(0.0, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(h_n(3, c(-4.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn residues() {
        assert_relative_eq!(h_n_residue::<f64>(2, 0), 2.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(h_n_residue::<f64>(3, 0), 4.0 * PI, max_relative = 1e-13);
        // numerical limit oracle at alpha = -2
        let t = 1e-7;
        let lim = (h_n(2, c(-2.0 + t, 0.0)).unwrap() * t).re;
        assert_relative_eq!(h_n_residue::<f64>(2, 1), lim, max_relative = 1e-6);
        assert_relative_eq!(h_n_residue::<f64>(2, 1), -PI / 2.0, max_relative = 1e-13);
        // two-sided limit at offset 1e-4: the symmetric average cancels the O(t) term
        for n in 1..6 {
            for m in 0..4 {
                let t = 1e-4;
                let a = -2.0 * m as f64;
                let up = (h_n(n, c(a + t, 0.0)).unwrap() * t).re;
                let down = (h_n(n, c(a - t, 0.0)).unwrap() * (-t)).re;
                let res = h_n_residue::<f64>(n, m);
                let defect = (0.5 * (up + down) - res).abs();
                assert!(defect < 1e-6 * res.abs().max(1.0), "n={n} m={m}: {defect}");
            }
        }
    }

    #[test]
    fn omega_values() {
        assert_relative_eq!(omega::<f64>(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(omega::<f64>(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(omega::<f64>(3), 4.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn inversion_constants() {
        let c21 = inversion_constant::<f64>(Dimension::new(2, 1).unwrap());
        assert_relative_eq!(c21, 0.5, max_relative = 1e-14);
        let c31 = inversion_constant::<f64>(Dimension::new(3, 1).unwrap());
        let oracle = (4.0 * PI).powf(-0.5) * 1.0 / (PI.sqrt() / 2.0);
        assert_relative_eq!(c31, oracle, max_relative = 1e-14);
        let c32 = inversion_constant::<f64>(Dimension::new(3, 2).unwrap());
        assert_relative_eq!(c32, 1.0 / (2.0 * PI), max_relative = 1e-14);
        // Omega_k (n - k) = 2 pi for (n, k) = (3, 2)
        assert_relative_eq!(omega::<f64>(2) * 1.0, 1.0 / c32, max_relative = 1e-14);
    }

    #[test]
    fn dimension_validation() {
        assert!(Dimension::new(2, 1).is_ok());
        assert!(Dimension::new(2, 2).is_err());
        assert!(Dimension::new(1, 0).is_err());
        assert!(Dimension::new(3, 0).is_err());
    }

    #[test]
    fn f32_instantiation() {
        let g: f32 = gamma_real(4.5f32).unwrap();
        assert!((g - 11.631_728).abs() < 1e-4);
        assert!((omega::<f32>(3) - 4.0 * std::f32::consts::PI).abs() < 1e-5);
    }
}
