//! End-to-end properties of the pipelines, checked against direct field
//! evaluation.

use kplane::alphaline::ContinuationConfig;
use kplane::fields::{algebraic, estimate_hoelder_index, gaussian, hoelder_cap, scale, translate};
use kplane::inversion::{default_s_sequence, invert_hoelder, invert_laplacian, invert_limit, GridSpec};
use kplane::radon::dual_composite;
use kplane::riesz::{potential_field, riesz, Part};
use kplane::spherical::SphereRule;
use kplane::{Complex64, Dimension};
use proptest::prelude::*;

fn d(n: usize, k: usize) -> Dimension {
    Dimension::new(n, k).unwrap()
}

fn five_points() -> Vec<Vec<f64>> {
    vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![-0.3, 0.8], vec![1.2, -0.4], vec![0.0, -1.5]]
}

#[test]
fn negative_order_undoes_positive_order() {
    let cfg = ContinuationConfig::default();
    let rule = SphereRule::default_for(2);
    let f = gaussian(2);
    let g = potential_field(&f, Complex64::new(1.0, 0.0), Part::Re, &cfg, &rule).unwrap();
    for x in five_points() {
        let back = riesz(&g, Complex64::new(-1.0, 0.0), &x, &cfg, &rule).unwrap().re;
        assert!((back - f.eval(&x)).abs() < 1e-6, "x={x:?}: {back} vs {}", f.eval(&x));
    }
}

#[test]
fn hoelder_and_limit_routes_agree() {
    let cfg = ContinuationConfig::default();
    let rule = SphereRule::default_for(2);
    let f = gaussian(2);
    let a = invert_hoelder(&f, d(2, 1), &five_points(), &cfg, &rule).unwrap();
    let b = invert_limit(&f, d(2, 1), &five_points(), &default_s_sequence(1), &cfg, &rule).unwrap();
    for (p, q) in a.recovered.iter().zip(&b.recovered) {
        assert!((p - q).abs() < 1e-3, "{p} vs {q}");
    }
}

#[test]
fn laplacian_route_agrees_and_refines() {
    let cfg = ContinuationConfig::default();
    let rule = SphereRule::default_for(3);
    let f = gaussian(3);
    let x = [0.2, -0.1, 0.3];
    let hoelder = invert_hoelder(&f, d(3, 2), &[x.to_vec()], &cfg, &rule).unwrap();
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let rep = invert_laplacian(&f, d(3, 2), &GridSpec::centered(&x, 1, h).unwrap(), &cfg, &rule).unwrap();
            assert!((rep.recovered[0] - hoelder.recovered[0]).abs() < 1e-2);
            rep.abs_error[0]
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "refinement ratio {ratio}: {errs:?}");
    }
}

#[test]
fn pipeline_is_linear_in_the_field() {
    let cfg = ContinuationConfig::default();
    let rule = SphereRule::default_for(2);
    let f = translate(&gaussian(2), &[0.3, -0.2]);
    let pts = vec![vec![0.0, 0.0], vec![0.7, 0.4]];
    let base = invert_hoelder(&f, d(2, 1), &pts, &cfg, &rule).unwrap();
    let scaled = invert_hoelder(&scale(&f, -2.5), d(2, 1), &pts, &cfg, &rule).unwrap();
    // adaptive tolerances are absolute, so the scaled run stops on other panels
    for (a, b) in base.recovered.iter().zip(&scaled.recovered) {
        assert!((-2.5 * a - b).abs() < 1e-5, "{a} {b}");
    }
}

#[test]
fn potential_gains_smoothness_on_the_cap() {
    let cfg = ContinuationConfig::default();
    let rule = SphereRule::default_for(2);
    let cap = hoelder_cap(2, 0.5).unwrap();
    let scales = [0.1, 0.05, 0.025, 0.0125];
    let own = estimate_hoelder_index(&cap, &[1.0, 0.0], &scales).unwrap();
    let q = potential_field(&cap, Complex64::new(1.0, 0.0), Part::Re, &cfg, &rule).unwrap();
    let gained = estimate_hoelder_index(&q, &[1.0, 0.0], &scales).unwrap();
    assert!(gained - own >= 0.3, "cap {own}, potential {gained}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_of_nonnegative_field_is_positive(x in -3.0f64..3.0, y in -3.0f64..3.0, p in 1.5f64..4.0) {
        let cfg = ContinuationConfig::default();
        let rule = SphereRule::default_for(2);
        let f = algebraic(2, p).unwrap();
        let v = dual_composite(&f, &[x, y], d(2, 1), &cfg, &rule).unwrap();
        prop_assert!(v > 0.0, "{v}");
    }

    #[test]
    fn riesz_is_translation_equivariant(vx in -2.0f64..2.0, vy in -2.0f64..2.0, a in 0.2f64..1.8) {
        let cfg = ContinuationConfig::default();
        let rule = SphereRule::default_for(2);
        let f = hoelder_cap(2, 0.75).unwrap();
        let x = [0.3, 0.1];
        let base = riesz(&f, Complex64::new(a, 0.0), &x, &cfg, &rule).unwrap();
        let moved = riesz(&translate(&f, &[vx, vy]), Complex64::new(a, 0.0), &[x[0] + vx, x[1] + vy], &cfg, &rule).unwrap();
        prop_assert!((base - moved).norm() < 1e-8, "{base} {moved}");
    }
}
