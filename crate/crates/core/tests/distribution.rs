#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use nullshell::distribution::{
    extrapolate, make_mollifier, model_product_limit, model_product_pairing, theta_delta_integral,
    Factor, MollifierKind, TestFunction,
};
use nullshell::quadrature::integrate_scalar;
use proptest::prelude::*;

const KINDS: [MollifierKind; 2] = [MollifierKind::PolyBump, MollifierKind::TiltedBump];
const EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[test]
fn mollifiers_are_normalized_densities() {
    for kind in KINDS {
        let m = make_mollifier(kind);
        let mass = integrate_scalar(|x| m.density(x), &[-1.0, 0.0, 1.0], 1e-15).unwrap();
        assert!((mass - 1.0).abs() < 1e-14, "{kind}: {mass}");
        assert_eq!(m.primitive(-1.0), 0.0);
        assert!((m.primitive(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(m.density(1.5), 0.0);
        assert_eq!(m.primitive(2.0), 1.0);
        assert_eq!(m.primitive(-2.0), 0.0);
    }
}

proptest! {
    #[test]
    fn primitive_differentiates_to_density(x in -0.99f64..0.99, kind in prop_oneof![Just(KINDS[0]), Just(KINDS[1])]) {
        let m = make_mollifier(kind);
        prop_assert!(m.density(x) >= 0.0);
        let h = 1e-5;
        let fd = (m.primitive(x + h) - m.primitive(x - h)) / (2.0 * h);
        prop_assert!((fd - m.density(x)).abs() <= 1e-8);
        let d = m.primitive_derivatives(x, 3);
        prop_assert!((d[0] - m.primitive(x)).abs() <= 1e-15);
        prop_assert!((d[1] - m.density(x)).abs() <= 1e-14);
    }

    #[test]
    fn half_identity_for_every_width(eps in 1e-4f64..1.0, kind in prop_oneof![Just(KINDS[0]), Just(KINDS[1])]) {
        let m = make_mollifier(kind);
        let v = theta_delta_integral(&m, eps).unwrap();
        prop_assert!((v - 0.5).abs() <= 1e-12, "{v}");
    }

    #[test]
    fn extrapolation_recovers_power_laws(l in -2.0f64..2.0, c in 0.1f64..3.0, p in 1.0f64..4.0) {
        let eps = [0.4f64, 0.2, 0.1, 0.05];
        let vals: Vec<f64> = eps.iter().map(|e| l + c * e.powf(p)).collect();
        let (lim, order) = extrapolate(&eps, &vals);
        prop_assert!((lim - l).abs() <= 1e-10);
        prop_assert!((order.unwrap() - p).abs() <= 1e-8);
    }
}

fn all_products() -> Vec<(Factor, Factor)> {
    use Factor::*;
    vec![
        (Theta, Theta),
        (Theta, Delta),
        (OneMinusTheta, OneMinusTheta),
        (OneMinusTheta, Theta),
        (OneMinusTheta, Delta),
        (One, Delta),
        (Theta, One),
    ]
}

#[test]
fn products_converge_to_model_values() {
    for phi in TestFunction::family(1.0).unwrap() {
        for (l, r) in all_products() {
            let want = model_product_limit(l, r, &phi).unwrap();
            for kind in KINDS {
                let m = make_mollifier(kind);
                let got = model_product_pairing(l, r, &m, &phi, &EPS).unwrap().limit;
                assert!(
                    (got - want).abs() <= 1e-8,
                    "{l:?}·{r:?} with {kind}, φ{}: {got} vs {want}",
                    phi.k
                );
            }
        }
    }
}

#[test]
fn limits_do_not_depend_on_the_mollifier() {
    let poly = make_mollifier(MollifierKind::PolyBump);
    let tilt = make_mollifier(MollifierKind::TiltedBump);
    for phi in TestFunction::family(1.0).unwrap() {
        for (l, r) in all_products() {
            let a = model_product_pairing(l, r, &poly, &phi, &EPS).unwrap().limit;
            let b = model_product_pairing(l, r, &tilt, &phi, &EPS).unwrap().limit;
            assert!((a - b).abs() <= 1e-8, "{l:?}·{r:?}, φ{}: {a} vs {b}", phi.k);
        }
    }
}

#[test]
fn complementary_products() {
    use Factor::*;
    let m = make_mollifier(MollifierKind::TiltedBump);
    for phi in TestFunction::family(1.0).unwrap() {
        let phi0 = phi.eval(0.0f64);
        let omt = model_product_limit(OneMinusTheta, One, &phi).unwrap();
        let sq = model_product_pairing(OneMinusTheta, OneMinusTheta, &m, &phi, &EPS).unwrap();
        let cross = model_product_pairing(OneMinusTheta, Theta, &m, &phi, &EPS).unwrap();
        let half = model_product_pairing(OneMinusTheta, Delta, &m, &phi, &EPS).unwrap();
        assert!((sq.limit - omt).abs() <= 1e-8);
        assert!(cross.limit.abs() <= 1e-8);
        assert!((half.limit - 0.5 * phi0).abs() <= 1e-8);
    }
}

#[test]
fn delta_squared_is_rejected() {
    let phi = TestFunction::new(0, 1.0).unwrap();
    assert!(model_product_limit(Factor::Delta, Factor::Delta, &phi).is_err());
    assert!(TestFunction::new(0, 0.0).is_err());
    let m = make_mollifier(MollifierKind::PolyBump);
    assert!(model_product_pairing(Factor::Theta, Factor::Delta, &m, &phi, &[0.1, 0.2]).is_err());
}
