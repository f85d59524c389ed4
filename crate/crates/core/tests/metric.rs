#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use nullshell::distribution::{make_mollifier, MollifierKind};
use nullshell::jump::{make_builtin, parse_jump_expression, Builtin, JumpFunction};
use nullshell::metric::{
    lipschitz_metric, lipschitz_values, regularized_distributional_metric, rosen_form,
};
use nullshell::shell::jump_tensor_minkowski;
use nullshell::tensor::{invert, signature_of, MetricField};
use nullshell::{LipschitzMetric32, LipschitzMetric64};
use proptest::prelude::*;

fn jump(which: usize) -> JumpFunction {
    match which {
        0 => make_builtin(Builtin::Example { a: 4.0, b: 2.0, c: 1.0, h0: 1.1 }, 3).unwrap(),
        1 => parse_jump_expression("2*v - log(cosh(v))", 3).unwrap(),
        _ => parse_jump_expression("3*v + 0.3*z2*z3*exp(-v^2/4) + 0.2*sinh(z2)*tanh(v)", 3).unwrap(),
    }
}

fn shell_point() -> impl Strategy<Value = (f64, [f64; 2])> {
    (-1.0f64..1.0, 0.2f64..1.5, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(v, r, t)| (v, [r * t.cos(), r * t.sin()]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn continuous_across_the_shell_with_bounded_slope(which in 0usize..3, (v, z) in shell_point()) {
        let h = jump(which);
        let at = |u: f64| lipschitz_values(&h, 0.0, &[u, v, z[0], z[1]]).unwrap();
        let g0 = at(0.0);
        let slope = lipschitz_metric(&h, 0.0, &[0.0, v, z[0], z[1]], 1).unwrap();
        let lip = slope.iter().flatten().fold(0.0f64, |m, c| m.max(c.d1(0).abs()));
        for du in [1e-2, 1e-3, 1e-4] {
            for u in [du, -du] {
                let g = at(u);
                for i in 0..4 {
                    for j in 0..4 {
                        let d = (g[i][j] - g0[i][j]).abs();
                        prop_assert!(d <= 2.0 * lip * du + 1e-14, "{i}{j}: {d} at u = {u}");
                    }
                }
            }
        }
    }

    #[test]
    fn normal_derivative_jump_is_the_shell_tensor(which in 0usize..3, (v, z) in shell_point()) {
        let h = jump(which);
        let p = [0.0, v, z[0], z[1]];
        let plus = lipschitz_metric(&h, 0.0, &p, 1).unwrap();
        let minus = lipschitz_metric(&h, 0.0, &[-1e-300, v, z[0], z[1]], 1).unwrap();
        let y = jump_tensor_minkowski(&h, v, &z).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let jump = -0.5 * (plus[a + 1][b + 1].d1(0) - minus[a + 1][b + 1].d1(0));
                prop_assert!((jump - y[a][b]).abs() <= 1e-9, "{a}{b}: {jump} vs {}", y[a][b]);
            }
        }
        // the u-row carries no jump
        for mu in 0..4 {
            prop_assert_eq!(plus[0][mu].d1(0), minus[0][mu].d1(0));
        }
    }

    #[test]
    fn lorentzian_signature(
        which in 0usize..3,
        (v, z) in shell_point(),
        u in -1.0f64..0.3,
        lambda in prop_oneof![Just(0.0f64), Just(3.0), Just(-3.0)],
    ) {
        let h = jump(which);
        let g = lipschitz_values(&h, lambda, &[u, v, z[0], z[1]]).unwrap();
        prop_assume!(invert(&g).is_ok());
        prop_assert_eq!(signature_of(&g), (1, 0, 3));
    }

    #[test]
    fn regularization_is_exact_off_the_support(
        which in 0usize..3,
        (v, z) in shell_point(),
        u in 0.02f64..0.3,
        sign in prop_oneof![Just(1.0f64), Just(-1.0)],
        lambda in prop_oneof![Just(0.0f64), Just(-3.0)],
        kind in prop_oneof![Just(MollifierKind::PolyBump), Just(MollifierKind::TiltedBump)],
    ) {
        let h = jump(which);
        let m = make_mollifier(kind);
        let p = [sign * u, v, z[0], z[1]];
        let a = regularized_distributional_metric(&h, lambda, &m, 0.01, &p).unwrap();
        let b = lipschitz_values(&h, lambda, &p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((a[i][j] - b[i][j]).abs() <= 1e-12 * b[i][j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rosen_form_of_plane_waves(
        a in 0.5f64..3.0,
        c2 in -1.0f64..1.0,
        c3 in -1.0f64..1.0,
        c23 in -1.0f64..1.0,
        u in -0.5f64..0.3,
        (v, z) in shell_point(),
    ) {
        let expr = format!("{a}*v + {c2}*z2^2 + {c3}*z3^2 + {c23}*z2*z3");
        let h = parse_jump_expression(&expr, 3).unwrap();
        let p = [u, v, z[0], z[1]];
        let rf = rosen_form(&h, &p).unwrap();
        let g = lipschitz_values(&h, 0.0, &p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((rf.metric[i][j] - g[i][j]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn single_precision_metric_matches_double() {
    let h = jump(0);
    let g32 = LipschitzMetric32::new(h.clone(), 0.0).values(&[0.1f32, 0.2, 0.3, 0.4]).unwrap();
    let g64 = LipschitzMetric64::new(h, 0.0).values(&[0.1f64, 0.2, 0.3, 0.4]).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!((g32[i][j] as f64 - g64[i][j]).abs() < 1e-5);
        }
    }
}
