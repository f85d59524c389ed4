#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use nullshell::tensor::{
    christoffel_at, conformally_flat, constant_curvature_residual, riemann_at, signature_of,
    Chart, ClosureMetric,
};
use nullshell::Jet64;
use proptest::prelude::*;

const N: usize = 4;

// g = η + ε Σ sin(k·x + φ) per component, symmetric
fn random_metric(coeffs: Vec<f64>) -> ClosureMetric<f64> {
    ClosureMetric::new(Chart::Custom, N, move |x: &[Jet64]| {
        let mut g = vec![vec![x[0].lift_const(0.0); N]; N];
        let mut c = coeffs.iter().copied();
        for a in 0..N {
            for b in a..N {
                let amp = c.next().unwrap();
                let phase = c.next().unwrap();
                let mut arg = x[0].lift_const(phase);
                for xk in x {
                    arg = &arg + &(xk * c.next().unwrap());
                }
                let base = match (a, b) {
                    (0, 1) => -1.0,
                    _ if a == b && a >= 2 => 1.0,
                    _ => 0.0,
                };
                let comp = arg.sin() * (0.15 * amp) + base;
                g[a][b] = comp.clone();
                g[b][a] = comp;
            }
        }
        Ok(g)
    })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, N * (N + 1) / 2 * (N + 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn riemann_symmetries_and_first_bianchi(c in coeffs(), p in prop::array::uniform4(-1.0f64..1.0)) {
        let g = random_metric(c);
        let r = riemann_at(&g, &p).unwrap();
        let scale = r.max_abs().max(1e-300);
        let tol = 1e-10 * scale;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let x = r.get(a, b, c, d);
                        prop_assert!((x + r.get(b, a, c, d)).abs() <= tol);
                        prop_assert!((x + r.get(a, b, d, c)).abs() <= tol);
                        prop_assert!((x - r.get(c, d, a, b)).abs() <= tol);
                        let cyc = x + r.get(a, c, d, b) + r.get(a, d, b, c);
                        prop_assert!(cyc.abs() <= tol, "bianchi {cyc} vs scale {scale}");
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_symbols_are_symmetric(c in coeffs(), p in prop::array::uniform4(-1.0f64..1.0)) {
        let g = random_metric(c);
        let ch = christoffel_at(&g, &p).unwrap();
        for r in 0..N {
            for m in 0..N {
                for k in 0..N {
                    prop_assert!((ch.value(r, m, k) - ch.value(r, k, m)).abs() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn model_spaces_have_constant_curvature(
        lambda in -3.0f64..3.0,
        p in prop::array::uniform4(-0.5f64..0.5),
    ) {
        let g = conformally_flat(lambda, N, Chart::FlatMinus);
        let res = constant_curvature_residual(&g, &p, lambda / 3.0).unwrap();
        prop_assert!(res <= 1e-12, "residual {res}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // Sylvester: congruence preserves the inertia
    #[test]
    fn signature_is_congruence_invariant(
        signs in prop::collection::vec(-1i8..=1, 5),
        mags in prop::collection::vec(0.2f64..5.0, 5),
        p in prop::collection::vec(-1.0f64..1.0, 25),
    ) {
        let n = 5;
        let d: Vec<f64> = signs.iter().zip(&mags).map(|(&s, &m)| s as f64 * m).collect();
        // P = I + small random part keeps it well conditioned
        let pm: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } + 0.3 * p[i * n + j]).collect())
            .collect();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = (0..n).map(|k| pm[k][i] * d[k] * pm[k][j]).sum();
            }
        }
        let expect = (
            signs.iter().filter(|&&s| s < 0).count(),
            signs.iter().filter(|&&s| s == 0).count(),
            signs.iter().filter(|&&s| s > 0).count(),
        );
        prop_assert_eq!(signature_of(&m), expect);
    }
}

#[test]
fn single_precision_curvature_of_de_sitter() {
    let g = conformally_flat(3.0f32, N, Chart::FlatMinus);
    let res = constant_curvature_residual(&g, &[0.1f32, -0.2, 0.3, 0.05], 1.0).unwrap();
    assert!(res < 1e-4, "{res}");
}
