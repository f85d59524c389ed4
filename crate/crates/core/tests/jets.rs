#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use nullshell::jump::{make_builtin, Builtin, JumpFunction};
use nullshell::special::erf;
use nullshell::{Jet, Jet32, Jet64, Layout};
use proptest::prelude::*;

// 4th-order accurate central stencils (offset, weight) for derivative orders 0..=4
fn stencil(k: u8) -> (Vec<(i32, f64)>, i32) {
    match k {
        0 => (vec![(0, 1.0)], 0),
        1 => (
            vec![(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
            1,
        ),
        2 => (
            vec![
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
            2,
        ),
        3 => (
            vec![
                (-3, 1.0 / 8.0),
                (-2, -1.0),
                (-1, 13.0 / 8.0),
                (1, -13.0 / 8.0),
                (2, 1.0),
                (3, -1.0 / 8.0),
            ],
            3,
        ),
        4 => (
            vec![
                (-3, -1.0 / 6.0),
                (-2, 2.0),
                (-1, -39.0 / 6.0),
                (0, 56.0 / 6.0),
                (1, -39.0 / 6.0),
                (2, 2.0),
                (3, -1.0 / 6.0),
            ],
            4,
        ),
        _ => unreachable!(),
    }
}

// one Richardson step on top of the O(h^4) stencils
fn finite_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], alpha: &[u8]) -> f64 {
    let total: u8 = alpha.iter().sum();
    // balance roundoff against truncation per total order
    let h = [1.0, 2e-3, 5e-3, 2e-2, 4e-2][total as usize];
    let coarse = stencil_sum(f, x, alpha, h);
    let fine = stencil_sum(f, x, alpha, h / 2.0);
    (16.0 * fine - coarse) / 15.0
}

fn stencil_sum(f: &dyn Fn(&[f64]) -> f64, x: &[f64], alpha: &[u8], h: f64) -> f64 {
    let stencils: Vec<_> = alpha.iter().map(|&k| stencil(k)).collect();
    let mut acc = 0.0;
    let mut idx = vec![0usize; x.len()];
    'outer: loop {
        let mut w = 1.0;
        let mut p = x.to_vec();
        for (d, (s, _)) in stencils.iter().enumerate() {
            let (off, wt) = s[idx[d]];
            w *= wt;
            p[d] += off as f64 * h;
        }
        acc += w * f(&p);
        for d in 0..x.len() {
            idx[d] += 1;
            if idx[d] < stencils[d].0.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    let scale: i32 = stencils.iter().map(|s| s.1).sum();
    acc / h.powi(scale)
}

fn check_all_partials(
    jet: &Jet64,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
) -> std::result::Result<(), TestCaseError> {
    let layout = Layout::get(x.len(), 4);
    for i in 0..layout.len() {
        let alpha = layout.exponents(i).to_vec();
        let exact = jet.partial(&alpha);
        let fd = finite_difference(f, x, &alpha);
        prop_assert!(
            (exact - fd).abs() <= 1e-6 * fd.abs().max(1.0),
            "∂^{:?} at {:?}: jet {} vs fd {}",
            alpha,
            x,
            exact,
            fd
        );
    }
    Ok(())
}

type Elementary = (&'static str, fn(&Jet64) -> Jet64, fn(f64) -> f64);

fn elementary() -> Vec<Elementary> {
    vec![
        ("exp", |j| j.exp(), f64::exp),
        ("ln", |j| j.ln(), f64::ln),
        ("sqrt", |j| j.sqrt(), f64::sqrt),
        ("sin", |j| j.sin(), f64::sin),
        ("cos", |j| j.cos(), f64::cos),
        ("sinh", |j| j.sinh(), f64::sinh),
        ("cosh", |j| j.cosh(), f64::cosh),
        ("tanh", |j| j.tanh(), f64::tanh),
        ("erf", |j| j.erf(), |x| erf(x)),
        ("recip", |j| j.recip(), f64::recip),
        ("powi", |j| j.powi(-3), |x| x.powi(-3)),
        ("powf", |j| j.powf(1.7), |x| x.powf(1.7)),
    ]
}

fn inner(x: f64, y: f64) -> f64 {
    1.2 + 0.3 * x - 0.2 * y + 0.1 * x * y
}

fn inner_jet(s: &[Jet64]) -> Jet64 {
    &s[0] * 0.3 - &s[1] * 0.2 + &s[0] * &s[1] * 0.1 + 1.2
}

fn builtins() -> Vec<JumpFunction> {
    vec![
        make_builtin(Builtin::Example { a: 4.0, b: 2.0, c: 1.0, h0: 1.1 }, 3).unwrap(),
        make_builtin(Builtin::Linear { a: 2.0, b: vec![0.5, -1.0], c: 0.3 }, 3).unwrap(),
        make_builtin(
            Builtin::Wave {
                a: 1.5,
                profile: nullshell::expr::parse(
                    "exp(-z2^2)*cosh(z3/2)",
                    nullshell::expr::ParseOptions::transverse(3),
                )
                .unwrap(),
            },
            3,
        )
        .unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn elementary_functions_match_finite_differences(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let seeds = Jet::seed(&[x, y], 4);
        let g = inner_jet(&seeds);
        for (name, fj, ff) in elementary() {
            let jet = fj(&g);
            let f = |p: &[f64]| ff(inner(p[0], p[1]));
            check_all_partials(&jet, &f, &[x, y]).map_err(|e| TestCaseError::fail(format!("{name}: {e}")))?;
        }
    }

    #[test]
    fn builtin_jump_functions_match_finite_differences(
        v in -2.0f64..2.0,
        // the radius is singular at the axis; keep the stencil well away from it
        r in 0.8f64..2.0,
        t in 0.0f64..std::f64::consts::TAU,
    ) {
        let z = [r * t.cos(), r * t.sin()];
        for h in builtins() {
            let jet = h.jets(v, &z, 4).unwrap();
            let f = |p: &[f64]| h.jets(p[0], &p[1..], 0).unwrap().value();
            check_all_partials(&jet, &f, &[v, z[0], z[1]])?;
        }
    }

    #[test]
    fn arithmetic_is_a_ring_at_fixed_order(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let s = Jet::seed(&[a, b], 3);
        let x = s[0].sin() + &s[1];
        let y = s[1].exp() * 0.5;
        let lhs = &(&x + &y) * &x;
        let rhs = &(&x * &x) + &(&y * &x);
        for (l, r) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((l - r).abs() <= 1e-13 * l.abs().max(1.0));
        }
        let q = &(&x * &y) / &y;
        for (l, r) in q.coeffs().iter().zip(x.coeffs()) {
            prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0));
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let s32 = Jet32::seed(&[0.3f32, -0.4], 3);
    let s64 = Jet64::seed(&[0.3f64, -0.4], 3);
    let f32v = (&s32[0] * &s32[1]).tanh().exp();
    let f64v = (&s64[0] * &s64[1]).tanh().exp();
    for (a, b) in f32v.coeffs().iter().zip(f64v.coeffs()) {
        assert!((*a as f64 - b).abs() < 1e-5 * b.abs().max(1.0));
    }
}

#[test]
fn example_mixed_partials_near_axis() {
    // reference values from 40-digit numerical differentiation
    let h = make_builtin(Builtin::Example { a: 4.0, b: 2.0, c: 1.0, h0: 1.1 }, 3).unwrap();
    let jet = h.jets(0.0, &[0.4, 0.0], 4).unwrap();
    let cases = [
        ([0u8, 2, 2], -31.450807741788153759f64),
        ([2, 0, 2], 4.2781939304058884773),
    ];
    for (alpha, want) in cases {
        let got = jet.partial(&alpha);
        assert!((got - want).abs() < 1e-12 * want.abs(), "{alpha:?}: {got} vs {want}");
    }
}
