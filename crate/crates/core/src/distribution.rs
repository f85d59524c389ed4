//! Mollifiers, regularized Heaviside functions and model-product pairings.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::jump::JumpFunction;
use crate::metric;
use crate::quadrature::{integrate, integrate_scalar};
use crate::scalar::Scalar;

/// Absolute tolerance used for every pairing integral.
pub const PAIRING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MollifierKind {
    /// `ρ(x) = (315/256)(1 − x²)⁴`.
    PolyBump,
    /// `ρ(x) = (315/256)(1 − x²)⁴(1 + x/2)`.
    TiltedBump,
}

impl fmt::Display for MollifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MollifierKind::PolyBump => "poly_bump",
            MollifierKind::TiltedBump => "tilted_bump",
        })
    }
}

impl std::str::FromStr for MollifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly_bump" => Ok(MollifierKind::PolyBump),
            "tilted_bump" => Ok(MollifierKind::TiltedBump),
            _ => Err(Error::Domain(format!("unknown mollifier '{s}'"))),
        }
    }
}

/// Polynomial mollifier on `[−1, 1]` with its primitive, both as coefficient
/// lists in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    pub kind: MollifierKind,
    density: Vec<f64>,
    primitive: Vec<f64>,
}

const NORM: f64 = 315.0 / 256.0;

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * k as f64)
        .collect()
}

pub fn make_mollifier(kind: MollifierKind) -> Mollifier {
    // (1 − x²)⁴ = 1 − 4x² + 6x⁴ − 4x⁶ + x⁸
    let mut density = vec![1.0, 0.0, -4.0, 0.0, 6.0, 0.0, -4.0, 0.0, 1.0];
    if kind == MollifierKind::TiltedBump {
        let mut t = density.clone();
        t.push(0.0);
        for (k, &a) in density.iter().enumerate() {
            t[k + 1] += 0.5 * a;
        }
        density = t;
    }
    for a in &mut density {
        *a *= NORM;
    }
    let mut primitive = vec![0.0];
    primitive.extend(density.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
    primitive[0] = -poly_eval(&primitive, -1.0);
    Mollifier {
        kind,
        density,
        primitive,
    }
}

impl Mollifier {
    pub fn density(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            0.0
        } else {
            poly_eval(&self.density, x)
        }
    }

    /// `Θ(x) = ∫_{−1}^x ρ`.
    pub fn primitive(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            poly_eval(&self.primitive, x)
        }
    }

    /// `Θ, Θ', Θ'', …` at `x`, `count` entries.
    pub fn primitive_derivatives(&self, x: f64, count: usize) -> Vec<f64> {
        let mut out = vec![self.primitive(x)];
        if x.abs() >= 1.0 {
            out.resize(count, 0.0);
            return out;
        }
        let mut c = self.density.clone();
        while out.len() < count {
            out.push(poly_eval(&c, x));
            c = poly_derivative(&c);
        }
        out.truncate(count);
        out
    }

    /// `ρ_ε(u) = ρ(u/ε)/ε`.
    pub fn delta_eps<T: Scalar>(&self, u: T, eps: T) -> T {
        T::lit(self.density((u / eps).to_f64_lossy())) / eps
    }

    /// `θ_ε(u) = Θ(u/ε)`.
    pub fn theta_eps<T: Scalar>(&self, u: T, eps: T) -> T {
        T::lit(self.primitive((u / eps).to_f64_lossy()))
    }

    /// `θ_ε` applied to a jet.
    pub fn theta_eps_jet<T: Scalar>(&self, u: &Jet<T>, eps: T) -> Jet<T> {
        let x = (u.value() / eps).to_f64_lossy();
        let d = self.primitive_derivatives(x, u.order() + 1);
        let mut scale = T::one();
        let derivs: Vec<T> = d
            .iter()
            .map(|&c| {
                let out = T::lit(c) * scale;
                scale = scale / eps;
                out
            })
            .collect();
        u.map_univariate(&derivs)
    }

    /// `ρ_ε` applied to a jet.
    pub fn delta_eps_jet<T: Scalar>(&self, u: &Jet<T>, eps: T) -> Jet<T> {
        let x = (u.value() / eps).to_f64_lossy();
        let d = self.primitive_derivatives(x, u.order() + 2);
        let mut scale = T::one() / eps;
        let derivs: Vec<T> = d[1..]
            .iter()
            .map(|&c| {
                let out = T::lit(c) * scale;
                scale = scale / eps;
                out
            })
            .collect();
        u.map_univariate(&derivs)
    }
}

/// `φ_k(u) = (1 − (u/w)²)⁴₊ u^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub k: u32,
    pub width: f64,
}

impl TestFunction {
    pub fn new(k: u32, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("test function width must be positive, got {width}")));
        }
        Ok(TestFunction { k, width })
    }

    /// `φ₀, φ₁, φ₂` of width `w`.
    pub fn family(width: f64) -> Result<Vec<Self>> {
        (0..3).map(|k| Self::new(k, width)).collect()
    }

    pub fn eval<T: Scalar>(&self, u: T) -> T {
        let w = T::lit(self.width);
        let s = u / w;
        if s.abs() >= T::one() {
            return T::zero();
        }
        (T::one() - s * s).powi(4) * u.powi(self.k as i32)
    }
}

/// Factors of the model products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    One,
    Theta,
    OneMinusTheta,
    Delta,
}

impl Factor {
    fn eval(self, m: &Mollifier, u: f64, eps: f64) -> f64 {
        match self {
            Factor::One => 1.0,
            Factor::Theta => m.theta_eps(u, eps),
            Factor::OneMinusTheta => 1.0 - m.theta_eps(u, eps),
            Factor::Delta => m.delta_eps(u, eps),
        }
    }
}

/// Values of a pairing along a decreasing `ε` sequence and their extrapolated limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Fitted exponent `p` of `L + C ε^p`; `None` if the values are constant.
    pub order: Option<f64>,
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Domain("epsilon values must be positive".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("epsilon sequence must be strictly decreasing".into()));
    }
    Ok(())
}

/// Fits `f(ε) = L + C ε^p` to the three smallest `ε` and returns `(L, p)`.
pub fn extrapolate(eps: &[f64], values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    let last = values[n - 1];
    if n < 2 {
        return (last, None);
    }
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let d1 = values[n - 1] - values[n - 2];
    if d1.abs() <= 1e-15 * scale {
        return (last, None);
    }
    let p = if n >= 3 {
        let d0 = values[n - 2] - values[n - 3];
        let r0 = eps[n - 3] / eps[n - 2];
        let r1 = eps[n - 2] / eps[n - 1];
        if d0 != 0.0 && d0.signum() == d1.signum() {
            // for a geometric sequence r0 = r1; otherwise take the mean log ratio
            ((d0 / d1).abs().ln() / (0.5 * (r0.ln() + r1.ln()))).clamp(0.5, 8.0)
        } else {
            1.0
        }
    } else {
        1.0
    };
    let a = eps[n - 2].powf(p);
    let b = eps[n - 1].powf(p);
    let limit = last + d1 * b / (a - b);
    (limit, Some(p))
}

/// `⟨L_ε R_ε, φ⟩` along `eps`, extrapolated to `ε → 0`.
pub fn model_product_pairing(
    left: Factor,
    right: Factor,
    mollifier: &Mollifier,
    phi: &TestFunction,
    eps: &[f64],
) -> Result<PairingResult> {
    check_eps(eps)?;
    let w = phi.width;
    let mut values = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut breaks = vec![-w.max(e)];
        if e < w {
            breaks.extend([-e, 0.0, e]);
        } else {
            breaks.push(0.0);
        }
        breaks.push(w.max(e));
        let f = |u: f64| left.eval(mollifier, u, e) * right.eval(mollifier, u, e) * phi.eval(u);
        values.push(integrate_scalar(f, &breaks, PAIRING_TOL)?);
    }
    let (limit, order) = extrapolate(eps, &values);
    Ok(PairingResult {
        eps: eps.to_vec(),
        values,
        limit,
        order,
    })
}

/// The mollifier-independent value of the model product paired with `φ`.
pub fn model_product_limit(left: Factor, right: Factor, phi: &TestFunction) -> Result<f64> {
    use Factor::*;
    let w = phi.width;
    let int = |a: f64, b: f64| integrate_scalar(|u: f64| phi.eval(u), &[a, b], PAIRING_TOL);
    let phi0 = phi.eval(0.0f64);
    let (l, r) = if left == Delta { (right, left) } else { (left, right) };
    match (l, r) {
        (Delta, Delta) => Err(Error::Domain("δ·δ has no model product".into())),
        (One, Delta) => Ok(phi0),
        (Theta, Delta) | (OneMinusTheta, Delta) => Ok(0.5 * phi0),
        (One, One) => int(-w, w),
        (Theta, Theta) | (Theta, One) | (One, Theta) => int(0.0, w),
        (OneMinusTheta, OneMinusTheta) | (OneMinusTheta, One) | (One, OneMinusTheta) => int(-w, 0.0),
        (Theta, OneMinusTheta) | (OneMinusTheta, Theta) => Ok(0.0),
        (_, _) => unreachable!("δ is always moved to the right"),
    }
}

/// `∫ θ_ε ρ_ε du`, which equals `½` for every `ε`.
pub fn theta_delta_integral(mollifier: &Mollifier, eps: f64) -> Result<f64> {
    integrate_scalar(
        |u: f64| mollifier.theta_eps(u, eps) * mollifier.delta_eps(u, eps),
        &[-eps, 0.0, eps],
        1e-15,
    )
}

/// One component of a weak-limit comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakComponent {
    pub mu: usize,
    pub nu: usize,
    pub pairing: PairingResult,
    /// `∫ g_μν φ du` of the Lipschitz metric.
    pub target: f64,
    /// `|limit − target|`.
    pub residual: f64,
}

/// Pairs every component of the regularized distributional metric at fixed
/// `(v, z)` with `φ(u)` along `eps` and compares the extrapolated limit with
/// the same pairing of the Lipschitz metric.
pub fn weak_metric_check(
    h: &JumpFunction,
    lambda: f64,
    mollifier: &Mollifier,
    phi: &TestFunction,
    v: f64,
    z: &[f64],
    eps: &[f64],
) -> Result<Vec<WeakComponent>> {
    check_eps(eps)?;
    let n = h.dim_n() + 1;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let w = phi.width;
    let point = |u: f64| {
        let mut p = vec![u, v];
        p.extend_from_slice(z);
        p
    };
    let flatten = |g: Vec<Vec<f64>>, u: f64| -> Vec<f64> {
        let f = phi.eval(u);
        pairs.iter().map(|&(a, b)| g[a][b] * f).collect()
    };

    let target = integrate(
        |u| Ok(flatten(metric::lipschitz_values(h, lambda, &point(u))?, u)),
        &[-w, 0.0, w],
        pairs.len(),
        PAIRING_TOL,
    )?
    .value;

    let mut per_eps = Vec::with_capacity(eps.len());
    for &e in eps {
        let breaks = if e < w {
            vec![-w, -e, 0.0, e, w]
        } else {
            vec![-e, 0.0, e]
        };
        let q = integrate(
            |u| {
                Ok(flatten(
                    metric::regularized_distributional_metric(h, lambda, mollifier, e, &point(u))?,
                    u,
                ))
            },
            &breaks,
            pairs.len(),
            PAIRING_TOL,
        )?;
        per_eps.push(q.value);
    }

    Ok(pairs
        .iter()
        .enumerate()
        .map(|(i, &(mu, nu))| {
            let values: Vec<f64> = per_eps.iter().map(|row| row[i]).collect();
            let (limit, order) = extrapolate(eps, &values);
            WeakComponent {
                mu,
                nu,
                target: target[i],
                residual: (limit - target[i]).abs(),
                pairing: PairingResult {
                    eps: eps.to_vec(),
                    values,
                    limit,
                    order,
                },
            }
        })
        .collect())
}

/// Coefficient `K` of `δ(u)` that the literal regularization leaves in
/// `g_uu` at `(v, z)`, for `Λ = 0`:
/// `K = −2(H − v) ∫ρ s + 2𝓗 ∫ρ s²` with `s(x) = 1 + (Θ(x) + xρ(x))(U1 − 1)`.
///
/// It vanishes when `U1 = 1`; otherwise the weak limit of `g^ε_uu` is `K δ`
/// rather than the Lipschitz value `0`.
pub fn uu_delta_coefficient(h: &JumpFunction, mollifier: &Mollifier, v: f64, z: &[f64]) -> Result<f64> {
    let hj = h.jets(v, z, 1)?;
    let dv = h.dv_checked(&hj, v, z)?;
    let u1 = 1.0 / dv;
    let jump = hj.value() - v;
    let hs = metric::hscript(h, v, z)?;
    let s = |x: f64| 1.0 + (mollifier.primitive(x) + x * mollifier.density(x)) * (u1 - 1.0);
    let i1 = integrate_scalar(|x: f64| mollifier.density(x) * s(x), &[-1.0, 0.0, 1.0], 1e-15)?;
    let i2 = integrate_scalar(|x: f64| mollifier.density(x) * s(x) * s(x), &[-1.0, 0.0, 1.0], 1e-15)?;
    Ok(-2.0 * jump * i1 + 2.0 * hs * i2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump::parse_jump_expression;

    #[test]
    fn unit_mass_and_support() {
        for kind in [MollifierKind::PolyBump, MollifierKind::TiltedBump] {
            let m = make_mollifier(kind);
            let mass = integrate_scalar(|x: f64| m.density(x), &[-1.0, 1.0], 1e-15).unwrap();
            assert!((mass - 1.0).abs() < 1e-12);
            assert!(m.primitive(-1.0).abs() < 1e-15);
            assert!((m.primitive(1.0 - 1e-15) - 1.0).abs() < 1e-12);
            assert_eq!(m.density(1.5), 0.0);
        }
        let t = make_mollifier(MollifierKind::TiltedBump);
        let first = integrate_scalar(|x: f64| x * t.density(x), &[-1.0, 1.0], 1e-15).unwrap();
        assert!(first > 0.01);
    }

    #[test]
    fn theta_eps_saturates() {
        let m = make_mollifier(MollifierKind::PolyBump);
        assert_eq!(m.theta_eps(-0.2, 0.1), 0.0);
        assert_eq!(m.theta_eps(0.1, 0.1), 1.0);
        assert!((m.theta_eps(0.0f64, 0.1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn theta_jet_derivative_is_delta() {
        let m = make_mollifier(MollifierKind::TiltedBump);
        let u = Jet::variable(1, 2, 0, 0.03);
        let t = m.theta_eps_jet(&u, 0.1);
        assert!((t.d1(0) - m.delta_eps(0.03f64, 0.1)).abs() < 1e-12);
        let d = m.delta_eps_jet(&u, 0.1);
        assert!((d.value() - m.delta_eps(0.03f64, 0.1)).abs() < 1e-12);
    }

    #[test]
    fn half_identity() {
        for kind in [MollifierKind::PolyBump, MollifierKind::TiltedBump] {
            let m = make_mollifier(kind);
            for e in [1.0, 1e-2, 1e-5] {
                assert!((theta_delta_integral(&m, e).unwrap() - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn theta_delta_limit() {
        let phi = TestFunction::new(0, 1.0).unwrap();
        let m = make_mollifier(MollifierKind::TiltedBump);
        let r = model_product_pairing(Factor::Theta, Factor::Delta, &m, &phi, &[1e-1, 1e-2, 1e-3, 1e-4])
            .unwrap();
        assert!((r.limit - 0.5).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn extrapolation_recovers_power_law() {
        let eps = [1e-1, 1e-2, 1e-3];
        let vals: Vec<f64> = eps.iter().map(|e| 2.0 + 3.0 * e * e).collect();
        let (l, p) = extrapolate(&eps, &vals);
        assert!((l - 2.0).abs() < 1e-12);
        assert!((p.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bad_eps_sequence() {
        let phi = TestFunction::new(0, 1.0).unwrap();
        let m = make_mollifier(MollifierKind::PolyBump);
        assert!(model_product_pairing(Factor::Theta, Factor::Delta, &m, &phi, &[1e-2, 1e-1]).is_err());
    }

    #[test]
    fn anomaly_predicts_uu_residual() {
        let h = parse_jump_expression("2*v - log(cosh(v))", 3).unwrap();
        let m = make_mollifier(MollifierKind::PolyBump);
        let phi = TestFunction::new(0, 1.0).unwrap();
        let (v, z) = (0.7, [0.2, 0.1]);
        let k = uu_delta_coefficient(&h, &m, v, &z).unwrap();
        assert!(k.abs() > 1e-3);
        let comps = weak_metric_check(&h, 0.0, &m, &phi, v, &z, &[1e-2, 1e-3, 1e-4]).unwrap();
        let uu = comps.iter().find(|c| c.mu == 0 && c.nu == 0).unwrap();
        assert!((uu.pairing.limit - uu.target - k).abs() < 1e-6, "{uu:?} k = {k}");

        let penrose = parse_jump_expression("v + z2^2 - z3", 3).unwrap();
        assert!(uu_delta_coefficient(&penrose, &m, v, &z).unwrap().abs() < 1e-14);
    }
}
