//! The matched metric in `(u, v, z^A)`: the Lipschitz form, its Rosen form
//! for impulsive waves, and the ε-regularized distributional form.

use num_complex::Complex;

use crate::distribution::Mollifier;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::jump::JumpFunction;
use crate::matching::TransverseCoefficients;
use crate::scalar::Scalar;
use crate::tensor::{Chart, JetMatrix, MetricField};

fn check_point<T: Scalar>(h: &JumpFunction, point: &[T]) -> Result<()> {
    if point.len() != h.dim_n() + 1 {
        return Err(Error::WrongDimension {
            expected: h.dim_n() + 1,
            found: point.len(),
        });
    }
    Ok(())
}

fn zero_matrix<T: Scalar>(like: &Jet<T>, n: usize) -> JetMatrix<T> {
    vec![vec![like.lift_const(T::zero()); n]; n]
}

/// `[Y_ab]` as jets of order `order` in `(u, v, z)`, from a jet of `H` of order `order + 2`.
fn jump_jets<T: Scalar>(hj: &Jet<T>, n: usize) -> (JetMatrix<T>, Jet<T>) {
    let dv = hj.derivative(1);
    let inv = dv.truncate(dv.order() - 1).recip();
    let first: Vec<Jet<T>> = (0..n).map(|a| hj.derivative(a + 1)).collect();
    let y = (0..n)
        .map(|a| (0..n).map(|b| -(first[a].derivative(b + 1)) * &inv).collect())
        .collect();
    (y, dv)
}

fn point_omega<T: Scalar>(lambda: T, u: &Jet<T>, v: &Jet<T>, z: &[Jet<T>]) -> Jet<T> {
    let mut q = u * v * T::lit(-2.0);
    for za in z {
        q += &(za * za);
    }
    q * (lambda / T::lit(12.0)) + T::one()
}

/// Components of the Lipschitz metric as jets of the given order in `(u, v, z)`.
///
/// For `u ≥ 0` the jets are those of the plus-side expression, so at `u = 0`
/// they are one-sided derivatives from `u > 0`.
pub fn lipschitz_metric<T: Scalar>(
    h: &JumpFunction,
    lambda: T,
    point: &[T],
    order: usize,
) -> Result<JetMatrix<T>> {
    check_point(h, point)?;
    let n = h.dim_n();
    let seeds = Jet::seed(point, order + 2);
    let hj = h.eval_on(&seeds[1], &seeds[2..])?;
    let (y, dv) = jump_jets(&hj, n);
    if dv.value() <= T::zero() {
        return Err(Error::NonPositiveDerivative {
            value: dv.value().to_f64_lossy(),
            v: point[1].to_f64_lossy(),
            z: point[2..].iter().map(|x| x.to_f64_lossy()).collect(),
        });
    }
    let s: Vec<Jet<T>> = seeds.iter().map(|x| x.truncate(order)).collect();
    let u = &s[0];
    let plus = point[0] >= T::zero();
    let one = u.lift_const(T::one());

    let mut g = zero_matrix(u, n + 1);
    g[0][1] = -one.clone();
    g[1][0] = -one.clone();
    for a in 2..=n {
        g[a][a] = one.clone();
    }
    if plus {
        let m = n - 1;
        // dv² : u (u Σ Y_vA² − 2 Y_vv)
        let mut s_vv = u.lift_const(T::zero());
        for a in 0..m {
            s_vv += &(&y[0][a + 1] * &y[0][a + 1]);
        }
        g[1][1] = u * &(u * &s_vv - &y[0][0] * T::lit(2.0));
        for a in 0..m {
            let mut t = u.lift_const(T::zero());
            for b in 0..m {
                t += &(&y[0][b + 1] * &y[a + 1][b + 1]);
            }
            let c = u * &(u * &t - &y[0][a + 1] * T::lit(2.0));
            g[1][a + 2] = c.clone();
            g[a + 2][1] = c;
        }
        for a in 0..m {
            for b in 0..m {
                let mut t = u.lift_const(T::zero());
                for i in 0..m {
                    t += &(&y[i + 1][a + 1] * &y[i + 1][b + 1]);
                }
                let c = u * &(&y[a + 1][b + 1] - &(u * &t * T::lit(0.5))) * T::lit(-2.0);
                g[a + 2][b + 2] += &c;
            }
        }
    }
    if lambda != T::zero() {
        let q = if plus {
            let tc = TransverseCoefficients::from_h_jet(&hj, 1, n - 1, point[1], &point[2..])?;
            let mut extra = &s[1] - &(&tc.u1 * &(&hj + &(u * &tc.v1)));
            for (za, xa) in s[2..].iter().zip(&tc.x1) {
                extra += &(za * xa + &(u * &(xa * xa)) * T::lit(0.5));
            }
            point_omega(lambda, u, &s[1], &s[2..]) + u * &extra * (lambda / T::lit(6.0))
        } else {
            point_omega(lambda, u, &s[1], &s[2..])
        };
        if q.value() == T::zero() {
            return Err(Error::ConformalFactorZero(0.0));
        }
        let w = q.powi(-2);
        for row in &mut g {
            for c in row.iter_mut() {
                *c = &*c * &w;
            }
        }
    }
    Ok(g)
}

/// Plain component values of [`lipschitz_metric`].
pub fn lipschitz_values<T: Scalar>(h: &JumpFunction, lambda: T, point: &[T]) -> Result<Vec<Vec<T>>> {
    Ok(crate::tensor::values_of(&lipschitz_metric(h, lambda, point, 0)?))
}

/// The Lipschitz metric as a [`MetricField`] on `(u, v, z)`.
#[derive(Debug, Clone)]
pub struct LipschitzMetric<T> {
    pub h: JumpFunction,
    pub lambda: T,
}

impl<T: Scalar> LipschitzMetric<T> {
    pub fn new(h: JumpFunction, lambda: T) -> Self {
        LipschitzMetric { h, lambda }
    }
}

impl<T: Scalar> MetricField<T> for LipschitzMetric<T> {
    fn chart(&self) -> Chart {
        Chart::NullCoords
    }

    fn dim(&self) -> usize {
        self.h.dim_n() + 1
    }

    fn eval(&self, point: &[T], order: usize) -> Result<JetMatrix<T>> {
        lipschitz_metric(&self.h, self.lambda, point, order)
    }
}

/// `𝓗 = ∂_vH (1 + ∂_vH)/(1 + (∂_vH)²) (H − v)`.
pub fn hscript<T: Scalar>(h: &JumpFunction, v: T, z: &[T]) -> Result<T> {
    let j = h.jets(v, z, 1)?;
    let d = h.dv_checked(&j, v, z)?;
    Ok(d * (T::one() + d) / (T::one() + d * d) * (j.value() - v))
}

/// `ω = α d𝒵 + β d𝒵̄` and the real metric `−2dudv + 2ω⊗ₛω̄` in `(u, v, z², z³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RosenForm<T> {
    /// Components of `ω` along `(du, d𝒵, d𝒵̄)`.
    pub omega: [Complex<T>; 3],
    pub metric: Vec<Vec<T>>,
}

const WAVE_TOL: f64 = 1e-12;

/// Rosen form of the Lipschitz metric for `H = a v + 𝓗(z)` with `𝔫 = 3`.
pub fn rosen_form<T: Scalar>(h: &JumpFunction, point: &[T]) -> Result<RosenForm<T>> {
    if h.dim_n() != 3 {
        return Err(Error::WrongDimension {
            expected: 3,
            found: h.dim_n(),
        });
    }
    check_point(h, point)?;
    let (u, v, z) = (point[0], point[1], &point[2..]);
    let j = h.jets(v, z, 2)?;
    let a = h.dv_checked(&j, v, z)?;
    match h.is_wave_type() {
        Some(true) => {}
        Some(false) => return Err(Error::NotWaveType("H does not depend on v".into())),
        None => {
            let mixed = [j.d2(0, 0), j.d2(0, 1), j.d2(0, 2)];
            if mixed.iter().any(|m| m.to_f64_lossy().abs() > WAVE_TOL) {
                return Err(Error::NotWaveType(format!(
                    "∂_v∂H = {:?} at v = {v}",
                    mixed.iter().map(|m| m.to_f64_lossy()).collect::<Vec<_>>()
                )));
            }
        }
    }
    let (h22, h33, h23) = (j.d2(1, 1), j.d2(2, 2), j.d2(1, 2));
    let half = T::lit(0.5);
    let zzbar = (h22 + h33) * half;
    let zbar2 = Complex::new((h22 - h33) * half, h23);
    let up = if u > T::zero() { u } else { T::zero() };
    let alpha = Complex::new(T::one() + up / a * zzbar, T::zero());
    let beta = zbar2 * (up / a);

    let r = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let i = Complex::new(T::zero(), T::one());
    let c = [(alpha + beta) * r, i * (alpha - beta) * r];
    let mut g = vec![vec![T::zero(); 4]; 4];
    g[0][1] = -T::one();
    g[1][0] = -T::one();
    for p in 0..2 {
        for q in 0..2 {
            g[p + 2][q + 2] = (c[p] * c[q].conj()).re * T::lit(2.0);
        }
    }
    Ok(RosenForm {
        omega: [Complex::new(T::zero(), T::zero()), alpha, beta],
        metric: g,
    })
}

/// Coordinates `(𝒰, 𝒱, 𝒳)` with `θ → θ_ε` and `u₊ → u θ_ε(u)`, as jets in `(u, v, z)`.
pub fn regularized_coordinates<T: Scalar>(
    h: &JumpFunction,
    mollifier: &Mollifier,
    eps: T,
    point: &[T],
    order: usize,
) -> Result<Vec<Jet<T>>> {
    check_point(h, point)?;
    let n = h.dim_n();
    let seeds = Jet::seed(point, order + 1);
    let hj = h.eval_on(&seeds[1], &seeds[2..])?;
    let tc = TransverseCoefficients::from_h_jet(&hj, 1, n - 1, point[1], &point[2..])?;
    let s: Vec<Jet<T>> = seeds.iter().map(|x| x.truncate(order)).collect();
    let u = &s[0];
    let theta = mollifier.theta_eps_jet(u, eps);
    let kink = u * &theta;
    let mut out = Vec::with_capacity(n + 1);
    out.push(u + &(&kink * &(&tc.u1 - T::one())));
    out.push(&s[1] + &(&theta * &(&hj - &s[1])) + &kink * &tc.v1);
    for (za, xa) in s[2..].iter().zip(&tc.x1) {
        out.push(za + &(&kink * xa));
    }
    Ok(out)
}

/// `(−2d𝒰d𝒱 + δd𝒳d𝒳 + 2𝓗 ρ_ε(u) d𝒰²)/(1 + Λ/12(|𝒳|² − 2𝒰𝒱))²` in `(u, v, z)`.
pub fn regularized_distributional_metric<T: Scalar>(
    h: &JumpFunction,
    lambda: T,
    mollifier: &Mollifier,
    eps: T,
    point: &[T],
) -> Result<Vec<Vec<T>>> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
    }
    let n = h.dim_n();
    let x = regularized_coordinates(h, mollifier, eps, point, 1)?;
    let d: Vec<Vec<T>> = x.iter().map(|c| c.gradient()).collect();
    let hs = hscript(h, point[1], &point[2..])?;
    let imp = T::lit(2.0) * hs * mollifier.delta_eps(point[0], eps);
    let conf = if lambda == T::zero() {
        T::one()
    } else {
        let mut q = -T::lit(2.0) * x[0].value() * x[1].value();
        for xa in &x[2..] {
            q = q + xa.value() * xa.value();
        }
        let w = T::one() + lambda / T::lit(12.0) * q;
        if w == T::zero() {
            return Err(Error::ConformalFactorZero(0.0));
        }
        w * w
    };
    let mut g = vec![vec![T::zero(); n + 1]; n + 1];
    for mu in 0..=n {
        for nu in 0..=n {
            let mut c = -(d[0][mu] * d[1][nu] + d[1][mu] * d[0][nu]) + imp * d[0][mu] * d[0][nu];
            for xa in &d[2..] {
                c = c + xa[mu] * xa[nu];
            }
            g[mu][nu] = c / conf;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{make_mollifier, MollifierKind};
    use crate::jump::parse_jump_expression;
    use crate::matching::pullback_plus;
    use crate::tensor::flat_null_matrix;

    fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn no_shell_is_flat() {
        let h = parse_jump_expression("v", 3).unwrap();
        for u in [-0.5, 0.0, 0.8] {
            let g = lipschitz_values(&h, 0.0, &[u, 0.3, 0.1, 0.2]).unwrap();
            assert_eq!(g, flat_null_matrix::<f64>(4));
        }
    }

    #[test]
    fn simple_example() {
        let h = parse_jump_expression("2*v - log(cosh(v))", 3).unwrap();
        let (u, v) = (0.6f64, 0.4f64);
        let g = lipschitz_values(&h, 0.0, &[u, v, 0.1, -0.3]).unwrap();
        let mut e = flat_null_matrix::<f64>(4);
        e[1][1] = -2.0 * u / v.cosh().powi(2) / (2.0 - v.tanh());
        assert!(max_diff(&g, &e) < 1e-14, "{g:?}");
    }

    #[test]
    fn agrees_with_pullback() {
        let h = parse_jump_expression("2*v - log(cosh(v)) + 0.3*z2*z3 + 0.1*v*z2^2", 3).unwrap();
        for lam in [0.0, 3.0, -3.0] {
            let p = [0.4, 0.2, 0.3, -0.5];
            let g = lipschitz_values(&h, lam, &p).unwrap();
            let e = pullback_plus(&h, lam, &p).unwrap();
            assert!(max_diff(&g, &e) < 1e-12, "Λ = {lam}: {g:?} vs {e:?}");
        }
    }

    #[test]
    fn hscript_values() {
        let h = parse_jump_expression("v + z2^2", 3).unwrap();
        assert!((hscript(&h, 0.3f64, &[0.5, 0.0]).unwrap() - 0.25).abs() < 1e-15);
        let h = parse_jump_expression("2*v - log(cosh(v))", 3).unwrap();
        assert_eq!(hscript(&h, 0.0, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn rosen_quadratic_profile() {
        let h = parse_jump_expression("v + (z2^2 - z3^2)/2", 3).unwrap();
        let r = rosen_form(&h, &[0.5f64, 0.0, 0.3, 0.4]).unwrap();
        assert!((r.omega[1].re - 1.0).abs() < 1e-15);
        assert!((r.omega[2].re - 0.5).abs() < 1e-15 && r.omega[2].im.abs() < 1e-15);
        let g = lipschitz_values(&h, 0.0, &[0.5, 0.0, 0.3, 0.4]).unwrap();
        assert!(max_diff(&r.metric, &g) < 1e-14);
    }

    #[test]
    fn rosen_rejects_non_wave() {
        let h = parse_jump_expression("2*v - log(cosh(v))", 3).unwrap();
        assert!(matches!(rosen_form(&h, &[0.5, 0.1, 0.3, 0.4]), Err(Error::NotWaveType(_))));
        let h = parse_jump_expression("v", 2).unwrap();
        assert!(matches!(rosen_form(&h, &[0.5, 0.1, 0.3]), Err(Error::WrongDimension { .. })));
    }

    #[test]
    fn regularized_outside_shell_is_lipschitz() {
        let h = parse_jump_expression("2*v - log(cosh(v)) + 0.2*z2*v", 3).unwrap();
        let m = make_mollifier(MollifierKind::TiltedBump);
        for lam in [0.0, 3.0] {
            for u in [-0.3, 0.25] {
                let p = [u, 0.4, 0.2, -0.1];
                let a = regularized_distributional_metric(&h, lam, &m, 0.1, &p).unwrap();
                let b = lipschitz_values(&h, lam, &p).unwrap();
                assert!(max_diff(&a, &b) < 1e-13, "u = {u}, Λ = {lam}");
            }
        }
        let flat = parse_jump_expression("v", 3).unwrap();
        let a = regularized_distributional_metric(&flat, 0.0, &m, 0.1, &[0.01, 0.4, 0.2, -0.1]).unwrap();
        assert_eq!(a, flat_null_matrix::<f64>(4));
    }
}
