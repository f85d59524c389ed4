//! Chart maps between the shell-adapted coordinates `(u, v, z^A)` and the flat
//! (or conformally flat) charts `(U, V, x^A)` on both sides, the matching
//! riggings, and checks of the junction and gluing conditions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::jump::JumpFunction;
use crate::scalar::Scalar;
use crate::tensor::{self, christoffel_at, conformal_factor, conformally_flat, Chart, MetricField};

/// Coefficients of the plus chart map, `U = u U1`, `V = H + u V1`, `x = z + u x1`.
///
/// All entries are jets in the variables the jump function was evaluated on.
#[derive(Debug, Clone)]
pub struct TransverseCoefficients<T> {
    pub u1: Jet<T>,
    pub v1: Jet<T>,
    pub x1: Vec<Jet<T>>,
    pub m: Jet<T>,
    pub q: Vec<Jet<T>>,
}

impl<T: Scalar> TransverseCoefficients<T> {
    /// From a jet of `H` whose variable `v_var` is `v` and the following
    /// `𝔫 − 1` variables are `z`. The result has one order less than `h`.
    pub fn from_h_jet(h: &Jet<T>, v_var: usize, m: usize, v: T, z: &[T]) -> Result<Self> {
        let dv = h.derivative(v_var);
        if dv.value() <= T::zero() {
            return Err(Error::NonPositiveDerivative {
                value: dv.value().to_f64_lossy(),
                v: v.to_f64_lossy(),
                z: z.iter().map(|x| x.to_f64_lossy()).collect(),
            });
        }
        let q: Vec<Jet<T>> = (0..m).map(|a| h.derivative(v_var + 1 + a)).collect();
        let u1 = dv.recip();
        let mut mm = dv.lift_const(T::zero());
        for qa in &q {
            mm += &(qa * qa);
        }
        let mm = mm * T::lit(0.5);
        Ok(TransverseCoefficients {
            v1: &mm * &u1,
            x1: q.iter().map(|qa| qa * &u1).collect(),
            u1,
            m: mm,
            q,
        })
    }

    /// `max(|−2 U1 V1 + |x1|²|, max_A |x1^A − U1 q^A|, |2M − |q|²|)` at the base point.
    pub fn identity_residual(&self) -> T {
        let u1 = self.u1.value();
        let mut r = -T::lit(2.0) * u1 * self.v1.value();
        let mut q2 = T::zero();
        let mut worst = T::zero();
        for (x, q) in self.x1.iter().zip(&self.q) {
            r = r + x.value() * x.value();
            q2 = q2 + q.value() * q.value();
            worst = worst.max((x.value() - u1 * q.value()).abs());
        }
        worst
            .max(r.abs())
            .max((T::lit(2.0) * self.m.value() - q2).abs())
    }
}

/// `U1`, `V1`, `x1`, `M`, `q` at `(v, z)` as jets of order 2 in `(v, z)`.
pub fn transverse_coefficients<T: Scalar>(
    h: &JumpFunction,
    v: T,
    z: &[T],
) -> Result<TransverseCoefficients<T>> {
    let hj = h.jets(v, z, 3)?;
    TransverseCoefficients::from_h_jet(&hj, 0, z.len(), v, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

/// `(U, V, x)` as jets of the given order in `(u, v, z)`.
///
/// The minus map is the identity; the plus map is `(u U1, H + u V1, z + u x1)`.
pub fn chart_map<T: Scalar>(
    h: &JumpFunction,
    side: Side,
    point: &[T],
    order: usize,
) -> Result<Vec<Jet<T>>> {
    let n = h.dim_n();
    if point.len() != n + 1 {
        return Err(Error::WrongDimension {
            expected: n + 1,
            found: point.len(),
        });
    }
    let u = point[0];
    match side {
        Side::Minus => {
            if u > T::zero() {
                return Err(Error::Domain(format!("minus chart needs u <= 0, got {u}")));
            }
            Ok(Jet::seed(point, order))
        }
        Side::Plus => {
            if u < T::zero() {
                return Err(Error::Domain(format!("plus chart needs u >= 0, got {u}")));
            }
            let seeds = Jet::seed(point, order + 1);
            let hj = h.eval_on(&seeds[1], &seeds[2..])?;
            let tc = TransverseCoefficients::from_h_jet(&hj, 1, n - 1, point[1], &point[2..])?;
            let uj = seeds[0].truncate(order);
            let mut out = Vec::with_capacity(n + 1);
            out.push(&uj * &tc.u1);
            out.push(hj.truncate(order) + &uj * &tc.v1);
            for (a, x1) in tc.x1.iter().enumerate() {
                out.push(seeds[2 + a].truncate(order) + &uj * x1);
            }
            Ok(out)
        }
    }
}

/// Jacobian `∂X^α/∂y^μ` of a chart map at the base point.
pub fn jacobian<T: Scalar>(map: &[Jet<T>]) -> Vec<Vec<T>> {
    map.iter().map(|x| x.gradient()).collect()
}

/// `Ω_𝒩 = 1 + Λ|z|²/12`, the conformal factor on `U = 0`.
pub fn omega_boundary<T: Scalar>(lambda: T, z: &[T]) -> Result<T> {
    let r2 = z.iter().fold(T::zero(), |s, &x| s + x * x);
    let w = T::one() + lambda / T::lit(12.0) * r2;
    if w == T::zero() {
        return Err(Error::ConformalFactorZero(r2.to_f64_lossy()));
    }
    Ok(w)
}

/// Plus-side rigging `ξ⁺` in `(U, V, x)` components at the boundary point over `(v, z)`.
pub fn rigging_plus<T: Scalar>(h: &JumpFunction, lambda: T, v: T, z: &[T]) -> Result<Vec<T>> {
    let tc = transverse_coefficients(h, v, z)?;
    let f = if lambda == T::zero() {
        T::one()
    } else {
        let w = omega_boundary(lambda, z)?;
        w * w
    };
    let mut xi = vec![-f * tc.u1.value(), -f * tc.v1.value()];
    xi.extend(tc.x1.iter().map(|x| -f * x.value()));
    Ok(xi)
}

/// Minus-side rigging `ξ⁻ = L⁻ = −Ω²∂_U` at `(0, v, z)`.
pub fn rigging_minus<T: Scalar>(lambda: T, dim_n: usize, z: &[T]) -> Result<Vec<T>> {
    let w = omega_boundary(lambda, z)?;
    let mut xi = vec![T::zero(); dim_n + 1];
    xi[0] = -w * w;
    Ok(xi)
}

/// Null generator `k = ∂_V`, rigging `L = −Ω²∂_U` and leaf directions `v_I = ∂_{x^I}`
/// at a boundary point `(0, V, x)` of one side.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrame<T> {
    pub point: Vec<T>,
    pub k: Vec<T>,
    pub l: Vec<T>,
    pub v_i: Vec<Vec<T>>,
    pub k_future: bool,
    pub l_past: bool,
}

impl<T: Scalar> BoundaryFrame<T> {
    pub fn at(lambda: T, vv: T, x: &[T]) -> Result<Self> {
        let n = x.len() + 1;
        let w = omega_boundary(lambda, x)?;
        let mut point = vec![T::zero(), vv];
        point.extend_from_slice(x);
        let mut k = vec![T::zero(); n + 1];
        k[1] = T::one();
        let mut l = vec![T::zero(); n + 1];
        l[0] = -w * w;
        let v_i = (0..n - 1)
            .map(|i| {
                let mut e = vec![T::zero(); n + 1];
                e[i + 2] = T::one();
                e
            })
            .collect();
        // future: negative pairing with ∂_U + ∂_V
        let mut t = vec![T::zero(); n + 1];
        t[0] = T::one();
        t[1] = T::one();
        let g = tensor::flat_null_matrix::<T>(n + 1);
        Ok(BoundaryFrame {
            k_future: tensor::pairing(&g, &k, &t) < T::zero(),
            l_past: tensor::pairing(&g, &l, &t) > T::zero(),
            point,
            k,
            l,
            v_i,
        })
    }

    /// Frame over `(v, z)` on the given side: `V = v` on minus, `V = H` on plus.
    pub fn over(h: &JumpFunction, side: Side, lambda: T, v: T, z: &[T]) -> Result<Self> {
        let vv = match side {
            Side::Minus => v,
            Side::Plus => h.jets(v, z, 0)?.value(),
        };
        Self::at(lambda, vv, z)
    }

    /// `max(|g(L,k) − 1|, |g(L,v_I)|)` for the metric values `g` at the frame point.
    pub fn condition_residual(&self, g: &[Vec<T>]) -> T {
        let mut r = (tensor::pairing(g, &self.l, &self.k) - T::one()).abs();
        for e in &self.v_i {
            r = r.max(tensor::pairing(g, &self.l, e).abs());
        }
        r
    }
}

/// Residuals of the junction conditions over a set of boundary samples.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionReport {
    pub samples: usize,
    pub max_first_form: f64,
    pub max_rigging_tangent: f64,
    pub max_rigging_norm: f64,
    pub orientation_ok: bool,
    pub tolerance: f64,
    pub pass: bool,
}

fn dual_tangents<T: Scalar>(
    h: &JumpFunction,
    v: T,
    z: &[T],
) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>)> {
    let n = h.dim_n();
    let hj = h.jets(v, z, 1)?;
    let grad = hj.gradient();
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    for b in 0..n {
        let mut em = vec![T::zero(); n + 1];
        em[b + 1] = T::one();
        minus.push(em);
        let mut ep = vec![T::zero(); n + 1];
        ep[1] = grad[b];
        if b > 0 {
            ep[b + 1] = T::one();
        }
        plus.push(ep);
    }
    Ok((minus, plus))
}

/// Checks `g⁻(e⁻_a, e⁻_b) = g⁺(e⁺_a, e⁺_b)`, `g⁻(ξ⁻, e⁻_a) = g⁺(ξ⁺, e⁺_a)`,
/// `g⁻(ξ⁻, ξ⁻) = g⁺(ξ⁺, ξ⁺)` and the orientation of both riggings at
/// samples `(v, z)` of the shell.
pub fn verify_junction<T: Scalar>(
    h: &JumpFunction,
    lambda: T,
    samples: &[(T, Vec<T>)],
) -> Result<JunctionReport> {
    let n = h.dim_n();
    let gm = conformally_flat(lambda, n + 1, Chart::FlatMinus);
    let gp = conformally_flat(lambda, n + 1, Chart::FlatPlus);
    let (mut first, mut tang, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    let mut orientation_ok = true;
    for (v, z) in samples {
        let (v, z) = (*v, z.as_slice());
        let fm = BoundaryFrame::over(h, Side::Minus, lambda, v, z)?;
        let fp = BoundaryFrame::over(h, Side::Plus, lambda, v, z)?;
        let g1 = gm.values(&fm.point)?;
        let g2 = gp.values(&fp.point)?;
        let (em, ep) = dual_tangents(h, v, z)?;
        let xm = rigging_minus(lambda, n, z)?;
        let xp = rigging_plus(h, lambda, v, z)?;
        for a in 0..n {
            for b in 0..n {
                let d = tensor::pairing(&g1, &em[a], &em[b]) - tensor::pairing(&g2, &ep[a], &ep[b]);
                first = first.max(d.to_f64_lossy().abs());
            }
            let d = tensor::pairing(&g1, &xm, &em[a]) - tensor::pairing(&g2, &xp, &ep[a]);
            tang = tang.max(d.to_f64_lossy().abs());
        }
        let d = tensor::pairing(&g1, &xm, &xm) - tensor::pairing(&g2, &xp, &xp);
        norm = norm.max(d.to_f64_lossy().abs());
        orientation_ok &= xm[0] < T::zero() && xp[0] < T::zero();
    }
    let tolerance = if lambda == T::zero() { 1e-10 } else { 1e-9 };
    Ok(JunctionReport {
        samples: samples.len(),
        max_first_form: first,
        max_rigging_tangent: tang,
        max_rigging_norm: norm,
        orientation_ok,
        tolerance,
        pass: orientation_ok && first.max(tang).max(norm) <= tolerance,
    })
}

type EmbedFn<T> = dyn Fn(&[Jet<T>]) -> Result<Vec<Jet<T>>> + Send + Sync;
type VectorFn<T> = dyn Fn(&[T]) -> Result<Vec<T>> + Send + Sync;

/// Two manifolds with boundary, a boundary identification and a transversal
/// field on the common boundary.
///
/// The boundary is parametrized by `s`; `embed1(s)` and `embed2(s)` give the
/// same boundary point in the two charts, so the identification is
/// `φ = embed2 ∘ embed1⁻¹`. `xi1(s)` and `xi2(s)` are the components of the
/// transversal field in the two charts.
#[derive(Clone)]
pub struct Gluing<T> {
    pub g1: Arc<dyn MetricField<T>>,
    pub g2: Arc<dyn MetricField<T>>,
    pub embed1: Arc<EmbedFn<T>>,
    pub embed2: Arc<EmbedFn<T>>,
    pub xi1: Arc<VectorFn<T>>,
    pub xi2: Arc<VectorFn<T>>,
}

impl<T: Scalar> fmt::Debug for Gluing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gluing")
            .field("dim", &self.g1.dim())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiAligningReport {
    pub samples: usize,
    /// Condition (i): induced metrics.
    pub isometry: f64,
    /// Condition (ii): `g(ξ, ·)` on tangent vectors.
    pub xi_tangent: f64,
    /// Condition (iii): `g(ξ, ξ)`.
    pub xi_xi: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn tangent_frame<T: Scalar>(
    embed: &EmbedFn<T>,
    s: &[T],
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let seeds = Jet::seed(s, 1);
    let x = embed(&seeds)?;
    let point = x.iter().map(|c| c.value()).collect();
    let tangents = (0..s.len())
        .map(|i| x.iter().map(|c| c.d1(i)).collect())
        .collect();
    Ok((point, tangents))
}

fn check_transversal<T: Scalar>(xi: &[T], tangents: &[Vec<T>], s: &[T]) -> Result<()> {
    let mut m: Vec<Vec<T>> = tangents.to_vec();
    m.push(xi.to_vec());
    if m.len() != xi.len() || tensor::invert(&m).is_err() {
        return Err(Error::NotTransversal(s.iter().map(|x| x.to_f64_lossy()).collect()));
    }
    Ok(())
}

/// Residuals of the three conditions for `φ` to be a `ξ`-aligning isometry.
pub fn verify_xi_aligning<T: Scalar>(gluing: &Gluing<T>, samples: &[Vec<T>]) -> Result<XiAligningReport> {
    let (mut iso, mut tang, mut xx) = (0.0f64, 0.0f64, 0.0f64);
    for s in samples {
        let (p1, b1) = tangent_frame(&*gluing.embed1, s)?;
        let (p2, b2) = tangent_frame(&*gluing.embed2, s)?;
        let xi1 = (gluing.xi1)(s)?;
        let xi2 = (gluing.xi2)(s)?;
        check_transversal(&xi1, &b1, s)?;
        check_transversal(&xi2, &b2, s)?;
        let g1 = gluing.g1.values(&p1)?;
        let g2 = gluing.g2.values(&p2)?;
        for i in 0..b1.len() {
            for j in 0..b1.len() {
                let d = tensor::pairing(&g1, &b1[i], &b1[j]) - tensor::pairing(&g2, &b2[i], &b2[j]);
                iso = iso.max(d.to_f64_lossy().abs());
            }
            let d = tensor::pairing(&g1, &xi1, &b1[i]) - tensor::pairing(&g2, &xi2, &b2[i]);
            tang = tang.max(d.to_f64_lossy().abs());
        }
        let d = tensor::pairing(&g1, &xi1, &xi1) - tensor::pairing(&g2, &xi2, &xi2);
        xx = xx.max(d.to_f64_lossy().abs());
    }
    let tolerance = 1e-10;
    Ok(XiAligningReport {
        samples: samples.len(),
        isometry: iso,
        xi_tangent: tang,
        xi_xi: xx,
        tolerance,
        pass: iso.max(tang).max(xx) <= tolerance,
    })
}

/// The null-shell matching as a gluing: boundary parameters `s = (v, z)`,
/// `φ(0, v, z) = (0, H(v, z), z)`, `ξ = ξ∓`.
pub fn null_shell_gluing<T: Scalar>(h: &JumpFunction, lambda: T) -> Gluing<T> {
    let n = h.dim_n();
    let hm = h.clone();
    let hp = h.clone();
    Gluing {
        g1: Arc::new(conformally_flat(lambda, n + 1, Chart::FlatMinus)),
        g2: Arc::new(conformally_flat(lambda, n + 1, Chart::FlatPlus)),
        embed1: Arc::new(|s: &[Jet<T>]| {
            let mut x = vec![s[0].lift_const(T::zero())];
            x.extend(s.iter().cloned());
            Ok(x)
        }),
        embed2: Arc::new(move |s: &[Jet<T>]| {
            let mut x = vec![s[0].lift_const(T::zero()), hm.eval_on(&s[0], &s[1..])?];
            x.extend(s[1..].iter().cloned());
            Ok(x)
        }),
        xi1: Arc::new(move |s: &[T]| rigging_minus(lambda, n, &s[1..])),
        xi2: Arc::new(move |s: &[T]| rigging_plus(&hp, lambda, s[0], &s[1..])),
    }
}

/// Two Euclidean half planes `dx² + dy²` and `dx² + 2dy²` glued along `y = 0`
/// by the identity, with `ξ = ∂_y`.
pub fn half_plane_counterexample<T: Scalar>() -> Gluing<T> {
    let metric = |c: f64| {
        tensor::ClosureMetric::new(Chart::Custom, 2, move |x: &[Jet<T>]| {
            Ok(vec![
                vec![x[0].lift_const(T::one()), x[0].lift_const(T::zero())],
                vec![x[0].lift_const(T::zero()), x[0].lift_const(T::lit(c))],
            ])
        })
    };
    let embed = |s: &[Jet<T>]| Ok(vec![s[0].clone(), s[0].lift_const(T::zero())]);
    let xi = |_: &[T]| Ok(vec![T::zero(), T::one()]);
    Gluing {
        g1: Arc::new(metric(1.0)),
        g2: Arc::new(metric(2.0)),
        embed1: Arc::new(embed),
        embed2: Arc::new(embed),
        xi1: Arc::new(xi),
        xi2: Arc::new(xi),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicReport {
    pub samples: usize,
    /// `max |ĝ(ξ, ξ)|`.
    pub null: f64,
    /// `max_α |(∇̂_ξ ξ + F ξ)^α|`.
    pub geodesic: f64,
    /// `max_α |∂_u² X^α|`.
    pub affine: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that `ξ = ∂_u`, pushed into the plus chart, is null and satisfies
/// `∇̂_ξ ξ = −F ξ` with `F = 2 dΩ(ξ)/Ω`, at samples `(u, v, z)` with `u > 0`.
pub fn verify_geodesic_extension<T: Scalar>(
    lambda: T,
    h: &JumpFunction,
    samples: &[Vec<T>],
) -> Result<GeodesicReport> {
    let n = h.dim_n();
    let g = conformally_flat(lambda, n + 1, Chart::FlatPlus);
    let (mut null, mut geo, mut aff) = (0.0f64, 0.0f64, 0.0f64);
    let mut d2 = vec![0u8; n + 1];
    d2[0] = 2;
    for p in samples {
        let x = chart_map(h, Side::Plus, p, 2)?;
        let xp: Vec<T> = x.iter().map(|c| c.value()).collect();
        let xi: Vec<T> = x.iter().map(|c| c.d1(0)).collect();
        let acc: Vec<T> = x.iter().map(|c| c.partial(&d2)).collect();

        let omega = conformal_factor(lambda, &Jet::seed(&xp, 1));
        if omega.value() == T::zero() {
            return Err(Error::ConformalFactorZero(omega.value().to_f64_lossy()));
        }
        let domega = (0..=n).fold(T::zero(), |s, b| s + omega.d1(b) * xi[b]);
        let f = T::lit(2.0) * domega / omega.value();

        let gv = g.values(&xp)?;
        null = null.max(tensor::pairing(&gv, &xi, &xi).to_f64_lossy().abs());
        let ch = christoffel_at(&g, &xp)?;
        for a in 0..=n {
            let mut r = acc[a] + f * xi[a];
            for b in 0..=n {
                for c in 0..=n {
                    r = r + ch.value(a, b, c) * xi[b] * xi[c];
                }
            }
            geo = geo.max(r.to_f64_lossy().abs());
            aff = aff.max(acc[a].to_f64_lossy().abs());
        }
    }
    let tolerance = 1e-9;
    Ok(GeodesicReport {
        samples: samples.len(),
        null,
        geodesic: geo,
        affine: aff,
        tolerance,
        pass: null.max(geo).max(aff) <= tolerance,
    })
}

/// Pullback of `η/Ω²` under the plus chart map at `(u, v, z)`, `u ≥ 0`.
pub fn pullback_plus<T: Scalar>(h: &JumpFunction, lambda: T, point: &[T]) -> Result<Vec<Vec<T>>> {
    let n = h.dim_n();
    let x = chart_map(h, Side::Plus, point, 1)?;
    let xp: Vec<T> = x.iter().map(|c| c.value()).collect();
    let j = jacobian(&x);
    let g = conformally_flat(lambda, n + 1, Chart::FlatPlus).values(&xp)?;
    let mut out = vec![vec![T::zero(); n + 1]; n + 1];
    for mu in 0..=n {
        for nu in 0..=n {
            let mut s = T::zero();
            for a in 0..=n {
                for b in 0..=n {
                    s = s + j[a][mu] * g[a][b] * j[b][nu];
                }
            }
            out[mu][nu] = s;
        }
    }
    Ok(out)
}
