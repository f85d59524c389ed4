//! Jump tensor `[Y]`, shell energy-momentum and shell classification.
//!
//! `[Y]` is stored as an `𝔫 × 𝔫` matrix with slot 0 for `v` and slots
//! `1..𝔫` for `z², …, z^𝔫`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::jump::{JumpFunction, SampleGrid};
use crate::scalar::Scalar;
use crate::special;
use crate::tensor::{self, christoffel_from_jets, JetMatrix, MetricField};

/// Orientation sign of the minus rigging; it points inwards, so `ε = −1`.
pub const EPSILON: i8 = -1;

/// Absolute tolerance for deciding that a shell quantity vanishes.
pub const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellClass {
    NoShell,
    PureGravity,
    NullDust,
    Generic,
}

impl fmt::Display for ShellClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShellClass::NoShell => "NoShell",
            ShellClass::PureGravity => "PureGravity",
            ShellClass::NullDust => "NullDust",
            ShellClass::Generic => "Generic",
        })
    }
}

/// Energy density, flux and pressure at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellScalars<T> {
    pub rho: T,
    pub flux: Vec<T>,
    pub pressure: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellContent<T> {
    pub y_jump: Vec<Vec<T>>,
    pub rho: T,
    pub flux: Vec<T>,
    pub pressure: T,
    pub shell_class: ShellClass,
    pub epsilon: i8,
}

/// Contravariant `τ^{vv}`, `τ^{vI}`, `τ^{IJ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMomentum<T> {
    pub tau_vv: T,
    pub tau_v: Vec<T>,
    pub tau: Vec<Vec<T>>,
}

type LeafMetricFn<T> = dyn Fn(&[Jet<T>]) -> Result<JetMatrix<T>> + Send + Sync;
type OneFormFn<T> = dyn Fn(T, &[T]) -> Result<Vec<T>> + Send + Sync;
type TwoTensorFn<T> = dyn Fn(T, &[T]) -> Result<Vec<Vec<T>>> + Send + Sync;

/// Intrinsic and transverse geometry of the leaves `{v = const}` of both boundaries.
///
/// `σ±` and `Θ±` are evaluated at boundary points `(V, x)` of the respective
/// chart: `V = v` on the minus side and `V = H(v, z)` on the plus side, with
/// `x = z` on both.
#[derive(Clone)]
pub struct LeafGeometry<T> {
    pub dim_n: usize,
    pub h: Arc<LeafMetricFn<T>>,
    pub sigma_minus: Arc<OneFormFn<T>>,
    pub sigma_plus: Arc<OneFormFn<T>>,
    pub theta_minus: Arc<TwoTensorFn<T>>,
    pub theta_plus: Arc<TwoTensorFn<T>>,
    pub epsilon: i8,
}

impl<T: Scalar> fmt::Debug for LeafGeometry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LeafGeometry")
            .field("dim_n", &self.dim_n)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

fn identity_jets<T: Scalar>(z: &[Jet<T>]) -> JetMatrix<T> {
    let m = z.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| z[0].lift_const(if i == j { T::one() } else { T::zero() }))
                .collect()
        })
        .collect()
}

impl<T: Scalar> LeafGeometry<T> {
    /// Minkowski leaves: `h = δ`, `σ± = 0`, `Θ± = 0`.
    pub fn flat(dim_n: usize) -> Self {
        let m = dim_n - 1;
        LeafGeometry {
            dim_n,
            h: Arc::new(|z: &[Jet<T>]| Ok(identity_jets(z))),
            sigma_minus: Arc::new(move |_, _| Ok(vec![T::zero(); m])),
            sigma_plus: Arc::new(move |_, _| Ok(vec![T::zero(); m])),
            theta_minus: Arc::new(move |_, _| Ok(vec![vec![T::zero(); m]; m])),
            theta_plus: Arc::new(move |_, _| Ok(vec![vec![T::zero(); m]; m])),
            epsilon: EPSILON,
        }
    }

    /// Replaces the transverse tensors, keeping the rest.
    pub fn with_theta(mut self, minus: Arc<TwoTensorFn<T>>, plus: Arc<TwoTensorFn<T>>) -> Self {
        self.theta_minus = minus;
        self.theta_plus = plus;
        self
    }

    /// Leaves of two null hyperplanes `U = 0` of `η/Ω²`, with the rigging
    /// `L = ∂_U / g_UV` and the generator `k = ∂_V`, all computed from the
    /// ambient Christoffel symbols.
    pub fn from_ambient(
        minus: Arc<dyn MetricField<T>>,
        plus: Arc<dyn MetricField<T>>,
        leaf_metric: Arc<LeafMetricFn<T>>,
    ) -> Self {
        let dim_n = minus.dim() - 1;
        let sig = |g: Arc<dyn MetricField<T>>| -> Arc<OneFormFn<T>> {
            Arc::new(move |vv, x| Ok(ambient_leaf_tensors(&*g, vv, x)?.0))
        };
        let th = |g: Arc<dyn MetricField<T>>| -> Arc<TwoTensorFn<T>> {
            Arc::new(move |vv, x| Ok(ambient_leaf_tensors(&*g, vv, x)?.1))
        };
        LeafGeometry {
            dim_n,
            h: leaf_metric,
            sigma_minus: sig(minus.clone()),
            sigma_plus: sig(plus.clone()),
            theta_minus: th(minus),
            theta_plus: th(plus),
            epsilon: EPSILON,
        }
    }

    /// `h = δ/Ω_𝒩²` with `Ω_𝒩 = 1 + Λ|z|²/12`, the leaves of the (anti) de Sitter boundaries.
    pub fn conformal_leaf_metric(lambda: T) -> Arc<LeafMetricFn<T>> {
        Arc::new(move |z: &[Jet<T>]| {
            let mut r2 = z[0].lift_const(T::zero());
            for zi in z {
                r2 += &(zi * zi);
            }
            let omega = r2 * (lambda / T::lit(12.0)) + T::one();
            if omega.value() == T::zero() {
                return Err(Error::ConformalFactorZero(0.0));
            }
            let w = omega.powi(-2);
            Ok(identity_jets(z)
                .into_iter()
                .map(|row| row.into_iter().map(|c| &c * &w).collect())
                .collect())
        })
    }
}

/// `(σ(v_I), Θ(v_I, v_J))` at the boundary point `(0, V, x)` of `g`.
fn ambient_leaf_tensors<T: Scalar>(
    g: &dyn MetricField<T>,
    vv: T,
    x: &[T],
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = g.dim();
    let mut p = vec![T::zero(), vv];
    p.extend_from_slice(x);
    let jets = g.eval(&p, 2)?;
    let ch = christoffel_from_jets(&jets)?;
    let gv = tensor::values_of(&jets);
    // L = ∂_U / g_UV: only the U component, a function of position
    let l_u = jets[0][1].recip();
    let mut l = vec![T::zero(); n];
    l[0] = l_u.value();
    let m = n - 2;
    let mut sigma = vec![T::zero(); m];
    let mut theta = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        let ii = i + 2;
        // ∇_I k = Γ^ν_{I V}
        let nabla_k: Vec<T> = (0..n).map(|nu| ch.value(nu, ii, 1)).collect();
        sigma[i] = -tensor::pairing(&gv, &nabla_k, &l);
        // ∇_I L^ν = ∂_I L^ν + Γ^ν_{I β} L^β
        let nabla_l: Vec<T> = (0..n)
            .map(|nu| {
                let partial = if nu == 0 { l_u.d1(ii) } else { T::zero() };
                partial + ch.value(nu, ii, 0) * l[0]
            })
            .collect();
        for j in 0..m {
            let mut vj = vec![T::zero(); n];
            vj[j + 2] = T::one();
            theta[i][j] = tensor::pairing(&gv, &nabla_l, &vj);
        }
    }
    Ok((sigma, theta))
}

fn dv_positive<T: Scalar>(jet: &Jet<T>, v: T, z: &[T]) -> Result<T> {
    let d = jet.d1(0);
    if d > T::zero() {
        Ok(d)
    } else {
        Err(Error::NonPositiveDerivative {
            value: d.to_f64_lossy(),
            v: v.to_f64_lossy(),
            z: z.iter().map(|x| x.to_f64_lossy()).collect(),
        })
    }
}

/// `[Y_ab] = −∂_a∂_b H / ∂_v H` with `z¹ ≡ v`.
pub fn jump_tensor_minkowski<T: Scalar>(h: &JumpFunction, v: T, z: &[T]) -> Result<Vec<Vec<T>>> {
    let j = h.jets(v, z, 2)?;
    let dv = dv_positive(&j, v, z)?;
    let n = h.dim_n();
    Ok((0..n)
        .map(|a| (0..n).map(|b| -j.d2(a, b) / dv).collect())
        .collect())
}

/// General totally geodesic jump tensor with leaf data and the trivial
/// generator identification `h^A = z^A` (so `W_J = v⁺_J`).
pub fn jump_tensor_general<T: Scalar>(
    h: &JumpFunction,
    geom: &LeafGeometry<T>,
    v: T,
    z: &[T],
) -> Result<Vec<Vec<T>>> {
    let n = h.dim_n();
    let m = n - 1;
    let j = h.jets(v, z, 2)?;
    let dv = dv_positive(&j, v, z)?;
    let hv = j.value();

    let zj = Jet::seed(z, 1);
    let hij = (geom.h)(&zj)?;
    let gamma = if m > 0 {
        christoffel_from_jets(&hij).map_err(|e| match e {
            Error::SingularMetric { .. } => Error::SingularLeafMetric,
            other => other,
        })?
    } else {
        tensor::Christoffel { gamma: Vec::new() }
    };

    let sig_p = (geom.sigma_plus)(hv, z)?;
    let sig_m = (geom.sigma_minus)(v, z)?;
    let th_p = (geom.theta_plus)(hv, z)?;
    let th_m = (geom.theta_minus)(v, z)?;

    let grad: Vec<T> = (1..n).map(|a| j.d1(a)).collect();
    let mut y = vec![vec![T::zero(); n]; n];
    y[0][0] = -j.d2(0, 0) / dv;
    for jj in 0..m {
        let val = sig_p[jj] - sig_m[jj] - j.d2(0, jj + 1) / dv;
        y[0][jj + 1] = val;
        y[jj + 1][0] = val;
    }
    let half = T::lit(0.5);
    for i in 0..m {
        for jj in 0..m {
            let mut hess = j.d2(i + 1, jj + 1);
            for k in 0..m {
                hess = hess - gamma.value(k, i, jj) * grad[k];
            }
            let sym_sigma = grad[i] * sig_p[jj] + grad[jj] * sig_p[i];
            let th_plus = half * (th_p[i][jj] + th_p[jj][i]);
            let th_minus = half * (th_m[i][jj] + th_m[jj][i]);
            y[i + 1][jj + 1] = (sym_sigma + th_plus - dv * th_minus - hess) / dv;
        }
    }
    Ok(y)
}

/// `[Ŷ]` across a null hyperplane of (anti) de Sitter: only the spatial block
/// picks up `Λ δ_AB (v ∂_v H − H + z^C ∂_C H) / (6 Ω_𝒩 ∂_v H)`.
pub fn jump_tensor_ads<T: Scalar>(h: &JumpFunction, lambda: T, v: T, z: &[T]) -> Result<Vec<Vec<T>>> {
    let r2 = z.iter().fold(T::zero(), |s, &x| s + x * x);
    let omega_n = T::one() + lambda / T::lit(12.0) * r2;
    if omega_n == T::zero() {
        return Err(Error::ConformalFactorZero(0.0));
    }
    let mut y = jump_tensor_minkowski(h, v, z)?;
    let j = h.jets(v, z, 1)?;
    let dv = j.d1(0);
    let zdh = z
        .iter()
        .enumerate()
        .fold(T::zero(), |s, (a, &x)| s + x * j.d1(a + 1));
    let corr = lambda / (T::lit(6.0) * omega_n * dv) * (v * dv - j.value() + zdh);
    for a in 1..h.dim_n() {
        y[a][a] = y[a][a] + corr;
    }
    Ok(y)
}

/// `τ` from `[Y]` and the leaf metric at `z`.
pub fn energy_momentum<T: Scalar>(
    y: &[Vec<T>],
    geom: &LeafGeometry<T>,
    z: &[T],
) -> Result<EnergyMomentum<T>> {
    let m = z.len();
    let hij = tensor::values_of(&(geom.h)(&Jet::seed(z, 0))?);
    let (h_inv, _) = tensor::invert(&hij).map_err(|_| Error::SingularLeafMetric)?;
    let eps = if geom.epsilon < 0 { -T::one() } else { T::one() };
    let mut tau_vv = T::zero();
    for i in 0..m {
        for jj in 0..m {
            tau_vv = tau_vv + h_inv[i][jj] * y[i + 1][jj + 1];
        }
    }
    let tau_v = (0..m)
        .map(|i| eps * (0..m).fold(T::zero(), |s, jj| s + h_inv[i][jj] * y[0][jj + 1]))
        .collect();
    let tau = (0..m)
        .map(|i| (0..m).map(|jj| -eps * h_inv[i][jj] * y[0][0]).collect())
        .collect();
    Ok(EnergyMomentum {
        tau_vv: -eps * tau_vv,
        tau_v,
        tau,
    })
}

/// `ρ = −Δ_z H/∂_v H`, `j^A = ∂_v∂_A H/∂_v H`, `p = −∂_v²H/∂_v H`.
pub fn shell_scalars<T: Scalar>(h: &JumpFunction, v: T, z: &[T]) -> Result<ShellScalars<T>> {
    let j = h.jets(v, z, 2)?;
    let dv = dv_positive(&j, v, z)?;
    let n = h.dim_n();
    Ok(ShellScalars {
        rho: (1..n).fold(T::zero(), |s, a| s + -j.d2(a, a) / dv),
        flux: (1..n).map(|a| j.d2(0, a) / dv).collect(),
        pressure: -j.d2(0, 0) / dv,
    })
}

fn classify_flags(any_y: bool, any_rho: bool, any_j: bool, any_p: bool) -> ShellClass {
    if !any_y {
        ShellClass::NoShell
    } else if !any_rho && !any_j && !any_p {
        ShellClass::PureGravity
    } else if any_rho && !any_j && !any_p {
        ShellClass::NullDust
    } else {
        ShellClass::Generic
    }
}

fn max_abs<T: Scalar>(y: &[Vec<T>]) -> f64 {
    y.iter()
        .flatten()
        .fold(0.0, |m, x| m.max(x.to_f64_lossy().abs()))
}

/// Full shell content at a point, classified pointwise.
pub fn shell_content<T: Scalar>(h: &JumpFunction, v: T, z: &[T]) -> Result<ShellContent<T>> {
    let y = jump_tensor_minkowski(h, v, z)?;
    let s = shell_scalars(h, v, z)?;
    let big = |x: T| x.to_f64_lossy().abs() > CLASSIFY_TOL;
    let class = classify_flags(
        max_abs(&y) > CLASSIFY_TOL,
        big(s.rho),
        s.flux.iter().any(|&f| big(f)),
        big(s.pressure),
    );
    Ok(ShellContent {
        y_jump: y,
        rho: s.rho,
        flux: s.flux,
        pressure: s.pressure,
        shell_class: class,
        epsilon: EPSILON,
    })
}

/// Grid classification: a quantity counts as present if it exceeds the
/// tolerance anywhere on the grid.
pub fn classify_shell(h: &JumpFunction, grid: &SampleGrid) -> Result<ShellClass> {
    let (mut y, mut rho, mut j, mut p) = (false, false, false, false);
    for (v, z) in &grid.points {
        let c = shell_content(h, *v, z)?;
        y |= max_abs(&c.y_jump) > CLASSIFY_TOL;
        rho |= c.rho.abs() > CLASSIFY_TOL;
        j |= c.flux.iter().any(|f| f.abs() > CLASSIFY_TOL);
        p |= c.pressure.abs() > CLASSIFY_TOL;
    }
    Ok(classify_flags(y, rho, j, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleValues<T> {
    pub dv_h: T,
    pub p: T,
    pub rho: T,
    pub j_r: T,
}

/// Closed forms of `∂_v H`, `p`, `ρ`, `j^r` for the example family.
pub fn example_closed_forms<T: Scalar>(a: T, b: T, c: T, h0: T, v: T, r: T) -> Result<ExampleValues<T>> {
    crate::jump::check_example_constraints(
        a.to_f64_lossy(),
        b.to_f64_lossy(),
        c.to_f64_lossy(),
        h0.to_f64_lossy(),
    )?;
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    let two = T::lit(2.0);
    let gauss = (-v * v).exp();
    let sech2 = |x: T| {
        let c = x.cosh();
        (c * c).recip()
    };
    let dv_h = a - b * v.tanh() + two * c * v * r.tanh() * gauss;
    let p = (b * sech2(v) + two * c * r.tanh() * gauss * (two * v * v - T::one())) / dv_h;
    let rho = (c * gauss * sech2(r) * (r.recip() - two * r.tanh())
        + h0 * (special::erf(r)
            + r * (-r * r).exp() / T::PI().sqrt() * (T::lit(2.5) - r * r)))
        / dv_h;
    let j_r = two * c * v * gauss * sech2(r) / dv_h;
    Ok(ExampleValues { dv_h, p, rho, j_r })
}
