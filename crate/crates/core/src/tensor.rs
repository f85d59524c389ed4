//! Chart-based tensor algebra over jets: Christoffel symbols, curvature,
//! constant-curvature residuals and signature counts.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Square matrix of jets, row-major.
pub type JetMatrix<T> = Vec<Vec<Jet<T>>>;

/// Coordinate chart a metric is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `(u, v, z^A)`, adapted to the shell at `u = 0`.
    NullCoords,
    /// `(U, V, x^A)` on the minus region.
    FlatMinus,
    /// `(U, V, x^A)` on the plus region.
    FlatPlus,
    /// Anything else (test metrics).
    Custom,
}

/// A metric given by its component jets on a chart.
pub trait MetricField<T: Scalar>: Send + Sync {
    fn chart(&self) -> Chart;

    /// Spacetime dimension.
    fn dim(&self) -> usize;

    /// Component jets at `point` to the requested order.
    fn eval(&self, point: &[T], order: usize) -> Result<JetMatrix<T>>;

    /// Plain component values at `point`.
    fn values(&self, point: &[T]) -> Result<Vec<Vec<T>>> {
        Ok(values_of(&self.eval(point, 0)?))
    }
}

type ComponentFn<T> = dyn Fn(&[Jet<T>]) -> Result<JetMatrix<T>> + Send + Sync;

/// Metric defined by a closure from coordinate jets to component jets.
pub struct ClosureMetric<T> {
    chart: Chart,
    dim: usize,
    f: Box<ComponentFn<T>>,
}

impl<T: Scalar> ClosureMetric<T> {
    pub fn new<F>(chart: Chart, dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet<T>]) -> Result<JetMatrix<T>> + Send + Sync + 'static,
    {
        ClosureMetric {
            chart,
            dim,
            f: Box::new(f),
        }
    }
}

impl<T: Scalar> fmt::Debug for ClosureMetric<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureMetric")
            .field("chart", &self.chart)
            .field("dim", &self.dim)
            .finish()
    }
}

impl<T: Scalar> MetricField<T> for ClosureMetric<T> {
    fn chart(&self) -> Chart {
        self.chart
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, point: &[T], order: usize) -> Result<JetMatrix<T>> {
        if point.len() != self.dim {
            return Err(Error::WrongDimension {
                expected: self.dim,
                found: point.len(),
            });
        }
        let x = Jet::seed(point, order);
        (self.f)(&x)
    }
}

/// `-2 dU dV + δ_AB dx^A dx^B` in coordinates `(U, V, x^A)`, as plain values.
pub fn flat_null_matrix<T: Scalar>(dim: usize) -> Vec<Vec<T>> {
    let mut g = vec![vec![T::zero(); dim]; dim];
    g[0][1] = -T::one();
    g[1][0] = -T::one();
    for (a, row) in g.iter_mut().enumerate().skip(2) {
        row[a] = T::one();
    }
    g
}

/// Conformal factor `Ω = 1 + Λ/12 (|x|² − 2UV)` as a jet of the flat coordinates.
pub fn conformal_factor<T: Scalar>(lambda: T, x: &[Jet<T>]) -> Jet<T> {
    let mut q = &x[0] * &x[1] * T::lit(-2.0);
    for xa in &x[2..] {
        q += &(xa * xa);
    }
    q * (lambda / T::lit(12.0)) + T::one()
}

/// `η / Ω²`: flat for `Λ = 0`, de Sitter (`Λ > 0`) or anti de Sitter (`Λ < 0`)
/// with sectional curvature `Λ/3`.
pub fn conformally_flat<T: Scalar>(lambda: T, dim: usize, chart: Chart) -> ClosureMetric<T> {
    ClosureMetric::new(chart, dim, move |x| {
        let eta = flat_null_matrix::<T>(dim);
        let omega = conformal_factor(lambda, x);
        if omega.value() == T::zero() {
            return Err(Error::ConformalFactorZero(0.0));
        }
        let w = omega.powi(-2);
        Ok(eta
            .iter()
            .map(|row| row.iter().map(|&c| &w * c).collect())
            .collect())
    })
}

pub fn values_of<T: Scalar>(m: &JetMatrix<T>) -> Vec<Vec<T>> {
    m.iter()
        .map(|row| row.iter().map(Jet::value).collect())
        .collect()
}

fn norm1<T: Scalar>(a: &[Vec<T>]) -> T {
    let n = a.len();
    (0..n)
        .map(|j| a.iter().fold(T::zero(), |s, row| s + row[j].abs()))
        .fold(T::zero(), T::max)
}

/// Inverse by partially pivoted LU, with the 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
///
/// Fails with [`Error::SingularMetric`] when a pivot vanishes or the
/// condition number exceeds `1e12`.
pub fn invert<T: Scalar>(a: &[Vec<T>]) -> Result<(Vec<Vec<T>>, T)> {
    let n = a.len();
    let mut lu: Vec<Vec<T>> = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| {
                lu[i][k]
                    .abs()
                    .partial_cmp(&lu[j][k].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if lu[p][k] == T::zero() || !lu[p][k].is_finite() {
            return Err(Error::SingularMetric {
                condition: f64::INFINITY,
            });
        }
        lu.swap(k, p);
        perm.swap(k, p);
        for i in k + 1..n {
            let f = lu[i][k] / lu[k][k];
            lu[i][k] = f;
            for j in k + 1..n {
                let t = lu[k][j];
                lu[i][j] = lu[i][j] - f * t;
            }
        }
    }
    let mut inv = vec![vec![T::zero(); n]; n];
    for col in 0..n {
        // solve L y = P e_col, then U x = y
        let mut x: Vec<T> = (0..n)
            .map(|i| if perm[i] == col { T::one() } else { T::zero() })
            .collect();
        for i in 0..n {
            for j in 0..i {
                let t = lu[i][j] * x[j];
                x[i] = x[i] - t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = lu[i][j] * x[j];
                x[i] = x[i] - t;
            }
            x[i] = x[i] / lu[i][i];
        }
        for i in 0..n {
            inv[i][col] = x[i];
        }
    }
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > T::lit(1e12) {
        return Err(Error::SingularMetric {
            condition: cond.to_f64_lossy(),
        });
    }
    Ok((inv, cond))
}

/// Inverse of a jet matrix, exact to the jet order.
pub fn invert_jets<T: Scalar>(g: &JetMatrix<T>) -> Result<JetMatrix<T>> {
    let n = g.len();
    let (inv0, _) = invert(&values_of(g))?;
    let proto = &g[0][0];
    let order = g.iter().flatten().map(Jet::order).min().unwrap_or(0);
    let lift = |m: &[Vec<T>]| -> JetMatrix<T> {
        m.iter()
            .map(|row| row.iter().map(|&c| proto.truncate(order).lift_const(c)).collect())
            .collect()
    };
    // g = g0 (1 + g0⁻¹ N) with N nilpotent: g⁻¹ = Σ_k (−g0⁻¹N)^k g0⁻¹
    let inv0j = lift(&inv0);
    let nil: JetMatrix<T> = g
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| {
                    let c = c.truncate(order);
                    let v = c.value();
                    c - v
                })
                .collect()
        })
        .collect();
    let step = mat_mul(&inv0j, &nil)
        .into_iter()
        .map(|row| row.into_iter().map(|c| -c).collect())
        .collect::<JetMatrix<T>>();
    let mut term = inv0j.clone();
    let mut acc = inv0j;
    for _ in 0..order {
        term = mat_mul(&step, &term);
        for i in 0..n {
            for j in 0..n {
                acc[i][j] += &term[i][j];
            }
        }
    }
    Ok(acc)
}

fn mat_mul<T: Scalar>(a: &JetMatrix<T>, b: &JetMatrix<T>) -> JetMatrix<T> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = &a[i][0] * &b[0][j];
                    for k in 1..n {
                        s += &(&a[i][k] * &b[k][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `g_μν v^ν`.
pub fn lower_index<T: Scalar>(g: &[Vec<T>], v: &[T]) -> Vec<T> {
    g.iter()
        .map(|row| row.iter().zip(v).fold(T::zero(), |s, (&a, &b)| s + a * b))
        .collect()
}

/// `g^μν w_ν` for an already inverted metric.
pub fn raise_index<T: Scalar>(g_inv: &[Vec<T>], w: &[T]) -> Vec<T> {
    lower_index(g_inv, w)
}

/// `g(a, b)`.
pub fn pairing<T: Scalar>(g: &[Vec<T>], a: &[T], b: &[T]) -> T {
    lower_index(g, b)
        .iter()
        .zip(a)
        .fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Christoffel symbols of the second kind, `gamma[ρ][μ][ν]`.
#[derive(Debug, Clone)]
pub struct Christoffel<T> {
    pub gamma: Vec<Vec<Vec<Jet<T>>>>,
}

impl<T: Scalar> Christoffel<T> {
    pub fn value(&self, rho: usize, mu: usize, nu: usize) -> T {
        self.gamma[rho][mu][nu].value()
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// Christoffel symbols from component jets of order `k ≥ 1`; the result has order `k − 1`.
pub fn christoffel_from_jets<T: Scalar>(g: &JetMatrix<T>) -> Result<Christoffel<T>> {
    let n = g.len();
    let order = g.iter().flatten().map(Jet::order).min().unwrap_or(0);
    if order < 1 {
        return Err(Error::InsufficientOrder {
            required: 1,
            available: order,
        });
    }
    let g_inv = invert_jets(g)?;
    let g_inv: JetMatrix<T> = g_inv
        .iter()
        .map(|row| row.iter().map(|c| c.truncate(order - 1)).collect())
        .collect();
    // dg[s][m][n] = ∂_s g_mn
    let dg: Vec<Vec<Vec<Jet<T>>>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|m| (0..n).map(|k| g[m][k].derivative(s)).collect())
                .collect()
        })
        .collect();
    // first kind: Γ_σμν = ½(∂_μ g_σν + ∂_ν g_σμ − ∂_σ g_μν)
    let half = T::lit(0.5);
    let mut first = vec![vec![Vec::with_capacity(n); n]; n];
    for s in 0..n {
        for m in 0..n {
            for k in 0..n {
                let t = &(&dg[m][s][k] + &dg[k][s][m]) - &dg[s][m][k];
                first[s][m].push(t * half);
            }
        }
    }
    let mut gamma = vec![vec![Vec::with_capacity(n); n]; n];
    for r in 0..n {
        for m in 0..n {
            for k in 0..n {
                let mut acc = &g_inv[r][0] * &first[0][m][k];
                for s in 1..n {
                    acc += &(&g_inv[r][s] * &first[s][m][k]);
                }
                gamma[r][m].push(acc);
            }
        }
    }
    Ok(Christoffel { gamma })
}

/// Christoffel symbols at `point`, carried as first-order jets.
pub fn christoffel_at<T: Scalar, G: MetricField<T> + ?Sized>(
    g: &G,
    point: &[T],
) -> Result<Christoffel<T>> {
    christoffel_from_jets(&g.eval(point, 2)?)
}

/// Fully covariant rank-4 array.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank4<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Rank4<T> {
    pub fn zeros(n: usize) -> Self {
        Rank4 {
            n,
            data: vec![T::zero(); n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: T) {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d] = v;
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

/// `R_ρσμν` from component jets of order `≥ 2`, with
/// `R^ρ_σμν = ∂_μ Γ^ρ_νσ − ∂_ν Γ^ρ_μσ + Γ^ρ_μλ Γ^λ_νσ − Γ^ρ_νλ Γ^λ_μσ`.
pub fn riemann_from_jets<T: Scalar>(g: &JetMatrix<T>) -> Result<Rank4<T>> {
    let order = g.iter().flatten().map(Jet::order).min().unwrap_or(0);
    if order < 2 {
        return Err(Error::InsufficientOrder {
            required: 2,
            available: order,
        });
    }
    let n = g.len();
    let ch = christoffel_from_jets(g)?;
    let gv: Vec<Vec<T>> = values_of(g);
    let gam = |r: usize, a: usize, b: usize| ch.gamma[r][a][b].value();
    let dgam = |r: usize, a: usize, b: usize, d: usize| ch.gamma[r][a][b].d1(d);
    let mut up = Rank4::zeros(n);
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for k in 0..n {
                    let mut v = dgam(r, k, s, m) - dgam(r, m, s, k);
                    for l in 0..n {
                        v = v + gam(r, m, l) * gam(l, k, s) - gam(r, k, l) * gam(l, m, s);
                    }
                    up.set(r, s, m, k, v);
                }
            }
        }
    }
    let mut down = Rank4::zeros(n);
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for k in 0..n {
                    let v = (0..n).fold(T::zero(), |acc, a| acc + gv[r][a] * up.get(a, s, m, k));
                    down.set(r, s, m, k, v);
                }
            }
        }
    }
    Ok(down)
}

pub fn riemann_at<T: Scalar, G: MetricField<T> + ?Sized>(g: &G, point: &[T]) -> Result<Rank4<T>> {
    riemann_from_jets(&g.eval(point, 2)?)
}

fn cc_residual<T: Scalar>(r: &Rank4<T>, g: &[Vec<T>], k: T) -> T {
    let n = r.dim();
    let mut worst = T::zero();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let model = k * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                    worst = worst.max((r.get(a, b, c, d) - model).abs());
                }
            }
        }
    }
    worst
}

/// `max |R_ρσμν − K (g_ρμ g_σν − g_ρν g_σμ)|`.
pub fn constant_curvature_residual<T: Scalar, G: MetricField<T> + ?Sized>(
    g: &G,
    point: &[T],
    k: T,
) -> Result<T> {
    let jets = g.eval(point, 2)?;
    let r = riemann_from_jets(&jets)?;
    Ok(cc_residual(&r, &values_of(&jets), k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport<T> {
    pub point: Vec<T>,
    pub max_abs_riemann: T,
    pub constant_curvature_residual: T,
    pub k_used: T,
}

pub fn curvature_report<T: Scalar, G: MetricField<T> + ?Sized>(
    g: &G,
    point: &[T],
    k: T,
) -> Result<CurvatureReport<T>> {
    let jets = g.eval(point, 2)?;
    let r = riemann_from_jets(&jets)?;
    Ok(CurvatureReport {
        point: point.to_vec(),
        max_abs_riemann: r.max_abs(),
        constant_curvature_residual: cc_residual(&r, &values_of(&jets), k),
        k_used: k,
    })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Scalar>(m: &[Vec<T>]) -> Vec<T> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    for _sweep in 0..100 {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |s, (i, j)| s + a[i][j] * a[i][j]);
        let diag = (0..n).fold(T::zero(), |s, i| s + a[i][i] * a[i][i]);
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// `(n_minus, n_zero, n_plus)`; an eigenvalue counts as zero when
/// `|λ| ≤ 1e-10 · max|λ|`.
pub fn signature_of<T: Scalar>(m: &[Vec<T>]) -> (usize, usize, usize) {
    let ev = symmetric_eigenvalues(m);
    let scale = ev.iter().fold(T::zero(), |s, x| s.max(x.abs()));
    let tol = T::lit(1e-10) * scale;
    ev.iter().fold((0, 0, 0), |(neg, zero, pos), &l| {
        if l.abs() <= tol {
            (neg, zero + 1, pos)
        } else if l < T::zero() {
            (neg + 1, zero, pos)
        } else {
            (neg, zero, pos + 1)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(dim: usize) -> ClosureMetric<f64> {
        conformally_flat(0.0, dim, Chart::NullCoords)
    }

    #[test]
    fn flat_has_vanishing_connection_and_curvature() {
        let g = flat(4);
        let p = [0.3, -0.2, 0.5, 1.0];
        let ch = christoffel_at(&g, &p).unwrap();
        for r in 0..4 {
            for m in 0..4 {
                for k in 0..4 {
                    assert_eq!(ch.value(r, m, k), 0.0);
                }
            }
        }
        assert_eq!(riemann_at(&g, &p).unwrap().max_abs(), 0.0);
        assert_eq!(constant_curvature_residual(&g, &p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn flat_with_wrong_curvature_is_detected() {
        let g = flat(4);
        let res = constant_curvature_residual(&g, &[0.1, 0.2, 0.3, 0.4], 1.0).unwrap();
        // |g_00 g_11 - g_01 g_10| = 1 and |g_22 g_33| = 1
        assert!((res - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_christoffel() {
        // dθ² + sin²θ dφ² at θ = π/4
        let g = ClosureMetric::new(Chart::Custom, 2, |x: &[Jet<f64>]| {
            let s = x[0].sin();
            Ok(vec![
                vec![x[0].lift_const(1.0), x[0].lift_const(0.0)],
                vec![x[0].lift_const(0.0), &s * &s],
            ])
        });
        let ch = christoffel_at(&g, &[std::f64::consts::FRAC_PI_4, 0.0]).unwrap();
        assert!((ch.value(0, 1, 1) + 0.5).abs() < 1e-15);
        assert!((ch.value(1, 0, 1) - 1.0).abs() < 1e-15);
        // unit sphere: K = 1
        let res = constant_curvature_residual(&g, &[0.7, 0.0], 1.0).unwrap();
        assert!(res < 1e-14);
    }

    #[test]
    fn de_sitter_and_anti_de_sitter() {
        for (lambda, k) in [(3.0, 1.0), (-3.0, -1.0)] {
            let g = conformally_flat(lambda, 4, Chart::FlatPlus);
            let p = [0.2, -0.1, 0.3, 0.15];
            assert!(constant_curvature_residual(&g, &p, k).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn conformal_christoffel_formula() {
        // Γ^ρ_μν = −(δ^ρ_μ ∂_ν ln Ω + δ^ρ_ν ∂_μ ln Ω − g_μν g^ρσ ∂_σ ln Ω)
        let lambda = 1.7;
        let g = conformally_flat(lambda, 4, Chart::FlatPlus);
        let p = [0.4, 0.1, -0.3, 0.25];
        let ch = christoffel_at(&g, &p).unwrap();
        let x = Jet::seed(&p, 1);
        let dlog = conformal_factor(lambda, &x).ln().gradient();
        let eta = flat_null_matrix::<f64>(4);
        let (eta_inv, _) = invert(&eta).unwrap();
        for r in 0..4 {
            for m in 0..4 {
                for k in 0..4 {
                    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let up: f64 = (0..4).map(|s| eta_inv[r][s] * dlog[s]).sum();
                    let expect = -(delta(r, m) * dlog[k] + delta(r, k) * dlog[m] - eta[m][k] * up);
                    assert!((ch.value(r, m, k) - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn insufficient_order_and_singular() {
        let g = flat(3);
        let jets = g.eval(&[0.0, 0.0, 0.0], 1).unwrap();
        assert!(matches!(
            riemann_from_jets(&jets),
            Err(Error::InsufficientOrder { required: 2, available: 1 })
        ));
        let singular = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(invert(&singular), Err(Error::SingularMetric { .. })));
        let ill = vec![vec![1.0, 0.0], vec![0.0, 1e-14]];
        assert!(matches!(invert(&ill), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn jet_inverse_matches_derivative_of_inverse() {
        let g = conformally_flat(2.0f64, 3, Chart::FlatPlus);
        let p = [0.3, 0.2, 0.1];
        let jets = g.eval(&p, 3).unwrap();
        let inv = invert_jets(&jets).unwrap();
        // g g⁻¹ = 1 to all orders
        let prod = mat_mul(&jets, &inv);
        for (i, row) in prod.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((c.value() - id).abs() < 1e-14);
                assert!(c.coeffs()[1..].iter().all(|x: &f64| x.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn signatures() {
        let m = vec![
            vec![-1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(signature_of(&m), (1, 0, 3));
        assert_eq!(signature_of(&flat_null_matrix::<f64>(4)), (1, 0, 3));
        let degenerate = vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        assert_eq!(signature_of(&degenerate), (0, 1, 2));
    }
}
