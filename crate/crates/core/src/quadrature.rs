//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<T> {
    pub value: Vec<T>,
    /// Sum over intervals of the largest component-wise Kronrod/Gauss gap.
    pub error: T,
    pub evaluations: usize,
}

struct Piece<T> {
    a: T,
    b: T,
    value: Vec<T>,
    error: T,
}

fn gk15<T, F>(f: &mut F, a: T, b: T, dim: usize) -> Result<Piece<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<Vec<T>>,
{
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut k = vec![T::zero(); dim];
    let mut g = vec![T::zero(); dim];
    let mut add = |x: T, wk: T, wg: Option<T>, k: &mut Vec<T>, g: &mut Vec<T>| -> Result<()> {
        let y = f(x)?;
        for i in 0..dim {
            k[i] = k[i] + wk * y[i];
            if let Some(w) = wg {
                g[i] = g[i] + w * y[i];
            }
        }
        Ok(())
    };
    add(mid, T::lit(WGK[7]), Some(T::lit(WG[3])), &mut k, &mut g)?;
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let wg = if j % 2 == 1 { Some(T::lit(WG[j / 2])) } else { None };
        add(mid - dx, T::lit(WGK[j]), wg, &mut k, &mut g)?;
        add(mid + dx, T::lit(WGK[j]), wg, &mut k, &mut g)?;
    }
    let mut err = T::zero();
    for i in 0..dim {
        k[i] = k[i] * half;
        g[i] = g[i] * half;
        err = err.max((k[i] - g[i]).abs());
    }
    Ok(Piece { a, b, value: k, error: err })
}

/// `∫ f` over `[breaks[0], breaks[last]]`, with the given interior breakpoints
/// as initial subdivision, to absolute tolerance `tol` on every component.
pub fn integrate<T, F>(mut f: F, breaks: &[T], dim: usize, tol: T) -> Result<Quadrature<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<Vec<T>>,
{
    let mut pieces = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            pieces.push(gk15(&mut f, w[0], w[1], dim)?);
        }
    }
    let mut evaluations = 15 * pieces.len();
    loop {
        let total: T = pieces.iter().fold(T::zero(), |s, p| s + p.error);
        if total <= tol {
            break;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = &pieces[worst];
        let mid = (p.a + p.b) * T::lit(0.5);
        let too_narrow = mid <= p.a || mid >= p.b;
        if pieces.len() >= MAX_INTERVALS || too_narrow {
            return Err(Error::QuadratureFailure {
                tolerance: tol.to_f64_lossy(),
                estimate: total.to_f64_lossy(),
            });
        }
        let (a, b) = (p.a, p.b);
        let left = gk15(&mut f, a, mid, dim)?;
        let right = gk15(&mut f, mid, b, dim)?;
        evaluations += 30;
        pieces[worst] = left;
        pieces.push(right);
    }
    let mut value = vec![T::zero(); dim];
    let mut error = T::zero();
    // sum in interval order for reproducibility
    pieces.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(std::cmp::Ordering::Equal));
    for p in &pieces {
        for i in 0..dim {
            value[i] = value[i] + p.value[i];
        }
        error = error + p.error;
    }
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<T, F>(mut f: F, breaks: &[T], tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    Ok(integrate(|x| Ok(vec![f(x)]), breaks, 1, tol)?.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let v = integrate_scalar(|x: f64| x.powi(10) - 3.0 * x * x, &[-1.0, 2.0], 1e-13).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 9.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_with_breakpoints() {
        let eps = 1e-6;
        let f = |x: f64| (-(x / eps).powi(2)).exp() / (eps * std::f64::consts::PI.sqrt());
        let v = integrate_scalar(f, &[-1.0, -10.0 * eps, 10.0 * eps, 1.0], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn vector_components() {
        let q = integrate(|x: f64| Ok(vec![x.sin(), x.cos()]), &[0.0, std::f64::consts::PI], 2, 1e-13)
            .unwrap();
        assert!((q.value[0] - 2.0).abs() < 1e-13);
        assert!(q.value[1].abs() < 1e-13);
    }

    #[test]
    fn singular_integrand_fails() {
        let r = integrate_scalar(|x: f64| 1.0 / (x * x), &[-1.0, 0.3], 1e-10);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
