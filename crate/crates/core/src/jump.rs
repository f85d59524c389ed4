//! Jump functions `H(v, z^A)`: parsed expressions, builtin families, and
//! reconstruction from a pressure profile.
//!
//! Jets of `H` are taken in the variables `(v, z², …, z^𝔫)`, variable 0 being `v`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, ParseOptions, Point};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Closed-form families of jump functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// `H = a v + b_J z^J + c`: no shell.
    Linear { a: f64, b: Vec<f64>, c: f64 },
    /// `H = a v + 𝓗(z)`: impulsive wave (pure gravity or null dust).
    Wave { a: f64, profile: Expr },
    /// `H = a v − b log cosh v − c tanh(r) e^{−v²} − (𝓗₀ r²/4) erf(r)`, with `𝔫 = 3`.
    Example { a: f64, b: f64, c: f64, h0: f64 },
}

#[derive(Debug, Clone)]
struct PressureNode {
    v: f64,
    z: Vec<f64>,
    h: Jet<f64>,
}

#[derive(Debug, Clone)]
enum Body {
    Expr(Expr),
    Builtin(Builtin),
    Sampled(Vec<PressureNode>),
}

/// The step function `H(v, z)` identifying the two boundaries.
#[derive(Debug, Clone)]
pub struct JumpFunction {
    dim_n: usize,
    body: Body,
}

fn check_dim(dim_n: usize) -> Result<()> {
    if dim_n < 2 {
        return Err(Error::ConstraintViolation("dim_n >= 2".into()));
    }
    Ok(())
}

/// Parses an expression in `v`, `z2..zN` and `r`.
pub fn parse_jump_expression(text: &str, dim_n: usize) -> Result<JumpFunction> {
    check_dim(dim_n)?;
    let e = parse(text, ParseOptions::new(dim_n))?;
    Ok(JumpFunction {
        dim_n,
        body: Body::Expr(e),
    })
}

/// Checks `b ≥ 2c ≥ 0`, `𝓗₀ ≥ c`, `a > b + c`.
pub fn check_example_constraints(a: f64, b: f64, c: f64, h0: f64) -> Result<()> {
    if !(c >= 0.0) {
        return Err(Error::ConstraintViolation("2c >= 0".into()));
    }
    if !(b >= 2.0 * c) {
        return Err(Error::ConstraintViolation("b >= 2c".into()));
    }
    if !(h0 >= c) {
        return Err(Error::ConstraintViolation("H0 >= c".into()));
    }
    if !(a > b + c) {
        return Err(Error::ConstraintViolation("a > b + c".into()));
    }
    Ok(())
}

pub fn make_builtin(family: Builtin, dim_n: usize) -> Result<JumpFunction> {
    check_dim(dim_n)?;
    match &family {
        Builtin::Linear { a, b, .. } => {
            if !(*a > 0.0) {
                return Err(Error::ConstraintViolation("a > 0".into()));
            }
            if b.len() != dim_n - 1 {
                return Err(Error::WrongDimension {
                    expected: dim_n - 1,
                    found: b.len(),
                });
            }
        }
        Builtin::Wave { a, profile } => {
            if !(*a > 0.0) {
                return Err(Error::ConstraintViolation("a > 0".into()));
            }
            if profile.uses_v() {
                return Err(Error::ConstraintViolation("wave profile independent of v".into()));
            }
        }
        Builtin::Example { a, b, c, h0 } => {
            if dim_n != 3 {
                return Err(Error::WrongDimension {
                    expected: 3,
                    found: dim_n,
                });
            }
            check_example_constraints(*a, *b, *c, *h0)?;
        }
    }
    Ok(JumpFunction {
        dim_n,
        body: Body::Builtin(family),
    })
}

fn radius<T: Scalar>(v: &Jet<T>, z: &[Jet<T>]) -> Result<Jet<T>> {
    let mut r2 = v.lift_const(T::zero());
    for zi in z {
        r2 += &(zi * zi);
    }
    if r2.value() <= T::zero() && v.order() > 0 {
        return Err(Error::Domain("r is not differentiable at r = 0".into()));
    }
    Ok(r2.sqrt())
}

impl JumpFunction {
    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn builtin(&self) -> Option<&Builtin> {
        match &self.body {
            Body::Builtin(b) => Some(b),
            _ => None,
        }
    }

    pub fn expression(&self) -> Option<&Expr> {
        match &self.body {
            Body::Expr(e) => Some(e),
            _ => None,
        }
    }

    /// `H` evaluated on arbitrary jets of `v` and `z²..z^𝔫` sharing one layout.
    pub fn eval_on<T: Scalar>(&self, v: &Jet<T>, z: &[Jet<T>]) -> Result<Jet<T>> {
        if z.len() != self.dim_n - 1 {
            return Err(Error::WrongDimension {
                expected: self.dim_n - 1,
                found: z.len(),
            });
        }
        match &self.body {
            Body::Expr(e) => e.eval(&Point { v, z }),
            Body::Builtin(Builtin::Linear { a, b, c }) => {
                let mut h = v * T::lit(*a) + T::lit(*c);
                for (bj, zj) in b.iter().zip(z) {
                    h += &(zj * T::lit(*bj));
                }
                Ok(h)
            }
            Body::Builtin(Builtin::Wave { a, profile }) => {
                Ok(v * T::lit(*a) + profile.eval(&Point { v, z })?)
            }
            Body::Builtin(Builtin::Example { a, b, c, h0 }) => {
                let mut h = v * T::lit(*a) - v.cosh().ln() * T::lit(*b);
                if *c != 0.0 || *h0 != 0.0 {
                    let r = radius(v, z)?;
                    let gauss = (-(v * v)).exp();
                    h = h - r.tanh() * gauss * T::lit(*c);
                    h = h - (&r * &r) * r.erf() * T::lit(*h0 / 4.0);
                }
                Ok(h)
            }
            Body::Sampled(nodes) => {
                let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
                let node = nodes
                    .iter()
                    .find(|n| {
                        near(n.v, v.value().to_f64_lossy())
                            && n.z.iter().zip(z).all(|(a, b)| near(*a, b.value().to_f64_lossy()))
                    })
                    .ok_or_else(|| {
                        Error::Domain(format!(
                            "reconstructed jump function is only known on its grid, not at v = {}",
                            v.value()
                        ))
                    })?;
                let stored = Jet::from_coeffs(
                    node.h.nvars(),
                    node.h.order(),
                    node.h.coeffs().iter().map(|&c| T::lit(c)).collect(),
                );
                let mut inner = vec![v.clone()];
                inner.extend(z.iter().cloned());
                Ok(stored.compose(&inner))
            }
        }
    }

    /// Jet of `H` at `(v, z)` in the variables `(v, z², …, z^𝔫)`.
    pub fn jets<T: Scalar>(&self, v: T, z: &[T], order: usize) -> Result<Jet<T>> {
        if z.len() != self.dim_n - 1 {
            return Err(Error::WrongDimension {
                expected: self.dim_n - 1,
                found: z.len(),
            });
        }
        let mut point = vec![v];
        point.extend_from_slice(z);
        let seeds = Jet::seed(&point, order);
        self.eval_on(&seeds[0], &seeds[1..])
    }

    /// `∂_v H`, failing with [`Error::NonPositiveDerivative`] unless positive.
    pub fn dv_checked<T: Scalar>(&self, jet: &Jet<T>, v: T, z: &[T]) -> Result<T> {
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

    /// Structural wave-type test: `H = a v + 𝓗(z)` by construction.
    pub fn is_wave_type(&self) -> Option<bool> {
        match &self.body {
            Body::Builtin(Builtin::Linear { .. }) | Body::Builtin(Builtin::Wave { .. }) => Some(true),
            Body::Builtin(Builtin::Example { b, c, .. }) => Some(*b == 0.0 && *c == 0.0),
            Body::Expr(e) if !e.uses_v() => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for JumpFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Expr(e) => write!(f, "{e}"),
            Body::Builtin(Builtin::Linear { a, b, c }) => {
                write!(f, "{a:?}*v")?;
                for (j, bj) in b.iter().enumerate() {
                    write!(f, " + {bj:?}*z{}", j + 2)?;
                }
                write!(f, " + {c:?}")
            }
            Body::Builtin(Builtin::Wave { a, profile }) => write!(f, "{a:?}*v + ({profile})"),
            Body::Builtin(Builtin::Example { a, b, c, h0 }) => write!(
                f,
                "{a:?}*v - {b:?}*log(cosh(v)) - {c:?}*tanh(r)*exp(-v^2) - ({h0:?}*r^2/4)*erf(r)"
            ),
            Body::Sampled(nodes) => write!(f, "<reconstructed on {} nodes>", nodes.len()),
        }
    }
}

/// `lo:hi:step`, inclusive of both ends when `hi − lo` is a multiple of `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::ConstraintViolation("finite range bounds".into()));
        }
        if !(step > 0.0) {
            return Err(Error::ConstraintViolation("step > 0".into()));
        }
        if hi < lo {
            return Err(Error::ConstraintViolation("lo <= hi".into()));
        }
        Ok(GridRange { lo, hi, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        // decimal steps like 0.1: count in units of 1/step so that grid
        // values are the nearest doubles to the intended decimals
        let inv = self.step.recip();
        let lo_units = self.lo * inv;
        if (inv - inv.round()).abs() < 1e-9 && (lo_units - lo_units.round()).abs() < 1e-6 {
            let (m, d) = (lo_units.round(), inv.round());
            return (0..=n).map(|k| (m + k as f64) / d).collect();
        }
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl FromStr for GridRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::ConstraintViolation(format!("range `{s}` must read lo:hi:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        GridRange::new(nums[0], nums[1], nums[2])
    }
}

/// A list of `(v, z)` sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub dim_n: usize,
    pub points: Vec<(f64, Vec<f64>)>,
}

impl SampleGrid {
    /// Tensor grid over `v` and the radius, with `z = r e₂`.
    pub fn v_r(v: &GridRange, r: &GridRange, dim_n: usize) -> Self {
        let mut points = Vec::new();
        for &vv in &v.values() {
            for &rr in &r.values() {
                let mut z = vec![0.0; dim_n - 1];
                z[0] = rr;
                points.push((vv, z));
            }
        }
        SampleGrid { dim_n, points }
    }

    pub fn from_points(dim_n: usize, points: Vec<(f64, Vec<f64>)>) -> Self {
        SampleGrid { dim_n, points }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub min_dv_h: f64,
    pub at: Option<(f64, Vec<f64>)>,
    pub points_checked: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Minimum of `∂_v H` over the grid; passes iff it is strictly positive everywhere.
pub fn check_admissibility(h: &JumpFunction, grid: &SampleGrid) -> AdmissibilityReport {
    let mut min = f64::INFINITY;
    let mut at = None;
    let mut failures = Vec::new();
    for (v, z) in &grid.points {
        match h.jets(*v, z, 1) {
            Ok(j) => {
                let d = j.d1(0);
                if d < min {
                    min = d;
                    at = Some((*v, z.clone()));
                }
            }
            Err(e) => failures.push(format!("v = {v}, z = {z:?}: {e}")),
        }
    }
    let pass = failures.is_empty() && min > 0.0 && !grid.points.is_empty();
    AdmissibilityReport {
        min_dv_h: min,
        at,
        points_checked: grid.points.len(),
        failures,
        pass,
    }
}

/// Pressure `p(v, z)`, initial slope `β(z) = ∂_v H(v₀, z)` and offset `𝓗(z)`.
#[derive(Debug, Clone)]
pub struct PressureProfile {
    pub dim_n: usize,
    pub p: Expr,
    pub beta: Expr,
    pub hscript: Expr,
}

impl PressureProfile {
    pub fn parse(p: &str, beta: &str, hscript: &str, dim_n: usize) -> Result<Self> {
        check_dim(dim_n)?;
        Ok(PressureProfile {
            dim_n,
            p: parse(p, ParseOptions::new(dim_n))?,
            beta: parse(beta, ParseOptions::transverse(dim_n))?,
            hscript: parse(hscript, ParseOptions::transverse(dim_n))?,
        })
    }
}

const JET_ORDER: usize = 4;
const STEP_TOL: f64 = 1e-13;
const MAX_HALVINGS: usize = 24;

type State = (Jet<f64>, Jet<f64>);

fn rhs(profile: &PressureProfile, v: f64, z: &[Jet<f64>], y: &State) -> Result<State> {
    let vj = z[0].lift_const(v);
    let p = profile.p.eval(&Point { v: &vj, z })?;
    Ok((y.1.clone(), -(&p * &y.1)))
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    (&y.0 + &(&k.0 * h), &y.1 + &(&k.1 * h))
}

fn rk4(profile: &PressureProfile, v: f64, h: f64, z: &[Jet<f64>], y: &State) -> Result<State> {
    let k1 = rhs(profile, v, z, y)?;
    let k2 = rhs(profile, v + h / 2.0, z, &axpy(y, h / 2.0, &k1))?;
    let k3 = rhs(profile, v + h / 2.0, z, &axpy(y, h / 2.0, &k2))?;
    let k4 = rhs(profile, v + h, z, &axpy(y, h, &k3))?;
    let s0 = &(&k1.0 + &(&k2.0 * 2.0)) + &(&(&k3.0 * 2.0) + &k4.0);
    let s1 = &(&k1.1 + &(&k2.1 * 2.0)) + &(&(&k3.1 * 2.0) + &k4.1);
    Ok((&y.0 + &(s0 * (h / 6.0)), &y.1 + &(s1 * (h / 6.0))))
}

fn state_gap(a: &State, b: &State) -> (f64, f64) {
    let diff = (&a.0 - &b.0).max_abs_coeff().max((&a.1 - &b.1).max_abs_coeff());
    let scale = 1.0 + a.0.max_abs_coeff().max(a.1.max_abs_coeff());
    (diff, scale)
}

/// One grid interval, halving until the full and two half steps agree.
fn advance(
    profile: &PressureProfile,
    a: f64,
    b: f64,
    z: &[Jet<f64>],
    y: &State,
    depth: usize,
) -> Result<State> {
    let h = b - a;
    let coarse = rk4(profile, a, h, z, y)?;
    let mid = rk4(profile, a, h / 2.0, z, y)?;
    let fine = rk4(profile, a + h / 2.0, h / 2.0, z, &mid)?;
    let (diff, scale) = state_gap(&fine, &coarse);
    if diff / 15.0 <= STEP_TOL * scale {
        // Richardson: fine + (fine − coarse)/15
        let d0 = &fine.0 - &coarse.0;
        let d1 = &fine.1 - &coarse.1;
        return Ok((&fine.0 + &(d0 * (1.0 / 15.0)), &fine.1 + &(d1 * (1.0 / 15.0))));
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::StepSize(format!(
            "no convergence on [{a}, {b}] after {MAX_HALVINGS} halvings (gap {diff:e})"
        )));
    }
    let m = a + h / 2.0;
    let left = advance(profile, a, m, z, y, depth + 1)?;
    advance(profile, m, b, z, &left, depth + 1)
}

/// Integrates `w' = −p w`, `w(v₀) = β(z)` and `H = ∫w + 𝓗(z)` over `v_grid`
/// (starting at its lower end) for each transverse probe point, carrying
/// jets in `z` through the classical fourth-order Runge–Kutta scheme.
///
/// The result is known at the grid nodes of each probe; there its jets are
/// exact to order 4 in `v` as well.
pub fn from_pressure(
    profile: &PressureProfile,
    v_grid: &GridRange,
    z_probes: &[Vec<f64>],
) -> Result<JumpFunction> {
    let n = profile.dim_n;
    let vs = v_grid.values();
    let mut nodes = Vec::new();
    for z0 in z_probes {
        if z0.len() != n - 1 {
            return Err(Error::WrongDimension {
                expected: n - 1,
                found: z0.len(),
            });
        }
        let zj = Jet::seed(z0, JET_ORDER);
        let v0j = zj[0].lift_const(vs[0]);
        let beta = profile.beta.eval(&Point { v: &v0j, z: &zj })?;
        let mut y: State = (zj[0].lift_const(0.0), beta);
        for (k, &vk) in vs.iter().enumerate() {
            if k > 0 {
                y = advance(profile, vs[k - 1], vk, &zj, &y, 0)?;
            }
            if !(y.1.value() > 0.0) {
                return Err(Error::NonPositiveDerivative {
                    value: y.1.value(),
                    v: vk,
                    z: z0.clone(),
                });
            }
            nodes.push(PressureNode {
                v: vk,
                z: z0.clone(),
                h: extend_in_v(profile, vk, z0, &y)?,
            });
        }
    }
    Ok(JumpFunction {
        dim_n: n,
        body: Body::Sampled(nodes),
    })
}

/// Full `(v, z)` jet of `H` at a node by Picard iteration in `v`.
fn extend_in_v(profile: &PressureProfile, v: f64, z0: &[f64], y: &State) -> Result<Jet<f64>> {
    let n = profile.dim_n;
    let mut point = vec![v];
    point.extend_from_slice(z0);
    let seeds = Jet::seed(&point, JET_ORDER);
    let map: Vec<usize> = (1..n).collect();
    let hp0 = y.0.embed(n, &map);
    let w0 = y.1.embed(n, &map);
    let p = profile.p.eval(&Point {
        v: &seeds[0],
        z: &seeds[1..],
    })?;
    let mut w = w0.clone();
    for _ in 0..=JET_ORDER {
        w = &w0 + &(-(&p * &w)).integrate(0);
    }
    let hs = profile.hscript.eval(&Point {
        v: &seeds[0],
        z: &seeds[1..],
    })?;
    Ok(&(&hp0 + &w.integrate(0)) + &hs)
}
