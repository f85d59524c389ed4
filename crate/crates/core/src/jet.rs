//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function of
//! `nvars` variables around a base point, for every multi-index of total degree
//! at most `order`. Arithmetic is closed at fixed order, and elementary
//! functions are applied through their univariate Taylor expansion, so every
//! partial derivative up to `order` is exact up to round-off.
//!
//! Monomials are stored graded (by total degree first), which makes truncation
//! to a lower order a prefix operation.

use std::collections::HashMap;
use std::fmt::{self, Debug};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Scalar;
use crate::special;

/// Monomial bookkeeping shared by all jets with the same variable count and order.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `monomial_i * monomial_j = monomial_k`.
    products: Vec<(u32, u32, u32)>,
    /// `α!` for every monomial.
    factorials: Vec<f64>,
}

fn monomials_of_degree(nvars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, remaining_vars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
        if remaining_vars == 1 {
            prefix.push(degree as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=degree).rev() {
            prefix.push(first as u8);
            rec(prefix, remaining_vars - 1, degree - first, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(nvars), nvars, degree, out);
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        for d in 0..=order {
            monomials_of_degree(nvars, d, &mut exponents);
        }
        let degrees: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, ei) in exponents.iter().enumerate() {
            for (j, ej) in exponents.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        let factorials = exponents
            .iter()
            .map(|e| e.iter().map(|&x| factorial(x as usize)).product())
            .collect();
        Layout {
            nvars,
            order,
            exponents,
            degrees,
            index,
            products,
            factorials,
        }
    }

    /// Shared layout for `nvars` variables truncated at total degree `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(Layout::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exponents[i]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    /// Number of monomials of total degree `<= order`.
    fn prefix_len(&self, order: usize) -> usize {
        self.degrees.partition_point(|&d| d <= order)
    }
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet<T> {
    layout: Arc<Layout>,
    coeffs: Vec<T>,
}

impl<T: Debug> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<T: Scalar> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.layout.nvars == other.layout.nvars
            && self.layout.order == other.layout.order
            && self.coeffs == other.coeffs
    }
}

impl<T: Scalar> Jet<T> {
    pub fn constant(nvars: usize, order: usize, value: T) -> Self {
        let layout = Layout::get(nvars, order);
        let mut coeffs = vec![T::zero(); layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    pub fn zero(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, order, T::zero())
    }

    /// The coordinate function `x_var` seeded at `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: T) -> Self {
        assert!(var < nvars, "variable index {var} out of range for {nvars} variables");
        let mut jet = Self::constant(nvars, order, value);
        if order >= 1 {
            let mut e = vec![0u8; nvars];
            e[var] = 1;
            let i = jet.layout.index[&e];
            jet.coeffs[i] = T::one();
        }
        jet
    }

    /// Seeds one variable per coordinate of `point`.
    pub fn seed(point: &[T], order: usize) -> Vec<Self> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Self::variable(n, order, i, x))
            .collect()
    }

    /// Constant with the same layout as `self`.
    pub fn lift_const(&self, value: T) -> Self {
        let mut coeffs = vec![T::zero(); self.layout.len()];
        coeffs[0] = value;
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<T>) -> Self {
        let layout = Layout::get(nvars, order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient count mismatch");
        Jet { layout, coeffs }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exponents: &[u8]) -> T {
        self.layout
            .index_of(exponents)
            .map(|i| self.coeffs[i])
            .unwrap_or_else(T::zero)
    }

    /// Partial derivative `∂^α f` at the base point.
    ///
    /// Panics if `|α|` exceeds the jet order.
    pub fn partial(&self, exponents: &[u8]) -> T {
        let i = self
            .layout
            .index_of(exponents)
            .unwrap_or_else(|| panic!("multi-index {exponents:?} beyond jet order {}", self.order()));
        self.coeffs[i] * T::lit(self.layout.factorials[i])
    }

    /// First partial with respect to `var`.
    pub fn d1(&self, var: usize) -> T {
        let mut e = vec![0u8; self.nvars()];
        e[var] = 1;
        self.partial(&e)
    }

    /// Second partial with respect to `a` and `b`.
    pub fn d2(&self, a: usize, b: usize) -> T {
        let mut e = vec![0u8; self.nvars()];
        e[a] += 1;
        e[b] += 1;
        self.partial(&e)
    }

    pub fn gradient(&self) -> Vec<T> {
        (0..self.nvars()).map(|i| self.d1(i)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<T>> {
        let n = self.nvars();
        (0..n)
            .map(|a| (0..n).map(|b| self.d2(a, b)).collect())
            .collect()
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.nvars(), order);
        let len = self.layout.prefix_len(order);
        debug_assert_eq!(len, layout.len());
        Jet {
            layout,
            coeffs: self.coeffs[..len].to_vec(),
        }
    }

    /// Exact partial derivative with respect to `var`; the order drops by one.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = Layout::get(self.nvars(), self.order() - 1);
        let mut coeffs = vec![T::zero(); layout.len()];
        let mut shifted = vec![0u8; self.nvars()];
        for (i, e) in layout.exponents.iter().enumerate() {
            shifted.copy_from_slice(e);
            shifted[var] += 1;
            let src = self.layout.index[&shifted];
            coeffs[i] = self.coeffs[src] * T::from_count(shifted[var] as usize);
        }
        Jet { layout, coeffs }
    }

    /// Antiderivative in `var` vanishing on `x_var = base`, truncated to the same order.
    pub fn integrate(&self, var: usize) -> Self {
        let mut coeffs = vec![T::zero(); self.coeffs.len()];
        let mut shifted = vec![0u8; self.nvars()];
        for (i, e) in self.layout.exponents.iter().enumerate() {
            if self.layout.degrees[i] == self.order() {
                continue;
            }
            shifted.copy_from_slice(e);
            shifted[var] += 1;
            let dst = self.layout.index[&shifted];
            coeffs[dst] = self.coeffs[i] / T::from_count(shifted[var] as usize);
        }
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    /// Sub-jet in the variables `keep`, with every other displacement set to zero.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let layout = Layout::get(keep.len(), self.order());
        let mut coeffs = vec![T::zero(); layout.len()];
        let mut full = vec![0u8; self.nvars()];
        for (i, e) in layout.exponents.iter().enumerate() {
            full.iter_mut().for_each(|x| *x = 0);
            for (k, &var) in keep.iter().enumerate() {
                full[var] = e[k];
            }
            coeffs[i] = self.coeffs[self.layout.index[&full]];
        }
        Jet { layout, coeffs }
    }

    /// Re-expresses the jet with variable `i` mapped to variable `map[i]` of a
    /// larger variable set of size `nvars`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars());
        let layout = Layout::get(nvars, self.order());
        let mut coeffs = vec![T::zero(); layout.len()];
        let mut full = vec![0u8; nvars];
        for (i, e) in self.layout.exponents.iter().enumerate() {
            full.iter_mut().for_each(|x| *x = 0);
            for (k, &target) in map.iter().enumerate() {
                full[target] += e[k];
            }
            coeffs[layout.index[&full]] = self.coeffs[i];
        }
        Jet { layout, coeffs }
    }

    /// Substitutes `inner[i]` for variable `i`: the result is the jet of
    /// `f(inner_0, ..., inner_n)` in the variables of the inner jets.
    pub fn compose(&self, inner: &[Jet<T>]) -> Self {
        assert_eq!(inner.len(), self.nvars());
        assert!(!inner.is_empty(), "composition needs at least one inner jet");
        let order = inner.iter().map(Jet::order).min().unwrap_or(0).min(self.order());
        let inner: Vec<Jet<T>> = inner.iter().map(|j| j.truncate(order)).collect();
        let deltas: Vec<Jet<T>> = inner
            .iter()
            .map(|j| {
                let mut d = j.clone();
                d.coeffs[0] = T::zero();
                d
            })
            .collect();
        // powers[var][k] = delta_var^k
        let powers: Vec<Vec<Jet<T>>> = deltas
            .iter()
            .map(|d| {
                let mut p = vec![d.lift_const(T::one())];
                for k in 1..=order {
                    let next = &p[k - 1] * d;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut out = inner[0].lift_const(T::zero());
        for (i, e) in self.layout.exponents.iter().enumerate() {
            if self.layout.degrees[i] > order || self.coeffs[i] == T::zero() {
                continue;
            }
            let mut term = inner[0].lift_const(self.coeffs[i]);
            for (var, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = &term * &powers[var][k as usize];
                }
            }
            out += &term;
        }
        out
    }

    /// `f(self)` given `derivs[k] = f^{(k)}(self.value())` for `k = 0..=order`.
    pub fn map_univariate(&self, derivs: &[T]) -> Self {
        let order = self.order();
        assert!(derivs.len() > order, "need {} derivatives", order + 1);
        let mut h = self.clone();
        h.coeffs[0] = T::zero();
        let mut acc = self.lift_const(derivs[order] / T::lit(factorial(order)));
        for k in (0..order).rev() {
            acc = &acc * &h;
            acc.coeffs[0] = acc.coeffs[0] + derivs[k] / T::lit(factorial(k));
        }
        acc
    }

    fn align(&self, other: &Self) -> (Arc<Layout>, usize) {
        assert_eq!(
            self.nvars(),
            other.nvars(),
            "jets over different variable sets cannot be combined"
        );
        if self.order() <= other.order() {
            (self.layout.clone(), self.coeffs.len())
        } else {
            (other.layout.clone(), other.coeffs.len())
        }
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let inv = x.recip();
        let mut p = inv;
        for k in 0..=self.order() {
            d.push(p);
            p = -p * inv * T::from_count(k + 1);
        }
        self.map_univariate(&d)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.map_univariate(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Self {
        let x = self.value();
        let mut d = vec![x.ln()];
        let inv = x.recip();
        let mut p = inv;
        for k in 1..=self.order() {
            d.push(p);
            p = -p * inv * T::from_count(k);
        }
        self.map_univariate(&d)
    }

    /// `self^a` for a real exponent.
    pub fn powf(&self, a: T) -> Self {
        let x = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = T::one();
        for k in 0..=self.order() {
            d.push(coef * x.powf(a - T::from_count(k)));
            coef = coef * (a - T::from_count(k));
        }
        self.map_univariate(&d)
    }

    /// `self^n` by repeated multiplication (exact at a zero base).
    pub fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut m = n.unsigned_abs();
        let mut result = self.lift_const(T::one());
        let mut sq = base;
        while m > 0 {
            if m & 1 == 1 {
                result = &result * &sq;
            }
            m >>= 1;
            if m > 0 {
                sq = &sq * &sq;
            }
        }
        result
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<T> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.map_univariate(&d)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<T> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.map_univariate(&d)
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let d: Vec<T> = (0..=self.order()).map(|k| if k % 2 == 0 { s } else { c }).collect();
        self.map_univariate(&d)
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let d: Vec<T> = (0..=self.order()).map(|k| if k % 2 == 0 { c } else { s }).collect();
        self.map_univariate(&d)
    }

    pub fn tanh(&self) -> Self {
        let t = self.value().tanh();
        // d^k/dx^k tanh = P_k(tanh), P_0(t) = t, P_{k+1} = P_k'(t) (1 - t^2)
        let mut poly = vec![T::zero(), T::one()];
        let mut d = Vec::with_capacity(self.order() + 1);
        for _ in 0..=self.order() {
            d.push(eval_poly(&poly, t));
            let deriv: Vec<T> = poly
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * T::from_count(i))
                .collect();
            let mut next = vec![T::zero(); deriv.len() + 2];
            for (i, &c) in deriv.iter().enumerate() {
                next[i] = next[i] + c;
                next[i + 2] = next[i + 2] - c;
            }
            poly = next;
        }
        self.map_univariate(&d)
    }

    pub fn erf(&self) -> Self {
        let x = self.value();
        let mut d = vec![special::erf(x)];
        if self.order() >= 1 {
            // d^k erf = 2/sqrt(pi) (-1)^(k-1) H_{k-1}(x) exp(-x^2), physicists' Hermite
            let g = T::FRAC_2_SQRT_PI() * (-x * x).exp();
            let (mut h_prev, mut h) = (T::zero(), T::one());
            for k in 1..=self.order() {
                let sign = if (k - 1) % 2 == 0 { T::one() } else { -T::one() };
                d.push(sign * h * g);
                let n = T::from_count(k - 1);
                let next = T::lit(2.0) * x * h - T::lit(2.0) * n * h_prev;
                h_prev = h;
                h = next;
            }
        }
        self.map_univariate(&d)
    }
}

fn eval_poly<T: Scalar>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

fn add_impl<T: Scalar>(a: &Jet<T>, b: &Jet<T>, sign: T) -> Jet<T> {
    let (layout, len) = a.align(b);
    let coeffs = (0..len).map(|i| a.coeffs[i] + sign * b.coeffs[i]).collect();
    Jet { layout, coeffs }
}

fn mul_impl<T: Scalar>(a: &Jet<T>, b: &Jet<T>) -> Jet<T> {
    let (layout, len) = a.align(b);
    let mut coeffs = vec![T::zero(); len];
    // zero-order shortcut keeps scalar-like jets cheap
    if len == 1 {
        coeffs[0] = a.coeffs[0] * b.coeffs[0];
        return Jet { layout, coeffs };
    }
    for &(i, j, k) in &layout.products {
        let (i, j, k) = (i as usize, j as usize, k as usize);
        coeffs[k] = coeffs[k] + a.coeffs[i] * b.coeffs[j];
    }
    Jet { layout, coeffs }
}

impl<'a, T: Scalar> Add<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: &'a Jet<T>) -> Jet<T> {
        add_impl(self, rhs, T::one())
    }
}

impl<'a, T: Scalar> Sub<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: &'a Jet<T>) -> Jet<T> {
        add_impl(self, rhs, -T::one())
    }
}

impl<'a, T: Scalar> Mul<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: &'a Jet<T>) -> Jet<T> {
        mul_impl(self, rhs)
    }
}

impl<'a, T: Scalar> Div<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn div(self, rhs: &'a Jet<T>) -> Jet<T> {
        mul_impl(self, &rhs.recip())
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl<T: Scalar> $trait<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$method(&rhs)
            }
        }
        impl<'a, T: Scalar> $trait<&'a Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &'a Jet<T>) -> Jet<T> {
                (&self).$method(rhs)
            }
        }
        impl<'a, T: Scalar> $trait<Jet<T>> for &'a Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                self.$method(&rhs)
            }
        }
        impl<T: Scalar> $trait<T> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: T) -> Jet<T> {
                let c = self.lift_const(rhs);
                (&self).$method(&c)
            }
        }
        impl<'a, T: Scalar> $trait<T> for &'a Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: T) -> Jet<T> {
                let c = self.lift_const(rhs);
                self.$method(&c)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(mut self) -> Jet<T> {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -(self.clone())
    }
}

impl<'a, T: Scalar> AddAssign<&'a Jet<T>> for Jet<T> {
    fn add_assign(&mut self, rhs: &'a Jet<T>) {
        if self.order() <= rhs.order() && self.nvars() == rhs.nvars() {
            for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *c = *c + *r;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl<'a, T: Scalar> SubAssign<&'a Jet<T>> for Jet<T> {
    fn sub_assign(&mut self, rhs: &'a Jet<T>) {
        if self.order() <= rhs.order() && self.nvars() == rhs.nvars() {
            for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *c = *c - *r;
            }
        } else {
            *self = &*self - rhs;
        }
    }
}

impl<T: Scalar> MulAssign<T> for Jet<T> {
    fn mul_assign(&mut self, rhs: T) {
        self.coeffs.iter_mut().for_each(|c| *c = *c * rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_sizes() {
        assert_eq!(Layout::get(4, 4).len(), 70);
        assert_eq!(Layout::get(2, 2).len(), 6);
        assert_eq!(Layout::get(1, 0).len(), 1);
    }

    #[test]
    fn univariate_exp_coefficients() {
        let x = Jet::<f64>::variable(1, 5, 0, 0.0);
        let e = x.exp();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0];
        for (c, e) in e.coeffs().iter().zip(expected) {
            assert!(close(*c, e, 1e-15));
        }
    }

    #[test]
    fn product_rule_and_partials() {
        let p = Jet::<f64>::seed(&[1.5, -0.5], 3);
        let (x, y) = (&p[0], &p[1]);
        // f = x^2 y^3
        let f = &(x * x) * &(&(y * y) * y);
        assert!(close(f.value(), 2.25 * -0.125, 1e-15));
        assert!(close(f.d1(0), 2.0 * 1.5 * -0.125, 1e-15));
        assert!(close(f.d2(0, 1), 2.0 * 1.5 * 3.0 * 0.25, 1e-15));
        assert!(close(f.partial(&[1, 2]), 2.0 * 1.5 * 6.0 * -0.5, 1e-14));
        assert!(close(f.partial(&[0, 3]), 2.25 * 6.0, 1e-14));
    }

    #[test]
    fn derivative_and_integrate_invert() {
        let p = Jet::<f64>::seed(&[0.3, 0.7], 4);
        let f = (&p[0] * &p[1]).sin() + p[0].exp();
        let df = f.derivative(0);
        assert_eq!(df.order(), 3);
        assert!(close(df.value(), f.d1(0), 1e-14));
        assert!(close(df.d1(1), f.d2(0, 1), 1e-14));
        let back = df.integrate(0);
        // integrating recovers f minus its restriction to x0 = base, up to order 3
        assert!(close(back.d1(0), f.d1(0), 1e-14));
        assert!(close(back.d2(0, 1), f.d2(0, 1), 1e-14));
    }

    #[test]
    fn compose_matches_direct_evaluation() {
        let inner = Jet::<f64>::seed(&[0.2, -0.4], 3);
        let a = &inner[0] + &inner[1];
        let b = &inner[0] * &inner[1];
        let outer_point = Jet::<f64>::seed(&[a.value(), b.value()], 3);
        let outer = (&outer_point[0] * &outer_point[1]).tanh();
        let composed = outer.compose(&[a.clone(), b.clone()]);
        let direct = (&a * &b).tanh();
        for (x, y) in composed.coeffs().iter().zip(direct.coeffs()) {
            assert!(close(*x, *y, 1e-13));
        }
    }

    #[test]
    fn recip_and_division() {
        let x = Jet::<f64>::variable(1, 4, 0, 2.0);
        let r = x.recip();
        // 1/x: coefficients (-1)^k / 2^(k+1)
        for k in 0..=4 {
            let expected = (-1f64).powi(k) / 2f64.powi(k + 1);
            assert!(close(r.coeffs()[k as usize], expected, 1e-15));
        }
        let one = &x / &x;
        assert!(close(one.value(), 1.0, 1e-15));
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn powi_negative_and_zero_base() {
        let x = Jet::<f64>::variable(1, 4, 0, 0.0);
        let c = x.powi(3);
        assert_eq!(c.partial(&[3]), 6.0);
        assert_eq!(c.value(), 0.0);
        let y = Jet::<f64>::variable(1, 3, 0, 2.0);
        let inv2 = y.powi(-2);
        assert!(close(inv2.d1(0), -2.0 / 8.0, 1e-15));
    }

    #[test]
    fn mixed_order_combines_at_lower_order() {
        let a = Jet::<f64>::variable(2, 3, 0, 1.0);
        let b = Jet::<f64>::variable(2, 1, 1, 2.0);
        let c = &a * &b;
        assert_eq!(c.order(), 1);
        assert_eq!(c.d1(0), 2.0);
        assert_eq!(c.d1(1), 1.0);
    }

    #[test]
    fn restrict_and_embed() {
        let p = Jet::<f64>::seed(&[0.1, 0.2, 0.3], 2);
        let f = &(&p[0] * &p[2]) + &p[1];
        let r = f.restrict(&[0, 2]);
        assert_eq!(r.nvars(), 2);
        assert!(close(r.d2(0, 1), 1.0, 1e-15));
        let e = r.embed(3, &[0, 2]);
        assert!(close(e.d2(0, 2), 1.0, 1e-15));
        assert_eq!(e.d1(1), 0.0);
    }

    #[test]
    fn generic_over_f32() {
        let x = Jet::<f32>::variable(1, 2, 0, 0.5);
        let y = x.tanh();
        let t = 0.5f32.tanh();
        assert!((y.d1(0) - (1.0 - t * t)).abs() < 1e-6);
    }
}
