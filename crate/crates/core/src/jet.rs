//! Truncated bivariate Taylor arithmetic of total order 4.
//!
//! A [`Jet4`] stores the Taylor coefficients `f_{ij} / (i! j!)` of a function
//! of `(u, v)` about an expansion point, for `0 <= i + j <= 4`. Multiplication
//! is then a plain truncated convolution, and every elementary function is
//! lifted by composing its univariate Taylor series with the non-constant part
//! of the argument. [`Jet4::derivative`] multiplies the factorials back.
//!
//! Each jet also records the total order up to which its coefficients are
//! known. Differentiating with [`Jet4::partial_u`] / [`Jet4::partial_v`]
//! lowers it by one; binary operations keep the smaller of the two.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Highest total derivative order carried by a jet.
pub const MAX_ORDER: usize = 4;

/// Number of stored coefficients, `(MAX_ORDER + 1)(MAX_ORDER + 2) / 2`.
pub const N_COEFFS: usize = 15;

const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Multi-index `(i, j)` of each storage slot, graded by total order.
pub const MULTI_INDEX: [(usize, usize); N_COEFFS] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

/// Storage slot of the multi-index `(i, j)`.
#[inline]
pub const fn slot(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

#[inline]
const fn slots_up_to(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("{op} is undefined at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("derivative order ({i}, {j}) exceeds the jet order {order}")]
    OrderOutOfRange { i: usize, j: usize, order: usize },
    #[error("non-finite result from {0}")]
    NonFinite(&'static str),
}

/// Truncated Taylor expansion in `(u, v)` to total order 4.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet4 {
    coeffs: [f64; N_COEFFS],
    order: u8,
}

impl fmt::Debug for Jet4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet4")
            .field("order", &self.order)
            .field("coeffs", &&self.coeffs[..slots_up_to(self.order as usize)])
            .finish()
    }
}

impl Default for Jet4 {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl Jet4 {
    pub fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; N_COEFFS];
        coeffs[0] = value;
        Self {
            coeffs,
            order: MAX_ORDER as u8,
        }
    }

    /// The coordinate function `u` expanded about `u0`.
    pub fn var_u(u0: f64) -> Self {
        let mut j = Self::constant(u0);
        j.coeffs[slot(1, 0)] = 1.0;
        j
    }

    /// The coordinate function `v` expanded about `v0`.
    pub fn var_v(v0: f64) -> Self {
        let mut j = Self::constant(v0);
        j.coeffs[slot(0, 1)] = 1.0;
        j
    }

    /// Builds a jet from Taylor-normalized coefficients.
    pub fn from_taylor(coeffs: [f64; N_COEFFS], order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        let mut c = coeffs;
        c[slots_up_to(order)..].iter_mut().for_each(|x| *x = 0.0);
        Self {
            coeffs: c,
            order: order as u8,
        }
    }

    /// Builds a jet from un-normalized partial derivatives, indexed like
    /// [`slot`].
    pub fn from_derivatives(derivs: [f64; N_COEFFS], order: usize) -> Self {
        let mut c = [0.0; N_COEFFS];
        for (k, &(i, j)) in MULTI_INDEX.iter().enumerate() {
            c[k] = derivs[k] / (FACTORIAL[i] * FACTORIAL[j]);
        }
        Self::from_taylor(c, order)
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Total order up to which the coefficients are known.
    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// Taylor-normalized coefficient of `u^i v^j`.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[slot(i, j)]
    }

    pub fn taylor_coeffs(&self) -> &[f64; N_COEFFS] {
        &self.coeffs
    }

    /// The partial derivative `d^(i+j) f / du^i dv^j` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> Result<f64, JetError> {
        if i + j > self.order() {
            return Err(JetError::OrderOutOfRange {
                i,
                j,
                order: self.order(),
            });
        }
        Ok(self.coeffs[slot(i, j)] * FACTORIAL[i] * FACTORIAL[j])
    }

    /// All known partial derivatives, indexed like [`slot`].
    pub fn derivatives(&self) -> [f64; N_COEFFS] {
        let mut d = [0.0; N_COEFFS];
        for (k, &(i, j)) in MULTI_INDEX.iter().enumerate().take(slots_up_to(self.order())) {
            d[k] = self.coeffs[k] * FACTORIAL[i] * FACTORIAL[j];
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self::from_taylor(self.coeffs, order.min(self.order()))
    }

    /// Jet of `df/du`; its order is one less than `self`.
    pub fn partial_u(&self) -> Self {
        self.partial(true)
    }

    /// Jet of `df/dv`; its order is one less than `self`.
    pub fn partial_v(&self) -> Self {
        self.partial(false)
    }

    fn partial(&self, along_u: bool) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order() - 1;
        let mut c = [0.0; N_COEFFS];
        for (k, &(i, j)) in MULTI_INDEX.iter().enumerate().take(slots_up_to(order)) {
            c[k] = if along_u {
                (i + 1) as f64 * self.coeffs[slot(i + 1, j)]
            } else {
                (j + 1) as f64 * self.coeffs[slot(i, j + 1)]
            };
        }
        Self::from_taylor(c, order)
    }

    fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Composes a univariate Taylor series `sum_k t[k] x^k` (about the value
    /// of `self`) with the non-constant part of `self`.
    fn compose(&self, t: &[f64; MAX_ORDER + 1]) -> Self {
        let n = self.order();
        let mut delta = *self;
        delta.coeffs[0] = 0.0;
        let mut acc = Self::constant(t[n]);
        acc.order = self.order;
        for k in (0..n).rev() {
            acc = acc * delta;
            acc.coeffs[0] += t[k];
        }
        acc
    }

    fn checked(self, op: &'static str) -> Result<Self, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite(op))
        }
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let x = self.value();
        if x == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let r = 1.0 / x;
        let mut t = [0.0; 5];
        let mut p = r;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = if k % 2 == 0 { p } else { -p };
            p *= r;
        }
        self.compose(&t).checked("recip")
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, JetError> {
        Ok(*self * rhs.recip()?)
    }

    pub fn sin(&self) -> Result<Self, JetError> {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s / 2.0, -c / 6.0, s / 24.0]).checked("sin")
    }

    pub fn cos(&self) -> Result<Self, JetError> {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c / 2.0, s / 6.0, c / 24.0]).checked("cos")
    }

    pub fn tan(&self) -> Result<Self, JetError> {
        let x = self.value();
        if x.cos().abs() < 1e-12 {
            return Err(JetError::Domain { op: "tan", value: x });
        }
        let t = x.tan();
        let s = 1.0 + t * t;
        self.compose(&[
            t,
            s,
            t * s,
            s * (1.0 + 3.0 * t * t) / 3.0,
            t * s * (2.0 + 3.0 * t * t) / 3.0,
        ])
        .checked("tan")
    }

    pub fn exp(&self) -> Result<Self, JetError> {
        let e = self.value().exp();
        self.compose(&[e, e, e / 2.0, e / 6.0, e / 24.0]).checked("exp")
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let x = self.value();
        if !(x > 0.0) {
            return Err(JetError::Domain { op: "ln", value: x });
        }
        let r = 1.0 / x;
        self.compose(&[
            x.ln(),
            r,
            -r * r / 2.0,
            r * r * r / 3.0,
            -r * r * r * r / 4.0,
        ])
        .checked("ln")
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let x = self.value();
        if !(x > 0.0) {
            return Err(JetError::Domain { op: "sqrt", value: x });
        }
        self.powf_unchecked(x, 0.5).checked("sqrt")
    }

    pub fn sinh(&self) -> Result<Self, JetError> {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.compose(&[s, c, s / 2.0, c / 6.0, s / 24.0]).checked("sinh")
    }

    pub fn cosh(&self) -> Result<Self, JetError> {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.compose(&[c, s, c / 2.0, s / 6.0, c / 24.0]).checked("cosh")
    }

    /// Integer power; defined for any base when `n >= 0`.
    pub fn powi(&self, n: i32) -> Result<Self, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut base = *self;
        let mut acc = Self::constant(1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc.order = acc.order.min(self.order);
        acc.checked("powi")
    }

    /// Real power of a positive base.
    pub fn powf(&self, p: f64) -> Result<Self, JetError> {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let x = self.value();
        if !(x > 0.0) {
            return Err(JetError::Domain { op: "pow", value: x });
        }
        self.powf_unchecked(x, p).checked("pow")
    }

    fn powf_unchecked(&self, x: f64, p: f64) -> Self {
        // generalized binomial coefficients times x^(p - k)
        let mut t = [0.0; 5];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = binom * x.powf(p - k as f64);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&t)
    }

    /// `self ^ e` for a jet-valued exponent, as `exp(e ln self)`.
    pub fn pow(&self, e: &Self) -> Result<Self, JetError> {
        (*e * self.ln()?).exp()
    }
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(self, rhs: Jet4) -> Jet4 {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; N_COEFFS];
        for k in 0..slots_up_to(order as usize) {
            c[k] = self.coeffs[k] + rhs.coeffs[k];
        }
        Jet4 { coeffs: c, order }
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        self + (-rhs)
    }
}

impl Neg for Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        self.scale(-1.0)
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let order = self.order.min(rhs.order) as usize;
        let mut c = [0.0; N_COEFFS];
        for (a, &(i1, j1)) in MULTI_INDEX.iter().enumerate().take(slots_up_to(order)) {
            let ca = self.coeffs[a];
            if ca == 0.0 {
                continue;
            }
            let rest = order - (i1 + j1);
            for (b, &(i2, j2)) in MULTI_INDEX.iter().enumerate().take(slots_up_to(rest)) {
                c[slot(i1 + i2, j1 + j2)] += ca * rhs.coeffs[b];
            }
        }
        Jet4::from_taylor(c, order)
    }
}

impl Add<f64> for Jet4 {
    type Output = Jet4;
    fn add(mut self, rhs: f64) -> Jet4 {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet4 {
    type Output = Jet4;
    fn sub(mut self, rhs: f64) -> Jet4 {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: f64) -> Jet4 {
        self.scale(rhs)
    }
}

impl Mul<Jet4> for f64 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        rhs.scale(self)
    }
}

impl Add<Jet4> for f64 {
    type Output = Jet4;
    fn add(self, rhs: Jet4) -> Jet4 {
        rhs + self
    }
}

impl Sub<Jet4> for f64 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        -rhs + self
    }
}

impl AddAssign for Jet4 {
    fn add_assign(&mut self, rhs: Jet4) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet4 {
    fn sub_assign(&mut self, rhs: Jet4) {
        *self = *self - rhs;
    }
}

impl std::iter::Sum for Jet4 {
    fn sum<I: Iterator<Item = Jet4>>(iter: I) -> Jet4 {
        iter.fold(Jet4::constant(0.0), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn u_jet(u: f64) -> Jet4 {
        Jet4::var_u(u)
    }

    #[test]
    fn polynomial_u2v() {
        let f = u_jet(1.0) * u_jet(1.0) * Jet4::var_v(2.0);
        assert_eq!(f.derivative(0, 0).unwrap(), 2.0);
        assert_eq!(f.derivative(1, 0).unwrap(), 4.0);
        assert_eq!(f.derivative(0, 1).unwrap(), 1.0);
        assert_eq!(f.derivative(2, 1).unwrap(), 2.0);
        for (i, j) in [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)] {
            assert_eq!(f.derivative(i, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn sine_series_at_origin() {
        let f = u_jet(0.0).sin().unwrap();
        let d: Vec<f64> = (0..5).map(|k| f.derivative(k, 0).unwrap()).collect();
        assert_eq!(d, vec![0.0, 1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn extract_examples() {
        let sq = u_jet(3.7) * u_jet(3.7);
        assert_eq!(sq.derivative(2, 0).unwrap(), 2.0);
        let g = u_jet(FRAC_PI_2).sin().unwrap() * Jet4::var_v(FRAC_PI_2).sin().unwrap();
        assert!(g.derivative(1, 1).unwrap().abs() < 1e-30);
        assert_eq!(g.derivative(0, 0).unwrap(), g.value());
        assert!(matches!(
            g.derivative(3, 2),
            Err(JetError::OrderOutOfRange { .. })
        ));
    }

    #[test]
    fn derivative_lowers_order() {
        let f = u_jet(0.3).exp().unwrap();
        let fu = f.partial_u();
        assert_eq!(fu.order(), 3);
        assert!(fu.derivative(4, 0).is_err());
        assert!((fu.derivative(3, 0).unwrap() - 0.3f64.exp()).abs() < 1e-14);
        let prod = fu * f;
        assert_eq!(prod.order(), 3);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            Jet4::constant(-1.0).ln(),
            Err(JetError::Domain { op: "ln", .. })
        ));
        assert!(matches!(
            Jet4::constant(0.0).sqrt(),
            Err(JetError::Domain { op: "sqrt", .. })
        ));
        assert_eq!(Jet4::constant(0.0).recip(), Err(JetError::DivisionByZero));
        assert!(Jet4::constant(FRAC_PI_2).tan().is_err());
        assert!(Jet4::constant(-2.0).powf(0.5).is_err());
        // integer powers of negative bases are fine
        assert_eq!(Jet4::constant(-2.0).powf(3.0).unwrap().value(), -8.0);
    }

    #[test]
    fn tan_matches_sin_over_cos() {
        let x = u_jet(0.4) * Jet4::var_v(1.3) + u_jet(0.4);
        let lhs = x.tan().unwrap();
        let rhs = x.sin().unwrap().try_div(&x.cos().unwrap()).unwrap();
        for k in 0..N_COEFFS {
            assert!((lhs.coeffs[k] - rhs.coeffs[k]).abs() < 1e-12 * (1.0 + rhs.coeffs[k].abs()));
        }
    }

    #[test]
    fn sqrt_squared_is_identity() {
        let x = u_jet(0.7) * u_jet(0.7) + Jet4::var_v(0.2).exp().unwrap();
        let r = x.sqrt().unwrap();
        let back = r * r;
        for k in 0..N_COEFFS {
            assert!((back.coeffs[k] - x.coeffs[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn hyperbolic_identity() {
        let x = u_jet(0.3) - Jet4::var_v(0.9) * 2.0;
        let c = x.cosh().unwrap();
        let s = x.sinh().unwrap();
        let one = c * c - s * s;
        assert!((one.value() - 1.0).abs() < 1e-14);
        for k in 1..N_COEFFS {
            assert!(one.coeffs[k].abs() < 1e-12);
        }
    }
}
