//! Scalar abstraction shared by plain evaluation (`f64`) and gradient
//! recording ([`crate::autodiff::Var`]).
//!
//! Model code is written once against [`Real`]; instantiating it with `f64`
//! gives values, instantiating it with `Var` records a tape for reverse mode.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant (no derivative).
    fn cst(x: f64) -> Self;
    fn val(self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln_1p(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;

    /// `ln(1 + e^x)` without overflow.
    fn softplus(self) -> Self;
    /// `1 / (1 + e^-x)`.
    fn logistic(self) -> Self;

    /// A node whose value and local partial derivatives were computed
    /// elsewhere. `parts` pairs each input with `d value / d input`.
    fn custom(value: f64, parts: &[(Self, f64)]) -> Self;

    /// `x^p` for positive `x`.
    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(Self::cst(0.0), |acc, (&x, &y)| acc + x * y)
    }

    fn sum(xs: &[Self]) -> Self {
        xs.iter().fold(Self::cst(0.0), |acc, &x| acc + x)
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn val(self) -> f64 {
        self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn softplus(self) -> Self {
        softplus(self)
    }
    #[inline]
    fn logistic(self) -> Self {
        logistic(self)
    }
    #[inline]
    fn custom(value: f64, _parts: &[(Self, f64)]) -> Self {
        value
    }
    #[inline]
    fn powf(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}
