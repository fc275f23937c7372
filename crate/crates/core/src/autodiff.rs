//! Minimal reverse-mode differentiation over a Wengert list.
//!
//! Every node stores its value-independent local partials at creation time, so
//! the backward pass is a single reverse sweep accumulating adjoints.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{logistic, softplus, Real};

const NO_NODE: u32 = u32::MAX;

#[derive(Default)]
struct Inner {
    /// `(first edge, edge count)` per node.
    spans: Vec<(u32, u32)>,
    /// `(parent node, d node / d parent)`.
    edges: Vec<(u32, f64)>,
}

#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops all nodes, keeping allocations. Variables from before the reset
    /// must not be used afterwards.
    pub fn reset(&mut self) {
        let inner = self.inner.get_mut();
        inner.spans.clear();
        inner.edges.clear();
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A new independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let idx = inner.spans.len() as u32;
        let start = inner.edges.len() as u32;
        inner.spans.push((start, 0));
        Var {
            tape: Some(self),
            idx,
            value,
        }
    }

    fn push<'t>(&'t self, value: f64, parts: impl Iterator<Item = (u32, f64)>) -> Var<'t> {
        let mut inner = self.inner.borrow_mut();
        let idx = inner.spans.len() as u32;
        let start = inner.edges.len();
        inner.edges.extend(parts);
        let count = inner.edges.len() - start;
        inner.spans.push((start as u32, count as u32));
        Var {
            tape: Some(self),
            idx,
            value,
        }
    }

    /// Adjoints of `output` with respect to every node on the tape.
    pub fn adjoints(&self, output: Var<'_>) -> Vec<f64> {
        let inner = self.inner.borrow();
        let mut adj = vec![0.0; inner.spans.len()];
        if output.idx == NO_NODE {
            return adj;
        }
        adj[output.idx as usize] = 1.0;
        for node in (0..=output.idx as usize).rev() {
            let a = adj[node];
            if a == 0.0 {
                continue;
            }
            let (start, count) = inner.spans[node];
            for &(parent, partial) in &inner.edges[start as usize..(start + count) as usize] {
                adj[parent as usize] += a * partial;
            }
        }
        adj
    }

    /// Gradient of `output` with respect to `wrt`.
    pub fn gradient(&self, output: Var<'_>, wrt: &[Var<'_>]) -> Vec<f64> {
        let adj = self.adjoints(output);
        wrt.iter()
            .map(|v| {
                if v.idx == NO_NODE {
                    0.0
                } else {
                    adj[v.idx as usize]
                }
            })
            .collect()
    }
}

/// A scalar that is either a constant or a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.idx == NO_NODE {
            write!(f, "Var(const {})", self.value)
        } else {
            write!(f, "Var(#{} = {})", self.idx, self.value)
        }
    }
}

impl<'t> Var<'t> {
    pub fn constant(value: f64) -> Self {
        Var {
            tape: None,
            idx: NO_NODE,
            value,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    fn unary(self, value: f64, d: f64) -> Self {
        match self.tape {
            None => Var::constant(value),
            Some(t) => t.push(value, std::iter::once((self.idx, d))),
        }
    }

    fn binary(self, other: Self, value: f64, da: f64, db: f64) -> Self {
        match (self.tape, other.tape) {
            (None, None) => Var::constant(value),
            (Some(t), None) => t.push(value, std::iter::once((self.idx, da))),
            (None, Some(t)) => t.push(value, std::iter::once((other.idx, db))),
            (Some(t), Some(_)) => t.push(value, [(self.idx, da), (other.idx, db)].into_iter()),
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        self.unary(self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        self.unary(self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.unary(self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self.unary(self.value / rhs, 1.0 / rhs)
    }
}

impl<'t> Real for Var<'t> {
    fn cst(x: f64) -> Self {
        Var::constant(x)
    }

    fn val(self) -> f64 {
        self.value
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(e, e)
    }

    fn ln(self) -> Self {
        self.unary(self.value.ln(), 1.0 / self.value)
    }

    fn exp_m1(self) -> Self {
        self.unary(self.value.exp_m1(), self.value.exp())
    }

    fn ln_1p(self) -> Self {
        self.unary(self.value.ln_1p(), 1.0 / (1.0 + self.value))
    }

    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.unary(s, 0.5 / s)
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.unary(t, 1.0 - t * t)
    }

    fn softplus(self) -> Self {
        self.unary(softplus(self.value), logistic(self.value))
    }

    fn logistic(self) -> Self {
        let s = logistic(self.value);
        self.unary(s, s * (1.0 - s))
    }

    fn custom(value: f64, parts: &[(Self, f64)]) -> Self {
        match parts.iter().find_map(|(v, _)| v.tape) {
            None => Var::constant(value),
            Some(t) => t.push(
                value,
                parts
                    .iter()
                    .filter(|(v, _)| v.idx != NO_NODE)
                    .map(|(v, d)| (v.idx, *d)),
            ),
        }
    }

    fn powf(self, p: Self) -> Self {
        let value = self.value.powf(p.value);
        let dx = p.value * self.value.powf(p.value - 1.0);
        let dp = value * self.value.ln();
        self.binary(p, value, dx, dp)
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let value = a.iter().zip(b).map(|(x, y)| x.value * y.value).sum();
        let tape = a.iter().chain(b).find_map(|v| v.tape);
        match tape {
            None => Var::constant(value),
            Some(t) => {
                let left = a
                    .iter()
                    .zip(b)
                    .filter(|(x, _)| x.idx != NO_NODE)
                    .map(|(x, y)| (x.idx, y.value));
                let right = b
                    .iter()
                    .zip(a)
                    .filter(|(y, _)| y.idx != NO_NODE)
                    .map(|(y, x)| (y.idx, x.value));
                t.push(value, left.chain(right))
            }
        }
    }

    fn sum(xs: &[Self]) -> Self {
        let value = xs.iter().map(|x| x.value).sum();
        match xs.iter().find_map(|v| v.tape) {
            None => Var::constant(value),
            Some(t) => t.push(
                value,
                xs.iter()
                    .filter(|x| x.idx != NO_NODE)
                    .map(|x| (x.idx, 1.0)),
            ),
        }
    }
}

/// Value and exact gradient of a scalar function at `params`.
///
/// A non-finite gradient component is reported with its index.
pub fn gradient<F>(params: &[f64], f: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> FnOnce(&[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let vars: Vec<Var<'_>> = params.iter().map(|&p| tape.var(p)).collect();
    let out = f(&vars);
    let grad = tape.gradient(out, &vars);
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite gradient component for parameter {i}"
        )));
    }
    Ok((out.value(), grad))
}
