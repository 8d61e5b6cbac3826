//! Polynomials in two complex variables and quotients of them.
//!
//! A rational function of the real plane `P(z, z̄) / Q(z, z̄)` is stored with the
//! conjugate replaced by an independent variable `w`, so the same data can be
//! evaluated on the real plane (`w = z̄`) or on any complex curve in `ℂ²`.

use std::collections::BTreeMap;
use std::fmt;

use super::ExprNode;
use crate::C64;

/// `Σ c_{jk} z^j w^k` with exact-zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), C64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: C64, z_deg: u32, w_deg: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != C64::new(0.0, 0.0) {
            terms.insert((z_deg, w_deg), c);
        }
        Self { terms }
    }

    pub fn z() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 1, 0)
    }

    pub fn w() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates `((z_degree, w_degree), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), C64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coefficient(&self, z_deg: u32, w_deg: u32) -> C64 {
        self.terms.get(&(z_deg, w_deg)).copied().unwrap_or_default()
    }

    /// Highest power of `w` present (0 for the zero polynomial).
    pub fn w_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, k)| k).max().unwrap_or(0)
    }

    pub fn z_degree(&self) -> u32 {
        self.terms.keys().map(|&(j, _)| j).max().unwrap_or(0)
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        self.terms
            .iter()
            .map(|(&(j, k), &c)| c * z.powu(j) * w.powu(k))
            .sum()
    }

    /// Sum of coefficient moduli weighted by `max(1,|z|)^j max(1,|w|)^k`; a
    /// magnitude against which a value of the polynomial at `(z, w)` is small.
    pub fn scale_at(&self, z: C64, w: C64) -> f64 {
        let (rz, rw) = (z.norm().max(1.0), w.norm().max(1.0));
        self.terms
            .iter()
            .map(|(&(j, k), c)| c.norm() * rz.powi(j as i32) * rw.powi(k as i32))
            .sum()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (&key, &c) in &other.terms {
            out.accumulate(key, c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Poly {
        let mut out = Poly::zero();
        for (&key, &c) in &self.terms {
            out.accumulate(key, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(j1, k1), &c1) in &self.terms {
            for (&(j2, k2), &c2) in &other.terms {
                out.accumulate((j1 + j2, k1 + k2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(C64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    fn accumulate(&mut self, key: (u32, u32), c: C64) {
        let entry = self.terms.entry(key).or_default();
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    /// Expression tree with `w` rendered as `conj(z)`.
    pub fn to_expr(&self) -> ExprNode {
        let mut acc: Option<ExprNode> = None;
        for (&(j, k), &c) in &self.terms {
            let mut term = ExprNode::Const(c);
            if j > 0 {
                term = ExprNode::Mul(Box::new(term), Box::new(power(ExprNode::Var, j)));
            }
            if k > 0 {
                term = ExprNode::Mul(Box::new(term), Box::new(power(ExprNode::ConjVar, k)));
            }
            acc = Some(match acc {
                None => term,
                Some(prev) => ExprNode::Add(Box::new(prev), Box::new(term)),
            });
        }
        acc.unwrap_or(ExprNode::Const(C64::new(0.0, 0.0)))
    }
}

fn power(base: ExprNode, n: u32) -> ExprNode {
    if n == 1 {
        base
    } else {
        ExprNode::IntPow(Box::new(base), n as i32)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr().display("z"))
    }
}

/// `P / Q` with `P, Q` polynomial in `z` and `w = z̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    pub num: Poly,
    pub den: Poly,
}

impl RationalForm {
    /// Numerator and denominator at an arbitrary point of `ℂ²`.
    pub fn eval_parts(&self, z: C64, w: C64) -> (C64, C64) {
        (self.num.eval(z, w), self.den.eval(z, w))
    }

    /// Value on the real plane, `P(z, z̄) / Q(z, z̄)`, without any guard.
    pub fn eval_plane(&self, z: C64) -> C64 {
        let (p, q) = self.eval_parts(z, z.conj());
        p / q
    }

    /// Builds the quotient form of an expression, or `None` when the tree
    /// contains `abs` or a function call.
    pub fn from_expr(node: &ExprNode) -> Option<RationalForm> {
        use ExprNode::*;
        let one = || Poly::constant(C64::new(1.0, 0.0));
        Some(match node {
            Var => RationalForm { num: Poly::z(), den: one() },
            ConjVar => RationalForm { num: Poly::w(), den: one() },
            Const(c) => RationalForm { num: Poly::constant(*c), den: one() },
            Abs | Call(..) => return None,
            Add(a, b) | Sub(a, b) => {
                let (x, y) = (Self::from_expr(a)?, Self::from_expr(b)?);
                let sign = if matches!(node, Sub(..)) { -1.0 } else { 1.0 };
                let y_num = y.num.scale(C64::new(sign, 0.0));
                if x.den == y.den {
                    RationalForm { num: x.num.add(&y_num), den: x.den }
                } else {
                    RationalForm {
                        num: x.num.mul(&y.den).add(&y_num.mul(&x.den)),
                        den: x.den.mul(&y.den),
                    }
                }
            }
            Mul(a, b) => {
                let (x, y) = (Self::from_expr(a)?, Self::from_expr(b)?);
                RationalForm { num: x.num.mul(&y.num), den: x.den.mul(&y.den) }
            }
            Div(a, b) => {
                let (x, y) = (Self::from_expr(a)?, Self::from_expr(b)?);
                RationalForm { num: x.num.mul(&y.den), den: x.den.mul(&y.num) }
            }
            IntPow(base, n) => {
                let x = Self::from_expr(base)?;
                let m = n.unsigned_abs();
                if *n >= 0 {
                    RationalForm { num: x.num.pow(m), den: x.den.pow(m) }
                } else {
                    RationalForm { num: x.den.pow(m), den: x.num.pow(m) }
                }
            }
        })
    }
}
