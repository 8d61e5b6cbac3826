//! Functions on the punctured plane built from `z`, `conj(z)`, `abs(z)`,
//! complex constants, arithmetic, integer powers and one-variable functions.
//!
//! The grammar is documented in `book/src/expressions.md`. Parsed models are
//! immutable and evaluation is pure, so a [`FunctionModel`] can be shared by
//! reference across worker threads.

mod parse;
pub mod poly;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::C64;
pub use parse::{parse, parse_definitions, parse_g};
pub use poly::{Poly, RationalForm};

/// Divisors with modulus below this are treated as exact poles.
pub const DIVISION_ZERO: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("division by a zero constant at position {pos}")]
    ZeroDenominator { pos: usize },
    #[error("invalid arguments for @{name}: {msg}")]
    Builtin { name: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("function is not defined at z = 0")]
    AtOrigin,
    #[error("division by a value of modulus {modulus:e}")]
    DivisionByZero { modulus: f64 },
    #[error("call to unregistered function `{0}`")]
    UnknownFunction(String),
}

/// Expression tree. `Var` is `z` at the top level and the parameter inside a
/// one-variable function body.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Var,
    ConjVar,
    Abs,
    Const(C64),
    Add(Box<ExprNode>, Box<ExprNode>),
    Sub(Box<ExprNode>, Box<ExprNode>),
    Mul(Box<ExprNode>, Box<ExprNode>),
    Div(Box<ExprNode>, Box<ExprNode>),
    IntPow(Box<ExprNode>, i32),
    Call(String, Box<ExprNode>),
}

/// A named one-variable function usable in `Call` nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum GFunction {
    /// `let name(param) = body`.
    Expr { param: String, body: ExprNode },
    /// Inverse of `ζ ↦ (a+ζ)/|a+ζ|` on the unit circle, `u ↦ s·u − a` with `s`
    /// the positive root of `|s·u − a| = 1`. Written `@phi_inv(a)`.
    PhiInverse { a: f64 },
}

impl GFunction {
    pub fn phi_inverse_name(a: f64) -> String {
        format!("@phi_inv({a:?})")
    }
}

/// Ordered name → function table. Bodies may call names defined earlier.
pub type Registry = Arc<Vec<(String, GFunction)>>;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    General,
    /// `P(z,z̄)/Q(z,z̄)`.
    Rational(RationalForm),
    /// `g(z/conj(z))`: constant on lines through the origin.
    LineConstant { g: String },
    /// `g(z/abs(z))`: constant on rays from the origin.
    RayConstant { g: String },
}

/// Anything that can be sampled on a circle.
pub trait ComplexFunction: Sync {
    fn eval(&self, z: C64) -> Result<C64, EvalError>;

    /// Value at `z = 0` for functions continuous there; `None` for functions
    /// living on the punctured plane only.
    fn origin_value(&self) -> Option<C64> {
        None
    }

    /// Bound on the rounding error of `eval(z)`, when one is known.
    fn rounding_bound(&self, _z: C64) -> Option<f64> {
        None
    }
}

/// Closure adaptor for [`ComplexFunction`].
pub struct Pure<F>(pub F);

impl<F: Fn(C64) -> C64 + Sync> ComplexFunction for Pure<F> {
    fn eval(&self, z: C64) -> Result<C64, EvalError> {
        Ok((self.0)(z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionModel {
    root: ExprNode,
    kind: ModelKind,
    registry: Registry,
    origin_value: Option<C64>,
}

impl FunctionModel {
    /// Wraps a tree, checking that every call resolves and detecting the kind
    /// from its template: `g(z/conj(z))`, `g(z/abs(z))`, or an `abs`- and
    /// call-free tree containing a division or a negative power.
    pub fn new(root: ExprNode, registry: Vec<(String, GFunction)>) -> Result<Self, EvalError> {
        let registry: Registry = Arc::new(registry);
        check_calls(&root, &registry)?;
        for (i, (_, g)) in registry.iter().enumerate() {
            if let GFunction::Expr { body, .. } = g {
                check_calls(body, &registry[..i])?;
            }
        }
        let kind = detect_kind(&root);
        let mut model = Self { root, kind, registry, origin_value: None };
        // P/Q with Q(0,0) ≠ 0 is continuous at the origin
        if let Some(form) = model.rational_form() {
            let zero = C64::new(0.0, 0.0);
            let (p, q) = form.eval_parts(zero, zero);
            if q != zero {
                model.origin_value = Some(p / q);
            }
        }
        Ok(model)
    }

    pub fn from_root(root: ExprNode) -> Result<Self, EvalError> {
        Self::new(root, Vec::new())
    }

    /// Declares the value at the origin, making the model continuous there.
    pub fn with_origin_value(mut self, value: C64) -> Self {
        self.origin_value = Some(value);
        self
    }

    pub fn root(&self) -> &ExprNode {
        &self.root
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn registry(&self) -> &[(String, GFunction)] {
        &self.registry
    }

    /// `P/Q` form when the tree has no `abs` and no calls, whatever the
    /// detected kind (so plain polynomials qualify with `Q = 1`).
    pub fn rational_form(&self) -> Option<RationalForm> {
        match &self.kind {
            ModelKind::Rational(form) => Some(form.clone()),
            _ => RationalForm::from_expr(&self.root),
        }
    }

    pub fn evaluate(&self, z: C64) -> Result<C64, EvalError> {
        if z == C64::new(0.0, 0.0) {
            return self.origin_value.ok_or(EvalError::AtOrigin);
        }
        eval_node(&self.root, z, &self.registry)
    }

    /// Evaluates the registered one-variable function `name` at `w`.
    pub fn call(&self, name: &str, w: C64) -> Result<C64, EvalError> {
        call_named(name, w, &self.registry)
    }

    /// The one-variable function of a line- or ray-constant model.
    pub fn boundary_g(&self) -> Option<NamedG<'_>> {
        match &self.kind {
            ModelKind::LineConstant { g } | ModelKind::RayConstant { g } => {
                Some(NamedG { model: self, name: g })
            }
            _ => None,
        }
    }

    /// A registered one-variable function as a standalone [`ComplexFunction`].
    pub fn g(&self, name: &str) -> Option<NamedG<'_>> {
        self.registry
            .iter()
            .find(|(n, _)| n == name)
            .map(|(n, _)| NamedG { model: self, name: n })
    }
}

/// Borrowed view of one registry entry.
pub struct NamedG<'a> {
    model: &'a FunctionModel,
    name: &'a str,
}

impl ComplexFunction for NamedG<'_> {
    fn eval(&self, w: C64) -> Result<C64, EvalError> {
        self.model.call(self.name, w)
    }
}

impl ComplexFunction for FunctionModel {
    fn eval(&self, z: C64) -> Result<C64, EvalError> {
        self.evaluate(z)
    }

    fn origin_value(&self) -> Option<C64> {
        self.origin_value
    }

    fn rounding_bound(&self, z: C64) -> Option<f64> {
        if z == C64::new(0.0, 0.0) {
            return self.origin_value.map(|_| 0.0);
        }
        eval_with_bound(&self.root, z).map(|(_, e)| e)
    }
}

fn check_calls(node: &ExprNode, registry: &[(String, GFunction)]) -> Result<(), EvalError> {
    use ExprNode::*;
    match node {
        Var | ConjVar | Abs | Const(_) => Ok(()),
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
            check_calls(a, registry)?;
            check_calls(b, registry)
        }
        IntPow(a, _) => check_calls(a, registry),
        Call(name, arg) => {
            if !registry.iter().any(|(n, _)| n == name) {
                return Err(EvalError::UnknownFunction(name.clone()));
            }
            check_calls(arg, registry)
        }
    }
}

fn detect_kind(root: &ExprNode) -> ModelKind {
    use ExprNode::*;
    if let Call(name, arg) = root {
        if let Div(num, den) = arg.as_ref() {
            match (num.as_ref(), den.as_ref()) {
                (Var, ConjVar) => return ModelKind::LineConstant { g: name.clone() },
                (Var, Abs) => return ModelKind::RayConstant { g: name.clone() },
                _ => {}
            }
        }
    }
    if has_quotient(root) {
        if let Some(form) = RationalForm::from_expr(root) {
            return ModelKind::Rational(form);
        }
    }
    ModelKind::General
}

fn has_quotient(node: &ExprNode) -> bool {
    use ExprNode::*;
    match node {
        Div(..) => true,
        IntPow(base, n) => *n < 0 || has_quotient(base),
        Add(a, b) | Sub(a, b) | Mul(a, b) => has_quotient(a) || has_quotient(b),
        Call(_, arg) => has_quotient(arg),
        Var | ConjVar | Abs | Const(_) => false,
    }
}

fn checked_div(num: C64, den: C64) -> Result<C64, EvalError> {
    let modulus = den.norm();
    if modulus < DIVISION_ZERO {
        return Err(EvalError::DivisionByZero { modulus });
    }
    Ok(num / den)
}

pub(crate) fn eval_node(node: &ExprNode, z: C64, registry: &[(String, GFunction)]) -> Result<C64, EvalError> {
    use ExprNode::*;
    Ok(match node {
        Var => z,
        ConjVar => z.conj(),
        Abs => C64::new(z.norm(), 0.0),
        Const(c) => *c,
        Add(a, b) => eval_node(a, z, registry)? + eval_node(b, z, registry)?,
        Sub(a, b) => eval_node(a, z, registry)? - eval_node(b, z, registry)?,
        Mul(a, b) => eval_node(a, z, registry)? * eval_node(b, z, registry)?,
        Div(a, b) => checked_div(eval_node(a, z, registry)?, eval_node(b, z, registry)?)?,
        IntPow(base, n) => {
            let x = eval_node(base, z, registry)?;
            if *n >= 0 {
                x.powu(*n as u32)
            } else {
                checked_div(C64::new(1.0, 0.0), x.powu(n.unsigned_abs()))?
            }
        }
        Call(name, arg) => call_named(name, eval_node(arg, z, registry)?, registry)?,
    })
}

/// Value together with a first-order bound on its accumulated rounding error,
/// counting the rounding of `z` itself. `None` for trees with calls or when a
/// division fails.
pub(crate) fn eval_with_bound(node: &ExprNode, z: C64) -> Option<(C64, f64)> {
    use ExprNode::*;
    const U: f64 = f64::EPSILON;
    Some(match node {
        Var | ConjVar => (if matches!(node, Var) { z } else { z.conj() }, U * z.norm()),
        Abs => (C64::new(z.norm(), 0.0), 2.0 * U * z.norm()),
        Const(c) => (*c, 0.0),
        Add(a, b) | Sub(a, b) => {
            let ((x, ex), (y, ey)) = (eval_with_bound(a, z)?, eval_with_bound(b, z)?);
            let v = if matches!(node, Add(..)) { x + y } else { x - y };
            (v, ex + ey + U * v.norm())
        }
        Mul(a, b) => {
            let ((x, ex), (y, ey)) = (eval_with_bound(a, z)?, eval_with_bound(b, z)?);
            let v = x * y;
            (v, x.norm() * ey + y.norm() * ex + 2.0 * U * v.norm())
        }
        Div(a, b) => {
            let ((x, ex), (y, ey)) = (eval_with_bound(a, z)?, eval_with_bound(b, z)?);
            let v = checked_div(x, y).ok()?;
            (v, (ex + v.norm() * ey) / y.norm() + 4.0 * U * v.norm())
        }
        IntPow(base, n) => {
            let (x, ex) = eval_with_bound(base, z)?;
            let m = n.unsigned_abs();
            let v = if *n >= 0 { x.powu(m) } else { checked_div(C64::new(1.0, 0.0), x.powu(m)).ok()? };
            // relative error grows by |n| per unit of relative error in x
            let rel = ex / x.norm() * m as f64 + 2.0 * U * m as f64;
            (v, if x.norm() == 0.0 { 0.0 } else { rel * v.norm() })
        }
        Call(..) => return None,
    })
}

fn call_named(name: &str, w: C64, registry: &[(String, GFunction)]) -> Result<C64, EvalError> {
    let idx = registry
        .iter()
        .position(|(n, _)| n == name)
        .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
    match &registry[idx].1 {
        // Bodies only see the entries defined before them.
        GFunction::Expr { body, .. } => eval_node(body, w, &registry[..idx]),
        GFunction::PhiInverse { a } => Ok(phi_inverse(*a, w)),
    }
}

/// `u ↦ s·u − a`, `s = Re(a ū) + sqrt(Re(a ū)² + 1 − a²)`.
pub fn phi_inverse(a: f64, u: C64) -> C64 {
    let proj = a * u.re; // Re(a ū) for real a
    let s = proj + (proj * proj + 1.0 - a * a).sqrt();
    u * s - a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    /// Real `t ≠ 0`.
    Line,
    /// Real `t > 0`.
    Ray,
}

/// Largest `|f(tz) − f(z)|` over `samples` random pairs, with `|z|` and `|t|`
/// log-uniform in `[0.1, 10]` and the sign of `t` random for [`ScaleKind::Line`].
pub fn scale_invariance_check(
    f: &FunctionModel,
    kind: ScaleKind,
    samples: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = C64::from_polar(10f64.powf(rng.gen_range(-1.0..1.0)), rng.gen_range(0.0..std::f64::consts::TAU));
        let mut t = 10f64.powf(rng.gen_range(-1.0..1.0));
        if kind == ScaleKind::Line && rng.gen_bool(0.5) {
            t = -t;
        }
        let diff = (f.evaluate(z * t)? - f.evaluate(z)?).norm();
        worst = worst.max(diff);
    }
    Ok(worst)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_const(c: C64) -> String {
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            format!("({})", fmt_f64(c.re))
        } else {
            fmt_f64(c.re)
        }
    } else {
        format!("({}+{}*i)", fmt_f64(c.re), fmt_f64(c.im))
    }
}

/// Fully parenthesised rendering with a chosen variable name.
pub struct NodeDisplay<'a> {
    node: &'a ExprNode,
    var: &'a str,
}

impl ExprNode {
    pub fn display<'a>(&'a self, var: &'a str) -> NodeDisplay<'a> {
        NodeDisplay { node: self, var }
    }
}

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ExprNode::*;
        let sub = |n: &'_ ExprNode| NodeDisplay { node: n, var: self.var }.to_string();
        match self.node {
            Var => write!(f, "{}", self.var),
            ConjVar => write!(f, "conj({})", self.var),
            Abs => write!(f, "abs({})", self.var),
            Const(c) => write!(f, "{}", fmt_const(*c)),
            Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
            Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
            Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
            Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
            IntPow(a, n) => write!(f, "{}^{}", wrap_base(&sub(a)), n),
            Call(name, arg) => write!(f, "{}({})", name, sub(arg)),
        }
    }
}

fn wrap_base(s: &str) -> String {
    if s.starts_with('(') && s.ends_with(')') && balanced_outer(s) {
        s.to_string()
    } else if s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '.') {
        s.to_string()
    } else {
        format!("({s})")
    }
}

fn balanced_outer(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i + 1 != s.len() {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

impl fmt::Display for FunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, g) in self.registry.iter() {
            if let GFunction::Expr { param, body } = g {
                write!(f, "let {}({}) = {} in ", name, param, body.display(param))?;
            }
        }
        write!(f, "{}", self.root.display("z"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn counterexample_evaluates_by_hand() {
        // (1+i)^2 / (1-i) = 2i(1+i)/2 = -1 + i
        let f = parse("z^2/conj(z)").unwrap();
        let v = f.evaluate(c(1.0, 1.0)).unwrap();
        assert!((v - c(-1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_and_ray_projection() {
        assert_eq!(parse("z").unwrap().evaluate(c(3.0, -2.0)).unwrap(), c(3.0, -2.0));
        let f = parse("let g(w) = w in g(z/abs(z))").unwrap();
        assert!((f.evaluate(c(0.0, 2.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn origin_is_rejected_unless_known() {
        let f = parse("z^2/conj(z)").unwrap();
        assert_eq!(f.evaluate(C64::new(0.0, 0.0)), Err(EvalError::AtOrigin));
        let f = f.with_origin_value(C64::new(0.0, 0.0));
        assert_eq!(f.evaluate(C64::new(0.0, 0.0)), Ok(C64::new(0.0, 0.0)));
        let g = parse("let g(w) = w in g(z/abs(z))").unwrap();
        assert_eq!(g.evaluate(C64::new(0.0, 0.0)), Err(EvalError::AtOrigin));
        // polynomials and P/Q with Q(0,0) != 0 are continuous there
        assert_eq!(parse("z + 2").unwrap().evaluate(C64::new(0.0, 0.0)), Ok(c(2.0, 0.0)));
        assert_eq!(parse("1/(z-2)").unwrap().evaluate(C64::new(0.0, 0.0)), Ok(c(-0.5, 0.0)));
    }

    #[test]
    fn runtime_division_by_zero() {
        let f = parse("1/(z-1)").unwrap();
        assert!(matches!(f.evaluate(c(1.0, 0.0)), Err(EvalError::DivisionByZero { .. })));
        let f = parse("(z-2)^-3").unwrap();
        assert!(matches!(f.evaluate(c(2.0, 0.0)), Err(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn kinds_follow_templates() {
        assert!(matches!(parse("z").unwrap().kind(), ModelKind::General));
        assert!(matches!(parse("z^2/conj(z)").unwrap().kind(), ModelKind::Rational(_)));
        assert!(matches!(
            parse("let g(w)=w^2 in g(z/conj(z))").unwrap().kind(),
            ModelKind::LineConstant { .. }
        ));
        assert!(matches!(
            parse("let g(w)=w^3 in g(z/abs(z))").unwrap().kind(),
            ModelKind::RayConstant { .. }
        ));
        // abs outside the template is general
        assert!(matches!(parse("abs(z)/z").unwrap().kind(), ModelKind::General));
    }

    #[test]
    fn scale_checks() {
        let line = parse("let g(w)=w^2 in g(z/conj(z))").unwrap();
        assert!(scale_invariance_check(&line, ScaleKind::Line, 500, 1).unwrap() < 1e-12);
        let ray = parse("let g(w)=w^3+w in g(z/abs(z))").unwrap();
        assert!(scale_invariance_check(&ray, ScaleKind::Ray, 500, 2).unwrap() < 1e-12);
        let id = parse("z").unwrap();
        assert!(scale_invariance_check(&id, ScaleKind::Ray, 100, 3).unwrap() > 1.0);
        // ray-constant is not line-constant in general
        assert!(scale_invariance_check(&ray, ScaleKind::Line, 200, 4).unwrap() > 0.1);
    }

    #[test]
    fn phi_inverse_inverts() {
        let a = 0.5;
        for k in 0..1024 {
            let u = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 1024.0);
            let zeta = phi_inverse(a, u);
            assert!((zeta.norm() - 1.0).abs() < 1e-13);
            let back = (zeta + a) / (zeta + a).norm();
            assert!((back - u).norm() < 1e-13);
        }
    }

    #[test]
    fn display_uses_variable_name() {
        let f = parse("let g(u) = u*conj(u) + abs(u) in g(z^-2)").unwrap();
        let text = f.to_string();
        assert!(text.starts_with("let g(u) = "));
        assert!(text.contains("conj(u)"));
        assert!(text.ends_with("g(z^-2)"));
    }

    #[test]
    fn later_bodies_call_earlier_functions() {
        let f = parse("let g(w) = w^2 in let h(u) = g(u) + 1 in h(z)").unwrap();
        assert_eq!(f.evaluate(c(2.0, 0.0)).unwrap(), c(5.0, 0.0));
    }
}
