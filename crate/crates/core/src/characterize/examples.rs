//! Closed-form example functions: the vanishing products, the inverse of
//! `ζ ↦ (a + ζ)/|a + ζ|` pulled back along rays, and `g(z/|z|)` for odd-ish `g`.

use super::{evenness_defect, CharacterizeError, EVENNESS_TOL};
use crate::circles::DEFAULT_N;
use crate::expr::{ExprNode, FunctionModel, GFunction};
use crate::C64;

fn b(node: ExprNode) -> Box<ExprNode> {
    Box::new(node)
}

/// `(z − a)(z̄ − ā) − ρ²`, vanishing on `b∆(a, ρ)`.
fn circle_factor(a: C64, rho: f64) -> ExprNode {
    use ExprNode::*;
    Sub(
        b(Mul(b(Sub(b(Var), b(Const(a)))), b(Sub(b(ConjVar), b(Const(a.conj())))))),
        b(Const(C64::new(rho * rho, 0.0))),
    )
}

/// `(z²/z̄)^n · Π_j [(z − a_j)(z̄ − ā_j) − ρ_j²]`, continuous at the origin
/// with value 0.
pub fn example_7_product(params: &[(C64, f64)]) -> Result<FunctionModel, CharacterizeError> {
    use ExprNode::*;
    if params.is_empty() {
        return Err(CharacterizeError::Parameter { name: "factors", value: 0.0 });
    }
    for &(a, rho) in params {
        if !(rho > 0.0) || a.norm() <= rho {
            return Err(CharacterizeError::SurroundsOrigin { center_modulus: a.norm(), radius: rho });
        }
    }
    let base = Div(b(IntPow(b(Var), 2)), b(ConjVar));
    let n = params.len() as i32;
    let mut root = if n == 1 { base } else { IntPow(b(base), n) };
    for &(a, rho) in params {
        root = Mul(b(root), b(circle_factor(a, rho)));
    }
    let model = FunctionModel::from_root(root).expect("no calls");
    Ok(model.with_origin_value(C64::new(0.0, 0.0)))
}

/// `(z²/z̄)[(z − a)(z̄ − ā) − ρ²]` for a circle not surrounding the origin.
pub fn example_7_vanishing(a: C64, rho: f64) -> Result<FunctionModel, CharacterizeError> {
    example_7_product(&[(a, rho)])
}

/// `f(z) = Φ⁻¹(z/|z|)` with `Φ(ζ) = (a + ζ)/|a + ζ|`, so that `f(a + ζ) = ζ`
/// on the unit circle.
pub fn example_9_1(a: f64) -> Result<FunctionModel, CharacterizeError> {
    use ExprNode::*;
    if !(a > 0.0 && a < 1.0) {
        return Err(CharacterizeError::Parameter { name: "a", value: a });
    }
    let name = GFunction::phi_inverse_name(a);
    let root = Call(name.clone(), b(Div(b(Var), b(Abs))));
    Ok(FunctionModel::new(root, vec![(name, GFunction::PhiInverse { a })]).expect("registered"))
}

/// `f(z) = g(z/|z|)`; `g` must not be even on the unit circle.
pub fn example_9_2(g: GFunction) -> Result<FunctionModel, CharacterizeError> {
    use ExprNode::*;
    let root = Call("g".into(), b(Div(b(Var), b(Abs))));
    let model = FunctionModel::new(root, vec![("g".into(), g)])?;
    let evenness = evenness_defect(&model.g("g").expect("registered"), DEFAULT_N)?;
    if evenness < EVENNESS_TOL {
        return Err(CharacterizeError::EvenG { evenness });
    }
    Ok(model)
}
