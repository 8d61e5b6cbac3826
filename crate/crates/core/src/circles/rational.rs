//! Closed-form extension of rational functions of `z, z̄` from a circle.
//!
//! On `b∆(a, ρ)` one has `z̄ = ā + ρ²/(z − a)`, so `P(z,z̄)/Q(z,z̄)` agrees there
//! with the meromorphic function `P(z, w(z)) / Q(z, w(z))`, `w(z) = ā + ρ²/(z−a)`.
//! The boundary values extend holomorphically exactly when this quotient has no
//! pole in `∆(a, ρ)`.

use super::{Circle, CircleError};
use crate::expr::{FunctionModel, Poly};
use crate::C64;

/// `w(z) = ā + ρ²/(z − a)`.
fn reflected(c: &Circle, z: C64) -> C64 {
    c.center.conj() + c.radius * c.radius / (z - c.center)
}

/// `P(p, w(p)) / Q(p, w(p))` for a model with a `P/Q` form.
pub fn rational_extension_eval(f: &FunctionModel, c: &Circle, p: C64) -> Result<C64, CircleError> {
    let form = f.rational_form().ok_or(CircleError::NotRational)?;
    if p == c.center {
        return Err(CircleError::AtCenter);
    }
    let w = reflected(c, p);
    let (num, den) = form.eval_parts(p, w);
    if den.norm() < 1e-12 {
        return Err(CircleError::PoleAtPoint { modulus: den.norm() });
    }
    Ok(num / den)
}

/// Polynomial in one variable, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
struct UniPoly(Vec<C64>);

impl UniPoly {
    fn constant(c: C64) -> Self {
        UniPoly(vec![c])
    }

    fn mul(&self, other: &UniPoly) -> UniPoly {
        let mut out = vec![C64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly(out)
    }

    fn add_assign(&mut self, other: &UniPoly) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), C64::new(0.0, 0.0));
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    fn pow(&self, n: u32) -> UniPoly {
        (0..n).fold(UniPoly::constant(C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for &c in self.0.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    }

    /// `Σ |c_k| max(1,|z|)^k`.
    fn scale_at(&self, z: C64) -> f64 {
        let r = z.norm().max(1.0);
        self.0.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == C64::new(0.0, 0.0))
    }
}

/// `(z − a)^m P(z, w(z))` and `(z − a)^m Q(z, w(z))` as polynomials in `z`,
/// `m` the larger `w`-degree. Their quotient is the extension; zeros of the
/// denominator not shared by the numerator are its poles.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearedExtension {
    num: UniPoly,
    den: UniPoly,
}

impl ClearedExtension {
    pub fn new(num: &Poly, den: &Poly, c: &Circle) -> Self {
        let m = num.w_degree().max(den.w_degree());
        let a = c.center;
        // ā(z − a) + ρ²
        let lifted = UniPoly(vec![C64::new(c.radius * c.radius - a.norm_sqr(), 0.0), a.conj()]);
        let shift = UniPoly(vec![-a, C64::new(1.0, 0.0)]);
        let z = UniPoly(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let clear = |p: &Poly| {
            let mut out = UniPoly::constant(C64::new(0.0, 0.0));
            for ((j, k), coeff) in p.terms() {
                let term = UniPoly::constant(coeff)
                    .mul(&z.pow(j))
                    .mul(&lifted.pow(k))
                    .mul(&shift.pow(m - k));
                out.add_assign(&term);
            }
            out
        };
        Self { num: clear(num), den: clear(den) }
    }

    pub fn numerator(&self, z: C64) -> C64 {
        self.num.eval(z)
    }

    pub fn denominator(&self, z: C64) -> C64 {
        self.den.eval(z)
    }
}

/// A zero of the cleared denominator inside the disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearPole {
    pub location: C64,
    /// `|Q̃|` at the polished location.
    pub denominator: f64,
    /// `|P̃|` at the polished location; well away from 0 for a genuine pole.
    pub numerator: f64,
}

const NEWTON_STEPS: usize = 200;

fn polish(p: &UniPoly, mut z: C64) -> C64 {
    for _ in 0..NEWTON_STEPS {
        let (v, d) = p.eval_with_derivative(z);
        if d.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let step = v / d;
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Grid search for interior poles of the extension of a rational model.
///
/// `|Q̃|` is tabulated on a `resolution × resolution` lattice over the disc,
/// each local minimum is polished by Newton's method on `Q̃`, and the zeros
/// that stay inside the open disc and are not shared with `P̃` are returned,
/// sorted by distance from the centre.
pub fn rational_pole_scan(f: &FunctionModel, c: &Circle, resolution: usize) -> Result<Vec<NearPole>, CircleError> {
    let form = f.rational_form().ok_or(CircleError::NotRational)?;
    let ext = ClearedExtension::new(&form.num, &form.den, c);
    if ext.den.is_zero() {
        return Err(CircleError::DegenerateDenominator);
    }
    if ext.den.0.len() == 1 {
        return Ok(Vec::new());
    }
    let res = resolution.max(3);
    let step = 2.0 / (res - 1) as f64;
    let coord = |i: usize| -1.0 + step * i as f64;
    let mut grid = vec![None::<f64>; res * res];
    for i in 0..res {
        for j in 0..res {
            let u = C64::new(coord(i), coord(j));
            if u.norm() < 1.0 {
                grid[i * res + j] = Some(ext.den.eval(c.center + u * c.radius).norm());
            }
        }
    }
    let mut found: Vec<NearPole> = Vec::new();
    for i in 0..res {
        for j in 0..res {
            let Some(v) = grid[i * res + j] else { continue };
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= res as i64 || nj >= res as i64 {
                        return true;
                    }
                    grid[ni as usize * res + nj as usize].is_none_or(|nv| v <= nv)
                })
            });
            if !is_min {
                continue;
            }
            let start = c.center + C64::new(coord(i), coord(j)) * c.radius;
            let z = polish(&ext.den, start);
            if (z - c.center).norm() >= c.radius {
                continue;
            }
            let den = ext.den.eval(z).norm();
            if den > 1e-8 * ext.den.scale_at(z) {
                continue;
            }
            let num = ext.num.eval(z).norm();
            if num <= 1e-8 * ext.num.scale_at(z) {
                continue;
            }
            if found.iter().any(|p| (p.location - z).norm() < 1e-7 * (1.0 + z.norm())) {
                continue;
            }
            found.push(NearPole { location: z, denominator: den, numerator: num });
        }
    }
    found.sort_by(|a, b| {
        (a.location - c.center).norm().total_cmp(&(b.location - c.center).norm())
    });
    Ok(found)
}
