//! Functions constant on lines or rays through the origin, and the circle
//! families they extend from.
//!
//! A function `f(z) = g(z/z̄)` extends from every circle surrounding the
//! origin when `g` is in the disc algebra. A function `f(z) = g(z/|z|)` is far
//! more rigid: it extends from two unit circles with centres `a ≠ ±b` inside
//! the disc only when `g` is even. The tools here check both statements
//! numerically and scan circle families for the centres that extend.

pub mod examples;
mod suite;

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::circles::{extension_defect, sample_on_circle, spectrum, BoundarySpectrum, Circle, CircleError, CircleSamples, DefectReport, Verdict};
use crate::expr::{ComplexFunction, EvalError, FunctionModel, ModelKind};
use crate::C64;
pub use examples::{example_7_product, example_7_vanishing, example_9_1, example_9_2};
pub use suite::{run_characterize_suite, CharacterizeSuite, SuiteRow};

/// Odd-energy threshold below which a boundary function counts as even.
pub const EVENNESS_TOL: f64 = 1e-10;
/// Smallest sample count accepted by the branch-tracked square root.
pub const MIN_BRANCH_SAMPLES: usize = 1024;
/// Largest argument step between neighbouring samples that the square-root
/// lift accepts.
pub const MAX_BRANCH_STEP: f64 = PI / 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharacterizeError {
    #[error("parameter {name} = {value} is out of range")]
    Parameter { name: &'static str, value: f64 },
    #[error("circle must not surround the origin (|a| = {center_modulus}, rho = {radius})")]
    SurroundsOrigin { center_modulus: f64, radius: f64 },
    #[error("g is even on the unit circle (odd energy {evenness:e}); g(z/|z|) then extends from many circles")]
    EvenG { evenness: f64 },
    #[error("expected a function of the form g(z/abs(z)) or g(z/conj(z))")]
    NotRayConstant,
    #[error("square root lost its branch at sample {k} (argument step {step:.3}); use a larger N")]
    BranchJump { k: usize, step: f64 },
    #[error("sample count {0} must be a power of two and at least {MIN_BRANCH_SAMPLES}")]
    SampleCount(usize),
    #[error("circle centres violate the constraints: {0}")]
    Centers(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

/// `2t/(1 + t²) = d`, solved for `t ∈ [0, 1)`.
pub fn t_from_d(d: f64) -> Result<f64, CharacterizeError> {
    if !(0.0..1.0).contains(&d) {
        return Err(CharacterizeError::Parameter { name: "d", value: d });
    }
    // (1 − sqrt(1 − d²))/d without the cancellation near d = 0
    Ok(d / (1.0 + (1.0 - d * d).sqrt()))
}

/// Distance `d` of a unit circle's centre from the origin, its direction `α`,
/// and the matching `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusParams {
    pub d: f64,
    pub t: f64,
    pub alpha: f64,
}

impl MobiusParams {
    pub fn new(d: f64, alpha: f64) -> Result<Self, CharacterizeError> {
        Ok(Self { d, t: t_from_d(d)?, alpha })
    }

    /// Parameters of a unit circle centred at `center`, `|center| < 1`.
    pub fn from_center(center: C64) -> Result<Self, CharacterizeError> {
        Self::new(center.norm(), center.arg())
    }

    /// `A = e^{2iα} t²`.
    pub fn big_a(&self) -> C64 {
        C64::from_polar(self.t * self.t, 2.0 * self.alpha)
    }
}

fn unit_circle_points(n: usize) -> impl Iterator<Item = C64> {
    (0..n).map(move |k| C64::from_polar(1.0, TAU * k as f64 / n as f64))
}

/// `M(x) = (x + A)/(1 + Āx)`.
pub fn disc_automorphism(big_a: C64, x: C64) -> C64 {
    (x + big_a) / (big_a.conj() * x + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusResiduals {
    /// `max |(a + M(ξ))/(1 + aM(ξ)) − (ξ + t)/(1 + tξ)|`, `M(ξ) = (ξ − t)/(1 − tξ)`.
    pub identity: f64,
    /// `max |M(ξ)(ξ + t)/(1 + tξ) − (ξ² − t²)/(1 − t²ξ²)|`.
    pub composite: f64,
}

pub fn mobius_identity_check(a: f64, samples: usize) -> Result<MobiusResiduals, CharacterizeError> {
    let t = t_from_d(a)?;
    let mut out = MobiusResiduals { identity: 0.0, composite: 0.0 };
    for xi in unit_circle_points(samples) {
        let m = (xi - t) / (1.0 - xi * t);
        let plus = (xi + t) / (1.0 + xi * t);
        let lhs = (m + a) / (m * a + 1.0);
        out.identity = out.identity.max((lhs - plus).norm());
        let square = (xi * xi - t * t) / (1.0 - xi * xi * (t * t));
        out.composite = out.composite.max((m * plus - square).norm());
    }
    Ok(out)
}

/// `max_ζ |f(a + ζρ) − g(ζ(ζ + a/ρ)/(1 + (ā/ρ)ζ))|` for `f = g(z/z̄)`.
pub fn line_boundary_transport<G>(g: &G, a: C64, rho: f64, samples: usize) -> Result<f64, CharacterizeError>
where
    G: ComplexFunction + ?Sized,
{
    if !(rho > 0.0) || a.norm() >= rho {
        return Err(CharacterizeError::Parameter { name: "rho", value: rho });
    }
    let mut worst = 0.0f64;
    for zeta in unit_circle_points(samples) {
        let z = a + zeta * rho;
        let direct = g.eval(z / z.conj())?;
        let moved = g.eval(zeta * (zeta + a / rho) / (zeta * a.conj() / rho + 1.0))?;
        worst = worst.max((direct - moved).norm());
    }
    Ok(worst)
}

/// Boundary values `q(ζ) = f(e^{iα} sqrt(ζ(d + ζ)/(1 + dζ)))` on the unit circle.
#[derive(Debug, Clone)]
pub struct RayTransport {
    pub values: Vec<C64>,
    pub spectrum: BoundarySpectrum,
}

/// Square root of `ζ(d + ζ)/(1 + dζ)` along `ζ = e^{2πik/N}`, lifted
/// continuously from `sqrt(1) = 1`.
pub fn lifted_root(d: f64, n: usize) -> Result<Vec<C64>, CharacterizeError> {
    if n < MIN_BRANCH_SAMPLES || !n.is_power_of_two() {
        return Err(CharacterizeError::SampleCount(n));
    }
    let mut out = Vec::with_capacity(n);
    let mut prev_arg = 0.0f64;
    let mut lifted = 0.0f64;
    for (k, zeta) in unit_circle_points(n).enumerate() {
        let v = zeta * (zeta + d) / (zeta * d + 1.0);
        let arg = v.arg();
        if k > 0 {
            let mut step = arg - prev_arg;
            step -= TAU * (step / TAU).round();
            if step.abs() > MAX_BRANCH_STEP {
                return Err(CharacterizeError::BranchJump { k, step });
            }
            lifted += step;
        } else {
            lifted = arg;
        }
        prev_arg = arg;
        out.push(C64::from_polar(v.norm().sqrt(), 0.5 * lifted));
    }
    Ok(out)
}

pub fn ray_boundary_transport(alpha: f64, d: f64, f: &FunctionModel, n: usize) -> Result<RayTransport, CharacterizeError> {
    if !matches!(f.kind(), ModelKind::RayConstant { .. } | ModelKind::LineConstant { .. }) {
        return Err(CharacterizeError::NotRayConstant);
    }
    if !(0.0..1.0).contains(&d) {
        return Err(CharacterizeError::Parameter { name: "d", value: d });
    }
    let rot = C64::from_polar(1.0, alpha);
    let values = lifted_root(d, n)?
        .into_iter()
        .map(|r| f.evaluate(rot * r))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = CircleSamples { circle: unit_circle(), offset: 0.0, values, noise: None };
    let spectrum = spectrum(&samples);
    Ok(RayTransport { values: samples.values, spectrum })
}

fn unit_circle() -> Circle {
    Circle { center: C64::new(0.0, 0.0), radius: 1.0 }
}

/// Relative `L²` mass of the odd Fourier coefficients of `g` on the unit circle.
pub fn evenness_defect<G>(g: &G, n: usize) -> Result<f64, CharacterizeError>
where
    G: ComplexFunction + ?Sized,
{
    Ok(spectrum(&sample_on_circle(g, &unit_circle(), n)?).odd_defect())
}

/// `re0:re1:im0:im1:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64, step: f64) -> Result<Self, CharacterizeError> {
        let all = [re0, re1, im0, im1, step];
        if all.iter().any(|x| !x.is_finite()) || !(step > 0.0) || re1 < re0 || im1 < im0 {
            return Err(CharacterizeError::Grid(format!("invalid grid {re0}:{re1}:{im0}:{im1}:{step}")));
        }
        let g = Self { re0, re1, im0, im1, step };
        if g.columns() * g.rows() > 10_000_000 {
            return Err(CharacterizeError::Grid("more than 10^7 cells".into()));
        }
        Ok(g)
    }

    fn count(lo: f64, hi: f64, step: f64) -> usize {
        ((hi - lo) / step + 1e-9).floor() as usize + 1
    }

    pub fn columns(&self) -> usize {
        Self::count(self.re0, self.re1, self.step)
    }

    pub fn rows(&self) -> usize {
        Self::count(self.im0, self.im1, self.step)
    }

    /// Lattice coordinate. When `lo` is a whole number of steps the point is
    /// formed as `k·step`, so `-0.9:…:0.05` puts a centre exactly at 0.5.
    fn coord(&self, lo: f64, i: usize) -> f64 {
        let k0 = lo / self.step;
        let x = if (k0 - k0.round()).abs() < 1e-9 {
            (k0.round() + i as f64) * self.step
        } else {
            lo + i as f64 * self.step
        };
        if x.abs() < 1e-9 * self.step {
            0.0
        } else {
            x
        }
    }

    /// Centres row by row: imaginary part outer, real part inner, both increasing.
    pub fn centers(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.columns());
        for j in 0..self.rows() {
            for i in 0..self.columns() {
                out.push(C64::new(self.coord(self.re0, i), self.coord(self.im0, j)));
            }
        }
        out
    }
}

impl FromStr for GridSpec {
    type Err = CharacterizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CharacterizeError::Grid(format!("`{s}`: {e}")))?;
        match parts[..] {
            [re0, re1, im0, im1, step] => Self::new(re0, re1, im0, im1, step),
            _ => Err(CharacterizeError::Grid(format!("`{s}`: expected re0:re1:im0:im1:step"))),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{:?}:{:?}:{:?}", self.re0, self.re1, self.im0, self.im1, self.step)
    }
}

/// One scanned centre; sampling failures stay local to the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub center: C64,
    pub outcome: Result<DefectReport, CircleError>,
}

impl ScanCell {
    pub fn defect(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.defect)
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.outcome.as_ref().ok().map(|r| r.verdict)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectMap {
    pub radius: f64,
    pub grid: GridSpec,
    pub cells: Vec<ScanCell>,
    /// Centres whose verdict is `extends`.
    pub minima: Vec<C64>,
}

/// Extension defect of `f` on `b∆(c, radius)` for every lattice centre `c`.
/// Cells run in parallel and are gathered in lattice order.
pub fn defect_scan<F>(f: &F, radius: f64, grid: &GridSpec, n: usize, tolerance: f64) -> Result<DefectMap, CharacterizeError>
where
    F: ComplexFunction + ?Sized,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CharacterizeError::Parameter { name: "radius", value: radius });
    }
    let cells: Vec<ScanCell> = grid
        .centers()
        .into_par_iter()
        .map(|center| ScanCell {
            center,
            outcome: extension_defect(f, &Circle { center, radius }, n, tolerance),
        })
        .collect();
    let minima = cells.iter().filter(|c| c.verdict() == Some(Verdict::Extends)).map(|c| c.center).collect();
    Ok(DefectMap { radius, grid: *grid, cells, minima })
}

/// Outcome of testing a ray-constant function on two unit circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub defects: [f64; 2],
    pub both_extend: bool,
    /// Odd energy of `u ↦ f(u)` on the unit circle.
    pub evenness: f64,
    /// `both_extend ⇒ evenness < EVENNESS_TOL`.
    pub consistent: bool,
}

/// Checks that a ray-constant `f` extending from `b∆(a, 1)` and `b∆(b, 1)`,
/// `a, b ∈ ∆`, `b ≠ ±a`, restricts to an even function on the unit circle.
pub fn theorem_10_1_witness(
    f: &FunctionModel,
    c1: &Circle,
    c2: &Circle,
    n: usize,
    tolerance: f64,
) -> Result<Witness, CharacterizeError> {
    if !matches!(f.kind(), ModelKind::RayConstant { .. } | ModelKind::LineConstant { .. }) {
        return Err(CharacterizeError::NotRayConstant);
    }
    const SAME: f64 = 1e-12;
    for c in [c1, c2] {
        if (c.radius - 1.0).abs() > SAME || c.center.norm() >= 1.0 {
            return Err(CharacterizeError::Centers("circles must have radius 1 and centre in the unit disc".into()));
        }
    }
    if (c2.center - c1.center).norm() <= SAME || (c2.center + c1.center).norm() <= SAME {
        return Err(CharacterizeError::Centers("the centres must satisfy b != a and b != -a".into()));
    }
    let r1 = extension_defect(f, c1, n, tolerance)?;
    let r2 = extension_defect(f, c2, n, tolerance)?;
    let both_extend = r1.verdict == Verdict::Extends && r2.verdict == Verdict::Extends;
    let evenness = evenness_defect(f, n)?;
    Ok(Witness {
        defects: [r1.defect, r2.defect],
        both_extend,
        evenness,
        consistent: !both_extend || evenness < EVENNESS_TOL,
    })
}

/// Composition of two disc automorphisms `x ↦ (x + A)/(1 + Āx)` written as a
/// single automorphism `W² ↦ e^{iθ}(W² + C)/(1 + C̄W²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubstitutionChain {
    pub a1: C64,
    pub a2: C64,
    /// `C` fitted from three samples.
    pub fitted_c: C64,
    /// `e^{iθ}` fitted alongside `C`.
    pub rotation: C64,
    /// `max |Y − e^{iθ}(X + C)/(1 + C̄X)|` over the samples.
    pub closure_residual: f64,
    /// `(A₂ − A₁)/(1 − Ā₁A₂)`.
    pub conjugate_candidate: C64,
    /// `(A₂ − A₁)/(1 − A₁A₂)`.
    pub plain_candidate: C64,
    pub distance_to_conjugate: f64,
    pub distance_to_plain: f64,
    /// `(1 − Ā₁A₂)/(1 − A₁Ā₂)`, the rotation the algebra predicts.
    pub predicted_rotation: C64,
    /// Closure residual of the rotation-free form with the plain candidate.
    pub plain_form_residual: f64,
}

fn solve3(m: [[C64; 3]; 3], rhs: [C64; 3]) -> Option<[C64; 3]> {
    let det = |m: &[[C64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.norm() < 1e-14 {
        return None;
    }
    let mut out = [C64::new(0.0, 0.0); 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}

/// With `X = (Z² + A₁)/(1 + Ā₁Z²)` and `Y = (Z² + A₂)/(1 + Ā₂Z²)`, fits
/// `Y = p(X + C)/(1 + C̄X)` on the unit circle and compares `C` with the two
/// closed forms.
pub fn substitution_chain(p1: &MobiusParams, p2: &MobiusParams, samples: usize) -> Result<SubstitutionChain, CharacterizeError> {
    let (a1, a2) = (p1.big_a(), p2.big_a());
    if (a1 - a2).norm() < 1e-12 {
        return Err(CharacterizeError::Centers("the two circles coincide".into()));
    }
    if samples < 3 {
        return Err(CharacterizeError::SampleCount(samples));
    }
    let pair = |z: C64| (disc_automorphism(a1, z * z), disc_automorphism(a2, z * z));
    // Y(1 + rX) = pX + q is linear in (p, q, r)
    let probes = [0.1, 0.1 + TAU / 3.0, 0.1 + 2.0 * TAU / 3.0].map(|th| pair(C64::from_polar(1.0, 0.5 * th)));
    let m = probes.map(|(x, y)| [x, C64::new(1.0, 0.0), -(x * y)]);
    let rhs = probes.map(|(_, y)| y);
    let [p, q, _r] = solve3(m, rhs).ok_or_else(|| CharacterizeError::Centers("degenerate chain".into()))?;
    let c = q / p;
    let rebuild = |rot: C64, c: C64, x: C64| rot * (x + c) / (c.conj() * x + 1.0);
    let conjugate_candidate = (a2 - a1) / (1.0 - a1.conj() * a2);
    let plain_candidate = (a2 - a1) / (1.0 - a1 * a2);
    let (mut closure, mut plain) = (0.0f64, 0.0f64);
    for z in unit_circle_points(samples) {
        let (x, y) = pair(z);
        closure = closure.max((y - rebuild(p, c, x)).norm());
        plain = plain.max((y - rebuild(C64::new(1.0, 0.0), plain_candidate, x)).norm());
    }
    let d = 1.0 - a1.conj() * a2;
    Ok(SubstitutionChain {
        a1,
        a2,
        fitted_c: c,
        rotation: p,
        closure_residual: closure,
        conjugate_candidate,
        plain_candidate,
        distance_to_conjugate: (c - conjugate_candidate).norm(),
        distance_to_plain: (c - plain_candidate).norm(),
        predicted_rotation: d / d.conj(),
        plain_form_residual: plain,
    })
}
