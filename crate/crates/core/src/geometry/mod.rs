//! Complex curves in `ℂ²` attached to circles, and the domain `|w| > |z|`.
//!
//! Points of the real plane are embedded in `ℂ²` as `(z, z̄)`; the set of them is
//! `Σ`. For a circle `b∆(a, ρ)` the quadric
//!
//! ```text
//! V_{a,ρ} = {(z, w) : (z − a)(w − ā) = ρ²}
//! ```
//!
//! meets `Σ` exactly along the circle, and the part over the punctured disc,
//! `Λ_{a,ρ}`, carries the holomorphic extension of boundary data. The union of
//! all `Λ_{a,ρ}` over circles surrounding the origin is `Ω = {|w| > |z|}`.

mod suite;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circles::Circle;
use crate::C64;
pub use suite::{run_geometry_suite, GeometrySuite, PropertyResult};

/// Relative tolerance on the quadric equation.
pub const VARIETY_TOL: f64 = 1e-10;
/// Width of the band around a bounding circle that counts as boundary.
pub const BOUNDARY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point lies on the real plane (w = conj(z))")]
    OnSigma,
    #[error("parameter {name} = {value} is out of range")]
    Parameter { name: &'static str, value: f64 },
    #[error("circle must not surround or pass through the origin (|a| = {center_modulus}, r = {radius})")]
    SurroundsOrigin { center_modulus: f64, radius: f64 },
    #[error("circle passes through the origin (|a| = rho); the factorization degenerates")]
    ThroughOrigin,
    #[error("z coincides with the centre")]
    AtCenter,
    #[error("annulus must be centred at the origin")]
    OffCenterAnnulus,
}

fn positive(name: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::Parameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarietyPoint {
    pub z: C64,
    pub w: C64,
}

impl VarietyPoint {
    pub fn new(z: C64, w: C64) -> Self {
        Self { z, w }
    }

    /// `(z, z̄)`.
    pub fn on_plane(z: C64) -> Self {
        Self { z, w: z.conj() }
    }

    pub fn on_sigma(&self) -> bool {
        self.w == self.z.conj()
    }

    /// `z − w̄`; zero exactly on `Σ`.
    fn offset(&self) -> C64 {
        self.z - self.w.conj()
    }
}

/// `(z − a)(w − ā) = R²` to [`VARIETY_TOL`] and `0 < |z − a| < R`.
pub fn lambda_contains(p: &VarietyPoint, a: C64, radius: f64) -> bool {
    let eq = (p.z - a) * (p.w - a.conj()) - radius * radius;
    let d = (p.z - a).norm();
    eq.norm() < VARIETY_TOL * (radius * radius).max(1.0) && d > 0.0 && d < radius
}

/// Centre of the unique circle of radius `R` whose curve `Λ_{a,R}` passes
/// through `p`:
///
/// ```text
/// a = z + ½ (sqrt(1 + 4R²/|z − w̄|²) − 1)(z − w̄).
/// ```
pub fn circle_through(p: &VarietyPoint, radius: f64) -> Result<C64, GeometryError> {
    positive("R", radius)?;
    let d = p.offset();
    if d.norm() == 0.0 {
        return Err(GeometryError::OnSigma);
    }
    let ratio = 4.0 * radius * radius / d.norm_sqr();
    // sqrt(1 + x) − 1 = x / (sqrt(1 + x) + 1), stable for small x.
    let t = 0.5 * ratio / ((1.0 + ratio).sqrt() + 1.0);
    Ok(p.z + d * t)
}

/// `(z, z̄) + (t e^{iφ}, −t e^{−iφ})`: a point of the plane through `(z, z̄)`
/// perpendicular to `Σ`.
pub fn slice_point(z: C64, t: f64, phi: f64) -> VarietyPoint {
    let u = C64::from_polar(t, phi);
    VarietyPoint::new(z + u, z.conj() - u.conj())
}

/// `a = z + sqrt(t² + R²) e^{iφ}`: the centre whose curve contains
/// [`slice_point`]`(z, t, φ)`.
pub fn perpendicular_slice_center(z: C64, t: f64, phi: f64, radius: f64) -> Result<C64, GeometryError> {
    positive("t", t)?;
    positive("R", radius)?;
    Ok(z + C64::from_polar((t * t + radius * radius).sqrt(), phi))
}

/// `|w| > |z|`.
pub fn omega_contains(p: &VarietyPoint) -> bool {
    p.w.norm() > p.z.norm()
}

/// `Re(z̄ ζ) < 0`, which decides whether `(z, z̄) + (ζ, −ζ̄)` lies in `Ω`.
pub fn halfplane_criterion(z: C64, zeta: C64) -> Result<bool, GeometryError> {
    if z == C64::new(0.0, 0.0) {
        return Err(GeometryError::Parameter { name: "z", value: 0.0 });
    }
    Ok((z.conj() * zeta).re < 0.0)
}

/// `{r1 ≤ |ζ − center| ≤ r2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Annulus {
    pub center: C64,
    pub r1: f64,
    pub r2: f64,
}

impl Annulus {
    pub fn new(center: C64, r1: f64, r2: f64) -> Result<Self, GeometryError> {
        positive("r1", r1)?;
        positive("r2", r2)?;
        if r1 >= r2 {
            return Err(GeometryError::Parameter { name: "r2", value: r2 });
        }
        Ok(Self { center, r1, r2 })
    }

    /// `(r1 + r2) / 2`.
    pub fn mid_radius(&self) -> f64 {
        0.5 * (self.r1 + self.r2)
    }
}

/// Membership in the union of the curves `Λ_{b,ρ}` over circles in the
/// interior of `A` surrounding its centre.
///
/// That union is the disjoint union of the `Λ_{b,γ}` with `γ` the mid radius,
/// so `p` belongs to it iff the circle of radius `γ` through `p` fits inside
/// the annulus around its centre.
pub fn omega_annulus_contains(p: &VarietyPoint, annulus: &Annulus) -> Result<bool, GeometryError> {
    let gamma = annulus.mid_radius();
    let b = circle_through(p, gamma)?;
    let off = (b - annulus.center).norm();
    Ok(off < gamma && gamma - off > annulus.r1 && gamma + off < annulus.r2)
}

/// Draws `trials` points with `|z| ≤ δ` and `M ≤ |w| ≤ 10M` and reports
/// whether all of them lie in the annular wedge domain of `annulus`.
pub fn slab_containment_check(
    annulus: &Annulus,
    delta: f64,
    big_m: f64,
    trials: usize,
    seed: u64,
) -> Result<bool, GeometryError> {
    if annulus.center != C64::new(0.0, 0.0) {
        return Err(GeometryError::OffCenterAnnulus);
    }
    positive("delta", delta)?;
    positive("M", big_m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let z = C64::from_polar(delta * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let w = C64::from_polar(rng.gen_range(big_m..=10.0 * big_m), rng.gen_range(0.0..std::f64::consts::TAU));
        match omega_annulus_contains(&VarietyPoint::new(z, w), annulus) {
            Ok(true) => {}
            Ok(false) | Err(GeometryError::OnSigma) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Position of a point relative to `∆(a, r)` and `∆(0, sqrt(|a|² − r²))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionLabel {
    /// Inside both discs.
    D1,
    /// Outside both closed discs.
    D2,
    /// Inside the disc about the origin only.
    D3,
    /// Inside `∆(a, r)` only.
    D4,
    Boundary,
}

fn check_outside(a: C64, r: f64) -> Result<f64, GeometryError> {
    positive("r", r)?;
    if a.norm() <= r {
        return Err(GeometryError::SurroundsOrigin { center_modulus: a.norm(), radius: r });
    }
    Ok((a.norm_sqr() - r * r).sqrt())
}

pub fn region_classify(z: C64, a: C64, r: f64) -> Result<RegionLabel, GeometryError> {
    let s = check_outside(a, r)?;
    let band = BOUNDARY_BAND * a.norm().max(1.0);
    let (da, d0) = ((z - a).norm(), z.norm());
    if (da - r).abs() <= band || (d0 - s).abs() <= band {
        return Ok(RegionLabel::Boundary);
    }
    Ok(match (da < r, d0 < s) {
        (true, true) => RegionLabel::D1,
        (false, false) => RegionLabel::D2,
        (false, true) => RegionLabel::D3,
        (true, false) => RegionLabel::D4,
    })
}

/// Both sides of
///
/// ```text
/// |z − a|² (|ā + ρ²/(z − a)|² − |z|²) = (|a|² − ρ² − |z|²)(|z − a|² − ρ²)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationSides {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest magnitude of the terms involved; residuals are relative to it.
    pub scale: f64,
}

impl FactorizationSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual() / self.scale.max(f64::MIN_POSITIVE)
    }
}

pub fn factorization_sides(z: C64, a: C64, rho: f64) -> Result<FactorizationSides, GeometryError> {
    positive("rho", rho)?;
    if z == a {
        return Err(GeometryError::AtCenter);
    }
    let d2 = (z - a).norm_sqr();
    let w = a.conj() + rho * rho / (z - a);
    let lhs = d2 * (w.norm_sqr() - z.norm_sqr());
    let first = a.norm_sqr() - rho * rho - z.norm_sqr();
    let second = d2 - rho * rho;
    let rhs = first * second;
    let scale = [
        d2 * w.norm_sqr(),
        d2 * z.norm_sqr(),
        (a.norm_sqr() + rho * rho + z.norm_sqr()) * (d2 + rho * rho),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(FactorizationSides { lhs, rhs, scale })
}

/// Absolute residual of the factorization identity at `z`.
pub fn identity_4_1_residual(z: C64, a: C64, rho: f64) -> Result<f64, GeometryError> {
    Ok(factorization_sides(z, a, rho)?.residual())
}

/// Projection to the `z`-plane of `V_{a,ρ} ∩ bΩ`: the circle itself, plus
/// `b∆(0, sqrt(|a|² − ρ²))` when the circle does not surround the origin.
pub fn v_cap_bomega(a: C64, rho: f64) -> Result<Vec<Circle>, GeometryError> {
    positive("rho", rho)?;
    let own = Circle { center: a, radius: rho };
    let m = a.norm();
    if m == rho {
        return Err(GeometryError::ThroughOrigin);
    }
    if m < rho {
        return Ok(vec![own]);
    }
    Ok(vec![own, Circle { center: C64::new(0.0, 0.0), radius: (m * m - rho * rho).sqrt() }])
}

/// `|ā(z − a) + ρ²|² − |z|²|z − a|²`, whose zero set is `V_{a,ρ} ∩ bΩ`
/// projected to the `z`-plane (the pole at `z = a` cleared).
fn bomega_equation(z: C64, a: C64, rho: f64) -> f64 {
    (a.conj() * (z - a) + rho * rho).norm_sqr() - z.norm_sqr() * (z - a).norm_sqr()
}

/// Roots of [`bomega_equation`] along `directions` rays from the origin,
/// located by sign changes on a uniform grid and refined by bisection.
pub fn bomega_ray_roots(a: C64, rho: f64, directions: usize, steps: usize) -> Vec<C64> {
    let reach = 2.0 * (a.norm() + rho) + 1.0;
    let mut roots = Vec::new();
    for d in 0..directions {
        let dir = C64::from_polar(1.0, std::f64::consts::TAU * d as f64 / directions as f64);
        let h = |s: f64| bomega_equation(dir * s, a, rho);
        let mut prev_s = 0.0;
        let mut prev_h = h(prev_s);
        for k in 1..=steps {
            let s = reach * k as f64 / steps as f64;
            let v = h(s);
            if v == 0.0 {
                roots.push(dir * s);
            } else if prev_h != 0.0 && (v > 0.0) != (prev_h > 0.0) {
                let (mut lo, mut hi, mut hlo) = (prev_s, s, prev_h);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let hm = h(mid);
                    if hm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (hm > 0.0) == (hlo > 0.0) {
                        lo = mid;
                        hlo = hm;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(dir * (0.5 * (lo + hi)));
            }
            prev_s = s;
            prev_h = v;
        }
    }
    roots
}

/// Distance from `z` to the nearest of `circles`.
pub fn distance_to_circles(z: C64, circles: &[Circle]) -> f64 {
    circles
        .iter()
        .map(|c| ((z - c.center).norm() - c.radius).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Intersection points of two circles, from the general two-circle formula.
pub fn circle_intersections(c1: &Circle, c2: &Circle) -> Vec<C64> {
    let delta = c2.center - c1.center;
    let d = delta.norm();
    if d == 0.0 || d > c1.radius + c2.radius || d < (c1.radius - c2.radius).abs() {
        return Vec::new();
    }
    let u = delta / d;
    let x = (d * d + c1.radius * c1.radius - c2.radius * c2.radius) / (2.0 * d);
    let h = (c1.radius * c1.radius - x * x).max(0.0).sqrt();
    let base = c1.center + u * x;
    let perp = u * C64::new(0.0, 1.0) * h;
    if h == 0.0 {
        vec![base]
    } else {
        vec![base + perp, base - perp]
    }
}

/// `|cos|` of the angle between the tangents of two circles at a common point.
pub fn tangent_cosine(p: C64, c1: &Circle, c2: &Circle) -> f64 {
    // tangents are the radii turned by a right angle, so compare the radii
    let (r1, r2) = (p - c1.center, p - c2.center);
    (r1.re * r2.re + r1.im * r2.im).abs() / (r1.norm() * r2.norm())
}

/// Piece of `V_{a,r}` over the regions `D1..D4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    V1,
    V2,
    V3,
    V4,
    None,
}

/// Which piece of `V_{a,r}` contains `p`; `None` off the quadric, on the
/// boundary circles, or over the centre.
pub fn v_component_membership(p: &VarietyPoint, a: C64, r: f64) -> Result<Component, GeometryError> {
    check_outside(a, r)?;
    let eq = (p.z - a) * (p.w - a.conj()) - r * r;
    if eq.norm() > VARIETY_TOL * (r * r).max(1.0) || p.z == a {
        return Ok(Component::None);
    }
    Ok(match region_classify(p.z, a, r)? {
        RegionLabel::D1 => Component::V1,
        RegionLabel::D2 => Component::V2,
        RegionLabel::D3 => Component::V3,
        RegionLabel::D4 => Component::V4,
        RegionLabel::Boundary => Component::None,
    })
}

/// Points of `bD1(b, r)`: the arc of `b∆(b, r)` inside `∆̄(0, s)` followed by
/// the arc of `b∆(0, s)` inside `∆̄(b, r)`, `s = sqrt(|b|² − r²)`.
pub fn d1_boundary(b: C64, r: f64, samples: usize) -> Result<Vec<C64>, GeometryError> {
    let s = check_outside(b, r)?;
    let big_b = b.norm();
    let beta = b.arg();
    let per_arc = (samples / 2).max(2);
    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (per_arc - 1) as f64;
    let phi0 = (-r / big_b).acos();
    let psi0 = (s / big_b).acos();
    let mut out = Vec::with_capacity(2 * per_arc);
    for k in 0..per_arc {
        out.push(b + C64::from_polar(r, beta + lin(phi0, std::f64::consts::TAU - phi0, k)));
    }
    for k in 0..per_arc {
        out.push(C64::from_polar(s, beta + lin(-psi0, psi0, k)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformationCheck {
    pub all_in_omega: bool,
    pub min_margin: f64,
}

/// Boundary of the deformed disc `{(tz, b̄ + r²/(z − b)) : z ∈ D1(b, r)}`:
/// whether every sampled boundary point satisfies `|w| > |tz|`, and the
/// smallest `|w| − |tz|`.
pub fn deformation_boundary_check(b: C64, r: f64, t: f64, samples: usize) -> Result<DeformationCheck, GeometryError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GeometryError::Parameter { name: "t", value: t });
    }
    let pts = d1_boundary(b, r, samples)?;
    let min_margin = pts
        .iter()
        .map(|&z| (b.conj() + r * r / (z - b)).norm() - (z * t).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(DeformationCheck { all_in_omega: min_margin > 0.0, min_margin })
}

/// Whether `z* = b − r²/b̄`, where `b̄ + r²/(z − b)` vanishes, lies in the
/// closure of `D1(b, r)`, so that the flattened disc passes through `(0, 0)`.
pub fn deformation_origin_check(b: C64, r: f64) -> Result<bool, GeometryError> {
    let s = check_outside(b, r)?;
    let z_star = b - r * r / b.conj();
    let band = BOUNDARY_BAND * b.norm().max(1.0);
    Ok((z_star - b).norm() <= r + band && z_star.norm() <= s + band)
}
