//! Randomized property checks over the geometry operations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use super::*;

/// Outcome of one property over all of its trials.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub trials: usize,
    /// Largest residual seen, or the number of violations for boolean checks.
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometrySuite {
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl GeometrySuite {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(|p| p.pass)
    }
}

fn residual(name: &'static str, trials: usize, worst: f64, tolerance: f64) -> PropertyResult {
    PropertyResult { name, trials, worst, tolerance, pass: worst < tolerance }
}

fn count(name: &'static str, trials: usize, failures: usize) -> PropertyResult {
    PropertyResult { name, trials, worst: failures as f64, tolerance: 0.0, pass: failures == 0 }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn disc_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A circle not surrounding the origin: `ρ ∈ [0.2, 2]`, `|a|/ρ ∈ [1.1, 4]`.
pub(crate) fn outside_circle(rng: &mut ChaCha8Rng) -> (C64, f64) {
    let rho = rng.gen_range(0.2..2.0);
    let a = C64::from_polar(rho * rng.gen_range(1.1..4.0), rng.gen_range(0.0..TAU));
    (a, rho)
}

fn random_point(rng: &mut ChaCha8Rng) -> VarietyPoint {
    loop {
        let p = VarietyPoint::new(disc_point(rng, 3.0), disc_point(rng, 3.0));
        if !p.on_sigma() {
            return p;
        }
    }
}

/// `(z, w) ↦ a = circle_through` followed by the quadric residual.
pub fn roundtrip_residual(p: &VarietyPoint, radius: f64) -> Result<(bool, f64), GeometryError> {
    let a = circle_through(p, radius)?;
    let res = ((p.z - a) * (p.w - a.conj()) - radius * radius).norm() / (radius * radius);
    Ok((lambda_contains(p, a, radius), res))
}

/// Relative error of `R² = t(t + 1)|z − w̄|²` with `t = |a − z| / |z − w̄|`,
/// together with the misalignment of `a − z` against `t(z − w̄)`.
pub fn t_recovery_residual(p: &VarietyPoint, radius: f64) -> Result<f64, GeometryError> {
    let a = circle_through(p, radius)?;
    let d = p.z - p.w.conj();
    let t = (a - p.z).norm() / d.norm();
    let eq = (radius * radius - t * (t + 1.0) * d.norm_sqr()).abs() / (radius * radius);
    let align = ((a - p.z) - d * t).norm() / (a - p.z).norm().max(f64::MIN_POSITIVE);
    Ok(eq.max(align))
}

/// Relative distance between the two centre formulas at one slice point.
pub fn slice_consistency(z: C64, t: f64, phi: f64, radius: f64) -> Result<(bool, f64), GeometryError> {
    let a = perpendicular_slice_center(z, t, phi, radius)?;
    let p = slice_point(z, t, phi);
    let b = circle_through(&p, radius)?;
    let scale = a.norm().max(radius);
    Ok((lambda_contains(&p, a, radius), (a - b).norm() / scale))
}

/// Worst distance from a ray-search root to the predicted circles, and the
/// worst tangent cosine at their intersections, for one circle.
pub fn factorization_check(a: C64, rho: f64, directions: usize) -> Result<(usize, f64, f64), GeometryError> {
    let circles = v_cap_bomega(a, rho)?;
    let roots = bomega_ray_roots(a, rho, directions, 2000);
    let dist = roots.iter().map(|&z| distance_to_circles(z, &circles)).fold(0.0, f64::max);
    let cos = if circles.len() == 2 {
        circle_intersections(&circles[0], &circles[1])
            .into_iter()
            .map(|p| tangent_cosine(p, &circles[0], &circles[1]))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok((roots.len(), dist, cos))
}

/// Runs every geometry property; `tol` bounds the relative algebraic residuals.
pub fn run_geometry_suite(trials: usize, seed: u64, tol: f64) -> GeometrySuite {
    let mut properties = Vec::new();
    let circle_trials = trials.min(50);

    let mut rng = rng_for(seed, 1);
    let (mut worst, mut misses) = (0.0f64, 0);
    for _ in 0..trials {
        let p = random_point(&mut rng);
        let radius = log_uniform(&mut rng, 0.1, 10.0);
        let (inside, res) = roundtrip_residual(&p, radius).expect("off sigma");
        worst = worst.max(res);
        misses += usize::from(!inside);
    }
    properties.push(residual("circle_through_roundtrip", trials, worst, tol));
    properties.push(count("circle_through_in_lambda", trials, misses));

    let mut rng = rng_for(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let p = random_point(&mut rng);
        let radius = log_uniform(&mut rng, 0.1, 10.0);
        worst = worst.max(t_recovery_residual(&p, radius).expect("off sigma"));
    }
    properties.push(residual("t_recovery", trials, worst, tol));

    let mut rng = rng_for(seed, 3);
    let (mut worst, mut misses) = (0.0f64, 0);
    for _ in 0..trials {
        let z = disc_point(&mut rng, 3.0);
        let t = log_uniform(&mut rng, 1e-3, 10.0);
        let phi = rng.gen_range(-PI..PI);
        let radius = log_uniform(&mut rng, 0.1, 10.0);
        let (inside, res) = slice_consistency(z, t, phi, radius).expect("t > 0");
        worst = worst.max(res);
        misses += usize::from(!inside);
    }
    properties.push(residual("perpendicular_slice_consistency", trials, worst, tol));
    properties.push(count("perpendicular_slice_in_lambda", trials, misses));

    let mut rng = rng_for(seed, 4);
    let mut disagreements = 0;
    for _ in 0..trials {
        let z = loop {
            let z = disc_point(&mut rng, 3.0);
            if z.norm() > 0.0 {
                break z;
            }
        };
        let zeta = disc_point(&mut rng, 3.0);
        let lhs = halfplane_criterion(z, zeta).expect("z nonzero");
        let rhs = omega_contains(&VarietyPoint::new(z + zeta, z.conj() - zeta.conj()));
        disagreements += usize::from(lhs != rhs);
    }
    properties.push(count("halfplane_slice_identity", trials, disagreements));

    let mut rng = rng_for(seed, 5);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = disc_point(&mut rng, 4.0);
        let rho = log_uniform(&mut rng, 0.1, 4.0);
        let z = disc_point(&mut rng, 6.0);
        if let Ok(sides) = factorization_sides(z, a, rho) {
            worst = worst.max(sides.relative_residual());
        }
    }
    properties.push(residual("factorization_identity", trials, worst, tol));

    let mut rng = rng_for(seed, 6);
    let mut violations = 0;
    for _ in 0..trials {
        let (a, r) = outside_circle(&mut rng);
        let z = disc_point(&mut rng, 2.0 * a.norm());
        if z == a {
            continue;
        }
        let p = VarietyPoint::new(z, a.conj() + r * r / (z - a));
        let ok = match v_component_membership(&p, a, r).expect("|a| > r") {
            Component::V3 | Component::V4 => omega_contains(&p),
            Component::V1 | Component::V2 => p.w.norm() < p.z.norm(),
            Component::None => true,
        };
        violations += usize::from(!ok);
    }
    properties.push(count("component_consistency", trials, violations));

    let mut rng = rng_for(seed, 7);
    let circles: Vec<(C64, f64)> = (0..circle_trials).map(|_| outside_circle(&mut rng)).collect();
    let checks: Vec<(usize, f64, f64)> = circles
        .par_iter()
        .map(|&(a, rho)| factorization_check(a, rho, 720).expect("|a| > rho"))
        .collect();
    let no_roots = checks.iter().filter(|c| c.0 == 0).count();
    let dist = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    let cos = checks.iter().map(|c| c.2).fold(0.0, f64::max);
    properties.push(count("ray_search_found_roots", circle_trials, no_roots));
    properties.push(residual("ray_roots_on_circles", circle_trials, dist, 1e-9));
    properties.push(residual("circles_meet_at_right_angle", circle_trials, cos, 1e-9));

    let b = C64::new(2.0, 0.0);
    let ts = [0.0, 0.25, 0.5, 0.75, 0.99];
    let failures = ts
        .iter()
        .filter(|&&t| {
            let check = deformation_boundary_check(b, 1.0, t, 2048).expect("|b| > r");
            !(check.all_in_omega && check.min_margin > 0.0)
        })
        .count();
    properties.push(count("deformation_boundary_in_omega", ts.len(), failures));

    let mut rng = rng_for(seed, 8);
    let mut failures = 0;
    for _ in 0..trials {
        let (b, r) = outside_circle(&mut rng);
        failures += usize::from(!deformation_origin_check(b, r).expect("|b| > r"));
    }
    properties.push(count("deformation_reaches_origin", trials, failures));

    let annulus = Annulus::new(C64::new(0.0, 0.0), 1.0, 3.0).expect("valid annulus");
    let inside = slab_containment_check(&annulus, 0.05, 50.0, trials, seed.wrapping_add(9)).expect("centred");
    properties.push(count("slab_in_annulus_domain", trials, usize::from(!inside)));

    GeometrySuite { seed, properties }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let a = run_geometry_suite(200, 3, 1e-10);
        for p in &a.properties {
            assert!(p.pass, "{p:?}");
        }
        let b = run_geometry_suite(200, 3, 1e-10);
        let worst: Vec<f64> = a.properties.iter().map(|p| p.worst).collect();
        assert_eq!(worst, b.properties.iter().map(|p| p.worst).collect::<Vec<_>>());
    }
}
