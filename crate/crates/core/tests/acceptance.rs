//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Independent oracles (naive DFT, closed-form pole and intersection
//! locations, hand-expanded identities) sit next to the library calls they
//! check.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;

use circext::characterize::{
    defect_scan, example_7_product, example_7_vanishing, example_9_1, example_9_2, line_boundary_transport,
    mobius_identity_check, substitution_chain, t_from_d, GridSpec, MobiusParams,
};
use circext::circles::{extension_defect, rational_pole_scan, sample_on_circle, DEFAULT_N};
use circext::expr::{parse, parse_g, ExprNode, FunctionModel};
use circext::geometry::{
    bomega_ray_roots, circle_intersections, circle_through, deformation_boundary_check, deformation_origin_check,
    distance_to_circles, factorization_sides, halfplane_criterion, lambda_contains, omega_contains,
    perpendicular_slice_center, slice_point, tangent_cosine, v_cap_bomega, VarietyPoint,
};
use circext::{Circle, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20_240_601);
    r.set_stream(stream);
    r
}

fn polar(r: &mut ChaCha8Rng, modulus: f64) -> C64 {
    C64::from_polar(modulus, r.gen_range(0.0..TAU))
}

fn disc(r: &mut ChaCha8Rng, radius: f64) -> C64 {
    let m = radius * r.gen::<f64>().sqrt();
    polar(r, m)
}

/// Circle with `|a| ≤ 0.9ρ`.
fn surrounding(r: &mut ChaCha8Rng) -> Circle {
    let rho = r.gen_range(0.3..3.0);
    let m = rho * r.gen_range(0.0..0.9);
    let a = polar(r, m);
    Circle::new(a, rho).unwrap()
}

/// Circle with `|a| = ρ`.
fn through_origin(r: &mut ChaCha8Rng) -> Circle {
    let rho = r.gen_range(0.3..3.0);
    Circle::new(polar(r, rho), rho).unwrap()
}

/// `sqrt(Σ_{n<0}|c_n|² / Σ|c_n|²)` by the O(N²) definition.
fn naive_defect(values: &[C64]) -> f64 {
    let n = values.len();
    let (mut neg, mut total) = (0.0, 0.0);
    for k in 0..n {
        let freq = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
        let mut c = C64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            c += v * C64::from_polar(1.0, -TAU * (freq * j as i64) as f64 / n as f64);
        }
        let e = (c / n as f64).norm_sqr();
        total += e;
        if freq < 0 {
            neg += e;
        }
    }
    (neg / total).sqrt()
}

fn criterion_1() -> Outcome {
    let f = parse("z^2/conj(z)").unwrap();
    let mut r = rng(1);
    let mut inside_worst = 0.0f64;
    for _ in 0..50 {
        let c = surrounding(&mut r);
        inside_worst = inside_worst.max(extension_defect(&f, &c, DEFAULT_N, 1e-8).unwrap().defect);
    }
    let (mut outside_min, mut pole_err, mut naive_gap) = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..50 {
        let rho = r.gen_range(0.3..3.0);
        let m = rho * r.gen_range(1.5..4.0);
        let a = polar(&mut r, m);
        let c = Circle::new(a, rho).unwrap();
        let d = extension_defect(&f, &c, DEFAULT_N, 1e-8).unwrap().defect;
        outside_min = outside_min.min(d);
        // the closed-form extension z²(z − a)/(ā(z − a) + ρ²) has its pole here
        let expected = a - rho * rho / a.conj();
        let poles = rational_pole_scan(&f, &c, 101).unwrap();
        let nearest = poles.iter().map(|p| (p.location - expected).norm()).fold(f64::INFINITY, f64::min);
        pole_err = pole_err.max(nearest);
        if i < 3 {
            let s = sample_on_circle(&f, &c, 256).unwrap();
            let lib = extension_defect(&f, &c, 256, 1e-8).unwrap().defect;
            naive_gap = naive_gap.max((naive_defect(&s.values) - lib).abs());
        }
    }
    Outcome {
        pass: inside_worst < 1e-10 && outside_min > 0.01 && pole_err < 1e-6 && naive_gap < 1e-12,
        detail: format!(
            "z^2/conj(z): max defect on surrounding circles {inside_worst:.2e} (<1e-10), min defect on outside circles {outside_min:.3} (>0.01), pole error {pole_err:.2e} (<1e-6), naive DFT gap {naive_gap:.1e}"
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (mut worst, mut oracle_worst) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let a = disc(&mut r, 4.0);
        let rho = r.gen_range(0.1..4.0);
        let z = disc(&mut r, 6.0);
        let sides = factorization_sides(z, a, rho).unwrap();
        worst = worst.max(sides.relative_residual());
        // expanded by hand: |ā(z − a) + ρ²|² − |z|²|z − a|² versus the product
        let lhs = (a.conj() * (z - a) + rho * rho).norm_sqr() - z.norm_sqr() * (z - a).norm_sqr();
        let rhs = (a.norm_sqr() - rho * rho - z.norm_sqr()) * ((z - a).norm_sqr() - rho * rho);
        let scale = (a.norm_sqr() + rho * rho + z.norm_sqr()) * ((z - a).norm_sqr() + rho * rho);
        oracle_worst = oracle_worst.max((lhs - rhs).abs() / scale);
    }
    Outcome {
        pass: worst < 1e-10 && oracle_worst < 1e-10,
        detail: format!("factorization identity: max relative residual {worst:.2e}, hand expansion {oracle_worst:.2e} (<1e-10) over 10^4 draws"),
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut dist, mut cos, mut pyth, mut roots) = (0.0f64, 0.0f64, 0.0f64, usize::MAX);
    for _ in 0..50 {
        let rho = r.gen_range(0.2..2.0);
        let m = rho * r.gen_range(1.1..4.0);
        let a = polar(&mut r, m);
        let circles = v_cap_bomega(a, rho).unwrap();
        let found = bomega_ray_roots(a, rho, 720, 2000);
        roots = roots.min(found.len());
        for z in &found {
            dist = dist.max(distance_to_circles(*z, &circles));
        }
        for p in circle_intersections(&circles[0], &circles[1]) {
            cos = cos.max(tangent_cosine(p, &circles[0], &circles[1]));
        }
        // orthogonal circles: squared distance of centres = sum of squared radii
        let d2 = (circles[0].center - circles[1].center).norm_sqr();
        pyth = pyth.max((d2 - circles[0].radius.powi(2) - circles[1].radius.powi(2)).abs() / d2);
    }
    Outcome {
        pass: roots > 0 && dist < 1e-9 && cos < 1e-9 && pyth < 1e-12,
        detail: format!("ray-search roots within {dist:.2e} of the two circles (<1e-9), tangent cosine {cos:.2e} (<1e-9), at least {roots} roots per circle"),
    }
}

fn off_sigma(r: &mut ChaCha8Rng) -> VarietyPoint {
    loop {
        let p = VarietyPoint::new(disc(r, 3.0), disc(r, 3.0));
        if !p.on_sigma() {
            return p;
        }
    }
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let (mut roundtrip, mut t_res, mut slice, mut misses) = (0.0f64, 0.0f64, 0.0f64, 0);
    for _ in 0..1000 {
        let p = off_sigma(&mut r);
        let radius = r.gen_range(0.1..10.0);
        let a = circle_through(&p, radius).unwrap();
        misses += usize::from(!lambda_contains(&p, a, radius));
        roundtrip = roundtrip.max(((p.z - a) * (p.w - a.conj()) - radius * radius).norm() / (radius * radius));
        let d = p.z - p.w.conj();
        let t = (a - p.z).norm() / d.norm();
        t_res = t_res.max((radius * radius - t * (t + 1.0) * d.norm_sqr()).abs() / (radius * radius));
    }
    for _ in 0..1000 {
        let z = disc(&mut r, 3.0);
        let t = r.gen_range(1e-3..5.0);
        let phi = r.gen_range(-PI..PI);
        let radius = r.gen_range(0.1..10.0);
        let a = perpendicular_slice_center(z, t, phi, radius).unwrap();
        let p = slice_point(z, t, phi);
        misses += usize::from(!lambda_contains(&p, a, radius));
        let b = circle_through(&p, radius).unwrap();
        slice = slice.max((a - b).norm() / a.norm().max(radius));
    }
    Outcome {
        pass: misses == 0 && roundtrip < 1e-10 && t_res < 1e-10 && slice < 1e-10,
        detail: format!(
            "centre formulas: quadric residual {roundtrip:.2e}, t recovery {t_res:.2e}, slice consistency {slice:.2e} (<1e-10), {misses} points outside their curve"
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut disagree = 0;
    for _ in 0..10_000 {
        let z = disc(&mut r, 3.0);
        let zeta = disc(&mut r, 3.0);
        let half = halfplane_criterion(z, zeta).unwrap();
        disagree += usize::from(half != omega_contains(&VarietyPoint::new(z + zeta, z.conj() - zeta.conj())));
    }
    Outcome { pass: disagree == 0, detail: format!("half-plane criterion versus |w| > |z|: {disagree} disagreements in 10^4 draws") }
}

fn criterion_6() -> Outcome {
    let b = C64::new(2.0, 0.0);
    let mut margins = Vec::new();
    let mut ok = true;
    for t in [0.0, 0.25, 0.5, 0.75, 0.99] {
        let check = deformation_boundary_check(b, 1.0, t, 4096).unwrap();
        ok &= check.all_in_omega && check.min_margin > 0.0;
        margins.push(format!("{:.3}", check.min_margin));
    }
    let mut r = rng(6);
    let mut origin_fail = 0;
    for _ in 0..100 {
        let rr = r.gen_range(0.1..3.0);
        let m = rr * r.gen_range(1.01..5.0);
        let bb = polar(&mut r, m);
        let lib = deformation_origin_check(bb, rr).unwrap();
        // |z*| = (|b|² − r²)/|b| ≤ sqrt(|b|² − r²) and |z* − b| = r²/|b| ≤ r
        let z_star = bb - rr * rr / bb.conj();
        let oracle = z_star.norm() <= (bb.norm_sqr() - rr * rr).sqrt() + 1e-12 && (z_star - bb).norm() <= rr + 1e-12;
        origin_fail += usize::from(!(lib && oracle));
    }
    Outcome {
        pass: ok && origin_fail == 0,
        detail: format!("deformed discs: boundary margins [{}] all positive, origin reached for {} of 100 circles", margins.join(", "), 100 - origin_fail),
    }
}

fn defect(f: &FunctionModel, c: &Circle) -> f64 {
    extension_defect(f, c, DEFAULT_N, 1e-8).unwrap().defect
}

fn criterion_7() -> Outcome {
    let a = C64::new(2.0, 0.0);
    let g = example_7_vanishing(a, 1.0).unwrap();
    let mut r = rng(7);
    let mut worst = defect(&g, &Circle::new(a, 1.0).unwrap());
    for _ in 0..10 {
        worst = worst.max(defect(&g, &surrounding(&mut r)));
    }
    for _ in 0..5 {
        worst = worst.max(defect(&g, &through_origin(&mut r)));
    }
    let h = example_7_product(&[(a, 1.0), (C64::new(-3.0, 0.0), 1.0)]).unwrap();
    let own = defect(&h, &Circle::new(a, 1.0).unwrap()).max(defect(&h, &Circle::new(C64::new(-3.0, 0.0), 1.0).unwrap()));
    let generic = defect(&h, &Circle::new(a, 0.3).unwrap());
    Outcome {
        pass: worst < 1e-10 && own < 1e-10 && generic > 0.01,
        detail: format!(
            "vanishing examples: single factor max defect {worst:.2e} (<1e-10), two factors on their circles {own:.2e} (<1e-10), on (2; 0.3) {generic:.3} (>0.01)"
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let (mut worst, mut transport) = (0.0f64, 0.0f64);
    for g in ["w", "w^2", "w^3 + 0.2*w"] {
        let f = parse(&format!("let g(w) = {g} in g(z/conj(z))")).unwrap();
        for _ in 0..25 {
            worst = worst.max(defect(&f, &surrounding(&mut r)));
        }
        let body = f.g("g").unwrap();
        for _ in 0..5 {
            let c = surrounding(&mut r);
            transport = transport.max(line_boundary_transport(&body, c.center, c.radius, 1024).unwrap());
        }
    }
    Outcome {
        pass: worst < 1e-9 && transport < 1e-13,
        detail: format!("line-constant family: max defect {worst:.2e} (<1e-9), boundary transport residual {transport:.2e} (<1e-13)"),
    }
}

fn nearest_center(grid: &GridSpec, target: C64) -> C64 {
    grid.centers().into_iter().min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm())).unwrap()
}

fn criterion_9() -> Outcome {
    let grid: GridSpec = "-0.9:0.9:-0.9:0.9:0.05".parse().unwrap();
    let f = example_9_1(0.5).unwrap();
    let map = defect_scan(&f, 1.0, &grid, 2048, 1e-8).unwrap();
    let mut expected = vec![nearest_center(&grid, C64::new(-0.5, 0.0)), nearest_center(&grid, C64::new(0.5, 0.0))];
    let mut got = map.minima.clone();
    let key = |c: &C64| (c.re, c.im);
    expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    let first = got == expected;
    let errors = map.cells.iter().filter(|c| c.outcome.is_err()).count();

    let g = example_9_2(parse_g("w", "w^3").unwrap()).unwrap();
    let map2 = defect_scan(&g, 1.0, &grid, 2048, 1e-8).unwrap();
    let second = map2.minima == vec![nearest_center(&grid, C64::new(0.0, 0.0))];
    Outcome {
        pass: first && second,
        detail: format!(
            "scans: phi-inverse example extends at {:?} (expected ±0.5, {errors} unsampled cells), odd g = w^3 extends at {:?} (expected 0)",
            got.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>(),
            map2.minima.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>()
        ),
    }
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut mob = 0.0f64;
    for _ in 0..20 {
        let m = mobius_identity_check(r.gen_range(0.0..0.99), 1024).unwrap();
        mob = mob.max(m.identity).max(m.composite);
    }
    let mut inv = 0.0f64;
    for _ in 0..10_000 {
        let d = r.gen_range(0.0..1.0);
        let t = t_from_d(d).unwrap();
        inv = inv.max((2.0 * t / (1.0 + t * t) - d).abs());
    }
    let (mut closure, mut to_conj, mut to_plain) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..10 {
        let p1 = MobiusParams::new(r.gen_range(0.1..0.95), r.gen_range(-PI..PI)).unwrap();
        let p2 = MobiusParams::new(r.gen_range(0.1..0.95), r.gen_range(-PI..PI)).unwrap();
        let ch = substitution_chain(&p1, &p2, 512).unwrap();
        closure = closure.max(ch.closure_residual);
        to_conj = to_conj.max(ch.distance_to_conjugate);
        to_plain = to_plain.min(ch.distance_to_plain);
    }
    Outcome {
        pass: mob < 1e-13 && inv < 1e-14 && closure < 1e-11,
        detail: format!(
            "Mobius residual {mob:.2e} (<1e-13), t(d) inverse {inv:.2e} (<1e-14), chain closure {closure:.2e} (<1e-11); fitted C is within {to_conj:.1e} of (A2-A1)/(1-conj(A1)A2) and at least {to_plain:.1e} from (A2-A1)/(1-A1A2)"
        ),
    }
}

/// Random tree over `z`, `conj(z)`, `abs(z)`, constants and the five operations.
fn random_tree(r: &mut ChaCha8Rng, depth: u32) -> ExprNode {
    use ExprNode::*;
    let leaf = depth == 0 || r.gen_bool(0.25);
    if leaf {
        return match r.gen_range(0..4) {
            0 => Var,
            1 => ConjVar,
            2 => Abs,
            _ => {
                let re = (r.gen_range(-5.0..5.0f64) * 1000.0).round() / 1000.0;
                let im = if r.gen_bool(0.5) { 0.0 } else { r.gen_range(-5.0..5.0) };
                Const(C64::new(re, im))
            }
        };
    }
    let sub = |r: &mut ChaCha8Rng| Box::new(random_tree(r, depth - 1));
    match r.gen_range(0..6) {
        0 => Add(sub(r), sub(r)),
        1 => Sub(sub(r), sub(r)),
        2 => Mul(sub(r), sub(r)),
        3 => Div(sub(r), Box::new(Add(Box::new(Const(C64::new(3.0, 0.0))), sub(r)))),
        4 => IntPow(sub(r), r.gen_range(-3..=4)),
        // a call next to another subtree, so calls sit inside larger trees
        _ => {
            let arg = Div(Box::new(Var), Box::new(if r.gen_bool(0.5) { ConjVar } else { Abs }));
            Add(Box::new(Call("g".into(), Box::new(arg))), sub(r))
        }
    }
}

fn criterion_11() -> Outcome {
    let mut r = rng(11);
    let g_body = parse_g("w", "w^2 - 0.5*w + 1").unwrap();
    let (mut worst, mut failures) = (0.0f64, 0);
    for _ in 0..200 {
        let tree = random_tree(&mut r, 4);
        let model = match FunctionModel::new(tree, vec![("g".into(), g_body.clone())]) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let text = model.to_string();
        let Ok(back) = parse(&text) else {
            failures += 1;
            continue;
        };
        for _ in 0..5 {
            let z = disc(&mut r, 2.0) + C64::new(0.01, 0.0);
            match (model.evaluate(z), back.evaluate(z)) {
                (Ok(x), Ok(y)) => worst = worst.max((x - y).norm() / x.norm().max(1.0)),
                (Err(_), Err(_)) => {}
                _ => failures += 1,
            }
        }
    }
    let examples = [
        "z^2/conj(z)",
        "(z^2/conj(z))*((z-2)*(conj(z)-2) - 1)",
        "(z^2/conj(z))^2*((z-2)*(conj(z)-2) - 1)*((z+3)*(conj(z)+3) - 1)",
        "@example7(2, 1)",
        "@example7product(2, 1, -3, 1)",
        "@example9_1(0.5)",
        "@example9_2(w^3)",
        "@phi_inv(0.5)(z/abs(z))",
        "let g(w) = w in g(z/conj(z))",
        "let g(w) = w^2 in g(z/conj(z))",
        "let g(w) = w^3 + 0.2*w in g(z/conj(z))",
        "let g(w) = w^3 in g(z/abs(z))",
    ];
    let bad: Vec<&str> = examples.iter().copied().filter(|e| parse(e).is_err()).collect();
    Outcome {
        pass: failures == 0 && worst <= 1e-14 && bad.is_empty(),
        detail: format!("parser: 200 printed trees re-parse with max disagreement {worst:.1e} (<=1e-14), {failures} failures; {} of {} example expressions parse", examples.len() - bad.len(), examples.len()),
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let o = run();
        println!("criterion {id:>2} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
