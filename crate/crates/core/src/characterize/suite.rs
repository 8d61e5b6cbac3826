//! Table of the example functions with their expected behaviour on chosen
//! circles and the identities behind them.

use serde::Serialize;

use super::*;
use crate::circles::DEFAULT_TOLERANCE;
use crate::expr::{parse, parse_g};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub example: String,
    pub check: String,
    pub value: f64,
    /// `below` or `above`.
    pub expect: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterizeSuite {
    pub n: usize,
    pub rows: Vec<SuiteRow>,
    pub substitution_chain: SubstitutionChain,
}

impl CharacterizeSuite {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

struct Rows(Vec<SuiteRow>);

impl Rows {
    fn push(&mut self, example: &str, check: String, value: Result<f64, CharacterizeError>, expect: &'static str, threshold: f64) {
        let (value, pass) = match value {
            Ok(v) => (v, if expect == "below" { v < threshold } else { v > threshold }),
            Err(_) => (f64::NAN, false),
        };
        self.0.push(SuiteRow { example: example.into(), check, value, expect, threshold, pass });
    }

    fn defect(&mut self, example: &str, f: &FunctionModel, center: (f64, f64), radius: f64, n: usize, expect: &'static str, threshold: f64) {
        let c = Circle { center: C64::new(center.0, center.1), radius };
        let value = extension_defect(f, &c, n, DEFAULT_TOLERANCE).map(|r| r.defect).map_err(Into::into);
        self.push(example, format!("defect on circle ({}, {}; {})", center.0, center.1, radius), value, expect, threshold);
    }

    fn flag(&mut self, example: &str, check: &str, ok: Result<bool, CharacterizeError>) {
        self.push(example, check.into(), ok.map(|b| if b { 0.0 } else { 1.0 }), "below", 0.5);
    }
}

/// Runs every example at `N` samples per circle.
pub fn run_characterize_suite(n: usize) -> Result<CharacterizeSuite, CharacterizeError> {
    let mut rows = Rows(Vec::new());

    let counter = parse("z^2/conj(z)").expect("valid");
    rows.defect("z^2/conj(z)", &counter, (0.3, 0.0), 1.0, n, "below", 1e-10);
    rows.defect("z^2/conj(z)", &counter, (2.0, 0.0), 1.0, n, "above", 0.01);

    let ex7 = example_7_vanishing(C64::new(2.0, 0.0), 1.0)?;
    for (center, radius) in [((2.0, 0.0), 1.0), ((0.3, 0.0), 1.0), ((0.1, -0.2), 3.0), ((0.5, 0.0), 0.5), ((0.0, -2.0), 2.0)] {
        rows.defect("@example7(2, 1)", &ex7, center, radius, n, "below", 1e-10);
    }
    let ex7p = example_7_product(&[(C64::new(2.0, 0.0), 1.0), (C64::new(-3.0, 0.0), 1.0)])?;
    for (center, radius) in [((2.0, 0.0), 1.0), ((-3.0, 0.0), 1.0), ((0.2, 0.0), 1.0), ((0.5, 0.0), 0.5)] {
        rows.defect("@example7product(2, 1, -3, 1)", &ex7p, center, radius, n, "below", 1e-10);
    }
    rows.defect("@example7product(2, 1, -3, 1)", &ex7p, (2.0, 0.0), 0.3, n, "above", 0.01);

    for g in ["w", "w^2", "w^3 + 0.2*w"] {
        let f = parse(&format!("let g(w) = {g} in g(z/conj(z))")).expect("valid");
        let name = format!("g(z/conj(z)), g = {g}");
        rows.defect(&name, &f, (0.3, 0.2), 1.0, n, "below", 1e-9);
        rows.defect(&name, &f, (-1.0, 0.5), 2.0, n, "below", 1e-9);
        let g_only = f.g("g").expect("registered");
        rows.push(&name, "line transport residual, a = 0.3".into(), line_boundary_transport(&g_only, C64::new(0.3, 0.0), 1.0, 1024), "below", 1e-13);
    }

    let ex91 = example_9_1(0.5)?;
    rows.defect("@example9_1(0.5)", &ex91, (0.5, 0.0), 1.0, n, "below", 1e-10);
    rows.defect("@example9_1(0.5)", &ex91, (-0.5, 0.0), 1.0, n, "below", 1e-10);
    rows.defect("@example9_1(0.5)", &ex91, (0.3, 0.0), 1.0, n, "above", 0.01);
    let transport = ray_boundary_transport(0.0, 0.5, &ex91, n.max(MIN_BRANCH_SAMPLES)).map(|t| {
        t.values
            .iter()
            .enumerate()
            .map(|(k, q)| (q - C64::from_polar(1.0, TAU * k as f64 / t.values.len() as f64)).norm())
            .fold(0.0, f64::max)
    });
    rows.push("@example9_1(0.5)", "ray transport q(zeta) = zeta".into(), transport, "below", 1e-12);
    let w = theorem_10_1_witness(&ex91, &Circle { center: C64::new(0.5, 0.0), radius: 1.0 }, &Circle { center: C64::new(0.3, 0.0), radius: 1.0 }, n, DEFAULT_TOLERANCE);
    rows.flag("@example9_1(0.5)", "two-circle witness consistent, centres 0.5 and 0.3", w.map(|w| w.consistent));

    let ex92 = example_9_2(parse_g("w", "w^3").expect("valid"))?;
    rows.defect("@example9_2(w^3)", &ex92, (0.0, 0.0), 1.0, n, "below", 1e-10);
    // the defect here is about 7e-4: far above the tolerance, yet below 1e-2
    rows.defect("@example9_2(w^3)", &ex92, (0.4, 0.0), 1.0, n, "above", 1e-4);
    rows.push("@example9_2(w^3)", "evenness defect of g".into(), evenness_defect(&ex92.g("g").expect("registered"), n), "above", EVENNESS_TOL);
    let rejected = example_9_2(parse_g("w", "w^2").expect("valid"));
    rows.flag("@example9_2(w^2)", "even g rejected", Ok(matches!(rejected, Err(CharacterizeError::EvenG { .. }))));

    rows.push("t_from_d", "|t(0.6) - 1/3|".into(), t_from_d(0.6).map(|t| (t - 1.0 / 3.0).abs()), "below", 1e-15);
    let mob = mobius_identity_check(0.6, 1024);
    rows.push("Mobius identity", "residual, a = 0.6".into(), mob.as_ref().map(|m| m.identity).map_err(Clone::clone), "below", 1e-13);
    rows.push("Mobius identity", "composite residual, a = 0.6".into(), mob.map(|m| m.composite), "below", 1e-13);

    let chain = substitution_chain(&MobiusParams::new(0.9, 0.3)?, &MobiusParams::new(0.8, 1.1)?, 512)?;
    rows.push("substitution chain", "closure with fitted C".into(), Ok(chain.closure_residual), "below", 1e-11);
    rows.push("substitution chain", "|C - (A2-A1)/(1-conj(A1)A2)|".into(), Ok(chain.distance_to_conjugate), "below", 1e-11);

    Ok(CharacterizeSuite { n, rows: rows.0, substitution_chain: chain })
}
