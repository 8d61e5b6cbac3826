//! Command-line front end.
//!
//! Data goes to `--out` or standard output; progress and diagnostics go to
//! standard error. Exit status is 0 on success, 1 when a suite check or a
//! computation fails, and 2 for usage errors.

mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::characterize::{defect_scan, run_characterize_suite, DefectMap, GridSpec};
use crate::circles::{
    extension_defect, rational_extension_eval, sample_on_circle, spectral_extension_eval, spectrum, Circle,
    CircleError, DefectReport, DEFAULT_N, DEFAULT_TOLERANCE,
};
use crate::expr::{parse, parse_definitions, FunctionModel};
use crate::geometry::run_geometry_suite;
use crate::C64;
pub use format::{fmt17, json_17};

/// Environment variable holding the default number of worker threads.
pub const WORKERS_ENV: &str = "CIRCEXT_WORKERS";
/// Prefix of the `schema` field of every JSON document.
pub const SCHEMA: &str = "circext";
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "circext", version, about = "Holomorphic extendibility from circles, measured")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extension defect on one circle (`--circle`) or a CSV of circles (`--circles`).
    Defect(DefectArgs),
    /// Defect over a lattice of centres at a fixed radius.
    Scan(ScanArgs),
    /// Randomized checks of the C^2 geometry.
    GeometrySuite(GeometryArgs),
    /// Every example function against its expected behaviour.
    CharacterizeSuite(CharacterizeArgs),
    /// Value of the holomorphic extension at an interior point.
    ExtendEval(ExtendArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct FunctionArgs {
    /// Expression, `@builtin(...)`, or a name from `--defs`.
    #[arg(long = "fn", allow_hyphen_values = true)]
    function: String,
    /// Definition file with one `name = expression` per line.
    #[arg(long)]
    defs: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DefectArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// `re,im,radius`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "circles", required_unless_present = "circles")]
    circle: Option<String>,
    /// CSV file with columns `re,im,radius`.
    #[arg(long)]
    circles: Option<PathBuf>,
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    radius: f64,
    /// `re0:re1:im0:im1:step`.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Bound on the relative algebraic residuals; the ray-search and
    /// right-angle checks keep their fixed 1e-9.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CharacterizeArgs {
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// `re,im,radius`.
    #[arg(long, allow_hyphen_values = true)]
    circle: String,
    /// `re,im` inside the circle.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    if let Err(e) = configure_workers() {
        let _ = writeln!(stderr, "error: {}", e.message());
        return e.code();
    }
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool may already exist when run is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Defect(a) => defect(a, stdout, stderr),
        Command::Scan(a) => scan(a, stdout, stderr),
        Command::GeometrySuite(a) => geometry_suite(a, stdout, stderr),
        Command::CharacterizeSuite(a) => characterize_suite(a, stdout, stderr),
        Command::ExtendEval(a) => extend_eval(a, stdout),
    }
}

fn schema(kind: &str) -> String {
    format!("{SCHEMA}.{kind}/{SCHEMA_VERSION}")
}

fn load_function(args: &FunctionArgs) -> Result<FunctionModel, CliError> {
    if let Some(path) = &args.defs {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let defs = parse_definitions(&text).map_err(|(line, e)| usage(format!("{}:{line}: {e}", path.display())))?;
        if let Some((_, model)) = defs.into_iter().find(|(name, _)| *name == args.function) {
            return Ok(model);
        }
    }
    parse(&args.function).map_err(|e| usage(format!("--fn: {e}")))
}

fn parse_numbers(text: &str, count: usize, flag: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("{flag} `{text}`: {e}")))?;
    if values.len() != count || values.iter().any(|v| !v.is_finite()) {
        return Err(usage(format!("{flag} `{text}`: expected {count} finite comma-separated numbers")));
    }
    Ok(values)
}

fn parse_circle(text: &str) -> Result<Circle, CliError> {
    let v = parse_numbers(text, 3, "--circle")?;
    Circle::new(C64::new(v[0], v[1]), v[2]).map_err(|e| usage(format!("--circle: {e}")))
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n < 8 || !n.is_power_of_two() {
        return Err(usage(format!("--N {n}: must be a power of two, at least 8")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(usage(format!("--tol {tol}: must be positive")));
    }
    Ok(())
}

fn read_circles(path: &Path) -> Result<Vec<Circle>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let fields: Vec<&str> = record.iter().collect();
        if i == 0 && fields == ["re", "im", "radius"] {
            continue;
        }
        let line = fields.join(",");
        let circle = parse_circle(&line).map_err(|e| usage(format!("{} row {}: {}", path.display(), i + 1, e.message())))?;
        out.push(circle);
    }
    Ok(out)
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(bytes).map_err(|e| CliError::Failure(format!("cannot write output: {e}"))),
    }
}

fn emit_json(out: &Option<PathBuf>, stdout: &mut dyn Write, value: Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&json_17(value)).expect("serializable");
    text.push('\n');
    emit(out, stdout, text.as_bytes())
}

fn report_json(r: &DefectReport) -> Value {
    json!({
        "center_re": r.circle.center.re,
        "center_im": r.circle.center.im,
        "radius": r.circle.radius,
        "N": r.n_used,
        "defect": r.defect,
        "aliasing_floor": r.aliasing_floor,
        "verdict": r.verdict.as_str(),
    })
}

fn failed_json(c: &Circle, n: usize, e: &CircleError) -> Value {
    json!({
        "center_re": c.center.re,
        "center_im": c.center.im,
        "radius": c.radius,
        "N": n,
        "defect": null,
        "aliasing_floor": null,
        "verdict": "error",
        "error": e.to_string(),
    })
}

fn defect(a: DefectArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    check_n(a.n)?;
    check_tol(a.tol)?;
    let f = load_function(&a.function)?;
    if let Some(text) = &a.circle {
        let c = parse_circle(text)?;
        let r = extension_defect(&f, &c, a.n, a.tol).map_err(|e| CliError::Failure(e.to_string()))?;
        return match a.format {
            Format::Json => {
                let mut v = json!({ "schema": schema("defect"), "function": a.function.function });
                let obj = v.as_object_mut().expect("object");
                if let Value::Object(fields) = report_json(&r) {
                    obj.extend(fields);
                }
                emit_json(&a.out, stdout, v)?;
                Ok(EXIT_OK)
            }
            Format::Csv => {
                emit(&a.out, stdout, &batch_csv(&[(c, Ok(r))], a.n)?)?;
                Ok(EXIT_OK)
            }
        };
    }
    let path = a.circles.as_ref().expect("clap requires --circle or --circles");
    let circles = read_circles(path)?;
    let _ = writeln!(stderr, "evaluating {} circles", circles.len());
    use rayon::prelude::*;
    let results: Vec<(Circle, Result<DefectReport, CircleError>)> =
        circles.par_iter().map(|c| (*c, extension_defect(&f, c, a.n, a.tol))).collect();
    let failures = results.iter().filter(|(_, r)| r.is_err()).count();
    if failures > 0 {
        let _ = writeln!(stderr, "{failures} circles could not be sampled");
    }
    match a.format {
        Format::Json => {
            let reports: Vec<Value> = results
                .iter()
                .map(|(c, r)| match r {
                    Ok(r) => report_json(r),
                    Err(e) => failed_json(c, a.n, e),
                })
                .collect();
            let v = json!({ "schema": schema("defect-batch"), "function": a.function.function, "reports": reports });
            emit_json(&a.out, stdout, v)?;
        }
        Format::Csv => emit(&a.out, stdout, &batch_csv(&results, a.n)?)?,
    }
    Ok(EXIT_OK)
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failure(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Failure(e.to_string()))
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_else(|| "NaN".into())
}

fn batch_csv(results: &[(Circle, Result<DefectReport, CircleError>)], n: usize) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["center_re", "center_im", "radius", "N", "defect", "aliasing_floor", "verdict"],
        results.iter().map(|(c, r)| {
            let ok = r.as_ref().ok();
            vec![
                fmt17(c.center.re),
                fmt17(c.center.im),
                fmt17(c.radius),
                n.to_string(),
                opt17(ok.map(|r| r.defect)),
                opt17(ok.map(|r| r.aliasing_floor)),
                ok.map(|r| r.verdict.as_str()).unwrap_or("error").to_string(),
            ]
        }),
    )
}

fn scan_csv(map: &DefectMap) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["center_re", "center_im", "defect", "verdict"],
        map.cells.iter().map(|cell| {
            vec![
                fmt17(cell.center.re),
                fmt17(cell.center.im),
                opt17(cell.defect()),
                cell.verdict().map(|v| v.as_str()).unwrap_or("error").to_string(),
            ]
        }),
    )
}

fn scan(a: ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    check_n(a.n)?;
    check_tol(a.tol)?;
    if !(a.radius > 0.0 && a.radius.is_finite()) {
        return Err(usage(format!("--radius {}: must be positive", a.radius)));
    }
    let grid: GridSpec = a.grid.parse().map_err(|e| usage(format!("--grid: {e}")))?;
    let f = load_function(&a.function)?;
    let _ = writeln!(
        stderr,
        "scanning {} x {} centres on {} workers",
        grid.columns(),
        grid.rows(),
        rayon::current_num_threads()
    );
    let map = defect_scan(&f, a.radius, &grid, a.n, a.tol).map_err(|e| usage(e.to_string()))?;
    let failures = map.cells.iter().filter(|c| c.outcome.is_err()).count();
    let _ = writeln!(stderr, "{} cells extend, {failures} could not be sampled", map.minima.len());
    match a.format {
        Format::Csv => emit(&a.out, stdout, &scan_csv(&map)?)?,
        Format::Json => {
            let cells: Vec<Value> = map
                .cells
                .iter()
                .map(|cell| match &cell.outcome {
                    Ok(r) => report_json(r),
                    Err(e) => failed_json(&Circle { center: cell.center, radius: a.radius }, a.n, e),
                })
                .collect();
            let minima: Vec<Value> = map.minima.iter().map(|c| json!([c.re, c.im])).collect();
            let v = json!({
                "schema": schema("scan"),
                "function": a.function.function,
                "radius": a.radius,
                "grid": grid.to_string(),
                "N": a.n,
                "tol": a.tol,
                "minima": minima,
                "cells": cells,
            });
            emit_json(&a.out, stdout, v)?;
        }
    }
    Ok(EXIT_OK)
}

fn geometry_suite(a: GeometryArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    check_tol(a.tol)?;
    let _ = writeln!(stderr, "geometry suite: {} trials, seed {}", a.trials, a.seed);
    let suite = run_geometry_suite(a.trials, a.seed, a.tol);
    for p in &suite.properties {
        let _ = writeln!(stderr, "  {} {}", if p.pass { "pass" } else { "FAIL" }, p.name);
    }
    let pass = suite.all_pass();
    let v = json!({
        "schema": schema("geometry-suite"),
        "trials": a.trials,
        "seed": a.seed,
        "tol": a.tol,
        "pass": pass,
        "properties": suite.properties,
    });
    emit_json(&a.out, stdout, v)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn characterize_suite(a: CharacterizeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    check_n(a.n)?;
    let suite = run_characterize_suite(a.n).map_err(|e| CliError::Failure(e.to_string()))?;
    for r in &suite.rows {
        let _ = writeln!(stderr, "  {} {}: {}", if r.pass { "pass" } else { "FAIL" }, r.example, r.check);
    }
    let pass = suite.all_pass();
    let ch = &suite.substitution_chain;
    let pair = |c: C64| json!([c.re, c.im]);
    let v = json!({
        "schema": schema("characterize-suite"),
        "N": a.n,
        "pass": pass,
        "rows": suite.rows,
        "substitution_chain": {
            "a1": pair(ch.a1),
            "a2": pair(ch.a2),
            "fitted_c": pair(ch.fitted_c),
            "rotation": pair(ch.rotation),
            "predicted_rotation": pair(ch.predicted_rotation),
            "closure_residual": ch.closure_residual,
            "conjugate_candidate": pair(ch.conjugate_candidate),
            "distance_to_conjugate": ch.distance_to_conjugate,
            "plain_candidate": pair(ch.plain_candidate),
            "distance_to_plain": ch.distance_to_plain,
            "plain_form_residual": ch.plain_form_residual,
        },
    });
    emit_json(&a.out, stdout, v)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn extend_eval(a: ExtendArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    check_n(a.n)?;
    let f = load_function(&a.function)?;
    let c = parse_circle(&a.circle)?;
    let p = parse_numbers(&a.point, 2, "--point")?;
    let p = C64::new(p[0], p[1]);
    if (p - c.center).norm() >= c.radius {
        return Err(usage("--point must lie inside the circle"));
    }
    let fail = |e: CircleError| CliError::Failure(e.to_string());
    let s = spectrum(&sample_on_circle(&f, &c, a.n).map_err(fail)?);
    let spectral = spectral_extension_eval(&s, p).map_err(fail)?;
    let closed = match rational_extension_eval(&f, &c, p) {
        Ok(v) => Some(v),
        Err(CircleError::NotRational) => None,
        Err(e) => return Err(fail(e)),
    };
    let v = json!({
        "schema": schema("extend-eval"),
        "function": a.function.function,
        "center_re": c.center.re,
        "center_im": c.center.im,
        "radius": c.radius,
        "N": a.n,
        "point_re": p.re,
        "point_im": p.im,
        "defect": s.defect(),
        "spectral_re": spectral.value.re,
        "spectral_im": spectral.value.im,
        "tail_bound": spectral.tail_bound,
        "closed_form_re": closed.map(|v| v.re),
        "closed_form_im": closed.map(|v| v.im),
        "difference": closed.map(|v| (v - spectral.value).norm()),
    });
    emit_json(&a.out, stdout, v)?;
    Ok(EXIT_OK)
}
