//! `aperiodica` command line: generate fixture patches, analyse samples,
//! reconstruct schemes and windows, check minimality, recover parameters,
//! run round trips and render SVG/CSV.

mod render;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use aperiodica::address::{difference_group_basis, fit_linear_map, meyer_test, AnalysisReport, MeyerVerdict, DEFAULT_GROUP_TOL, DEFAULT_WINDOW_RATIO};
use aperiodica::lagarias_cps::{build_cps, cps_to_json, equidistribution_discrepancy, minimality_check, Minimality};
use aperiodica::linalg::Mat;
use aperiodica::modelset::{
    fixture_sample, fixture_spec, generate, roundtrip_sample, roundtrip_verify, Fixture, RoundTripOptions, RoundTripReport,
};
use aperiodica::pointsets::{load_sample, parse_region, sample_to_json, BoxRegion, PointSample};
use aperiodica::windows::{
    minimal_window_estimate, nonsingular_shift, recover_parameter, window_to_json, Mode, DEFAULT_CLEARANCE, DEFAULT_PITCH,
};
use aperiodica::QuadExt;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use render::{render, Format};

/// Exit status for a completed run.
pub const EXIT_OK: i32 = 0;
/// Malformed input, invalid arguments, I/O failures.
pub const EXIT_INVALID: i32 = 2;
/// The computation ran but its verdict is negative.
pub const EXIT_VERDICT: i32 = 3;

/// Orbit horizon and bin count for the discrepancy reported by `minimality`.
const DISCREPANCY_HORIZON: f64 = 1e4;
const DISCREPANCY_BINS: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "aperiodica", version, about = "Cut-and-project model sets and scheme reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cut a built-in scheme on a box and write the point sample.
    Generate(GenerateArgs),
    /// Difference group, rank, fitted linear map, deviation profile, Meyer verdict.
    Analyze(SampleArgs),
    /// Build the scheme from a sample; exits 3 when the Meyer test rejects it.
    Reconstruct(SampleArgs),
    /// Minimality of a linear map given as a matrix or an analysis report.
    Minimality(MinimalityArgs),
    /// Window of a fixture, or the hull window estimated from a sample.
    Window(WindowArgs),
    /// Recover the internal parameter of a sample.
    Recover(SampleArgs),
    /// Reconstruct, regenerate and compare.
    Roundtrip(RoundtripArgs),
    /// Render a sample, window file or analysis report.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Membership tolerance for numeric group discovery.
    #[arg(long, default_value_t = DEFAULT_GROUP_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_PITCH)]
    pitch: f64,
    #[arg(long, default_value_t = DEFAULT_CLEARANCE)]
    clearance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    fixture: Fixture,
    /// `lo:hi[,lo:hi]`; defaults to the fixture's standard box.
    #[arg(long = "box")]
    region: Option<String>,
    /// Cut at a random non-singular internal shift drawn from `--seed`.
    #[arg(long)]
    nonsingular: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct MinimalityArgs {
    /// Rows separated by `,`, entries within a row by whitespace.
    #[arg(long, conflicts_with = "input")]
    matrix: Option<String>,
    /// Analysis report supplying the matrix.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[arg(long, conflicts_with = "input")]
    fixture: Option<Fixture>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long, conflicts_with = "input")]
    fixture: Option<Fixture>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long = "box")]
    region: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    format: Format,
    #[command(flatten)]
    common: Common,
}

/// A failed run: the pipeline stage, the error and the exit status.
#[derive(Debug)]
struct Failure {
    stage: &'static str,
    message: String,
    code: i32,
}

impl Failure {
    fn invalid(stage: &'static str, e: impl std::fmt::Display) -> Self {
        Failure {
            stage,
            message: e.to_string(),
            code: EXIT_INVALID,
        }
    }
}

trait Stage<T> {
    fn at(self, stage: &'static str) -> std::result::Result<T, Failure>;
}

impl<T, E: std::fmt::Display> Stage<T> for std::result::Result<T, E> {
    fn at(self, stage: &'static str) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::invalid(stage, e))
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    configure_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.message);
            f.code
        }
    }
}

/// Caps rayon's global pool at `APERIODICA_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("APERIODICA_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Minimality(a) => cmd_minimality(a),
        Command::Window(a) => cmd_window(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
        Command::Render(a) => cmd_render(a),
    }
}

fn check_common(c: &Common) -> std::result::Result<(), Failure> {
    for (name, v) in [("tol", c.tol), ("pitch", c.pitch), ("clearance", c.clearance)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Failure::invalid("arguments", format!("--{name} must be positive")));
        }
    }
    Ok(())
}

fn default_region(f: Fixture) -> BoxRegion {
    let r = match f {
        Fixture::AmmannBeenker => BoxRegion::new(vec![0.0, 0.0], vec![50.0, 50.0]),
        Fixture::SqrtDrift => BoxRegion::interval(0.0, 2000.0),
        _ => BoxRegion::interval(0.0, 1000.0),
    };
    r.expect("valid default box")
}

fn region_for(f: Fixture, spec: Option<&str>) -> std::result::Result<BoxRegion, Failure> {
    match spec {
        Some(s) => parse_region(s).at("arguments"),
        None => Ok(default_region(f)),
    }
}

fn write_bytes(out: Option<&PathBuf>, bytes: &[u8]) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes).at("output"),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes).and_then(|_| so.flush()).at("output")
        }
    }
}

fn write_json(out: Option<&PathBuf>, v: &Value) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    write_bytes(out, text.as_bytes())
}

fn read_sample(p: &PathBuf) -> std::result::Result<PointSample, Failure> {
    let f = fs::File::open(p).at("input")?;
    load_sample(std::io::BufReader::new(f)).at("input")
}

fn read_json(p: &PathBuf) -> std::result::Result<Value, Failure> {
    let text = fs::read_to_string(p).at("input")?;
    serde_json::from_str(&text).at("input")
}

fn cmd_generate(a: GenerateArgs) -> Outcome {
    check_common(&a.common)?;
    let region = region_for(a.fixture, a.region.as_deref())?;
    let s = if a.nonsingular && a.fixture.is_model_set() {
        let spec = fixture_spec(a.fixture, region.clone()).at("generate")?;
        let w = nonsingular_shift(&spec.cps, &spec.window, &region, a.common.trials, a.common.seed, a.common.clearance)
            .at("generate")?;
        let t = vec![QuadExt::int(0); spec.cps.d()];
        let spec = spec
            .with_shift(t, w.iter().map(|&x| QuadExt::from_f64(x)).collect())
            .at("generate")?;
        generate(&spec, Mode::Closed).at("generate")?
    } else {
        fixture_sample(a.fixture, region).at("generate")?
    };
    write_json(a.common.out.as_ref(), &sample_to_json(&s))?;
    Ok(EXIT_OK)
}

fn cmd_analyze(a: SampleArgs) -> Outcome {
    check_common(&a.common)?;
    let s = read_sample(&a.input)?;
    let addressed = difference_group_basis(&s, a.common.tol).at("address")?;
    let approx = fit_linear_map::<f64>(&addressed).at("fit")?;
    let report = AnalysisReport::new(&addressed, &approx).at("meyer")?;
    write_json(a.common.out.as_ref(), &serde_json::to_value(&report).expect("report serializes"))?;
    Ok(EXIT_OK)
}

fn cmd_reconstruct(a: SampleArgs) -> Outcome {
    check_common(&a.common)?;
    let s = read_sample(&a.input)?;
    let addressed = difference_group_basis(&s, a.common.tol).at("address")?;
    let approx = fit_linear_map::<f64>(&addressed).at("fit")?;
    if meyer_test(&approx, DEFAULT_WINDOW_RATIO).at("meyer")? == MeyerVerdict::Rejected {
        return Err(Failure {
            stage: "meyer",
            message: "deviation grows with the radius; sample rejected as non-Meyer".into(),
            code: EXIT_VERDICT,
        });
    }
    let cps = build_cps(&addressed, approx.matrix()).at("cps")?;
    write_json(a.common.out.as_ref(), &cps_to_json(&cps))?;
    Ok(EXIT_OK)
}

/// Rows separated by `,`, entries by whitespace: `"0.5,0.3333"` is 2×1.
fn parse_matrix(text: &str) -> std::result::Result<Mat<f64>, Failure> {
    let rows: Vec<Vec<f64>> = text
        .split(',')
        .map(|r| r.split_whitespace().map(str::parse::<f64>).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<_, _>>()
        .at("arguments")?;
    let d = rows.first().map_or(0, Vec::len);
    if d == 0 || rows.iter().any(|r| r.len() != d) || rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Failure::invalid("arguments", "--matrix needs equal-length rows of finite numbers"));
    }
    Ok(Mat::from_rows(&rows))
}

fn cmd_minimality(a: MinimalityArgs) -> Outcome {
    check_common(&a.common)?;
    let m = match (&a.matrix, &a.input) {
        (Some(text), _) => parse_matrix(text)?,
        (None, Some(p)) => {
            let text = fs::read_to_string(p).at("input")?;
            let report = AnalysisReport::from_json(&text).at("input")?;
            if report.a.is_empty() {
                return Err(Failure::invalid("input", "report has an empty matrix"));
            }
            Mat::from_rows(&report.a)
        }
        (None, None) => return Err(Failure::invalid("arguments", "give --matrix or --in")),
    };
    let verdict = minimality_check(&m, a.common.tol.max(1e-6)).at("minimality")?;
    let discrepancy = equidistribution_discrepancy(&m, DISCREPANCY_HORIZON, DISCREPANCY_BINS).at("minimality")?;
    let mut v = serde_json::to_value(&verdict).expect("verdict serializes");
    v["discrepancy"] = json!(discrepancy);
    write_json(a.common.out.as_ref(), &v)?;
    Ok(match verdict {
        Minimality::Minimal => EXIT_OK,
        Minimality::NonMinimal { .. } => EXIT_VERDICT,
    })
}

fn cmd_window(a: WindowArgs) -> Outcome {
    check_common(&a.common)?;
    let (window, images) = match (a.fixture, &a.input) {
        (Some(f), _) => {
            let spec = fixture_spec(f, default_region(f)).at("window")?;
            (spec.window.to_f64(), Vec::new())
        }
        (None, Some(p)) => {
            let s = read_sample(p)?;
            let addressed = difference_group_basis(&s, a.common.tol).at("address")?;
            let approx = fit_linear_map::<f64>(&addressed).at("fit")?;
            let cps = build_cps(&addressed, approx.matrix()).at("cps")?;
            let images: Vec<Vec<f64>> = addressed.coords().iter().map(|m| cps.star(m)).collect();
            let est = minimal_window_estimate(&images, 1e-9).at("window")?;
            if est.nonconvex_warning {
                eprintln!("warning [window]: star images leave a large empty region inside the hull");
            }
            (est.window, images)
        }
        (None, None) => return Err(Failure::invalid("arguments", "give --fixture or --in")),
    };
    match a.format {
        Format::Json => write_json(a.common.out.as_ref(), &window_to_json(&window))?,
        Format::Svg => {
            let svg = render::window_svg(&window, &images).at("render")?;
            write_bytes(a.common.out.as_ref(), svg.as_bytes())?;
        }
        Format::Csv => {
            let csv = render::points_csv(&images, window.dim()).at("render")?;
            write_bytes(a.common.out.as_ref(), csv.as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_recover(a: SampleArgs) -> Outcome {
    check_common(&a.common)?;
    let s = read_sample(&a.input)?;
    let addressed = difference_group_basis(&s, a.common.tol).at("address")?;
    let approx = fit_linear_map::<f64>(&addressed).at("fit")?;
    let cps = build_cps(&addressed, approx.matrix()).at("cps")?;
    let images: Vec<Vec<f64>> = addressed.coords().iter().map(|m| cps.star(m)).collect();
    let est = minimal_window_estimate(&images, 1e-9).at("window")?;
    let r = recover_parameter(&cps, &est.window, &addressed, a.common.pitch).at("recover")?;
    write_json(
        a.common.out.as_ref(),
        &json!({"w": r.w, "diameter": r.diameter, "cells": r.cells, "pitch": r.pitch}),
    )?;
    Ok(EXIT_OK)
}

fn cmd_roundtrip(a: RoundtripArgs) -> Outcome {
    check_common(&a.common)?;
    let opts = RoundTripOptions {
        group_tol: a.common.tol,
        pitch: a.common.pitch,
        ..RoundTripOptions::default()
    };
    let report: RoundTripReport = match (a.fixture, &a.input) {
        (Some(f), _) => {
            let region = region_for(f, a.region.as_deref())?;
            if f.is_model_set() {
                let spec = fixture_spec(f, region.clone()).at("generate")?;
                let w = nonsingular_shift(&spec.cps, &spec.window, &region, a.common.trials, a.common.seed, a.common.clearance)
                    .at("generate")?;
                let t = vec![QuadExt::int(0); spec.cps.d()];
                let spec = spec
                    .with_shift(t, w.iter().map(|&x| QuadExt::from_f64(x)).collect())
                    .at("generate")?;
                roundtrip_verify(&spec, &opts).at("roundtrip")?
            } else {
                let s = fixture_sample(f, region).at("generate")?;
                roundtrip_sample(&s, None, &opts).at("roundtrip")?.0
            }
        }
        (None, Some(p)) => {
            let mut s = read_sample(p)?;
            if let Some(r) = a.region.as_deref() {
                s = s.restricted(parse_region(r).at("arguments")?).at("input")?;
            }
            roundtrip_sample(&s, None, &opts).at("roundtrip")?.0
        }
        (None, None) => return Err(Failure::invalid("arguments", "give --fixture or --in")),
    };
    write_json(a.common.out.as_ref(), &serde_json::to_value(&report).expect("report serializes"))?;
    if let Some(stage) = &report.failed_stage {
        eprintln!("verdict [{stage}]: round trip stopped");
        return Ok(EXIT_VERDICT);
    }
    if report.symmetric_difference != Some(0) {
        eprintln!("verdict [compare]: regenerated set differs from the sample");
        return Ok(EXIT_VERDICT);
    }
    Ok(EXIT_OK)
}

fn cmd_render(a: RenderArgs) -> Outcome {
    check_common(&a.common)?;
    let v = read_json(&a.input)?;
    let bytes = render(&v, a.format).at("render")?;
    write_bytes(a.common.out.as_ref(), &bytes)?;
    Ok(EXIT_OK)
}
