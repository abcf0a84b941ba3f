//! `qdiff`: coefficients, zeros and growth of entire solutions of linear
//! q-difference equations, as JSON reports and CSV tables.

mod oracle;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qdiff_lab::apnum::{APComplex, Real};
use qdiff_lab::model::{instance_to_json, parse_instance, Instance};
use qdiff_lab::asymfit::estimate_sigma;
use qdiff_lab::diagram::{build_diagram, sector_data};
use qdiff_lab::pipeline::{analyze_escalating, input_hash, manifest, report, Analysis, Status, SCHEMA};
use qdiff_lab::recurrence::{coeffs_csv, normalize, taylor_coefficients};
use qdiff_lab::theta::{period_grid, theta_eval, theta_growth_residual};
use qdiff_lab::{fixtures, selftest, Error};

const DEFAULT_PRECISION: usize = 512;

#[derive(Parser)]
#[command(name = "qdiff", version, about = "Entire solutions of linear q-difference equations")]
struct Cli {
    #[command(flatten)]
    opts: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// Working precision in bits (default 512).
    #[arg(long, global = true, env = "QDIFF_PRECISION_BITS")]
    precision_bits: Option<usize>,
    /// Number of Taylor coefficients.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Outer radius for zeros and growth.
    #[arg(long, global = true)]
    rmax: Option<f64>,
    #[arg(long, global = true)]
    snap_tol: Option<f64>,
    #[arg(long, global = true)]
    unity_tol: Option<f64>,
    /// Largest commensuration period tried.
    #[arg(long, global = true)]
    lmax: Option<u32>,
    /// Directory receiving report.json and CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; tables default to CSV and reports to JSON, `--out` writes both.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: diagram, coefficients, asymptotics, zeros, progressions, growth.
    Analyze { input: String },
    /// Built-in oracle suite.
    Selftest,
    /// Evaluate θ_κ(z, q), or tabulate its growth residual with --growth.
    Theta(ThetaArgs),
    /// Taylor coefficients as CSV.
    Coeffs { input: String },
    /// Zeros and their progressions.
    Zeros { input: String },
    /// Growth-law residual table.
    Growth { input: String },
    /// Print a built-in fixture document (or list them).
    Fixture { name: Option<String> },
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long, allow_hyphen_values = true)]
    q: String,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Imaginary part of z.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    zi: String,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    /// Tabulate E(r) on a geometric grid instead of evaluating at z.
    #[arg(long)]
    growth: bool,
    #[arg(long, default_value_t = 1e3)]
    rmin: f64,
    #[arg(long, default_value_t = 12)]
    steps: usize,
}

/// Failure with an exit status.
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Schema(_) | Error::Domain(_) => 2,
            Error::ResonanceInconsistent { .. } => 3,
            Error::NoCommensuration { .. } => 4,
            Error::PrecisionExhausted(_) => 5,
            _ => 1,
        };
        Exit(code, e.to_string())
    }
}

fn input_error(msg: impl Into<String>) -> Exit {
    Exit(2, msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("qdiff: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Exit> {
    let f = &cli.opts;
    match &cli.command {
        Command::Analyze { input } => cmd_analyze(input, f),
        Command::Selftest => cmd_selftest(f),
        Command::Theta(t) => cmd_theta(t, f),
        Command::Coeffs { input } => cmd_coeffs(input, f),
        Command::Zeros { input } => cmd_table(input, f, "zeros"),
        Command::Growth { input } => cmd_table(input, f, "growth"),
        Command::Fixture { name } => cmd_fixture(name.as_deref(), f),
    }
}

/// Reads an instance file, or builds a fixture when `input` names one and no
/// such file exists. Flags override the document's options.
fn load(input: &str, f: &Flags) -> Result<(Instance, String), Exit> {
    let path = Path::new(input);
    let text = if path.exists() {
        fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {input}: {e}")))?
    } else if let Some(mut inst) = fixtures::by_name(input, fixture_bits(f)) {
        inst.options.precision_bits = precision(f);
        serde_json::to_string(&instance_to_json(&inst)).expect("instance serializes")
    } else {
        return Err(input_error(format!("{input}: no such file or fixture")));
    };
    if oracle::is_recurrence(&text) {
        return Err(input_error(format!("{input} is a recurrence oracle; only `coeffs` accepts it")));
    }
    let mut inst = parse_instance(&text, f.precision_bits)?;
    let o = &mut inst.options;
    if let Some(n) = f.nmax {
        o.n_max = n;
    }
    if f.rmax.is_some() {
        o.r_max = f.rmax;
    }
    if let Some(t) = f.snap_tol {
        o.snap_tol = t;
    }
    if let Some(t) = f.unity_tol {
        o.unity_tol = t;
    }
    if let Some(l) = f.lmax {
        o.l_max = l;
    }
    o.validate()?;
    Ok((inst, text))
}

/// Built-in fixtures are generated well above the working precision so that
/// escalation still sees exact data.
fn fixture_bits(f: &Flags) -> usize {
    f.precision_bits.unwrap_or(DEFAULT_PRECISION).max(1024)
}

fn precision(f: &Flags) -> usize {
    f.precision_bits.unwrap_or(DEFAULT_PRECISION)
}

/// With `--out`, writes `report.json` and every table; otherwise prints the
/// report or the primary table, depending on the format.
fn emit(f: &Flags, default: Format, json: &Value, tables: &[(&str, String)], primary: Option<&str>) -> Result<(), Exit> {
    let format = f.format.unwrap_or(if f.out.is_some() { Format::Both } else { default });
    if let Some(dir) = &f.out {
        fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))?;
        let write = |name: &str, body: &str| fs::write(dir.join(name), body).map_err(|e| input_error(format!("cannot write {name}: {e}")));
        if format != Format::Csv {
            write("report.json", &pretty(json))?;
        }
        if format != Format::Json {
            for (name, body) in tables {
                write(&format!("{name}.csv"), body)?;
            }
        }
        return Ok(());
    }
    match format {
        Format::Json => out(&pretty(json)),
        Format::Csv => {
            let body = primary.and_then(|p| tables.iter().find(|t| t.0 == p)).map(|t| &t.1);
            match body {
                Some(b) => out(b),
                None => return Err(input_error("no single CSV table for this command: pass --out DIR")),
            }
        }
        Format::Both => return Err(input_error("--format both needs --out DIR")),
    }
    Ok(())
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn out(s: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(s.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("qdiff: cannot write output: {e}");
            std::process::exit(1);
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn tables(a: &Analysis) -> Vec<(&'static str, String)> {
    let mut t = Vec::new();
    if let Some(c) = &a.coeffs {
        t.push(("coeffs", coeffs_csv(c, a.normalized.as_ref())));
    }
    if let Some(z) = &a.zeros {
        t.push(("zeros", z.to_csv()));
    }
    if let Some(p) = &a.progressions {
        t.push(("progressions", p.to_csv()));
    }
    if let Some(c) = &a.correction {
        let mut s = String::from("n,value\n");
        for (n, v) in c {
            s.push_str(&format!("{n},{v:e}\n"));
        }
        t.push(("correction", s));
    }
    if let Some(g) = &a.growth {
        t.push(("growth", g.to_csv()));
    }
    t
}

fn cmd_analyze(input: &str, f: &Flags) -> Result<u8, Exit> {
    let (inst, text) = load(input, f)?;
    let (a, history) = analyze_escalating(&inst);
    let rep = report(&a, "analyze", &input_hash(&text), &history);
    emit(f, Format::Json, &rep, &tables(&a), None)?;
    Ok(a.exit_code() as u8)
}

/// `zeros` and `growth`: the pipeline run with a report restricted to the
/// relevant sections.
fn cmd_table(input: &str, f: &Flags, which: &'static str) -> Result<u8, Exit> {
    let (inst, text) = load(input, f)?;
    let (a, history) = analyze_escalating(&inst);
    let full = report(&a, which, &input_hash(&text), &history);
    let (keys, names): (&[&str], &[&str]) = if which == "zeros" {
        (&["zeros", "progressions", "correction", "L"], &["zeros", "progressions", "correction"])
    } else {
        (&["growth"], &["growth"])
    };
    let mut rep = serde_json::Map::new();
    for k in ["schema", "manifest", "exit_code", "errors"].iter().chain(keys) {
        if let Some(v) = full.get(*k) {
            rep.insert((*k).into(), v.clone());
        }
    }
    let t: Vec<(&str, String)> = tables(&a).into_iter().filter(|(name, _)| names.contains(name)).collect();
    let primary = if which == "zeros" && a.progressions.is_some() { "progressions" } else { which };
    emit(f, Format::Csv, &Value::Object(rep), &t, Some(primary))?;
    Ok(a.exit_code() as u8)
}

fn cmd_coeffs(input: &str, f: &Flags) -> Result<u8, Exit> {
    let text = match fs::read_to_string(input) {
        Ok(t) => Some(t),
        Err(_) if input == oracle::NAME => Some(oracle::document().to_string()),
        Err(_) => None,
    };
    if let Some(text) = text.filter(|t| oracle::is_recurrence(t)) {
        let (csv, exact) = oracle::solve(&text, precision(f))?;
        let rep = json!({"schema": SCHEMA, "exact": exact, "input_sha256": input_hash(&text)});
        emit(f, Format::Csv, &rep, &[("coeffs", csv)], Some("coeffs"))?;
        return Ok(if exact { 0 } else { 1 });
    }
    let (inst, text) = load(input, f)?;
    let c = taylor_coefficients(&inst.qde, &inst.options)?;
    let diag = build_diagram(&inst.qde.degrees());
    let y = estimate_sigma(&c, &diag, inst.qde.q.ln_abs_f64(), inst.options.snap_tol)
        .ok()
        .map(|s| normalize(&c, &sector_data(&inst.qde, &diag, s.k)));
    let stages = [("coefficients", Status::Pass)];
    let rep = json!({
        "schema": SCHEMA,
        "manifest": manifest("coeffs", &inst, &input_hash(&text), &[inst.options.precision_bits], &stages),
        "resonances": c.resonances,
        "max_residual_ln": format!("{:.3}", c.max_residual),
    });
    emit(f, Format::Csv, &rep, &[("coeffs", coeffs_csv(&c, y.as_ref()))], Some("coeffs"))?;
    Ok(0)
}

fn cmd_selftest(f: &Flags) -> Result<u8, Exit> {
    let checks = selftest::run(precision(f));
    let ok = checks.iter().all(|c| c.pass);
    if f.out.is_some() || f.format == Some(Format::Json) {
        emit(f, Format::Json, &selftest::summary(&checks), &[], None)?;
    } else {
        for c in &checks {
            out(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn parse_real(s: &str, prec: usize, what: &str) -> Result<Real, Exit> {
    Real::parse(s, prec).ok_or_else(|| input_error(format!("{what}: not a decimal number: {s:?}")))
}

fn cmd_theta(t: &ThetaArgs, f: &Flags) -> Result<u8, Exit> {
    let prec = precision(f);
    let q = parse_real(&t.q, prec, "--q")?;
    if t.growth {
        let qf = q.to_f64();
        let r_max = f.rmax.unwrap_or(1e9);
        let grid = period_grid(qf, t.rmin, r_max, t.steps);
        let g = theta_growth_residual(qf, t.kappa, &grid, prec)?;
        let rep = json!({
            "schema": SCHEMA,
            "q": t.q,
            "kappa": t.kappa,
            "periodicity_defect": format!("{:e}", g.periodicity_defect),
            "drift_slope": format!("{:e}", g.drift_slope),
        });
        emit(f, Format::Csv, &rep, &[("theta_growth", g.to_csv())], Some("theta_growth"))?;
        return Ok(0);
    }
    let z = t.z.as_deref().ok_or_else(|| input_error("--z is required unless --growth is given"))?;
    let z = APComplex::new(parse_real(z, prec, "--z")?, parse_real(&t.zi, prec, "--zi")?);
    let e = theta_eval(&z, &APComplex::from_real(q), t.kappa)?;
    let rep = json!({
        "schema": SCHEMA,
        "value": e.value.to_pair(),
        "kappa": t.kappa,
        "truncation": [e.truncation.0, e.truncation.1],
        "tail_ln": format!("{:.3}", e.tail_ln),
    });
    emit(f, Format::Json, &rep, &[], None)?;
    Ok(0)
}

fn cmd_fixture(name: Option<&str>, f: &Flags) -> Result<u8, Exit> {
    let Some(name) = name else {
        let mut list: Vec<&str> = fixtures::INSTANCE_NAMES.to_vec();
        list.push(oracle::NAME);
        out(&(list.join("\n") + "\n"));
        return Ok(0);
    };
    let doc = if name == oracle::NAME {
        oracle::document()
    } else {
        let mut inst = fixtures::by_name(name, fixture_bits(f)).ok_or_else(|| input_error(format!("unknown fixture {name:?}")))?;
        inst.options.precision_bits = precision(f);
        let mut v = instance_to_json(&inst);
        v["name"] = json!(name);
        v
    };
    out(&pretty(&doc));
    Ok(0)
}
