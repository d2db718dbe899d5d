//! Command-line front end: argument and config-file parsing, dispatch to
//! `stokes-core`, and CSV/JSON output.
//!
//! Exit codes: 0 success, 1 verification or certification failure, 2 bad
//! input, 3 numerical non-convergence or I/O failure.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use stokes_core::potential::Potential;
use stokes_core::stokes::stokes_c;
use stokes_core::verify::{self, check_hypothesis, CheckKind, Hypothesis, SuiteConfig, VerificationReport};
use stokes_core::zeros::{
    box_count, classify_unchecked, derivative_c, scan_real_zeros, sweep_family, Family, FamilyTerm, Rect,
    SearchWindow, SweepOptions, ZeroRecord,
};
use stokes_core::{Error, RayConfig};

type C64 = Complex64;

/// Environment variable sizing the worker pool.
pub const WORKERS_ENV: &str = "STOKES_WORKERS";

/// CSV columns, in order.
pub const COLUMNS: [&str; 11] = [
    "kind",
    "alpha",
    "lambda_re",
    "lambda_im",
    "c_abs",
    "dc_re",
    "dc_im",
    "winding",
    "is_real",
    "is_simple",
    "residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Eval,
    Sweep,
    Verify,
    Hypothesis,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Eval => "eval",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Hypothesis => "hypothesis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub m: usize,
    /// Coefficient tokens: reals, `re+imi` literals, or for `sweep` the
    /// template forms `alpha`, `-alpha`, `k*alpha`. Empty means all zero.
    pub a: Vec<String>,
    pub lmin: f64,
    pub lmax: f64,
    pub grid: usize,
    /// Half height of the counting box `[lmin, lmax] x [-h, h]`.
    pub box_height: f64,
    pub tol: f64,
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub steps: usize,
    pub classify: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub seed: u64,
    pub checks: Vec<String>,
    pub threshold_scale: f64,
    pub cases: usize,
    pub simple_cases: usize,
    pub degrees: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        let ray = RayConfig::default();
        RunConfig {
            command: None,
            m: 3,
            a: Vec::new(),
            lmin: 0.0,
            lmax: 10.0,
            grid: 64,
            box_height: 1.0,
            tol: 1e-10,
            alpha_start: 2.0,
            alpha_end: -5.0,
            steps: 70,
            classify: false,
            rel_tol: ray.rel_tol,
            abs_tol: ray.abs_tol,
            seed: 0,
            checks: Vec::new(),
            threshold_scale: 1.0,
            cases: suite.cases_per_degree,
            simple_cases: suite.simple_cases,
            degrees: suite.degrees,
            out: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed input (exit 2).
    Usage(String),
    /// Verification or certification failure (exit 1).
    Failed(String),
    /// Numerical failure (exit 3).
    Numeric(Error),
    /// I/O failure (exit 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "error: {s}"),
            CliError::Failed(s) => write!(f, "failed: {s}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(s) => write!(f, "i/o failure: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(s) => CliError::Usage(s),
            Error::Degenerate(s) => CliError::Usage(format!("degenerate input: {s}")),
            Error::Certification(s) => CliError::Failed(s),
            e => CliError::Numeric(e),
        }
    }
}

fn usage(s: impl Into<String>) -> CliError {
    CliError::Usage(s.into())
}

#[derive(Debug, Parser)]
#[command(name = "stokes", version, about = "Stokes multipliers and their zeros for polynomial potentials")]
struct Cli {
    /// JSON config file (a RunConfig, or an output file carrying a "config" key).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Real zeros of lambda -> C(a, lambda) with certification.
    Spectrum(Flags),
    /// C(a) and dC/dlambda at a point; lambda is the last coefficient.
    Eval(Flags),
    /// Track real zeros along a coefficient template in alpha.
    Sweep(Flags),
    /// Run the numerical verification suite.
    Verify(Flags),
    /// Check the sign hypothesis on a real coefficient head.
    Hypothesis(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated coefficients.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lmax: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    box_height: Option<f64>,
    /// Refinement tolerance for real zeros.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_end: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Classify every zero of every sweep snapshot.
    #[arg(long)]
    classify: bool,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated check names; all checks when absent.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    threshold_scale: Option<f64>,
    /// Random cases per degree for the identity checks.
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    simple_cases: Option<usize>,
    /// Comma-separated degrees for the verification ensembles.
    #[arg(long)]
    degrees: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn apply(rc: &mut RunConfig, f: Flags) -> Result<(), CliError> {
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = f.$field { rc.$field = v; })*
        };
    }
    set!(m, lmin, lmax, grid, box_height, tol, alpha_start, alpha_end, steps, rel_tol, abs_tol, seed, threshold_scale, cases, simple_cases, format);
    if let Some(a) = f.a {
        rc.a = split_list(&a);
    }
    if let Some(c) = f.checks {
        rc.checks = split_list(&c);
    }
    if let Some(d) = f.degrees {
        rc.degrees = split_list(&d)
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| usage(format!("bad degree {t:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if f.classify {
        rc.classify = true;
    }
    if f.out.is_some() {
        rc.out = f.out;
    }
    Ok(())
}

/// Reads a RunConfig, or the `config` member of a JSON output file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(inner) = v.get_mut("config") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Parses `argv` (program name first). Flags override config-file values.
pub fn parse<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let first = e.to_string().lines().next().unwrap_or("bad arguments").to_string();
        usage(first.trim_start_matches("error: ").to_string())
    })?;
    let mut rc = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(sub) = cli.command {
        let (cmd, flags) = match sub {
            Sub::Spectrum(f) => (Command::Spectrum, f),
            Sub::Eval(f) => (Command::Eval, f),
            Sub::Sweep(f) => (Command::Sweep, f),
            Sub::Verify(f) => (Command::Verify, f),
            Sub::Hypothesis(f) => (Command::Hypothesis, f),
        };
        rc.command = Some(cmd);
        apply(&mut rc, flags)?;
    }
    validate(&rc)?;
    Ok(rc)
}

/// Parses one coefficient: a real or an `re+imi` literal.
pub fn parse_complex(t: &str) -> Result<C64, CliError> {
    let s: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    let z = match s.parse::<f64>() {
        Ok(x) => C64::new(x, 0.0),
        Err(_) => C64::from_str(&s).map_err(|_| usage(format!("bad coefficient {t:?}")))?,
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(usage(format!("non-finite coefficient {t:?}")))
    }
}

/// Parses one sweep-template token: a real, `alpha`, `-alpha` or `k*alpha`.
pub fn parse_term(t: &str) -> Result<FamilyTerm, CliError> {
    let s: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(k) = s.strip_suffix("alpha") {
        let k = k.strip_suffix('*').unwrap_or(k);
        let k = match k {
            "" | "+" => 1.0,
            "-" => -1.0,
            k => k.parse::<f64>().map_err(|_| usage(format!("bad template term {t:?}")))?,
        };
        return Ok(FamilyTerm::Alpha(k));
    }
    let z = parse_complex(&s)?;
    if z.im != 0.0 {
        return Err(usage(format!("sweep coefficients must be real, got {t:?}")));
    }
    Ok(FamilyTerm::Const(z.re))
}

fn expected_arity(rc: &RunConfig) -> Option<usize> {
    match rc.command? {
        Command::Eval => Some(rc.m),
        Command::Spectrum | Command::Sweep | Command::Hypothesis => Some(rc.m - 1),
        Command::Verify => None,
    }
}

fn validate(rc: &RunConfig) -> Result<(), CliError> {
    let cmd = rc.command.ok_or_else(|| usage("no command given (spectrum, eval, sweep, verify, hypothesis)"))?;
    if cmd != Command::Verify && rc.m < 2 {
        return Err(usage(format!("degree m = {} must be at least 2", rc.m)));
    }
    if let Some(n) = expected_arity(rc) {
        if !rc.a.is_empty() && rc.a.len() != n {
            let what = if cmd == Command::Eval { "m" } else { "m-1" };
            return Err(usage(format!(
                "expected {what} = {n} coefficients for {}, got {}",
                cmd.name(),
                rc.a.len()
            )));
        }
    }
    for (name, v) in [("tol", rc.tol), ("rel-tol", rc.rel_tol), ("abs-tol", rc.abs_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(usage(format!("{name} must be positive, got {v}")));
        }
    }
    if !(rc.threshold_scale >= 0.0 && rc.threshold_scale.is_finite()) {
        return Err(usage("threshold-scale must be non-negative"));
    }
    if !(rc.box_height > 0.0) {
        return Err(usage("box-height must be positive"));
    }
    match cmd {
        Command::Spectrum | Command::Sweep => {
            if !(rc.lmin < rc.lmax) {
                return Err(usage(format!("lmin {} must be below lmax {}", rc.lmin, rc.lmax)));
            }
            if rc.grid < 16 {
                return Err(usage("grid must be at least 16"));
            }
        }
        _ => {}
    }
    match cmd {
        Command::Sweep => {
            let terms = template(rc)?;
            if !terms.iter().any(|t| matches!(t, FamilyTerm::Alpha(_))) {
                return Err(usage("sweep template needs an alpha placeholder, e.g. --a 0,-alpha"));
            }
            if rc.steps == 0 {
                return Err(usage("steps must be positive"));
            }
        }
        Command::Spectrum | Command::Hypothesis => {
            real_coeffs(rc)?;
        }
        Command::Eval => {
            coeffs(rc)?;
        }
        Command::Verify => {
            kinds(rc)?;
            if let Some(d) = rc.degrees.iter().find(|&&d| d < 2) {
                return Err(usage(format!("degree {d} must be at least 2")));
            }
        }
    }
    Ok(())
}

fn coeffs(rc: &RunConfig) -> Result<Vec<C64>, CliError> {
    if rc.a.is_empty() {
        return Ok(vec![C64::new(0.0, 0.0); expected_arity(rc).unwrap_or(0)]);
    }
    rc.a.iter().map(|t| parse_complex(t)).collect()
}

fn real_coeffs(rc: &RunConfig) -> Result<Vec<f64>, CliError> {
    coeffs(rc)?
        .into_iter()
        .map(|z| {
            if z.im == 0.0 {
                Ok(z.re)
            } else {
                Err(usage(format!("{} needs real coefficients, got {z}", rc.command.map_or("", |c| c.name()))))
            }
        })
        .collect()
}

fn template(rc: &RunConfig) -> Result<Vec<FamilyTerm>, CliError> {
    if rc.a.is_empty() {
        return Err(usage("sweep needs a coefficient template, e.g. --a 0,-alpha"));
    }
    rc.a.iter().map(|t| parse_term(t)).collect()
}

fn kinds(rc: &RunConfig) -> Result<Vec<CheckKind>, CliError> {
    rc.checks
        .iter()
        .map(|n| CheckKind::from_name(n).ok_or_else(|| usage(format!("unknown check {n:?}"))))
        .collect()
}

fn ray(rc: &RunConfig) -> RayConfig {
    RayConfig {
        rel_tol: rc.rel_tol,
        abs_tol: rc.abs_tol,
        ..RayConfig::default()
    }
}

fn window(rc: &RunConfig) -> SearchWindow {
    SearchWindow {
        lo: rc.lmin,
        hi: rc.lmax,
        grid: rc.grid,
        bbox: Some(Rect::around_segment(rc.lmin, rc.lmax, rc.box_height)),
        tol: rc.tol,
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub kind: String,
    pub alpha: Option<f64>,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub c_abs: f64,
    pub dc_re: f64,
    pub dc_im: f64,
    pub winding: i64,
    pub is_real: bool,
    pub is_simple: bool,
    pub residual: f64,
}

impl Record {
    fn zero(z: &ZeroRecord, alpha: Option<f64>, c_abs: f64) -> Self {
        Record {
            kind: "zero".into(),
            alpha,
            lambda_re: z.lambda.re,
            lambda_im: z.lambda.im,
            c_abs,
            dc_re: z.c_deriv.re,
            dc_im: z.c_deriv.im,
            winding: z.winding,
            is_real: z.is_real,
            is_simple: z.is_simple,
            residual: z.residual,
        }
    }
}

/// Result of [`execute`]: rows, summary lines and the exit status.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub lines: Vec<String>,
    /// Extra members merged into the JSON output.
    pub extra: serde_json::Map<String, serde_json::Value>,
    /// Two-column `(alpha, lambda)` trajectories, one per tracked zero.
    pub tracks: Vec<Vec<(f64, f64)>>,
    /// 0, or 1 when a verification or certification failed.
    pub status: i32,
}

/// Runs the command and writes its outputs.
pub fn execute(rc: &RunConfig) -> Result<Outcome, CliError> {
    validate(rc)?;
    let outcome = match rc.command.expect("validated") {
        Command::Spectrum => spectrum(rc)?,
        Command::Eval => eval(rc)?,
        Command::Sweep => sweep(rc)?,
        Command::Verify => run_verify(rc)?,
        Command::Hypothesis => hypothesis(rc)?,
    };
    if let Some(path) = &rc.out {
        emit(&outcome, rc, path)?;
    }
    Ok(outcome)
}

fn spectrum(rc: &RunConfig) -> Result<Outcome, CliError> {
    let head = real_coeffs(rc)?;
    let chead: Vec<C64> = head.iter().map(|&x| C64::new(x, 0.0)).collect();
    let cfg = ray(rc);
    let w = window(rc);
    let scan = scan_real_zeros(&head, &w, &cfg)?;
    let zeros = classify_unchecked(&scan.zeros, &chead, &cfg)?;
    let (count, _) = box_count(&head, &w, &cfg)?;
    let c_abs: Vec<f64> = zeros
        .iter()
        .map(|z| Ok(stokes_c(&Potential::with_lambda(&chead, z.lambda)?, &cfg)?.c.norm()))
        .collect::<Result<_, Error>>()?;

    let mut out = Outcome::default();
    for (z, &c) in zeros.iter().zip(&c_abs) {
        out.records.push(Record::zero(z, None, c));
        out.lines.push(format!(
            "zero lambda = {:.12} |C| = {c:.3e} |C'| = {:.3e} winding = {} simple = {}",
            z.lambda.re,
            z.c_deriv.norm(),
            z.winding,
            z.is_simple
        ));
    }
    for t in &scan.tangencies {
        out.lines.push(format!("tangency near lambda = {:.6} (ratio {:.2e})", t.lambda, t.ratio));
    }
    out.lines.push(format!("real zeros {}, box count {count}", zeros.len()));
    if check_hypothesis(&head).holds() {
        let bad: Vec<&ZeroRecord> = zeros
            .iter()
            .filter(|z| !(z.is_real && z.is_simple && z.lambda.re > 0.0))
            .collect();
        if !bad.is_empty() {
            out.lines.push(format!("certification failed: {} zero(s) not real, positive and simple", bad.len()));
            out.status = 1;
        }
        if count != zeros.len() as i64 {
            out.lines.push(format!("certification failed: box count {count} != real count {}", zeros.len()));
            out.status = 1;
        }
    }
    out.extra.insert("box_count".into(), count.into());
    Ok(out)
}

fn eval(rc: &RunConfig) -> Result<Outcome, CliError> {
    let a = coeffs(rc)?;
    let (head, lambda) = a.split_at(a.len() - 1);
    let cfg = ray(rc);
    let p = Potential::with_lambda(head, lambda[0])?;
    let d = stokes_c(&p, &cfg)?;
    let dc = derivative_c(head, lambda[0], &cfg)?;
    let mut out = Outcome::default();
    out.lines.push(format!("C = {:.15e}{:+.15e}i", d.c.re, d.c.im));
    out.lines.push(format!("|C| = {:.6e} dC/dlambda = {:.6e}{:+.6e}i", d.c.norm(), dc.re, dc.im));
    out.records.push(Record {
        kind: "eval".into(),
        alpha: None,
        lambda_re: lambda[0].re,
        lambda_im: lambda[0].im,
        c_abs: d.c.norm(),
        dc_re: dc.re,
        dc_im: dc.im,
        winding: 0,
        is_real: lambda[0].im == 0.0,
        is_simple: false,
        residual: d.unit_coeff_residual,
    });
    out.extra.insert("c".into(), serde_json::json!({"re": d.c.re, "im": d.c.im}));
    Ok(out)
}

fn sweep(rc: &RunConfig) -> Result<Outcome, CliError> {
    let family = Family::new(template(rc)?);
    let opts = SweepOptions {
        alpha_start: rc.alpha_start,
        alpha_end: rc.alpha_end,
        steps: rc.steps,
        classify: rc.classify,
        ..SweepOptions::default()
    };
    let s = sweep_family(&family, &opts, &window(rc), &ray(rc))?;
    let mut out = Outcome::default();
    for snap in &s.snapshots {
        for z in &snap.zeros {
            out.records.push(Record::zero(z, Some(snap.alpha), f64::NAN));
        }
    }
    for ev in &s.events {
        out.records.push(Record {
            kind: "coalescence".into(),
            alpha: Some(ev.alpha),
            lambda_re: ev.lambda,
            lambda_im: 0.0,
            c_abs: ev.c_abs,
            dc_re: ev.dc.re,
            dc_im: ev.dc.im,
            winding: ev.winding,
            is_real: true,
            is_simple: false,
            residual: ev.c_abs / ev.dc_abs.max(f64::MIN_POSITIVE),
        });
        out.lines.push(format!(
            "coalescence alpha = {:.9} lambda = {:.9} |C| = {:.3e} |C'| = {:.3e} winding = {}",
            ev.alpha, ev.lambda, ev.c_abs, ev.dc_abs, ev.winding
        ));
    }
    out.lines.extend(s.notes.iter().map(|n| format!("note: {n}")));
    out.lines.push(format!(
        "{} snapshots, {} tracks, {} coalescence events",
        s.snapshots.len(),
        s.tracks.len(),
        s.events.len()
    ));
    out.tracks = s.tracks;
    Ok(out)
}

fn suite_config(rc: &RunConfig) -> SuiteConfig {
    SuiteConfig {
        ray: ray(rc),
        threshold_scale: rc.threshold_scale,
        degrees: rc.degrees.clone(),
        cases_per_degree: rc.cases,
        simple_cases: rc.simple_cases,
        ..SuiteConfig::default()
    }
}

fn run_verify(rc: &RunConfig) -> Result<Outcome, CliError> {
    let cfg = suite_config(rc);
    let report: VerificationReport = verify::run_suite(rc.seed, &kinds(rc)?, &cfg);
    let mut out = Outcome::default();
    let mut names: Vec<&str> = report.entries.iter().map(|e| e.name.as_str()).collect();
    names.dedup();
    for n in names {
        let total = report.count(n);
        let failed = report.failures().filter(|e| e.name == n).count();
        let verdict = if failed == 0 { "pass" } else { "FAIL" };
        out.lines.push(format!("{n}: {verdict} ({} of {total} cases pass)", total - failed));
    }
    for e in report.failures() {
        out.lines.push(format!(
            "failure {}: residual {:e} > threshold {:e} {}{}",
            e.name,
            e.residual,
            e.threshold,
            e.params,
            e.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
        ));
    }
    if !report.all_passed() {
        out.status = 1;
    }
    out.extra.insert(
        "report".into(),
        serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?,
    );
    Ok(out)
}

fn hypothesis(rc: &RunConfig) -> Result<Outcome, CliError> {
    let head = real_coeffs(rc)?;
    let h = check_hypothesis(&head);
    let mut out = Outcome::default();
    match &h {
        Hypothesis::Accepted { j, .. } => out.lines.push(format!("accepted j={j}")),
        Hypothesis::Rejected { violations } => {
            let v: Vec<String> = violations
                .iter()
                .map(|(j, k)| if *k == 0 { format!("j={j}: a_2 > 0") } else { format!("j={j}: a_{k}") })
                .collect();
            out.lines.push(format!("rejected ({})", v.join(", ")));
        }
    }
    out.extra.insert(
        "hypothesis".into(),
        serde_json::to_value(&h).map_err(|e| CliError::Io(e.to_string()))?,
    );
    Ok(out)
}

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io_err(path, "not a file path"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let res = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

/// CSV text for `records`; an empty set gives the header alone.
pub fn to_csv(records: &[Record]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(COLUMNS).map_err(err)?;
    for r in records {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// JSON document `{config, records, ...extra}`.
pub fn to_json(outcome: &Outcome, rc: &RunConfig) -> Result<String, CliError> {
    let mut doc = serde_json::Map::new();
    let err = |e: serde_json::Error| CliError::Io(e.to_string());
    doc.insert("config".into(), serde_json::to_value(rc).map_err(err)?);
    doc.insert("records".into(), serde_json::to_value(&outcome.records).map_err(err)?);
    for (k, v) in &outcome.extra {
        doc.insert(k.clone(), v.clone());
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(doc)).map_err(err)
}

/// Path of the trajectory file for track `i`: `<stem>.track<i>.dat`.
pub fn track_path(out: &Path, i: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.track{i}.dat"))
}

fn emit(outcome: &Outcome, rc: &RunConfig, path: &Path) -> Result<(), CliError> {
    let text = match rc.format {
        Format::Csv => to_csv(&outcome.records)?,
        Format::Json => to_json(outcome, rc)?,
    };
    write_atomic(path, text.as_bytes())?;
    for (i, t) in outcome.tracks.iter().enumerate() {
        let mut s = String::from("# alpha lambda\n");
        for (a, l) in t {
            s.push_str(&format!("{a:.12e} {l:.12e}\n"));
        }
        write_atomic(&track_path(path, i), s.as_bytes())?;
    }
    Ok(())
}

fn init_workers_from_env(err: &mut impl Write) {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                stokes_core::par::init_workers(n);
            }
            _ => {
                let _ = writeln!(err, "warning: ignoring {WORKERS_ENV}={v:?}");
            }
        }
    }
}

/// Full run with explicit streams; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = write!(out, "{e}");
            return 0;
        }
    }
    init_workers_from_env(err);
    let res = parse(&argv).and_then(|rc| execute(&rc));
    match res {
        Ok(o) => {
            for l in &o.lines {
                let _ = writeln!(out, "{l}");
            }
            o.status
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(args: &str) -> Result<RunConfig, CliError> {
        parse(std::iter::once("stokes").chain(args.split_whitespace()))
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("-0.5-1.25i").unwrap(), C64::new(-0.5, -1.25));
        assert_eq!(parse_complex("3i").unwrap(), C64::new(0.0, 3.0));
        assert_eq!(parse_complex("1e-3").unwrap(), C64::new(1e-3, 0.0));
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("nan").is_err());
    }

    #[test]
    fn template_terms() {
        assert_eq!(parse_term("alpha").unwrap(), FamilyTerm::Alpha(1.0));
        assert_eq!(parse_term("-alpha").unwrap(), FamilyTerm::Alpha(-1.0));
        assert_eq!(parse_term("2.5*alpha").unwrap(), FamilyTerm::Alpha(2.5));
        assert_eq!(parse_term("0").unwrap(), FamilyTerm::Const(0.0));
        assert!(parse_term("1+1i").is_err());
        assert!(parse_term("beta").is_err());
    }

    #[test]
    fn arity() {
        let rc = p("spectrum --m 3 --a 0,0 --lmin 0 --lmax 30 --out s.csv").unwrap();
        assert_eq!(rc.command, Some(Command::Spectrum));
        assert_eq!(rc.a, vec!["0", "0"]);
        assert_eq!(rc.lmax, 30.0);
        assert_eq!(rc.out.as_deref(), Some(Path::new("s.csv")));
        let rc = p("eval --m 3 --a 0,0,1.5").unwrap();
        assert_eq!(coeffs(&rc).unwrap()[2], C64::new(1.5, 0.0));
        let e = p("spectrum --m 3 --a 0,0,1").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("expected m-1 = 2 coefficients"), "{e}");
        assert_eq!(p("eval --m 3 --a 0,0").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "spectrum --bogus 1",
            "spectrum --m 3 --a 0,x",
            "spectrum --m 3 --lmin 5 --lmax 1",
            "spectrum --m 3 --tol 0",
            "spectrum --m 3 --a 0,1i",
            "sweep --m 3 --a 0,1",
            "verify --checks nope",
            "frobnicate",
            "",
        ] {
            assert_eq!(p(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn negative_values() {
        let rc = p("sweep --m 3 --a 0,-alpha --alpha-start 2 --alpha-end -5 --lmin -1").unwrap();
        assert_eq!(rc.alpha_end, -5.0);
        assert_eq!(rc.lmin, -1.0);
        assert_eq!(template(&rc).unwrap(), vec![FamilyTerm::Const(0.0), FamilyTerm::Alpha(-1.0)]);
        let rc = p("hypothesis --m 4 --a 1,-0.5,-2").unwrap();
        assert_eq!(real_coeffs(&rc).unwrap(), vec![1.0, -0.5, -2.0]);
    }

    #[test]
    fn header_only_csv() {
        let s = to_csv(&[]).unwrap();
        assert_eq!(s, format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn blank_alpha_in_csv() {
        let z = ZeroRecord {
            lambda: C64::new(1.0, 0.0),
            c_deriv: C64::new(0.5, -0.25),
            winding: 1,
            is_real: true,
            is_simple: true,
            residual: 1e-12,
        };
        let s = to_csv(&[Record::zero(&z, None, 2e-13)]).unwrap();
        let row = s.lines().nth(1).unwrap();
        assert!(row.starts_with("zero,,1.0,0.0,"), "{row}");
        assert!(row.contains(",1,true,true,"), "{row}");
    }

    #[test]
    fn track_names() {
        assert_eq!(track_path(Path::new("/tmp/s.csv"), 3), PathBuf::from("/tmp/s.track3.dat"));
    }
}
