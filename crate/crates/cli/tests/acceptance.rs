//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each (with wall time against its budget) and exits non-zero if any fails.
//! Criteria run one at a time so the timings are not polluted by each other.

mod common;

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use stokes_cli::{execute, parse, Outcome, Record};
use stokes_core::verify::{self, CheckKind, Entry, SuiteConfig};
use stokes_core::zeros::{f0_scaled, winding_number_nudged, Contour, Rect};
use stokes_core::RayConfig;

type C64 = Complex64;

const SEED: u64 = 20240611;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn cli(args: &[&str]) -> Result<Outcome, String> {
    let rc = parse(std::iter::once("stokes").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    execute(&rc).map_err(|e| e.to_string())
}

fn read_csv(path: &Path) -> Vec<Record> {
    let mut r = csv::Reader::from_path(path).expect("csv output");
    r.deserialize().map(|x| x.expect("csv row")).collect()
}

fn summarize(entries: &[Entry]) -> (usize, usize, f64) {
    let failed = entries.iter().filter(|e| !e.passed()).count();
    let worst = entries
        .iter()
        .map(|e| if e.threshold > 0.0 { e.residual / e.threshold } else { e.residual })
        .fold(0.0f64, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    (entries.len(), failed, worst)
}

fn harmonic(dir: &Path) -> Verdict {
    let out = dir.join("harmonic.csv");
    let o = out.to_str().unwrap();
    if let Err(e) = cli(&["spectrum", "--m", "2", "--a", "0", "--lmin", "0", "--lmax", "10", "--out", o]) {
        return verdict(false, e);
    }
    let rows = read_csv(&out);
    let got: Vec<f64> = rows.iter().map(|r| r.lambda_re).collect();
    let want = common::harmonic_levels(5);
    let err = if got.len() == want.len() {
        got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let simple = rows.iter().all(|r| r.is_simple && r.winding == 1);
    verdict(
        err <= 1e-6 && simple,
        format!("zeros {got:.9?}, max |error| {err:.2e} (tol 1e-6), all simple {simple}"),
    )
}

fn closed_form_c() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (m, a) in [(3, "0,0,0"), (4, "0,0,0,0")] {
        match cli(&["eval", "--m", &m.to_string(), "--a", a]) {
            Ok(o) => {
                let c = &o.extra["c"];
                let c = C64::new(c["re"].as_f64().unwrap(), c["im"].as_f64().unwrap());
                let v = -C64::i() * c;
                let want = common::c_at_origin(m);
                let rel = (v - want).norm() / want;
                pass &= rel <= 1e-6;
                parts.push(format!("m={m}: -iC(0) = {:.10} vs {want:.10} (rel {rel:.2e})", v.re));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("m={m}: {e}"));
            }
        }
    }
    verdict(pass, parts.join("; "))
}

fn pt_cubic(dir: &Path) -> Verdict {
    let want: Vec<f64> = common::pt_cubic_levels(400, 0.8, 4).iter().map(|z| z.0).collect();
    let out = dir.join("cubic.csv");
    let o = out.to_str().unwrap();
    if let Err(e) = cli(&["spectrum", "--m", "3", "--a", "0,0", "--lmin", "0", "--lmax", "13", "--out", o]) {
        return verdict(false, e);
    }
    let got: Vec<f64> = read_csv(&out).iter().map(|r| r.lambda_re).take(4).collect();
    let rel = if got.len() == 4 {
        got.iter().zip(&want).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    verdict(
        rel <= 1e-5,
        format!("zeros {got:.8?}, oracle {want:.8?}, max rel {rel:.2e} (tol 1e-5)"),
    )
}

fn identities() -> Verdict {
    let cfg = SuiteConfig::default();
    let report = verify::run_suite(SEED, &CheckKind::IDENTITIES, &cfg);
    let (n, failed, worst) = summarize(&report.entries);
    let per: Vec<String> = CheckKind::IDENTITIES
        .iter()
        .map(|k| format!("{} {}", k.name(), report.count(k.name())))
        .collect();
    verdict(
        n >= 100 && failed == 0,
        format!(
            "{n} cases over m in {:?} ({}), {failed} failed, worst residual/threshold {worst:.2e}",
            cfg.degrees,
            per.join(", ")
        ),
    )
}

fn simple_zeros() -> Verdict {
    let cfg = SuiteConfig::default();
    let entries = verify::run_check(CheckKind::SimpleZeros, SEED, &cfg);
    let (n, failed, _) = summarize(&entries);
    let zeros: usize = entries
        .iter()
        .map(|e| e.params["zeros"].as_array().map_or(0, |a| a.len()))
        .sum();
    let degrees: std::collections::BTreeSet<u64> = entries.iter().filter_map(|e| e.params["m"].as_u64()).collect();
    let first = entries.iter().find(|e| !e.passed()).map(|e| format!(", first failure {}", e.params)).unwrap_or_default();
    verdict(
        n == 50 && failed == 0 && degrees.len() == 3,
        format!("{n} heads over m in {degrees:?}, {zeros} zeros certified real/positive/simple with matching box counts, {failed} failed{first}"),
    )
}

fn f0_zeros() -> Verdict {
    let cfg = SuiteConfig::default();
    let entries = verify::check_f0_zeros(&cfg);
    let e = &entries[0];
    let zeros: Vec<f64> = e.params["zeros"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_f64()).collect())
        .unwrap_or_default();
    // a wider box straddling the origin must hold no zeros besides the negative real ones
    let ray = RayConfig::default();
    let f = |z: C64| f0_scaled(3, z, &ray);
    let wide = Contour::Rect(Rect::new(-20.0, 20.0, -2.0, 2.0));
    let inside = zeros.iter().filter(|&&x| x > -20.0).count() as i64;
    let wide_count = winding_number_nudged(&f, &wide, ray.exec).map(|r| r.0);
    let wide_ok = matches!(wide_count, Ok(c) if c == inside);
    verdict(
        e.passed() && wide_ok && !zeros.is_empty(),
        format!(
            "zeros {zeros:.7?}, box count {}, {} positive samples on [0, 20], count on [-20,20]x[-2,2] {wide_count:?} vs {inside}{}",
            e.params["box_count"],
            e.params["positive_samples"],
            e.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
        ),
    )
}

fn order_growth() -> Verdict {
    let cfg = SuiteConfig {
        degrees: vec![3, 4],
        ..SuiteConfig::default()
    };
    let entries = verify::check_order_growth(&cfg);
    let mut pass = true;
    let mut parts = Vec::new();
    for e in &entries {
        let f = e.params["function"].as_str().unwrap_or("?");
        if f == "f0" {
            pass &= e.passed();
        }
        parts.push(format!(
            "{f} m={}: slope {:.4} vs {:.4}",
            e.params["m"],
            e.params["slope"].as_f64().unwrap_or(f64::NAN),
            e.params["expected"].as_f64().unwrap_or(f64::NAN)
        ));
    }
    let tol = cfg.thresholds.order;
    verdict(pass && !entries.is_empty(), format!("{} (tol {tol})", parts.join(", ")))
}

fn coalescence(dir: &Path) -> Verdict {
    let out = dir.join("sweep.csv");
    let o = out.to_str().unwrap();
    let args = [
        "sweep", "--m", "3", "--a", "0,-alpha", "--alpha-start", "2", "--alpha-end", "-5", "--steps", "70", "--lmin", "-1",
        "--lmax", "15", "--classify", "--out", o,
    ];
    let outcome = match cli(&args) {
        Ok(o) => o,
        Err(e) => return verdict(false, e),
    };
    let rows = read_csv(&out);
    let events: Vec<&Record> = rows.iter().filter(|r| r.kind == "coalescence").collect();
    let good = events.iter().find(|r| {
        r.alpha.is_some_and(|a| a < 0.0)
            && r.c_abs <= 1e-4
            && r.dc_re.hypot(r.dc_im) <= 1e-4
            && r.winding == 2
    });
    let early_events = events.iter().filter(|r| r.alpha.is_some_and(|a| a >= 0.0)).count();
    let nonneg: Vec<&Record> = rows.iter().filter(|r| r.kind == "zero" && r.alpha.is_some_and(|a| a >= 0.0)).collect();
    let non_simple = nonneg.iter().filter(|r| !r.is_simple).count();
    let tracks = (0..outcome.tracks.len()).filter(|&i| stokes_cli::track_path(&out, i).exists()).count();
    let detail = match good {
        Some(r) => format!(
            "event at alpha = {:.6}, lambda = {:.6}, |C| = {:.1e}, |dC| = {:.1e}, winding {}",
            r.alpha.unwrap(),
            r.lambda_re,
            r.c_abs,
            r.dc_re.hypot(r.dc_im),
            r.winding
        ),
        None => format!("no qualifying event among {} reported", events.len()),
    };
    verdict(
        good.is_some() && early_events == 0 && non_simple == 0 && !nonneg.is_empty() && tracks == outcome.tracks.len(),
        format!(
            "{detail}; alpha >= 0: {early_events} events, {non_simple} of {} zeros not simple; {tracks} track files",
            nonneg.len()
        ),
    )
}

fn logderiv() -> Verdict {
    let cfg = SuiteConfig::default();
    let entries = verify::check_logderiv_sign(SEED, &cfg);
    let (n, failed, _) = summarize(&entries);
    let worst = entries.iter().map(|e| e.residual).fold(f64::NEG_INFINITY, f64::max);
    let m3 = entries.iter().filter(|e| e.params["m"] == 3).count();
    let m4 = entries.iter().filter(|e| e.params["m"] == 4).count();
    verdict(
        failed == 0 && m3 >= 20 && m4 >= 20,
        format!("{n} samples (m=3: {m3}, m=4: {m4}), {failed} failed, max Im(g'/g)/|g'/g| = {worst:.3}"),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    type Criterion<'a> = (&'a str, u64, Box<dyn Fn() -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 harmonic spectrum", 10, Box::new(|| harmonic(d))),
        ("2 closed-form C(0)", 5, Box::new(closed_form_c)),
        ("3 PT cubic vs oracle", 60, Box::new(|| pt_cubic(d))),
        ("4 identity suite", 300, Box::new(identities)),
        ("5 zeros under the sign hypothesis", 600, Box::new(simple_zeros)),
        ("6 zeros of f0", 120, Box::new(f0_zeros)),
        ("7 order of growth", 120, Box::new(order_growth)),
        ("8 coalescence sweep", 600, Box::new(|| coalescence(d))),
        ("9 log-derivative sign", 120, Box::new(logderiv)),
    ];
    let mut failures = 0;
    let mut stdout = std::io::stdout();
    for (name, budget, run) in &criteria {
        let t = Instant::now();
        let v = run();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let pass = v.pass && in_time;
        if !pass {
            failures += 1;
        }
        let _ = writeln!(
            stdout,
            "[{}] {name}: {} [{:.1} s, budget {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            dt.as_secs_f64()
        );
        let _ = stdout.flush();
    }
    let _ = writeln!(stdout, "acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
