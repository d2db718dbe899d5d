//! The individual checks. Each returns report rows; numerical failures become
//! rows with a `NaN` residual.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use super::sample::{complex_box, hypothesis_head, real_box, stream};
use super::{check_hypothesis, Entry, Hypothesis, SuiteConfig};
use crate::error::{Error, Result};
use crate::integrator::{canonical_origin, green_data, RayConfig};
use crate::par;
use crate::potential::{exponent_rm, omega_int, omega_pow, Potential};
use crate::stokes::{
    connection_from_triple, g_a, origin_triple, stokes_c, stokes_c_from_f0, unnormalized_origin, wronskian,
    wronskian_lemma, wronskian_with, ScaledValue, WronskianConvention,
};
use crate::zeros::{
    box_count, classify_zeros, f0_negative_zeros, f0_scaled, minus_i_c, scan_real, scan_real_zeros, SearchWindow,
};

type C64 = Complex64;

fn cj(z: C64) -> Value {
    json!([z.re, z.im])
}

fn cjs(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| cj(z)).collect())
}

fn real_c(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn entry_or_fail(name: &str, params: Value, threshold: f64, r: Result<f64>) -> Entry {
    match r {
        Ok(res) => Entry::new(name, params, res, threshold),
        Err(e) => Entry::failed(name, params, threshold, e),
    }
}

/// Random complex coefficient vectors, `cases_per_degree` for each degree.
/// Every fourth case is real.
fn mixed_ensemble(seed: u64, salt: &str, cfg: &SuiteConfig) -> Vec<Vec<C64>> {
    let mut rng = stream(seed, salt);
    let mut out = Vec::new();
    for &m in &cfg.degrees {
        for i in 0..cfg.cases_per_degree {
            let a = if i % 4 == 3 {
                real_c(&real_box(&mut rng, m, 1.0))
            } else {
                complex_box(&mut rng, m, 1.0)
            };
            out.push(a);
        }
    }
    out
}

/// `conj(C(a)) + C(conj a) = 0`.
pub fn check_symmetry(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let cases = mixed_ensemble(seed, "symmetry", cfg);
    let thr = cfg.threshold(cfg.thresholds.symmetry);
    par::map(cfg.ray.exec, &cases, |a| {
        let params = json!({ "m": a.len(), "a": cjs(a) });
        let r = (|| {
            let p = Potential::new(a.clone())?;
            let c = stokes_c(&p, &cfg.ray)?.c;
            let cc = stokes_c(&p.conj(), &cfg.ray)?.c;
            Ok((c.conj() + cc).norm() / (1.0 + c.norm()))
        })();
        entry_or_fail("symmetry", params, thr, r)
    })
}

/// `x * e^{ls}` relative to `e^{reference}`.
fn rel_value(x: C64, ls: C64, reference: f64) -> C64 {
    x * (ls - reference).exp()
}

/// `C f_0 = w^{m/2+r} f_0(w_1(a)) - w^{-m/2-r} f_0(w_{-1}(a))`, with `C` from
/// Wronskians and each `f_0` from its own integration.
pub fn check_functional_relation(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let mut rng = stream(seed, "functional_relation");
    let mut cases: Vec<Vec<C64>> = Vec::new();
    for &m in &cfg.degrees {
        for i in 0..cfg.cases_per_degree {
            let mut a = if m == 3 && i % 2 == 0 {
                vec![C64::new(0.0, 0.0); m]
            } else {
                real_c(&real_box(&mut rng, m, 1.0))
            };
            a[m - 1] = C64::new(if i == 0 { 0.0 } else { rng.gen_range(0.0..10.0) }, 0.0);
            cases.push(a);
        }
    }
    let thr = cfg.threshold(cfg.thresholds.functional);
    par::map(cfg.ray.exec, &cases, |a| {
        let params = json!({ "m": a.len(), "a": cjs(a) });
        let r = (|| {
            let p = Potential::new(a.clone())?;
            let m = p.degree();
            let expo = m as f64 / 2.0 + exponent_rm(&p);
            let c = stokes_c(&p, &cfg.ray)?.c;
            let here = canonical_origin(&p, &cfg.ray)?;
            let up = canonical_origin(&p.rotate(1), &cfg.ray)?;
            let down = canonical_origin(&p.rotate(-1), &cfg.ray)?;
            let reference = here.log_scale.re.max(up.log_scale.re).max(down.log_scale.re);
            let lhs = c * rel_value(here.value, here.log_scale, reference);
            let t_up = omega_pow(m, expo) * rel_value(up.value, up.log_scale, reference);
            let t_down = omega_pow(m, -expo) * rel_value(down.value, down.log_scale, reference);
            let size = lhs.norm().max(t_up.norm()).max(t_down.norm());
            Ok((lhs - (t_up - t_down)).norm() / size)
        })();
        entry_or_fail("functional_relation", params, thr, r)
    })
}

/// Numerical `Wr(Phi_k, Phi_{k+1})` vs the closed form, `k = -1, 0, 1`, for
/// real coefficients in the unit box.
pub fn check_wronskian_lemma(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let mut rng = stream(seed, "wronskian_lemma");
    let mut cases = Vec::new();
    for &m in &cfg.degrees {
        for _ in 0..cfg.cases_per_degree {
            cases.push(real_box(&mut rng, m, 1.0));
        }
    }
    let thr = cfg.threshold(cfg.thresholds.lemma);
    let conv = cfg.convention;
    par::map(cfg.ray.exec, &cases, |a| {
        let params = |k: i64| json!({ "m": a.len(), "a": a, "k": k, "convention": conv });
        let residuals: Result<Vec<f64>> = Potential::real(a).and_then(|p| {
            (-1..=2)
                .map(|k| unnormalized_origin(&p, k, &cfg.ray))
                .collect::<Result<Vec<_>>>()
                .map(|o| (p, o))
                .map(|(p, o)| {
                    (-1..=1i64)
                        .map(|k| {
                            let i = (k + 1) as usize;
                            let w = wronskian_with(conv, &o[i], &o[i + 1]).value();
                            let target = wronskian_lemma(&p, k);
                            (w - target).norm() / target.norm()
                        })
                        .collect()
                })
        });
        match residuals {
            Ok(res) => (-1..=1i64)
                .zip(res)
                .map(|(k, r)| Entry::new("wronskian_lemma", params(k), r, thr))
                .collect::<Vec<_>>(),
            Err(e) => (-1..=1i64)
                .map(|k| Entry::failed("wronskian_lemma", params(k), thr, &e))
                .collect(),
        }
    })
    .into_iter()
    .flatten()
    .collect()
}

/// The `Phi_1` coefficient of the connection formula is 1.
pub fn check_unit_coefficient(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let cases = mixed_ensemble(seed, "unit_coefficient", cfg);
    let thr = cfg.threshold(cfg.thresholds.unit);
    par::map(cfg.ray.exec, &cases, |a| {
        let params = json!({ "m": a.len(), "a": cjs(a) });
        let r = (|| {
            let p = Potential::new(a.clone())?;
            let (pm, p0, p1) = origin_triple(&p, &cfg.ray)?;
            Ok(connection_from_triple(WronskianConvention::Standard, &pm, &p0, &p1)?.unit_coeff_residual)
        })();
        entry_or_fail("unit_coefficient", params, thr, r)
    })
}

fn wide_ensemble(seed: u64, salt: &str, cfg: &SuiteConfig) -> Vec<Vec<C64>> {
    let mut rng = stream(seed, salt);
    let mut out = Vec::new();
    for &m in &cfg.degrees {
        for _ in 0..cfg.cases_per_degree {
            let mut a = complex_box(&mut rng, m, 1.0);
            a[m - 1] = C64::new(rng.gen_range(0.0..10.0), rng.gen_range(-1.0..1.0));
            out.push(a);
        }
    }
    out
}

/// Wronskian path vs the `f_0` path for `C`.
pub fn check_dual_path(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let cases = wide_ensemble(seed, "dual_path", cfg);
    let thr = cfg.threshold(cfg.thresholds.dual);
    par::map(cfg.ray.exec, &cases, |a| {
        let params = json!({ "m": a.len(), "a": cjs(a) });
        let p = match Potential::new(a.clone()) {
            Ok(p) => p,
            Err(e) => return Some(Entry::failed("dual_path", params, thr, e)),
        };
        let c = stokes_c(&p, &cfg.ray).map(|d| d.c);
        match (c, stokes_c_from_f0(&p, &cfg.ray)) {
            // f_0 too small for the value path: filtered out
            (_, Err(Error::NearZeroF0 { .. })) => None,
            (Ok(c), Ok(cf)) => Some(Entry::new("dual_path", params, (c - cf).norm() / (1.0 + c.norm()), thr)),
            (Err(e), _) | (_, Err(e)) => Some(Entry::failed("dual_path", params, thr, e)),
        }
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `C` at matching radii `1.6 R` and `1.6^2 R`.
pub fn check_r_robustness(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let cases = wide_ensemble(seed, "r_robustness", cfg);
    let thr = cfg.threshold(cfg.thresholds.robust);
    par::map(cfg.ray.exec, &cases, |a| {
        let params = json!({ "m": a.len(), "a": cjs(a) });
        let r = (|| {
            let p = Potential::new(a.clone())?;
            let r0 = RayConfig { radius: None, ..cfg.ray }.matching_radius(&p);
            let c1 = stokes_c(&p, &cfg.ray.with_radius(1.6 * r0))?.c;
            let c2 = stokes_c(&p, &cfg.ray.with_radius(1.6 * 1.6 * r0))?.c;
            Ok((c1 - c2).norm() / (1.0 + c1.norm()))
        })();
        entry_or_fail("r_robustness", params, thr, r)
    })
}

/// `ln|C|` straight from the scaled Wronskians, so it cannot overflow.
fn ln_abs_c(p: &Potential, cfg: &RayConfig) -> Result<f64> {
    let (pm, p0, p1) = origin_triple(p, cfg)?;
    Ok(wronskian(&pm, &p1).div(&wronskian(&p0, &p1)).ln_abs())
}

/// Least-squares slope of `ln M(r)` against `ln r`, where `M(r)` is the
/// maximum of `ln|f|` over `angles` points of `|lambda| = r`.
pub fn order_slope<F>(f: F, radii: &[f64], angles: usize, exec: crate::Execution) -> Result<(f64, Vec<f64>)>
where
    F: Fn(C64) -> Result<f64> + Sync,
{
    if radii.len() < 2 || angles == 0 {
        return Err(Error::Config("order fit needs at least two radii and one angle".into()));
    }
    let points: Vec<C64> = radii
        .iter()
        .flat_map(|&r| (0..angles).map(move |j| C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / angles as f64)))
        .collect();
    let vals: Vec<Result<f64>> = par::map(exec, &points, |&z| f(z));
    let mut maxima = Vec::with_capacity(radii.len());
    for (i, _) in radii.iter().enumerate() {
        let row = &vals[i * angles..(i + 1) * angles];
        let best = row.iter().filter_map(|v| v.as_ref().ok()).copied().fold(f64::NEG_INFINITY, f64::max);
        if !(best > 0.0) {
            let err = row.iter().find_map(|v| v.as_ref().err()).cloned();
            return Err(err.unwrap_or_else(|| Error::Degenerate(format!("max ln|f| = {best} at radius {}", radii[i]))));
        }
        maxima.push(best);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("order fit over a single radius".into()));
    }
    Ok((sxy / sxx, maxima))
}

/// Growth order of `f_0` (all radii) and `C` (first three radii) against `1/2 + 1/m`.
pub fn check_order_growth(cfg: &SuiteConfig) -> Vec<Entry> {
    let thr = cfg.threshold(cfg.thresholds.order);
    let ray = cfg.coarse_ray();
    let mut out = Vec::new();
    for &m in &cfg.degrees {
        let expected = 0.5 + 1.0 / m as f64;
        let head = vec![C64::new(0.0, 0.0); m - 1];
        let f0 = |z: C64| f0_scaled(m, z, &ray).map(|v| v.ln_abs());
        let c = |z: C64| Potential::with_lambda(&head, z).and_then(|p| ln_abs_c(&p, &ray));
        let c_radii: Vec<f64> = cfg.order_radii.iter().copied().take(3).collect();
        for (name, radii, r) in [
            ("f0", &cfg.order_radii, order_slope(f0, &cfg.order_radii, cfg.order_angles, cfg.ray.exec)),
            ("C", &c_radii, order_slope(c, &c_radii, cfg.order_angles, cfg.ray.exec)),
        ] {
            let params = |slope: Option<f64>, maxima: Option<&Vec<f64>>| {
                json!({ "m": m, "function": name, "radii": radii, "expected": expected, "slope": slope, "max_ln_abs": maxima })
            };
            out.push(match r {
                Ok((slope, maxima)) => Entry::new("order_growth", params(Some(slope), Some(&maxima)), (slope - expected).abs(), thr),
                Err(e) => Entry::failed("order_growth", params(None, None), thr, e),
            });
        }
    }
    out
}

/// `g'/g` at `lambda` by the Cauchy trapezoid rule on a circle of the given
/// radius. Samples are divided by `g(lambda)` first, so the scale cancels.
pub fn log_derivative(head: &[C64], lambda: C64, radius: f64, points: usize, cfg: &RayConfig) -> Result<C64> {
    let g0 = g_a(head, lambda, cfg)?;
    if g0.is_zero() {
        return Err(Error::Degenerate(format!("g_a vanishes at {lambda}")));
    }
    let nodes: Vec<C64> = (0..points)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64))
        .collect();
    let vals: Vec<C64> = par::map(cfg.exec, &nodes, |u| Ok(g_a(head, lambda + radius * u, cfg)?.div(&g0).value()))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(vals.iter().zip(&nodes).map(|(v, u)| v / u).sum::<C64>() / (points as f64 * radius))
}

/// `Im(g_a'/g_a) < 0` on a real grid, for `a = 0` and sign-hypothesis heads.
pub fn check_logderiv_sign(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let mut rng = stream(seed, "logderiv_sign");
    let mut heads: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, -0.5, -2.0]];
    for _ in 0..2 {
        heads.push(hypothesis_head(&mut rng, 4, 1.0));
    }
    let (lo, hi) = cfg.logderiv_window;
    let n = cfg.logderiv_samples.max(1);
    let lams: Vec<f64> = (0..n)
        .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let cases: Vec<(Vec<f64>, f64)> = heads
        .iter()
        .flat_map(|h| lams.iter().map(move |&l| (h.clone(), l)))
        .collect();
    let thr = -cfg.threshold(cfg.thresholds.logderiv_margin);
    par::map(cfg.ray.exec, &cases, |(h, l)| {
        let r = log_derivative(&real_c(h), C64::new(*l, 0.0), 0.05, 16, &cfg.ray);
        match r {
            Ok(d) => Entry::new(
                "logderiv_sign",
                json!({ "m": h.len() + 1, "head": h, "lambda": l, "logderiv": cj(d) }),
                d.im / d.norm(),
                thr,
            ),
            Err(e) => Entry::failed("logderiv_sign", json!({ "m": h.len() + 1, "head": h, "lambda": l }), thr, e),
        }
    })
}

/// Fixed examples plus random heads drawn to satisfy the hypothesis.
pub fn check_hypothesis_cases(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let thr = cfg.threshold(0.0);
    let mut out = Vec::new();
    let mut push = |head: &[f64], ok: bool, got: &Hypothesis| {
        out.push(Entry::new(
            "hypothesis",
            json!({ "m": head.len() + 1, "head": head, "result": got }),
            if ok { 0.0 } else { 1.0 },
            thr,
        ));
    };
    let fixed: [(&[f64], Option<usize>); 3] = [(&[1.0, -0.5, -2.0], Some(2)), (&[-1.0, 1.0], None), (&[0.0, 0.0], Some(1))];
    for (head, want) in fixed {
        let got = check_hypothesis(head);
        let ok = match (&got, want) {
            (Hypothesis::Accepted { j, .. }, Some(w)) => *j == w,
            (Hypothesis::Rejected { .. }, None) => true,
            _ => false,
        };
        push(head, ok, &got);
    }
    let mut rng = stream(seed, "hypothesis");
    for &m in &cfg.degrees {
        for _ in 0..cfg.cases_per_degree {
            let head = hypothesis_head(&mut rng, m, 1.0);
            let got = check_hypothesis(&head);
            push(&head, got.holds(), &got);
        }
    }
    out
}

/// Zeros of `f_0` for `a = 0` in `(lo, hi)`, in increasing order.
fn f0_real_zeros(m: usize, lo: f64, hi: f64, grid: usize, cfg: &RayConfig) -> Result<Vec<f64>> {
    let f = |x: f64| -> Result<(f64, f64)> {
        let v = f0_scaled(m, C64::new(x, 0.0), cfg)?;
        Ok((v.mantissa.re, v.log_scale.re))
    };
    let scan = scan_real(&f, &SearchWindow::new(lo, hi).with_grid(grid), cfg.exec)?;
    Ok(scan.zeros.iter().map(|z| z.lambda.re).collect())
}

/// Zeros of `g_a` for a real head, by continuation from `a = 0` where they
/// sit at `w^{-m} mu_n` (`mu_n` the negative zeros of `f_0`). Secant steps on
/// the scaled values; `count` zeros nearest the origin.
pub fn zeros_of_g(head: &[f64], count: usize, cfg: &RayConfig) -> Result<Vec<C64>> {
    let m = head.len() + 1;
    let mut lo = -10.0;
    let mus = loop {
        let z = f0_real_zeros(m, lo, -1e-3, 64, cfg)?;
        if z.len() >= count {
            break z;
        }
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::Degenerate("too few zeros of f_0".into()));
        }
    };
    let rot = omega_int(m, -(m as i64));
    let mut lams: Vec<C64> = mus.iter().rev().take(count).map(|&mu| rot * mu).collect();
    let steps = 10;
    for s in 1..=steps {
        let t = s as f64 / steps as f64;
        let h: Vec<C64> = head.iter().map(|&a| C64::new(t * a, 0.0)).collect();
        lams = par::map(cfg.exec, &lams, |&l0| secant(|l| g_a(&h, l, cfg), l0))
            .into_iter()
            .collect::<Result<_>>()?;
    }
    Ok(lams)
}

fn secant<F>(f: F, start: C64) -> Result<C64>
where
    F: Fn(C64) -> Result<ScaledValue>,
{
    let mut x0 = start;
    let mut x1 = start + C64::new(1e-3, 1e-3);
    let mut f0 = f(x0)?;
    for _ in 0..60 {
        let f1 = f(x1)?;
        if f1.is_zero() {
            return Ok(x1);
        }
        let q = f0.div(&f1).value();
        let x2 = x1 - (x1 - x0) / (C64::new(1.0, 0.0) - q);
        if !(x2.re.is_finite() && x2.im.is_finite()) {
            break;
        }
        if (x2 - x1).norm() <= 1e-12 * (1.0 + x2.norm()) {
            return Ok(x2);
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
    }
    Err(Error::Degenerate(format!("secant iteration near {start} did not converge")))
}

/// Green identities along rays: generic residuals, the real-axis recovery
/// of a zero of `f_0`, the `2 pi/(m+2)` ray at a zero of `C`, and the `m = 4`
/// bound `Im lambda_n < 0` for zeros of `g_a`.
pub fn check_green(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let thr = cfg.threshold(cfg.thresholds.green);
    let thr_zero = cfg.threshold(cfg.thresholds.green_zero);
    let mut out = Vec::new();
    let ray = &cfg.ray;

    let mut rng = stream(seed, "green");
    let mut rays = Vec::new();
    for &m in &cfg.degrees {
        let a = complex_box(&mut rng, m, 1.0);
        let s = 2.0 * PI / (m as f64 + 2.0);
        for theta in [0.0, 0.4 * s, s, -s + 0.2] {
            rays.push((a.clone(), theta));
        }
    }
    out.extend(par::map(ray.exec, &rays, |(a, theta)| {
        let params = json!({ "case": "ray", "m": a.len(), "a": cjs(a), "theta": theta });
        let r = Potential::new(a.clone()).and_then(|p| Ok(green_data(&p, *theta, ray)?.residual()));
        entry_or_fail("green", params, thr, r)
    }));

    // f_0(lambda*) = 0: the real part of the identity on theta = 0 gives lambda*
    let r = (|| -> Result<(f64, f64)> {
        let zs = f0_real_zeros(3, -8.0, -0.01, 64, ray)?;
        let star = *zs.last().ok_or_else(|| Error::Degenerate("no zero of f_0 in (-8, 0)".into()))?;
        let p = Potential::with_lambda(&[C64::new(0.0, 0.0); 2], C64::new(star, 0.0))?;
        let rec = green_data(&p, 0.0, ray)?.lambda_from_real_part();
        Ok((star, rec))
    })();
    out.push(match r {
        Ok((star, rec)) => Entry::new(
            "green",
            json!({ "case": "f0_zero", "m": 3, "zero": star, "recovered": rec }),
            if rec < 0.0 { (rec - star).abs() / (1.0 + star.abs()) } else { f64::INFINITY },
            thr_zero,
        ),
        Err(e) => Entry::failed("green", json!({ "case": "f0_zero", "m": 3 }), thr_zero, e),
    });

    // C(lambda*) = 0: the imaginary part on theta = 2 pi / 5 gives lambda* > 0
    let r = (|| -> Result<(f64, f64)> {
        let head = [0.0, 0.0];
        let f = |x: f64| minus_i_c(&head, x, ray);
        let scan = scan_real(&f, &SearchWindow::new(0.5, 2.0).with_grid(16), ray.exec)?;
        let star = scan.zeros.first().ok_or_else(|| Error::Degenerate("no zero of C in (0.5, 2)".into()))?.lambda.re;
        let p = Potential::with_lambda(&real_c(&head), C64::new(star, 0.0))?;
        let rec = green_data(&p, 2.0 * PI / 5.0, ray)?.lambda_from_imag_part();
        Ok((star, rec))
    })();
    out.push(match r {
        Ok((star, rec)) => Entry::new(
            "green",
            json!({ "case": "c_zero", "m": 3, "zero": star, "recovered": rec, "theta": 2.0 * PI / 5.0 }),
            if rec > 0.0 { (rec - star).abs() / (1.0 + star.abs()) } else { f64::INFINITY },
            thr_zero,
        ),
        Err(e) => Entry::failed("green", json!({ "case": "c_zero", "m": 3 }), thr_zero, e),
    });

    // m = 4: at a zero of g_a, Phi_0 for w_1(a) with a_4 = w^4 lambda_n vanishes
    // at the origin; the identity on theta = 0 returns lambda_n
    let heads: Vec<Vec<f64>> = vec![vec![1.0, -0.5, -2.0], hypothesis_head(&mut rng, 4, 1.0)];
    for head in heads {
        match zeros_of_g(&head, 3, ray) {
            Ok(zs) => {
                for z in zs {
                    let params = |rec: Option<C64>| {
                        json!({ "case": "g_zero", "m": 4, "head": head, "zero": cj(z), "recovered": rec.map(cj) })
                    };
                    let r = Potential::with_lambda(&real_c(&head), z)
                        .and_then(|p| green_data(&p.rotate(1), 0.0, ray))
                        .map(|g| omega_int(4, -4) * g.lambda_from_identity());
                    out.push(match r {
                        Ok(rec) => Entry::new(
                            "green",
                            params(Some(rec)),
                            if rec.im < 0.0 { (rec - z).norm() / (1.0 + z.norm()) } else { f64::INFINITY },
                            thr_zero,
                        ),
                        Err(e) => Entry::failed("green", params(None), thr_zero, e),
                    });
                }
            }
            Err(e) => out.push(Entry::failed("green", json!({ "case": "g_zero", "m": 4, "head": head }), thr_zero, e)),
        }
    }
    out
}

/// Truncated product `f_0(0) prod (1 - lambda/mu_n)` against `f_0(lambda)`
/// for `m = 3, a = 0`: the error with the larger truncation order must be smaller.
pub fn check_hadamard(cfg: &SuiteConfig) -> Vec<Entry> {
    let (small, large) = cfg.hadamard_orders;
    let thr = cfg.threshold(cfg.thresholds.hadamard_ratio);
    let lambda = 1.0;
    let ray = cfg.coarse_ray();
    let r = (|| {
        // Bohr-Sommerfeld estimate of the `large`-th zero, with margin
        let est = ((large as f64 - 0.25) * PI / 0.8413).powf(1.2) * 1.08 + 5.0;
        let grid = (est / 1.5).ceil() as usize;
        let mut zs = f0_real_zeros(3, -est, -1e-3, grid.max(64), &ray)?;
        zs.reverse();
        if zs.len() < large {
            return Err(Error::Degenerate(format!("only {} zeros of f_0 above {}", zs.len(), -est)));
        }
        let at = |l: f64| f0_scaled(3, C64::new(l, 0.0), &ray).map(|v| v.value().re);
        let (a, want) = (at(0.0)?, at(lambda)?);
        let err = |n: usize| {
            let prod: f64 = zs[..n].iter().map(|mu| 1.0 - lambda / mu).product();
            (a * prod - want).abs() / want.abs()
        };
        let orders: Vec<usize> = [small, 2 * small, large / 2, large].into_iter().filter(|&n| n <= large).collect();
        let errs: Vec<(usize, f64)> = orders.iter().map(|&n| (n, err(n))).collect();
        Ok((err(large) / err(small), errs, zs[large - 1]))
    })();
    let params = json!({ "m": 3, "lambda": lambda, "orders": [small, large] });
    vec![match r {
        Ok((ratio, errs, last)) => {
            let mut p = params;
            p["errors"] = json!(errs);
            p["last_zero"] = json!(last);
            Entry::new("hadamard", p, ratio, thr)
        }
        Err(e) => Entry::failed("hadamard", params, thr, e),
    }]
}

/// Zeros of `f_0` for `m = 3, a = 0`: negative, matched by the box count, and
/// `f_0 > 0` on the positivity samples.
pub fn check_f0_zeros(cfg: &SuiteConfig) -> Vec<Entry> {
    let thr = cfg.threshold(0.0);
    let w = SearchWindow::new(-20.0, -0.1);
    let params = json!({ "m": 3, "window": [w.lo, w.hi] });
    vec![match f0_negative_zeros(3, &w, &cfg.ray) {
        Ok(z) => {
            let nonneg = z.zeros.iter().filter(|r| r.lambda.re >= 0.0).count();
            let bad_samples = z.positive_samples.iter().filter(|s| !(s.1 > 0.0)).count();
            let mismatch = (z.box_count - z.zeros.len() as i64).unsigned_abs() as usize;
            let mut p = params;
            p["zeros"] = json!(z.zeros.iter().map(|r| r.lambda.re).collect::<Vec<_>>());
            p["box_count"] = json!(z.box_count);
            p["positive_samples"] = json!(z.positive_samples.len());
            Entry::new("f0_zeros", p, (nonneg + bad_samples + mismatch) as f64, thr)
        }
        Err(e) => Entry::failed("f0_zeros", params, thr, e),
    }]
}

/// Random sign-hypothesis heads: every zero in the window real, positive and
/// simple, and the real count equal to the box winding count.
pub fn check_simple_zeros(seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    let mut rng = stream(seed, "simple_zeros");
    let heads: Vec<Vec<f64>> = (0..cfg.simple_cases)
        .map(|i| {
            let m = cfg.degrees[i % cfg.degrees.len()];
            hypothesis_head(&mut rng, m, 1.0)
        })
        .collect();
    let thr = cfg.threshold(0.0);
    let w = SearchWindow::new(cfg.simple_window.0, cfg.simple_window.1);
    // cases run one after another; the scans inside are already parallel
    heads
        .iter()
        .map(|h| {
            let params = json!({ "m": h.len() + 1, "head": h, "window": [w.lo, w.hi] });
            let r = (|| -> Result<_> {
                let scan = scan_real_zeros(h, &w, &cfg.ray)?;
                let zeros = classify_zeros(&scan.zeros, h, &cfg.ray)?;
                let (count, _) = box_count(h, &w, &cfg.ray)?;
                let bad = zeros
                    .iter()
                    .filter(|z| !(z.is_real && z.is_simple && z.winding == 1 && z.lambda.re > 0.0))
                    .count();
                Ok((zeros, count, bad))
            })();
            match r {
                Ok((zeros, count, bad)) => {
                    let mut p = params;
                    p["zeros"] = json!(zeros.iter().map(|z| z.lambda.re).collect::<Vec<_>>());
                    p["box_count"] = json!(count);
                    let mismatch = (count - zeros.len() as i64).unsigned_abs() as f64;
                    Entry::new("simple_zeros", p, bad as f64 + mismatch, thr)
                }
                Err(e) => Entry::failed("simple_zeros", params, thr, e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            degrees: vec![3, 4],
            cases_per_degree: 2,
            ..Default::default()
        }
    }

    #[test]
    fn identity_checks_pass_on_a_small_ensemble() {
        let cfg = quick();
        for entries in [
            check_symmetry(3, &cfg),
            check_functional_relation(3, &cfg),
            check_wronskian_lemma(3, &cfg),
            check_unit_coefficient(3, &cfg),
            check_r_robustness(3, &cfg),
        ] {
            assert!(!entries.is_empty());
            for e in &entries {
                assert!(e.passed(), "{e:?}");
            }
        }
    }

    #[test]
    fn flipped_convention_breaks_the_lemma() {
        let cfg = SuiteConfig {
            convention: WronskianConvention::Flipped,
            ..quick()
        };
        let entries = check_wronskian_lemma(3, &cfg);
        assert!(entries.iter().all(|e| !e.passed()));
        assert!(entries.iter().all(|e| (e.residual - 2.0).abs() < 1e-6));
    }

    #[test]
    fn zero_threshold_scale_fails_residual_checks() {
        let cfg = SuiteConfig {
            threshold_scale: 0.0,
            ..quick()
        };
        assert!(check_symmetry(5, &cfg).iter().any(|e| !e.passed()));
    }

    #[test]
    fn log_derivative_of_exponential_like_case() {
        // g_a for a = 0, m = 3 at lambda = 0 vs a centred difference of ln g
        let cfg = RayConfig::default();
        let head = real_c(&[0.0, 0.0]);
        let d = log_derivative(&head, C64::new(0.0, 0.0), 0.05, 16, &cfg).unwrap();
        let h = 1e-4;
        let gp = g_a(&head, C64::new(h, 0.0), &cfg).unwrap();
        let gm = g_a(&head, C64::new(-h, 0.0), &cfg).unwrap();
        let fd = (gp.div(&gm).value().ln()) / (2.0 * h);
        assert!((d - fd).norm() < 1e-6 * d.norm(), "{d} vs {fd}");
        assert!(d.im < 0.0);
    }
}
