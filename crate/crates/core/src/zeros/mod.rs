//! Zeros of `lambda -> C(a_1, ..., a_{m-1}, lambda)` and of `f_0`.
//!
//! Real scans bracket sign changes of the real function `-iC` (or `f_0`) and
//! refine them with Brent's method. Multiplicities come from the argument
//! principle, derivatives from Cauchy's integral on a small circle.

mod brent;
mod contour;
mod sweep;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{canonical_origin, RayConfig};
use crate::par::{self, Execution};
use crate::potential::Potential;
use crate::stokes::{stokes_c, ScaledValue};
use crate::verify::check_hypothesis;

pub use brent::{brent, golden_max, Root};
pub use contour::{winding_number, winding_number_nudged, Contour, Rect};
pub use sweep::{sweep_family, CoalescenceEvent, Family, FamilyTerm, Snapshot, Sweep, SweepOptions};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub lambda: C64,
    /// `dC/dlambda` at the zero (filled by [`classify_zeros`]).
    pub c_deriv: C64,
    /// Zeros inside a small disc around `lambda`, with multiplicity (0 until classified).
    pub winding: i64,
    pub is_real: bool,
    pub is_simple: bool,
    /// Estimated distance to the exact zero, `|C| / |dC/dlambda|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub lo: f64,
    pub hi: f64,
    pub grid: usize,
    /// Rectangle for argument-principle counts; defaults to `[lo, hi] x [-1, 1]`.
    #[serde(rename = "box")]
    pub bbox: Option<Rect>,
    pub tol: f64,
}

impl SearchWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        SearchWindow {
            lo,
            hi,
            grid: 64,
            bbox: None,
            tol: 1e-10,
        }
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(Error::Config(format!("window lo {} must be below hi {}", self.lo, self.hi)));
        }
        if self.grid < 16 {
            return Err(Error::Config(format!("grid {} must be at least 16", self.grid)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("refinement tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn count_box(&self) -> Rect {
        self.bbox.unwrap_or_else(|| Rect::around_segment(self.lo, self.hi, 1.0))
    }
}

/// Local minimum of `|f|` without a sign change: a possible pair of close or
/// coalescing zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangency {
    pub lambda: f64,
    /// `|f|` at the minimum over the median of the local maxima.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealScan {
    pub zeros: Vec<ZeroRecord>,
    pub tangencies: Vec<Tangency>,
    /// Final grid size.
    pub grid: usize,
}

/// Relative imaginary residue of `-iC` on the real axis tolerated for real data.
pub const SYMMETRY_TOL: f64 = 1e-6;
/// Tangency trigger: local min below this fraction of the median peak.
pub const TANGENCY_RATIO: f64 = 1e-3;
/// `is_simple` needs `|C'|` above this fraction of the neighbours' `|C'|`.
pub const DERIVATIVE_FLOOR: f64 = 1e-6;
/// Contour points and radius for the Cauchy derivative.
pub const CAUCHY_POINTS: usize = 16;
pub const CAUCHY_RADIUS: f64 = 0.05;
const MAX_DOUBLINGS: usize = 5;

/// A real function sampled as `(mantissa, ln_scale)`: value `mantissa * e^{ln_scale}`.
/// The mantissa alone is a scale-free size.
type Sample = (f64, f64);

fn sign_changes(vals: &[Sample]) -> usize {
    vals.windows(2)
        .filter(|w| (w[0].0 > 0.0) != (w[1].0 > 0.0) || w[1].0 == 0.0)
        .count()
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Sign-change scan of a real function on `[lo, hi]`, doubling the grid until
/// the number of sign changes repeats, then Brent refinement.
pub fn scan_real<F>(f: &F, w: &SearchWindow, exec: Execution) -> Result<RealScan>
where
    F: Fn(f64) -> Result<Sample> + Sync,
{
    w.validate()?;
    let mut n = w.grid;
    let xs: Vec<f64> = (0..=n).map(|i| w.lo + (w.hi - w.lo) * i as f64 / n as f64).collect();
    let vals: Vec<Sample> = par::map(exec, &xs, |x| f(*x)).into_iter().collect::<Result<_>>()?;
    let mut xs = xs;
    let mut vals = vals;
    let mut count = sign_changes(&vals);
    for _ in 0..MAX_DOUBLINGS {
        let mids: Vec<f64> = xs.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let mv: Vec<Sample> = par::map(exec, &mids, |x| f(*x)).into_iter().collect::<Result<_>>()?;
        let mut nx = Vec::with_capacity(2 * n + 1);
        let mut nv = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            nx.push(xs[i]);
            nv.push(vals[i]);
            nx.push(mids[i]);
            nv.push(mv[i]);
        }
        nx.push(xs[n]);
        nv.push(vals[n]);
        xs = nx;
        vals = nv;
        n *= 2;
        let next = sign_changes(&vals);
        if next == count {
            break;
        }
        count = next;
    }

    let brackets: Vec<usize> = (0..n)
        .filter(|&i| (vals[i].0 > 0.0) != (vals[i + 1].0 > 0.0) && vals[i].0 != 0.0)
        .collect();
    let refine = |&i: &usize| -> Result<ZeroRecord> {
        let (a, b) = (xs[i], xs[i + 1]);
        let r = vals[i].1;
        let g = |x: f64| -> Result<f64> {
            let (v, s) = f(x)?;
            Ok(v * (s - r).exp())
        };
        let fa = vals[i].0;
        let fb = vals[i + 1].0 * (vals[i + 1].1 - r).exp();
        let root = brent(g, a, b, fa, fb, w.tol)?;
        Ok(real_record(root.x, root.fx.abs() / root.slope.max(f64::MIN_POSITIVE)))
    };
    let mut zeros: Vec<ZeroRecord> = par::map(exec, &brackets, refine).into_iter().collect::<Result<_>>()?;
    for i in 1..n {
        if vals[i].0 == 0.0 {
            zeros.push(real_record(xs[i], 0.0));
        }
    }
    zeros.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re));

    // local extrema of |mantissa|
    let mag: Vec<f64> = vals.iter().map(|v| v.0.abs()).collect();
    let peaks: Vec<f64> = (1..n).filter(|&i| mag[i] >= mag[i - 1] && mag[i] >= mag[i + 1]).map(|i| mag[i]).collect();
    let med = median(peaks);
    let tangencies = (1..n)
        .filter(|&i| {
            mag[i] < mag[i - 1]
                && mag[i] < mag[i + 1]
                && (vals[i - 1].0 > 0.0) == (vals[i].0 > 0.0)
                && (vals[i].0 > 0.0) == (vals[i + 1].0 > 0.0)
                && mag[i] < TANGENCY_RATIO * med
        })
        .map(|i| Tangency {
            lambda: xs[i],
            ratio: mag[i] / med,
        })
        .collect();
    Ok(RealScan {
        zeros,
        tangencies,
        grid: n,
    })
}

fn real_record(x: f64, residual: f64) -> ZeroRecord {
    ZeroRecord {
        lambda: C64::new(x, 0.0),
        c_deriv: C64::new(0.0, 0.0),
        winding: 0,
        is_real: true,
        is_simple: false,
        residual,
    }
}

fn complex_head(head: &[f64]) -> Vec<C64> {
    head.iter().map(|&a| C64::new(a, 0.0)).collect()
}

/// `-iC(a, lambda)` for real data, scaled by its cancellation-free size.
pub fn minus_i_c(head: &[f64], lambda: f64, cfg: &RayConfig) -> Result<Sample> {
    let p = Potential::with_lambda(&complex_head(head), C64::new(lambda, 0.0))?;
    let d = stokes_c(&p, cfg)?;
    let v = -C64::i() * d.c;
    if v.im.abs() > SYMMETRY_TOL * (d.c_scale + v.norm()) {
        return Err(Error::BrokenSymmetry {
            at: lambda,
            residue: v.im.abs() / (d.c_scale + v.norm()),
        });
    }
    let s = d.c_scale.max(f64::MIN_POSITIVE);
    Ok((v.re / s, s.ln()))
}

/// `C(a, lambda)` with its scale, for contour work.
pub fn c_scaled(head: &[C64], lambda: C64, cfg: &RayConfig) -> Result<ScaledValue> {
    let d = stokes_c(&Potential::with_lambda(head, lambda)?, cfg)?;
    let s = d.c_scale.max(f64::MIN_POSITIVE);
    Ok(ScaledValue::new(d.c / s, C64::new(s.ln(), 0.0)))
}

/// Real zeros of `-iC` in the window. The head must be real.
pub fn scan_real_zeros(head: &[f64], w: &SearchWindow, cfg: &RayConfig) -> Result<RealScan> {
    let f = |x: f64| minus_i_c(head, x, cfg);
    scan_real(&f, w, cfg.exec)
}

/// Cauchy-trapezoid estimates of `C(lambda)` (mean value) and `C'(lambda)`.
pub fn cauchy_value_and_derivative(
    head: &[C64],
    lambda: C64,
    radius: f64,
    points: usize,
    cfg: &RayConfig,
) -> Result<(C64, C64)> {
    let nodes: Vec<C64> = (0..points)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64))
        .collect();
    let vals: Vec<C64> = par::map(cfg.exec, &nodes, |u| {
        Ok(stokes_c(&Potential::with_lambda(head, lambda + radius * u)?, cfg)?.c)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let n = points as f64;
    let value = vals.iter().sum::<C64>() / n;
    let deriv = vals.iter().zip(&nodes).map(|(v, u)| v / u).sum::<C64>() / (n * radius);
    Ok((value, deriv))
}

/// `dC/dlambda` by Cauchy's integral on a circle of radius [`CAUCHY_RADIUS`].
pub fn derivative_c(head: &[C64], lambda: C64, cfg: &RayConfig) -> Result<C64> {
    Ok(cauchy_value_and_derivative(head, lambda, CAUCHY_RADIUS, CAUCHY_POINTS, cfg)?.1)
}

/// Fourth-order central difference of `C` in `lambda`.
pub fn derivative_c_fd(head: &[C64], lambda: C64, h: f64, cfg: &RayConfig) -> Result<C64> {
    let offsets = [-2.0, -1.0, 1.0, 2.0];
    let v: Vec<C64> = par::map(cfg.exec, &offsets, |k| {
        Ok(stokes_c(&Potential::with_lambda(head, lambda + k * h)?, cfg)?.c)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok((v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h))
}

/// Zeros of `C(a, .)` inside `contour`, with multiplicity.
pub fn winding_count(head: &[C64], contour: &Contour, cfg: &RayConfig) -> Result<i64> {
    let f = |z: C64| c_scaled(head, z, cfg);
    winding_number(&f, contour, cfg.exec)
}

/// Like [`winding_count`] but grows a pinched contour; returns the contour used.
pub fn winding_count_nudged(head: &[C64], contour: &Contour, cfg: &RayConfig) -> Result<(i64, Contour)> {
    let f = |z: C64| c_scaled(head, z, cfg);
    winding_number_nudged(&f, contour, cfg.exec)
}

/// Fills derivative, local multiplicity and simpleness. The disc around each
/// zero has radius 0.3 times the gap to its neighbours (at most 0.25).
pub fn classify_unchecked(records: &[ZeroRecord], head: &[C64], cfg: &RayConfig) -> Result<Vec<ZeroRecord>> {
    let mut out: Vec<ZeroRecord> = records.to_vec();
    out.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re));
    let n = out.len();
    let gaps: Vec<f64> = (0..n)
        .map(|i| {
            let mut g = f64::INFINITY;
            if i > 0 {
                g = g.min((out[i].lambda - out[i - 1].lambda).norm());
            }
            if i + 1 < n {
                g = g.min((out[i + 1].lambda - out[i].lambda).norm());
            }
            g
        })
        .collect();
    for (i, r) in out.iter_mut().enumerate() {
        let (value, deriv) = cauchy_value_and_derivative(head, r.lambda, CAUCHY_RADIUS, CAUCHY_POINTS, cfg)?;
        let disc = Contour::Disc {
            center: r.lambda,
            radius: (0.3 * gaps[i]).min(0.25),
        };
        let (w, _) = winding_count_nudged(head, &disc, cfg)?;
        r.c_deriv = deriv;
        r.winding = w;
        r.residual = value.norm() / deriv.norm().max(f64::MIN_POSITIVE);
    }
    let derivs: Vec<f64> = out.iter().map(|r| r.c_deriv.norm()).collect();
    for i in 0..n {
        let mut scale = derivs[i];
        if i > 0 {
            scale = scale.max(derivs[i - 1]);
        }
        if i + 1 < n {
            scale = scale.max(derivs[i + 1]);
        }
        let r = &mut out[i];
        r.is_real = r.lambda.im.abs() <= 1e-8 * (1.0 + r.lambda.norm());
        r.is_simple = r.winding == 1 && derivs[i] > DERIVATIVE_FLOOR * scale;
    }
    Ok(out)
}

/// [`classify_unchecked`] plus the certification that applies when the
/// sign hypothesis holds: every zero real, positive and simple.
pub fn classify_zeros(records: &[ZeroRecord], head: &[f64], cfg: &RayConfig) -> Result<Vec<ZeroRecord>> {
    let out = classify_unchecked(records, &complex_head(head), cfg)?;
    if check_hypothesis(head).holds() {
        if let Some(bad) = out
            .iter()
            .find(|r| !(r.is_real && r.is_simple && r.lambda.re > 0.0))
        {
            return Err(Error::Certification(format!(
                "zero at {} (winding {}, |C'| {:.3e}) is not real, positive and simple",
                bad.lambda,
                bad.winding,
                bad.c_deriv.norm()
            )));
        }
    }
    Ok(out)
}

/// Winding count of `C` over the window's box, nudged if needed.
pub fn box_count(head: &[f64], w: &SearchWindow, cfg: &RayConfig) -> Result<(i64, Rect)> {
    let (n, used) = winding_count_nudged(&complex_head(head), &Contour::Rect(w.count_box()), cfg)?;
    match used {
        Contour::Rect(r) => Ok((n, r)),
        Contour::Disc { .. } => unreachable!("rectangles nudge to rectangles"),
    }
}

/// `f_0(lambda)` for `a = 0` as a scaled value.
pub fn f0_scaled(m: usize, lambda: C64, cfg: &RayConfig) -> Result<ScaledValue> {
    let head = vec![C64::new(0.0, 0.0); m - 1];
    let o = canonical_origin(&Potential::with_lambda(&head, lambda)?, cfg)?;
    Ok(ScaledValue::new(o.value, o.log_scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Zeros {
    pub zeros: Vec<ZeroRecord>,
    /// Argument-principle count over the window's box.
    pub box_count: i64,
    pub count_box: Rect,
    /// `(lambda, f_0(lambda))` on the positive axis; all must be positive.
    pub positive_samples: Vec<(f64, f64)>,
}

/// Span and density of the positivity samples of `f_0`.
pub const F0_POSITIVE_SPAN: f64 = 20.0;
pub const F0_POSITIVE_SAMPLES: usize = 50;

/// Zeros of `f_0` (for `a = 0`) in the window, the box count around them and
/// positivity samples on `[0, 20]`.
pub fn f0_negative_zeros(m: usize, w: &SearchWindow, cfg: &RayConfig) -> Result<F0Zeros> {
    if m < 1 {
        return Err(Error::Config("degree must be at least 1".into()));
    }
    let f = |x: f64| -> Result<Sample> {
        let v = f0_scaled(m, C64::new(x, 0.0), cfg)?;
        Ok((v.mantissa.re, v.log_scale.re))
    };
    let scan = scan_real(&f, w, cfg.exec)?;
    let fz = |z: C64| f0_scaled(m, z, cfg);
    let (box_count, used) = winding_number_nudged(&fz, &Contour::Rect(w.count_box()), cfg.exec)?;
    let count_box = match used {
        Contour::Rect(r) => r,
        Contour::Disc { .. } => unreachable!("rectangles nudge to rectangles"),
    };
    let xs: Vec<f64> = (0..F0_POSITIVE_SAMPLES)
        .map(|i| F0_POSITIVE_SPAN * i as f64 / (F0_POSITIVE_SAMPLES - 1) as f64)
        .collect();
    let positive_samples: Vec<(f64, f64)> = par::map(cfg.exec, &xs, |&x| {
        let v = f0_scaled(m, C64::new(x, 0.0), cfg)?;
        Ok((x, v.value().re))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    if let Some(&(x, v)) = positive_samples.iter().find(|s| !(s.1 > 0.0)) {
        return Err(Error::Certification(format!("f_0({x}) = {v:e} is not positive")));
    }
    Ok(F0Zeros {
        zeros: scan.zeros,
        box_count,
        count_box,
        positive_samples,
    })
}
