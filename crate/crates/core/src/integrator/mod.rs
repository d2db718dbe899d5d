//! Canonical (Sibuya) solution at the origin.
//!
//! `Phi_0` is seeded at `X_R = R e^{i theta}` from its large-`X` asymptotics
//! and integrated inward along the ray to `X = 0`. Inward is the stable
//! direction for the recessive solution: any dominant admixture in the seed
//! shrinks by roughly `exp(-2 Re S(X_R))` on the way in. Mantissas are kept
//! near unit size and the exponential growth goes into `log_scale`.

mod green;
mod rk;
mod seed;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::potential::Potential;

pub use green::{green_data, green_residual, green_segment, GreenData};
pub use rk::ORDER as RK_ORDER;
pub use seed::{
    asymptotic_seed, first_order_seed, riccati_coefficients, tail_integral, Seed, SeedOrder,
};

type C64 = Complex64;

const MANTISSA_HI: f64 = 1_099_511_627_776.0; // 2^40
const MANTISSA_LO: f64 = 1.0 / MANTISSA_HI;

/// `(value, deriv) * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPair {
    pub value: C64,
    pub deriv: C64,
    pub log_scale: C64,
}

impl ScaledPair {
    pub fn new(value: C64, deriv: C64) -> Self {
        let mut p = ScaledPair {
            value,
            deriv,
            log_scale: C64::new(0.0, 0.0),
        };
        p.normalize();
        p
    }

    fn magnitude(&self) -> f64 {
        self.value.norm().max(self.deriv.norm())
    }

    /// Moves the mantissa magnitude into `log_scale` (exactly, by a real factor).
    pub fn normalize(&mut self) {
        let s = self.magnitude();
        if s > 0.0 && s.is_finite() {
            self.value /= s;
            self.deriv /= s;
            self.log_scale += s.ln();
        }
    }

    /// Multiplies the represented pair by `exp(log_factor)`.
    pub fn scaled(mut self, log_factor: C64) -> Self {
        self.log_scale += log_factor;
        self
    }

    /// Multiplies only the derivative (chain rule for rotated arguments).
    pub fn with_deriv_factor(mut self, f: C64) -> Self {
        self.deriv *= f;
        self
    }

    /// Full value; may overflow for extreme scales.
    pub fn value_full(&self) -> C64 {
        self.value * self.log_scale.exp()
    }

    pub fn deriv_full(&self) -> C64 {
        self.deriv * self.log_scale.exp()
    }

    /// `ln |value|`, finite even when the value itself is not representable.
    pub fn ln_abs_value(&self) -> f64 {
        self.value.norm().ln() + self.log_scale.re
    }

    /// `Phi'/Phi` at the point.
    pub fn log_derivative(&self) -> C64 {
        self.deriv / self.value
    }

    pub fn is_finite(&self) -> bool {
        [self.value, self.deriv, self.log_scale]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RayConfig {
    /// Ray angle; must stay inside the recessive sector `|theta| < pi/(m+2)`.
    pub theta: f64,
    /// Matching radius; `None` picks one from the potential and tolerance.
    pub radius: Option<f64>,
    pub rel_tol: f64,
    /// Absolute tolerance relative to the (unit-sized) mantissa.
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Repeat with `R <- 1.6 R` until successive results agree to `radius_tol`.
    pub adaptive_radius: bool,
    pub radius_tol: f64,
    pub seed: SeedOrder,
    pub exec: Execution,
}

impl Default for RayConfig {
    fn default() -> Self {
        RayConfig {
            theta: 0.0,
            radius: None,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_steps: 5_000_000,
            adaptive_radius: false,
            radius_tol: 1e-9,
            seed: SeedOrder::Asymptotic,
            exec: Execution::default(),
        }
    }
}

impl RayConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        let sector = PI / (m as f64 + 2.0);
        if !(self.theta.abs() < sector) {
            return Err(Error::Config(format!(
                "ray angle {} outside the recessive sector |theta| < {sector:.6}",
                self.theta
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.radius_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("matching radius {r} must be positive")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }

    /// Default matching radius: large enough that `Re S(R)` leaves the seed's
    /// dominant admixture far below tolerance and the turning points sit well
    /// inside.
    pub fn matching_radius(&self, p: &Potential) -> f64 {
        if let Some(r) = self.radius {
            return r;
        }
        let m = p.degree() as f64;
        let target = 14.0 + 0.5 * (1.0 / self.rel_tol).ln();
        let by_action = ((m + 2.0) / 2.0 * target).powf(2.0 / (m + 2.0));
        by_action.max(2.5 * (1.0 + p.coefficient_radius()))
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }
}

/// Seed at the matching point named by `cfg` (or its automatic radius).
pub fn wkb_seed(p: &Potential, cfg: &RayConfig) -> Result<Seed> {
    cfg.validate(p.degree())?;
    let radius = cfg.matching_radius(p);
    make_seed(p, cfg, radius)
}

fn make_seed(p: &Potential, cfg: &RayConfig, radius: f64) -> Result<Seed> {
    match cfg.seed {
        SeedOrder::Asymptotic => asymptotic_seed(p, radius, cfg.theta),
        SeedOrder::FirstOrder => first_order_seed(p, radius, cfg.theta),
    }
}

/// Moments accumulated along the ray: `int |Phi'|^2 dt` and `int t^j |Phi|^2 dt`,
/// in the scale of the returned mantissa pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RayMoments {
    pub grad_sq: f64,
    pub moments: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rescales: usize,
}

/// Integrates `Phi'' = W Phi` along `X = t e^{i theta}` from `t_from` to `t_to`.
fn integrate_core(
    p: &Potential,
    start: ScaledPair,
    theta: f64,
    t_from: f64,
    t_to: f64,
    cfg: &RayConfig,
    with_moments: bool,
) -> Result<(ScaledPair, Option<RayMoments>, StepStats)> {
    let m = p.degree();
    let n = if with_moments { 5 + m + 1 } else { 4 };
    let dir = C64::from_polar(1.0, theta);
    let mut y = vec![0.0; n];
    y[0] = start.value.re;
    y[1] = start.value.im;
    y[2] = start.deriv.re;
    y[3] = start.deriv.im;
    let mut log_scale = start.log_scale;

    let coeffs = p.coeffs().to_vec();
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let x = dir * t;
        let w = coeffs.iter().fold(C64::new(1.0, 0.0), |acc, &a| acc * x + a);
        let v = C64::new(y[0], y[1]);
        let d = C64::new(y[2], y[3]);
        let dv = dir * d;
        let dd = dir * w * v;
        dy[0] = dv.re;
        dy[1] = dv.im;
        dy[2] = dd.re;
        dy[3] = dd.im;
        if y.len() > 4 {
            // Integration runs toward smaller t; accumulate int_t^{t_from}.
            let v2 = v.norm_sqr();
            dy[4] = -d.norm_sqr();
            let mut tj = 1.0;
            for slot in dy[5..].iter_mut() {
                *slot = -tj * v2;
                tj *= t;
            }
        }
    };

    let mut dp = rk::Dp5::new(n);
    let span = t_to - t_from;
    if span == 0.0 {
        let pair = ScaledPair {
            value: start.value,
            deriv: start.deriv,
            log_scale,
        };
        let mom = with_moments.then(|| RayMoments {
            grad_sq: 0.0,
            moments: vec![0.0; m + 1],
        });
        return Ok((pair, mom, StepStats::default()));
    }
    let sign = span.signum();
    let w0 = p.eval_w(dir * t_from).norm().sqrt();
    let mut h = sign * (0.05 / (1.0 + w0)).min(span.abs());
    let mut t = t_from;
    let mut stats = StepStats::default();
    let (rtol, atol) = (cfg.rel_tol, cfg.abs_tol);

    while (t_to - t) * sign > 0.0 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::StepBudget {
                steps: cfg.max_steps,
                t,
            });
        }
        let last = (t + h - t_to) * sign >= 0.0;
        let h_try = if last { t_to - t } else { h };
        dp.step(&mut rhs, t, &y, h_try);
        let ynew = &dp.y_new;
        let e = &dp.err;
        let mag = C64::new(y[0], y[1])
            .norm()
            .max(C64::new(y[2], y[3]).norm());
        let mut err = 0.0f64;
        for k in [0usize, 2] {
            let old = C64::new(y[k], y[k + 1]).norm();
            let new = C64::new(ynew[k], ynew[k + 1]).norm();
            let sc = atol * mag + rtol * old.max(new);
            err = err.max(C64::new(e[k], e[k + 1]).norm() / sc);
        }
        for k in 4..n {
            let sc = atol * (mag * mag) + rtol * y[k].abs().max(ynew[k].abs());
            err = err.max(e[k].abs() / sc);
        }
        if !err.is_finite() {
            if ynew.iter().any(|v| !v.is_finite()) && h_try.abs() < 1e-12 {
                return Err(Error::NonFinite {
                    t,
                    radius: t_from,
                });
            }
            h *= 0.1;
            dp.invalidate();
            stats.rejected += 1;
            continue;
        }
        if err <= 1.0 {
            t = if last { t_to } else { t + h_try };
            y.copy_from_slice(ynew);
            dp.accept();
            stats.accepted += 1;
            let mag = C64::new(y[0], y[1])
                .norm()
                .max(C64::new(y[2], y[3]).norm());
            if !(MANTISSA_LO..=MANTISSA_HI).contains(&mag) {
                if mag == 0.0 || !mag.is_finite() {
                    return Err(Error::NonFinite { t, radius: t_from });
                }
                for v in y[..4].iter_mut() {
                    *v /= mag;
                }
                for v in y[4..].iter_mut() {
                    *v /= mag * mag;
                }
                dp.scale_cached(|i, v| if i < 4 { v / mag } else { v / (mag * mag) });
                log_scale += mag.ln();
                stats.rescales += 1;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h *= grow;
            }
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    let pair = ScaledPair {
        value: C64::new(y[0], y[1]),
        deriv: C64::new(y[2], y[3]),
        log_scale,
    };
    if !pair.is_finite() {
        return Err(Error::NonFinite { t, radius: t_from });
    }
    let moments = with_moments.then(|| RayMoments {
        grad_sq: y[4],
        moments: y[5..].to_vec(),
    });
    Ok((pair, moments, stats))
}

/// `Phi_0(0)`, `Phi_0'(0)` from a seed at its matching point.
pub fn integrate_ray(p: &Potential, seed: &Seed, cfg: &RayConfig) -> Result<ScaledPair> {
    let (mut pair, _, _) = integrate_core(p, seed.pair, seed.theta, seed.radius, 0.0, cfg, false)?;
    pair.normalize();
    Ok(pair)
}

/// Same as [`integrate_ray`] but also returns step statistics.
pub fn integrate_ray_stats(p: &Potential, seed: &Seed, cfg: &RayConfig) -> Result<(ScaledPair, StepStats)> {
    let (mut pair, _, stats) =
        integrate_core(p, seed.pair, seed.theta, seed.radius, 0.0, cfg, false)?;
    pair.normalize();
    Ok((pair, stats))
}

/// Integrates with the quadrature moments used by the Green transform.
pub fn integrate_ray_moments(
    p: &Potential,
    seed: &Seed,
    cfg: &RayConfig,
) -> Result<(ScaledPair, RayMoments)> {
    let (pair, mom, _) = integrate_core(p, seed.pair, seed.theta, seed.radius, 0.0, cfg, true)?;
    Ok((pair, mom.expect("moments requested")))
}

/// Transports a state along the ray `arg X = theta` between two radii.
pub fn integrate_segment(
    p: &Potential,
    state: ScaledPair,
    theta: f64,
    t_from: f64,
    t_to: f64,
    cfg: &RayConfig,
) -> Result<ScaledPair> {
    let (mut pair, _, _) = integrate_core(p, state, theta, t_from, t_to, cfg, false)?;
    pair.normalize();
    Ok(pair)
}

/// Fixed-step variant (no error control), for convergence-order checks.
pub fn integrate_fixed(
    p: &Potential,
    start: ScaledPair,
    theta: f64,
    t_from: f64,
    t_to: f64,
    steps: usize,
) -> ScaledPair {
    let dir = C64::from_polar(1.0, theta);
    let coeffs = p.coeffs().to_vec();
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let x = dir * t;
        let w = coeffs.iter().fold(C64::new(1.0, 0.0), |acc, &a| acc * x + a);
        let dv = dir * C64::new(y[2], y[3]);
        let dd = dir * w * C64::new(y[0], y[1]);
        dy[0] = dv.re;
        dy[1] = dv.im;
        dy[2] = dd.re;
        dy[3] = dd.im;
    };
    let mut dp = rk::Dp5::new(4);
    let mut y = vec![start.value.re, start.value.im, start.deriv.re, start.deriv.im];
    let h = (t_to - t_from) / steps as f64;
    for i in 0..steps {
        dp.step(&mut rhs, t_from + i as f64 * h, &y, h);
        y.copy_from_slice(&dp.y_new);
        dp.accept();
    }
    ScaledPair {
        value: C64::new(y[0], y[1]),
        deriv: C64::new(y[2], y[3]),
        log_scale: start.log_scale,
    }
}

/// Relative distance between two scaled pairs.
pub fn pair_distance(a: &ScaledPair, b: &ScaledPair) -> f64 {
    let shift = (a.log_scale - b.log_scale).exp();
    let (va, da) = (a.value * shift, a.deriv * shift);
    let scale = b.value.norm().max(b.deriv.norm());
    ((va - b.value).norm().max((da - b.deriv).norm())) / scale
}

/// `Phi_0(0, a)` and `Phi_0'(0, a)`.
pub fn canonical_origin(p: &Potential, cfg: &RayConfig) -> Result<ScaledPair> {
    cfg.validate(p.degree())?;
    let mut radius = cfg.matching_radius(p);
    // Grow the radius until the seed is accurate (turning points or an
    // under-resolved asymptotic series).
    let accept = match cfg.seed {
        SeedOrder::Asymptotic => 0.1 * cfg.rel_tol,
        SeedOrder::FirstOrder => f64::INFINITY,
    };
    let mut tries = 0;
    let seed = loop {
        match make_seed(p, cfg, radius) {
            Ok(s) if s.error_estimate <= accept => break s,
            Ok(s) if cfg.radius.is_some() => {
                return Err(Error::SeedAccuracy {
                    radius,
                    estimate: s.error_estimate,
                })
            }
            Err(e @ Error::TurningPoint { .. }) if cfg.radius.is_some() => return Err(e),
            Ok(_) | Err(Error::TurningPoint { .. }) => {}
            Err(e) => return Err(e),
        }
        tries += 1;
        if tries > 12 {
            return Err(Error::RadiusLoop {
                radius,
                change: f64::NAN,
            });
        }
        radius *= 1.6;
    };
    let mut result = integrate_ray(p, &seed, cfg)?;
    if !cfg.adaptive_radius {
        return Ok(result);
    }
    let mut radius = seed.radius;
    let mut change = f64::INFINITY;
    for _ in 0..8 {
        radius *= 1.6;
        let next = integrate_ray(p, &make_seed(p, cfg, radius)?, cfg)?;
        change = pair_distance(&result, &next);
        result = next;
        if change <= cfg.radius_tol {
            return Ok(result);
        }
    }
    Err(Error::RadiusLoop { radius, change })
}

/// `f_0 = Phi_0(0, a)` as a scaled pair (value only is meaningful to callers).
pub fn f0(p: &Potential, cfg: &RayConfig) -> Result<ScaledPair> {
    canonical_origin(p, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn config_rejects_bad_angles_and_tolerances() {
        let cfg = RayConfig::default().with_theta(PI / 4.0);
        assert!(cfg.validate(3).is_err());
        assert!(RayConfig::default().with_theta(0.5).validate(3).is_ok());
        let cfg = RayConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate(3).is_err());
    }

    #[test]
    fn mantissa_stays_in_range() {
        let p = Potential::real(&[0.0, 0.0, 0.0]).unwrap();
        let cfg = RayConfig::default().with_radius(30.0);
        let seed = wkb_seed(&p, &cfg).unwrap();
        // exp(-0.4 * 30^2.5) is far outside f64 range
        assert!(seed.pair.log_scale.re < -1500.0);
        let (out, stats) = integrate_ray_stats(&p, &seed, &cfg).unwrap();
        assert!(stats.rescales > 10);
        let mag = out.value.norm().max(out.deriv.norm());
        assert!((mag - 1.0).abs() < 1e-12);
        assert!(out.value_full().re > 0.0);
    }

    #[test]
    fn constant_potential_closed_form() {
        // m = 1 with a huge constant shift over a short segment: W ~ const.
        // Compare against the cosh/sinh propagator of Phi'' = W Phi with W
        // frozen, on a segment short enough that the linear part is tiny.
        let cst = 4.0;
        let p = Potential::real(&[cst]).unwrap(); // W = X + 4
        let cfg = RayConfig::default();
        let start = ScaledPair::new(c(1.0, 0.0), c(-0.5, 0.0));
        let len = 1e-3;
        let out = integrate_segment(&p, start, 0.0, 0.0, len, &cfg).unwrap();
        // Exact to first order in the slope: use the Airy-free Taylor series
        // of the true solution, accurate to O(len^5).
        let (v0, d0) = (1.0, -0.5);
        let w0 = cst;
        let v = v0 + d0 * len + w0 * v0 * len.powi(2) / 2.0
            + (v0 + w0 * d0) * len.powi(3) / 6.0
            + (2.0 * d0 + w0 * w0 * v0) * len.powi(4) / 24.0;
        assert!((out.value_full().re - v).abs() < 1e-13);
        // and the pure constant case through the cosh/sinh closed form
        let k = 2.0f64;
        let q = Potential::real(&[0.0]).unwrap(); // W = X, integrate near X = k^2 over tiny span
        let start = ScaledPair::new(c(1.0, 0.0), c(0.0, 0.0));
        let t0 = k * k;
        let span = 1e-4;
        let out = integrate_segment(&q, start, 0.0, t0, t0 + span, &cfg).unwrap();
        let closed = (k * span).cosh();
        assert!((out.value_full().re - closed).abs() < 1e-10);
    }

    #[test]
    fn parabolic_cylinder_log_derivative() {
        // -Phi'' + X^2 Phi = 0 has recessive solution D_{-1/2}(sqrt2 X); its
        // logarithmic derivative at 0 is -sqrt2 * Gamma(3/4)/Gamma(1/4) * 2.
        let p = Potential::real(&[0.0, 0.0]).unwrap();
        let out = canonical_origin(&p, &RayConfig::default()).unwrap();
        assert!(out.value_full().re > 0.0 && out.value_full().re.is_finite());
        let g34 = 1.225_416_702_465_177_6_f64;
        let g14 = 3.625_609_908_221_908_3_f64;
        let want = -2.0 * g34 / g14;
        let got = out.log_derivative();
        assert!((got - c(want, 0.0)).norm() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn real_data_gives_real_origin_values() {
        for lam in [-3.0, 0.0, 2.5] {
            let p = Potential::real(&[0.0, 0.0, lam]).unwrap();
            let out = canonical_origin(&p, &RayConfig::default()).unwrap();
            assert!(out.value.im.abs() <= 1e-10 * out.value.norm().max(out.deriv.norm()));
            assert!(out.deriv.im.abs() <= 1e-10 * out.value.norm().max(out.deriv.norm()));
        }
    }

    #[test]
    fn f0_positive_for_monomial_cubic() {
        let p = Potential::real(&[0.0, 0.0, 0.0]).unwrap();
        let v = f0(&p, &RayConfig::default()).unwrap().value_full();
        assert!(v.re > 0.0 && v.im.abs() < 1e-12 * v.re);
    }

    #[test]
    fn fixed_step_convergence_order() {
        let p = Potential::new(vec![c(0.0, 0.0), c(0.3, 0.1), c(1.0, 0.0)]).unwrap();
        let cfg = RayConfig {
            rel_tol: 1e-14,
            abs_tol: 1e-16,
            ..Default::default()
        };
        let start = ScaledPair::new(c(1.0, 0.0), c(-1.0, 0.2));
        let reference = integrate_segment(&p, start, 0.0, 2.0, 0.0, &cfg).unwrap();
        let err = |n| pair_distance(&integrate_fixed(&p, start, 0.0, 2.0, 0.0, n), &reference);
        let (e1, e2) = (err(40), err(80));
        let order = (e1 / e2).log2();
        assert!((order - RK_ORDER as f64).abs() < 0.5, "observed order {order}");
    }

    #[test]
    fn adaptive_radius_settles() {
        let p = Potential::real(&[0.4, -0.2, 1.7]).unwrap();
        let cfg = RayConfig {
            adaptive_radius: true,
            ..Default::default()
        };
        let a = canonical_origin(&p, &cfg).unwrap();
        let b = canonical_origin(&p, &RayConfig::default()).unwrap();
        assert!(pair_distance(&a, &b) < 1e-9);
    }
}
