//! Initial data for the canonical solution at the matching point `X_R = R e^{i theta}`.
//!
//! Two seeds are available. The default sums the large-`X` expansion of the
//! logarithmic derivative `y = Phi'/Phi` (Riccati equation `y' + y^2 = W`),
//! whose primitive carries exactly the normalization `X^{r_m} e^{-S}` with no
//! free constant; it is truncated where its terms bottom out. The first-order
//! WKB seed `W^{-1/4} exp(-int sqrt W)` uses the same normalization but its
//! error only decays like a power of `R`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ScaledPair;
use crate::error::{Error, Result};
use crate::potential::{AsymptoticFrame, Potential};
use crate::quadrature;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SeedOrder {
    #[default]
    Asymptotic,
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub pair: ScaledPair,
    pub radius: f64,
    pub theta: f64,
    /// Estimated relative error of the seed (value and derivative).
    pub error_estimate: f64,
}

/// Coefficients `c_n` of `y = -X^{m/2} sum_n c_n X^{-n/2}`.
pub fn riccati_coefficients(p: &Potential, n_max: usize) -> Vec<C64> {
    let m = p.degree();
    let w = |n: usize| -> C64 {
        if n == 0 {
            C64::new(1.0, 0.0)
        } else if n % 2 == 0 && n / 2 <= m {
            p.coeffs()[n / 2 - 1]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(C64::new(1.0, 0.0));
    for n in 1..=n_max {
        let conv: C64 = (1..n).map(|i| c[i] * c[n - i]).sum();
        let mut rhs = w(n) - conv;
        if n >= m + 2 {
            rhs += c[n - m - 2] * ((2.0 * m as f64 + 2.0 - n as f64) / 2.0);
        }
        c.push(rhs * 0.5);
    }
    c
}

/// Ratio `sum a_k X^{-k}` must stay inside the unit disc for the principal
/// square root of `W/X^m` to follow the branch continuous from infinity.
fn check_turning_points(p: &Potential, radius: f64) -> Result<()> {
    let z: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm() / radius.powi(i as i32 + 1))
        .sum();
    if z >= 0.5 || radius <= 1.0 + p.coefficient_radius() {
        return Err(Error::TurningPoint {
            radius,
            bound: 2.0 * p.coefficient_radius(),
        });
    }
    Ok(())
}

pub fn asymptotic_seed(p: &Potential, radius: f64, theta: f64) -> Result<Seed> {
    check_turning_points(p, radius)?;
    let m = p.degree();
    let mp2 = m + 2;
    let n_max = 12 * mp2 + 48;
    let c = riccati_coefficients(p, n_max);
    let x = C64::from_polar(radius, theta);
    let lx = x.ln();
    let lq = -0.5 * lx;
    let qpow = |e: i64| (lq * e as f64).exp();

    let log_term = |n: usize| -> C64 {
        if n == mp2 {
            -c[n] * lx
        } else {
            -c[n] * (2.0 / (mp2 as f64 - n as f64)) * qpow(n as i64 - mp2 as i64)
        }
    };
    let y_term = |n: usize| -> C64 { -c[n] * qpow(n as i64 - m as i64) };

    let mut log_phi: C64 = (0..=mp2).map(log_term).sum();
    let mut y: C64 = (0..=mp2).map(y_term).sum();

    // Remaining terms in blocks of m+2 (for a = 0 only every (m+2)-th
    // coefficient is nonzero). Stop once a block is negligible or the series
    // starts diverging.
    let eps = 1e-17;
    let y_ref = y.norm().max(1e-300);
    let block_size = |start: usize| {
        (start..(start + mp2).min(n_max + 1))
            .map(|n| log_term(n).norm().max(y_term(n).norm() / y_ref))
            .fold(0.0, f64::max)
    };
    let mut start = mp2 + 1;
    let mut last = f64::INFINITY;
    let mut estimate = 0.0;
    while start <= n_max {
        let size = block_size(start);
        if size < eps {
            estimate = size;
            break;
        }
        if size > last {
            estimate = last;
            break;
        }
        for n in start..(start + mp2).min(n_max + 1) {
            log_phi += log_term(n);
            y += y_term(n);
        }
        last = size;
        estimate = size;
        start += mp2;
    }

    let mut pair = ScaledPair {
        value: C64::new(1.0, 0.0),
        deriv: y,
        log_scale: log_phi,
    };
    pair.normalize();
    Ok(Seed {
        pair,
        radius,
        theta,
        error_estimate: estimate,
    })
}

/// `int_{X_R}^{infinity e^{i theta}} (sqrt W - S' - log_coeff/X) dX`.
///
/// The integrand is evaluated as `X^{m/2} D(u) / (s + P(u))` with `u = 1/X`,
/// `s = sqrt(W/X^m)`, `P` the truncated series and `D = s^2 - P^2` a
/// polynomial whose low coefficients vanish identically, so no cancellation
/// occurs far out on the ray.
pub fn tail_integral(p: &Potential, frame: &AsymptoticFrame, radius: f64, theta: f64) -> Result<C64> {
    check_turning_points(p, radius)?;
    let m = p.degree();
    let kp = (m + 2) / 2;
    let mut pk = vec![C64::new(1.0, 0.0)];
    pk.extend_from_slice(&frame.b[..kp]);
    let deg = m.max(2 * kp);
    let mut d = vec![C64::new(0.0, 0.0); deg + 1];
    d[0] = C64::new(1.0, 0.0);
    for (k, a) in p.coeffs().iter().enumerate() {
        d[k + 1] += a;
    }
    for i in 0..=kp {
        for j in 0..=kp {
            d[i + j] -= pk[i] * pk[j];
        }
    }
    for v in d.iter_mut().take(kp + 1) {
        *v = C64::new(0.0, 0.0);
    }
    if d.iter().all(|v| v.norm() == 0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let rot = C64::from_polar(1.0, theta);
    let half_m = m as f64 / 2.0;
    let integrand = |v: f64| -> C64 {
        let x = rot * (radius / (v * v));
        let u = x.inv();
        let horner = |cs: &[C64]| cs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * u + c);
        let w_ratio = p.coeffs().iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| (acc + a) * u)
            + C64::new(1.0, 0.0);
        let s = w_ratio.sqrt();
        let g = (x.ln() * half_m).exp() * horner(&d) / (s + horner(&pk));
        g * rot * (2.0 * radius / (v * v * v))
    };
    quadrature::integrate(integrand, 0.0, 1.0, 1e-15, 1e-13)
}

pub fn first_order_seed(p: &Potential, radius: f64, theta: f64) -> Result<Seed> {
    check_turning_points(p, radius)?;
    let frame = p.frame();
    let m = p.degree();
    let x = C64::from_polar(radius, theta);
    let lx = x.ln();
    let u = x.inv();
    let w_ratio = p.coeffs().iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| (acc + a) * u)
        + C64::new(1.0, 0.0);
    let s = w_ratio.sqrt();
    let tail = tail_integral(p, &frame, radius, theta)?;
    let log_phi = frame.r_m * lx - 0.5 * s.ln() - frame.principal_action(x)? + tail;
    let sqrt_w = (lx * (m as f64 / 2.0)).exp() * s;
    let (w, dw) = p.eval_w_dw(x);
    let y = -sqrt_w - dw / (4.0 * w);
    let mut pair = ScaledPair {
        value: C64::new(1.0, 0.0),
        deriv: y,
        log_scale: log_phi,
    };
    pair.normalize();
    // Leading neglected WKB correction is O(|W|^{-3/2} W'^2 ...) ~ R^{-(m+2)/2}.
    let estimate = radius.powf(-(m as f64 + 2.0) / 2.0);
    Ok(Seed {
        pair,
        radius,
        theta,
        error_estimate: estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn riccati_log_coefficient_is_minus_rm() {
        for coeffs in [vec![0.0, 0.0, 1.0], vec![0.5, -1.0, 2.0, 3.0], vec![1.0, 2.0]] {
            let p = Potential::real(&coeffs).unwrap();
            let m = p.degree();
            let cs = riccati_coefficients(&p, m + 4);
            assert!((-cs[m + 2] - p.frame().r_m).norm() < 1e-14);
            // below n = m+2 the coefficients are those of sqrt(W)
            let b = p.sqrt_series(m);
            for k in 1..=(m + 1) / 2 {
                assert!((cs[2 * k] - b[k - 1]).norm() < 1e-14);
                assert_eq!(cs[2 * k - 1], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn riccati_series_solves_the_riccati_equation() {
        // y' + y^2 - W should be tiny at large X when y is the truncated series.
        let p = Potential::new(vec![c(0.3, -0.2), c(1.0, 0.5), c(-2.0, 1.0)]).unwrap();
        let m = p.degree();
        let cs = riccati_coefficients(&p, 30);
        let x = c(40.0, 5.0);
        let y = |x: C64| -> C64 {
            let lq = -0.5 * x.ln();
            (0..=30).map(|n| -cs[n] * (lq * (n as f64 - m as f64)).exp()).sum()
        };
        let h = 1e-4;
        let dy = (y(x + h) - y(x - h)) / (2.0 * h);
        let res = dy + y(x) * y(x) - p.eval_w(x);
        assert!(res.norm() < 1e-6 * p.eval_w(x).norm(), "{res}");
    }

    #[test]
    fn tail_vanishes_for_pure_monomial() {
        for m in 1..7 {
            let p = Potential::real(&vec![0.0; m]).unwrap();
            assert_eq!(tail_integral(&p, &p.frame(), 5.0, 0.0).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn tail_matches_series_primitive() {
        // For |X| beyond the roots the negative-power remainder of the
        // primitive converges; compare with the quadrature.
        let p = Potential::new(vec![c(0.2, 0.1), c(-0.4, 0.0), c(1.5, -0.3)]).unwrap();
        let m = p.degree();
        let f = p.frame();
        let radius = 9.0;
        let theta = 0.2;
        let x = C64::from_polar(radius, theta);
        let b = p.sqrt_series(80);
        let mut series = c(0.0, 0.0);
        for (i, bk) in b.iter().enumerate() {
            let k = i + 1;
            if 2 * k <= m + 2 {
                continue;
            }
            let e = (m as f64 + 2.0 - 2.0 * k as f64) / 2.0;
            series += bk / e * (x.ln() * e).exp();
        }
        // tail T = -N(X) where N is the negative-power part of the primitive
        let t = tail_integral(&p, &f, radius, theta).unwrap();
        assert!((t + series).norm() < 1e-12 * series.norm().max(1e-3), "{t} vs {}", -series);
    }

    #[test]
    fn seeds_reject_close_turning_points() {
        let p = Potential::real(&[0.0, 0.0, -1000.0]).unwrap();
        assert!(matches!(asymptotic_seed(&p, 8.0, 0.0), Err(Error::TurningPoint { .. })));
        assert!(matches!(first_order_seed(&p, 8.0, 0.0), Err(Error::TurningPoint { .. })));
    }

    #[test]
    fn monomial_first_order_seed_is_bare_asymptotics() {
        let m = 3;
        let p = Potential::real(&vec![0.0; m]).unwrap();
        let r = 20.0;
        let s = first_order_seed(&p, r, 0.0).unwrap();
        let log_v = s.pair.value.ln() + s.pair.log_scale;
        let want = -(m as f64 / 4.0) * r.ln() - 0.4 * r.powf(2.5);
        assert!((log_v - c(want, 0.0)).norm() < 1e-12 * want.abs());
    }

    #[test]
    fn first_order_seed_approaches_asymptotic_seed() {
        let p = Potential::new(vec![c(0.5, 0.0), c(0.0, -0.3), c(2.0, 0.0)]).unwrap();
        let mut prev = f64::INFINITY;
        for r in [8.0, 16.0, 32.0, 64.0] {
            let a = asymptotic_seed(&p, r, 0.0).unwrap();
            let f = first_order_seed(&p, r, 0.0).unwrap();
            assert!(a.error_estimate < 1e-15);
            let dv = (f.pair.value.ln() + f.pair.log_scale) - (a.pair.value.ln() + a.pair.log_scale);
            let dy = f.pair.deriv / f.pair.value - a.pair.deriv / a.pair.value;
            let rel = dv.norm().max(dy.norm() / (a.pair.deriv / a.pair.value).norm());
            assert!(rel < prev, "r = {r}: {rel} vs {prev}");
            prev = rel;
        }
        assert!(prev < 1e-4);
    }
}
