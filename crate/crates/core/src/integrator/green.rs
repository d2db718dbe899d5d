//! Green's transform of `w'' = f w` along a ray.
//!
//! Multiplying by `conj(w)` and integrating over `z = z_1 + t e^{i theta}`,
//! `t in [0, r]`, gives
//! `[conj(w) w']_{z_1}^{z_2} = e^{-i theta} int |w'|^2 dt + e^{i theta} int f |w|^2 dt`.
//! For a solution recessive along the ray the boundary term at infinity drops.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{integrate_ray_moments, make_seed, RayConfig, SeedOrder};
use crate::error::{Error, Result};
use crate::potential::{omega_int, Potential};
use crate::quadrature;

type C64 = Complex64;

/// Both sides of the transform on a finite segment, by adaptive quadrature.
pub fn green_segment<W, D, F>(
    w: W,
    dw: D,
    f: F,
    z1: C64,
    theta: f64,
    r: f64,
) -> Result<(C64, C64)>
where
    W: Fn(C64) -> C64,
    D: Fn(C64) -> C64,
    F: Fn(C64) -> C64,
{
    let dir = C64::from_polar(1.0, theta);
    let z2 = z1 + dir * r;
    let lhs = w(z2).conj() * dw(z2) - w(z1).conj() * dw(z1);
    let grad = quadrature::integrate(|t| C64::new(dw(z1 + dir * t).norm_sqr(), 0.0), 0.0, r, 1e-15, 1e-13)?;
    let pot = quadrature::integrate(
        |t| {
            let z = z1 + dir * t;
            f(z) * w(z).norm_sqr()
        },
        0.0,
        r,
        1e-15,
        1e-13,
    )?;
    Ok((lhs, dir.conj() * grad + dir * pot))
}

/// Green's transform of the solution recessive along `arg X = theta`, on `[0, infinity)`.
///
/// Everything is in the frame of the original potential; the common positive
/// scale of the solution cancels from every identity built on these numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenData {
    pub theta: f64,
    /// Index `k` of the recessive solution `Phi_k` used.
    pub k: i64,
    /// `-conj(w(0)) w'(0)`.
    pub lhs: C64,
    /// `int_0^inf |w'(t e^{i theta})|^2 dt`.
    pub grad_sq: f64,
    /// `int_0^inf t^j |w(t e^{i theta})|^2 dt`, `j = 0..=m`.
    pub moments: Vec<f64>,
    pub coeffs: Vec<C64>,
}

impl GreenData {
    fn weighted(&self) -> C64 {
        // int W(t e^{i theta}) |w|^2 dt with W = sum_j a_{m-j} X^j, a_0 = 1.
        let m = self.coeffs.len();
        (0..=m)
            .map(|j| {
                let a = if j == m { C64::new(1.0, 0.0) } else { self.coeffs[m - 1 - j] };
                a * C64::from_polar(1.0, j as f64 * self.theta) * self.moments[j]
            })
            .sum()
    }

    pub fn rhs(&self) -> C64 {
        let dir = C64::from_polar(1.0, self.theta);
        dir.conj() * self.grad_sq + dir * self.weighted()
    }

    pub fn residual(&self) -> f64 {
        let dir = C64::from_polar(1.0, self.theta);
        let scale = self.lhs.norm() + self.grad_sq + (dir * self.weighted()).norm();
        (self.lhs - self.rhs()).norm() / scale
    }

    /// Contribution of everything except `lambda = a_m`:
    /// `e^{-i theta} grad + e^{i theta} int (W - lambda)|w|^2`.
    fn without_lambda(&self) -> C64 {
        let dir = C64::from_polar(1.0, self.theta);
        let lam = *self.coeffs.last().expect("m >= 1");
        self.rhs() - dir * lam * self.moments[0]
    }

    /// `lambda` solved from the full complex identity.
    pub fn lambda_from_identity(&self) -> C64 {
        let dir = C64::from_polar(1.0, self.theta);
        (self.lhs - self.without_lambda()) / (dir * self.moments[0])
    }

    /// Real `lambda` from the imaginary part of the identity alone.
    pub fn lambda_from_imag_part(&self) -> f64 {
        let s = self.theta.sin();
        (self.lhs.im - self.without_lambda().im) / (s * self.moments[0])
    }

    /// Real `lambda` from the real part of the identity alone.
    pub fn lambda_from_real_part(&self) -> f64 {
        let c = self.theta.cos();
        (self.lhs.re - self.without_lambda().re) / (c * self.moments[0])
    }
}

/// Integrates `Phi_k` (recessive along `theta`) with its Green moments.
pub fn green_data(p: &Potential, theta: f64, cfg: &RayConfig) -> Result<GreenData> {
    let m = p.degree();
    let step = 2.0 * PI / (m as f64 + 2.0);
    let k = (theta / step).round() as i64;
    let local = theta - k as f64 * step;
    if local.abs() >= PI / (m as f64 + 2.0) {
        return Err(Error::Config(format!(
            "theta = {theta} is not a recessive direction"
        )));
    }
    // Phi_k(X, a) = Phi_0(w^{-k} X, w_{-k}(a)); integrate the latter along `local`.
    let rotated = p.rotate(-k);
    let cfg_k = RayConfig {
        theta: local,
        ..*cfg
    };
    cfg_k.validate(m)?;
    let radius = cfg_k.matching_radius(&rotated);
    let mut seed = make_seed(&rotated, &cfg_k, radius)?;
    if cfg_k.seed == SeedOrder::Asymptotic {
        let mut r = radius;
        while seed.error_estimate > 0.1 * cfg.rel_tol {
            r *= 1.6;
            seed = make_seed(&rotated, &cfg_k, r)?;
        }
    }
    let (pair, mom) = integrate_ray_moments(&rotated, &seed, &cfg_k)?;
    let lhs = -pair.value.conj() * pair.deriv * omega_int(m, -k);
    Ok(GreenData {
        theta,
        k,
        lhs,
        grad_sq: mom.grad_sq,
        moments: mom.moments,
        coeffs: p.coeffs().to_vec(),
    })
}

/// Relative residual of the Green transform along `theta`.
pub fn green_residual(p: &Potential, theta: f64, cfg: &RayConfig) -> Result<f64> {
    Ok(green_data(p, theta, cfg)?.residual())
}
