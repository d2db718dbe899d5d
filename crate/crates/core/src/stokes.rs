//! Companion solutions, Wronskians and the Stokes multiplier.
//!
//! With `Phi_k(X, a) = Phi_0(w^{-k} X, w_{-k}(a))` the renormalized companions
//! `Phi_{+1} = w^{-m/2-r} Phi_0(w^{-1} X, w_{-1}(a))` and
//! `Phi_{-1} = w^{m/2+r} Phi_0(w X, w_1(a))`, `r = r_m(a)`, satisfy
//! `Phi_{-1} = C(a) Phi_0 + Phi_1`. All quantities are evaluated at `X = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{canonical_origin, RayConfig, ScaledPair};
use crate::par;
use crate::potential::{exponent_rm, omega_int, omega_pow, Potential};

type C64 = Complex64;

/// `mantissa * exp(log_scale)`; used where the plain value may not be representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub mantissa: C64,
    pub log_scale: C64,
}

impl ScaledValue {
    pub fn new(mantissa: C64, log_scale: C64) -> Self {
        ScaledValue { mantissa, log_scale }
    }

    pub fn value(&self) -> C64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale.re
    }

    /// Phase of the represented number.
    pub fn arg(&self) -> f64 {
        self.mantissa.arg() + self.log_scale.im
    }

    pub fn div(&self, other: &ScaledValue) -> ScaledValue {
        ScaledValue::new(self.mantissa / other.mantissa, self.log_scale - other.log_scale)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == C64::new(0.0, 0.0)
    }
}

/// `ln(w^z)` on the branch used by [`omega_pow`].
fn ln_omega(m: usize, z: C64) -> C64 {
    C64::i() * (2.0 * PI / (m as f64 + 2.0)) * z
}

/// Sign convention for the Wronskian. `Standard` is `f g' - f' g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WronskianConvention {
    #[default]
    Standard,
    Flipped,
}

pub fn wronskian(u: &ScaledPair, v: &ScaledPair) -> ScaledValue {
    wronskian_with(WronskianConvention::Standard, u, v)
}

pub fn wronskian_with(conv: WronskianConvention, u: &ScaledPair, v: &ScaledPair) -> ScaledValue {
    let w = u.value * v.deriv - u.deriv * v.value;
    let w = match conv {
        WronskianConvention::Standard => w,
        WronskianConvention::Flipped => -w,
    };
    ScaledValue::new(w, u.log_scale + v.log_scale)
}

/// `Phi_k(0)`, `Phi_k'(0)` for the unnormalized family, any integer `k`.
pub fn unnormalized_origin(p: &Potential, k: i64, cfg: &RayConfig) -> Result<ScaledPair> {
    let m = p.degree();
    let pair = canonical_origin(&p.rotate(-k), cfg)?;
    Ok(pair.with_deriv_factor(omega_int(m, -k)))
}

/// Renormalized companion `Phi_{+1}` or `Phi_{-1}` at the origin.
pub fn companion_origin(p: &Potential, k: i64, cfg: &RayConfig) -> Result<ScaledPair> {
    if k != 1 && k != -1 {
        return Err(Error::Config(format!("companion index must be +1 or -1, got {k}")));
    }
    let m = p.degree();
    let expo = m as f64 / 2.0 + exponent_rm(p);
    let pair = unnormalized_origin(p, k, cfg)?;
    Ok(pair.scaled(ln_omega(m, -(k as f64) * expo)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionData {
    /// Stokes multiplier `C(a)`.
    pub c: C64,
    /// `Wr(Phi_0, Phi_1)`.
    pub wr_01: C64,
    /// `Wr(Phi_{-1}, Phi_1)`.
    pub wr_m11: C64,
    /// `Wr(Phi_{-1}, Phi_0)`.
    pub wr_m10: C64,
    /// `|Wr(Phi_{-1}, Phi_0) / Wr(Phi_1, Phi_0) - 1|`; the `Phi_1` coefficient is exactly 1.
    pub unit_coeff_residual: f64,
    /// Net log-scale carried by the ratio defining `C`.
    pub scale_audit: C64,
    /// Size `C` would have without cancellation in `Wr(Phi_{-1}, Phi_1)`;
    /// `|c| / c_scale` is a scale-free measure of smallness.
    pub c_scale: f64,
}

/// The three origin values `(Phi_{-1}, Phi_0, Phi_1)`, renormalized.
pub fn origin_triple(p: &Potential, cfg: &RayConfig) -> Result<(ScaledPair, ScaledPair, ScaledPair)> {
    let (a, b, c) = par::join3(
        cfg.exec,
        || companion_origin(p, -1, cfg),
        || canonical_origin(p, cfg),
        || companion_origin(p, 1, cfg),
    );
    Ok((a?, b?, c?))
}

/// Largest unit-coefficient residual tolerated before the normalization is
/// declared inconsistent.
pub fn unit_coeff_tolerance(cfg: &RayConfig) -> f64 {
    (1e4 * cfg.rel_tol).max(1e-6)
}

pub fn connection_from_triple(
    conv: WronskianConvention,
    pm: &ScaledPair,
    p0: &ScaledPair,
    p1: &ScaledPair,
) -> Result<ConnectionData> {
    let w01 = wronskian_with(conv, p0, p1);
    let wm11 = wronskian_with(conv, pm, p1);
    let wm10 = wronskian_with(conv, pm, p0);
    let w10 = wronskian_with(conv, p1, p0);
    if w01.is_zero() || w10.is_zero() {
        return Err(Error::Degenerate("Wr(Phi_0, Phi_1) vanished".into()));
    }
    let ratio = wm11.div(&w01);
    let unit = wm10.div(&w10).value() - 1.0;
    let bound = ScaledValue::new(
        C64::new((pm.value.norm() + pm.deriv.norm()) * (p1.value.norm() + p1.deriv.norm()), 0.0),
        pm.log_scale + p1.log_scale,
    );
    Ok(ConnectionData {
        c: ratio.value(),
        wr_01: w01.value(),
        wr_m11: wm11.value(),
        wr_m10: wm10.value(),
        unit_coeff_residual: unit.norm(),
        scale_audit: ratio.log_scale,
        c_scale: bound.div(&w01).value().norm(),
    })
}

/// `C(a) = Wr(Phi_{-1}, Phi_1) / Wr(Phi_0, Phi_1)`.
pub fn stokes_c(p: &Potential, cfg: &RayConfig) -> Result<ConnectionData> {
    let (pm, p0, p1) = origin_triple(p, cfg)?;
    let data = connection_from_triple(WronskianConvention::Standard, &pm, &p0, &p1)?;
    // Wr(Phi_{-1}, Phi_0) is a cancellation of terms of size ~|C|.
    let tol = unit_coeff_tolerance(cfg) * (1.0 + data.c.norm());
    if !(data.unit_coeff_residual <= tol) {
        return Err(Error::Normalization {
            residual: data.unit_coeff_residual,
            tol,
        });
    }
    Ok(data)
}

/// Relative size of `f_0` below which the value path is refused.
const F0_FLOOR: f64 = 1e-8;

/// `C` from the origin values alone:
/// `[w^{m/2+r} f_0(w_1(a)) - w^{-m/2-r} f_0(w_{-1}(a))] / f_0(a)`.
pub fn stokes_c_from_f0(p: &Potential, cfg: &RayConfig) -> Result<C64> {
    let m = p.degree();
    let expo = m as f64 / 2.0 + exponent_rm(p);
    let (up, down, here) = par::join3(
        cfg.exec,
        || canonical_origin(&p.rotate(1), cfg),
        || canonical_origin(&p.rotate(-1), cfg),
        || canonical_origin(p, cfg),
    );
    let (up, down, here) = (up?, down?, here?);
    let lhs = ScaledValue::new(up.value, up.log_scale + ln_omega(m, expo));
    let rhs = ScaledValue::new(down.value, down.log_scale + ln_omega(m, -expo));
    let f0 = ScaledValue::new(here.value, here.log_scale);
    let ln_ref = lhs.ln_abs().max(rhs.ln_abs());
    if f0.is_zero() || f0.ln_abs() - ln_ref < F0_FLOOR.ln() {
        return Err(Error::NearZeroF0 {
            at: p.lambda(),
            value: f0.value().norm(),
        });
    }
    Ok(lhs.div(&f0).value() - rhs.div(&f0).value())
}

/// `C_0(a) = w^{-m/2-r_m(a)} C(a)`.
fn c0_from(p: &Potential, c: C64) -> C64 {
    let m = p.degree();
    omega_pow(m, -(m as f64 / 2.0) - exponent_rm(p)) * c
}

/// `C_0(w_k(a))`.
///
/// Note that the multiplier defined by Wronskians of `Phi_{k-1}, Phi_k, Phi_{k+1}`
/// (see [`stokes_ck_direct`]) equals `C_0(w_{-k}(a))`, i.e. `stokes_ck(p, -k)`:
/// the substitution `Y = w^{-k} X` maps `Phi_{k+j}(X, a)` to `Phi_j(Y, w_{-k}(a))`.
pub fn stokes_ck(p: &Potential, k: i64, cfg: &RayConfig) -> Result<C64> {
    let q = p.rotate(k);
    let c = stokes_c(&q, cfg)?.c;
    Ok(c0_from(&q, c))
}

/// `C_k` straight from its definition `Wr(Phi_{k-1}, Phi_{k+1}) / Wr(Phi_k, Phi_{k+1})`
/// on the unnormalized family.
pub fn stokes_ck_direct(p: &Potential, k: i64, cfg: &RayConfig) -> Result<C64> {
    let (a, b, c) = par::join3(
        cfg.exec,
        || unnormalized_origin(p, k - 1, cfg),
        || unnormalized_origin(p, k, cfg),
        || unnormalized_origin(p, k + 1, cfg),
    );
    let (a, b, c) = (a?, b?, c?);
    Ok(wronskian(&a, &c).div(&wronskian(&b, &c)).value())
}

/// `Ctilde_k(a) = w^{-m-2 r_m(w_{-k}(a))}`, closed form.
pub fn c_tilde(p: &Potential, k: i64) -> C64 {
    let m = p.degree();
    omega_pow(m, -(m as f64) - 2.0 * exponent_rm(&p.rotate(-k)))
}

/// `Ctilde_k` from its Wronskian definition `Wr(Phi_{k-1}, Phi_k) / Wr(Phi_{k+1}, Phi_k)`.
pub fn c_tilde_direct(p: &Potential, k: i64, cfg: &RayConfig) -> Result<C64> {
    let (a, b, c) = par::join3(
        cfg.exec,
        || unnormalized_origin(p, k - 1, cfg),
        || unnormalized_origin(p, k, cfg),
        || unnormalized_origin(p, k + 1, cfg),
    );
    let (a, b, c) = (a?, b?, c?);
    Ok(wronskian(&a, &b).div(&wronskian(&c, &b)).value())
}

/// Closed form `2 (-1)^k w^{km/2 - r_m(w_{-k-1}(a))}` of `Wr(Phi_k, Phi_{k+1})`.
pub fn wronskian_lemma(p: &Potential, k: i64) -> C64 {
    let m = p.degree();
    let sign = if k.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
    let e = (k * m as i64) as f64 / 2.0 - exponent_rm(&p.rotate(-k - 1));
    sign * omega_pow(m, e)
}

/// Numerical `Wr(Phi_k, Phi_{k+1})` of the unnormalized family.
pub fn wronskian_consecutive(
    p: &Potential,
    k: i64,
    conv: WronskianConvention,
    cfg: &RayConfig,
) -> Result<C64> {
    let a = unnormalized_origin(p, k, cfg)?;
    let b = unnormalized_origin(p, k + 1, cfg)?;
    Ok(wronskian_with(conv, &a, &b).value())
}

/// `C(a, lambda)` for a fixed head `a_1..a_{m-1}`.
pub fn c_of_lambda(head: &[C64], lambda: C64, cfg: &RayConfig) -> Result<C64> {
    Ok(stokes_c(&Potential::with_lambda(head, lambda)?, cfg)?.c)
}

/// `g_a(lambda) = w^{m/2+r_m(a)} f_0(w_1(a), w^m lambda)` with its scale.
pub fn g_a(head: &[C64], lambda: C64, cfg: &RayConfig) -> Result<ScaledValue> {
    let p = Potential::with_lambda(head, lambda)?;
    let m = p.degree();
    let expo = m as f64 / 2.0 + exponent_rm(&p);
    let o = canonical_origin(&p.rotate(1), cfg)?;
    Ok(ScaledValue::new(o.value, o.log_scale + ln_omega(m, expo)))
}
