//! Algebra on the monic potential `W(X) = X^m + a_1 X^{m-1} + ... + a_m`.
//!
//! Covers the large-`X` expansion of `sqrt(W)`, the principal action `S(X,a)`
//! (positive powers of the primitive of `sqrt(W)` only), the exponent `r_m(a)`
//! of the canonical asymptotics and the coefficient rotation
//! `a -> (w^k a_1, w^{2k} a_2, ..., w^{km} a_m)` with `w = exp(2 pi i/(m+2))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// `w^z = exp(2 pi i z / (m+2))` for complex `z`, the branch fixed by `log w = 2 pi i/(m+2)`.
pub fn omega_pow(m: usize, z: C64) -> C64 {
    (C64::i() * (2.0 * PI / (m as f64 + 2.0)) * z).exp()
}

/// `w^k` for integer `k`, reduced modulo `m+2` first so large `|k|` stays exact.
pub fn omega_int(m: usize, k: i64) -> C64 {
    let n = m as i64 + 2;
    let r = k.rem_euclid(n);
    C64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)
}

/// Monic polynomial potential. `coeffs[k-1]` is `a_k`; the last one doubles as
/// the spectral parameter `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub struct Potential {
    m: usize,
    coeffs: Vec<C64>,
    real: bool,
}

#[derive(Serialize, Deserialize)]
struct PotentialRepr {
    coeffs: Vec<C64>,
}

impl TryFrom<PotentialRepr> for Potential {
    type Error = Error;
    fn try_from(r: PotentialRepr) -> Result<Self> {
        Potential::new(r.coeffs)
    }
}

impl From<Potential> for PotentialRepr {
    fn from(p: Potential) -> Self {
        PotentialRepr { coeffs: p.coeffs }
    }
}

impl Potential {
    /// Degree is the number of coefficients.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Degenerate("a potential needs degree m >= 1".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Degenerate("non-finite coefficient".into()));
        }
        let real = coeffs.iter().all(|c| c.im == 0.0);
        Ok(Potential {
            m: coeffs.len(),
            coeffs,
            real,
        })
    }

    pub fn real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// `(a_1, ..., a_{m-1})` followed by `lambda`.
    pub fn with_lambda(head: &[C64], lambda: C64) -> Result<Self> {
        let mut coeffs = head.to_vec();
        coeffs.push(lambda);
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `a_1 .. a_{m-1}`.
    pub fn head(&self) -> &[C64] {
        &self.coeffs[..self.m - 1]
    }

    pub fn lambda(&self) -> C64 {
        self.coeffs[self.m - 1]
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_lambda(&self, lambda: C64) -> Potential {
        let mut coeffs = self.coeffs.clone();
        coeffs[self.m - 1] = lambda;
        Potential::new(coeffs).expect("finite lambda")
    }

    pub fn conj(&self) -> Potential {
        Potential::new(self.coeffs.iter().map(|c| c.conj()).collect()).expect("same coefficients")
    }

    pub fn omega(&self) -> C64 {
        omega_int(self.m, 1)
    }

    /// Horner evaluation of `W(x)`.
    pub fn eval_w(&self, x: C64) -> C64 {
        self.coeffs.iter().fold(C64::new(1.0, 0.0), |acc, &a| acc * x + a)
    }

    /// `(W(x), W'(x))` in one Horner pass.
    pub fn eval_w_dw(&self, x: C64) -> (C64, C64) {
        let mut w = C64::new(1.0, 0.0);
        let mut dw = C64::new(0.0, 0.0);
        for &a in &self.coeffs {
            dw = dw * x + w;
            w = w * x + a;
        }
        (w, dw)
    }

    /// `max_k |a_k|^{1/k}`; every root of `W` lies within twice this radius.
    pub fn coefficient_radius(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm().powf(1.0 / (i as f64 + 1.0)))
            .fold(0.0, f64::max)
    }

    /// `(w^k a_1, w^{2k} a_2, ..., w^{km} a_m)`.
    pub fn rotate(&self, k: i64) -> Potential {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if a == C64::new(0.0, 0.0) {
                    a
                } else {
                    omega_int(self.m, k * (i as i64 + 1)) * a
                }
            })
            .collect();
        Potential::new(coeffs).expect("rotation keeps coefficients finite")
    }

    /// First `k` coefficients `b_1..b_k` of `(1 + a_1 u + ... + a_m u^m)^{1/2}`.
    pub fn sqrt_series(&self, k: usize) -> Vec<C64> {
        let mut b: Vec<C64> = Vec::with_capacity(k + 1);
        b.push(C64::new(1.0, 0.0));
        for n in 1..=k {
            let a_n = self.coeffs.get(n - 1).copied().unwrap_or_default();
            let conv: C64 = (1..n).map(|i| b[i] * b[n - i]).sum();
            b.push((a_n - conv) * 0.5);
        }
        b.remove(0);
        b
    }

    pub fn frame(&self) -> AsymptoticFrame {
        AsymptoticFrame::new(self, self.m + 4)
    }
}

/// One term `coeff * X^{half_exp/2}` of the principal action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionTerm {
    /// Exponent in halves; always positive.
    pub half_exp: u32,
    pub coeff: C64,
}

impl ActionTerm {
    pub fn exponent(&self) -> f64 {
        self.half_exp as f64 / 2.0
    }
}

/// Large-`X` data of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFrame {
    pub m: usize,
    pub b: Vec<C64>,
    pub s_terms: Vec<ActionTerm>,
    /// `b_{1+m/2}` for even `m`, zero for odd `m`.
    pub log_coeff: C64,
    pub r_m: C64,
    pub omega: C64,
}

impl AsymptoticFrame {
    pub fn new(p: &Potential, k: usize) -> Self {
        let m = p.degree();
        let need = m / 2 + 1;
        let b = p.sqrt_series(k.max(need));
        // sqrt(W) = X^{m/2} (1 + sum b_k X^{-k}); the primitive of b_k X^{m/2-k}
        // has exponent (m + 2 - 2k)/2. Keep the strictly positive ones.
        let mut s_terms = vec![ActionTerm {
            half_exp: (m + 2) as u32,
            coeff: C64::new(2.0 / (m as f64 + 2.0), 0.0),
        }];
        for (i, &bk) in b.iter().enumerate() {
            let kk = i + 1;
            if 2 * kk >= m + 2 {
                break;
            }
            let half_exp = (m + 2 - 2 * kk) as u32;
            s_terms.push(ActionTerm {
                half_exp,
                coeff: bk * (2.0 / half_exp as f64),
            });
        }
        let log_coeff = if m % 2 == 0 { b[m / 2] } else { C64::new(0.0, 0.0) };
        let r_m = C64::new(-(m as f64) / 4.0, 0.0) - log_coeff;
        AsymptoticFrame {
            m,
            b,
            s_terms,
            log_coeff,
            r_m,
            omega: omega_int(m, 1),
        }
    }

    /// `S(x,a)`, principal branch (continuous along any ray with `|arg x| < pi`).
    pub fn principal_action(&self, x: C64) -> Result<C64> {
        if x == C64::new(0.0, 0.0) {
            return Err(Error::Degenerate("principal action at x = 0".into()));
        }
        let lx = x.ln();
        Ok(self
            .s_terms
            .iter()
            .map(|t| t.coeff * (lx * t.exponent()).exp())
            .sum())
    }

    /// Derivative of `S` in `x`; the part of `sqrt(W)` that `S` accounts for.
    pub fn principal_integrand(&self, x: C64) -> C64 {
        let lx = x.ln();
        self.s_terms
            .iter()
            .map(|t| t.coeff * t.exponent() * (lx * (t.exponent() - 1.0)).exp())
            .sum()
    }

    pub fn exponent_rm(&self) -> C64 {
        self.r_m
    }
}

pub fn exponent_rm(p: &Potential) -> C64 {
    p.frame().r_m
}
