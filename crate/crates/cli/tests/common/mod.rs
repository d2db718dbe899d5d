//! Independent eigenvalue oracle: `-y'' + i x^3 y = E y` on the real line,
//! diagonalized in a truncated harmonic-oscillator basis.
//!
//! In the basis `h_n` of `-d^2/dx^2 + x^2/s^4` the position operator is
//! `x = s (a + a^+) / sqrt 2`. Conjugating by `diag(i^n)` turns the complex
//! symmetric matrix of `p^2 + i x^3` into a real one with the same spectrum.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Position matrix on the first `n` basis states.
fn position(n: usize, s: f64) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let v = s * ((k + 1) as f64 / 2.0).sqrt();
        x[(k, k + 1)] = v;
        x[(k + 1, k)] = v;
    }
    x
}

/// `p^2` on the first `n` states: `-(a^+ - a)^2 / (2 s^2)`.
fn momentum_sq(n: usize, s: f64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for k in 0..n {
        p[(k, k)] = (2 * k + 1) as f64 / (2.0 * s * s);
        if k + 2 < n {
            let v = -(((k + 1) * (k + 2)) as f64).sqrt() / (2.0 * s * s);
            p[(k, k + 2)] = v;
            p[(k + 2, k)] = v;
        }
    }
    p
}

/// Smallest `count` eigenvalues (by modulus) of `p^2 + i x^3` in an
/// `n`-state basis with length scale `s`. Truncation artifacts sit far out
/// in the complex plane and sort last.
pub fn pt_cubic_levels(n: usize, s: f64, count: usize) -> Vec<(f64, f64)> {
    // x^3 from a larger basis so the kept block is exact
    let big = n + 3;
    let x = position(big, s);
    let x3 = &x * &x * &x;
    let p2 = momentum_sq(n, s);
    let phase = |k: usize| -> i32 { (k % 4) as i32 };
    let mut h = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            // element of D^{-1} (p^2 + i x^3) D with D = diag(i^k): factor i^{c-r}
            let d = (phase(c) - phase(r)).rem_euclid(4);
            let v = match d {
                0 => p2[(r, c)],
                2 => -p2[(r, c)],
                // i * i = -1, i * (-i) = 1
                1 => -x3[(r, c)],
                3 => x3[(r, c)],
                _ => unreachable!(),
            };
            h[(r, c)] = v;
        }
    }
    let mut ev: Vec<(f64, f64)> = h.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    ev.sort_by(|a, b| a.0.hypot(a.1).total_cmp(&b.0.hypot(b.1)));
    ev.truncate(count);
    ev
}

/// Exact levels of `-y'' + x^2 y`: `2n + 1`.
pub fn harmonic_levels(count: usize) -> Vec<f64> {
    (0..count).map(|n| (2 * n + 1) as f64).collect()
}

/// `-iC(0)` for `a = 0` from the connection relation at `lambda = 0`:
/// `2 sin(pi m / (2 (m + 2)))`.
pub fn c_at_origin(m: usize) -> f64 {
    2.0 * (std::f64::consts::PI * m as f64 / (2.0 * (m + 2) as f64)).sin()
}
