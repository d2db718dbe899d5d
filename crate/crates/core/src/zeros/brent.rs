//! Safeguarded bracketing root finder and a golden-section maximizer, both
//! driven by fallible evaluations.

use crate::error::Result;

pub struct Root {
    pub x: f64,
    pub fx: f64,
    /// `|f(b) - f(a)| / |b - a|` over the final bracket.
    pub slope: f64,
}

/// Brent's method on `[a, b]` with `fa`, `fb` of opposite sign.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(fa * fb <= 0.0);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, slope: ((fb - fa) / (b - a)).abs() });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, slope: ((fb - fa) / (b - a)).abs() });
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            let slope = ((fc - fb) / (c - b)).abs();
            return Ok(Root { x: b, fx: fb, slope });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    let slope = ((fc - fb) / (c - b)).abs();
    Ok(Root { x: b, fx: fb, slope })
}

/// Maximizer of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_root() {
        let r = brent(|x| Ok(x.cos()), 1.0, 2.0, 1f64.cos(), 2f64.cos(), 1e-14).unwrap();
        assert!((r.x - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!((r.slope - 1.0).abs() < 1e-3);
    }

    #[test]
    fn handles_flat_multiple_root_side() {
        let f = |x: f64| Ok((x - 0.3).powi(3));
        let r = brent(f, 0.0, 1.0, f(0.0).unwrap(), f(1.0).unwrap(), 1e-12).unwrap();
        assert!((r.x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn golden_section_peak() {
        let (x, v) = golden_max(|x| Ok(-(x - 0.7f64).powi(2) + 2.0), 0.0, 3.0, 1e-10).unwrap();
        assert!((x - 0.7).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
