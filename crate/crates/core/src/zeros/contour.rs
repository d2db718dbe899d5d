//! Argument-principle counting along rectangles and circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::stokes::ScaledValue;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        Rect { re_lo, re_hi, im_lo, im_hi }
    }

    /// `[lo, hi] x [-h, h]`.
    pub fn around_segment(lo: f64, hi: f64, h: f64) -> Self {
        Rect::new(lo, hi, -h, h)
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re > self.re_lo && z.re < self.re_hi && z.im > self.im_lo && z.im < self.im_hi
    }

    fn grown(&self, d: f64) -> Self {
        Rect::new(self.re_lo - d, self.re_hi + d, self.im_lo - d, self.im_hi + d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Contour {
    Rect(Rect),
    Disc { center: C64, radius: f64 },
}

impl Contour {
    fn point(&self, s: f64) -> C64 {
        match *self {
            Contour::Disc { center, radius } => center + C64::from_polar(radius, 2.0 * PI * s),
            Contour::Rect(r) => {
                // counter-clockwise from the lower-left corner; each side is a quarter of s
                let corners = [
                    C64::new(r.re_lo, r.im_lo),
                    C64::new(r.re_hi, r.im_lo),
                    C64::new(r.re_hi, r.im_hi),
                    C64::new(r.re_lo, r.im_hi),
                ];
                let u = 4.0 * s.rem_euclid(1.0);
                let side = (u.floor() as usize).min(3);
                let f = u - side as f64;
                corners[side] + (corners[(side + 1) % 4] - corners[side]) * f
            }
        }
    }

    /// A zero at distance `d` from the contour turns the phase over a stretch
    /// of length ~`d`, so rectangles are sampled at a quarter of their smaller side.
    fn initial_samples(&self) -> usize {
        match self {
            Contour::Disc { .. } => 32,
            Contour::Rect(r) => {
                let (w, h) = (r.re_hi - r.re_lo, r.im_hi - r.im_lo);
                let per_short = 4.0;
                let n = 2.0 * per_short * (w / w.min(h) + h / w.min(h));
                (n.ceil() as usize).clamp(64, 20_000)
            }
        }
    }

    /// Slightly larger contour, used when the original one passes too close to a zero.
    pub fn nudged(&self, step: f64) -> Contour {
        match *self {
            Contour::Disc { center, radius } => Contour::Disc {
                center,
                radius: radius * (1.0 + step),
            },
            Contour::Rect(r) => {
                let scale = (r.re_hi - r.re_lo).min(r.im_hi - r.im_lo);
                Contour::Rect(r.grown(step * scale))
            }
        }
    }
}

const MAX_LEVELS: usize = 16;

fn wrap(d: f64) -> f64 {
    let mut d = d.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

/// Winding number of `f` along `contour`. Every phase increment between
/// neighbouring samples is kept below `pi/2` by bisecting the parameter.
pub fn winding_number<F>(f: &F, contour: &Contour, exec: Execution) -> Result<i64>
where
    F: Fn(C64) -> Result<ScaledValue> + Sync,
{
    let n = contour.initial_samples();
    let params: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let eval = |s: &f64| -> Result<(f64, f64)> {
        let z = contour.point(*s);
        let v = f(z)?;
        if v.is_zero() || !v.arg().is_finite() {
            return Err(Error::ContourPinched { at: z, value: 0.0 });
        }
        Ok((*s, v.arg()))
    };
    let mut pts: Vec<(f64, f64)> = par::map(exec, &params, eval).into_iter().collect::<Result<_>>()?;
    for level in 0..=MAX_LEVELS {
        let mut mids = Vec::new();
        for i in 0..pts.len() {
            let (s0, a0) = pts[i];
            let (s1, a1) = if i + 1 < pts.len() { pts[i + 1] } else { (1.0, pts[0].1) };
            if wrap(a1 - a0).abs() >= 0.5 * PI {
                mids.push(0.5 * (s0 + s1));
            }
        }
        if mids.is_empty() {
            let total: f64 = (0..pts.len())
                .map(|i| {
                    let next = if i + 1 < pts.len() { pts[i + 1].1 } else { pts[0].1 };
                    wrap(next - pts[i].1)
                })
                .sum();
            let w = total / (2.0 * PI);
            if (w - w.round()).abs() > 0.05 {
                return Err(Error::PhaseJump { sum: total });
            }
            return Ok(w.round() as i64);
        }
        if level == MAX_LEVELS {
            let z = contour.point(mids[0]);
            return Err(Error::ContourPinched { at: z, value: f64::NAN });
        }
        let new: Vec<(f64, f64)> = par::map(exec, &mids, eval).into_iter().collect::<Result<_>>()?;
        pts.extend(new);
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    unreachable!("loop returns on its last level")
}

/// Like [`winding_number`], growing the contour slightly if it is pinched.
/// Returns the count and the contour actually used.
pub fn winding_number_nudged<F>(f: &F, contour: &Contour, exec: Execution) -> Result<(i64, Contour)>
where
    F: Fn(C64) -> Result<ScaledValue> + Sync,
{
    let mut c = *contour;
    let mut last = None;
    for attempt in 0..5 {
        match winding_number(f, &c, exec) {
            Ok(w) => return Ok((w, c)),
            Err(e @ (Error::ContourPinched { .. } | Error::PhaseJump { .. })) => {
                last = Some(e);
                c = contour.nudged(1e-3 * 3f64.powi(attempt));
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(roots: Vec<C64>) -> impl Fn(C64) -> Result<ScaledValue> + Sync {
        move |z| {
            let v = roots.iter().fold(C64::new(1.0, 0.0), |acc, r| acc * (z - r));
            Ok(ScaledValue::new(v, C64::new(0.0, 0.0)))
        }
    }

    #[test]
    fn counts_polynomial_roots() {
        let f = poly(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.5), C64::new(2.0, 0.5), C64::new(-3.0, 0.0)]);
        let r = Contour::Rect(Rect::new(0.0, 3.0, -1.0, 1.0));
        assert_eq!(winding_number(&f, &r, Execution::Sequential).unwrap(), 3);
        let d = Contour::Disc { center: C64::new(2.0, 0.5), radius: 0.1 };
        assert_eq!(winding_number(&f, &d, Execution::Sequential).unwrap(), 2);
        let empty = Contour::Rect(Rect::new(4.0, 5.0, -1.0, 1.0));
        assert_eq!(winding_number(&f, &empty, Execution::Sequential).unwrap(), 0);
    }

    #[test]
    fn many_roots_along_a_segment() {
        let roots: Vec<C64> = (0..25).map(|k| C64::new(k as f64 + 0.5, 0.0)).collect();
        let f = poly(roots);
        let r = Contour::Rect(Rect::around_segment(0.0, 25.0, 0.3));
        assert_eq!(winding_number(&f, &r, Execution::Sequential).unwrap(), 25);
    }

    #[test]
    fn root_on_contour_is_nudged_away() {
        let f = poly(vec![C64::new(1.0, 0.0)]);
        let r = Contour::Rect(Rect::new(1.0, 2.0, -1.0, 1.0));
        assert!(winding_number(&f, &r, Execution::Sequential).is_err());
        let (w, used) = winding_number_nudged(&f, &r, Execution::Sequential).unwrap();
        assert_eq!(w, 1);
        assert_ne!(used, r);
    }
}
