//! Continuation of real zeros along a one-parameter coefficient family and
//! detection of pairs that coalesce into a double zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    box_count, classify_unchecked, complex_head, derivative_c, golden_max, minus_i_c, scan_real_zeros, winding_count_nudged,
    Contour, SearchWindow, Tangency, ZeroRecord,
};
use crate::error::{Error, Result};
use crate::integrator::RayConfig;
use crate::par;
use crate::potential::Potential;
use crate::stokes::stokes_c;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTerm {
    Const(f64),
    /// `k * alpha`.
    Alpha(f64),
}

/// Coefficient template `a(alpha) = (a_1(alpha), ..., a_{m-1}(alpha))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub terms: Vec<FamilyTerm>,
}

impl Family {
    pub fn new(terms: Vec<FamilyTerm>) -> Self {
        Family { terms }
    }

    /// `a = (0, -alpha)`.
    pub fn cubic() -> Self {
        Family::new(vec![FamilyTerm::Const(0.0), FamilyTerm::Alpha(-1.0)])
    }

    pub fn at(&self, alpha: f64) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| match *t {
                FamilyTerm::Const(c) => c,
                FamilyTerm::Alpha(k) => k * alpha,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub steps: usize,
    /// Fill derivative and multiplicity for every zero of every snapshot.
    pub classify: bool,
    /// Pairs closer than this are coalescence candidates even if not approaching.
    pub gap_threshold: f64,
    /// Width of the final bisection bracket in alpha.
    pub alpha_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            alpha_start: 2.0,
            alpha_end: -5.0,
            steps: 70,
            classify: false,
            gap_threshold: 1.0,
            alpha_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub alpha: f64,
    pub zeros: Vec<ZeroRecord>,
    pub tangencies: Vec<Tangency>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceEvent {
    pub alpha: f64,
    pub lambda: f64,
    pub c_abs: f64,
    /// `dC/dlambda` at the event.
    pub dc: C64,
    pub dc_abs: f64,
    /// Zeros inside a small disc around `lambda` at `alpha`.
    pub winding: i64,
    /// Box counts on both sides of the grid step where the pair vanished.
    pub box_counts: (i64, i64),
    /// The two zeros at the last grid point where both were real.
    pub pair: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub family: Family,
    pub snapshots: Vec<Snapshot>,
    /// `(alpha, lambda)` points of each nearest-neighbour track.
    pub tracks: Vec<Vec<(f64, f64)>>,
    pub events: Vec<CoalescenceEvent>,
    /// Ambiguous matches, window exits and events that could not be located.
    pub notes: Vec<String>,
}

struct Tracker {
    tracks: Vec<Vec<(f64, f64)>>,
    /// Index into `tracks` for each zero of the current snapshot.
    active: Vec<usize>,
}

impl Tracker {
    fn advance(&mut self, alpha: f64, zeros: &[f64], notes: &mut Vec<String>) -> Vec<usize> {
        let prev: Vec<(usize, f64)> = self
            .active
            .iter()
            .map(|&t| (t, self.tracks[t].last().expect("tracks are never empty").1))
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, &z) in zeros.iter().enumerate() {
            for (j, &(_, p)) in prev.iter().enumerate() {
                pairs.push(((z - p).abs(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut zero_track = vec![usize::MAX; zeros.len()];
        let mut used = vec![false; prev.len()];
        for &(d, i, j) in &pairs {
            if zero_track[i] != usize::MAX || used[j] {
                continue;
            }
            // a second track nearly as close makes the assignment ambiguous
            let rival = pairs
                .iter()
                .find(|q| q.1 == i && q.2 != j && !used[q.2])
                .map(|q| q.0);
            if let Some(r) = rival {
                if r < 1.1 * d && d > 0.0 {
                    notes.push(format!(
                        "ambiguous continuation at alpha = {alpha}: zero {} is {d:.3e} from one track and {r:.3e} from another",
                        zeros[i]
                    ));
                }
            }
            zero_track[i] = prev[j].0;
            used[j] = true;
        }
        for (i, &z) in zeros.iter().enumerate() {
            if zero_track[i] == usize::MAX {
                self.tracks.push(vec![(alpha, z)]);
                zero_track[i] = self.tracks.len() - 1;
            } else {
                self.tracks[zero_track[i]].push((alpha, z));
            }
        }
        let ended: Vec<usize> = prev.iter().zip(&used).filter(|(_, &u)| !u).map(|(p, _)| p.0).collect();
        self.active = zero_track;
        ended
    }
}

/// Sweeps `alpha` over `[alpha_start, alpha_end]` and tracks the real zeros in `w`.
pub fn sweep_family(family: &Family, opts: &SweepOptions, w: &SearchWindow, cfg: &RayConfig) -> Result<Sweep> {
    w.validate()?;
    if opts.steps == 0 {
        return Err(Error::Config("sweep needs at least one step".into()));
    }
    let alphas: Vec<f64> = (0..=opts.steps)
        .map(|i| opts.alpha_start + (opts.alpha_end - opts.alpha_start) * i as f64 / opts.steps as f64)
        .collect();
    let snapshots: Vec<Snapshot> = par::map(cfg.exec, &alphas, |&alpha| {
        let head = family.at(alpha);
        let scan = scan_real_zeros(&head, w, cfg)?;
        let zeros = if opts.classify {
            classify_unchecked(&scan.zeros, &complex_head(&head), cfg)?
        } else {
            scan.zeros
        };
        Ok(Snapshot {
            alpha,
            zeros,
            tangencies: scan.tangencies,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut notes = Vec::new();
    let mut tracker = Tracker {
        tracks: Vec::new(),
        active: Vec::new(),
    };
    let edge = 2.0 * (w.hi - w.lo) / w.grid as f64;
    let mut ended_at = Vec::with_capacity(snapshots.len());
    for s in &snapshots {
        let lams: Vec<f64> = s.zeros.iter().map(|z| z.lambda.re).collect();
        let ended = tracker.advance(s.alpha, &lams, &mut notes);
        for &t in &ended {
            let (_, l) = *tracker.tracks[t].last().expect("non-empty");
            if l - w.lo < edge || w.hi - l < edge {
                notes.push(format!(
                    "{} (track {t}, before alpha = {})",
                    Error::WindowExit { at: l },
                    s.alpha
                ));
            }
        }
        ended_at.push(ended);
    }

    let mut events = Vec::new();
    for i in 0..snapshots.len().saturating_sub(1) {
        let (a, b) = (&snapshots[i], &snapshots[i + 1]);
        if b.zeros.len() + 2 != a.zeros.len() {
            continue;
        }
        let lams: Vec<f64> = a.zeros.iter().map(|z| z.lambda.re).collect();
        let Some((k, gap)) = pick_pair(&lams, &tracker, &ended_at[i + 1]) else {
            continue;
        };
        let approaching = i > 0 && previous_gap(&snapshots[i - 1], lams[k], lams[k + 1]).is_some_and(|g| g > gap);
        if !(approaching || gap < opts.gap_threshold) {
            continue;
        }
        let before = box_count(&family.at(a.alpha), w, cfg)?.0;
        let after = box_count(&family.at(b.alpha), w, cfg)?.0;
        if before != after {
            notes.push(format!(
                "count drop between alpha = {} and {} with box counts {before} -> {after}: zeros left the box",
                a.alpha, b.alpha
            ));
            continue;
        }
        match locate(family, (lams[k], lams[k + 1]), a.alpha, b.alpha, opts, cfg) {
            Ok(Some(mut ev)) => {
                ev.box_counts = (before, after);
                events.push(ev);
            }
            Ok(None) => notes.push(format!(
                "pair ({}, {}) vanished between alpha = {} and {} but no sign flip of the hump was found",
                lams[k],
                lams[k + 1],
                a.alpha,
                b.alpha
            )),
            Err(e) => notes.push(format!("event near alpha = {} not located: {e}", a.alpha)),
        }
    }

    Ok(Sweep {
        family: family.clone(),
        snapshots,
        tracks: tracker.tracks,
        events,
        notes,
    })
}

/// The adjacent pair (index `k`, `k+1`) that vanished: both tracks ended, or
/// else the closest adjacent pair.
fn pick_pair(lams: &[f64], tracker: &Tracker, ended: &[usize]) -> Option<(usize, f64)> {
    if lams.len() < 2 {
        return None;
    }
    let ended_l: Vec<f64> = ended
        .iter()
        .map(|&t| {
            let pts = &tracker.tracks[t];
            pts.last().expect("non-empty").1
        })
        .collect();
    for k in 0..lams.len() - 1 {
        let hit = |x: f64| ended_l.iter().any(|&l| (l - x).abs() < 1e-12 * (1.0 + x.abs()));
        if hit(lams[k]) && hit(lams[k + 1]) {
            return Some((k, lams[k + 1] - lams[k]));
        }
    }
    (0..lams.len() - 1)
        .map(|k| (k, lams[k + 1] - lams[k]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn previous_gap(s: &Snapshot, l0: f64, l1: f64) -> Option<f64> {
    let near = |x: f64| {
        s.zeros
            .iter()
            .map(|z| z.lambda.re)
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
    };
    Some(near(l1)? - near(l0)?)
}

/// Bisects alpha on the sign of the hump of `-iC` between the pair.
fn locate(
    family: &Family,
    pair: (f64, f64),
    alpha_real: f64,
    alpha_gone: f64,
    opts: &SweepOptions,
    cfg: &RayConfig,
) -> Result<Option<CoalescenceEvent>> {
    let (l0, l1) = pair;
    let gap = l1 - l0;
    let raw = |alpha: f64, x: f64| -> Result<f64> {
        let (v, s) = minus_i_c(&family.at(alpha), x, cfg)?;
        Ok(v * s.exp())
    };
    let sigma = raw(alpha_real, 0.5 * (l0 + l1))?.signum();
    let (lo_l, hi_l) = (l0 - 0.25 * gap, l1 + 0.25 * gap);
    let hump = |alpha: f64| -> Result<(f64, f64)> {
        golden_max(|x| Ok(sigma * raw(alpha, x)?), lo_l, hi_l, 1e-7 * (1.0 + l1.abs()))
    };
    let mut hi = alpha_real;
    let mut lo = alpha_gone;
    let step = alpha_real - alpha_gone;
    let mut tries = 0;
    while hump(lo)?.1 > 0.0 {
        // the scan missed a still-real pair; keep going
        hi = lo;
        lo -= step;
        tries += 1;
        if tries > 10 {
            return Ok(None);
        }
    }
    if hump(hi)?.1 <= 0.0 {
        return Ok(None);
    }
    while (hi - lo).abs() > opts.alpha_tol {
        let mid = 0.5 * (lo + hi);
        if hump(mid)?.1 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let (lambda, _) = hump(alpha)?;
    let head = crate::zeros::complex_head(&family.at(alpha));
    let c = stokes_c(&Potential::with_lambda(&head, C64::new(lambda, 0.0))?, cfg)?.c;
    let dc = derivative_c(&head, C64::new(lambda, 0.0), cfg)?;
    let disc = Contour::Disc {
        center: C64::new(lambda, 0.0),
        radius: (0.3 * gap).min(0.1),
    };
    let (winding, _) = winding_count_nudged(&head, &disc, cfg)?;
    Ok(Some(CoalescenceEvent {
        alpha,
        lambda,
        c_abs: c.norm(),
        dc,
        dc_abs: dc.norm(),
        winding,
        box_counts: (0, 0),
        pair,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_template() {
        assert_eq!(Family::cubic().at(1.5), vec![0.0, -1.5]);
        let f = Family::new(vec![FamilyTerm::Alpha(2.0), FamilyTerm::Const(0.5)]);
        assert_eq!(f.at(-1.0), vec![-2.0, 0.5]);
    }

    #[test]
    fn tracker_follows_and_ends() {
        let mut t = Tracker {
            tracks: Vec::new(),
            active: Vec::new(),
        };
        let mut notes = Vec::new();
        t.advance(0.0, &[1.0, 3.0, 5.0], &mut notes);
        t.advance(0.1, &[1.1, 3.05, 5.2], &mut notes);
        let ended = t.advance(0.2, &[1.2], &mut notes);
        assert_eq!(ended.len(), 2);
        assert_eq!(t.tracks[0], vec![(0.0, 1.0), (0.1, 1.1), (0.2, 1.2)]);
        assert!(notes.is_empty());
    }

    #[test]
    fn constant_family_gives_constant_tracks() {
        let cfg = RayConfig::default();
        let fam = Family::new(vec![FamilyTerm::Const(0.0)]);
        let opts = SweepOptions {
            alpha_start: 0.0,
            alpha_end: 1.0,
            steps: 2,
            ..Default::default()
        };
        let s = sweep_family(&fam, &opts, &SearchWindow::new(0.0, 6.0).with_grid(32), &cfg).unwrap();
        assert_eq!(s.tracks.len(), 3);
        for tr in &s.tracks {
            assert_eq!(tr.len(), 3);
            assert!(tr.iter().all(|p| (p.1 - tr[0].1).abs() < 1e-12));
        }
        assert!(s.events.is_empty());
    }
}
