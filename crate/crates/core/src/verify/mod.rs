//! Numerical checks of the identities and propositions, collected into a report.
//!
//! Every check turns its cases into [`Entry`] rows. A case that fails to
//! compute is recorded with a `NaN` residual and the error text; it never
//! aborts the suite.

mod checks;
mod hypothesis;
mod sample;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::integrator::RayConfig;
use crate::par;
use crate::stokes::WronskianConvention;

pub use checks::{
    check_dual_path, check_f0_zeros, check_functional_relation, check_green, check_hadamard, check_hypothesis_cases,
    check_logderiv_sign, check_order_growth, check_r_robustness, check_simple_zeros, check_symmetry,
    check_unit_coefficient, check_wronskian_lemma, log_derivative, order_slope, zeros_of_g,
};
pub use hypothesis::{check_hypothesis, Hypothesis};
pub use sample::{complex_box, hypothesis_head, real_box, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub symmetry: f64,
    pub functional: f64,
    pub lemma: f64,
    pub unit: f64,
    pub dual: f64,
    pub robust: f64,
    /// Allowed distance of the fitted growth slope from `1/2 + 1/m`.
    pub order: f64,
    pub green: f64,
    /// Eigenvalue recovered from a Green identity vs the located zero.
    pub green_zero: f64,
    /// `Im(g'/g)/|g'/g|` must stay below `-logderiv_margin`.
    pub logderiv_margin: f64,
    /// Bound on error(large order) / error(small order) of the truncated product.
    pub hadamard_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            symmetry: 1e-8,
            functional: 1e-6,
            lemma: 1e-6,
            unit: 1e-6,
            dual: 1e-6,
            robust: 1e-8,
            order: 0.05,
            green: 1e-6,
            green_zero: 1e-5,
            logderiv_margin: 1e-12,
            hadamard_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub ray: RayConfig,
    pub thresholds: Thresholds,
    /// Multiplies every threshold.
    pub threshold_scale: f64,
    pub degrees: Vec<usize>,
    /// Random cases per degree for each identity check.
    pub cases_per_degree: usize,
    /// Random sign-hypothesis heads for the zero certification check.
    pub simple_cases: usize,
    pub simple_window: (f64, f64),
    pub order_radii: Vec<f64>,
    /// Integration tolerance for the growth and product checks, which only
    /// need `ln|f_0|` and zero locations to a few digits.
    pub coarse_rel_tol: f64,
    pub order_angles: usize,
    pub logderiv_samples: usize,
    pub logderiv_window: (f64, f64),
    /// Truncation orders compared by the product check.
    pub hadamard_orders: (usize, usize),
    /// Sign convention used by the lemma check; flipping it is a fault injection.
    pub convention: WronskianConvention,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            ray: RayConfig::default(),
            thresholds: Thresholds::default(),
            threshold_scale: 1.0,
            degrees: vec![3, 4, 5],
            cases_per_degree: 12,
            simple_cases: 50,
            simple_window: (-2.0, 12.0),
            order_radii: vec![250.0, 500.0, 1000.0, 2000.0],
            coarse_rel_tol: 1e-8,
            order_angles: 16,
            logderiv_samples: 20,
            logderiv_window: (-10.0, 10.0),
            hadamard_orders: (8, 64),
            convention: WronskianConvention::Standard,
        }
    }
}

impl SuiteConfig {
    pub fn coarse_ray(&self) -> RayConfig {
        RayConfig {
            rel_tol: self.coarse_rel_tol,
            abs_tol: self.coarse_rel_tol * 1e-2,
            ..self.ray
        }
    }

    pub fn threshold(&self, t: f64) -> f64 {
        t * self.threshold_scale
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let h = Sha256::digest(json.as_bytes());
        h.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Symmetry,
    FunctionalRelation,
    WronskianLemma,
    UnitCoefficient,
    DualPath,
    RRobustness,
    OrderGrowth,
    LogderivSign,
    Hypothesis,
    Green,
    Hadamard,
    F0Zeros,
    SimpleZeros,
}

impl CheckKind {
    pub const ALL: [CheckKind; 13] = [
        CheckKind::Symmetry,
        CheckKind::FunctionalRelation,
        CheckKind::WronskianLemma,
        CheckKind::UnitCoefficient,
        CheckKind::DualPath,
        CheckKind::RRobustness,
        CheckKind::OrderGrowth,
        CheckKind::LogderivSign,
        CheckKind::Hypothesis,
        CheckKind::Green,
        CheckKind::Hadamard,
        CheckKind::F0Zeros,
        CheckKind::SimpleZeros,
    ];

    /// The randomized identity checks.
    pub const IDENTITIES: [CheckKind; 6] = [
        CheckKind::Symmetry,
        CheckKind::FunctionalRelation,
        CheckKind::WronskianLemma,
        CheckKind::UnitCoefficient,
        CheckKind::DualPath,
        CheckKind::RRobustness,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Symmetry => "symmetry",
            CheckKind::FunctionalRelation => "functional_relation",
            CheckKind::WronskianLemma => "wronskian_lemma",
            CheckKind::UnitCoefficient => "unit_coefficient",
            CheckKind::DualPath => "dual_path",
            CheckKind::RRobustness => "r_robustness",
            CheckKind::OrderGrowth => "order_growth",
            CheckKind::LogderivSign => "logderiv_sign",
            CheckKind::Hypothesis => "hypothesis",
            CheckKind::Green => "green",
            CheckKind::Hadamard => "hadamard",
            CheckKind::F0Zeros => "f0_zeros",
            CheckKind::SimpleZeros => "simple_zeros",
        }
    }

    pub fn from_name(s: &str) -> Option<CheckKind> {
        CheckKind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub params: serde_json::Value,
    /// `NaN` (serialized as `null`) when the case could not be computed.
    pub residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Entry {
    /// Passes iff `residual <= threshold`; `NaN` fails.
    pub fn new(name: &str, params: serde_json::Value, residual: f64, threshold: f64) -> Self {
        let verdict = if residual <= threshold { Verdict::Pass } else { Verdict::Fail };
        Entry {
            name: name.to_string(),
            params,
            residual,
            threshold,
            verdict,
            note: None,
        }
    }

    pub fn failed(name: &str, params: serde_json::Value, threshold: f64, err: impl std::fmt::Display) -> Self {
        Entry {
            note: Some(err.to_string()),
            ..Entry::new(name, params, f64::NAN, threshold)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub entries: Vec<Entry>,
    pub seed: u64,
    pub config_digest: String,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(Entry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn count(&self, name: &str) -> usize {
        self.entries.iter().filter(|e| e.name == name).count()
    }
}

pub fn run_check(kind: CheckKind, seed: u64, cfg: &SuiteConfig) -> Vec<Entry> {
    match kind {
        CheckKind::Symmetry => check_symmetry(seed, cfg),
        CheckKind::FunctionalRelation => check_functional_relation(seed, cfg),
        CheckKind::WronskianLemma => check_wronskian_lemma(seed, cfg),
        CheckKind::UnitCoefficient => check_unit_coefficient(seed, cfg),
        CheckKind::DualPath => check_dual_path(seed, cfg),
        CheckKind::RRobustness => check_r_robustness(seed, cfg),
        CheckKind::OrderGrowth => check_order_growth(cfg),
        CheckKind::LogderivSign => check_logderiv_sign(seed, cfg),
        CheckKind::Hypothesis => check_hypothesis_cases(seed, cfg),
        CheckKind::Green => check_green(seed, cfg),
        CheckKind::Hadamard => check_hadamard(cfg),
        CheckKind::F0Zeros => check_f0_zeros(cfg),
        CheckKind::SimpleZeros => check_simple_zeros(seed, cfg),
    }
}

/// Runs the selected checks (all of them for an empty selection) and
/// assembles the report ordered by check name.
pub fn run_suite(seed: u64, selection: &[CheckKind], cfg: &SuiteConfig) -> VerificationReport {
    let mut kinds: Vec<CheckKind> = if selection.is_empty() {
        CheckKind::ALL.to_vec()
    } else {
        selection.to_vec()
    };
    kinds.sort_by_key(|k| k.name());
    kinds.dedup();
    let mut entries: Vec<Entry> = par::map(cfg.ray.exec, &kinds, |&k| run_check(k, seed, cfg))
        .into_iter()
        .flatten()
        .collect();
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    VerificationReport {
        entries,
        seed,
        config_digest: cfg.digest(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in CheckKind::ALL {
            assert_eq!(CheckKind::from_name(k.name()), Some(k));
        }
        assert_eq!(CheckKind::from_name("nope"), None);
    }

    #[test]
    fn verdict_rule() {
        let p = serde_json::json!({});
        assert!(Entry::new("x", p.clone(), 1e-9, 1e-8).passed());
        assert!(!Entry::new("x", p.clone(), 1e-7, 1e-8).passed());
        assert!(!Entry::new("x", p.clone(), f64::NAN, 1e-8).passed());
        assert!(!Entry::failed("x", p, 1.0, "boom").passed());
    }

    #[test]
    fn digest_tracks_config() {
        let a = SuiteConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.threshold_scale = 2.0;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
