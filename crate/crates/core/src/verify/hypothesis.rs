//! Sign hypothesis on the real coefficients `a_1..a_{m-1}`:
//! some `1 <= j <= m/2` has `(j - k) a_k >= 0` for every `k`, and for
//! `m = 4, j = 2` additionally `a_2 <= 0`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Hypothesis {
    /// `j` is the largest admissible index; `admissible` lists all of them.
    Accepted { j: usize, admissible: Vec<usize> },
    /// For each candidate `j`, the first `k` that breaks it (`k = 0` marks the
    /// supplementary `a_2 <= 0` condition).
    Rejected { violations: Vec<(usize, usize)> },
}

impl Hypothesis {
    pub fn holds(&self) -> bool {
        matches!(self, Hypothesis::Accepted { .. })
    }
}

fn first_violation(head: &[f64], j: usize) -> Option<usize> {
    let m = head.len() + 1;
    for (i, &a) in head.iter().enumerate() {
        let k = i + 1;
        if (j as f64 - k as f64) * a < 0.0 {
            return Some(k);
        }
    }
    if m == 4 && j == 2 && head[1] > 0.0 {
        return Some(0);
    }
    None
}

/// Checks the hypothesis for `head = (a_1, ..., a_{m-1})`.
pub fn check_hypothesis(head: &[f64]) -> Hypothesis {
    let m = head.len() + 1;
    let mut admissible = Vec::new();
    let mut violations = Vec::new();
    for j in 1..=m / 2 {
        match first_violation(head, j) {
            None => admissible.push(j),
            Some(k) => violations.push((j, k)),
        }
    }
    match admissible.last() {
        Some(&j) => Hypothesis::Accepted { j, admissible },
        None => Hypothesis::Rejected { violations },
    }
}
