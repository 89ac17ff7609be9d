//! Bound verification over finished sweeps.

use anyhow::Result;
use kovalenko::harness::{self, BoundVerdict, FamilyKind, MsoResult, SweepReport};
use kovalenko::rank_theory;
use serde::Serialize;

/// Minimum acquisitions implied by the full-rank overhead for one bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Acquisition {
    pub delta: f64,
    pub family: FamilyKind,
    pub gamma_k: f64,
    /// Fewest received symbols that can meet `delta`.
    pub min_received: f64,
    /// LDPC only: most erasures that can be tolerated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_erasures: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_k: Option<f64>,
    pub statement: String,
}

#[derive(Debug, Serialize)]
pub struct SweepVerdict {
    pub label: String,
    pub bound: BoundVerdict,
    pub mso: Vec<MsoResult>,
    pub acquisitions: Vec<Acquisition>,
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub sweeps: Vec<SweepVerdict>,
}

fn acquisition(first: &SweepReport, delta: f64) -> Result<Acquisition> {
    Ok(match first.family {
        FamilyKind::Ldpc => {
            let big_n = first.n_or_big_n;
            let checks = (first.unknowns() as f64 * (1.0 + first.gamma)).round() as usize;
            let r = rank_theory::ldpc_kfro(checks, big_n, delta)?;
            let rate = 1.0 - checks as f64 / big_n as f64;
            Acquisition {
                delta,
                family: first.family,
                gamma_k: r.gamma_k,
                min_received: r.min_received,
                max_erasures: Some(r.max_erasures),
                p_k: Some(r.p_k),
                statement: format!(
                    "LDPC N={big_n} R={rate}: delta={delta} needs at least {:.2} received symbols; \
                     at most {} erasures tolerable (p_K = {})",
                    r.min_received, r.max_erasures, r.p_k
                ),
            }
        }
        kind => {
            let n = first.n_or_big_n;
            let r = rank_theory::kfro(n, delta)?;
            Acquisition {
                delta,
                family: kind,
                gamma_k: r.gamma_k,
                min_received: r.lt_min_received() as f64,
                max_erasures: None,
                p_k: None,
                statement: format!(
                    "{kind:?} n={n}: delta={delta} needs at least {} received symbols (1 + gamma_K = {})",
                    r.lt_min_received(),
                    1.0 + r.gamma_k
                ),
            }
        }
    })
}

pub fn verify_sweep(label: &str, reports: &[SweepReport], deltas: &[f64]) -> Result<SweepVerdict> {
    let bound = harness::verify_lower_bound(reports);
    let mut mso = Vec::new();
    let mut acquisitions = Vec::new();
    if let Some(first) = reports.first() {
        for &d in deltas {
            mso.push(harness::empirical_mso(reports, d)?);
            acquisitions.push(acquisition(first, d)?);
        }
    }
    Ok(SweepVerdict {
        label: label.to_string(),
        bound,
        mso,
        acquisitions,
    })
}

impl Verdict {
    pub fn new(sweeps: Vec<SweepVerdict>) -> Self {
        let passed = sweeps
            .iter()
            .all(|s| s.bound.passed() && s.mso.iter().all(MsoResult::consistent));
        Self { passed, sweeps }
    }

    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        for s in &self.sweeps {
            lines.push(format!(
                "{}: {} points, {} bound violations",
                s.label,
                s.bound.checked,
                s.bound.violations.len()
            ));
            for v in &s.bound.violations {
                lines.push(format!(
                    "  violation at {}: kfrl {} > ci_high {}",
                    v.k_or_p, v.kfrl, v.ci_high
                ));
            }
            for m in &s.mso {
                let claim = match (m.resolvable, m.gamma_hat_star) {
                    (true, Some(g)) => format!("empirical MSO {g} vs gamma_K {}", m.gamma_k),
                    _ => format!("empirical MSO unresolved, gamma_K {}", m.gamma_k),
                };
                lines.push(format!("  delta={}: {claim}", m.delta));
            }
            for a in &s.acquisitions {
                lines.push(format!("  {}", a.statement));
            }
        }
        lines.push(
            if self.passed {
                "verdict: pass"
            } else {
                "verdict: FAIL"
            }
            .to_string(),
        );
        lines.join("\n")
    }
}
