//! Degree distributions for LT rows and LDPC columns.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error("degree table is empty")]
    EmptyTable,
    #[error("degree {degree} has non-positive or non-finite mass {mass}")]
    NonPositiveMass { degree: usize, mass: f64 },
    #[error("degree {degree} outside 1..={domain_max}")]
    DegreeOutOfRange { degree: usize, domain_max: usize },
    #[error("degenerate robust soliton parameters: {0}")]
    DegenerateParameters(String),
    #[error("reading degree table: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing degree table: {0}")]
    Parse(#[from] toml::de::Error),
}

/// A normalized probability table over degrees `1..=domain_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    entries: Vec<(usize, f64)>,
    cumulative: Vec<f64>,
    domain_max: usize,
}

impl DegreeDistribution {
    /// Normalizes `(degree, mass)` pairs. Repeated degrees have their masses added.
    pub fn from_table(pairs: &[(usize, f64)], domain_max: usize) -> Result<Self, DegreeError> {
        if pairs.is_empty() {
            return Err(DegreeError::EmptyTable);
        }
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for &(degree, mass) in pairs {
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(DegreeError::NonPositiveMass { degree, mass });
            }
            if degree == 0 || degree > domain_max {
                return Err(DegreeError::DegreeOutOfRange { degree, domain_max });
            }
            entries.push((degree, mass));
        }
        entries.sort_by_key(|&(d, _)| d);
        entries.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        let total: f64 = entries.iter().map(|&(_, w)| w).sum();
        for e in &mut entries {
            e.1 /= total;
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = entries
            .iter()
            .map(|&(_, w)| {
                acc += w;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self {
            entries,
            cumulative,
            domain_max,
        })
    }

    pub fn point_mass(degree: usize, domain_max: usize) -> Result<Self, DegreeError> {
        Self::from_table(&[(degree, 1.0)], domain_max)
    }

    /// `(degree, mass)` pairs, degrees strictly increasing.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn domain_max(&self) -> usize {
        self.domain_max
    }

    pub fn max_degree(&self) -> usize {
        self.entries.last().map_or(0, |&(d, _)| d)
    }

    pub fn mass(&self, degree: usize) -> f64 {
        self.entries
            .binary_search_by_key(&degree, |&(d, _)| d)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(d, w)| d as f64 * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.entries
            .iter()
            .map(|&(d, w)| w * (d as f64 - mean).powi(2))
            .sum()
    }

    /// Same masses on a wider (or narrower) degree domain.
    pub fn with_domain_max(&self, domain_max: usize) -> Result<Self, DegreeError> {
        Self::from_table(&self.entries, domain_max)
    }

    /// Adds `dense_mass` at `dense_degree` (summing with any existing mass
    /// there) and renormalizes.
    pub fn supplement_dense(
        &self,
        dense_degree: usize,
        dense_mass: f64,
    ) -> Result<Self, DegreeError> {
        let mut pairs = self.entries.clone();
        pairs.push((dense_degree, dense_mass));
        Self::from_table(&pairs, self.domain_max.max(dense_degree))
    }

    /// Inverse-CDF sampling with a binary search over the cumulative table.
    pub fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.entries[i.min(self.entries.len() - 1)].0
    }

    /// Luby's robust soliton distribution on `1..=n`.
    ///
    /// With `R = c·ln(n/δ)·√n` and spike at `round(n/R)`, the ideal soliton
    /// `ρ(1) = 1/n, ρ(d) = 1/(d(d−1))` is added to the spike component
    /// `τ(d) = R/(dn)` for `d < n/R`, `τ(n/R) = R·ln(R/δ)/n`, then normalized.
    pub fn robust_soliton(n: usize, c: f64, delta: f64) -> Result<Self, DegreeError> {
        if n < 2 || !(c.is_finite() && c > 0.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(DegreeError::DegenerateParameters(format!(
                "n={n}, c={c}, delta={delta}"
            )));
        }
        let nf = n as f64;
        let r = c * (nf / delta).ln() * nf.sqrt();
        let spike = (nf / r).round();
        if !(spike >= 1.0 && spike <= nf) {
            return Err(DegreeError::DegenerateParameters(format!(
                "spike index {spike} outside [1, {n}]"
            )));
        }
        let spike = spike as usize;
        let pairs: Vec<(usize, f64)> = (1..=n)
            .map(|d| {
                let df = d as f64;
                let ideal = if d == 1 {
                    1.0 / nf
                } else {
                    1.0 / (df * (df - 1.0))
                };
                let tau = if d < spike {
                    r / (df * nf)
                } else if d == spike {
                    r * (r / delta).ln() / nf
                } else {
                    0.0
                };
                (d, ideal + tau.max(0.0))
            })
            .collect();
        Self::from_table(&pairs, n)
    }

    /// Ideal soliton on `1..=n`.
    pub fn ideal_soliton(n: usize) -> Result<Self, DegreeError> {
        if n < 1 {
            return Err(DegreeError::EmptyTable);
        }
        let pairs: Vec<(usize, f64)> = (1..=n)
            .map(|d| {
                let df = d as f64;
                (
                    d,
                    if d == 1 {
                        1.0 / n as f64
                    } else {
                        1.0 / (df * (df - 1.0))
                    },
                )
            })
            .collect();
        Self::from_table(&pairs, n)
    }
}

/// Row-degree table `μ(x)` for LT codes.
pub const MU_TABLE: [(usize, f64); 12] = [
    (1, 0.012),
    (2, 0.482),
    (3, 0.153),
    (4, 0.082),
    (5, 0.047),
    (6, 0.035),
    (7, 0.024),
    (8, 0.023),
    (9, 0.012),
    (10, 0.012),
    (25, 0.059),
    (35, 0.059),
];

/// Dense fraction added to `μ(x)` to obtain `μ̄(x)`.
pub const MU_BAR_DENSE: (usize, f64) = (50, 0.17);

/// Column-degree table `ρ(x)` for LDPC check matrices. The six low masses
/// sit on degrees 2..=7.
pub const RHO_TABLE: [(usize, f64); 9] = [
    (2, 0.46),
    (3, 0.32),
    (4, 0.021),
    (5, 0.06),
    (6, 0.04),
    (7, 0.025),
    (9, 0.01),
    (19, 0.02),
    (20, 0.05),
];

pub fn mu(domain_max: usize) -> Result<DegreeDistribution, DegreeError> {
    DegreeDistribution::from_table(&MU_TABLE, domain_max)
}

pub fn mu_bar(domain_max: usize) -> Result<DegreeDistribution, DegreeError> {
    mu(domain_max)?.supplement_dense(MU_BAR_DENSE.0, MU_BAR_DENSE.1)
}

pub fn rho(domain_max: usize) -> Result<DegreeDistribution, DegreeError> {
    DegreeDistribution::from_table(&RHO_TABLE, domain_max)
}

/// On-disk form of a degree table (TOML).
///
/// ```toml
/// domain_max = 100
/// entries = [ { degree = 2, mass = 0.5 }, { degree = 3, mass = 0.5 } ]
///
/// [supplement]
/// dense_degree = 50
/// dense_mass = 0.17
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_max: Option<usize>,
    pub entries: Vec<DegreeMass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supplement: Option<DenseSupplement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeMass {
    pub degree: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseSupplement {
    pub dense_degree: usize,
    pub dense_mass: f64,
}

impl DistributionConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, DegreeError> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DegreeError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Builds the distribution. Without an explicit `domain_max`, `default_domain`
    /// is used (normally the block length).
    pub fn build(&self, default_domain: usize) -> Result<DegreeDistribution, DegreeError> {
        let domain = self.domain_max.unwrap_or(default_domain);
        let pairs: Vec<(usize, f64)> = self.entries.iter().map(|e| (e.degree, e.mass)).collect();
        let base = DegreeDistribution::from_table(&pairs, domain)?;
        match self.supplement {
            Some(s) => base.supplement_dense(s.dense_degree, s.dense_mass),
            None => Ok(base),
        }
    }

    pub fn from_table(pairs: &[(usize, f64)]) -> Self {
        Self {
            domain_max: None,
            entries: pairs
                .iter()
                .map(|&(degree, mass)| DegreeMass { degree, mass })
                .collect(),
            supplement: None,
        }
    }
}
