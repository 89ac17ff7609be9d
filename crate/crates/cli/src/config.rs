//! Resolved run configurations.
//!
//! Sweep outputs carry their [`RunRecord`] as TOML in the CSV header (and as
//! an object in the JSON mirror) so any output file can be replayed.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use kovalenko::degree::{self, DistributionConfig};
use kovalenko::harness::Family;
use kovalenko::ldpc::{CheckMatrix, LdpcCode, LdpcConfig};
use kovalenko::lt::LtConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 100×200, all rows grown by PEG.
    M,
    /// 85 PEG rows plus 15 random rows of degree 100.
    MBar,
}

impl Preset {
    pub fn config(self, seed: u64) -> Result<LdpcConfig> {
        Ok(match self {
            Preset::M => LdpcConfig::table_m(seed)?,
            Preset::MBar => LdpcConfig::table_m_bar(seed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MatrixSource {
    File { path: PathBuf },
    Preset { preset: Preset, seed: u64 },
}

impl MatrixSource {
    pub fn load(&self) -> Result<CheckMatrix> {
        match self {
            MatrixSource::File { path } => CheckMatrix::load(path)
                .with_context(|| format!("loading check matrix {}", path.display())),
            MatrixSource::Preset { preset, seed } => Ok(preset.config(*seed)?.build()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Lt {
        n: usize,
        symbol_bits: usize,
        dist: DistributionConfig,
    },
    Ldpc {
        symbol_bits: usize,
        matrix: MatrixSource,
    },
    Dense {
        n: usize,
        symbol_bits: usize,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Family> {
        Ok(match self {
            FamilySpec::Lt {
                n,
                symbol_bits,
                dist,
            } => {
                let dist = dist.build(*n)?;
                Family::Lt(LtConfig::new(*n, dist)?.with_symbol_bits(*symbol_bits))
            }
            FamilySpec::Ldpc {
                symbol_bits,
                matrix,
            } => {
                let code = LdpcCode::new(matrix.load()?).with_symbol_bits(*symbol_bits);
                Family::Ldpc(Arc::new(code))
            }
            FamilySpec::Dense { n, symbol_bits } => Family::Dense {
                n: *n,
                symbol_bits: *symbol_bits,
            },
        })
    }
}

/// Everything a sweep's output depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: FamilySpec,
    /// Extra rows `k`, or erased counts for LDPC.
    pub grid: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub sweep: SweepConfig,
}

impl RunRecord {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn header_lines(&self) -> Result<Vec<String>> {
        Ok(self.to_toml()?.lines().map(str::to_string).collect())
    }

    pub fn from_header_lines(lines: &[String]) -> Result<Self> {
        if lines.is_empty() {
            bail!("file carries no run configuration");
        }
        toml::from_str(&lines.join("\n")).context("parsing embedded run configuration")
    }
}

/// A named table (`mu`, `mu_bar`) or a TOML table file.
pub fn resolve_dist(spec: &str) -> Result<DistributionConfig> {
    let table = |pairs: &[(usize, f64)]| DistributionConfig::from_table(pairs);
    Ok(match spec {
        "mu" => table(&degree::MU_TABLE),
        "mu_bar" => {
            let mut cfg = table(&degree::MU_TABLE);
            cfg.supplement = Some(degree::DenseSupplement {
                dense_degree: degree::MU_BAR_DENSE.0,
                dense_mass: degree::MU_BAR_DENSE.1,
            });
            cfg
        }
        path => DistributionConfig::load(path)
            .with_context(|| format!("reading degree table {path}"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips_through_header() {
        let rec = RunRecord {
            command: "sweep-lt".into(),
            sweep: SweepConfig {
                family: FamilySpec::Lt {
                    n: 100,
                    symbol_bits: 64,
                    dist: resolve_dist("mu_bar").unwrap(),
                },
                grid: vec![0, 1, 2],
                trials: 10,
                seed: 3,
            },
        };
        let lines = rec.header_lines().unwrap();
        assert_eq!(RunRecord::from_header_lines(&lines).unwrap(), rec);

        let ldpc = RunRecord {
            command: "sweep-ldpc".into(),
            sweep: SweepConfig {
                family: FamilySpec::Ldpc {
                    symbol_bits: 64,
                    matrix: MatrixSource::Preset {
                        preset: Preset::MBar,
                        seed: 1,
                    },
                },
                grid: vec![60, 70],
                trials: 10,
                seed: 3,
            },
        };
        assert_eq!(
            RunRecord::from_header_lines(&ldpc.header_lines().unwrap()).unwrap(),
            ldpc
        );
    }

    #[test]
    fn named_tables_match_library() {
        let built = resolve_dist("mu_bar").unwrap().build(100).unwrap();
        assert_eq!(built, degree::mu_bar(100).unwrap());
        assert!(resolve_dist("/no/such/file.toml").is_err());
    }
}
