//! Monte-Carlo estimation of the decoding error probability, bound checks and
//! sweep serialization.
//!
//! Every trial draws from its own stream keyed by `(seed, grid point, trial)`
//! and results are summed as integers, so a sweep is a pure function of its
//! inputs whatever the worker count.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf2::{structured_solve, BitMatrix, LinearSystem, Provenance, SymbolBlocks};
use crate::ldpc::{ldpc_trial, LdpcCode};
use crate::lt::{lt_trial, LtConfig, TrialOutcome};
use crate::par::*;
use crate::rank_theory::{self, RankTheoryError};
use crate::rng::{stream, trial_stream};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

const CHUNK: u64 = 256;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("grid point {point} is out of range for this family")]
    PointOutOfRange { point: usize },
    #[error("reports mix families or block lengths")]
    MixedReports,
    #[error(transparent)]
    Theory(#[from] RankTheoryError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    #[serde(rename = "LT")]
    Lt,
    #[serde(rename = "LDPC")]
    Ldpc,
    #[serde(rename = "DenseRandom")]
    Dense,
}

/// Which random systems a sweep draws.
///
/// Grid points are the number of extra rows `k` for LT and dense families and
/// the number of erased coordinates for LDPC.
#[derive(Debug, Clone)]
pub enum Family {
    Lt(LtConfig),
    Ldpc(Arc<LdpcCode>),
    Dense { n: usize, symbol_bits: usize },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Lt(_) => FamilyKind::Lt,
            Family::Ldpc(_) => FamilyKind::Ldpc,
            Family::Dense { .. } => FamilyKind::Dense,
        }
    }

    /// `n` for LT and dense families, `N` for LDPC.
    pub fn size(&self) -> usize {
        match self {
            Family::Lt(cfg) => cfg.n(),
            Family::Ldpc(code) => code.matrix().length(),
            Family::Dense { n, .. } => *n,
        }
    }

    fn check_point(&self, point: usize) -> Result<(), HarnessError> {
        match self {
            Family::Ldpc(code) if point > code.matrix().length() => {
                Err(HarnessError::PointOutOfRange { point })
            }
            _ => Ok(()),
        }
    }

    /// Unknowns `n` and extra equations `k = m − n` of the systems at `point`.
    fn system_shape(&self, point: usize) -> (usize, i64) {
        match self {
            Family::Lt(cfg) => (cfg.n(), point as i64),
            Family::Dense { n, .. } => (*n, point as i64),
            Family::Ldpc(code) => (point, code.matrix().checks() as i64 - point as i64),
        }
    }

    pub fn trial<R: Rng + ?Sized>(&self, point: usize, rng: &mut R) -> TrialOutcome {
        match self {
            Family::Lt(cfg) => lt_trial(cfg, point, rng),
            Family::Ldpc(code) => ldpc_trial(code, point, rng),
            Family::Dense { n, symbol_bits } => dense_trial(*n, point, *symbol_bits, rng),
        }
    }
}

/// One trial with a uniformly random `(n+k) × n` matrix.
pub fn dense_trial<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    symbol_bits: usize,
    rng: &mut R,
) -> TrialOutcome {
    let h = BitMatrix::random(n + k, n, rng);
    let alpha = SymbolBlocks::random(symbol_bits, n, rng);
    let empty = SymbolBlocks::zeros(symbol_bits, n + k);
    let beta = LinearSystem::new(h.clone(), empty, Provenance::Dense)
        .expect("shapes agree")
        .apply(&alpha);
    let sys = LinearSystem::new(h, beta, Provenance::Dense).expect("shapes agree");
    let res = structured_solve(&sys).expect("encoded systems are consistent");
    if let Some(x) = &res.solution {
        assert_eq!(x, &alpha, "decoder returned a wrong solution");
    }
    TrialOutcome {
        full_rank: res.is_full_rank(),
        kernel_dim: res.kernel_dim,
        symbol_xors: res.symbol_xor_count,
    }
}

/// Integer tallies, so that summation order cannot change the result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub failures: u64,
    pub xor_sum: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            failures: self.failures + o.failures,
            xor_sum: self.xor_sum + o.xor_sum,
        }
    }
}

impl std::iter::Sum for Tally {
    fn sum<I: Iterator<Item = Tally>>(iter: I) -> Tally {
        iter.fold(Tally::default(), |a, b| a + b)
    }
}

/// Wilson score interval for `failures` out of `trials` at normal quantile `z`.
pub fn wilson(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && failures <= trials);
    let t = trials as f64;
    let p = failures as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

fn serialize_grid<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

fn deserialize_grid<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    f64::deserialize(d)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: FamilyKind,
    #[serde(rename = "n_or_N")]
    pub n_or_big_n: usize,
    /// Extra rows `k`, or erasure rate `p` for LDPC.
    #[serde(
        serialize_with = "serialize_grid",
        deserialize_with = "deserialize_grid"
    )]
    pub k_or_p: f64,
    pub gamma: f64,
    pub trials: u64,
    pub failures: u64,
    pub dep_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub kfrl: f64,
    /// Mean symbol XORs over successful decodes.
    pub mean_symbol_xors: Option<f64>,
    pub seed: u64,
}

impl SweepReport {
    /// Unknowns of the decoded systems.
    pub fn unknowns(&self) -> usize {
        match self.family {
            FamilyKind::Ldpc => (self.k_or_p * self.n_or_big_n as f64).round() as usize,
            _ => self.n_or_big_n,
        }
    }
}

fn kfrl_signed(n: usize, k: i64) -> f64 {
    if k < 0 {
        1.0
    } else {
        rank_theory::kfrl(n, k as usize)
    }
}

/// Runs `trials` independent trials at one grid point.
pub fn estimate_dep(
    family: &Family,
    point: usize,
    trials: u64,
    seed: u64,
) -> Result<SweepReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    family.check_point(point)?;
    let chunks = trials.div_ceil(CHUNK);
    let tally: Tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_stream(seed, point as u64, i);
                let out = family.trial(point, &mut rng);
                t.trials += 1;
                if out.full_rank {
                    t.xor_sum += out.symbol_xors;
                } else {
                    t.failures += 1;
                }
            }
            t
        })
        .sum();

    let (n, k) = family.system_shape(point);
    let size = family.size();
    let (k_or_p, gamma) = match family.kind() {
        FamilyKind::Ldpc => (point as f64 / size as f64, k as f64 / n as f64),
        _ => (point as f64, point as f64 / n as f64),
    };
    let (ci_low, ci_high) = wilson(tally.failures, tally.trials, Z_99);
    let successes = tally.trials - tally.failures;
    Ok(SweepReport {
        family: family.kind(),
        n_or_big_n: size,
        k_or_p,
        gamma,
        trials: tally.trials,
        failures: tally.failures,
        dep_hat: tally.failures as f64 / tally.trials as f64,
        ci_low,
        ci_high,
        kfrl: kfrl_signed(n, k),
        mean_symbol_xors: (successes > 0).then(|| tally.xor_sum as f64 / successes as f64),
        seed,
    })
}

/// One report per grid point, in grid order.
pub fn sweep(
    family: &Family,
    grid: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepReport>, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    grid.iter()
        .map(|&p| estimate_dep(family, p, trials, seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub k_or_p: f64,
    pub kfrl: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl BoundVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flags every report whose `kfrl` exceeds the upper confidence limit.
pub fn verify_lower_bound(reports: &[SweepReport]) -> BoundVerdict {
    let violations = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kfrl > r.ci_high)
        .map(|(index, r)| Violation {
            index,
            k_or_p: r.k_or_p,
            kfrl: r.kfrl,
            ci_high: r.ci_high,
        })
        .collect();
    BoundVerdict {
        checked: reports.len(),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsoResult {
    pub delta: f64,
    /// Smallest grid overhead whose upper confidence limit is below `delta`.
    pub gamma_hat_star: Option<f64>,
    pub gamma_k: f64,
    /// The grid crosses `delta` and every point up to the crossing ran at
    /// least `10/delta` trials.
    pub resolvable: bool,
}

impl MsoResult {
    /// `γ̂* ≥ γ_K`, vacuous when unresolvable.
    pub fn consistent(&self) -> bool {
        !self.resolvable
            || self
                .gamma_hat_star
                .is_some_and(|g| g >= self.gamma_k - 1e-12)
    }
}

/// Empirical minimum stable overhead on the sweep grid against its analytic
/// lower bound.
pub fn empirical_mso(reports: &[SweepReport], delta: f64) -> Result<MsoResult, HarnessError> {
    let first = reports.first().ok_or(HarnessError::EmptyGrid)?;
    if reports
        .iter()
        .any(|r| r.family != first.family || r.n_or_big_n != first.n_or_big_n)
    {
        return Err(HarnessError::MixedReports);
    }
    let gamma_k = match first.family {
        FamilyKind::Ldpc => {
            let n = first.unknowns();
            let checks = (n as f64 * (1.0 + first.gamma)).round() as usize;
            rank_theory::ldpc_kfro(checks, first.n_or_big_n, delta)?.gamma_k
        }
        _ => rank_theory::kfro(first.n_or_big_n, delta)?.gamma_k,
    };
    let gamma_hat_star = reports
        .iter()
        .filter(|r| r.ci_high < delta)
        .map(|r| r.gamma)
        .min_by(f64::total_cmp);
    let needed = (10.0 / delta).ceil() as u64;
    let resolvable = gamma_hat_star.is_some_and(|g| {
        reports
            .iter()
            .filter(|r| r.gamma <= g)
            .all(|r| r.trials >= needed)
    });
    Ok(MsoResult {
        delta,
        gamma_hat_star: gamma_hat_star.filter(|_| resolvable),
        gamma_k,
        resolvable,
    })
}

/// Frequency of `W·Vᵀ = 0` over `trials` draws, with `V` the indicator of the
/// first `k` coordinates and `W` i.i.d. Bernoulli(`d/n`).
pub fn prop1_empirical(n: usize, d: f64, k: usize, trials: u64, seed: u64) -> f64 {
    assert!((1..=n).contains(&k), "need 1 ≤ k ≤ n");
    assert!((0.0..=n as f64).contains(&d), "need 0 ≤ d ≤ n");
    let q = d / n as f64;
    let mut rng = stream(seed);
    let mut zeros = 0u64;
    for _ in 0..trials {
        let mut parity = false;
        for i in 0..n {
            if rng.random_bool(q) && i < k {
                parity = !parity;
            }
        }
        zeros += u64::from(!parity);
    }
    zeros as f64 / trials as f64
}

/// Writes reports as CSV, preceded by `# `-prefixed header lines.
pub fn write_csv<W: Write>(
    mut w: W,
    header: &[String],
    reports: &[SweepReport],
) -> Result<(), HarnessError> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads what [`write_csv`] wrote: header lines and reports.
pub fn read_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<SweepReport>), HarnessError> {
    let mut reader = BufReader::new(r);
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let header = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").unwrap_or(&l[1..]).to_string())
        .collect();
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let reports = rows.deserialize().collect::<Result<_, _>>()?;
    Ok((header, reports))
}

/// The JSON mirror: the resolved configuration plus the reports.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepDocument<C> {
    pub config: C,
    pub reports: Vec<SweepReport>,
}

pub fn write_json<W: Write, C: Serialize>(
    mut w: W,
    config: &C,
    reports: &[SweepReport],
) -> Result<(), HarnessError> {
    let doc = SweepDocument {
        config,
        reports: reports.to_vec(),
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<R: Read, C: for<'de> Deserialize<'de>>(
    r: R,
) -> Result<SweepDocument<C>, HarnessError> {
    Ok(serde_json::from_reader(BufReader::new(r))?)
}

/// Header lines of a CSV file, without reading the rows.
pub fn read_csv_header<R: Read>(r: R) -> Result<Vec<String>, HarnessError> {
    let mut out = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        out.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
    }
    Ok(out)
}
