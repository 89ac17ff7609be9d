//! Analytic tables: the full-rank limit curve and rank distributions.

use std::fmt::Write as _;

use anyhow::Result;
use kovalenko::rank_theory::{self, OverheadResult, RankDistribution};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct KfrlRow {
    pub k: usize,
    pub gamma: f64,
    pub kfrl: f64,
    pub two_pow_neg_k: f64,
}

#[derive(Debug, Serialize)]
pub struct KfrlTable {
    pub n: usize,
    pub rows: Vec<KfrlRow>,
    pub markers: Vec<OverheadResult>,
}

pub fn kfrl_table(n: usize, k_max: usize, deltas: &[f64]) -> Result<KfrlTable> {
    let curve = rank_theory::kfrl_curve(n, k_max);
    let rows = curve
        .points
        .iter()
        .map(|p| KfrlRow {
            k: p.k,
            gamma: p.gamma,
            kfrl: p.kfrl,
            two_pow_neg_k: 0.5f64.powi(p.k as i32),
        })
        .collect();
    let markers = deltas
        .iter()
        .map(|&d| rank_theory::kfro(n, d))
        .collect::<Result<_, _>>()?;
    Ok(KfrlTable { n, rows, markers })
}

impl KfrlTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# n = {}\n", self.n);
        for m in &self.markers {
            let _ = writeln!(
                out,
                "# delta = {}: k_K = {}, gamma_K = {}, k_delta = {}, gamma_upper = {}",
                m.delta, m.k_k, m.gamma_k, m.k_delta, m.gamma_upper
            );
        }
        out.push_str("k,gamma,kfrl,two_pow_neg_k,marker\n");
        for r in &self.rows {
            let marks: Vec<String> = self
                .markers
                .iter()
                .filter(|m| m.k_k == r.k)
                .map(|m| format!("gamma_K({})", m.delta))
                .collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.k,
                r.gamma,
                r.kfrl,
                r.two_pow_neg_k,
                marks.join(" ")
            );
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct RankRow {
    pub s: usize,
    pub xi: f64,
    pub cumulative: f64,
    pub limit: f64,
    pub limit_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct RankTable {
    pub n: usize,
    pub k: i64,
    pub rows: Vec<RankRow>,
}

pub fn rank_table(n: usize, k: i64) -> RankTable {
    let dist = RankDistribution::exact(n, k);
    let mut cumulative = 0.0;
    let rows = dist
        .probs
        .iter()
        .enumerate()
        .map(|(s, &xi)| {
            cumulative += xi;
            let limit = rank_theory::xi_limit(k, s).unwrap_or(0.0);
            RankRow {
                s,
                xi,
                cumulative,
                limit,
                limit_deviation: xi - limit,
            }
        })
        .collect();
    RankTable { n, k, rows }
}

impl RankTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# n = {}, k = {}\ns,xi,cumulative,limit,limit_deviation\n",
            self.n, self.k
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.s, r.xi, r.cumulative, r.limit, r.limit_deviation
            );
        }
        out
    }
}
