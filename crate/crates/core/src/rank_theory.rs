//! Exact and limiting rank distributions of uniform random binary matrices,
//! the full-rank limit `K(1+γ, n)` and the overhead needed to push it below
//! an error bound.
//!
//! Products of the form `∏ (1 − 2^{-i})` are accumulated as sums of
//! `ln_1p(−2^{-i})`, and `1 − ∏` is taken as `−expm1(Σ)`, so tail
//! probabilities near `2^{-k}` keep full relative precision for any `k`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankTheoryError {
    #[error("rank deficiency s={s} is impossible for n={n}, k={k}")]
    InvalidDeficiency { n: usize, k: i64, s: usize },
    #[error("error bound must lie in (0, 1), got {0}")]
    InvalidBound(f64),
    #[error("rate must lie in [0, 1), got {0}")]
    InvalidRate(f64),
    #[error("erasure rate p={p} outside (0, 1 - R] for R={rate}")]
    DomainError { rate: f64, p: f64 },
    #[error("overhead must be non-negative, got {0}")]
    NegativeOverhead(f64),
}

/// `ln(1 − 2^{-i})`; `-inf` at `i = 0`.
#[inline]
fn ln_factor(i: usize) -> f64 {
    if i == 0 {
        f64::NEG_INFINITY
    } else if i >= 1075 {
        0.0
    } else {
        (-(0.5f64).powi(i as i32)).ln_1p()
    }
}

/// `Σ_{i=lo}^{hi} ln(1 − 2^{-i})`, summed from the smallest term upward.
/// Terms vanish in working precision once `i` exceeds ~1075, so the loop is
/// capped there.
fn ln_product(lo: usize, hi: usize) -> f64 {
    if lo > hi {
        return 0.0;
    }
    let top = hi.min(1100);
    let mut acc = 0.0;
    for i in (lo..=top).rev() {
        acc += ln_factor(i);
    }
    acc
}

/// `ln ∏_{i=lo}^{∞} (1 − 2^{-i})`, truncated when the factor rounds to one.
fn ln_infinite_product(lo: usize) -> f64 {
    let mut hi = lo.max(1);
    while 1.0 - (0.5f64).powi(hi as i32 + 1) != 1.0 {
        hi += 1;
    }
    ln_product(lo, hi)
}

/// The `l`-fold nested sum over `0 ≤ i₁ ≤ i₂ ≤ … ≤ i_l ≤ top` of
/// `2^{-(i₁+…+i_l)}`.
///
/// Evaluated inner-to-outer with suffix sums in `O(l · top)`.
/// `l = 0` gives the empty-product value 1.
pub fn s_sum(top: usize, l: usize) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let weights: Vec<f64> = (0..=top).map(|i| (0.5f64).powi(i as i32)).collect();
    // inner[i] = value of the remaining nested sums when the enclosing index is i.
    let mut inner = vec![1.0; top + 1];
    for _ in 0..l {
        let mut suffix = 0.0;
        let mut next = vec![0.0; top + 1];
        for i in (0..=top).rev() {
            suffix += weights[i] * inner[i];
            next[i] = suffix;
        }
        inner = next;
    }
    inner[0]
}

/// `∏_{i=1}^{l} (1 − 2^{-i})^{-1}`: the `n → ∞` limit and upper bound of [`s_sum`].
pub fn s_sum_limit(l: usize) -> f64 {
    (-ln_product(1, l)).exp()
}

/// Probability that a uniform `(n+k) × n` binary matrix has rank exactly
/// `n − s`. `k` may be negative (fewer rows than columns) as long as
/// `k + s ≥ 0`.
pub fn xi_exact(n: usize, k: i64, s: usize) -> Result<f64, RankTheoryError> {
    let l = k + s as i64;
    if l < 0 || s > n {
        return Err(RankTheoryError::InvalidDeficiency { n, k, s });
    }
    let l = l as usize;
    let ln = s_sum(n - s, l).ln() - (l as f64) * (s as f64) * LN_2 + ln_product(s + 1, n);
    Ok(ln.exp().min(1.0))
}

/// Whole distribution `s ↦ ξ_k(n − s)` for `s = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistribution {
    pub n: usize,
    pub k: i64,
    /// `probs[s] = ξ_k(n − s)`; zero where the deficiency is impossible.
    pub probs: Vec<f64>,
}

impl RankDistribution {
    pub fn exact(n: usize, k: i64) -> Self {
        let probs = (0..=n).map(|s| xi_exact(n, k, s).unwrap_or(0.0)).collect();
        Self { n, k, probs }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Pr(rank < n)`.
    pub fn deficiency_probability(&self) -> f64 {
        self.probs.iter().skip(1).rev().sum()
    }
}

/// `n → ∞` limit of `ξ_k(n − s)`.
pub fn xi_limit(k: i64, s: usize) -> Result<f64, RankTheoryError> {
    let l = k + s as i64;
    if l < 0 {
        return Err(RankTheoryError::InvalidDeficiency {
            n: usize::MAX,
            k,
            s,
        });
    }
    let ln =
        -(s as f64) * (l as f64) * LN_2 + ln_infinite_product(s + 1) - ln_product(1, l as usize);
    Ok(ln.exp())
}

/// `g(k, n) = ∏_{i=k+1}^{n} (1 − 2^{-i})`; 1 when `k ≥ n`.
pub fn g(n: usize, k: usize) -> f64 {
    ln_product(k + 1, n).exp()
}

/// Kovalenko full-rank limit `K(1+γ, n) = 1 − g(k, n)` with `k = γn`.
pub fn kfrl(n: usize, k: usize) -> f64 {
    // `0 − x` rather than `−x` so an empty product yields +0.
    0.0 - ln_product(k + 1, n).exp_m1()
}

/// One point of a full-rank-limit curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KfrlPoint {
    pub k: usize,
    pub gamma: f64,
    pub g: f64,
    pub kfrl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfrlCurve {
    pub n: usize,
    pub points: Vec<KfrlPoint>,
}

/// `K(1+k/n, n)` for `k = 0..=k_max` via the one-factor recursion
/// `g(k, n) = (1 − 2^{-(k+1)}) g(k+1, n)`.
///
/// The recursion is run downward from `k_max`, with a log-space copy, so
/// every point keeps relative accuracy even where `K` is tiny.
pub fn kfrl_curve(n: usize, k_max: usize) -> KfrlCurve {
    let k_max = k_max.min(n);
    let mut ln_g = vec![0.0; k_max + 1];
    ln_g[k_max] = ln_product(k_max + 1, n);
    for k in (0..k_max).rev() {
        ln_g[k] = ln_g[k + 1] + ln_factor(k + 1);
    }
    // g itself is carried in linear space so consecutive ratios are the
    // recursion factors up to one rounding.
    let mut g = vec![0.0; k_max + 1];
    g[k_max] = ln_g[k_max].exp();
    for k in (0..k_max).rev() {
        g[k] = g[k + 1] * (1.0 - (0.5f64).powi(k as i32 + 1));
    }
    let points = ln_g
        .iter()
        .zip(&g)
        .enumerate()
        .map(|(k, (&lg, &g))| KfrlPoint {
            k,
            gamma: if n == 0 { 0.0 } else { k as f64 / n as f64 },
            g,
            kfrl: 0.0 - lg.exp_m1(),
        })
        .collect();
    KfrlCurve { n, points }
}

/// `k_δ = min{k : 2^{-k} ≤ δ}`.
pub fn k_delta(delta: f64) -> Result<usize, RankTheoryError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(RankTheoryError::InvalidBound(delta));
    }
    let mut k = (-delta.log2()).ceil().max(0.0) as usize;
    while (0.5f64).powi(k as i32) > delta {
        k += 1;
    }
    while k > 0 && (0.5f64).powi(k as i32 - 1) <= delta {
        k -= 1;
    }
    Ok(k)
}

/// Full-rank overhead for an error bound, with the analytic upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverheadResult {
    pub delta: f64,
    pub n: usize,
    /// Smallest `k` with `K(1 + k/n, n) ≤ δ`.
    pub k_k: usize,
    pub gamma_k: f64,
    pub k_delta: usize,
    /// `(1 + log₂(1/δ)) / n`.
    pub gamma_upper: f64,
}

impl OverheadResult {
    pub fn within_upper_bound(&self) -> bool {
        self.gamma_k <= self.gamma_upper
    }

    /// Fewest received LT symbols that can meet the bound: `(1 + γ_K) n`.
    pub fn lt_min_received(&self) -> usize {
        self.n + self.k_k
    }
}

/// Linear scan over `k` for the first point with `K(1 + k/n, n) ≤ δ`.
pub fn kfro(n: usize, delta: f64) -> Result<OverheadResult, RankTheoryError> {
    let k_delta = k_delta(delta)?;
    let curve = kfrl_curve(n, n);
    let k_k = curve
        .points
        .iter()
        .find(|p| p.kfrl <= delta)
        .map(|p| p.k)
        .expect("K(1 + n/n, n) = 0 always meets the bound");
    let nf = n.max(1) as f64;
    Ok(OverheadResult {
        delta,
        n,
        k_k,
        gamma_k: k_k as f64 / nf,
        k_delta,
        gamma_upper: (1.0 + (1.0 / delta).log2()) / nf,
    })
}

/// Largest erasure count an LDPC code with `m` check rows and length `N`
/// can face while its full-rank limit stays at or below `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpcOverheadResult {
    pub delta: f64,
    pub checks: usize,
    pub length: usize,
    /// Largest `n ≤ m` with `K(1 + (m−n)/n, n) ≤ δ`.
    pub max_erasures: usize,
    /// `n / N`.
    pub p_k: f64,
    /// `(m − n) / n`.
    pub gamma_k: f64,
    /// `(R + γ_K) / (1 + γ_K) · N`.
    pub min_received: f64,
}

pub fn ldpc_kfro(
    checks: usize,
    length: usize,
    delta: f64,
) -> Result<LdpcOverheadResult, RankTheoryError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(RankTheoryError::InvalidBound(delta));
    }
    // K(1 + (m−n)/n, n) grows with n, so scan down from n = m.
    let max_erasures = (0..=checks.min(length))
        .rev()
        .find(|&n| kfrl(n, checks - n) <= delta)
        .unwrap_or(0);
    let rate = 1.0 - checks as f64 / length as f64;
    let gamma_k = if max_erasures == 0 {
        f64::INFINITY
    } else {
        (checks - max_erasures) as f64 / max_erasures as f64
    };
    let min_received = if gamma_k.is_finite() {
        (rate + gamma_k) / (1.0 + gamma_k) * length as f64
    } else {
        length as f64
    };
    Ok(LdpcOverheadResult {
        delta,
        checks,
        length,
        max_erasures,
        p_k: max_erasures as f64 / length as f64,
        gamma_k,
        min_received,
    })
}

/// `Pr(W·Vᵀ = 0) = (1 + (1 − 2d/n)^k) / 2` for `|V| = k` and iid
/// `Pr(wᵢ = 1) = d/n`.
pub fn prop1_probability(n: usize, d: f64, k: usize) -> f64 {
    (1.0 + (1.0 - 2.0 * d / n as f64).powi(k as i32)) / 2.0
}

/// Erasure rate for code rate `R` and overhead `γ`: `p = (1 − R)/(1 + γ)`.
pub fn overhead_to_erasure(rate: f64, gamma: f64) -> Result<f64, RankTheoryError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(RankTheoryError::InvalidRate(rate));
    }
    if gamma < 0.0 {
        return Err(RankTheoryError::NegativeOverhead(gamma));
    }
    Ok((1.0 - rate) / (1.0 + gamma))
}

/// Overhead for code rate `R` and erasure rate `p`: `γ = (1 − (R + p))/p`.
pub fn erasure_to_overhead(rate: f64, p: f64) -> Result<f64, RankTheoryError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(RankTheoryError::InvalidRate(rate));
    }
    if !(p > 0.0 && p <= 1.0 - rate) {
        return Err(RankTheoryError::DomainError { rate, p });
    }
    Ok((1.0 - (rate + p)) / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal nested loops, only usable for small `l`.
    fn naive_s_sum(top: usize, l: usize) -> f64 {
        fn rec(start: usize, top: usize, left: usize) -> f64 {
            if left == 0 {
                return 1.0;
            }
            (start..=top)
                .map(|i| (0.5f64).powi(i as i32) * rec(i, top, left - 1))
                .sum()
        }
        rec(0, top, l)
    }

    #[test]
    fn s_sum_examples() {
        assert_eq!(s_sum(7, 0), 1.0);
        assert_eq!(s_sum(0, 0), 1.0);
        assert!((s_sum(1, 1) - 1.5).abs() < 1e-15);
        let mut double = 0.0;
        for i1 in 0..=3 {
            for i2 in i1..=3 {
                double += (0.5f64).powi(i1 + i2);
            }
        }
        assert!((s_sum(3, 2) - double).abs() < 1e-14);
    }

    #[test]
    fn s_sum_matches_nested_loops() {
        for top in 0..=10 {
            for l in 0..=3 {
                let (a, b) = (s_sum(top, l), naive_s_sum(top, l));
                assert!((a - b).abs() < 1e-13, "top={top} l={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn s_sum_is_monotone_and_bounded() {
        for l in 0..8 {
            let bound = s_sum_limit(l);
            let mut prev = 0.0;
            for top in 0..60 {
                let v = s_sum(top, l);
                assert!(v >= prev - 1e-15);
                assert!(v <= bound * (1.0 + 1e-12));
                prev = v;
            }
            assert!((prev - bound).abs() < 1e-9 * bound);
        }
    }

    #[test]
    fn xi_small_cases() {
        assert!((xi_exact(1, 0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((xi_exact(1, 0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((xi_exact(2, 0, 0).unwrap() - 3.0 / 8.0).abs() < 1e-15);
        assert!(matches!(
            xi_exact(3, -2, 1),
            Err(RankTheoryError::InvalidDeficiency { .. })
        ));
        assert!(xi_exact(3, 0, 4).is_err());
    }

    #[test]
    fn distributions_normalize() {
        for n in [1, 2, 5, 20, 100, 400] {
            for k in [-3i64, 0, 1, 5, 40, 60] {
                if k < -(n as i64) {
                    continue;
                }
                let d = RankDistribution::exact(n, k);
                assert!((d.total() - 1.0).abs() < 1e-9, "n={n} k={k}: {}", d.total());
                assert!(d.probs.iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
    }

    #[test]
    fn kovalenko_constant() {
        let c = xi_limit(0, 0).unwrap();
        assert!((c - 0.288788095066).abs() < 1e-10);
        assert!((g(50, 0) - 0.288788095066).abs() < 1e-10);
        assert!((xi_exact(50, 0, 0).unwrap() - 0.288788095066).abs() < 1e-10);
    }

    #[test]
    fn xi_limit_properties() {
        let mut prev = 0.0;
        for k in 0..80 {
            let v = xi_limit(k, 0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!((prev - 1.0).abs() < 1e-15);
        let head: f64 = (0..=6).map(|s| xi_limit(0, s).unwrap()).sum();
        assert!(head <= 1.0);
        let all: f64 = (0..=20).map(|s| xi_limit(0, s).unwrap()).sum();
        assert!((all - 1.0).abs() < 1e-6);
        for k in [0i64, 3, 10] {
            for s in 0..4 {
                let exact = xi_exact(400, k, s).unwrap();
                assert!((exact - xi_limit(k, s).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kfrl_examples() {
        assert!((kfrl(50, 0) - (1.0 - 0.288788095066)).abs() < 1e-10);
        for n in [0, 1, 10, 100] {
            for k in n..n + 3 {
                assert_eq!(kfrl(n, k), 0.0);
            }
        }
        let ratio = kfrl(100, 14) / (0.5f64).powi(14);
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn kfrl_lower_bounds_dense_deficiency() {
        for n in 1..60 {
            for k in 0..12 {
                let dense = 1.0 - xi_exact(n, k as i64, 0).unwrap();
                assert!(kfrl(n, k) <= dense + 1e-15, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn kfrl_factor_two_bracket() {
        for n in 6..300 {
            for k in 3..=n / 2 {
                let v = kfrl(n, k);
                assert!(v > (0.5f64).powi(k as i32 + 1) && v < 2.0 * (0.5f64).powi(k as i32));
            }
        }
    }

    #[test]
    fn curve_matches_direct_and_recursion() {
        let c = kfrl_curve(100, 30);
        assert_eq!(c.points.len(), 31);
        for w in c.points.windows(2) {
            assert!(w[1].kfrl < w[0].kfrl);
            // g(k, n) = (1 − 2^{-(k+1)}) g(k+1, n): g grows with k.
            let ratio = w[0].g / w[1].g;
            let expect = 1.0 - (0.5f64).powi(w[1].k as i32);
            assert!((ratio - expect).abs() <= 2.0 * f64::EPSILON);
        }
        for p in &c.points {
            let direct = kfrl(100, p.k);
            assert!(((p.kfrl - direct) / direct).abs() < 1e-12);
            assert!(p.kfrl > 0.0 && p.kfrl < 1.0);
        }
        let first_below = c.points.iter().find(|p| p.kfrl <= 1e-4).unwrap();
        assert_eq!(first_below.k, 14);
        assert_eq!(kfrl_curve(10, 10).points.last().unwrap().kfrl, 0.0);
    }

    #[test]
    fn kfro_examples() {
        let r = kfro(100, 1e-4).unwrap();
        assert_eq!(r.k_k, 14);
        assert!((r.gamma_k - 0.14).abs() < 1e-15);
        assert_eq!(r.k_delta, 14);
        assert!(r.within_upper_bound());
        assert_eq!(r.lt_min_received(), 114);
        assert!(kfrl(100, 13) > 1e-4);

        let at_zero = kfro(100, kfrl(100, 0)).unwrap();
        assert_eq!(at_zero.k_k, 0);
        assert!(kfro(100, 0.0).is_err());
        assert!(kfro(100, 1.0).is_err());
    }

    #[test]
    fn kfro_minimal_and_bounded() {
        for n in [10, 50, 100, 300] {
            for &delta in &[0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9] {
                let r = kfro(n, delta).unwrap();
                assert!(r.within_upper_bound(), "n={n} delta={delta}");
                assert!(kfrl(n, r.k_k) <= delta);
                if r.k_k >= 1 {
                    assert!(kfrl(n, r.k_k - 1) > delta);
                }
            }
        }
    }

    #[test]
    fn ldpc_kfro_matches_example() {
        let r = ldpc_kfro(100, 200, 1e-4).unwrap();
        assert_eq!(r.max_erasures, 86);
        assert!((r.p_k - 0.43).abs() < 1e-12);
        let direct = kfro(86, 1e-4).unwrap();
        assert_eq!(direct.k_k, 14);
        assert!((r.min_received - 114.0).abs() < 1e-9);
    }

    #[test]
    fn k_delta_examples() {
        assert_eq!(k_delta(1e-4).unwrap(), 14);
        assert_eq!(k_delta(0.5).unwrap(), 1);
        assert_eq!(k_delta((0.5f64).powi(7)).unwrap(), 7);
        assert_eq!(k_delta(0.3).unwrap(), 2);
        assert!(k_delta(0.0).is_err());
    }

    #[test]
    fn prop1_closed_form() {
        for k in 1..10 {
            assert!((prop1_probability(10, 5.0, k) - 0.5).abs() < 1e-15);
        }
        assert!((prop1_probability(8, 2.0, 1) - 0.75).abs() < 1e-15);
        assert!((prop1_probability(4, 1.0, 2) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn conversions() {
        assert_eq!(overhead_to_erasure(0.5, 0.0).unwrap(), 0.5);
        let p = overhead_to_erasure(0.5, 0.14).unwrap();
        assert!((p - 0.4386).abs() < 1e-4);
        assert!((erasure_to_overhead(0.5, p).unwrap() - 0.14).abs() < 1e-12);
        assert!(matches!(
            erasure_to_overhead(0.5, 0.6),
            Err(RankTheoryError::DomainError { .. })
        ));
        assert!(overhead_to_erasure(0.5, -0.1).is_err());
        assert!(overhead_to_erasure(1.0, 0.1).is_err());
    }

    #[test]
    fn saturated_limit_is_positive_zero() {
        assert!(kfrl(10, 10).is_sign_positive());
        assert_eq!(kfrl(10, 10), 0.0);
        let last = kfrl_curve(10, 10).points[10];
        assert!(last.kfrl.is_sign_positive());
    }
}
