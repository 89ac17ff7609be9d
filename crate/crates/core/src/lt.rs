//! LT encoding and receiver-side system assembly.
//!
//! Each received row is a uniformly random `d`-subset of the `n` source
//! symbols, with `d` drawn from the row-degree distribution; the receiver
//! sees the row together with the XOR of the selected source symbols.
//! Duplicate rows are not filtered.

use rand::Rng;
use thiserror::Error;

use crate::degree::DegreeDistribution;
use crate::gf2::{
    structured_solve, BitMatrix, BitVector, LinearSystem, Provenance, SymbolBlocks,
    DEFAULT_SYMBOL_BITS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtError {
    #[error("block length must be at least 1")]
    EmptyBlock,
    #[error("degree {degree} exceeds block length {n}")]
    DegreeExceedsBlock { degree: usize, n: usize },
    #[error("expected {expected} source symbols, got {got}")]
    SourceLength { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct LtConfig {
    n: usize,
    symbol_bits: usize,
    dist: DegreeDistribution,
}

impl LtConfig {
    pub fn new(n: usize, dist: DegreeDistribution) -> Result<Self, LtError> {
        if n == 0 {
            return Err(LtError::EmptyBlock);
        }
        if dist.max_degree() > n {
            return Err(LtError::DegreeExceedsBlock {
                degree: dist.max_degree(),
                n,
            });
        }
        Ok(Self {
            n,
            symbol_bits: DEFAULT_SYMBOL_BITS,
            dist,
        })
    }

    pub fn with_symbol_bits(mut self, bits: usize) -> Self {
        self.symbol_bits = bits;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symbol_bits(&self) -> usize {
        self.symbol_bits
    }

    pub fn dist(&self) -> &DegreeDistribution {
        &self.dist
    }
}

/// Draws row supports with a reusable index permutation.
///
/// Partial Fisher–Yates over the scratch array gives an exactly uniform
/// `d`-subset. The array is left permuted between calls; uniformity does not
/// depend on its starting order.
pub struct RowSampler {
    scratch: Vec<u32>,
}

impl RowSampler {
    pub fn new(n: usize) -> Self {
        Self {
            scratch: (0..n as u32).collect(),
        }
    }

    /// A uniformly random `d`-subset of `0..n`, in draw order.
    pub fn support<R: Rng + ?Sized>(&mut self, d: usize, rng: &mut R) -> &[u32] {
        let n = self.scratch.len();
        assert!(d <= n, "degree {d} exceeds {n}");
        for i in 0..d {
            let j = rng.random_range(i..n);
            self.scratch.swap(i, j);
        }
        &self.scratch[..d]
    }
}

/// One received row: degree from the distribution, support uniform.
pub fn generate_row<R: Rng + ?Sized>(cfg: &LtConfig, rng: &mut R) -> BitVector {
    let mut sampler = RowSampler::new(cfg.n);
    let d = cfg.dist.sample_degree(rng);
    let support: Vec<usize> = sampler
        .support(d, rng)
        .iter()
        .map(|&c| c as usize)
        .collect();
    BitVector::from_support(cfg.n, &support)
}

/// Generates `m` rows and the matching syndrome symbols `βᵢ = Hᵢ·αᵀ`.
pub fn encode<R: Rng + ?Sized>(
    cfg: &LtConfig,
    alpha: &SymbolBlocks,
    m: usize,
    rng: &mut R,
) -> Result<LinearSystem, LtError> {
    if alpha.len() != cfg.n {
        return Err(LtError::SourceLength {
            expected: cfg.n,
            got: alpha.len(),
        });
    }
    let mut sampler = RowSampler::new(cfg.n);
    let mut h = BitMatrix::zeros(m, cfg.n);
    let mut beta = SymbolBlocks::zeros(alpha.bits(), m);
    for r in 0..m {
        let d = cfg.dist.sample_degree(rng);
        for &c in sampler.support(d, rng) {
            h.set(r, c as usize);
            beta.xor_from(r, alpha, c as usize);
        }
    }
    Ok(LinearSystem::new(h, beta, Provenance::Lt).expect("shapes agree by construction"))
}

/// What one decoding trial reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub full_rank: bool,
    /// `dim Ker(H)`.
    pub kernel_dim: usize,
    pub symbol_xors: u64,
}

/// Extra rows `k = round(γ n)` for an overhead `γ`.
pub fn extra_rows(gamma: f64, n: usize) -> usize {
    (gamma * n as f64).round().max(0.0) as usize
}

/// One trial with `m = n + k` received rows, decoded by inactivation.
pub fn lt_trial<R: Rng + ?Sized>(cfg: &LtConfig, k: usize, rng: &mut R) -> TrialOutcome {
    let alpha = SymbolBlocks::random(cfg.symbol_bits, cfg.n, rng);
    let sys = encode(cfg, &alpha, cfg.n + k, rng).expect("alpha has n symbols");
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

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::degree;

    fn cfg(n: usize, dist: DegreeDistribution) -> LtConfig {
        LtConfig::new(n, dist).unwrap()
    }

    #[test]
    fn point_mass_at_n_gives_all_ones() {
        let c = cfg(7, DegreeDistribution::point_mass(7, 7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(generate_row(&c, &mut rng), BitVector::ones(7));
    }

    #[test]
    fn rows_have_sampled_weight() {
        let c = cfg(100, degree::mu_bar(100).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let row = generate_row(&c, &mut rng);
            assert!(c.dist().mass(row.weight()) > 0.0);
        }
    }

    #[test]
    fn weight_one_positions_are_uniform() {
        let n = 20;
        let c = cfg(n, DegreeDistribution::point_mass(1, n).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 100_000;
        let mut counts = vec![0f64; n];
        let mut sampler = RowSampler::new(n);
        for _ in 0..draws {
            let d = c.dist().sample_degree(&mut rng);
            counts[sampler.support(d, &mut rng)[0] as usize] += 1.0;
        }
        let expect = draws as f64 / n as f64;
        let chi2: f64 = counts.iter().map(|o| (o - expect).powi(2) / expect).sum();
        // 99.9% quantile of chi-square with 19 degrees of freedom.
        assert!(chi2 < 43.82, "chi2 = {chi2}");
    }

    #[test]
    fn three_subsets_are_equally_likely() {
        let n = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sampler = RowSampler::new(n);
        let mut counts = std::collections::HashMap::new();
        let draws = 240_000;
        for _ in 0..draws {
            let mut s: Vec<u32> = sampler.support(3, &mut rng).to_vec();
            s.sort_unstable();
            *counts.entry(s).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 120);
        let p = 1.0 / 120.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (s, &c) in &counts {
            assert!((c as f64 - mean).abs() < 4.0 * sigma, "{s:?}: {c}");
        }
    }

    #[test]
    fn unit_rows_copy_sources() {
        let c = cfg(5, DegreeDistribution::point_mass(1, 5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let alpha = SymbolBlocks::random(64, 5, &mut rng);
        let sys = encode(&c, &alpha, 12, &mut rng).unwrap();
        for r in 0..12 {
            let j = sys.h.row_ones(r).next().unwrap();
            assert_eq!(sys.beta.block(r), alpha.block(j));
        }
        assert!(sys.is_solution(&alpha));
    }

    #[test]
    fn encode_decode_round_trip() {
        let c = cfg(100, degree::mu_bar(100).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut decoded = 0;
        for _ in 0..50 {
            let alpha = SymbolBlocks::random(64, 100, &mut rng);
            let sys = encode(&c, &alpha, 125, &mut rng).unwrap();
            assert!(sys.is_solution(&alpha));
            let res = crate::gf2::solve(&sys).unwrap();
            if let Some(x) = res.solution {
                assert_eq!(x, alpha);
                decoded += 1;
            }
        }
        assert!(decoded > 40);
    }

    #[test]
    fn identical_all_ones_rows_have_rank_one() {
        let c = cfg(5, DegreeDistribution::point_mass(5, 5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for k in [0, 3] {
            let out = lt_trial(&c, k, &mut rng);
            assert!(!out.full_rank);
            assert_eq!(out.kernel_dim, 4);
        }
    }

    #[test]
    fn trial_kernel_matches_rank_oracle() {
        let c = cfg(40, degree::mu(40).unwrap());
        for t in 0..200u64 {
            let mut a = ChaCha8Rng::seed_from_u64(t);
            let mut b = a.clone();
            let out = lt_trial(&c, 4, &mut a);
            let alpha = SymbolBlocks::random(64, 40, &mut b);
            let sys = encode(&c, &alpha, 44, &mut b).unwrap();
            assert_eq!(out.kernel_dim, sys.h.kernel_dimension());
            assert_eq!(out.full_rank, out.kernel_dim == 0);
        }
    }

    #[test]
    fn huge_overhead_almost_always_decodes() {
        let c = cfg(100, degree::mu_bar(100).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ok = (0..200)
            .filter(|_| lt_trial(&c, 100, &mut rng).full_rank)
            .count();
        assert!(ok >= 199);
    }

    #[test]
    fn config_rejects_bad_shapes() {
        assert_eq!(
            LtConfig::new(0, DegreeDistribution::point_mass(1, 1).unwrap()).unwrap_err(),
            LtError::EmptyBlock
        );
        assert!(matches!(
            LtConfig::new(30, degree::mu(100).unwrap()),
            Err(LtError::DegreeExceedsBlock { degree: 35, n: 30 })
        ));
    }

    #[test]
    fn extra_rows_rounds() {
        assert_eq!(extra_rows(0.14, 100), 14);
        assert_eq!(extra_rows(0.144, 100), 14);
        assert_eq!(extra_rows(0.0, 100), 0);
    }
}
