use std::path::Path;

use kovalenko::gf2::{solve, structured_solve, BitMatrix, LinearSystem, Provenance, SymbolBlocks};
use kovalenko::ldpc::{CheckMatrix, LdpcConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Rank over u64 row masks, independent of the packed elimination.
fn mask_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    while let Some(pivot) = rows.iter().copied().find(|&r| r != 0) {
        let low = pivot & pivot.wrapping_neg();
        rows = rows
            .into_iter()
            .filter(|&r| r != pivot)
            .map(|r| if r & low != 0 { r ^ pivot } else { r })
            .filter(|&r| r != 0)
            .collect();
        rank += 1;
    }
    rank
}

fn from_masks(rows: &[u64], cols: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows.len(), cols);
    for (r, &mask) in rows.iter().enumerate() {
        for c in 0..cols {
            if mask >> c & 1 == 1 {
                m.set(r, c);
            }
        }
    }
    m
}

fn matrix() -> impl Strategy<Value = (Vec<u64>, usize)> {
    (1usize..=12, 1usize..=12)
        .prop_flat_map(|(rows, cols)| (prop::collection::vec(0u64..1 << cols, rows), Just(cols)))
}

proptest! {
    #[test]
    fn rank_matches_mask_oracle((rows, cols) in matrix()) {
        let m = from_masks(&rows, cols);
        let rank = m.rank();
        prop_assert_eq!(rank, mask_rank(rows.clone()));
        prop_assert_eq!(m.transpose().rank(), rank);
        prop_assert_eq!(m.kernel_dimension(), cols - rank);
    }

    #[test]
    fn row_operations_keep_rank((rows, cols) in matrix(), ops in prop::collection::vec((0usize..12, 0usize..12), 0..20)) {
        let mut m = from_masks(&rows, cols);
        let rank = m.rank();
        for (a, b) in ops {
            let (a, b) = (a % rows.len(), b % rows.len());
            if a != b {
                m.xor_rows(a, b);
            }
            m.swap_rows(a, b);
        }
        prop_assert_eq!(m.rank(), rank);
    }

    #[test]
    fn kernel_basis_spans_the_kernel((rows, cols) in matrix()) {
        let m = from_masks(&rows, cols);
        let basis = m.kernel_basis();
        prop_assert_eq!(basis.len(), m.kernel_dimension());
        for v in &basis {
            prop_assert!(m.mul_vector(v).unwrap().is_zero());
        }
        let stacked = BitMatrix::from_rows(cols, &basis).unwrap();
        prop_assert_eq!(stacked.rank(), basis.len());
    }

    #[test]
    fn decoders_agree(seed in any::<u64>(), n in 1usize..40, extra in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = BitMatrix::random(n + extra, n, &mut rng);
        let alpha = SymbolBlocks::random(16, n, &mut rng);
        let beta = LinearSystem::new(h.clone(), SymbolBlocks::zeros(16, n + extra), Provenance::Dense)
            .unwrap()
            .apply(&alpha);
        let sys = LinearSystem::new(h, beta, Provenance::Dense).unwrap();
        let plain = solve(&sys).unwrap();
        let fast = structured_solve(&sys).unwrap();
        prop_assert_eq!(plain.kernel_dim, fast.kernel_dim);
        prop_assert_eq!(plain.is_full_rank(), fast.is_full_rank());
        if let Some(x) = fast.solution {
            prop_assert_eq!(x, alpha);
        }
    }
}

#[test]
fn table_matrices_match_fixtures() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for (cfg, name) in [
        (LdpcConfig::table_m(1).unwrap(), "m.pchk"),
        (LdpcConfig::table_m_bar(1).unwrap(), "m_bar.pchk"),
    ] {
        let built = cfg.build().unwrap();
        let stored = CheckMatrix::load(dir.join(name)).unwrap();
        assert_eq!(built.to_text(), stored.to_text(), "{name}");
        assert_eq!((stored.checks(), stored.length()), (100, 200));
    }
}
