use super::{BitMatrix, EliminationResult, Gf2Error, LinearSystem, SymbolBlocks};

/// Gauss–Jordan elimination on `[H | β]`, pivoting on the first row with
/// the current column set.
pub fn solve(sys: &LinearSystem) -> Result<EliminationResult, Gf2Error> {
    let (m, n) = (sys.h.rows(), sys.h.cols());
    let mut h = sys.h.clone();
    let mut beta = sys.beta.clone();
    let payload = !beta.is_payload_free();

    let mut pivot_row = vec![usize::MAX; n];
    let mut rank = 0;
    let mut symbol_xor_count = 0u64;
    let mut row_op_count = 0u64;

    for (c, slot) in pivot_row.iter_mut().enumerate() {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| h.get(r, c)) else {
            continue;
        };
        h.swap_rows(p, rank);
        beta.swap(p, rank);
        for r in 0..m {
            if r != rank && h.get(r, c) {
                h.xor_rows(r, rank);
                row_op_count += 1;
                if payload {
                    beta.xor_within(r, rank);
                    symbol_xor_count += 1;
                }
            }
        }
        *slot = rank;
        rank += 1;
    }

    // Rows at or past `rank` are zero in H now.
    if (rank..m).any(|r| !beta.block_is_zero(r)) {
        return Err(Gf2Error::InconsistentSystem);
    }

    let solution = (rank == n).then(|| {
        let mut x = SymbolBlocks::zeros(beta.bits(), n);
        for (c, &r) in pivot_row.iter().enumerate() {
            x.copy_block_from(c, &beta, r);
        }
        x
    });

    Ok(EliminationResult {
        rank,
        kernel_dim: n - rank,
        solution,
        symbol_xor_count,
        row_op_count,
        inactivated: 0,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColumnState {
    Active,
    Peeled,
    Inactive,
}

/// Inactivation decoding.
///
/// 1. Peel: while some unused row has exactly one active column, that row
///    becomes the pivot for the column.
/// 2. When peeling stalls, inactivate the active column appearing in the
///    most unused rows (lowest index on ties) and resume.
/// 3. Express each peeled unknown as a symbol plus a combination of
///    inactive unknowns, reduce the leftover rows onto the inactive
///    columns, and solve that core densely.
/// 4. Back-substitute the inactive values into the peeled unknowns.
///
/// Rank, kernel dimension and solution agree with [`solve`]; only the
/// operation counts differ.
pub fn structured_solve(sys: &LinearSystem) -> Result<EliminationResult, Gf2Error> {
    let h = &sys.h;
    let beta = &sys.beta;
    let (m, n) = (h.rows(), h.cols());
    let payload = !beta.is_payload_free();

    // CSR by rows, CSC by columns.
    let mut row_start = Vec::with_capacity(m + 1);
    let mut row_cols: Vec<u32> = Vec::new();
    let mut col_count = vec![0u32; n];
    for r in 0..m {
        row_start.push(row_cols.len());
        for c in h.row_ones(r) {
            row_cols.push(c as u32);
            col_count[c] += 1;
        }
    }
    row_start.push(row_cols.len());

    let mut col_start = Vec::with_capacity(n + 1);
    let mut acc = 0usize;
    for &k in &col_count {
        col_start.push(acc);
        acc += k as usize;
    }
    col_start.push(acc);
    let mut col_rows = vec![0u32; acc];
    let mut fill = col_start.clone();
    for r in 0..m {
        for &c in &row_cols[row_start[r]..row_start[r + 1]] {
            col_rows[fill[c as usize]] = r as u32;
            fill[c as usize] += 1;
        }
    }

    let mut row_deg: Vec<u32> = (0..m)
        .map(|r| (row_start[r + 1] - row_start[r]) as u32)
        .collect();
    // Number of unused rows containing each column.
    let mut col_deg = col_count;
    let mut row_used = vec![false; m];
    let mut state = vec![ColumnState::Active; n];
    let mut active = n;

    let mut peel_order: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut inactive: Vec<usize> = Vec::new();
    let mut queue: Vec<usize> = (0..m).filter(|&r| row_deg[r] == 1).collect();
    let mut head = 0;

    loop {
        while head < queue.len() {
            let r = queue[head];
            head += 1;
            if row_used[r] || row_deg[r] != 1 {
                continue;
            }
            let cols = &row_cols[row_start[r]..row_start[r + 1]];
            let c = cols
                .iter()
                .map(|&c| c as usize)
                .find(|&c| state[c] == ColumnState::Active)
                .expect("degree-one row has an active column");
            state[c] = ColumnState::Peeled;
            active -= 1;
            row_used[r] = true;
            row_deg[r] = 0;
            peel_order.push((c, r));
            for &cc in cols {
                col_deg[cc as usize] -= 1;
            }
            for &rr in &col_rows[col_start[c]..col_start[c + 1]] {
                let rr = rr as usize;
                if !row_used[rr] {
                    row_deg[rr] -= 1;
                    if row_deg[rr] == 1 {
                        queue.push(rr);
                    }
                }
            }
        }
        if active == 0 {
            break;
        }
        let mut pick = usize::MAX;
        let mut best = 0u32;
        for c in 0..n {
            if state[c] == ColumnState::Active && (pick == usize::MAX || col_deg[c] > best) {
                pick = c;
                best = col_deg[c];
            }
        }
        state[pick] = ColumnState::Inactive;
        inactive.push(pick);
        active -= 1;
        for &rr in &col_rows[col_start[pick]..col_start[pick + 1]] {
            let rr = rr as usize;
            if !row_used[rr] {
                row_deg[rr] -= 1;
                if row_deg[rr] == 1 {
                    queue.push(rr);
                }
            }
        }
    }

    let u = inactive.len();
    let t = peel_order.len();
    // Position of each column in its class: peel index or inactive index.
    let mut slot = vec![0usize; n];
    for (i, &(c, _)) in peel_order.iter().enumerate() {
        slot[c] = i;
    }
    for (j, &c) in inactive.iter().enumerate() {
        slot[c] = j;
    }

    let mut symbol_xor_count = 0u64;
    let mut row_op_count = 0u64;

    // Peeled unknown i = sym[i] + coeff[i]·x_inactive.
    let mut coeff = BitMatrix::zeros(t, u);
    let mut sym = SymbolBlocks::zeros(beta.bits(), t);
    for (i, &(c, r)) in peel_order.iter().enumerate() {
        sym.copy_block_from(i, beta, r);
        for &cc in &row_cols[row_start[r]..row_start[r + 1]] {
            let cc = cc as usize;
            if cc == c {
                continue;
            }
            match state[cc] {
                ColumnState::Peeled => {
                    let j = slot[cc];
                    if u > 0 {
                        coeff.xor_rows(i, j);
                        row_op_count += 1;
                    }
                    if payload {
                        sym.xor_within(i, j);
                        symbol_xor_count += 1;
                    }
                }
                ColumnState::Inactive => coeff.flip(i, slot[cc]),
                ColumnState::Active => unreachable!("no active columns after peeling"),
            }
        }
    }

    // Leftover rows become equations over the inactive unknowns only.
    let core_rows: Vec<usize> = (0..m).filter(|&r| !row_used[r]).collect();
    let mut core = BitMatrix::zeros(core_rows.len(), u);
    let mut rhs = SymbolBlocks::zeros(beta.bits(), core_rows.len());
    for (k, &r) in core_rows.iter().enumerate() {
        rhs.copy_block_from(k, beta, r);
        for &cc in &row_cols[row_start[r]..row_start[r + 1]] {
            let cc = cc as usize;
            match state[cc] {
                ColumnState::Peeled => {
                    let j = slot[cc];
                    if u > 0 {
                        for (x, y) in core.row_words_mut(k).iter_mut().zip(coeff.row_words(j)) {
                            *x ^= y;
                        }
                        row_op_count += 1;
                    }
                    if payload {
                        rhs.xor_from(k, &sym, j);
                        symbol_xor_count += 1;
                    }
                }
                ColumnState::Inactive => core.flip(k, slot[cc]),
                ColumnState::Active => unreachable!("no active columns after peeling"),
            }
        }
    }

    // Dense Gauss–Jordan on the core.
    let rows = core_rows.len();
    let mut pivot_row = vec![usize::MAX; u];
    let mut core_rank = 0;
    for (c, slot) in pivot_row.iter_mut().enumerate() {
        if core_rank == rows {
            break;
        }
        let Some(p) = (core_rank..rows).find(|&r| core.get(r, c)) else {
            continue;
        };
        core.swap_rows(p, core_rank);
        rhs.swap(p, core_rank);
        for r in 0..rows {
            if r != core_rank && core.get(r, c) {
                core.xor_rows(r, core_rank);
                row_op_count += 1;
                if payload {
                    rhs.xor_within(r, core_rank);
                    symbol_xor_count += 1;
                }
            }
        }
        *slot = core_rank;
        core_rank += 1;
    }
    if (core_rank..rows).any(|r| !rhs.block_is_zero(r)) {
        return Err(Gf2Error::InconsistentSystem);
    }

    let rank = t + core_rank;
    let solution = if rank == n {
        let mut x = SymbolBlocks::zeros(beta.bits(), n);
        for (j, &c) in inactive.iter().enumerate() {
            x.copy_block_from(c, &rhs, pivot_row[j]);
        }
        for (i, &(c, _)) in peel_order.iter().enumerate() {
            x.copy_block_from(c, &sym, i);
            if u > 0 {
                for j in coeff.row_ones(i) {
                    if payload {
                        x.xor_from(c, &rhs, pivot_row[j]);
                        symbol_xor_count += 1;
                    }
                }
            }
        }
        Some(x)
    } else {
        None
    };

    Ok(EliminationResult {
        rank,
        kernel_dim: n - rank,
        solution,
        symbol_xor_count,
        row_op_count,
        inactivated: u,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::gf2::{Provenance, SymbolBlock};

    fn system(h: BitMatrix, beta: SymbolBlocks) -> LinearSystem {
        LinearSystem::new(h, beta, Provenance::Dense).unwrap()
    }

    fn encode(h: &BitMatrix, x: &SymbolBlocks) -> SymbolBlocks {
        let sys = system(h.clone(), SymbolBlocks::zeros(x.bits(), h.rows()));
        sys.apply(x)
    }

    #[test]
    fn identity_returns_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = SymbolBlocks::random(64, 3, &mut rng);
        let sys = system(BitMatrix::identity(3), b.clone());
        for res in [solve(&sys).unwrap(), structured_solve(&sys).unwrap()] {
            assert_eq!(res.rank, 3);
            assert_eq!(res.solution.as_ref(), Some(&b));
        }
    }

    #[test]
    fn upper_triangular_back_substitution() {
        let a = SymbolBlock::from_bytes(16, &[0x34, 0x12]);
        let b = SymbolBlock::from_bytes(16, &[0xcd, 0xab]);
        let mut ab = a.clone();
        ab.xor_assign(&b);
        let h = BitMatrix::from_dense(&[&[1, 1], &[0, 1]]).unwrap();
        let sys = system(h, SymbolBlocks::from_blocks(16, &[ab, b.clone()]));
        let expect = SymbolBlocks::from_blocks(16, &[a, b]);
        assert_eq!(solve(&sys).unwrap().solution, Some(expect.clone()));
        assert_eq!(structured_solve(&sys).unwrap().solution, Some(expect));
    }

    #[test]
    fn random_full_rank_five_by_four_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 50 {
            let h = BitMatrix::random(5, 4, &mut rng);
            if h.rank() < 4 {
                continue;
            }
            let alpha = SymbolBlocks::random(64, 4, &mut rng);
            let sys = system(h.clone(), encode(&h, &alpha));
            assert_eq!(solve(&sys).unwrap().solution, Some(alpha.clone()));
            assert_eq!(structured_solve(&sys).unwrap().solution, Some(alpha));
            checked += 1;
        }
    }

    #[test]
    fn rank_deficient_has_no_solution() {
        let h = BitMatrix::from_dense(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 1]]).unwrap();
        let sys = system(h, SymbolBlocks::zeros(8, 3));
        for res in [solve(&sys).unwrap(), structured_solve(&sys).unwrap()] {
            assert_eq!(res.rank, 2);
            assert_eq!(res.kernel_dim, 1);
            assert!(res.solution.is_none());
        }
    }

    #[test]
    fn inconsistent_is_rejected() {
        let h = BitMatrix::from_dense(&[&[1, 0], &[1, 0], &[0, 1]]).unwrap();
        let beta = SymbolBlocks::from_blocks(
            8,
            &[
                SymbolBlock::from_bytes(8, &[1]),
                SymbolBlock::from_bytes(8, &[2]),
                SymbolBlock::from_bytes(8, &[0]),
            ],
        );
        let sys = system(h, beta);
        assert_eq!(solve(&sys).unwrap_err(), Gf2Error::InconsistentSystem);
        assert_eq!(
            structured_solve(&sys).unwrap_err(),
            Gf2Error::InconsistentSystem
        );
    }

    #[test]
    fn lower_triangular_needs_no_inactivation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 5, 40, 130] {
            let mut h = BitMatrix::identity(n);
            for r in 0..n {
                for c in 0..r {
                    if rng.random_bool(0.3) {
                        h.set(r, c);
                    }
                }
            }
            let nnz: usize = (0..n).map(|r| h.row_weight(r)).sum();
            let alpha = SymbolBlocks::random(64, n, &mut rng);
            let sys = system(h.clone(), encode(&h, &alpha));
            let res = structured_solve(&sys).unwrap();
            assert_eq!(res.inactivated, 0);
            assert!(res.symbol_xor_count <= (nnz - n) as u64);
            assert_eq!(res.solution, Some(alpha));
        }
    }

    #[test]
    fn payload_free_counts_no_symbol_xors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = BitMatrix::random(30, 25, &mut rng);
        let sys = system(h, SymbolBlocks::zeros(0, 30));
        for res in [solve(&sys).unwrap(), structured_solve(&sys).unwrap()] {
            assert_eq!(res.symbol_xor_count, 0);
            assert_eq!(res.solution.is_some(), res.rank == 25);
        }
    }

    #[test]
    fn empty_system_is_trivially_solved() {
        let sys = system(BitMatrix::zeros(4, 0), SymbolBlocks::zeros(64, 4));
        for res in [solve(&sys).unwrap(), structured_solve(&sys).unwrap()] {
            assert_eq!(res.rank, 0);
            assert_eq!(res.kernel_dim, 0);
            assert_eq!(res.solution.map(|s| s.len()), Some(0));
        }
    }

    #[test]
    fn solvers_agree_on_random_sparse_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let n = rng.random_range(1..=200);
            let m = n + rng.random_range(0..=n / 4 + 2) - rng.random_range(0..=2).min(n);
            let density = rng.random_range(1.0..6.0) / n as f64;
            let mut h = BitMatrix::zeros(m, n);
            for r in 0..m {
                for c in 0..n {
                    if rng.random_bool(density.min(1.0)) {
                        h.set(r, c);
                    }
                }
            }
            let alpha = SymbolBlocks::random(64, n, &mut rng);
            let sys = system(h.clone(), encode(&h, &alpha));
            let a = solve(&sys).unwrap();
            let b = structured_solve(&sys).unwrap();
            assert_eq!(a.rank, b.rank);
            assert_eq!(a.kernel_dim, b.kernel_dim);
            assert_eq!(a.solution, b.solution);
            assert_eq!(a.rank, h.rank());
            if let Some(x) = &b.solution {
                assert!(sys.is_solution(x));
                assert_eq!(x, &alpha);
            }
        }
    }
}
