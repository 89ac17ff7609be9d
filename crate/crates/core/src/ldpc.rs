//! LDPC check matrices over the erasure channel.
//!
//! Matrices are grown with progressive edge growth (PEG) from per-column
//! target degrees, optionally topped up with dense random rows. A trial
//! erases a fixed-size uniformly random set of coordinates from a random
//! codeword and hands the resulting system `H Xᵀ = H̄ ᾱᵀ` to the decoder.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::degree::DegreeDistribution;
use crate::gf2::{
    structured_solve, BitMatrix, LinearSystem, Provenance, SymbolBlocks, DEFAULT_SYMBOL_BITS,
};
use crate::lt::{RowSampler, TrialOutcome};

#[derive(Debug, Error)]
pub enum LdpcError {
    #[error("column {column} wants degree {degree} but there are only {checks} check rows")]
    InfeasibleDegrees {
        column: usize,
        degree: usize,
        checks: usize,
    },
    #[error("invalid LDPC configuration: {0}")]
    InvalidConfig(String),
    #[error("codeword is not in the kernel of the check matrix")]
    KernelViolation,
    #[error("codeword has {got} symbols, code length is {expected}")]
    CodewordLength { expected: usize, got: usize },
    #[error("cannot erase {erased} of {length} coordinates")]
    TooManyErasures { erased: usize, length: usize },
    #[error("malformed check-matrix text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("reading check matrix: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct LdpcConfig {
    /// Code length `N`.
    pub length: usize,
    /// Total check rows `m`, dense rows included.
    pub checks: usize,
    pub col_dist: DegreeDistribution,
    pub dense_rows: usize,
    pub dense_degree: usize,
    /// Seeds the column-degree draws and the dense rows.
    pub seed: u64,
}

impl LdpcConfig {
    /// The `m × N` half-rate matrix with column degrees from `ρ`, all rows PEG-grown.
    pub fn table_m(seed: u64) -> Result<Self, LdpcError> {
        Self::table(0, seed)
    }

    /// 85 PEG-grown rows plus 15 random rows of degree 100.
    pub fn table_m_bar(seed: u64) -> Result<Self, LdpcError> {
        Self::table(15, seed)
    }

    fn table(dense_rows: usize, seed: u64) -> Result<Self, LdpcError> {
        Ok(Self {
            length: 200,
            checks: 100,
            col_dist: crate::degree::rho(100)
                .map_err(|e| LdpcError::InvalidConfig(e.to_string()))?,
            dense_rows,
            dense_degree: 100,
            seed,
        })
    }

    /// Builds the matrix from the configured seed.
    pub fn build(&self) -> Result<CheckMatrix, LdpcError> {
        build_check_matrix(self, &mut crate::rng::stream(self.seed))
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.checks as f64 / self.length as f64
    }

    fn validate(&self) -> Result<(), LdpcError> {
        if self.checks >= self.length {
            return Err(LdpcError::InvalidConfig(format!(
                "checks {} must be below length {}",
                self.checks, self.length
            )));
        }
        if self.dense_rows > self.checks {
            return Err(LdpcError::InvalidConfig(format!(
                "dense rows {} exceed checks {}",
                self.dense_rows, self.checks
            )));
        }
        if self.dense_rows > 0 && self.dense_degree > self.length {
            return Err(LdpcError::InvalidConfig(format!(
                "dense degree {} exceeds length {}",
                self.dense_degree, self.length
            )));
        }
        Ok(())
    }
}

/// A parity-check matrix `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckMatrix {
    pub m: BitMatrix,
    /// Shortest cycle length in the Tanner graph, if it was measured.
    pub girth_hint: Option<usize>,
}

impl CheckMatrix {
    pub fn new(m: BitMatrix) -> Self {
        Self {
            m,
            girth_hint: None,
        }
    }

    pub fn checks(&self) -> usize {
        self.m.rows()
    }

    pub fn length(&self) -> usize {
        self.m.cols()
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.checks() as f64 / self.length() as f64
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.length()];
        for r in 0..self.checks() {
            for c in self.m.row_ones(r) {
                deg[c] += 1;
            }
        }
        deg
    }

    /// Text form: a `"m n"` header, then one line per row listing its
    /// column indices in ascending order, space separated.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.checks(), self.length());
        for r in 0..self.checks() {
            let mut first = true;
            for c in self.m.row_ones(r) {
                if !first {
                    out.push(' ');
                }
                write!(out, "{c}").expect("writing to a String");
                first = false;
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LdpcError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(LdpcError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| LdpcError::Parse {
                line: 1,
                msg: format!("{e}"),
            })?;
        let [rows, cols] = dims[..] else {
            return Err(LdpcError::Parse {
                line: 1,
                msg: "header must be \"m n\"".into(),
            });
        };
        let mut m = BitMatrix::zeros(rows, cols);
        let mut seen = 0;
        for (i, line) in lines.enumerate() {
            if i >= rows {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(LdpcError::Parse {
                    line: i + 2,
                    msg: format!("more than {rows} rows"),
                });
            }
            for tok in line.split_whitespace() {
                let c: usize = tok.parse().map_err(|e| LdpcError::Parse {
                    line: i + 2,
                    msg: format!("{e}"),
                })?;
                if c >= cols {
                    return Err(LdpcError::Parse {
                        line: i + 2,
                        msg: format!("column {c} out of range"),
                    });
                }
                if m.get(i, c) {
                    return Err(LdpcError::Parse {
                        line: i + 2,
                        msg: format!("column {c} repeated"),
                    });
                }
                m.set(i, c);
            }
            seen += 1;
        }
        if seen < rows {
            return Err(LdpcError::Parse {
                line: seen + 2,
                msg: format!("expected {rows} rows, found {seen}"),
            });
        }
        Ok(Self::new(m))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LdpcError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LdpcError> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    /// Length of the shortest cycle in the Tanner graph (`None` if acyclic).
    pub fn girth(&self) -> Option<usize> {
        let (checks, vars) = (self.checks(), self.length());
        let mut var_adj = vec![Vec::new(); vars];
        let mut check_adj = vec![Vec::new(); checks];
        for (r, adj) in check_adj.iter_mut().enumerate() {
            for c in self.m.row_ones(r) {
                var_adj[c].push(r);
                adj.push(c);
            }
        }
        // Nodes 0..vars are variables, vars.. are checks.
        let neighbours = |v: usize| -> Vec<usize> {
            if v < vars {
                var_adj[v].iter().map(|&c| vars + c).collect()
            } else {
                check_adj[v - vars].clone()
            }
        };
        let total = vars + checks;
        let mut best: Option<usize> = None;
        for root in 0..vars {
            let mut dist = vec![usize::MAX; total];
            let mut parent = vec![usize::MAX; total];
            dist[root] = 0;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                if best.is_some_and(|b| 2 * dist[v] + 1 >= b) {
                    break;
                }
                for w in neighbours(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let cycle = dist[v] + dist[w] + 1;
                        best = Some(best.map_or(cycle, |b| b.min(cycle)));
                    }
                }
            }
        }
        best
    }
}

/// Draws one target degree per column from `dist`.
pub fn sample_column_degrees<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    length: usize,
    rng: &mut R,
) -> Vec<usize> {
    (0..length).map(|_| dist.sample_degree(rng)).collect()
}

/// Progressive edge growth for the given column degrees.
///
/// Columns are processed in index order and their edges placed one at a
/// time. The first edge goes to a check of minimum current degree. Every
/// later edge expands the column's Tanner subtree breadth-first: if some
/// checks stay unreachable the choice is among them, otherwise among the
/// checks first reached at the deepest level. Ties go to the lowest
/// current degree, then the lowest index.
pub fn peg_construct(checks: usize, col_degrees: &[usize]) -> Result<CheckMatrix, LdpcError> {
    for (column, &degree) in col_degrees.iter().enumerate() {
        if degree > checks {
            return Err(LdpcError::InfeasibleDegrees {
                column,
                degree,
                checks,
            });
        }
    }
    let vars = col_degrees.len();
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); vars];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); checks];
    let mut reached = vec![false; checks];
    let mut var_seen = vec![false; vars];

    for (j, &degree) in col_degrees.iter().enumerate() {
        for _ in 0..degree {
            reached.iter_mut().for_each(|r| *r = false);
            var_seen.iter_mut().for_each(|s| *s = false);
            var_seen[j] = true;
            let mut reached_count = 0;
            let mut frontier = vec![j];
            let pick = loop {
                let mut new_checks = Vec::new();
                for &v in &frontier {
                    for &c in &var_adj[v] {
                        if !reached[c] {
                            reached[c] = true;
                            new_checks.push(c);
                        }
                    }
                }
                if new_checks.is_empty() {
                    break (0..checks)
                        .filter(|&c| !reached[c])
                        .min_by_key(|&c| (check_adj[c].len(), c))
                        .expect("column degree below check count");
                }
                reached_count += new_checks.len();
                if reached_count == checks {
                    break new_checks
                        .iter()
                        .copied()
                        .min_by_key(|&c| (check_adj[c].len(), c))
                        .expect("non-empty level");
                }
                frontier.clear();
                for &c in &new_checks {
                    for &v in &check_adj[c] {
                        if !var_seen[v] {
                            var_seen[v] = true;
                            frontier.push(v);
                        }
                    }
                }
            };
            var_adj[j].push(pick);
            check_adj[pick].push(j);
        }
    }

    let mut m = BitMatrix::zeros(checks, vars);
    for (j, adj) in var_adj.iter().enumerate() {
        for &c in adj {
            m.set(c, j);
        }
    }
    Ok(CheckMatrix::new(m))
}

/// Appends `count` rows, each a uniformly random `degree`-subset of the columns.
pub fn supplement_dense_rows<R: Rng + ?Sized>(
    base: &CheckMatrix,
    count: usize,
    degree: usize,
    rng: &mut R,
) -> CheckMatrix {
    let mut m = base.m.clone();
    let mut sampler = RowSampler::new(base.length());
    for _ in 0..count {
        let support: Vec<usize> = sampler
            .support(degree, rng)
            .iter()
            .map(|&c| c as usize)
            .collect();
        m.push_support(&support);
    }
    CheckMatrix::new(m)
}

/// PEG base of `checks − dense_rows` rows with sampled column degrees, then
/// the dense rows.
pub fn build_check_matrix<R: Rng + ?Sized>(
    cfg: &LdpcConfig,
    rng: &mut R,
) -> Result<CheckMatrix, LdpcError> {
    cfg.validate()?;
    let base_rows = cfg.checks - cfg.dense_rows;
    let degrees = sample_column_degrees(&cfg.col_dist, cfg.length, rng);
    let base = peg_construct(base_rows, &degrees)?;
    Ok(supplement_dense_rows(
        &base,
        cfg.dense_rows,
        cfg.dense_degree,
        rng,
    ))
}

/// A check matrix with a precomputed kernel basis, shared read-only by trials.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    matrix: CheckMatrix,
    basis_supports: Vec<Vec<u32>>,
    row_supports: Vec<Vec<u32>>,
    symbol_bits: usize,
}

impl LdpcCode {
    pub fn new(matrix: CheckMatrix) -> Self {
        let basis_supports = matrix
            .m
            .kernel_basis()
            .iter()
            .map(|v| v.iter_ones().map(|c| c as u32).collect())
            .collect();
        let row_supports = (0..matrix.checks())
            .map(|r| matrix.m.row_ones(r).map(|c| c as u32).collect())
            .collect();
        Self {
            matrix,
            basis_supports,
            row_supports,
            symbol_bits: DEFAULT_SYMBOL_BITS,
        }
    }

    pub fn with_symbol_bits(mut self, bits: usize) -> Self {
        self.symbol_bits = bits;
        self
    }

    pub fn matrix(&self) -> &CheckMatrix {
        &self.matrix
    }

    pub fn symbol_bits(&self) -> usize {
        self.symbol_bits
    }

    pub fn kernel_dimension(&self) -> usize {
        self.basis_supports.len()
    }

    /// A random element of `Ker(M)` in every bit plane independently: each
    /// basis vector is scaled by a random symbol and the results summed.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> SymbolBlocks {
        let mut alpha = SymbolBlocks::zeros(self.symbol_bits, self.matrix.length());
        let coeff = SymbolBlocks::random(self.symbol_bits, self.basis_supports.len(), rng);
        for (b, support) in self.basis_supports.iter().enumerate() {
            for &c in support {
                alpha.xor_from(c as usize, &coeff, b);
            }
        }
        alpha
    }

    /// Erases a uniformly random set of exactly `erased` coordinates of
    /// `alpha` and builds `H Xᵀ = βᵀ` over them, `H` keeping the erased
    /// columns in ascending order and `β = H̄ ᾱᵀ`.
    ///
    /// Returns the system and the sorted erased positions.
    pub fn erase_and_build<R: Rng + ?Sized>(
        &self,
        alpha: &SymbolBlocks,
        erased: usize,
        rng: &mut R,
    ) -> Result<(LinearSystem, Vec<usize>), LdpcError> {
        let length = self.matrix.length();
        if alpha.len() != length {
            return Err(LdpcError::CodewordLength {
                expected: length,
                got: alpha.len(),
            });
        }
        if erased > length {
            return Err(LdpcError::TooManyErasures { erased, length });
        }
        let mut positions: Vec<usize> = RowSampler::new(length)
            .support(erased, rng)
            .iter()
            .map(|&c| c as usize)
            .collect();
        positions.sort_unstable();
        let mut slot = vec![usize::MAX; length];
        for (i, &c) in positions.iter().enumerate() {
            slot[c] = i;
        }

        let checks = self.matrix.checks();
        let mut h = BitMatrix::zeros(checks, erased);
        let mut beta = SymbolBlocks::zeros(alpha.bits(), checks);
        let mut hidden = SymbolBlocks::zeros(alpha.bits(), 1);
        for (r, support) in self.row_supports.iter().enumerate() {
            hidden.block_mut(0).fill(0);
            for &c in support {
                let c = c as usize;
                if slot[c] == usize::MAX {
                    beta.xor_from(r, alpha, c);
                } else {
                    h.set(r, slot[c]);
                    hidden.xor_from(0, alpha, c);
                }
            }
            if beta.block(r) != hidden.block(0) {
                return Err(LdpcError::KernelViolation);
            }
        }
        let sys =
            LinearSystem::new(h, beta, Provenance::Ldpc).expect("shapes agree by construction");
        Ok((sys, positions))
    }
}

/// One erased-codeword trial with exactly `erased` unknowns.
pub fn ldpc_trial<R: Rng + ?Sized>(code: &LdpcCode, erased: usize, rng: &mut R) -> TrialOutcome {
    let alpha = code.random_codeword(rng);
    let (sys, positions) = code
        .erase_and_build(&alpha, erased, rng)
        .expect("codeword drawn from the kernel");
    let res = structured_solve(&sys).expect("erased systems are consistent");
    if let Some(x) = &res.solution {
        for (i, &c) in positions.iter().enumerate() {
            assert_eq!(
                x.block(i),
                alpha.block(c),
                "decoder returned a wrong solution"
            );
        }
    }
    TrialOutcome {
        full_rank: res.is_full_rank(),
        kernel_dim: res.kernel_dim,
        symbol_xors: res.symbol_xor_count,
    }
}

/// Erased count `n = round(p N)`.
pub fn erased_count(p: f64, length: usize) -> usize {
    (p * length as f64).round().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::degree;

    fn table_code(dense_rows: usize, seed: u64) -> CheckMatrix {
        let cfg = if dense_rows == 0 {
            LdpcConfig::table_m(seed)
        } else {
            LdpcConfig::table_m_bar(seed)
        };
        let cfg = cfg.unwrap();
        assert_eq!(cfg.dense_rows, dense_rows);
        cfg.build().unwrap()
    }

    #[test]
    fn degree_one_columns_balance_checks() {
        let m = peg_construct(2, &[1, 1, 1, 1]).unwrap();
        assert_eq!(m.column_degrees(), vec![1; 4]);
        assert_eq!(m.m.row_weight(0), 2);
        assert_eq!(m.m.row_weight(1), 2);
    }

    #[test]
    fn infeasible_degree() {
        assert!(matches!(
            peg_construct(3, &[2, 4]),
            Err(LdpcError::InfeasibleDegrees {
                column: 1,
                degree: 4,
                checks: 3
            })
        ));
    }

    #[test]
    fn peg_audit_on_table_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let degrees = sample_column_degrees(&degree::rho(100).unwrap(), 200, &mut rng);
        let m = peg_construct(100, &degrees).unwrap();
        assert_eq!(m.column_degrees(), degrees);
        assert!(degrees.iter().all(|&d| d > 0));
        assert_eq!(m.girth() == Some(4), has_four_cycle(&m));
    }

    fn has_four_cycle(m: &CheckMatrix) -> bool {
        let rows: Vec<Vec<bool>> = (0..m.checks())
            .map(|r| (0..m.length()).map(|c| m.m.get(r, c)).collect())
            .collect();
        (0..m.length())
            .any(|a| (a + 1..m.length()).any(|b| rows.iter().filter(|r| r[a] && r[b]).count() >= 2))
    }

    #[test]
    fn sparse_regular_peg_has_no_four_cycles() {
        let m = peg_construct(50, &[3; 100]).unwrap();
        assert!(!has_four_cycle(&m));
        assert!(m.girth().unwrap() >= 6);
        let weights: Vec<usize> = (0..50).map(|r| m.m.row_weight(r)).collect();
        assert!(weights.iter().all(|&w| (5..=7).contains(&w)), "{weights:?}");
    }

    #[test]
    fn girth_of_small_graphs() {
        let four = CheckMatrix::new(BitMatrix::from_dense(&[&[1, 1], &[1, 1]]).unwrap());
        assert_eq!(four.girth(), Some(4));
        let six =
            CheckMatrix::new(BitMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]).unwrap());
        assert_eq!(six.girth(), Some(6));
        let tree = CheckMatrix::new(BitMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1]]).unwrap());
        assert_eq!(tree.girth(), None);
    }

    #[test]
    fn dense_supplement_shapes() {
        let base = table_code(15, 3);
        assert_eq!((base.checks(), base.length()), (100, 200));
        for r in 85..100 {
            assert_eq!(base.m.row_weight(r), 100);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(supplement_dense_rows(&base, 0, 100, &mut rng), base);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let m = table_code(15, 5);
        assert_eq!(CheckMatrix::from_text(&m.to_text()).unwrap(), m);
        assert!(CheckMatrix::from_text("").is_err());
        assert!(CheckMatrix::from_text("2 3\n0 1\n").is_err());
        assert!(CheckMatrix::from_text("1 3\n0 3\n").is_err());
        assert!(CheckMatrix::from_text("1 3\n0 0\n").is_err());
        let tiny = CheckMatrix::from_text("2 3\n0 2\n\n").unwrap();
        assert_eq!(tiny.m.row_weight(1), 0);
    }

    #[test]
    fn codewords_lie_in_kernel() {
        let code = LdpcCode::new(table_code(15, 7));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alpha = code.random_codeword(&mut rng);
        for plane in [0, 17, 63] {
            let bits = alpha.plane(plane);
            assert!(code.matrix().m.mul_vector(&bits).unwrap().is_zero());
        }
        let sys = code.erase_and_build(&alpha, 80, &mut rng).unwrap().0;
        assert_eq!(sys.unknowns(), 80);
    }

    #[test]
    fn kernel_violation_detected() {
        let code = LdpcCode::new(table_code(0, 9));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut alpha = code.random_codeword(&mut rng);
        alpha.block_mut(3)[0] ^= 1;
        assert!(matches!(
            code.erase_and_build(&alpha, 10, &mut rng),
            Err(LdpcError::KernelViolation)
        ));
    }

    #[test]
    fn no_erasures_is_trivially_decoded() {
        let code = LdpcCode::new(table_code(0, 10));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let out = ldpc_trial(&code, 0, &mut rng);
        assert!(out.full_rank);
        assert_eq!(out.symbol_xors, 0);
    }

    #[test]
    fn zero_codeword_gives_zero_syndrome() {
        let code = LdpcCode::new(table_code(15, 11));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alpha = SymbolBlocks::zeros(64, 200);
        let (sys, _) = code.erase_and_build(&alpha, 70, &mut rng).unwrap();
        assert!((0..sys.equations()).all(|r| sys.beta.block_is_zero(r)));
        let res = structured_solve(&sys).unwrap();
        if let Some(x) = res.solution {
            assert!((0..70).all(|i| x.block_is_zero(i)));
        }
    }

    #[test]
    fn erased_round_trip_recovers_symbols() {
        let code = LdpcCode::new(table_code(15, 12));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut recovered = 0;
        for _ in 0..100 {
            let alpha = code.random_codeword(&mut rng);
            let (sys, positions) = code.erase_and_build(&alpha, 80, &mut rng).unwrap();
            let truth = {
                let mut x = SymbolBlocks::zeros(64, positions.len());
                for (i, &c) in positions.iter().enumerate() {
                    x.copy_block_from(i, &alpha, c);
                }
                x
            };
            assert!(sys.is_solution(&truth));
            let res = structured_solve(&sys).unwrap();
            assert_eq!(res.solution.is_some(), sys.h.rank() == 80);
            if let Some(x) = res.solution {
                assert_eq!(x, truth);
                recovered += 1;
            }
        }
        assert!(recovered > 50, "{recovered}");
    }

    #[test]
    fn single_erasure_always_decodes() {
        let code = LdpcCode::new(table_code(0, 13));
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        assert!((0..300).all(|_| ldpc_trial(&code, 1, &mut rng).full_rank));
    }

    #[test]
    fn more_unknowns_than_checks_always_fail() {
        let code = LdpcCode::new(table_code(15, 14));
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        assert!((0..50).all(|_| !ldpc_trial(&code, 101, &mut rng).full_rank));
    }
}
