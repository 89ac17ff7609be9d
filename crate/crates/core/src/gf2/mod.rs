//! Bit-packed linear algebra over GF(2).
//!
//! Rows are packed 64 coordinates per `u64` and all elimination is
//! row-centric: pivots are tracked by bookkeeping rather than by moving
//! columns. Two solvers share one result contract:
//!
//! - [`solve`]: plain Gauss–Jordan elimination, first set bit as pivot.
//! - [`structured_solve`]: peeling with inactivation, then a dense solve
//!   restricted to the inactivated columns.
//!
//! Right-hand sides are [`SymbolBlocks`], i.e. `s` parallel GF(2) systems
//! solved at once; every block XOR on them is counted.

mod matrix;
mod solve;
mod symbols;
mod vector;

use thiserror::Error;

pub use matrix::BitMatrix;
pub use solve::{solve, structured_solve};
pub use symbols::{SymbolBlock, SymbolBlocks, DEFAULT_SYMBOL_BITS};
pub use vector::{mul_row_vector, BitVector, Ones};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("system has {rows} equations but {symbols} right-hand-side symbols")]
    ShapeMismatch { rows: usize, symbols: usize },
    #[error("inconsistent system: rank(H) < rank([H | beta])")]
    InconsistentSystem,
}

/// Where a linear system came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Provenance {
    Lt,
    Ldpc,
    Dense,
}

/// `H Xᵀ = βᵀ` with `H` an `m × n` matrix and `β` a list of `m` symbols.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub h: BitMatrix,
    pub beta: SymbolBlocks,
    pub provenance: Provenance,
}

impl LinearSystem {
    pub fn new(h: BitMatrix, beta: SymbolBlocks, provenance: Provenance) -> Result<Self, Gf2Error> {
        if h.rows() != beta.len() {
            return Err(Gf2Error::ShapeMismatch {
                rows: h.rows(),
                symbols: beta.len(),
            });
        }
        Ok(Self {
            h,
            beta,
            provenance,
        })
    }

    /// Number of equations `m`.
    pub fn equations(&self) -> usize {
        self.h.rows()
    }

    /// Number of unknowns `n`.
    pub fn unknowns(&self) -> usize {
        self.h.cols()
    }

    /// Reception overhead `(m − n) / n`.
    pub fn overhead(&self) -> f64 {
        (self.equations() as f64 - self.unknowns() as f64) / self.unknowns() as f64
    }

    /// Computes `H·xᵀ` symbol-wise for a candidate solution.
    pub fn apply(&self, x: &SymbolBlocks) -> SymbolBlocks {
        assert_eq!(x.len(), self.unknowns());
        let mut out = SymbolBlocks::zeros(x.bits(), self.equations());
        for r in 0..self.equations() {
            for c in self.h.row_ones(r) {
                out.xor_from(r, x, c);
            }
        }
        out
    }

    /// True iff `H·xᵀ = βᵀ` bit for bit.
    pub fn is_solution(&self, x: &SymbolBlocks) -> bool {
        x.len() == self.unknowns() && self.apply(x) == self.beta
    }
}

/// Outcome of eliminating a [`LinearSystem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationResult {
    pub rank: usize,
    /// `dim Ker(H) = n − rank`.
    pub kernel_dim: usize,
    /// Present iff `rank = n` (the system is then uniquely solvable).
    pub solution: Option<SymbolBlocks>,
    /// Symbol-block XORs performed on `β` and derived blocks. Zero for payload-free systems.
    pub symbol_xor_count: u64,
    /// Bit-row XORs performed on coefficient rows.
    pub row_op_count: u64,
    /// Columns deferred to the dense phase (always zero for [`solve`]).
    pub inactivated: usize,
}

impl EliminationResult {
    pub fn is_full_rank(&self) -> bool {
        self.kernel_dim == 0
    }
}
