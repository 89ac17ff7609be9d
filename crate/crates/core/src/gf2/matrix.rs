use std::fmt;

use rand::Rng;

use super::vector::{tail_mask, words_for, Ones, WORD_BITS};
use super::{BitVector, Gf2Error};

/// Row-major bit-packed matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    /// Uniform random matrix: every entry is an independent fair bit.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let mask = tail_mask(cols);
        for r in 0..rows {
            let row = m.row_words_mut(r);
            for w in row.iter_mut() {
                *w = rng.random();
            }
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(0, cols);
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    /// Builds a matrix from 0/1 rows; any nonzero byte is a one.
    pub fn from_dense(rows: &[&[u8]]) -> Result<Self, Gf2Error> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Gf2Error::LengthMismatch {
                    left: cols,
                    right: r.len(),
                });
            }
            for (j, &b) in r.iter().enumerate() {
                if b != 0 {
                    m.set(i, j);
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of range");
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of range");
        self.data[r * self.stride + c / WORD_BITS] |= 1 << (c % WORD_BITS);
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of range");
        self.data[r * self.stride + c / WORD_BITS] ^= 1 << (c % WORD_BITS);
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_ones(&self, r: usize) -> Ones<'_> {
        Ones::new(self.row_words(r))
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    pub fn push_row(&mut self, row: &BitVector) -> Result<(), Gf2Error> {
        if row.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                left: self.cols,
                right: row.len(),
            });
        }
        self.data.extend_from_slice(row.words());
        self.rows += 1;
        Ok(())
    }

    /// Appends a row given by its support. Indices must be distinct and in range.
    pub fn push_support(&mut self, support: &[usize]) {
        let start = self.data.len();
        self.data.resize(start + self.stride, 0);
        self.rows += 1;
        let r = self.rows - 1;
        for &c in support {
            self.flip(r, c);
        }
    }

    /// `row[dst] ^= row[src]`.
    #[inline(always)]
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        if s == 1 {
            let y = self.data[src];
            self.data[dst] ^= y;
            return;
        }
        let (d, sr) = (dst * s, src * s);
        for w in 0..s {
            let y = self.data[sr + w];
            self.data[d + w] ^= y;
        }
    }

    #[inline]
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        let (lo, hi) = (a.min(b), a.max(b));
        let (x, y) = self.data.split_at_mut(hi * s);
        x[lo * s..(lo + 1) * s].swap_with_slice(&mut y[..s]);
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                t.set(c, r);
            }
        }
        t
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            let row = self.row_words(r);
            for (j, &c) in cols.iter().enumerate() {
                if (row[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1 {
                    out.set(r, j);
                }
            }
        }
        out
    }

    /// `M·vᵀ` as a column vector of length `rows`.
    pub fn mul_vector(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                left: self.cols,
                right: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity: u32 = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if parity % 2 == 1 {
                out.set(r);
            }
        }
        Ok(out)
    }

    /// Dimension of the row space, by forward elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (w, bit) = (c / WORD_BITS, 1u64 << (c % WORD_BITS));
            let Some(p) = (rank..self.rows).find(|&r| m.data[r * m.stride + w] & bit != 0) else {
                continue;
            };
            m.swap_rows(p, rank);
            for r in rank + 1..self.rows {
                if m.data[r * m.stride + w] & bit != 0 {
                    m.xor_rows(r, rank);
                }
            }
            rank += 1;
        }
        rank
    }

    /// `cols − rank`: dimension of the right kernel `{x : M xᵀ = 0}`.
    pub fn kernel_dimension(&self) -> usize {
        self.cols - self.rank()
    }

    /// Basis of the right kernel, one vector per free column of the reduced
    /// row-echelon form.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let mut m = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut is_pivot = vec![false; self.cols];
        let mut r = 0;
        for (c, pivot) in is_pivot.iter_mut().enumerate() {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(p, r);
            for i in 0..self.rows {
                if i != r && m.get(i, c) {
                    m.xor_rows(i, r);
                }
            }
            pivots.push((r, c));
            *pivot = true;
            r += 1;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::zeros(self.cols);
                v.set(f);
                for &(pr, pc) in &pivots {
                    if m.get(pr, f) {
                        v.set(pc);
                    }
                }
                v
            })
            .collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
