use rand::Rng;

use super::vector::{tail_mask, words_for};

/// Default payload width in bits.
pub const DEFAULT_SYMBOL_BITS: usize = 64;

/// One payload symbol in GF(2)^s.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolBlock {
    bits: usize,
    words: Vec<u64>,
}

impl SymbolBlock {
    pub fn zero(bits: usize) -> Self {
        Self {
            bits,
            words: vec![0; words_for(bits)],
        }
    }

    pub fn random<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> Self {
        let mut b = Self::zero(bits);
        fill_random(&mut b.words, bits, rng);
        b
    }

    /// Packs bytes little-endian; bits past `bits` are dropped.
    pub fn from_bytes(bits: usize, bytes: &[u8]) -> Self {
        let mut b = Self::zero(bits);
        for (i, &byte) in bytes.iter().enumerate().take(words_for(bits) * 8) {
            b.words[i / 8] |= u64::from(byte) << (8 * (i % 8));
        }
        if let Some(last) = b.words.last_mut() {
            *last &= tail_mask(bits);
        }
        b
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.bits.div_ceil(8));
        out
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &SymbolBlock) {
        assert_eq!(self.bits, other.bits, "symbol width mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }
}

fn fill_random<R: Rng + ?Sized>(words: &mut [u64], bits: usize, rng: &mut R) {
    for w in words.iter_mut() {
        *w = rng.random();
    }
    if let Some(last) = words.last_mut() {
        *last &= tail_mask(bits);
    }
}

/// A sequence of equal-width symbols stored contiguously.
///
/// This is the working representation of `β` and of decoded solutions; it
/// avoids one heap allocation per symbol in the Monte-Carlo inner loop.
/// A width of zero bits is allowed and means "no payload".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolBlocks {
    bits: usize,
    stride: usize,
    len: usize,
    data: Vec<u64>,
}

impl SymbolBlocks {
    pub fn zeros(bits: usize, len: usize) -> Self {
        let stride = words_for(bits);
        Self {
            bits,
            stride,
            len,
            data: vec![0; stride * len],
        }
    }

    pub fn random<R: Rng + ?Sized>(bits: usize, len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(bits, len);
        for i in 0..len {
            let (bits, block) = (s.bits, s.block_mut(i));
            fill_random(block, bits, rng);
        }
        s
    }

    pub fn from_blocks(bits: usize, blocks: &[SymbolBlock]) -> Self {
        let mut s = Self::zeros(bits, blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            assert_eq!(b.bits, bits, "symbol width mismatch");
            s.block_mut(i).copy_from_slice(&b.words);
        }
        s
    }

    #[inline]
    pub fn bits(&self) -> usize {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when blocks carry no payload bits at all.
    #[inline]
    pub fn is_payload_free(&self) -> bool {
        self.stride == 0
    }

    #[inline]
    pub fn block(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn block_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn get(&self, i: usize) -> SymbolBlock {
        SymbolBlock {
            bits: self.bits,
            words: self.block(i).to_vec(),
        }
    }

    pub fn push_zero(&mut self) {
        self.data.resize(self.data.len() + self.stride, 0);
        self.len += 1;
    }

    pub fn block_is_zero(&self, i: usize) -> bool {
        self.block(i).iter().all(|&w| w == 0)
    }

    /// `block[dst] ^= block[src]`.
    #[inline(always)]
    pub fn xor_within(&mut self, dst: usize, src: usize) {
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

    /// `self.block[dst] ^= other.block[src]`.
    #[inline(always)]
    pub fn xor_from(&mut self, dst: usize, other: &SymbolBlocks, src: usize) {
        debug_assert_eq!(self.bits, other.bits);
        let s = self.stride;
        if s == 1 {
            self.data[dst] ^= other.data[src];
            return;
        }
        for (x, y) in self.data[dst * s..(dst + 1) * s]
            .iter_mut()
            .zip(&other.data[src * s..(src + 1) * s])
        {
            *x ^= y;
        }
    }

    #[inline]
    pub fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        let (lo, hi) = (a.min(b), a.max(b));
        let (x, y) = self.data.split_at_mut(hi * s);
        x[lo * s..(lo + 1) * s].swap_with_slice(&mut y[..s]);
    }

    pub fn copy_block_from(&mut self, dst: usize, other: &SymbolBlocks, src: usize) {
        let s = self.stride;
        self.data[dst * s..(dst + 1) * s].copy_from_slice(other.block(src));
    }

    /// One bit plane as a vector: bit `plane` of each symbol.
    pub fn plane(&self, plane: usize) -> super::BitVector {
        assert!(plane < self.bits);
        let mut v = super::BitVector::zeros(self.len);
        for i in 0..self.len {
            if (self.block(i)[plane / 64] >> (plane % 64)) & 1 == 1 {
                v.set(i);
            }
        }
        v
    }
}
