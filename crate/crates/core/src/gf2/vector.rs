use std::fmt;

use super::Gf2Error;

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a `bits`-long packed vector.
#[inline]
pub(crate) fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A vector over GF(2), packed 64 coordinates per word.
///
/// Bits past `len` in the last word are always zero, so word-level
/// comparisons and popcounts are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    /// Builds a vector with ones at the given positions. Repeated indices toggle.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.flip(i);
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i);
            }
        }
        v
    }

    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] &= !(1 << (i % WORD_BITS));
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<(), Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2): parity of the AND of the two vectors.
    pub fn dot(&self, other: &BitVector) -> Result<bool, Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }

    /// Indices of the set coordinates, ascending.
    pub fn iter_ones(&self) -> Ones<'_> {
        Ones::new(&self.words)
    }
}

/// `W·Vᵀ` over GF(2).
pub fn mul_row_vector(w: &BitVector, v: &BitVector) -> Result<bool, Gf2Error> {
    w.dot(v)
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, "]")
    }
}

/// Iterator over set bit positions of a packed word slice.
pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl<'a> Ones<'a> {
    pub(crate) fn new(words: &'a [u64]) -> Self {
        Self {
            words,
            index: 0,
            current: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_examples() {
        let w = BitVector::from_bits(&[true, false, true]);
        assert!(!mul_row_vector(&w, &w).unwrap());
        let w = BitVector::from_bits(&[true, true, false]);
        let v = BitVector::from_bits(&[true, false, true]);
        assert!(mul_row_vector(&w, &v).unwrap());
    }

    #[test]
    fn dot_matches_naive_sum_for_all_length_three_pairs() {
        for a in 0u8..8 {
            for b in 0u8..8 {
                let bits = |x: u8| (0..3).map(|i| (x >> i) & 1 == 1).collect::<Vec<_>>();
                let (wa, wb) = (bits(a), bits(b));
                let naive = wa.iter().zip(&wb).filter(|(x, y)| **x && **y).count() % 2 == 1;
                let got =
                    mul_row_vector(&BitVector::from_bits(&wa), &BitVector::from_bits(&wb)).unwrap();
                assert_eq!(got, naive, "a={a:03b} b={b:03b}");
            }
        }
    }

    #[test]
    fn dot_length_mismatch() {
        let err = BitVector::zeros(3).dot(&BitVector::zeros(4)).unwrap_err();
        assert_eq!(err, Gf2Error::LengthMismatch { left: 3, right: 4 });
    }

    #[test]
    fn ones_respects_tail() {
        for len in [0, 1, 63, 64, 65, 130] {
            let v = BitVector::ones(len);
            assert_eq!(v.weight(), len);
            assert_eq!(v.iter_ones().count(), len);
        }
    }

    #[test]
    fn support_round_trip() {
        let v = BitVector::from_support(150, &[0, 64, 149, 3]);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 3, 64, 149]);
        assert_eq!(v.weight(), 4);
    }
}
