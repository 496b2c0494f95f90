//! Bit-cost model.
//!
//! A labeled pair costs `ceil(log2(2m))` bits. An encoding is a length header
//! of `count_bits(cap)` bits followed by its pairs, where `cap` bounds the
//! number of pairs any encoding may hold.

use serde::{Deserialize, Serialize};

use crate::compression::VsEncoding;

/// `ceil(log2(n))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Bits needed to write any integer in `0..=n`.
pub fn count_bits(n: usize) -> usize {
    ceil_log2(n + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub domain_size: usize,
    pub cap: usize,
}

impl CostModel {
    pub fn new(domain_size: usize, cap: usize) -> Self {
        Self { domain_size, cap }
    }

    /// Cap large enough for every encoding over the domain: realizable
    /// encodings use distinct points, the unrealizable marker uses two pairs.
    pub fn for_domain(domain_size: usize) -> Self {
        Self { domain_size, cap: domain_size.max(2) }
    }

    pub fn pair_bits(&self) -> usize {
        ceil_log2(2 * self.domain_size)
    }

    pub fn header_bits(&self) -> usize {
        count_bits(self.cap)
    }

    pub fn pairs_bits(&self, pairs: usize) -> usize {
        self.header_bits() + pairs * self.pair_bits()
    }

    pub fn encoding_bits(&self, enc: &VsEncoding) -> usize {
        self.pairs_bits(enc.stored_pairs())
    }

    /// Raw dataset: item count followed by every pair in order.
    pub fn dataset_bits(&self, n: usize) -> usize {
        count_bits(n) + n * self.pair_bits()
    }
}
