//! Kovalenko rank distributions and maximum-likelihood erasure decoding
//! experiments for LT and LDPC codes over the binary erasure channel.

pub mod degree;
pub mod gf2;
pub mod harness;
pub mod ldpc;
pub mod lt;
pub mod par;
pub mod rank_theory;
pub mod rng;
