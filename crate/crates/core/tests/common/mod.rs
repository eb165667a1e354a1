//! Brute-force reference enumeration shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use qrwd::bitlinalg::BitMatrix;

/// Rows packed into `u64`, bit `c` = column `c`.
pub fn pack_rows(g: &BitMatrix) -> Vec<u64> {
    assert!(g.ncols() <= 64);
    g.rows()
        .iter()
        .map(|r| (0..g.ncols()).filter(|&c| r.get(c)).fold(0u64, |acc, c| acc | 1 << c))
        .collect()
}

/// Every codeword, indexed by message mask.
pub fn all_codewords(g: &BitMatrix) -> Vec<u64> {
    let rows = pack_rows(g);
    let mut words = vec![0u64; 1 << rows.len()];
    for mask in 1..words.len() {
        let low = mask.trailing_zeros() as usize;
        words[mask] = words[mask & (mask - 1)] ^ rows[low];
    }
    words
}

pub fn distribution(g: &BitMatrix) -> Vec<u64> {
    let mut hist = vec![0u64; g.ncols() + 1];
    for w in all_codewords(g) {
        hist[w.count_ones() as usize] += 1;
    }
    hist
}

pub fn big(v: &[u64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
