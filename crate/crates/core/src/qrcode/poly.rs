//! Polynomials over GF(2), packed 64 coefficients per word.

use std::fmt;
use std::ops::{Add, Mul};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("gcd of two zero polynomials is undefined")]
pub struct BothZero;

/// A polynomial over GF(2); bit `i` of the packed words is the coefficient of `x^i`.
///
/// Trailing zero words are trimmed, so the zero polynomial has no words and
/// equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn monomial(exp: usize) -> Self {
        let mut p = Self::zero();
        p.flip(exp);
        p
    }

    /// `x^n - 1` (equivalently `x^n + 1`).
    pub fn x_pow_minus_one(n: usize) -> Self {
        Self::from_exponents([0, n])
    }

    /// Sum of `x^e` over the given exponents (repeated exponents cancel).
    pub fn from_exponents(exps: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::zero();
        for e in exps {
            p.flip(e);
        }
        p
    }

    pub fn from_coefficients(bits: &[bool]) -> Self {
        Self::from_exponents(bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    /// Exponents with coefficient 1, ascending.
    pub fn exponents(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                out.push(wi * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn flip(&mut self, i: usize) {
        if self.words.len() <= i / 64 {
            self.words.resize(i / 64 + 1, 0);
        }
        self.words[i / 64] ^= 1 << (i % 64);
        self.trim();
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    fn xor_shifted(&mut self, other: &Gf2Poly, shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        let need = other.words.len() + ws + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + ws] ^= w << bs;
            if bs != 0 {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
        self.trim();
    }

    /// Quotient and remainder of Euclidean division.
    ///
    /// # Panics
    /// Panics on division by zero.
    pub fn div_rem(&self, divisor: &Gf2Poly) -> (Gf2Poly, Gf2Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = Gf2Poly::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            rem.xor_shifted(divisor, shift);
            quot.flip(shift);
        }
        (quot, rem)
    }

    pub fn rem(&self, divisor: &Gf2Poly) -> Gf2Poly {
        self.div_rem(divisor).1
    }

    pub fn divides(&self, other: &Gf2Poly) -> bool {
        !self.is_zero() && other.rem(self).is_zero()
    }

    /// Product reduced modulo `x^n - 1`.
    pub fn mul_mod_cyclic(&self, other: &Gf2Poly, n: usize) -> Gf2Poly {
        (self * other).rem(&Gf2Poly::x_pow_minus_one(n))
    }

    /// Coefficients as a hexadecimal integer whose bit `i` is the coefficient
    /// of `x^i` (most significant digit first, no prefix).
    pub fn to_hex(&self) -> String {
        let Some(deg) = self.degree() else {
            return "0".to_string();
        };
        let digits = deg / 4 + 1;
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4).fold(0u32, |acc, b| acc | (u32::from(self.coeff(4 * d + b)) << b));
                char::from_digit(nibble, 16).expect("nibble < 16")
            })
            .collect()
    }

    /// Inverse of [`Gf2Poly::to_hex`].
    pub fn from_hex(hex: &str) -> Option<Gf2Poly> {
        let mut p = Gf2Poly::zero();
        for (d, c) in hex.chars().rev().enumerate() {
            let nibble = c.to_digit(16)?;
            for b in 0..4 {
                if (nibble >> b) & 1 == 1 {
                    p.flip(4 * d + b);
                }
            }
        }
        Some(p)
    }
}

/// Monic gcd over GF(2) (every nonzero GF(2) polynomial is monic).
pub fn poly_gcd(a: &Gf2Poly, b: &Gf2Poly) -> Result<Gf2Poly, BothZero> {
    if a.is_zero() && b.is_zero() {
        return Err(BothZero);
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    Ok(a)
}

impl Add for &Gf2Poly {
    type Output = Gf2Poly;
    fn add(self, rhs: &Gf2Poly) -> Gf2Poly {
        let mut out = self.clone();
        out.xor_shifted(rhs, 0);
        out
    }
}

impl Mul for &Gf2Poly {
    type Output = Gf2Poly;
    fn mul(self, rhs: &Gf2Poly) -> Gf2Poly {
        let mut out = Gf2Poly::zero();
        for e in rhs.exponents() {
            out.xor_shifted(self, e);
        }
        out
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps = self.exponents();
        if exps.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = exps
            .iter()
            .rev()
            .map(|&e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}
