//! Exact integer polynomials in `z` and Gaussian integers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// `Σ c_j z^j` with arbitrary-precision coefficients; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BigPoly {
    #[serde(with = "crate::decimal::big_vec")]
    coeffs: Vec<BigInt>,
}

impl BigPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `c · z^e`.
    pub fn monomial(c: impl Into<BigInt>, e: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); e + 1];
        coeffs[e] = c.into();
        Self::new(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `z^e` (zero beyond the degree).
    pub fn coeff(&self, e: usize) -> BigInt {
        self.coeffs.get(e).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients `0..len`, zero-padded.
    pub fn padded(&self, len: usize) -> Vec<BigInt> {
        (0..len).map(|e| self.coeff(e)).collect()
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(e, c)| c * BigInt::from(e))
                .collect(),
        )
    }

    /// Sum of the coefficients.
    pub fn eval_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn eval_i(&self) -> GaussianInt {
        // i^e cycles through 1, i, -1, -i
        let mut re = BigInt::zero();
        let mut im = BigInt::zero();
        for (e, c) in self.coeffs.iter().enumerate() {
            match e % 4 {
                0 => re += c,
                1 => im += c,
                2 => re -= c,
                _ => im -= c,
            }
        }
        GaussianInt { re, im }
    }

    /// Divides every coefficient by `d`; `Err(e)` names the first inexact power.
    pub fn exact_div(&self, d: &BigInt) -> Result<Self, usize> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(e, c)| {
                let (q, r) = c.div_rem(d);
                if r.is_zero() {
                    Ok(q)
                } else {
                    Err(e)
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

impl Add for &BigPoly {
    type Output = BigPoly;
    fn add(self, rhs: &BigPoly) -> BigPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        BigPoly::new((0..len).map(|e| self.coeff(e) + rhs.coeff(e)).collect())
    }
}

impl Sub for &BigPoly {
    type Output = BigPoly;
    fn sub(self, rhs: &BigPoly) -> BigPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        BigPoly::new((0..len).map(|e| self.coeff(e) - rhs.coeff(e)).collect())
    }
}

impl Neg for &BigPoly {
    type Output = BigPoly;
    fn neg(self) -> BigPoly {
        BigPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &BigPoly {
    type Output = BigPoly;
    fn mul(self, rhs: &BigPoly) -> BigPoly {
        if self.is_zero() || rhs.is_zero() {
            return BigPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        BigPoly::new(out)
    }
}

impl fmt::Debug for BigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match e {
                0 => write!(f, "{mag}")?,
                _ if mag.is_one() => write!(f, "z^{e}")?,
                _ => write!(f, "{mag}·z^{e}")?,
            }
        }
        Ok(())
    }
}

/// `re + im·i` with `i² = −1`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GaussianInt {
    #[serde(with = "crate::decimal::big")]
    pub re: BigInt,
    #[serde(with = "crate::decimal::big")]
    pub im: BigInt,
}

impl GaussianInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        Self {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn i() -> Self {
        Self::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self {
            re: &self.re * c,
            im: &self.im * c,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::new(1, 0), |acc, _| &acc * self)
    }

    /// `self / rhs` when the quotient is a Gaussian integer.
    pub fn exact_div(&self, rhs: &GaussianInt) -> Option<GaussianInt> {
        let n = rhs.norm();
        if n.is_zero() {
            return None;
        }
        let num = self * &rhs.conj();
        let (re, r1) = num.re.div_rem(&n);
        let (im, r2) = num.im.div_rem(&n);
        (r1.is_zero() && r2.is_zero()).then_some(GaussianInt { re, im })
    }
}

impl Add for &GaussianInt {
    type Output = GaussianInt;
    fn add(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussianInt {
    type Output = GaussianInt;
    fn sub(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Neg for &GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl Mul for &GaussianInt {
    type Output = GaussianInt;
    fn mul(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl fmt::Debug for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{} - {}i", self.re, -&self.im)
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trimming_and_degree() {
        assert_eq!(BigPoly::from_i64(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(BigPoly::from_i64(&[0, 0]).is_zero());
        assert_eq!(BigPoly::zero().degree(), None);
    }

    #[test]
    fn binomial_square() {
        let p = BigPoly::from_i64(&[1, 0, 1]).pow(2);
        assert_eq!(p, BigPoly::from_i64(&[1, 0, 2, 0, 1]));
    }

    #[test]
    fn evaluations() {
        let p = BigPoly::from_i64(&[1, 0, 1]);
        assert!(p.eval_i().is_zero());
        assert_eq!(p.eval_one(), BigInt::from(2));
        assert_eq!(BigPoly::from_i64(&[0, 3]).eval_i(), GaussianInt::new(0, 3));
    }

    #[test]
    fn gaussian_division() {
        let a = GaussianInt::new(1, 1);
        let b = GaussianInt::new(1, -1);
        assert_eq!(a.exact_div(&b), Some(GaussianInt::i()));
        assert_eq!(GaussianInt::new(1, 0).exact_div(&GaussianInt::new(2, 0)), None);
        assert_eq!(GaussianInt::i().pow(2), GaussianInt::new(-1, 0));
    }

    #[test]
    fn display() {
        assert_eq!(BigPoly::from_i64(&[1, -2, 0, 1]).to_string(), "1 - 2·z^1 + z^3");
        assert_eq!(GaussianInt::new(3, -4).to_string(), "3 - 4i");
    }

    fn small_poly() -> impl Strategy<Value = BigPoly> {
        prop::collection::vec(-50i64..50, 0..8).prop_map(|v| BigPoly::from_i64(&v))
    }

    proptest! {
        #[test]
        fn product_rule(a in small_poly(), b in small_poly()) {
            let lhs = (&a * &b).derivative();
            let rhs = &(&a.derivative() * &b) + &(&a * &b.derivative());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn eval_i_is_multiplicative(a in small_poly(), b in small_poly()) {
            prop_assert_eq!((&a * &b).eval_i(), &a.eval_i() * &b.eval_i());
        }
    }
}
