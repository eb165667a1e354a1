//! Binary quadratic residue codes of prime length.
//!
//! For a prime `p ≡ ±1 (mod 8)` the four cyclic QR codes are built from
//! idempotents: with `E_S(x) = Σ_{s∈S} x^s`, the generator of the code spanned
//! by an idempotent `e` is `gcd(x^p − 1, e)`. The four candidates `E_Q`, `E_N`,
//! `1 + E_Q`, `1 + E_N` split into two augmented generators of degree
//! `(p−1)/2` and two expurgated generators of degree `(p+1)/2`.
//!
//! Labeling: the augmented code whose generator divides `gcd(x^p − 1, E_Q)` is
//! called `Q`. Every weight-related output is invariant under swapping the
//! labels, since the two codes are permutation equivalent.
//!
//! Coordinate `y ∈ F_p` is column `y`; the parity coordinate `∞` of the
//! extended code is the last column `p`.

mod poly;

pub use poly::{poly_gcd, BothZero, Gf2Poly};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bitlinalg::{dual_basis, BitMatrix, BitVector};
use crate::census::{self, CensusError, CensusOptions};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QrCodeError {
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
    #[error("{p} ≡ {} (mod 8); binary QR codes need p ≡ ±1 (mod 8)", p % 8)]
    NotQrPrime { p: u64 },
    #[error("idempotent gcds did not split 2/2 by degree: {degrees:?}")]
    ClassificationFailed { degrees: Vec<Option<usize>> },
    #[error("family invariant violated: {check}")]
    InvariantViolation { check: String },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Quadratic residues `Q` and non-residues `N` modulo `p`, both ascending.
pub fn quadratic_residues(p: u64) -> Result<(Vec<u64>, Vec<u64>), QrCodeError> {
    if !is_prime(p) {
        return Err(QrCodeError::NotPrime { p });
    }
    if p % 8 != 1 && p % 8 != 7 {
        return Err(QrCodeError::NotQrPrime { p });
    }
    let mut is_residue = vec![false; p as usize];
    for a in 1..p {
        is_residue[(a * a % p) as usize] = true;
    }
    let q = (1..p).filter(|&r| is_residue[r as usize]).collect();
    let n = (1..p).filter(|&r| !is_residue[r as usize]).collect();
    Ok((q, n))
}

/// Generator matrix of the length-`n` cyclic code generated by `g`: rows `x^i g(x)`.
pub fn cyclic_generator_matrix(g: &Gf2Poly, n: usize) -> BitMatrix {
    let deg = g.degree().expect("nonzero generator");
    assert!(deg <= n);
    let exps = g.exponents();
    let rows = (0..n - deg)
        .map(|shift| BitVector::from_indices(n, exps.iter().map(|e| e + shift)))
        .collect();
    BitMatrix::from_rows(n, rows)
}

/// Appends an overall parity coordinate to every row.
pub fn extend_with_parity(g: &BitMatrix) -> BitMatrix {
    let n = g.ncols();
    let rows = g
        .rows()
        .iter()
        .map(|r| {
            let mut v = r.concat(&BitVector::zeros(1));
            if r.weight() % 2 == 1 {
                v.set(n, true);
            }
            v
        })
        .collect();
    BitMatrix::from_rows(n + 1, rows)
}

/// The QR codes of one prime together with the extended code.
#[derive(Debug, Clone)]
pub struct QrCodeFamily {
    pub p: u64,
    /// `m` with `p = 8m + 1`; `None` when `p ≡ 7 (mod 8)`.
    pub m: Option<u64>,
    pub residues: Vec<u64>,
    pub nonresidues: Vec<u64>,
    pub gen_q: Gf2Poly,
    pub gen_n: Gf2Poly,
    pub gen_qbar: Gf2Poly,
    pub gen_nbar: Gf2Poly,
    /// Augmented code `Q_p`, `[p, (p+1)/2]`.
    pub augmented: BitMatrix,
    /// Expurgated code `Q̄_p`, `[p, (p−1)/2]`.
    pub expurgated: BitMatrix,
    /// Augmented code `N_p`.
    pub augmented_n: BitMatrix,
    /// Expurgated code `N̄_p`.
    pub expurgated_n: BitMatrix,
    /// Extended code `Q̂_p`, `[p+1, (p+1)/2]`, parity coordinate last.
    pub extended: BitMatrix,
}

impl QrCodeFamily {
    /// Length of the extended code.
    pub fn n(&self) -> usize {
        self.p as usize + 1
    }

    /// Dimension of the augmented and extended codes.
    pub fn k(&self) -> usize {
        (self.p as usize).div_ceil(2)
    }

    /// Column index of coordinate `∞`.
    pub fn infinity_column(&self) -> usize {
        self.p as usize
    }

    /// Stable identity of the extended code: prime plus a digest of `gen_Q`.
    pub fn code_id(&self) -> String {
        format!("qr-ext-p{}-{}", self.p, &self.generator_digest()[..16])
    }

    pub fn generator_digest(&self) -> String {
        hex::encode(Sha256::digest(self.gen_q.to_hex().as_bytes()))
    }
}

/// Constructs and validates the QR code family of `p`.
pub fn build_family(p: u64) -> Result<QrCodeFamily, QrCodeError> {
    let (residues, nonresidues) = quadratic_residues(p)?;
    let n = p as usize;
    let modulus = Gf2Poly::x_pow_minus_one(n);
    let e_q = Gf2Poly::from_exponents(residues.iter().map(|&r| r as usize));
    let e_n = Gf2Poly::from_exponents(nonresidues.iter().map(|&r| r as usize));
    let one = Gf2Poly::one();
    let gcd = |e: &Gf2Poly| poly_gcd(&modulus, e).expect("x^p - 1 is nonzero");
    let candidates = [gcd(&e_q), gcd(&e_n), gcd(&(&one + &e_q)), gcd(&(&one + &e_n))];

    let aug_deg = (n - 1) / 2;
    let exp_deg = n.div_ceil(2);
    let augmented: Vec<&Gf2Poly> = candidates.iter().filter(|g| g.degree() == Some(aug_deg)).collect();
    let expurgated: Vec<&Gf2Poly> = candidates.iter().filter(|g| g.degree() == Some(exp_deg)).collect();
    if augmented.len() != 2 || expurgated.len() != 2 || augmented[0] == augmented[1] {
        return Err(QrCodeError::ClassificationFailed {
            degrees: candidates.iter().map(Gf2Poly::degree).collect(),
        });
    }

    let g_eq = &candidates[0];
    let (gen_q, gen_n) = match (augmented[0].divides(g_eq), augmented[1].divides(g_eq)) {
        (true, false) => (augmented[0].clone(), augmented[1].clone()),
        (false, true) => (augmented[1].clone(), augmented[0].clone()),
        _ => {
            return Err(QrCodeError::ClassificationFailed {
                degrees: candidates.iter().map(Gf2Poly::degree).collect(),
            })
        }
    };
    let x_plus_1 = Gf2Poly::from_exponents([0, 1]);
    let pair = |g: &Gf2Poly| -> Result<Gf2Poly, QrCodeError> {
        let target = g * &x_plus_1;
        expurgated
            .iter()
            .find(|e| ***e == target)
            .map(|e| (*e).clone())
            .ok_or_else(|| QrCodeError::InvariantViolation {
                check: "expurgated generator = augmented generator × (x+1)".into(),
            })
    };
    let gen_qbar = pair(&gen_q)?;
    let gen_nbar = pair(&gen_n)?;

    let augmented_m = cyclic_generator_matrix(&gen_q, n);
    let family = QrCodeFamily {
        p,
        m: (p % 8 == 1).then_some((p - 1) / 8),
        extended: extend_with_parity(&augmented_m),
        expurgated: cyclic_generator_matrix(&gen_qbar, n),
        augmented_n: cyclic_generator_matrix(&gen_n, n),
        expurgated_n: cyclic_generator_matrix(&gen_nbar, n),
        augmented: augmented_m,
        residues,
        nonresidues,
        gen_q,
        gen_n,
        gen_qbar,
        gen_nbar,
    };
    validate(&family, &modulus)?;
    Ok(family)
}

fn validate(f: &QrCodeFamily, modulus: &Gf2Poly) -> Result<(), QrCodeError> {
    let fail = |check: &str| Err(QrCodeError::InvariantViolation { check: check.into() });
    let p = f.p as usize;
    let half = (p - 1) / 2;

    if f.residues.len() != half || f.nonresidues.len() != half {
        return fail("|Q| = |N| = (p-1)/2");
    }
    let mut seen = vec![false; p];
    for &r in f.residues.iter().chain(&f.nonresidues) {
        if r == 0 || seen[r as usize] {
            return fail("Q and N partition the nonzero residues");
        }
        seen[r as usize] = true;
    }
    if f.residues.binary_search(&2).is_err() {
        return fail("2 is a quadratic residue");
    }
    for g in [&f.gen_q, &f.gen_n, &f.gen_qbar, &f.gen_nbar] {
        if !g.divides(modulus) {
            return fail("generator divides x^p - 1");
        }
    }
    let dims = [
        (&f.augmented, p, p.div_ceil(2), "dim Q_p = (p+1)/2"),
        (&f.augmented_n, p, p.div_ceil(2), "dim N_p = (p+1)/2"),
        (&f.expurgated, p, (p - 1) / 2, "dim Q̄_p = (p-1)/2"),
        (&f.expurgated_n, p, (p - 1) / 2, "dim N̄_p = (p-1)/2"),
        (&f.extended, p + 1, p.div_ceil(2), "dim Q̂_p = (p+1)/2"),
    ];
    for (mat, cols, dim, check) in dims {
        if mat.ncols() != cols || mat.nrows() != dim || mat.rank() != dim {
            return fail(check);
        }
    }
    if f.extended.rows().iter().any(|r| r.weight() % 2 == 1) {
        return fail("extended code is even");
    }
    let dual = dual_basis(&f.augmented).map_err(|e| QrCodeError::InvariantViolation {
        check: format!("dual of Q_p: {e}"),
    })?;
    let (expected, check) = if f.p % 8 == 1 {
        (&f.expurgated_n, "dual of Q_p equals N̄_p")
    } else {
        (&f.expurgated, "dual of Q_p equals Q̄_p")
    };
    if !dual.same_row_space(expected) {
        return fail(check);
    }
    Ok(())
}

/// Smallest nonzero weight of `Q̂_p` that is at most `upto`, found by a census
/// with information weight `upto / 2`. `Ok(None)` when no codeword that light exists.
pub fn min_weight_even_floor(
    family: &QrCodeFamily,
    upto: usize,
    options: &CensusOptions,
) -> Result<Option<usize>, CensusError> {
    let result = census::run_census(family, upto / 2, options)?;
    Ok(result
        .counts
        .iter()
        .find(|(&w, &c)| w > 0 && w <= upto && c > 0)
        .map(|(&w, _)| w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residues_of_17() {
        let (q, n) = quadratic_residues(17).unwrap();
        assert_eq!(q, vec![1, 2, 4, 8, 9, 13, 15, 16]);
        assert_eq!(n, vec![3, 5, 6, 7, 10, 11, 12, 14]);
    }

    #[test]
    fn residues_of_7() {
        assert_eq!(quadratic_residues(7).unwrap(), (vec![1, 2, 4], vec![3, 5, 6]));
    }

    #[test]
    fn rejects_non_qr_primes() {
        assert_eq!(quadratic_residues(11), Err(QrCodeError::NotQrPrime { p: 11 }));
        assert_eq!(quadratic_residues(15), Err(QrCodeError::NotPrime { p: 15 }));
        assert!(matches!(build_family(13), Err(QrCodeError::NotQrPrime { p: 13 })));
    }

    #[test]
    fn family_17_dimensions() {
        let f = build_family(17).unwrap();
        assert_eq!(f.m, Some(2));
        assert_eq!(f.augmented.rank(), 9);
        assert_eq!(f.expurgated.rank(), 8);
        assert_eq!(f.extended.rank(), 9);
        assert_eq!(f.extended.ncols(), 18);
        assert_eq!(f.gen_q.degree(), Some(8));
        assert_eq!(f.gen_qbar.degree(), Some(9));
    }

    #[test]
    fn family_137_parameters() {
        let f = build_family(137).unwrap();
        assert_eq!(f.m, Some(17));
        assert_eq!((f.augmented.ncols(), f.augmented.rank()), (137, 69));
        assert_eq!((f.extended.ncols(), f.extended.rank()), (138, 69));
    }

    #[test]
    fn extended_7_is_self_dual() {
        let f = build_family(7).unwrap();
        assert_eq!(f.m, None);
        let dual = dual_basis(&f.extended).unwrap();
        assert!(dual.same_row_space(&f.extended));
    }

    #[test]
    fn code_id_is_stable() {
        let a = build_family(17).unwrap().code_id();
        let b = build_family(17).unwrap().code_id();
        assert_eq!(a, b);
        assert!(a.starts_with("qr-ext-p17-"));
    }
}
