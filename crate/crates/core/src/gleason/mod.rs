//! Weight-enumerator reconstruction for extended QR codes with `p = 8m + 1`.
//!
//! The extended code is formally self-dual with all weights even and not all
//! divisible by four, so its enumerator lies in the span of
//!
//! ```text
//! φ_j(z) = (1 + z²)^{4m−4j+1} · (z²(1 − z²)²)^j,   j = 0..m.
//! ```
//!
//! `φ_j` starts at `z^{2j}` with coefficient 1, so the first `m + 1` even
//! coefficients determine the `K_j` by forward substitution. The top
//! coefficient `K_m` can instead be pinned to two candidates by evaluating the
//! derivative at `z = i`, and one of them is selected by a congruence.

pub mod poly;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitlinalg::hull_dimension;
use crate::congruence::{check_candidate, CandidateVerdict, CongruenceConstraint};
use crate::qrcode::QrCodeFamily;
pub use poly::{BigPoly, GaussianInt};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GleasonError {
    #[error("p = {p} is not of the form 8m + 1")]
    UnsupportedPrime { p: u64 },
    #[error("missing A_{weight}")]
    MissingTerm { weight: usize },
    #[error("expected {expected} coefficients K_j, got {found}")]
    WrongCoefficientCount { expected: usize, found: usize },
    #[error("hull of the expurgated code has dimension {dim}, the sign argument needs 0")]
    HullNotZero { dim: usize },
    #[error("symbolic derivative {symbolic} disagrees with closed form {closed}")]
    DerivativeMismatch {
        symbolic: Box<GaussianInt>,
        closed: Box<GaussianInt>,
    },
    #[error("K_m = {value} / {divisor} is not an integer")]
    NonIntegralTop {
        value: Box<GaussianInt>,
        divisor: Box<GaussianInt>,
    },
    #[error("both candidates for A_{weight} fail the congruence: {certificate:?}")]
    BothRejected {
        weight: usize,
        certificate: Box<SignCertificate>,
    },
    #[error("both candidates for A_{weight} pass the congruence: {certificate:?}")]
    BothAccepted {
        weight: usize,
        certificate: Box<SignCertificate>,
    },
    #[error("constraint is for weight {found}, expected {expected}")]
    ConstraintWeight { expected: usize, found: usize },
    #[error("z^{exponent} coefficient of (1 − z)·A'(z) is not divisible by {divisor}")]
    NonIntegerCoefficient { exponent: usize, divisor: u64 },
    #[error("distribution sums to {found}, expected 2^{k}")]
    BadSum { found: BigInt, k: usize },
}

/// `m` with `p = 8m + 1`.
pub fn gleason_m(p: u64) -> Result<usize, GleasonError> {
    if p % 8 != 1 {
        return Err(GleasonError::UnsupportedPrime { p });
    }
    Ok(((p - 1) / 8) as usize)
}

fn one_plus_z2() -> BigPoly {
    BigPoly::from_i64(&[1, 0, 1])
}

fn z2_one_minus_z2_sq() -> BigPoly {
    BigPoly::from_i64(&[0, 0, 1, 0, -2, 0, 1])
}

/// `φ_0, …, φ_m`.
pub fn gleason_basis(m: usize) -> Vec<BigPoly> {
    assert!(m >= 1, "m must be positive");
    let a = one_plus_z2();
    let b = z2_one_minus_z2_sq();
    (0..=m)
        .map(|j| &a.pow((4 * m - 4 * j + 1) as u32) * &b.pow(j as u32))
        .collect()
}

/// Re-keys even weights `w ≤ upto` by `w / 2`.
fn by_half_weight(known: &BTreeMap<usize, BigInt>, upto: usize) -> BTreeMap<usize, BigInt> {
    known
        .iter()
        .filter(|(w, _)| **w % 2 == 0 && **w <= upto)
        .map(|(w, a)| (w / 2, a.clone()))
        .collect()
}

/// `K_0..K_m` from `known[j] = A_{2j}`.
pub fn solve_coefficients(m: usize, known: &BTreeMap<usize, BigInt>) -> Result<Vec<BigInt>, GleasonError> {
    let basis = gleason_basis(m);
    solve_with_basis(&basis, m, known)
}

fn solve_with_basis(
    basis: &[BigPoly],
    upto: usize,
    known: &BTreeMap<usize, BigInt>,
) -> Result<Vec<BigInt>, GleasonError> {
    let mut k: Vec<BigInt> = Vec::with_capacity(upto + 1);
    for j in 0..=upto {
        let a = known.get(&j).ok_or(GleasonError::MissingTerm { weight: 2 * j })?;
        let lower: BigInt = k.iter().enumerate().map(|(l, kl)| kl * basis[l].coeff(2 * j)).sum();
        k.push(a - lower);
    }
    Ok(k)
}

/// `Σ K_j φ_j`.
pub fn reconstruct(k: &[BigInt], m: usize) -> Result<BigPoly, GleasonError> {
    if k.len() != m + 1 {
        return Err(GleasonError::WrongCoefficientCount {
            expected: m + 1,
            found: k.len(),
        });
    }
    let basis = gleason_basis(m);
    Ok(k.iter()
        .zip(&basis)
        .fold(BigPoly::zero(), |acc, (kj, phi)| &acc + &phi.scale(kj)))
}

/// Closed form `2i·(−4)^m` of `φ_m'(i)`.
pub fn derivative_factor_closed_form(m: usize) -> GaussianInt {
    let minus_four_pow = BigInt::from(-4).pow(m as u32);
    GaussianInt::new(0, 2).scale(&minus_four_pow)
}

/// The factor `c_m` with `A'(i) = c_m · K_m` for every enumerator of the
/// Gleason form: the lower `φ_j` have `(1 + z²)²` as a factor and drop out.
pub fn derivative_at_i(m: usize) -> Result<GaussianInt, GleasonError> {
    let basis = gleason_basis(m);
    let symbolic = basis[m].derivative().eval_i();
    let closed = derivative_factor_closed_form(m);
    if symbolic != closed || basis[..m].iter().any(|phi| !phi.derivative().eval_i().is_zero()) {
        return Err(GleasonError::DerivativeMismatch {
            symbolic: Box::new(symbolic),
            closed: Box::new(closed),
        });
    }
    Ok(closed)
}

/// The two possible values `±2^{(p−1)/4}(1 + i)` of the augmented
/// enumerator at `z = i`, after checking that the expurgated code meets its
/// dual trivially.
pub fn hull_sign_candidates(family: &QrCodeFamily) -> Result<[GaussianInt; 2], GleasonError> {
    gleason_m(family.p)?;
    let dim = hull_dimension(&family.expurgated).map_err(|_| GleasonError::HullNotZero { dim: usize::MAX })?;
    if dim != 0 {
        return Err(GleasonError::HullNotZero { dim });
    }
    let mag = BigInt::one() << ((family.p - 1) / 4);
    let plus = GaussianInt::new(mag.clone(), mag);
    let minus = -&plus;
    Ok([plus, minus])
}

/// One branch of the sign argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCandidate {
    pub augmented_at_i: GaussianInt,
    #[serde(with = "crate::decimal::big")]
    pub k_top: BigInt,
    #[serde(with = "crate::decimal::big")]
    pub a_top: BigInt,
    pub verdict: CandidateVerdict,
}

/// Both branches and the congruence that decided between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCertificate {
    pub weight: usize,
    pub derivative_factor: GaussianInt,
    pub candidates: Vec<SignCandidate>,
    pub constraint: CongruenceConstraint,
    pub accepted: Option<usize>,
}

/// Output of [`resolve_top_coefficient`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopCoefficient {
    pub k_top: BigInt,
    pub a_top: BigInt,
    pub certificate: SignCertificate,
}

/// Determines `K_m` and `A_{2m}` from `A_0..A_{2m−2}` (keyed by weight) and a
/// congruence for `A_{2m}`.
///
/// `A(i) = 0`, so the augmented enumerator at `i` is `(1 − i)/(p + 1) · c_m · K_m`;
/// equating it with each hull candidate gives one `K_m` per sign.
pub fn resolve_top_coefficient(
    family: &QrCodeFamily,
    partial: &BTreeMap<usize, BigInt>,
    constraint: &CongruenceConstraint,
) -> Result<TopCoefficient, GleasonError> {
    let p = family.p;
    let m = gleason_m(p)?;
    let weight = 2 * m;
    if constraint.weight != weight {
        return Err(GleasonError::ConstraintWeight {
            expected: weight,
            found: constraint.weight,
        });
    }
    let basis = gleason_basis(m);
    let lower = solve_with_basis(&basis, m - 1, &by_half_weight(partial, weight - 2))?;
    let base_top: BigInt = lower
        .iter()
        .enumerate()
        .map(|(l, kl)| kl * basis[l].coeff(weight))
        .sum();

    let c = derivative_at_i(m)?;
    let divisor = &GaussianInt::new(1, -1) * &c;
    let p1 = BigInt::from(p + 1);
    let mut candidates = Vec::new();
    for value in hull_sign_candidates(family)? {
        let scaled = value.scale(&p1);
        let k = scaled
            .exact_div(&divisor)
            .filter(|q| q.im.is_zero())
            .ok_or_else(|| GleasonError::NonIntegralTop {
                value: Box::new(scaled.clone()),
                divisor: Box::new(divisor.clone()),
            })?
            .re;
        let a_top = &base_top + &k;
        let verdict = check_candidate(constraint, &a_top);
        candidates.push(SignCandidate {
            augmented_at_i: value,
            k_top: k,
            a_top,
            verdict,
        });
    }
    let accepted: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].verdict.accepted().is_some())
        .collect();
    let mut certificate = SignCertificate {
        weight,
        derivative_factor: c,
        candidates,
        constraint: constraint.clone(),
        accepted: None,
    };
    match accepted.as_slice() {
        [] => Err(GleasonError::BothRejected {
            weight,
            certificate: Box::new(certificate),
        }),
        [one] => {
            certificate.accepted = Some(*one);
            let chosen = &certificate.candidates[*one];
            Ok(TopCoefficient {
                k_top: chosen.k_top.clone(),
                a_top: chosen.a_top.clone(),
                certificate,
            })
        }
        _ => Err(GleasonError::BothAccepted {
            weight,
            certificate: Box::new(certificate),
        }),
    }
}

/// `A_Q(z) = A(z) + (1 − z)/(p + 1) · A'(z)`, with the division checked exact
/// and the per-weight identities checked coefficientwise.
pub fn augmented_enumerator(ext: &BigPoly, p: u64) -> Result<BigPoly, GleasonError> {
    let p1 = BigInt::from(p + 1);
    let d = ext.derivative();
    let combo = &d - &(&d * &BigPoly::monomial(1, 1));
    let quotient = combo
        .exact_div(&p1)
        .map_err(|exponent| GleasonError::NonIntegerCoefficient {
            exponent,
            divisor: p + 1,
        })?;
    let aug = ext + &quotient;
    for j in 0..=(p as usize).div_ceil(2) {
        let a = ext.coeff(2 * j);
        let even = (&p1 - BigInt::from(2 * j)) * &a;
        if even.clone() != aug.coeff(2 * j) * &p1 {
            return Err(GleasonError::NonIntegerCoefficient {
                exponent: 2 * j,
                divisor: p + 1,
            });
        }
        if j > 0 && BigInt::from(2 * j) * &a != aug.coeff(2 * j - 1) * &p1 {
            return Err(GleasonError::NonIntegerCoefficient {
                exponent: 2 * j - 1,
                divisor: p + 1,
            });
        }
    }
    Ok(aug)
}

fn binom_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Weight distribution of the dual of a code with distribution `dist`,
/// length `n` and dimension `k`.
pub fn macwilliams_transform(dist: &[BigInt], n: usize, k: usize) -> Result<Vec<BigInt>, GleasonError> {
    let total: BigInt = dist.iter().sum();
    if total != BigInt::one() << k {
        return Err(GleasonError::BadSum { found: total, k });
    }
    let binom: Vec<Vec<BigInt>> = (0..=n).map(|a| (0..=n).map(|b| binom_big(a, b)).collect()).collect();
    let krawtchouk = |j: usize, i: usize| -> BigInt {
        (0..=j.min(i))
            .filter(|&l| j - l <= n - i)
            .map(|l| {
                let term = &binom[i][l] * &binom[n - i][j - l];
                if l % 2 == 1 {
                    -term
                } else {
                    term
                }
            })
            .sum()
    };
    let size = BigInt::one() << k;
    (0..=n)
        .map(|j| {
            let s: BigInt = dist
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(i, a)| a * krawtchouk(j, i))
                .sum();
            let (q, r) = s.div_rem(&size);
            debug_assert!(r.is_zero());
            Ok(q)
        })
        .collect()
}

/// True iff `dist` is fixed by the MacWilliams transform.
pub fn macwilliams_check(dist: &[BigInt], n: usize, k: usize) -> Result<bool, GleasonError> {
    let mut padded = dist.to_vec();
    padded.resize(n + 1, BigInt::zero());
    Ok(macwilliams_transform(&padded, n, k)? == padded)
}

/// The assembled distribution of the extended and augmented codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GleasonSolution {
    pub p: u64,
    pub m: usize,
    #[serde(with = "crate::decimal::big_vec")]
    pub k: Vec<BigInt>,
    #[serde(with = "crate::decimal::big_vec")]
    pub a_extended: Vec<BigInt>,
    #[serde(with = "crate::decimal::big_vec")]
    pub a_augmented: Vec<BigInt>,
    pub sign_certificate: Option<SignCertificate>,
}

/// Builds the solution from `known` (weight → count) covering even weights
/// `0..=2m`, or `0..2m` when `top` is supplied to determine `A_{2m}`.
pub fn solve(
    family: &QrCodeFamily,
    known: &BTreeMap<usize, BigInt>,
    top: Option<&CongruenceConstraint>,
) -> Result<GleasonSolution, GleasonError> {
    let p = family.p;
    let m = gleason_m(p)?;
    let mut by_j = by_half_weight(known, 2 * m);
    let sign_certificate = match (by_j.contains_key(&m), top) {
        (false, Some(constraint)) => {
            let resolved = resolve_top_coefficient(family, known, constraint)?;
            by_j.insert(m, resolved.a_top);
            Some(resolved.certificate)
        }
        _ => None,
    };
    let k = solve_coefficients(m, &by_j)?;
    let ext = reconstruct(&k, m)?;
    let aug = augmented_enumerator(&ext, p)?;
    let n = p as usize + 1;
    Ok(GleasonSolution {
        p,
        m,
        k,
        a_extended: ext.padded(n + 1),
        a_augmented: aug.padded(n),
        sign_certificate,
    })
}

/// Outcome of one invariant check on a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
}

/// Re-runs every structural check on a stored solution.
pub fn verify_solution(sol: &GleasonSolution) -> Vec<InvariantCheck> {
    let n = sol.p as usize + 1;
    let ext = &sol.a_extended;
    let aug = &sol.a_augmented;
    let k = n / 2;
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool| {
        checks.push(InvariantCheck {
            name: name.to_string(),
            passed,
        })
    };
    push("lengths", ext.len() == n + 1 && aug.len() == n);
    if ext.len() != n + 1 || aug.len() != n {
        return checks;
    }
    push("a0_is_one", ext[0].is_one());
    push("odd_weights_vanish", ext.iter().skip(1).step_by(2).all(Zero::is_zero));
    push("nonnegative", ext.iter().chain(aug).all(|a| !a.is_negative()));
    push("symmetric", (0..=n).all(|j| ext[j] == ext[n - j]));
    let total: BigInt = ext.iter().sum();
    push("sum_extended", total == BigInt::one() << k);
    let total_aug: BigInt = aug.iter().sum();
    push("sum_augmented", total_aug == BigInt::one() << k);
    let ext_poly = BigPoly::new(ext.clone());
    push("vanishes_at_i", ext_poly.eval_i().is_zero());
    let aug_ok = augmented_enumerator(&ext_poly, sol.p).is_ok_and(|a| a.padded(n) == *aug);
    push("augmented_identity", aug_ok);
    push("macwilliams_self_dual", macwilliams_check(ext, n, k).unwrap_or(false));
    let k_ok = sol.m as u64 * 8 + 1 == sol.p && reconstruct(&sol.k, sol.m).is_ok_and(|r| r.padded(n + 1) == *ext);
    push("gleason_form", k_ok);
    checks
}
