//! Orbit-counting congruences for the weight distribution.
//!
//! A codeword that no non-identity element of a group fixes lies in an orbit
//! of full size, so `A_j` is congruent to the number of weight-`j` codewords
//! with nontrivial stabilizer, modulo the group order. The residue is
//! assembled prime by prime:
//!
//! * odd `q ≠ p`: the Sylow-`q` subgroup is cyclic, and a codeword is fixed by
//!   some non-identity element iff it is fixed by the order-`q` subgroup;
//! * `q = p`: the translation `y ↦ y + 1` fixes only `0` and the all-ones word;
//! * `q = 2`: the dihedral Sylow-2 subgroup is handled through its subgroups
//!   `H₂`, `G⁰₄`, `G¹₄` by [`sylow2_count`].
//!
//! The parts are combined by the Chinese remainder theorem.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitlinalg::{intersect_rowspaces, BitMatrix, BitVector};
use crate::psl2::{find_sylow_plan, group_order, CoordPermutation, MoebiusMap, Psl2Error, SylowPlan};
use crate::qrcode::QrCodeFamily;

/// Largest subcode dimension enumerated without the long-run flag.
pub const DEFAULT_MAX_SUBCODE_DIM: usize = 28;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CongruenceError {
    #[error("permutation acts on {found} points but the code has length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("enumerating 2^{k} codewords exceeds the budget of 2^{limit}; rerun with the long-run flag")]
    BudgetExceeded { k: usize, limit: usize },
    #[error("moduli {a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },
    #[error("moduli multiply to {product}, expected the group order {expected}")]
    WrongModulusProduct { product: u128, expected: u64 },
    #[error("precomputed counts for {label} do not cover weight {weight}")]
    MissingOverride { label: SubgroupLabel, weight: usize },
    #[error(transparent)]
    Group(#[from] Psl2Error),
}

/// Names the subgroups whose fixed subcodes enter the congruence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubgroupLabel {
    H2,
    G4(u8),
    Sylow(u64),
}

impl fmt::Display for SubgroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupLabel::H2 => f.write_str("H2"),
            SubgroupLabel::G4(i) => write!(f, "G4^{i}"),
            SubgroupLabel::Sylow(q) => write!(f, "S{q}"),
        }
    }
}

impl std::str::FromStr for SubgroupLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H2" => Ok(SubgroupLabel::H2),
            "G4^0" => Ok(SubgroupLabel::G4(0)),
            "G4^1" => Ok(SubgroupLabel::G4(1)),
            _ => s
                .strip_prefix('S')
                .and_then(|q| q.parse().ok())
                .map(SubgroupLabel::Sylow)
                .ok_or_else(|| format!("unknown subgroup label {s:?}")),
        }
    }
}

impl Serialize for SubgroupLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubgroupLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The subspace of a code fixed by every permutation of a group.
#[derive(Debug, Clone)]
pub struct InvariantSubcode {
    pub label: SubgroupLabel,
    pub basis: BitMatrix,
}

impl InvariantSubcode {
    pub fn k(&self) -> usize {
        self.basis.nrows()
    }
}

/// Span of the cycle indicators of `perm`: exactly the vectors it fixes.
pub fn fixed_space(perm: &CoordPermutation) -> BitMatrix {
    let n = perm.len();
    let rows = perm
        .cycles()
        .into_iter()
        .map(|cycle| BitVector::from_indices(n, cycle))
        .collect();
    BitMatrix::from_rows(n, rows)
}

/// Codewords of `code` fixed by every permutation in `group`.
pub fn invariant_subcode(
    code: &BitMatrix,
    group: &[CoordPermutation],
    label: SubgroupLabel,
) -> Result<InvariantSubcode, CongruenceError> {
    let mut basis = code.rref().0;
    for perm in group {
        if perm.len() != code.ncols() {
            return Err(CongruenceError::LengthMismatch {
                expected: code.ncols(),
                found: perm.len(),
            });
        }
        if perm.is_identity() {
            continue;
        }
        basis = intersect_rowspaces(&basis, &fixed_space(perm));
    }
    Ok(InvariantSubcode { label, basis })
}

#[derive(Debug, Clone)]
pub struct EnumerationOptions {
    pub workers: usize,
    pub max_dim: usize,
    pub long_run: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            max_dim: DEFAULT_MAX_SUBCODE_DIM,
            long_run: false,
        }
    }
}

/// Weight histogram (index = weight) of every codeword spanned by `basis`.
///
/// The `2^k` messages are walked in Gray-code order, split into contiguous
/// ranges across workers; each range recomputes its starting codeword.
pub fn weight_histogram(basis: &BitMatrix, options: &EnumerationOptions) -> Result<Vec<u64>, CongruenceError> {
    let k = basis.nrows();
    if k > 63 || (!options.long_run && k > options.max_dim) {
        return Err(CongruenceError::BudgetExceeded {
            k,
            limit: options.max_dim,
        });
    }
    let n = basis.ncols();
    let words = n.div_ceil(64);
    let flat: Vec<u64> = basis.rows().iter().flat_map(|r| r.words().iter().copied()).collect();
    let total: u64 = 1 << k;
    let chunks = (options.workers.max(1) as u64 * 8).min(total);
    let chunk_len = total.div_ceil(chunks);

    let walk = |start: u64, end: u64| -> Vec<u64> {
        let mut hist = vec![0u64; n + 1];
        let gray = start ^ (start >> 1);
        let mut cur = vec![0u64; words];
        for i in (0..k).filter(|i| (gray >> i) & 1 == 1) {
            for (c, r) in cur.iter_mut().zip(&flat[i * words..(i + 1) * words]) {
                *c ^= r;
            }
        }
        for idx in start..end {
            let w: u32 = cur.iter().map(|x| x.count_ones()).sum();
            hist[w as usize] += 1;
            let next = idx + 1;
            if next < end {
                let i = next.trailing_zeros() as usize;
                for (c, r) in cur.iter_mut().zip(&flat[i * words..(i + 1) * words]) {
                    *c ^= r;
                }
            }
        }
        hist
    };

    let next = AtomicUsize::new(0);
    let acc = Mutex::new(vec![0u64; n + 1]);
    std::thread::scope(|scope| {
        for _ in 0..options.workers.max(1) {
            scope.spawn(|| loop {
                let c = next.fetch_add(1, Ordering::Relaxed) as u64;
                if c >= chunks {
                    break;
                }
                let start = c * chunk_len;
                let end = ((c + 1) * chunk_len).min(total);
                if start >= end {
                    continue;
                }
                let part = walk(start, end);
                let mut acc = acc.lock().expect("no worker panicked");
                for (a, b) in acc.iter_mut().zip(part) {
                    *a += b;
                }
            });
        }
    });
    Ok(acc.into_inner().expect("no worker panicked"))
}

/// Exact count of subcode codewords of each weight `≤ max_weight`.
pub fn subcode_weight_counts(
    sub: &InvariantSubcode,
    max_weight: usize,
    options: &EnumerationOptions,
) -> Result<BTreeMap<usize, u64>, CongruenceError> {
    let hist = weight_histogram(&sub.basis, options)?;
    Ok(hist.into_iter().enumerate().take(max_weight + 1).collect())
}

/// Residue mod `2^s` of the number of codewords fixed by some non-identity
/// element of the dihedral Sylow-2 subgroup:
/// `(2^{s−1} + 1)·h2 − 2^{s−2}·g04 − 2^{s−2}·g14`.
pub fn sylow2_count(h2: u64, g04: u64, g14: u64, s: u32) -> u64 {
    assert!((2..63).contains(&s), "s must be in 2..63");
    let modulus = 1i128 << s;
    let big = (1i128 << (s - 1)) + 1;
    let quarter = 1i128 << (s - 2);
    let v = big * i128::from(h2) - quarter * i128::from(g04) - quarter * i128::from(g14);
    v.rem_euclid(modulus) as u64
}

/// One prime-power residue and where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResiduePart {
    pub prime_power: u64,
    pub residue: u64,
    pub source: String,
}

/// `A_j ≡ residue (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceConstraint {
    pub weight: usize,
    pub residue: u64,
    pub modulus: u64,
    pub parts: Vec<ResiduePart>,
}

/// Combines prime-power residues into one residue modulo `|PSL₂(p)|`.
pub fn assemble_constraint(
    p: u64,
    weight: usize,
    parts: Vec<ResiduePart>,
) -> Result<CongruenceConstraint, CongruenceError> {
    for (i, a) in parts.iter().enumerate() {
        for b in &parts[i + 1..] {
            if a.prime_power.gcd(&b.prime_power) != 1 {
                return Err(CongruenceError::NotCoprime {
                    a: a.prime_power,
                    b: b.prime_power,
                });
            }
        }
    }
    let expected = group_order(p).order;
    let product: u128 = parts.iter().map(|x| u128::from(x.prime_power)).product();
    if product != u128::from(expected) {
        return Err(CongruenceError::WrongModulusProduct { product, expected });
    }
    let modulus = i128::from(expected);
    let mut residue: i128 = 0;
    for part in &parts {
        let m = i128::from(part.prime_power);
        let rest = modulus / m;
        // rest * (rest^{-1} mod m) ≡ 1 (mod m), ≡ 0 mod the other factors
        let inv = rest.extended_gcd(&m).x.rem_euclid(m);
        residue = (residue + i128::from(part.residue % part.prime_power) * rest % modulus * inv) % modulus;
    }
    Ok(CongruenceConstraint {
        weight,
        residue: residue.rem_euclid(modulus) as u64,
        modulus: expected,
        parts,
    })
}

/// Outcome of testing a candidate count against a congruence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CandidateVerdict {
    /// `candidate = n · modulus + residue` with `n ≥ 0`.
    Accepted {
        #[serde(with = "crate::decimal::big")]
        n: BigInt,
    },
    /// The candidate is in a different residue class.
    WrongResidue {
        #[serde(with = "crate::decimal::big")]
        found: BigInt,
    },
    /// Right class but `n < 0`.
    NegativeQuotient {
        #[serde(with = "crate::decimal::big")]
        n: BigInt,
    },
}

impl CandidateVerdict {
    pub fn accepted(&self) -> Option<&BigInt> {
        match self {
            CandidateVerdict::Accepted { n } => Some(n),
            _ => None,
        }
    }
}

pub fn check_candidate(constraint: &CongruenceConstraint, candidate: &BigInt) -> CandidateVerdict {
    let m = BigInt::from(constraint.modulus);
    let found = candidate.mod_floor(&m);
    if found != BigInt::from(constraint.residue) {
        return CandidateVerdict::WrongResidue { found };
    }
    let n = (candidate - BigInt::from(constraint.residue)) / &m;
    if n.is_negative() {
        CandidateVerdict::NegativeQuotient { n }
    } else {
        debug_assert!(!n.is_negative() || n.is_zero());
        CandidateVerdict::Accepted { n }
    }
}

/// Counts for one subgroup, possibly read from a fixture instead of computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupSummary {
    pub label: SubgroupLabel,
    pub generators: Vec<String>,
    pub order: u64,
    pub k: usize,
    pub counts: BTreeMap<usize, u64>,
    pub counts_source: String,
}

/// Everything the congruence stage produces for a set of weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub p: u64,
    pub group_order: u64,
    pub s: u32,
    pub subgroups: Vec<SubgroupSummary>,
    pub constraints: Vec<CongruenceConstraint>,
}

impl CongruenceReport {
    pub fn constraint(&self, weight: usize) -> Option<&CongruenceConstraint> {
        self.constraints.iter().find(|c| c.weight == weight)
    }

    pub fn subgroup(&self, label: SubgroupLabel) -> Option<&SubgroupSummary> {
        self.subgroups.iter().find(|s| s.label == label)
    }
}

/// Precomputed counts keyed by subgroup, then weight.
pub type CountOverrides = BTreeMap<SubgroupLabel, BTreeMap<usize, u64>>;

fn perms(group: &[MoebiusMap]) -> Vec<CoordPermutation> {
    group.iter().map(MoebiusMap::to_permutation).collect()
}

/// The subgroups and their element lists, in report order.
pub fn congruence_subgroups(plan: &SylowPlan) -> Vec<(SubgroupLabel, Vec<MoebiusMap>, Vec<MoebiusMap>)> {
    let h = plan.rotation.pow(1 << (plan.s - 2));
    let mut out = vec![
        (SubgroupLabel::H2, vec![h], plan.h2()),
        (SubgroupLabel::G4(0), vec![h, plan.reflection], plan.g4(0)),
        (
            SubgroupLabel::G4(1),
            vec![h, plan.rotation.compose(&plan.reflection)],
            plan.g4(1),
        ),
    ];
    for (&q, g) in &plan.odd_generators {
        out.push((SubgroupLabel::Sylow(q), vec![*g], vec![*g]));
    }
    out.push((
        SubgroupLabel::Sylow(plan.p),
        vec![plan.translation],
        vec![plan.translation],
    ));
    out
}

/// Computes subgroup dimensions, weight counts and assembled congruences for
/// `weights` of the extended code. Counts listed in `overrides` are taken as
/// given instead of enumerated (dimensions are always computed).
pub fn compute_congruences(
    family: &QrCodeFamily,
    weights: &[usize],
    options: &EnumerationOptions,
    overrides: &CountOverrides,
) -> Result<CongruenceReport, CongruenceError> {
    let plan = find_sylow_plan(family.p)?;
    let max_weight = weights.iter().copied().max().unwrap_or(0);
    let mut subgroups = Vec::new();
    for (label, generators, elements) in congruence_subgroups(&plan) {
        let sub = invariant_subcode(&family.extended, &perms(&elements), label)?;
        let (counts, counts_source) = match overrides.get(&label) {
            Some(given) => (
                weights
                    .iter()
                    .map(|&weight| {
                        given
                            .get(&weight)
                            .map(|c| (weight, *c))
                            .ok_or(CongruenceError::MissingOverride { label, weight })
                    })
                    .collect::<Result<_, _>>()?,
                "fixture".to_string(),
            ),
            None => {
                let all = subcode_weight_counts(&sub, max_weight, options)?;
                (
                    weights.iter().map(|w| (*w, all.get(w).copied().unwrap_or(0))).collect(),
                    "computed".to_string(),
                )
            }
        };
        subgroups.push(SubgroupSummary {
            label,
            generators: generators.iter().map(ToString::to_string).collect(),
            order: elements.len() as u64,
            k: sub.k(),
            counts,
            counts_source,
        });
    }
    let report = CongruenceReport {
        p: family.p,
        group_order: plan.group_order,
        s: plan.s,
        subgroups,
        constraints: Vec::new(),
    };
    let constraints = weights
        .iter()
        .map(|&w| constraint_from_counts(&report, &plan, w))
        .collect::<Result<_, _>>()?;
    Ok(CongruenceReport { constraints, ..report })
}

fn constraint_from_counts(
    report: &CongruenceReport,
    plan: &SylowPlan,
    weight: usize,
) -> Result<CongruenceConstraint, CongruenceError> {
    let count = |label| -> u64 {
        report
            .subgroup(label)
            .and_then(|s| s.counts.get(&weight).copied())
            .unwrap_or(0)
    };
    let mut parts = vec![ResiduePart {
        prime_power: 1 << plan.s,
        residue: sylow2_count(
            count(SubgroupLabel::H2),
            count(SubgroupLabel::G4(0)),
            count(SubgroupLabel::G4(1)),
            plan.s,
        ),
        source: "dihedral Sylow-2 combination of H2, G4^0, G4^1".into(),
    }];
    for (q, e) in plan.odd_parts() {
        let prime_power = q.pow(e);
        parts.push(ResiduePart {
            prime_power,
            residue: count(SubgroupLabel::Sylow(q)) % prime_power,
            source: format!("fixed by order-{q} subgroup S{q}"),
        });
    }
    parts.push(ResiduePart {
        prime_power: plan.p,
        residue: count(SubgroupLabel::Sylow(plan.p)) % plan.p,
        source: format!("fixed by translation subgroup S{}", plan.p),
    });
    assemble_constraint(plan.p, weight, parts)
}
