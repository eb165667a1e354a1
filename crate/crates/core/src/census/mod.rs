//! Low-weight census of a half-rate code from two disjoint information sets.
//!
//! With `G₁ = [I | A]` and `G₂ = [B | I]`, every codeword of weight at most
//! `2t` has a half of weight at most `t`, so it is produced by an information
//! pattern of size at most `t` in the matrix that is systematic on that half.
//! A codeword is tallied by the `G₁` pass when its left weight is at most its
//! right weight, and by the `G₂` pass when its right weight is strictly
//! smaller; this counts each codeword exactly once.
//!
//! Patterns of each size are walked in revolving-door order, so each step
//! exchanges one information position and the running codeword is updated by
//! XOR-ing out one row and XOR-ing in another.

mod revolving_door;

pub use revolving_door::{binomial, rd_rank, rd_successor, rd_unrank, CombError, CombPattern};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bitlinalg::{disjoint_information_systematizations, BitLinalgError, BitMatrix, BitVector};
use crate::qrcode::QrCodeFamily;

/// Default number of patterns per shard.
pub const DEFAULT_BLOCK_SIZE: u64 = 100_000_000;
/// Default limit on patterns enumerated without the long-run flag.
pub const DEFAULT_PATTERN_BUDGET: u64 = 4_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CensusError {
    #[error("census needs {required} patterns, budget is {budget}; rerun with the long-run flag")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error(transparent)]
    Systematization(#[from] BitLinalgError),
    #[error(transparent)]
    Comb(#[from] CombError),
    #[error("shard {index} appears more than once")]
    ShardOverlap { index: usize },
    #[error("shard {index} is missing")]
    ShardGap { index: usize },
    #[error("fragments disagree on {what}")]
    PlanMismatch { what: String },
    #[error("shard index {index} is not in a plan of {total} shards")]
    UnknownShard { index: usize, total: usize },
    #[error("codeword of odd weight {weight} found; the code is not even")]
    OddWeight { weight: usize },
    #[error("count for weight {weight} overflowed 64 bits")]
    CountOverflow { weight: usize },
    #[error("block size must be at least 1")]
    ZeroBlockSize,
}

/// One contiguous rank interval of a revolving-door listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub index: usize,
    pub start_rank: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardPlan {
    pub s: usize,
    pub t: usize,
    pub block_size: u64,
    pub shards: Vec<Shard>,
}

impl ShardPlan {
    /// Manifest lines `index start_rank count`.
    pub fn manifest(&self) -> String {
        self.shards
            .iter()
            .map(|sh| format!("{} {} {}\n", sh.index, sh.start_rank, sh.count))
            .collect()
    }
}

/// Splits the `C(s, t)` ranks into blocks of `block_size`; shard `j` (from 0)
/// starts at rank `j · block_size`.
pub fn plan_shards(s: usize, t: usize, block_size: u64) -> Result<ShardPlan, CensusError> {
    if block_size == 0 {
        return Err(CensusError::ZeroBlockSize);
    }
    let total = binomial(s, t).ok_or(CombError::RankOverflow { s, t })?;
    let shards = (0..total.div_ceil(block_size))
        .map(|j| {
            let start_rank = j * block_size;
            Shard {
                index: j as usize,
                start_rank,
                count: block_size.min(total - start_rank),
            }
        })
        .collect();
    Ok(ShardPlan {
        s,
        t,
        block_size,
        shards,
    })
}

/// Which systematic generator a work unit enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `[I | A]`, tallies codewords with left weight ≤ right weight.
    Left,
    /// `[B | I]`, tallies codewords with right weight < left weight.
    Right,
}

/// A shard of the census: one side, one pattern size, one rank interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkUnit {
    pub index: usize,
    pub side: Side,
    pub size: usize,
    pub start_rank: u64,
    pub count: u64,
}

/// The code-independent shape of a census run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusPlan {
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub block_size: u64,
    pub units: Vec<WorkUnit>,
}

impl CensusPlan {
    pub fn new(family: &QrCodeFamily, t: usize, block_size: u64) -> Result<Self, CensusError> {
        let k = family.k();
        let mut units = Vec::new();
        for side in [Side::Left, Side::Right] {
            for size in 0..=t.min(k) {
                for sh in plan_shards(k, size, block_size)?.shards {
                    units.push(WorkUnit {
                        index: units.len(),
                        side,
                        size,
                        start_rank: sh.start_rank,
                        count: sh.count,
                    });
                }
            }
        }
        Ok(Self {
            p: family.p,
            n: family.n(),
            k,
            t,
            block_size,
            units,
        })
    }

    pub fn total_patterns(&self) -> u128 {
        self.units.iter().map(|u| u128::from(u.count)).sum()
    }
}

/// Required pattern count for a census at information weight `t`.
pub fn census_cost(k: usize, t: usize) -> u128 {
    let one_side: u128 = (0..=t.min(k))
        .map(|i| binomial(k, i).map_or(u128::MAX / 4, u128::from))
        .sum();
    one_side.saturating_mul(2)
}

#[derive(Debug, Clone)]
pub struct CensusOptions {
    pub workers: usize,
    pub block_size: u64,
    pub budget: u64,
    pub long_run: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            block_size: DEFAULT_BLOCK_SIZE,
            budget: DEFAULT_PATTERN_BUDGET,
            long_run: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentPlan {
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub block_size: u64,
    pub total_shards: usize,
}

/// Result of one work unit, transportable between machines as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub code_id: String,
    pub plan: FragmentPlan,
    pub shard: WorkUnit,
    /// `[weight, count]` for every weight with a nonzero tally.
    pub counts: Vec<(usize, u64)>,
}

impl Fragment {
    pub fn digest(&self) -> ShardDigest {
        let payload = serde_json::to_vec(&self.counts).expect("counts serialize");
        ShardDigest {
            index: self.shard.index,
            side: self.shard.side,
            size: self.shard.size,
            first_rank: self.shard.start_rank,
            last_rank: self.shard.start_rank + self.shard.count.saturating_sub(1),
            counts_sha256: hex::encode(Sha256::digest(payload)),
        }
    }
}

/// Audit record of one merged shard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardDigest {
    pub index: usize,
    pub side: Side,
    pub size: usize,
    pub first_rank: u64,
    pub last_rank: u64,
    pub counts_sha256: String,
}

/// Exact counts of all codewords of weight at most `complete_upto`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightCensus {
    pub code_id: String,
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub complete_upto: usize,
    /// Every even weight `≤ complete_upto`.
    pub counts: BTreeMap<usize, u64>,
    pub provenance: Vec<ShardDigest>,
}

/// Systematic generators plus the non-identity halves used by the walk.
struct Systematic {
    k: usize,
    /// Right half of `[I | A]`, one row per information position.
    left_other: Vec<BitVector>,
    /// Left half of `[B | I]`.
    right_other: Vec<BitVector>,
}

impl Systematic {
    fn new(extended: &BitMatrix) -> Result<Self, CensusError> {
        let (g1, g2) = disjoint_information_systematizations(extended)?;
        let k = g1.nrows();
        Ok(Self {
            k,
            left_other: g1.rows().iter().map(|r| r.slice(k..2 * k)).collect(),
            right_other: g2.rows().iter().map(|r| r.slice(0..k)).collect(),
        })
    }
}

fn run_unit(sys: &Systematic, t: usize, unit: &WorkUnit) -> Result<Vec<(usize, u64)>, CensusError> {
    let rows = match unit.side {
        Side::Left => &sys.left_other,
        Side::Right => &sys.right_other,
    };
    let mut hist = vec![0u64; 2 * sys.k + 1];
    if unit.count > 0 {
        let mut pattern = rd_unrank(unit.start_rank, sys.k, unit.size)?;
        let mut other = BitVector::zeros(sys.k);
        for &i in pattern.elements() {
            other.xor_assign(&rows[i]);
        }
        let i = unit.size;
        for step in 0..unit.count {
            let w_other = other.weight();
            let keep = match unit.side {
                Side::Left => i <= w_other,
                Side::Right => i < w_other,
            };
            let w = i + w_other;
            if keep && w <= 2 * t {
                hist[w] += 1;
            }
            if step + 1 < unit.count {
                let (out, inn) = pattern.advance().expect("shard stays within its listing");
                other.xor_assign(&rows[out]);
                other.xor_assign(&rows[inn]);
            }
        }
    }
    Ok(hist.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
}

/// Runs the selected work units of a census plan on `options.workers` threads.
///
/// `indices = None` runs every unit.
pub fn run_shards(
    family: &QrCodeFamily,
    t: usize,
    options: &CensusOptions,
    indices: Option<&[usize]>,
) -> Result<Vec<Fragment>, CensusError> {
    let plan = CensusPlan::new(family, t, options.block_size)?;
    let selected: Vec<WorkUnit> = match indices {
        None => plan.units.clone(),
        Some(ix) => ix
            .iter()
            .map(|&i| {
                plan.units.get(i).copied().ok_or(CensusError::UnknownShard {
                    index: i,
                    total: plan.units.len(),
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let required: u128 = selected.iter().map(|u| u128::from(u.count)).sum();
    if !options.long_run && required > u128::from(options.budget) {
        return Err(CensusError::BudgetExceeded {
            required,
            budget: options.budget,
        });
    }
    let sys = Systematic::new(&family.extended)?;
    let fplan = FragmentPlan {
        p: plan.p,
        n: plan.n,
        k: plan.k,
        t,
        block_size: options.block_size,
        total_shards: plan.units.len(),
    };
    let code_id = family.code_id();

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Fragment, CensusError>>>> =
        Mutex::new((0..selected.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..options.workers.max(1) {
            scope.spawn(|| loop {
                let slot = next.fetch_add(1, Ordering::Relaxed);
                let Some(unit) = selected.get(slot) else {
                    break;
                };
                let fragment = run_unit(&sys, t, unit).map(|counts| Fragment {
                    code_id: code_id.clone(),
                    plan: fplan.clone(),
                    shard: *unit,
                    counts,
                });
                results.lock().expect("no worker panicked")[slot] = Some(fragment);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Sums fragments of one plan into a census; every shard must appear exactly once.
pub fn merge_censuses(parts: &[Fragment]) -> Result<WeightCensus, CensusError> {
    let first = parts.first().ok_or(CensusError::ShardGap { index: 0 })?;
    let mut seen = BTreeSet::new();
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    let mut provenance = Vec::with_capacity(parts.len());
    for frag in parts {
        if frag.code_id != first.code_id {
            return Err(CensusError::PlanMismatch { what: "code_id".into() });
        }
        if frag.plan != first.plan {
            return Err(CensusError::PlanMismatch { what: "plan".into() });
        }
        if frag.shard.index >= first.plan.total_shards {
            return Err(CensusError::UnknownShard {
                index: frag.shard.index,
                total: first.plan.total_shards,
            });
        }
        if !seen.insert(frag.shard.index) {
            return Err(CensusError::ShardOverlap {
                index: frag.shard.index,
            });
        }
        for &(w, c) in &frag.counts {
            let slot = hist.entry(w).or_default();
            *slot = slot.checked_add(c).ok_or(CensusError::CountOverflow { weight: w })?;
        }
        provenance.push(frag.digest());
    }
    if let Some(index) = (0..first.plan.total_shards).find(|i| !seen.contains(i)) {
        return Err(CensusError::ShardGap { index });
    }
    provenance.sort_by_key(|d| d.index);

    let complete_upto = 2 * first.plan.t.min(first.plan.k);
    if let Some((&weight, _)) = hist.iter().find(|(&w, &c)| w % 2 == 1 && c > 0) {
        return Err(CensusError::OddWeight { weight });
    }
    let counts = (0..=complete_upto)
        .step_by(2)
        .map(|w| (w, hist.get(&w).copied().unwrap_or(0)))
        .collect();
    Ok(WeightCensus {
        code_id: first.code_id.clone(),
        p: first.plan.p,
        n: first.plan.n,
        k: first.plan.k,
        complete_upto,
        counts,
        provenance,
    })
}

/// Exact counts of all codewords of `Q̂_p` with weight at most `2t`.
pub fn run_census(family: &QrCodeFamily, t: usize, options: &CensusOptions) -> Result<WeightCensus, CensusError> {
    let required = census_cost(family.k(), t);
    if !options.long_run && required > u128::from(options.budget) {
        return Err(CensusError::BudgetExceeded {
            required,
            budget: options.budget,
        });
    }
    merge_censuses(&run_shards(family, t, options, None)?)
}
