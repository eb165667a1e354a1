//! Published reference values for `p = 137`, kept apart from computed data.
//!
//! Every block carries a `source` tag naming the published table it copies.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::congruence::{CountOverrides, SubgroupLabel};

pub const P137_JSON: &str = include_str!("../fixtures/p137.json");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("malformed fixture: {0}")]
    Json(#[from] serde_json::Error),
    #[error("fixture field {field} has non-integer entry {value:?}")]
    BadInteger { field: &'static str, value: String },
    #[error("fixture row for {label} has {found} counts, expected {expected}")]
    RowLength {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown subgroup label {0:?}")]
    BadLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCountFixture {
    pub source: String,
    pub weights: Vec<usize>,
    pub dimensions: BTreeMap<String, usize>,
    pub counts: BTreeMap<String, Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueFixture {
    pub source: String,
    pub modulus: u64,
    pub weights: Vec<usize>,
    pub residues: Vec<u64>,
}

impl ResidueFixture {
    pub fn residue(&self, weight: usize) -> Option<u64> {
        self.weights.iter().position(|&w| w == weight).map(|i| self.residues[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCountFixture {
    pub source: String,
    pub counts: BTreeMap<usize, String>,
    pub quotients: BTreeMap<usize, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopCoefficientFixture {
    pub source: String,
    pub weight: usize,
    pub k_top: String,
    pub a_top: String,
    pub n: String,
    pub rejected: String,
    pub base: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub j: usize,
    pub augmented: String,
    pub extended: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionFixture {
    pub source: String,
    pub rows: Vec<DistributionRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedFixture {
    pub p: u64,
    pub subgroup_counts: SubgroupCountFixture,
    pub sylow2_residues: ResidueFixture,
    pub congruences: ResidueFixture,
    pub exact_counts: ExactCountFixture,
    pub top_coefficient: TopCoefficientFixture,
    pub distribution: DistributionFixture,
}

pub(crate) fn parse_big(field: &'static str, value: &str) -> Result<BigInt, FixtureError> {
    value.parse().map_err(|_| FixtureError::BadInteger {
        field,
        value: value.to_string(),
    })
}

impl PublishedFixture {
    pub fn p137() -> Self {
        Self::from_json(P137_JSON).expect("bundled fixture parses")
    }

    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes") + "\n"
    }

    /// Subgroup counts keyed for [`crate::congruence::compute_congruences`].
    pub fn count_overrides(&self) -> Result<CountOverrides, FixtureError> {
        let table = &self.subgroup_counts;
        let mut out = CountOverrides::new();
        for (label, row) in &table.counts {
            if row.len() != table.weights.len() {
                return Err(FixtureError::RowLength {
                    label: label.clone(),
                    expected: table.weights.len(),
                    found: row.len(),
                });
            }
            let parsed: SubgroupLabel = label.parse().map_err(|_| FixtureError::BadLabel(label.clone()))?;
            out.insert(parsed, table.weights.iter().copied().zip(row.iter().copied()).collect());
        }
        Ok(out)
    }

    /// Only the `H₂` row, the one too costly to recompute by default.
    pub fn h2_override(&self) -> Result<CountOverrides, FixtureError> {
        let mut all = self.count_overrides()?;
        all.retain(|label, _| *label == SubgroupLabel::H2);
        Ok(all)
    }

    pub fn exact_counts(&self) -> Result<BTreeMap<usize, BigInt>, FixtureError> {
        self.exact_counts
            .counts
            .iter()
            .map(|(w, a)| Ok((*w, parse_big("exact_counts", a)?)))
            .collect()
    }

    /// `(j, augmented, extended)` rows of the final table.
    pub fn distribution_rows(&self) -> Result<Vec<(usize, BigInt, BigInt)>, FixtureError> {
        self.distribution
            .rows
            .iter()
            .map(|r| {
                Ok((
                    r.j,
                    parse_big("distribution.augmented", &r.augmented)?,
                    parse_big("distribution.extended", &r.extended)?,
                ))
            })
            .collect()
    }
}
