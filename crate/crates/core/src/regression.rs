//! Fixture-driven replay of the `p = 137` derivation.
//!
//! Starting from the published subgroup counts and exact low-weight counts,
//! everything downstream is recomputed: subgroup dimensions, Sylow-2
//! residues, the combined congruences, the sign of `K_17`, and the final
//! distribution of both codes, each compared against the published values.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::congruence::{
    check_candidate, compute_congruences, sylow2_count, CandidateVerdict, EnumerationOptions, SubgroupLabel,
};
use crate::fixtures::{parse_big, PublishedFixture};
use crate::gleason::{solve, verify_solution, GleasonSolution, SignCertificate};
use crate::qrcode::build_family;
use crate::Error;

/// Deliberate corruptions of the fixture used to exercise failure paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Adds `delta` to the published exact count at `weight`.
    ShiftExactCount { weight: usize, delta: i64 },
    /// Uses the congruence of the next-lower weight for the top weight, so
    /// neither sign candidate can satisfy it.
    SwapTopCongruence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub p: u64,
    pub checks: Vec<RegressionCheck>,
    pub certificate: Option<SignCertificate>,
    pub solution: Option<GleasonSolution>,
}

impl RegressionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&RegressionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&RegressionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Checks(Vec<RegressionCheck>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(RegressionCheck {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn compare<T: PartialEq + std::fmt::Display>(&mut self, name: impl Into<String>, got: T, want: T) {
        let passed = got == want;
        self.push(name, passed, format!("computed {got}, published {want}"));
    }
}

/// Replays the derivation against `fixture`, optionally corrupted first.
pub fn published_regression(
    fixture: &PublishedFixture,
    perturbation: Option<Perturbation>,
) -> Result<RegressionReport, Error> {
    let mut fixture = fixture.clone();
    if let Some(Perturbation::ShiftExactCount { weight, delta }) = perturbation {
        if let Some(entry) = fixture.exact_counts.counts.get_mut(&weight) {
            let shifted = parse_big("exact_counts", entry)? + BigInt::from(delta);
            *entry = shifted.to_string();
        }
    }
    let p = fixture.p;
    let family = build_family(p)?;
    let weights = fixture.subgroup_counts.weights.clone();
    let overrides = fixture.count_overrides()?;
    let report = compute_congruences(&family, &weights, &EnumerationOptions::default(), &overrides)?;
    let mut checks = Checks(Vec::new());

    for (label, dim) in &fixture.subgroup_counts.dimensions {
        let parsed: SubgroupLabel = label
            .parse()
            .map_err(|_| crate::fixtures::FixtureError::BadLabel(label.clone()))?;
        let got = report.subgroup(parsed).map_or(usize::MAX, |s| s.k);
        checks.compare(format!("dimension {label}"), got, *dim);
    }

    let count = |label: SubgroupLabel, w: usize| overrides.get(&label).and_then(|r| r.get(&w)).copied().unwrap_or(0);
    for &w in &weights {
        let r = sylow2_count(
            count(SubgroupLabel::H2, w),
            count(SubgroupLabel::G4(0), w),
            count(SubgroupLabel::G4(1), w),
            report.s,
        );
        if let Some(want) = fixture.sylow2_residues.residue(w) {
            checks.compare(format!("sylow2 residue A{w}"), r, want);
        }
        if let (Some(c), Some(want)) = (report.constraint(w), fixture.congruences.residue(w)) {
            checks.compare(format!("congruence residue A{w}"), c.residue, want);
            checks.compare(
                format!("congruence modulus A{w}"),
                c.modulus,
                fixture.congruences.modulus,
            );
        }
    }

    let exact = fixture.exact_counts()?;
    for (w, a) in &exact {
        let Some(c) = report.constraint(*w) else { continue };
        match check_candidate(c, a) {
            CandidateVerdict::Accepted { n } => {
                let want = fixture
                    .exact_counts
                    .quotients
                    .get(w)
                    .map(|s| parse_big("quotients", s))
                    .transpose()?;
                let passed = want.as_ref().is_none_or(|q| *q == n);
                checks.push(
                    format!("congruence check n{w}"),
                    passed,
                    format!("A{w} = {a} gives n{w} = {n}"),
                );
            }
            other => checks.push(
                format!("congruence check n{w}"),
                false,
                format!("A{w} = {a}: {other:?}"),
            ),
        }
    }

    let top = fixture.top_coefficient.weight;
    let mut known: BTreeMap<usize, BigInt> = (0..top).step_by(2).map(|w| (w, BigInt::zero())).collect();
    known.insert(0, BigInt::from(1));
    known.extend(exact.into_iter().filter(|(w, _)| *w < top));
    let mut constraint = report
        .constraint(top)
        .cloned()
        .ok_or(crate::gleason::GleasonError::MissingTerm { weight: top })?;
    if perturbation == Some(Perturbation::SwapTopCongruence) {
        if let Some(lower) = report.constraint(top - 2) {
            constraint.residue = lower.residue;
            constraint.parts = lower.parts.clone();
        }
    }

    let solution = match solve(&family, &known, Some(&constraint)) {
        Ok(s) => s,
        Err(e) => {
            let certificate = match &e {
                crate::gleason::GleasonError::BothRejected { certificate, .. }
                | crate::gleason::GleasonError::BothAccepted { certificate, .. } => Some((**certificate).clone()),
                _ => None,
            };
            checks.push("sign resolution", false, e.to_string());
            return Ok(RegressionReport {
                p,
                checks: checks.0,
                certificate,
                solution: None,
            });
        }
    };
    let certificate = solution.sign_certificate.clone();
    let tf = &fixture.top_coefficient;
    checks.compare("K top", solution.k[solution.m].clone(), parse_big("k_top", &tf.k_top)?);
    checks.compare(
        format!("A{top}"),
        solution.a_extended[top].clone(),
        parse_big("a_top", &tf.a_top)?,
    );
    if let Some(cert) = &certificate {
        let accepted = cert.accepted.map(|i| &cert.candidates[i]);
        let rejected: Vec<_> = cert
            .candidates
            .iter()
            .filter(|c| c.verdict.accepted().is_none())
            .collect();
        let n = accepted.and_then(|c| c.verdict.accepted().cloned()).unwrap_or_default();
        checks.compare(format!("n{top}"), n, parse_big("n", &tf.n)?);
        let rej = rejected.first().map(|c| c.a_top.clone()).unwrap_or_default();
        checks.compare(format!("rejected A{top}"), rej, parse_big("rejected", &tf.rejected)?);
        let base = accepted.map(|c| &c.a_top - &c.k_top).unwrap_or_default();
        checks.compare(format!("A{top} without K top"), base, parse_big("base", &tf.base)?);
    }

    let n = p as usize + 1;
    let rows = fixture.distribution_rows()?;
    let listed: BTreeMap<usize, (BigInt, BigInt)> = rows.into_iter().map(|(j, a, e)| (j, (a, e))).collect();
    let mut mismatches = Vec::new();
    for j in 0..n / 2 {
        let (want_aug, want_ext) = listed.get(&j).cloned().unwrap_or_default();
        if solution.a_extended[j] != want_ext {
            mismatches.push(format!(
                "extended A{j}: computed {}, published {want_ext}",
                solution.a_extended[j]
            ));
        }
        if solution.a_augmented[j] != want_aug {
            mismatches.push(format!(
                "augmented A{j}: computed {}, published {want_aug}",
                solution.a_augmented[j]
            ));
        }
    }
    checks.push(
        "distribution table",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} rows match in both columns", n / 2)
        } else {
            mismatches.join("; ")
        },
    );
    for inv in verify_solution(&solution) {
        checks.push(format!("invariant {}", inv.name), inv.passed, "");
    }
    Ok(RegressionReport {
        p,
        checks: checks.0,
        certificate,
        solution: Some(solution),
    })
}
