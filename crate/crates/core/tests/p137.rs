use num_bigint::BigInt;
use qrwd::census::{run_census, CensusOptions};
use qrwd::congruence::{compute_congruences, CountOverrides, EnumerationOptions, SubgroupLabel};
use qrwd::fixtures::PublishedFixture;
use qrwd::qrcode::build_family;
use qrwd::regression::{published_regression, Perturbation};

#[test]
fn non_h2_counts_from_scratch() {
    let fixture = PublishedFixture::p137();
    let family = build_family(137).unwrap();
    let weights = fixture.subgroup_counts.weights.clone();
    let report = compute_congruences(
        &family,
        &weights,
        &EnumerationOptions::default(),
        &fixture.h2_override().unwrap(),
    )
    .unwrap();
    for summary in &report.subgroups {
        let label = summary.label.to_string();
        assert_eq!(summary.k, fixture.subgroup_counts.dimensions[&label], "{label}");
        let published = &fixture.subgroup_counts.counts[&label];
        let computed: Vec<u64> = weights.iter().map(|w| summary.counts[w]).collect();
        assert_eq!(&computed, published, "{label}");
    }
    for (i, &w) in fixture.congruences.weights.iter().enumerate() {
        let c = report.constraint(w).unwrap();
        assert_eq!(c.modulus, fixture.congruences.modulus);
        assert_eq!(c.residue, fixture.congruences.residues[i], "weight {w}");
    }
}

#[test]
fn regression_passes() {
    let report = published_regression(&PublishedFixture::p137(), None).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
    assert_eq!(report.check("K top").unwrap().detail, "computed 69, published 69");
    assert_eq!(
        report.check("A34").unwrap().detail,
        "computed 771068968365, published 771068968365"
    );
    let solution = report.solution.unwrap();
    assert_eq!(solution.a_extended.len(), 139);
    assert_eq!(solution.a_extended.iter().sum::<BigInt>(), BigInt::from(1) << 69u32);
}

#[test]
fn shifted_count_fails_its_check() {
    for delta in [1, -1] {
        let perturbation = Perturbation::ShiftExactCount { weight: 32, delta };
        let report = published_regression(&PublishedFixture::p137(), Some(perturbation)).unwrap();
        assert!(!report.passed());
        assert_eq!(
            report.first_failure().unwrap().name,
            "congruence check n32",
            "delta {delta}"
        );
    }
}

#[test]
fn swapped_top_congruence_rejects_both_signs() {
    let report = published_regression(&PublishedFixture::p137(), Some(Perturbation::SwapTopCongruence)).unwrap();
    let failure = report.first_failure().unwrap();
    assert_eq!(failure.name, "sign resolution");
    let cert = report.certificate.unwrap();
    assert_eq!(cert.accepted, None);
    assert_eq!(cert.candidates.len(), 2);
    assert!(cert.candidates.iter().all(|c| c.verdict.accepted().is_none()));
}

#[test]
#[ignore = "enumerates a 35-dimensional subcode"]
fn h2_counts_long_run() {
    let fixture = PublishedFixture::p137();
    let family = build_family(137).unwrap();
    let options = EnumerationOptions {
        long_run: true,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..Default::default()
    };
    let report = compute_congruences(
        &family,
        &fixture.subgroup_counts.weights,
        &options,
        &CountOverrides::new(),
    )
    .unwrap();
    let h2 = report.subgroup(SubgroupLabel::H2).unwrap();
    let computed: Vec<u64> = fixture.subgroup_counts.weights.iter().map(|w| h2.counts[w]).collect();
    assert_eq!(computed, fixture.subgroup_counts.counts["H2"]);
}

#[test]
#[ignore = "visits about 4.5e12 patterns"]
fn census_t11_long_run() {
    let fixture = PublishedFixture::p137();
    let family = build_family(137).unwrap();
    let options = CensusOptions {
        long_run: true,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..Default::default()
    };
    let census = run_census(&family, 11, &options).unwrap();
    assert_eq!(census.complete_upto, 22);
    for (w, n) in fixture.exact_counts().unwrap().into_iter().filter(|(w, _)| *w <= 22) {
        assert_eq!(BigInt::from(census.counts[&w]), n, "weight {w}");
    }
}
