mod common;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use qrwd::census::{run_census, CensusOptions};
use qrwd::congruence::{compute_congruences, CountOverrides, EnumerationOptions};
use qrwd::gleason::{
    augmented_enumerator, hull_sign_candidates, macwilliams_check, reconstruct, resolve_top_coefficient, solve,
    solve_coefficients, verify_solution, BigPoly, GaussianInt,
};
use qrwd::qrcode::build_family;

use common::{big, distribution};

#[test]
fn p17_gleason_from_three_terms() {
    let f = build_family(17).unwrap();
    let oracle = distribution(&f.extended);
    assert_eq!(oracle.iter().sum::<u64>(), 512);
    let known = BTreeMap::from([(0, BigInt::from(1)), (1, BigInt::from(0)), (2, BigInt::from(0))]);
    let k = solve_coefficients(2, &known).unwrap();
    let a = reconstruct(&k, 2).unwrap();
    assert_eq!(a.padded(19), big(&oracle));
}

#[test]
fn p17_census_matches_oracle() {
    let f = build_family(17).unwrap();
    let oracle = distribution(&f.extended);
    for t in 0..=9 {
        let c = run_census(&f, t, &CensusOptions::default()).unwrap();
        for (w, n) in &c.counts {
            assert_eq!(*n, oracle[*w], "t = {t}, weight {w}");
        }
        assert_eq!(c.complete_upto, 2 * t.min(9));
    }
}

#[test]
fn p17_augmented_code_and_value_at_i() {
    let f = build_family(17).unwrap();
    let ext = BigPoly::new(big(&distribution(&f.extended)));
    let aug_oracle = big(&distribution(&f.augmented));
    let aug = augmented_enumerator(&ext, 17).unwrap();
    assert_eq!(aug.padded(18), aug_oracle);
    let at_i = BigPoly::new(aug_oracle).eval_i();
    let candidates = hull_sign_candidates(&f).unwrap();
    assert_eq!(candidates[0], GaussianInt::new(16, 16));
    assert!(candidates.contains(&at_i), "A_Q(i) = {at_i}");
}

#[test]
fn p17_formally_self_dual() {
    let f = build_family(17).unwrap();
    let dist = big(&distribution(&f.extended));
    assert!(macwilliams_check(&dist, 18, 9).unwrap());
    let dual = qrwd::bitlinalg::dual_basis(&f.extended).unwrap();
    assert!(!dual.same_row_space(&f.extended));
    assert_eq!(distribution(&dual), distribution(&f.extended));
}

#[test]
fn p17_sign_route_matches_direct_count() {
    let f = build_family(17).unwrap();
    let oracle = distribution(&f.extended);
    let report = compute_congruences(&f, &[4], &EnumerationOptions::default(), &CountOverrides::new()).unwrap();
    let partial = BTreeMap::from([(0, BigInt::from(1)), (2, BigInt::from(0))]);
    let top = resolve_top_coefficient(&f, &partial, report.constraint(4).unwrap()).unwrap();
    assert_eq!(top.a_top, BigInt::from(oracle[4]));
    assert_eq!(top.certificate.candidates.len(), 2);
    let ks: Vec<BigInt> = top.certificate.candidates.iter().map(|c| c.k_top.clone()).collect();
    assert!(ks.contains(&BigInt::from(9)) && ks.contains(&BigInt::from(-9)));
}

#[test]
fn p41_pipeline_matches_oracle() {
    let f = build_family(41).unwrap();
    let oracle = distribution(&f.extended);
    assert_eq!(oracle.iter().sum::<u64>(), 1 << 21);
    let census = run_census(&f, 6, &CensusOptions::default()).unwrap();
    for (w, n) in &census.counts {
        assert_eq!(*n, oracle[*w], "weight {w}");
    }
    let known: BTreeMap<usize, BigInt> = census.counts.iter().map(|(w, c)| (*w, BigInt::from(*c))).collect();
    let direct = solve(&f, &known, None).unwrap();
    assert_eq!(direct.a_extended, big(&oracle));
    assert_eq!(direct.a_augmented, big(&distribution(&f.augmented)));
    assert!(verify_solution(&direct).iter().all(|c| c.passed));

    let report = compute_congruences(&f, &[10], &EnumerationOptions::default(), &CountOverrides::new()).unwrap();
    let lower: BTreeMap<usize, BigInt> = known.into_iter().filter(|(w, _)| *w < 10).collect();
    let resolved = solve(&f, &lower, report.constraint(10)).unwrap();
    assert_eq!(resolved.a_extended, big(&oracle));
    let cert = resolved.sign_certificate.unwrap();
    assert_eq!(cert.candidates[cert.accepted.unwrap()].a_top, BigInt::from(oracle[10]));
}

#[test]
fn p41_top_coefficient_candidates() {
    let f = build_family(41).unwrap();
    let report = compute_congruences(&f, &[10], &EnumerationOptions::default(), &CountOverrides::new()).unwrap();
    let oracle = distribution(&f.extended);
    let partial: BTreeMap<usize, BigInt> = (0..10).step_by(2).map(|w| (w, BigInt::from(oracle[w]))).collect();
    let top = resolve_top_coefficient(&f, &partial, report.constraint(10).unwrap()).unwrap();
    let mut ks: Vec<BigInt> = top.certificate.candidates.iter().map(|c| c.k_top.clone()).collect();
    ks.sort();
    assert_eq!(ks, vec![BigInt::from(-21), BigInt::from(21)]);
}

#[test]
fn degenerate_modulus_cannot_discriminate() {
    let f = build_family(41).unwrap();
    let constraint = qrwd::congruence::CongruenceConstraint {
        weight: 10,
        residue: 0,
        modulus: 1,
        parts: vec![],
    };
    let oracle = distribution(&f.extended);
    let partial: BTreeMap<usize, BigInt> = (0..10).step_by(2).map(|w| (w, BigInt::from(oracle[w]))).collect();
    assert!(matches!(
        resolve_top_coefficient(&f, &partial, &constraint),
        Err(qrwd::gleason::GleasonError::BothAccepted { .. })
    ));
}
