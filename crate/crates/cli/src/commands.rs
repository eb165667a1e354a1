//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use qrwd::census::{
    census_cost, merge_censuses, plan_shards, run_census, run_shards, CensusOptions, CensusPlan, Fragment, WeightCensus,
};
use qrwd::congruence::{
    check_candidate, compute_congruences, CandidateVerdict, CongruenceConstraint, CongruenceReport, CountOverrides,
    EnumerationOptions,
};
use qrwd::fixtures::PublishedFixture;
use qrwd::gleason::{gleason_m, resolve_top_coefficient, solve, verify_solution, GleasonSolution, InvariantCheck};
use qrwd::psl2::{find_sylow_plan, SylowPlan};
use qrwd::qrcode::{build_family, QrCodeFamily};
use qrwd::regression::{published_regression, Perturbation, RegressionReport};

use crate::artifact::{self, CodeIdentity, RunManifest};
use crate::{Cli, Command, Failure, Format, Global};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Construct => construct(g),
        Command::Group => group(g),
        Command::Congruence { weights } => congruence(g, weights),
        Command::ShardPlan { s, t, block_size } => shard_plan(*s, *t, *block_size),
        Command::Census {
            t,
            block_size,
            shard_index,
            emit_fragment,
        } => census(g, *t, *block_size, *shard_index, emit_fragment.as_deref()),
        Command::CensusMerge { fragments } => census_merge(g, fragments),
        Command::Solve {
            census,
            inject,
            min_distance,
            constraint,
        } => solve_cmd(g, census.as_deref(), inject, *min_distance, constraint.as_deref()),
        Command::Verify { table } => verify(g, table),
        Command::Pipeline { t, block_size } => pipeline(g, *t, *block_size),
        Command::PaperRegression {
            fixture,
            perturb,
            swap_top_congruence,
        } => regression(g, fixture.as_deref(), *perturb, *swap_top_congruence),
    }
}

fn require_p(g: &Global) -> Result<u64, Failure> {
    g.p.ok_or_else(|| Failure::Usage("--p is required".into()))
}

fn family_for(g: &Global) -> Result<QrCodeFamily, Failure> {
    let started = Instant::now();
    let family = build_family(require_p(g)?)?;
    eprintln!("constructed p = {} in {:.2?}", family.p, started.elapsed());
    Ok(family)
}

/// Writes the JSON artifact to `--out` and prints either the table or,
/// without an output directory, the JSON itself.
fn output<T: Serialize>(
    g: &Global,
    name: &str,
    kind: &str,
    manifest: &RunManifest,
    payload: &T,
    table: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let json = artifact::to_json(manifest, kind, payload);
    if let Some(dir) = &g.out {
        artifact::emit(Some(dir), name, &json)?;
    }
    match g.format {
        Format::Table => print!("{}", table()),
        Format::Json if g.out.is_none() => print!("{json}"),
        Format::Json => {}
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GeneratorHex {
    pub q: String,
    pub n: String,
    pub qbar: String,
    pub nbar: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConstructReport {
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub m: Option<u64>,
    pub code_id: String,
    pub residues: Vec<u64>,
    pub nonresidues: Vec<u64>,
    pub generators: GeneratorHex,
}

fn construct_report(f: &QrCodeFamily) -> ConstructReport {
    ConstructReport {
        p: f.p,
        n: f.n(),
        k: f.k(),
        m: f.m,
        code_id: f.code_id(),
        residues: f.residues.clone(),
        nonresidues: f.nonresidues.clone(),
        generators: GeneratorHex {
            q: f.gen_q.to_hex(),
            n: f.gen_n.to_hex(),
            qbar: f.gen_qbar.to_hex(),
            nbar: f.gen_nbar.to_hex(),
        },
    }
}

fn construct(g: &Global) -> Result<(), Failure> {
    let f = family_for(g)?;
    let report = construct_report(&f);
    let manifest = RunManifest::new(Some(CodeIdentity::of(&f)));
    output(g, "construct.json", "construct", &manifest, &report, || {
        let mut s = String::new();
        let _ = writeln!(s, "extended QR code [{}, {}], p = {}", report.n, report.k, report.p);
        let _ = writeln!(s, "code id      {}", report.code_id);
        let _ = writeln!(s, "Q            {:?}", report.residues);
        let _ = writeln!(s, "N            {:?}", report.nonresidues);
        for (name, hex) in [
            ("g_Q", &report.generators.q),
            ("g_N", &report.generators.n),
            ("g_Qbar", &report.generators.qbar),
            ("g_Nbar", &report.generators.nbar),
        ] {
            let _ = writeln!(s, "{name:<12} 0x{hex}");
        }
        s
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroupReport {
    pub p: u64,
    pub order: u64,
    pub factorization: Vec<(u64, u32)>,
    pub s: u32,
    pub rotation: String,
    pub reflection: String,
    pub translation: String,
    pub odd_generators: BTreeMap<u64, String>,
}

fn group_report(plan: &SylowPlan) -> GroupReport {
    GroupReport {
        p: plan.p,
        order: plan.group_order,
        factorization: plan.factorization.clone(),
        s: plan.s,
        rotation: plan.rotation.to_string(),
        reflection: plan.reflection.to_string(),
        translation: plan.translation.to_string(),
        odd_generators: plan.odd_generators.iter().map(|(q, m)| (*q, m.to_string())).collect(),
    }
}

fn group(g: &Global) -> Result<(), Failure> {
    let p = require_p(g)?;
    let plan = find_sylow_plan(p)?;
    let report = group_report(&plan);
    let manifest = RunManifest::new(None);
    output(g, "group.json", "group", &manifest, &report, || {
        let mut s = String::new();
        let factors: Vec<String> = report
            .factorization
            .iter()
            .map(|(q, e)| if *e == 1 { q.to_string() } else { format!("{q}^{e}") })
            .collect();
        let _ = writeln!(s, "|PSL2({})| = {} = {}", report.p, report.order, factors.join(" · "));
        let _ = writeln!(s, "P (order 2^{})  {}", report.s - 1, report.rotation);
        let _ = writeln!(s, "T              {}", report.reflection);
        for (q, m) in &report.odd_generators {
            let _ = writeln!(s, "order {q:<8} {m}");
        }
        let _ = writeln!(s, "S (order {})  {}", report.p, report.translation);
        s
    })
}

fn parse_weights(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("bad weight range {spec:?}; expected a..b"));
    let (lo, hi) = match spec.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let w = spec.trim().parse().map_err(|_| bad())?;
            (w, w)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).filter(|w| w % 2 == 0).collect())
}

/// Counts taken from the bundled fixture when enumeration is not requested.
fn default_overrides(g: &Global, p: u64, weights: &[usize]) -> Result<CountOverrides, Failure> {
    if g.long_run || p != 137 {
        return Ok(CountOverrides::new());
    }
    let fixture = PublishedFixture::p137();
    let covered = weights.iter().all(|w| fixture.subgroup_counts.weights.contains(w));
    if !covered {
        return Ok(CountOverrides::new());
    }
    Ok(fixture.h2_override()?)
}

fn enumeration_options(g: &Global) -> EnumerationOptions {
    EnumerationOptions {
        workers: g.workers,
        long_run: g.long_run,
        ..Default::default()
    }
}

fn congruence_table(r: &CongruenceReport) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>8}", "");
    for sub in &r.subgroups {
        let _ = write!(s, "{:>10}", sub.label.to_string());
    }
    let _ = write!(s, "\n{:>8}", "k");
    for sub in &r.subgroups {
        let _ = write!(s, "{:>10}", sub.k);
    }
    s.push('\n');
    for c in &r.constraints {
        let _ = write!(s, "{:>8}", format!("A{}", c.weight));
        for sub in &r.subgroups {
            let _ = write!(s, "{:>10}", sub.counts.get(&c.weight).copied().unwrap_or(0));
        }
        s.push('\n');
    }
    for c in &r.constraints {
        let _ = writeln!(s, "A{} = n{} · {} + {}", c.weight, c.weight, c.modulus, c.residue);
    }
    s
}

fn congruence(g: &Global, weights: &str) -> Result<(), Failure> {
    let f = family_for(g)?;
    let weights = parse_weights(weights)?;
    let overrides = default_overrides(g, f.p, &weights)?;
    let started = Instant::now();
    let report = compute_congruences(&f, &weights, &enumeration_options(g), &overrides)?;
    eprintln!("congruences for {} weights in {:.2?}", weights.len(), started.elapsed());
    let manifest = RunManifest::new(Some(CodeIdentity::of(&f)));
    output(g, "congruence.json", "congruence", &manifest, &report, || {
        congruence_table(&report)
    })
}

fn shard_plan(s: usize, t: usize, block_size: u64) -> Result<(), Failure> {
    let plan = plan_shards(s, t, block_size)?;
    print!("{}", plan.manifest());
    Ok(())
}

fn census_options(g: &Global, block_size: u64) -> CensusOptions {
    CensusOptions {
        workers: g.workers,
        block_size,
        long_run: g.long_run,
        ..Default::default()
    }
}

fn census_table(c: &WeightCensus) -> String {
    let mut s = format!("complete up to weight {}\n", c.complete_upto);
    for (w, n) in &c.counts {
        let _ = writeln!(s, "{w:>6} {n:>24}");
    }
    s
}

fn census(g: &Global, t: usize, block_size: u64, shard: Option<usize>, fragment: Option<&Path>) -> Result<(), Failure> {
    let f = family_for(g)?;
    let options = census_options(g, block_size);
    let manifest = RunManifest::new(Some(CodeIdentity::of(&f)));
    let started = Instant::now();
    match (shard, fragment) {
        (Some(index), Some(path)) => {
            let plan = CensusPlan::new(&f, t, block_size)?;
            if index >= plan.units.len() {
                return Err(Failure::Usage(format!(
                    "shard index {index} outside 0..{}",
                    plan.units.len()
                )));
            }
            let frag = run_shards(&f, t, &options, Some(&[index]))?.remove(0);
            eprintln!("shard {index} of {} in {:.2?}", plan.units.len(), started.elapsed());
            let json = artifact::to_json(&manifest, "fragment", &frag);
            std::fs::write(path, json).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(())
        }
        _ => {
            let result = run_census(&f, t, &options)?;
            eprintln!(
                "census of {} patterns in {:.2?}",
                census_cost(f.k(), t),
                started.elapsed()
            );
            output(g, "census.json", "census", &manifest, &result, || census_table(&result))
        }
    }
}

fn census_merge(g: &Global, paths: &[std::path::PathBuf]) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(None);
    let mut fragments: Vec<Fragment> = Vec::new();
    for path in paths {
        let text = artifact::read_input(path, &mut manifest)?;
        fragments.push(artifact::parse::<Fragment>(&text, &path.display().to_string())?.payload);
    }
    let merged = merge_censuses(&fragments)?;
    if g.p.is_some() {
        let f = family_for(g)?;
        if merged.code_id != f.code_id() {
            return Err(Failure::Check(format!(
                "fragments belong to {} but --p selects {}",
                merged.code_id,
                f.code_id()
            )));
        }
        manifest.code = Some(CodeIdentity::of(&f));
    }
    output(g, "census.json", "census", &manifest, &merged, || census_table(&merged))
}

fn load_constraint(text: &str, what: &str, weight: usize) -> Result<CongruenceConstraint, Failure> {
    if let Ok(report) = artifact::parse::<CongruenceReport>(text, what) {
        return report
            .payload
            .constraint(weight)
            .cloned()
            .ok_or_else(|| Failure::Usage(format!("{what} has no congruence for weight {weight}")));
    }
    let c = artifact::parse::<CongruenceConstraint>(text, what)?.payload;
    if c.weight != weight {
        return Err(Failure::Usage(format!(
            "{what} is for weight {}, need {weight}",
            c.weight
        )));
    }
    Ok(c)
}

pub fn distribution_table(sol: &GleasonSolution) -> String {
    let n = sol.p as usize + 1;
    let mut s = format!(
        "{:>4} {:>28} {:>28}\n",
        "j",
        format!("[{}, {}] augmented", sol.p, n / 2),
        format!("[{}, {}] extended", n, n / 2)
    );
    for j in 0..n / 2 {
        let aug = &sol.a_augmented[j];
        let ext = &sol.a_extended[j];
        if *aug != BigInt::default() || *ext != BigInt::default() {
            let _ = writeln!(s, "{j:>4} {aug:>28} {ext:>28}");
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct SolveOutput<'a> {
    solution: &'a GleasonSolution,
    top_cross_check: Option<bool>,
}

fn solve_cmd(
    g: &Global,
    census_path: Option<&Path>,
    inject: &[(usize, String)],
    min_distance: Option<usize>,
    constraint_path: Option<&Path>,
) -> Result<(), Failure> {
    let f = family_for(g)?;
    let m = gleason_m(f.p)?;
    let mut manifest = RunManifest::new(Some(CodeIdentity::of(&f)));
    let mut known: BTreeMap<usize, BigInt> = BTreeMap::from([(0, BigInt::from(1))]);
    if let Some(d) = min_distance {
        known.extend((1..d).map(|w| (w, BigInt::default())));
    }
    if let Some(path) = census_path {
        let text = artifact::read_input(path, &mut manifest)?;
        let loaded = artifact::parse::<WeightCensus>(&text, "census")?;
        artifact::check_identity(loaded.manifest.as_ref(), &f, "census")?;
        if loaded.payload.code_id != f.code_id() {
            return Err(Failure::Check(format!("census belongs to {}", loaded.payload.code_id)));
        }
        known.extend(loaded.payload.counts.iter().map(|(w, c)| (*w, BigInt::from(*c))));
    }
    for (w, c) in inject {
        known.insert(*w, c.parse().expect("validated by the argument parser"));
    }
    let constraint = match constraint_path {
        Some(path) => {
            let text = artifact::read_input(path, &mut manifest)?;
            Some(load_constraint(&text, "constraint", 2 * m)?)
        }
        None => None,
    };
    let solution = solve(&f, &known, constraint.as_ref())?;
    let top_cross_check = match (&constraint, solution.sign_certificate.is_none()) {
        (Some(c), true) => {
            let lower: BTreeMap<usize, BigInt> = known
                .iter()
                .filter(|(w, _)| **w < 2 * m)
                .map(|(w, a)| (*w, a.clone()))
                .collect();
            let resolved = resolve_top_coefficient(&f, &lower, c)?;
            Some(resolved.a_top == solution.a_extended[2 * m])
        }
        _ => None,
    };
    let failed: Vec<InvariantCheck> = verify_solution(&solution).into_iter().filter(|c| !c.passed).collect();
    output(
        g,
        "solution.json",
        "solution",
        &manifest,
        &SolveOutput {
            solution: &solution,
            top_cross_check,
        },
        || distribution_table(&solution),
    )?;
    if top_cross_check == Some(false) {
        return Err(Failure::Check(
            "resolved top coefficient disagrees with the supplied count".into(),
        ));
    }
    if let Some(c) = failed.first() {
        return Err(Failure::Check(format!("invariant {} failed", c.name)));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct StoredSolution {
    solution: GleasonSolution,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    p: u64,
    checks: Vec<InvariantCheck>,
    passed: bool,
}

fn verify(g: &Global, path: &Path) -> Result<(), Failure> {
    let f = family_for(g)?;
    let mut manifest = RunManifest::new(Some(CodeIdentity::of(&f)));
    let text = artifact::read_input(path, &mut manifest)?;
    let (loaded_manifest, solution) = match artifact::parse::<StoredSolution>(&text, "table") {
        Ok(l) => (l.manifest, l.payload.solution),
        Err(_) => {
            let l = artifact::parse::<GleasonSolution>(&text, "table")?;
            (l.manifest, l.payload)
        }
    };
    artifact::check_identity(loaded_manifest.as_ref(), &f, "table")?;
    if solution.p != f.p {
        return Err(Failure::Check(format!(
            "table is for p = {}, --p is {}",
            solution.p, f.p
        )));
    }
    let checks = verify_solution(&solution);
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport { p: f.p, checks, passed };
    output(g, "verify.json", "verify", &manifest, &report, || {
        report
            .checks
            .iter()
            .map(|c| format!("{} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name))
            .collect()
    })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check("stored distribution fails its invariants".into()))
    }
}

#[derive(Debug, Serialize)]
struct PipelineSummary {
    p: u64,
    t: usize,
    census_checks: Vec<(usize, CandidateVerdict)>,
    top_route_agrees: Option<bool>,
    checks: Vec<InvariantCheck>,
}

fn pipeline(g: &Global, t: usize, block_size: u64) -> Result<(), Failure> {
    let f = family_for(g).map_err(|e| e.at("construct"))?;
    let m = gleason_m(f.p).map_err(|e| Failure::from(e).at("construct"))?;
    let identity = CodeIdentity::of(&f);
    let manifest = RunManifest::new(Some(identity));
    let options = census_options(g, block_size);
    let cost = census_cost(f.k(), t);
    if !g.long_run && cost > u128::from(options.budget) {
        return Err(Failure::from(qrwd::census::CensusError::BudgetExceeded {
            required: cost,
            budget: options.budget,
        })
        .at("census"));
    }
    if 2 * t + 2 < 2 * m {
        return Err(Failure::Usage(format!(
            "census: t = {t} leaves A{}..A{} unknown",
            2 * t + 2,
            2 * m - 2
        )));
    }

    let json_out = |name: &str, kind: &str, payload: &dyn erased::Json| -> Result<(), Failure> {
        if let Some(dir) = &g.out {
            artifact::emit(Some(dir), name, &payload.to_artifact(&manifest, kind))?;
        }
        Ok(())
    };
    json_out("construct.json", "construct", &construct_report(&f))?;

    let started = Instant::now();
    let weights: Vec<usize> = (2..=2 * m.max(t))
        .step_by(2)
        .filter(|&w| w <= 2 * t || w == 2 * m)
        .collect();
    let overrides = default_overrides(g, f.p, &weights)?;
    let congruences = compute_congruences(&f, &weights, &enumeration_options(g), &overrides)
        .map_err(|e| Failure::from(e).at("congruence"))?;
    eprintln!("congruence stage in {:.2?}", started.elapsed());
    json_out("congruence.json", "congruence", &congruences)?;

    let started = Instant::now();
    let census = run_census(&f, t, &options).map_err(|e| Failure::from(e).at("census"))?;
    eprintln!("census stage in {:.2?}", started.elapsed());
    json_out("census.json", "census", &census)?;

    let census_checks: Vec<(usize, CandidateVerdict)> = census
        .counts
        .iter()
        .filter_map(|(w, c)| {
            congruences
                .constraint(*w)
                .map(|k| (*w, check_candidate(k, &BigInt::from(*c))))
        })
        .collect();

    let mut known: BTreeMap<usize, BigInt> = census.counts.iter().map(|(w, c)| (*w, BigInt::from(*c))).collect();
    known.retain(|w, _| *w <= 2 * m);
    let top = congruences.constraint(2 * m).cloned();
    let solution = solve(&f, &known, top.as_ref()).map_err(|e| Failure::from(e).at("solve"))?;
    let top_route_agrees = match (&top, solution.sign_certificate.is_none()) {
        (Some(c), true) => {
            let lower: BTreeMap<usize, BigInt> = known
                .iter()
                .filter(|(w, _)| **w < 2 * m)
                .map(|(w, a)| (*w, a.clone()))
                .collect();
            let resolved = resolve_top_coefficient(&f, &lower, c).map_err(|e| Failure::from(e).at("solve"))?;
            Some(resolved.a_top == solution.a_extended[2 * m])
        }
        _ => None,
    };
    json_out(
        "solution.json",
        "solution",
        &SolveOutput {
            solution: &solution,
            top_cross_check: top_route_agrees,
        },
    )?;

    let checks = verify_solution(&solution);
    let summary = PipelineSummary {
        p: f.p,
        t,
        census_checks,
        top_route_agrees,
        checks,
    };
    json_out("verify.json", "pipeline", &summary)?;
    match g.format {
        Format::Table => print!("{}", distribution_table(&solution)),
        Format::Json if g.out.is_none() => print!(
            "{}",
            artifact::to_json(
                &manifest,
                "pipeline",
                &SolveOutput {
                    solution: &solution,
                    top_cross_check: top_route_agrees,
                }
            )
        ),
        Format::Json => {}
    }
    if let Some((w, v)) = summary.census_checks.iter().find(|(_, v)| v.accepted().is_none()) {
        return Err(Failure::Check(format!(
            "verify: census count A{w} violates its congruence: {v:?}"
        )));
    }
    if summary.top_route_agrees == Some(false) {
        return Err(Failure::Check(
            "verify: sign-resolved A_2m disagrees with the census".into(),
        ));
    }
    if let Some(c) = summary.checks.iter().find(|c| !c.passed) {
        return Err(Failure::Check(format!("verify: invariant {} failed", c.name)));
    }
    eprintln!("pipeline p = {}: all checks pass", f.p);
    Ok(())
}

mod erased {
    use serde::Serialize;

    use crate::artifact::{self, RunManifest};

    /// Object-safe serialization into an artifact.
    pub trait Json {
        fn to_artifact(&self, manifest: &RunManifest, kind: &str) -> String;
    }

    impl<T: Serialize> Json for T {
        fn to_artifact(&self, manifest: &RunManifest, kind: &str) -> String {
            artifact::to_json(manifest, kind, self)
        }
    }
}

fn regression_table(r: &RegressionReport) -> String {
    r.checks
        .iter()
        .map(|c| {
            let flag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                format!("{flag} {}\n", c.name)
            } else {
                format!("{flag} {}: {}\n", c.name, c.detail)
            }
        })
        .collect()
}

fn regression(g: &Global, fixture: Option<&Path>, perturb: Option<(usize, i64)>, swap: bool) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(None);
    let fx = match fixture {
        Some(path) => PublishedFixture::from_json(&artifact::read_input(path, &mut manifest)?)?,
        None => PublishedFixture::p137(),
    };
    let perturbation = match (perturb, swap) {
        (Some(_), true) => return Err(Failure::Usage("choose one perturbation".into())),
        (Some((weight, delta)), false) => Some(Perturbation::ShiftExactCount { weight, delta }),
        (None, true) => Some(Perturbation::SwapTopCongruence),
        (None, false) => None,
    };
    let started = Instant::now();
    let report = published_regression(&fx, perturbation)?;
    eprintln!("regression in {:.2?}", started.elapsed());
    if let Ok(f) = build_family(fx.p) {
        manifest.code = Some(CodeIdentity::of(&f));
    }
    output(g, "regression.json", "paper-regression", &manifest, &report, || {
        regression_table(&report)
    })?;
    match report.first_failure() {
        None => {
            let k = report
                .solution
                .as_ref()
                .map(|s| s.k[s.m].to_string())
                .unwrap_or_default();
            eprintln!("regression: PASS, K_top = {k}");
            Ok(())
        }
        Some(c) => {
            let certificate = match &report.certificate {
                Some(cert) if cert.accepted.is_none() => " (both-rejected certificate attached)",
                _ => "",
            };
            Err(Failure::Check(format!("{}: {}{certificate}", c.name, c.detail)))
        }
    }
}
