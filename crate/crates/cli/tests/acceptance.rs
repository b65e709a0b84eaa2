//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bapkit::linalg::Matrix;
use bapkit::normability::{dv_condition_check, Evidence, Outcome, Tolerances};
use bapkit::pelczynski::verify_instance;
use bapkit::seminorm::SeminormSystem;
use bapkit::vogt::{bap_failure_witness, norm_positivity_check, nuclearity_certificate, VogtInstance};
use bapkit::{instances, BigRational, Scalar};
use bapkit_cli::config::RunConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Q = BigRational;

const SEED: u64 = 7;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let inst = VogtInstance::<Q>::dyadic(20, 6, 6, 4).map_err(|e| e.to_string())?;
    let w = bap_failure_witness(&inst, 1, 3, 20).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(w.mu == 2 && w.p == 2, || format!("selected mu = {}, p = {}", w.mu, w.p))?;
    let x3_1 = &w.decay[2].direct;
    let x3_2 = &w.floor_trace[2].direct;
    let d53 = w.cauchy_value(3, 5).ok_or("pair (3, 5) missing")?;
    ensure(*x3_1 == q(1, 256), || format!("|x_3|_1 = {x3_1}"))?;
    ensure(*x3_2 == q(14, 1), || format!("|x_3|_2 = {x3_2}"))?;
    ensure(w.floor == q(8, 1), || format!("floor = {}", w.floor))?;
    ensure(*d53 == q(45927, 1024), || format!("|x_5 - x_3|_3 = {d53}"))?;
    let identical = w.decay.iter().chain(&w.floor_trace).all(|t| t.direct == t.closed)
        && w.cauchy.iter().all(|c| c.value.direct == c.value.closed);
    ensure(identical, || "direct and closed-form values differ".into())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("mu = 2, p = 2, 1/256, 14, floor 8, 45927/1024 in {elapsed:.2?}"))
}

fn criterion_2() -> Result<String, String> {
    let inst = VogtInstance::<Q>::dyadic(50, 6, 6, 3).map_err(|e| e.to_string())?;
    let w = bap_failure_witness(&inst, 1, 3, 50).map_err(|e| e.to_string())?;
    for pair in w.decay.windows(2) {
        ensure(pair[1].direct < pair[0].direct, || "decay not strict".into())?;
        ensure(pair[1].direct.clone() * q(4, 1) == pair[0].direct, || "decay ratio is not 1/4".into())?;
    }
    for (m, t) in w.floor_trace.iter().enumerate() {
        ensure(t.direct >= q(8, 1), || format!("|x_{}|_2 = {} < 8", m + 1, t.direct))?;
    }
    for c in &w.cauchy {
        let bound = q(81 * 4, 1) * Scalar::pow(&q(3, 4), c.l as u32 + 1);
        ensure(c.tail_bound == bound, || format!("tail bound at l = {} is {}", c.l, c.tail_bound))?;
        ensure(c.value.direct <= bound, || format!("|x_{} - x_{}|_3 exceeds the tail bound", c.m, c.l))?;
    }
    Ok(format!("m <= 50, {} Cauchy pairs, zero violations", w.cauchy.len()))
}

fn criterion_3() -> Result<String, String> {
    let inst = VogtInstance::<Q>::dyadic(12, 12, 12, 3).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (p, limit) in [(1usize, q(1, 1)), (2, q(8, 1))] {
        let c = nuclearity_certificate(&inst, p).map_err(|e| e.to_string())?;
        let r = q(p as i64, p as i64 + 1);
        let expected = Scalar::pow(&(r.clone() / (q(1, 1) - r)), 3);
        ensure(c.limit == limit && expected == limit, || format!("limit for p = {p} is {}", c.limit))?;
        ensure(c.terms_match, || format!("a term differs from r^(n+mu+nu) at p = {p}"))?;
        ensure(c.partial_sums.windows(2).all(|s| s[0] <= s[1]), || format!("partial sums not monotone at p = {p}"))?;
        let last = c.partial_sums.last().ok_or("no partial sums")?;
        ensure(*last <= limit, || format!("partial sum {last} exceeds {limit}"))?;
        out.push(format!("p = {p}: {:.4} <= {limit}", last.to_f64()));
    }
    Ok(out.join(", "))
}

fn criterion_4() -> Result<String, String> {
    let inst = VogtInstance::<Q>::dyadic(3, 3, 3, 4).map_err(|e| e.to_string())?;
    for p in 1..=4 {
        let r = norm_positivity_check(&inst, p).map_err(|e| e.to_string())?;
        ensure(r.rank == r.dim && r.dim == 27 && r.is_norm(), || format!("p = {p}: rank {} of {}", r.rank, r.dim))?;
    }
    Ok("kernel rank 0 on (3,3,3) for p = 1..4".into())
}

struct Construction {
    elapsed: Duration,
    lists: Vec<(String, usize, usize)>,
}

fn criteria_5_and_6() -> Result<Construction, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let insts = instances::standard::<Q, _>(&mut rng).map_err(|e| e.to_string())?;
    ensure(insts.len() >= 3, || "fewer than three instances".into())?;
    let mut lists = Vec::new();
    for inst in insts {
        let d = inst.system.dim();
        ensure(d <= 12, || format!("{} has dimension {d}", inst.name))?;
        let total = inst
            .family
            .iter()
            .try_fold(Matrix::zeros(d, d), |acc, a| acc.add(a.matrix()))
            .map_err(|e| e.to_string())?;
        ensure(total == Matrix::identity(d), || format!("{}: family does not sum to Id", inst.name))?;
        ensure(inst.family.iter().all(|a| a.rank() <= 2), || format!("{}: rank above 2", inst.name))?;
        let (_, schedule, report) = verify_instance(&inst.name, &inst.system, &inst.family, 500, 200, &mut rng)
            .map_err(|e| format!("{}: {e}", inst.name))?;
        let name = &inst.name;
        ensure(schedule.total() == Matrix::identity(d), || format!("{name}: schedule does not sum to Id"))?;
        ensure(schedule.ops.iter().all(|s| s.op.matrix().rank() == 1), || format!("{name}: operator of rank != 1"))?;
        ensure(report.max_block_prefix_ratio <= q(2, 1), || format!("{name}: prefix ratio {}", report.max_block_prefix_ratio))?;
        ensure(report.idempotent && report.section, || format!("{name}: L o L = L or L o I = I fails"))?;
        ensure(
            report.equicontinuity.levels.iter().all(|l| l.omega == l.k),
            || format!("{name}: omega(k) != k"),
        )?;
        ensure(report.sandwich.violations == 0, || format!("{name}: {} sandwich violations", report.sandwich.violations))?;
        ensure(report.passed(), || format!("{name}: report failed"))?;
        lists.push((name.clone(), report.basis_criterion.lists_checked, report.basis_criterion.violations.len()));
    }
    Ok(Construction { elapsed: start.elapsed(), lists })
}

fn criterion_7() -> Result<String, String> {
    let inst = VogtInstance::<Q>::dyadic(20, 6, 6, 5).map_err(|e| e.to_string())?;
    let tol = Tolerances::default();
    for j in 3..=5 {
        let w = bap_failure_witness(&inst, 1, j, 20).map_err(|e| e.to_string())?;
        let ev = Evidence::from_witness(&w, &inst.system).map_err(|e| e.to_string())?;
        let vs = dv_condition_check(&inst.system, 1, &[(2, j)], &[ev], &tol).map_err(|e| e.to_string())?;
        let hit = vs.iter().find(|v| v.outcome == Outcome::Violated);
        let floor = hit.and_then(|v| v.floor.clone());
        ensure(floor == Some(q(8, 1)), || format!("j = {j}: no violated verdict with floor 8"))?;
    }
    let sys = SeminormSystem::<Q>::max_prefix(4, 4).map_err(|e| e.to_string())?;
    let map = [(1, 2), (2, 3), (3, 4)];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let families: Vec<Evidence<Q>> = (0..100)
        .map(|i| {
            let r = q(1, rng.gen_range(2..=9));
            let mut x: Vec<Q> = (0..4).map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect();
            x[i % 4] = q(1, 1);
            let vectors = (1..=12u32)
                .map(|m| x.iter().map(|c| c.clone() * Scalar::pow(&r, m)).collect())
                .collect();
            Evidence::raw(format!("decaying-{i}"), vectors)
        })
        .collect();
    let vs = dv_condition_check(&sys, 1, &map, &families, &tol).map_err(|e| e.to_string())?;
    ensure(vs.iter().all(|v| v.outcome == Outcome::Consistent), || "a max-prefix verdict is violated".into())?;
    Ok(format!("Vogt violated for j = 3, 4, 5 with floor 8; {} max-prefix verdicts consistent", vs.len()))
}

fn strip_timestamp(text: &str) -> Result<Value, String> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("certificate is not an object")?.remove("timestamp");
    Ok(v)
}

fn criterion_8() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut docs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_bapkit"))
            .args(["run", "--suite", "all", "--seed", &SEED.to_string(), "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.code() == Some(0), || format!("run {i} exited with {:?}", status.status.code()))?;
        docs.push(std::fs::read_to_string(&out).map_err(|e| e.to_string())?);
    }
    ensure(strip_timestamp(&docs[0])? == strip_timestamp(&docs[1])?, || "binary certificates differ".into())?;
    let config = RunConfig {
        seed: Some(SEED + 1),
        suites: vec!["vogt".into(), "normability".into()],
        ..RunConfig::default()
    };
    let a = bapkit_cli::run(config.clone()).map_err(|e| e.to_string())?;
    let b = bapkit_cli::run(config).map_err(|e| e.to_string())?;
    ensure(
        strip_timestamp(&a.to_pretty_json())? == strip_timestamp(&b.to_pretty_json())?,
        || "library certificates differ".into(),
    )?;
    Ok("identical certificates modulo timestamp".into())
}

fn report(failures: &mut usize, n: usize, title: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("PASS criterion {n}: {title} ({detail})"),
        Err(detail) => {
            *failures += 1;
            println!("FAIL criterion {n}: {title} ({detail})");
        }
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    report(&mut failures, 1, "Vogt witness exactness", criterion_1());
    report(&mut failures, 2, "witness property suite", criterion_2());
    report(&mut failures, 3, "nuclearity certificate", criterion_3());
    report(&mut failures, 4, "norm positivity", criterion_4());
    let construction = criteria_5_and_6();
    let c5 = construction.as_ref().map_err(Clone::clone).and_then(|c| {
        ensure(c.elapsed < Duration::from_secs(30), || format!("took {:.2?}", c.elapsed))?;
        Ok(format!("3 instances in {:.2?}", c.elapsed))
    });
    report(&mut failures, 5, "Pelczynski construction suite", c5);
    let c6 = construction.as_ref().map_err(Clone::clone).and_then(|c| {
        for (name, lists, violations) in &c.lists {
            ensure(*lists == 200 && *violations == 0, || format!("{name}: {violations} violations over {lists} lists"))?;
        }
        Ok(format!("200 lists per instance on {} instances, zero violations", c.lists.len()))
    });
    report(&mut failures, 6, "basis criterion", c6);
    report(&mut failures, 7, "normability verdicts", criterion_7());
    report(&mut failures, 8, "determinism", criterion_8());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
