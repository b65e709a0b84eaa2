//! The three verification suites, generic over the scalar field.

use bapkit::instances::{self, Instance};
use bapkit::linalg::Matrix;
use bapkit::normability::{
    basis_sup_norms, dv_condition_check, injective_extension_test, CauchyFamily, DiagnosticVerdict,
    Evidence, Outcome, Tolerances,
};
use bapkit::operator::FiniteRankOperator;
use bapkit::pelczynski::verify_instance;
use bapkit::seminorm::{RhoTable, SeminormSystem};
use bapkit::vogt::{
    bap_failure_witness, comparison_inequality_check, norm_positivity_check, nuclearity_certificate,
    sparse_samples, VogtInstance,
};
use bapkit::{sampling, Error, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::certificate::{Check, SuiteResult};
use crate::config::{InstanceSpec, KoetheInstance, RhoSpec, RunConfig, Suite};
use crate::CliError;

/// One independent stream per suite so results do not depend on which suites run.
fn suite_rng(seed: u64, suite: Suite) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64 + 1);
    rng
}

fn scalar<S: Scalar>(v: &Value) -> Result<S, CliError> {
    S::from_json(v).map_err(|e| CliError::Config(e.to_string()))
}

fn scalars<S: Scalar>(rows: &[Vec<Value>]) -> Result<Vec<Vec<S>>, CliError> {
    rows.iter()
        .map(|r| r.iter().map(scalar).collect())
        .collect()
}

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn rho_table<S: Scalar>(spec: &RhoSpec, mu_max: usize, nu_max: usize) -> Result<RhoTable<S>, CliError> {
    match spec {
        RhoSpec::Formula(_) => Ok(RhoTable::dyadic(mu_max, nu_max)),
        RhoSpec::Table(rows) => RhoTable::from_values(scalars(rows)?).map_err(config_err),
    }
}

pub fn vogt_instance<S: Scalar>(
    spec: &RhoSpec,
    bx: [usize; 3],
    levels: usize,
) -> Result<VogtInstance<S>, CliError> {
    let rho = rho_table(spec, bx[1], bx[2])?;
    let b = bapkit::space::TruncationBox::triple(bx[0], bx[1], bx[2]).map_err(config_err)?;
    VogtInstance::new(b, levels, rho).map_err(config_err)
}

fn fmt_list<S: Scalar>(v: &[S]) -> String {
    let items: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

pub fn run_suite<S: Scalar>(suite: Suite, config: &RunConfig) -> Result<SuiteResult, CliError> {
    let seed = config.seed.expect("validated config has a seed");
    let mut rng = suite_rng(seed, suite);
    match suite {
        Suite::Vogt => vogt_suite::<S>(config, &mut rng),
        Suite::Pelczynski => pelczynski_suite::<S>(config, &mut rng),
        Suite::Normability => normability_suite::<S>(config, &mut rng),
    }
}

fn vogt_suite<S: Scalar>(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let v = &config.vogt;
    let inst = vogt_instance::<S>(&v.rho, v.bx, v.levels)?;
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();

    match bap_failure_witness(&inst, v.p0, v.q, v.length) {
        Ok(w) => {
            let q = S::from_count(w.q);
            let mut minimal = w.rho.clone() * q.clone() < S::one();
            for mu in 1..w.mu {
                minimal &= inst.rho.get(mu, w.p).is_ok_and(|r| !(r * q.clone() < S::one()));
            }
            checks.push(Check::new(
                "vogt.witness.row",
                "the chosen row mu is the smallest with rho(mu, p) * q < 1",
                minimal,
                format!("mu = {}, p = {}, rho = {}", w.mu, w.p, w.rho),
            ));
            let points = w.cauchy.len() + w.decay.len() + w.floor_trace.len();
            let mut observed = format!("{points} trace values agree");
            if w.length >= 5 {
                observed = format!(
                    "{observed}; |x_3|_{} = {}, |x_3|_{} = {}, |x_5 - x_3|_{} = {}",
                    w.p0,
                    w.decay[2].direct,
                    w.p,
                    w.floor_trace[2].direct,
                    w.q,
                    w.cauchy_value(3, 5).expect("pair present"),
                );
            }
            checks.push(Check::new(
                "vogt.witness.oracle",
                "direct summation equals the closed forms on the Cauchy, decay and floor traces",
                w.oracle_agrees(),
                observed,
            ));
            let ratio = w.rho.clone() * S::from_count(w.p0);
            let exact_ratio = w
                .decay
                .windows(2)
                .all(|p| p[1].direct.approx_eq(&(ratio.clone() * p[0].direct.clone())));
            checks.push(Check::new(
                "vogt.witness.decay",
                "|x_m|_p0 is strictly decreasing with ratio rho * p0",
                w.decay_strict() && exact_ratio,
                format!(
                    "ratio {ratio}, last value {}",
                    w.decay.last().expect("nonempty").direct
                ),
            ));
            let min_floor = w
                .floor_trace
                .iter()
                .map(|t| t.direct.clone())
                .fold(None, |acc: Option<S>, v| match acc {
                    Some(a) if a < v => Some(a),
                    _ => Some(v),
                })
                .expect("nonempty");
            checks.push(
                Check::new(
                    "vogt.witness.floor",
                    "|x_m|_p >= p^(mu+p+1) * rho for every m",
                    w.floor_holds(),
                    format!("min {min_floor}, floor {}", w.floor),
                )
                .with_margin(min_floor - w.floor.clone()),
            );
            let slack = w
                .cauchy
                .iter()
                .map(|c| c.tail_bound.clone() - c.value.direct.clone())
                .fold(None, |acc: Option<S>, v| match acc {
                    Some(a) if a < v => Some(a),
                    _ => Some(v),
                });
            let mut check = Check::new(
                "vogt.witness.cauchy",
                "|x_m - x_l|_q <= q^(mu+p) (rho q)^(l+1) / (1 - rho q) for all l < m",
                w.cauchy_within_tail(),
                format!("{} pairs", w.cauchy.len()),
            );
            if let Some(s) = slack {
                check = check.with_margin(s);
            }
            checks.push(check);
            let highlight = |v: Option<&S>| v.map_or(Value::Null, Scalar::to_json);
            data.insert(
                "highlights".into(),
                json!({
                    "x3_p0": highlight(w.decay.get(2).map(|t| &t.direct)),
                    "x3_p": highlight(w.floor_trace.get(2).map(|t| &t.direct)),
                    "x5_minus_x3_q": highlight(w.cauchy_value(3, 5)),
                    "floor": w.floor.to_json(),
                }),
            );
            data.insert("witness".into(), to_value(&w));
        }
        Err(e) => checks.push(Check::new(
            "vogt.witness",
            "a witness sequence exists in the box",
            false,
            e.to_string(),
        )),
    }

    let mut nuclear = Vec::new();
    for &p in &v.nuclearity_levels {
        let c = nuclearity_certificate(&inst, p).map_err(config_err)?;
        let last = c.partial_sums.last().cloned().unwrap_or_else(S::zero);
        checks.push(
            Check::new(
                format!("vogt.nuclearity.p{p}"),
                "box partial sums of |e|'_p |u|_(p+1) are nondecreasing, match sum count(k) r^k, stay below (r/(1-r))^3, and every term is r^(n+mu+nu)",
                c.passed(),
                format!("sum {last}, limit {}", c.limit),
            )
            .with_margin(c.limit.clone() - last),
        );
        nuclear.push(to_value(&c));
    }
    data.insert("nuclearity".into(), Value::Array(nuclear));

    let pos = vogt_instance::<S>(&v.rho, v.positivity_box, v.positivity_levels)?;
    let mut positivity = Vec::new();
    for p in 1..=v.positivity_levels {
        match norm_positivity_check(&pos, p) {
            Ok(r) => {
                checks.push(Check::new(
                    format!("vogt.positivity.p{p}"),
                    "the coordinate functionals of level p have trivial kernel on the box",
                    r.is_norm(),
                    format!("rank {} of {}, {} divergence thresholds", r.rank, r.dim, r.certificates.len()),
                ));
                positivity.push(to_value(&r));
            }
            Err(e) => checks.push(Check::new(
                format!("vogt.positivity.p{p}"),
                "the coordinate functionals of level p have trivial kernel on the box",
                false,
                e.to_string(),
            )),
        }
    }
    data.insert("positivity".into(), Value::Array(positivity));

    let samples = sparse_samples(&inst, v.comparison_samples, 6, rng);
    let report = comparison_inequality_check(&inst, &samples).map_err(config_err)?;
    checks.push(Check::new(
        "vogt.comparison",
        "|x|_p <= |x|'_p on sampled sparse vectors at every level",
        report.passed(),
        format!(
            "{} samples x {} levels, {} violations",
            report.samples,
            report.levels,
            report.violations.len()
        ),
    ));
    if !report.violations.is_empty() {
        data.insert("comparison_violations".into(), to_value(&report.violations));
    }
    Ok(SuiteResult::new(Suite::Vogt.name(), checks, Value::Object(data)))
}

fn koethe_instance<S: Scalar>(k: &KoetheInstance) -> Result<Instance<S>, CliError> {
    let system = SeminormSystem::koethe(k.combine, scalars(&k.weights)?).map_err(config_err)?;
    let family = k
        .family
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            let m = Matrix::from_rows(scalars(rows)?).map_err(config_err)?;
            FiniteRankOperator::from_matrix(m, format!("A{}", i + 1)).map_err(config_err)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Instance {
        name: k.name.clone(),
        system,
        family,
    })
}

pub fn construction_instance<S: Scalar, R: Rng + ?Sized>(
    spec: &InstanceSpec,
    config: &RunConfig,
    rng: &mut R,
) -> Result<Instance<S>, CliError> {
    let p = &config.pelczynski;
    match spec {
        InstanceSpec::Named(name) => match name.as_str() {
            "identity" => instances::identity_1d(3).map_err(config_err),
            "telescoped" => instances::telescoped_projections(p.telescoped_dim).map_err(config_err),
            "random" => instances::random_low_rank(rng, p.random_dim, p.random_levels).map_err(config_err),
            other => Err(CliError::Config(format!("unknown instance {other:?}"))),
        },
        InstanceSpec::Koethe(k) => koethe_instance(k),
        InstanceSpec::File { file } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", file.display())))?;
            let k: KoetheInstance = serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!(
                    "{}: {e} (byte offset {})",
                    file.display(),
                    crate::error_offset(&text, &e)
                ))
            })?;
            koethe_instance(&k)
        }
    }
}

fn pelczynski_suite<S: Scalar>(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let p = &config.pelczynski;
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    for spec in &p.instances {
        let inst = construction_instance::<S, _>(spec, config, rng)?;
        let id = |s: &str| format!("pelczynski.{}.{s}", inst.name);
        let r = match verify_instance(&inst.name, &inst.system, &inst.family, p.samples, p.coefficient_lists, rng) {
            Ok((_, _, r)) => r,
            Err(e) => {
                checks.push(Check::new(id("construction"), "the rank-one schedule and its estimates are constructed", false, e.to_string()));
                continue;
            }
        };
        checks.push(Check::new(
            id("total"),
            "the scheduled operators sum to the sum of the family, exactly",
            r.schedule_reproduces_family,
            format!("{} operators from {} blocks, replication {:?}", r.schedule_len, r.family_len, r.replication_counts),
        ));
        checks.push(Check::new(
            id("rank_one"),
            "every scheduled operator has rank one",
            r.all_rank_one,
            format!("block ranks {:?}", r.ranks),
        ));
        let two = S::from_count(2);
        checks.push(
            Check::new(
                id("prefix_bound"),
                "|sum_(i<=q) C_i e|_k <= 2 |e|_k for sampled e in each block range",
                r.max_block_prefix_ratio.leq(&two),
                format!("max ratio {} over {} samples per block", r.max_block_prefix_ratio, p.samples),
            )
            .with_margin(two - r.max_block_prefix_ratio.clone()),
        );
        let levels = &r.equicontinuity.levels;
        let ms: Vec<S> = levels.iter().map(|l| l.m_k.clone()).collect();
        let ratios: Vec<S> = levels.iter().map(|l| l.max_ratio.clone()).collect();
        let ls: Vec<usize> = levels.iter().map(|l| l.l).collect();
        checks.push(Check::new(
            id("equicontinuity"),
            "sup_n |sum_(s<=n) A~_s x|_k <= 5 M_k |x|_l(k) on sampled x",
            levels.iter().all(|l| l.max_ratio.leq(&l.k_k)),
            format!("M = {}, l = {ls:?}, max observed ratio {}", fmt_list(&ms), fmt_list(&ratios)),
        ));
        checks.push(Check::new(
            id("sandwich"),
            "|x|_k <= |||I(x)|||_k <= 5 M_k |x|_omega(k) on sampled x",
            r.sandwich.violations == 0,
            format!(
                "{} violations, min lower slack {}, min upper slack {}",
                r.sandwich.violations,
                fmt_list(&r.sandwich.lower),
                fmt_list(&r.sandwich.upper)
            ),
        ));
        checks.push(Check::new(
            id("projection"),
            "L(L(y)) = L(y) and L(I(x)) = I(x), exactly",
            r.idempotent && r.section,
            format!("idempotent {}, section {}", r.idempotent, r.section),
        ));
        checks.push(Check::new(
            id("complemented"),
            "the range of L equals the image of I",
            r.complemented,
            format!("{}", r.complemented),
        ));
        checks.push(Check::new(
            id("reconstruction"),
            "the full schedule reproduces every sampled x",
            r.reconstruction_exact,
            format!("{}", r.reconstruction_exact),
        ));
        checks.push(Check::new(
            id("basis_criterion"),
            "|||sum_(s<=n) c_s e_s|||_k <= |||sum_(s<=n+1) c_s e_s|||_k for random coefficients",
            r.basis_criterion.violations.is_empty(),
            format!(
                "{} lists, {} violations",
                r.basis_criterion.lists_checked,
                r.basis_criterion.violations.len()
            ),
        ));
        reports.push(to_value(&r));
    }
    Ok(SuiteResult::new(
        Suite::Pelczynski.name(),
        checks,
        json!({ "instances": reports }),
    ))
}

fn verdict_summary<S: Scalar>(v: &DiagnosticVerdict<S>) -> String {
    let floor = v.floor.as_ref().map_or("none".to_string(), ToString::to_string);
    format!(
        "{} (k0 = {}, k = {}, j = {}), floor {floor}",
        match v.outcome {
            Outcome::Violated => "violated",
            Outcome::Consistent => "consistent",
        },
        v.k0,
        v.k,
        v.j
    )
}

fn normability_suite<S: Scalar>(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let n = &config.normability;
    let v = &config.vogt;
    let tol = Tolerances {
        decay: S::from_f64(config.tolerances.decay).expect("finite tolerance"),
    };
    let mut checks = Vec::new();
    let mut verdicts = Vec::new();

    let top = n.vogt_j.iter().copied().max().unwrap_or(3).max(v.levels).max(3);
    let inst = vogt_instance::<S>(&v.rho, v.bx, top)?;
    for &j in &n.vogt_j {
        let outcome = bap_failure_witness(&inst, 1, j, v.length)
            .and_then(|w| Evidence::from_witness(&w, &inst.system))
            .and_then(|e| dv_condition_check(&inst.system, 1, &[(2, j)], &[e], &tol));
        match outcome {
            Ok(vs) => {
                let hit = vs.iter().find(|x| x.outcome == Outcome::Violated);
                checks.push(Check::new(
                    format!("normability.vogt.j{j}"),
                    "a family Cauchy at level j and null at level 1 stays bounded below at level 2",
                    hit.is_some(),
                    hit.map_or_else(|| verdict_summary(&vs[0]), verdict_summary),
                ));
                verdicts.extend(vs.iter().map(to_value));
            }
            Err(e) => checks.push(Check::new(
                format!("normability.vogt.j{j}"),
                "a family Cauchy at level j and null at level 1 stays bounded below at level 2",
                false,
                e.to_string(),
            )),
        }
    }

    let injective = bap_failure_witness(&inst, 1, 3, v.length)
        .and_then(|w| Evidence::from_witness(&w, &inst.system))
        .and_then(|e| CauchyFamily::new(&inst.system, 3, e))
        .and_then(|f| injective_extension_test(&inst.system, 1, 3, Some(2), &f, &tol));
    match injective {
        Ok(verdict) => {
            checks.push(Check::new(
                "normability.injective_extension",
                "the inclusion from level 3 to level 1 has a family that is Cauchy, null below and bounded below at level 2",
                verdict.outcome == Outcome::Violated,
                verdict_summary(&verdict),
            ));
            verdicts.push(to_value(&verdict));
        }
        Err(e) => checks.push(Check::new(
            "normability.injective_extension",
            "the inclusion from level 3 to level 1 has a family that is Cauchy, null below and bounded below at level 2",
            false,
            e.to_string(),
        )),
    }

    let d = n.prefix_dim;
    let sys = SeminormSystem::<S>::max_prefix(d, d).map_err(config_err)?;
    let map: Vec<(usize, usize)> = (1..d).map(|k| (k, k + 1)).collect();
    let families: Vec<Evidence<S>> = (0..n.families)
        .map(|i| {
            let r = S::from_ratio(1, [4, 5, 8][rng.gen_range(0..3)]);
            let mut x = sampling::vector::<S, _>(rng, d);
            if x.iter().all(|c| c.is_zero()) {
                x[0] = S::one();
            }
            let vectors = (1..=n.family_length)
                .map(|m| x.iter().map(|c| c.clone() * r.pow(m as u32)).collect())
                .collect();
            Evidence::raw(format!("decaying-{}", i + 1), vectors)
        })
        .collect();
    match dv_condition_check(&sys, 1, &map, &families, &tol) {
        Ok(vs) => {
            let violated = vs.iter().filter(|x| x.outcome == Outcome::Violated).count();
            checks.push(Check::new(
                "normability.max_prefix",
                "decaying families give no evidence against the condition on the max-prefix system with j(k) = k + 1",
                violated == 0,
                format!("{} verdicts over {} families, {violated} violated", vs.len(), families.len()),
            ));
        }
        Err(e) => checks.push(Check::new(
            "normability.max_prefix",
            "decaying families give no evidence against the condition on the max-prefix system with j(k) = k + 1",
            false,
            e.to_string(),
        )),
    }

    let zero = Evidence::raw("zero", vec![vec![S::zero(); d]; n.family_length.max(3)]);
    let zv = dv_condition_check(&sys, 1, &[(1, 2)], &[zero], &tol).map_err(config_err)?;
    checks.push(Check::new(
        "normability.zero_family",
        "the zero family is consistent",
        zv.iter().all(|x| x.outcome == Outcome::Consistent),
        verdict_summary(&zv[0]),
    ));

    // Basis (1,0), (2,1) in the l1 norm: |y|_1 = 3 > 2 = |y| for y = (-1, 1).
    let q = |a: i64| S::from_ratio(a, 1);
    let ops = vec![
        Matrix::from_rows(vec![vec![q(1), q(-2)], vec![q(0), q(0)]]),
        Matrix::from_rows(vec![vec![q(0), q(2)], vec![q(0), q(1)]]),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, m)| m.and_then(|m| FiniteRankOperator::from_matrix(m, format!("A{}", i + 1))))
    .collect::<Result<Vec<_>, _>>()
    .map_err(config_err)?;
    let l1 = SeminormSystem::koethe(bapkit::polyhedral::Combine::Sum, vec![vec![q(1), q(1)]]).map_err(config_err)?;
    let mut ys: Vec<Vec<S>> = (0..50).map(|_| sampling::vector(rng, 2)).collect();
    ys.push(vec![q(-1), q(1)]);
    let report = basis_sup_norms(&l1, &ops, &ys).map_err(config_err)?;
    let y = vec![q(-1), q(1)];
    let sup = report.system.eval_dense(1, &y).map_err(config_err)?;
    let base = l1.eval_dense(1, &y).map_err(config_err)?;
    checks.push(Check::new(
        "normability.sup_norms",
        "|x| <= sup_n |S_n x| <= C |x| and |A_j y| <= 2 sup_n |S_n y| on samples; the sup is strict on a sign-alternating vector",
        report.passed() && sup > base,
        format!("sup {sup} > base {base}, {} samples", report.samples),
    ));

    Ok(SuiteResult::new(
        Suite::Normability.name(),
        checks,
        json!({ "verdicts": verdicts }),
    ))
}
