//! WebAssembly bindings for the demo page. Every entry point returns a JSON
//! string so the page needs no generated types.

use bapkit::instances;
use bapkit::operator::build_schedule;
use bapkit::pelczynski::{embed, E0SeminormSystem};
use bapkit::vogt::{bap_failure_witness, nuclearity_certificate, VogtInstance};
use bapkit::{BigRational, Scalar};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

type Q = BigRational;

fn point(v: &Q) -> Value {
    json!({ "exact": v.to_string(), "value": v.to_f64() })
}

fn error(e: impl ToString) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// Traces of the dyadic witness sequence `x_1, ..., x_length`.
#[wasm_bindgen]
pub fn witness_traces(p0: usize, q: usize, length: usize) -> String {
    let run = || -> bapkit::Result<Value> {
        let mu_max = (q + 1).next_power_of_two().trailing_zeros() as usize + 1;
        let inst = VogtInstance::<Q>::dyadic(length.max(1), mu_max, q, q)?;
        let w = bap_failure_witness(&inst, p0, q, length)?;
        let last: Vec<Value> = w
            .cauchy
            .iter()
            .filter(|c| c.m == w.length)
            .map(|c| json!({ "l": c.l, "value": point(&c.value.direct), "tail": point(&c.tail_bound) }))
            .collect();
        Ok(json!({
            "mu": w.mu,
            "p": w.p,
            "rho": point(&w.rho),
            "floor": point(&w.floor),
            "decay": w.decay.iter().map(|t| point(&t.direct)).collect::<Vec<_>>(),
            "floor_trace": w.floor_trace.iter().map(|t| point(&t.direct)).collect::<Vec<_>>(),
            "cauchy_to_last": last,
            "passed": w.passed(),
        }))
    };
    run().map_or_else(error, |v| v.to_string())
}

/// Partial sums of the nuclearity series at level `p` over an `n x n x n` box.
#[wasm_bindgen]
pub fn nuclearity_sums(p: usize, n: usize) -> String {
    let run = || -> bapkit::Result<Value> {
        let inst = VogtInstance::<Q>::dyadic(n, n, n, p + 1)?;
        let c = nuclearity_certificate(&inst, p)?;
        Ok(json!({
            "weights": c.weights,
            "partial_sums": c.partial_sums.iter().map(point).collect::<Vec<_>>(),
            "limit": point(&c.limit),
            "passed": c.passed(),
        }))
    };
    run().map_or_else(error, |v| v.to_string())
}

/// Builds the rank-one schedule of a random unimodular family and embeds `x`,
/// read to three decimals.
#[wasm_bindgen]
pub fn schedule_demo(seed: u64, dim: usize, x: &[f64]) -> String {
    let run = || -> bapkit::Result<Value> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instances::random_low_rank::<Q, _>(&mut rng, dim, 2)?;
        let (_, schedule) = build_schedule(&inst.system, &inst.family, 40, &mut rng)?;
        let xq: Vec<Q> = (0..dim)
            .map(|i| Q::from_ratio((x.get(i).copied().unwrap_or(0.0) * 1000.0).round() as i64, 1000))
            .collect();
        let y = embed(&schedule, &xq);
        let e0 = E0SeminormSystem { base: &inst.system };
        let norms = (1..=inst.system.levels())
            .map(|k| Ok(json!({ "k": k, "base": point(&inst.system.eval_dense(k, &xq)?), "embedded": point(&e0.eval(k, &y)?) })))
            .collect::<bapkit::Result<Vec<_>>>()?;
        let partial = e0.partial_values(1, &y)?;
        Ok(json!({
            "ranks": inst.family.iter().map(|a| a.rank()).collect::<Vec<_>>(),
            "blocks": schedule.blocks.iter().map(|b| json!({
                "p": b.p, "rank": b.rank, "replication": b.replication,
                "control": point(&b.control_constant), "first": b.first, "last": b.last,
            })).collect::<Vec<_>>(),
            "length": schedule.len(),
            "partial_norms": partial.iter().map(point).collect::<Vec<_>>(),
            "norms": norms,
        }))
    };
    run().map_or_else(error, |v| v.to_string())
}
