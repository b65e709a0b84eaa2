use bapkit_web::{nuclearity_sums, schedule_demo, witness_traces};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("bindings return JSON")
}

#[test]
fn witness_traces_carry_exact_values() {
    let v = parse(witness_traces(1, 3, 6));
    assert_eq!(v["mu"], 2);
    assert_eq!(v["p"], 2);
    assert_eq!(v["decay"][2]["exact"], "1/256");
    assert_eq!(v["floor_trace"][2]["exact"], "14");
    assert_eq!(v["floor"]["exact"], "8");
    assert_eq!(v["cauchy_to_last"].as_array().unwrap().len(), 5);
    assert_eq!(v["passed"], true);
}

#[test]
fn witness_errors_are_reported_as_json() {
    let v = parse(witness_traces(0, 3, 6));
    assert!(v["error"].as_str().unwrap().contains("p0"));
}

#[test]
fn nuclearity_sums_approach_the_limit() {
    for (p, limit) in [(1, "1"), (2, "8")] {
        let v = parse(nuclearity_sums(p, 8));
        assert_eq!(v["limit"]["exact"], limit);
        assert_eq!(v["passed"], true);
        let sums: Vec<f64> = v["partial_sums"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["value"].as_f64().unwrap())
            .collect();
        assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn schedule_demo_embeds_isometrically_from_below() {
    let v = parse(schedule_demo(3, 4, &[1.0, -0.5, 2.0, 0.25]));
    assert!(v.get("error").is_none(), "{v}");
    let blocks = v["blocks"].as_array().unwrap();
    let total: u64 = blocks.iter().map(|b| b["replication"].as_u64().unwrap() * b["rank"].as_u64().unwrap()).sum();
    assert_eq!(total, v["length"].as_u64().unwrap());
    assert_eq!(v["partial_norms"].as_array().unwrap().len() as u64, total);
    for n in v["norms"].as_array().unwrap() {
        assert!(n["base"]["value"].as_f64().unwrap() <= n["embedded"]["value"].as_f64().unwrap());
    }
}
