//! Browser bindings for the parity die toolkit.
//!
//! Three operations are exported, each returning a JSON string for the
//! page script to plot: exact distributions, a simulated path, and the
//! sequential test over one of the three toss orderings.

use parity_die::chain;
use parity_die::enumerate::{imbalance_distribution, path_distribution};
use parity_die::montecarlo::simulate_path;
use parity_die::stats::{scenario, sequential_report, SequentialConfig};
use parity_die::{MutationRule, Parity, Ratio};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Deepest path table the page asks for; wider tables are unreadable.
pub const MAX_PAGE_DEPTH: usize = 10;

fn exact(r: Ratio) -> Value {
    json!({ "n": r.numer().to_string(), "d": r.denom().to_string(), "x": r.to_f64() })
}

pub fn distribution_value(rule: &str, depth: usize) -> parity_die::Result<Value> {
    let rule: MutationRule = rule.parse()?;
    if depth > MAX_PAGE_DEPTH {
        return Err(parity_die::Error::DepthOutOfRange {
            depth,
            max: MAX_PAGE_DEPTH,
        });
    }
    let paths = path_distribution(rule, depth)?;
    let evens = imbalance_distribution(rule, depth)?;
    let report = chain::analyze(rule)?;
    let absorbing: Vec<Value> = report
        .absorption
        .classes
        .iter()
        .map(|c| {
            json!({
                "states": c.states.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "probability": exact(c.probability),
                "even_share": exact(c.even_share),
            })
        })
        .collect();
    Ok(json!({
        "rule": rule.name(),
        "depth": depth,
        "paths": paths.entries.iter().map(|(k, &p)| json!({ "sequence": k, "p": exact(p) })).collect::<Vec<_>>(),
        "even_counts": evens.entries.iter().map(|(&k, &p)| json!({ "k": k, "p": exact(p) })).collect::<Vec<_>>(),
        "ergodic": report.verdict.ergodic,
        "explanation": report.verdict.explanation,
        "closed_classes": absorbing,
    }))
}

pub fn simulate_value(rule: &str, tosses: usize, seed: u64) -> parity_die::Result<Value> {
    let rule: MutationRule = rule.parse()?;
    let run = simulate_path(rule, tosses, seed);
    let mut evens = 0usize;
    let share: Vec<f64> = run
        .tosses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            evens += (p == Parity::Even) as usize;
            evens as f64 / (i + 1) as f64
        })
        .collect();
    let frozen_at = run
        .trajectory
        .iter()
        .position(|&s| parity_die::is_frozen(s, rule) && rule != MutationRule::NoMutation);
    Ok(json!({
        "rule": rule.name(),
        "seed": seed,
        "tosses": run.tosses.to_string(),
        "even_share": share,
        "even_faces": run.trajectory.iter().map(|s| s.even_faces()).collect::<Vec<_>>(),
        "final_state": run.trajectory.last().map(|s| s.to_string()),
        "frozen_at": frozen_at,
    }))
}

pub fn sequential_value(id: u8, alpha: f64, run_threshold: u32) -> parity_die::Result<Value> {
    let seq = scenario(id)?;
    let config = SequentialConfig {
        alpha,
        run_threshold: (run_threshold > 0).then_some(run_threshold),
        t_min: 1,
        ..SequentialConfig::default()
    };
    let rep = sequential_report(&seq, &config)?;
    Ok(json!({
        "id": id,
        "sequence": seq.to_string(),
        "critical_z": rep.critical_z,
        "t": rep.records.iter().map(|r| r.t).collect::<Vec<_>>(),
        "z": rep.records.iter().map(|r| r.z).collect::<Vec<_>>(),
        "window_z": rep.records.iter().map(|r| r.window_z).collect::<Vec<_>>(),
        "runs": rep.runs.iter().map(|e| json!({ "parity": e.parity.to_string(), "start": e.start, "fired_at": e.fired_at, "length": e.length })).collect::<Vec<_>>(),
        "first_z_rejection": rep.first_z_rejection,
        "first_run_rejection": rep.first_run_rejection,
        "first_rejection": rep.first_rejection,
    }))
}

fn to_js(v: parity_die::Result<Value>) -> Result<String, JsValue> {
    v.map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Exact path and even-count distributions plus the chain verdict.
#[wasm_bindgen]
pub fn distribution(rule: &str, depth: u32) -> Result<String, JsValue> {
    to_js(distribution_value(rule, depth as usize))
}

#[wasm_bindgen]
pub fn simulate(rule: &str, tosses: u32, seed: u32) -> Result<String, JsValue> {
    to_js(simulate_value(rule, tosses as usize, seed as u64))
}

/// `run_threshold == 0` selects the default threshold.
#[wasm_bindgen]
pub fn sequential(id: u8, alpha: f64, run_threshold: u32) -> Result<String, JsValue> {
    to_js(sequential_value(id, alpha, run_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_payload() {
        let v = distribution_value("copy", 3).unwrap();
        assert_eq!(v["paths"].as_array().unwrap().len(), 8);
        assert_eq!(v["paths"][2]["sequence"], "EOE");
        assert_eq!(v["paths"][2]["p"]["d"], "12");
        assert_eq!(v["ergodic"], false);
        assert_eq!(v["closed_classes"].as_array().unwrap().len(), 4);
        assert!(distribution_value("copy", 11).is_err());
        assert!(distribution_value("dots", 3).is_err());
    }

    #[test]
    fn simulate_payload() {
        let v = simulate_value("copy", 200, 4).unwrap();
        assert_eq!(v["tosses"].as_str().unwrap().len(), 200);
        assert_eq!(v["even_share"].as_array().unwrap().len(), 200);
        assert_eq!(v["even_faces"].as_array().unwrap().len(), 201);
        assert!(v["frozen_at"].is_u64());
        assert!(simulate_value("none", 10, 1).unwrap()["frozen_at"].is_null());
    }

    #[test]
    fn sequential_payload() {
        let v = sequential_value(3, 0.05, 0).unwrap();
        assert_eq!(v["first_rejection"], 94);
        assert_eq!(v["z"].as_array().unwrap().len(), 100);
        assert!(sequential_value(5, 0.05, 0).is_err());
    }
}
