#![allow(dead_code)]

use std::path::PathBuf;

use wsn_keymgmt::simnet::{self, NetworkState, Scenario};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_scenario_path() -> PathBuf {
    manifest_dir().join("scenarios/golden.json")
}

pub fn golden_scenario() -> Scenario {
    Scenario::from_json(&std::fs::read_to_string(golden_scenario_path()).unwrap()).unwrap()
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = manifest_dir().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b).unwrap_or(expected.lines().count().min(actual.lines().count()));
    Err(format!("{name} differs from the golden file at line {}", line + 1))
}

/// The network right after initialization, then the state after each
/// scripted event.
pub fn golden_states() -> (NetworkState, Vec<NetworkState>) {
    let sc = golden_scenario();
    let mut net = simnet::init_network(sc.config().unwrap(), sc.seed).unwrap();
    net.elect_cluster_heads().unwrap();
    net.run_initialization().unwrap();
    let start = net.clone();
    let mut after = Vec::new();
    for ev in &sc.events {
        net.apply(ev).unwrap();
        after.push(net.clone());
    }
    (start, after)
}

/// Index of the first scripted event matching `pred`.
pub fn event_index(pred: impl Fn(&simnet::ScriptEvent) -> bool) -> usize {
    golden_scenario().events.iter().position(pred).expect("scripted event")
}
