//! Runs a scenario file twice and checks the event logs match byte for byte.
//!
//!     cargo run --example replay_scenario -- crates/core/scenarios/golden.json

use wsn_keymgmt::metrics::simulation_cross_check;
use wsn_keymgmt::simnet::{run_scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/golden.json").to_string());
    let scenario = Scenario::from_json(&std::fs::read_to_string(&path)?)?;
    let first = run_scenario(&scenario)?;
    let second = run_scenario(&scenario)?;
    assert_eq!(first.event_log(), second.event_log());
    println!("{path}: {} events, replay identical", first.events().len());
    for r in simulation_cross_check(first.events()) {
        println!("subnet {} epoch {}: {} members, {} negotiations (M + 1 = {})", r.subnet, r.epoch, r.members, r.counted, r.formula);
    }
    println!("revoked: {:?}", first.revocation_list());
    Ok(())
}
