//! Frozen outputs. Each value was checked against an independent
//! computation before it was frozen; those checks still run here.

mod common;

use common::{check_golden, golden_scenario};
use wsn_keymgmt::cli::{ibe_demo_transcript, negotiate_demo_transcript};
use wsn_keymgmt::metrics::{render_report, ReportSpec, SchemeId};
use wsn_keymgmt::params::Preset;
use wsn_keymgmt::simnet::{self, NodeRole};

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

#[test]
fn topology_snapshot() {
    let sc = golden_scenario();
    let mut net = simnet::init_network(sc.config().unwrap(), sc.seed).unwrap();
    let assignment = net.elect_cluster_heads().unwrap();

    // Oracle: 5 cells are 3 across the bottom half and 2 across the top.
    let cell_of = |(x, y): (f64, f64)| -> usize {
        if y < 0.5 {
            ((x * 3.0) as usize).min(2)
        } else {
            3 + ((x * 2.0) as usize).min(1)
        }
    };
    let centers = [(1.0 / 6.0, 0.25), (0.5, 0.25), (5.0 / 6.0, 0.25), (0.25, 0.75), (0.75, 0.75)];
    let sensors: Vec<_> = net.nodes().values().filter(|n| n.role != NodeRole::BaseStation).collect();
    for (k, head) in assignment.heads.iter().enumerate() {
        let best = sensors
            .iter()
            .filter(|n| cell_of(n.position) == k)
            .min_by(|a, b| dist(a.position, centers[k]).partial_cmp(&dist(b.position, centers[k])).unwrap())
            .unwrap();
        assert_eq!(&best.id, head, "cell {k}");
    }
    let head_pos: Vec<_> = assignment.heads.iter().map(|h| net.node(h).unwrap().position).collect();
    for n in &sensors {
        let mut best = 0;
        for k in 1..head_pos.len() {
            if dist(n.position, head_pos[k]) < dist(n.position, head_pos[best]) {
                best = k;
            }
        }
        assert_eq!(assignment.subnet_of[&n.id], best);
    }
    assert_eq!(assignment.subnet_of.len(), 100);

    let positions: Vec<_> = net.nodes().values().map(|n| serde_json::json!([n.id, n.position.0, n.position.1])).collect();
    let snap = serde_json::json!({ "positions": positions, "assignment": assignment });
    check_golden("topology.json", &(serde_json::to_string_pretty(&snap).unwrap() + "\n")).unwrap();
}

#[test]
fn scenario_event_log() {
    let net = simnet::run_scenario(&golden_scenario()).unwrap();
    check_golden("scenario.log", &net.event_log()).unwrap();
}

/// Integer oracle for the cost CSV: all costs are multiples of 1/1000.
fn oracle_csv(ms: &[u64]) -> String {
    let mut out = String::from("scheme,M,N,negotiations,time_s,energy_mJ\n");
    let fmt = |milli: u64| format!("{}.{:03}000", milli / 1000, milli % 1000);
    let (t_agree, e_agree) = (810 + 2 * 3102, 19440 + 2 * 74450);
    let rows = |name: &str, f: &dyn Fn(u64) -> (u64, u64, u64)| -> String {
        ms.iter()
            .map(|&m| {
                let (n, t, e) = f(m);
                format!("{name},{m},1,{n},{},{}\n", fmt(t), fmt(e))
            })
            .collect()
    };
    let pairs = |m: u64| m * (m - 1) / 2;
    out += &rows("Proposed", &|m| (m + 1, t_agree * m, e_agree * m));
    out += &rows("IBEKAS", &|m| (pairs(m), t_agree * pairs(m), e_agree * pairs(m)));
    out += &rows("BNN-IBS-KS", &|m| (pairs(m), 810 * (3 * pairs(m) + 1), 19440 * (3 * pairs(m) + 1)));
    out
}

#[test]
fn cost_csv() {
    let ms: Vec<u64> = (1..=50).collect();
    let spec = ReportSpec { ms: ms.clone(), ns: vec![1], schemes: SchemeId::ALL.to_vec(), ..Default::default() };
    let csv = render_report(&spec);
    assert_eq!(csv, oracle_csv(&ms));
    check_golden("metrics.csv", &csv).unwrap();
}

#[test]
fn demo_transcripts() {
    let ibe = ibe_demo_transcript(Preset::Toy32, 7, "N001", "hello sensor", 256).unwrap();
    check_golden("ibe_demo.txt", &ibe).unwrap();
    let neg = negotiate_demo_transcript(Preset::Sim64, 7, "H1", "N7", 1).unwrap();
    check_golden("negotiate_demo.txt", &neg).unwrap();
}
