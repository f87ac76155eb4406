//! A 60-node network in four sub-networks through its whole life: election,
//! initialization, node addition and revocation, head compromise and a
//! periodic re-key.

use wsn_keymgmt::keyex::NONCE_LEN;
use wsn_keymgmt::params::Preset;
use wsn_keymgmt::simnet::{init_network, AddOutcome, SimConfig, SimError};

fn main() -> Result<(), SimError> {
    let mut config = SimConfig::with_preset(Preset::Sim64, 80, 4, 1.5);
    config.spares = vec!["N900".into()];
    let mut net = init_network(config, 2024)?;

    let assignment = net.elect_cluster_heads()?;
    println!("heads: {:?}", assignment.heads);
    net.run_initialization()?;
    for s in net.subnets() {
        println!("subnet {}: head {} with {} members, epoch {}", s.index, s.head, s.members.len(), s.epoch);
    }

    let sensor = net.subnets()[0].members[0].clone();
    let frame = net.send_to_head(&sensor, [1; NONCE_LEN], b"t=19.2")?;
    println!("{sensor} -> head: {:?}", String::from_utf8_lossy(&net.head_receive(&sensor, &frame)?));

    println!("add N900 to subnet 1: {:?}", net.add_node("N900", 1, None)?);
    net.revoke_node(&sensor)?;
    println!("revoked {sensor}; head now refuses its frames: {}", net.head_receive(&sensor, &frame).is_err());
    assert_eq!(net.add_node(&sensor, 0, None)?, AddOutcome::Rejected(wsn_keymgmt::simnet::Rejection::Revoked));
    println!("{sensor} cannot rejoin");

    let head = net.subnets()[2].head.clone();
    net.compromise_and_recover(&head)?;
    println!("subnet 2 recovered: head {} -> {}, epoch {}", head, net.subnets()[2].head, net.subnets()[2].epoch);

    net.periodic_rekey(3)?;
    println!("subnet 3 re-keyed to epoch {}", net.subnets()[3].epoch);
    let mut keys = net.key_history().to_vec();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), net.key_history().len());
    println!("{} events, {} session keys derived, all distinct", net.events().len(), keys.len());
    Ok(())
}
