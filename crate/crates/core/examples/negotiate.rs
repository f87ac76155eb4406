//! A cluster head negotiates session keys with the base station and three
//! sensors, each exchange carrying Diffie-Hellman values inside IBE
//! ciphertexts.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use wsn_keymgmt::ibe;
use wsn_keymgmt::keyex::{DhGroup, SymFrame};
use wsn_keymgmt::params::Preset;
use wsn_keymgmt::protocol::{open_payload, run_exchange, NegotiationState, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = Preset::Sim64;
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let (params, msk) = ibe::setup(&preset.p(), &preset.q(), 256, &mut rng)?;
    let group = DhGroup::new(preset.q())?;
    println!("DH over Z_q*, q = {}, generator {}", group.modulus(), group.generator());

    let head_key = ibe::extract(&msk, b"H1", &params)?;
    let mut head = NegotiationState::new(Role::Head, "H1", group.clone());
    let broadcast = head.head_broadcast(1)?;
    println!("H1 broadcasts {broadcast:?}");

    for (id, role) in [("BS", Role::BaseStation), ("N1", Role::Node), ("N2", Role::Node), ("N3", Role::Node)] {
        let key = ibe::extract(&msk, id.as_bytes(), &params)?;
        let mut peer = NegotiationState::new(role, id, group.clone());
        let ex = run_exchange(&mut head, &head_key, &mut peer, &key, &broadcast, &params, &mut rng)?;
        assert_eq!(ex.head_key, ex.peer_key);
        println!("H1 <-> {id:<2}  response {} B, reply {} B, key {}", ex.response.payload.len(), ex.reply.payload.len(), ex.head_key.fingerprint());

        // an eavesdropper holding another identity's key sees only noise
        let eve = ibe::extract(&msk, b"EVE", &params)?;
        assert!(open_payload(&ex.response.payload, &eve, &params, &group).is_err());
    }
    println!("head holds {} session keys (M + 1 with M = 3)", head.peers().len());

    let k = head.session_with(b"N2").expect("negotiated");
    let frame = SymFrame::seal(k, [9; 12], b"aggregate please");
    println!("N2 frame opens to {:?}", String::from_utf8_lossy(&frame.open(k)));
    Ok(())
}
