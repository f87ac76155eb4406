//! BasicIdent end to end: setup, extract, encrypt, decrypt.
//!
//!     cargo run --example ibe_roundtrip -- [toy11|p1019|toy32|sim64|bf256]

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use wsn_keymgmt::ibe;
use wsn_keymgmt::params::Preset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset: Preset = std::env::args().nth(1).as_deref().unwrap_or("toy32").parse()?;
    let mut rng = ChaCha20Rng::seed_from_u64(1);

    let (params, msk) = ibe::setup(&preset.p(), &preset.q(), 256, &mut rng)?;
    println!("{preset}: p has {} bits, q has {} bits", params.curve().p().bits(), params.curve().q().bits());

    let id = b"sensor-17";
    let sk = ibe::extract(&msk, id, &params)?;
    println!("extracted key for {:?}, verifies: {}", String::from_utf8_lossy(id), sk.verify(&params)?);

    // one n-bit block
    let mut block = b"reading: 21.5C".to_vec();
    block.resize(params.n_bytes(), 0);
    let ct = ibe::encrypt(&params, id, &block, &mut rng)?;
    println!("ciphertext: {} bytes", ct.to_bytes().len());
    assert_eq!(ibe::decrypt(&sk, &ct, &params)?, block);
    println!("single block round trip ok");

    // a message longer than one block is framed and split
    let long = b"subnet parameters and a private key are longer than 256 bits".repeat(2);
    let cts = ibe::encrypt_bytes(&params, id, &long, &mut rng)?;
    assert_eq!(ibe::decrypt_bytes(&sk, &cts, &params)?, long);
    println!("{} byte message in {} blocks round trip ok", long.len(), cts.len());

    // another identity's key does not recover the block
    let other = ibe::extract(&msk, b"sensor-18", &params)?;
    let wrong = ibe::decrypt(&other, &ct, &params)?;
    println!("wrong identity recovers the message: {}", wrong == block);
    Ok(())
}
