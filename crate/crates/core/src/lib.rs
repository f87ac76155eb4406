//! Identity-based key management for clustered wireless sensor networks.
//!
//! The crate has three layers:
//!
//! - cryptography: [`algebra`] (GF(p), GF(p²), the curve y² = x³ + 1),
//!   [`pairing`] (Miller's algorithm, Weil pairing, distortion map) and
//!   [`ibe`] (Boneh-Franklin BasicIdent);
//! - key agreement: [`keyex`] (Diffie-Hellman, key derivation, the symmetric
//!   frame cipher) and [`protocol`] (the broadcast / response / reply state
//!   machine that carries DH parameters inside IBE ciphertexts);
//! - network: [`simnet`] (a deterministic cluster lifecycle simulator) and
//!   [`metrics`] (closed-form communication and computation cost models).
//!
//! The runnable programs under `examples/` show each capability end to end;
//! the `wsnkm` binary wraps the demos, the simulator and the cost report.
//!
//! Nothing here is constant time. It is a model of a key-management scheme,
//! not a hardened cryptographic library.

pub mod algebra;
pub mod cli;
mod hash;
pub mod ibe;
pub mod keyex;
pub mod metrics;
pub mod pairing;
pub mod params;
pub mod protocol;
pub mod simnet;
