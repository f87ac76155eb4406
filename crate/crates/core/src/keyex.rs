//! Diffie-Hellman over Z_q*, key derivation, and the symmetric frame cipher
//! used for all traffic after negotiation.
//!
//! The DH modulus defaults to the curve subgroup order q; a separate prime
//! can be configured when q is too small to give a meaningful group.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::RngCore;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::numtheory::{distinct_prime_factors, is_probable_prime};
use crate::hash;

pub const KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 12;

pub type Nonce = [u8; NONCE_LEN];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyexError {
    #[error("DH modulus {0} is not prime")]
    NotPrime(BigUint),
    #[error("{0} is not a primitive root of the DH modulus")]
    NotPrimitiveRoot(BigUint),
    #[error("secret exponent out of range")]
    SecretOutOfRange,
    #[error("peer parameter is degenerate or out of range")]
    DegenerateParameter,
    #[error("negotiation payload is malformed: {0}")]
    MalformedPayload(&'static str),
    #[error("symmetric frame is shorter than its nonce")]
    TruncatedFrame,
}

/// The group Z_q* with primitive root η.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DhGroup {
    modulus: BigUint,
    generator: BigUint,
}

impl DhGroup {
    /// Uses the smallest primitive root of `modulus`.
    pub fn new(modulus: BigUint) -> Result<Self, KeyexError> {
        if modulus < BigUint::from(5u32) || !is_probable_prime(&modulus) {
            return Err(KeyexError::NotPrime(modulus));
        }
        let factors = distinct_prime_factors(&(&modulus - 1u32));
        let mut g = BigUint::from(2u32);
        while !primitive_root(&g, &modulus, &factors) {
            g += 1u32;
        }
        Ok(DhGroup { modulus, generator: g })
    }

    pub fn with_generator(modulus: BigUint, generator: BigUint) -> Result<Self, KeyexError> {
        if modulus < BigUint::from(5u32) || !is_probable_prime(&modulus) {
            return Err(KeyexError::NotPrime(modulus));
        }
        let factors = distinct_prime_factors(&(&modulus - 1u32));
        if generator < BigUint::from(2u32) || generator >= modulus || !primitive_root(&generator, &modulus, &factors) {
            return Err(KeyexError::NotPrimitiveRoot(generator));
        }
        Ok(DhGroup { modulus, generator })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn generator(&self) -> &BigUint {
        &self.generator
    }

    /// Rejects 0, 1, q − 1 and anything ≥ q.
    pub fn is_acceptable_public(&self, y: &BigUint) -> bool {
        let q_minus_one = &self.modulus - 1u32;
        *y > BigUint::one() && *y < q_minus_one
    }

    /// Fixed width of a public value on the wire.
    pub fn byte_len(&self) -> usize {
        self.modulus.bits().div_ceil(8) as usize
    }
}

fn primitive_root(g: &BigUint, q: &BigUint, factors_of_q_minus_one: &[BigUint]) -> bool {
    let q_minus_one = q - 1u32;
    factors_of_q_minus_one.iter().all(|f| !g.modpow(&(&q_minus_one / f), q).is_one())
}

/// `(X, Y = η^X mod q)`.
#[derive(Clone, PartialEq, Eq)]
pub struct DhKeyPair {
    secret: BigUint,
    public: BigUint,
}

impl fmt::Debug for DhKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DhKeyPair").field("public", &self.public).finish_non_exhaustive()
    }
}

impl DhKeyPair {
    pub fn from_secret(group: &DhGroup, secret: BigUint) -> Result<Self, KeyexError> {
        if secret < BigUint::one() || secret >= group.modulus {
            return Err(KeyexError::SecretOutOfRange);
        }
        let public = group.generator.modpow(&secret, &group.modulus);
        Ok(DhKeyPair { secret, public })
    }

    pub fn public(&self) -> &BigUint {
        &self.public
    }

    pub fn secret(&self) -> &BigUint {
        &self.secret
    }
}

/// Draws `X` uniformly from [1, q − 1], redrawing the two exponents whose
/// public value the peer would reject (Y = 1 or Y = q − 1).
pub fn dh_generate<R: RngCore + ?Sized>(group: &DhGroup, rng: &mut R) -> DhKeyPair {
    loop {
        let x = rng.gen_biguint_range(&BigUint::one(), &group.modulus);
        let pair = DhKeyPair::from_secret(group, x).expect("sampled in range");
        if group.is_acceptable_public(&pair.public) {
            return pair;
        }
    }
}

/// A negotiated symmetric key, bound to both identities and the epoch.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey {
    raw: BigUint,
    key: [u8; KEY_LEN],
    epoch: u32,
    peers: (Vec<u8>, Vec<u8>),
}

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SessionKey({} <-> {}, epoch {}, {})",
            String::from_utf8_lossy(&self.peers.0),
            String::from_utf8_lossy(&self.peers.1),
            self.epoch,
            self.fingerprint()
        )
    }
}

impl SessionKey {
    pub fn raw(&self) -> &BigUint {
        &self.raw
    }

    pub fn key(&self) -> &[u8; KEY_LEN] {
        &self.key
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    /// The two identities, sorted.
    pub fn peers(&self) -> (&[u8], &[u8]) {
        (&self.peers.0, &self.peers.1)
    }

    /// First 4 bytes of the derived key in hex, for logs.
    pub fn fingerprint(&self) -> String {
        hex::encode(&self.key[..4])
    }
}

impl Serialize for SessionKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SessionKey", 3)?;
        st.serialize_field("peers", &[String::from_utf8_lossy(&self.peers.0), String::from_utf8_lossy(&self.peers.1)])?;
        st.serialize_field("epoch", &self.epoch)?;
        st.serialize_field("key", &hex::encode(self.key))?;
        st.end()
    }
}

/// `SHA-256(tag ∥ lp(K) ∥ lp(id_lo) ∥ lp(id_hi) ∥ epoch_be32)`.
pub fn derive_key(raw: &BigUint, a: &[u8], b: &[u8], epoch: u32) -> [u8; KEY_LEN] {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let k = hash::lp(&raw.to_bytes_be());
    let (lo, hi) = (hash::lp(lo), hash::lp(hi));
    let epoch = epoch.to_be_bytes();
    hash::expand(hash::TAG_KDF, &[&k, &lo, &hi, &epoch], KEY_LEN).try_into().expect("KEY_LEN bytes")
}

/// `K = peer_Y^X mod q` plus the derived key for (own_id, peer_id, epoch).
pub fn dh_shared(
    own: &DhKeyPair,
    peer_y: &BigUint,
    group: &DhGroup,
    own_id: &[u8],
    peer_id: &[u8],
    epoch: u32,
) -> Result<SessionKey, KeyexError> {
    if !group.is_acceptable_public(peer_y) {
        return Err(KeyexError::DegenerateParameter);
    }
    let raw = peer_y.modpow(&own.secret, &group.modulus);
    let key = derive_key(&raw, own_id, peer_id, epoch);
    let peers = if own_id <= peer_id { (own_id.to_vec(), peer_id.to_vec()) } else { (peer_id.to_vec(), own_id.to_vec()) };
    Ok(SessionKey { raw, key, epoch, peers })
}

/// Keystream block i = `SHA-256(tag ∥ key ∥ nonce ∥ i_be32)`.
pub fn keystream(key: &SessionKey, nonce: &Nonce, len: usize) -> Vec<u8> {
    hash::expand(hash::TAG_KEYSTREAM, &[&key.key, nonce], len)
}

pub fn sym_encrypt(key: &SessionKey, nonce: &Nonce, plaintext: &[u8]) -> Vec<u8> {
    let ks = keystream(key, nonce, plaintext.len());
    plaintext.iter().zip(ks).map(|(p, k)| p ^ k).collect()
}

pub fn sym_decrypt(key: &SessionKey, nonce: &Nonce, ciphertext: &[u8]) -> Vec<u8> {
    sym_encrypt(key, nonce, ciphertext)
}

/// `nonce ∥ ciphertext`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymFrame {
    pub nonce: Nonce,
    pub ciphertext: Vec<u8>,
}

impl SymFrame {
    pub fn seal(key: &SessionKey, nonce: Nonce, plaintext: &[u8]) -> Self {
        SymFrame { nonce, ciphertext: sym_encrypt(key, &nonce, plaintext) }
    }

    pub fn open(&self, key: &SessionKey) -> Vec<u8> {
        sym_decrypt(key, &self.nonce, &self.ciphertext)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.nonce.to_vec();
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyexError> {
        if bytes.len() < NONCE_LEN {
            return Err(KeyexError::TruncatedFrame);
        }
        let nonce = bytes[..NONCE_LEN].try_into().expect("checked length");
        Ok(SymFrame { nonce, ciphertext: bytes[NONCE_LEN..].to_vec() })
    }
}

/// `len_be32 ∥ Y ∥ len_be32 ∥ id`.
pub fn encode_payload(y: &BigUint, id: &[u8]) -> Vec<u8> {
    let mut out = hash::lp(&y.to_bytes_be());
    out.extend(hash::lp(id));
    out
}

/// Parses an [`encode_payload`] prefix; returns `(Y, id, remaining bytes)`.
pub fn decode_payload(bytes: &[u8]) -> Result<(BigUint, Vec<u8>, &[u8]), KeyexError> {
    let (y, rest) = crate::ibe::split_lp(bytes).ok_or(KeyexError::MalformedPayload("Y field"))?;
    let (id, rest) = crate::ibe::split_lp(rest).ok_or(KeyexError::MalformedPayload("id field"))?;
    if y.is_empty() || y[0] == 0 {
        return Err(KeyexError::MalformedPayload("Y not minimally encoded"));
    }
    Ok((BigUint::from_bytes_be(y), id.to_vec(), rest))
}
