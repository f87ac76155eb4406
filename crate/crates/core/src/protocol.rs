//! The three-step negotiation between a cluster head and a peer (sensor
//! node or base station): broadcast, parameter calculation, parameter
//! exchange.
//!
//! ```text
//!   head A                                   peer B
//!   Broadcast{Id_A}            ───────────▶
//!                              ◀───────────  EncryptedResponse = IBE_{Id_A}(Y_B, Id_B)
//!   EncryptedReply = IBE_{Id_B}(Y_A, Id_A) ───────────▶
//!   K = Y_B^X_A mod q                        K = Y_A^X_B mod q
//! ```
//!
//! The head uses a fresh DH key pair for every peer. Every message carries
//! the epoch it belongs to; traffic from another epoch is rejected.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use rand::RngCore;
use thiserror::Error;

use crate::ibe::{self, Ciphertext, IbeError, PrivateKey, PublicParams};
use crate::keyex::{self, dh_generate, dh_shared, DhGroup, DhKeyPair, KeyexError, SessionKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("operation not allowed for role {0:?}")]
    WrongRole(Role),
    #[error("operation not allowed in phase {0:?}")]
    WrongPhase(Phase),
    #[error("expected a {expected:?} message, got {got:?}")]
    UnexpectedKind { expected: MessageKind, got: MessageKind },
    #[error("message from epoch {got}, current epoch is {current}")]
    StaleEpoch { current: u32, got: u32 },
    #[error("broadcast payload does not match its sender")]
    MalformedBroadcast,
    #[error("decrypted payload is malformed: {0}")]
    MalformedPayload(&'static str),
    #[error("reply does not belong to the pending exchange")]
    UnknownExchange,
    #[error("peer already has a session this epoch")]
    DuplicatePeer,
    #[error("payload of {len} bytes does not fit an {max}-byte block")]
    PayloadTooLarge { len: usize, max: usize },
    #[error("malformed wire message: {0}")]
    Wire(&'static str),
    #[error(transparent)]
    Ibe(#[from] IbeError),
    #[error(transparent)]
    Keyex(#[from] KeyexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    Broadcast = 0,
    EncryptedResponse = 1,
    EncryptedReply = 2,
}

impl TryFrom<u8> for MessageKind {
    type Error = ProtocolError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(MessageKind::Broadcast),
            1 => Ok(MessageKind::EncryptedResponse),
            2 => Ok(MessageKind::EncryptedReply),
            _ => Err(ProtocolError::Wire("unknown message kind")),
        }
    }
}

/// Wire format: `kind ∥ epoch_be32 ∥ lp(sender) ∥ lp(payload)`.
#[derive(Clone, PartialEq, Eq)]
pub struct NegotiationMessage {
    pub kind: MessageKind,
    pub epoch: u32,
    pub sender: Vec<u8>,
    pub payload: Vec<u8>,
}

impl fmt::Debug for NegotiationMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}{{epoch: {}, sender: {}, payload: {} bytes}}",
            self.kind,
            self.epoch,
            String::from_utf8_lossy(&self.sender),
            self.payload.len()
        )
    }
}

impl NegotiationMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.kind as u8];
        out.extend_from_slice(&self.epoch.to_be_bytes());
        out.extend(crate::hash::lp(&self.sender));
        out.extend(crate::hash::lp(&self.payload));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let (&kind, rest) = bytes.split_first().ok_or(ProtocolError::Wire("empty"))?;
        let kind = MessageKind::try_from(kind)?;
        let epoch = u32::from_be_bytes(rest.get(..4).ok_or(ProtocolError::Wire("epoch"))?.try_into().expect("4 bytes"));
        let (sender, rest) = ibe::split_lp(&rest[4..]).ok_or(ProtocolError::Wire("sender"))?;
        let (payload, rest) = ibe::split_lp(rest).ok_or(ProtocolError::Wire("payload"))?;
        if !rest.is_empty() {
            return Err(ProtocolError::Wire("trailing bytes"));
        }
        Ok(NegotiationMessage { kind, epoch, sender: sender.to_vec(), payload: payload.to_vec() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Role {
    Head,
    Node,
    BaseStation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    AwaitingResponse,
    AwaitingReply,
    Established,
}

#[derive(Clone)]
struct Pending {
    keypair: DhKeyPair,
    head: Vec<u8>,
}

/// One party's view of its negotiations.
///
/// A head stays in `AwaitingResponse` after broadcasting and adds one peer
/// table entry per completed exchange. A node or base station handles a
/// single exchange per state: `Idle → AwaitingReply → Established`.
#[derive(Clone)]
pub struct NegotiationState {
    role: Role,
    id: Vec<u8>,
    phase: Phase,
    epoch: u32,
    group: DhGroup,
    pending: Option<Pending>,
    peers: BTreeMap<Vec<u8>, SessionKey>,
}

impl fmt::Debug for NegotiationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NegotiationState")
            .field("role", &self.role)
            .field("id", &String::from_utf8_lossy(&self.id))
            .field("phase", &self.phase)
            .field("epoch", &self.epoch)
            .field("peers", &self.peers.len())
            .finish()
    }
}

/// Zero-pads a payload to one IBE block.
fn pad(mut payload: Vec<u8>, block: usize) -> Result<Vec<u8>, ProtocolError> {
    if payload.len() > block {
        return Err(ProtocolError::PayloadTooLarge { len: payload.len(), max: block });
    }
    payload.resize(block, 0);
    Ok(payload)
}

/// Decrypts and parses a negotiation payload: exact framing, zero padding,
/// and a well-ranged Y. This is the only forgery signal BasicIdent offers.
pub fn open_payload(
    ciphertext: &[u8],
    sk: &PrivateKey,
    params: &PublicParams,
    group: &DhGroup,
) -> Result<(BigUint, Vec<u8>), ProtocolError> {
    let ct = Ciphertext::from_bytes(ciphertext, params)?;
    let plain = ibe::decrypt(sk, &ct, params)?;
    let (y, id, padding) = keyex::decode_payload(&plain).map_err(|_| ProtocolError::MalformedPayload("framing"))?;
    if padding.iter().any(|&b| b != 0) {
        return Err(ProtocolError::MalformedPayload("non-zero padding"));
    }
    if !group.is_acceptable_public(&y) {
        return Err(ProtocolError::Keyex(KeyexError::DegenerateParameter));
    }
    Ok((y, id))
}

fn seal_payload<R: RngCore + ?Sized>(
    y: &BigUint,
    own_id: &[u8],
    recipient: &[u8],
    params: &PublicParams,
    rng: &mut R,
) -> Result<Vec<u8>, ProtocolError> {
    let plain = pad(keyex::encode_payload(y, own_id), params.n_bytes())?;
    Ok(ibe::encrypt(params, recipient, &plain, rng)?.to_bytes())
}

impl NegotiationState {
    pub fn new(role: Role, id: impl Into<Vec<u8>>, group: DhGroup) -> Self {
        NegotiationState {
            role,
            id: id.into(),
            phase: Phase::Idle,
            epoch: 0,
            group,
            pending: None,
            peers: BTreeMap::new(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn id(&self) -> &[u8] {
        &self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn group(&self) -> &DhGroup {
        &self.group
    }

    /// The responder's DH key pair while an exchange is open or established.
    pub fn own_keypair(&self) -> Option<&DhKeyPair> {
        self.pending.as_ref().map(|p| &p.keypair)
    }

    pub fn peers(&self) -> &BTreeMap<Vec<u8>, SessionKey> {
        &self.peers
    }

    pub fn session_with(&self, peer: &[u8]) -> Option<&SessionKey> {
        self.peers.get(peer)
    }

    /// Deletes the session with `peer`, returning it if present.
    pub fn discard(&mut self, peer: &[u8]) -> Option<SessionKey> {
        self.peers.remove(peer)
    }

    /// Step 1: the head announces its identity. Starting a new epoch retires
    /// every session from the previous one.
    pub fn head_broadcast(&mut self, epoch: u32) -> Result<NegotiationMessage, ProtocolError> {
        if self.role != Role::Head {
            return Err(ProtocolError::WrongRole(self.role));
        }
        if self.phase != Phase::Idle && epoch != self.epoch {
            self.peers.clear();
        }
        self.epoch = epoch;
        self.phase = Phase::AwaitingResponse;
        Ok(NegotiationMessage { kind: MessageKind::Broadcast, epoch, sender: self.id.clone(), payload: self.id.clone() })
    }

    /// Steps 2 and 3a on the peer side: pick (X_B, Y_B) and send
    /// `IBE_{Id_A}(Y_B, Id_B)`.
    pub fn respond_to_broadcast<R: RngCore + ?Sized>(
        &mut self,
        msg: &NegotiationMessage,
        params: &PublicParams,
        rng: &mut R,
    ) -> Result<NegotiationMessage, ProtocolError> {
        if self.role == Role::Head {
            return Err(ProtocolError::WrongRole(self.role));
        }
        if self.phase != Phase::Idle {
            return Err(ProtocolError::WrongPhase(self.phase));
        }
        if msg.kind != MessageKind::Broadcast {
            return Err(ProtocolError::UnexpectedKind { expected: MessageKind::Broadcast, got: msg.kind });
        }
        if msg.sender.is_empty() || msg.payload != msg.sender {
            return Err(ProtocolError::MalformedBroadcast);
        }
        let keypair = dh_generate(&self.group, rng);
        let payload = seal_payload(keypair.public(), &self.id, &msg.sender, params, rng)?;
        self.epoch = msg.epoch;
        self.pending = Some(Pending { keypair, head: msg.sender.clone() });
        self.phase = Phase::AwaitingReply;
        Ok(NegotiationMessage { kind: MessageKind::EncryptedResponse, epoch: msg.epoch, sender: self.id.clone(), payload })
    }

    /// Steps 3b–3d on the head side: recover (Y_B, Id_B), answer with
    /// `IBE_{Id_B}(Y_A, Id_A)`, and store `K = Y_B^X_A mod q`.
    pub fn head_handle_response<R: RngCore + ?Sized>(
        &mut self,
        msg: &NegotiationMessage,
        head_key: &PrivateKey,
        params: &PublicParams,
        rng: &mut R,
    ) -> Result<(NegotiationMessage, SessionKey), ProtocolError> {
        if self.role != Role::Head {
            return Err(ProtocolError::WrongRole(self.role));
        }
        if self.phase != Phase::AwaitingResponse {
            return Err(ProtocolError::WrongPhase(self.phase));
        }
        if msg.kind != MessageKind::EncryptedResponse {
            return Err(ProtocolError::UnexpectedKind { expected: MessageKind::EncryptedResponse, got: msg.kind });
        }
        if msg.epoch != self.epoch {
            return Err(ProtocolError::StaleEpoch { current: self.epoch, got: msg.epoch });
        }
        let (y_b, id_b) = open_payload(&msg.payload, head_key, params, &self.group)?;
        if id_b != msg.sender {
            return Err(ProtocolError::MalformedPayload("identity does not match sender"));
        }
        if self.peers.contains_key(&id_b) {
            return Err(ProtocolError::DuplicatePeer);
        }
        let keypair = dh_generate(&self.group, rng);
        let session = dh_shared(&keypair, &y_b, &self.group, &self.id, &id_b, self.epoch)?;
        let payload = seal_payload(keypair.public(), &self.id, &id_b, params, rng)?;
        self.peers.insert(id_b, session.clone());
        let reply = NegotiationMessage { kind: MessageKind::EncryptedReply, epoch: self.epoch, sender: self.id.clone(), payload };
        Ok((reply, session))
    }

    /// Step 3d on the peer side: recover Y_A and store `K = Y_A^X_B mod q`.
    pub fn finalize_session(
        &mut self,
        msg: &NegotiationMessage,
        own_key: &PrivateKey,
        params: &PublicParams,
    ) -> Result<SessionKey, ProtocolError> {
        if self.role == Role::Head {
            return Err(ProtocolError::WrongRole(self.role));
        }
        if self.phase != Phase::AwaitingReply {
            return Err(ProtocolError::WrongPhase(self.phase));
        }
        if msg.kind != MessageKind::EncryptedReply {
            return Err(ProtocolError::UnexpectedKind { expected: MessageKind::EncryptedReply, got: msg.kind });
        }
        let pending = self.pending.as_ref().ok_or(ProtocolError::UnknownExchange)?;
        if msg.sender != pending.head {
            return Err(ProtocolError::UnknownExchange);
        }
        if msg.epoch != self.epoch {
            return Err(ProtocolError::StaleEpoch { current: self.epoch, got: msg.epoch });
        }
        let (y_a, id_a) = open_payload(&msg.payload, own_key, params, &self.group)?;
        if id_a != pending.head {
            return Err(ProtocolError::MalformedPayload("identity does not match sender"));
        }
        let session = dh_shared(&pending.keypair, &y_a, &self.group, &self.id, &id_a, self.epoch)?;
        self.peers.insert(id_a, session.clone());
        self.phase = Phase::Established;
        Ok(session)
    }
}

/// Messages and resulting keys of one complete head/peer exchange.
#[derive(Debug, Clone)]
pub struct Exchange {
    pub broadcast: NegotiationMessage,
    pub response: NegotiationMessage,
    pub reply: NegotiationMessage,
    pub head_key: SessionKey,
    pub peer_key: SessionKey,
}

impl Exchange {
    /// `to_bytes` of each message, in order.
    pub fn transcript(&self) -> [Vec<u8>; 3] {
        [self.broadcast.to_bytes(), self.response.to_bytes(), self.reply.to_bytes()]
    }
}

/// Drives a full exchange between an already-broadcasting head and a fresh
/// peer state. Both sides must use parameters under which their keys were
/// extracted.
pub fn run_exchange<R: RngCore + ?Sized>(
    head: &mut NegotiationState,
    head_key: &PrivateKey,
    peer: &mut NegotiationState,
    peer_key: &PrivateKey,
    broadcast: &NegotiationMessage,
    params: &PublicParams,
    rng: &mut R,
) -> Result<Exchange, ProtocolError> {
    let response = peer.respond_to_broadcast(broadcast, params, rng)?;
    let (reply, head_session) = head.head_handle_response(&response, head_key, params, rng)?;
    let peer_session = peer.finalize_session(&reply, peer_key, params)?;
    Ok(Exchange { broadcast: broadcast.clone(), response, reply, head_key: head_session, peer_key: peer_session })
}
