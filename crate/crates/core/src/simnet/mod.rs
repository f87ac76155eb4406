//! Deterministic simulation of a clustered sensor network: topology, head
//! election, initialization, node addition and revocation, compromise
//! recovery and periodic re-keying.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(seed, subnet, epoch, label)`, so a subnet's state depends only on the
//! global setup and the events addressed to it. The network is a single
//! value mutated by one event at a time; there is no shared state.
//!
//! Links to the base station are logical and direct: relaying is not
//! modelled.

pub mod events;
pub mod scenario;
pub mod topology;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hash;
use crate::ibe::{self, IbeError, MasterKey, PrivateKey, PublicParams};
use crate::keyex::{DhGroup, KeyexError, Nonce, SessionKey, SymFrame, KEY_LEN, NONCE_LEN};
use crate::protocol::{run_exchange, NegotiationState, ProtocolError, Role};

pub use events::{Cause, Event, ParamsUsed, Rejection};
pub use scenario::{Scenario, ScriptEvent, SimConfig};
pub use topology::Position;

pub const BASE_STATION: &str = "BS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cryptographic failure: {0}")]
    Crypto(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown subnet {0}")]
    UnknownSubnet(usize),
    #[error("{0} is not a current member of any subnet")]
    NotAMember(String),
    #[error("{0} is not a cluster head")]
    NotAHead(String),
    #[error("{0} is a cluster head; heads leave through compromise recovery")]
    IsAHead(String),
    #[error("subnet {0} has no eligible replacement head")]
    NoReplacement(usize),
    #[error("subnet {0} is not initialized")]
    NotInitialized(usize),
    #[error("cluster heads are already elected")]
    AlreadyElected,
    #[error("{holder} holds no session key for {peer}")]
    NoSession { holder: String, peer: String },
    #[error("frame did not decrypt to a well-formed message")]
    MalformedFrame,
}

impl From<IbeError> for SimError {
    fn from(e: IbeError) -> Self {
        SimError::Crypto(e.to_string())
    }
}

impl From<KeyexError> for SimError {
    fn from(e: KeyexError) -> Self {
        SimError::Crypto(e.to_string())
    }
}

impl From<ProtocolError> for SimError {
    fn from(e: ProtocolError) -> Self {
        SimError::Crypto(e.to_string())
    }
}

/// `N000`, `N001`, … padded to a common width.
pub fn sensor_ids(count: usize) -> Vec<String> {
    let width = count.saturating_sub(1).to_string().len().max(3);
    (0..count).map(|i| format!("N{i:0width$}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeRole {
    BaseStation,
    ClusterHead,
    Sensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: String,
    pub position: Position,
    pub role: NodeRole,
    pub subnet: Option<usize>,
    /// Extracted under the global parameters before deployment.
    pub global_key: PrivateKey,
    /// Extracted by the head under the current subnet parameters.
    pub subnet_key: Option<PrivateKey>,
    pub subnet_params: Option<PublicParams>,
    /// Session keys by peer identity.
    pub sessions: BTreeMap<String, SessionKey>,
    pub compromised: bool,
    pub revoked: bool,
}

impl NodeRecord {
    /// The key currently in use: the subnet key once installed.
    pub fn current_key(&self) -> &PrivateKey {
        self.subnet_key.as_ref().unwrap_or(&self.global_key)
    }
}

impl Serialize for NodeRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("NodeRecord", 10)?;
        st.serialize_field("id", &self.id)?;
        st.serialize_field("position", &[self.position.0, self.position.1])?;
        st.serialize_field("role", &self.role)?;
        st.serialize_field("subnet", &self.subnet)?;
        st.serialize_field("global_key", &self.global_key)?;
        st.serialize_field("subnet_key", &self.subnet_key)?;
        st.serialize_field("subnet_params", &self.subnet_params)?;
        let sessions: Vec<&SessionKey> = self.sessions.values().collect();
        st.serialize_field("sessions", &sessions)?;
        st.serialize_field("compromised", &self.compromised)?;
        st.serialize_field("revoked", &self.revoked)?;
        st.end()
    }
}

/// One sub-network. The head holds `s_i` and acts as the local key generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnetState {
    pub index: usize,
    pub head: String,
    /// Sorted member identities, head excluded.
    pub members: Vec<String>,
    pub master: Option<MasterKey>,
    pub params: Option<PublicParams>,
    pub epoch: u32,
}

impl Serialize for SubnetState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SubnetState", 5)?;
        st.serialize_field("index", &self.index)?;
        st.serialize_field("head", &self.head)?;
        st.serialize_field("members", &self.members)?;
        st.serialize_field("params", &self.params)?;
        st.serialize_field("epoch", &self.epoch)?;
        st.end()
    }
}

/// Nearest-head assignment of every sensor, reachable or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub heads: Vec<String>,
    pub subnet_of: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    Rejected(Rejection),
}

/// Application payload inside a symmetric frame:
/// `"MSG" ∥ epoch_be32 ∥ lp(sender) ∥ lp(data)`.
pub fn encode_app_message(epoch: u32, sender: &str, data: &[u8]) -> Vec<u8> {
    let mut out = b"MSG".to_vec();
    out.extend_from_slice(&epoch.to_be_bytes());
    out.extend(hash::lp(sender.as_bytes()));
    out.extend(hash::lp(data));
    out
}

/// Parses an application payload; `None` unless the framing is exact.
pub fn parse_app_message(bytes: &[u8]) -> Option<(u32, String, Vec<u8>)> {
    let rest = bytes.strip_prefix(b"MSG")?;
    let epoch = u32::from_be_bytes(rest.get(..4)?.try_into().ok()?);
    let (sender, rest) = ibe::split_lp(&rest[4..])?;
    let (data, rest) = ibe::split_lp(rest)?;
    if !rest.is_empty() {
        return None;
    }
    Some((epoch, String::from_utf8(sender.to_vec()).ok()?, data.to_vec()))
}

fn stream(seed: u64, subnet: Option<usize>, epoch: u32, label: &str) -> ChaCha20Rng {
    let subnet = subnet.map_or(u64::MAX, |s| s as u64).to_be_bytes();
    let bytes = hash::expand(hash::TAG_SIM, &[&seed.to_be_bytes(), &subnet, &epoch.to_be_bytes(), label.as_bytes()], 32);
    ChaCha20Rng::from_seed(bytes.try_into().expect("32 bytes"))
}

fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(hash::expand(hash::TAG_SIM, &[bytes], 4))
}

fn encode_key_bundle(params: &PublicParams, key: &PrivateKey) -> Vec<u8> {
    let mut out = hash::lp(&params.to_bytes());
    out.extend(hash::lp(&key.point().to_bytes()));
    out
}

/// Parses and verifies a delivered (subnet parameters, private key) bundle.
fn open_key_bundle(bytes: &[u8], id: &str, global: &PublicParams) -> Result<(PublicParams, PrivateKey), SimError> {
    let bad = || SimError::Crypto("malformed key bundle".into());
    let (params_bytes, rest) = ibe::split_lp(bytes).ok_or_else(bad)?;
    let (point_bytes, rest) = ibe::split_lp(rest).ok_or_else(bad)?;
    if !rest.is_empty() {
        return Err(bad());
    }
    let params = PublicParams::from_bytes(params_bytes)?;
    if params.curve() != global.curve() || params.n_bits() != global.n_bits() {
        return Err(SimError::Crypto("subnet parameters use a different curve".into()));
    }
    let (point, used) = <crate::algebra::CurvePoint>::decode_prefix(params.curve().field(), point_bytes)
        .map_err(|e| SimError::Crypto(e.to_string()))?;
    if used != point_bytes.len() {
        return Err(bad());
    }
    let key = PrivateKey::from_point(id.as_bytes(), point, &params)?;
    if !key.verify(&params)? {
        return Err(SimError::Crypto("delivered key fails verification".into()));
    }
    Ok((params, key))
}

/// The whole simulated network.
#[derive(Debug, Clone)]
pub struct NetworkState {
    config: SimConfig,
    seed: u64,
    global: PublicParams,
    /// Held by the base station only.
    root: MasterKey,
    group: DhGroup,
    nodes: BTreeMap<String, NodeRecord>,
    registry: BTreeSet<String>,
    subnets: Vec<SubnetState>,
    revocation: Vec<String>,
    log: Vec<Event>,
    history: Vec<[u8; KEY_LEN]>,
}

/// Equality ignores the key history, which is bookkeeping for tests.
impl PartialEq for NetworkState {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.seed == other.seed
            && self.global == other.global
            && self.root == other.root
            && self.group == other.group
            && self.nodes == other.nodes
            && self.registry == other.registry
            && self.subnets == other.subnets
            && self.revocation == other.revocation
            && self.log == other.log
    }
}

/// Places the nodes and provisions every identity with its global key.
pub fn init_network(config: SimConfig, seed: u64) -> Result<NetworkState, SimError> {
    config.validate()?;
    let (global, root) = ibe::setup(&config.p, &config.q, config.n_bits, &mut stream(seed, None, 0, "setup"))?;
    let group = DhGroup::new(config.dh_modulus.clone())?;
    let positions = topology::place_nodes(config.node_count, &mut stream(seed, None, 0, "topology"));
    let mut nodes = BTreeMap::new();
    let record = |id: &str, position, role| -> Result<NodeRecord, SimError> {
        Ok(NodeRecord {
            id: id.to_string(),
            position,
            role,
            subnet: None,
            global_key: ibe::extract(&root, id.as_bytes(), &global)?,
            subnet_key: None,
            subnet_params: None,
            sessions: BTreeMap::new(),
            compromised: false,
            revoked: false,
        })
    };
    nodes.insert(BASE_STATION.to_string(), record(BASE_STATION, topology::CENTER, NodeRole::BaseStation)?);
    let ids = sensor_ids(config.node_count);
    for (id, pos) in ids.iter().zip(positions) {
        nodes.insert(id.clone(), record(id, pos, NodeRole::Sensor)?);
    }
    let registry = ids.iter().chain(&config.spares).cloned().collect();
    let log = vec![Event::Init {
        seed,
        nodes: config.node_count,
        subnets: config.subnet_count,
        range: config.range,
        p_bits: config.p.bits(),
    }];
    Ok(NetworkState {
        config,
        seed,
        global,
        root,
        group,
        nodes,
        registry,
        subnets: Vec::new(),
        revocation: Vec::new(),
        log,
        history: Vec::new(),
    })
}

/// Builds, initializes and scripts a whole scenario.
pub fn run_scenario(scenario: &Scenario) -> Result<NetworkState, SimError> {
    let mut net = init_network(scenario.config()?, scenario.seed)?;
    net.elect_cluster_heads()?;
    net.run_initialization()?;
    for ev in &scenario.events {
        net.apply(ev)?;
    }
    Ok(net)
}

impl NetworkState {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn global_params(&self) -> &PublicParams {
        &self.global
    }

    /// The root master key, which never leaves the base station.
    pub fn root_master_key(&self) -> &MasterKey {
        &self.root
    }

    pub fn dh_group(&self) -> &DhGroup {
        &self.group
    }

    pub fn nodes(&self) -> &BTreeMap<String, NodeRecord> {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&NodeRecord> {
        self.nodes.get(id)
    }

    pub fn subnets(&self) -> &[SubnetState] {
        &self.subnets
    }

    pub fn subnet(&self, index: usize) -> Option<&SubnetState> {
        self.subnets.get(index)
    }

    pub fn revocation_list(&self) -> &[String] {
        &self.revocation
    }

    pub fn events(&self) -> &[Event] {
        &self.log
    }

    pub fn event_log(&self) -> String {
        events::render(&self.log)
    }

    /// Every session key derived so far, in order, both endpoints counted once.
    pub fn key_history(&self) -> &[[u8; KEY_LEN]] {
        &self.history
    }

    /// Sensors within range of their head, over all sensors assigned a head.
    pub fn connectivity_rate(&self) -> f64 {
        let heads: Vec<Position> = self.subnets.iter().map(|s| self.nodes[&s.head].position).collect();
        let sensors: Vec<Position> = self.nodes.values().filter(|n| n.role != NodeRole::BaseStation).map(|n| n.position).collect();
        if heads.is_empty() {
            return 0.0;
        }
        topology::connectivity(&sensors, &heads, self.config.range)
    }

    /// Nodes, subnets and revocation list as JSON. Master keys are omitted.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "global": self.global,
            "nodes": self.nodes.values().collect::<Vec<_>>(),
            "subnets": self.subnets,
            "revocation": self.revocation,
        })
    }

    /// Head and member records of one subnet plus its state.
    pub fn subnet_view(&self, index: usize) -> Option<(SubnetState, Vec<NodeRecord>)> {
        let s = self.subnets.get(index)?;
        let mut records = vec![self.nodes[&s.head].clone()];
        records.extend(s.members.iter().map(|m| self.nodes[m].clone()));
        Some((s.clone(), records))
    }

    fn push(&mut self, e: Event) {
        self.log.push(e);
    }

    fn subnet_mut(&mut self, index: usize) -> Result<&mut SubnetState, SimError> {
        self.subnets.get_mut(index).ok_or(SimError::UnknownSubnet(index))
    }

    /// Grid election and nearest-head assignment. Sensors out of range of
    /// their head are logged and left unassigned.
    pub fn elect_cluster_heads(&mut self) -> Result<Assignment, SimError> {
        if !self.subnets.is_empty() {
            return Err(SimError::AlreadyElected);
        }
        let sensors: Vec<(String, Position)> = self
            .nodes
            .values()
            .filter(|n| n.role == NodeRole::Sensor)
            .map(|n| (n.id.clone(), n.position))
            .collect();
        let positions: Vec<Position> = sensors.iter().map(|s| s.1).collect();
        let election = topology::elect(&positions, self.config.subnet_count)
            .ok_or_else(|| SimError::Config("no sensors to elect".into()))?;
        for &abandoned in &election.repartitions {
            self.push(Event::Repartition { abandoned });
        }
        let head_pos: Vec<Position> = election.heads.iter().map(|&i| positions[i]).collect();
        let heads: Vec<String> = election.heads.iter().map(|&i| sensors[i].0.clone()).collect();
        for (k, head) in heads.iter().enumerate() {
            let node = self.nodes.get_mut(head).expect("sensor exists");
            node.role = NodeRole::ClusterHead;
            node.subnet = Some(k);
            let (x, y) = node.position;
            self.subnets.push(SubnetState { index: k, head: head.clone(), members: Vec::new(), master: None, params: None, epoch: 0 });
            self.push(Event::HeadElected { subnet: k, head: head.clone(), x, y });
        }
        let mut subnet_of = BTreeMap::new();
        for ((id, pos), k) in sensors.iter().zip(topology::assign(&positions, &head_pos)) {
            subnet_of.insert(id.clone(), k);
            if heads[k] == *id {
                continue;
            }
            let d = topology::distance(*pos, head_pos[k]);
            if d > self.config.range {
                self.push(Event::Unreachable { subnet: k, id: id.clone(), distance: d });
                continue;
            }
            self.nodes.get_mut(id).expect("sensor exists").subnet = Some(k);
            self.subnets[k].members.push(id.clone());
        }
        Ok(Assignment { heads, subnet_of })
    }

    /// Negotiations with the base station and every member under the global
    /// parameters, then the first subnet key distribution. A failing subnet
    /// is logged and skipped.
    pub fn run_initialization(&mut self) -> Result<(), SimError> {
        for k in 0..self.subnets.len() {
            if self.subnets[k].epoch != 0 {
                continue;
            }
            let epoch = 1;
            let mut rng = stream(self.seed, Some(k), epoch, "init");
            let peers = self.round_peers(k, true);
            let result = self
                .negotiate_round(k, epoch, Cause::Init, ParamsUsed::Global, &peers, &mut rng)
                .and_then(|_| self.draw_and_deliver(k, epoch, &mut rng));
            if let Err(e) = result {
                self.push(Event::SubnetAborted { subnet: k, epoch, reason: e.to_string() });
            }
        }
        Ok(())
    }

    fn round_peers(&self, k: usize, with_base_station: bool) -> Vec<String> {
        let mut peers = Vec::new();
        if with_base_station {
            peers.push(BASE_STATION.to_string());
        }
        peers.extend(self.subnets[k].members.iter().cloned());
        peers
    }

    /// One broadcast by the head followed by an exchange with each peer.
    /// The base station always negotiates under the global parameters.
    fn negotiate_round(
        &mut self,
        k: usize,
        epoch: u32,
        cause: Cause,
        member_params: ParamsUsed,
        peers: &[String],
        rng: &mut ChaCha20Rng,
    ) -> Result<usize, SimError> {
        let head_id = self.subnets[k].head.clone();
        let members = peers.iter().filter(|p| *p != BASE_STATION).count();
        self.push(Event::RoundStart { subnet: k, epoch, cause, members });
        let mut head = NegotiationState::new(Role::Head, head_id.as_bytes(), self.group.clone());
        let broadcast = head.head_broadcast(epoch)?;
        let mut done = 0;
        for peer_id in peers {
            let (role, used) = if peer_id == BASE_STATION {
                (Role::BaseStation, ParamsUsed::Global)
            } else {
                (Role::Node, member_params)
            };
            let (params, head_key, peer_key) = {
                let h = &self.nodes[&head_id];
                let p = self.nodes.get(peer_id).ok_or_else(|| SimError::UnknownNode(peer_id.clone()))?;
                match used {
                    ParamsUsed::Global => (self.global.clone(), h.global_key.clone(), p.global_key.clone()),
                    ParamsUsed::Subnet => {
                        let params = self.subnets[k].params.clone().ok_or(SimError::NotInitialized(k))?;
                        let hk = h.subnet_key.clone().ok_or(SimError::NotInitialized(k))?;
                        let pk = p.subnet_key.clone().ok_or(SimError::NotInitialized(k))?;
                        (params, hk, pk)
                    }
                }
            };
            let mut peer = NegotiationState::new(role, peer_id.as_bytes(), self.group.clone());
            match run_exchange(&mut head, &head_key, &mut peer, &peer_key, &broadcast, &params, rng) {
                Ok(ex) => {
                    debug_assert_eq!(ex.head_key, ex.peer_key);
                    self.history.push(*ex.head_key.key());
                    self.nodes.get_mut(&head_id).expect("head").sessions.insert(peer_id.clone(), ex.head_key.clone());
                    self.nodes.get_mut(peer_id).expect("peer").sessions.insert(head_id.clone(), ex.peer_key);
                    self.push(Event::Negotiated {
                        subnet: k,
                        epoch,
                        head: head_id.clone(),
                        peer: peer_id.clone(),
                        params: used,
                        key: ex.head_key.fingerprint(),
                    });
                    done += 1;
                }
                Err(e) => {
                    self.push(Event::NegotiationFailed {
                        subnet: k,
                        epoch,
                        head: head_id.clone(),
                        peer: peer_id.clone(),
                        reason: e.to_string(),
                    });
                    return Err(e.into());
                }
            }
        }
        self.push(Event::RoundEnd { subnet: k, epoch, negotiations: done });
        Ok(done)
    }

    /// Fresh `s_i`, the head's own subnet key, and a symmetric frame with
    /// (subnet parameters, private key) to every member under its session
    /// key with the head.
    fn draw_and_deliver(&mut self, k: usize, epoch: u32, rng: &mut ChaCha20Rng) -> Result<(), SimError> {
        let (params, master) =
            ibe::setup_on_curve(self.global.curve().clone(), self.global.n_bits(), &mut stream(self.seed, Some(k), epoch, "master"))?;
        self.push(Event::KeyDrawn { subnet: k, epoch, p_pub: fingerprint(&params.p_pub().to_bytes()) });
        let head_id = self.subnets[k].head.clone();
        let mut installs = Vec::new();
        for member in self.subnets[k].members.clone() {
            let key = ibe::extract(&master, member.as_bytes(), &params)?;
            let session = self.nodes[&head_id]
                .sessions
                .get(&member)
                .cloned()
                .ok_or_else(|| SimError::NoSession { holder: head_id.clone(), peer: member.clone() })?;
            let mut nonce: Nonce = [0; NONCE_LEN];
            rng.fill(&mut nonce);
            let frame = SymFrame::seal(&session, nonce, &encode_key_bundle(&params, &key)).to_bytes();
            // member side
            let opened = self.nodes[&member]
                .sessions
                .get(&head_id)
                .ok_or_else(|| SimError::NoSession { holder: member.clone(), peer: head_id.clone() })
                .and_then(|s| Ok(SymFrame::from_bytes(&frame)?.open(s)))
                .and_then(|plain| open_key_bundle(&plain, &member, &self.global));
            match opened {
                Ok(pair) => {
                    installs.push((member.clone(), pair));
                    self.push(Event::KeyDelivered { subnet: k, epoch, to: member });
                }
                Err(e) => {
                    self.push(Event::DeliveryFailed { subnet: k, epoch, to: member, reason: e.to_string() });
                    return Err(e);
                }
            }
        }
        let head_key = ibe::extract(&master, head_id.as_bytes(), &params)?;
        for (member, (p, key)) in installs {
            let node = self.nodes.get_mut(&member).expect("member");
            node.subnet_key = Some(key);
            node.subnet_params = Some(p);
        }
        let head = self.nodes.get_mut(&head_id).expect("head");
        head.subnet_key = Some(head_key);
        head.subnet_params = Some(params.clone());
        let s = &mut self.subnets[k];
        s.master = Some(master);
        s.params = Some(params);
        s.epoch = epoch;
        Ok(())
    }

    /// Drops every session between the head and its peers, on both sides.
    fn retire_sessions(&mut self, k: usize, head_id: &str) -> usize {
        let peers: Vec<String> = self.nodes[head_id].sessions.keys().cloned().collect();
        for p in &peers {
            if let Some(n) = self.nodes.get_mut(p) {
                n.sessions.remove(head_id);
            }
        }
        self.nodes.get_mut(head_id).expect("head").sessions.clear();
        let epoch = self.subnets[k].epoch;
        self.push(Event::Retired { subnet: k, epoch, sessions: peers.len() });
        peers.len()
    }

    /// Registers a newcomer with a head. The base station vets the identity
    /// against its registry and the revocation list; an accepted node gets
    /// the subnet parameters and its subnet key IBE-encrypted under the
    /// global parameters, then negotiates a session key with the head.
    pub fn add_node(&mut self, id: &str, k: usize, position: Option<Position>) -> Result<AddOutcome, SimError> {
        let subnet = self.subnets.get(k).ok_or(SimError::UnknownSubnet(k))?;
        let (params, master, epoch, head_id) = match (&subnet.params, &subnet.master) {
            (Some(p), Some(m)) => (p.clone(), m.clone(), subnet.epoch, subnet.head.clone()),
            _ => return Err(SimError::NotInitialized(k)),
        };
        self.push(Event::Register { subnet: k, id: id.to_string() });
        let rejection = if self.revocation.iter().any(|r| r == id) {
            Some(Rejection::Revoked)
        } else if !self.registry.contains(id) {
            Some(Rejection::Unknown)
        } else if self.nodes.get(id).is_some_and(|n| n.subnet.is_some() || n.role != NodeRole::Sensor) {
            Some(Rejection::AlreadyMember)
        } else {
            None
        };
        if let Some(reason) = rejection {
            self.push(Event::AddRejected { subnet: k, id: id.to_string(), reason });
            return Ok(AddOutcome::Rejected(reason));
        }
        let mut rng = stream(self.seed, Some(k), epoch, &format!("add:{id}"));
        let head_pos = self.nodes[&head_id].position;
        let position = position.unwrap_or_else(|| {
            let r = self.config.range / 2.0;
            let clamp = |v: f64| v.clamp(0.0, 1.0);
            (clamp(head_pos.0 + rng.gen_range(-r..=r)), clamp(head_pos.1 + rng.gen_range(-r..=r)))
        });
        let global_key = match self.nodes.get(id) {
            Some(n) => n.global_key.clone(),
            None => ibe::extract(&self.root, id.as_bytes(), &self.global)?,
        };
        let key = ibe::extract(&master, id.as_bytes(), &params)?;
        let cts = ibe::encrypt_bytes(&self.global, id.as_bytes(), &encode_key_bundle(&params, &key), &mut rng)?;
        let (params_rx, key_rx) = open_key_bundle(&ibe::decrypt_bytes(&global_key, &cts, &self.global)?, id, &self.global)?;
        self.nodes.insert(
            id.to_string(),
            NodeRecord {
                id: id.to_string(),
                position,
                role: NodeRole::Sensor,
                subnet: Some(k),
                global_key,
                subnet_key: Some(key_rx),
                subnet_params: Some(params_rx),
                sessions: BTreeMap::new(),
                compromised: false,
                revoked: false,
            },
        );
        self.negotiate_round(k, epoch, Cause::Add, ParamsUsed::Subnet, &[id.to_string()], &mut rng)?;
        let s = self.subnet_mut(k)?;
        s.members.push(id.to_string());
        s.members.sort();
        self.push(Event::Added { subnet: k, id: id.to_string() });
        Ok(AddOutcome::Added)
    }

    /// The head discards its session with `id` and reports it to the base
    /// station, which appends it to the revocation list.
    pub fn revoke_node(&mut self, id: &str) -> Result<(), SimError> {
        let node = self.nodes.get(id).ok_or_else(|| SimError::UnknownNode(id.to_string()))?;
        if node.role == NodeRole::ClusterHead {
            return Err(SimError::IsAHead(id.to_string()));
        }
        let k = match node.subnet {
            Some(k) if !node.revoked && self.subnets[k].members.iter().any(|m| m == id) => k,
            _ => return Err(SimError::NotAMember(id.to_string())),
        };
        let head_id = self.subnets[k].head.clone();
        self.nodes.get_mut(&head_id).expect("head").sessions.remove(id);
        self.subnets[k].members.retain(|m| m != id);
        self.nodes.get_mut(id).expect("node").revoked = true;
        self.revocation.push(id.to_string());
        let list_len = self.revocation.len();
        self.push(Event::Revoked { subnet: k, id: id.to_string(), list_len });
        Ok(())
    }

    /// The base station learns (from an external detector) that a head is
    /// compromised. It revokes the head, promotes the nearest healthy member,
    /// and the new head negotiates with the base station and the remaining
    /// members under the global parameters before distributing a fresh `s_i`.
    pub fn compromise_and_recover(&mut self, id: &str) -> Result<(), SimError> {
        let node = self.nodes.get(id).ok_or_else(|| SimError::UnknownNode(id.to_string()))?;
        if node.role != NodeRole::ClusterHead {
            return Err(SimError::NotAHead(id.to_string()));
        }
        let k = node.subnet.expect("heads belong to a subnet");
        let old_pos = node.position;
        let replacement = self.subnets[k]
            .members
            .iter()
            .map(|m| &self.nodes[m])
            .filter(|n| !n.compromised && !n.revoked)
            .min_by(|a, b| {
                topology::distance(a.position, old_pos).total_cmp(&topology::distance(b.position, old_pos)).then(a.id.cmp(&b.id))
            })
            .map(|n| n.id.clone())
            .ok_or(SimError::NoReplacement(k))?;
        self.push(Event::Compromised { subnet: k, id: id.to_string() });

        // Everyone else forgets the compromised head. It keeps its stale keys.
        let stale_peers: Vec<String> = self.nodes[id].sessions.keys().cloned().collect();
        for p in &stale_peers {
            if let Some(n) = self.nodes.get_mut(p) {
                n.sessions.remove(id);
            }
        }
        let epoch = self.subnets[k].epoch;
        self.push(Event::Retired { subnet: k, epoch, sessions: stale_peers.len() });
        {
            let old = self.nodes.get_mut(id).expect("old head");
            old.compromised = true;
            old.revoked = true;
            old.role = NodeRole::Sensor;
        }
        self.revocation.push(id.to_string());
        let list_len = self.revocation.len();
        self.push(Event::Revoked { subnet: k, id: id.to_string(), list_len });

        let new_pos = {
            let n = self.nodes.get_mut(&replacement).expect("replacement");
            n.role = NodeRole::ClusterHead;
            // sessions with the old head are gone; nothing else is live
            n.sessions.clear();
            n.position
        };
        self.push(Event::HeadReplaced { subnet: k, old: id.to_string(), new: replacement.clone() });
        let mut members = Vec::new();
        for m in std::mem::take(&mut self.subnets[k].members) {
            if m == replacement {
                continue;
            }
            let d = topology::distance(self.nodes[&m].position, new_pos);
            if d > self.config.range {
                self.push(Event::Unreachable { subnet: k, id: m.clone(), distance: d });
                let n = self.nodes.get_mut(&m).expect("member");
                n.subnet = None;
                n.subnet_key = None;
                n.subnet_params = None;
                continue;
            }
            members.push(m);
        }
        let s = &mut self.subnets[k];
        s.head = replacement;
        s.members = members;

        let epoch = epoch + 1;
        let mut rng = stream(self.seed, Some(k), epoch, "recover");
        let peers = self.round_peers(k, true);
        let result = self
            .negotiate_round(k, epoch, Cause::Recover, ParamsUsed::Global, &peers, &mut rng)
            .and_then(|_| self.draw_and_deliver(k, epoch, &mut rng));
        if let Err(e) = result {
            self.push(Event::SubnetAborted { subnet: k, epoch, reason: e.to_string() });
            return Err(e);
        }
        Ok(())
    }

    /// New `s_i` delivered under the current session keys, then a full round
    /// of negotiations under the new subnet parameters. All earlier session
    /// keys of the subnet are retired.
    pub fn periodic_rekey(&mut self, k: usize) -> Result<(), SimError> {
        let subnet = self.subnets.get(k).ok_or(SimError::UnknownSubnet(k))?;
        if subnet.params.is_none() {
            return Err(SimError::NotInitialized(k));
        }
        let epoch = subnet.epoch + 1;
        let head_id = subnet.head.clone();
        let mut rng = stream(self.seed, Some(k), epoch, "rekey");
        self.draw_and_deliver(k, epoch, &mut rng)?;
        self.retire_sessions(k, &head_id);
        let peers = self.round_peers(k, true);
        if let Err(e) = self.negotiate_round(k, epoch, Cause::Rekey, ParamsUsed::Subnet, &peers, &mut rng) {
            self.push(Event::SubnetAborted { subnet: k, epoch, reason: e.to_string() });
            return Err(e);
        }
        Ok(())
    }

    pub fn apply(&mut self, event: &ScriptEvent) -> Result<(), SimError> {
        match event {
            ScriptEvent::Add { id, subnet, position } => {
                self.add_node(id, *subnet, position.map(|[x, y]| (x, y)))?;
            }
            ScriptEvent::Revoke { id } => self.revoke_node(id)?,
            ScriptEvent::Compromise { subnet, id } => {
                let target = match (subnet, id) {
                    (_, Some(id)) => id.clone(),
                    (Some(k), None) => self.subnets.get(*k).ok_or(SimError::UnknownSubnet(*k))?.head.clone(),
                    (None, None) => return Err(SimError::Config("compromise needs subnet or id".into())),
                };
                self.compromise_and_recover(&target)?;
            }
            ScriptEvent::Rekey { subnet } => self.periodic_rekey(*subnet)?,
        }
        Ok(())
    }

    fn head_of(&self, id: &str) -> Result<(usize, String), SimError> {
        let node = self.nodes.get(id).ok_or_else(|| SimError::UnknownNode(id.to_string()))?;
        let k = node.subnet.ok_or_else(|| SimError::NotAMember(id.to_string()))?;
        Ok((k, self.subnets[k].head.clone()))
    }

    /// A member seals an application message for its head with its session
    /// key.
    pub fn send_to_head(&self, from: &str, nonce: Nonce, data: &[u8]) -> Result<SymFrame, SimError> {
        let (k, head) = self.head_of(from)?;
        let key = self.nodes[from]
            .sessions
            .get(&head)
            .ok_or_else(|| SimError::NoSession { holder: from.to_string(), peer: head.clone() })?;
        Ok(SymFrame::seal(key, nonce, &encode_app_message(self.subnets[k].epoch, from, data)))
    }

    /// The head opens a frame from `from`. Fails if it holds no key for the
    /// sender, or the plaintext is not a well-formed current-epoch message
    /// from that sender.
    pub fn head_receive(&self, from: &str, frame: &SymFrame) -> Result<Vec<u8>, SimError> {
        let (k, head) = self.head_of(from)?;
        let key = self.nodes[&head]
            .sessions
            .get(from)
            .ok_or_else(|| SimError::NoSession { holder: head.clone(), peer: from.to_string() })?;
        match parse_app_message(&frame.open(key)) {
            Some((epoch, sender, data)) if epoch == self.subnets[k].epoch && sender == from => Ok(data),
            _ => Err(SimError::MalformedFrame),
        }
    }

    /// Whether a master key belongs to the base station's root.
    pub fn is_root_key(&self, key: &BigUint) -> bool {
        self.root.scalar() == key
    }
}
