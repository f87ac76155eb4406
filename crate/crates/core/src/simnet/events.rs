use std::fmt;

use serde::Serialize;

/// Why a negotiation round was run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cause {
    Init,
    Add,
    Rekey,
    Recover,
}

/// Which public parameters protected a negotiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamsUsed {
    Global,
    Subnet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rejection {
    Revoked,
    Unknown,
    AlreadyMember,
}

/// One line of the simulation log.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Init { seed: u64, nodes: usize, subnets: usize, range: f64, p_bits: u64 },
    Repartition { abandoned: usize },
    HeadElected { subnet: usize, head: String, x: f64, y: f64 },
    Unreachable { subnet: usize, id: String, distance: f64 },
    RoundStart { subnet: usize, epoch: u32, cause: Cause, members: usize },
    Negotiated { subnet: usize, epoch: u32, head: String, peer: String, params: ParamsUsed, key: String },
    NegotiationFailed { subnet: usize, epoch: u32, head: String, peer: String, reason: String },
    RoundEnd { subnet: usize, epoch: u32, negotiations: usize },
    KeyDrawn { subnet: usize, epoch: u32, p_pub: String },
    KeyDelivered { subnet: usize, epoch: u32, to: String },
    DeliveryFailed { subnet: usize, epoch: u32, to: String, reason: String },
    SubnetAborted { subnet: usize, epoch: u32, reason: String },
    Retired { subnet: usize, epoch: u32, sessions: usize },
    Register { subnet: usize, id: String },
    AddRejected { subnet: usize, id: String, reason: Rejection },
    Added { subnet: usize, id: String },
    Revoked { subnet: usize, id: String, list_len: usize },
    Compromised { subnet: usize, id: String },
    HeadReplaced { subnet: usize, old: String, new: String },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::Revoked => "revoked",
            Rejection::Unknown => "unknown",
            Rejection::AlreadyMember => "already-member",
        })
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cause::Init => "init",
            Cause::Add => "add",
            Cause::Rekey => "rekey",
            Cause::Recover => "recover",
        })
    }
}

impl fmt::Display for ParamsUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamsUsed::Global => "global",
            ParamsUsed::Subnet => "subnet",
        })
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Event::*;
        match self {
            Init { seed, nodes, subnets, range, p_bits } => {
                write!(f, "init seed={seed} nodes={nodes} subnets={subnets} range={range:.6} p_bits={p_bits}")
            }
            Repartition { abandoned } => write!(f, "repartition abandoned={abandoned} reason=empty-cell"),
            HeadElected { subnet, head, x, y } => write!(f, "head subnet={subnet} id={head} x={x:.6} y={y:.6}"),
            Unreachable { subnet, id, distance } => write!(f, "unreachable subnet={subnet} id={id} distance={distance:.6}"),
            RoundStart { subnet, epoch, cause, members } => {
                write!(f, "round-start subnet={subnet} epoch={epoch} cause={cause} members={members}")
            }
            Negotiated { subnet, epoch, head, peer, params, key } => {
                write!(f, "negotiated subnet={subnet} epoch={epoch} head={head} peer={peer} params={params} key={key}")
            }
            NegotiationFailed { subnet, epoch, head, peer, reason } => {
                write!(f, "negotiation-failed subnet={subnet} epoch={epoch} head={head} peer={peer} reason={reason:?}")
            }
            RoundEnd { subnet, epoch, negotiations } => {
                write!(f, "round-end subnet={subnet} epoch={epoch} negotiations={negotiations}")
            }
            KeyDrawn { subnet, epoch, p_pub } => write!(f, "key-drawn subnet={subnet} epoch={epoch} p_pub={p_pub}"),
            KeyDelivered { subnet, epoch, to } => write!(f, "key-delivered subnet={subnet} epoch={epoch} to={to}"),
            DeliveryFailed { subnet, epoch, to, reason } => {
                write!(f, "delivery-failed subnet={subnet} epoch={epoch} to={to} reason={reason:?}")
            }
            SubnetAborted { subnet, epoch, reason } => write!(f, "subnet-aborted subnet={subnet} epoch={epoch} reason={reason:?}"),
            Retired { subnet, epoch, sessions } => write!(f, "retired subnet={subnet} epoch={epoch} sessions={sessions}"),
            Register { subnet, id } => write!(f, "register subnet={subnet} id={id}"),
            AddRejected { subnet, id, reason } => write!(f, "add-rejected subnet={subnet} id={id} reason={reason}"),
            Added { subnet, id } => write!(f, "added subnet={subnet} id={id}"),
            Revoked { subnet, id, list_len } => write!(f, "revoked subnet={subnet} id={id} list_len={list_len}"),
            Compromised { subnet, id } => write!(f, "compromised subnet={subnet} id={id}"),
            HeadReplaced { subnet, old, new } => write!(f, "head-replaced subnet={subnet} old={old} new={new}"),
        }
    }
}

/// The log as text, one numbered line per event.
pub fn render(events: &[Event]) -> String {
    events.iter().enumerate().map(|(i, e)| format!("{i:05} {e}\n")).collect()
}

/// Negotiations per completed round, as `(subnet, epoch, cause, members, negotiations)`.
pub fn rounds(events: &[Event]) -> Vec<(usize, u32, Cause, usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, u32, Cause, usize, usize)> = None;
    for e in events {
        match e {
            Event::RoundStart { subnet, epoch, cause, members } => open = Some((*subnet, *epoch, *cause, *members, 0)),
            Event::Negotiated { .. } => {
                if let Some(r) = open.as_mut() {
                    r.4 += 1;
                }
            }
            Event::RoundEnd { .. } => out.extend(open.take()),
            _ => {}
        }
    }
    out
}
