//! Closed-form communication and computation costs of the clustered scheme
//! and the two flat baselines, for sub-networks of `M` nodes.
//!
//! Time and energy count only ECC multiplications and pairings. Hashes,
//! XORs, additions and exponentiations are listed in [`operation_counts`]
//! but cost nothing in [`time_energy`].

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::simnet::events::{self, Cause, Event};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SchemeId {
    Proposed,
    Ibekas,
    BnnIbsKs,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Proposed, SchemeId::Ibekas, SchemeId::BnnIbsKs];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Proposed => "Proposed",
            SchemeId::Ibekas => "IBEKAS",
            SchemeId::BnnIbsKs => "BNN-IBS-KS",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

/// Per-operation costs on the reference sensor platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub t_ecc_mul: f64,
    pub e_ecc_mul: f64,
    pub t_pairing: f64,
    pub e_pairing: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { t_ecc_mul: 0.81, e_ecc_mul: 19.44, t_pairing: 3.102, e_pairing: 74.45 }
    }
}

/// How many negotiations the Proposed time/energy formula multiplies by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ProposedBasis {
    /// `× M`, as the published cost table prints it.
    #[default]
    AsPrinted,
    /// `× (M + 1)`, one term per counted negotiation.
    PerNegotiation,
}

fn pairs(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Key agreements needed in `n` sub-networks of `m` nodes each.
pub fn negotiation_counts(scheme: SchemeId, m: u64, n: u64) -> u64 {
    match scheme {
        SchemeId::Proposed => n * (m + 1),
        SchemeId::Ibekas | SchemeId::BnnIbsKs => n * pairs(m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Primitive {
    Bilinear,
    Hash,
    EccAddition,
    EccMultiplication,
    Xor,
    Exponent,
}

impl Primitive {
    pub const ALL: [Primitive; 6] = [
        Primitive::Bilinear,
        Primitive::Hash,
        Primitive::EccAddition,
        Primitive::EccMultiplication,
        Primitive::Xor,
        Primitive::Exponent,
    ];
}

/// Operation counts split by side: encryption/decryption, or
/// signature/validation for the signature-based baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OpCount {
    pub first: u64,
    pub second: u64,
}

/// One row per primitive, in [`Primitive::ALL`] order.
pub fn operation_counts(scheme: SchemeId, m: u64) -> Vec<(Primitive, OpCount)> {
    let c = |first, second| OpCount { first, second };
    let k = pairs(m);
    let row = |p: Primitive| match (scheme, p) {
        (SchemeId::Proposed, Primitive::Bilinear) => c(m + 1, m + 1),
        (SchemeId::Proposed, Primitive::Hash) => c(2 * m + 2, m + 1),
        (SchemeId::Proposed, Primitive::EccAddition) => c(m + 1, 0),
        (SchemeId::Proposed, Primitive::EccMultiplication) => c(0, 0),
        (SchemeId::Proposed, Primitive::Xor) => c(m + 1, m + 1),
        (SchemeId::Proposed, Primitive::Exponent) => c(m + 1, 0),
        (SchemeId::Ibekas, Primitive::Bilinear | Primitive::Hash | Primitive::Xor) => c(k, k),
        (SchemeId::Ibekas, Primitive::EccAddition | Primitive::Exponent) => c(k, 0),
        (SchemeId::Ibekas, Primitive::EccMultiplication) => c(0, 0),
        (SchemeId::BnnIbsKs, Primitive::Hash) => c(k, 2 * k),
        (SchemeId::BnnIbsKs, Primitive::EccAddition) => c(k, 3 * k),
        (SchemeId::BnnIbsKs, Primitive::EccMultiplication) => c(0, 2 * k),
        (SchemeId::BnnIbsKs, Primitive::Bilinear | Primitive::Xor | Primitive::Exponent) => c(0, 0),
    };
    Primitive::ALL.into_iter().map(|p| (p, row(p))).collect()
}

/// Seconds and millijoules for one sub-network of `m` nodes.
pub fn time_energy(scheme: SchemeId, m: u64, model: &CostModel, basis: ProposedBasis) -> (f64, f64) {
    let per_agreement_t = model.t_ecc_mul + model.t_pairing * 2.0;
    let per_agreement_e = model.e_ecc_mul + model.e_pairing * 2.0;
    match scheme {
        SchemeId::Proposed => {
            let times = match basis {
                ProposedBasis::AsPrinted => m,
                ProposedBasis::PerNegotiation => m + 1,
            } as f64;
            (per_agreement_t * times, per_agreement_e * times)
        }
        SchemeId::Ibekas => {
            let k = pairs(m) as f64;
            (per_agreement_t * k, per_agreement_e * k)
        }
        SchemeId::BnnIbsKs => {
            let ops = (3 * pairs(m) + 1) as f64;
            (model.t_ecc_mul * ops, model.e_ecc_mul * ops)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverheadReport {
    pub scheme: SchemeId,
    pub m: u64,
    pub n: u64,
    pub negotiations: u64,
    pub operations: Vec<(Primitive, OpCount)>,
    /// Totals over all `n` sub-networks.
    pub time_s: f64,
    pub energy_mj: f64,
}

pub fn overhead(scheme: SchemeId, m: u64, n: u64, model: &CostModel, basis: ProposedBasis) -> OverheadReport {
    let (t, e) = time_energy(scheme, m, model, basis);
    OverheadReport {
        scheme,
        m,
        n,
        negotiations: negotiation_counts(scheme, m, n),
        operations: operation_counts(scheme, m),
        time_s: t * n as f64,
        energy_mj: e * n as f64,
    }
}

/// One full negotiation round counted in a simulation log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundCheck {
    pub subnet: usize,
    pub epoch: u32,
    pub members: u64,
    pub counted: u64,
    pub formula: u64,
}

/// Compares counted negotiations with `M + 1` for every initialization,
/// re-key and recovery round. Rounds that admit a single newcomer are
/// incremental and skipped.
pub fn simulation_cross_check(log: &[Event]) -> Vec<RoundCheck> {
    events::rounds(log)
        .into_iter()
        .filter(|r| r.2 != Cause::Add)
        .map(|(subnet, epoch, _, members, counted)| RoundCheck {
            subnet,
            epoch,
            members: members as u64,
            counted: counted as u64,
            formula: negotiation_counts(SchemeId::Proposed, members as u64, 1),
        })
        .collect()
}

pub const CSV_HEADER: &str = "scheme,M,N,negotiations,time_s,energy_mJ";

/// Options for [`emit_report`].
#[derive(Debug, Clone, Default)]
pub struct ReportSpec<'a> {
    pub ms: Vec<u64>,
    pub ns: Vec<u64>,
    pub schemes: Vec<SchemeId>,
    pub model: CostModel,
    pub basis: ProposedBasis,
    /// When present, adds a `sim_negotiations` column: for Proposed rows with
    /// `N = 1`, the negotiations counted in the first initialization round of
    /// a simulated subnet with exactly `M` members.
    pub simulation: Option<&'a [Event]>,
}

/// CSV rows sorted by (scheme, M, N), floats with six decimals.
pub fn render_report(spec: &ReportSpec<'_>) -> String {
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let mut ms = spec.ms.clone();
    ms.sort();
    ms.dedup();
    let mut ns = spec.ns.clone();
    ns.sort();
    ns.dedup();
    let init_rounds: Vec<(u64, u64)> = spec
        .simulation
        .map(|log| {
            events::rounds(log)
                .into_iter()
                .filter(|r| r.2 == Cause::Init)
                .map(|r| (r.3 as u64, r.4 as u64))
                .collect()
        })
        .unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    if spec.simulation.is_some() {
        out.push_str(",sim_negotiations");
    }
    out.push('\n');
    for &scheme in &schemes {
        for &m in &ms {
            for &n in &ns {
                let r = overhead(scheme, m, n, &spec.model, spec.basis);
                out.push_str(&format!("{},{},{},{},{:.6},{:.6}", scheme, m, n, r.negotiations, r.time_s, r.energy_mj));
                if spec.simulation.is_some() {
                    out.push(',');
                    if scheme == SchemeId::Proposed && n == 1 {
                        if let Some((_, counted)) = init_rounds.iter().find(|(members, _)| *members == m) {
                            out.push_str(&counted.to_string());
                        }
                    }
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn emit_report<W: Write>(spec: &ReportSpec<'_>, sink: &mut W) -> io::Result<()> {
    sink.write_all(render_report(spec).as_bytes())
}
