//! The `wsnkm` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 configuration, 3 cryptographic
//! failure, 4 simulation failure, 5 I/O. The effective seed is always
//! echoed to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::ibe;
use crate::keyex::DhGroup;
use crate::metrics::{self, CostModel, ProposedBasis, ReportSpec, SchemeId};
use crate::params::Preset;
use crate::protocol::{NegotiationMessage, NegotiationState, Role};
use crate::simnet::{self, Scenario, SimError};

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cryptographic failure: {0}")]
    Crypto(String),
    #[error("simulation failure: {0}")]
    Sim(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Crypto(_) => 3,
            CliError::Sim(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => CliError::Config(m),
            SimError::Crypto(m) => CliError::Crypto(m),
            other => CliError::Sim(other.to_string()),
        }
    }
}

fn crypto<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Crypto(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "wsnkm", version, about = "Identity-based key management for clustered sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Toy11,
    P1019,
    Toy32,
    Sim64,
    Bf256,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Toy11 => Preset::Toy11,
            PresetArg::P1019 => Preset::P1019,
            PresetArg::Toy32 => Preset::Toy32,
            PresetArg::Sim64 => Preset::Sim64,
            PresetArg::Bf256 => Preset::Bf256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    AsPrinted,
    PerNegotiation,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Setup, extract, encrypt and decrypt one message, printing each step.
    IbeDemo {
        #[arg(long, value_enum, default_value = "toy32")]
        preset: PresetArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "N001")]
        id: String,
        #[arg(long, default_value = "hello sensor")]
        message: String,
        /// Block size in bits, a multiple of 8.
        #[arg(long, default_value_t = ibe::DEFAULT_N_BITS)]
        n: usize,
    },
    /// One full head/node negotiation, printing every message.
    NegotiateDemo {
        #[arg(long, value_enum, default_value = "sim64")]
        preset: PresetArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "H1")]
        head: String,
        #[arg(long, default_value = "N7")]
        node: String,
        #[arg(long, default_value_t = 1)]
        epoch: u32,
    },
    /// Run a scenario file and write the event log.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Event log destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the final state as JSON.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Write the cost comparison as CSV.
    Metrics {
        /// Nodes per sub-network: `A..B` (inclusive), `A,B,C` or `A`.
        #[arg(long, default_value = "1..50")]
        m: String,
        /// Number of sub-networks, same syntax as `--m`.
        #[arg(long, default_value = "1")]
        n: String,
        /// Schemes to include (repeatable); all by default.
        #[arg(long = "scheme")]
        schemes: Vec<String>,
        #[arg(long, value_enum, default_value = "as-printed")]
        basis: BasisArg,
        /// Adds a column cross-checking against this simulation.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_ecc_mul: Option<f64>,
        #[arg(long)]
        e_ecc_mul: Option<f64>,
        #[arg(long)]
        t_pairing: Option<f64>,
        #[arg(long)]
        e_pairing: Option<f64>,
    },
}

/// A validated command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    IbeDemo { preset: Preset, seed: u64, id: String, message: String, n_bits: usize },
    NegotiateDemo { preset: Preset, seed: u64, head: String, node: String, epoch: u32 },
    Simulate { scenario: PathBuf, seed: Option<u64>, out: Option<PathBuf>, snapshot: Option<PathBuf> },
    Metrics {
        m: Vec<u64>,
        n: Vec<u64>,
        schemes: Vec<SchemeId>,
        basis: ProposedBasis,
        model: CostModel,
        scenario: Option<PathBuf>,
        seed: Option<u64>,
        out: Option<PathBuf>,
    },
}

/// `A..B` (inclusive), `A..=B`, `A,B,C` or `A`; every value at least 1.
pub fn parse_range(text: &str) -> Result<Vec<u64>, String> {
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("bad number {s:?} in {text:?}"));
    let values: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let r: RangeInclusive<u64> = num(a)?..=num(b)?;
        if r.is_empty() {
            return Err(format!("empty range {text:?}"));
        }
        if r.end() - r.start() > 100_000 {
            return Err(format!("range {text:?} too long"));
        }
        r.collect()
    } else {
        text.split(',').map(num).collect::<Result<_, _>>()?
    };
    if values.contains(&0) {
        return Err(format!("values in {text:?} must be at least 1"));
    }
    Ok(values)
}

pub fn parse_args<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.render().to_string()))?;
    Ok(match cli.command {
        Sub::IbeDemo { preset, seed, id, message, n } => {
            Command::IbeDemo { preset: preset.into(), seed, id, message, n_bits: n }
        }
        Sub::NegotiateDemo { preset, seed, head, node, epoch } => {
            Command::NegotiateDemo { preset: preset.into(), seed, head, node, epoch }
        }
        Sub::Simulate { scenario, seed, out, snapshot } => {
            if !scenario.is_file() {
                return Err(CliError::Usage(format!("scenario file {} not found", scenario.display())));
            }
            Command::Simulate { scenario, seed, out, snapshot }
        }
        Sub::Metrics { m, n, schemes, basis, scenario, out, seed, t_ecc_mul, e_ecc_mul, t_pairing, e_pairing } => {
            let schemes = if schemes.is_empty() {
                SchemeId::ALL.to_vec()
            } else {
                schemes.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(CliError::Usage)?
            };
            if let Some(path) = &scenario {
                if !path.is_file() {
                    return Err(CliError::Usage(format!("scenario file {} not found", path.display())));
                }
            }
            let d = CostModel::default();
            let model = CostModel {
                t_ecc_mul: t_ecc_mul.unwrap_or(d.t_ecc_mul),
                e_ecc_mul: e_ecc_mul.unwrap_or(d.e_ecc_mul),
                t_pairing: t_pairing.unwrap_or(d.t_pairing),
                e_pairing: e_pairing.unwrap_or(d.e_pairing),
            };
            Command::Metrics {
                m: parse_range(&m).map_err(CliError::Usage)?,
                n: parse_range(&n).map_err(CliError::Usage)?,
                schemes,
                basis: match basis {
                    BasisArg::AsPrinted => ProposedBasis::AsPrinted,
                    BasisArg::PerNegotiation => ProposedBasis::PerNegotiation,
                },
                model,
                scenario,
                seed,
                out,
            }
        }
    })
}

/// Setup, extract, encrypt and decrypt with every value printed in hex.
pub fn ibe_demo_transcript(preset: Preset, seed: u64, id: &str, message: &str, n_bits: usize) -> Result<String, CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (params, msk) = ibe::setup(&preset.p(), &preset.q(), n_bits, &mut rng).map_err(|e| match e {
        ibe::IbeError::InvalidBitLength(_) => CliError::Config(e.to_string()),
        other => crypto(other),
    })?;
    let mut block = message.as_bytes().to_vec();
    if block.len() > params.n_bytes() {
        return Err(CliError::Config(format!("message longer than {} bytes", params.n_bytes())));
    }
    block.resize(params.n_bytes(), 0);
    let sk = ibe::extract(&msk, id.as_bytes(), &params).map_err(crypto)?;
    let ct = ibe::encrypt(&params, id.as_bytes(), &block, &mut rng).map_err(crypto)?;
    let back = ibe::decrypt(&sk, &ct, &params).map_err(crypto)?;
    let curve = params.curve();
    let mut t = String::new();
    let _ = writeln!(t, "preset   {preset} p={} q={} n={}", curve.p(), curve.q(), params.n_bits());
    let _ = writeln!(t, "setup    P={}", hex::encode(curve.generator().to_bytes()));
    let _ = writeln!(t, "setup    P_pub={}", hex::encode(params.p_pub().to_bytes()));
    let _ = writeln!(t, "extract  id={id} Q_id={}", hex::encode(ibe::h1_map_to_point(id.as_bytes(), curve).map_err(crypto)?.to_bytes()));
    let _ = writeln!(t, "extract  K_id={} verify={}", hex::encode(sk.point().to_bytes()), sk.verify(&params).map_err(crypto)?);
    let _ = writeln!(t, "encrypt  M={}", hex::encode(&block));
    let _ = writeln!(t, "encrypt  U={}", hex::encode(ct.u().to_bytes()));
    let _ = writeln!(t, "encrypt  V={}", hex::encode(ct.v()));
    let _ = writeln!(t, "decrypt  M={}", hex::encode(&back));
    let _ = writeln!(t, "result   {}", if back == block { "match" } else { "MISMATCH" });
    if back != block {
        return Err(CliError::Crypto("decryption did not recover the message".into()));
    }
    Ok(t)
}

fn describe(t: &mut String, label: &str, m: &NegotiationMessage) {
    let _ = writeln!(
        t,
        "{label:<9}kind={:?} epoch={} sender={} payload={}B",
        m.kind,
        m.epoch,
        String::from_utf8_lossy(&m.sender),
        m.payload.len()
    );
    let _ = writeln!(t, "{:<9}wire={}", "", hex::encode(m.to_bytes()));
}

/// A complete exchange between one head and one node.
pub fn negotiate_demo_transcript(preset: Preset, seed: u64, head_id: &str, node_id: &str, epoch: u32) -> Result<String, CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (params, msk) = ibe::setup(&preset.p(), &preset.q(), ibe::DEFAULT_N_BITS, &mut rng).map_err(crypto)?;
    let group = DhGroup::new(preset.q()).map_err(|e| CliError::Config(e.to_string()))?;
    let hk = ibe::extract(&msk, head_id.as_bytes(), &params).map_err(crypto)?;
    let nk = ibe::extract(&msk, node_id.as_bytes(), &params).map_err(crypto)?;
    let mut head = NegotiationState::new(Role::Head, head_id, group.clone());
    let mut node = NegotiationState::new(Role::Node, node_id, group.clone());
    let mut t = String::new();
    let _ = writeln!(t, "preset   {preset} p={} q={}", params.curve().p(), params.curve().q());
    let _ = writeln!(t, "dh       modulus={} generator={}", group.modulus(), group.generator());
    let b = head.head_broadcast(epoch).map_err(crypto)?;
    describe(&mut t, "step 1", &b);
    let resp = node.respond_to_broadcast(&b, &params, &mut rng).map_err(crypto)?;
    let _ = writeln!(t, "step 2   {node_id} picks X_B, Y_B={}", node.own_keypair().expect("pending exchange").public());
    describe(&mut t, "step 3a", &resp);
    let (reply, head_session) = head.head_handle_response(&resp, &hk, &params, &mut rng).map_err(crypto)?;
    describe(&mut t, "step 3b", &reply);
    let node_session = node.finalize_session(&reply, &nk, &params).map_err(crypto)?;
    let _ = writeln!(t, "step 3d  {head_id} K={} key={}", head_session.raw(), hex::encode(head_session.key()));
    let _ = writeln!(t, "step 3d  {node_id} K={} key={}", node_session.raw(), hex::encode(node_session.key()));
    let agreed = head_session == node_session;
    let _ = writeln!(t, "result   {}", if agreed { "agreed" } else { "MISMATCH" });
    if !agreed {
        return Err(CliError::Crypto("session keys differ".into()));
    }
    Ok(t)
}

fn read_scenario(path: &PathBuf) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(CliError::from)
}

fn write_out(path: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn dispatch(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let echo = |stderr: &mut dyn Write, seed: u64| {
        let _ = writeln!(stderr, "seed: {seed}");
    };
    match cmd {
        Command::IbeDemo { preset, seed, id, message, n_bits } => {
            echo(stderr, *seed);
            write_out(None, &ibe_demo_transcript(*preset, *seed, id, message, *n_bits)?, stdout)
        }
        Command::NegotiateDemo { preset, seed, head, node, epoch } => {
            echo(stderr, *seed);
            write_out(None, &negotiate_demo_transcript(*preset, *seed, head, node, *epoch)?, stdout)
        }
        Command::Simulate { scenario, seed, out, snapshot } => {
            let mut sc = read_scenario(scenario)?;
            if let Some(s) = seed {
                sc.seed = *s;
            }
            echo(stderr, sc.seed);
            let net = simnet::run_scenario(&sc)?;
            write_out(out.as_ref(), &net.event_log(), stdout)?;
            if let Some(path) = snapshot {
                let json = serde_json::to_string_pretty(&net.snapshot()).expect("snapshot serializes") + "\n";
                write_out(Some(path), &json, stdout)?;
            }
            let _ = writeln!(stderr, "events: {} connectivity: {:.6}", net.events().len(), net.connectivity_rate());
            Ok(())
        }
        Command::Metrics { m, n, schemes, basis, model, scenario, seed, out } => {
            let net = match scenario {
                Some(path) => {
                    let mut sc = read_scenario(path)?;
                    if let Some(s) = seed {
                        sc.seed = *s;
                    }
                    echo(stderr, sc.seed);
                    Some(simnet::run_scenario(&sc)?)
                }
                None => {
                    echo(stderr, seed.unwrap_or(0));
                    None
                }
            };
            if let Some(net) = &net {
                for r in metrics::simulation_cross_check(net.events()) {
                    if r.counted != r.formula {
                        return Err(CliError::Sim(format!(
                            "subnet {} epoch {}: counted {} negotiations, expected {}",
                            r.subnet, r.epoch, r.counted, r.formula
                        )));
                    }
                }
            }
            let spec = ReportSpec {
                ms: m.clone(),
                ns: n.clone(),
                schemes: schemes.clone(),
                model: *model,
                basis: *basis,
                simulation: net.as_ref().map(|n| n.events()),
            };
            write_out(out.as_ref(), &metrics::render_report(&spec), stdout)
        }
    }
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(&argv) {
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
        _ => {}
    }
    let result = parse_args(argv).and_then(|cmd| dispatch(&cmd, stdout, stderr));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
