//! Scenario files: network configuration plus an ordered event script.
//!
//! ```json
//! {
//!   "seed": 7, "preset": "sim64", "n": 256,
//!   "node_count": 100, "subnet_count": 5, "range": 1.5,
//!   "spares": ["N100"],
//!   "events": [
//!     {"op": "add", "id": "N100", "subnet": 1},
//!     {"op": "revoke", "id": "N042"},
//!     {"op": "compromise", "subnet": 3},
//!     {"op": "rekey", "subnet": 2}
//!   ]
//! }
//! ```
//!
//! `p` and `q` may be given as decimal strings instead of `preset`.
//! `dh_modulus` defaults to `q`.

use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::params::Preset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScriptEvent {
    Add {
        id: String,
        subnet: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<[f64; 2]>,
    },
    Revoke {
        id: String,
    },
    /// Compromise of a head, named directly or by its subnet.
    Compromise {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subnet: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    Rekey {
        subnet: usize,
    },
}

fn default_n() -> usize {
    crate::ibe::DEFAULT_N_BITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default = "default_n")]
    pub n: usize,
    pub node_count: usize,
    pub subnet_count: usize,
    pub range: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh_modulus: Option<String>,
    #[serde(default)]
    pub spares: Vec<String>,
    #[serde(default)]
    pub events: Vec<ScriptEvent>,
}

/// Validated network configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub p: BigUint,
    pub q: BigUint,
    pub n_bits: usize,
    pub node_count: usize,
    pub subnet_count: usize,
    pub range: f64,
    pub dh_modulus: BigUint,
    /// Identities provisioned at the base station but not deployed.
    pub spares: Vec<String>,
}

fn parse_big(field: &str, s: &str) -> Result<BigUint, SimError> {
    BigUint::from_str(s.trim()).map_err(|_| SimError::Config(format!("{field} is not a decimal integer")))
}

impl SimConfig {
    /// A configuration on a named preset with the default block size.
    pub fn with_preset(preset: Preset, node_count: usize, subnet_count: usize, range: f64) -> Self {
        SimConfig {
            p: preset.p(),
            q: preset.q(),
            n_bits: default_n(),
            node_count,
            subnet_count,
            range,
            dh_modulus: preset.q(),
            spares: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.node_count == 0 || self.subnet_count == 0 {
            return Err(SimError::Config("node_count and subnet_count must be positive".into()));
        }
        if self.subnet_count >= self.node_count {
            return Err(SimError::Config("subnet_count must be smaller than node_count".into()));
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(SimError::Config("range must be positive".into()));
        }
        if self.node_count > 100_000 {
            return Err(SimError::Config("node_count too large".into()));
        }
        let ids = super::sensor_ids(self.node_count);
        for (i, s) in self.spares.iter().enumerate() {
            if s.is_empty() || s == super::BASE_STATION || ids.contains(s) || self.spares[..i].contains(s) {
                return Err(SimError::Config(format!("spare identity {s:?} is empty or already in use")));
            }
        }
        Ok(())
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Config(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn config(&self) -> Result<SimConfig, SimError> {
        let (p, q) = match (&self.preset, &self.p, &self.q) {
            (Some(name), None, None) => {
                let preset = Preset::from_str(name).map_err(|e| SimError::Config(e.to_string()))?;
                (preset.p(), preset.q())
            }
            (None, Some(p), Some(q)) => (parse_big("p", p)?, parse_big("q", q)?),
            _ => return Err(SimError::Config("give either preset or both p and q".into())),
        };
        let dh_modulus = match &self.dh_modulus {
            Some(m) => parse_big("dh_modulus", m)?,
            None => q.clone(),
        };
        let cfg = SimConfig {
            p,
            q,
            n_bits: self.n,
            node_count: self.node_count,
            subnet_count: self.subnet_count,
            range: self.range,
            dh_modulus,
            spares: self.spares.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"{
        "seed": 7, "preset": "sim64", "node_count": 20, "subnet_count": 2, "range": 1.5,
        "spares": ["X1"],
        "events": [
            {"op": "add", "id": "X1", "subnet": 1},
            {"op": "revoke", "id": "N003"},
            {"op": "compromise", "subnet": 0},
            {"op": "rekey", "subnet": 1}
        ]
    }"#;

    #[test]
    fn parses_and_roundtrips() {
        let s = Scenario::from_json(TEXT).unwrap();
        assert_eq!(s.n, 256);
        assert_eq!(s.events.len(), 4);
        assert_eq!(s.events[2], ScriptEvent::Compromise { subnet: Some(0), id: None });
        let cfg = s.config().unwrap();
        assert_eq!(cfg.q, Preset::Sim64.q());
        assert_eq!(cfg.dh_modulus, cfg.q);
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |patch: &str| {
            let mut v: serde_json::Value = serde_json::from_str(TEXT).unwrap();
            let p: serde_json::Value = serde_json::from_str(patch).unwrap();
            for (k, val) in p.as_object().unwrap() {
                v[k] = val.clone();
            }
            Scenario::from_json(&v.to_string()).and_then(|s| s.config())
        };
        assert!(bad(r#"{"subnet_count": 20}"#).is_err());
        assert!(bad(r#"{"range": 0.0}"#).is_err());
        assert!(bad(r#"{"p": "11"}"#).is_err());
        assert!(bad(r#"{"preset": "nope"}"#).is_err());
        assert!(bad(r#"{"spares": ["N001"]}"#).is_err());
        assert!(bad(r#"{"frobnicate": 1}"#).is_err());
        assert!(bad(r#"{"events": [{"op": "explode"}]}"#).is_err());
        assert!(bad(r#"{"subnet_count": 3}"#).is_ok());
    }
}
