//! Named (p, q) parameter sets.
//!
//! Every preset satisfies p prime, p ≡ 11 (mod 12) (so p ≡ 2 mod 3 and the
//! cheap square root applies), q prime and q | p + 1.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// p = 11, q = 3. Small enough to enumerate; the distorted pairing is
    /// trivial here because the order-3 subgroup lies on x = 0.
    Toy11,
    /// p = 1019, q = 17.
    P1019,
    /// 31-bit p, 20-bit q.
    Toy32,
    /// 61-bit p, 32-bit q ≥ 2³¹, so q itself works as the DH modulus.
    Sim64,
    /// 255-bit p, 160-bit q.
    Bf256,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Toy11, Preset::P1019, Preset::Toy32, Preset::Sim64, Preset::Bf256];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Toy11 => "toy11",
            Preset::P1019 => "p1019",
            Preset::Toy32 => "toy32",
            Preset::Sim64 => "sim64",
            Preset::Bf256 => "bf256",
        }
    }

    fn decimal(self) -> (&'static str, &'static str) {
        match self {
            Preset::Toy11 => ("11", "3"),
            Preset::P1019 => ("1019", "17"),
            Preset::Toy32 => ("1376283299", "655373"),
            Preset::Sim64 => ("1441152262473781367", "2684354591"),
            Preset::Bf256 => (
                "36185027886661311069865933805382330495833597291841046134012016364099362380011",
                "913438523331814323877303020447676887284957839381",
            ),
        }
    }

    pub fn p(self) -> BigUint {
        self.decimal().0.parse().expect("preset literal")
    }

    pub fn q(self) -> BigUint {
        self.decimal().1.parse().expect("preset literal")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset '{s}'"))
    }
}
