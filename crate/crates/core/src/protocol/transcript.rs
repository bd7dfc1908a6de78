//! Record of one protocol run and its independent re-evaluation.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::params::{ProtocolParams, Representation};
use crate::error::{Error, Result};

/// Name and version of the generator behind seeded runs.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng/rand_chacha-0.9";

/// A bit or an abort. Serialized as `0`, `1` or `"⊥"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Bit(u8),
    Abort,
}

impl Outcome {
    pub fn is_abort(self) -> bool {
        self == Outcome::Abort
    }

    /// `⊥`-absorbing exclusive or.
    pub fn xor(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Bit(x), Outcome::Bit(y)) => Outcome::Bit((x ^ y) & 1),
            _ => Outcome::Abort,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Bit(b) => write!(f, "{b}"),
            Outcome::Abort => f.write_str("⊥"),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Outcome::Bit(b) => s.serialize_u8(*b),
            Outcome::Abort => s.serialize_str("⊥"),
        }
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bit(u8),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bit(b @ (0 | 1)) => Ok(Outcome::Bit(b)),
            Raw::Text(t) if t == "⊥" => Ok(Outcome::Abort),
            Raw::Bit(b) => Err(serde::de::Error::custom(format!("outcome {b} is not a bit"))),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unknown outcome {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Honest,
    Attack,
}

/// Bob*'s internal values at the attack round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub target: u8,
    /// `Ã″`: the guess of the parity of Alice's bits after round `l`.
    pub parity_guess: u8,
    /// `F`: parity of the register over rounds `l..=m`.
    pub register_parity: u8,
    /// `X̃`: the result Bob* expects when opening the register as measured.
    pub predicted: u8,
    /// Whether the register was rotated towards the opposite parity.
    pub steered: bool,
    /// For steered runs, whether the register measurement landed on the
    /// desired parity rather than the random fallback.
    pub steer_hit: Option<bool>,
    /// For steered runs, the squared overlap reached by the rotation.
    pub steer_overlap: Option<f64>,
}

/// Everything announced and measured in one run. Per-round vectors have one
/// entry per round `1..=m`; `None` marks a value never produced because the
/// run stopped or the party does not perform that step. Matrices indexed
/// `[i][j]` hold per-qubit bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub kind: RunKind,
    pub params: ProtocolParams,
    pub representation: Representation,
    pub seed: Option<u64>,
    pub rng: String,
    pub a: Vec<u8>,
    /// Bits announced by Bob or Bob*.
    pub b: Vec<Option<u8>>,
    pub c: Vec<Vec<u8>>,
    pub d: Vec<Vec<u8>>,
    pub e: Vec<Vec<u8>>,
    pub f: Vec<Vec<u8>>,
    /// `ã_j`: Bob's test of the block he kept against Alice's announcement.
    pub a_checks: Vec<Option<Outcome>>,
    /// `b̃_j`: Alice's test of the block she kept against Bob's announcement.
    pub b_checks: Vec<Option<Outcome>>,
    /// Alice's final test of the blocks Bob returned.
    pub alice_return_checks: Vec<Option<Outcome>>,
    /// Bob's final test of the blocks Alice returned.
    pub bob_return_checks: Vec<Option<Outcome>>,
    pub attack: Option<AttackRecord>,
    pub result: Outcome,
}

impl Transcript {
    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Inconsistent(format!("transcript serialization: {e}")))
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::InvalidArgument(format!("bad transcript record: {e}")))
    }
}

/// Recomputes `X` from the recorded tests.
///
/// Any recorded `⊥` gives `⊥`. Otherwise every round needs `b̃_j` and either
/// `ã_j` or, in attack runs after the attack round where Bob* performs no
/// test, Alice's announced `a_j`.
pub fn verify_result(t: &Transcript) -> Result<Outcome> {
    let m = t.params.m;
    let rows = [&t.a_checks, &t.b_checks, &t.alice_return_checks, &t.bob_return_checks];
    if t.a.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::IncompleteTranscript(format!("per-round records must have {m} entries")));
    }
    if rows.iter().any(|r| r.iter().flatten().any(|o| o.is_abort())) {
        return Ok(Outcome::Abort);
    }
    let mut x = Outcome::Bit(0);
    for j in 0..m {
        let a_term = match t.a_checks[j] {
            Some(o) => o,
            None if t.kind == RunKind::Attack && j + 1 > t.params.l => Outcome::Bit(t.a[j]),
            None => return Err(Error::IncompleteTranscript(format!("ã_{} missing", j + 1))),
        };
        let b_term = t.b_checks[j].ok_or_else(|| Error::IncompleteTranscript(format!("b̃_{} missing", j + 1)))?;
        if t.alice_return_checks[j].is_none() {
            return Err(Error::IncompleteTranscript(format!("Alice's final test of round {} missing", j + 1)));
        }
        if t.kind == RunKind::Honest && t.bob_return_checks[j].is_none() {
            return Err(Error::IncompleteTranscript(format!("Bob's final test of round {} missing", j + 1)));
        }
        x = x.xor(a_term).xor(b_term);
    }
    Ok(x)
}
