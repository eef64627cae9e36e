use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::alphabet::Alphabet;
use crate::db::seed::derive_seed;

pub const PROFILE_VERSION: u32 = 1;

/// Seed of the pinned default profile ("MLQE" in ASCII, big-endian).
pub const DEFAULT_DB_SEED: u64 = 0x4D4C_5145;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("invalid profile: {0}")]
    Invalid(String),
    #[error("malformed profile file: {0}")]
    Parse(String),
}

/// Network-wide constants shared by the trusted authority and every node.
///
/// Times (`t_max`, `t_min`) are abstract units; a frame's nonce lies strictly
/// between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkProfile {
    pub profile_id: String,
    #[serde(with = "decimal_u64")]
    pub db_seed: u64,
    pub r_min: u16,
    pub r_max: u16,
    pub s_max: u16,
    /// Number of levels.
    pub k: u16,
    /// Number of leading levels that use order `r`.
    pub m: u16,
    pub index_max: u16,
    #[serde(rename = "T")]
    pub t_max: u64,
    #[serde(rename = "T1")]
    pub t_min: u64,
    pub alphabet_id: String,
    pub version: u32,
}

impl Default for NetworkProfile {
    fn default() -> Self {
        NetworkProfile {
            profile_id: "default".to_string(),
            db_seed: DEFAULT_DB_SEED,
            r_min: 32,
            r_max: 128,
            s_max: 256,
            k: 6,
            m: 3,
            index_max: 1000,
            t_max: 10_000,
            t_min: 1_000,
            alphabet_id: "latin27".to_string(),
            version: PROFILE_VERSION,
        }
    }
}

impl NetworkProfile {
    /// Default split point: the first `ceil(k/2)` levels use order `r`.
    pub fn default_split(k: u16) -> u16 {
        k.div_ceil(2)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let fail = |msg: String| Err(ProfileError::Invalid(msg));
        if self.version != PROFILE_VERSION {
            return fail(format!("unsupported version {}", self.version));
        }
        if self.r_min < 2 {
            return fail("r_min must be at least 2".into());
        }
        if self.r_min > self.r_max {
            return fail("r_min must not exceed r_max".into());
        }
        if self.r_max >= self.s_max {
            return fail("r_max must be < s_max".into());
        }
        if self.k < 2 {
            return fail("k must be at least 2".into());
        }
        if self.m < 1 || self.m >= self.k {
            return fail("m must satisfy 1 <= m < k".into());
        }
        if self.index_max < 1 {
            return fail("index_max must be at least 1".into());
        }
        if self.t_min == 0 {
            return fail("T1 must be positive".into());
        }
        // at least one integer nonce must fit strictly between T1 and T
        if self.t_min.checked_add(1).map_or(true, |v| v >= self.t_max) {
            return fail("T1 < t < T leaves no admissible nonce".into());
        }
        if Alphabet::by_id(&self.alphabet_id).is_none() {
            return fail(format!("unknown alphabet {:?}", self.alphabet_id));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::by_id(&self.alphabet_id).unwrap_or_else(Alphabet::latin27)
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let profile: NetworkProfile =
            serde_json::from_str(text).map_err(|e| ProfileError::Parse(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    /// Canonical serialization: keys in the documented order, pretty-printed,
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("profile serializes");
        s.push('\n');
        s
    }
}

/// Fingerprint of a profile file, as stored in ciphertext headers.
///
/// The bytes are absorbed as their length followed by little-endian 8-byte
/// words, the final word zero-padded.
pub fn profile_fingerprint(bytes: &[u8]) -> u64 {
    let mut parts = Vec::with_capacity(bytes.len() / 8 + 2);
    parts.push(bytes.len() as u64);
    for chunk in bytes.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        parts.push(u64::from_le_bytes(word));
    }
    derive_seed(&parts)
}

mod decimal_u64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse()
            .map_err(|_| D::Error::custom(format!("db_seed {text:?} is not a decimal u64")))
    }
}
