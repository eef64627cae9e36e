//! Inline key notation `r, s, i1, i2, ...` (orders first, then indices).

use mlqe::db::NetworkProfile;
use mlqe::keying::{derive_multipliers, HiddenKey, KeyFrame};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LegacyKeyError {
    #[error("key needs r, s and at least one index (got {0} entries)")]
    TooFewEntries(usize),
    #[error("key entry {0:?} is not a number")]
    NotANumber(String),
    #[error("key order r = {r} must be smaller than s = {s}")]
    OrderViolation { r: u16, s: u16 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegacyKey {
    pub r: u16,
    pub s: u16,
    pub indices: Vec<u16>,
}

pub fn parse_legacy_key(text: &str) -> Result<LegacyKey, LegacyKeyError> {
    let entries = text
        .split(',')
        .map(|e| {
            let e = e.trim();
            e.parse::<u16>().map_err(|_| LegacyKeyError::NotANumber(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if entries.len() < 3 {
        return Err(LegacyKeyError::TooFewEntries(entries.len()));
    }
    let (r, s) = (entries[0], entries[1]);
    if r >= s {
        return Err(LegacyKeyError::OrderViolation { r, s });
    }
    Ok(LegacyKey {
        r,
        s,
        indices: entries[2..].to_vec(),
    })
}

impl LegacyKey {
    /// Key material for this key under `base`: the level count follows the
    /// number of indices with the default split, `s_max` widens to admit `s`,
    /// and the nonce is taken as given. The nonce window is not enforced.
    pub fn materialize(&self, base: &NetworkProfile, nonce: u64) -> (NetworkProfile, KeyFrame, HiddenKey) {
        let k = self.indices.len() as u16;
        let profile = NetworkProfile {
            k,
            m: NetworkProfile::default_split(k),
            s_max: base.s_max.max(self.s),
            ..base.clone()
        };
        let frame = KeyFrame {
            r: self.r,
            s: self.s,
            indices: self.indices.clone(),
            nonce,
            issued_at: 0,
        };
        let key = derive_multipliers(&profile, &frame);
        (profile, frame, key)
    }
}
