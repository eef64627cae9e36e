//! Frame generation (trusted authority side), hidden-key derivation (both
//! ends) and frame validity checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::db::{derive_seed, NetworkProfile, ProfileError, SplitMix64};
use crate::quasigroup::Symbol;

pub const FRAME_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error(transparent)]
    ProfileInvalid(#[from] ProfileError),
    #[error("invalid key frame: {0}")]
    FrameInvalid(String),
    #[error("malformed key-frame file: {0}")]
    Parse(String),
}

/// One transmission from the trusted authority.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeyFrame {
    /// Order of the first-stage squares.
    pub r: u16,
    /// Order of the second-stage squares.
    pub s: u16,
    /// One database index per level.
    pub indices: Vec<u16>,
    /// Validity duration; also feeds isotope selection and multipliers.
    pub nonce: u64,
    pub issued_at: u64,
}

/// The multiplier (leader) for each level, never transmitted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HiddenKey {
    pub multipliers: Vec<Symbol>,
    pub level_orders: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Expired,
    Invalid(String),
}

impl KeyFrame {
    pub fn issued(mut self, at: u64) -> Self {
        self.issued_at = at;
        self
    }

    /// First instant at which the frame is no longer valid.
    pub fn expires_at(&self) -> u64 {
        self.issued_at.saturating_add(self.nonce)
    }

    /// Checks the order rule, index ranges and level count. The nonce window
    /// is checked separately by [`check_nonce`](Self::check_nonce).
    pub fn check_structure(&self, profile: &NetworkProfile) -> Result<(), String> {
        if self.r < 2 {
            return Err("r must be at least 2".into());
        }
        if self.r >= self.s {
            return Err("r must be < s".into());
        }
        if self.s > profile.s_max {
            return Err(format!("s must not exceed s_max {}", profile.s_max));
        }
        if self.indices.len() != profile.k as usize {
            return Err(format!(
                "expected {} indices, found {}",
                profile.k,
                self.indices.len()
            ));
        }
        if let Some(pos) = self
            .indices
            .iter()
            .position(|&i| i == 0 || i > profile.index_max)
        {
            return Err(format!(
                "index {} at level {} is outside 1..={}",
                self.indices[pos],
                pos + 1,
                profile.index_max
            ));
        }
        Ok(())
    }

    pub fn check_nonce(&self, profile: &NetworkProfile) -> Result<(), String> {
        if profile.t_min < self.nonce && self.nonce < profile.t_max {
            Ok(())
        } else {
            Err(format!(
                "nonce {} must satisfy {} < t < {}",
                self.nonce, profile.t_min, profile.t_max
            ))
        }
    }

    pub fn to_json(&self, profile_id: &str) -> String {
        let file = FrameFile {
            version: FRAME_VERSION,
            profile_id: profile_id.to_string(),
            r: self.r,
            s: self.s,
            indices: self.indices.clone(),
            nonce: self.nonce,
            issued_at: self.issued_at,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("frame serializes");
        s.push('\n');
        s
    }

    /// Parses a key-frame file, returning the frame and the profile id it
    /// names.
    pub fn from_json(text: &str) -> Result<(KeyFrame, String), KeyError> {
        let file: FrameFile =
            serde_json::from_str(text).map_err(|e| KeyError::Parse(e.to_string()))?;
        if file.version != FRAME_VERSION {
            return Err(KeyError::Parse(format!("unsupported version {}", file.version)));
        }
        let frame = KeyFrame {
            r: file.r,
            s: file.s,
            indices: file.indices,
            nonce: file.nonce,
            issued_at: file.issued_at,
        };
        Ok((frame, file.profile_id))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    version: u32,
    profile_id: String,
    r: u16,
    s: u16,
    indices: Vec<u16>,
    nonce: u64,
    issued_at: u64,
}

/// Draws a fresh frame from the SplitMix64 stream on `rng_seed`: first `r`,
/// then `s`, then the `k` indices, then the nonce. `issued_at` is left at 0.
pub fn generate_frame(profile: &NetworkProfile, rng_seed: u64) -> Result<KeyFrame, KeyError> {
    profile.validate()?;
    let mut rng = SplitMix64::new(rng_seed);
    let r = rng.in_range(profile.r_min as u64, profile.r_max as u64) as u16;
    let s = rng.in_range(r as u64 + 1, profile.s_max as u64) as u16;
    let indices = (0..profile.k)
        .map(|_| rng.in_range(1, profile.index_max as u64) as u16)
        .collect();
    let nonce = rng.in_range(profile.t_min + 1, profile.t_max - 1);
    Ok(KeyFrame {
        r,
        s,
        indices,
        nonce,
        issued_at: 0,
    })
}

/// `[r; m]` followed by `[s; k - m]`.
pub fn level_orders(profile: &NetworkProfile, frame: &KeyFrame) -> Vec<u16> {
    let k = frame.indices.len();
    let m = (profile.m as usize).min(k);
    std::iter::repeat(frame.r)
        .take(m)
        .chain(std::iter::repeat(frame.s).take(k - m))
        .collect()
}

/// Multiplier for every level, with no validity checks on the frame:
/// `q_j = 1 + derive_seed([db_seed, t, r, s, I_j, j]) mod n_j` for 1-indexed
/// level `j` of order `n_j`.
pub fn derive_multipliers(profile: &NetworkProfile, frame: &KeyFrame) -> HiddenKey {
    let orders = level_orders(profile, frame);
    let multipliers = frame
        .indices
        .iter()
        .zip(&orders)
        .enumerate()
        .map(|(j, (&index, &order))| {
            let h = derive_seed(&[
                profile.db_seed,
                frame.nonce,
                frame.r as u64,
                frame.s as u64,
                index as u64,
                j as u64 + 1,
            ]);
            (1 + h % order as u64) as Symbol
        })
        .collect();
    HiddenKey {
        multipliers,
        level_orders: orders,
    }
}

/// Derives the hidden key for a frame that is structurally valid and whose
/// nonce lies in the profile's window.
pub fn derive_hidden_key(profile: &NetworkProfile, frame: &KeyFrame) -> Result<HiddenKey, KeyError> {
    frame
        .check_structure(profile)
        .and_then(|_| frame.check_nonce(profile))
        .map_err(KeyError::FrameInvalid)?;
    Ok(derive_multipliers(profile, frame))
}

/// `Valid` strictly before `issued_at + t`, `Expired` from then on.
pub fn validate_frame(profile: &NetworkProfile, frame: &KeyFrame, now: u64) -> Validity {
    if let Err(reason) = frame
        .check_structure(profile)
        .and_then(|_| frame.check_nonce(profile))
    {
        return Validity::Invalid(reason);
    }
    if now < frame.expires_at() {
        Validity::Valid
    } else {
        Validity::Expired
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_profile() -> NetworkProfile {
        NetworkProfile {
            r_max: 200,
            s_max: 300,
            ..NetworkProfile::default()
        }
    }

    fn example_frame() -> KeyFrame {
        KeyFrame {
            r: 150,
            s: 270,
            indices: vec![1, 2, 3, 5, 4, 6],
            nonce: 2_000,
            issued_at: 100,
        }
    }

    #[test]
    fn level_orders_split() {
        let p = example_profile();
        assert_eq!(level_orders(&p, &example_frame()), vec![150, 150, 150, 270, 270, 270]);

        let two = NetworkProfile { k: 2, m: 1, ..p.clone() };
        let f = KeyFrame { indices: vec![1, 1], ..example_frame() };
        assert_eq!(level_orders(&two, &f), vec![150, 270]);

        let late = NetworkProfile { m: 5, ..p };
        assert_eq!(level_orders(&late, &example_frame()), vec![150, 150, 150, 150, 150, 270]);
    }

    #[test]
    fn validity_boundaries() {
        let p = example_profile();
        let f = example_frame();
        assert_eq!(validate_frame(&p, &f, f.issued_at), Validity::Valid);
        assert_eq!(validate_frame(&p, &f, f.issued_at + f.nonce - 1), Validity::Valid);
        assert_eq!(validate_frame(&p, &f, f.issued_at + f.nonce), Validity::Expired);

        let equal = KeyFrame { s: 150, ..f.clone() };
        assert_eq!(validate_frame(&p, &equal, 100), Validity::Invalid("r must be < s".into()));

        let stale_nonce = KeyFrame { nonce: p.t_min, ..f.clone() };
        assert!(matches!(validate_frame(&p, &stale_nonce, 100), Validity::Invalid(_)));
        let short = KeyFrame { indices: vec![1, 2], ..f.clone() };
        assert!(matches!(validate_frame(&p, &short, 100), Validity::Invalid(_)));
        let zero = KeyFrame { indices: vec![0, 1, 1, 1, 1, 1], ..f };
        assert!(matches!(validate_frame(&p, &zero, 100), Validity::Invalid(_)));
    }

    #[test]
    fn hidden_key_rejects_invalid_frames() {
        let p = example_profile();
        let bad = KeyFrame { nonce: 5, ..example_frame() };
        assert!(matches!(derive_hidden_key(&p, &bad), Err(KeyError::FrameInvalid(_))));
    }

    #[test]
    fn sender_and_receiver_agree() {
        let p = example_profile();
        let f = example_frame();
        let sender = derive_hidden_key(&p, &f).unwrap();
        let receiver = derive_hidden_key(&p, &f.clone()).unwrap();
        assert_eq!(sender, receiver);
        assert_eq!(sender.multipliers.len(), 6);
    }

    #[test]
    fn nonce_changes_multipliers() {
        let p = NetworkProfile::default();
        let mut changed = 0;
        for seed in 0..100u64 {
            let f = generate_frame(&p, seed).unwrap();
            let mut g = f.clone();
            g.nonce = if f.nonce + 1 < p.t_max { f.nonce + 1 } else { f.nonce - 1 };
            if derive_hidden_key(&p, &f).unwrap() != derive_hidden_key(&p, &g).unwrap() {
                changed += 1;
            }
        }
        assert!(changed >= 95, "{changed}");
    }

    #[test]
    fn frame_json_round_trip() {
        let f = example_frame();
        let json = f.to_json("lab");
        let (back, id) = KeyFrame::from_json(&json).unwrap();
        assert_eq!(back, f);
        assert_eq!(id, "lab");
        let keys = ["version", "profile_id", "r", "s", "indices", "nonce", "issued_at"];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(&format!("\"{k}\":")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(KeyFrame::from_json(&json.replace("\"nonce\"", "\"nonse\"")).is_err());
    }

    #[test]
    fn generate_frame_requires_valid_profile() {
        let p = NetworkProfile { m: 0, ..NetworkProfile::default() };
        assert!(matches!(generate_frame(&p, 1), Err(KeyError::ProfileInvalid(_))));
    }

    proptest! {
        #[test]
        fn generated_frames_satisfy_invariants(seed: u64) {
            let p = NetworkProfile::default();
            let f = generate_frame(&p, seed).unwrap();
            prop_assert_eq!(&f, &generate_frame(&p, seed).unwrap());
            prop_assert!(p.r_min <= f.r && f.r <= p.r_max);
            prop_assert!(f.r < f.s && f.s <= p.s_max);
            prop_assert!(p.t_min < f.nonce && f.nonce < p.t_max);
            prop_assert_eq!(validate_frame(&p, &f, 0), Validity::Valid);
            let key = derive_hidden_key(&p, &f).unwrap();
            for (q, n) in key.multipliers.iter().zip(&key.level_orders) {
                prop_assert!(1 <= *q && q <= n);
            }
        }

        #[test]
        fn validity_is_monotone(seed: u64, a in 0u64..20_000, b in 0u64..20_000) {
            let p = NetworkProfile::default();
            let f = generate_frame(&p, seed).unwrap().issued(500);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if validate_frame(&p, &f, lo) == Validity::Expired {
                prop_assert_eq!(validate_frame(&p, &f, hi), Validity::Expired);
            }
        }
    }
}
