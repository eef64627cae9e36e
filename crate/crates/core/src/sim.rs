//! Discrete-event model of a trusted authority keeping a set of nodes keyed.
//!
//! Time is an abstract integer clock. The authority issues frames from a
//! seeded stream; nodes validate and store them, derive hidden keys on their
//! own, and exchange messages over a lossless abstract transport. With
//! auto-rekey on, a new frame is issued `rekey_margin` units before the
//! current one expires.

use std::fmt;

use thiserror::Error;

use crate::codec::{symbols_to_text, text_to_symbols, Cipher, CodecError};
use crate::db::{derive_seed, NetworkProfile, ProfileError, QuasigroupCache, SplitMix64};
use crate::keying::{derive_hidden_key, generate_frame, validate_frame, HiddenKey, KeyError, KeyFrame, Validity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("at least 2 nodes are required, got {0}")]
    TooFewNodes(usize),
    #[error("time cannot move backwards (dt = {0})")]
    NegativeTime(i64),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("rekey margin {margin} must be below T1 = {t_min}")]
    InvalidMargin { margin: u64, t_min: u64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    FrameIssued,
    FrameAccepted,
    FrameRefused,
    Rekey,
    Advance,
    Delivered,
    Rejected,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::FrameIssued => "frame_issued",
            EventKind::FrameAccepted => "frame_accepted",
            EventKind::FrameRefused => "frame_refused",
            EventKind::Rekey => "rekey",
            EventKind::Advance => "advance",
            EventKind::Delivered => "delivered",
            EventKind::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: u64,
    pub kind: EventKind,
    pub details: String,
}

impl fmt::Display for Event {
    /// `time<TAB>event<TAB>details`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.time, self.kind, self.details)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    NoFrame,
    Expired,
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Delivered(String),
    Rejected(RejectReason),
}

/// Result of one send, with the keys each side derived (when it got that far).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SendOutcome {
    pub verdict: Verdict,
    pub sender_key: Option<HiddenKey>,
    pub receiver_key: Option<HiddenKey>,
}

#[derive(Debug, Clone)]
struct Node {
    frame: Option<KeyFrame>,
}

pub struct Sim {
    clock: u64,
    profile: NetworkProfile,
    current_frame: Option<KeyFrame>,
    nodes: Vec<Node>,
    log: Vec<Event>,
    rekey_margin: Option<u64>,
    master_seed: u64,
    issued: u64,
    cache: QuasigroupCache,
}

impl fmt::Debug for Sim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sim")
            .field("clock", &self.clock)
            .field("current_frame", &self.current_frame)
            .field("nodes", &self.nodes.len())
            .field("events", &self.log.len())
            .field("rekey_margin", &self.rekey_margin)
            .finish()
    }
}

impl Sim {
    /// Clock 0, no frame, nodes `1..=node_count`, auto-rekey with the default
    /// margin of `T1 / 2`.
    pub fn new(profile: NetworkProfile, node_count: usize, master_seed: u64) -> Result<Self, SimError> {
        if node_count < 2 {
            return Err(SimError::TooFewNodes(node_count));
        }
        profile.validate()?;
        Ok(Sim {
            clock: 0,
            rekey_margin: Some(profile.t_min / 2),
            cache: QuasigroupCache::new(profile.clone()),
            profile,
            current_frame: None,
            nodes: vec![Node { frame: None }; node_count],
            log: Vec::new(),
            master_seed,
            issued: 0,
        })
    }

    /// `None` disables auto-rekey. A margin must leave every frame a
    /// positive lifetime before its re-key point, so it has to stay below T1.
    pub fn set_rekey_margin(&mut self, margin: Option<u64>) -> Result<(), SimError> {
        if let Some(m) = margin {
            if m >= self.profile.t_min {
                return Err(SimError::InvalidMargin {
                    margin: m,
                    t_min: self.profile.t_min,
                });
            }
        }
        self.rekey_margin = margin;
        Ok(())
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn profile(&self) -> &NetworkProfile {
        &self.profile
    }

    pub fn current_frame(&self) -> Option<&KeyFrame> {
        self.current_frame.as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Frame held by node `id` (1-indexed).
    pub fn node_frame(&self, id: usize) -> Result<Option<&KeyFrame>, SimError> {
        Ok(self.node(id)?.frame.as_ref())
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn log_text(&self) -> String {
        self.log.iter().map(|e| format!("{e}\n")).collect()
    }

    fn node(&self, id: usize) -> Result<&Node, SimError> {
        id.checked_sub(1)
            .and_then(|i| self.nodes.get(i))
            .ok_or(SimError::UnknownNode(id))
    }

    fn record(&mut self, kind: EventKind, details: String) {
        self.log.push(Event {
            time: self.clock,
            kind,
            details,
        });
    }

    /// The authority draws a fresh frame and broadcasts it.
    pub fn issue_frame(&mut self) -> Result<(), SimError> {
        self.issued += 1;
        let seed = derive_seed(&[self.master_seed, self.issued]);
        let frame = generate_frame(&self.profile, seed)?.issued(self.clock);
        self.record(
            EventKind::FrameIssued,
            format!(
                "r={} s={} indices={:?} nonce={} expires={}",
                frame.r,
                frame.s,
                frame.indices,
                frame.nonce,
                frame.expires_at()
            ),
        );
        // squares for the previous nonce are no longer needed
        self.cache.clear();
        for i in 0..self.nodes.len() {
            match validate_frame(&self.profile, &frame, self.clock) {
                Validity::Valid => {
                    self.nodes[i].frame = Some(frame.clone());
                    self.record(EventKind::FrameAccepted, format!("node={}", i + 1));
                }
                other => self.record(EventKind::FrameRefused, format!("node={} verdict={other:?}", i + 1)),
            }
        }
        self.current_frame = Some(frame);
        Ok(())
    }

    /// Moves the clock forward by `dt`, re-keying at every re-key point
    /// crossed on the way.
    pub fn advance(&mut self, dt: i64) -> Result<(), SimError> {
        if dt < 0 {
            return Err(SimError::NegativeTime(dt));
        }
        let target = self.clock.saturating_add(dt as u64);
        while let (Some(margin), Some(frame)) = (self.rekey_margin, &self.current_frame) {
            let due = frame.expires_at().saturating_sub(margin);
            if due > target {
                break;
            }
            self.clock = self.clock.max(due);
            let expires = frame.expires_at();
            self.record(EventKind::Rekey, format!("previous_expires={expires}"));
            self.issue_frame()?;
        }
        self.clock = target;
        self.record(EventKind::Advance, format!("dt={dt}"));
        Ok(())
    }

    /// Encrypts `text` at `from` and delivers it to `to`, which checks frame
    /// freshness and decrypts with its own independently derived key.
    pub fn node_send(&mut self, from: usize, to: usize, text: &str) -> Result<SendOutcome, SimError> {
        let sender_frame = self.node(from)?.frame.clone();
        let receiver_frame = self.node(to)?.frame.clone();
        let route = format!("from={from} to={to}");

        let reject = |sim: &mut Sim, reason: RejectReason, sender_key: Option<HiddenKey>| {
            sim.record(EventKind::Rejected, format!("{route} reason={reason:?}"));
            SendOutcome {
                verdict: Verdict::Rejected(reason),
                sender_key,
                receiver_key: None,
            }
        };

        let Some(sender_frame) = sender_frame else {
            return Ok(reject(self, RejectReason::NoFrame, None));
        };
        let sender_key = match derive_hidden_key(&self.profile, &sender_frame) {
            Ok(k) => k,
            Err(e) => return Ok(reject(self, RejectReason::Invalid(e.to_string()), None)),
        };
        let alphabet = self.profile.alphabet();
        let plain = text_to_symbols(text, &alphabet)?;
        let wire = Cipher::with_cache(&self.cache, &sender_frame, &sender_key)?.encrypt(&plain)?;

        let Some(receiver_frame) = receiver_frame else {
            return Ok(reject(self, RejectReason::NoFrame, Some(sender_key)));
        };
        match validate_frame(&self.profile, &receiver_frame, self.clock) {
            Validity::Valid => {}
            Validity::Expired => return Ok(reject(self, RejectReason::Expired, Some(sender_key))),
            Validity::Invalid(why) => return Ok(reject(self, RejectReason::Invalid(why), Some(sender_key))),
        }
        let receiver_key = derive_hidden_key(&self.profile, &receiver_frame)?;
        let decoded = Cipher::with_cache(&self.cache, &receiver_frame, &receiver_key)?.decrypt(&wire)?;
        let delivered = symbols_to_text(&decoded, &alphabet)?;
        self.record(
            EventKind::Delivered,
            format!(
                "{route} len={} keys_equal={}",
                wire.len(),
                sender_key == receiver_key
            ),
        );
        Ok(SendOutcome {
            verdict: Verdict::Delivered(delivered),
            sender_key: Some(sender_key),
            receiver_key: Some(receiver_key),
        })
    }

    /// Scripted traffic: issues a frame if none is current, then alternates
    /// `advance(step)` with one message between a pair of distinct nodes
    /// drawn from the master seed, until the clock reaches `duration`.
    pub fn run_traffic(&mut self, duration: u64, step: u64) -> Result<Vec<SendOutcome>, SimError> {
        const MESSAGES: [&str; 4] = ["HELLO WORLD", "OOM NAMAH SHIVAYA", "KEY ROTATION", "A"];
        assert!(step > 0, "step must be positive");
        if self.current_frame.is_none() {
            self.issue_frame()?;
        }
        let mut rng = SplitMix64::new(derive_seed(&[self.master_seed, 0x7261_6666_6963]));
        let n = self.nodes.len() as u64;
        let mut outcomes = Vec::new();
        while self.clock < duration {
            let dt = step.min(duration - self.clock);
            self.advance(dt as i64)?;
            let from = rng.in_range(1, n);
            let to = (from + rng.in_range(0, n - 2)) % n + 1;
            let text = MESSAGES[rng.below(MESSAGES.len() as u64) as usize];
            outcomes.push(self.node_send(from as usize, to as usize, text)?);
        }
        Ok(outcomes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim() -> Sim {
        Sim::new(NetworkProfile::default(), 3, 17).unwrap()
    }

    #[test]
    fn init() {
        let s = Sim::new(NetworkProfile::default(), 2, 1).unwrap();
        assert_eq!(s.node_count(), 2);
        assert!(s.log().is_empty());
        assert_eq!(s.clock(), 0);
        assert!(s.current_frame().is_none());
        assert_eq!(
            Sim::new(NetworkProfile::default(), 1, 1).unwrap_err(),
            SimError::TooFewNodes(1)
        );
    }

    #[test]
    fn broadcast_gives_every_node_the_frame() {
        let mut s = sim();
        s.issue_frame().unwrap();
        let f = s.current_frame().unwrap().clone();
        let p = s.profile().clone();
        assert!(p.t_min < f.nonce && f.nonce < p.t_max);
        for id in 1..=3 {
            assert_eq!(s.node_frame(id).unwrap(), Some(&f));
        }
        assert!(s.node_frame(4).is_err());
        assert!(s.node_frame(0).is_err());
    }

    #[test]
    fn successive_frames_change_nonce() {
        let mut s = sim();
        let mut same = 0;
        let mut prev = None;
        for _ in 0..100 {
            s.issue_frame().unwrap();
            let n = s.current_frame().unwrap().nonce;
            if prev == Some(n) {
                same += 1;
            }
            prev = Some(n);
        }
        assert!(same <= 1, "{same}");
    }

    #[test]
    fn zero_advance_only_logs() {
        let mut s = sim();
        s.issue_frame().unwrap();
        let frame = s.current_frame().cloned();
        let before = s.log().len();
        s.advance(0).unwrap();
        assert_eq!(s.clock(), 0);
        assert_eq!(s.current_frame().cloned(), frame);
        assert_eq!(s.log().len(), before + 1);
        assert_eq!(s.advance(-1), Err(SimError::NegativeTime(-1)));
    }

    #[test]
    fn send_paths() {
        let mut s = sim();
        let out = s.node_send(1, 2, "HELLO WORLD").unwrap();
        assert_eq!(out.verdict, Verdict::Rejected(RejectReason::NoFrame));
        assert_eq!(s.node_send(1, 9, "X"), Err(SimError::UnknownNode(9)));

        s.issue_frame().unwrap();
        let out = s.node_send(1, 2, "hello  world").unwrap();
        assert_eq!(out.verdict, Verdict::Delivered("HELLO  WORLD".into()));
        assert_eq!(out.sender_key, out.receiver_key);

        s.set_rekey_margin(None).unwrap();
        let expires = s.current_frame().unwrap().expires_at();
        s.advance(expires as i64).unwrap();
        let out = s.node_send(2, 3, "HELLO").unwrap();
        assert_eq!(out.verdict, Verdict::Rejected(RejectReason::Expired));
    }

    #[test]
    fn auto_rekey_precedes_expiry() {
        let mut s = sim();
        s.issue_frame().unwrap();
        let first = s.current_frame().unwrap().clone();
        s.advance(first.nonce as i64).unwrap();
        let second = s.current_frame().unwrap().clone();
        assert_ne!(first, second);
        assert_eq!(second.issued_at, first.expires_at() - s.profile().t_min / 2);
        assert!(matches!(
            s.node_send(1, 3, "STILL HERE").unwrap().verdict,
            Verdict::Delivered(_)
        ));
        // one long jump crosses several re-key points
        let t = s.profile().t_max;
        s.advance(5 * t as i64).unwrap();
        let rekeys = s.log().iter().filter(|e| e.kind == EventKind::Rekey).count();
        assert!(rekeys >= 6, "{rekeys}");
    }

    #[test]
    fn margin_must_stay_below_t1() {
        let mut s = sim();
        assert!(s.set_rekey_margin(Some(1_000)).is_err());
        assert!(s.set_rekey_margin(Some(999)).is_ok());
        assert!(s.set_rekey_margin(Some(0)).is_ok());
    }

    #[test]
    fn log_is_reproducible() {
        let run = || {
            let mut s = Sim::new(NetworkProfile::default(), 4, 99).unwrap();
            s.run_traffic(3 * 10_000, 700).unwrap();
            s.log_text()
        };
        let a = run();
        assert_eq!(a, run());
        let first = a.lines().next().unwrap();
        assert_eq!(first.split('\t').count(), 3);
        assert!(first.starts_with("0\tframe_issued\t"));
    }
}
