//! Binary ciphertext container and the plain-text symbol format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "QGE1" | version u8 | profile fingerprint u64 | nonce u64 | r u16 | s u16
//!        | k u16 | k x index u16 | payload length u64 | payload x symbol u16
//! ```

use thiserror::Error;

use crate::keying::KeyFrame;
use crate::quasigroup::Symbol;

pub const MAGIC: &[u8; 4] = b"QGE1";
pub const CONTAINER_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("not a ciphertext container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("container truncated while reading {0}")]
    Truncated(&'static str),
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("field {0} does not fit the container format")]
    TooLarge(&'static str),
    #[error("token {0:?} is not a symbol")]
    BadSymbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub profile_fingerprint: u64,
    pub nonce: u64,
    pub r: u16,
    pub s: u16,
    pub indices: Vec<u16>,
    pub payload: Vec<Symbol>,
}

impl Container {
    pub fn new(profile_fingerprint: u64, frame: &KeyFrame, payload: Vec<Symbol>) -> Self {
        Container {
            profile_fingerprint,
            nonce: frame.nonce,
            r: frame.r,
            s: frame.s,
            indices: frame.indices.clone(),
            payload,
        }
    }

    /// The frame fields carried in the header. `issued_at` is not stored.
    pub fn frame(&self) -> KeyFrame {
        KeyFrame {
            r: self.r,
            s: self.s,
            indices: self.indices.clone(),
            nonce: self.nonce,
            issued_at: 0,
        }
    }

    /// Whether the header names the same key material as `frame`.
    pub fn matches(&self, frame: &KeyFrame) -> bool {
        self.r == frame.r && self.s == frame.s && self.nonce == frame.nonce && self.indices == frame.indices
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ContainerError> {
        let k = u16::try_from(self.indices.len()).map_err(|_| ContainerError::TooLarge("k"))?;
        let mut out = Vec::with_capacity(35 + 2 * self.indices.len() + 2 * self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(CONTAINER_VERSION);
        out.extend_from_slice(&self.profile_fingerprint.to_le_bytes());
        out.extend_from_slice(&self.nonce.to_le_bytes());
        out.extend_from_slice(&self.r.to_le_bytes());
        out.extend_from_slice(&self.s.to_le_bytes());
        out.extend_from_slice(&k.to_le_bytes());
        for i in &self.indices {
            out.extend_from_slice(&i.to_le_bytes());
        }
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        for s in &self.payload {
            out.extend_from_slice(&s.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContainerError> {
        let mut rd = Reader { buf: bytes };
        if rd.take(4, "magic")? != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let version = rd.take(1, "version")?[0];
        if version != CONTAINER_VERSION {
            return Err(ContainerError::UnsupportedVersion(version));
        }
        let profile_fingerprint = rd.u64("profile fingerprint")?;
        let nonce = rd.u64("nonce")?;
        let r = rd.u16("r")?;
        let s = rd.u16("s")?;
        let k = rd.u16("k")?;
        let indices = (0..k).map(|_| rd.u16("indices")).collect::<Result<_, _>>()?;
        let len = rd.u64("payload length")?;
        if len > (rd.buf.len() / 2) as u64 {
            return Err(ContainerError::Truncated("payload"));
        }
        let payload = (0..len).map(|_| rd.u16("payload")).collect::<Result<_, _>>()?;
        if !rd.buf.is_empty() {
            return Err(ContainerError::TrailingBytes(rd.buf.len()));
        }
        Ok(Container {
            profile_fingerprint,
            nonce,
            r,
            s,
            indices,
            payload,
        })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], ContainerError> {
        if self.buf.len() < n {
            return Err(ContainerError::Truncated(what));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, ContainerError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, ContainerError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Space-separated decimal symbols, e.g. `19 15 1 3`.
pub fn format_symbols(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Accepts any whitespace between tokens, including line breaks.
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>, ContainerError> {
    text.split_whitespace()
        .map(|tok| tok.parse().map_err(|_| ContainerError::BadSymbol(tok.to_string())))
        .collect()
}
