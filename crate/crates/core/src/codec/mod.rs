//! Quasigroup string transformations.
//!
//! A single level maps `x_1..x_n` under leader `a` to `y_1 = a * x_1`,
//! `y_i = y_{i-1} * x_i`, and is undone by `x_1 = a \ y_1`,
//! `x_i = y_{i-1} \ y_i`. The multi-level cipher chains `k` such levels, the
//! first `m` over order-`r` squares and the rest over order-`s` squares, and
//! decrypts by running the levels backwards.

pub mod alphabet;
pub mod container;

use std::sync::Arc;

use thiserror::Error;

pub use alphabet::Alphabet;
pub use container::{format_symbols, parse_symbols, Container, ContainerError};

use crate::db::{DbError, IndexedSquare, NetworkProfile, QuasigroupCache};
use crate::keying::{level_orders, HiddenKey, KeyFrame};
use crate::quasigroup::{LatinSquare, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("leader {leader} is outside 1..={order}")]
    LeaderOutOfRange { leader: Symbol, order: usize },
    #[error("symbol at position {0} is outside the stream alphabet")]
    SymbolOutOfRange(usize),
    #[error("plaintext symbol at position {position} exceeds r = {r}")]
    PlaintextSymbolTooLarge { position: usize, r: u16 },
    #[error("ciphertext symbol at position {position} exceeds s = {s}")]
    CiphertextSymbolTooLarge { position: usize, s: u16 },
    #[error("hidden key does not match the key frame")]
    KeyMismatch,
    #[error("invalid key frame: {0}")]
    FrameInvalid(String),
    #[error("character {ch:?} at position {position} has no symbol")]
    UnmappableCharacter { position: usize, ch: char },
    #[error(transparent)]
    Db(#[from] DbError),
}

/// Symbols over `1..=order`. Positions in errors are 1-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolStream {
    order: u16,
    symbols: Vec<Symbol>,
}

impl SymbolStream {
    pub fn new(order: u16, symbols: Vec<Symbol>) -> Result<Self, CodecError> {
        if let Some(pos) = symbols.iter().position(|&s| s == 0 || s > order) {
            return Err(CodecError::SymbolOutOfRange(pos + 1));
        }
        Ok(SymbolStream { order, symbols })
    }

    pub fn empty(order: u16) -> Self {
        SymbolStream {
            order,
            symbols: Vec::new(),
        }
    }

    pub fn order(&self) -> u16 {
        self.order
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

fn check_level_inputs(l: &LatinSquare, leader: Symbol, input: &[Symbol]) -> Result<(), CodecError> {
    let n = l.order();
    if leader == 0 || leader as usize > n {
        return Err(CodecError::LeaderOutOfRange { leader, order: n });
    }
    if let Some(pos) = input.iter().position(|&s| s == 0 || s as usize > n) {
        return Err(CodecError::SymbolOutOfRange(pos + 1));
    }
    Ok(())
}

// symbols must already be validated against `l`
fn chain_multiply(l: &LatinSquare, leader: Symbol, symbols: &mut [Symbol]) {
    let mut prev = leader;
    for x in symbols.iter_mut() {
        prev = l.mul(prev, *x);
        *x = prev;
    }
}

// `inv` is the left-division table of the square that produced `symbols`
fn chain_divide(inv: &LatinSquare, leader: Symbol, symbols: &mut [Symbol]) {
    let mut prev = leader;
    for y in symbols.iter_mut() {
        let cipher = *y;
        *y = inv.mul(prev, cipher);
        prev = cipher;
    }
}

/// One forward level under `l` with the given leader.
pub fn encrypt_level(
    l: &LatinSquare,
    leader: Symbol,
    input: &SymbolStream,
) -> Result<SymbolStream, CodecError> {
    check_level_inputs(l, leader, &input.symbols)?;
    let mut symbols = input.symbols.clone();
    chain_multiply(l, leader, &mut symbols);
    Ok(SymbolStream {
        order: l.order() as u16,
        symbols,
    })
}

/// Inverse of [`encrypt_level`]; materializes the left-inverse table once.
pub fn decrypt_level(
    l: &LatinSquare,
    leader: Symbol,
    cipher: &SymbolStream,
) -> Result<SymbolStream, CodecError> {
    check_level_inputs(l, leader, &cipher.symbols)?;
    let inv = l.left_inverse();
    let mut symbols = cipher.symbols.clone();
    chain_divide(&inv, leader, &mut symbols);
    Ok(SymbolStream {
        order: l.order() as u16,
        symbols,
    })
}

/// The per-frame schedule: one square (with its left inverse) and one leader
/// per level. Building it costs `k` isotope generations; encrypting and
/// decrypting afterwards is a table lookup per symbol per level.
#[derive(Debug, Clone)]
pub struct Cipher {
    r: u16,
    s: u16,
    levels: Vec<(Arc<IndexedSquare>, Symbol)>,
}

impl Cipher {
    pub fn new(profile: &NetworkProfile, frame: &KeyFrame, key: &HiddenKey) -> Result<Self, CodecError> {
        Self::build(frame, key, profile, |order, index| {
            let square = crate::db::get_quasigroup(profile, order, index, frame.nonce)?;
            Ok(Arc::new(IndexedSquare {
                left_inverse: square.left_inverse(),
                square,
            }))
        })
    }

    /// Same as [`Cipher::new`] but pulls squares through a shared cache.
    pub fn with_cache(cache: &QuasigroupCache, frame: &KeyFrame, key: &HiddenKey) -> Result<Self, CodecError> {
        Self::build(frame, key, cache.profile(), |order, index| {
            cache.get(order, index, frame.nonce)
        })
    }

    fn build<F>(frame: &KeyFrame, key: &HiddenKey, profile: &NetworkProfile, mut fetch: F) -> Result<Self, CodecError>
    where
        F: FnMut(usize, u64) -> Result<Arc<IndexedSquare>, DbError>,
    {
        frame.check_structure(profile).map_err(CodecError::FrameInvalid)?;
        let orders = level_orders(profile, frame);
        if key.level_orders != orders
            || key.multipliers.len() != orders.len()
            || key
                .multipliers
                .iter()
                .zip(&orders)
                .any(|(&q, &n)| q == 0 || q > n)
        {
            return Err(CodecError::KeyMismatch);
        }
        let levels = frame
            .indices
            .iter()
            .zip(&orders)
            .zip(&key.multipliers)
            .map(|((&index, &order), &leader)| Ok((fetch(order as usize, index as u64)?, leader)))
            .collect::<Result<Vec<_>, DbError>>()?;
        Ok(Cipher {
            r: frame.r,
            s: frame.s,
            levels,
        })
    }

    pub fn r(&self) -> u16 {
        self.r
    }

    pub fn s(&self) -> u16 {
        self.s
    }

    /// Runs every level in order. Plaintext symbols must lie in `1..=r`; the
    /// output is over `1..=s`.
    pub fn encrypt(&self, plaintext: &SymbolStream) -> Result<SymbolStream, CodecError> {
        if let Some(pos) = plaintext.symbols.iter().position(|&x| x > self.r) {
            return Err(CodecError::PlaintextSymbolTooLarge {
                position: pos + 1,
                r: self.r,
            });
        }
        let mut symbols = plaintext.symbols.clone();
        for (level, leader) in &self.levels {
            chain_multiply(&level.square, *leader, &mut symbols);
        }
        Ok(SymbolStream {
            order: self.s,
            symbols,
        })
    }

    /// Runs the levels backwards with their left-division tables.
    pub fn decrypt(&self, ciphertext: &SymbolStream) -> Result<SymbolStream, CodecError> {
        if let Some(pos) = ciphertext.symbols.iter().position(|&x| x > self.s) {
            return Err(CodecError::CiphertextSymbolTooLarge {
                position: pos + 1,
                s: self.s,
            });
        }
        let mut symbols = ciphertext.symbols.clone();
        for (level, leader) in self.levels.iter().rev() {
            if symbols.iter().any(|&x| x as usize > level.square.order()) {
                // an order-s level handed back symbols above r: not our ciphertext
                return Err(CodecError::KeyMismatch);
            }
            chain_divide(&level.left_inverse, *leader, &mut symbols);
        }
        Ok(SymbolStream {
            order: self.r,
            symbols,
        })
    }
}

pub fn encrypt(
    profile: &NetworkProfile,
    frame: &KeyFrame,
    key: &HiddenKey,
    plaintext: &SymbolStream,
) -> Result<SymbolStream, CodecError> {
    Cipher::new(profile, frame, key)?.encrypt(plaintext)
}

pub fn decrypt(
    profile: &NetworkProfile,
    frame: &KeyFrame,
    key: &HiddenKey,
    ciphertext: &SymbolStream,
) -> Result<SymbolStream, CodecError> {
    Cipher::new(profile, frame, key)?.decrypt(ciphertext)
}

pub fn text_to_symbols(text: &str, alphabet: &Alphabet) -> Result<SymbolStream, CodecError> {
    let symbols = text
        .chars()
        .enumerate()
        .map(|(i, ch)| {
            alphabet
                .symbol(ch)
                .ok_or(CodecError::UnmappableCharacter { position: i + 1, ch })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SymbolStream {
        order: alphabet.size() as u16,
        symbols,
    })
}

pub fn symbols_to_text(stream: &SymbolStream, alphabet: &Alphabet) -> Result<String, CodecError> {
    stream
        .symbols
        .iter()
        .enumerate()
        .map(|(i, &s)| alphabet.char_of(s).ok_or(CodecError::SymbolOutOfRange(i + 1)))
        .collect()
}
