//! Multi-level indexed quasigroup encryptor (MLQE).
//!
//! Messages are scrambled by chaining quasigroup string transformations over
//! several Latin squares. The squares are not transmitted: both ends select
//! them from a shared, deterministically generated isotope database using
//! the orders and index numbers in a key frame issued by a trusted
//! authority, and derive the per-level leaders ("hidden key") locally.
//!
//! - [`quasigroup`]: Latin squares, multiplication, left division, isotopy
//! - [`db`]: seeded isotope provider and network profiles
//! - [`keying`]: frame generation, hidden-key derivation, frame validity
//! - [`codec`]: single- and multi-level transformations, text mapping, containers
//! - [`analysis`]: autocorrelation, entropy, histogram, built-in cases
//! - [`sim`]: trusted-authority / node key-lifecycle simulation
//!
//! ```
//! use mlqe::codec::{self, Alphabet};
//! use mlqe::db::NetworkProfile;
//! use mlqe::keying;
//!
//! let profile = NetworkProfile::default();
//! let frame = keying::generate_frame(&profile, 7).unwrap();
//! let key = keying::derive_hidden_key(&profile, &frame).unwrap();
//! let alphabet = Alphabet::latin27();
//!
//! let plain = codec::text_to_symbols("HELLO WORLD", &alphabet).unwrap();
//! let cipher = codec::encrypt(&profile, &frame, &key, &plain).unwrap();
//! let back = codec::decrypt(&profile, &frame, &key, &cipher).unwrap();
//! assert_eq!(codec::symbols_to_text(&back, &alphabet).unwrap(), "HELLO WORLD");
//! ```
//!
//! None of this is a vetted cipher; it is a research toolkit.

pub mod analysis;
pub mod codec;
pub mod db;
pub mod keying;
pub mod quasigroup;
pub mod sim;

pub use quasigroup::{LatinSquare, Permutation, QuasigroupError, Symbol};
