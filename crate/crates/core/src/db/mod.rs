//! Indexed quasigroup provider.
//!
//! Instead of storing every isotope of a base square, the isotope for
//! `(order, index, nonce)` is regenerated on demand: three permutations are
//! drawn from seeds derived from the profile's `db_seed` and applied to the
//! cyclic square of that order.

pub mod profile;
pub mod seed;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

pub use profile::{profile_fingerprint, NetworkProfile, ProfileError};
pub use seed::{derive_seed, permutation_from_seed, SplitMix64};

use crate::quasigroup::{LatinSquare, QuasigroupError, Symbol, MAX_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DbError {
    #[error("order {0} is not supported (need 2..={MAX_ORDER})")]
    InvalidOrder(usize),
    #[error("index {index} is outside 1..={max}")]
    IndexOutOfRange { index: u64, max: u16 },
    #[error(transparent)]
    Quasigroup(#[from] QuasigroupError),
}

/// The cyclic square `L(a, b) = ((a + b - 2) mod n) + 1`.
pub fn base_square(n: usize) -> Result<LatinSquare, QuasigroupError> {
    if n == 0 || n > MAX_ORDER {
        return Err(QuasigroupError::InvalidOrder(n));
    }
    let mut cells = Vec::with_capacity(n * n);
    for a in 0..n {
        cells.extend((0..n).map(|b| ((a + b) % n + 1) as Symbol));
    }
    Ok(LatinSquare::from_cells_unchecked(n, cells))
}

/// Isotope number `index` of the order-`order` base square at time `nonce`.
pub fn get_quasigroup(
    profile: &NetworkProfile,
    order: usize,
    index: u64,
    nonce: u64,
) -> Result<LatinSquare, DbError> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(DbError::InvalidOrder(order));
    }
    if index == 0 || index > profile.index_max as u64 {
        return Err(DbError::IndexOutOfRange {
            index,
            max: profile.index_max,
        });
    }
    let perm = |tag: u64| {
        let seed = derive_seed(&[profile.db_seed, order as u64, index, nonce, tag]);
        permutation_from_seed(seed, order)
    };
    let (alpha, beta, gamma) = (perm(1)?, perm(2)?, perm(3)?);
    Ok(base_square(order)?.apply_isotopy(&alpha, &beta, &gamma)?)
}

/// A generated square together with its left-division table.
#[derive(Debug)]
pub struct IndexedSquare {
    pub square: LatinSquare,
    pub left_inverse: LatinSquare,
}

type CacheKey = (usize, u64, u64);

/// Memoizes [`get_quasigroup`] per `(order, index, nonce)` for one profile.
/// Lookups take a shared lock; only misses take the write lock.
#[derive(Debug)]
pub struct QuasigroupCache {
    profile: NetworkProfile,
    entries: RwLock<HashMap<CacheKey, Arc<IndexedSquare>>>,
}

impl QuasigroupCache {
    pub fn new(profile: NetworkProfile) -> Self {
        QuasigroupCache {
            profile,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn profile(&self) -> &NetworkProfile {
        &self.profile
    }

    pub fn get(&self, order: usize, index: u64, nonce: u64) -> Result<Arc<IndexedSquare>, DbError> {
        let key = (order, index, nonce);
        if let Some(hit) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let square = get_quasigroup(&self.profile, order, index, nonce)?;
        let entry = Arc::new(IndexedSquare {
            left_inverse: square.left_inverse(),
            square,
        });
        let mut map = self.entries.write().expect("cache lock");
        Ok(Arc::clone(map.entry(key).or_insert(entry)))
    }

    /// Drops every cached square, e.g. once a nonce expires.
    pub fn clear(&self) {
        self.entries.write().expect("cache lock").clear();
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn to_rows(l: &LatinSquare) -> Vec<Vec<usize>> {
        l.rows().map(|r| r.iter().map(|&v| v as usize).collect()).collect()
    }

    #[test]
    fn base_square_closed_form() {
        assert_eq!(to_rows(&base_square(1).unwrap()), vec![vec![1]]);
        assert_eq!(
            to_rows(&base_square(3).unwrap()),
            vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]
        );
        assert!(base_square(0).is_err());
        for n in 1..=256 {
            assert!(LatinSquare::from_rows(&to_rows(&base_square(n).unwrap())).is_ok());
        }
    }

    #[test]
    fn get_quasigroup_deterministic_and_checked() {
        let p = NetworkProfile::default();
        assert_eq!(
            get_quasigroup(&p, 16, 5, 77).unwrap(),
            get_quasigroup(&p, 16, 5, 77).unwrap()
        );
        assert_eq!(get_quasigroup(&p, 1, 1, 0), Err(DbError::InvalidOrder(1)));
        assert_eq!(
            get_quasigroup(&p, 8, 0, 0),
            Err(DbError::IndexOutOfRange { index: 0, max: 1000 })
        );
        assert!(get_quasigroup(&p, 8, 1001, 0).is_err());
        assert!(get_quasigroup(&p, 8, 1000, 0).is_ok());
    }

    #[test]
    fn nonce_and_seed_change_the_square() {
        let p = NetworkProfile::default();
        let other = NetworkProfile { db_seed: 1, ..p.clone() };
        let a = get_quasigroup(&p, 32, 3, 1500).unwrap();
        assert_ne!(a, get_quasigroup(&p, 32, 3, 1501).unwrap());
        assert_ne!(a, get_quasigroup(&other, 32, 3, 1500).unwrap());
    }

    #[test]
    fn distinct_indices_give_distinct_tables() {
        let p = NetworkProfile::default();
        let mut rng = SplitMix64::new(2024);
        let mut differing = 0;
        for _ in 0..100 {
            let i = rng.in_range(1, 1000);
            let mut j = rng.in_range(1, 1000);
            while j == i {
                j = rng.in_range(1, 1000);
            }
            let nonce = rng.in_range(1001, 9999);
            if get_quasigroup(&p, 16, i, nonce).unwrap() != get_quasigroup(&p, 16, j, nonce).unwrap() {
                differing += 1;
            }
        }
        assert!(differing >= 99, "{differing}");
    }

    #[test]
    fn repeated_indices_are_allowed() {
        let p = NetworkProfile::default();
        let squares: Vec<_> = (0..6).map(|_| get_quasigroup(&p, 12, 1, 5).unwrap()).collect();
        assert!(squares.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn cache_matches_direct_generation() {
        let p = NetworkProfile::default();
        let cache = QuasigroupCache::new(p.clone());
        let hit = cache.get(20, 9, 4321).unwrap();
        let again = cache.get(20, 9, 4321).unwrap();
        assert!(Arc::ptr_eq(&hit, &again));
        assert_eq!(hit.square, get_quasigroup(&p, 20, 9, 4321).unwrap());
        assert_eq!(hit.left_inverse, hit.square.left_inverse());
        assert_eq!(cache.len(), 1);
        cache.clear();
        assert!(cache.is_empty());
    }

    #[test]
    fn cache_is_shareable_across_threads() {
        let cache = Arc::new(QuasigroupCache::new(NetworkProfile::default()));
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let cache = Arc::clone(&cache);
                std::thread::spawn(move || cache.get(10, 1 + t % 2, 7).unwrap().square.order())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), 10);
        }
        assert_eq!(cache.len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn generated_squares_are_latin(order in 2usize..=128, index in 1u64..=1000, nonce: u64) {
            let l = get_quasigroup(&NetworkProfile::default(), order, index, nonce).unwrap();
            prop_assert!(LatinSquare::from_rows(&to_rows(&l)).is_ok());
            prop_assert!(LatinSquare::from_rows(&to_rows(&l.left_inverse())).is_ok());
        }
    }
}
