//! Latin-square algebra.
//!
//! A [`LatinSquare`] is the multiplication table of a finite quasigroup over
//! the symbols `1..=n`. Every public interface speaks 1-indexed symbols; the
//! table is stored row-major and 0-indexed internally.

use std::fmt;

use thiserror::Error;

/// A quasigroup element. Orders are capped at [`MAX_ORDER`] so a symbol always
/// fits in 16 bits.
pub type Symbol = u16;

/// Largest supported quasigroup order.
pub const MAX_ORDER: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuasigroupError {
    #[error("table is not square")]
    NotSquare,
    #[error("order {0} is outside 1..={MAX_ORDER}")]
    InvalidOrder(usize),
    #[error("entry at row {row}, column {col} is outside 1..=n")]
    EntryOutOfRange { row: usize, col: usize },
    #[error("row {0} repeats a symbol")]
    DuplicateInRow(usize),
    #[error("column {0} repeats a symbol")]
    DuplicateInColumn(usize),
    #[error("symbol {symbol} is outside 1..={order}")]
    SymbolOutOfRange { symbol: usize, order: usize },
    #[error("permutation size {found} does not match order {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),
}

/// A bijection on `1..=n`, stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<Symbol>,
}

impl Permutation {
    pub fn identity(n: usize) -> Result<Self, QuasigroupError> {
        check_order(n)?;
        Ok(Permutation {
            map: (1..=n).map(|x| x as Symbol).collect(),
        })
    }

    /// Builds a permutation from its 1-indexed image list, rejecting anything
    /// that is not a bijection on `1..=len`.
    pub fn from_map(map: Vec<Symbol>) -> Result<Self, QuasigroupError> {
        let n = map.len();
        check_order(n)?;
        let mut seen = vec![false; n];
        for &v in &map {
            let v = v as usize;
            if v == 0 || v > n || seen[v - 1] {
                return Err(QuasigroupError::NotAPermutation(n));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { map })
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    /// Image of `x`. Panics if `x` is outside `1..=size`.
    #[inline]
    pub fn apply(&self, x: Symbol) -> Symbol {
        self.map[x as usize - 1]
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.map
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Permutation").field(&self.map).finish()
    }
}

fn check_order(n: usize) -> Result<(), QuasigroupError> {
    if n == 0 || n > MAX_ORDER {
        Err(QuasigroupError::InvalidOrder(n))
    } else {
        Ok(())
    }
}

/// A validated order-n Latin square. Immutable once built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    order: usize,
    cells: Vec<Symbol>,
}

impl LatinSquare {
    /// Validates a table given as rows of 1-indexed symbols.
    ///
    /// Errors name the first offending row or column (1-indexed). Range
    /// checks run over the whole table before any permutation checks, and
    /// rows are checked before columns.
    pub fn from_rows<R: AsRef<[usize]>>(rows: &[R]) -> Result<Self, QuasigroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(QuasigroupError::InvalidOrder(0));
        }
        if rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(QuasigroupError::NotSquare);
        }
        check_order(n)?;
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.as_ref().iter().enumerate() {
                if v == 0 || v > n {
                    return Err(QuasigroupError::EntryOutOfRange { row: i + 1, col: j + 1 });
                }
                cells.push(v as Symbol);
            }
        }
        Self::from_cells(n, cells)
    }

    /// Validates a row-major cell buffer whose entries are already known to
    /// lie in `1..=order`.
    fn from_cells(order: usize, cells: Vec<Symbol>) -> Result<Self, QuasigroupError> {
        let mut seen = vec![0usize; order];
        for row in 0..order {
            for col in 0..order {
                let v = cells[row * order + col] as usize - 1;
                if seen[v] == row + 1 {
                    return Err(QuasigroupError::DuplicateInRow(row + 1));
                }
                seen[v] = row + 1;
            }
        }
        seen.iter_mut().for_each(|s| *s = 0);
        for col in 0..order {
            for row in 0..order {
                let v = cells[row * order + col] as usize - 1;
                if seen[v] == col + 1 {
                    return Err(QuasigroupError::DuplicateInColumn(col + 1));
                }
                seen[v] = col + 1;
            }
        }
        Ok(LatinSquare { order, cells })
    }

    /// Trusted constructor for tables that are Latin by construction.
    pub(crate) fn from_cells_unchecked(order: usize, cells: Vec<Symbol>) -> Self {
        debug_assert_eq!(cells.len(), order * order);
        debug_assert!(Self::from_cells(order, cells.clone()).is_ok());
        LatinSquare { order, cells }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Row `a` (1-indexed) as a slice of symbols.
    pub fn row(&self, a: Symbol) -> &[Symbol] {
        let start = (a as usize - 1) * self.order;
        &self.cells[start..start + self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Symbol]> {
        self.cells.chunks_exact(self.order)
    }

    fn check_symbol(&self, x: Symbol) -> Result<(), QuasigroupError> {
        if x == 0 || x as usize > self.order {
            Err(QuasigroupError::SymbolOutOfRange {
                symbol: x as usize,
                order: self.order,
            })
        } else {
            Ok(())
        }
    }

    /// `a * b`.
    pub fn multiply(&self, a: Symbol, b: Symbol) -> Result<Symbol, QuasigroupError> {
        self.check_symbol(a)?;
        self.check_symbol(b)?;
        Ok(self.mul(a, b))
    }

    /// Unchecked `a * b` for hot loops whose operands are already validated.
    #[inline]
    pub(crate) fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        self.cells[(a as usize - 1) * self.order + (b as usize - 1)]
    }

    /// `a \ b`: the unique `x` with `a * x = b`, found by scanning row `a`.
    pub fn left_divide(&self, a: Symbol, b: Symbol) -> Result<Symbol, QuasigroupError> {
        self.check_symbol(a)?;
        self.check_symbol(b)?;
        let col = self
            .row(a)
            .iter()
            .position(|&v| v == b)
            .expect("Latin square rows are permutations");
        Ok((col + 1) as Symbol)
    }

    /// The left-division parastrophe: `inv(a, b) = a \ b`.
    ///
    /// Each row of the result is the inverse permutation of the matching row
    /// of `self`, so the whole table costs one pass over the cells.
    pub fn left_inverse(&self) -> LatinSquare {
        let n = self.order;
        let mut cells = vec![0 as Symbol; n * n];
        for (r, row) in self.rows().enumerate() {
            let out = &mut cells[r * n..(r + 1) * n];
            for (c, &v) in row.iter().enumerate() {
                out[v as usize - 1] = (c + 1) as Symbol;
            }
        }
        LatinSquare::from_cells_unchecked(n, cells)
    }

    /// Isotope `L'(x, y) = gamma(L(alpha(x), beta(y)))`.
    pub fn apply_isotopy(
        &self,
        alpha: &Permutation,
        beta: &Permutation,
        gamma: &Permutation,
    ) -> Result<LatinSquare, QuasigroupError> {
        let n = self.order;
        for p in [alpha, beta, gamma] {
            if p.size() != n {
                return Err(QuasigroupError::SizeMismatch {
                    expected: n,
                    found: p.size(),
                });
            }
        }
        let mut cells = Vec::with_capacity(n * n);
        for x in 1..=n as Symbol {
            let src = self.row(alpha.apply(x));
            cells.extend((1..=n as Symbol).map(|y| gamma.apply(src[beta.apply(y) as usize - 1])));
        }
        Ok(LatinSquare::from_cells_unchecked(n, cells))
    }

    /// Text dump: `order n` followed by `n` lines of space-separated symbols.
    pub fn dump(&self) -> String {
        let mut out = format!("order {}\n", self.order);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn order4() -> LatinSquare {
        LatinSquare::from_rows(&[[2, 3, 1, 4], [4, 1, 3, 2], [3, 4, 2, 1], [1, 2, 4, 3]]).unwrap()
    }

    fn cyclic(n: usize) -> LatinSquare {
        let rows: Vec<Vec<usize>> = (1..=n)
            .map(|a| (1..=n).map(|b| (a + b - 2) % n + 1).collect())
            .collect();
        LatinSquare::from_rows(&rows).unwrap()
    }

    // brute force: search the whole table for a cell matching (a, ?) = b
    fn scan_oracle(l: &LatinSquare, a: Symbol, b: Symbol) -> Symbol {
        let n = l.order();
        let rows: Vec<&[Symbol]> = l.rows().collect();
        let mut found = None;
        for x in 1..=n {
            if rows[a as usize - 1][x - 1] == b {
                assert!(found.is_none());
                found = Some(x as Symbol);
            }
        }
        found.unwrap()
    }

    #[test]
    fn order4_table_validates() {
        assert_eq!(order4().order(), 4);
    }

    #[test]
    fn trivial_order_one() {
        let l = LatinSquare::from_rows(&[[1]]).unwrap();
        assert_eq!(l.multiply(1, 1), Ok(1));
        assert_eq!(l.left_inverse(), l);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            LatinSquare::from_rows(&[[1, 2], [1, 2]]),
            Err(QuasigroupError::DuplicateInColumn(1))
        );
        assert_eq!(
            LatinSquare::from_rows(&[[1, 1], [2, 2]]),
            Err(QuasigroupError::DuplicateInRow(1))
        );
        assert_eq!(
            LatinSquare::from_rows(&[vec![1, 2], vec![2]]),
            Err(QuasigroupError::NotSquare)
        );
        assert_eq!(
            LatinSquare::from_rows(&[[1, 2], [3, 1]]),
            Err(QuasigroupError::EntryOutOfRange { row: 2, col: 1 })
        );
        assert_eq!(
            LatinSquare::from_rows(&[[0]]),
            Err(QuasigroupError::EntryOutOfRange { row: 1, col: 1 })
        );
        let empty: [[usize; 0]; 0] = [];
        assert_eq!(LatinSquare::from_rows(&empty), Err(QuasigroupError::InvalidOrder(0)));
    }

    #[test]
    fn multiply_matches_order4_table() {
        let l = order4();
        assert_eq!(l.multiply(2, 3), Ok(3));
        assert_eq!(l.multiply(1, 1), Ok(2));
        assert_eq!(
            l.multiply(5, 1),
            Err(QuasigroupError::SymbolOutOfRange { symbol: 5, order: 4 })
        );
        assert!(l.multiply(1, 0).is_err());
    }

    #[test]
    fn left_divide_order4() {
        let l = order4();
        assert_eq!(l.left_divide(2, 3), Ok(3));
        assert_eq!(l.left_divide(1, 2), Ok(1));
        assert!(l.left_divide(0, 2).is_err());
    }

    #[test]
    fn left_inverse_order4_rows() {
        let inv = order4().left_inverse();
        assert_eq!(inv.row(1), &[3, 1, 2, 4]);
        assert_eq!(inv.row(4), &[1, 2, 4, 3]);
        assert!(LatinSquare::from_rows(
            &inv.rows().map(|r| r.iter().map(|&v| v as usize).collect::<Vec<_>>()).collect::<Vec<_>>()
        )
        .is_ok());
    }

    #[test]
    fn isotopy_identity_and_row_swap() {
        let l = cyclic(3);
        let id = Permutation::identity(3).unwrap();
        assert_eq!(l.apply_isotopy(&id, &id, &id).unwrap(), l);

        let alpha = Permutation::from_map(vec![2, 1, 3]).unwrap();
        let iso = l.apply_isotopy(&alpha, &id, &id).unwrap();
        assert_eq!(iso.row(1), l.row(2));
        assert_eq!(iso.row(2), l.row(1));
        assert_eq!(iso.row(3), l.row(3));

        let small = Permutation::identity(2).unwrap();
        assert_eq!(
            l.apply_isotopy(&small, &id, &id),
            Err(QuasigroupError::SizeMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn permutation_rejects_non_bijection() {
        assert!(Permutation::from_map(vec![1, 1]).is_err());
        assert!(Permutation::from_map(vec![0, 1]).is_err());
        assert!(Permutation::from_map(vec![]).is_err());
    }

    #[test]
    fn dump_format() {
        assert_eq!(order4().dump(), "order 4\n2 3 1 4\n4 1 3 2\n3 4 2 1\n1 2 4 3\n");
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((1..=n as Symbol).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|m| Permutation::from_map(m).unwrap())
    }

    fn arb_isotope() -> impl Strategy<Value = LatinSquare> {
        (1usize..=64).prop_flat_map(|n| {
            (arb_perm(n), arb_perm(n), arb_perm(n))
                .prop_map(move |(a, b, c)| cyclic(n).apply_isotopy(&a, &b, &c).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn isotopes_stay_latin(l in arb_isotope()) {
            let rows: Vec<Vec<usize>> =
                l.rows().map(|r| r.iter().map(|&v| v as usize).collect()).collect();
            prop_assert!(LatinSquare::from_rows(&rows).is_ok());
        }

        #[test]
        fn division_laws_hold(l in arb_isotope()) {
            let n = l.order() as Symbol;
            let inv = l.left_inverse();
            for a in 1..=n {
                for b in 1..=n {
                    let ab = l.multiply(a, b).unwrap();
                    prop_assert_eq!(l.left_divide(a, ab).unwrap(), b);
                    let q = l.left_divide(a, b).unwrap();
                    prop_assert_eq!(l.multiply(a, q).unwrap(), b);
                    prop_assert_eq!(q, scan_oracle(&l, a, b));
                    prop_assert_eq!(inv.multiply(a, b).unwrap(), q);
                }
            }
            prop_assert_eq!(inv.left_inverse(), l);
        }
    }
}
