use std::collections::HashMap;

use crate::quasigroup::Symbol;

/// Character coding between text and symbols `1..=size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    id: &'static str,
    char_to_symbol: HashMap<char, Symbol>,
    symbol_to_char: Vec<char>,
}

const LATIN27: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ ";
// latin27 followed by the extension block, symbols 28..=41
const LATIN41: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ .,0123456789'\n";

impl Alphabet {
    fn from_chars(id: &'static str, chars: &str) -> Self {
        let symbol_to_char: Vec<char> = chars.chars().collect();
        let char_to_symbol = symbol_to_char
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, (i + 1) as Symbol))
            .collect();
        Alphabet {
            id,
            char_to_symbol,
            symbol_to_char,
        }
    }

    /// `A..Z` → 1..26, space → 27.
    pub fn latin27() -> Self {
        Self::from_chars("latin27", LATIN27)
    }

    /// latin27 plus `.` `,` `0`–`9` `'` and newline → 28..41.
    pub fn latin41() -> Self {
        Self::from_chars("latin41", LATIN41)
    }

    pub fn by_id(id: &str) -> Option<Self> {
        match id {
            "latin27" => Some(Self::latin27()),
            "latin41" => Some(Self::latin41()),
            _ => None,
        }
    }

    pub fn id(&self) -> &str {
        self.id
    }

    pub fn size(&self) -> usize {
        self.symbol_to_char.len()
    }

    /// ASCII lowercase becomes uppercase; whitespace the alphabet cannot
    /// represent becomes a space. Anything else passes through unchanged.
    pub fn fold_char(&self, c: char) -> char {
        let c = c.to_ascii_uppercase();
        if c.is_whitespace() && !self.char_to_symbol.contains_key(&c) {
            ' '
        } else {
            c
        }
    }

    pub fn fold(&self, text: &str) -> String {
        text.chars().map(|c| self.fold_char(c)).collect()
    }

    pub fn symbol(&self, c: char) -> Option<Symbol> {
        self.char_to_symbol.get(&self.fold_char(c)).copied()
    }

    pub fn char_of(&self, s: Symbol) -> Option<char> {
        (s as usize)
            .checked_sub(1)
            .and_then(|i| self.symbol_to_char.get(i))
            .copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mappings_are_mutual_inverses() {
        for a in [Alphabet::latin27(), Alphabet::latin41()] {
            for s in 1..=a.size() as Symbol {
                assert_eq!(a.symbol(a.char_of(s).unwrap()), Some(s));
            }
            assert_eq!(a.char_of(0), None);
            assert_eq!(a.char_of(a.size() as Symbol + 1), None);
        }
        assert_eq!(Alphabet::latin27().size(), 27);
        assert_eq!(Alphabet::latin41().size(), 41);
    }

    #[test]
    fn extension_block_layout() {
        let a = Alphabet::latin41();
        assert_eq!(a.symbol('.'), Some(28));
        assert_eq!(a.symbol(','), Some(29));
        assert_eq!(a.symbol('0'), Some(30));
        assert_eq!(a.symbol('9'), Some(39));
        assert_eq!(a.symbol('\''), Some(40));
        assert_eq!(a.symbol('\n'), Some(41));
    }

    #[test]
    fn folding() {
        let a = Alphabet::latin27();
        assert_eq!(a.fold("ab\tc\nd"), "AB C D");
        assert_eq!(Alphabet::latin41().fold("a\tb\n"), "A B\n");
        assert_eq!(a.symbol('é'), None);
    }
}
