//! Fixed-width bit vectors identifying partial assemblies.
//!
//! Bit `j` of a [`StateKey`] is set iff connection `j` is still present. The
//! fully assembled structure is the all-ones key and the fully disassembled
//! one is all-zeros. Keys are plain `Copy` values so they can be hashed and
//! stored in large tables without indirection.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const WORDS: usize = 4;

/// Largest number of connections a key can represent.
pub const MAX_WIDTH: usize = WORDS * 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateKey {
    words: [u64; WORDS],
    width: u16,
}

impl StateKey {
    /// All-zeros key of the given width (fully disassembled).
    pub fn empty(width: usize) -> Self {
        assert!(
            width <= MAX_WIDTH,
            "state width {width} exceeds {MAX_WIDTH}"
        );
        StateKey {
            words: [0; WORDS],
            width: width as u16,
        }
    }

    /// All-ones key of the given width (fully assembled).
    pub fn full(width: usize) -> Self {
        let mut key = Self::empty(width);
        let mut remaining = width;
        for w in key.words.iter_mut() {
            if remaining == 0 {
                break;
            }
            let take = remaining.min(64);
            *w = if take == 64 {
                u64::MAX
            } else {
                (1u64 << take) - 1
            };
            remaining -= take;
        }
        key
    }

    pub fn from_indices(width: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut key = Self::empty(width);
        for i in indices {
            key.set(i);
        }
        key
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        index < self.width() && self.words[index / 64] & (1 << (index % 64)) != 0
    }

    #[inline]
    pub fn set(&mut self, index: usize) {
        assert!(
            index < self.width(),
            "bit {index} out of width {}",
            self.width
        );
        self.words[index / 64] |= 1 << (index % 64);
    }

    #[inline]
    pub fn clear(&mut self, index: usize) {
        assert!(
            index < self.width(),
            "bit {index} out of width {}",
            self.width
        );
        self.words[index / 64] &= !(1 << (index % 64));
    }

    /// Copy of `self` with bit `index` cleared.
    #[inline]
    pub fn without(mut self, index: usize) -> Self {
        self.clear(index);
        self
    }

    /// Copy of `self` with bit `index` set.
    #[inline]
    pub fn with(mut self, index: usize) -> Self {
        self.set(index);
        self
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == Self::full(self.width())
    }

    /// `true` if every bit set in `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &StateKey) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    #[inline]
    pub fn intersects(&self, other: &StateKey) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// Set bit indices in ascending order.
    pub fn ones(&self) -> Ones {
        Ones {
            words: self.words,
            word: 0,
        }
    }

    /// Indicator vector, one entry per connection.
    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.width()).map(|i| self.contains(i)).collect()
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(
            bits.len(),
            bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i),
        )
    }

    /// Big-endian hex rendering: the last digit holds bits 0..4.
    ///
    /// Always `max(1, ceil(width / 4))` digits, zero-padded.
    pub fn to_hex(&self) -> String {
        let digits = self.width().div_ceil(4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = if bit >= MAX_WIDTH {
                0
            } else {
                (self.words[bit / 64] >> (bit % 64)) & 0xf
            };
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Parses the hex form produced by [`StateKey::to_hex`].
    ///
    /// Leading zeros may be omitted; set bits beyond `width` are rejected.
    pub fn from_hex(width: usize, text: &str) -> Result<Self> {
        if width > MAX_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "state width {width} exceeds {MAX_WIDTH}"
            )));
        }
        let text = text.trim();
        let text = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .unwrap_or(text);
        if text.is_empty() {
            return Err(Error::InvalidArgument("empty hex state".into()));
        }
        let mut key = Self::empty(width);
        for (d, ch) in text.chars().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| {
                Error::InvalidArgument(format!("bad hex digit {ch:?} in {text:?}"))
            })?;
            for b in 0..4 {
                if nibble & (1 << b) != 0 {
                    let index = d * 4 + b;
                    if index >= width {
                        return Err(Error::InvalidArgument(format!(
                            "hex state {text:?} sets bit {index} beyond width {width}"
                        )));
                    }
                    key.set(index);
                }
            }
        }
        Ok(key)
    }
}

/// Numeric order on the underlying integer (most significant word first).
impl Ord for StateKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for StateKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl serde::Serialize for StateKey {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey({}/{})", self.to_hex(), self.width)
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub struct Ones {
    words: [u64; WORDS],
    word: usize,
}

impl Iterator for Ones {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.word < WORDS {
            let w = self.words[self.word];
            if w != 0 {
                let bit = w.trailing_zeros() as usize;
                self.words[self.word] &= w - 1;
                return Some(self.word * 64 + bit);
            }
            self.word += 1;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_empty() {
        let full = StateKey::full(3);
        assert_eq!(full.count_ones(), 3);
        assert_eq!(full.ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(StateKey::empty(3).is_empty());
        assert_eq!(StateKey::full(64).count_ones(), 64);
        assert_eq!(StateKey::full(256).count_ones(), 256);
        assert!(StateKey::full(0).is_empty());
    }

    #[test]
    fn hex_layout() {
        let k = StateKey::from_indices(5, [0, 4]);
        assert_eq!(k.to_hex(), "11");
        assert_eq!(StateKey::full(3).to_hex(), "7");
        assert_eq!(StateKey::empty(0).to_hex(), "0");
        assert_eq!(StateKey::from_hex(5, "0x11").unwrap(), k);
        assert_eq!(
            StateKey::from_hex(12, "1").unwrap(),
            StateKey::from_indices(12, [0])
        );
        assert!(StateKey::from_hex(3, "8").is_err());
        assert!(StateKey::from_hex(3, "g").is_err());
    }

    #[test]
    fn numeric_order() {
        let a = StateKey::from_indices(70, [65]);
        let b = StateKey::from_indices(70, [0, 1, 2, 63]);
        assert!(a > b);
    }

    proptest! {
        #[test]
        fn hex_and_bool_roundtrip(width in 0usize..=256, seed in any::<u64>()) {
            let mut x = seed | 1;
            let bits: Vec<bool> = (0..width).map(|_| {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                x & 1 == 1
            }).collect();
            let key = StateKey::from_bools(&bits);
            prop_assert_eq!(key.to_bools(), bits.clone());
            prop_assert_eq!(StateKey::from_hex(width, &key.to_hex()).unwrap(), key);
            prop_assert_eq!(key.count_ones(), bits.iter().filter(|b| **b).count());
        }
    }
}
