//! Fixed-length bit strings addressed left to right.
//!
//! Bit `i` of a [`Bits`] value is the `i`-th character of its written form, and
//! maps to the binary digit of weight `2^(len-1-i)` in [`Bits::value`]. This
//! is the same convention the state vector uses for qubits, so a measurement
//! outcome over qubits `0..m` is directly the basis index of the outcome.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_BITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bits {
    len: u8,
    value: u64,
}

fn mask(len: usize) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_BITS, "bit strings are limited to {MAX_BITS} bits");
        Self { len: len as u8, value: 0 }
    }

    pub fn from_value(len: usize, value: u64) -> Self {
        assert!(len <= MAX_BITS, "bit strings are limited to {MAX_BITS} bits");
        Self {
            len: len as u8,
            value: value & mask(len),
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > MAX_BITS {
            return Err(Error::invalid(format!("bit string longer than {MAX_BITS}")));
        }
        let mut out = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                _ => return Err(Error::invalid(format!("bad bit character `{c}`"))),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.value >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len(), "bit index {i} out of range");
        let shift = self.len() - 1 - i;
        if bit {
            self.value |= 1 << shift;
        } else {
            self.value &= !(1 << shift);
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.value.count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Concatenation, `self` first.
    pub fn concat(&self, other: &Bits) -> Bits {
        let len = self.len() + other.len();
        assert!(len <= MAX_BITS);
        Bits::from_value(len, (self.value << other.len()) | other.value)
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len);
        Bits::from_value(self.len(), self.value ^ other.value)
    }

    pub fn dot(&self, other: &Bits) -> u32 {
        assert_eq!(self.len, other.len);
        (self.value & other.value).count_ones()
    }

    pub fn to_hex(&self) -> String {
        format!("{:x}", self.value)
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self> {
        let value = u64::from_str_radix(s, 16)
            .map_err(|e| Error::invalid(format!("bad hex `{s}`: {e}")))?;
        if len < 64 && value >> len != 0 {
            return Err(Error::invalid(format!("hex `{s}` does not fit in {len} bits")));
        }
        Ok(Bits::from_value(len, value))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_to_right_order() {
        let b = Bits::parse("100").unwrap();
        assert_eq!(b.value(), 4);
        assert!(b.get(0));
        assert!(!b.get(2));
        assert_eq!(b.to_string(), "100");
    }

    #[test]
    fn concat_and_hex() {
        let a = Bits::parse("10").unwrap();
        let b = Bits::parse("011").unwrap();
        let c = a.concat(&b);
        assert_eq!(c.to_string(), "10011");
        assert_eq!(Bits::from_hex(5, &c.to_hex()).unwrap(), c);
        assert!(Bits::from_hex(2, "f").is_err());
    }

    #[test]
    fn full_width() {
        let b = Bits::from_value(64, u64::MAX);
        assert_eq!(b.count_ones(), 64);
        assert!(b.get(63));
    }
}
