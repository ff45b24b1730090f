//! Packed MSB-first bit strings.
//!
//! Every payload that crosses the simulated network is a [`BitString`], and every
//! bit count reported by the metrics is the length of one of these. Unused bits
//! in the final byte are always zero so derived equality and hashing are exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::Rng;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit character {0:?}")]
pub struct ParseBitsError(char);

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bytes: vec![0; len.div_ceil(8)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len {
            s.set(i, true);
        }
        s
    }

    /// Takes the first `len` bits of `bytes` (MSB-first).
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "not enough bytes for {len} bits");
        let mut out = Self {
            bytes: bytes[..len.div_ceil(8)].to_vec(),
            len,
        };
        out.clear_tail();
        out
    }

    /// Big-endian encoding of `value` in exactly `width` bits.
    pub fn from_uint(value: u64, width: usize) -> Self {
        let mut s = Self::with_capacity(width);
        s.push_uint(value, width);
        s
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill(&mut bytes[..]);
        Self::from_bytes(&bytes, len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 0x80 >> (i % 8);
        if bit {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        assert!(
            width == 64 || value >> width == 0,
            "{value} does not fit in {width} bits"
        );
        let mut left = width;
        while left > 0 {
            let used = self.len % 8;
            if used == 0 {
                self.bytes.push(0);
            }
            let take = (8 - used).min(left);
            let chunk = ((value >> (left - take)) & ((1u64 << take) - 1)) as u8;
            *self.bytes.last_mut().expect("byte pushed above") |= chunk << (8 - used - take);
            self.len += take;
            left -= take;
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let shift = self.len % 8;
        for (k, &b) in other.bytes.iter().enumerate() {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= b >> shift;
            // Only open a new byte when bits of `other` actually spill into it.
            let consumed = (k + 1) * 8;
            let spill = consumed.min(other.len).saturating_sub(k * 8 + (8 - shift));
            if spill > 0 {
                self.bytes.push(b << (8 - shift));
            }
        }
        self.len += other.len;
        self.clear_tail();
    }

    pub fn read_uint(&self, pos: usize, width: usize) -> u64 {
        assert!(width <= 64 && pos + width <= self.len);
        (pos..pos + width).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len);
        if start.is_multiple_of(8) {
            return Self::from_bytes(&self.bytes[start / 8..], len);
        }
        let mut out = Self::with_capacity(len);
        for i in start..start + len {
            out.push(self.get(i));
        }
        out
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        let mut out = BitString::new();
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Bitwise XOR; both operands must have equal length.
    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        BitString {
            bytes,
            len: self.len,
        }
    }

    pub fn and(&self, other: &BitString) -> BitString {
        assert_eq!(self.len, other.len, "and of unequal lengths");
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a & b)
            .collect();
        BitString {
            bytes,
            len: self.len,
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The string read as a non-negative integer, most significant bit first.
    /// The empty string is zero.
    pub fn to_biguint(&self) -> BigUint {
        let v = BigUint::from_bytes_be(&self.bytes);
        let pad = self.bytes.len() * 8 - self.len;
        v >> pad
    }

    /// `value` in exactly `width` bits, big-endian.
    pub fn from_biguint(value: &BigUint, width: usize) -> BitString {
        assert!(value.bits() as usize <= width, "value wider than {width} bits");
        let mut out = BitString::with_capacity(width);
        for k in (0..width as u64).rev() {
            out.push(value.bit(k));
        }
        out
    }

    /// `self mod p` for the integer reading of the string.
    pub fn mod_u64(&self, p: u64) -> u64 {
        assert!(p > 0);
        let full = self.len / 8;
        let rem = self.len % 8;
        let p = p as u128;
        let mut acc: u128 = 0;
        let mut words = self.bytes[..full].chunks_exact(8);
        for w in &mut words {
            let w = u64::from_be_bytes(w.try_into().unwrap()) as u128;
            // acc < p < 2^64, so (acc << 64) | w fits in 128 bits.
            acc = ((acc << 64) | w) % p;
        }
        for &b in words.remainder() {
            acc = ((acc << 8) | b as u128) % p;
        }
        if rem > 0 {
            let b = (self.bytes[full] >> (8 - rem)) as u128;
            acc = ((acc << rem) | b) % p;
        }
        acc as u64
    }

    pub fn mod_big(&self, p: &BigUint) -> BigUint {
        self.to_biguint() % p
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
        self.bytes.truncate(self.len.div_ceil(8));
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(ParseBitsError(other)),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString({} bits)", self.len)
        }
    }
}

/// Bits needed to write any index in `[0, n)`; at least one.
pub fn index_width(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1);
    if x == 1 {
        0
    } else {
        u64::BITS - (x - 1).leading_zeros()
    }
}
