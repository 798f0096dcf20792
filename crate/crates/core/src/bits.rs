//! Bit-vector helpers.
//!
//! Words are `Vec<bool>` with index 0 first. The hex form packs bits LSB-first
//! into bytes (bit `i` lands in byte `i / 8`, bit position `i % 8`), so for a
//! Reed-Solomon word with 8-bit symbols the hex string is simply the symbols
//! in order.

use crate::error::{Error, Result};

pub fn to_bytes(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Vec<bool>> {
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::LengthMismatch {
            expected: len.div_ceil(8),
            got: bytes.len(),
        });
    }
    let bits: Vec<bool> = (0..bytes.len() * 8)
        .map(|i| (bytes[i / 8] >> (i % 8)) & 1 == 1)
        .collect();
    if bits[len..].iter().any(|&b| b) {
        return Err(Error::Parse(format!(
            "padding bits beyond bit {len} are set"
        )));
    }
    Ok(bits[..len].to_vec())
}

pub fn to_hex(bits: &[bool]) -> String {
    hex::encode(to_bytes(bits))
}

pub fn from_hex(s: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = hex::decode(s.trim()).map_err(|e| Error::Parse(format!("bad hex `{s}`: {e}")))?;
    from_bytes(&bytes, len)
}

pub fn xor(a: &[bool], b: &[bool]) -> Result<Vec<bool>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Splits a bit vector into `symbol_bits`-wide symbols, LSB first.
pub fn to_symbols(bits: &[bool], symbol_bits: usize) -> Vec<u16> {
    bits.chunks(symbol_bits)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u16, |acc, (i, &b)| acc | ((b as u16) << i))
        })
        .collect()
}

pub fn from_symbols(symbols: &[u16], symbol_bits: usize) -> Vec<bool> {
    symbols
        .iter()
        .flat_map(|&s| (0..symbol_bits).map(move |i| (s >> i) & 1 == 1))
        .collect()
}

/// Serde adapter that stores a bit vector as its hex string.
pub mod serde_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_hex(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = hex::decode(&s).map_err(serde::de::Error::custom)?;
        Ok((0..bytes.len() * 8)
            .map(|i| (bytes[i / 8] >> (i % 8)) & 1 == 1)
            .collect())
    }
}
