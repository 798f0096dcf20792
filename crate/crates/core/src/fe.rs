//! Code-offset fuzzy extractor.
//!
//! Generation masks the PUF response with a fresh codeword,
//! `P = W ⊕ E(S0)`, and derives the key from `W`. Reconstruction decodes
//! `W' ⊕ P`, re-encodes the corrected secret to recover `W = P ⊕ E(S0)` and
//! hashes it again. The decoder's cycle count is passed through untouched;
//! it is exactly what a timing observer sees.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits;
use crate::codec::{Codec, DecodeStatus};
use crate::error::{Error, Result};

/// Public helper data stored in NVM.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelperData {
    pub codec_id: String,
    #[serde(with = "bits::serde_hex")]
    pub mask: Vec<bool>,
}

impl HelperData {
    /// Parses the two-line file format: codec identifier, then hex mask.
    pub fn parse(text: &str, codec: &Codec) -> Result<HelperData> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let codec_id = lines
            .next()
            .ok_or_else(|| Error::Parse("empty helper-data file".into()))?;
        let mask = lines
            .next()
            .ok_or_else(|| Error::Parse("helper-data file lacks a mask line".into()))?;
        if codec_id != codec.id() {
            return Err(Error::Parse(format!(
                "helper data was produced by `{codec_id}`, not `{}`",
                codec.id()
            )));
        }
        Ok(HelperData {
            codec_id: codec_id.to_string(),
            mask: bits::from_hex(mask, codec.word_bits())?,
        })
    }
}

impl fmt::Display for HelperData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.codec_id)?;
        writeln!(f, "{}", bits::to_hex(&self.mask))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeySource {
    Generated,
    Reconstructed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeKey {
    #[serde(with = "hex_bytes")]
    pub key_bytes: Vec<u8>,
    pub source: KeySource,
}

impl FeKey {
    pub fn hex(&self) -> String {
        hex::encode(&self.key_bytes)
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        hex::decode(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Key derivation settings. The digest is SHA-256 over the packed bits of W.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyDerivation {
    /// Output length in bytes, 1..=32.
    pub key_len: usize,
}

impl Default for KeyDerivation {
    fn default() -> Self {
        KeyDerivation { key_len: 32 }
    }
}

impl FromStr for KeyDerivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key_len: usize = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad key length `{s}`")))?;
        if !(1..=32).contains(&key_len) {
            return Err(Error::InvalidConfig(format!(
                "key length {key_len} outside 1..=32"
            )));
        }
        Ok(KeyDerivation { key_len })
    }
}

impl KeyDerivation {
    pub fn derive(&self, w: &[bool], source: KeySource) -> FeKey {
        let digest = Sha256::digest(bits::to_bytes(w));
        FeKey {
            key_bytes: digest[..self.key_len.min(32)].to_vec(),
            source,
        }
    }
}

/// Draw a secret message S0 for [`fe_generate`].
pub fn random_secret<R: Rng>(codec: &Codec, rng: &mut R) -> Vec<bool> {
    (0..codec.message_bits()).map(|_| rng.gen()).collect()
}

pub fn fe_generate(w: &[bool], secret: &[bool], codec: &Codec) -> Result<(HelperData, FeKey)> {
    fe_generate_with(w, secret, codec, KeyDerivation::default())
}

pub fn fe_generate_with(
    w: &[bool],
    secret: &[bool],
    codec: &Codec,
    kdf: KeyDerivation,
) -> Result<(HelperData, FeKey)> {
    if w.len() != codec.word_bits() {
        return Err(Error::LengthMismatch {
            expected: codec.word_bits(),
            got: w.len(),
        });
    }
    let codeword = codec.encode_bits(secret)?;
    let helper = HelperData {
        codec_id: codec.id(),
        mask: bits::xor(w, &codeword)?,
    };
    Ok((helper, kdf.derive(w, KeySource::Generated)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstruction {
    pub key: FeKey,
    /// Decoder cycle count, verbatim.
    pub cycles: u64,
    pub status: DecodeStatus,
    /// Symbols the decoder corrected.
    pub corrected_symbols: usize,
}

pub fn fe_reconstruct(
    w_prime: &[bool],
    helper: &HelperData,
    codec: &Codec,
) -> Result<Reconstruction> {
    fe_reconstruct_with(w_prime, helper, codec, KeyDerivation::default())
}

pub fn fe_reconstruct_with(
    w_prime: &[bool],
    helper: &HelperData,
    codec: &Codec,
    kdf: KeyDerivation,
) -> Result<Reconstruction> {
    if w_prime.len() != codec.word_bits() {
        return Err(Error::LengthMismatch {
            expected: codec.word_bits(),
            got: w_prime.len(),
        });
    }
    if helper.mask.len() != codec.word_bits() {
        return Err(Error::LengthMismatch {
            expected: codec.word_bits(),
            got: helper.mask.len(),
        });
    }
    let noisy = bits::xor(w_prime, &helper.mask)?;
    let (corrected, out) = codec.decode_bits(&noisy)?;
    if out.status == DecodeStatus::Uncorrectable {
        return Err(Error::ReconstructFailed { cycles: out.cycles });
    }
    let secret = codec.extract_message_bits(&corrected)?;
    let w = bits::xor(&helper.mask, &codec.encode_bits(&secret)?)?;
    Ok(Reconstruction {
        key: kdf.derive(&w, KeySource::Reconstructed),
        cycles: out.cycles,
        status: out.status,
        corrected_symbols: out.error_positions.len(),
    })
}
