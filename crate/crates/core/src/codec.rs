//! Uniform handle over the two decoders, used by the fuzzy extractor,
//! the attack engine and the campaign runner.
//!
//! Words are handled either as symbol vectors (bits for BCH, bytes for RS) or
//! as flat bit vectors; symbol `j` occupies bits `j*s .. (j+1)*s`, LSB first.

use serde::{Deserialize, Serialize};

use crate::bch::{self, BchConfig, BmaMode};
use crate::bits;
use crate::error::{Error, Result};
use crate::gf::Element;
use crate::rs::{self, RsConfig};
use crate::timing::TimingMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeStatus {
    Ok,
    Uncorrectable,
}

#[derive(Clone, Debug)]
pub enum Codec {
    Bch(BchConfig),
    Rs(RsConfig),
}

/// Decoder output reduced to what the callers above the codec layer observe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordDecode {
    pub corrected: Vec<Element>,
    pub error_positions: Vec<usize>,
    pub status: DecodeStatus,
    pub cycles: u64,
}

impl Codec {
    /// Codec identifiers: `bch-serial`, `bch-parallel`, `rs`, `rs-worstcase`.
    /// `profile` overrides the timing preset.
    pub fn from_id(id: &str, profile: Option<&str>) -> Result<Codec> {
        use crate::timing::TimingProfile;
        let codec = match id {
            "bch-serial" => Codec::Bch(BchConfig::paper(BmaMode::Serial)),
            "bch-parallel" => Codec::Bch(BchConfig::paper(BmaMode::Parallel)),
            "rs" => Codec::Rs(RsConfig::paper("paper-rs")?),
            "rs-worstcase" => Codec::Rs(RsConfig::paper("paper-rs-worstcase")?),
            other => return Err(Error::UnknownCodec(other.to_string())),
        };
        Ok(match profile {
            None => codec,
            Some(p) => codec.with_timing(TimingProfile::preset(p)?),
        })
    }

    pub fn with_timing(self, timing: crate::timing::TimingProfile) -> Codec {
        match self {
            Codec::Bch(c) => Codec::Bch(BchConfig { timing, ..c }),
            Codec::Rs(c) => Codec::Rs(RsConfig { timing, ..c }),
        }
    }

    /// Identifier written to helper-data files.
    pub fn id(&self) -> String {
        match self {
            Codec::Bch(c) => match c.bma_mode {
                BmaMode::Serial => "bch-serial".into(),
                BmaMode::Parallel => "bch-parallel".into(),
            },
            Codec::Rs(c) => match c.timing.mode {
                TimingMode::SpeedOptimized => "rs".into(),
                TimingMode::WorstCasePipelined => "rs-worstcase".into(),
            },
        }
    }

    pub fn profile_name(&self) -> &str {
        match self {
            Codec::Bch(c) => &c.timing.name,
            Codec::Rs(c) => &c.timing.name,
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Codec::Bch(_))
    }

    pub fn n(&self) -> usize {
        match self {
            Codec::Bch(c) => c.n,
            Codec::Rs(c) => c.n,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Codec::Bch(c) => c.k,
            Codec::Rs(c) => c.k,
        }
    }

    pub fn t(&self) -> usize {
        match self {
            Codec::Bch(c) => c.t,
            Codec::Rs(c) => c.t,
        }
    }

    pub fn symbol_bits(&self) -> usize {
        match self {
            Codec::Bch(_) => 1,
            Codec::Rs(c) => c.symbol_bits,
        }
    }

    /// Number of distinct nonzero error values per symbol.
    pub fn nonzero_symbols(&self) -> u64 {
        (1u64 << self.symbol_bits()) - 1
    }

    pub fn word_bits(&self) -> usize {
        self.n() * self.symbol_bits()
    }

    pub fn message_bits(&self) -> usize {
        self.k() * self.symbol_bits()
    }

    pub fn encode_symbols(&self, message: &[Element]) -> Result<Vec<Element>> {
        match self {
            Codec::Bch(c) => {
                let m: Vec<bool> = message.iter().map(|&s| s != 0).collect();
                if message.iter().any(|&s| s > 1) {
                    return Err(Error::Parse("BCH message symbols must be bits".into()));
                }
                Ok(bch::bch_encode(&m, c)?
                    .into_iter()
                    .map(Element::from)
                    .collect())
            }
            Codec::Rs(c) => rs::rs_encode(message, c),
        }
    }

    pub fn decode_symbols(&self, received: &[Element]) -> Result<WordDecode> {
        match self {
            Codec::Bch(c) => {
                if received.iter().any(|&s| s > 1) {
                    return Err(Error::Parse("BCH word symbols must be bits".into()));
                }
                let r: Vec<bool> = received.iter().map(|&s| s != 0).collect();
                let out = bch::bch_decode(&r, c)?;
                Ok(WordDecode {
                    corrected: out.corrected.into_iter().map(Element::from).collect(),
                    error_positions: out.error_positions,
                    status: out.status,
                    cycles: out.cycles,
                })
            }
            Codec::Rs(c) => {
                let out = rs::rs_decode(received, c)?;
                Ok(WordDecode {
                    corrected: out.corrected,
                    error_positions: out.error_positions,
                    status: out.status,
                    cycles: out.cycles,
                })
            }
        }
    }

    pub fn encode_bits(&self, message: &[bool]) -> Result<Vec<bool>> {
        if message.len() != self.message_bits() {
            return Err(Error::LengthMismatch {
                expected: self.message_bits(),
                got: message.len(),
            });
        }
        let s = self.symbol_bits();
        Ok(bits::from_symbols(
            &self.encode_symbols(&bits::to_symbols(message, s))?,
            s,
        ))
    }

    /// Decode a flat bit vector; `corrected` in the result is returned as bits.
    pub fn decode_bits(&self, received: &[bool]) -> Result<(Vec<bool>, WordDecode)> {
        if received.len() != self.word_bits() {
            return Err(Error::LengthMismatch {
                expected: self.word_bits(),
                got: received.len(),
            });
        }
        let s = self.symbol_bits();
        let out = self.decode_symbols(&bits::to_symbols(received, s))?;
        Ok((bits::from_symbols(&out.corrected, s), out))
    }

    pub fn extract_message_bits(&self, codeword: &[bool]) -> Result<Vec<bool>> {
        if codeword.len() != self.word_bits() {
            return Err(Error::LengthMismatch {
                expected: self.word_bits(),
                got: codeword.len(),
            });
        }
        let check = (self.n() - self.k()) * self.symbol_bits();
        Ok(codeword[check..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ["bch-serial", "bch-parallel", "rs", "rs-worstcase"] {
            assert_eq!(Codec::from_id(id, None).unwrap().id(), id);
        }
        assert!(matches!(
            Codec::from_id("ldpc", None),
            Err(Error::UnknownCodec(_))
        ));
        assert!(matches!(
            Codec::from_id("rs", Some("x")),
            Err(Error::UnknownProfile(_))
        ));
        let c = Codec::from_id("rs", Some("paper-rs-worstcase")).unwrap();
        assert_eq!(c.id(), "rs-worstcase");
    }

    #[test]
    fn widths() {
        let b = Codec::from_id("bch-serial", None).unwrap();
        assert_eq!(
            (b.word_bits(), b.message_bits(), b.nonzero_symbols()),
            (12, 4, 1)
        );
        let r = Codec::from_id("rs", None).unwrap();
        assert_eq!(
            (r.word_bits(), r.message_bits(), r.nonzero_symbols()),
            (64, 32, 255)
        );
    }

    #[test]
    fn bit_interface_round_trip() {
        let r = Codec::from_id("rs", None).unwrap();
        let msg: Vec<bool> = (0..32).map(|i| i % 3 == 0).collect();
        let mut cw = r.encode_bits(&msg).unwrap();
        assert_eq!(r.extract_message_bits(&cw).unwrap(), msg);
        let clean = cw.clone();
        cw[17] ^= true;
        let (corrected, out) = r.decode_bits(&cw).unwrap();
        assert_eq!(corrected, clean);
        assert_eq!((out.error_positions, out.cycles), (vec![2], 66));
    }
}
