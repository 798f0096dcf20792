//! TOML experiment configuration.
//!
//! ```toml
//! [codec]
//! type = "rs"              # bch | rs
//! n = 8
//! k = 4
//! t = 2
//! reduction_poly = 0x11D
//! timing_profile = "paper-rs"
//!
//! [device]
//! seed = 7                 # or: w = "a1b2..."
//! noise = 0.0
//!
//! [paths]
//! helper = "helper.txt"
//! report = "report.json"
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use fesim::bch::{BchConfig, BmaMode};
use fesim::device::{NoiseModel, PufDevice};
use fesim::gf::GfContext;
use fesim::rs::RsConfig;
use fesim::timing::TimingProfile;
use fesim::{bits, Codec, Error};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecType {
    Bch,
    Rs,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecSection {
    #[serde(rename = "type")]
    pub kind: CodecType,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    /// Field degree; defaults to the smallest field holding n (BCH) or 8 (RS).
    pub m: Option<u32>,
    pub reduction_poly: Option<u32>,
    pub bma_mode: Option<BmaMode>,
    pub timing_profile: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub w: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub noise: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub helper: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub codec: Option<CodecSection>,
    #[serde(default)]
    pub device: DeviceSection,
    #[serde(default)]
    pub paths: PathsSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if let Some(c) = &cfg.codec {
            c.build()?;
        }
        if !(0.0..=1.0).contains(&cfg.device.noise) {
            return Err(
                Error::InvalidConfig(format!("noise {} outside [0, 1]", cfg.device.noise)).into(),
            );
        }
        Ok(cfg)
    }
}

impl CodecSection {
    pub fn build(&self) -> Result<Codec, Error> {
        let timing = TimingProfile::preset(&self.timing_profile)?;
        match self.kind {
            CodecType::Bch => {
                let m = self
                    .m
                    .unwrap_or_else(|| (1..16).find(|&m| (1usize << m) > self.n).unwrap_or(16));
                let gf = GfContext::new(m, self.reduction_poly.unwrap_or_else(|| default_poly(m)))?;
                let mode = self.bma_mode.unwrap_or(BmaMode::Serial);
                Ok(Codec::Bch(BchConfig::new(
                    self.n, self.k, self.t, gf, mode, timing,
                )?))
            }
            CodecType::Rs => {
                if self.bma_mode.is_some() {
                    return Err(Error::InvalidConfig("bma_mode applies to BCH only".into()));
                }
                let m = self.m.unwrap_or(8);
                let gf = GfContext::new(m, self.reduction_poly.unwrap_or_else(|| default_poly(m)))?;
                Ok(Codec::Rs(RsConfig::new(
                    self.n, self.k, self.t, gf, timing,
                )?))
            }
        }
    }
}

fn default_poly(m: u32) -> u32 {
    match m {
        4 => fesim::gf::GF16_POLY,
        8 => fesim::gf::GF256_POLY,
        // conventional primitive trinomials/pentanomials
        2 => 0x7,
        3 => 0xB,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        9 => 0x211,
        10 => 0x409,
        _ => 0,
    }
}

impl DeviceSection {
    /// Builds the device; `w` takes precedence over `seed`.
    pub fn build(&self, width: usize, fallback_seed: u64) -> Result<PufDevice, Error> {
        let noise = if self.noise > 0.0 {
            NoiseModel::Bernoulli(self.noise)
        } else {
            NoiseModel::None
        };
        let seed = self.seed.unwrap_or(fallback_seed);
        let w = match &self.w {
            Some(hex) => bits::from_hex(hex, width)?,
            None => PufDevice::random(width, seed).secret_w().to_vec(),
        };
        Ok(PufDevice::with_noise(w, noise, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            [codec]
            type = "bch"
            n = 12
            k = 4
            t = 2
            reduction_poly = 0x13
            bma_mode = "parallel"
            timing_profile = "paper-bch-parallel"

            [device]
            seed = 3

            [paths]
            helper = "h.txt"
            "#,
        )
        .unwrap();
        let codec = cfg.codec.unwrap().build().unwrap();
        assert_eq!(codec.id(), "bch-parallel");
        assert_eq!(cfg.device.build(12, 0).unwrap().width(), 12);
    }

    #[test]
    fn rejects_bad_codec() {
        let section = CodecSection {
            kind: CodecType::Rs,
            n: 8,
            k: 4,
            t: 2,
            m: None,
            reduction_poly: Some(0x11B),
            bma_mode: None,
            timing_profile: "paper-rs".into(),
        };
        assert!(section.build().is_err());
        let section = CodecSection {
            reduction_poly: None,
            timing_profile: "nope".into(),
            ..section
        };
        assert!(matches!(section.build(), Err(Error::UnknownProfile(_))));
    }
}
