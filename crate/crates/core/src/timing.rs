//! Per-stage cycle budgets for the behavioral decoder models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PRESETS: &str = include_str!("../data/timing_profiles.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingMode {
    /// Stages finish as soon as their work is done; data-dependent loops leak.
    SpeedOptimized,
    /// Every stage is registered out at its worst-case latency.
    WorstCasePipelined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingProfile {
    pub name: String,
    pub mode: TimingMode,
    pub syndrome: u64,
    pub key_solver_fixed: u64,
    pub key_solver_per_iteration: u64,
    pub chien: u64,
    pub forney: u64,
    pub output: u64,
}

#[derive(Deserialize)]
struct PresetFile {
    version: u32,
    profile: Vec<TimingProfile>,
}

impl TimingProfile {
    /// All shipped presets, in file order.
    pub fn presets() -> Vec<TimingProfile> {
        let file: PresetFile = toml::from_str(PRESETS).expect("bundled timing presets parse");
        debug_assert_eq!(file.version, 1);
        file.profile
    }

    pub fn preset(name: &str) -> Result<TimingProfile> {
        Self::presets()
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownProfile(name.to_string()))
    }

    /// Cycles spent in the key-equation solver for a given iteration count.
    pub fn key_solver_cycles(&self, iterations: u64) -> u64 {
        self.key_solver_fixed + iterations * self.key_solver_per_iteration
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let names: Vec<_> = TimingProfile::presets()
            .into_iter()
            .map(|p| p.name)
            .collect();
        assert_eq!(
            names,
            [
                "paper-bch-serial",
                "paper-bch-parallel",
                "paper-rs",
                "paper-rs-worstcase"
            ]
        );
        assert_eq!(
            TimingProfile::preset("paper-rs-worstcase").unwrap().mode,
            TimingMode::WorstCasePipelined
        );
        assert!(matches!(
            TimingProfile::preset("nope"),
            Err(Error::UnknownProfile(_))
        ));
    }
}
