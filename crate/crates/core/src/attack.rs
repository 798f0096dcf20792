//! Combined fault-injection and timing attack on the fuzzy extractor.
//!
//! The attacker forces one PUF bit to a chosen value `f`, triggers a key
//! reconstruction and compares its latency with an unfaulted one. If the
//! latency is unchanged the fault did nothing and the bit already equals `f`;
//! otherwise the fault introduced an extra error and the bit is `!f`.
//! Against a decoder whose latency does not depend on the error count no
//! verdict is possible, and the engine says so instead of guessing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::campaign::{timing_certificate, Verdict};
use crate::codec::Codec;
use crate::device::{FaultSpec, PufDevice};
use crate::error::{Error, Result};
use crate::fe::{fe_reconstruct, HelperData, KeyDerivation, KeySource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTiming {
    Leaky,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitVerdict {
    BitIsF,
    BitIsNotF,
    Undecidable,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackOptions {
    /// Value every injection forces.
    pub forced_value: bool,
    /// Each latency reading is perturbed uniformly within ±`jitter` cycles.
    pub jitter: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub position: usize,
    pub forced_value: bool,
    pub cycles: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calibration {
    pub target: TargetTiming,
    pub baseline_cycles: u64,
    pub probes: Vec<Probe>,
    /// Outcome of the error-count timing campaign on the target's codec.
    pub certificate: Verdict,
    pub injections: u64,
    pub reconstructions: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRecord {
    pub position: usize,
    pub forced_value: bool,
    pub cycles: u64,
    pub verdict: BitVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackTrace {
    pub codec: String,
    pub profile: String,
    pub options: AttackOptions,
    pub calibration: Calibration,
    pub baseline_cycles: u64,
    /// Injections and reconstructions of the recovery phase only.
    pub injections: u64,
    pub reconstructions: u64,
    pub bits: Vec<BitRecord>,
    /// Recovered response as hex, when every bit was decided.
    pub recovered_w: Option<String>,
    /// Key derived from the recovered response.
    pub recovered_key: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub correct: usize,
    pub wrong: usize,
    pub undecidable: usize,
}

impl AttackTrace {
    pub fn recovered_bits(&self) -> Option<Vec<bool>> {
        self.bits
            .iter()
            .map(|b| match b.verdict {
                BitVerdict::BitIsF => Some(b.forced_value),
                BitVerdict::BitIsNotF => Some(!b.forced_value),
                BitVerdict::Undecidable => None,
            })
            .collect()
    }

    /// Compares the verdicts with the true response.
    pub fn score(&self, truth: &[bool]) -> Score {
        let mut s = Score::default();
        for b in &self.bits {
            let bit = truth[b.position];
            match b.verdict {
                BitVerdict::Undecidable => s.undecidable += 1,
                BitVerdict::BitIsF if bit == b.forced_value => s.correct += 1,
                BitVerdict::BitIsNotF if bit != b.forced_value => s.correct += 1,
                _ => s.wrong += 1,
            }
        }
        s
    }
}

/// Latency observer: one reconstruction per call, optional jitter.
struct Oracle<'a> {
    device: &'a mut PufDevice,
    helper: &'a HelperData,
    codec: &'a Codec,
    jitter: u64,
    rng: ChaCha8Rng,
    injections: u64,
    reconstructions: u64,
}

impl Oracle<'_> {
    fn reconstruct(&mut self, fault: Option<FaultSpec>) -> Result<u64> {
        if let Some(f) = fault {
            self.device.inject_fault(f)?;
            self.injections += 1;
        }
        let w = self.device.measure();
        self.reconstructions += 1;
        let cycles = match fe_reconstruct(&w, self.helper, self.codec) {
            Ok(r) => r.cycles,
            // A failed reconstruction still takes observable time.
            Err(Error::ReconstructFailed { cycles }) => cycles,
            Err(e) => return Err(e),
        };
        Ok(self.perturb(cycles))
    }

    fn perturb(&mut self, cycles: u64) -> u64 {
        if self.jitter == 0 {
            return cycles;
        }
        let j = self.jitter as i64;
        (cycles as i64 + self.rng.gen_range(-j..=j)).max(0) as u64
    }

    fn counters(&mut self) -> (u64, u64) {
        let c = (self.injections, self.reconstructions);
        self.injections = 0;
        self.reconstructions = 0;
        c
    }
}

fn check_target(device: &PufDevice, helper: &HelperData, codec: &Codec) -> Result<()> {
    if device.width() != codec.word_bits() {
        return Err(Error::LengthMismatch {
            expected: codec.word_bits(),
            got: device.width(),
        });
    }
    if helper.codec_id != codec.id() {
        return Err(Error::InvalidConfig(format!(
            "helper data belongs to `{}`, target runs `{}`",
            helper.codec_id,
            codec.id()
        )));
    }
    Ok(())
}

fn calibrate(oracle: &mut Oracle<'_>) -> Result<Calibration> {
    let width = oracle.device.width();
    let certificate = timing_certificate(oracle.codec)?;
    let baseline_cycles = oracle.reconstruct(None)?;
    let mut probes = Vec::new();
    let mut positions = vec![0, width / 2, width - 1];
    positions.dedup();
    for position in positions {
        for forced_value in [false, true] {
            let cycles = oracle.reconstruct(Some(FaultSpec {
                position,
                value: forced_value,
            }))?;
            probes.push(Probe {
                position,
                forced_value,
                cycles,
            });
        }
    }
    let spread = probes
        .iter()
        .any(|p| p.cycles.abs_diff(baseline_cycles) > 2 * oracle.jitter);
    let target = if certificate == Verdict::Vulnerable && spread {
        TargetTiming::Leaky
    } else {
        TargetTiming::Constant
    };
    let (injections, reconstructions) = oracle.counters();
    Ok(Calibration {
        target,
        baseline_cycles,
        probes,
        certificate,
        injections,
        reconstructions,
    })
}

/// Decides whether the target's reconstruction latency leaks the error count.
pub fn attack_calibrate(
    device: &mut PufDevice,
    helper: &HelperData,
    codec: &Codec,
) -> Result<Calibration> {
    check_target(device, helper, codec)?;
    let mut oracle = Oracle {
        device,
        helper,
        codec,
        jitter: 0,
        rng: ChaCha8Rng::seed_from_u64(0),
        injections: 0,
        reconstructions: 0,
    };
    calibrate(&mut oracle)
}

/// Calibrates, then recovers the response bit by bit: one baseline
/// reconstruction followed by one injection and reconstruction per bit.
pub fn attack_run(
    device: &mut PufDevice,
    helper: &HelperData,
    codec: &Codec,
    options: AttackOptions,
) -> Result<AttackTrace> {
    check_target(device, helper, codec)?;
    let width = device.width();
    let mut oracle = Oracle {
        device,
        helper,
        codec,
        jitter: options.jitter,
        rng: ChaCha8Rng::seed_from_u64(options.seed),
        injections: 0,
        reconstructions: 0,
    };
    let calibration = calibrate(&mut oracle)?;
    let tolerance = 2 * options.jitter;

    let baseline_cycles = oracle.reconstruct(None)?;
    let mut bits_out = Vec::with_capacity(width);
    for position in 0..width {
        let cycles = oracle.reconstruct(Some(FaultSpec {
            position,
            value: options.forced_value,
        }))?;
        let verdict = match calibration.target {
            TargetTiming::Constant => BitVerdict::Undecidable,
            TargetTiming::Leaky if cycles.abs_diff(baseline_cycles) <= tolerance => {
                BitVerdict::BitIsF
            }
            TargetTiming::Leaky => BitVerdict::BitIsNotF,
        };
        bits_out.push(BitRecord {
            position,
            forced_value: options.forced_value,
            cycles,
            verdict,
        });
    }
    let (injections, reconstructions) = oracle.counters();

    let mut trace = AttackTrace {
        codec: codec.id(),
        profile: codec.profile_name().to_string(),
        options,
        calibration,
        baseline_cycles,
        injections,
        reconstructions,
        bits: bits_out,
        recovered_w: None,
        recovered_key: None,
    };
    if let Some(w) = trace.recovered_bits() {
        trace.recovered_key = Some(
            KeyDerivation::default()
                .derive(&w, KeySource::Reconstructed)
                .hex(),
        );
        trace.recovered_w = Some(bits::to_hex(&w));
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::{fe_generate, random_secret};

    fn enroll(codec: &Codec, seed: u64) -> (PufDevice, HelperData, String) {
        let device = PufDevice::random(codec.word_bits(), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
        let secret = random_secret(codec, &mut rng);
        let (helper, key) = fe_generate(device.secret_w(), &secret, codec).unwrap();
        (device, helper, key.hex())
    }

    #[test]
    fn recovers_rs_response_with_either_polarity() {
        let codec = Codec::from_id("rs", None).unwrap();
        for seed in 0..10 {
            for forced_value in [false, true] {
                let (mut device, helper, key) = enroll(&codec, seed);
                let trace = attack_run(
                    &mut device,
                    &helper,
                    &codec,
                    AttackOptions {
                        forced_value,
                        ..Default::default()
                    },
                )
                .unwrap();
                assert_eq!(trace.calibration.target, TargetTiming::Leaky);
                assert_eq!((trace.injections, trace.reconstructions), (64, 65));
                assert_eq!(trace.recovered_bits().unwrap(), device.secret_w());
                assert_eq!(trace.recovered_key.as_deref(), Some(key.as_str()));
                assert_eq!(
                    trace.score(device.secret_w()),
                    Score {
                        correct: 64,
                        wrong: 0,
                        undecidable: 0
                    }
                );
                for b in &trace.bits {
                    let expect = if device.secret_w()[b.position] == forced_value {
                        38
                    } else {
                        66
                    };
                    assert_eq!(b.cycles, expect);
                }
            }
        }
    }

    #[test]
    fn constant_time_targets_are_undecidable() {
        for id in ["bch-serial", "bch-parallel", "rs-worstcase"] {
            let codec = Codec::from_id(id, None).unwrap();
            let (mut device, helper, _) = enroll(&codec, 3);
            let trace = attack_run(&mut device, &helper, &codec, AttackOptions::default()).unwrap();
            assert_eq!(trace.calibration.target, TargetTiming::Constant);
            assert_eq!(trace.calibration.certificate, Verdict::NotVulnerable);
            assert!(trace.recovered_w.is_none());
            let score = trace.score(device.secret_w());
            assert_eq!(
                score,
                Score {
                    correct: 0,
                    wrong: 0,
                    undecidable: codec.word_bits()
                }
            );
        }
    }

    #[test]
    fn calibration_queries_are_counted_apart() {
        let codec = Codec::from_id("rs", None).unwrap();
        let (mut device, helper, _) = enroll(&codec, 1);
        let cal = attack_calibrate(&mut device, &helper, &codec).unwrap();
        assert_eq!((cal.injections, cal.reconstructions), (6, 7));
        assert_eq!(cal.baseline_cycles, 38);
        assert_eq!(cal.target, TargetTiming::Leaky);
    }

    #[test]
    fn small_jitter_is_tolerated() {
        let codec = Codec::from_id("rs", None).unwrap();
        let (mut device, helper, _) = enroll(&codec, 2);
        let opts = AttackOptions {
            forced_value: true,
            jitter: 5,
            seed: 9,
        };
        let trace = attack_run(&mut device, &helper, &codec, opts).unwrap();
        assert_eq!(trace.recovered_bits().unwrap(), device.secret_w());
    }

    #[test]
    fn mismatched_target_is_rejected() {
        let rs = Codec::from_id("rs", None).unwrap();
        let bch = Codec::from_id("bch-serial", None).unwrap();
        let (mut device, helper, _) = enroll(&rs, 0);
        assert!(attack_run(&mut device, &helper, &bch, AttackOptions::default()).is_err());
    }

    #[test]
    fn trace_serializes() {
        let codec = Codec::from_id("bch-parallel", None).unwrap();
        let (mut device, helper, _) = enroll(&codec, 4);
        let trace = attack_run(&mut device, &helper, &codec, AttackOptions::default()).unwrap();
        let json = serde_json::to_string(&trace).unwrap();
        assert!(json.contains("\"undecidable\""));
        let back: AttackTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, trace);
    }
}
