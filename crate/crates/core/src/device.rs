//! Memory-based PUF model with transient single-bit fault injection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "p")]
pub enum NoiseModel {
    None,
    /// Each bit flips independently with probability p on every measurement.
    Bernoulli(f64),
}

/// Force bit `position` to `value` during the next measurement only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub position: usize,
    pub value: bool,
}

/// A PUF instance. Single client: measuring consumes the pending fault.
#[derive(Clone, Debug)]
pub struct PufDevice {
    secret_w: Vec<bool>,
    noise: NoiseModel,
    pending_fault: Option<FaultSpec>,
    rng: ChaCha8Rng,
}

impl PufDevice {
    pub fn new(secret_w: Vec<bool>) -> Self {
        Self::with_noise(secret_w, NoiseModel::None, 0)
    }

    pub fn with_noise(secret_w: Vec<bool>, noise: NoiseModel, seed: u64) -> Self {
        PufDevice {
            secret_w,
            noise,
            pending_fault: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A device whose response is drawn from `seed`.
    pub fn random(width: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = (0..width).map(|_| rng.gen()).collect();
        PufDevice {
            secret_w: w,
            noise: NoiseModel::None,
            pending_fault: None,
            rng,
        }
    }

    pub fn width(&self) -> usize {
        self.secret_w.len()
    }

    /// Ground truth, for enrollment and for scoring attacks.
    pub fn secret_w(&self) -> &[bool] {
        &self.secret_w
    }

    pub fn pending_fault(&self) -> Option<FaultSpec> {
        self.pending_fault
    }

    /// Arms a fault for the next measurement, replacing any earlier one.
    pub fn inject_fault(&mut self, fault: FaultSpec) -> Result<()> {
        if fault.position >= self.secret_w.len() {
            return Err(Error::PositionOutOfRange {
                position: fault.position,
                len: self.secret_w.len(),
            });
        }
        self.pending_fault = Some(fault);
        Ok(())
    }

    pub fn measure(&mut self) -> Vec<bool> {
        let mut out = self.secret_w.clone();
        if let Some(f) = self.pending_fault.take() {
            out[f.position] = f.value;
        }
        if let NoiseModel::Bernoulli(p) = self.noise {
            for b in out.iter_mut() {
                if self.rng.gen_bool(p.clamp(0.0, 1.0)) {
                    *b ^= true;
                }
            }
        }
        out
    }
}
