//! Behavioral, cycle-counting models of the BCH and Reed-Solomon decoders
//! found in memory-based PUF fuzzy extractors, together with the tooling to
//! find and exploit decode-time leakage:
//!
//! - [`gf`]: GF(2^m) and polynomial arithmetic
//! - [`bch`], [`rs`]: codecs with deterministic per-stage cycle counts
//! - [`fe`]: code-offset fuzzy extractor (generation / reconstruction)
//! - [`device`]: PUF response with transient single-bit fault injection
//! - [`campaign`]: exhaustive stimulus sweeps and T_d classification
//! - [`attack`]: fault-injection + timing attack recovering the PUF response

pub mod attack;
pub mod bch;
pub mod bits;
pub mod campaign;
pub mod chien;
pub mod codec;
pub mod device;
pub mod error;
pub mod fe;
pub mod gf;
pub mod rs;
pub mod timing;

pub use codec::{Codec, DecodeStatus};
pub use error::{Error, Result};
