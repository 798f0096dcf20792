//! Binary BCH codec: syndrome calculator, Berlekamp-Massey key equation
//! solver, Chien search and XOR correction.
//!
//! The default configuration is the narrow-sense BCH(15,7) code with t = 2,
//! shortened by three positions to (12,4). Codeword bit `j` is the coefficient
//! of `x^j`; check bits occupy positions `0..n-k` and the message bits the
//! remaining `k` positions.
//!
//! Every stage runs for every input, so the reported cycle count is a
//! function of the configuration alone.

use serde::{Deserialize, Serialize};

use crate::chien::{chien_search, ChienSearch};
use crate::codec::DecodeStatus;
use crate::error::{Error, Result};
use crate::gf::{Element, GfContext, GfPoly};
use crate::timing::TimingProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BmaMode {
    /// One discrepancy multiply-accumulate per clock: t clocks per BMA step.
    Serial,
    /// All discrepancy terms in one clock.
    Parallel,
}

#[derive(Clone, Debug)]
pub struct BchConfig {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub gf: GfContext,
    /// Generator polynomial with 0/1 coefficients, degree `n - k`.
    pub generator: GfPoly,
    pub bma_mode: BmaMode,
    pub timing: TimingProfile,
}

fn binomial(n: usize, r: usize) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl BchConfig {
    pub fn new(
        n: usize,
        k: usize,
        t: usize,
        gf: GfContext,
        bma_mode: BmaMode,
        timing: TimingProfile,
    ) -> Result<Self> {
        let full = gf.order();
        if t == 0 || n == 0 || n > full {
            return Err(Error::InvalidConfig(format!(
                "BCH n={n}, t={t} invalid for GF(2^{})",
                gf.m()
            )));
        }
        let generator = Self::narrow_sense_generator(&gf, t);
        let check_bits = generator.degree() as usize;
        if n <= check_bits || k != n - check_bits {
            return Err(Error::InvalidConfig(format!(
                "BCH generator for t={t} has degree {check_bits}; n={n} requires k={}, got k={k}",
                n.saturating_sub(check_bits)
            )));
        }
        let ball: u128 = (0..=t).map(|i| binomial(n, i)).sum();
        if ball > 1u128 << (n - k) {
            return Err(Error::InvalidConfig(format!(
                "Hamming bound violated: {ball} > 2^{}",
                n - k
            )));
        }
        let mut cyclic = vec![0 as Element; full + 1];
        cyclic[0] = 1;
        cyclic[full] = 1;
        if !GfPoly::new(cyclic).rem(&gf, &generator)?.is_zero() {
            return Err(Error::InvalidConfig(
                "generator does not divide x^N - 1".into(),
            ));
        }
        Ok(Self {
            n,
            k,
            t,
            gf,
            generator,
            bma_mode,
            timing,
        })
    }

    /// Shortened (12,4) code with t = 2 over GF(16).
    pub fn paper(bma_mode: BmaMode) -> Self {
        let profile = match bma_mode {
            BmaMode::Serial => "paper-bch-serial",
            BmaMode::Parallel => "paper-bch-parallel",
        };
        Self::new(
            12,
            4,
            2,
            GfContext::gf16(),
            bma_mode,
            TimingProfile::preset(profile).expect("bundled preset"),
        )
        .expect("paper BCH parameters are valid")
    }

    /// Product of the minimal polynomials of α^1 .. α^2t (each cyclotomic coset once).
    fn narrow_sense_generator(gf: &GfContext, t: usize) -> GfPoly {
        let full = gf.order();
        let mut covered = vec![false; full];
        let mut g = GfPoly::one();
        for i in 1..=2 * t {
            let start = i % full;
            if covered[start] {
                continue;
            }
            let mut j = start;
            loop {
                covered[j] = true;
                g = g.mul(gf, &GfPoly::new(vec![gf.alpha_pow(j as i64), 1]));
                j = (2 * j) % full;
                if j == start {
                    break;
                }
            }
        }
        debug_assert!(g.coeffs().iter().all(|&c| c <= 1));
        g
    }

    /// Key-equation solver iterations: 2t (parallel) or 2t² (serial).
    pub fn bma_iterations(&self) -> u64 {
        let steps = 2 * self.t as u64;
        match self.bma_mode {
            BmaMode::Parallel => steps,
            BmaMode::Serial => steps * self.t as u64,
        }
    }

    /// The decode latency; identical for every received word.
    pub fn decode_cycles(&self) -> u64 {
        let p = &self.timing;
        p.syndrome + p.key_solver_cycles(self.bma_iterations()) + p.chien + p.forney + p.output
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub corrected: Vec<bool>,
    pub error_positions: Vec<usize>,
    pub status: DecodeStatus,
    pub cycles: u64,
    pub syndromes: Vec<Element>,
    pub sigma: GfPoly,
    pub bma_iterations: u64,
    pub chien_evaluations: usize,
}

fn check_len(bits: &[bool], expected: usize) -> Result<()> {
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: bits.len(),
        });
    }
    Ok(())
}

pub fn bch_encode(message: &[bool], cfg: &BchConfig) -> Result<Vec<bool>> {
    check_len(message, cfg.k)?;
    let check = cfg.n - cfg.k;
    let shifted = GfPoly::new(message.iter().map(|&b| b as Element).collect()).shift(check);
    let parity = shifted.rem(&cfg.gf, &cfg.generator)?;
    let word = shifted.add(&parity);
    Ok((0..cfg.n).map(|j| word.coeff(j) != 0).collect())
}

/// The message bits of a codeword.
pub fn bch_extract_message(codeword: &[bool], cfg: &BchConfig) -> Result<Vec<bool>> {
    check_len(codeword, cfg.n)?;
    Ok(codeword[cfg.n - cfg.k..].to_vec())
}

/// `S_i = r(α^i)` for i = 1..2t.
pub fn bch_syndromes(received: &[bool], cfg: &BchConfig) -> Result<Vec<Element>> {
    check_len(received, cfg.n)?;
    let gf = &cfg.gf;
    Ok((1..=2 * cfg.t as i64)
        .map(|i| {
            received
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .fold(0, |acc, (j, _)| acc ^ gf.alpha_pow(i * j as i64))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BmaOutcome {
    pub sigma: GfPoly,
    pub iterations: u64,
}

/// Berlekamp-Massey over the 2t syndromes.
///
/// The algorithm always takes 2t steps. In serial mode each step's
/// discrepancy is accumulated over t clocked micro-steps, coefficient slot `s`
/// being handled in micro-step `(s - 1) % t`.
pub fn bch_key_equation_bma(syndromes: &[Element], cfg: &BchConfig) -> Result<BmaOutcome> {
    if syndromes.len() != 2 * cfg.t {
        return Err(Error::LengthMismatch {
            expected: 2 * cfg.t,
            got: syndromes.len(),
        });
    }
    let gf = &cfg.gf;
    let t = cfg.t;
    let mut c = vec![1 as Element];
    let mut b = vec![1 as Element];
    let mut l = 0usize;
    let mut gap = 1usize;
    let mut last_d: Element = 1;
    let mut iterations = 0u64;

    for r in 0..syndromes.len() {
        let term = |i: usize| -> Element {
            if i < c.len() && i <= r {
                gf.mul(c[i], syndromes[r - i])
            } else {
                0
            }
        };
        let mut d = syndromes[r];
        match cfg.bma_mode {
            BmaMode::Parallel => {
                d ^= (1..c.len()).fold(0, |acc, i| acc ^ term(i));
                iterations += 1;
            }
            BmaMode::Serial => {
                for micro in 0..t {
                    let mut slot = micro + 1;
                    while slot < c.len() {
                        d ^= term(slot);
                        slot += t;
                    }
                    iterations += 1;
                }
            }
        }

        if d == 0 {
            gap += 1;
            continue;
        }
        let coef = gf.div(d, last_d)?;
        let mut next = c.clone();
        if next.len() < b.len() + gap {
            next.resize(b.len() + gap, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + gap] ^= gf.mul(coef, bi);
        }
        if 2 * l <= r {
            l = r + 1 - l;
            b = std::mem::replace(&mut c, next);
            last_d = d;
            gap = 1;
        } else {
            c = next;
            gap += 1;
        }
    }
    Ok(BmaOutcome {
        sigma: GfPoly::new(c),
        iterations,
    })
}

pub fn bch_chien_search(sigma: &GfPoly, cfg: &BchConfig) -> ChienSearch {
    chien_search(&cfg.gf, sigma, cfg.n)
}

pub fn bch_decode(received: &[bool], cfg: &BchConfig) -> Result<DecodeResult> {
    let syndromes = bch_syndromes(received, cfg)?;
    let BmaOutcome { sigma, iterations } = bch_key_equation_bma(&syndromes, cfg)?;
    let chien = bch_chien_search(&sigma, cfg);
    debug_assert_eq!(iterations, cfg.bma_iterations());

    let correctable = chien.is_consistent(&sigma) && sigma.degree() as usize <= cfg.t;
    let (corrected, error_positions, status) = if correctable {
        let mut corrected = received.to_vec();
        for &j in &chien.positions {
            corrected[j] ^= true;
        }
        (corrected, chien.positions.clone(), DecodeStatus::Ok)
    } else {
        (received.to_vec(), Vec::new(), DecodeStatus::Uncorrectable)
    };
    Ok(DecodeResult {
        corrected,
        error_positions,
        status,
        cycles: cfg.decode_cycles(),
        syndromes,
        sigma,
        bma_iterations: iterations,
        chien_evaluations: chien.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(v: u32, k: usize) -> Vec<bool> {
        (0..k).map(|i| (v >> i) & 1 == 1).collect()
    }

    fn all_codewords(cfg: &BchConfig) -> Vec<Vec<bool>> {
        (0..1u32 << cfg.k)
            .map(|v| bch_encode(&msg(v, cfg.k), cfg).unwrap())
            .collect()
    }

    #[test]
    fn generator_is_bch_15_7() {
        let cfg = BchConfig::paper(BmaMode::Serial);
        // (x^4+x+1)(x^4+x^3+x^2+x+1) = x^8+x^7+x^6+x^4+1
        assert_eq!(cfg.generator, GfPoly::new(vec![1, 0, 0, 0, 1, 0, 1, 1, 1]));
        assert_eq!((cfg.n, cfg.k, cfg.t), (12, 4, 2));
    }

    #[test]
    fn config_validation() {
        let tp = TimingProfile::preset("paper-bch-serial").unwrap();
        // the 8-bit message reading is impossible for t = 2
        assert!(BchConfig::new(12, 8, 2, GfContext::gf16(), BmaMode::Serial, tp.clone()).is_err());
        assert!(BchConfig::new(16, 8, 2, GfContext::gf16(), BmaMode::Serial, tp.clone()).is_err());
        assert!(BchConfig::new(15, 7, 2, GfContext::gf16(), BmaMode::Serial, tp.clone()).is_ok());
        assert!(BchConfig::new(15, 11, 1, GfContext::gf16(), BmaMode::Serial, tp).is_ok());
    }

    #[test]
    fn encode_zero_and_linearity() {
        let cfg = BchConfig::paper(BmaMode::Serial);
        assert!(bch_encode(&msg(0, 4), &cfg).unwrap().iter().all(|&b| !b));
        for a in 0..16 {
            for b in 0..16 {
                let ca = bch_encode(&msg(a, 4), &cfg).unwrap();
                let cb = bch_encode(&msg(b, 4), &cfg).unwrap();
                let cab = bch_encode(&msg(a ^ b, 4), &cfg).unwrap();
                let sum: Vec<bool> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
                assert_eq!(sum, cab);
            }
        }
        assert!(bch_encode(&msg(0, 3), &cfg).is_err());
    }

    #[test]
    fn codewords_have_zero_syndromes_and_are_systematic() {
        let cfg = BchConfig::paper(BmaMode::Serial);
        for v in 0..16 {
            let c = bch_encode(&msg(v, 4), &cfg).unwrap();
            assert_eq!(bch_syndromes(&c, &cfg).unwrap(), vec![0; 4]);
            assert_eq!(bch_extract_message(&c, &cfg).unwrap(), msg(v, 4));
        }
    }

    #[test]
    fn syndromes_depend_only_on_error() {
        let cfg = BchConfig::paper(BmaMode::Serial);
        let gf = &cfg.gf;
        for c in all_codewords(&cfg) {
            for j in 0..12 {
                let mut e = vec![false; 12];
                e[j] = true;
                let r: Vec<bool> = c.iter().zip(&e).map(|(a, b)| a ^ b).collect();
                let s = bch_syndromes(&r, &cfg).unwrap();
                assert_eq!(s, bch_syndromes(&e, &cfg).unwrap());
                let expected: Vec<_> = (1..=4).map(|i| gf.alpha_pow(i * j as i64)).collect();
                assert_eq!(s, expected);
            }
        }
    }

    #[test]
    fn bma_examples() {
        for (mode, iters) in [(BmaMode::Parallel, 4), (BmaMode::Serial, 8)] {
            let cfg = BchConfig::paper(mode);
            let out = bch_key_equation_bma(&[0; 4], &cfg).unwrap();
            assert_eq!(out.sigma, GfPoly::one());
            assert_eq!(out.iterations, iters);
            for j in 0..12 {
                let mut e = vec![false; 12];
                e[j] = true;
                let s = bch_syndromes(&e, &cfg).unwrap();
                let out = bch_key_equation_bma(&s, &cfg).unwrap();
                assert_eq!(out.sigma, GfPoly::new(vec![1, cfg.gf.alpha_pow(j as i64)]));
                assert_eq!(out.sigma.eval(&cfg.gf, cfg.gf.alpha_pow(-(j as i64))), 0);
                assert_eq!(out.iterations, iters);
            }
        }
    }

    #[test]
    fn chien_finds_every_double_error() {
        let cfg = BchConfig::paper(BmaMode::Parallel);
        assert!(bch_chien_search(&GfPoly::one(), &cfg).positions.is_empty());
        for a in 0..12 {
            for b in a + 1..12 {
                let mut e = vec![false; 12];
                e[a] = true;
                e[b] = true;
                let s = bch_syndromes(&e, &cfg).unwrap();
                let sigma = bch_key_equation_bma(&s, &cfg).unwrap().sigma;
                let c = bch_chien_search(&sigma, &cfg);
                assert_eq!(c.positions, vec![a, b]);
                assert_eq!(c.evaluations, 15);
            }
        }
    }

    /// Nearest codeword by exhaustive comparison against all 16 codewords.
    fn brute_force_decode(r: &[bool], codewords: &[Vec<bool>]) -> Vec<bool> {
        codewords
            .iter()
            .min_by_key(|c| c.iter().zip(r).filter(|(a, b)| a != b).count())
            .unwrap()
            .clone()
    }

    #[test]
    fn decode_matches_brute_force_on_all_correctable_words() {
        for mode in [BmaMode::Serial, BmaMode::Parallel] {
            let cfg = BchConfig::paper(mode);
            let cws = all_codewords(&cfg);
            let mut count = 0;
            let mut patterns: Vec<Vec<usize>> = vec![vec![]];
            patterns.extend((0..12).map(|a| vec![a]));
            patterns.extend((0..12).flat_map(|a| (a + 1..12).map(move |b| vec![a, b])));
            for c in &cws {
                for p in &patterns {
                    let mut r = c.clone();
                    for &j in p {
                        r[j] ^= true;
                    }
                    let out = bch_decode(&r, &cfg).unwrap();
                    assert_eq!(out.status, DecodeStatus::Ok);
                    assert_eq!(out.corrected, *c);
                    assert_eq!(out.corrected, brute_force_decode(&r, &cws));
                    assert_eq!(out.error_positions, *p);
                    assert_eq!(out.cycles, cfg.decode_cycles());
                    count += 1;
                }
            }
            assert_eq!(count, 1264);
        }
    }

    #[test]
    fn cycle_totals() {
        assert_eq!(BchConfig::paper(BmaMode::Serial).decode_cycles(), 28);
        assert_eq!(BchConfig::paper(BmaMode::Parallel).decode_cycles(), 21);
    }

    #[test]
    fn uncorrectable_leaves_word_and_time_unchanged() {
        let cfg = BchConfig::paper(BmaMode::Serial);
        let mut seen_uncorrectable = 0;
        for bits in 0u32..1 << 12 {
            let r = msg(bits, 12);
            let out = bch_decode(&r, &cfg).unwrap();
            assert_eq!(out.cycles, 28);
            assert_eq!(out.chien_evaluations, 15);
            match out.status {
                DecodeStatus::Uncorrectable => {
                    assert_eq!(out.corrected, r);
                    seen_uncorrectable += 1;
                }
                DecodeStatus::Ok => {
                    assert!(out.error_positions.len() <= 2);
                    let d = out.corrected.iter().zip(&r).filter(|(a, b)| a != b).count();
                    assert_eq!(d, out.error_positions.len());
                    assert_eq!(bch_syndromes(&out.corrected, &cfg).unwrap(), vec![0; 4]);
                }
            }
        }
        // 4096 words, 16 * 79 within distance 2 of a codeword
        assert_eq!(seen_uncorrectable, 4096 - 1264);
    }
}
