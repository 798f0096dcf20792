//! Reed-Solomon codec over GF(2^8): syndrome calculator, Euclidean key
//! equation solver, Chien search, Forney error values and correction.
//!
//! Symbol `j` of a word is the coefficient of `x^j`. Encoding is systematic
//! with the 2t check symbols at positions `0..2t`. The generator is
//! `g(x) = (x - α)(x - α^2)···(x - α^2t)`.
//!
//! The Euclidean stage is modelled the way a register-level implementation
//! runs it: the two working polynomials carry register-tracked ("formal")
//! degrees, and each iteration either cancels one leading coefficient or, when
//! the divisor's leading register holds zero, shifts the divisor down one
//! degree. It stops once the smaller formal degree drops below t. With ν
//! correctable errors this takes exactly t + ν iterations, which is the timing
//! leak: under the speed-optimized profile the decode latency reveals ν.

use std::collections::BTreeMap;

use crate::chien::{chien_search, ChienSearch};
use crate::codec::DecodeStatus;
use crate::error::{Error, Result};
use crate::gf::{Element, GfContext, GfPoly};
use crate::timing::{TimingMode, TimingProfile};

#[derive(Clone, Debug)]
pub struct RsConfig {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub symbol_bits: usize,
    pub gf: GfContext,
    pub generator: GfPoly,
    pub timing: TimingProfile,
}

impl RsConfig {
    pub fn new(n: usize, k: usize, t: usize, gf: GfContext, timing: TimingProfile) -> Result<Self> {
        if t == 0 || n < k || n - k != 2 * t {
            return Err(Error::InvalidConfig(format!(
                "RS requires n - k = 2t (n={n}, k={k}, t={t})"
            )));
        }
        if k == 0 || n > gf.order() {
            return Err(Error::InvalidConfig(format!(
                "RS n={n} exceeds 2^{} - 1 or k is zero",
                gf.m()
            )));
        }
        let generator = (1..=2 * t as i64).fold(GfPoly::one(), |g, i| {
            g.mul(&gf, &GfPoly::new(vec![gf.alpha_pow(i), 1]))
        });
        let symbol_bits = gf.m() as usize;
        Ok(Self {
            n,
            k,
            t,
            symbol_bits,
            gf,
            generator,
            timing,
        })
    }

    /// RS(8,4) over GF(256), t = 2, with the given preset.
    pub fn paper(profile: &str) -> Result<Self> {
        Self::new(8, 4, 2, GfContext::gf256(), TimingProfile::preset(profile)?)
    }

    /// Upper bound on Euclidean iterations for any input, reached at ν = t.
    pub fn ea_iteration_budget(&self) -> u64 {
        2 * self.t as u64
    }

    /// Latency charged for a decode, given whether any syndrome was nonzero and
    /// how many solver iterations ran.
    pub fn decode_cycles(&self, syndromes_nonzero: bool, ea_iterations: u64) -> u64 {
        let p = &self.timing;
        match p.mode {
            TimingMode::WorstCasePipelined => {
                p.syndrome
                    + p.key_solver_cycles(self.ea_iteration_budget())
                    + p.chien
                    + p.forney
                    + p.output
            }
            TimingMode::SpeedOptimized if !syndromes_nonzero => p.syndrome + p.output,
            TimingMode::SpeedOptimized => {
                p.syndrome + p.key_solver_cycles(ea_iterations) + p.chien + p.forney + p.output
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsDecodeResult {
    pub corrected: Vec<Element>,
    pub error_positions: Vec<usize>,
    pub error_values: BTreeMap<usize, Element>,
    pub status: DecodeStatus,
    pub cycles: u64,
    pub ea_iterations: u64,
    pub syndromes: Vec<Element>,
    pub sigma: GfPoly,
    pub omega: GfPoly,
    /// σ evaluations by the Chien stage; zero when it was skipped.
    pub chien_evaluations: usize,
}

fn check_symbols(word: &[Element], expected: usize, gf: &GfContext) -> Result<()> {
    if word.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: word.len(),
        });
    }
    if let Some(&bad) = word.iter().find(|&&s| s as usize >= gf.size()) {
        return Err(Error::Parse(format!(
            "symbol {bad:#x} outside GF(2^{})",
            gf.m()
        )));
    }
    Ok(())
}

pub fn rs_encode(message: &[Element], cfg: &RsConfig) -> Result<Vec<Element>> {
    check_symbols(message, cfg.k, &cfg.gf)?;
    let check = cfg.n - cfg.k;
    let shifted = GfPoly::new(message.to_vec()).shift(check);
    let parity = shifted.rem(&cfg.gf, &cfg.generator)?;
    let word = shifted.add(&parity);
    Ok((0..cfg.n).map(|j| word.coeff(j)).collect())
}

pub fn rs_extract_message(codeword: &[Element], cfg: &RsConfig) -> Result<Vec<Element>> {
    check_symbols(codeword, cfg.n, &cfg.gf)?;
    Ok(codeword[cfg.n - cfg.k..].to_vec())
}

/// `S_i = r(α^i)` for i = 1..2t.
pub fn rs_syndromes(received: &[Element], cfg: &RsConfig) -> Result<Vec<Element>> {
    check_symbols(received, cfg.n, &cfg.gf)?;
    let gf = &cfg.gf;
    Ok((1..=2 * cfg.t as i64)
        .map(|i| {
            let x = gf.alpha_pow(i);
            received.iter().rev().fold(0, |acc, &c| gf.mul(acc, x) ^ c)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyEquation {
    /// Error locator, normalized so σ(0) = 1 whenever that is possible.
    pub sigma: GfPoly,
    /// Error evaluator, ω ≡ S·σ mod x^2t.
    pub omega: GfPoly,
    pub iterations: u64,
}

/// Working polynomial of the Euclidean stage with its degree register.
struct Lane {
    rem: Vec<Element>,
    mult: GfPoly,
    deg: usize,
}

/// Euclidean key-equation solver seeded with `R = x^2t` and `Q = S(x)`.
pub fn rs_euclid_key_solver(syndromes: &[Element], cfg: &RsConfig) -> Result<KeyEquation> {
    let two_t = 2 * cfg.t;
    if syndromes.len() != two_t {
        return Err(Error::LengthMismatch {
            expected: two_t,
            got: syndromes.len(),
        });
    }
    if syndromes.iter().all(|&s| s == 0) {
        return Ok(KeyEquation {
            sigma: GfPoly::one(),
            omega: GfPoly::zero(),
            iterations: 0,
        });
    }
    let gf = &cfg.gf;
    let t = cfg.t;

    let mut r = Lane {
        rem: vec![0; two_t + 1],
        mult: GfPoly::zero(),
        deg: two_t,
    };
    r.rem[two_t] = 1;
    let mut q = Lane {
        rem: syndromes.to_vec(),
        mult: GfPoly::one(),
        deg: two_t - 1,
    };
    q.rem.push(0);
    let mut iterations = 0u64;

    loop {
        if r.deg < q.deg {
            std::mem::swap(&mut r, &mut q);
        }
        if q.deg < t {
            break;
        }
        let lead_q = q.rem[q.deg];
        if lead_q == 0 {
            q.deg -= 1;
        } else {
            // r <- lead_q·r - lead_r·x^shift·q cancels r's leading register
            let lead_r = r.rem[r.deg];
            let shift = r.deg - q.deg;
            for c in r.rem.iter_mut() {
                *c = gf.mul(*c, lead_q);
            }
            for (i, &qc) in q.rem.iter().enumerate().take(q.deg + 1) {
                r.rem[i + shift] ^= gf.mul(lead_r, qc);
            }
            r.mult = r
                .mult
                .scale(gf, lead_q)
                .add(&q.mult.shift(shift).scale(gf, lead_r));
            debug_assert_eq!(r.rem[r.deg], 0);
            r.deg -= 1;
        }
        iterations += 1;
        debug_assert!(iterations <= 2 * two_t as u64);
    }

    let sigma = q.mult;
    let omega = GfPoly::new(q.rem);
    let c0 = sigma.coeff(0);
    let (sigma, omega) = if c0 != 0 {
        let norm = gf.inv(c0)?;
        (sigma.scale(gf, norm), omega.scale(gf, norm))
    } else {
        (sigma, omega)
    };
    Ok(KeyEquation {
        sigma,
        omega,
        iterations,
    })
}

pub fn rs_chien_search(sigma: &GfPoly, cfg: &RsConfig) -> ChienSearch {
    chien_search(&cfg.gf, sigma, cfg.n)
}

/// Error values `e_j = ω(X_j^-1) / σ'(X_j^-1)` (the sign vanishes in characteristic 2).
pub fn rs_forney(
    sigma: &GfPoly,
    omega: &GfPoly,
    positions: &[usize],
    cfg: &RsConfig,
) -> Result<BTreeMap<usize, Element>> {
    let gf = &cfg.gf;
    let d_sigma = sigma.formal_derivative();
    positions
        .iter()
        .map(|&j| {
            let x_inv = gf.alpha_pow(-(j as i64));
            let den = d_sigma.eval(gf, x_inv);
            if den == 0 {
                return Err(Error::ForneyDivideByZero { position: j });
            }
            Ok((j, gf.div(omega.eval(gf, x_inv), den)?))
        })
        .collect()
}

pub fn rs_decode(received: &[Element], cfg: &RsConfig) -> Result<RsDecodeResult> {
    let syndromes = rs_syndromes(received, cfg)?;
    let nonzero = syndromes.iter().any(|&s| s != 0);
    let KeyEquation {
        sigma,
        omega,
        iterations,
    } = rs_euclid_key_solver(&syndromes, cfg)?;
    let cycles = cfg.decode_cycles(nonzero, iterations);

    let mut result = RsDecodeResult {
        corrected: received.to_vec(),
        error_positions: Vec::new(),
        error_values: BTreeMap::new(),
        status: DecodeStatus::Ok,
        cycles,
        ea_iterations: iterations,
        syndromes,
        sigma,
        omega,
        chien_evaluations: 0,
    };
    if !nonzero {
        return Ok(result);
    }

    let chien = rs_chien_search(&result.sigma, cfg);
    result.chien_evaluations = chien.evaluations;
    let locator_ok = chien.is_consistent(&result.sigma)
        && result.sigma.degree() as usize <= cfg.t
        && result.sigma.coeff(0) == 1;
    let values = if locator_ok {
        rs_forney(&result.sigma, &result.omega, &chien.positions, cfg).ok()
    } else {
        None
    };
    match values {
        Some(values) if values.values().all(|&v| v != 0) => {
            for (&j, &v) in &values {
                result.corrected[j] ^= v;
            }
            result.error_positions = chien.positions;
            result.error_values = values;
        }
        _ => result.status = DecodeStatus::Uncorrectable,
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> RsConfig {
        RsConfig::paper("paper-rs").unwrap()
    }

    fn random_msg(rng: &mut ChaCha8Rng) -> Vec<Element> {
        (0..4).map(|_| rng.gen_range(0..256)).collect()
    }

    #[test]
    fn config_validation() {
        let tp = TimingProfile::preset("paper-rs").unwrap();
        assert!(RsConfig::new(8, 5, 2, GfContext::gf256(), tp.clone()).is_err());
        assert!(RsConfig::new(16, 12, 2, GfContext::gf16(), tp.clone()).is_err());
        assert!(RsConfig::new(255, 251, 2, GfContext::gf256(), tp).is_ok());
    }

    #[test]
    fn generator_roots() {
        let c = cfg();
        assert_eq!(c.generator.degree(), 4);
        for i in 1..=4 {
            assert_eq!(c.generator.eval(&c.gf, c.gf.alpha_pow(i)), 0);
        }
    }

    #[test]
    fn encode_properties() {
        let c = cfg();
        assert_eq!(rs_encode(&[0; 4], &c).unwrap(), vec![0; 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let m1 = random_msg(&mut rng);
            let m2 = random_msg(&mut rng);
            let c1 = rs_encode(&m1, &c).unwrap();
            let c2 = rs_encode(&m2, &c).unwrap();
            let sum: Vec<_> = m1.iter().zip(&m2).map(|(a, b)| a ^ b).collect();
            let c12: Vec<_> = c1.iter().zip(&c2).map(|(a, b)| a ^ b).collect();
            assert_eq!(rs_encode(&sum, &c).unwrap(), c12);
            assert_eq!(rs_syndromes(&c1, &c).unwrap(), vec![0; 4]);
            assert_eq!(rs_extract_message(&c1, &c).unwrap(), m1);
        }
        assert!(rs_encode(&[0; 3], &c).is_err());
        assert!(rs_encode(&[0, 0, 0, 256], &c).is_err());
    }

    #[test]
    fn single_error_syndromes() {
        let c = cfg();
        let cw = rs_encode(&[9, 8, 7, 6], &c).unwrap();
        for j in 0..8 {
            for v in [1u16, 0x53, 0xFF] {
                let mut e = vec![0; 8];
                e[j] = v;
                let r: Vec<_> = cw.iter().zip(&e).map(|(a, b)| a ^ b).collect();
                let s = rs_syndromes(&r, &c).unwrap();
                assert_eq!(s, rs_syndromes(&e, &c).unwrap());
                let expected: Vec<_> = (1..=4)
                    .map(|i| c.gf.mul(v, c.gf.alpha_pow(i * j as i64)))
                    .collect();
                assert_eq!(s, expected);
            }
        }
    }

    fn residue_holds(s: &[Element], ke: &KeyEquation, c: &RsConfig) -> bool {
        GfPoly::new(s.to_vec())
            .mul(&c.gf, &ke.sigma)
            .truncate(2 * c.t)
            == ke.omega
    }

    #[test]
    fn euclid_zero_syndromes() {
        let ke = rs_euclid_key_solver(&[0; 4], &cfg()).unwrap();
        assert_eq!(
            ke,
            KeyEquation {
                sigma: GfPoly::one(),
                omega: GfPoly::zero(),
                iterations: 0
            }
        );
    }

    #[test]
    fn euclid_iterations_factor_through_error_count() {
        let c = cfg();
        for j in 0..8 {
            for v in 1..256u16 {
                let mut e = vec![0; 8];
                e[j] = v;
                let s = rs_syndromes(&e, &c).unwrap();
                let ke = rs_euclid_key_solver(&s, &c).unwrap();
                assert_eq!(ke.sigma.degree(), 1);
                assert_eq!(ke.iterations, 3);
                assert!(residue_holds(&s, &ke, &c));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for a in 0..8 {
            for b in a + 1..8 {
                for _ in 0..200 {
                    let mut e = vec![0; 8];
                    e[a] = rng.gen_range(1..256);
                    e[b] = rng.gen_range(1..256);
                    let s = rs_syndromes(&e, &c).unwrap();
                    let ke = rs_euclid_key_solver(&s, &c).unwrap();
                    assert_eq!(ke.sigma.degree(), 2);
                    assert_eq!(ke.iterations, 4);
                    assert!(residue_holds(&s, &ke, &c));
                }
            }
        }
    }

    #[test]
    fn euclid_handles_vanishing_top_syndrome() {
        // choose e_b so that S_4 = e_a α^4a + e_b α^4b = 0
        let c = cfg();
        let gf = &c.gf;
        let (a, b, va) = (1usize, 5usize, 0x37u16);
        let vb = gf
            .div(
                gf.mul(va, gf.alpha_pow(4 * a as i64)),
                gf.alpha_pow(4 * b as i64),
            )
            .unwrap();
        let mut e = vec![0; 8];
        e[a] = va;
        e[b] = vb;
        let s = rs_syndromes(&e, &c).unwrap();
        assert_eq!(s[3], 0);
        let ke = rs_euclid_key_solver(&s, &c).unwrap();
        assert_eq!(ke.iterations, 4);
        let out = rs_decode(&e, &c).unwrap();
        assert_eq!(out.corrected, vec![0; 8]);
        assert_eq!(out.cycles, 72);
    }

    #[test]
    fn forney_recovers_every_single_error_value() {
        let c = cfg();
        assert!(rs_forney(&GfPoly::one(), &GfPoly::zero(), &[], &c)
            .unwrap()
            .is_empty());
        for j in 0..8 {
            for v in 1..256u16 {
                let mut e = vec![0; 8];
                e[j] = v;
                let s = rs_syndromes(&e, &c).unwrap();
                let ke = rs_euclid_key_solver(&s, &c).unwrap();
                let pos = rs_chien_search(&ke.sigma, &c).positions;
                assert_eq!(pos, vec![j]);
                let vals = rs_forney(&ke.sigma, &ke.omega, &pos, &c).unwrap();
                assert_eq!(vals, BTreeMap::from([(j, v)]));
            }
        }
    }

    #[test]
    fn forney_rejects_degenerate_locator() {
        let c = cfg();
        // σ = 1 + x^2 has σ' = 0 everywhere
        let sigma = GfPoly::new(vec![1, 0, 1]);
        assert!(matches!(
            rs_forney(&sigma, &GfPoly::one(), &[0], &c),
            Err(Error::ForneyDivideByZero { position: 0 })
        ));
    }

    #[test]
    fn decode_cycles_by_error_count() {
        let c = cfg();
        let cw = rs_encode(&[1, 2, 3, 4], &c).unwrap();
        let out = rs_decode(&cw, &c).unwrap();
        assert_eq!(
            (out.cycles, out.status, out.chien_evaluations),
            (38, DecodeStatus::Ok, 0)
        );
        let mut r = cw.clone();
        r[3] ^= 0x40;
        let out = rs_decode(&r, &c).unwrap();
        assert_eq!((out.cycles, out.error_positions.clone()), (66, vec![3]));
        assert_eq!(out.corrected, cw);
        r[6] ^= 0x01;
        let out = rs_decode(&r, &c).unwrap();
        assert_eq!(out.cycles, 72);
        assert_eq!(out.corrected, cw);
        assert_eq!(out.error_values, BTreeMap::from([(3, 0x40), (6, 0x01)]));
    }

    #[test]
    fn worst_case_profile_is_constant() {
        let c = RsConfig::paper("paper-rs-worstcase").unwrap();
        let cw = rs_encode(&[1, 2, 3, 4], &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for nu in 0..=4usize {
            let mut r = cw.clone();
            for j in 0..nu {
                r[j * 2] ^= rng.gen_range(1..256);
            }
            assert_eq!(rs_decode(&r, &c).unwrap().cycles, 72);
        }
    }

    #[test]
    fn three_errors_never_silently_succeed_into_wrong_time_class() {
        let c = cfg();
        let cw = rs_encode(&[5, 6, 7, 8], &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let mut r = cw.clone();
            for j in [0usize, 3, 7] {
                r[j] ^= rng.gen_range(1..256);
            }
            let out = rs_decode(&r, &c).unwrap();
            // three errors in an (8,4) code: either detected, or miscorrected
            // to a different codeword at distance <= 2
            assert_ne!(out.corrected, cw);
            if out.status == DecodeStatus::Ok {
                assert_eq!(rs_syndromes(&out.corrected, &c).unwrap(), vec![0; 4]);
            }
        }
    }
}
