//! Arithmetic over GF(2^m) and polynomials with coefficients in that field.
//!
//! Elements are stored as unsigned integers where bit `i` is the coefficient of
//! `x^i` in the polynomial-basis representation. Multiplication goes through
//! discrete log / antilog tables built from a primitive reduction polynomial.

use crate::error::{Error, Result};

/// A field element. Only the low `m` bits are meaningful.
pub type Element = u16;

/// x^4 + x + 1
pub const GF16_POLY: u32 = 0x13;
/// x^8 + x^4 + x^3 + x^2 + 1
pub const GF256_POLY: u32 = 0x11D;

/// Parameters and lookup tables for GF(2^m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GfContext {
    m: u32,
    reduction_poly: u32,
    /// `exp[i] = α^i`, stored twice over so `exp[log a + log b]` needs no reduction.
    exp: Vec<Element>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
}

impl GfContext {
    /// Builds the tables, rejecting reduction polynomials for which `α = x` is
    /// not a generator of the multiplicative group.
    pub fn new(m: u32, reduction_poly: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::InvalidConfig(format!(
                "field width m={m} outside 2..=16"
            )));
        }
        if reduction_poly >> m != 1 {
            return Err(Error::InvalidConfig(format!(
                "reduction polynomial {reduction_poly:#x} does not have degree {m}"
            )));
        }
        let size = 1usize << m;
        let order = size - 1;
        let mut exp = vec![0 as Element; 2 * order];
        let mut log = vec![u32::MAX; size];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            if log[x as usize] != u32::MAX {
                return Err(Error::InvalidConfig(format!(
                    "reduction polynomial {reduction_poly:#x} is not primitive: α has order {i}"
                )));
            }
            *slot = x as Element;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= reduction_poly;
            }
        }
        if x != 1 {
            return Err(Error::InvalidConfig(format!(
                "reduction polynomial {reduction_poly:#x} is not primitive"
            )));
        }
        for i in 0..order {
            exp[order + i] = exp[i];
        }
        Ok(Self {
            m,
            reduction_poly,
            exp,
            log,
        })
    }

    pub fn gf16() -> Self {
        Self::new(4, GF16_POLY).expect("x^4+x+1 is primitive")
    }

    pub fn gf256() -> Self {
        Self::new(8, GF256_POLY).expect("0x11D is primitive")
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn reduction_poly(&self) -> u32 {
        self.reduction_poly
    }

    /// Number of field elements, `2^m`.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Order of the multiplicative group, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Element) -> Result<Element> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let l = self.log[a as usize] as usize;
        Ok(self.exp[(self.order() - l) % self.order()])
    }

    pub fn div(&self, a: Element, b: Element) -> Result<Element> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `α^e` for any integer exponent, negative exponents included.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> Element {
        let order = self.order() as i64;
        self.exp[e.rem_euclid(order) as usize]
    }

    pub fn pow(&self, a: Element, e: u64) -> Element {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * e) % self.order() as u64) as usize]
    }

    /// Discrete logarithm base α; `None` for zero.
    pub fn log(&self, a: Element) -> Option<u32> {
        if a == 0 || a as usize >= self.size() {
            None
        } else {
            Some(self.log[a as usize])
        }
    }

    pub fn antilog(&self, l: u32) -> Element {
        self.exp[l as usize % self.order()]
    }
}

/// Polynomial over GF(2^m), lowest-degree coefficient first.
///
/// The coefficient vector never carries trailing zeros, so the zero polynomial
/// is the empty vector and has degree -1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GfPoly {
    coeffs: Vec<Element>,
}

impl GfPoly {
    pub fn new(mut coeffs: Vec<Element>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// `c · x^degree`
    pub fn monomial(c: Element, degree: usize) -> Self {
        if c == 0 {
            return Self::zero();
        }
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    #[inline]
    pub fn coeff(&self, i: usize) -> Element {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &GfPoly) -> GfPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        GfPoly::new((0..len).map(|i| self.coeff(i) ^ other.coeff(i)).collect())
    }

    pub fn scale(&self, gf: &GfContext, c: Element) -> GfPoly {
        GfPoly::new(self.coeffs.iter().map(|&a| gf.mul(a, c)).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> GfPoly {
        if self.is_zero() {
            return GfPoly::zero();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        GfPoly { coeffs }
    }

    pub fn mul(&self, gf: &GfContext, other: &GfPoly) -> GfPoly {
        if self.is_zero() || other.is_zero() {
            return GfPoly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= gf.mul(a, b);
            }
        }
        GfPoly::new(out)
    }

    /// Quotient and remainder of long division by `divisor`.
    pub fn div_rem(&self, gf: &GfContext, divisor: &GfPoly) -> Result<(GfPoly, GfPoly)> {
        if divisor.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let dd = divisor.coeffs.len() - 1;
        let lead_inv = gf.inv(divisor.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((GfPoly::zero(), GfPoly::new(rem)));
        }
        let mut quot = vec![0; rem.len() - dd];
        for pos in (dd..rem.len()).rev() {
            let c = rem[pos];
            if c == 0 {
                continue;
            }
            let f = gf.mul(c, lead_inv);
            quot[pos - dd] = f;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[pos - dd + j] ^= gf.mul(f, d);
            }
        }
        Ok((GfPoly::new(quot), GfPoly::new(rem)))
    }

    /// Remainder modulo `divisor`.
    pub fn rem(&self, gf: &GfContext, divisor: &GfPoly) -> Result<GfPoly> {
        Ok(self.div_rem(gf, divisor)?.1)
    }

    /// Reduction modulo `x^k`.
    pub fn truncate(&self, k: usize) -> GfPoly {
        GfPoly::new(self.coeffs.iter().take(k).copied().collect())
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, gf: &GfContext, x: Element) -> Element {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| gf.mul(acc, x) ^ c)
    }

    /// Formal derivative in characteristic 2: only odd-degree terms survive,
    /// each dropping one degree.
    pub fn formal_derivative(&self) -> GfPoly {
        GfPoly::new(
            (1..self.coeffs.len())
                .map(|j| if j % 2 == 1 { self.coeffs[j] } else { 0 })
                .collect(),
        )
    }
}
