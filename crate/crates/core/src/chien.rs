//! Chien search shared by both decoders.

use crate::gf::{GfContext, GfPoly};

/// Outcome of scanning every nonzero field element for roots of σ(x).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChienSearch {
    /// Positions `j < n` with σ(α^-j) = 0, ascending.
    pub positions: Vec<usize>,
    /// Roots found anywhere in the field, including positions past a shortened code.
    pub roots: usize,
    /// Number of σ evaluations performed; always `2^m - 1`.
    pub evaluations: usize,
}

impl ChienSearch {
    /// True when the root set is consistent with a locator of degree `deg σ`
    /// whose roots all fall inside the codeword.
    pub fn is_consistent(&self, sigma: &GfPoly) -> bool {
        sigma.degree() >= 0
            && self.roots == sigma.degree() as usize
            && self.positions.len() == self.roots
    }
}

/// Evaluates σ at α^-j for all j in 0..2^m-1. No early exit on root count.
pub fn chien_search(gf: &GfContext, sigma: &GfPoly, n: usize) -> ChienSearch {
    let mut positions = Vec::new();
    let mut roots = 0;
    let mut evaluations = 0;
    for j in 0..gf.order() {
        evaluations += 1;
        if sigma.eval(gf, gf.alpha_pow(-(j as i64))) == 0 {
            roots += 1;
            if j < n {
                positions.push(j);
            }
        }
    }
    ChienSearch {
        positions,
        roots,
        evaluations,
    }
}
