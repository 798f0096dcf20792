//! Simulation campaigns over decoder stimuli and T_d classification.
//!
//! A stimulus is a valid codeword plus an error pattern, described by four
//! parameters: `codeword_value`, `error_number`, `error_position` and
//! `error_value` (symbol codecs only). A campaign varies a subset of them and
//! records the decode latency of every stimulus.
//!
//! The report has one row per non-empty subset of the varied parameters
//! (a single baseline row when nothing is varied). Within a row:
//!
//! - parameters of the subset range over all their values;
//! - `error_number`, when outside the subset and not fixed, is enumerated as
//!   separate groups (one group per error count);
//! - the remaining parameters are pinned to reference values: the fixed value
//!   if one was given, otherwise one drawn from the campaign seed. Pinned
//!   positions and values form a list of length t whose first ν entries are
//!   used for a ν-error stimulus.
//!
//! T_d of a row is the largest number of distinct cycle counts inside any one
//! group. When groups are individually constant but differ from each other
//! the row renders as `T_d:1 {38}‖{66}‖{72}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::codec::{Codec, DecodeStatus};
use crate::error::{Error, Result};
use crate::gf::Element;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    CodewordValue,
    ErrorNumber,
    ErrorPosition,
    ErrorValue,
}

impl Param {
    pub const ALL: [Param; 4] = [
        Param::CodewordValue,
        Param::ErrorNumber,
        Param::ErrorPosition,
        Param::ErrorValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::CodewordValue => "codeword_value",
            Param::ErrorNumber => "error_number",
            Param::ErrorPosition => "error_position",
            Param::ErrorValue => "error_value",
        }
    }

    /// Whether a fault-injecting attacker controls this parameter. The stored
    /// codeword is fixed at enrollment, so `codeword_value` is not.
    pub fn attacker_influenced(self) -> bool {
        !matches!(self, Param::CodewordValue)
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Param> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::SpecInvalid(format!("unknown parameter `{s}`")))
    }
}

/// Parses a comma-separated parameter list; the empty string is the empty set.
pub fn parse_params(s: &str) -> Result<BTreeSet<Param>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Explicit bindings for parameters that are not varied.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedValues {
    /// Message whose codeword is used, as an integer (bit i = message bit i).
    pub codeword_value: Option<u64>,
    pub error_number: Option<usize>,
    pub error_position: Option<Vec<usize>>,
    pub error_value: Option<Vec<Element>>,
}

impl FixedValues {
    fn binds(&self, p: Param) -> bool {
        match p {
            Param::CodewordValue => self.codeword_value.is_some(),
            Param::ErrorNumber => self.error_number.is_some(),
            Param::ErrorPosition => self.error_position.is_some(),
            Param::ErrorValue => self.error_value.is_some(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Sampling {
    Exhaustive,
    /// At most `count` stimuli per row, stratified by error count.
    Sampled {
        seed: u64,
        count: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub varied: BTreeSet<Param>,
    pub fixed: FixedValues,
    pub sampling: Sampling,
    /// Seed for reference codeword / positions / values.
    pub seed: u64,
    /// Codewords drawn when `codeword_value` is varied and the message space
    /// is too large to enumerate.
    pub codeword_samples: usize,
}

impl CampaignSpec {
    pub fn new(varied: impl IntoIterator<Item = Param>) -> Self {
        CampaignSpec {
            varied: varied.into_iter().collect(),
            fixed: FixedValues::default(),
            sampling: Sampling::Exhaustive,
            seed: 0,
            codeword_samples: 8,
        }
    }

    /// Every parameter that applies to the codec.
    pub fn full(codec: &Codec) -> Self {
        Self::new(Param::ALL.into_iter().filter(|&p| applicable(codec, p)))
    }

    pub fn with_fixed(mut self, fixed: FixedValues) -> Self {
        self.fixed = fixed;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// `error_value` is meaningless for a binary code.
pub fn applicable(codec: &Codec, p: Param) -> bool {
    !(p == Param::ErrorValue && codec.is_binary())
}

/// Largest message space enumerated outright when `codeword_value` varies.
const ENUMERABLE_MESSAGES: u32 = 16;

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Spec with every unpinned reference drawn and validated against a codec.
#[derive(Clone, Debug)]
struct Resolved {
    varied: BTreeSet<Param>,
    numbers: Vec<usize>,
    number_grouped_when_free: bool,
    all_codewords: Vec<u64>,
    ref_codeword: u64,
    /// Per error count ν: the first ν reference positions in ascending order,
    /// with their reference values permuted alongside.
    pinned: Vec<(Vec<usize>, Vec<Element>)>,
    combos: Vec<Vec<Vec<usize>>>,
    binary: bool,
    value_radix: u64,
}

impl Resolved {
    fn new(spec: &CampaignSpec, codec: &Codec) -> Result<Resolved> {
        let (n, t) = (codec.n(), codec.t());
        for &p in &spec.varied {
            if !applicable(codec, p) {
                return Err(Error::SpecInvalid(format!(
                    "{p} does not apply to {}",
                    codec.id()
                )));
            }
            if spec.fixed.binds(p) {
                return Err(Error::SpecInvalid(format!("{p} is both varied and fixed")));
            }
        }
        let f = &spec.fixed;
        if f.error_value.is_some() && codec.is_binary() {
            return Err(Error::SpecInvalid(
                "error_value does not apply to a binary code".into(),
            ));
        }
        if let Some(nu) = f.error_number {
            if nu > t {
                return Err(Error::SpecInvalid(format!(
                    "error_number {nu} exceeds t={t}"
                )));
            }
        }
        let message_bits = codec.message_bits();
        if let Some(c) = f.codeword_value {
            if message_bits < 64 && c >> message_bits != 0 {
                return Err(Error::SpecInvalid(format!(
                    "codeword_value {c} exceeds {message_bits} bits"
                )));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let random_message = |rng: &mut ChaCha8Rng| -> u64 {
            if message_bits >= 64 {
                rng.gen()
            } else {
                rng.gen_range(0..1u64 << message_bits)
            }
        };
        let ref_codeword = match f.codeword_value {
            Some(c) => c,
            None => random_message(&mut rng),
        };
        let ref_positions = match &f.error_position {
            Some(p) => {
                let distinct: BTreeSet<_> = p.iter().collect();
                if p.len() < t || distinct.len() != p.len() || p.iter().any(|&j| j >= n) {
                    return Err(Error::SpecInvalid(format!(
                        "error_position must list {t} distinct positions below {n}"
                    )));
                }
                p.clone()
            }
            None => {
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(&mut rng);
                all.truncate(t);
                all
            }
        };
        let max_symbol = codec.nonzero_symbols() as Element;
        let ref_values = if codec.is_binary() {
            vec![1; t]
        } else {
            match &f.error_value {
                Some(v) => {
                    if v.len() < t || v.iter().any(|&x| x == 0 || x > max_symbol) {
                        return Err(Error::SpecInvalid(format!(
                            "error_value must list {t} nonzero symbols"
                        )));
                    }
                    v.clone()
                }
                None => (0..t).map(|_| rng.gen_range(1..=max_symbol)).collect(),
            }
        };

        let all_codewords = if spec.varied.contains(&Param::CodewordValue) {
            if message_bits as u32 <= ENUMERABLE_MESSAGES {
                (0..1u64 << message_bits).collect()
            } else {
                let mut set = vec![ref_codeword];
                while set.len() < spec.codeword_samples.max(1) {
                    let c = random_message(&mut rng);
                    if !set.contains(&c) {
                        set.push(c);
                    }
                }
                set
            }
        } else {
            vec![ref_codeword]
        };

        let numbers = match f.error_number {
            Some(nu) => vec![nu],
            None => (0..=t).collect(),
        };
        Ok(Resolved {
            varied: spec.varied.clone(),
            number_grouped_when_free: f.error_number.is_none(),
            numbers,
            all_codewords,
            ref_codeword,
            pinned: (0..=t)
                .map(|nu| {
                    let mut pairs: Vec<_> = ref_positions[..nu]
                        .iter()
                        .copied()
                        .zip(ref_values[..nu].to_vec())
                        .collect();
                    pairs.sort_unstable();
                    pairs.into_iter().unzip()
                })
                .collect(),
            combos: (0..=t).map(|nu| combinations(n, nu)).collect(),
            binary: codec.is_binary(),
            value_radix: codec.nonzero_symbols(),
        })
    }

    fn rows(&self) -> Vec<RowShape> {
        let params: Vec<Param> = self.varied.iter().copied().collect();
        if params.is_empty() {
            return vec![self.row_shape(0)];
        }
        let mut masks: Vec<u8> = (1u32..1 << params.len())
            .map(|sel| {
                params
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| sel >> i & 1 == 1)
                    .fold(0u8, |m, (_, p)| m | p.bit())
            })
            .collect();
        masks.sort_by_key(|&m| table_rank(m));
        masks.into_iter().map(|m| self.row_shape(m)).collect()
    }

    fn row_shape(&self, mask: u8) -> RowShape {
        let has = |p: Param| mask & p.bit() != 0;
        RowShape {
            mask,
            codewords: if has(Param::CodewordValue) {
                self.all_codewords.clone()
            } else {
                vec![self.ref_codeword]
            },
            vary_position: has(Param::ErrorPosition),
            vary_value: has(Param::ErrorValue) && !self.binary,
            group_by_number: !has(Param::ErrorNumber) && self.number_grouped_when_free,
        }
    }

    fn space(&self, row: &RowShape) -> StimulusSpace {
        let blocks: Vec<Block> = self
            .numbers
            .iter()
            .map(|&nu| {
                let positions = if row.vary_position {
                    self.combos[nu].clone()
                } else {
                    vec![self.pinned[nu].0.clone()]
                };
                let values = if row.vary_value {
                    ValueDim::All {
                        radix: self.value_radix,
                    }
                } else {
                    ValueDim::Pinned(self.pinned[nu].1.clone())
                };
                let value_count = match &values {
                    ValueDim::All { radix } => radix.pow(nu as u32),
                    ValueDim::Pinned(_) => 1,
                };
                Block {
                    nu,
                    size: positions.len() as u64 * value_count,
                    positions,
                    values,
                    value_count,
                }
            })
            .collect();
        let per_codeword = blocks.iter().map(|b| b.size).sum();
        StimulusSpace {
            codewords: row.codewords.clone(),
            blocks,
            per_codeword,
        }
    }

    /// Whether a stimulus of the top row also belongs to `row`.
    fn admits(&self, row: &RowShape, s: &Stimulus) -> bool {
        let nu = s.error_positions.len();
        (row.codewords.len() > 1 || s.codeword == self.ref_codeword)
            && (row.vary_position || s.error_positions == self.pinned[nu].0)
            && (row.vary_value || s.error_values == self.pinned[nu].1)
    }
}

/// Table II lists the rows in this order; other combinations follow.
const TABLE_ROWS: [u8; 11] = {
    const CW: u8 = 1;
    const NUM: u8 = 2;
    const POS: u8 = 4;
    const VAL: u8 = 8;
    [
        VAL,
        POS,
        POS | VAL,
        NUM,
        NUM | POS,
        NUM | VAL,
        NUM | POS | VAL,
        CW,
        CW | NUM,
        CW | NUM | POS,
        CW | POS,
    ]
};

fn table_rank(mask: u8) -> (usize, u8) {
    (
        TABLE_ROWS
            .iter()
            .position(|&m| m == mask)
            .unwrap_or(TABLE_ROWS.len()),
        mask,
    )
}

fn mask_params(mask: u8) -> Vec<Param> {
    Param::ALL
        .into_iter()
        .filter(|p| mask & p.bit() != 0)
        .collect()
}

#[derive(Clone, Debug)]
struct RowShape {
    mask: u8,
    codewords: Vec<u64>,
    vary_position: bool,
    vary_value: bool,
    group_by_number: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stimulus {
    pub codeword: u64,
    pub error_positions: Vec<usize>,
    pub error_values: Vec<Element>,
}

#[derive(Clone, Debug)]
enum ValueDim {
    All { radix: u64 },
    Pinned(Vec<Element>),
}

#[derive(Clone, Debug)]
struct Block {
    nu: usize,
    positions: Vec<Vec<usize>>,
    values: ValueDim,
    value_count: u64,
    size: u64,
}

/// An indexable, ordered set of stimuli.
#[derive(Clone, Debug)]
pub struct StimulusSpace {
    codewords: Vec<u64>,
    blocks: Vec<Block>,
    per_codeword: u64,
}

impl StimulusSpace {
    pub fn len(&self) -> u64 {
        self.codewords.len() as u64 * self.per_codeword
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: u64) -> Stimulus {
        let codeword = self.codewords[(index / self.per_codeword) as usize];
        let mut rem = index % self.per_codeword;
        let block = self
            .blocks
            .iter()
            .find(|b| {
                if rem < b.size {
                    true
                } else {
                    rem -= b.size;
                    false
                }
            })
            .expect("index within space");
        let error_positions = block.positions[(rem / block.value_count) as usize].clone();
        let mut vi = rem % block.value_count;
        let error_values = match &block.values {
            ValueDim::Pinned(v) => v.clone(),
            ValueDim::All { radix } => (0..block.nu)
                .map(|_| {
                    let v = (vi % radix) as Element + 1;
                    vi /= radix;
                    v
                })
                .collect(),
        };
        Stimulus {
            codeword,
            error_positions,
            error_values,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Stimulus> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// The stimuli of the campaign's top row (every varied parameter ranging).
/// In sampled mode this is the drawn sample.
pub fn campaign_enumerate(spec: &CampaignSpec, codec: &Codec) -> Result<Vec<Stimulus>> {
    let resolved = Resolved::new(spec, codec)?;
    let mask = resolved.varied.iter().fold(0u8, |m, p| m | p.bit());
    let space = resolved.space(&resolved.row_shape(mask));
    Ok(match spec.sampling {
        Sampling::Exhaustive => space.iter().collect(),
        Sampling::Sampled { seed, count } => space
            .sample(seed, count)
            .into_iter()
            .map(|i| space.get(i))
            .collect(),
    })
}

/// Size of the top-row space without materializing it.
pub fn campaign_size(spec: &CampaignSpec, codec: &Codec) -> Result<u64> {
    let resolved = Resolved::new(spec, codec)?;
    let mask = resolved.varied.iter().fold(0u8, |m, p| m | p.bit());
    Ok(resolved.space(&resolved.row_shape(mask)).len())
}

impl StimulusSpace {
    /// At most `count` indices, stratified by error count: each error count
    /// gets an equal share of the budget, small strata are enumerated in full
    /// and their unused share passes to the larger ones. Within a stratum
    /// indices are drawn uniformly with replacement.
    pub fn sample(&self, seed: u64, count: u64) -> Vec<u64> {
        if self.len() <= count {
            return (0..self.len()).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cw = self.codewords.len() as u64;
        let mut starts = Vec::with_capacity(self.blocks.len());
        let mut start = 0;
        for b in &self.blocks {
            starts.push(start);
            start += b.size;
        }
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by_key(|&b| (self.blocks[b].size, b));
        let mut quotas = vec![0u64; self.blocks.len()];
        let mut remaining = count;
        for (i, &b) in order.iter().enumerate() {
            let share = remaining / (order.len() - i) as u64;
            quotas[b] = share.min(cw * self.blocks[b].size);
            remaining -= quotas[b];
        }
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            let stratum = cw * block.size;
            let at = |k: u64| (k / block.size) * self.per_codeword + starts[b] + k % block.size;
            if quotas[b] == stratum {
                out.extend((0..stratum).map(at));
            } else {
                out.extend((0..quotas[b]).map(|_| at(rng.gen_range(0..stratum))));
            }
        }
        out
    }
}

/// Outcome of decoding one stimulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    pub cycles: u64,
    pub status: DecodeStatus,
    /// Decoder output equals the transmitted codeword.
    pub recovered: bool,
}

/// Decodes stimuli against a codec, caching encoded codewords.
pub struct Evaluator<'a> {
    codec: &'a Codec,
    codewords: BTreeMap<u64, Vec<Element>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(codec: &'a Codec, messages: &[u64]) -> Result<Self> {
        let s = codec.symbol_bits();
        let codewords = messages
            .iter()
            .map(|&m| {
                let bits: Vec<bool> = (0..codec.message_bits())
                    .map(|i| i < 64 && (m >> i) & 1 == 1)
                    .collect();
                Ok((m, codec.encode_symbols(&bits::to_symbols(&bits, s))?))
            })
            .collect::<Result<_>>()?;
        Ok(Evaluator { codec, codewords })
    }

    pub fn observe(&self, s: &Stimulus) -> Result<Observation> {
        let clean = &self.codewords[&s.codeword];
        let mut word = clean.clone();
        for (&j, &v) in s.error_positions.iter().zip(&s.error_values) {
            word[j] ^= v;
        }
        let out = self.codec.decode_symbols(&word)?;
        Ok(Observation {
            cycles: out.cycles,
            status: out.status,
            recovered: out.corrected == *clean,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constancy {
    C,
    NC,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relevance {
    V,
    NV,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Vulnerable,
    NotVulnerable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReport {
    pub varied: Vec<Param>,
    pub runs: u64,
    pub distinct_cycle_values: BTreeSet<u64>,
    pub t_d: usize,
    /// Group label (`error_number=ν` or `all`) to observed cycle counts.
    pub per_group: BTreeMap<String, BTreeSet<u64>>,
    pub constancy: Constancy,
    pub attacker_influenced: bool,
}

impl RowReport {
    /// Table II notation, e.g. `T_d:3 {38, 66, 72}` or `T_d:1 {38}‖{66}‖{72}`.
    pub fn notation(&self) -> String {
        let fmt_set = |s: &BTreeSet<u64>| {
            format!(
                "{{{}}}",
                s.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
            )
        };
        let sets: Vec<&BTreeSet<u64>> = self.per_group.values().collect();
        let body = if sets.windows(2).all(|w| w[0] == w[1]) {
            sets.first()
                .map(|s| fmt_set(s))
                .unwrap_or_else(|| "{}".into())
        } else {
            sets.iter()
                .map(|s| fmt_set(s))
                .collect::<Vec<_>>()
                .join("‖")
        };
        format!("T_d:{} {}", self.t_d, body)
    }

    pub fn label(&self) -> String {
        if self.varied.is_empty() {
            "baseline (nothing varied)".into()
        } else {
            format!(
                "{} varied",
                self.varied
                    .iter()
                    .map(|p| p.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamClass {
    pub param: Param,
    pub constancy: Constancy,
    pub relevance: Relevance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub codec: String,
    pub profile: String,
    pub varied: Vec<Param>,
    pub fixed: FixedValues,
    pub sampling: Sampling,
    pub rows: Vec<RowReport>,
    pub classification: Vec<ParamClass>,
    pub verdict: Verdict,
    pub total_runs: u64,
    /// Stimuli the decoder failed to map back to their codeword.
    pub decode_failures: u64,
}

impl CampaignReport {
    pub fn row(&self, varied: &[Param]) -> Option<&RowReport> {
        let want: BTreeSet<_> = varied.iter().collect();
        self.rows
            .iter()
            .find(|r| r.varied.iter().collect::<BTreeSet<_>>() == want)
    }
}

/// Per-row accumulator: group index -> cycle set, plus counters.
#[derive(Clone, Debug)]
struct RowAcc {
    groups: Vec<BTreeSet<u64>>,
    runs: u64,
}

#[derive(Clone, Debug)]
struct Acc {
    rows: Vec<RowAcc>,
    failures: u64,
    total: u64,
}

impl Acc {
    fn new(rows: usize, t: usize) -> Acc {
        Acc {
            rows: vec![
                RowAcc {
                    groups: vec![BTreeSet::new(); t + 2],
                    runs: 0
                };
                rows
            ],
            failures: 0,
            total: 0,
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.rows.iter_mut().zip(other.rows) {
            a.runs += b.runs;
            for (ga, gb) in a.groups.iter_mut().zip(b.groups) {
                ga.extend(gb);
            }
        }
        self.failures += other.failures;
        self.total += other.total;
        self
    }

    fn record(&mut self, row: usize, shape: &RowShape, nu: usize, t: usize, obs: Observation) {
        let slot = if shape.group_by_number { nu } else { t + 1 };
        let acc = &mut self.rows[row];
        acc.runs += 1;
        acc.groups[slot].insert(obs.cycles);
    }
}

const CHUNK: u64 = 4096;

pub fn campaign_run(spec: &CampaignSpec, codec: &Codec) -> Result<CampaignReport> {
    let resolved = Resolved::new(spec, codec)?;
    let rows = resolved.rows();
    let t = codec.t();
    let evaluator = Evaluator::new(codec, &resolved.all_codewords)?;

    let acc = match spec.sampling {
        Sampling::Exhaustive => {
            let top_mask = resolved.varied.iter().fold(0u8, |m, p| m | p.bit());
            let space = resolved.space(&resolved.row_shape(top_mask));
            let chunks = space.len().div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| -> Result<Acc> {
                    let mut acc = Acc::new(rows.len(), t);
                    for i in c * CHUNK..((c + 1) * CHUNK).min(space.len()) {
                        let s = space.get(i);
                        let obs = evaluator.observe(&s)?;
                        acc.total += 1;
                        acc.failures += (!obs.recovered || obs.status != DecodeStatus::Ok) as u64;
                        let nu = s.error_positions.len();
                        for (r, shape) in rows.iter().enumerate() {
                            if resolved.admits(shape, &s) {
                                acc.record(r, shape, nu, t, obs);
                            }
                        }
                    }
                    Ok(acc)
                })
                .try_reduce(|| Acc::new(rows.len(), t), |a, b| Ok(a.merge(b)))?
        }
        Sampling::Sampled { seed, count } => rows
            .par_iter()
            .enumerate()
            .map(|(r, shape)| -> Result<Acc> {
                let mut acc = Acc::new(rows.len(), t);
                let space = resolved.space(shape);
                for i in space.sample(seed.wrapping_add(r as u64), count) {
                    let s = space.get(i);
                    let obs = evaluator.observe(&s)?;
                    acc.total += 1;
                    acc.failures += (!obs.recovered || obs.status != DecodeStatus::Ok) as u64;
                    acc.record(r, shape, s.error_positions.len(), t, obs);
                }
                Ok(acc)
            })
            .try_reduce(|| Acc::new(rows.len(), t), |a, b| Ok(a.merge(b)))?,
    };

    let row_reports: Vec<RowReport> = rows
        .iter()
        .zip(&acc.rows)
        .map(|(shape, ra)| {
            let per_group: BTreeMap<String, BTreeSet<u64>> = ra
                .groups
                .iter()
                .enumerate()
                .filter(|(_, g)| !g.is_empty())
                .map(|(i, g)| {
                    let key = if i <= t {
                        format!("error_number={i}")
                    } else {
                        "all".to_string()
                    };
                    (key, g.clone())
                })
                .collect();
            let t_d = per_group.values().map(BTreeSet::len).max().unwrap_or(0);
            let varied = mask_params(shape.mask);
            RowReport {
                attacker_influenced: varied.iter().any(|p| p.attacker_influenced()),
                varied,
                runs: ra.runs,
                distinct_cycle_values: per_group.values().flatten().copied().collect(),
                t_d,
                constancy: if t_d > 1 { Constancy::NC } else { Constancy::C },
                per_group,
            }
        })
        .collect();

    let classification = resolved
        .varied
        .iter()
        .filter_map(|&p| {
            let single = row_reports.iter().find(|r| r.varied == [p])?;
            Some(ParamClass {
                param: p,
                constancy: single.constancy,
                relevance: if p.attacker_influenced() {
                    Relevance::V
                } else {
                    Relevance::NV
                },
            })
        })
        .collect();
    let verdict = if row_reports
        .iter()
        .any(|r| r.attacker_influenced && r.constancy == Constancy::NC)
    {
        Verdict::Vulnerable
    } else {
        Verdict::NotVulnerable
    };

    Ok(CampaignReport {
        codec: codec.id(),
        profile: codec.profile_name().to_string(),
        varied: resolved.varied.iter().copied().collect(),
        fixed: spec.fixed.clone(),
        sampling: spec.sampling,
        rows: row_reports,
        classification,
        verdict,
        total_runs: acc.total,
        decode_failures: acc.failures,
    })
}

/// Cheap timing certificate: vary only the number of errors (t + 1 stimuli).
pub fn timing_certificate(codec: &Codec) -> Result<Verdict> {
    Ok(campaign_run(&CampaignSpec::new([Param::ErrorNumber]), codec)?.verdict)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "text-table" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

pub fn campaign_report_render(report: &CampaignReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Text => render_text(report),
    }
}

fn render_csv(report: &CampaignReport) -> String {
    let mut out = String::from("frozen_params,varied_params,cycles\n");
    for row in &report.rows {
        let varied = if row.varied.is_empty() {
            "none".to_string()
        } else {
            row.varied
                .iter()
                .map(|p| p.name())
                .collect::<Vec<_>>()
                .join("|")
        };
        for (group, cycles) in &row.per_group {
            let frozen = if group == "all" {
                "none"
            } else {
                group.as_str()
            };
            let cycles = cycles
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(out, "{frozen},{varied},{cycles}");
        }
    }
    out
}

fn render_text(report: &CampaignReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "codec: {} (profile {})", report.codec, report.profile);
    let sampling = match report.sampling {
        Sampling::Exhaustive => "exhaustive".to_string(),
        Sampling::Sampled { seed, count } => format!("sampled, {count} per row, seed {seed}"),
    };
    let _ = writeln!(
        out,
        "runs: {} ({sampling}), decode failures: {}",
        report.total_runs, report.decode_failures
    );
    let _ = writeln!(out, "cw num pos val  decoding time");
    let mark = |m: u8, p: Param| if m & p.bit() != 0 { "●" } else { "-" };
    let row_line = |out: &mut String, mask: u8, body: String| {
        let _ = writeln!(
            out,
            " {}   {}   {}   {}  {}",
            mark(mask, Param::CodewordValue),
            mark(mask, Param::ErrorNumber),
            mark(mask, Param::ErrorPosition),
            mark(mask, Param::ErrorValue),
            body
        );
    };
    let mask_of = |r: &RowReport| r.varied.iter().fold(0u8, |m, p| m | p.bit());
    if report.rows.len() == 1 && report.rows[0].varied.is_empty() {
        let r = &report.rows[0];
        row_line(&mut out, 0, format!("{}: {}", r.label(), r.notation()));
    } else {
        for mask in TABLE_ROWS {
            match report.rows.iter().find(|r| mask_of(r) == mask) {
                Some(r) => row_line(&mut out, mask, format!("{}: {}", r.label(), r.notation())),
                None => row_line(&mut out, mask, "n/a".into()),
            }
        }
        for r in report
            .rows
            .iter()
            .filter(|r| !TABLE_ROWS.contains(&mask_of(r)))
        {
            row_line(
                &mut out,
                mask_of(r),
                format!("{}: {}", r.label(), r.notation()),
            );
        }
    }
    for c in &report.classification {
        let _ = writeln!(out, "{}: {:?}/{:?}", c.param, c.constancy, c.relevance);
    }
    let verdict = match report.verdict {
        Verdict::Vulnerable => "vulnerable",
        Verdict::NotVulnerable => "not vulnerable",
    };
    let _ = writeln!(out, "verdict: {verdict}");
    out
}
