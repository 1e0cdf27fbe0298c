//! Recursive projection-aggregation (RPA) decoding of Reed-Muller codes.
//!
//! One RPA iteration on RM(m, r) with LLR vector `L`:
//!
//! 1. **Projection.** For every nonzero direction `v`, each coset
//!    `T = {z, z ^ v}` gets the LLR of the parity `c(z) ^ c(z ^ v)`,
//!    `L(z) ⊞ L(z ^ v)`. Cosets are ordered by their smaller element, so the
//!    projected vector has length `2^(m-1)`.
//! 2. **Recursion.** Each projected vector is decoded as RM(m-1, r-1); at
//!    order one the fast Hadamard transform gives the ML decision.
//! 3. **Aggregation.** Every coordinate is re-estimated from its partners,
//!    `L'(z) = mean_v (1 - 2 y_v[z + <v>]) L(z ^ v)`.
//!
//! Iterations repeat up to `n_max` times (stopping early once the sign
//! pattern settles) and the result is the hard decision `1{L(z) < 0}`.
//!
//! Decoding is a pure function of its inputs. With
//! [`TieBreak::Randomized`], exact ties in the Hadamard argmax and zero LLRs
//! in the final hard decision are resolved by coin flips drawn from streams
//! derived from the configured seed and the node's position in the
//! recursion tree, so results stay reproducible under any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitVec;
use crate::channel::{clamp_llr, LLR_MAX};
use crate::error::{Error, Result};
use crate::rm_code::{Codeword, RmCode};

/// A vector of clamped LLRs indexed by evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector {
    values: Vec<f64>,
    clamp: f64,
}

impl LlrVector {
    /// Clamps every entry into `[-clamp, clamp]`. NaN entries are rejected.
    pub fn new(values: Vec<f64>, clamp: f64) -> Result<Self> {
        if !(clamp > 0.0 && clamp.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("LLR clamp {clamp} must be positive")));
        }
        if let Some(i) = values.iter().position(|x| x.is_nan()) {
            return Err(Error::ParameterOutOfRange(format!("LLR entry {i} is NaN")));
        }
        let values = values.into_iter().map(|x| clamp_llr(x, clamp)).collect();
        Ok(Self { values, clamp })
    }

    pub fn with_default_clamp(values: Vec<f64>) -> Result<Self> {
        Self::new(values, LLR_MAX)
    }

    /// Noiseless LLRs for a codeword: `+clamp` for bit 0 and `-clamp` for bit 1.
    pub fn hard(word: &Codeword, clamp: f64) -> Self {
        let values = word.bits().iter().map(|b| if b { -clamp } else { clamp }).collect();
        Self { values, clamp }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    /// `log2(len)` when the length is a power of two.
    pub fn num_vars(&self) -> Option<u32> {
        let n = self.values.len();
        n.is_power_of_two().then(|| n.trailing_zeros())
    }
}

/// A nonzero direction `v` spanning the one-dimensional subspace `<v>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectionIndex(usize);

impl ProjectionIndex {
    pub fn new(v: usize, m: u32) -> Result<Self> {
        if v == 0 || v >> m != 0 {
            return Err(Error::ParameterOutOfRange(format!(
                "projection direction {v} must be nonzero and below 2^{m}"
            )));
        }
        Ok(Self(v))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// All nonzero directions for `m` variables, ascending.
    pub fn all(m: u32) -> impl Iterator<Item = Self> {
        (1..1usize << m).map(Self)
    }
}

/// How exact ties are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest `s`, then `sigma = +1`, in the Hadamard argmax; a zero LLR
    /// decides bit 0.
    #[default]
    Lowest,
    /// Uniform choice among tied candidates, seeded.
    Randomized { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    /// Iterations per recursion level.
    pub n_max: usize,
    pub llr_clamp: f64,
    pub tie_break: TieBreak,
    /// Decode the projections of large nodes on the rayon pool.
    pub parallel: bool,
}

impl DecoderConfig {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::ParameterOutOfRange("n_max must be at least 1".into()));
        }
        Ok(Self {
            n_max,
            llr_clamp: LLR_MAX,
            tie_break: TieBreak::Lowest,
            parallel: false,
        })
    }

    /// Default configuration for a code: `n_max = ceil(m / 2)` (at least 1).
    pub fn for_code(code: &RmCode) -> Self {
        Self::new((code.m() as usize).div_ceil(2).max(1)).expect("n_max >= 1")
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn with_clamp(mut self, clamp: f64) -> Self {
        self.llr_clamp = clamp;
        self
    }
}

/// Output of the first-order ML decoder: the codeword `sigma * chi_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FhtResult {
    pub codeword: Codeword,
    /// `+1` or `-1`.
    pub sigma: i8,
    pub s: usize,
    /// Correlation `sum_z L(z) sigma chi_s(z)`.
    pub score: f64,
}

/// LLR of the XOR of two bits with LLRs `a` and `b`:
/// `log(e^(a+b) + 1) - log(e^a + e^b)`.
#[inline]
pub fn boxplus(a: f64, b: f64) -> f64 {
    let (abs_a, abs_b) = (a.abs(), b.abs());
    let min = abs_a.min(abs_b);
    if min < 1.0 {
        // tanh rule; the min-sum form below cancels catastrophically here
        return 2.0 * ((0.5 * a).tanh() * (0.5 * b).tanh()).atanh();
    }
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * min + softplus_neg((a + b).abs()) - softplus_neg((a - b).abs())
}

/// `ln(1 + e^-x)` for `x >= 0`; below an ulp of the result past 37.
#[inline]
fn softplus_neg(x: f64) -> f64 {
    if x > 37.0 {
        0.0
    } else {
        (-x).exp().ln_1p()
    }
}

/// Position of the coset `{z, z ^ v}` in projection order.
///
/// Coset representatives `min(z, z ^ v)` are exactly the points whose bit at
/// the top set bit of `v` is clear; deleting that bit ranks them.
#[inline]
pub fn coset_index(z: usize, v: usize) -> usize {
    let h = usize::BITS - 1 - v.leading_zeros();
    let z = z.min(z ^ v);
    let low = z & ((1 << h) - 1);
    let high = (z >> (h + 1)) << h;
    high | low
}

#[inline]
fn coset_representative(i: usize, v: usize) -> usize {
    let h = usize::BITS - 1 - v.leading_zeros();
    let low = i & ((1 << h) - 1);
    let high = (i >> h) << (h + 1);
    high | low
}

fn project_values(l: &[f64], v: usize) -> Vec<f64> {
    (0..l.len() / 2)
        .map(|i| {
            let z = coset_representative(i, v);
            boxplus(l[z], l[z ^ v])
        })
        .collect()
}

/// Projects `l` onto the cosets of `<v>`.
pub fn project(l: &LlrVector, v: ProjectionIndex) -> Result<LlrVector> {
    let m = l
        .num_vars()
        .filter(|&m| m >= 1)
        .ok_or_else(|| Error::ParameterOutOfRange(format!("length {} is not 2^m with m >= 1", l.len())))?;
    if v.0 >> m != 0 {
        return Err(Error::LengthMismatch {
            expected: v.0.next_power_of_two() << 1,
            found: l.len(),
        });
    }
    Ok(LlrVector {
        values: project_values(&l.values, v.0),
        clamp: l.clamp,
    })
}

/// In-place fast Walsh-Hadamard transform: `f(s) = sum_z x(z) (-1)^(popcount(z & s))`.
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, w) = (*a, *b);
                *a = u + w;
                *b = u - w;
            }
        }
        h *= 2;
    }
}

/// Two correlations within this distance are treated as tied.
#[inline]
pub(crate) fn tie_tolerance(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

enum Resolver {
    Lowest,
    Random(ChaCha8Rng),
}

impl Resolver {
    fn for_node(tie: TieBreak, node_seed: u64) -> Self {
        match tie {
            TieBreak::Lowest => Self::Lowest,
            TieBreak::Randomized { .. } => Self::Random(ChaCha8Rng::seed_from_u64(node_seed)),
        }
    }
}

fn first_order_word(n: usize, sigma: i8, s: usize) -> BitVec {
    BitVec::from_bools((0..n).map(|z| ((z & s).count_ones() % 2 == 1) ^ (sigma < 0)))
}

fn fht_decode_values(l: &[f64], resolver: &mut Resolver) -> FhtResult {
    let mut f = l.to_vec();
    fwht(&mut f);
    let max = f.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let floor = max - tie_tolerance(max);
    // candidates in (s ascending, sigma = +1 first) order
    let near_max = f.iter().enumerate().flat_map(|(s, &c)| {
        [(1i8, c), (-1i8, -c)]
            .into_iter()
            .filter(move |&(_, value)| value >= floor)
            .map(move |(sigma, value)| (s, sigma, value))
    });
    let (s, sigma, score) = match resolver {
        Resolver::Lowest => near_max.into_iter().next().expect("the maximum is attained"),
        Resolver::Random(rng) => {
            let all: Vec<_> = near_max.collect();
            all[rng.gen_range(0..all.len())]
        }
    };
    FhtResult {
        codeword: Codeword::from_bits(first_order_word(l.len(), sigma, s)),
        sigma,
        s,
        score,
    }
}

/// Maximum-likelihood decoding of a first-order RM code by the Hadamard
/// transform. Ties go to the smallest `s`, then `sigma = +1`.
pub fn fht_decode(l: &LlrVector) -> Result<FhtResult> {
    match l.num_vars() {
        Some(m) if m >= 1 => Ok(fht_decode_values(&l.values, &mut Resolver::Lowest)),
        _ => Err(Error::ParameterOutOfRange(format!(
            "length {} is not 2^m with m >= 1",
            l.len()
        ))),
    }
}

/// Hard-decision estimates of every projection of one node, keyed by direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionEstimates {
    m: u32,
    estimates: Vec<Option<Codeword>>,
}

impl ProjectionEstimates {
    pub fn new(m: u32) -> Self {
        Self {
            m,
            estimates: vec![None; (1usize << m) - 1],
        }
    }

    /// Every direction mapped to the all-zeros word.
    pub fn all_zero(m: u32) -> Self {
        let half = 1usize << m.saturating_sub(1);
        Self {
            m,
            estimates: vec![Some(Codeword::zeros(half)); (1usize << m) - 1],
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn insert(&mut self, v: ProjectionIndex, estimate: Codeword) -> Result<()> {
        let half = 1usize << (self.m - 1);
        if v.0 >> self.m != 0 {
            return Err(Error::ParameterOutOfRange(format!("direction {} outside 2^{}", v.0, self.m)));
        }
        if estimate.len() != half {
            return Err(Error::LengthMismatch {
                expected: half,
                found: estimate.len(),
            });
        }
        self.estimates[v.0 - 1] = Some(estimate);
        Ok(())
    }

    pub fn get(&self, v: ProjectionIndex) -> Option<&Codeword> {
        self.estimates.get(v.0 - 1).and_then(Option::as_ref)
    }
}

fn aggregate_values(l: &[f64], estimates: &[BitVec], clamp: f64) -> Vec<f64> {
    let n = l.len();
    let scale = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|z| {
            let sum: f64 = estimates
                .iter()
                .enumerate()
                .map(|(i, est)| {
                    let v = i + 1;
                    let term = l[z ^ v];
                    if est.get(coset_index(z, v)) {
                        -term
                    } else {
                        term
                    }
                })
                .sum();
            clamp_llr(sum * scale, clamp)
        })
        .collect()
}

/// Re-estimates every coordinate from its partners and the decoded projections.
pub fn aggregate(l: &LlrVector, estimates: &ProjectionEstimates) -> Result<LlrVector> {
    let n = l.len();
    if l.num_vars() != Some(estimates.m) || estimates.m == 0 {
        return Err(Error::LengthMismatch {
            expected: 1 << estimates.m,
            found: n,
        });
    }
    let words = estimates
        .estimates
        .iter()
        .enumerate()
        .map(|(i, e)| e.as_ref().map(|c| c.bits().clone()).ok_or(Error::MissingSubspace(i + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LlrVector {
        values: aggregate_values(&l.values, &words, l.clamp),
        clamp: l.clamp,
    })
}

/// `c(z) = 1{L(z) < 0}`; a zero LLR decides 0.
pub fn hard_decision(l: &LlrVector) -> Codeword {
    Codeword::from_bits(BitVec::from_bools(l.values.iter().map(|&x| x < 0.0)))
}

fn hard_decision_values(l: &[f64], resolver: &mut Resolver) -> BitVec {
    match resolver {
        Resolver::Lowest => BitVec::from_bools(l.iter().map(|&x| x < 0.0)),
        Resolver::Random(rng) => BitVec::from_bools(l.iter().map(|&x| {
            if x == 0.0 {
                rng.gen::<bool>()
            } else {
                x < 0.0
            }
        })),
    }
}

/// SplitMix64 finalizer over a combined key; derives child seeds.
fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const FINAL_DECISION: u64 = u64::MAX;

fn same_pattern(a: &[f64], b: &[f64], tie: TieBreak) -> bool {
    match tie {
        TieBreak::Lowest => a.iter().zip(b).all(|(x, y)| (*x < 0.0) == (*y < 0.0)),
        TieBreak::Randomized { .. } => a
            .iter()
            .zip(b)
            .all(|(x, y)| x.partial_cmp(&0.0) == y.partial_cmp(&0.0)),
    }
}

fn decode_node(m: u32, r: u32, l: Vec<f64>, cfg: &DecoderConfig, seed: u64) -> BitVec {
    if r == 1 {
        let mut resolver = Resolver::for_node(cfg.tie_break, seed);
        return fht_decode_values(&l, &mut resolver).codeword.into_bits();
    }
    let n = l.len();
    let mut l = l;
    for iteration in 0..cfg.n_max {
        let child = |v: usize| {
            let projected = project_values(&l, v);
            decode_node(m - 1, r - 1, projected, cfg, mix(seed, iteration as u64, v as u64))
        };
        let estimates: Vec<BitVec> = if cfg.parallel && m >= 6 {
            (1..n).into_par_iter().map(child).collect()
        } else {
            (1..n).map(child).collect()
        };
        let next = aggregate_values(&l, &estimates, cfg.llr_clamp);
        let settled = same_pattern(&l, &next, cfg.tie_break);
        l = next;
        if settled {
            break;
        }
    }
    let mut resolver = Resolver::for_node(cfg.tie_break, mix(seed, FINAL_DECISION, 0));
    hard_decision_values(&l, &mut resolver)
}

/// Decodes `l` as a word of `code` with the RPA algorithm.
pub fn rpa_decode(code: &RmCode, l: &LlrVector, cfg: &DecoderConfig) -> Result<Codeword> {
    if code.r() == 0 {
        return Err(Error::ParameterOutOfRange("RPA decoding needs order r >= 1".into()));
    }
    if cfg.n_max == 0 {
        return Err(Error::ParameterOutOfRange("n_max must be at least 1".into()));
    }
    if l.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            found: l.len(),
        });
    }
    let seed = match cfg.tie_break {
        TieBreak::Lowest => 0,
        TieBreak::Randomized { seed } => seed,
    };
    let clamped: Vec<f64> = l.values.iter().map(|&x| clamp_llr(x, cfg.llr_clamp)).collect();
    Ok(Codeword::from_bits(decode_node(code.m(), code.r(), clamped, cfg, seed)))
}
