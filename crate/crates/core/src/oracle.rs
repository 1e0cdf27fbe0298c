//! Brute-force references for testing the fast paths.
//!
//! Nothing here calls into the decoder: the ML search walks every codeword,
//! aggregation is a literal double loop with its own coset ranking, and the
//! projected-channel check samples two real channel uses.

use rand::Rng;

use crate::channel::DiscreteBms;
use crate::decoder::{LlrVector, ProjectionEstimates, ProjectionIndex};
use crate::error::{Error, Result};
use crate::rm_code::{Codeword, RmCode, MAX_ENUM_K};

/// Outcome of comparing two computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub matched: bool,
    /// First mismatch; empty when `matched`.
    pub detail: String,
}

impl OracleVerdict {
    pub fn pass() -> Self {
        Self {
            matched: true,
            detail: String::new(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self {
            matched: false,
            detail: detail.into(),
        }
    }
}

/// Maximum-likelihood decoding by exhaustive search.
///
/// Maximizes the correlation `sum_z L(z) (1 - 2 c(z))`; near-ties (within
/// `1e-9` relative) keep the codeword with the smaller message counter.
pub fn ml_decode_exhaustive(code: &RmCode, l: &LlrVector) -> Result<Codeword> {
    if code.k() > MAX_ENUM_K {
        return Err(Error::TooLarge {
            k: code.k(),
            limit: MAX_ENUM_K,
        });
    }
    if l.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            found: l.len(),
        });
    }
    let values = l.values();
    let mut best: Option<(f64, Codeword)> = None;
    for word in code.enumerate_codewords()? {
        let mut corr = 0.0;
        for (z, &x) in values.iter().enumerate() {
            if word.get(z) {
                corr -= x;
            } else {
                corr += x;
            }
        }
        let better = match &best {
            None => true,
            Some((b, _)) => corr > *b + 1e-9 * b.abs().max(corr.abs()).max(1.0),
        };
        if better {
            best = Some((corr, word));
        }
    }
    Ok(best.expect("every code has a codeword").1)
}

/// Aggregation written out term by term.
pub fn naive_aggregate(l: &LlrVector, estimates: &ProjectionEstimates) -> Result<LlrVector> {
    let n = l.len();
    let m = estimates.m();
    if n != 1usize << m || m == 0 {
        return Err(Error::LengthMismatch {
            expected: 1 << m,
            found: n,
        });
    }
    let values = l.values();
    let mut out = vec![0.0; n];
    for v in 1..n {
        let index = ProjectionIndex::new(v, m)?;
        let estimate = estimates.get(index).ok_or(Error::MissingSubspace(v))?;
        let mut reps: Vec<usize> = (0..n).filter(|&z| z < (z ^ v)).collect();
        reps.sort_unstable();
        for (z, slot) in out.iter_mut().enumerate() {
            let rep = z.min(z ^ v);
            let pos = reps.iter().position(|&t| t == rep).expect("every coset has a representative");
            let sign = if estimate.get(pos) { -1.0 } else { 1.0 };
            *slot += sign * values[z ^ v];
        }
    }
    let scale = (n - 1) as f64;
    LlrVector::new(out.into_iter().map(|x| x / scale).collect(), l.clamp())
}

/// Empirical law of `(Y_1, Y_2, S)` where two independent channel uses carry
/// uniform bits `U_1, U_2` and `S = U_1 ^ U_2`.
#[derive(Debug, Clone)]
pub struct EmpiricalProjection {
    pub alphabet: usize,
    pub samples: usize,
    /// `counts[s][y1 * alphabet + y2]`.
    pub counts: [Vec<u64>; 2],
    /// Total-variation distance to `1/2 W^-(y1, y2 | s)`.
    pub tv_distance: f64,
}

impl EmpiricalProjection {
    /// Fraction of samples satisfying `pred(y1, y2, s)`.
    pub fn fraction(&self, pred: impl Fn(usize, usize, u8) -> bool) -> f64 {
        let q = self.alphabet;
        let mut hits = 0u64;
        for s in 0..2u8 {
            for (idx, &c) in self.counts[s as usize].iter().enumerate() {
                if pred(idx / q, idx % q, s) {
                    hits += c;
                }
            }
        }
        hits as f64 / self.samples as f64
    }
}

pub fn empirical_projected_channel<R: Rng + ?Sized>(
    channel: &DiscreteBms,
    samples: usize,
    rng: &mut R,
) -> Result<EmpiricalProjection> {
    if samples < 10_000 {
        return Err(Error::ParameterOutOfRange(format!(
            "need at least 10^4 samples, got {samples}"
        )));
    }
    let q = channel.alphabet_size();
    let mut counts = [vec![0u64; q * q], vec![0u64; q * q]];
    for _ in 0..samples {
        let u1: u8 = rng.gen_range(0..2);
        let u2: u8 = rng.gen_range(0..2);
        let y1 = channel.sample_index(u1, rng);
        let y2 = channel.sample_index(u2, rng);
        counts[(u1 ^ u2) as usize][y1 * q + y2] += 1;
    }
    let exact = channel.combine_minus()?;
    let mut tv = 0.0;
    for s in 0..2 {
        let law = if s == 0 { exact.p0() } else { exact.p1() };
        for (idx, &c) in counts[s].iter().enumerate() {
            tv += (c as f64 / samples as f64 - 0.5 * law[idx]).abs();
        }
    }
    Ok(EmpiricalProjection {
        alphabet: q,
        samples,
        counts,
        tv_distance: 0.5 * tv,
    })
}
