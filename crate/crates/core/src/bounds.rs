//! Closed-form upper bounds on the one-iteration RPA error probability.
//!
//! With `Z` the channel's Bhattacharyya parameter, `Z_r = Z` and the channel
//! seen `r - i` projections deep satisfies `Z_i <= 1 - (1 - Z)^(2^(r-i))`.
//! Writing `N_i = 2^(m-r+i)`:
//!
//! - base case: `P(Q_1) <= (2^(m-r+2) - 1) Z_1^(2^(m-r))`;
//! - recurrence: `P(Q_i) <= N_i Z_i^(N_i - 1) + (N_i - 1) P(Q_(i-1))`;
//! - unrolled: `P(Q_r) <= sum_{t=2}^{r} A_t prod_{s>t} B_s + P(Q_1) prod_{s>=2} B_s`
//!   with `A_t = N_t Z_t^(N_t - 1)` and `B_t = N_t - 1`.
//!
//! Everything is carried as natural logarithms: `Z^(2^(m-r))` underflows
//! doubles long before the parameters of interest run out.

use crate::channel::{DiscreteBms, MERGE_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub m: u32,
    pub r: u32,
    /// Channel Bhattacharyya parameter.
    pub z: f64,
}

impl BoundInputs {
    pub fn new(m: u32, r: u32, z: f64) -> Result<Self> {
        if r < 1 || r > m {
            return Err(Error::ParameterOutOfRange(format!("need 1 <= r <= m, got m = {m}, r = {r}")));
        }
        if m > 1000 {
            return Err(Error::ParameterOutOfRange(format!("m = {m} is beyond the evaluable range")));
        }
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("Bhattacharyya parameter {z} not in (0, 1)")));
        }
        Ok(Self { m, r, z })
    }

    /// `N_i = 2^(m - r + i)`.
    pub fn n_i(&self, i: u32) -> f64 {
        2f64.powi((self.m - self.r + i) as i32)
    }

    /// `ln(N_i - 1)`, accurate for small `N_i`.
    fn ln_n_i_minus_one(&self, i: u32) -> f64 {
        ln_pow2_minus_one(self.m - self.r + i)
    }
}

/// `ln(2^k - 1)`.
fn ln_pow2_minus_one(k: u32) -> f64 {
    k as f64 * std::f64::consts::LN_2 + (-(2f64.powi(-(k as i32)))).ln_1p()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln sum_i e^(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Upper bounds `Z_1, ..., Z_r` with `Z_i = 1 - (1 - Z)^(2^(r-i))`.
pub fn bhattacharyya_sequence(inp: &BoundInputs) -> Vec<f64> {
    let ln_one_minus_z = (-inp.z).ln_1p();
    (1..=inp.r)
        .map(|i| -(2f64.powi((inp.r - i) as i32) * ln_one_minus_z).exp_m1())
        .collect()
}

/// The sequence validated as a bound input.
fn check_sequence(inp: &BoundInputs, z_seq: &[f64]) -> Result<()> {
    if z_seq.len() != inp.r as usize {
        return Err(Error::LengthMismatch {
            expected: inp.r as usize,
            found: z_seq.len(),
        });
    }
    if z_seq.iter().any(|&z| !(z > 0.0 && z <= 1.0)) {
        return Err(Error::ParameterOutOfRange("Bhattacharyya sequence must lie in (0, 1]".into()));
    }
    Ok(())
}

fn q1_from(inp: &BoundInputs, z1: f64) -> f64 {
    ln_pow2_minus_one(inp.m - inp.r + 2) + inp.n_i(0) * z1.ln()
}

/// `ln A_t = ln N_t + (N_t - 1) ln Z_t`.
fn ln_a(inp: &BoundInputs, z_seq: &[f64], t: u32) -> f64 {
    (inp.m - inp.r + t) as f64 * std::f64::consts::LN_2 + (inp.n_i(t) - 1.0) * z_seq[t as usize - 1].ln()
}

/// `ln P(Q_1)` bound: `ln(2^(m-r+2) - 1) + 2^(m-r) ln Z_1`.
pub fn q1_bound(inp: &BoundInputs) -> f64 {
    q1_from(inp, bhattacharyya_sequence(inp)[0])
}

/// `ln P(Q_2), ..., ln P(Q_r)` by iterating the recurrence.
pub fn q_recurrence(inp: &BoundInputs) -> Vec<f64> {
    q_recurrence_with(inp, &bhattacharyya_sequence(inp)).expect("generated sequence is valid")
}

/// [`q_recurrence`] with a caller-supplied Bhattacharyya sequence.
pub fn q_recurrence_with(inp: &BoundInputs, z_seq: &[f64]) -> Result<Vec<f64>> {
    check_sequence(inp, z_seq)?;
    let mut prev = q1_from(inp, z_seq[0]);
    Ok((2..=inp.r)
        .map(|i| {
            prev = log_add_exp(ln_a(inp, z_seq, i), inp.ln_n_i_minus_one(i) + prev);
            prev
        })
        .collect())
}

/// `ln P(Q_r)` bound from the unrolled sum.
pub fn unrolled_bound(inp: &BoundInputs) -> f64 {
    unrolled_bound_with(inp, &bhattacharyya_sequence(inp)).expect("generated sequence is valid")
}

/// [`unrolled_bound`] with a caller-supplied Bhattacharyya sequence.
pub fn unrolled_bound_with(inp: &BoundInputs, z_seq: &[f64]) -> Result<f64> {
    check_sequence(inp, z_seq)?;
    let r = inp.r;
    let ln_b_tail = |from: u32| (from..=r).map(|s| inp.ln_n_i_minus_one(s)).sum::<f64>();
    let mut terms: Vec<f64> = (2..=r).map(|t| ln_a(inp, z_seq, t) + ln_b_tail(t + 1)).collect();
    terms.push(q1_from(inp, z_seq[0]) + ln_b_tail(2));
    Ok(log_sum_exp(&terms))
}

/// `log2 m - log2(-ln(1 - Z))`: orders below this have vanishing error as `m` grows.
pub fn theorem_threshold(m: u32, z: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::ParameterOutOfRange(format!("threshold needs m >= 2, got {m}")));
    }
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("Bhattacharyya parameter {z} not in (0, 1)")));
    }
    let lambda = -(-z).ln_1p();
    Ok((m as f64).log2() - lambda.log2())
}

/// Every quantity of the analysis for one `(m, r, Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    /// `Z_1, ..., Z_r`.
    pub z_seq: Vec<f64>,
    /// `N_1, ..., N_r`.
    pub n_seq: Vec<f64>,
    /// `ln P(Q_1)` bound.
    pub q1: f64,
    /// `ln A_2, ..., ln A_r`.
    pub a_terms: Vec<f64>,
    /// `B_2, ..., B_r`.
    pub b_terms: Vec<f64>,
    /// `ln P(Q_2), ..., ln P(Q_r)` from the recurrence.
    pub q_seq: Vec<f64>,
    /// `ln P(Q_r)` from the unrolled sum (equals `q1` when `r = 1`).
    pub q_r: f64,
    /// `min(1, exp(q_r))`.
    pub q_r_clamped: f64,
    /// True when the bound is at least 1 and so says nothing.
    pub vacuous: bool,
    /// `r*(m, Z)`, or NaN when `m < 2`.
    pub threshold: f64,
}

impl BoundReport {
    pub fn new(inp: &BoundInputs) -> Self {
        Self::with_sequence(inp, bhattacharyya_sequence(inp)).expect("generated sequence is valid")
    }

    /// A report using exact per-level Bhattacharyya parameters instead of the
    /// unrolled upper bounds.
    pub fn with_sequence(inp: &BoundInputs, z_seq: Vec<f64>) -> Result<Self> {
        check_sequence(inp, &z_seq)?;
        let q1 = q1_from(inp, z_seq[0]);
        let q_seq = q_recurrence_with(inp, &z_seq)?;
        let q_r = unrolled_bound_with(inp, &z_seq)?;
        Ok(Self {
            inputs: *inp,
            n_seq: (1..=inp.r).map(|i| inp.n_i(i)).collect(),
            a_terms: (2..=inp.r).map(|t| ln_a(inp, &z_seq, t)).collect(),
            b_terms: (2..=inp.r).map(|t| inp.n_i(t) - 1.0).collect(),
            q1,
            q_seq,
            q_r,
            q_r_clamped: q_r.exp().min(1.0),
            vacuous: q_r >= 0.0,
            threshold: theorem_threshold(inp.m, inp.z).unwrap_or(f64::NAN),
            z_seq,
        })
    }

    /// Whether `r` lies strictly below the order threshold.
    pub fn r_below_threshold(&self) -> bool {
        (self.inputs.r as f64) < self.threshold
    }
}

/// Exact `Z_1, ..., Z_r` for a discrete channel: `Z_r = Z(W)` and each
/// level down applies the minus transform once more (merging equivalent
/// outputs between levels to keep the alphabet small).
pub fn exact_bhattacharyya_sequence(channel: &DiscreteBms, r: u32) -> Result<Vec<f64>> {
    if r == 0 {
        return Ok(Vec::new());
    }
    let mut seq = vec![0.0; r as usize];
    let mut w = channel.merge_equivalent_outputs(MERGE_TOL);
    seq[r as usize - 1] = w.bhattacharyya();
    for i in (0..r as usize - 1).rev() {
        w = w.combine_minus()?.merge_equivalent_outputs(MERGE_TOL);
        seq[i] = w.bhattacharyya();
    }
    Ok(seq)
}
