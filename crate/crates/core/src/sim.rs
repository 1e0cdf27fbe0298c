//! Seeded Monte Carlo estimation of frame and bit error rates.
//!
//! Trial `t` draws everything (message, channel noise, tie-break seed) from a
//! ChaCha8 stream keyed by `(seed, t)`. Trials run in fixed-size batches and
//! are merged in index order, so results do not depend on the worker count,
//! including where an early stop lands.

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use crate::bits::BitVec;
use crate::bounds::{BoundInputs, BoundReport};
use crate::channel::ChannelModel;
use crate::decoder::{rpa_decode, DecoderConfig, LlrVector, TieBreak};
use crate::error::{Error, Result};
use crate::oracle::OracleVerdict;
use crate::rm_code::{Message, RmCode};

const BATCH: u64 = 256;

/// Minimum trials per mode for [`symmetry_check`].
pub const SYMMETRY_MIN_TRIALS: u64 = 1000;

/// How the decoder resolves exact ties during a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Fair coin per tie, seeded from the trial stream. Keeps the decoder
    /// symmetric so the all-zeros frame is representative.
    #[default]
    Randomized,
    /// Deterministic lowest-index rule.
    Lowest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: RmCode,
    pub channel: ChannelModel,
    pub trials: u64,
    /// Stop once this many frame errors are seen; 0 disables.
    pub max_frame_errors: u64,
    pub seed: u64,
    pub n_max: usize,
    pub all_zeros_mode: bool,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub tie_mode: TieMode,
}

impl SimConfig {
    /// All-zeros mode, `n_max = ceil(m / 2)`, no early stop, one worker.
    pub fn new(code: RmCode, channel: ChannelModel, trials: u64, seed: u64) -> Self {
        let n_max = DecoderConfig::for_code(&code).n_max;
        Self {
            code,
            channel,
            trials,
            max_frame_errors: 0,
            seed,
            n_max,
            all_zeros_mode: true,
            workers: 1,
            tie_mode: TieMode::Randomized,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if self.code.r() == 0 {
            return Err(Error::Config("the decoder needs order r >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trials_run: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    /// Bit errors per transmitted code bit.
    pub ber: f64,
    pub fer_ci95: (f64, f64),
    pub wall_seconds: f64,
    /// The early stop fired before `trials` were run.
    pub truncated: bool,
    pub config: SimConfig,
}

impl SimResult {
    /// Equal in every field except wall time.
    pub fn same_outcome(&self, other: &SimResult) -> bool {
        self.trials_run == other.trials_run
            && self.frame_errors == other.frame_errors
            && self.bit_errors == other.bit_errors
            && self.fer.to_bits() == other.fer.to_bits()
            && self.ber.to_bits() == other.ber.to_bits()
            && self.fer_ci95.0.to_bits() == other.fer_ci95.0.to_bits()
            && self.fer_ci95.1.to_bits() == other.fer_ci95.1.to_bits()
            && self.truncated == other.truncated
    }
}

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    assert!(confidence > 0.0 && confidence < 1.0);
    let alpha = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    (low, high)
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generator for trial `t`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    frame_error: bool,
    bit_errors: u64,
}

fn run_one(cfg: &SimConfig, base: &DecoderConfig, trial: u64) -> Result<TrialOutcome> {
    let code = &cfg.code;
    let mut rng = trial_rng(cfg.seed, trial);
    let sent = if cfg.all_zeros_mode {
        BitVec::zeros(code.n())
    } else {
        let msg = Message::from_bits(BitVec::from_bools((0..code.k()).map(|_| rng.gen::<bool>())));
        code.encode(&msg)?.into_bits()
    };
    let llrs: Vec<f64> = (0..code.n())
        .map(|z| cfg.channel.sample_llr(sent.get(z) as u8, base.llr_clamp, &mut rng))
        .collect();
    let dec = match cfg.tie_mode {
        TieMode::Lowest => *base,
        TieMode::Randomized => base.with_tie_break(TieBreak::Randomized { seed: rng.next_u64() }),
    };
    let decoded = rpa_decode(code, &LlrVector::new(llrs, base.llr_clamp)?, &dec)?;
    let bit_errors = decoded.bits().hamming_distance(&sent) as u64;
    Ok(TrialOutcome {
        frame_error: bit_errors > 0,
        bit_errors,
    })
}

/// Runs the configured trials and summarizes the errors.
pub fn run_trials(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let base = DecoderConfig::new(cfg.n_max)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let start = Instant::now();

    let (mut trials_run, mut frame_errors, mut bit_errors) = (0u64, 0u64, 0u64);
    let mut stopped = false;
    let mut next = 0u64;
    while next < cfg.trials && !stopped {
        let end = (next + BATCH).min(cfg.trials);
        let outcomes: Vec<Result<TrialOutcome>> =
            pool.install(|| (next..end).into_par_iter().map(|t| run_one(cfg, &base, t)).collect());
        for outcome in outcomes {
            let outcome = outcome?;
            trials_run += 1;
            bit_errors += outcome.bit_errors;
            if outcome.frame_error {
                frame_errors += 1;
                if cfg.max_frame_errors > 0 && frame_errors >= cfg.max_frame_errors {
                    stopped = true;
                    break;
                }
            }
        }
        next = end;
    }

    Ok(SimResult {
        trials_run,
        frame_errors,
        bit_errors,
        fer: frame_errors as f64 / trials_run as f64,
        ber: bit_errors as f64 / (trials_run as f64 * cfg.code.n() as f64),
        fer_ci95: clopper_pearson(frame_errors, trials_run, 0.95),
        wall_seconds: start.elapsed().as_secs_f64(),
        truncated: trials_run < cfg.trials,
        config: cfg.clone(),
    })
}

/// Compares all-zeros and random-message runs under the same seed; matched
/// when their 95% intervals overlap.
pub fn symmetry_check(cfg: &SimConfig) -> Result<OracleVerdict> {
    if cfg.trials < SYMMETRY_MIN_TRIALS {
        return Err(Error::Config(format!(
            "symmetry check needs at least {SYMMETRY_MIN_TRIALS} trials per mode"
        )));
    }
    let mut zeros = cfg.clone();
    zeros.all_zeros_mode = true;
    zeros.max_frame_errors = 0;
    let mut random = zeros.clone();
    random.all_zeros_mode = false;
    let a = run_trials(&zeros)?;
    let b = run_trials(&random)?;
    let overlap = a.fer_ci95.0 <= b.fer_ci95.1 && b.fer_ci95.0 <= a.fer_ci95.1;
    let summary = format!(
        "all-zeros {}/{} {:?}, random {}/{} {:?}",
        a.frame_errors, a.trials_run, a.fer_ci95, b.frame_errors, b.trials_run, b.fer_ci95
    );
    Ok(if overlap {
        OracleVerdict {
            matched: true,
            detail: summary,
        }
    } else {
        OracleVerdict::fail(summary)
    })
}

/// Analytic bound for a configuration, from the channel's Bhattacharyya
/// parameter.
pub fn bound_for(cfg: &SimConfig) -> Result<BoundReport> {
    let inp = BoundInputs::new(cfg.code.m(), cfg.code.r(), cfg.channel.bhattacharyya())?;
    Ok(BoundReport::new(&inp))
}

/// Runs each configuration and pairs it with its bound. A failing
/// configuration yields an error in its slot; the rest still run.
pub fn sweep(cfgs: &[SimConfig]) -> Result<Vec<Result<(SimResult, BoundReport)>>> {
    if cfgs.is_empty() {
        return Err(Error::Config("sweep needs at least one configuration".into()));
    }
    Ok(cfgs
        .iter()
        .map(|cfg| Ok((run_trials(cfg)?, bound_for(cfg)?)))
        .collect())
}
