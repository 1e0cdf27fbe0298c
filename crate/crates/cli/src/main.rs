//! `rpa`: encode, decode, simulate and bound Reed-Muller codes under RPA
//! decoding.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 runtime failure.

mod commands;
mod config;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const SIMULATE_COLUMNS: &str = "\
Record columns, in order (JSON keys match the CSV header):
  command, tool_version, timestamp, m, r, n, k, channel, bhattacharyya,
  trials, seed, n_max, workers, all_zeros_mode, tie_break, max_frame_errors,
  trials_run, frame_errors, bit_errors, fer, ber, fer_ci95_low, fer_ci95_high,
  truncated, wall_seconds
With --with-bound, appended:
  bound_z, bound_ln_q1, bound_ln_q_r, bound_q_r, bound_vacuous,
  bound_threshold, bound_r_below_threshold, bound_applies, fer_within_bound";

const BOUND_COLUMNS: &str = "\
Record columns, in order (JSON keys match the CSV header):
  command, tool_version, timestamp, m, r, channel, z, exact_sequence,
  z_1..z_r, n_1..n_r, ln_q1, ln_a_2..ln_a_r, b_2..b_r, ln_q_2..ln_q_r,
  ln_q_r, q_r, vacuous, threshold, r_below_threshold
Log-domain fields are natural logarithms; q_r is min(1, exp(ln_q_r)).";

const CHANNEL_COLUMNS: &str = "\
Record columns, in order (JSON keys match the CSV header):
  command, tool_version, timestamp, channel, z, alphabet_size
With --quantize L: quantize_levels, quantized_z
With --combine k: combine, combined_z, combined_alphabet_size, combined_bound
combined_bound is 1 - (1 - Z)^(2^k).";

#[derive(Parser, Debug)]
#[command(name = "rpa", version, about = "Reed-Muller codes under recursive projection-aggregation decoding")]
pub struct Cli {
    /// TOML file of flag values; flags on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output format: json or csv for every command; bits or hex for codewords.
    #[arg(long, global = true, value_parser = ["json", "csv", "bits", "hex"])]
    pub format: Option<String>,

    /// Write the output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Encode a message (bits or 0x-prefixed hex, constant coefficient first).
    Encode(EncodeArgs),
    /// Decode received LLRs or a hard-decision word.
    Decode(DecodeArgs),
    /// Monte Carlo frame and bit error rates.
    #[command(after_help = SIMULATE_COLUMNS)]
    Simulate(SimulateArgs),
    /// Analytic upper bound on the one-iteration error probability.
    #[command(after_help = BOUND_COLUMNS)]
    Bound(BoundArgs),
    /// Order threshold log2(m) - log2(-ln(1 - Z)).
    Threshold(ThresholdArgs),
    /// Bhattacharyya parameter and minus-combining of a channel.
    #[command(after_help = CHANNEL_COLUMNS)]
    Channel(ChannelArgs),
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub message: Option<String>,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    /// Comma-separated channel LLRs, one per code bit.
    #[arg(long, conflicts_with = "received", allow_hyphen_values = true)]
    pub llrs: Option<String>,
    /// Hard-decision word (bits or 0x hex).
    #[arg(long)]
    pub received: Option<String>,
    /// Iterations per recursion level (default ceil(m/2)).
    #[arg(long)]
    pub iters: Option<usize>,
    /// lowest or random.
    #[arg(long)]
    pub tie_break: Option<String>,
    /// Seed for random tie-breaking.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    /// bsc:<p>, bec:<eps>, awgn:<sigma> or custom:<path>.
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iterations per recursion level (default ceil(m/2)).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Transmit random codewords instead of the all-zeros word.
    #[arg(long)]
    pub random_messages: bool,
    /// Stop after this many frame errors (0 disables).
    #[arg(long)]
    pub max_frame_errors: Option<u64>,
    /// Append the analytic bound for the same code and channel.
    #[arg(long)]
    pub with_bound: bool,
    /// random (default) or lowest.
    #[arg(long)]
    pub tie_break: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    /// Channel Bhattacharyya parameter.
    #[arg(long, conflicts_with = "channel")]
    pub z: Option<f64>,
    /// Channel spec; Z is computed from it.
    #[arg(long)]
    pub channel: Option<String>,
    /// Use the exact per-level parameters of a discrete channel.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, conflicts_with = "channel")]
    pub z: Option<f64>,
    #[arg(long)]
    pub channel: Option<String>,
}

#[derive(Args, Debug)]
pub struct ChannelArgs {
    #[arg(long)]
    pub channel: Option<String>,
    /// Apply the minus transform this many times.
    #[arg(long)]
    pub combine: Option<u32>,
    /// Quantize to this many outputs first (required before combining AWGN).
    #[arg(long)]
    pub quantize: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
