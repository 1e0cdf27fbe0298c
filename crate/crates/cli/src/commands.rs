use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rpa_core::bounds::{exact_bhattacharyya_sequence, theorem_threshold, BoundInputs, BoundReport};
use rpa_core::channel::{quantize, MERGE_TOL};
use rpa_core::decoder::{rpa_decode, DecoderConfig, LlrVector, TieBreak};
use rpa_core::sim::{run_trials, SimConfig, TieMode};
use rpa_core::{BitVec, ChannelModel, Codeword, DiscreteBms, Error, Message, RmCode, LLR_MAX};

use crate::config::FileConfig;
use crate::record::{Format, Record};
use crate::{BoundArgs, ChannelArgs, Cli, Command, DecodeArgs, EncodeArgs, SimulateArgs, ThresholdArgs};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn domain(message: impl ToString) -> CliError {
    CliError {
        code: 1,
        message: message.to_string(),
    }
}

fn usage(message: impl ToString) -> CliError {
    CliError {
        code: 2,
        message: message.to_string(),
    }
}

fn runtime(message: impl ToString) -> CliError {
    CliError {
        code: 3,
        message: message.to_string(),
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn need<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("missing --{name} (flag or config file)")))
}

struct Output {
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Output {
    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(usage(format!("--format {f:?} is not available for this command").to_lowercase()))
        }
    }

    fn emit(&self, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        let result = match &self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                write(&mut w).and_then(|_| w.flush())
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)
            }
        };
        result.map_err(|e| runtime(format!("writing output: {e}")))
    }

    fn record(&self, record: &Record) -> Result<()> {
        let format = self.format(Format::Json, &[Format::Json, Format::Csv])?;
        self.emit(|w| record.write(format, w))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(usage)?,
        None => FileConfig::default(),
    };
    let format = cli
        .format
        .or_else(|| file.format.clone())
        .map(|s| Format::parse(&s).ok_or_else(|| usage(format!("unknown format {s:?}"))))
        .transpose()?;
    let out = Output {
        format,
        out: cli.out.or_else(|| file.out.clone()),
    };
    match cli.command {
        Command::Encode(a) => encode(a, &file, &out),
        Command::Decode(a) => decode(a, &file, &out),
        Command::Simulate(a) => simulate(a, &file, &out),
        Command::Bound(a) => bound(a, &file, &out),
        Command::Threshold(a) => threshold(a, &file, &out),
        Command::Channel(a) => channel(a, &file, &out),
    }
}

fn parse_channel(spec: &str) -> Result<ChannelModel> {
    ChannelModel::parse_spec(spec).map_err(|e| usage(format!("channel {spec:?}: {e}")))
}

fn code_from(m: Option<u32>, r: Option<u32>, file: &FileConfig) -> Result<RmCode> {
    let m = need(m.or(file.m), "m")?;
    let r = need(r.or(file.r), "r")?;
    RmCode::new(m, r).map_err(usage)
}

fn tie_mode(s: Option<&str>, default: TieMode) -> Result<TieMode> {
    match s {
        None => Ok(default),
        Some("random") => Ok(TieMode::Randomized),
        Some("lowest") => Ok(TieMode::Lowest),
        Some(other) => Err(usage(format!("--tie-break must be `random` or `lowest`, got {other:?}"))),
    }
}

fn tie_name(t: TieMode) -> &'static str {
    match t {
        TieMode::Randomized => "random",
        TieMode::Lowest => "lowest",
    }
}

fn code_fields(rec: &mut Record, code: &RmCode) {
    rec.uint("m", code.m() as u64)
        .uint("r", code.r() as u64)
        .uint("n", code.n() as u64)
        .uint("k", code.k() as u64);
}

fn emit_codeword(out: &Output, word: &Codeword, rec: Record) -> Result<()> {
    match out.format(Format::Bits, &[Format::Bits, Format::Hex, Format::Json, Format::Csv])? {
        Format::Bits => out.emit(|w| writeln!(w, "{word}")),
        Format::Hex => out.emit(|w| writeln!(w, "{}", word.bits().to_hex_string())),
        f => out.emit(|w| rec.write(f, w)),
    }
}

fn encode(a: EncodeArgs, file: &FileConfig, out: &Output) -> Result<()> {
    let code = code_from(a.m, a.r, file)?;
    let text = need(a.message.or_else(|| file.message.clone()), "message")?;
    let bits = BitVec::parse(&text, code.k()).map_err(|e| domain(format!("message: {e}")))?;
    let word = code.encode(&Message::from_bits(bits.clone())).map_err(domain)?;
    let mut rec = Record::new("encode");
    code_fields(&mut rec, &code);
    rec.str("message", &bits.to_bit_string()).str("codeword", &word.to_string());
    emit_codeword(out, &word, rec)
}

fn decode(a: DecodeArgs, file: &FileConfig, out: &Output) -> Result<()> {
    let code = code_from(a.m, a.r, file)?;
    let llrs = match (a.llrs, a.received) {
        (Some(list), None) => {
            let values = list
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| domain(format!("LLR {s:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            LlrVector::with_default_clamp(values).map_err(domain)?
        }
        (None, Some(word)) => {
            let bits = BitVec::parse(&word, code.n()).map_err(|e| domain(format!("received word: {e}")))?;
            LlrVector::hard(&Codeword::from_bits(bits), LLR_MAX)
        }
        _ => return Err(usage("give exactly one of --llrs and --received")),
    };
    if llrs.len() != code.n() {
        return Err(domain(Error::LengthMismatch {
            expected: code.n(),
            found: llrs.len(),
        }));
    }
    let mut cfg = DecoderConfig::for_code(&code);
    if let Some(iters) = a.iters.or(file.iters) {
        cfg = DecoderConfig::new(iters).map_err(usage)?;
    }
    let tie = tie_mode(a.tie_break.as_deref().or(file.tie_break.as_deref()), TieMode::Lowest)?;
    let seed = a.seed.or(file.seed).unwrap_or(0);
    if tie == TieMode::Randomized {
        cfg = cfg.with_tie_break(TieBreak::Randomized { seed });
    }
    let word = rpa_decode(&code, &llrs, &cfg).map_err(domain)?;
    let message = code.message_of(&word).map_err(domain)?;

    let mut rec = Record::new("decode");
    code_fields(&mut rec, &code);
    rec.uint("n_max", cfg.n_max as u64).str("tie_break", tie_name(tie)).uint("seed", seed);
    rec.str("codeword", &word.to_string()).bool("is_codeword", message.is_some());
    match &message {
        Some(msg) => rec.str("message", &msg.to_string()),
        None => rec.null("message"),
    };
    emit_codeword(out, &word, rec)
}

fn simulate(a: SimulateArgs, file: &FileConfig, out: &Output) -> Result<()> {
    let code = code_from(a.m, a.r, file)?;
    let spec = need(a.channel.or_else(|| file.channel.clone()), "channel")?;
    let channel = parse_channel(&spec)?;
    let trials = need(a.trials.or(file.trials), "trials")?;
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let seed = need(a.seed.or(file.seed), "seed")?;
    let mut cfg = SimConfig::new(code, channel, trials, seed);
    if let Some(iters) = a.iters.or(file.iters) {
        if iters == 0 {
            return Err(usage("--iters must be at least 1"));
        }
        cfg.n_max = iters;
    }
    cfg.workers = a.workers.or(file.workers).unwrap_or(0);
    cfg.all_zeros_mode = !(a.random_messages || file.random_messages.unwrap_or(false));
    cfg.max_frame_errors = a.max_frame_errors.or(file.max_frame_errors).unwrap_or(0);
    cfg.tie_mode = tie_mode(a.tie_break.as_deref().or(file.tie_break.as_deref()), TieMode::Randomized)?;
    let with_bound = a.with_bound || file.with_bound.unwrap_or(false);
    // reject bad formats before spending time on the simulation
    out.format(Format::Json, &[Format::Json, Format::Csv])?;

    let res = run_trials(&cfg).map_err(|e| match e {
        Error::Config(_) => usage(e),
        other => runtime(other),
    })?;

    let mut rec = Record::new("simulate");
    code_fields(&mut rec, &cfg.code);
    rec.str("channel", &spec)
        .float("bhattacharyya", cfg.channel.bhattacharyya())
        .uint("trials", cfg.trials)
        .uint("seed", cfg.seed)
        .uint("n_max", cfg.n_max as u64)
        .uint("workers", cfg.workers as u64)
        .bool("all_zeros_mode", cfg.all_zeros_mode)
        .str("tie_break", tie_name(cfg.tie_mode))
        .uint("max_frame_errors", cfg.max_frame_errors)
        .uint("trials_run", res.trials_run)
        .uint("frame_errors", res.frame_errors)
        .uint("bit_errors", res.bit_errors)
        .float("fer", res.fer)
        .float("ber", res.ber)
        .float("fer_ci95_low", res.fer_ci95.0)
        .float("fer_ci95_high", res.fer_ci95.1)
        .bool("truncated", res.truncated)
        .float("wall_seconds", res.wall_seconds);
    if with_bound {
        let z = cfg.channel.bhattacharyya();
        let inp = BoundInputs::new(cfg.code.m(), cfg.code.r(), z).map_err(domain)?;
        let report = BoundReport::new(&inp);
        let q = report.q_r_clamped;
        let allowance = 3.0 * (q * (1.0 - q) / res.trials_run as f64).sqrt();
        rec.float("bound_z", z)
            .float("bound_ln_q1", report.q1)
            .float("bound_ln_q_r", report.q_r)
            .float("bound_q_r", q)
            .bool("bound_vacuous", report.vacuous)
            .float("bound_threshold", report.threshold)
            .bool("bound_r_below_threshold", report.r_below_threshold())
            .bool("bound_applies", cfg.n_max == 1)
            .bool("fer_within_bound", report.vacuous || res.fer <= q + allowance);
    }
    out.record(&rec)
}

/// Channel for `bound`/`threshold`: flags override the file as a pair.
fn z_source(
    z: Option<f64>,
    channel: Option<String>,
    file: &FileConfig,
) -> Result<(Option<f64>, Option<String>)> {
    let (z, channel) = if z.is_some() || channel.is_some() {
        (z, channel)
    } else {
        (file.z, file.channel.clone())
    };
    match (z, channel) {
        (Some(_), Some(_)) => Err(usage("give only one of --z and --channel")),
        (None, None) => Err(usage("missing --z or --channel (flag or config file)")),
        pair => Ok(pair),
    }
}

fn bound(a: BoundArgs, file: &FileConfig, out: &Output) -> Result<()> {
    let m = need(a.m.or(file.m), "m")?;
    let r = need(a.r.or(file.r), "r")?;
    let exact = a.exact || file.exact.unwrap_or(false);
    let (z_flag, spec) = z_source(a.z, a.channel, file)?;
    let model = spec.as_deref().map(parse_channel).transpose()?;
    let z = match (&model, z_flag) {
        (Some(ch), _) => ch.bhattacharyya(),
        (None, Some(z)) => z,
        (None, None) => unreachable!("checked by z_source"),
    };
    let inp = BoundInputs::new(m, r, z).map_err(domain)?;
    let report = if exact {
        let discrete = model
            .as_ref()
            .and_then(ChannelModel::to_discrete)
            .ok_or_else(|| usage("--exact needs a discrete --channel (bsc, bec or custom)"))?;
        let seq = exact_bhattacharyya_sequence(&discrete, r).map_err(domain)?;
        BoundReport::with_sequence(&inp, seq).map_err(domain)?
    } else {
        BoundReport::new(&inp)
    };

    let mut rec = Record::new("bound");
    rec.uint("m", m as u64).uint("r", r as u64);
    match &spec {
        Some(s) => rec.str("channel", s),
        None => rec.null("channel"),
    };
    rec.float("z", z).bool("exact_sequence", exact);
    for (i, zi) in report.z_seq.iter().enumerate() {
        rec.float(&format!("z_{}", i + 1), *zi);
    }
    for (i, ni) in report.n_seq.iter().enumerate() {
        rec.float(&format!("n_{}", i + 1), *ni);
    }
    rec.float("ln_q1", report.q1);
    for (i, a_t) in report.a_terms.iter().enumerate() {
        rec.float(&format!("ln_a_{}", i + 2), *a_t);
    }
    for (i, b_t) in report.b_terms.iter().enumerate() {
        rec.float(&format!("b_{}", i + 2), *b_t);
    }
    for (i, q) in report.q_seq.iter().enumerate() {
        rec.float(&format!("ln_q_{}", i + 2), *q);
    }
    rec.float("ln_q_r", report.q_r)
        .float("q_r", report.q_r_clamped)
        .bool("vacuous", report.vacuous)
        .float("threshold", report.threshold)
        .bool("r_below_threshold", report.r_below_threshold());
    out.record(&rec)
}

fn threshold(a: ThresholdArgs, file: &FileConfig, out: &Output) -> Result<()> {
    let m = need(a.m.or(file.m), "m")?;
    let (z_flag, spec) = z_source(a.z, a.channel, file)?;
    let z = match spec.as_deref() {
        Some(s) => parse_channel(s)?.bhattacharyya(),
        None => z_flag.expect("checked by z_source"),
    };
    let t = theorem_threshold(m, z).map_err(domain)?;
    let mut rec = Record::new("threshold");
    rec.uint("m", m as u64);
    match &spec {
        Some(s) => rec.str("channel", s),
        None => rec.null("channel"),
    };
    rec.float("z", z).float("threshold", t);
    out.record(&rec)
}

fn channel(a: ChannelArgs, file: &FileConfig, out: &Output) -> Result<()> {
    let spec = need(a.channel.or_else(|| file.channel.clone()), "channel")?;
    let model = parse_channel(&spec)?;
    let combine = a.combine.or(file.combine);
    let levels = a.quantize.or(file.quantize);

    let mut rec = Record::new("channel");
    rec.str("channel", &spec).float("z", model.bhattacharyya());
    match model.to_discrete() {
        Some(w) => rec.uint("alphabet_size", w.alphabet_size() as u64),
        None => rec.null("alphabet_size"),
    };

    let mut working: Option<DiscreteBms> = model.to_discrete();
    if let Some(levels) = levels {
        let q = quantize(&model, levels).map_err(domain)?;
        rec.uint("quantize_levels", levels as u64).float("quantized_z", q.bhattacharyya());
        working = Some(q);
    }
    if let Some(k) = combine {
        let base = working.ok_or_else(|| usage("combining a continuous channel needs --quantize"))?;
        let z = base.bhattacharyya();
        let mut w = base.merge_equivalent_outputs(MERGE_TOL);
        for _ in 0..k {
            w = w.combine_minus().map_err(domain)?.merge_equivalent_outputs(MERGE_TOL);
        }
        let bound = -(2f64.powi(k as i32) * (-z).ln_1p()).exp_m1();
        rec.uint("combine", k as u64)
            .float("combined_z", w.bhattacharyya())
            .uint("combined_alphabet_size", w.alphabet_size() as u64)
            .float("combined_bound", bound);
    }
    out.record(&rec)
}
