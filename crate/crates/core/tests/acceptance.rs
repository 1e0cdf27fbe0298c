//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use dashu_float::round::mode::HalfAway;
use dashu_float::FBig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rpa_core::bounds::{q_recurrence, theorem_threshold, unrolled_bound, BoundInputs};
use rpa_core::channel::{ChannelModel, DiscreteBms};
use rpa_core::oracle::{empirical_projected_channel, ml_decode_exhaustive};
use rpa_core::sim::{clopper_pearson, run_trials, symmetry_check, SimConfig};
use rpa_core::{fht_decode, rpa_decode, BitVec, Codeword, DecoderConfig, LlrVector, Message, RmCode, LLR_MAX};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_symmetric_channel(rng: &mut ChaCha8Rng) -> DiscreteBms {
    let pairs = rng.gen_range(1..=4);
    let fixed = rng.gen_bool(0.5);
    let mut outputs = Vec::new();
    let (mut p0, mut p1) = (Vec::new(), Vec::new());
    for i in 0..pairs {
        let a: f64 = rng.gen_range(0.01..1.0);
        let b: f64 = rng.gen_range(0.01..1.0);
        outputs.push(format!("y{i}"));
        p0.push(a);
        p1.push(b);
        outputs.push(format!("y{i}'"));
        p0.push(b);
        p1.push(a);
    }
    if fixed {
        let c: f64 = rng.gen_range(0.01..1.0);
        outputs.push("e".into());
        p0.push(c);
        p1.push(c);
    }
    let total: f64 = p0.iter().sum();
    let p0: Vec<f64> = p0.iter().map(|x| x / total).collect();
    let p1: Vec<f64> = p1.iter().map(|x| x / total).collect();
    DiscreteBms::new(outputs, p0, p1).expect("constructed symmetric")
}

fn fht_matches_ml() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for m in [3u32, 4] {
        let code = RmCode::new(m, 1).unwrap();
        for i in 0..10_000 {
            let l: Vec<f64> = (0..code.n()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let l = LlrVector::with_default_clamp(l).unwrap();
            let fast = fht_decode(&l).unwrap().codeword;
            let slow = ml_decode_exhaustive(&code, &l).unwrap();
            if fast != slow {
                return Err(format!("RM({m},1) vector {i}: fht {fast} vs ml {slow}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} vectors, all equal"))
}

fn combined_bhattacharyya_bound() -> Outcome {
    let mut channels: Vec<(String, DiscreteBms)> = Vec::new();
    let mut ps = vec![0.01];
    ps.extend((1..=9).map(|i| 0.05 * i as f64));
    for p in ps {
        channels.push((format!("bsc:{p}"), ChannelModel::bsc(p).unwrap().to_discrete().unwrap()));
    }
    for i in 1..=9 {
        let eps = 0.1 * i as f64;
        channels.push((format!("bec:{eps}"), ChannelModel::bec(eps).unwrap().to_discrete().unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..50 {
        channels.push((format!("random #{i}"), random_symmetric_channel(&mut rng)));
    }
    let mut worst = f64::INFINITY;
    for (name, w) in &channels {
        let z = w.bhattacharyya();
        let zc = w.combine_minus().unwrap().bhattacharyya();
        let slack = 1.0 - (1.0 - z).powi(2) - zc;
        worst = worst.min(slack);
        if slack < -1e-12 {
            return Err(format!("{name}: Z- = {zc} exceeds {}", 1.0 - (1.0 - z).powi(2)));
        }
    }
    let bsc = ChannelModel::bsc(0.1).unwrap().to_discrete().unwrap();
    let zc = bsc.combine_minus().unwrap().bhattacharyya();
    let expected = 2.0 * (0.18f64 * 0.82).sqrt();
    check(
        (zc - expected).abs() < 1e-12 && (zc - 0.768375).abs() < 1e-6 && zc <= 0.84,
        format!("{} channels, min slack {worst:.3e}; BSC(0.1) Z- = {zc:.6}", channels.len()),
    )
}

fn empirical_projection() -> Outcome {
    let w = ChannelModel::bsc(0.2).unwrap().to_discrete().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let emp = empirical_projected_channel(&w, 100_000, &mut rng).unwrap();
    let flip = emp.fraction(|y1, y2, s| ((y1 ^ y2) as u8) != s);
    let sd = (0.32f64 * 0.68 / 100_000.0).sqrt();
    check(
        emp.tv_distance <= 0.02 && (flip - 0.32).abs() <= 3.0 * sd,
        format!("TV {:.4}, parity-flip rate {flip:.4} (0.32 +- {:.4})", emp.tv_distance, 3.0 * sd),
    )
}

type Big = FBig<HalfAway, 2>;

fn big(n: u64) -> Big {
    Big::from(n).with_precision(200).value()
}

/// Unrolled bound at 200 bits, written from the product form without logs.
fn unrolled_bound_bigfloat(m: u32, r: u32, p_num: u64, p_den: u64) -> f64 {
    let p = big(p_num) / big(p_den);
    let one = big(1);
    let z = big(2) * ((p.clone() * (one.clone() - p)).ln() / big(2)).exp();
    let z_i = |i: u32| one.clone() - (one.clone() - z.clone()).powi((1i64 << (r - i)).into());
    let n_i = |i: u32| 1i64 << (m - r + i);
    let b_tail = |from: u32| {
        (from..=r).fold(big(1), |acc, s| acc * big((n_i(s) - 1) as u64))
    };
    let q1 = big((1u64 << (m - r + 2)) - 1) * z_i(1).powi(n_i(0).into());
    let mut total = q1 * b_tail(2);
    for t in 2..=r {
        let a = big(n_i(t) as u64) * z_i(t).powi((n_i(t) - 1).into());
        total += a * b_tail(t + 1);
    }
    total.ln().to_f64().value()
}

fn bound_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.gen_range(6..=20u32);
        let r = rng.gen_range(2..=4u32);
        let z = 0.1 * rng.gen_range(1..=9) as f64;
        let inp = BoundInputs::new(m, r, z).unwrap();
        let rec = *q_recurrence(&inp).last().unwrap();
        let unr = unrolled_bound(&inp);
        let rel = (rec - unr).abs() / unr.abs().max(1.0);
        worst = worst.max(rel);
        if rel > 1e-9 {
            return Err(format!("m={m} r={r} Z={z}: recurrence {rec} vs unrolled {unr}"));
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=99 {
            let zk = 0.01 * k as f64;
            let v = unrolled_bound(&BoundInputs::new(m, r, zk).unwrap());
            let w = *q_recurrence(&BoundInputs::new(m, r, zk).unwrap()).last().unwrap();
            if v < prev || w < prev - 1e-9 * prev.abs() {
                return Err(format!("m={m} r={r}: bound decreases at Z={zk}"));
            }
            prev = v;
        }
    }
    let inp = BoundInputs::new(20, 2, ChannelModel::bsc(0.01).unwrap().bhattacharyya()).unwrap();
    let fast = unrolled_bound(&inp);
    let precise = unrolled_bound_bigfloat(20, 2, 1, 100);
    let rel = (fast - precise).abs() / precise.abs();
    check(
        rel <= 1e-9,
        format!("20-point grid max rel diff {worst:.2e}; m=20 r=2 BSC(0.01): {fast} vs 200-bit {precise} (rel {rel:.2e})"),
    )
}

fn noiseless_recovery() -> Outcome {
    let small = RmCode::new(4, 2).unwrap();
    let cfg = DecoderConfig::for_code(&small);
    let mut count = 0;
    for word in small.enumerate_codewords().unwrap() {
        let out = rpa_decode(&small, &LlrVector::hard(&word, LLR_MAX), &cfg).unwrap();
        if out != word {
            return Err(format!("RM(4,2) codeword {word} decoded as {out}"));
        }
        count += 1;
    }
    let big_code = RmCode::new(8, 3).unwrap();
    let cfg = DecoderConfig::for_code(&big_code).with_parallel(true);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..1000 {
        let msg = Message::from_bits(BitVec::from_bools((0..big_code.k()).map(|_| rng.gen())));
        let word = big_code.encode(&msg).unwrap();
        let out = rpa_decode(&big_code, &LlrVector::hard(&word, LLR_MAX), &cfg).unwrap();
        if out != word {
            return Err(format!("RM(8,3) random codeword {i} not recovered"));
        }
    }
    Ok(format!("{count} RM(4,2) codewords and 1000 RM(8,3) codewords recovered"))
}

fn first_order_radius() -> Outcome {
    let code = RmCode::new(4, 1).unwrap();
    let n = code.n();
    let words: Vec<Codeword> = code.enumerate_codewords().unwrap().collect();
    let decodes = |word: &Codeword, flips: &[usize]| {
        let mut bits = word.bits().clone();
        for &f in flips {
            bits.flip(f);
        }
        let noisy = LlrVector::hard(&Codeword::from_bits(bits), LLR_MAX);
        fht_decode(&noisy).unwrap().codeword == *word
    };
    let mut patterns = 0;
    for word in &words {
        for a in 0..n {
            if !decodes(word, &[a]) {
                return Err(format!("{word}: flip {a} not corrected"));
            }
            patterns += 1;
            for b in a + 1..n {
                if !decodes(word, &[a, b]) {
                    return Err(format!("{word}: flips {a},{b} not corrected"));
                }
                patterns += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let word = &words[rng.gen_range(0..words.len())];
        let flips = rand::seq::index::sample(&mut rng, n, 3).into_vec();
        if !decodes(word, &flips) {
            return Err(format!("{word}: flips {flips:?} not corrected"));
        }
        patterns += 1;
    }
    Ok(format!("{patterns} error patterns of weight 1-3 corrected"))
}

fn sim_cfg(m: u32, r: u32, channel: &str, trials: u64, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(RmCode::new(m, r).unwrap(), channel.parse().unwrap(), trials, seed);
    cfg.workers = 0;
    cfg
}

fn bound_vs_simulation() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for m in [6u32, 7] {
        for p in ["0.001", "0.002"] {
            let mut cfg = sim_cfg(m, 2, &format!("bsc:{p}"), 10_000, 700 + m as u64);
            cfg.n_max = 1;
            let res = run_trials(&cfg).unwrap();
            let ln_bound = unrolled_bound(&BoundInputs::new(m, 2, cfg.channel.bhattacharyya()).unwrap());
            let bound = ln_bound.exp();
            let pass = if bound < 1.0 {
                let allowance = 3.0 * (bound * (1.0 - bound) / res.trials_run as f64).sqrt();
                res.fer <= bound + allowance
            } else {
                true
            };
            ok &= pass;
            lines.push(format!("RM({m},2) bsc:{p} fer {} vs ln bound {ln_bound:.3}", res.fer));
        }
    }
    check(ok, lines.join("; "))
}

fn finite_scale_trend() -> Outcome {
    let mut results = Vec::new();
    for m in [6u32, 7, 8] {
        let mut cfg = sim_cfg(m, 2, "bsc:0.01", 10_000, 800 + m as u64);
        cfg.n_max = 1;
        let res = run_trials(&cfg).unwrap();
        results.push((m, res.frame_errors, res.trials_run));
    }
    let mut ok = true;
    for pair in results.windows(2) {
        let (_, ka, na) = pair[0];
        let (_, kb, nb) = pair[1];
        let (fa, fb) = (ka as f64 / na as f64, kb as f64 / nb as f64);
        let (ia, ib) = (clopper_pearson(ka, na, 0.95), clopper_pearson(kb, nb, 0.95));
        let overlap = ia.0 <= ib.1 && ib.0 <= ia.1;
        ok &= fb <= fa || overlap;
    }
    let threshold = theorem_threshold(128, 0.6).unwrap();
    let direct = 7.0 - (-(0.4f64.ln())).log2();
    ok &= (threshold - direct).abs() <= 1e-3 && (threshold - 7.126).abs() <= 1e-3;
    let summary: Vec<String> = results.iter().map(|(m, k, n)| format!("m={m}: {k}/{n}")).collect();
    check(ok, format!("{}; threshold(128, 0.6) = {threshold:.6}", summary.join(", ")))
}

fn all_zeros_reduction() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for channel in ["bsc:0.05", "bec:0.4"] {
        let verdict = symmetry_check(&sim_cfg(5, 2, channel, 5000, 900)).unwrap();
        ok &= verdict.matched;
        lines.push(format!("{channel}: {}", verdict.detail));
    }
    check(ok, lines.join("; "))
}

fn worker_determinism() -> Outcome {
    let mut lines = Vec::new();
    for (channel, random) in [("bsc:0.1", false), ("awgn:0.9", true), ("bec:0.55", true)] {
        let mut cfg = sim_cfg(6, 2, channel, 2000, 1000);
        cfg.all_zeros_mode = !random;
        cfg.max_frame_errors = 50;
        let mut counts = Vec::new();
        for workers in [1usize, 2, 8] {
            cfg.workers = workers;
            let res = run_trials(&cfg).unwrap();
            counts.push((res.trials_run, res.frame_errors, res.bit_errors));
        }
        if counts.iter().any(|c| *c != counts[0]) {
            return Err(format!("{channel}: counts differ across workers {counts:?}"));
        }
        lines.push(format!("{channel}: {:?}", counts[0]));
    }
    Ok(format!("workers 1/2/8 identical; {}", lines.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fast Hadamard decoder equals exhaustive ML", fht_matches_ml),
        ("minus-combined Bhattacharyya bound", combined_bhattacharyya_bound),
        ("empirical projected channel", empirical_projection),
        ("recurrence, unrolled and 200-bit bounds agree", bound_consistency),
        ("noiseless RPA recovery", noiseless_recovery),
        ("first-order decoding radius", first_order_radius),
        ("simulated FER within analytic bound", bound_vs_simulation),
        ("FER trend in m and order threshold", finite_scale_trend),
        ("all-zeros reduction", all_zeros_reduction),
        ("determinism across worker counts", worker_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
