//! Binary-input memoryless symmetric channels.
//!
//! A channel is either one of the parametric families (BSC, BEC, BI-AWGN) or an
//! explicit finite-output [`DiscreteBms`]. Discrete channels support the exact
//! minus transform `W -> W^-` (the channel seen by the XOR of two inputs over
//! two independent uses), output merging by likelihood ratio, and the
//! Bhattacharyya parameter as a finite sum. BI-AWGN reaches the discrete
//! machinery through [`quantize`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use crate::error::{Error, Result};

/// Default magnitude limit for log-likelihood ratios.
pub const LLR_MAX: f64 = 40.0;

/// Tolerance for the normalization and symmetry checks on discrete channels.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default LLR tolerance used when merging equivalent outputs.
pub const MERGE_TOL: f64 = 1e-9;

/// Largest input alphabet accepted by [`DiscreteBms::combine_minus`].
pub const MAX_COMBINE_ALPHABET: usize = 4096;

/// Clamps a log-likelihood ratio into `[-clamp, clamp]`, mapping infinities to the ends.
#[inline]
pub fn clamp_llr(x: f64, clamp: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-clamp, clamp)
    }
}

/// A single channel output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelOutput {
    /// BSC output, or an unerased BEC output.
    Bit(u8),
    Erasure,
    /// BI-AWGN output.
    Real(f64),
    /// Index into a discrete channel's alphabet.
    Symbol(usize),
}

/// A finite-output BMS channel given by its two conditional distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBms {
    outputs: Vec<String>,
    p0: Vec<f64>,
    p1: Vec<f64>,
    cdf0: Vec<f64>,
    cdf1: Vec<f64>,
}

impl DiscreteBms {
    /// Validates normalization, nonnegativity and output symmetry.
    pub fn new(outputs: Vec<String>, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        if p0.len() != outputs.len() || p1.len() != outputs.len() {
            return Err(Error::InvalidChannel(format!(
                "{} outputs but {} / {} probabilities",
                outputs.len(),
                p0.len(),
                p1.len()
            )));
        }
        if p0.iter().chain(&p1).any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidChannel("probabilities must be finite and nonnegative".into()));
        }
        for (name, p) in [("p(y|0)", &p0), ("p(y|1)", &p1)] {
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidChannel(format!("{name} sums to {total}, not 1")));
            }
        }
        // A symmetry involution exists iff the multiset of (p0, p1) pairs equals
        // the multiset of swapped pairs.
        let mut direct: Vec<(f64, f64)> = p0.iter().copied().zip(p1.iter().copied()).collect();
        let mut swapped: Vec<(f64, f64)> = p1.iter().copied().zip(p0.iter().copied()).collect();
        let by_pair = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
        direct.sort_by(by_pair);
        swapped.sort_by(by_pair);
        for (a, b) in direct.iter().zip(&swapped) {
            if (a.0 - b.0).abs() > SYMMETRY_TOL || (a.1 - b.1).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidChannel(
                    "no output involution maps p(y|0) onto p(y|1)".into(),
                ));
            }
        }
        let cumulative = |p: &[f64]| {
            let mut acc = 0.0;
            p.iter()
                .map(|&x| {
                    acc += x;
                    acc
                })
                .collect::<Vec<_>>()
        };
        let cdf0 = cumulative(&p0);
        let cdf1 = cumulative(&p1);
        Ok(Self {
            outputs,
            p0,
            p1,
            cdf0,
            cdf1,
        })
    }

    /// Parses the text format: one output per line, `symbol, p(y|0), p(y|1)`.
    /// Commas or whitespace separate fields; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut outputs = Vec::new();
        let mut p0 = Vec::new();
        let mut p1 = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `symbol, p0, p1`, got {raw:?}",
                    lineno + 1
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {s:?}: {e}", lineno + 1)))
            };
            outputs.push(fields[0].to_string());
            p0.push(num(fields[1])?);
            p1.push(num(fields[2])?);
        }
        Self::new(outputs, p0, p1)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn alphabet_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.outputs.iter().position(|s| s == symbol)
    }

    /// `sum_y sqrt(W(y|0) W(y|1))`.
    pub fn bhattacharyya(&self) -> f64 {
        self.p0
            .iter()
            .zip(&self.p1)
            .map(|(a, b)| (a * b).sqrt())
            .sum()
    }

    /// Unclamped LLR of output `y`; `+-inf` where one likelihood vanishes.
    pub fn raw_llr(&self, y: usize) -> f64 {
        llr_of(self.p0[y], self.p1[y])
    }

    pub fn llr(&self, y: usize, clamp: f64) -> Result<f64> {
        if y >= self.outputs.len() {
            return Err(Error::UnknownSymbol(format!("symbol index {y}")));
        }
        Ok(clamp_llr(self.raw_llr(y), clamp))
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, input: u8, rng: &mut R) -> usize {
        let cdf = if input == 0 { &self.cdf0 } else { &self.cdf1 };
        let p = if input == 0 { &self.p0 } else { &self.p1 };
        let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
        let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        // never land on a zero-probability symbol through rounding
        if p[i] > 0.0 {
            i
        } else {
            (0..=i).rev().chain(i + 1..p.len()).find(|&j| p[j] > 0.0).unwrap_or(i)
        }
    }

    /// The exact minus transform `W^-(y1, y2 | s) = 1/2 sum_{u1 ^ u2 = s} W(y1|u1) W(y2|u2)`.
    ///
    /// Output `y1 * |Y| + y2` is the pair `(y1, y2)`, labelled `"y1.y2"`.
    pub fn combine_minus(&self) -> Result<DiscreteBms> {
        let q = self.outputs.len();
        if q > MAX_COMBINE_ALPHABET {
            return Err(Error::AlphabetOverflow {
                size: q,
                limit: MAX_COMBINE_ALPHABET,
            });
        }
        let mut outputs = Vec::with_capacity(q * q);
        let mut p0 = Vec::with_capacity(q * q);
        let mut p1 = Vec::with_capacity(q * q);
        for a in 0..q {
            for b in 0..q {
                outputs.push(format!("{}.{}", self.outputs[a], self.outputs[b]));
                p0.push(0.5 * (self.p0[a] * self.p0[b] + self.p1[a] * self.p1[b]));
                p1.push(0.5 * (self.p0[a] * self.p1[b] + self.p1[a] * self.p0[b]));
            }
        }
        renormalize(&mut p0);
        renormalize(&mut p1);
        DiscreteBms::new(outputs, p0, p1)
    }

    /// Merges outputs whose LLRs agree within `tol` (infinite LLRs merge with
    /// equal infinities). Zero-probability outputs are dropped.
    ///
    /// Outputs are clustered on `|LLR|` and each cluster is split by sign, so
    /// every merged output keeps its mirror image; a cluster at `|LLR| <= tol`
    /// becomes a single self-symmetric output.
    pub fn merge_equivalent_outputs(&self, tol: f64) -> DiscreteBms {
        let mut order: Vec<usize> = (0..self.outputs.len())
            .filter(|&y| self.p0[y] > 0.0 || self.p1[y] > 0.0)
            .collect();
        order.sort_by(|&a, &b| self.raw_llr(a).abs().total_cmp(&self.raw_llr(b).abs()));

        let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
        for y in order {
            let mag = self.raw_llr(y).abs();
            match clusters.last_mut() {
                Some((anchor, members))
                    if mag == *anchor || (mag.is_finite() && mag - *anchor <= tol) =>
                {
                    members.push(y)
                }
                _ => clusters.push((mag, vec![y])),
            }
        }

        let mut merged: Vec<(String, f64, f64)> = Vec::new();
        let mut push = |members: Vec<usize>| {
            if let Some(&first) = members.first() {
                let p0 = members.iter().map(|&y| self.p0[y]).sum();
                let p1 = members.iter().map(|&y| self.p1[y]).sum();
                merged.push((self.outputs[first].clone(), p0, p1));
            }
        };
        for (anchor, members) in clusters {
            if anchor <= tol {
                push(members);
            } else {
                let (neg, pos): (Vec<usize>, Vec<usize>) =
                    members.into_iter().partition(|&y| self.raw_llr(y) < 0.0);
                push(neg);
                push(pos);
            }
        }
        merged.sort_by(|a, b| llr_of(a.1, a.2).total_cmp(&llr_of(b.1, b.2)));
        let (outputs, (p0, p1)) = merged.into_iter().map(|(o, a, b)| (o, (a, b))).unzip();
        DiscreteBms::new(outputs, p0, p1)
            .expect("merging LLR classes of a symmetric channel keeps it symmetric")
    }
}

fn llr_of(a: f64, b: f64) -> f64 {
    match (a > 0.0, b > 0.0) {
        (true, true) => (a / b).ln(),
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (false, false) => 0.0,
    }
}

fn renormalize(p: &mut [f64]) {
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
}

/// A BMS channel model.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// Binary symmetric channel with crossover probability `p`.
    Bsc { p: f64 },
    /// Binary erasure channel with erasure probability `eps`.
    Bec { eps: f64 },
    /// Antipodal `+-1` inputs (bit 0 -> +1) plus Gaussian noise of std `sigma`.
    BiAwgn { sigma: f64 },
    Custom(DiscreteBms),
}

impl ChannelModel {
    pub fn bsc(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidChannel(format!("BSC crossover {p} not in (0, 1/2)")));
        }
        Ok(Self::Bsc { p })
    }

    pub fn bec(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidChannel(format!("BEC erasure probability {eps} not in (0, 1)")));
        }
        Ok(Self::Bec { eps })
    }

    pub fn bi_awgn(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidChannel(format!("noise std {sigma} must be positive")));
        }
        Ok(Self::BiAwgn { sigma })
    }

    /// Wraps a discrete channel, rejecting the degenerate cases `Z = 0` and `Z = 1`.
    pub fn custom(channel: DiscreteBms) -> Result<Self> {
        let z = channel.bhattacharyya();
        if !(z > SYMMETRY_TOL && z < 1.0 - SYMMETRY_TOL) {
            return Err(Error::InvalidChannel(format!("degenerate channel (Z = {z})")));
        }
        Ok(Self::Custom(channel))
    }

    /// Parses `bsc:<p>`, `bec:<eps>`, `awgn:<sigma>` or `custom:<path>`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("channel spec {spec:?} is not `kind:value`")))?;
        let num = || {
            arg.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("channel parameter {arg:?}: {e}")))
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "bsc" => Self::bsc(num()?),
            "bec" => Self::bec(num()?),
            "awgn" | "biawgn" => Self::bi_awgn(num()?),
            "custom" => Self::custom(DiscreteBms::from_file(Path::new(arg.trim()))?),
            other => Err(Error::Parse(format!("unknown channel kind {other:?}"))),
        }
    }

    /// Draws one output for the given input bit.
    pub fn sample<R: Rng + ?Sized>(&self, input: u8, rng: &mut R) -> ChannelOutput {
        match self {
            Self::Bsc { p } => ChannelOutput::Bit(input ^ u8::from(rng.gen_bool(*p))),
            Self::Bec { eps } => {
                if rng.gen_bool(*eps) {
                    ChannelOutput::Erasure
                } else {
                    ChannelOutput::Bit(input)
                }
            }
            Self::BiAwgn { sigma } => {
                let x = if input == 0 { 1.0 } else { -1.0 };
                let noise = Normal::new(0.0, *sigma).expect("sigma validated at construction");
                ChannelOutput::Real(x + noise.sample(rng))
            }
            Self::Custom(w) => ChannelOutput::Symbol(w.sample_index(input, rng)),
        }
    }

    /// LLR of `y` clamped to [`LLR_MAX`].
    pub fn llr(&self, y: &ChannelOutput) -> Result<f64> {
        self.llr_clamped(y, LLR_MAX)
    }

    pub fn llr_clamped(&self, y: &ChannelOutput, clamp: f64) -> Result<f64> {
        let raw = match (self, *y) {
            (Self::Bsc { p }, ChannelOutput::Bit(b)) if b <= 1 => {
                let l = ((1.0 - p) / p).ln();
                if b == 0 {
                    l
                } else {
                    -l
                }
            }
            (Self::Bec { .. }, ChannelOutput::Erasure) => 0.0,
            (Self::Bec { .. }, ChannelOutput::Bit(0)) => f64::INFINITY,
            (Self::Bec { .. }, ChannelOutput::Bit(1)) => f64::NEG_INFINITY,
            (Self::BiAwgn { sigma }, ChannelOutput::Real(v)) if v.is_finite() => 2.0 * v / (sigma * sigma),
            (Self::Custom(w), ChannelOutput::Symbol(i)) => return w.llr(i, clamp),
            (_, other) => return Err(Error::UnknownSymbol(format!("{other:?} for {self}"))),
        };
        Ok(clamp_llr(raw, clamp))
    }

    /// Samples an output and returns its clamped LLR.
    pub fn sample_llr<R: Rng + ?Sized>(&self, input: u8, clamp: f64, rng: &mut R) -> f64 {
        let y = self.sample(input, rng);
        self.llr_clamped(&y, clamp)
            .expect("a sampled output is always legal for its own channel")
    }

    /// Bhattacharyya parameter (closed form for the parametric families).
    pub fn bhattacharyya(&self) -> f64 {
        match self {
            Self::Bsc { p } => 2.0 * (p * (1.0 - p)).sqrt(),
            Self::Bec { eps } => *eps,
            Self::BiAwgn { sigma } => (-1.0 / (2.0 * sigma * sigma)).exp(),
            Self::Custom(w) => w.bhattacharyya(),
        }
    }

    /// The discrete form of a finite-output channel; `None` for BI-AWGN.
    pub fn to_discrete(&self) -> Option<DiscreteBms> {
        let build = |outputs: &[&str], p0: Vec<f64>, p1: Vec<f64>| {
            DiscreteBms::new(outputs.iter().map(|s| s.to_string()).collect(), p0, p1)
                .expect("parametric families are symmetric")
        };
        match self {
            Self::Bsc { p } => Some(build(&["0", "1"], vec![1.0 - p, *p], vec![*p, 1.0 - p])),
            Self::Bec { eps } => Some(build(
                &["0", "e", "1"],
                vec![1.0 - eps, *eps, 0.0],
                vec![0.0, *eps, 1.0 - eps],
            )),
            Self::BiAwgn { .. } => None,
            Self::Custom(w) => Some(w.clone()),
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bsc { p } => write!(f, "bsc:{p}"),
            Self::Bec { eps } => write!(f, "bec:{eps}"),
            Self::BiAwgn { sigma } => write!(f, "awgn:{sigma}"),
            Self::Custom(w) => write!(f, "custom[{} outputs]", w.alphabet_size()),
        }
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_spec(s)
    }
}

/// Symmetric LLR-domain quantization to `levels` outputs.
///
/// Finite-output channels are returned unchanged. For BI-AWGN the channel LLR
/// under input 0 is `N(mu, 2 mu)` with `mu = 2 / sigma^2`; the positive half
/// line `[0, mu + 8 sqrt(2 mu)]` is split into `levels / 2 - 1` equal bins plus
/// one unbounded tail bin, and the negative half mirrors it.
pub fn quantize(channel: &ChannelModel, levels: usize) -> Result<DiscreteBms> {
    if levels < 4 || levels % 2 != 0 {
        return Err(Error::ParameterOutOfRange(format!(
            "quantization levels must be even and >= 4, got {levels}"
        )));
    }
    let sigma = match channel {
        ChannelModel::BiAwgn { sigma } => *sigma,
        other => return Ok(other.to_discrete().expect("finite-output channel")),
    };
    let mu = 2.0 / (sigma * sigma);
    let law = NormalDist::new(mu, (2.0 * mu).sqrt()).expect("positive variance");
    let half = levels / 2;
    let top = mu + 8.0 * (2.0 * mu).sqrt();
    let width = top / (half - 1) as f64;
    // edges on the positive side: 0, w, 2w, ..., (half-1)w, +inf
    let edge = |i: usize| if i >= half { f64::INFINITY } else { i as f64 * width };
    // probability mass of [a, b) under input 0
    let mass = |a: f64, b: f64| {
        let hi = if b.is_infinite() { 1.0 } else { law.cdf(b) };
        let lo = if a.is_infinite() { 0.0 } else { law.cdf(a) };
        (hi - lo).max(0.0)
    };
    // Bins ordered from most negative LLR to most positive; bin for the
    // interval [e_i, e_{i+1}) on the positive side and its mirror.
    let mut outputs = Vec::with_capacity(levels);
    let mut p0 = Vec::with_capacity(levels);
    let mut p1 = Vec::with_capacity(levels);
    for i in (0..half).rev() {
        let (a, b) = (edge(i), edge(i + 1));
        outputs.push(format!("-{i}"));
        p0.push(mass(-b, -a));
        p1.push(mass(a, b));
    }
    for i in 0..half {
        let (a, b) = (edge(i), edge(i + 1));
        outputs.push(format!("+{i}"));
        p0.push(mass(a, b));
        p1.push(mass(-b, -a));
    }
    renormalize(&mut p0);
    renormalize(&mut p1);
    DiscreteBms::new(outputs, p0, p1)
}
