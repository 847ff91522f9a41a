//! Single-strand trace code with interleaved strand indices.
//!
//! The message is split over `q^I` strands. Each piece is encoded into an
//! `ell`-repeat-free, zero-run-limited string `y_i`, cut into blocks, and
//! every block is prefixed by a synchronization marker (`1 0^{f+1} 1 1` on
//! the first block of a strand, `1 0^{f+1} 0 1` otherwise) and interleaved
//! with `F` framed pieces `1 c 1` of the strand index `c_i`. Zero-runs of
//! length `f + 1` occur only inside markers, so every segment of length
//! `lmin` reveals where a block starts.
//!
//! Decoding aligns each segment on a marker against the fixed layout of
//! the codeword (markers and index digits are known, only the `y` symbols
//! are not), reads off the `y` symbols it covers and stitches these
//! runs together through their windows of length `ell`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::{ceil_guarded, checked_pow, log_base, to_f64, Rational};
use crate::repeat_free::{RepeatFreeCodec, RepeatFreeParams};
use crate::strings::{Alphabet, QaryString};
use crate::trace::StrippedTrace;

/// Derived quantities of the construction. Integer fields that may come out
/// non-positive for infeasible inputs are signed so that they can still be
/// reported.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub n: usize,
    pub q: u32,
    pub a: Rational,
    pub gamma: Rational,
    pub eps: Rational,
    pub f: usize,
    pub lmin: usize,
    pub lover: usize,
    /// Index length `I`.
    pub index_len: usize,
    /// Number `F` of index pieces per block.
    pub index_pieces: usize,
    /// Overhead `r` of each block.
    pub overhead: usize,
    /// Blocks per strand.
    pub blocks: usize,
    /// Window order `ell` of the inner repeat-free code.
    pub ell: i64,
    /// Strand data length for strands `i < long_strands`.
    pub data_len_long: i64,
    /// Strand data length for the remaining strands.
    pub data_len_short: i64,
    pub long_strands: usize,
    /// `1 - I / lmin`.
    pub lambda: f64,
    /// The index length was set by hand rather than from `a`, `gamma`, `eps`.
    pub index_forced: bool,
    /// Skip the asymptotic side conditions; encoder postconditions are
    /// still checked.
    pub unsafe_params: bool,
}

/// One failed side condition, named by the inequality it violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: String,
    pub detail: String,
    /// Violations that make the construction impossible to run at all, as
    /// opposed to conditions of the asymptotic analysis.
    pub structural: bool,
}

/// Default run parameter `ceil(sqrt(log n))`.
pub fn default_f(n: usize, q: u32) -> usize {
    ceil_guarded(log_base(f64::from(q), n as f64).sqrt()).max(1) as usize
}

/// Computes every derived quantity. Only conditions that leave the formulas
/// undefined are errors here; the rest is reported by
/// [`ConstructionParams::violations`].
pub fn derive_params(
    n: usize,
    q: u32,
    a: Rational,
    gamma: Rational,
    eps: Rational,
    f: usize,
) -> Result<ConstructionParams> {
    Alphabet::new(q)?;
    if n < 2 {
        return Err(Error::param("n must be at least 2"));
    }
    if a <= Rational::from_integer(1) {
        return Err(Error::param(format!("a = {a} must exceed 1")));
    }
    if gamma <= Rational::from_integer(0) || gamma >= Rational::from_integer(1) {
        return Err(Error::param(format!("gamma = {gamma} must lie strictly between 0 and 1")));
    }
    if eps <= Rational::from_integer(0) {
        return Err(Error::param(format!("eps = {eps} must be positive")));
    }
    if f == 0 {
        return Err(Error::param("f must be positive"));
    }
    let log_n = log_q(n, q);
    let lmin = ceil_times_log(a, n, q);
    let lover = ceil_rational(gamma * Rational::from_integer(lmin as i64)) as usize;
    let one = Rational::from_integer(1);
    let coefficient = to_f64((one - gamma * a) / (one - gamma));
    let index_real = coefficient * log_n + log_n.powf(0.5 + to_f64(eps));
    let index_len = ceil_guarded(index_real).max(0) as usize;
    let mut p = ConstructionParams {
        n,
        q,
        a,
        gamma,
        eps,
        f,
        lmin,
        lover,
        index_len,
        index_pieces: 0,
        overhead: 0,
        blocks: 0,
        ell: 0,
        data_len_long: 0,
        data_len_short: 0,
        long_strands: 0,
        lambda: 0.0,
        index_forced: false,
        unsafe_params: false,
    };
    p.fill_from_index_len()?;
    Ok(p)
}

impl ConstructionParams {
    pub fn relaxed(mut self) -> Self {
        self.unsafe_params = true;
        self
    }

    /// Overrides `I` (and everything depending on it).
    pub fn with_index_len(mut self, index_len: usize) -> Result<Self> {
        self.index_len = index_len;
        self.index_forced = true;
        self.fill_from_index_len()?;
        Ok(self)
    }

    fn fill_from_index_len(&mut self) -> Result<()> {
        let (n, f, lmin, lover) = (self.n, self.f, self.lmin, self.lover);
        let strands = checked_pow(u64::from(self.q), self.index_len as u32)
            .ok_or_else(|| Error::param(format!("q^I with I={} overflows", self.index_len)))?;
        self.index_pieces = self.index_len.div_ceil(f);
        self.overhead = self.index_len + 2 * self.index_pieces + f + 4;
        self.blocks = (n as u64).div_ceil(strands * lmin as u64) as usize;
        let numerator = lover as i64 - 2 * f as i64 - 6;
        self.ell = if self.index_pieces == 0 {
            numerator
        } else {
            let piece = (lmin as i64 - self.overhead as i64).div_euclid(self.index_pieces as i64);
            if piece <= 0 {
                0
            } else {
                let den = piece + f as i64 + 2;
                -(-(numerator * piece)).div_euclid(den)
            }
        };
        let per_strand_overhead = (self.blocks * self.overhead) as i64;
        self.data_len_long = (n as u64).div_ceil(strands) as i64 - per_strand_overhead;
        self.data_len_short = (n as u64 / strands) as i64 - per_strand_overhead;
        self.long_strands = (n as u64 % strands) as usize;
        self.lambda = 1.0 - self.index_len as f64 / lmin as f64;
        Ok(())
    }

    pub fn strands(&self) -> usize {
        checked_pow(u64::from(self.q), self.index_len as u32).expect("checked when derived") as usize
    }

    pub fn data_len(&self, strand: usize) -> i64 {
        if strand < self.long_strands {
            self.data_len_long
        } else {
            self.data_len_short
        }
    }

    /// Run parameter of the inner code: no zero-run of length `f + 1`.
    pub fn run_parameter(&self) -> usize {
        self.f + 1
    }

    /// Every violated condition, structural ones first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |structural: bool, condition: &str, detail: String| {
            out.push(Violation { condition: condition.to_string(), detail, structural });
        };
        let log_n = log_q(self.n, self.q);
        let f = self.f as f64;
        let numerator = self.lover as i64 - 2 * self.f as i64 - 6;
        if numerator <= 0 {
            push(true, "lover - 2f - 6 > 0", format!("lover={} and f={} give {numerator}", self.lover, self.f));
        }
        if self.index_pieces > 0 && self.lmin < self.overhead + self.index_pieces {
            push(
                true,
                "floor((lmin - r) / F) > 0",
                format!("lmin={} r={} F={}", self.lmin, self.overhead, self.index_pieces),
            );
        }
        if self.lmin <= self.overhead {
            push(true, "lmin > r", format!("lmin={} r={}", self.lmin, self.overhead));
        }
        if self.ell <= 0 {
            push(true, "ell > 0", format!("ell={}", self.ell));
        }
        let shortest = self.data_len_short.min(if self.long_strands > 0 { self.data_len_long } else { i64::MAX });
        if shortest <= self.ell.max(0) {
            push(true, "N_i > ell", format!("smallest N_i={shortest}, ell={}", self.ell));
        }
        if self.run_parameter() < crate::repeat_free::MIN_RUN_PARAMETER {
            push(true, "f + 1 >= 5", format!("f={}", self.f));
        }
        if let Some((lo, hi)) = self.block_len_range() {
            if hi > self.lmin {
                push(true, "|z_ij| <= lmin", format!("blocks reach length {hi}, lmin={}", self.lmin));
            }
            if lo + 1 < self.lmin {
                push(false, "|z_ij| >= lmin - 1", format!("blocks as short as {lo}, lmin={}", self.lmin));
            }
        }
        if self.gamma > Rational::from_integer(1) / self.a {
            push(false, "gamma <= 1/a", format!("gamma={} a={}", self.gamma, self.a));
        }
        if f < log_n.log2() / f64::from(self.q).log2() + 4.0 {
            push(
                false,
                "f >= loglog n + 4",
                format!("f={} loglog n={:.4}", self.f, log_q(log_n.max(1.0) as usize, self.q)),
            );
        }
        if f > log_n {
            push(false, "f <= log n", format!("f={} log n={log_n:.4}", self.f));
        }
        let coefficient =
            to_f64((Rational::from_integer(1) - self.gamma * self.a) / (Rational::from_integer(1) - self.gamma));
        if coefficient * log_n + log_n.powf(0.5 + to_f64(self.eps)) < 0.0 && !self.index_forced {
            push(false, "I formula non-negative", "the index length was clamped to 0".to_string());
        }
        if self.index_forced {
            push(false, "I from the index-length formula", format!("I={} was set by hand", self.index_len));
        }
        for data_len in self.distinct_data_lens() {
            if data_len <= 1 {
                continue;
            }
            let loglog =
                ceil_guarded(log_q(log_q(data_len as usize, self.q).ceil().max(1.0) as usize, self.q)) as usize;
            if self.f < loglog + 5 {
                push(false, "f >= ceil(loglog N_i) + 5", format!("f={} N_i={data_len}", self.f));
            }
            let log_len = crate::numeric::ceil_log(u64::from(self.q), data_len as u64) as i64;
            if self.ell <= log_len + 3 * self.f as i64 {
                push(false, "ell > ceil(log N_i) + 3f", format!("ell={} N_i={data_len} f={}", self.ell, self.f));
            }
        }
        let ll = log_n.log2();
        if ll > 0.0 {
            let ratio = f.log2() / ll;
            let needed = ratio.max(1.0 - ratio) - 0.5;
            if to_f64(self.eps) < needed {
                push(
                    false,
                    "eps >= max(log f/loglog n, 1 - log f/loglog n) - 0.5",
                    format!("eps={} needs {needed:.4}", self.eps),
                );
            }
        }
        out.sort_by_key(|v| !v.structural);
        out
    }

    /// Errors with the first structural violation, or in safe mode with the
    /// first violation of any kind.
    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        let fatal = violations.iter().find(|v| v.structural || !self.unsafe_params);
        match fatal {
            Some(v) if v.structural => Err(Error::param(format!("infeasible: {} fails ({})", v.condition, v.detail))),
            Some(v) => {
                Err(Error::Unsupported(format!("{} fails ({}); pass unsafe mode to proceed", v.condition, v.detail)))
            }
            None => Ok(()),
        }
    }

    fn distinct_data_lens(&self) -> Vec<i64> {
        if self.long_strands > 0 && self.data_len_long != self.data_len_short {
            vec![self.data_len_long, self.data_len_short]
        } else {
            vec![self.data_len_short]
        }
    }

    /// Shortest and longest block, overhead included.
    fn block_len_range(&self) -> Option<(usize, usize)> {
        let lens = self.distinct_data_lens();
        if lens.iter().any(|&l| l <= 0) {
            return None;
        }
        let lo = *lens.iter().min()? as usize / self.blocks;
        let hi = (*lens.iter().max()? as usize).div_ceil(self.blocks);
        Some((lo + self.overhead, hi + self.overhead))
    }

    /// `key=value` lines describing every derived quantity.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let fields: [(&str, String); 19] = [
            ("n", self.n.to_string()),
            ("q", self.q.to_string()),
            ("a", crate::numeric::format_rational(self.a)),
            ("gamma", crate::numeric::format_rational(self.gamma)),
            ("eps", crate::numeric::format_rational(self.eps)),
            ("f", self.f.to_string()),
            ("lmin", self.lmin.to_string()),
            ("lover", self.lover.to_string()),
            ("index_len", self.index_len.to_string()),
            ("index_pieces", self.index_pieces.to_string()),
            ("overhead", self.overhead.to_string()),
            ("blocks_per_strand", self.blocks.to_string()),
            ("ell", self.ell.to_string()),
            ("strands", self.strands().to_string()),
            ("data_len_long", self.data_len_long.to_string()),
            ("data_len_short", self.data_len_short.to_string()),
            ("long_strands", self.long_strands.to_string()),
            ("lambda", format!("{:.6}", self.lambda)),
            ("unsafe_params", self.unsafe_params.to_string()),
        ];
        for (k, v) in fields {
            let _ = writeln!(s, "{k}={v}");
        }
        for v in self.violations() {
            let _ = writeln!(s, "violation={} ({})", v.condition, v.detail);
        }
        s
    }

    /// Leading terms of the rate guarantee,
    /// `(1 - 1/a)/(1 - gamma) - (log n)^eps / (a sqrt(log n))`.
    pub fn asymptotic_rate(&self) -> f64 {
        let log_n = log_q(self.n, self.q);
        let a = to_f64(self.a);
        (1.0 - 1.0 / a) / (1.0 - to_f64(self.gamma)) - log_n.powf(to_f64(self.eps)) / (a * log_n.sqrt())
    }

    pub fn codec(&self) -> Result<TraceCode> {
        TraceCode::new(self.clone())
    }
}

fn log_q(n: usize, q: u32) -> f64 {
    log_base(f64::from(q), n as f64)
}

fn ceil_rational(r: Rational) -> i64 {
    r.ceil().to_integer()
}

/// `ceil(a log_q n)`, exact when `n` is a power of `q`.
fn ceil_times_log(a: Rational, n: usize, q: u32) -> usize {
    let e = crate::numeric::floor_log(u64::from(q), n as u64);
    if checked_pow(u64::from(q), e) == Some(n as u64) {
        return ceil_rational(a * Rational::from_integer(i64::from(e))) as usize;
    }
    ceil_guarded(to_f64(a) * log_q(n, q)) as usize
}

/// Sizes of `parts` pieces of `total`, the first `total mod parts` one
/// longer than the rest.
pub fn equal_parts(total: usize, parts: usize) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let (base, extra) = (total / parts, total % parts);
    (0..parts).map(|h| base + usize::from(h < extra)).collect()
}

/// The framed index pieces `1 c^{(h)} 1` of one strand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedIndex {
    pub i: usize,
    pub segments: Vec<QaryString>,
}

impl EncodedIndex {
    /// The middle parts concatenated, i.e. the `I`-symbol expansion of `i`.
    pub fn digits(&self) -> Vec<u8> {
        self.segments.iter().flat_map(|s| s.symbols()[1..s.len() - 1].to_vec()).collect()
    }
}

pub fn encode_index(i: usize, params: &ConstructionParams) -> Result<EncodedIndex> {
    let strands = params.strands();
    if i >= strands {
        return Err(Error::param(format!("index {i} out of range 0..{strands}")));
    }
    let q = params.q as usize;
    let mut digits = vec![0u8; params.index_len];
    let mut v = i;
    for d in digits.iter_mut().rev() {
        *d = (v % q) as u8;
        v /= q;
    }
    let alphabet = Alphabet::new(params.q)?;
    let mut segments = Vec::with_capacity(params.index_pieces);
    let mut at = 0;
    for len in equal_parts(params.index_len, params.index_pieces) {
        let mut framed = Vec::with_capacity(len + 2);
        framed.push(1);
        framed.extend_from_slice(&digits[at..at + len]);
        framed.push(1);
        at += len;
        segments.push(QaryString::from_trusted(alphabet, framed));
    }
    Ok(EncodedIndex { i, segments })
}

/// Outcome of [`TraceCode::scan_index_windows`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexScan {
    pub windows: usize,
    /// Windows whose data admits more than one reading (the strand index is
    /// still unique).
    pub several_readings: usize,
}

/// Marks data positions in the layout.
const DATA: u8 = u8::MAX;

/// Encoder and trace decoder for one parameter set.
#[derive(Debug, Clone)]
pub struct TraceCode {
    params: ConstructionParams,
    alphabet: Alphabet,
    inner_long: Option<RepeatFreeCodec>,
    inner_short: RepeatFreeCodec,
    /// Known symbol at each codeword position, or [`DATA`].
    layout: Vec<u8>,
    /// Codeword position where each strand starts, plus `n` at the end.
    strand_starts: Vec<usize>,
    /// Start of block `j` of strand `i` at `i * blocks + j`.
    block_starts: Vec<usize>,
    /// Number of long blocks in each strand.
    long_blocks: Vec<usize>,
    ell: usize,
}

/// The `y` symbols one segment covers, with the strand of each.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct DataRun {
    symbols: Vec<u8>,
    strands: Vec<u32>,
}

/// One consistent placement of a segment relative to the layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Alignment {
    first_strand: u32,
    run: DataRun,
}

impl TraceCode {
    pub fn new(params: ConstructionParams) -> Result<Self> {
        params.validate()?;
        let alphabet = Alphabet::new(params.q)?;
        let ell = params.ell as usize;
        let inner = |len: i64| {
            let mut p = RepeatFreeParams::new(len as usize, ell, params.run_parameter(), params.q);
            if params.unsafe_params {
                p = p.relaxed();
            }
            p.codec()
        };
        let inner_short = inner(params.data_len_short)?;
        let inner_long = if params.long_strands > 0 && params.data_len_long != params.data_len_short {
            Some(inner(params.data_len_long)?)
        } else {
            None
        };
        let mut code = TraceCode {
            alphabet,
            inner_long,
            inner_short,
            layout: Vec::with_capacity(params.n),
            strand_starts: Vec::new(),
            block_starts: Vec::new(),
            long_blocks: Vec::new(),
            ell,
            params,
        };
        code.build_layout()?;
        Ok(code)
    }

    fn build_layout(&mut self) -> Result<()> {
        let p = self.params.clone();
        for i in 0..p.strands() {
            self.strand_starts.push(self.layout.len());
            let index = encode_index(i, &p)?;
            let data_len = p.data_len(i) as usize;
            self.long_blocks.push(data_len % p.blocks);
            for (j, block_len) in equal_parts(data_len, p.blocks).into_iter().enumerate() {
                self.block_starts.push(self.layout.len());
                self.layout.push(1);
                self.layout.extend(std::iter::repeat_n(0, p.f + 1));
                self.layout.push(u8::from(j == 0));
                self.layout.push(1);
                if p.index_pieces == 0 {
                    self.layout.extend(std::iter::repeat_n(DATA, block_len));
                    continue;
                }
                for (part_len, piece) in equal_parts(block_len, p.index_pieces).into_iter().zip(&index.segments) {
                    self.layout.extend(std::iter::repeat_n(DATA, part_len));
                    self.layout.extend_from_slice(piece.symbols());
                }
            }
        }
        self.strand_starts.push(self.layout.len());
        if self.layout.len() != p.n {
            return Err(Error::Postcondition(format!("layout has length {} instead of n={}", self.layout.len(), p.n)));
        }
        Ok(())
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    fn inner(&self, strand: usize) -> &RepeatFreeCodec {
        match &self.inner_long {
            Some(c) if strand < self.params.long_strands => c,
            _ => &self.inner_short,
        }
    }

    pub fn message_len(&self) -> usize {
        (0..self.params.strands()).map(|i| self.inner(i).message_len()).sum()
    }

    pub fn rate(&self) -> f64 {
        self.message_len() as f64 / self.params.n as f64
    }

    /// Lower bound on the rate from the accounting of the construction:
    /// `1 - r/lmin - q^I r / n` minus the largest inner redundancy fraction.
    pub fn rate_floor(&self) -> f64 {
        let p = &self.params;
        let inner_loss = std::iter::once(&self.inner_short)
            .chain(&self.inner_long)
            .map(|c| c.redundancy() as f64 / c.params().n as f64)
            .fold(0.0, f64::max);
        1.0 - p.overhead as f64 / p.lmin as f64 - (p.strands() * p.overhead) as f64 / p.n as f64 - inner_loss
    }

    /// Lengths of the blocks, overhead included, in codeword order.
    pub fn block_lengths(&self) -> Vec<usize> {
        let mut ends = self.block_starts.clone();
        ends.push(self.params.n);
        ends.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Whether position `pos` of a codeword holds a `y` symbol.
    pub fn is_data(&self, pos: usize) -> bool {
        self.layout[pos] == DATA
    }

    pub fn strand_of(&self, pos: usize) -> usize {
        self.strand_starts.partition_point(|&s| s <= pos) - 1
    }

    pub fn encode(&self, x: &QaryString) -> Result<QaryString> {
        if x.alphabet() != self.alphabet {
            return Err(Error::param("message alphabet does not match the parameters"));
        }
        if x.len() != self.message_len() {
            return Err(Error::param(format!("message length {} != {}", x.len(), self.message_len())));
        }
        let mut data = Vec::with_capacity(self.params.n);
        let mut at = 0;
        for i in 0..self.params.strands() {
            let codec = self.inner(i);
            let piece = x.substring(at, codec.message_len());
            at += codec.message_len();
            data.extend_from_slice(codec.encode(&piece)?.symbols());
        }
        let mut next = data.into_iter();
        let z: Vec<u8> = self
            .layout
            .iter()
            .map(|&cell| if cell == DATA { next.next().expect("data fills the layout") } else { cell })
            .collect();
        self.check_marker_runs(&z)?;
        Ok(QaryString::from_trusted(self.alphabet, z))
    }

    /// Every zero-run of length `f + 1` must sit inside a marker.
    fn check_marker_runs(&self, z: &[u8]) -> Result<()> {
        let f = self.params.f;
        let mut run = 0;
        for (pos, &s) in z.iter().enumerate() {
            run = if s == 0 { run + 1 } else { 0 };
            if run == f + 1 {
                let start = pos - f;
                if start == 0 || self.block_starts.binary_search(&(start - 1)).is_err() {
                    return Err(Error::Postcondition(format!(
                        "zero-run of length {} outside a marker at {start}",
                        f + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Extracts the `y` symbols of a codeword.
    fn data_of(&self, z: &[u8]) -> Vec<u8> {
        z.iter().zip(&self.layout).filter(|(_, &c)| c == DATA).map(|(&s, _)| s).collect()
    }

    /// Start of a synchronization marker inside `u`: the first zero-run of
    /// length at least `f + 1` whose leading `1` is in `u`, or else the
    /// marker prefix `1 0^k` that `u` ends with.
    fn anchor(&self, u: &[u8]) -> Option<usize> {
        let f = self.params.f;
        let mut pos = 0;
        while pos < u.len() {
            if u[pos] != 0 {
                pos += 1;
                continue;
            }
            let start = pos;
            while pos < u.len() && u[pos] == 0 {
                pos += 1;
            }
            if pos - start > f && start > 0 && u[start - 1] == 1 {
                return Some(start - 1);
            }
        }
        let trailing = u.iter().rev().take_while(|&&s| s == 0).count();
        let lead = u.len().checked_sub(trailing + 1)?;
        (u[lead] == 1).then_some(lead)
    }

    /// Blocks of strand `i` whose surroundings within `reach` positions
    /// represent every distinct neighbourhood of that strand.
    fn representative_blocks(&self, strand: usize, reach: usize) -> BTreeSet<usize> {
        let b = self.params.blocks;
        let m = reach / (self.params.lmin - 1).max(1) + 2;
        let long = self.long_blocks[strand];
        let mut out = BTreeSet::new();
        for j in (0..=m).chain(long.saturating_sub(m)..=long + m).chain(b.saturating_sub(m + 1)..b) {
            if j < b {
                out.insert(j);
            }
        }
        out
    }

    /// All placements of `u` consistent with the layout, deduplicated by
    /// what they say about the data.
    fn alignments(&self, u: &[u8]) -> Result<Vec<Alignment>> {
        let anchor = self.anchor(u).ok_or_else(|| {
            Error::IndexExtraction(format!("no synchronization marker in a segment of length {}", u.len()))
        })?;
        let mut found: BTreeSet<(u32, Vec<u32>, Vec<u8>)> = BTreeSet::new();
        for strand in 0..self.params.strands() {
            for j in self.representative_blocks(strand, u.len()) {
                let block = self.block_starts[strand * self.params.blocks + j];
                let Some(start) = block.checked_sub(anchor) else {
                    continue;
                };
                if start + u.len() > self.params.n {
                    continue;
                }
                if let Some(run) = self.match_at(u, start) {
                    found.insert((self.strand_of(start) as u32, run.strands, run.symbols));
                }
            }
        }
        if found.is_empty() {
            return Err(Error::IndexExtraction("segment matches no marker and index layout".into()));
        }
        Ok(found
            .into_iter()
            .map(|(first_strand, strands, symbols)| Alignment { first_strand, run: DataRun { symbols, strands } })
            .collect())
    }

    fn match_at(&self, u: &[u8], start: usize) -> Option<DataRun> {
        let cells = &self.layout[start..start + u.len()];
        if cells.iter().zip(u).any(|(&c, &s)| c != DATA && c != s) {
            return None;
        }
        let mut run = DataRun { symbols: Vec::new(), strands: Vec::new() };
        let mut strand = self.strand_of(start);
        for (k, (&c, &s)) in cells.iter().zip(u).enumerate() {
            while self.strand_starts[strand + 1] <= start + k {
                strand += 1;
            }
            if c == DATA {
                run.symbols.push(s);
                run.strands.push(strand as u32);
            }
        }
        Some(run)
    }

    /// Strand index of a segment's first symbol, if all placements agree.
    pub fn extract_index(&self, u: &[u8]) -> Result<usize> {
        let found = self.alignments(u)?;
        let first = found[0].first_strand;
        if found.iter().any(|a| a.first_strand != first) {
            return Err(Error::IndexExtraction("segment placements disagree on the strand".into()));
        }
        Ok(first as usize)
    }

    pub fn decode_trace(&self, t: &StrippedTrace) -> Result<QaryString> {
        let lmin = self.params.lmin;
        if let Some(short) = t.segments().iter().find(|s| s.len() < lmin) {
            return Err(Error::param(format!("segment of length {} is shorter than lmin={lmin}", short.len())));
        }
        if t.segments().iter().any(|s| s.alphabet() != self.alphabet) {
            return Err(Error::param("segment alphabet does not match the parameters"));
        }
        let mut certain = Vec::new();
        let mut uncertain = Vec::new();
        for piece in t.segments().iter().flat_map(|seg| self.pieces(seg.symbols())) {
            let mut found = self.alignments(piece)?;
            found.dedup_by(|a, b| a.run == b.run);
            if found.len() == 1 {
                certain.push(found.pop().expect("one").run);
            } else {
                uncertain.push(found.into_iter().map(|a| a.run).collect::<Vec<_>>());
            }
        }
        let mut graph = DataGraph::new(self.ell);
        for run in &certain {
            let keys = graph.window_keys(run);
            graph.add_chain(&keys)?;
        }
        // A segment read in several ways contributes only the links that
        // every reading still compatible with the rest agrees on.
        for options in &uncertain {
            let fitting: Vec<Vec<Key>> =
                options.iter().map(|r| graph.window_keys(r)).filter(|keys| graph.fits(keys)).collect();
            let Some((first, rest)) = fitting.split_first() else {
                return Err(Error::Ambiguous("no reading of a segment fits the others".into()));
            };
            let shared: Vec<(Key, Key)> = first
                .windows(2)
                .map(|w| (w[0], w[1]))
                .filter(|pair| rest.iter().all(|keys| keys.windows(2).any(|w| (w[0], w[1]) == *pair)))
                .collect();
            for (a, b) in shared {
                graph.add_chain(&[a, b])?;
            }
        }
        let (data, strands) = graph.single_path()?;
        self.decode_data(&data, &strands)
    }

    /// Cuts a long segment into windows of length `2 lmin` overlapping by
    /// `lmin`, so that placing each one only involves nearby blocks.
    fn pieces<'u>(&self, u: &'u [u8]) -> Vec<&'u [u8]> {
        let lmin = self.params.lmin;
        if u.len() <= 2 * lmin {
            return vec![u];
        }
        let mut out: Vec<&[u8]> =
            (0..).map(|k| k * lmin).take_while(|&s| s + 2 * lmin <= u.len()).map(|s| &u[s..s + 2 * lmin]).collect();
        out.push(&u[u.len() - 2 * lmin..]);
        out
    }

    /// Splits the stitched data by strand and runs the inner decoder.
    fn decode_data(&self, data: &[u8], strands: &[u32]) -> Result<QaryString> {
        let expected: usize = (0..self.params.strands()).map(|i| self.params.data_len(i) as usize).sum();
        if data.len() != expected {
            return Err(Error::Incomplete(format!("stitched {} data symbols, expected {expected}", data.len())));
        }
        let mut out = Vec::with_capacity(self.message_len());
        let mut at = 0;
        for i in 0..self.params.strands() {
            let len = self.params.data_len(i) as usize;
            if strands[at..at + len].iter().any(|&s| s as usize != i) {
                return Err(Error::Ambiguous(format!("stitched data does not line up with strand {i}")));
            }
            let y = QaryString::from_trusted(self.alphabet, data[at..at + len].to_vec());
            out.extend_from_slice(self.inner(i).decode(&y)?.symbols());
            at += len;
        }
        Ok(QaryString::from_trusted(self.alphabet, out))
    }

    /// Decodes a complete codeword.
    pub fn decode(&self, z: &QaryString) -> Result<QaryString> {
        if z.len() != self.params.n {
            return Err(Error::decode(format!("codeword length {} != n={}", z.len(), self.params.n)));
        }
        let zs = z.symbols();
        if self.layout.iter().zip(zs).any(|(&c, &s)| c != DATA && c != s) {
            return Err(Error::decode("markers or index pieces are corrupted"));
        }
        let data = self.data_of(zs);
        let strands: Vec<u32> =
            (0..self.params.n).filter(|&p| self.is_data(p)).map(|p| self.strand_of(p) as u32).collect();
        self.decode_data(&data, &strands)
    }

    /// Checks that every `lmin`-window of `z` yields the strand of its first
    /// symbol, with the true placement among the consistent ones.
    pub fn scan_index_windows(&self, z: &QaryString) -> Result<IndexScan> {
        let zs = z.symbols();
        let lmin = self.params.lmin;
        let mut scan = IndexScan { windows: 0, several_readings: 0 };
        for start in 0..=zs.len() - lmin {
            let u = &zs[start..start + lmin];
            let found = self.alignments(u)?;
            let truth = self.match_at(u, start).ok_or_else(|| Error::decode("codeword does not follow the layout"))?;
            let strand = self.strand_of(start) as u32;
            if found.iter().any(|a| a.first_strand != strand) {
                return Err(Error::IndexExtraction(format!("window at {start} yields a wrong strand index")));
            }
            if !found.iter().any(|a| a.run == truth) {
                return Err(Error::IndexExtraction(format!("window at {start} misses its true placement")));
            }
            scan.windows += 1;
            scan.several_readings += usize::from(found.len() > 1);
        }
        Ok(scan)
    }

    /// Smallest number of `y` symbols inside any `lover`-window.
    pub fn min_data_per_overlap_window(&self) -> usize {
        let w = self.params.lover;
        let mut count = self.layout[..w].iter().filter(|&&c| c == DATA).count();
        let mut least = count;
        for end in w..self.params.n {
            count += usize::from(self.layout[end] == DATA);
            count -= usize::from(self.layout[end - w] == DATA);
            least = least.min(count);
        }
        least
    }

    pub fn marker_census(&self, z: &QaryString) -> (usize, usize) {
        let f = self.params.f;
        let first: Vec<u8> = [vec![1], vec![0; f + 1], vec![1, 1]].concat();
        let later: Vec<u8> = [vec![1], vec![0; f + 1], vec![0, 1]].concat();
        let zs = z.symbols();
        let count = |pat: &[u8]| zs.windows(pat.len()).filter(|w| *w == pat).count();
        (count(&first), count(&later))
    }
}

type Key<'a> = (u32, u32, &'a [u8]);

/// Window graph over data runs. A window is keyed by the strand of its
/// first symbol, the number of its symbols that spill into the next strand,
/// and its content; within a repeat-free strand that key fixes a position.
struct DataGraph<'a> {
    w: usize,
    ids: HashMap<Key<'a>, usize>,
    keys: Vec<Key<'a>>,
    next: Vec<Option<usize>>,
    has_pred: Vec<bool>,
}

impl<'a> DataGraph<'a> {
    fn new(w: usize) -> Self {
        DataGraph { w, ids: HashMap::new(), keys: Vec::new(), next: Vec::new(), has_pred: Vec::new() }
    }

    fn window_keys(&self, run: &'a DataRun) -> Vec<Key<'a>> {
        if run.symbols.len() < self.w {
            return Vec::new();
        }
        (0..=run.symbols.len() - self.w)
            .map(|at| {
                let strands = &run.strands[at..at + self.w];
                let spill = strands.iter().filter(|&&s| s != strands[0]).count() as u32;
                (strands[0], spill, &run.symbols[at..at + self.w])
            })
            .collect()
    }

    fn id(&mut self, key: Key<'a>) -> usize {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        self.keys.push(key);
        self.next.push(None);
        self.has_pred.push(false);
        self.ids.insert(key, self.keys.len() - 1);
        self.keys.len() - 1
    }

    fn add_chain(&mut self, keys: &[Key<'a>]) -> Result<()> {
        let mut prev: Option<usize> = None;
        for &key in keys {
            let id = self.id(key);
            if let Some(from) = prev {
                match self.next[from] {
                    Some(to) if to == id => {}
                    Some(_) => return Err(Error::Ambiguous("a data window has two successors".into())),
                    None if self.has_pred[id] => {
                        return Err(Error::Ambiguous("a data window has two predecessors".into()));
                    }
                    None => {
                        self.next[from] = Some(id);
                        self.has_pred[id] = true;
                    }
                }
            }
            prev = Some(id);
        }
        Ok(())
    }

    /// Whether adding the chain would keep every window's neighbours unique.
    fn fits(&self, keys: &[Key<'a>]) -> bool {
        let ids: Vec<Option<usize>> = keys.iter().map(|k| self.ids.get(k).copied()).collect();
        ids.windows(2).all(|pair| match (pair[0], pair[1]) {
            (Some(a), Some(b)) => self.next[a].map_or(!self.has_pred[b], |n| n == b),
            (Some(a), None) => self.next[a].is_none(),
            (None, Some(b)) => !self.has_pred[b],
            (None, None) => true,
        })
    }

    fn single_path(&self) -> Result<(Vec<u8>, Vec<u32>)> {
        let heads: Vec<usize> = (0..self.keys.len()).filter(|&v| !self.has_pred[v]).collect();
        let [head] = heads.as_slice() else {
            return Err(Error::Incomplete(format!("data windows form {} chains, expected one", heads.len())));
        };
        let (strand, spill, content) = self.keys[*head];
        let mut data = content.to_vec();
        let mut strands: Vec<u32> = (0..self.w).map(|k| strand + u32::from(k >= self.w - spill as usize)).collect();
        let mut cur = *head;
        let mut visited = 1;
        while let Some(nxt) = self.next[cur] {
            let (s, spill, content) = self.keys[nxt];
            data.push(content[self.w - 1]);
            strands.push(s + u32::from(spill > 0));
            cur = nxt;
            visited += 1;
        }
        if visited != self.keys.len() {
            return Err(Error::Ambiguous("data windows form a cycle".into()));
        }
        Ok((data, strands))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{canonical_trace, random_trace, TraceParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn message(len: usize, q: u32, seed: u64) -> QaryString {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        QaryString::new(Alphabet::new(q).unwrap(), (0..len).map(|_| rng.gen_range(0..q) as u8).collect()).unwrap()
    }

    #[test]
    fn equal_partition_rule() {
        assert_eq!(equal_parts(7, 3), vec![3, 2, 2]);
        assert_eq!(equal_parts(6, 2), vec![3, 3]);
        assert!(equal_parts(5, 0).is_empty());
    }

    #[test]
    fn index_pieces_follow_the_expansion() {
        let mut p = derive_params(1 << 20, 2, r(3, 1), r(1, 4), r(1, 10), 3).unwrap();
        p = p.with_index_len(6).unwrap();
        let zero = encode_index(0, &p).unwrap();
        assert_eq!(zero.segments.iter().map(|s| s.to_string()).collect::<Vec<_>>(), ["10001", "10001"]);
        let top = encode_index(63, &p).unwrap();
        assert!(top.digits().iter().all(|&d| d == 1));
        p = p.with_index_len(7).unwrap();
        let lens: Vec<usize> = encode_index(5, &p).unwrap().segments.iter().map(|s| s.len() - 2).collect();
        assert_eq!(lens, vec![3, 2, 2]);
        assert_eq!(encode_index(5, &p).unwrap().digits(), vec![0, 0, 0, 0, 1, 0, 1]);
        assert!(encode_index(128, &p).is_err());
    }

    #[test]
    fn index_formula_special_cases() {
        let p = derive_params(1 << 16, 2, r(2, 1), r(1, 2), r(1, 4), 4).unwrap();
        assert_eq!(p.index_len, 8);
        let tiny_gamma = derive_params(1 << 16, 2, r(2, 1), r(1, 1000), r(1, 4), 4).unwrap();
        assert_eq!(tiny_gamma.index_len, 24);
    }

    #[test]
    fn reports_the_failing_inequality() {
        let p = derive_params(1 << 20, 2, r(3, 1), r(1, 4), r(1, 10), 5).unwrap();
        assert_eq!((p.lmin, p.lover, p.index_len, p.index_pieces, p.overhead), (60, 15, 13, 3, 28));
        assert_eq!((p.blocks, p.data_len_short, p.long_strands, p.ell), (3, 44, 0, 0));
        assert!((p.lambda - 47.0 / 60.0).abs() < 1e-12);
        let err = p.codec().unwrap_err();
        assert!(err.to_string().contains("lover - 2f - 6"), "{err}");
    }

    #[test]
    fn every_trace_of_a_small_codeword_decodes() {
        let p = derive_params(40, 2, r(63, 10), r(13, 17), r(1, 10), 4).unwrap().relaxed();
        assert_eq!((p.lmin, p.lover, p.index_len, p.blocks, p.ell), (34, 26, 0, 2, 12));
        let code = p.codec().unwrap();
        let tp = TraceParams::new(p.lmin, p.lover).unwrap();
        let x = message(code.message_len(), 2, 3);
        let z = code.encode(&x).unwrap();
        let traces = crate::trace::enumerate_traces(&z, tp).unwrap();
        assert!(traces.len() > 1000);
        for t in traces {
            assert_eq!(code.decode_trace(&t.stripped()).unwrap(), x);
        }
    }

    #[test]
    fn several_strands_and_ternary() {
        let cases = [(200, 2, r(27, 4), r(7, 8), 2), (300, 3, r(8, 1), r(7, 8), 1)];
        for (n, q, a, gamma, index_len) in cases {
            let p = derive_params(n, q, a, gamma, r(1, 10), 4).unwrap().relaxed().with_index_len(index_len).unwrap();
            let code = p.codec().unwrap();
            let tp = TraceParams::new(p.lmin, p.lover).unwrap();
            assert!(code.min_data_per_overlap_window() >= p.ell as usize);
            for seed in 0..6 {
                let x = message(code.message_len(), q, seed);
                let Ok(z) = code.encode(&x) else { continue };
                assert_eq!(code.marker_census(&z).0, p.strands());
                for t_seed in 0..6 {
                    let t = crate::trace::random_trace_bounded(&z, tp, t_seed, p.lmin + 8).unwrap();
                    assert_eq!(code.decode_trace(&t.stripped()).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let code = small_params().codec().unwrap();
        assert!(code.encode(&message(code.message_len() + 1, 2, 0)).is_err());
        let short = StrippedTrace::new(vec![message(10, 2, 0)]);
        assert!(code.decode_trace(&short).unwrap_err().is_parameter_error());
        let noise = StrippedTrace::new(vec![QaryString::binary(vec![1; code.params().n]).unwrap()]);
        assert!(matches!(code.decode_trace(&noise), Err(Error::IndexExtraction(_))));
    }

    fn small_params() -> ConstructionParams {
        derive_params(96, 2, r(36, 5), r(5, 6), r(1, 10), 4).unwrap().relaxed().with_index_len(1).unwrap()
    }

    #[test]
    fn two_strand_round_trip() {
        let p = small_params();
        let code = p.codec().unwrap();
        assert_eq!(p.strands(), 2);
        let tp = TraceParams::new(p.lmin, p.lover).unwrap();
        let mut ok = 0;
        for seed in 0..40 {
            let x = message(code.message_len(), 2, seed);
            let Ok(z) = code.encode(&x) else { continue };
            assert_eq!(code.decode(&z).unwrap(), x);
            assert_eq!(code.marker_census(&z).0, 2);
            code.scan_index_windows(&z).unwrap();
            assert!(code.min_data_per_overlap_window() >= p.ell as usize);
            assert!(code.rate() >= code.rate_floor());
            let canon = canonical_trace(&z, tp).unwrap();
            assert_eq!(code.decode_trace(&canon.stripped()).unwrap(), x);
            for t_seed in 0..10 {
                let t = random_trace(&z, tp, t_seed).unwrap();
                assert_eq!(code.decode_trace(&t.stripped()).unwrap(), x);
            }
            ok += 1;
        }
        assert!(ok > 0);
    }
}
