//! Zero-run-limited (RLL) encoders.
//!
//! For `q > 2` the block algorithm removes each run `0^s` from a block and
//! appends a record of its location whose last digit lies in `{2,..,q-1}`,
//! costing exactly one symbol per block. For `q = 2` blocks of info bits are
//! mapped by lexicographic unranking onto run-limited words ending in `1`,
//! costing two symbols per block. [`rll_index`] is a fixed-length injective
//! map from integers onto run-limited words.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::ceil_log;
use crate::strings::{longest_zero_run, Alphabet, QaryString};

/// Largest block length accepted, keeping tables and scans in memory.
const MAX_BLOCK_LEN: u64 = 1 << 24;

/// Parameters of a zero-run-limited code: alphabet size `q` and the
/// forbidden zero-run length `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RllParams {
    q: u32,
    s: usize,
    block_len: usize,
}

impl RllParams {
    pub fn new(q: u32, s: usize) -> Result<Self> {
        Alphabet::new(q)?;
        if s < 2 {
            return Err(Error::param(format!("forbidden run length must be at least 2, got {s}")));
        }
        let block_len = if q == 2 { binary_block_bits(s)? } else { qary_block_len(q, s)? };
        Ok(RllParams { q, s, block_len })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Input symbols per block.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Redundant symbols added per block.
    pub fn block_redundancy(&self) -> usize {
        if self.q == 2 {
            2
        } else {
            1
        }
    }

    pub fn blocks(&self, n: usize) -> usize {
        n.div_ceil(self.block_len)
    }

    /// Output length for an input of length `n`.
    pub fn encoded_len(&self, n: usize) -> usize {
        n + self.blocks(n) * self.block_redundancy()
    }

    /// Largest input length whose encoding fits in `budget` symbols.
    pub fn max_input_len(&self, budget: usize) -> usize {
        let unit = self.block_len + self.block_redundancy();
        let full = budget / unit;
        let rest = budget % unit;
        full * self.block_len + rest.saturating_sub(self.block_redundancy())
    }
}

fn qary_block_len(q: u32, s: usize) -> Result<usize> {
    let too_big = || Error::Unsupported(format!("block length for q={q}, s={s} is too large"));
    let e = u32::try_from(s - 1).map_err(|_| too_big())?;
    let len = u64::from(q)
        .checked_pow(e)
        .and_then(|v| v.checked_mul(u64::from(q - 2)))
        .and_then(|v| v.checked_add(s as u64 - 1))
        .filter(|&v| v <= MAX_BLOCK_LEN)
        .ok_or_else(too_big)?;
    Ok(len as usize)
}

/// Info bits per binary block: the largest `K <= 2^(s-1)` such that the
/// run-limited words of length `K+1` number at least `2^K`.
fn binary_block_bits(s: usize) -> Result<usize> {
    if s > 20 {
        return Err(Error::Unsupported(format!("binary run limit s={s} is too large")));
    }
    let cap = 1usize << (s - 1);
    let counter = RunLimitedCounter::new(2, s, cap + 1);
    let k = (1..=cap)
        .rev()
        .find(|&k| counter.count(k + 1) >= BigUint::one() << k)
        .ok_or_else(|| Error::Unsupported(format!("no binary block size for s={s}")))?;
    Ok(k)
}

/// Counts and ranks words over `[q]` with no run of `s` zeros.
#[derive(Debug, Clone)]
pub struct RunLimitedCounter {
    q: u32,
    s: usize,
    /// `table[len][run]`: completions of length `len` after a trailing
    /// zero-run of length `run`.
    table: Vec<Vec<BigUint>>,
}

impl RunLimitedCounter {
    pub fn new(q: u32, s: usize, max_len: usize) -> Self {
        assert!(q >= 2 && s >= 1);
        let mut table = vec![vec![BigUint::one(); s]];
        for len in 1..=max_len {
            let prev = &table[len - 1];
            let nonzero = &prev[0] * (q - 1);
            let row = (0..s).map(|run| if run + 1 < s { &nonzero + &prev[run + 1] } else { nonzero.clone() }).collect();
            table.push(row);
        }
        RunLimitedCounter { q, s, table }
    }

    pub fn max_len(&self) -> usize {
        self.table.len() - 1
    }

    /// Number of run-limited words of length `len`.
    pub fn count(&self, len: usize) -> BigUint {
        self.table[len][0].clone()
    }

    /// The `rank`-th run-limited word of length `len` in lexicographic order.
    pub fn unrank(&self, rank: &BigUint, len: usize) -> Result<Vec<u8>> {
        if rank >= &self.table[len][0] {
            return Err(Error::param("rank exceeds the number of run-limited words"));
        }
        let mut rank = rank.clone();
        let mut out = Vec::with_capacity(len);
        let mut run = 0usize;
        for pos in 0..len {
            let rem = len - pos - 1;
            let with_zero = if run + 1 < self.s { self.table[rem][run + 1].clone() } else { BigUint::zero() };
            if rank < with_zero {
                out.push(0);
                run += 1;
                continue;
            }
            rank -= with_zero;
            let per_symbol = &self.table[rem][0];
            let idx = (&rank / per_symbol).to_u32().expect("digit fits");
            rank -= per_symbol * idx;
            out.push((idx + 1) as u8);
            run = 0;
        }
        Ok(out)
    }

    /// Inverse of [`Self::unrank`].
    pub fn rank(&self, word: &[u8]) -> Result<BigUint> {
        let len = word.len();
        if len > self.max_len() {
            return Err(Error::decode("word longer than the counter table"));
        }
        let mut rank = BigUint::zero();
        let mut run = 0usize;
        for (pos, &c) in word.iter().enumerate() {
            let rem = len - pos - 1;
            if u32::from(c) >= self.q {
                return Err(Error::decode("symbol outside the alphabet"));
            }
            if c == 0 {
                run += 1;
                if run >= self.s {
                    return Err(Error::decode(format!("word contains a zero-run of length {}", self.s)));
                }
                continue;
            }
            if run + 1 < self.s {
                rank += &self.table[rem][run + 1];
            }
            rank += &self.table[rem][0] * u32::from(c - 1);
            run = 0;
        }
        Ok(rank)
    }
}

/// Encodes `x` (with `q > 2`) into a string with no zero-run of length `s`.
pub fn rll_encode(x: &QaryString, p: &RllParams) -> Result<QaryString> {
    if p.q == 2 {
        return Err(Error::Unsupported("binary inputs use rll_encode_binary".into()));
    }
    check_alphabet(x, p)?;
    let mut out = Vec::with_capacity(p.encoded_len(x.len()));
    for block in x.symbols().chunks(p.block_len) {
        out.extend(encode_qary_block(block, p));
    }
    Ok(QaryString::from_trusted(x.alphabet(), out))
}

fn check_alphabet(x: &QaryString, p: &RllParams) -> Result<()> {
    if x.q() != p.q {
        return Err(Error::param(format!("string is over q={}, parameters over q={}", x.q(), p.q)));
    }
    Ok(())
}

fn encode_qary_block(block: &[u8], p: &RllParams) -> Vec<u8> {
    let s = p.s;
    let q = p.q as usize;
    let mut w: Vec<u8> = block.to_vec();
    w.push(1);
    let mut records: Vec<u8> = Vec::new();
    let mut pos = 0usize;
    let mut run = 0usize;
    // Records never contain `0^s` and the data part always ends in 1, so
    // only the data part needs scanning.
    while pos < w.len() {
        if w[pos] == 0 {
            run += 1;
            if run == s {
                let start = pos + 1 - s;
                w.drain(start..start + s);
                let hi = start / (q - 2);
                let mut digits = vec![0u8; s - 1];
                let mut v = hi;
                for d in digits.iter_mut().rev() {
                    *d = (v % q) as u8;
                    v /= q;
                }
                debug_assert_eq!(v, 0, "location fits in s-1 digits");
                records.extend_from_slice(&digits);
                records.push((2 + start % (q - 2)) as u8);
                pos = start;
                run = 0;
                continue;
            }
        } else {
            run = 0;
        }
        pos += 1;
    }
    w.extend(records);
    w
}

pub fn rll_decode(y: &QaryString, p: &RllParams) -> Result<QaryString> {
    if p.q == 2 {
        return Err(Error::Unsupported("binary codewords use rll_decode_binary".into()));
    }
    check_alphabet(y, p)?;
    let unit = p.block_len + 1;
    let mut out = Vec::with_capacity(y.len());
    let blocks: Vec<&[u8]> = y.symbols().chunks(unit).collect();
    let count = blocks.len();
    for (b, chunk) in blocks.into_iter().enumerate() {
        let data = decode_qary_block(chunk, p)?;
        let full = b + 1 < count;
        if (full && data.len() != p.block_len) || data.is_empty() {
            return Err(Error::decode(format!("block {b} decodes to {} symbols", data.len())));
        }
        out.extend(data);
    }
    Ok(QaryString::from_trusted(y.alphabet(), out))
}

fn decode_qary_block(chunk: &[u8], p: &RllParams) -> Result<Vec<u8>> {
    let s = p.s;
    let q = p.q as usize;
    let mut w = chunk.to_vec();
    loop {
        match w.last() {
            None => return Err(Error::decode("empty block")),
            Some(0) => return Err(Error::decode("block ends in a zero")),
            Some(1) => {
                w.pop();
                return Ok(w);
            }
            Some(&last) => {
                if w.len() < s + 1 {
                    return Err(Error::decode("dangling location record"));
                }
                let rec_start = w.len() - s;
                let hi = w[rec_start..w.len() - 1].iter().fold(0usize, |acc, &d| acc * q + d as usize);
                let loc = hi * (q - 2) + (last as usize - 2);
                w.truncate(rec_start);
                if loc >= w.len() {
                    return Err(Error::decode(format!("record location {loc} out of range")));
                }
                w.splice(loc..loc, std::iter::repeat_n(0, s));
            }
        }
    }
}

/// Binary encoder: each block of `K` bits becomes a run-limited word of
/// length `K+2` ending in 1.
pub fn rll_encode_binary(x: &QaryString, s: usize) -> Result<QaryString> {
    let p = RllParams::new(2, s)?;
    check_alphabet(x, &p)?;
    let counter = RunLimitedCounter::new(2, s, p.block_len + 1);
    let mut out = Vec::with_capacity(p.encoded_len(x.len()));
    for block in x.symbols().chunks(p.block_len) {
        let value = block.iter().fold(BigUint::zero(), |acc, &b| (acc << 1u32) + u32::from(b));
        out.extend(counter.unrank(&value, block.len() + 1)?);
        out.push(1);
    }
    Ok(QaryString::from_trusted(Alphabet::binary(), out))
}

pub fn rll_decode_binary(y: &QaryString, s: usize) -> Result<QaryString> {
    let p = RllParams::new(2, s)?;
    check_alphabet(y, &p)?;
    let counter = RunLimitedCounter::new(2, s, p.block_len + 1);
    let mut out = Vec::with_capacity(y.len());
    for chunk in y.symbols().chunks(p.block_len + 2) {
        let bits = chunk.len().checked_sub(2).filter(|&b| b >= 1).ok_or_else(|| Error::decode("short block"))?;
        if chunk[chunk.len() - 1] != 1 {
            return Err(Error::decode("block does not end in 1"));
        }
        let value = counter.rank(&chunk[..chunk.len() - 1])?;
        if value.bits() > bits as u64 {
            return Err(Error::decode("block rank exceeds its bit width"));
        }
        for i in (0..bits).rev() {
            out.push(u8::from(value.bit(i as u64)));
        }
    }
    Ok(QaryString::from_trusted(Alphabet::binary(), out))
}

/// Encodes with whichever block scheme matches the alphabet.
pub fn encode_run_limited(x: &QaryString, p: &RllParams) -> Result<QaryString> {
    if p.q == 2 {
        rll_encode_binary(x, p.s)
    } else {
        rll_encode(x, p)
    }
}

pub fn decode_run_limited(y: &QaryString, p: &RllParams) -> Result<QaryString> {
    if p.q == 2 {
        rll_decode_binary(y, p.s)
    } else {
        rll_decode(y, p)
    }
}

/// Fixed-length injective indexing onto words with no `0^(t-3)`.
#[derive(Debug, Clone)]
pub struct RllIndexer {
    alphabet: Alphabet,
    n_range: u64,
    len: usize,
    counter: RunLimitedCounter,
}

impl RllIndexer {
    /// Word length is `ceil(log_q n_range) + 1`, grown if needed until the
    /// run-limited words of that length can address `n_range` values.
    pub fn new(alphabet: Alphabet, n_range: u64, t: usize) -> Result<Self> {
        if t < 5 {
            return Err(Error::param(format!("index run parameter t={t} must be at least 5")));
        }
        let s = t - 3;
        let q = alphabet.size();
        let base = ceil_log(u64::from(q), n_range.max(1)) as usize + 1;
        let need = BigUint::from(n_range);
        for len in base..base + 64 {
            let counter = RunLimitedCounter::new(q, s, len);
            if counter.count(len) >= need {
                return Ok(RllIndexer { alphabet, n_range, len, counter });
            }
        }
        Err(Error::param(format!("no run-limited index length for n_range={n_range}, t={t}")))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, i: u64) -> Result<Vec<u8>> {
        if i >= self.n_range {
            return Err(Error::param(format!("index {i} out of range 0..{}", self.n_range)));
        }
        self.counter.unrank(&BigUint::from(i), self.len)
    }

    pub fn decode(&self, word: &[u8]) -> Result<u64> {
        if word.len() != self.len {
            return Err(Error::decode("index word has the wrong length"));
        }
        let v = self.counter.rank(word)?.to_u64().filter(|&v| v < self.n_range);
        v.ok_or_else(|| Error::decode("index word out of range"))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
}

/// `h(i)`: the `i`-th word in lexicographic order among length-`N` words
/// with no zero-run of length `t-3`.
pub fn rll_index(i: u64, n_range: u64, t: usize, alphabet: Alphabet) -> Result<QaryString> {
    let idx = RllIndexer::new(alphabet, n_range, t)?;
    Ok(QaryString::from_trusted(alphabet, idx.encode(i)?))
}

pub fn rll_index_decode(word: &QaryString, n_range: u64, t: usize) -> Result<u64> {
    RllIndexer::new(word.alphabet(), n_range, t)?.decode(word.symbols())
}

/// Lower bound on the redundancy of any code into `RLL_s(n)`, in base-`q`
/// symbols: `(log_q e / 2)(1 - 1/q)^2 (n - 2s) / q^s`.
pub fn rll_redundancy_lower_bound(n: usize, s: usize, q: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::param("q must be at least 2"));
    }
    if n <= 2 * s {
        return Err(Error::param(format!("bound needs n > 2s (n={n}, s={s})")));
    }
    let qf = f64::from(q);
    let log_e = std::f64::consts::E.ln() / qf.ln();
    Ok(log_e / 2.0 * (1.0 - 1.0 / qf).powi(2) * (n - 2 * s) as f64 / qf.powi(s as i32))
}

/// True when `y` has no zero-run of length `s`.
pub(crate) fn run_limited(y: &[u8], s: usize) -> bool {
    longest_zero_run(y) < s
}
