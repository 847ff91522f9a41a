//! Encoder into strings that are both `ell`-repeat-free and free of zero-runs
//! of length `t`.
//!
//! Pipeline:
//! 1. run-length pre-encoding of the message into `RLL_{t-3}`, using at most
//!    `n - t - 1` symbols;
//! 2. elimination: scanning left to right, each window of length `s` that
//!    already occurred at some earlier position `i` is replaced by the
//!    `s - 1` symbols `1 0^{t-3} 1 h(i) 1`, where `h` is the run-limited index;
//! 3. expansion: the result `w` is followed by the bridge `1 0^{t-1} 1` and a
//!    fixed filler made of a de Bruijn tail interleaved with `1 0^{t-2} 1`
//!    every `s` symbols; the first `n` symbols are the codeword.
//!
//! The index word `h` carries the position `i` together with two flags.
//! A replacement window can end on the leading `1` of a marker to its right;
//! that marker then shares its `1` with the new marker's trailing `1` and
//! survives to the right of the newer marker, so position alone does not
//! tell which marker is the most recent. Such a marker gets its `victim`
//! flag set, and the new marker records in `claimed` that it set the flag.
//! Decoding repeatedly undoes the rightmost unflagged marker, clearing the
//! neighbour's flag again when the undone marker had claimed it. The cost
//! is two extra index bits, so `s = ceil(log n) + t + 4`.

use std::collections::HashMap;

use crate::debruijn::debruijn_tail;
use crate::error::{Error, Result};
use crate::numeric::{ceil_guarded, ceil_log, log_base};
use crate::runlength::{decode_run_limited, encode_run_limited, run_limited, RllIndexer, RllParams};
use crate::strings::{longest_zero_run, symbols_repeat_free, Alphabet, QaryString};

/// Smallest run parameter the pipeline supports: the pre-encoding forbids
/// runs of `t - 3 >= 2` zeros.
pub const MIN_RUN_PARAMETER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepeatFreeParams {
    pub n: usize,
    pub ell: usize,
    pub t: usize,
    pub q: u32,
    /// Skip the asymptotic regime checks; outputs are still verified.
    pub unsafe_params: bool,
}

impl RepeatFreeParams {
    pub fn new(n: usize, ell: usize, t: usize, q: u32) -> Self {
        RepeatFreeParams { n, ell, t, q, unsafe_params: false }
    }

    pub fn relaxed(mut self) -> Self {
        self.unsafe_params = true;
        self
    }

    /// Parameters from the preset regime with
    /// `ell = ceil(log n) + 10 ceil(loglog n) + 10`, and `t` the largest run
    /// parameter whose window still leaves the codec's order guarantee
    /// within `ell`.
    pub fn preset(n: usize, q: u32) -> Self {
        let log_n = ceil_log(u64::from(q), n as u64) as usize;
        let loglog = ceil_loglog(n, q);
        let ell = log_n + 10 * loglog + 10;
        let mut t = RepeatFreeParams::max_t(n, ell, q);
        while t > RepeatFreeParams::min_t(n, q) && RepeatFreeParams::new(n, ell, t, q).codec().is_err() {
            t -= 1;
        }
        RepeatFreeParams::new(n, ell, t, q)
    }

    /// Smallest `t` permitted in the regime, for this `n` and `q`.
    pub fn min_t(n: usize, q: u32) -> usize {
        ceil_loglog(n, q) + if q == 2 { 5 } else { 4 }
    }

    /// Largest `t` permitted for this `ell`.
    pub fn max_t(n: usize, ell: usize, q: u32) -> usize {
        let log_n = ceil_log(u64::from(q), n as u64) as usize;
        ell.saturating_sub(log_n) / 3
    }

    /// Checks the parameters and precomputes tables.
    pub fn codec(&self) -> Result<RepeatFreeCodec> {
        RepeatFreeCodec::new(*self)
    }
}

fn ceil_loglog(n: usize, q: u32) -> usize {
    let qf = f64::from(q);
    let inner = log_base(qf, n as f64);
    if inner <= 1.0 {
        return 0;
    }
    ceil_guarded(log_base(qf, inner)).max(0) as usize
}

/// Counters reported alongside an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeStats {
    /// Symbols spent by the run-length pre-encoding, including unused slack.
    pub stage1_redundancy: usize,
    /// Number of replacements performed during elimination.
    pub eliminations: usize,
    /// `n - m`.
    pub redundancy: usize,
}

#[derive(Debug, Clone)]
pub struct RepeatFreeCodec {
    params: RepeatFreeParams,
    alphabet: Alphabet,
    indexer: RllIndexer,
    stage1: RllParams,
    /// Elimination window length.
    s: usize,
    message_len: usize,
    stage1_len: usize,
    filler: Vec<u8>,
}

impl RepeatFreeCodec {
    pub fn new(params: RepeatFreeParams) -> Result<Self> {
        let RepeatFreeParams { n, ell, t, q, unsafe_params } = params;
        let alphabet = Alphabet::new(q)?;
        if t < MIN_RUN_PARAMETER {
            return Err(Error::param(format!("t={t} is below the supported minimum {MIN_RUN_PARAMETER}")));
        }
        if ell == 0 || ell > n {
            return Err(Error::param(format!("ell={ell} must lie in 1..={n}")));
        }
        if !unsafe_params {
            let lo = RepeatFreeParams::min_t(n, q);
            let hi = RepeatFreeParams::max_t(n, ell, q);
            if t < lo || t > hi {
                return Err(Error::param(format!(
                    "t={t} outside the admissible range {lo}..={hi} for n={n}, ell={ell}, q={q}"
                )));
            }
        }
        let indexer = RllIndexer::new(alphabet, 4 * n as u64, t)?;
        let s = indexer.len() + t + 1;
        if !unsafe_params && s + 2 * t - 2 > ell {
            return Err(Error::Unsupported(format!(
                "index length {} leaves ell={ell} below the guaranteed order {}",
                indexer.len(),
                s + 2 * t - 2
            )));
        }
        let stage1 = RllParams::new(q, t - 3)?;
        let budget = n.checked_sub(t + 1).ok_or_else(|| Error::param(format!("n={n} too short for t={t}")))?;
        let message_len = stage1.max_input_len(budget);
        if message_len == 0 {
            return Err(Error::param(format!("no message symbols fit in n={n} with t={t}")));
        }
        let stage1_len = stage1.encoded_len(message_len);
        let filler = build_filler(n, s, t, alphabet)?;
        Ok(RepeatFreeCodec { params, alphabet, indexer, stage1, s, message_len, stage1_len, filler })
    }

    pub fn params(&self) -> RepeatFreeParams {
        self.params
    }

    /// Message length `m`.
    pub fn message_len(&self) -> usize {
        self.message_len
    }

    /// Elimination window length.
    pub fn window(&self) -> usize {
        self.s
    }

    pub fn index_len(&self) -> usize {
        self.indexer.len()
    }

    pub fn redundancy(&self) -> usize {
        self.params.n - self.message_len
    }

    /// The upper bound on redundancy stated for this construction:
    /// `t + 1 + 2 ceil(16 n / 2^t)` for binary and
    /// `t + 1 + ceil(q^4 n / ((q-2) q^t))` otherwise.
    pub fn redundancy_budget(&self) -> f64 {
        let RepeatFreeParams { n, t, q, .. } = self.params;
        let qf = f64::from(q);
        let term = if q == 2 {
            2.0 * (16.0 * n as f64 / 2f64.powi(t as i32)).ceil()
        } else {
            (qf.powi(4) / (qf - 2.0) * n as f64 / qf.powi(t as i32)).ceil()
        };
        (t + 1) as f64 + term
    }

    pub fn encode(&self, x: &QaryString) -> Result<QaryString> {
        self.encode_with_stats(x).map(|(z, _)| z)
    }

    pub fn encode_with_stats(&self, x: &QaryString) -> Result<(QaryString, EncodeStats)> {
        let RepeatFreeParams { n, ell, t, .. } = self.params;
        if x.alphabet() != self.alphabet {
            return Err(Error::param("message alphabet does not match the parameters"));
        }
        if x.len() != self.message_len {
            return Err(Error::param(format!("message length {} != {}", x.len(), self.message_len)));
        }
        let y = encode_run_limited(x, &self.stage1)?;
        debug_assert_eq!(y.len(), self.stage1_len);
        let (w, eliminations) = self.eliminate(y.symbols())?;
        let mut z = Vec::with_capacity(n);
        z.extend_from_slice(&w);
        z.push(1);
        z.extend(std::iter::repeat_n(0, t - 1));
        z.push(1);
        let rest = n - z.len();
        z.extend_from_slice(&self.filler[..rest]);
        if longest_zero_run(&z) >= t {
            return Err(Error::Postcondition(format!("codeword has a zero-run of length {t}")));
        }
        if !symbols_repeat_free(&z, ell) {
            return Err(Error::Postcondition(format!("codeword is not {ell}-repeat-free")));
        }
        let stats = EncodeStats {
            stage1_redundancy: n - t - 1 - self.message_len,
            eliminations,
            redundancy: n - self.message_len,
        };
        Ok((QaryString::from_trusted(self.alphabet, z), stats))
    }

    pub fn decode(&self, z: &QaryString) -> Result<QaryString> {
        let RepeatFreeParams { n, t, .. } = self.params;
        if z.len() != n || z.alphabet() != self.alphabet {
            return Err(Error::decode(format!("codeword must have length {n} over q={}", self.params.q)));
        }
        let z = z.symbols();
        let bridge = first_run_at_least(z, t - 1).ok_or_else(|| Error::decode("no bridge marker found"))?;
        if bridge == 0 || z[bridge - 1] != 1 || bridge + t > n || z[bridge + t - 1] != 1 {
            return Err(Error::decode("malformed bridge marker"));
        }
        if z[bridge..bridge + t - 1].iter().any(|&c| c != 0) {
            return Err(Error::decode("malformed bridge marker"));
        }
        let w = &z[..bridge - 1];
        let tail = &z[bridge + t..];
        if tail != &self.filler[..tail.len()] {
            return Err(Error::decode("filler after the bridge does not match"));
        }
        let y = self.restore(w)?;
        let x = decode_run_limited(&QaryString::from_trusted(self.alphabet, y), &self.stage1)?;
        if x.len() != self.message_len {
            return Err(Error::decode("pre-encoded block structure does not match the message length"));
        }
        Ok(x)
    }

    /// `1 0^{t-3} 1 h(tag) 1` with `tag = 4 i + 2 claimed + victim`.
    fn marker(&self, tag: MarkerTag) -> Result<Vec<u8>> {
        let t = self.params.t;
        let mut m = Vec::with_capacity(self.s - 1);
        m.push(1);
        m.extend(std::iter::repeat_n(0, t - 3));
        m.push(1);
        m.extend(self.indexer.encode(tag.pack())?);
        m.push(1);
        debug_assert_eq!(m.len(), self.s - 1);
        Ok(m)
    }

    fn index_span(&self, p: usize) -> std::ops::Range<usize> {
        let start = p + self.params.t - 1;
        start..start + self.indexer.len()
    }

    fn read_tag(&self, w: &[u8], p: usize) -> Result<MarkerTag> {
        Ok(MarkerTag::unpack(self.indexer.decode(&w[self.index_span(p)])?))
    }

    fn write_tag(&self, w: &mut [u8], p: usize, tag: MarkerTag) -> Result<()> {
        let span = self.index_span(p);
        w[span].copy_from_slice(&self.indexer.encode(tag.pack())?);
        Ok(())
    }

    /// Replaces repeated `s`-windows until none remain. Returns the reduced
    /// string and the number of replacements.
    fn eliminate(&self, y: &[u8]) -> Result<(Vec<u8>, usize)> {
        let s = self.s;
        let mut w = y.to_vec();
        // All windows starting before the scan position are distinct, so a
        // map from content to position is a bijection.
        let mut seen: HashMap<Vec<u8>, usize> = HashMap::with_capacity(w.len());
        let mut j = 0usize;
        let mut count = 0usize;
        while j + s <= w.len() {
            match seen.get(&w[j..j + s]) {
                Some(&i) => {
                    // The window may end on the leading 1 of a marker, which
                    // then survives to the right of the new one. Flag it so
                    // the decoder skips it, and remember whether the flag
                    // was set here.
                    let neighbour = j + s - 1;
                    let mut claimed = false;
                    if self.marker_at(&w, neighbour) {
                        let tag = self.read_tag(&w, neighbour).map_err(|e| {
                            Error::Postcondition(format!("marker after position {j} is unreadable: {e}"))
                        })?;
                        if !tag.victim {
                            claimed = true;
                            self.write_tag(&mut w, neighbour, MarkerTag { victim: true, ..tag })?;
                        }
                    }
                    let marker = self.marker(MarkerTag { position: i, claimed, victim: false })?;
                    let lo = j.saturating_sub(s - 1);
                    for p in lo..j {
                        seen.remove(&w[p..p + s]);
                    }
                    let before = w.len();
                    w.splice(j..j + s, marker);
                    assert_eq!(w.len() + 1, before, "each replacement shortens by one");
                    count += 1;
                    if count > y.len() {
                        return Err(Error::Postcondition("elimination failed to terminate".into()));
                    }
                    j = lo;
                }
                None => {
                    seen.insert(w[j..j + s].to_vec(), j);
                    j += 1;
                }
            }
        }
        Ok((w, count))
    }

    /// True when a complete marker starts at `p`.
    fn marker_at(&self, w: &[u8], p: usize) -> bool {
        let t = self.params.t;
        p + self.s - 1 <= w.len()
            && w[p] == 1
            && w[p + 1..p + t - 2].iter().all(|&c| c == 0)
            && w[p + t - 2] == 1
            && w[p + self.s - 2] == 1
    }

    /// The most recent replacement: the rightmost marker not flagged as a
    /// victim. Every marker pattern to its right is an intact, flagged one.
    fn latest_marker(&self, w: &[u8]) -> Result<Option<(usize, MarkerTag)>> {
        let run = self.params.t - 3;
        let mut end = w.len();
        while end > 0 {
            if w[end - 1] != 0 {
                end -= 1;
                continue;
            }
            let mut start = end - 1;
            while start > 0 && w[start - 1] == 0 {
                start -= 1;
            }
            if end - start == run {
                let p = start.checked_sub(1).filter(|&p| self.marker_at(w, p));
                let p = p.ok_or_else(|| Error::decode(format!("incomplete marker near position {start}")))?;
                let tag = self.read_tag(w, p)?;
                if !tag.victim {
                    return Ok(Some((p, tag)));
                }
            }
            end = start;
        }
        Ok(None)
    }

    /// Undoes all replacements, most recent first.
    fn restore(&self, w: &[u8]) -> Result<Vec<u8>> {
        let s = self.s;
        if w.len() > self.stage1_len {
            return Err(Error::decode("reduced string longer than the pre-encoded message"));
        }
        let mut cur = w.to_vec();
        while cur.len() < self.stage1_len {
            let (p, tag) = self.latest_marker(&cur)?.ok_or_else(|| Error::decode("too few markers for the length"))?;
            let i = tag.position;
            if i >= p {
                return Err(Error::decode(format!("marker at {p} points forward to {i}")));
            }
            let mut prev = Vec::with_capacity(cur.len() + 1);
            prev.extend_from_slice(&cur[..p]);
            for k in 0..s {
                let c = prev[i + k];
                prev.push(c);
            }
            prev.extend_from_slice(&cur[p + s - 1..]);
            if tag.claimed {
                let neighbour = p + s - 1;
                if !self.marker_at(&prev, neighbour) {
                    return Err(Error::decode(format!("claimed neighbour of marker {p} is missing")));
                }
                let old = self.read_tag(&prev, neighbour)?;
                if !old.victim {
                    return Err(Error::decode(format!("claimed neighbour of marker {p} is not flagged")));
                }
                self.write_tag(&mut prev, neighbour, MarkerTag { victim: false, ..old })?;
            }
            cur = prev;
        }
        // Re-running elimination rejects anything that merely parsed.
        if !run_limited(&cur, self.params.t - 3) || self.eliminate(&cur)?.0 != w {
            return Err(Error::decode("restored string does not reproduce the reduced string"));
        }
        Ok(cur)
    }
}

/// Payload of a marker: the earlier position of the repeated window, and
/// two flags. `victim` marks a marker whose leading 1 is shared with the
/// trailing 1 of a newer marker to its left; `claimed` marks the newer
/// marker that set that flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MarkerTag {
    position: usize,
    claimed: bool,
    victim: bool,
}

impl MarkerTag {
    fn pack(self) -> u64 {
        ((self.position as u64) << 2) | (u64::from(self.claimed) << 1) | u64::from(self.victim)
    }

    fn unpack(v: u64) -> Self {
        MarkerTag { position: (v >> 2) as usize, claimed: v & 2 != 0, victim: v & 1 != 0 }
    }
}

/// `v_0 1 0^{t-2} 1 v_1 1 0^{t-2} 1 ...` where `v` is a de Bruijn tail cut
/// into blocks of length `s`, truncated to `n` symbols.
fn build_filler(n: usize, s: usize, t: usize, alphabet: Alphabet) -> Result<Vec<u8>> {
    let v = debruijn_tail(n, s, t, alphabet)?;
    let mut out = Vec::with_capacity(n + t);
    for (b, block) in v.symbols().chunks(s).enumerate() {
        if out.len() >= n {
            break;
        }
        if b > 0 {
            out.push(1);
            out.extend(std::iter::repeat_n(0, t - 2));
            out.push(1);
        }
        out.extend_from_slice(block);
    }
    out.truncate(n);
    Ok(out)
}

fn first_run_at_least(z: &[u8], len: usize) -> Option<usize> {
    let mut run = 0;
    for (i, &c) in z.iter().enumerate() {
        if c == 0 {
            run += 1;
            if run == len {
                return Some(i + 1 - len);
            }
        } else {
            run = 0;
        }
    }
    None
}

pub fn rf_encode(x: &QaryString, p: &RepeatFreeParams) -> Result<QaryString> {
    p.codec()?.encode(x)
}

pub fn rf_decode(z: &QaryString, p: &RepeatFreeParams) -> Result<QaryString> {
    p.codec()?.decode(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(codec: &RepeatFreeCodec, rng: &mut ChaCha8Rng) -> QaryString {
        let q = codec.params().q;
        let a = Alphabet::new(q).unwrap();
        QaryString::new(a, (0..codec.message_len()).map(|_| rng.gen_range(0..q) as u8).collect()).unwrap()
    }

    #[test]
    fn derived_quantities_at_n_4096() {
        assert_eq!(RepeatFreeParams::min_t(4096, 2), 9);
        assert_eq!(RepeatFreeParams::max_t(4096, 39, 2), 9);
        // Two flag bits widen the index by two symbols, so ell = 39 no
        // longer covers the order guarantee s + 2t - 2.
        assert!(matches!(RepeatFreeParams::new(4096, 39, 9, 2).codec(), Err(Error::Unsupported(_))));
        let codec = RepeatFreeParams::new(4096, 41, 9, 2).codec().unwrap();
        assert_eq!(codec.index_len(), 15);
        assert_eq!(codec.window(), 25);
    }

    #[test]
    fn regime_is_enforced_unless_relaxed() {
        assert!(RepeatFreeParams::new(4096, 39, 8, 2).codec().is_err());
        assert!(RepeatFreeParams::new(4096, 38, 9, 2).codec().is_err());
        assert!(RepeatFreeParams::new(256, 40, 6, 2).relaxed().codec().is_ok());
        assert!(RepeatFreeParams::new(256, 40, 4, 2).relaxed().codec().is_err());
    }

    #[test]
    fn round_trip_at_n_4096() {
        let codec = RepeatFreeParams::new(4096, 41, 9, 2).codec().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = random(&codec, &mut rng);
            let (z, stats) = codec.encode_with_stats(&x).unwrap();
            assert_eq!(z.len(), 4096);
            assert!(symbols_repeat_free(z.symbols(), 41));
            assert!(longest_zero_run(z.symbols()) < 9);
            assert_eq!(stats.redundancy, 9 + 1 + stats.stage1_redundancy);
            assert!(stats.redundancy as f64 <= codec.redundancy_budget());
            assert_eq!(codec.decode(&z).unwrap(), x);
        }
    }

    #[test]
    fn structured_messages_force_many_eliminations() {
        let codec = RepeatFreeParams::new(1024, 40, 7, 2).relaxed().codec().unwrap();
        let m = codec.message_len();
        let a = Alphabet::binary();
        let messages = [
            vec![0u8; m],
            vec![1u8; m],
            (0..m).map(|i| (i % 2) as u8).collect(),
            (0..m).map(|i| u8::from(i % 7 == 0)).collect::<Vec<u8>>(),
        ];
        for msg in messages {
            let x = QaryString::new(a, msg).unwrap();
            let (z, stats) = codec.encode_with_stats(&x).unwrap();
            assert!(stats.eliminations > 0);
            assert_eq!(codec.decode(&z).unwrap(), x);
        }
    }

    #[test]
    fn relaxed_round_trips_small_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, ell, t, q) in [(128, 24, 5, 2), (200, 30, 6, 2), (100, 20, 5, 3), (150, 24, 5, 4)] {
            let codec = RepeatFreeParams::new(n, ell, t, q).relaxed().codec().unwrap();
            for _ in 0..200 {
                let x = random(&codec, &mut rng);
                match codec.encode(&x) {
                    Ok(z) => assert_eq!(codec.decode(&z).unwrap(), x),
                    Err(Error::Postcondition(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn decode_rejects_corrupted_codewords() {
        let codec = RepeatFreeParams::new(1024, 40, 7, 2).relaxed().codec().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random(&codec, &mut rng);
        let z = codec.encode(&x).unwrap();
        let mut bad = z.symbols().to_vec();
        let last = bad.len() - 1;
        bad[last] ^= 1;
        assert!(codec.decode(&QaryString::binary(bad).unwrap()).is_err());
        assert!(codec.decode(&QaryString::binary(vec![1; 1024]).unwrap()).is_err());
    }

    #[test]
    fn preset_parameters_are_consistent() {
        let p = RepeatFreeParams::preset(1 << 12, 2);
        assert_eq!(p.ell, 12 + 40 + 10);
        assert!(p.t >= RepeatFreeParams::min_t(1 << 12, 2));
        assert!(p.codec().is_ok());
    }

    #[test]
    fn periodic_messages_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, ell, t) in [(1024usize, 40usize, 7usize), (256, 30, 5)] {
            let codec = RepeatFreeParams::new(n, ell, t, 2).relaxed().codec().unwrap();
            let m = codec.message_len();
            let mut messages: Vec<Vec<u8>> = Vec::new();
            for period in 1..40 {
                for phase in 0..3 {
                    messages.push((0..m).map(|i| u8::from((i + phase) % period == 0)).collect());
                    messages.push((0..m).map(|i| u8::from((i + phase) % period != 0)).collect());
                }
            }
            for _ in 0..20 {
                let block: Vec<u8> = (0..rng.gen_range(5..60)).map(|_| rng.gen_range(0..2)).collect();
                messages.push((0..m).map(|i| block[i % block.len()]).collect());
            }
            for msg in messages {
                let x = QaryString::new(Alphabet::binary(), msg).unwrap();
                let z = codec.encode(&x).unwrap();
                assert_eq!(codec.decode(&z).unwrap(), x);
            }
        }
    }
}
