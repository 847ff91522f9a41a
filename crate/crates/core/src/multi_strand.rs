//! Multi-strand codes decodable from the `(ell+1)`-profile of the strands.
//!
//! Both schemes encode the message once with the repeat-free encoder into a
//! long string `y` and cut `y` into `k` strands of length `n`:
//!
//! * **index**: `y` has length `(n - d) k` with `d = ceil(log_q k)` and
//!   window order `ell - d`; strand `i` is the `d`-symbol expansion of `i`
//!   followed by the `i`-th piece of `y`. The strands are jointly
//!   `ell`-repeat-free, so the profile determines them, and the prefixes
//!   give their order.
//! * **overlap**: `y` has length `n k - (k-1) ell` and window order `ell`;
//!   strand `i` starts at `i (n - ell)`, so consecutive strands share `ell`
//!   symbols. The strands' `(ell+1)`-profile equals that of `y`, from which
//!   `y` is read off directly.

use crate::assembly::{assemble_paths, reconstruct_multiset};
use crate::error::{Error, Result};
use crate::numeric::ceil_log;
use crate::repeat_free::{RepeatFreeCodec, RepeatFreeParams, MIN_RUN_PARAMETER};
use crate::strings::{
    is_multistrand_repeat_free, multiset_profile, Alphabet, ProfileVector, QaryString, StrandMultiset,
};
use crate::trace::{StrippedTrace, TraceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Index,
    Overlap,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "index" => Ok(Scheme::Index),
            "overlap" => Ok(Scheme::Overlap),
            other => Err(Error::Parse(format!("unknown scheme {other:?}; expected index or overlap"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiStrandParams {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    pub q: u32,
    pub scheme: Scheme,
    /// Passed on to the repeat-free encoder.
    pub unsafe_params: bool,
}

impl MultiStrandParams {
    pub fn new(scheme: Scheme, n: usize, k: usize, ell: usize, q: u32) -> Self {
        MultiStrandParams { n, k, ell, q, scheme, unsafe_params: false }
    }

    pub fn relaxed(mut self) -> Self {
        self.unsafe_params = true;
        self
    }

    /// Length `d` of the strand indices; zero for the overlap scheme.
    pub fn index_len(&self) -> usize {
        match self.scheme {
            Scheme::Index if self.k > 1 => ceil_log(u64::from(self.q), self.k as u64) as usize,
            _ => 0,
        }
    }

    /// Length `n'` of the long repeat-free string.
    pub fn long_len(&self) -> Result<usize> {
        let MultiStrandParams { n, k, ell, .. } = *self;
        match self.scheme {
            Scheme::Index => {
                n.checked_sub(self.index_len()).filter(|&piece| piece > 0).map(|piece| piece * k).ok_or_else(|| {
                    Error::param(format!("n={n} leaves no room after a {}-symbol index", self.index_len()))
                })
            }
            Scheme::Overlap => {
                if ell >= n {
                    return Err(Error::param(format!("overlap ell={ell} must be below n={n}")));
                }
                Ok(n * k - (k - 1) * ell)
            }
        }
    }

    /// Window order `ell'` demanded of the long string.
    pub fn long_ell(&self) -> Result<usize> {
        self.ell.checked_sub(self.index_len()).filter(|&e| e > 0).ok_or_else(|| {
            Error::param(format!("ell={} does not exceed the index length {}", self.ell, self.index_len()))
        })
    }

    /// Run parameter `t = floor((ell' - log n')/3)`; in relaxed mode it is
    /// raised to the smallest value the encoder supports.
    pub fn run_parameter(&self) -> Result<usize> {
        let log_n = ceil_log(u64::from(self.q), self.long_len()? as u64) as usize;
        let t = self.long_ell()?.saturating_sub(log_n) / 3;
        Ok(if self.unsafe_params { t.max(MIN_RUN_PARAMETER) } else { t })
    }

    pub fn repeat_free_params(&self) -> Result<RepeatFreeParams> {
        let mut p = RepeatFreeParams::new(self.long_len()?, self.long_ell()?, self.run_parameter()?, self.q);
        p.unsafe_params = self.unsafe_params;
        Ok(p)
    }

    pub fn codec(&self) -> Result<MultiStrandCodec> {
        MultiStrandCodec::new(*self)
    }
}

#[derive(Debug, Clone)]
pub struct MultiStrandCodec {
    params: MultiStrandParams,
    alphabet: Alphabet,
    inner: RepeatFreeCodec,
}

impl MultiStrandCodec {
    pub fn new(params: MultiStrandParams) -> Result<Self> {
        if params.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        let alphabet = Alphabet::new(params.q)?;
        let inner = params.repeat_free_params()?.codec()?;
        Ok(MultiStrandCodec { params, alphabet, inner })
    }

    pub fn params(&self) -> MultiStrandParams {
        self.params
    }

    pub fn message_len(&self) -> usize {
        self.inner.message_len()
    }

    pub fn inner(&self) -> &RepeatFreeCodec {
        &self.inner
    }

    /// Order of the profile the decoder reads.
    pub fn profile_order(&self) -> usize {
        self.params.ell + 1
    }

    /// Window order at which the strands are jointly repeat-free: `ell` for
    /// the index scheme, `ell + 1` for the overlap scheme (whose strands
    /// share their `ell`-symbol seams).
    pub fn strand_order(&self) -> usize {
        match self.params.scheme {
            Scheme::Index => self.params.ell,
            Scheme::Overlap => self.params.ell + 1,
        }
    }

    /// `m / log_q |X_{n,k}|`.
    pub fn achieved_rate(&self) -> f64 {
        let MultiStrandParams { n, k, q, .. } = self.params;
        self.message_len() as f64 / crate::bounds::channel_log_size(n, k, q)
    }

    pub fn encode(&self, x: &QaryString) -> Result<StrandMultiset> {
        let y = self.inner.encode(x)?;
        let strands = self.split(&y)?;
        let s = StrandMultiset::new(strands)?;
        if !s.all_distinct() {
            return Err(Error::Postcondition("encoded strands are not distinct".into()));
        }
        if !is_multistrand_repeat_free(&s, self.strand_order()) {
            return Err(Error::Postcondition(format!("strands are not jointly {}-repeat-free", self.strand_order())));
        }
        Ok(s)
    }

    /// The long string `y` cut into strands, in strand order.
    pub fn split(&self, y: &QaryString) -> Result<Vec<QaryString>> {
        let MultiStrandParams { n, k, ell, .. } = self.params;
        if y.len() != self.params.long_len()? {
            return Err(Error::param("long string has the wrong length"));
        }
        let d = self.params.index_len();
        Ok(match self.params.scheme {
            Scheme::Index => {
                let piece = n - d;
                (0..k)
                    .map(|i| {
                        let mut symbols = expansion(i, d, self.params.q);
                        symbols.extend_from_slice(&y.symbols()[i * piece..(i + 1) * piece]);
                        QaryString::from_trusted(self.alphabet, symbols)
                    })
                    .collect()
            }
            Scheme::Overlap => (0..k).map(|i| y.substring(i * (n - ell), n)).collect(),
        })
    }

    /// Profile of order `ell + 1` of the encoded strands: the channel output.
    pub fn channel(&self, s: &StrandMultiset) -> Result<ProfileVector> {
        multiset_profile(s, self.profile_order())
    }

    pub fn decode(&self, profile: &ProfileVector) -> Result<QaryString> {
        let y = self.recover_long_string(profile)?;
        self.inner.decode(&y)
    }

    /// Rebuilds the long string `y` from the profile.
    pub fn recover_long_string(&self, profile: &ProfileVector) -> Result<QaryString> {
        let MultiStrandParams { n, k, ell, q, .. } = self.params;
        if profile.ell() != self.profile_order() || profile.q() != q {
            return Err(Error::param(format!("expected a profile of order {} over q={q}", self.profile_order())));
        }
        let segments =
            profile.expand().into_iter().map(|w| QaryString::new(self.alphabet, w)).collect::<Result<Vec<_>>>()?;
        let trace = StrippedTrace::new(segments);
        let p = TraceParams::new(ell + 1, ell)?;
        match self.params.scheme {
            Scheme::Index => {
                let strands = reconstruct_multiset(&trace, p, n, k)?;
                self.join_indexed(strands)
            }
            Scheme::Overlap => {
                let mut paths = assemble_paths(&trace, p)?;
                if paths.len() != 1 {
                    return Err(Error::Incomplete(format!("profile forms {} chains, expected one", paths.len())));
                }
                let y = paths.pop().expect("one path");
                if y.len() != self.params.long_len()? {
                    return Err(Error::Incomplete(format!(
                        "chain has length {}, expected {}",
                        y.len(),
                        self.params.long_len()?
                    )));
                }
                Ok(y)
            }
        }
    }

    fn join_indexed(&self, strands: StrandMultiset) -> Result<QaryString> {
        let d = self.params.index_len();
        let mut slots: Vec<Option<&[u8]>> = vec![None; self.params.k];
        for s in strands.strands() {
            let (prefix, body) = s.symbols().split_at(d);
            let i = prefix.iter().fold(0usize, |acc, &c| acc * self.params.q as usize + usize::from(c));
            match slots.get_mut(i) {
                Some(slot @ None) => *slot = Some(body),
                Some(Some(_)) => return Err(Error::decode(format!("strand index {i} occurs twice"))),
                None => return Err(Error::decode(format!("strand index {i} out of range"))),
            }
        }
        let mut y = Vec::with_capacity(self.params.long_len()?);
        for slot in slots {
            y.extend_from_slice(slot.ok_or_else(|| Error::decode("a strand index is missing"))?);
        }
        QaryString::new(self.alphabet, y)
    }
}

/// Big-endian base-`q` expansion of `i` on `d` symbols.
fn expansion(mut i: usize, d: usize, q: u32) -> Vec<u8> {
    let mut out = vec![0u8; d];
    for slot in out.iter_mut().rev() {
        *slot = (i % q as usize) as u8;
        i /= q as usize;
    }
    out
}
