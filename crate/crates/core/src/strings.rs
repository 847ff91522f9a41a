//! q-ary strings, windows, profiles and the repeat-free / run-length predicates.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alphabet `{0, 1, ..., q-1}`. Symbols 0 and 1 play distinguished roles
/// in markers and run-length constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alphabet {
    q: u32,
}

impl Alphabet {
    pub const ZERO: u8 = 0;
    pub const ONE: u8 = 1;

    /// Symbols are stored as `u8`, so `q` may range over `2..=256`.
    pub fn new(q: u32) -> Result<Self> {
        if !(2..=256).contains(&q) {
            return Err(Error::param(format!("alphabet size must lie in 2..=256, got {q}")));
        }
        Ok(Alphabet { q })
    }

    pub fn binary() -> Self {
        Alphabet { q: 2 }
    }

    pub fn size(self) -> u32 {
        self.q
    }

    pub fn max_symbol(self) -> u8 {
        (self.q - 1) as u8
    }

    pub fn contains(self, symbol: u8) -> bool {
        u32::from(symbol) < self.q
    }
}

/// A finite string over an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QaryString {
    alphabet: Alphabet,
    symbols: Vec<u8>,
}

impl QaryString {
    pub fn new(alphabet: Alphabet, symbols: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::param(format!("symbol {bad} outside alphabet of size {}", alphabet.size())));
        }
        Ok(QaryString { alphabet, symbols })
    }

    /// Caller guarantees every symbol is below `q`.
    pub(crate) fn from_trusted(alphabet: Alphabet, symbols: Vec<u8>) -> Self {
        debug_assert!(symbols.iter().all(|&s| alphabet.contains(s)));
        QaryString { alphabet, symbols }
    }

    pub fn binary(symbols: Vec<u8>) -> Result<Self> {
        Self::new(Alphabet::binary(), symbols)
    }

    /// Parses digits `0-9` then `a-z`, e.g. `"0110"` or `"2a1"`.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let symbols = text
            .chars()
            .map(|c| {
                c.to_digit(36).map(|d| d as u8).ok_or_else(|| Error::Parse(format!("invalid symbol character {c:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(alphabet, symbols).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn q(&self) -> u32 {
        self.alphabet.size()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn substring(&self, start: usize, len: usize) -> QaryString {
        QaryString::from_trusted(self.alphabet, self.symbols[start..start + len].to_vec())
    }

    pub fn concat(&self, other: &QaryString) -> QaryString {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        QaryString::from_trusted(self.alphabet, symbols)
    }
}

impl fmt::Display for QaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            let c = std::char::from_digit(u32::from(s), 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Renders a raw symbol slice the same way [`QaryString`] displays.
pub fn render(symbols: &[u8]) -> String {
    symbols.iter().map(|&s| std::char::from_digit(u32::from(s), 36).unwrap_or('?')).collect()
}

/// Multiset of `k` strands sharing a common length `n`.
///
/// Strand order is not semantic: equality compares sorted contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrandMultiset {
    strands: Vec<QaryString>,
    n: usize,
}

impl StrandMultiset {
    pub fn new(strands: Vec<QaryString>) -> Result<Self> {
        let first = strands.first().ok_or_else(|| Error::param("a strand multiset needs at least one strand"))?;
        let n = first.len();
        let alphabet = first.alphabet();
        for s in &strands {
            if s.len() != n {
                return Err(Error::param(format!("strand lengths differ: {} vs {}", s.len(), n)));
            }
            if s.alphabet() != alphabet {
                return Err(Error::param("strands use different alphabets"));
            }
        }
        Ok(StrandMultiset { strands, n })
    }

    pub fn strands(&self) -> &[QaryString] {
        &self.strands
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.strands.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.strands[0].alphabet()
    }

    /// Strands sorted lexicographically; the canonical form used for equality.
    pub fn sorted(&self) -> Vec<QaryString> {
        let mut v = self.strands.clone();
        v.sort();
        v
    }

    /// True when no strand occurs twice.
    pub fn all_distinct(&self) -> bool {
        let set: HashSet<&[u8]> = self.strands.iter().map(|s| s.symbols()).collect();
        set.len() == self.strands.len()
    }
}

impl PartialEq for StrandMultiset {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.sorted() == other.sorted()
    }
}

impl Eq for StrandMultiset {}

/// Sparse count vector over length-`ell` words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileVector {
    ell: usize,
    q: u32,
    counts: BTreeMap<Vec<u8>, u64>,
}

impl ProfileVector {
    pub fn empty(q: u32, ell: usize) -> Self {
        ProfileVector { ell, q, counts: BTreeMap::new() }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn add(&mut self, word: &[u8]) {
        debug_assert_eq!(word.len(), self.ell);
        *self.counts.entry(word.to_vec()).or_insert(0) += 1;
    }

    /// Adds every entry of `other` into `self`.
    pub fn merge(&mut self, other: &ProfileVector) {
        for (w, c) in &other.counts {
            *self.counts.entry(w.clone()).or_insert(0) += c;
        }
    }

    pub fn count(&self, word: &[u8]) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total_mass(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_slice(), c))
    }

    /// Every word repeated according to its count, in sorted order.
    pub fn expand(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::with_capacity(self.total_mass() as usize);
        for (w, &c) in &self.counts {
            for _ in 0..c {
                out.push(w.clone());
            }
        }
        out
    }
}

/// Windows of length `ell` at locations `0, step, 2*step, ...`, with the last
/// window moved to the suffix when the arithmetic progression misses it.
pub fn windows(x: &QaryString, ell: usize, step: usize) -> Result<Vec<QaryString>> {
    Ok(window_starts(x.len(), ell, step)?.into_iter().map(|i| x.substring(i, ell)).collect())
}

/// Start locations used by [`windows`].
pub fn window_starts(n: usize, ell: usize, step: usize) -> Result<Vec<usize>> {
    if ell == 0 || ell > n {
        return Err(Error::param(format!("window length {ell} must lie in 1..={n}")));
    }
    if step == 0 || step > ell {
        return Err(Error::param(format!("window step {step} must lie in 1..={ell}")));
    }
    let last = n - ell;
    let mut starts: Vec<usize> = (0..=last).step_by(step).collect();
    if *starts.last().expect("non-empty range") != last {
        starts.push(last);
    }
    Ok(starts)
}

/// The `ell`-profile: every length-`ell` substring counted by multiplicity.
pub fn profile(x: &QaryString, ell: usize) -> Result<ProfileVector> {
    if ell == 0 || ell > x.len() {
        return Err(Error::param(format!("profile order {ell} must lie in 1..={}", x.len())));
    }
    let mut p = ProfileVector::empty(x.q(), ell);
    for w in x.symbols().windows(ell) {
        p.add(w);
    }
    Ok(p)
}

/// Union of the strands' `ell`-profiles, respecting multiplicity.
pub fn multiset_profile(s: &StrandMultiset, ell: usize) -> Result<ProfileVector> {
    let mut p = ProfileVector::empty(s.alphabet().size(), ell);
    for x in s.strands() {
        p.merge(&profile(x, ell)?);
    }
    Ok(p)
}

/// True when all `ell`-windows of `x` are pairwise distinct.
pub fn is_repeat_free(x: &QaryString, ell: usize) -> bool {
    symbols_repeat_free(x.symbols(), ell)
}

pub(crate) fn symbols_repeat_free(x: &[u8], ell: usize) -> bool {
    if ell == 0 {
        return x.is_empty();
    }
    if ell >= x.len() {
        return true;
    }
    let mut seen = HashSet::with_capacity(x.len());
    x.windows(ell).all(|w| seen.insert(w))
}

/// True when the `k(n-ell+1)` windows of all strands are pairwise distinct.
pub fn is_multistrand_repeat_free(s: &StrandMultiset, ell: usize) -> bool {
    if ell == 0 || ell > s.n() {
        return false;
    }
    let mut seen = HashSet::new();
    s.strands().iter().all(|x| x.symbols().windows(ell).all(|w| seen.insert(w)))
}

/// True when `x` has no run of `s` consecutive zeros.
pub fn is_rll(x: &QaryString, s: usize) -> bool {
    longest_zero_run(x.symbols()) < s
}

pub(crate) fn longest_zero_run(x: &[u8]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for &c in x {
        if c == 0 {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

/// Parses the line-oriented text format: a `q=<int>` header followed by
/// one string per line. Blank lines and `#` comments are ignored.
pub fn parse_text(text: &str) -> Result<(Alphabet, Vec<QaryString>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("missing q=<int> header".into()))?;
    let q = header
        .strip_prefix("q=")
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| Error::Parse(format!("bad header {header:?}, expected q=<int>")))?;
    if q > 36 {
        return Err(Error::Parse(format!("text format supports q <= 36, got {q}")));
    }
    let alphabet = Alphabet::new(q).map_err(|e| Error::Parse(e.to_string()))?;
    let strings = lines.map(|l| QaryString::parse(alphabet, l)).collect::<Result<Vec<_>>>()?;
    Ok((alphabet, strings))
}

pub fn format_text(alphabet: Alphabet, strings: &[QaryString]) -> String {
    let mut out = format!("q={}\n", alphabet.size());
    for s in strings {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> QaryString {
        QaryString::parse(Alphabet::binary(), s).unwrap()
    }

    fn strs(v: &[QaryString]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn canonical_windows_of_running_example() {
        let w = windows(&b("11101110101111"), 4, 2).unwrap();
        assert_eq!(strs(&w), ["1110", "1011", "1110", "1010", "1011", "1111"]);
    }

    #[test]
    fn full_length_window_is_the_string() {
        let x = b("01101");
        assert_eq!(windows(&x, 5, 1).unwrap(), vec![x]);
    }

    #[test]
    fn windows_when_progression_hits_the_suffix() {
        let w = windows(&b("0101010101"), 4, 3).unwrap();
        assert_eq!(strs(&w), ["0101", "1010", "0101"]);
    }

    #[test]
    fn window_parameter_errors() {
        assert!(windows(&b("0101"), 5, 1).is_err());
        assert!(windows(&b("0101"), 2, 0).is_err());
    }

    #[test]
    fn profile_examples() {
        let p = profile(&b("0000"), 2).unwrap();
        assert_eq!(p.count(&[0, 0]), 3);
        assert_eq!(p.distinct(), 1);
        let p = profile(&b("11101110101111"), 4).unwrap();
        assert_eq!(p.total_mass(), 11);
        assert_eq!(p.count(&[1, 1, 1, 0]), 2);
        let p = profile(&b("01"), 1).unwrap();
        assert_eq!((p.count(&[0]), p.count(&[1])), (1, 1));
    }

    #[test]
    fn repeat_free_examples() {
        assert!(is_repeat_free(&b("0011"), 2));
        assert!(!is_repeat_free(&b("0000"), 2));
        assert!(is_repeat_free(&b("0000"), 4));
    }

    #[test]
    fn multistrand_repeat_free_examples() {
        let s = StrandMultiset::new(vec![b("0011"), b("1100")]).unwrap();
        assert!(is_multistrand_repeat_free(&s, 3));
        let s = StrandMultiset::new(vec![b("0011"), b("0011")]).unwrap();
        assert!(!is_multistrand_repeat_free(&s, 3));
        let x = b("0110");
        let s = StrandMultiset::new(vec![x.clone()]).unwrap();
        for ell in 1..=4 {
            assert_eq!(is_multistrand_repeat_free(&s, ell), is_repeat_free(&x, ell));
        }
    }

    #[test]
    fn rll_examples() {
        assert!(!is_rll(&b("0001"), 3));
        assert!(is_rll(&b("0001"), 4));
        assert!(is_rll(&b("1111"), 1));
    }

    #[test]
    fn multiset_equality_ignores_order() {
        let a = StrandMultiset::new(vec![b("01"), b("10")]).unwrap();
        let c = StrandMultiset::new(vec![b("10"), b("01")]).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn text_format_round_trip() {
        let a = Alphabet::new(12).unwrap();
        let xs = vec![QaryString::parse(a, "0ab1").unwrap(), QaryString::parse(a, "b").unwrap()];
        let text = format_text(a, &xs);
        assert_eq!(text, "q=12\n0ab1\nb\n");
        assert_eq!(parse_text(&text).unwrap(), (a, xs));
        assert!(parse_text("q=2\n012\n").is_err());
        assert!(parse_text("0101\n").is_err());
    }
}
