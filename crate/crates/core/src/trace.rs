//! The `(lmin, lover)` substring channel.
//!
//! A trace of `x` is a multiset of substrings `x[i_j .. i_j + len_j]` with
//! strictly increasing starts, `i_1 = 0`, the last substring ending at `|x|`,
//! every length at least `lmin`, and consecutive substrings overlapping in at
//! least `lover` symbols. Ground-truth placements ride along for testing but
//! decoders only ever see a [`StrippedTrace`].

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strings::{Alphabet, QaryString, StrandMultiset};

/// Node budget for the placement search in [`validate_trace`].
pub const DEFAULT_VALIDATION_BUDGET: u64 = 1_000_000;
/// Budget on explored cut structures in [`enumerate_traces`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceParams {
    pub lmin: usize,
    pub lover: usize,
}

impl TraceParams {
    pub fn new(lmin: usize, lover: usize) -> Result<Self> {
        if lmin == 0 {
            return Err(Error::param("lmin must be at least 1"));
        }
        if lover > lmin {
            return Err(Error::param(format!("lover ({lover}) may not exceed lmin ({lmin})")));
        }
        Ok(TraceParams { lmin, lover })
    }
}

/// Where a segment came from: strand index and start location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub strand: usize,
    pub location: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSegment {
    pub content: QaryString,
    pub placement: Option<Placement>,
}

/// A channel output: a multiset of segments, optionally with ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    segments: Vec<TraceSegment>,
}

/// The contents of a trace without any placement metadata, sorted into
/// canonical order. Every decoder takes this view.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrippedTrace {
    contents: Vec<QaryString>,
}

impl StrippedTrace {
    pub fn new(mut contents: Vec<QaryString>) -> Self {
        contents.sort();
        StrippedTrace { contents }
    }

    pub fn segments(&self) -> &[QaryString] {
        &self.contents
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }
}

impl Trace {
    pub fn new(segments: Vec<TraceSegment>) -> Self {
        Trace { segments }
    }

    pub fn from_contents(contents: Vec<QaryString>) -> Self {
        Trace { segments: contents.into_iter().map(|content| TraceSegment { content, placement: None }).collect() }
    }

    pub fn segments(&self) -> &[TraceSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn stripped(&self) -> StrippedTrace {
        StrippedTrace::new(self.segments.iter().map(|s| s.content.clone()).collect())
    }

    /// Sorted segment contents; two traces are the same multiset exactly
    /// when their canonical forms agree.
    pub fn canonical(&self) -> Vec<QaryString> {
        self.stripped().contents
    }

    pub fn has_placements(&self) -> bool {
        !self.segments.is_empty() && self.segments.iter().all(|s| s.placement.is_some())
    }

    pub fn merge(traces: impl IntoIterator<Item = Trace>) -> Trace {
        Trace { segments: traces.into_iter().flat_map(|t| t.segments).collect() }
    }
}

fn check_source(x: &QaryString, p: TraceParams) -> Result<()> {
    if x.len() < p.lmin {
        return Err(Error::param(format!("string length {} is below lmin = {}", x.len(), p.lmin)));
    }
    Ok(())
}

/// Windows of length `lmin` at step `lmin - lover`, the last one moved to
/// the suffix.
///
/// Consecutive segments of any trace share at least one symbol, so
/// `lover = 0` behaves like `lover = 1` here.
pub fn canonical_trace(x: &QaryString, p: TraceParams) -> Result<Trace> {
    canonical_trace_on_strand(x, p, 0)
}

fn canonical_trace_on_strand(x: &QaryString, p: TraceParams, strand: usize) -> Result<Trace> {
    check_source(x, p)?;
    let overlap = p.lover.max(1);
    if p.lmin == p.lover || (p.lmin <= overlap && x.len() > p.lmin) {
        return Err(Error::param("canonical trace needs lmin > max(lover, 1) (step would be zero)"));
    }
    let step = p.lmin.saturating_sub(overlap).max(1);
    let starts = crate::strings::window_starts(x.len(), p.lmin, step)?;
    Ok(Trace {
        segments: starts
            .into_iter()
            .map(|i| TraceSegment {
                content: x.substring(i, p.lmin),
                placement: Some(Placement { strand, location: i }),
            })
            .collect(),
    })
}

/// Greedy random trace: lengths uniform over their legal range.
pub fn random_trace(x: &QaryString, p: TraceParams, seed: u64) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_trace_with(x, p, &mut rng, usize::MAX, 0)
}

/// As [`random_trace`] but with segment lengths capped at `max_len` (which
/// is raised to `lmin + 1` if smaller), producing many short segments.
pub fn random_trace_bounded(x: &QaryString, p: TraceParams, seed: u64, max_len: usize) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_trace_with(x, p, &mut rng, max_len, 0)
}

fn random_trace_with<R: Rng>(
    x: &QaryString,
    p: TraceParams,
    rng: &mut R,
    max_len: usize,
    strand: usize,
) -> Result<Trace> {
    check_source(x, p)?;
    let n = x.len();
    let cap = max_len.max(p.lmin + 1);
    let mut segments = Vec::new();
    let mut start = 0usize;
    loop {
        let remaining = n - start;
        // A non-final segment needs room for a successor of length lmin that
        // starts strictly later and overlaps it by at least lover.
        let can_continue = start + 1 + p.lmin <= n;
        let lo = if can_continue { p.lmin.max(p.lover + 1) } else { remaining };
        let hi = remaining.min(cap).max(lo);
        let len = if lo >= remaining { remaining } else { rng.gen_range(lo..=hi) };
        segments.push(TraceSegment {
            content: x.substring(start, len),
            placement: Some(Placement { strand, location: start }),
        });
        if start + len == n {
            break;
        }
        let next_hi = (start + len - p.lover).min(n - p.lmin);
        start = rng.gen_range(start + 1..=next_hi);
    }
    Ok(Trace { segments })
}

/// Checks that placements (if present and consistent) or some assignment of
/// ascending locations makes `t` an `(lmin, lover)`-trace of `x`.
pub fn validate_trace(x: &QaryString, t: &Trace, p: TraceParams) -> Result<bool> {
    validate_trace_with_budget(x, t, p, DEFAULT_VALIDATION_BUDGET)
}

pub fn validate_trace_with_budget(x: &QaryString, t: &Trace, p: TraceParams, budget: u64) -> Result<bool> {
    if t.is_empty() || x.is_empty() {
        return Ok(false);
    }
    if t.segments.iter().any(|s| s.content.len() < p.lmin || s.content.alphabet() != x.alphabet()) {
        return Ok(false);
    }
    if t.has_placements() && placements_valid(x, t, p) {
        return Ok(true);
    }
    search_placements(x, &t.stripped(), p, budget)
}

fn placements_valid(x: &QaryString, t: &Trace, p: TraceParams) -> bool {
    let mut placed: Vec<(usize, &QaryString)> = Vec::with_capacity(t.len());
    for s in &t.segments {
        let Some(pl) = s.placement else { return false };
        let len = s.content.len();
        if pl.strand != 0 || pl.location + len > x.len() {
            return false;
        }
        if &x.symbols()[pl.location..pl.location + len] != s.content.symbols() {
            return false;
        }
        placed.push((pl.location, &s.content));
    }
    placed.sort_by_key(|&(loc, _)| loc);
    cut_structure_valid(x.len(), placed.iter().map(|&(loc, c)| (loc, c.len())), p)
}

/// Checks the positional conditions on a sequence of `(start, len)` pairs.
pub fn cut_structure_valid(n: usize, cuts: impl IntoIterator<Item = (usize, usize)>, p: TraceParams) -> bool {
    let mut prev: Option<(usize, usize)> = None;
    for (start, len) in cuts {
        if len < p.lmin || start + len > n {
            return false;
        }
        match prev {
            None if start != 0 => return false,
            Some((ps, pe)) if start <= ps || start >= pe || pe - start < p.lover => return false,
            _ => {}
        }
        prev = Some((start, start + len));
    }
    matches!(prev, Some((_, end)) if end == n)
}

struct PlacementSearch<'a> {
    x: &'a [u8],
    lover: usize,
    /// Distinct segment contents with remaining multiplicity and the
    /// locations where each occurs in `x`.
    groups: Vec<(usize, usize, Vec<usize>)>,
    remaining: usize,
    nodes: u64,
    budget: u64,
}

impl PlacementSearch<'_> {
    fn dfs(&mut self, prev_start: usize, prev_end: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        if self.remaining == 0 {
            return Ok(prev_end == self.x.len());
        }
        for g in 0..self.groups.len() {
            if self.groups[g].1 == 0 {
                continue;
            }
            let len = self.groups[g].0;
            let n_occ = self.groups[g].2.len();
            for k in 0..n_occ {
                let loc = self.groups[g].2[k];
                if loc <= prev_start || loc >= prev_end || prev_end - loc < self.lover {
                    continue;
                }
                self.groups[g].1 -= 1;
                self.remaining -= 1;
                let found = self.dfs(loc, loc + len)?;
                self.groups[g].1 += 1;
                self.remaining += 1;
                if found {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

fn search_placements(x: &QaryString, t: &StrippedTrace, p: TraceParams, budget: u64) -> Result<bool> {
    let xs = x.symbols();
    let mut counts: HashMap<&[u8], usize> = HashMap::new();
    for c in t.segments() {
        *counts.entry(c.symbols()).or_insert(0) += 1;
    }
    let mut groups = Vec::new();
    for (content, mult) in counts {
        let occ: Vec<usize> = (0..=xs.len().saturating_sub(content.len()))
            .filter(|&i| i + content.len() <= xs.len() && &xs[i..i + content.len()] == content)
            .collect();
        if occ.is_empty() {
            return Ok(false);
        }
        groups.push((content.len(), mult, occ));
    }
    groups.sort();
    // Starting state: a virtual predecessor that forces the first location to 0.
    let mut search = PlacementSearch { x: xs, lover: p.lover, remaining: t.len(), groups, nodes: 0, budget };
    for g in 0..search.groups.len() {
        if search.groups[g].2.first() != Some(&0) {
            continue;
        }
        let len = search.groups[g].0;
        search.groups[g].1 -= 1;
        search.remaining -= 1;
        let found = search.dfs(0, len)?;
        search.groups[g].1 += 1;
        search.remaining += 1;
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every distinct trace multiset of `x`, each in canonical (sorted) form.
pub fn enumerate_traces(x: &QaryString, p: TraceParams) -> Result<Vec<Trace>> {
    enumerate_traces_with_budget(x, p, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_traces_with_budget(x: &QaryString, p: TraceParams, budget: u64) -> Result<Vec<Trace>> {
    check_source(x, p)?;
    let mut found: BTreeSet<Vec<QaryString>> = BTreeSet::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut explored = 0u64;
    enumerate_rec(x, p, &mut stack, &mut found, &mut explored, budget)?;
    Ok(found.into_iter().map(Trace::from_contents).collect())
}

fn enumerate_rec(
    x: &QaryString,
    p: TraceParams,
    stack: &mut Vec<(usize, usize)>,
    found: &mut BTreeSet<Vec<QaryString>>,
    explored: &mut u64,
    budget: u64,
) -> Result<()> {
    *explored += 1;
    if *explored > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let n = x.len();
    let starts: Vec<usize> = match stack.last() {
        None => vec![0],
        Some(&(s, len)) => {
            let end = s + len;
            if end < p.lover {
                return Ok(());
            }
            let hi = (end - p.lover).min(end - 1).min(n.saturating_sub(p.lmin));
            (s + 1..=hi).collect()
        }
    };
    for start in starts {
        for len in p.lmin..=n - start {
            stack.push((start, len));
            if start + len == n {
                let mut t: Vec<QaryString> = stack.iter().map(|&(s, l)| x.substring(s, l)).collect();
                t.sort();
                found.insert(t);
            }
            enumerate_rec(x, p, stack, found, explored, budget)?;
            stack.pop();
        }
    }
    Ok(())
}

/// How segments are drawn for each strand of a multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Canonical,
    Random { seed: u64 },
}

/// Union of per-strand traces; placements record the strand index.
pub fn trace_of_multiset(s: &StrandMultiset, p: TraceParams, mode: TraceMode) -> Result<Trace> {
    let mut parts = Vec::with_capacity(s.k());
    match mode {
        TraceMode::Canonical => {
            for (idx, x) in s.strands().iter().enumerate() {
                parts.push(canonical_trace_on_strand(x, p, idx)?);
            }
        }
        TraceMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (idx, x) in s.strands().iter().enumerate() {
                parts.push(random_trace_with(x, p, &mut rng, usize::MAX, idx)?);
            }
        }
    }
    Ok(Trace::merge(parts))
}

/// On-disk trace representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub q: u32,
    pub lmin: usize,
    pub lover: usize,
    pub segments: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placements: Option<Vec<[usize; 2]>>,
}

impl TraceFile {
    pub fn from_trace(t: &Trace, q: u32, p: TraceParams) -> Self {
        let placements = t
            .has_placements()
            .then(|| t.segments().iter().map(|s| s.placement.map(|pl| [pl.strand, pl.location]).unwrap()).collect());
        TraceFile {
            q,
            lmin: p.lmin,
            lover: p.lover,
            segments: t.segments().iter().map(|s| s.content.to_string()).collect(),
            placements,
        }
    }

    pub fn into_trace(self) -> Result<(Trace, TraceParams, Alphabet)> {
        let alphabet = Alphabet::new(self.q).map_err(|e| Error::Parse(e.to_string()))?;
        let params = TraceParams::new(self.lmin, self.lover)?;
        if let Some(pl) = &self.placements {
            if pl.len() != self.segments.len() {
                return Err(Error::Parse("placements and segments differ in length".into()));
            }
        }
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, text) in self.segments.iter().enumerate() {
            let content = QaryString::parse(alphabet, text)?;
            let placement = self.placements.as_ref().map(|pl| Placement { strand: pl[i][0], location: pl[i][1] });
            segments.push(TraceSegment { content, placement });
        }
        Ok((Trace::new(segments), params, alphabet))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> QaryString {
        QaryString::parse(Alphabet::binary(), s).unwrap()
    }

    fn contents(v: &[&str]) -> Trace {
        Trace::from_contents(v.iter().map(|s| b(s)).collect())
    }

    fn canon(t: &Trace) -> Vec<String> {
        t.canonical().iter().map(ToString::to_string).collect()
    }

    const X: &str = "11101110101111";

    #[test]
    fn canonical_trace_of_running_example() {
        let t = canonical_trace(&b(X), TraceParams::new(4, 2).unwrap()).unwrap();
        let got: Vec<String> = t.segments().iter().map(|s| s.content.to_string()).collect();
        assert_eq!(got, ["1110", "1011", "1110", "1010", "1011", "1111"]);
    }

    #[test]
    fn canonical_trace_edge_cases() {
        let x = b("0110100110");
        let t = canonical_trace(&x, TraceParams::new(6, 2).unwrap()).unwrap();
        assert_eq!(canon(&t), ["011010", "100110"]);
        let t = canonical_trace(&b("010"), TraceParams::new(3, 1).unwrap()).unwrap();
        assert_eq!(canon(&t), ["010"]);
        assert!(canonical_trace(&b("010"), TraceParams::new(4, 1).unwrap()).is_err());
        assert!(canonical_trace(&b("0101"), TraceParams::new(2, 2).unwrap()).is_err());
    }

    #[test]
    fn valid_and_invalid_six_two_traces() {
        let x = b(X);
        let p = TraceParams::new(6, 2).unwrap();
        assert!(validate_trace(&x, &contents(&["1110111", "111010", "101111"]), p).unwrap());
        assert!(!validate_trace(&x, &contents(&["111011", "110101", "101111"]), p).unwrap());
        assert!(!validate_trace(&x, &contents(&["110111", "110101", "01111"]), p).unwrap());
    }

    #[test]
    fn short_overlap_trace_passes_looser_parameters() {
        // Relaxing the length and overlap requirements accepts it.
        let x = b(X);
        let loose = TraceParams::new(1, 1).unwrap();
        assert!(validate_trace(&x, &contents(&["111011", "110101", "101111"]), loose).unwrap());
    }

    #[test]
    fn random_traces_are_deterministic_and_valid() {
        let x = b(X);
        let p = TraceParams::new(6, 2).unwrap();
        assert_eq!(random_trace(&x, p, 7).unwrap(), random_trace(&x, p, 7).unwrap());
        for seed in 0..1000 {
            let t = random_trace(&x, p, seed).unwrap();
            assert!(validate_trace(&x, &t, p).unwrap());
            assert!(validate_trace(&x, &Trace::from_contents(t.canonical()), p).unwrap());
        }
    }

    #[test]
    fn full_length_segments_force_a_single_segment() {
        let x = b("0110101");
        let p = TraceParams::new(7, 0).unwrap();
        for seed in 0..20 {
            assert_eq!(canon(&random_trace(&x, p, seed).unwrap()), ["0110101"]);
        }
    }

    #[test]
    fn zero_overlap_canonical_trace_still_overlaps() {
        let x = b("011010011");
        let p = TraceParams::new(3, 0).unwrap();
        let t = canonical_trace(&x, p).unwrap();
        assert_eq!(canon(&t), ["011", "011", "100", "101"]);
        assert!(validate_trace(&x, &t, p).unwrap());
        assert!(canonical_trace(&x, TraceParams::new(1, 0).unwrap()).is_err());
    }

    #[test]
    fn enumeration_of_a_short_string() {
        let x = b("0110");
        let p = TraceParams::new(3, 2).unwrap();
        let all: Vec<Vec<String>> = enumerate_traces(&x, p).unwrap().iter().map(canon).collect();
        // Cut structures (0,4); (0,3),(1,3); (0,4),(1,3).
        assert_eq!(all, vec![vec!["011", "110"], vec!["0110"], vec!["0110", "110"]]);
        let single = enumerate_traces(&b("0110"), TraceParams::new(4, 1).unwrap()).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn enumerated_traces_validate_and_contain_canonical() {
        let x = b("0110100110");
        let p = TraceParams::new(4, 2).unwrap();
        let all = enumerate_traces(&x, p).unwrap();
        let canonical = canonical_trace(&x, p).unwrap().canonical();
        assert!(all.iter().any(|t| t.canonical() == canonical));
        for t in &all {
            assert!(validate_trace(&x, t, p).unwrap());
        }
    }

    #[test]
    fn enumeration_budget_is_reported() {
        let x = b("01101001100101101001");
        let err = enumerate_traces_with_budget(&x, TraceParams::new(2, 1).unwrap(), 100).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { budget: 100 });
    }

    #[test]
    fn multiset_traces() {
        let p = TraceParams::new(3, 2).unwrap();
        let s = StrandMultiset::new(vec![b("0011"), b("1100")]).unwrap();
        let t = trace_of_multiset(&s, p, TraceMode::Canonical).unwrap();
        assert_eq!(canon(&t), ["001", "011", "100", "110"]);
        let strands: Vec<usize> = t.segments().iter().map(|s| s.placement.unwrap().strand).collect();
        assert_eq!(strands, [0, 0, 1, 1]);
        let x = b("0110");
        let doubled = StrandMultiset::new(vec![x.clone(), x.clone()]).unwrap();
        let single = canonical_trace(&x, p).unwrap().canonical();
        let mut expect: Vec<QaryString> = single.iter().chain(single.iter()).cloned().collect();
        expect.sort();
        assert_eq!(trace_of_multiset(&doubled, p, TraceMode::Canonical).unwrap().canonical(), expect);
    }

    #[test]
    fn trace_file_round_trip() {
        let x = b(X);
        let p = TraceParams::new(4, 2).unwrap();
        let t = canonical_trace(&x, p).unwrap();
        let json = TraceFile::from_trace(&t, 2, p).to_json();
        let (back, bp, _) = TraceFile::from_json(&json).unwrap().into_trace().unwrap();
        assert_eq!(back, t);
        assert_eq!(bp, p);
    }
}
