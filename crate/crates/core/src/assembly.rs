//! Reconstruction of repeat-free strings and strand multisets from traces.
//!
//! When the source is `lover`-repeat-free, every window of length `lover`
//! occurs once, so the windows seen in the trace segments form a graph in
//! which each window has at most one successor. Every `(lover+1)`-substring
//! of the source lies inside some segment (consecutive segments overlap by
//! at least `lover`), hence the graph is exactly the union of one simple
//! path per strand. Reading the paths back gives the strands; a window with
//! two different successors or a cycle proves the source was not
//! repeat-free.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::strings::{Alphabet, QaryString, StrandMultiset};
use crate::trace::{cut_structure_valid, StrippedTrace, TraceParams};

/// Recovers `x` from a trace of it, assuming `x` is `lover`-repeat-free.
pub fn reconstruct_from_trace(t: &StrippedTrace, p: TraceParams) -> Result<QaryString> {
    let mut strands = assemble_paths(t, p)?;
    if strands.len() != 1 {
        return Err(Error::Incomplete(format!("segments form {} separate chains, expected one", strands.len())));
    }
    let x = strands.pop().expect("one strand");
    if !placements_consistent(&x, t.segments(), p) {
        return Err(Error::Ambiguous("assembled string does not admit the trace".into()));
    }
    Ok(x)
}

/// Recovers a multiset of `k` strands of length `n` from the union of their
/// traces, assuming the strands are jointly `lover`-repeat-free.
pub fn reconstruct_multiset(t: &StrippedTrace, p: TraceParams, n: usize, k: usize) -> Result<StrandMultiset> {
    let strands = assemble_paths(t, p)?;
    if strands.len() != k {
        return Err(Error::Incomplete(format!("segments form {} chains, expected {k}", strands.len())));
    }
    if let Some(bad) = strands.iter().find(|s| s.len() != n) {
        return Err(Error::Incomplete(format!("a chain has length {}, expected {n}", bad.len())));
    }
    StrandMultiset::new(strands)
}

/// Assembles every maximal chain of windows; returned strands are sorted.
pub fn assemble_paths(t: &StrippedTrace, p: TraceParams) -> Result<Vec<QaryString>> {
    let segments = t.segments();
    let Some(first) = segments.first() else {
        return Err(Error::Incomplete("empty trace".into()));
    };
    let alphabet = first.alphabet();
    if segments.iter().any(|s| s.alphabet() != alphabet) {
        return Err(Error::param("trace segments use different alphabets"));
    }
    if let Some(short) = segments.iter().find(|s| s.len() < p.lmin.max(1)) {
        return Err(Error::param(format!("segment of length {} is shorter than lmin={}", short.len(), p.lmin)));
    }
    if p.lover == 0 {
        // No overlap is guaranteed, so nothing links segments together.
        return match segments {
            [only] => Ok(vec![only.clone()]),
            _ => Err(Error::Ambiguous("segments cannot be ordered without overlaps".into())),
        };
    }
    WindowGraph::build(segments, p.lover)?.paths(alphabet)
}

struct WindowGraph<'a> {
    w: usize,
    windows: Vec<&'a [u8]>,
    next: Vec<Option<usize>>,
    has_pred: Vec<bool>,
}

impl<'a> WindowGraph<'a> {
    fn build(segments: &'a [QaryString], w: usize) -> Result<Self> {
        let mut ids: HashMap<&'a [u8], usize> = HashMap::new();
        let mut g = WindowGraph { w, windows: Vec::new(), next: Vec::new(), has_pred: Vec::new() };
        for seg in segments {
            let sym = seg.symbols();
            let mut prev: Option<usize> = None;
            for start in 0..=sym.len() - w {
                let window = &sym[start..start + w];
                let id = *ids.entry(window).or_insert_with(|| {
                    g.windows.push(window);
                    g.next.push(None);
                    g.has_pred.push(false);
                    g.windows.len() - 1
                });
                if let Some(from) = prev {
                    g.link(from, id)?;
                }
                prev = Some(id);
            }
        }
        Ok(g)
    }

    fn link(&mut self, from: usize, to: usize) -> Result<()> {
        match self.next[from] {
            Some(existing) if existing == to => Ok(()),
            Some(_) => Err(Error::Ambiguous(format!(
                "window {} has two different successors; source is not {}-repeat-free",
                crate::strings::render(self.windows[from]),
                self.w
            ))),
            None => {
                if self.has_pred[to] {
                    return Err(Error::Ambiguous(format!(
                        "window {} has two different predecessors; source is not {}-repeat-free",
                        crate::strings::render(self.windows[to]),
                        self.w
                    )));
                }
                self.next[from] = Some(to);
                self.has_pred[to] = true;
                Ok(())
            }
        }
    }

    fn paths(&self, alphabet: Alphabet) -> Result<Vec<QaryString>> {
        let mut visited = vec![false; self.windows.len()];
        let mut out = Vec::new();
        for head in (0..self.windows.len()).filter(|&v| !self.has_pred[v]) {
            let mut symbols = self.windows[head].to_vec();
            visited[head] = true;
            let mut cur = head;
            while let Some(nxt) = self.next[cur] {
                visited[nxt] = true;
                symbols.push(self.windows[nxt][self.w - 1]);
                cur = nxt;
            }
            out.push(QaryString::new(alphabet, symbols)?);
        }
        if visited.iter().any(|&v| !v) {
            return Err(Error::Ambiguous("windows form a cycle; source is not repeat-free".into()));
        }
        out.sort();
        Ok(out)
    }
}

/// Locates every segment in `x` (unique for a repeat-free `x`) and checks
/// the positional trace conditions.
fn placements_consistent(x: &QaryString, segments: &[QaryString], p: TraceParams) -> bool {
    let w = p.lover.max(1);
    let xs = x.symbols();
    let mut first_at: HashMap<&[u8], usize> = HashMap::with_capacity(xs.len());
    for i in (0..=xs.len().saturating_sub(w)).rev() {
        first_at.insert(&xs[i..i + w], i);
    }
    let mut cuts = Vec::with_capacity(segments.len());
    for seg in segments {
        let s = seg.symbols();
        let Some(&loc) = first_at.get(&s[..w]) else {
            return false;
        };
        if loc + s.len() > xs.len() || &xs[loc..loc + s.len()] != s {
            return false;
        }
        cuts.push((loc, s.len()));
    }
    cuts.sort_unstable();
    cut_structure_valid(xs.len(), cuts, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strings::{is_multistrand_repeat_free, is_repeat_free};
    use crate::trace::{canonical_trace, enumerate_traces, random_trace, trace_of_multiset, validate_trace, TraceMode};

    fn bin(text: &str) -> QaryString {
        QaryString::parse(Alphabet::binary(), text).unwrap()
    }

    fn all_binary(n: usize) -> impl Iterator<Item = QaryString> {
        (0u32..1 << n)
            .map(move |v| QaryString::binary((0..n).map(|b| ((v >> (n - 1 - b)) & 1) as u8).collect()).unwrap())
    }

    #[test]
    fn single_segment_is_the_string() {
        let x = bin("0110");
        let t = StrippedTrace::new(vec![x.clone()]);
        assert_eq!(reconstruct_from_trace(&t, TraceParams::new(3, 2).unwrap()).unwrap(), x);
    }

    #[test]
    fn non_repeat_free_source_never_yields_a_wrong_answer() {
        let x = bin("11101110101111");
        let p = TraceParams::new(6, 2).unwrap();
        let t = StrippedTrace::new(vec![bin("1110111"), bin("111010"), bin("101111")]);
        if let Ok(y) = reconstruct_from_trace(&t, p) {
            assert!(validate_trace(&y, &crate::trace::Trace::from_contents(t.segments().to_vec()), p).unwrap());
        }
        assert!(!is_repeat_free(&x, 2));
    }

    #[test]
    fn every_trace_of_every_small_repeat_free_string() {
        let p = TraceParams::new(3, 2).unwrap();
        for n in 3..=8 {
            for x in all_binary(n).filter(|x| is_repeat_free(x, 2)) {
                for t in enumerate_traces(&x, p).unwrap() {
                    assert_eq!(reconstruct_from_trace(&t.stripped(), p).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn random_traces_of_long_strings() {
        let x = crate::debruijn::debruijn_sequence(Alphabet::binary(), 9).unwrap();
        let p = TraceParams::new(14, 9).unwrap();
        for seed in 0..20 {
            let t = random_trace(&x, p, seed).unwrap();
            assert_eq!(reconstruct_from_trace(&t.stripped(), p).unwrap(), x);
        }
        let canon = canonical_trace(&x, p).unwrap();
        assert_eq!(reconstruct_from_trace(&canon.stripped(), p).unwrap(), x);
    }

    #[test]
    fn multiset_round_trips() {
        let p = TraceParams::new(4, 3).unwrap();
        let mut checked = 0;
        let strands: Vec<QaryString> = all_binary(5).collect();
        for i in 0..strands.len() {
            for j in i..strands.len() {
                let s = StrandMultiset::new(vec![strands[i].clone(), strands[j].clone()]).unwrap();
                if !is_multistrand_repeat_free(&s, 3) {
                    continue;
                }
                for seed in 0..4 {
                    let t = trace_of_multiset(&s, p, TraceMode::Random { seed }).unwrap();
                    assert_eq!(reconstruct_multiset(&t.stripped(), p, 5, 2).unwrap(), s);
                }
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn repeated_windows_are_reported() {
        let s = StrandMultiset::new(vec![bin("0011"), bin("1100")]).unwrap();
        assert!(!is_multistrand_repeat_free(&s, 2));
        let t = trace_of_multiset(&s, TraceParams::new(3, 2).unwrap(), TraceMode::Canonical).unwrap();
        assert!(reconstruct_multiset(&t.stripped(), TraceParams::new(3, 2).unwrap(), 4, 2).is_err());
    }
}
