//! The lexicographically least de Bruijn sequence, generated by
//! concatenating the periodic reductions of necklaces in lexicographic
//! order (the FKM algorithm), and the short suffix of it used as a
//! repeat-free filler.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::strings::{longest_zero_run, symbols_repeat_free, Alphabet, QaryString};

/// Upper limit on `q^s` for materialising a whole sequence.
pub const MAX_MATERIALISED: u64 = 1 << 28;

/// Streams a de Bruijn sequence symbol by symbol.
///
/// Internally the algorithm works on ranks `0..q`; `order[r]` is the symbol
/// emitted for rank `r`.
#[derive(Debug, Clone)]
pub struct DeBruijnStream {
    q: u8,
    s: usize,
    /// Current prenecklace, 1-indexed (`a[0]` is unused).
    a: Vec<u8>,
    order: Vec<u8>,
    pending: VecDeque<u8>,
    done: bool,
}

impl DeBruijnStream {
    /// Natural symbol order `0 < 1 < ... < q-1`.
    pub fn new(alphabet: Alphabet, s: usize) -> Result<Self> {
        let order: Vec<u8> = (0..alphabet.size()).map(|c| c as u8).collect();
        Self::with_order(order, s, None)
    }

    /// Order with 0 the minimum and 1 the maximum, remaining symbols in
    /// natural order between them.
    pub fn zero_min_one_max(alphabet: Alphabet, s: usize) -> Result<Self> {
        Self::with_order(zero_min_one_max_order(alphabet.size()), s, None)
    }

    fn with_order(order: Vec<u8>, s: usize, start: Option<(Vec<u8>, usize)>) -> Result<Self> {
        if s == 0 {
            return Err(Error::param("de Bruijn order must be at least 1"));
        }
        let q = order.len() as u8;
        let (a, period) = start.unwrap_or_else(|| (vec![0; s + 1], 1));
        let mut stream = DeBruijnStream { q, s, a, order, pending: VecDeque::new(), done: false };
        stream.emit_if_necklace(period);
        Ok(stream)
    }

    fn emit_if_necklace(&mut self, period: usize) {
        if self.s.is_multiple_of(period) {
            for j in 1..=period {
                self.pending.push_back(self.order[self.a[j] as usize]);
            }
        }
    }

    /// Advances to the next prenecklace; false when the enumeration ends.
    fn advance(&mut self) -> bool {
        let top = self.q - 1;
        let mut i = self.s;
        while i > 0 && self.a[i] == top {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        self.a[i] += 1;
        for j in i + 1..=self.s {
            self.a[j] = self.a[j - i];
        }
        self.emit_if_necklace(i);
        true
    }
}

impl Iterator for DeBruijnStream {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        while self.pending.is_empty() && !self.done {
            if !self.advance() {
                self.done = true;
            }
        }
        self.pending.pop_front()
    }
}

fn zero_min_one_max_order(q: u32) -> Vec<u8> {
    let mut order = vec![0u8];
    order.extend((2..q).map(|c| c as u8));
    if q >= 2 {
        order.push(1);
    }
    order
}

/// The whole lexicographically least de Bruijn sequence of order `s`.
pub fn debruijn_sequence(alphabet: Alphabet, s: usize) -> Result<QaryString> {
    let total = sequence_len(alphabet.size(), s)?;
    if total > MAX_MATERIALISED {
        return Err(Error::BudgetExceeded { budget: MAX_MATERIALISED });
    }
    let symbols: Vec<u8> = DeBruijnStream::new(alphabet, s)?.collect();
    debug_assert_eq!(symbols.len() as u64, total);
    Ok(QaryString::from_trusted(alphabet, symbols))
}

fn sequence_len(q: u32, s: usize) -> Result<u64> {
    u32::try_from(s)
        .ok()
        .and_then(|e| u64::from(q).checked_pow(e))
        .ok_or_else(|| Error::Unsupported(format!("q^s overflows for q={q}, s={s}")))
}

/// The last `n` symbols of the least de Bruijn sequence of order `s` under
/// the order with 0 minimal and 1 maximal.
///
/// The enumeration is started late, at the prenecklace `(0 1^m)^*` cut to
/// length `s`, with `m` lowered until enough symbols follow; only a ring
/// buffer of `n` symbols is kept. The result is checked to be `s`-repeat-free
/// and free of zero-runs of length `t-2`.
pub fn debruijn_tail(n: usize, s: usize, t: usize, alphabet: Alphabet) -> Result<QaryString> {
    if s == 0 || t < 3 {
        return Err(Error::param(format!("tail needs s >= 1 and t >= 3 (s={s}, t={t})")));
    }
    let q = alphabet.size();
    let total = u32::try_from(s).ok().and_then(|e| u128::from(q).checked_pow(e));
    match total {
        Some(total) if (n as u128) + (s as u128) <= total => {}
        Some(_) => {
            return Err(Error::param(format!("tail length {n} too close to the sequence length {q}^{s}")));
        }
        None => {}
    }
    let order = zero_min_one_max_order(q);
    let top = (q - 1) as u8;
    let mut buffer: VecDeque<u8> = VecDeque::with_capacity(n + s);
    for m in (0..s).rev() {
        let mut a = vec![0u8; s + 1];
        for (j, slot) in a.iter_mut().enumerate().skip(1) {
            *slot = if (j - 1) % (m + 1) == 0 { 0 } else { top };
        }
        buffer.clear();
        let stream = DeBruijnStream::with_order(order.clone(), s, Some((a, m + 1)))?;
        for c in stream {
            if buffer.len() == n {
                buffer.pop_front();
            }
            buffer.push_back(c);
        }
        if buffer.len() == n {
            break;
        }
    }
    if buffer.len() < n {
        return Err(Error::param(format!("de Bruijn sequence too short for a tail of length {n}")));
    }
    let v: Vec<u8> = buffer.into_iter().collect();
    if !symbols_repeat_free(&v, s) {
        return Err(Error::Postcondition(format!("de Bruijn tail is not {s}-repeat-free")));
    }
    if longest_zero_run(&v) >= t - 2 {
        return Err(Error::Postcondition(format!(
            "de Bruijn tail of length {n} contains a zero-run of length {}; choose a larger s or t",
            t - 2
        )));
    }
    Ok(QaryString::from_trusted(alphabet, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_words(q: u32, s: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for _ in 0..s {
            out = out
                .into_iter()
                .flat_map(|w: Vec<u8>| (0..q as u8).map(move |c| [w.clone(), vec![c]].concat()))
                .collect();
        }
        out
    }

    fn is_cyclic_debruijn(seq: &[u8], q: u32, s: usize) -> bool {
        let len = seq.len();
        if len as u64 != u64::from(q).pow(s as u32) {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        (0..len).all(|i| seen.insert((0..s).map(|k| seq[(i + k) % len]).collect::<Vec<u8>>()))
    }

    #[test]
    fn small_sequences() {
        let b = Alphabet::binary();
        assert_eq!(debruijn_sequence(b, 3).unwrap().to_string(), "00010111");
        assert_eq!(debruijn_sequence(b, 1).unwrap().to_string(), "01");
        let t = Alphabet::new(3).unwrap();
        let seq = debruijn_sequence(t, 2).unwrap();
        assert_eq!(seq.len(), 9);
        assert!(is_cyclic_debruijn(seq.symbols(), 3, 2));
    }

    #[test]
    fn least_among_all_binary_order_three() {
        let best = all_words(2, 8).into_iter().filter(|w| is_cyclic_debruijn(w, 2, 3)).min().unwrap();
        assert_eq!(debruijn_sequence(Alphabet::binary(), 3).unwrap().symbols(), &best[..]);
    }

    #[test]
    fn coverage_for_several_orders() {
        for (q, s) in [(2, 1), (2, 4), (2, 6), (3, 3), (4, 3), (5, 2)] {
            let seq = debruijn_sequence(Alphabet::new(q).unwrap(), s).unwrap();
            assert!(is_cyclic_debruijn(seq.symbols(), q, s), "q={q} s={s}");
        }
    }

    #[test]
    fn reordered_stream_is_a_de_bruijn_sequence() {
        let a = Alphabet::new(4).unwrap();
        let seq: Vec<u8> = DeBruijnStream::zero_min_one_max(a, 3).unwrap().collect();
        assert!(is_cyclic_debruijn(&seq, 4, 3));
        assert_eq!(&seq[seq.len() - 3..], &[1, 1, 1]);
    }

    #[test]
    fn tail_matches_suffix_of_full_sequence() {
        for (q, s, n) in [(2u32, 8usize, 100usize), (2, 10, 300), (3, 5, 60), (4, 4, 50)] {
            let a = Alphabet::new(q).unwrap();
            let full: Vec<u8> = DeBruijnStream::zero_min_one_max(a, s).unwrap().collect();
            let tail = debruijn_tail(n, s, s + 2, a).unwrap();
            assert_eq!(tail.symbols(), &full[full.len() - n..], "q={q} s={s} n={n}");
            assert!(symbols_repeat_free(tail.symbols(), s));
        }
    }

    #[test]
    fn tail_of_length_100() {
        let v = debruijn_tail(100, 8, 5, Alphabet::binary()).unwrap();
        assert_eq!(v.len(), 100);
        assert!(longest_zero_run(v.symbols()) < 3);
    }

    #[test]
    fn whole_sequence_is_rejected_as_a_tail() {
        assert!(debruijn_tail(8, 3, 5, Alphabet::binary()).is_err());
    }
}
