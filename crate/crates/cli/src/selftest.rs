//! Small-instance checks runnable from the command line.

use strandcodes::assembly::reconstruct_from_trace;
use strandcodes::repeat_free::RepeatFreeParams;
use strandcodes::runlength::{decode_run_limited, encode_run_limited, RllParams};
use strandcodes::strings::{is_repeat_free, is_rll};
use strandcodes::trace::{
    canonical_trace, enumerate_traces_with_budget, random_trace, validate_trace, DEFAULT_ENUMERATION_BUDGET,
};
use strandcodes::{Alphabet, Error, QaryString, TraceParams};

use crate::{budget, CmdResult, Outcome};

struct Suite {
    name: &'static str,
    cases: u64,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, cases: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        }
    }
}

fn all_strings(alphabet: Alphabet, n: usize) -> impl Iterator<Item = QaryString> {
    let q = alphabet.size() as u64;
    let count = q.pow(n as u32);
    (0..count).map(move |mut v| {
        let mut symbols = vec![0u8; n];
        for s in symbols.iter_mut().rev() {
            *s = (v % q) as u8;
            v /= q;
        }
        QaryString::new(alphabet, symbols).expect("symbols in range")
    })
}

fn trace_params_up_to(n: usize) -> impl Iterator<Item = TraceParams> {
    (1..=n.min(4)).flat_map(|lmin| (0..lmin).map(move |lover| TraceParams::new(lmin, lover).expect("lover < lmin")))
}

fn rll_suite(n_max: usize) -> Suite {
    let mut suite = Suite::new("run-limited round trip");
    for (q, s) in [(2, 3), (2, 4), (3, 2), (4, 2)] {
        let p = RllParams::new(q, s).expect("valid run limit");
        let alphabet = Alphabet::new(q).expect("valid q");
        for n in 0..=n_max.min(if q == 2 { 10 } else { 5 }) {
            for x in all_strings(alphabet, n) {
                let ok = encode_run_limited(&x, &p)
                    .and_then(|y| {
                        if is_rll(&y, s) {
                            decode_run_limited(&y, &p)
                        } else {
                            Err(Error::decode("run too long"))
                        }
                    })
                    .is_ok_and(|back| back == x);
                suite.check(ok, || format!("q={q} s={s} x={x}"));
            }
        }
    }
    suite
}

fn repeat_free_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("repeat-free round trip");
    let codec = RepeatFreeParams::new(256, 24, 5, 2).relaxed().codec().expect("small repeat-free parameters");
    let alphabet = Alphabet::binary();
    for i in 0..32u64 {
        let symbols = (0..codec.message_len())
            .map(|j| ((seed ^ i).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(j as u32 % 64) & 1) as u8)
            .collect();
        let x = QaryString::new(alphabet, symbols).expect("binary");
        let ok = codec
            .encode(&x)
            .and_then(|z| if is_repeat_free(&z, 24) { codec.decode(&z) } else { Err(Error::decode("window repeats")) })
            .is_ok_and(|back| back == x);
        suite.check(ok, || format!("message {i}"));
    }
    suite
}

/// Every trace of every short string validates, and the canonical trace is
/// among the enumerated ones.
fn channel_suite(n_max: usize, limit: u64) -> Result<Suite, Error> {
    let mut suite = Suite::new("trace enumeration");
    for n in 1..=n_max {
        for p in trace_params_up_to(n) {
            for x in all_strings(Alphabet::binary(), n) {
                let traces = enumerate_traces_with_budget(&x, p, limit)?;
                if p.lmin > p.lover.max(1) || n == p.lmin {
                    let canonical = canonical_trace(&x, p)?.canonical();
                    suite.check(traces.iter().any(|t| t.canonical() == canonical), || {
                        format!("{x} {p:?}: canonical trace missing")
                    });
                }
                for t in &traces {
                    suite.check(validate_trace(&x, t, p)?, || format!("{x} {p:?}: enumerated trace rejected"));
                }
            }
        }
    }
    Ok(suite)
}

/// Every trace of every `lover`-repeat-free string reassembles to it.
fn reconstruction_suite(n_max: usize, exhaustive: bool, limit: u64) -> Result<Suite, Error> {
    let mut suite = Suite::new("repeat-free reconstruction");
    for n in 2..=n_max {
        for p in trace_params_up_to(n).filter(|p| p.lover >= 1) {
            for x in all_strings(Alphabet::binary(), n).filter(|x| is_repeat_free(x, p.lover)) {
                let traces = if exhaustive {
                    enumerate_traces_with_budget(&x, p, limit)?
                } else {
                    vec![canonical_trace(&x, p)?, random_trace(&x, p, n as u64)?]
                };
                for t in traces {
                    let ok = reconstruct_from_trace(&t.stripped(), p).is_ok_and(|y| y == x);
                    suite.check(ok, || format!("{x} {p:?}"));
                }
            }
        }
    }
    Ok(suite)
}

pub fn run(exhaustive: bool, n_max: usize) -> CmdResult {
    if n_max > 14 {
        return Err(Error::param("--n-max above 14 is too large for exhaustive suites"));
    }
    let limit = budget(DEFAULT_ENUMERATION_BUDGET)?;
    let mut suites = vec![rll_suite(n_max), repeat_free_suite(n_max as u64)];
    if exhaustive {
        suites.push(channel_suite(n_max, limit)?);
    }
    suites.push(reconstruction_suite(n_max, exhaustive, limit)?);

    let mut out = Outcome::default();
    out.param("exhaustive", exhaustive);
    out.param("n_max", n_max);
    let mut failed = 0;
    for s in &suites {
        let status = if s.failures.is_empty() { "pass" } else { "FAIL" };
        println!("{status} {} ({} cases)", s.name, s.cases);
        for f in &s.failures {
            println!("    {f}");
        }
        out.param(s.name, format!("{status} {}", s.cases));
        failed += usize::from(!s.failures.is_empty());
    }
    if failed > 0 {
        return Err(Error::decode(format!("{failed} self-test suite(s) failed")));
    }
    Ok(out)
}
