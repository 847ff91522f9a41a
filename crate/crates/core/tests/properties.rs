use proptest::prelude::*;

use strandcodes::assembly::{reconstruct_from_trace, reconstruct_multiset};
use strandcodes::multi_strand::{MultiStrandParams, Scheme};
use strandcodes::numeric::{format_rational, parse_rational, Rational};
use strandcodes::repeat_free::RepeatFreeParams;
use strandcodes::runlength::{decode_run_limited, encode_run_limited, RllParams};
use strandcodes::strings::{format_text, is_repeat_free, is_rll, parse_text};
use strandcodes::trace::{canonical_trace, random_trace, trace_of_multiset, validate_trace, TraceFile, TraceMode};
use strandcodes::{Alphabet, QaryString, StrandMultiset, TraceParams};

fn string(q: u32, len: std::ops::Range<usize>) -> impl Strategy<Value = QaryString> {
    prop::collection::vec(0..q as u8, len).prop_map(move |v| QaryString::new(Alphabet::new(q).unwrap(), v).unwrap())
}

/// A string together with trace parameters it admits.
fn string_and_params() -> impl Strategy<Value = (QaryString, TraceParams)> {
    (2u32..=4, 2usize..=8)
        .prop_flat_map(|(q, lmin)| (string(q, lmin..40), Just(lmin), 1..lmin))
        .prop_map(|(x, lmin, lover)| (x, TraceParams::new(lmin, lover).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_and_random_traces_are_valid((x, p) in string_and_params(), seed in any::<u64>()) {
        prop_assert!(validate_trace(&x, &canonical_trace(&x, p).unwrap(), p).unwrap());
        let t = random_trace(&x, p, seed).unwrap();
        prop_assert!(validate_trace(&x, &t, p).unwrap());
        prop_assert_eq!(t, random_trace(&x, p, seed).unwrap());
    }

    #[test]
    fn repeat_free_strings_reassemble((x, p) in string_and_params(), seed in any::<u64>()) {
        prop_assume!(is_repeat_free(&x, p.lover));
        for t in [canonical_trace(&x, p).unwrap(), random_trace(&x, p, seed).unwrap()] {
            prop_assert_eq!(reconstruct_from_trace(&t.stripped(), p).unwrap(), x.clone());
        }
    }

    #[test]
    fn jointly_repeat_free_strands_reassemble(
        strands in prop::collection::vec(string(4, 30..31), 2..5),
        seed in any::<u64>(),
    ) {
        let s = StrandMultiset::new(strands).unwrap();
        let p = TraceParams::new(8, 6).unwrap();
        prop_assume!(strandcodes::strings::is_multistrand_repeat_free(&s, 6));
        let t = trace_of_multiset(&s, p, TraceMode::Random { seed }).unwrap();
        let back = reconstruct_multiset(&t.stripped(), p, 30, s.k()).unwrap();
        prop_assert_eq!(back.sorted(), s.sorted());
    }

    #[test]
    fn run_limited_round_trip(q in 2u32..=5, s in 2usize..=5, seed in prop::collection::vec(any::<u8>(), 0..600)) {
        let p = RllParams::new(q, s).unwrap();
        let x = QaryString::new(Alphabet::new(q).unwrap(), seed.iter().map(|b| b % q as u8).collect()).unwrap();
        let y = encode_run_limited(&x, &p).unwrap();
        prop_assert!(is_rll(&y, s));
        prop_assert_eq!(y.len(), p.encoded_len(x.len()));
        prop_assert_eq!(decode_run_limited(&y, &p).unwrap(), x);
    }

    #[test]
    fn text_and_trace_files_round_trip((x, p) in string_and_params(), seed in any::<u64>()) {
        let q = x.alphabet();
        let (alphabet, parsed) = parse_text(&format_text(q, std::slice::from_ref(&x))).unwrap();
        prop_assert_eq!(alphabet, q);
        prop_assert_eq!(&parsed, &vec![x.clone()]);
        let t = random_trace(&x, p, seed).unwrap();
        let file = TraceFile::from_trace(&t, q.size(), p);
        let (back, back_p, back_q) = TraceFile::from_json(&file.to_json()).unwrap().into_trace().unwrap();
        prop_assert_eq!(back_p, p);
        prop_assert_eq!(back_q, q);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn rationals_survive_formatting(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = Rational::new(n, d);
        prop_assert_eq!(parse_rational(&format_rational(r)).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn repeat_free_codec_round_trip(bits in prop::collection::vec(0u8..2, 512)) {
        let params = RepeatFreeParams::new(512, 30, 6, 2).relaxed();
        let codec = params.codec().unwrap();
        let x = QaryString::binary(bits[..codec.message_len()].to_vec()).unwrap();
        let z = codec.encode(&x).unwrap();
        prop_assert!(is_repeat_free(&z, 30));
        prop_assert!(is_rll(&z, 6));
        prop_assert_eq!(codec.decode(&z).unwrap(), x);
    }

    #[test]
    fn multi_strand_round_trip(bits in prop::collection::vec(0u8..2, 400), overlap in any::<bool>()) {
        let p = if overlap {
            MultiStrandParams::new(Scheme::Overlap, 80, 4, 25, 2)
        } else {
            MultiStrandParams::new(Scheme::Index, 66, 4, 27, 2)
        };
        let codec = p.relaxed().codec().unwrap();
        let x = QaryString::binary(bits[..codec.message_len()].to_vec()).unwrap();
        let s = codec.encode(&x).unwrap();
        prop_assert!(s.all_distinct());
        prop_assert_eq!(codec.decode(&codec.channel(&s).unwrap()).unwrap(), x);
    }
}
