use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strandcodes"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("strandcodes-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(name: &str, text: &str) -> String {
    let path = scratch(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}="))).unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn pseudo_random_bits(len: usize, seed: u64) -> String {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            if state & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

#[test]
fn canonical_channel_output_matches_the_worked_example() {
    let input = write("example.txt", "q=2\n11101110101111\n");
    let o = run(&["channel", "--mode", "canonical", "--lmin", "4", "--lover", "2", "-i", &input]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut segments: Vec<&str> = json["segments"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    segments.sort();
    assert_eq!(segments, ["1010", "1011", "1011", "1110", "1110", "1111"]);
    assert_eq!(json["lmin"], 4);
    assert_eq!(json["lover"], 2);
}

#[test]
fn exit_codes_separate_parameter_and_decode_failures() {
    let input = write("short.txt", "q=2\n0110\n");
    // Unknown flag.
    assert_eq!(run(&["channel", "--bogus"]).status.code(), Some(2));
    // lover > lmin.
    assert_eq!(run(&["channel", "--lmin", "2", "--lover", "3", "-i", &input]).status.code(), Some(2));
    // Forbidden run length 1 cannot be encoded.
    assert_eq!(run(&["rll", "encode", "--s", "1", "-i", &input]).status.code(), Some(2));
    // A trace of a string with a repeated window does not reassemble.
    let x = write("repeats.txt", "q=2\n111011\n");
    let trace = run(&["channel", "--lmin", "4", "--lover", "2", "-i", &x]);
    let t = write("repeats.json", &stdout(&trace));
    assert_eq!(run(&["reconstruct", "-i", &t]).status.code(), Some(3));
}

#[test]
fn trace_check_accepts_and_rejects() {
    let x = write("check.txt", "q=2\n11101110101111\n");
    let good = write("good.json", r#"{"q":2,"lmin":6,"lover":2,"segments":["1110111","111010","101111"]}"#);
    let bad = write("bad.json", r#"{"q":2,"lmin":6,"lover":2,"segments":["111011","110101","101111"]}"#);
    let ok = run(&["channel", "--lmin", "6", "--lover", "2", "-i", &x, "--check", &good]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "valid=true\n");
    assert_eq!(run(&["channel", "--lmin", "6", "--lover", "2", "-i", &x, "--check", &bad]).status.code(), Some(3));
}

#[test]
fn repeat_free_round_trip_and_reassembly() {
    let params = ["--n", "4096", "--ell", "41", "--t", "9"];
    let info = run(&[&["rf", "params"][..], &params].concat());
    assert!(info.status.success());
    let len: usize = field(&stdout(&info), "message_len").parse().unwrap();
    let msg = format!("q=2\n{}\n", pseudo_random_bits(len, 1));
    let m = write("rf-msg.txt", &msg);
    let z = scratch("rf-code.txt").to_string_lossy().into_owned();
    assert!(run(&[&["rf", "encode"][..], &params, &["-i", &m, "-o", &z]].concat()).status.success());
    let back = run(&[&["rf", "decode"][..], &params, &["-i", &z]].concat());
    assert_eq!(stdout(&back), msg);

    let t = scratch("rf-trace.json").to_string_lossy().into_owned();
    let drawn =
        run(&["channel", "--mode", "random", "--seed", "5", "--lmin", "60", "--lover", "45", "-i", &z, "-o", &t]);
    assert!(drawn.status.success());
    let rebuilt = run(&["rf", "reconstruct", "-i", &t]);
    assert_eq!(stdout(&rebuilt), fs::read_to_string(&z).unwrap());
}

#[test]
fn repeat_free_rejects_a_short_window() {
    let o = run(&["rf", "params", "--n", "4096", "--ell", "39", "--t", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_code_round_trip_through_a_random_trace() {
    let params = ["--n", "40", "--a", "63/10", "--gamma", "13/17", "--f", "4", "--unsafe-params"];
    let m = write("tc-msg.txt", "q=2\n10110011\n");
    let z = scratch("tc-code.txt").to_string_lossy().into_owned();
    assert!(run(&[&["trace-code", "encode"][..], &params, &["-i", &m, "-o", &z]].concat()).status.success());
    let t = scratch("tc-trace.json").to_string_lossy().into_owned();
    assert!(run(&["channel", "--mode", "random", "--seed", "11", "--lmin", "34", "--lover", "26", "-i", &z, "-o", &t])
        .status
        .success());
    let back = run(&[&["trace-code", "decode"][..], &params, &["-i", &t]].concat());
    assert!(back.status.success(), "{}", String::from_utf8_lossy(&back.stderr));
    assert_eq!(stdout(&back), "q=2\n10110011\n");
}

#[test]
fn infeasible_trace_code_parameters_are_reported() {
    let o = run(&["trace-code", "params", "--n", "1048576", "--a", "3", "--gamma", "1/4", "--eps", "1/10", "--f", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert_eq!(field(&text, "lmin"), "60");
    assert_eq!(field(&text, "lover"), "15");
    assert!(text.contains("violation=lover - 2f - 6 > 0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lover - 2f - 6 > 0"));
}

#[test]
fn multi_strand_round_trip_for_both_schemes() {
    for (scheme, n, k, ell) in [("index", "66", "4", "27"), ("overlap", "80", "4", "25")] {
        let params = ["--scheme", scheme, "--n", n, "--k", k, "--ell", ell, "--unsafe-params"];
        let info = run(&[&["multi", "params"][..], &params].concat());
        let len: usize = field(&stdout(&info), "message_len").parse().unwrap();
        let msg = format!("q=2\n{}\n", pseudo_random_bits(len, 3));
        let m = write(&format!("{scheme}-msg.txt"), &msg);
        let enc = run(&[&["multi", "encode"][..], &params, &["-i", &m]].concat());
        assert!(enc.status.success());
        // Strand order carries no information: reverse it before decoding.
        let text = stdout(&enc);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        let s = write(&format!("{scheme}-strands.txt"), &(lines.join("\n") + "\n"));
        let dec = run(&[&["multi", "decode"][..], &params, &["-i", &s]].concat());
        assert_eq!(stdout(&dec), msg, "{scheme}");
    }
}

#[test]
fn bounds_commands_emit_expected_formats() {
    let csv = stdout(&run(&["bounds", "compare", "--n", "1024", "--k", "16", "--ell-range", "60:62"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ell,rate_index,rate_overlap,upper_bound");
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        for value in row.split(',').skip(1) {
            assert_eq!(value.split('.').nth(1).map(str::len), Some(6), "{row}");
        }
    }
    let rate = stdout(&run(&["bounds", "rate", "--a", "3", "--gamma", "1/4"]));
    assert_eq!(field(&rate, "rate_upper_bound"), "8/9");
    let th = stdout(&run(&["bounds", "threshold", "--n", "1024", "--k", "16", "--ell", "30"]));
    assert_eq!(field(&th, "zero_rate_threshold"), "14.000000");
    assert_eq!(run(&["bounds", "compare", "--n", "1024", "--k", "16", "--ell-range", "9:3"]).status.code(), Some(2));
}

#[test]
fn manifest_replays_to_identical_output() {
    let x = write("replay.txt", "q=2\n0110100110010110\n");
    let manifest = scratch("manifest.json").to_string_lossy().into_owned();
    let first = run(&[
        "channel",
        "--mode",
        "random",
        "--seed",
        "42",
        "--lmin",
        "5",
        "--lover",
        "2",
        "-i",
        &x,
        "--manifest",
        &manifest,
    ]);
    assert!(first.status.success());
    let recorded: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(recorded["subcommand"], "channel");
    assert_eq!(recorded["seed"], 42);
    assert!(recorded["generator"].as_str().unwrap().contains("ChaCha8"));
    let again = run(&["replay", &manifest]);
    assert!(again.status.success());
    assert_eq!(stdout(&again), stdout(&first));
}

#[test]
fn quick_selftest_passes() {
    let o = run(&["selftest", "--n-max", "6"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("pass")));
}
