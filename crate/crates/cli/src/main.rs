//! `strandcodes` command-line tool.
//!
//! Exit status: 0 on success, 2 for bad arguments or parameters, 3 when
//! data fails to decode or validate.

mod manifest;
mod selftest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use strandcodes::assembly::{reconstruct_from_trace, reconstruct_multiset};
use strandcodes::bounds;
use strandcodes::multi_strand::{MultiStrandParams, Scheme};
use strandcodes::numeric::{format_rational, parse_rational, Rational};
use strandcodes::repeat_free::RepeatFreeParams;
use strandcodes::runlength::{decode_run_limited, encode_run_limited, RllParams};
use strandcodes::single_strand::{default_f, derive_params, ConstructionParams};
use strandcodes::strings::{format_text, parse_text};
use strandcodes::trace::{
    canonical_trace, enumerate_traces_with_budget, random_trace, random_trace_bounded, trace_of_multiset,
    validate_trace_with_budget, Trace, TraceFile, TraceMode, TraceParams, DEFAULT_ENUMERATION_BUDGET,
    DEFAULT_VALIDATION_BUDGET,
};
use strandcodes::{Alphabet, Error, QaryString, StrandMultiset};

use manifest::RunManifest;

/// Overrides the search budget of trace enumeration and validation.
pub const BUDGET_ENV: &str = "STRANDCODES_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "strandcodes", version, about = "Codes for reconstructing strings from overlapping substrings")]
struct Cli {
    /// Write a JSON run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zero-run-limited block code.
    Rll {
        #[arg(value_enum)]
        action: Direction,
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Forbidden zero-run length.
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Repeat-free encoder.
    Rf {
        #[arg(value_enum)]
        action: RfAction,
        #[command(flatten)]
        params: RfArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Single-strand trace code with interleaved indices.
    TraceCode {
        #[arg(value_enum)]
        action: TraceCodeAction,
        #[command(flatten)]
        params: TraceCodeArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Multi-strand codes decoded from the strand profile.
    Multi {
        #[arg(value_enum)]
        action: MultiAction,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        unsafe_params: bool,
        #[command(flatten)]
        io: Io,
    },
    /// Draws traces of the input strings, or checks a given trace.
    Channel {
        #[arg(long, value_enum, default_value_t = ChannelMode::Canonical)]
        mode: ChannelMode,
        #[arg(long)]
        lmin: usize,
        #[arg(long)]
        lover: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Longest segment drawn in random mode.
        #[arg(long)]
        max_len: Option<usize>,
        /// Trace file to check against the input string instead of drawing one.
        #[arg(long)]
        check: Option<PathBuf>,
        #[command(flatten)]
        io: Io,
    },
    /// Reassembles repeat-free strings from a trace file.
    Reconstruct {
        /// Number of strands; 1 reconstructs a single string.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Strand length, required when k > 1.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        io: Io,
    },
    /// Code-size bounds, rates and thresholds.
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
    /// Runs the small-instance oracle suites.
    Selftest {
        /// Enumerate every trace of every small repeat-free string.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Re-runs the command recorded in a manifest.
    Replay { path: PathBuf },
}

#[derive(Subcommand, Debug)]
enum BoundsCommand {
    /// Upper bound on the size of a trace code.
    Size {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        lmin: usize,
        #[arg(long)]
        lover: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
    /// Rate upper bound for `lmin = a log n`, `lover = gamma lmin`.
    Rate {
        #[arg(long, value_parser = parse_rational_arg)]
        a: Rational,
        #[arg(long, value_parser = parse_rational_arg)]
        gamma: Rational,
    },
    /// Window-length thresholds for multi-strand codes.
    Threshold {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Also classify this window length.
        #[arg(long)]
        ell: Option<usize>,
    },
    /// CSV comparing the index and overlap multi-strand rates.
    Compare {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Inclusive range `lo:hi`.
        #[arg(long, value_parser = parse_range)]
        ell_range: (usize, usize),
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
}

#[derive(Args, Debug, Clone)]
struct Io {
    /// Input file; standard input when absent.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RfArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long)]
    unsafe_params: bool,
}

#[derive(Args, Debug, Clone)]
struct TraceCodeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_rational_arg)]
    a: Rational,
    #[arg(long, value_parser = parse_rational_arg)]
    gamma: Rational,
    #[arg(long, value_parser = parse_rational_arg, default_value = "1/10")]
    eps: Rational,
    /// Defaults to ceil(sqrt(log n)).
    #[arg(long)]
    f: Option<usize>,
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Fix the index length instead of deriving it (unsafe mode only).
    #[arg(long)]
    index_len: Option<usize>,
    #[arg(long)]
    unsafe_params: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Direction {
    Encode,
    Decode,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MultiAction {
    Params,
    Encode,
    Decode,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RfAction {
    Params,
    Encode,
    Decode,
    Reconstruct,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TraceCodeAction {
    Params,
    Encode,
    Decode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ChannelMode {
    Canonical,
    Random,
    Enumerate,
}

fn parse_rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad lower end {lo:?}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad upper end {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// What a command produced, for the manifest.
#[derive(Default)]
struct Outcome {
    params: Vec<(String, String)>,
    report: Vec<String>,
    seed: Option<u64>,
}

impl Outcome {
    fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }
}

type CmdResult = Result<Outcome, Error>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    run(cli, argv)
}

fn run(cli: Cli, argv: Vec<String>) -> ExitCode {
    if let Command::Replay { path } = &cli.command {
        return match RunManifest::load(path) {
            Ok(m) => match Cli::try_parse_from(m.argv.clone()) {
                Ok(replayed) if !matches!(replayed.command, Command::Replay { .. }) => run(replayed, m.argv),
                Ok(_) => fail(Error::param("a manifest cannot replay another replay")),
                Err(e) => fail(Error::Parse(e.to_string())),
            },
            Err(e) => fail(e),
        };
    }
    let (name, io) = describe(&cli.command);
    match dispatch(cli.command) {
        Ok(outcome) => {
            if let Some(path) = cli.manifest {
                let m = RunManifest::new(name, argv, &io, outcome.params, outcome.seed, outcome.report);
                if let Err(e) = m.save(&path) {
                    return fail(e);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_parameter_error() { 2 } else { 3 })
}

fn describe(cmd: &Command) -> (&'static str, Option<Io>) {
    match cmd {
        Command::Rll { io, .. } => ("rll", Some(io.clone())),
        Command::Rf { io, .. } => ("rf", Some(io.clone())),
        Command::TraceCode { io, .. } => ("trace-code", Some(io.clone())),
        Command::Multi { io, .. } => ("multi", Some(io.clone())),
        Command::Channel { io, .. } => ("channel", Some(io.clone())),
        Command::Reconstruct { io, .. } => ("reconstruct", Some(io.clone())),
        Command::Bounds { .. } => ("bounds", None),
        Command::Selftest { .. } => ("selftest", None),
        Command::Replay { .. } => ("replay", None),
    }
}

fn budget(default: u64) -> Result<u64, Error> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::param(format!("{BUDGET_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(default),
    }
}

fn read_input(io: &Io) -> Result<String, Error> {
    match &io.input {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| Error::param(format!("cannot read {}: {e}", path.display())))
        }
        None => std::io::read_to_string(std::io::stdin()).map_err(|e| Error::param(format!("cannot read stdin: {e}"))),
    }
}

fn write_output(io: &Io, text: &str) -> Result<(), Error> {
    match &io.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::param(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_strings(io: &Io, q: Option<u32>) -> Result<(Alphabet, Vec<QaryString>), Error> {
    let (alphabet, strings) = parse_text(&read_input(io)?)?;
    if let Some(q) = q {
        if alphabet.size() != q {
            return Err(Error::param(format!("input is over q={}, expected q={q}", alphabet.size())));
        }
    }
    Ok((alphabet, strings))
}

fn read_one(io: &Io, q: Option<u32>) -> Result<QaryString, Error> {
    let (_, mut strings) = read_strings(io, q)?;
    if strings.len() != 1 {
        return Err(Error::Parse(format!("expected exactly one string, found {}", strings.len())));
    }
    Ok(strings.pop().expect("one string"))
}

fn read_trace(io: &Io) -> Result<(Trace, TraceParams, Alphabet), Error> {
    TraceFile::from_json(&read_input(io)?)?.into_trace()
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Rll { action, q, s, io } => cmd_rll(action, q, s, &io),
        Command::Rf { action, params, io } => cmd_rf(action, &params, &io),
        Command::TraceCode { action, params, io } => cmd_trace_code(action, &params, &io),
        Command::Multi { action, scheme, n, k, ell, q, unsafe_params, io } => {
            let mut p = MultiStrandParams::new(scheme, n, k, ell, q);
            if unsafe_params {
                p = p.relaxed();
            }
            cmd_multi(action, p, &io)
        }
        Command::Channel { mode, lmin, lover, seed, max_len, check, io } => {
            cmd_channel(mode, TraceParams::new(lmin, lover)?, seed, max_len, check, &io)
        }
        Command::Reconstruct { k, n, io } => cmd_reconstruct(k, n, &io),
        Command::Bounds { which } => cmd_bounds(which),
        Command::Selftest { exhaustive, n_max } => selftest::run(exhaustive, n_max),
        Command::Replay { .. } => unreachable!("handled before dispatch"),
    }
}

fn cmd_rll(action: Direction, q: u32, s: usize, io: &Io) -> CmdResult {
    let p = RllParams::new(q, s)?;
    let x = read_one(io, Some(q))?;
    let y = match action {
        Direction::Encode => encode_run_limited(&x, &p)?,
        Direction::Decode => decode_run_limited(&x, &p)?,
    };
    write_output(io, &format_text(y.alphabet(), &[y]))?;
    let mut out = Outcome::default();
    out.param("q", q);
    out.param("s", s);
    out.param("block_len", p.block_len());
    Ok(out)
}

fn rf_params(a: &RfArgs) -> Result<RepeatFreeParams, Error> {
    let n = a.n.ok_or_else(|| Error::param("--n is required"))?;
    let mut p = match (a.ell, a.t) {
        (Some(ell), Some(t)) => RepeatFreeParams::new(n, ell, t, a.q),
        (None, None) => RepeatFreeParams::preset(n, a.q),
        (Some(ell), None) => RepeatFreeParams::new(n, ell, RepeatFreeParams::max_t(n, ell, a.q), a.q),
        (None, Some(_)) => return Err(Error::param("--t needs --ell")),
    };
    if a.unsafe_params {
        p = p.relaxed();
    }
    Ok(p)
}

fn cmd_rf(action: RfAction, args: &RfArgs, io: &Io) -> CmdResult {
    let mut out = Outcome::default();
    if let RfAction::Reconstruct = action {
        let (trace, tp, alphabet) = read_trace(io)?;
        let x = reconstruct_from_trace(&trace.stripped(), tp)?;
        write_output(io, &format_text(alphabet, &[x]))?;
        out.param("lmin", tp.lmin);
        out.param("lover", tp.lover);
        return Ok(out);
    }
    let p = rf_params(args)?;
    let codec = p.codec()?;
    let fields =
        [("n", p.n), ("ell", p.ell), ("t", p.t), ("message_len", codec.message_len()), ("window", codec.window())];
    for (k, v) in fields {
        out.param(k, v);
    }
    out.param("q", p.q);
    if let RfAction::Params = action {
        let mut text: String = fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        text.push_str(&format!("q={}\nredundancy={}\n", p.q, codec.redundancy()));
        write_output(io, &text)?;
        return Ok(out);
    }
    let x = read_one(io, Some(p.q))?;
    let y = match action {
        RfAction::Encode => codec.encode(&x)?,
        RfAction::Decode => codec.decode(&x)?,
        RfAction::Params | RfAction::Reconstruct => unreachable!(),
    };
    write_output(io, &format_text(y.alphabet(), &[y]))?;
    out.param("unsafe_params", p.unsafe_params);
    Ok(out)
}

fn construction_params(a: &TraceCodeArgs) -> Result<ConstructionParams, Error> {
    let f = a.f.unwrap_or_else(|| default_f(a.n, a.q));
    let mut p = derive_params(a.n, a.q, a.a, a.gamma, a.eps, f)?;
    if a.unsafe_params {
        p = p.relaxed();
    }
    if let Some(i) = a.index_len {
        if !a.unsafe_params {
            return Err(Error::param("--index-len requires --unsafe-params"));
        }
        p = p.with_index_len(i)?;
    }
    Ok(p)
}

fn cmd_trace_code(action: TraceCodeAction, args: &TraceCodeArgs, io: &Io) -> CmdResult {
    let p = construction_params(args)?;
    let mut out = Outcome::default();
    for line in p.report().lines() {
        if let Some((k, v)) = line.split_once('=') {
            if k == "violation" {
                out.report.push(v.to_string());
            } else {
                out.param(k, v);
            }
        }
    }
    if let TraceCodeAction::Params = action {
        let mut text = p.report();
        let code = p.codec();
        if let Ok(code) = &code {
            text.push_str(&format!("message_len={}\nrate={:.6}\n", code.message_len(), code.rate()));
        }
        text.push_str(&format!("rate_leading_terms={:.6}\n", p.asymptotic_rate()));
        write_output(io, &text)?;
        return code.map(|_| out);
    }
    let code = p.codec()?;
    let alphabet = Alphabet::new(p.q)?;
    match action {
        TraceCodeAction::Encode => {
            let x = read_one(io, Some(p.q))?;
            let z = code.encode(&x)?;
            write_output(io, &format_text(alphabet, &[z]))?;
        }
        TraceCodeAction::Decode => {
            let (trace, tp, trace_alphabet) = read_trace(io)?;
            if trace_alphabet != alphabet || tp.lmin != p.lmin || tp.lover != p.lover {
                return Err(Error::param(format!(
                    "trace has q={}, lmin={}, lover={}; the code expects q={}, lmin={}, lover={}",
                    trace_alphabet.size(),
                    tp.lmin,
                    tp.lover,
                    p.q,
                    p.lmin,
                    p.lover
                )));
            }
            let x = code.decode_trace(&trace.stripped())?;
            write_output(io, &format_text(alphabet, &[x]))?;
        }
        TraceCodeAction::Params => unreachable!(),
    }
    Ok(out)
}

fn cmd_multi(action: MultiAction, p: MultiStrandParams, io: &Io) -> CmdResult {
    let codec = p.codec()?;
    let alphabet = Alphabet::new(p.q)?;
    match action {
        MultiAction::Params => {
            let text = format!(
                "scheme={:?}\nn={}\nk={}\nell={}\nq={}\nmessage_len={}\nrate={:.6}\n",
                p.scheme,
                p.n,
                p.k,
                p.ell,
                p.q,
                codec.message_len(),
                codec.achieved_rate()
            )
            .to_lowercase();
            write_output(io, &text)?;
        }
        MultiAction::Encode => {
            let x = read_one(io, Some(p.q))?;
            let s = codec.encode(&x)?;
            write_output(io, &format_text(alphabet, s.strands()))?;
        }
        MultiAction::Decode => {
            let (_, strands) = read_strings(io, Some(p.q))?;
            let s = StrandMultiset::new(strands)?;
            let x = codec.decode(&codec.channel(&s)?)?;
            write_output(io, &format_text(alphabet, &[x]))?;
        }
    }
    let mut out = Outcome::default();
    out.param("scheme", format!("{:?}", p.scheme).to_lowercase());
    for (k, v) in [("n", p.n), ("k", p.k), ("ell", p.ell), ("message_len", codec.message_len())] {
        out.param(k, v);
    }
    out.param("q", p.q);
    out.param("unsafe_params", p.unsafe_params);
    Ok(out)
}

fn cmd_channel(
    mode: ChannelMode,
    tp: TraceParams,
    seed: u64,
    max_len: Option<usize>,
    check: Option<PathBuf>,
    io: &Io,
) -> CmdResult {
    let (alphabet, strings) = read_strings(io, None)?;
    let mut out = Outcome::default();
    out.param("lmin", tp.lmin);
    out.param("lover", tp.lover);
    if let Some(path) = check {
        let x = match strings.as_slice() {
            [x] => x,
            _ => return Err(Error::param("--check takes exactly one input string")),
        };
        let text =
            fs::read_to_string(&path).map_err(|e| Error::param(format!("cannot read {}: {e}", path.display())))?;
        let (trace, file_params, _) = TraceFile::from_json(&text)?.into_trace()?;
        if file_params != tp {
            return Err(Error::param("trace file parameters differ from --lmin/--lover"));
        }
        let valid = validate_trace_with_budget(x, &trace, tp, budget(DEFAULT_VALIDATION_BUDGET)?)?;
        write_output(io, &format!("valid={valid}\n"))?;
        return if valid { Ok(out) } else { Err(Error::decode("the trace is not a valid trace of the input")) };
    }
    out.param("mode", format!("{mode:?}").to_lowercase());
    let traces: Vec<Trace> = match (mode, strings.as_slice()) {
        (_, []) => return Err(Error::param("no input strings")),
        (ChannelMode::Canonical, [x]) => vec![canonical_trace(x, tp)?],
        (ChannelMode::Random, [x]) => {
            out.seed = Some(seed);
            vec![match max_len {
                Some(m) => random_trace_bounded(x, tp, seed, m)?,
                None => random_trace(x, tp, seed)?,
            }]
        }
        (ChannelMode::Enumerate, [x]) => enumerate_traces_with_budget(x, tp, budget(DEFAULT_ENUMERATION_BUDGET)?)?,
        (ChannelMode::Enumerate, _) => return Err(Error::param("enumeration takes a single string")),
        (ChannelMode::Canonical, many) => {
            vec![trace_of_multiset(&StrandMultiset::new(many.to_vec())?, tp, TraceMode::Canonical)?]
        }
        (ChannelMode::Random, many) => {
            out.seed = Some(seed);
            vec![trace_of_multiset(&StrandMultiset::new(many.to_vec())?, tp, TraceMode::Random { seed })?]
        }
    };
    let text = if mode == ChannelMode::Enumerate {
        let files: Vec<TraceFile> = traces.iter().map(|t| TraceFile::from_trace(t, alphabet.size(), tp)).collect();
        serde_json::to_string_pretty(&files).expect("trace files serialize") + "\n"
    } else {
        TraceFile::from_trace(&traces[0], alphabet.size(), tp).to_json() + "\n"
    };
    write_output(io, &text)?;
    out.param("traces", traces.len());
    Ok(out)
}

fn cmd_reconstruct(k: usize, n: Option<usize>, io: &Io) -> CmdResult {
    let (trace, tp, alphabet) = read_trace(io)?;
    let stripped = trace.stripped();
    let strands = if k == 1 {
        vec![reconstruct_from_trace(&stripped, tp)?]
    } else {
        let n = n.ok_or_else(|| Error::param("--n is required when k > 1"))?;
        reconstruct_multiset(&stripped, tp, n, k)?.sorted()
    };
    write_output(io, &format_text(alphabet, &strands))?;
    let mut out = Outcome::default();
    out.param("k", k);
    out.param("lmin", tp.lmin);
    out.param("lover", tp.lover);
    Ok(out)
}

fn cmd_bounds(which: BoundsCommand) -> CmdResult {
    let mut out = Outcome::default();
    let text = match which {
        BoundsCommand::Size { n, k, lmin, lover, q } => {
            let size = bounds::code_size_upper_bound(n, k, lmin, lover, q)?;
            let log = bounds::log_code_size_upper_bound(n, k, lmin, lover, q)?;
            let segments = bounds::canonical_segment_count(n, lmin, lover)?;
            for (key, v) in [("n", n), ("k", k), ("lmin", lmin), ("lover", lover)] {
                out.param(key, v);
            }
            format!(
                "log_base={q}\ncanonical_segments={segments}\nsize_upper_bound={size}\nlog_size_upper_bound={log:.6}\n"
            )
        }
        BoundsCommand::Rate { a, gamma } => {
            let rate = bounds::rate_upper_bound_single(a, gamma)?;
            out.param("a", format_rational(a));
            out.param("gamma", format_rational(gamma));
            format!(
                "rate_upper_bound={}\nrate_upper_bound_decimal={:.6}\n",
                format_rational(rate),
                strandcodes::numeric::to_f64(rate)
            )
        }
        BoundsCommand::Threshold { n, k, q, ell } => {
            let th = bounds::zero_rate_threshold(n, k, q)?;
            out.param("n", n);
            out.param("k", k);
            let mut s =
                format!("log_base={q}\nzero_rate_threshold={:.6}\nrate_one_ell={:.6}\n", th.threshold, th.rate_one_ell);
            if let Some(ell) = ell {
                s.push_str(&format!("ell={ell}\nregion={:?}\n", th.region(ell)));
            }
            s
        }
        BoundsCommand::Compare { n, k, ell_range: (lo, hi), q } => {
            let rows = bounds::rate_comparison_table(n, k, lo..=hi, q)?;
            out.param("n", n);
            out.param("k", k);
            out.param("ell_range", format!("{lo}:{hi}"));
            bounds::rate_table_csv(&rows)
        }
    };
    print!("{text}");
    Ok(out)
}
