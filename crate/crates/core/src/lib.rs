//! Coding for unique reconstruction of strings from overlapping substrings.
//!
//! The crate is organised bottom-up:
//!
//! * [`strings`]: q-ary strings, windows, profiles, repeat-free and
//!   run-length predicates, and the plain-text string format.
//! * [`trace`]: the `(lmin, lover)` substring channel, trace validation and
//!   exhaustive enumeration for small inputs.
//! * [`runlength`]: encoders into zero-run-limited strings and the fixed
//!   length run-limited indexing function.
//! * [`debruijn`]: the lexicographically least de Bruijn sequence.
//! * [`repeat_free`]: the repeat-free encoder built from elimination and
//!   expansion stages.
//! * [`assembly`]: reconstruction of repeat-free strings and strand
//!   multisets from their traces.
//! * [`single_strand`]: the index-interleaved single-strand trace code.
//! * [`multi_strand`]: index-based and overlap-based multi-strand codes.
//! * [`bounds`]: code-size, rate and channel-size formulas.
//! * [`numeric`]: exact rationals and integer logarithms shared by the above.

pub mod assembly;
pub mod bounds;
pub mod debruijn;
pub mod error;
pub mod multi_strand;
pub mod numeric;
pub mod repeat_free;
pub mod runlength;
pub mod single_strand;
pub mod strings;
pub mod trace;

pub use error::{Error, Result};
pub use strings::{Alphabet, ProfileVector, QaryString, StrandMultiset};
pub use trace::{Trace, TraceParams, TraceSegment};

/// Library version recorded in CLI run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
