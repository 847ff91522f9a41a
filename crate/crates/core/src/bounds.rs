//! Code-size and rate bounds, channel sizes, and the rate formulas of the
//! two multi-strand constructions.
//!
//! Logarithms are base `q` throughout. Asymptotic statements are evaluated
//! through their leading terms only; functions returning such values say
//! so, and the dropped `o(.)`/`O(.)` terms are never folded in.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::Rational;

/// Largest number of factors multiplied out in an exact binomial.
pub const EXACT_BINOMIAL_BUDGET: u64 = 1 << 20;

/// `C(a, b)` computed exactly with `min(b, a - b)` multiplications.
pub fn binomial(a: &BigUint, b: &BigUint) -> Result<BigUint> {
    if b > a {
        return Ok(BigUint::zero());
    }
    let other = a - b;
    let small = if b < &other { b.clone() } else { other };
    let steps = small.to_u64().filter(|&s| s <= EXACT_BINOMIAL_BUDGET);
    let steps = steps.ok_or(Error::BudgetExceeded { budget: EXACT_BINOMIAL_BUDGET })?;
    let mut acc = BigUint::one();
    let base = a - &small;
    for i in 1..=steps {
        acc = acc * (&base + BigUint::from(i)) / BigUint::from(i);
    }
    Ok(acc)
}

/// Natural log of `C(u + v, u)` for real `u, v >= 0`, exact summation when
/// the smaller argument is small, otherwise Stirling's series with the
/// `1/(12x)` corrections (absolute error below `1e-6` nats).
pub fn ln_binomial_sum(u: f64, v: f64) -> f64 {
    let (small, large) = if u < v { (u, v) } else { (v, u) };
    if small == 0.0 {
        return 0.0;
    }
    if small <= 4096.0 && small.fract() == 0.0 {
        return (1..=small as u64).map(|i| (large / i as f64).ln_1p()).sum();
    }
    let total = u + v;
    u * (v / u).ln_1p() + v * (u / v).ln_1p() - 0.5 * (2.0 * std::f64::consts::PI * u * v / total).ln()
        + 1.0 / (12.0 * total)
        - 1.0 / (12.0 * u)
        - 1.0 / (12.0 * v)
}

fn qpow_big(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

fn log_q(q: u32, x: f64) -> f64 {
    x.ln() / f64::from(q).ln()
}

/// Segments per strand in the canonical trace: `ceil((n - lover)/(lmin - lover))`.
pub fn canonical_segment_count(n: usize, lmin: usize, lover: usize) -> Result<usize> {
    if lmin <= lover {
        return Err(Error::param(format!("lmin={lmin} must exceed lover={lover}")));
    }
    if lmin > n {
        return Err(Error::param(format!("lmin={lmin} exceeds n={n}")));
    }
    Ok((n - lover).div_ceil(lmin - lover))
}

/// Upper bound on the size of any multi-strand `(lmin, lover)`-trace code in
/// `X_{n,k}`: `C(k ceil((n - lover)/(lmin - lover)) + q^lmin, q^lmin)`.
pub fn code_size_upper_bound(n: usize, k: usize, lmin: usize, lover: usize, q: u32) -> Result<BigUint> {
    let u = k * canonical_segment_count(n, lmin, lover)?;
    let v = qpow_big(q, lmin);
    binomial(&(BigUint::from(u) + &v), &v)
}

/// `log_q` of [`code_size_upper_bound`], for parameters too large to expand.
pub fn log_code_size_upper_bound(n: usize, k: usize, lmin: usize, lover: usize, q: u32) -> Result<f64> {
    let u = (k * canonical_segment_count(n, lmin, lover)?) as f64;
    let v = f64::from(q).powi(lmin as i32);
    Ok(ln_binomial_sum(u, v) / f64::from(q).ln())
}

/// Leading term `(1 - 1/a)/(1 - gamma)` of the single-strand rate upper
/// bound for `lmin ~ a log n`, `lover ~ gamma lmin`. The correction term
/// `O(loglog n / log n)` is not modelled.
pub fn rate_upper_bound_single(a: Rational, gamma: Rational) -> Result<Rational> {
    let one = Rational::from_integer(1);
    if a <= one {
        return Err(Error::param("a must exceed 1"));
    }
    if gamma < Rational::from_integer(0) || gamma > one / a {
        return Err(Error::param("gamma must lie in [0, 1/a]"));
    }
    Ok((one - one / a) / (one - gamma))
}

/// `|X_{n,k}| = C(k + q^n - 1, k)`, the number of multisets of `k` strands.
pub fn channel_size(n: usize, k: usize, q: u32) -> Result<BigUint> {
    let top = qpow_big(q, n) + BigUint::from(k) - BigUint::one();
    binomial(&top, &BigUint::from(k))
}

/// `log_q |X_{n,k}|`, evaluated exactly when the binomial is small enough
/// to expand, and otherwise from the product form with `q^n` handled in
/// log space.
pub fn channel_log_size(n: usize, k: usize, q: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if (n as f64) * f64::from(q).log2() < 1000.0 && k as u64 <= EXACT_BINOMIAL_BUDGET {
        if let Ok(exact) = channel_size(n, k, q) {
            return big_log_q(&exact, q);
        }
    }
    // log C(q^n + k - 1, k) = sum_i [log(q^n + i - 1) - log i]
    let ln_q = f64::from(q).ln();
    let ln_qn = n as f64 * ln_q;
    let mut total = 0.0;
    for i in 1..=k {
        let extra = ((i - 1) as f64).ln() - ln_qn;
        total += ln_qn + if i == 1 { 0.0 } else { extra.exp().ln_1p() } - (i as f64).ln();
    }
    total / ln_q
}

/// Asymptotic form `k (n - log(k/e))` of `log_q |X_{n,k}|`.
pub fn channel_log_size_asymptotic(n: usize, k: usize, q: u32) -> f64 {
    let k_f = k as f64;
    k_f * (n as f64 - log_q(q, k_f / std::f64::consts::E))
}

/// Bracket on `log_q |X_{n,k}|` from Stirling's bounds on `k!`:
/// `k(n - log(k/e)) - log(e sqrt k) <= log|X| <= k(n + log(1 + k/q^n) - log(k/e))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEnvelope {
    pub lower: f64,
    pub upper: f64,
}

pub fn channel_envelope(n: usize, k: usize, q: u32) -> ChannelEnvelope {
    let k_f = k as f64;
    let lead = channel_log_size_asymptotic(n, k, q);
    let lower = lead - log_q(q, std::f64::consts::E * k_f.sqrt());
    let ratio = (k_f.ln() - n as f64 * f64::from(q).ln()).exp();
    let upper = lead + k_f * log_q(q, 1.0 + ratio);
    ChannelEnvelope { lower, upper }
}

fn big_log_q(x: &BigUint, q: u32) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    (top.log2() + shift as f64) / f64::from(q).log2()
}

/// Window-length thresholds for multi-strand codes over `X_{n,k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroRateThreshold {
    /// `log(nk)`: windows shorter than this by a growing margin force rate 0.
    pub threshold: f64,
    /// `log(nk) + 3 loglog(nk) + 12`: from here on rate `1 - o(1)` is
    /// attainable.
    pub rate_one_ell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegion {
    /// Below `log(nk)`.
    Vanishing,
    /// Between the two thresholds, where neither statement applies.
    Indeterminate,
    /// At or above the sufficiency value.
    NearOne,
}

impl ZeroRateThreshold {
    pub fn region(&self, ell: usize) -> RateRegion {
        let ell = ell as f64;
        if ell < self.threshold {
            RateRegion::Vanishing
        } else if ell >= self.rate_one_ell {
            RateRegion::NearOne
        } else {
            RateRegion::Indeterminate
        }
    }
}

pub fn zero_rate_threshold(n: usize, k: usize, q: u32) -> Result<ZeroRateThreshold> {
    let nk = (n as f64) * (k as f64);
    if nk < 2.0 {
        return Err(Error::param("n k must be at least 2"));
    }
    let threshold = log_q(q, nk);
    let loglog = if threshold > 1.0 { log_q(q, threshold) } else { 0.0 };
    Ok(ZeroRateThreshold { threshold, rate_one_ell: threshold + 3.0 * loglog + 12.0 })
}

/// Which repeat-free encoder a rate expression assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderRegime {
    /// The elimination/expansion encoder, `f >= 3 loglog(nk) + 12`.
    Elimination,
    /// The single-redundant-symbol encoder, for windows about twice `log n'`.
    SingleSymbol,
}

/// A leading-term rate lower bound together with the regime that gave it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub value: f64,
    pub regime: EncoderRegime,
}

fn elimination_penalty(q: u32, f: f64) -> f64 {
    let steps = (f / 3.0).floor();
    if q == 2 {
        2f64.powf(5.0 - steps)
    } else {
        let qf = f64::from(q);
        qf.powf(4.0 - steps) / (qf - 2.0)
    }
}

fn best(candidates: [Option<RateEstimate>; 2]) -> Option<RateEstimate> {
    candidates
        .into_iter()
        .flatten()
        .map(|r| RateEstimate { value: r.value.clamp(0.0, 1.0), ..r })
        .max_by(|a, b| a.value.total_cmp(&b.value))
}

/// Rate lower bound of the index-based construction, with
/// `f = ell - log(nk) - log k`; the `o(1/n)` term is dropped. `None` when
/// neither encoder regime applies. Negative leading terms are reported as 0.
pub fn rate_index_based(n: usize, k: usize, ell: usize, q: u32) -> Option<RateEstimate> {
    let (n_f, k_f) = (n as f64, k as f64);
    let log_k = log_q(q, k_f);
    let log_nk = log_q(q, n_f * k_f);
    let f = ell as f64 - log_nk - log_k;
    let shrink = 1.0 - log_k / n_f;
    let tail = log_q(q, std::f64::consts::E) / (n_f - log_k);
    let single = (shrink > 0.0 && f >= log_nk + 2.0 + 2.0 * log_q(q, shrink))
        .then_some(RateEstimate { value: 1.0 - tail, regime: EncoderRegime::SingleSymbol });
    let elimination = (log_nk > 1.0 && f >= 3.0 * log_q(q, log_nk) + 12.0)
        .then(|| RateEstimate { value: 1.0 - elimination_penalty(q, f) - tail, regime: EncoderRegime::Elimination });
    best([single, elimination])
}

/// Rate lower bound of the overlap-based construction, with
/// `f = ell - log(nk)`; the `(1 + o(1))` factor is taken as 1.
pub fn rate_overlap_based(n: usize, k: usize, ell: usize, q: u32) -> Option<RateEstimate> {
    let (n_f, k_f, ell_f) = (n as f64, k as f64, ell as f64);
    let log_k = log_q(q, k_f);
    let log_nk = log_q(q, n_f * k_f);
    let f = ell_f - log_nk;
    let tail = (log_q(q, n_f) + f) / (n_f - log_k);
    let kept = 1.0 - (1.0 - 1.0 / k_f) * ell_f / n_f;
    let single = (kept > 0.0 && f >= log_nk + 2.0 + 2.0 * log_q(q, kept))
        .then_some(RateEstimate { value: 1.0 - tail, regime: EncoderRegime::SingleSymbol });
    let elimination = (log_nk > 1.0 && f >= 3.0 * log_q(q, log_nk) + 12.0)
        .then(|| RateEstimate { value: 1.0 - elimination_penalty(q, f) - tail, regime: EncoderRegime::Elimination });
    best([single, elimination])
}

/// Upper bound on the rate of codes decodable from the `(ell+1)`-profile
/// (the channel both constructions use), capped at 1.
pub fn rate_upper_bound_profile(n: usize, k: usize, ell: usize, q: u32) -> Result<f64> {
    let window = ell + 1;
    if window > n {
        return Err(Error::param(format!("window {window} exceeds n={n}")));
    }
    let size = log_code_size_upper_bound(n, k, window, ell, q)?;
    Ok((size / channel_log_size(n, k, q)).min(1.0))
}

/// True when `ell >= log(n^2 k^3) + 2 + 2 log(1 - log(k)/n)`, the window
/// range where the index-based construction has the higher rate.
pub fn index_dominates_condition(n: usize, k: usize, ell: usize, q: u32) -> bool {
    let (n_f, k_f) = (n as f64, k as f64);
    let shrink = 1.0 - log_q(q, k_f) / n_f;
    shrink > 0.0 && ell as f64 >= log_q(q, n_f * n_f * k_f * k_f * k_f) + 2.0 + 2.0 * log_q(q, shrink)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub ell: usize,
    pub rate_index: Option<f64>,
    pub rate_overlap: Option<f64>,
    pub upper_bound: f64,
}

pub fn rate_comparison_table(
    n: usize,
    k: usize,
    ells: impl IntoIterator<Item = usize>,
    q: u32,
) -> Result<Vec<RateRow>> {
    ells.into_iter()
        .map(|ell| {
            Ok(RateRow {
                ell,
                rate_index: rate_index_based(n, k, ell, q).map(|r| r.value),
                rate_overlap: rate_overlap_based(n, k, ell, q).map(|r| r.value),
                upper_bound: rate_upper_bound_profile(n, k, ell, q)?,
            })
        })
        .collect()
}

pub const RATE_CSV_HEADER: &str = "ell,rate_index,rate_overlap,upper_bound";

/// CSV with six fractional digits; inapplicable cells are left empty.
pub fn rate_table_csv(rows: &[RateRow]) -> String {
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut out = String::from(RATE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{:.6}\n", r.ell, cell(r.rate_index), cell(r.rate_overlap), r.upper_bound));
    }
    out
}
