//! Integer logarithms, guarded ceilings and rational parameter parsing.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational used for real-valued parameters such as `a` or `gamma`.
pub type Rational = Ratio<i64>;

/// Tolerance absorbing floating-point noise before a ceiling or floor, so
/// that e.g. `3 * log2(1024)` evaluates to exactly 30.
const ROUNDING_SLACK: f64 = 1e-9;

/// Smallest `e` with `q^e >= n`; zero for `n <= 1`.
pub fn ceil_log(q: u64, n: u64) -> u32 {
    assert!(q >= 2, "logarithm base must be at least 2");
    let mut e = 0;
    let mut p: u128 = 1;
    while p < u128::from(n) {
        p *= u128::from(q);
        e += 1;
    }
    e
}

/// Largest `e` with `q^e <= n`, for `n >= 1`.
pub fn floor_log(q: u64, n: u64) -> u32 {
    assert!(q >= 2 && n >= 1);
    let mut e = 0;
    let mut p: u128 = u128::from(q);
    while p <= u128::from(n) {
        p *= u128::from(q);
        e += 1;
    }
    e
}

/// `q^e` if it fits in a `u64`.
pub fn checked_pow(q: u64, e: u32) -> Option<u64> {
    q.checked_pow(e)
}

/// Real logarithm base `q`.
pub fn log_base(q: f64, x: f64) -> f64 {
    x.ln() / q.ln()
}

/// Ceiling that ignores floating-point error below [`ROUNDING_SLACK`].
pub fn ceil_guarded(x: f64) -> i64 {
    (x - ROUNDING_SLACK).ceil() as i64
}

/// Floor that ignores floating-point error below [`ROUNDING_SLACK`].
pub fn floor_guarded(x: f64) -> i64 {
    (x + ROUNDING_SLACK).floor() as i64
}

pub fn div_ceil(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3/4"`, `"0.25"`, `"2"` or `"-1/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = t.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().map_err(|_| bad())?;
        let magnitude = int_part.abs() * den + frac_part;
        return Ok(Rational::new(if negative { -magnitude } else { magnitude }, den));
    }
    t.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

pub fn format_rational(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_logs() {
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(2, 1024), 10);
        assert_eq!(ceil_log(2, 1025), 11);
        assert_eq!(ceil_log(3, 9), 2);
        assert_eq!(floor_log(2, 1023), 9);
        assert_eq!(floor_log(2, 1024), 10);
    }

    #[test]
    fn guarded_rounding_absorbs_float_noise() {
        assert_eq!(ceil_guarded(3.0 * log_base(2.0, 1024.0)), 30);
        assert_eq!(ceil_guarded(30.2), 31);
        assert_eq!(floor_guarded(2.999_999_999_99), 3);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::new(3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("2").unwrap(), Rational::from_integer(2));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(Rational::new(6, 8)), "3/4");
    }
}
