//! Exact rational values used everywhere a flow amount or coefficient appears.
//!
//! All arithmetic is exact; there is no floating-point fast path. Values such
//! as 1/18 or 3/18 must satisfy equality constraints exactly, so tolerance
//! based comparison is never used anywhere in the crate.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always stored reduced with a positive
/// denominator (guaranteed by `num_rational`).
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` as a rational. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p/q`, or just `p` when the value is an integer.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decimal rendering for human-facing reports only; never round-tripped.
pub fn format_decimal(q: &Rational, digits: usize) -> String {
    let sign = if q.is_negative() { "-" } else { "" };
    let a = q.abs();
    let whole = a.numer() / a.denom();
    let mut rem = a.numer() % a.denom();
    let mut frac = String::new();
    for _ in 0..digits {
        if rem.is_zero() {
            break;
        }
        rem *= BigInt::from(10);
        frac.push_str(&(&rem / a.denom()).to_string());
        rem %= a.denom();
    }
    if frac.is_empty() {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

/// Parses `p`, `p/q`, or a plain decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|e| format!("bad numerator {n:?}: {e}"))?;
        let d: BigInt = d.trim().parse().map_err(|e| format!("bad denominator {d:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((w, f)) = s.split_once('.') {
        let w = if w.is_empty() { "0" } else { w };
        let neg = w.starts_with('-');
        let whole: BigInt = w.parse().map_err(|e| format!("bad number {s:?}: {e}"))?;
        let frac: BigInt = if f.is_empty() {
            BigInt::zero()
        } else {
            f.parse().map_err(|e| format!("bad number {s:?}: {e}"))?
        };
        let scale = BigInt::from(10u32).pow(f.len() as u32);
        let mag = whole.abs() * &scale + frac;
        let mag = if neg { -mag } else { mag };
        return Ok(Rational::new(mag, scale));
    }
    let n: BigInt = s.parse().map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(Rational::from_integer(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/18").unwrap(), ratio(1, 6));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("0,50".replace(',', ".").as_str()).unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), rat(-7));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_decimal(&ratio(1, 4), 6), "0.25");
        assert_eq!(format_decimal(&ratio(-1, 2), 6), "-0.5");
        assert_eq!(format_decimal(&rat(3), 6), "3");
    }
}
