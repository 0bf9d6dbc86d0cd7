//! Fixed-precision number formatting shared by every output.
//!
//! Numbers are written with 9 significant digits in the style of C's `%.9g`
//! so that reports are byte-identical across runs and platforms.

use serde::Serializer;

const SIG_DIGITS: usize = 9;

/// `%.9g`-style rendering; non-finite values become `inf`, `-inf` or `nan`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to 9 significant digits, for JSON output.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        num(x).parse().expect("formatted number parses")
    } else {
        x
    }
}

/// Serde helper writing an `f64` rounded to 9 significant digits, with
/// non-finite values as `null`.
pub fn ser9<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round9(*x))
    } else {
        s.serialize_none()
    }
}

pub fn ser9_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser9(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser9_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&(x.is_finite().then(|| round9(*x))))?;
    }
    seq.end()
}

/// Two-column text table with the names padded to a common width.
pub fn aligned(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(num(0.0993), "0.0993");
        assert_eq!(num(0.1211), "0.1211");
        assert_eq!(num(-0.0318), "-0.0318");
        assert_eq!(num(3390.75), "3390.75");
        assert_eq!(num(5_872_500.0), "5872500");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(123_456_789_012.0), "1.23456789e+11");
        assert_eq!(num(1e-7), "1e-07");
        assert_eq!(num(0.00012345), "0.00012345");
        assert_eq!(num(999_999_999.6), "1e+09");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [0.1 + 0.2, 1.0 / 7.0, -12345.6789012345, 6.02214076e23] {
            assert_eq!(round9(round9(x)), round9(x));
            assert_eq!(num(round9(x)), num(x));
        }
    }
}
