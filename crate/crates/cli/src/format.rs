//! Fixed-precision number output and the curve CSV format.

use qcoin_core::analysis::BiasCurvePoint;

use crate::error::{CliError, CliResult};

/// Significant digits of every number the CLI writes.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const CURVE_HEADER: &str = "K,p0,bias";

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Positional notation with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT_DIGITS - 1, 0.0);
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("formatted float parses");
    format!("{rounded:.decimals$}")
}

/// Serde helpers writing floats rounded to [`SIGNIFICANT_DIGITS`].
pub mod sig {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round_sig(*x))
    }

    pub mod option {
        use serde::Serializer;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&super::super::round_sig(*v)),
                None => s.serialize_none(),
            }
        }
    }
}

pub fn curve_csv(points: &[BiasCurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!("{},{},{}\n", fmt_sig(p.k), fmt_sig(p.p0), fmt_sig(p.bias)));
    }
    out
}

pub fn parse_curve_csv(text: &str) -> CliResult<Vec<BiasCurvePoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(CliError::Usage(format!("curve file must start with `{CURVE_HEADER}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("curve row {}: {e}", i + 1)))?;
            match fields[..] {
                [k, p0, bias] => Ok(BiasCurvePoint { k, p0, bias }),
                _ => Err(CliError::Usage(format!("curve row {}: expected 3 fields", i + 1))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.510964), "0.510964000000");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123.456), "123.456000000");
        assert_eq!(fmt_sig(-2.5e-5), "-0.0000250000000000");
        assert_eq!(fmt_sig(0.0), "0.00000000000");
        assert_eq!(fmt_sig(1.2345e14), "123450000000000");
        // rounding that carries into the next power of ten
        assert_eq!(fmt_sig(9.9999999999999), "10.0000000000");
    }

    #[test]
    fn rounding_matches_formatting() {
        for x in [0.1, 2.0 / 3.0, 0.0921961068, 1e-9 / 7.0, 12345.678901234567] {
            let s = fmt_sig(x);
            assert_eq!(s.parse::<f64>().unwrap(), round_sig(x));
            assert!(((round_sig(x) - x) / x).abs() <= 5e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let points = qcoin_core::analysis::curve(&qcoin_core::analysis::uniform_grid(9)).unwrap();
        let text = curve_csv(&points);
        let back = parse_curve_csv(&text).unwrap();
        assert_eq!(back.len(), 9);
        for (a, b) in points.iter().zip(&back) {
            assert_eq!(round_sig(a.k), b.k);
            assert_eq!(round_sig(a.p0), b.p0);
            assert_eq!(round_sig(a.bias), b.bias);
        }
        assert_eq!(curve_csv(&back), text);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_curve_csv("k,p0,bias\n").is_err());
        assert!(parse_curve_csv("K,p0,bias\n0.5,0.6\n").is_err());
        assert!(parse_curve_csv("K,p0,bias\n0.5,x,0.1\n").is_err());
    }
}
