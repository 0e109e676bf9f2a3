//! Deterministic decimal formatting shared by every CSV writer.

/// Formats `x` with nine significant digits, `%.9g` style.
///
/// Fixed notation is used for decimal exponents in `[-5, 9)`, scientific
/// otherwise. Trailing zeros are trimmed and negative zero prints as `0`.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // Round through scientific notation first so the exponent reflects the
    // rounded mantissa (e.g. 9.9999999999 -> 10).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".into()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(-2.25), "-2.25");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(123456789.0), "123456789");
        assert_eq!(sig9(1234567890.0), "1.23456789e9");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(9.9999999999), "10");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(0.000012345), "0.000012345");
    }
}
