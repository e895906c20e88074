//! Number formatting shared by the text formats.

use num_complex::Complex64;

/// Shortest round-trip decimal form of `v`, laid out the way Python's
/// `repr(float)` does: positional notation for decimal exponents in
/// `[-4, 16)`, otherwise scientific with a signed two-digit exponent.
pub(crate) fn float_repr(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("`{:e}` always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if v < 0.0 { "-" } else { "" };

    if (-4..16).contains(&exp) {
        if exp >= 0 {
            let int_len = exp as usize + 1;
            let (int_part, frac_part) = if digits.len() > int_len {
                (digits[..int_len].to_string(), digits[int_len..].to_string())
            } else {
                (format!("{digits:0<int_len$}"), String::new())
            };
            let frac_part = if frac_part.is_empty() { "0".to_string() } else { frac_part };
            format!("{sign}{int_part}.{frac_part}")
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            format!("{sign}0.{zeros}{digits}")
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        let frac = if rest.is_empty() { String::new() } else { format!(".{rest}") };
        let exp_sign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{lead}{frac}e{exp_sign}{:02}", exp.abs())
    }
}

/// Real coefficients print as [`float_repr`]; complex ones as `(re+imj)`.
pub(crate) fn complex_repr(c: Complex64) -> String {
    if c.im == 0.0 {
        return float_repr(c.re);
    }
    let im = float_repr(c.im);
    let im = if im.starts_with('-') { im } else { format!("+{im}") };
    format!("({}{}j)", float_repr(c.re), im)
}

/// Inverse of [`complex_repr`]; also accepts a bare `bj` imaginary literal.
pub(crate) fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if let Ok(re) = s.parse::<f64>() {
        return Some(Complex64::new(re, 0.0));
    }
    let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    let body = inner.strip_suffix('j')?;
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse().ok()?;
            let im = body[i..].trim_start_matches('+').parse().ok()?;
            Some(Complex64::new(re, im))
        }
        None => Some(Complex64::new(0.0, body.parse().ok()?)),
    }
}

/// Positional notation with `sig` significant digits.
pub(crate) fn significant(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", sig.saturating_sub(1), v);
    }
    let magnitude = |x: f64| x.abs().log10().floor() as i64 + 1;
    let decimals = (sig as i64 - magnitude(v)).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    // rounding may carry into a new leading digit (9.99.. -> 10.0..)
    let rounded: f64 = s.parse().expect("formatted float");
    if magnitude(rounded) > magnitude(v) && decimals > 0 {
        format!("{:.*}", decimals - 1, v)
    } else {
        s
    }
}
