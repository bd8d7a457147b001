//! Text rendering of numbers shared by every file format.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Seventeen significant digits: enough to round-trip any `f64` exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
}

/// Parses an exact rational from `num/den`, an integer, or a decimal with an
/// optional exponent (`-0.125`, `1e-3`, `2.5E+2`). Decimals become scaled
/// integers, so `0.1` is exactly `1/10`.
pub fn parse_exact(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("not an exact number: {s:?}");
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(all * ten.pow(scale as u32))
    } else {
        BigRational::new(all, ten.pow((-scale) as u32))
    };
    Ok(if neg { -value } else { value })
}

/// Whether `q` is exactly the square of a rational; returns the root.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q < &BigRational::zero() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_exact("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_exact("-1/2").unwrap(), q(-1, 2));
        assert_eq!(parse_exact("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_exact("2.5E+2").unwrap(), q(250, 1));
        assert_eq!(parse_exact("-.5").unwrap(), q(-1, 2));
        assert_eq!(parse_exact("3").unwrap(), q(3, 1));
        assert!(parse_exact("3.0").unwrap().denom().is_one());
        for bad in ["", "1/0", "abc", "1.2.3", "--1", "1e"] {
            assert!(parse_exact(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn seventeen_digits_roundtrip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, f64::MAX, -0.0, 5e-324] {
            let back: f64 = fmt17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn rational_squares() {
        assert_eq!(rational_sqrt(&q(49, 81)), Some(q(7, 9)));
        assert_eq!(rational_sqrt(&q(3, 2)), None);
        assert_eq!(rational_sqrt(&q(-1, 4)), None);
    }
}
