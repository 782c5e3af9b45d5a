//! Exact rational scalars and the fixed-precision logarithm surrogate.
//!
//! Every breakpoint, component value and gauge in this crate is an exact
//! rational. The only transcendental operations are `ln` and `exp`, which are
//! routed through [`GapFunction`]: it returns the nearest dyadic rational with
//! a fixed number of fractional bits, so results stay exact objects that later
//! arithmetic can combine without rounding.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number.
pub type ExactScalar = BigRational;

/// Environment variable overriding the default [`GapFunction`] precision.
pub const GAP_BITS_ENV: &str = "PGN_GAP_BITS";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot parse {0:?} as an exact rational")]
    Parse(String),
    #[error("division by zero in {0:?}")]
    ZeroDenominator(String),
    #[error("logarithm of non-positive value {0}")]
    NonPositiveLog(String),
    #[error("invalid gap precision {0:?}: expected an integer in 8..=4096")]
    Precision(String),
}

pub fn int(v: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"`, integers, and decimal literals such as `-0.125` or `1e-3`.
/// Decimals are read exactly as fractions over powers of ten.
pub fn parse_scalar(text: &str) -> Result<ExactScalar, ScalarError> {
    let s = text.trim();
    let err = || ScalarError::Parse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(ScalarError::ZeroDenominator(text.to_string()));
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{whole}{frac}");
    let mut num = BigInt::from_str(&all_digits).map_err(|_| err())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Canonical decimal-free form `"numerator/denominator"`, always with a
/// denominator so that files round-trip bit-exactly.
pub fn format_scalar(x: &ExactScalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Lossy conversion for display and plotting only.
pub fn to_f64(x: &ExactScalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn floor_to_i64(x: &ExactScalar) -> Option<i64> {
    x.floor().to_integer().to_i64()
}

pub fn ceil_to_i64(x: &ExactScalar) -> Option<i64> {
    x.ceil().to_integer().to_i64()
}

pub fn factorial(n: usize) -> ExactScalar {
    BigRational::from_integer((1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
}

/// Fixed-precision rational surrogate for `ln` and `exp`.
///
/// Results are rounded to the nearest multiple of `2^-bits`. Internally the
/// series run with at least 32 guard bits, so the returned value is within one
/// unit of the last place of the true result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GapFunction {
    bits: u32,
}

impl Default for GapFunction {
    fn default() -> Self {
        Self { bits: Self::DEFAULT_BITS }
    }
}

impl GapFunction {
    pub const DEFAULT_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self, ScalarError> {
        if !(8..=4096).contains(&bits) {
            return Err(ScalarError::Precision(bits.to_string()));
        }
        Ok(Self { bits })
    }

    /// Reads `PGN_GAP_BITS`, falling back to 64 bits when unset.
    pub fn from_env() -> Result<Self, ScalarError> {
        match std::env::var(GAP_BITS_ENV) {
            Ok(raw) => {
                let bits = raw
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| ScalarError::Precision(raw.clone()))?;
                Self::new(bits)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The rounding unit `2^-bits`.
    pub fn resolution(&self) -> ExactScalar {
        BigRational::new(BigInt::one(), BigInt::one() << self.bits as usize)
    }

    /// Natural logarithm of a positive rational, as a dyadic rational.
    pub fn ln(&self, x: &ExactScalar) -> Result<ExactScalar, ScalarError> {
        if !x.is_positive() {
            return Err(ScalarError::NonPositiveLog(format_scalar(x)));
        }
        let num = x.numer().clone();
        let den = x.denom().clone();
        // x = 2^k * y with y in [1, 2)
        let mut k = num.bits() as i64 - den.bits() as i64;
        let (mut y_num, mut y_den) = scale_pow2(&num, &den, -k);
        if y_num < y_den {
            k -= 1;
            y_num <<= 1usize;
        } else if y_num >= (&y_den << 1usize) {
            k += 1;
            y_den <<= 1usize;
        }
        let precision = self.working_precision(k.unsigned_abs());
        // ln y = 2 atanh((y - 1) / (y + 1))
        let z_fixed = ((&y_num - &y_den) << precision) / (&y_num + &y_den);
        let ln_y = atanh_fixed(&z_fixed, precision) << 1usize;
        let total = ln_y + ln2_fixed(precision) * BigInt::from(k);
        Ok(self.round_fixed(total, precision as i64))
    }

    /// Exponential of a rational, as a dyadic rational.
    pub fn exp(&self, q: &ExactScalar) -> ExactScalar {
        if q.is_zero() {
            return ExactScalar::one();
        }
        // exp(q) = 2^k * exp(r), |r| <= ln 2 / 2 (plus rounding slack)
        let approx = to_f64(q) / std::f64::consts::LN_2;
        let k = approx.round() as i64;
        let precision = self.working_precision(k.unsigned_abs()) + k.max(0) as usize;
        let ln2 = ln2_fixed(precision);
        let q_fixed = (q.numer() << precision).div_floor(q.denom());
        let r_fixed = q_fixed - ln2 * BigInt::from(k);
        let one = BigInt::one() << precision;
        let mut sum = one.clone();
        let mut term = one;
        let mut i = 1u64;
        loop {
            term = ((&term * &r_fixed) >> precision) / BigInt::from(i);
            if term.is_zero() {
                break;
            }
            sum += &term;
            i += 1;
        }
        // value = sum * 2^k / 2^precision
        self.round_fixed(sum, precision as i64 - k)
    }

    fn working_precision(&self, magnitude: u64) -> usize {
        let extra = 64 - magnitude.leading_zeros() as usize;
        self.bits as usize + 32 + extra
    }

    /// Rounds `value / 2^shift` to the nearest multiple of `2^-bits`.
    fn round_fixed(&self, value: BigInt, shift: i64) -> ExactScalar {
        let drop = shift - self.bits as i64;
        let units = if drop > 0 {
            let divisor = BigInt::one() << drop as usize;
            let half = &divisor >> 1usize;
            (value + half).div_floor(&divisor)
        } else {
            value << (-drop) as usize
        };
        BigRational::new(units, BigInt::one() << self.bits as usize)
    }
}

fn scale_pow2(num: &BigInt, den: &BigInt, k: i64) -> (BigInt, BigInt) {
    if k >= 0 {
        (num << k as usize, den.clone())
    } else {
        (num.clone(), den << (-k) as usize)
    }
}

/// atanh(z) for fixed-point `z = z_fixed / 2^precision`, `0 <= z < 1/2`.
fn atanh_fixed(z_fixed: &BigInt, precision: usize) -> BigInt {
    debug_assert!(z_fixed.sign() != Sign::Minus);
    let z2 = (z_fixed * z_fixed) >> precision;
    let mut power = z_fixed.clone();
    let mut sum = BigInt::zero();
    let mut odd = 1u64;
    while !power.is_zero() {
        sum += &power / BigInt::from(odd);
        power = (&power * &z2) >> precision;
        odd += 2;
    }
    sum
}

fn ln2_fixed(precision: usize) -> BigInt {
    let third = (BigInt::one() << precision) / BigInt::from(3u32);
    atanh_fixed(&third, precision) << 1usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_scalar("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_scalar("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_scalar("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_scalar("-1.5e2").unwrap(), int(-150));
        assert_eq!(parse_scalar("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_scalar(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_scalar("7").unwrap(), int(7));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar("").is_err());
        assert!(parse_scalar("1.2.3").is_err());
    }

    #[test]
    fn format_always_carries_a_denominator() {
        assert_eq!(format_scalar(&int(3)), "3/1");
        assert_eq!(format_scalar(&ratio(-2, 6)), "-1/3");
    }

    #[test]
    fn ln_and_exp_of_one_are_exact() {
        let g = GapFunction::default();
        assert!(g.ln(&int(1)).unwrap().is_zero());
        assert!(g.exp(&int(0)).is_one());
    }

    #[test]
    fn ln_matches_f64_reference() {
        let g = GapFunction::default();
        for (x, expected) in [
            (ratio(100, 1), 100f64.ln()),
            (ratio(1, 3), (1.0f64 / 3.0).ln()),
            (ratio(2, 1), std::f64::consts::LN_2),
            (ratio(123456789, 1000), 123456.789f64.ln()),
        ] {
            let got = to_f64(&g.ln(&x).unwrap());
            assert!((got - expected).abs() < 1e-14, "ln({x}) = {got}, expected {expected}");
        }
        assert!(g.ln(&int(0)).is_err());
        assert!(g.ln(&int(-2)).is_err());
    }

    #[test]
    fn exp_matches_f64_reference() {
        let g = GapFunction::default();
        for q in [ratio(1, 4), int(1), int(-3), ratio(69, 5), int(40)] {
            let got = to_f64(&g.exp(&q));
            let expected = to_f64(&q).exp();
            assert!(((got - expected) / expected).abs() < 1e-14, "exp({q}) = {got}");
        }
    }

    #[test]
    fn results_are_dyadic_at_the_configured_precision() {
        let g = GapFunction::new(20).unwrap();
        let v = g.ln(&int(10)).unwrap();
        assert!((BigInt::one() << 20usize).is_multiple_of(v.denom()));
        assert!(GapFunction::new(2).is_err());
    }

    #[test]
    fn ln_exp_round_trip_within_resolution() {
        // high-precision oracle: exp at 200 bits, ln at 64
        let fine = GapFunction::new(200).unwrap();
        let g = GapFunction::default();
        for q in [ratio(1, 7), int(3), ratio(-5, 2), ratio(138, 10)] {
            let back = g.ln(&fine.exp(&q)).unwrap();
            assert!((back - &q).abs() <= g.resolution() * int(2));
        }
    }

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(0), int(1));
        assert_eq!(factorial(4), int(24));
    }
}
