//! Scalar abstractions: path-count coefficient types and decimal rendering.
//!
//! Path polynomials are generic over their coefficient type. Fixed-width
//! unsigned integers give exact counts with overflow detection, `BigUint`
//! never overflows, and `f64` is the approximate accumulation mode for
//! graphs whose path counts outgrow any fixed width.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedAdd, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Coefficient type of a path polynomial.
pub trait PathCount:
    Clone + fmt::Debug + fmt::Display + PartialEq + Zero + One + Send + Sync
{
    /// Whether sums are exact (no rounding) as long as they do not overflow.
    const EXACT: bool;

    /// `None` on overflow.
    fn checked_sum(&self, other: &Self) -> Option<Self>;

    /// Natural logarithm; `-inf` for zero.
    fn ln(&self) -> f64;

    /// Exact integer value, when the type stores one.
    fn to_bigint(&self) -> Option<BigInt>;

    /// Nearest float, `inf` when out of range.
    fn to_f64(&self) -> f64;
}

macro_rules! impl_fixed_count {
    ($($t:ty),*) => {$(
        impl PathCount for $t {
            const EXACT: bool = true;

            fn checked_sum(&self, other: &Self) -> Option<Self> {
                CheckedAdd::checked_add(self, other)
            }

            fn ln(&self) -> f64 {
                (*self as f64).ln()
            }

            fn to_bigint(&self) -> Option<BigInt> {
                Some(BigInt::from(*self))
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    )*};
}

impl_fixed_count!(u8, u16, u32, u64, u128);

impl PathCount for BigUint {
    const EXACT: bool = true;

    fn checked_sum(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }

    fn ln(&self) -> f64 {
        let bits = self.bits();
        if bits <= 1000 {
            return ToPrimitive::to_f64(self).map_or(f64::INFINITY, f64::ln);
        }
        let shift = bits - 64;
        let head = ToPrimitive::to_f64(&(self >> shift)).expect("64-bit head fits f64");
        head.ln() + shift as f64 * std::f64::consts::LN_2
    }

    fn to_bigint(&self) -> Option<BigInt> {
        Some(BigInt::from_biguint(Sign::Plus, self.clone()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::INFINITY)
    }
}

impl PathCount for f64 {
    const EXACT: bool = false;

    fn checked_sum(&self, other: &Self) -> Option<Self> {
        let s = self + other;
        s.is_finite().then_some(s)
    }

    fn ln(&self) -> f64 {
        f64::ln(*self)
    }

    fn to_bigint(&self) -> Option<BigInt> {
        None
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Rounds a rational to `places` decimals, ties to even, and renders it.
pub fn format_half_even(value: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = value * BigRational::from_integer(scale);
    let negative = scaled.is_negative();
    let scaled = scaled.abs();
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = &r * 2u32;
    let round_up = match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => q.is_odd(),
    };
    let q = if round_up { q + 1u32 } else { q };
    let digits = q.to_string();
    let places = places as usize;
    let mut out = String::new();
    if negative && !q.is_zero() {
        out.push('-');
    }
    if places == 0 {
        out.push_str(&digits);
        return out;
    }
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    out.push_str(int);
    out.push('.');
    out.push_str(frac);
    out
}

/// Half-even decimal rendering of the exact binary value of `x`.
pub fn format_f64_half_even(x: f64, places: u32) -> String {
    match BigRational::from_f64(x) {
        Some(r) => format_half_even(&r, places),
        None => x.to_string(),
    }
}

/// `numerator / 10^exp` as a rational, used for M/G unit rendering.
pub fn scaled_ratio(numerator: u128, exp: u32) -> BigRational {
    BigRational::new(BigInt::from(numerator), BigInt::from(10u32).pow(exp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn half_even_ties() {
        assert_eq!(format_half_even(&r(5, 2), 0), "2");
        assert_eq!(format_half_even(&r(7, 2), 0), "4");
        assert_eq!(format_half_even(&r(25, 100), 1), "0.2");
        assert_eq!(format_half_even(&r(35, 100), 1), "0.4");
        assert_eq!(format_half_even(&r(351, 1000), 1), "0.4");
        assert_eq!(format_half_even(&r(1, 3), 2), "0.33");
        assert_eq!(format_half_even(&r(-1, 3), 2), "-0.33");
        assert_eq!(format_half_even(&r(23, 2), 2), "11.50");
        assert_eq!(format_half_even(&r(16, 1), 2), "16.00");
        assert_eq!(format_half_even(&r(1, 1000), 2), "0.00");
    }

    #[test]
    fn unit_scaling() {
        assert_eq!(format_half_even(&scaled_ratio(138_357_544, 6), 1), "138.4");
        assert_eq!(format_half_even(&scaled_ratio(250_000, 6), 1), "0.2");
        assert_eq!(format_half_even(&scaled_ratio(350_000, 6), 1), "0.4");
    }

    #[test]
    fn float_rendering_uses_exact_binary_value() {
        // 2.675 is stored slightly below the tie
        assert_eq!(format_f64_half_even(2.675, 2), "2.67");
        assert_eq!(format_f64_half_even(2.4, 2), "2.40");
        assert_eq!(format_f64_half_even(0.125, 2), "0.12");
    }

    #[test]
    fn big_ln_matches_small() {
        let small = BigUint::from(1u64 << 40);
        assert!((PathCount::ln(&small) - 40.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let huge = BigUint::one() << 5000u32;
        assert!((PathCount::ln(&huge) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn fixed_width_overflow_detected() {
        assert_eq!(200u8.checked_sum(&100u8), None);
        assert_eq!(PathCount::checked_sum(&f64::MAX, &f64::MAX), None);
        assert_eq!(PathCount::checked_sum(&1u128, &2u128), Some(3));
    }
}
