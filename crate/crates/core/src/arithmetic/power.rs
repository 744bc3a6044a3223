use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Natural logarithm of an arbitrary-precision integer (`-inf` for zero).
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().expect("64-bit head").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Compares `y` with `x^e`.
///
/// Decided in log space unless the two sides are within rounding distance;
/// then integral exponents are settled exactly and non-integral ones count
/// as equal.
pub fn cmp_pow(y: &BigUint, x: &BigUint, e: f64) -> Ordering {
    let ly = big_ln(y);
    let lx = big_ln(x);
    if x.is_zero() || y.is_zero() {
        let rhs_zero = x.is_zero() && e > 0.0;
        return match (y.is_zero(), rhs_zero) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => unreachable!(),
        };
    }
    let rhs = e * lx;
    let scale = ly.abs().max(rhs.abs()).max(1.0);
    if (ly - rhs).abs() > 1e-9 * scale {
        return ly.partial_cmp(&rhs).unwrap_or(Ordering::Equal);
    }
    if e.fract() == 0.0 && e >= 0.0 && e <= 4096.0 {
        return y.cmp(&x.pow(e as u32));
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_large_integer_matches_bit_length() {
        let x = BigUint::from(1u8) << 5000u32;
        let expected = 5000.0 * std::f64::consts::LN_2;
        assert!((big_ln(&x) - expected).abs() < 1e-9);
        assert!((big_ln(&BigUint::from(10u8)) - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exact_ties_on_integer_exponents() {
        let two = BigUint::from(2u8);
        assert_eq!(cmp_pow(&BigUint::from(8u8), &two, 3.0), Ordering::Equal);
        assert_eq!(cmp_pow(&BigUint::from(9u8), &two, 3.0), Ordering::Greater);
        assert_eq!(cmp_pow(&BigUint::from(7u8), &two, 3.0), Ordering::Less);
        let big = (BigUint::from(3u8) << 3000u32) + 1u8;
        let cube = big.pow(3);
        assert_eq!(cmp_pow(&cube, &big, 3.0), Ordering::Equal);
        assert_eq!(cmp_pow(&(cube.clone() - 1u8), &big, 3.0), Ordering::Less);
    }

    #[test]
    fn one_to_any_power_is_one() {
        let one = BigUint::from(1u8);
        assert_eq!(cmp_pow(&one, &one, 81.0), Ordering::Equal);
        assert_eq!(cmp_pow(&BigUint::from(2u8), &one, 27.0), Ordering::Greater);
    }
}
