//! Certified integer evaluation of `⌈ln x⌉` and `⌈e^{h/q}⌉`.
//!
//! Both reduce to comparing powers of `e` with rationals. We bracket `e`
//! between `A/J!` and `(A+1)/J!` with `A = Σ_{j≤J} J!/j!`, raise the bracket
//! to the required power in big-integer arithmetic and widen `J` until the
//! comparison is decided. Since `e^h` is irrational for `h ≥ 1` every
//! comparison against a rational terminates.

use core::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

const START_TERMS: u32 = 24;
const MAX_TERMS: u32 = 1 << 14;

/// `(A, J!)` with `A/J! < e < (A+1)/J!`.
fn e_bracket(terms: u32) -> (BigUint, BigUint) {
    // A = Σ_{j=0}^{J} J!/j!, accumulated as Horner's scheme from j = J down.
    let mut acc = BigUint::one();
    let mut falling = BigUint::one();
    for j in (1..=terms).rev() {
        falling *= j;
        acc += &falling;
    }
    (acc, falling)
}

/// Lower and upper rational bounds on `e^h`, as `(lo_num, hi_num, den)`.
fn exp_bracket(h: u64, terms: u32) -> (BigUint, BigUint, BigUint) {
    let (a, fact) = e_bracket(terms);
    let hi = &a + 1u32;
    let h = u32::try_from(h).expect("exponent fits u32");
    (a.pow(h), hi.pow(h), fact.pow(h))
}

/// Compares `e^h` with `num/den` for `h ≥ 0`.
///
/// Only `h = 0` can produce `Equal`.
pub fn cmp_exp(h: u64, num: &BigUint, den: &BigUint) -> Ordering {
    assert!(!den.is_zero(), "zero denominator");
    if h == 0 {
        return den.cmp(num);
    }
    let mut terms = START_TERMS;
    loop {
        let (lo, hi, scale) = exp_bracket(h, terms);
        let target = num * &scale;
        if &lo * den >= target {
            return Ordering::Greater;
        }
        if &hi * den <= target {
            return Ordering::Less;
        }
        assert!(terms < MAX_TERMS, "exponential bracket failed to separate");
        terms *= 2;
    }
}

/// Whether `e^m ≥ num/den` for a signed integer exponent `m`.
fn exp_at_least(m: i64, num: &BigUint, den: &BigUint) -> bool {
    if m >= 0 {
        cmp_exp(m as u64, num, den) != Ordering::Less
    } else {
        // e^m ≥ x  ⟺  e^{-m} ≤ 1/x
        cmp_exp(m.unsigned_abs(), den, num) != Ordering::Greater
    }
}

/// Rough `ln(num/den)` that never overflows, good to a few units.
fn ln_estimate(num: &BigUint, den: &BigUint) -> f64 {
    let shift = |v: &BigUint| -> (f64, i64) {
        let bits = v.bits();
        if bits > 1000 {
            let s = bits - 60;
            ((v >> s).to_f64().unwrap_or(f64::MAX), s as i64)
        } else {
            (v.to_f64().unwrap_or(f64::MAX), 0)
        }
    };
    let (n, sn) = shift(num);
    let (d, sd) = shift(den);
    libm::log(n) - libm::log(d) + (sn - sd) as f64 * core::f64::consts::LN_2
}

/// `⌈ln(num/den)⌉`: the least integer `m` with `e^m ≥ num/den`.
pub fn ceil_ln_big(num: &BigUint, den: &BigUint) -> i64 {
    assert!(
        !num.is_zero() && !den.is_zero(),
        "ceil_ln needs a positive argument"
    );
    let mut m = libm::ceil(ln_estimate(num, den)) as i64;
    while !exp_at_least(m, num, den) {
        m += 1;
    }
    while exp_at_least(m - 1, num, den) {
        m -= 1;
    }
    m
}

/// `⌈ln(num/den)⌉` for a positive rational given by machine integers.
pub fn ceil_ln(num: u128, den: u128) -> Result<i64> {
    if num == 0 || den == 0 {
        return Err(crate::error::domain!(
            "ceil_ln needs x > 0, got {num}/{den}"
        ));
    }
    Ok(ceil_ln_big(&BigUint::from(num), &BigUint::from(den)))
}

/// Least `N ≥ 0` with `N^q · den ≥ num`.
fn ceil_root_ratio(num: &BigUint, den: &BigUint, q: u32) -> BigUint {
    let mut n = (num / den).nth_root(q);
    while n.pow(q) * den < *num {
        n += 1u32;
    }
    n
}

/// `⌈e^{h/q}⌉` computed exactly, for `q ∈ {1, 2, ...}`.
///
/// Fails with an overflow error once the value leaves `u128`.
pub fn ceil_exp_frac(h: u64, q: u32) -> Result<u128> {
    assert!(q >= 1, "root index must be positive");
    if h == 0 {
        return Ok(1);
    }
    // e^{h/q} < 2^128 requires h/q < 88.73; bail out before big powers.
    if (h as f64) / (q as f64) > 89.0 {
        return Err(Error::Overflow("ceil_exp"));
    }
    let mut terms = START_TERMS;
    loop {
        let (lo, hi, scale) = exp_bracket(h, terms);
        let from_lo = ceil_root_ratio(&lo, &scale, q);
        let from_hi = ceil_root_ratio(&hi, &scale, q);
        if from_lo == from_hi {
            return from_lo.to_u128().ok_or(Error::Overflow("ceil_exp"));
        }
        assert!(terms < MAX_TERMS, "exponential bracket failed to separate");
        terms *= 2;
    }
}

/// `⌈e^m⌉`.
pub fn ceil_exp(m: u64) -> Result<u128> {
    ceil_exp_frac(m, 1)
}

/// `⌈e^{h/2}⌉`.
pub fn ceil_exp_half(h: u64) -> Result<u128> {
    ceil_exp_frac(h, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u128) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn ceil_ln_small_values() {
        assert_eq!(ceil_ln(1, 1).unwrap(), 0);
        assert_eq!(ceil_ln(4, 1).unwrap(), 2);
        assert_eq!(ceil_ln(2, 1).unwrap(), 1);
        assert_eq!(ceil_ln(8, 1).unwrap(), 3);
        // e rounded down slightly
        assert_eq!(ceil_ln(2_718_281, 1_000_000).unwrap(), 1);
        // e rounded up slightly
        assert_eq!(ceil_ln(2_718_282, 1_000_000).unwrap(), 2);
        assert_eq!(ceil_ln(1, 2).unwrap(), 0);
        assert_eq!(ceil_ln(1, 3).unwrap(), -1);
        assert!(ceil_ln(0, 1).is_err());
    }

    #[test]
    fn ceil_exp_known_values() {
        assert_eq!(ceil_exp(0).unwrap(), 1);
        assert_eq!(ceil_exp(1).unwrap(), 3);
        assert_eq!(ceil_exp(2).unwrap(), 8);
        assert_eq!(ceil_exp(10).unwrap(), 22027);
        assert_eq!(ceil_exp_half(1).unwrap(), 2);
        assert_eq!(ceil_exp_half(20).unwrap(), 22027);
        assert_eq!(ceil_exp_half(11).unwrap(), 245);
    }

    #[test]
    fn ceil_exp_overflow_is_reported() {
        assert!(ceil_exp(88).is_ok());
        assert_eq!(ceil_exp(89), Err(Error::Overflow("ceil_exp")));
        assert!(ceil_exp(200).is_err());
    }

    #[test]
    fn cmp_exp_orders_correctly() {
        assert_eq!(cmp_exp(1, &big(2), &big(1)), Ordering::Greater);
        assert_eq!(cmp_exp(1, &big(3), &big(1)), Ordering::Less);
        assert_eq!(cmp_exp(0, &big(1), &big(1)), Ordering::Equal);
    }
}
