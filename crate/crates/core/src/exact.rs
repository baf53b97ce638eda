//! Exact rational evaluation of integer words, plus rigorous fixed-point
//! intervals used when exact numbers grow too large.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::word::{Bit, PolarWord};

/// Default cap on the total exponent of an exactly evaluated word.
pub const DEFAULT_EXACT_CAP: u64 = 24;

/// Integer exponents of `w`, checked against `cap`.
pub fn integer_exponents(w: &PolarWord, cap: u64) -> Result<Vec<(Bit, u64)>> {
    let mut out = Vec::with_capacity(w.len());
    let mut total: u64 = 0;
    for s in w.segments() {
        let e = s.exponent;
        if e < 0.0 || e.fract() != 0.0 || e > u32::MAX as f64 {
            return Err(Error::NonIntegerExponent(e));
        }
        let e = e as u64;
        total = total.saturating_add(e);
        out.push((s.bit, e));
    }
    if total > cap {
        return Err(Error::ExactCapExceeded { total, cap });
    }
    Ok(out)
}

/// Runs `w` on `x` exactly. Only non-negative integer exponents are allowed,
/// since fractional and inverse maps leave the rationals.
pub fn eval_word_exact(w: &PolarWord, x: &BigRational, cap: u64) -> Result<BigRational> {
    if x < &BigRational::zero() || x > &BigRational::one() {
        return Err(Error::Domain(format!("{x} is outside [0, 1]")));
    }
    let steps = integer_exponents(w, cap)?;
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    for (bit, e) in steps {
        for _ in 0..e {
            match bit {
                Bit::Zero => {
                    num = &num * &num;
                }
                Bit::One => {
                    // 1 - (1 - a/b)^2 = a (2b - a) / b^2
                    let two_b: BigInt = &den << 1;
                    num = &num * (two_b - &num);
                }
            }
            den = &den * &den;
        }
    }
    Ok(BigRational::new(num, den))
}

/// Visits the exact value after every unit step of a plain bit string,
/// starting from `x`.
pub fn exact_prefix_values(bits: &[Bit], x: &BigRational) -> Vec<BigRational> {
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut out = Vec::with_capacity(bits.len());
    for &bit in bits {
        match bit {
            Bit::Zero => num = &num * &num,
            Bit::One => {
                let two_b: BigInt = &den << 1;
                num = &num * (two_b - &num);
            }
        }
        den = &den * &den;
        out.push(BigRational::new_raw(num.clone(), den.clone()));
    }
    out
}

/// Closed interval `[lo, hi] / 2^FRAC_BITS` containing a value in `[0, 1]`.
///
/// Every operation rounds outward, so the true value never leaves the
/// interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicInterval {
    lo: BigUint,
    hi: BigUint,
}

pub const FRAC_BITS: u64 = 256;

impl DyadicInterval {
    fn unit() -> BigUint {
        BigUint::one() << FRAC_BITS
    }

    /// The exact point `1/2`.
    pub fn half() -> Self {
        let h = BigUint::one() << (FRAC_BITS - 1);
        DyadicInterval {
            lo: h.clone(),
            hi: h,
        }
    }

    fn floor_mul(a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) >> FRAC_BITS
    }

    fn ceil_mul(a: &BigUint, b: &BigUint) -> BigUint {
        let prod = a * b;
        let q: BigUint = &prod >> FRAC_BITS;
        if (&q << FRAC_BITS) == prod {
            q
        } else {
            q + 1u32
        }
    }

    /// `x -> x^2`.
    pub fn square(&self) -> Self {
        DyadicInterval {
            lo: Self::floor_mul(&self.lo, &self.lo),
            hi: Self::ceil_mul(&self.hi, &self.hi),
        }
    }

    /// `x -> 1 - (1 - x)^2`.
    pub fn dual_square(&self) -> Self {
        let one = Self::unit();
        let c_lo = &one - &self.hi;
        let c_hi = &one - &self.lo;
        let sq_lo = Self::floor_mul(&c_lo, &c_lo);
        let sq_hi = Self::ceil_mul(&c_hi, &c_hi);
        DyadicInterval {
            lo: &one - sq_hi,
            hi: one - sq_lo,
        }
    }

    pub fn apply(&self, bit: Bit) -> Self {
        match bit {
            Bit::Zero => self.square(),
            Bit::One => self.dual_square(),
        }
    }

    /// Position of the interval relative to `1/2`; `None` if it straddles.
    pub fn cmp_half(&self) -> Option<Ordering> {
        let h = BigUint::one() << (FRAC_BITS - 1);
        if self.hi < h {
            Some(Ordering::Less)
        } else if self.lo > h {
            Some(Ordering::Greater)
        } else if self.lo == h && self.hi == h {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Position relative to an arbitrary threshold given as a fixed-point
    /// numerator; `None` if it straddles.
    pub fn cmp_fixed(&self, threshold: &BigUint) -> Option<Ordering> {
        if &self.hi < threshold {
            Some(Ordering::Less)
        } else if &self.lo > threshold {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn width(&self) -> BigUint {
        &self.hi - &self.lo
    }

    pub fn midpoint_f64(&self) -> f64 {
        let mid: BigUint = (&self.lo + &self.hi) >> 1u32;
        // keep the top 64 bits
        let shifted: BigUint = mid >> (FRAC_BITS - 64);
        shifted.to_f64().unwrap_or(0.0) / 2f64.powi(64)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // to_f64 on huge numerators and denominators can overflow to inf/inf
    let n_bits = r.numer().bits() as i64;
    let d_bits = r.denom().bits() as i64;
    let shift = (n_bits.max(d_bits) - 1000).max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::eval_word;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_words_exact() {
        let w = PolarWord::parse("01").unwrap();
        assert_eq!(eval_word_exact(&w, &q(1, 2), 24).unwrap(), q(7, 16));
        let w = PolarWord::parse("011").unwrap();
        assert_eq!(eval_word_exact(&w, &q(1, 2), 24).unwrap(), q(175, 256));
        assert_eq!(
            eval_word_exact(&PolarWord::empty(), &q(1, 3), 24).unwrap(),
            q(1, 3)
        );
    }

    #[test]
    fn five_letter_word_has_denominator_two_to_the_32() {
        let w = PolarWord::from_bits("01011").unwrap();
        let v = eval_word_exact(&w, &q(1, 2), 24).unwrap();
        assert_eq!(v.denom(), &(BigInt::one() << 32u32));
        assert!((rational_to_f64(&v) - eval_word(&w, 0.5)).abs() < 1e-12);
        assert!((rational_to_f64(&v) - 0.5725143698509783).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_integer_and_negative_exponents() {
        let w = PolarWord::parse("0^1.5").unwrap();
        assert!(matches!(
            eval_word_exact(&w, &q(1, 2), 24),
            Err(Error::NonIntegerExponent(_))
        ));
        let w = PolarWord::parse("1^-2").unwrap();
        assert!(eval_word_exact(&w, &q(1, 2), 24).is_err());
        let w = PolarWord::parse("0^30").unwrap();
        assert!(matches!(
            eval_word_exact(&w, &q(1, 2), 24),
            Err(Error::ExactCapExceeded { total: 30, cap: 24 })
        ));
    }

    #[test]
    fn interval_encloses_exact_value() {
        let bits = [Bit::Zero, Bit::One, Bit::Zero, Bit::One, Bit::One, Bit::One];
        let exact = exact_prefix_values(&bits, &q(1, 2));
        let mut iv = DyadicInterval::half();
        for (bit, ex) in bits.iter().zip(exact.iter()) {
            iv = iv.apply(*bit);
            let f = rational_to_f64(ex);
            assert!((iv.midpoint_f64() - f).abs() < 1e-15);
            let want = if ex < &q(1, 2) {
                Ordering::Less
            } else {
                Ordering::Greater
            };
            assert_eq!(iv.cmp_half(), Some(want));
        }
    }

    #[test]
    fn rational_to_f64_handles_huge_denominators() {
        let w = PolarWord::from_bits("0101101011").unwrap();
        let v = eval_word_exact(&w, &q(1, 2), 24).unwrap();
        assert!(v.denom().bits() > 1000);
        assert!((rational_to_f64(&v) - eval_word(&w, 0.5)).abs() < 1e-12);
    }
}
