//! Certified rational enclosures for the few irrational quantities that show
//! up on the right-hand side of verified inequalities (`ln 2`, `ln(1/p)`,
//! `n^{log2 6}`, `q^{-k}`). Every bound is a directed truncation of a series
//! with an explicit tail estimate, so an enclosure is always sound: the true
//! value lies in `[lo, hi]`. Intermediate quantities are rounded to dyadic
//! rationals (192 fractional bits) in the safe direction, which keeps digit
//! counts bounded without ever invalidating an enclosure. Verdicts are
//! three-valued: an inequality passes only against the sound side of the
//! enclosure, and a comparison that falls inside the enclosure width is
//! reported inconclusive, never guessed.

use crate::rat::Rat;
use num::bigint::BigInt;
use num::{Integer, One};

/// Fractional bits kept by directed rounding.
const PREC: u32 = 192;

fn floor_dyadic(x: &Rat, bits: u32) -> Rat {
    let scaled: BigInt = (x.numer() << bits).div_floor(x.denom());
    Rat::from_big(num::BigRational::new(scaled, BigInt::one() << bits))
}

fn ceil_dyadic(x: &Rat, bits: u32) -> Rat {
    let scaled: BigInt = (x.numer() << bits).div_ceil(x.denom());
    Rat::from_big(num::BigRational::new(scaled, BigInt::one() << bits))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: Rat,
    pub hi: Rat,
}

impl Enclosure {
    pub fn exact(x: Rat) -> Self {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    fn rounded(lo: Rat, hi: Rat) -> Enclosure {
        Enclosure {
            lo: floor_dyadic(&lo, PREC),
            hi: ceil_dyadic(&hi, PREC),
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure::rounded(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    /// Product of enclosures of nonnegative quantities.
    pub fn mul_nonneg(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Enclosure::rounded(&self.lo * &other.lo, &self.hi * &other.hi)
    }

    /// Quotient of enclosures of positive quantities.
    pub fn div_pos(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(other.lo.is_positive());
        Enclosure::rounded(&self.lo / &other.hi, &self.hi / &other.lo)
    }

    pub fn scale(&self, c: &Rat) -> Enclosure {
        debug_assert!(!c.is_negative());
        Enclosure {
            lo: &self.lo * c,
            hi: &self.hi * c,
        }
    }
}

/// Three-valued verdict of `lhs <= rhs` where `rhs` is an enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

pub fn le_verdict(lhs: &Rat, rhs: &Enclosure) -> Verdict {
    if lhs <= &rhs.lo {
        Verdict::Pass
    } else if lhs > &rhs.hi {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

fn pow2(k: u32) -> Rat {
    Rat::from_big(num::BigRational::from_integer(BigInt::one() << k))
}

/// `ln 2` via `sum_{k>=1} 1/(k 2^k)`; the tail beyond `K` terms is below
/// `2^-K / (K+1)`.
pub fn ln2(terms: u32) -> Enclosure {
    let mut lo = Rat::zero();
    for k in 1..=terms {
        lo += Rat::one() / (Rat::int(k as i64) * pow2(k));
    }
    let tail = (Rat::one() / pow2(terms)) / Rat::int(terms as i64 + 1);
    Enclosure::rounded(lo.clone(), lo + tail)
}

/// `ln x` for rational `x >= 1`. Range-reduces `x = 2^e * m` with
/// `m in [1, 2)` and evaluates `ln m = 2 atanh((m-1)/(m+1))`, whose argument
/// lies in `[0, 1/3)` so the series converges geometrically. Series terms
/// are truncated dyadically in the safe direction for each endpoint.
pub fn ln(x: &Rat, terms: u32) -> Enclosure {
    assert!(x >= &Rat::one(), "ln enclosure requires x >= 1");
    if x == &Rat::one() {
        return Enclosure::exact(Rat::zero());
    }
    let two = Rat::int(2);
    let mut m = x.clone();
    let mut e = 0u32;
    while m >= two {
        m = m / &two;
        e += 1;
    }
    // ln m, m in [1,2)
    let z = (&m - Rat::one()) / (&m + Rat::one());
    let z2 = &z * &z;
    let mut sum_lo = Rat::zero();
    let mut sum_hi = Rat::zero();
    let mut zp_lo = floor_dyadic(&z, PREC);
    let mut zp_hi = ceil_dyadic(&z, PREC);
    for k in 0..terms {
        let den = Rat::int(2 * k as i64 + 1);
        sum_lo = floor_dyadic(&(&sum_lo + &(&zp_lo / &den)), PREC);
        sum_hi = ceil_dyadic(&(&sum_hi + &(&zp_hi / &den)), PREC);
        zp_lo = floor_dyadic(&(&zp_lo * &z2), PREC);
        zp_hi = ceil_dyadic(&(&zp_hi * &z2), PREC);
    }
    // remaining terms: sum_{k>K} z^{2k+1}/(2k+1) <= z^{2K+3} / ((2K+3)(1-z^2))
    let tail = &zp_hi * &z2 / (Rat::int(2 * terms as i64 + 1) * (Rat::one() - &z2));
    let ln_m = Enclosure::rounded(&sum_lo * &two, (&sum_hi + &tail) * &two);
    if e == 0 {
        ln_m
    } else {
        ln_m.add(&ln2(terms + 16).scale(&Rat::int(e as i64)))
    }
}

/// `exp(x)` for an enclosure of a nonnegative argument, via the Taylor
/// series with an explicit geometric tail bound (requires `x < terms/2`).
pub fn exp(x: &Enclosure, terms: u32) -> Enclosure {
    assert!(!x.lo.is_negative(), "exp enclosure requires x >= 0");
    assert!(
        x.hi < Rat::new(terms as i64, 2),
        "increase term count for exp enclosure"
    );
    let mut sum_lo = Rat::one();
    let mut term_lo = Rat::one();
    let mut sum_hi = Rat::one();
    let mut term_hi = Rat::one();
    for k in 1..=terms {
        let den = Rat::int(k as i64);
        term_lo = floor_dyadic(&(&term_lo * &x.lo / &den), PREC);
        term_hi = ceil_dyadic(&(&term_hi * &x.hi / &den), PREC);
        sum_lo = floor_dyadic(&(&sum_lo + &term_lo), PREC);
        sum_hi = ceil_dyadic(&(&sum_hi + &term_hi), PREC);
    }
    // next term ratio is at most x/(terms+1) < 1/2, so tail <= 2 * next term
    let next = &term_hi * &x.hi / Rat::int(terms as i64 + 1);
    let tail = &next * Rat::int(2);
    Enclosure::rounded(sum_lo, sum_hi + tail)
}

/// `base^expo` for rational `base >= 1` and nonnegative `expo`, as
/// `exp(expo * ln base)`.
pub fn pow_pos(base: &Rat, expo: &Enclosure, terms: u32) -> Enclosure {
    assert!(base >= &Rat::one());
    assert!(!expo.lo.is_negative());
    if base == &Rat::one() {
        return Enclosure::exact(Rat::one());
    }
    let lnb = ln(base, terms);
    let arg = lnb.mul_nonneg(expo);
    exp(&arg, terms.max(64))
}

/// `n^{log2 6}` for an integer ground-set size `n >= 1`.
pub fn pow_log2_6(n: u32, terms: u32) -> Enclosure {
    assert!(n >= 1);
    if n == 1 {
        return Enclosure::exact(Rat::one());
    }
    // log2 6 = ln 6 / ln 2
    let log26 = ln(&Rat::int(6), terms).div_pos(&ln2(terms));
    pow_pos(&Rat::int(n as i64), &log26, terms)
}

pub const DEFAULT_TERMS: u32 = 48;

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_encloses(enc: &Enclosure, val: f64, max_width: f64) {
        assert!(enc.lo.to_f64() <= val + 1e-13, "lo {} > {}", enc.lo, val);
        assert!(enc.hi.to_f64() >= val - 1e-13, "hi {} < {}", enc.hi, val);
        assert!(
            enc.width().to_f64() < max_width,
            "width {}",
            enc.width().to_f64()
        );
    }

    #[test]
    fn ln2_digits() {
        assert_encloses(&ln2(64), std::f64::consts::LN_2, 1e-18);
    }

    #[test]
    fn ln_values() {
        assert_encloses(&ln(&Rat::int(3), 48), 3f64.ln(), 1e-18);
        assert_encloses(&ln(&Rat::int(6), 48), 6f64.ln(), 1e-18);
        assert_encloses(&ln(&Rat::new(7, 2), 48), 3.5f64.ln(), 1e-18);
        assert_eq!(ln(&Rat::one(), 48), Enclosure::exact(Rat::zero()));
    }

    #[test]
    fn exp_values() {
        assert_encloses(&exp(&Enclosure::exact(Rat::one()), 40), std::f64::consts::E, 1e-18);
        assert_encloses(&exp(&Enclosure::exact(Rat::new(5, 2)), 48), 2.5f64.exp(), 1e-15);
        assert_encloses(&exp(&Enclosure::exact(Rat::zero()), 16), 1.0, 1e-30);
    }

    #[test]
    fn power_values() {
        // 2^{log2 6} = 6 and 3^{log2 6} = 17.1116...
        assert_encloses(&pow_log2_6(2, 48), 6.0, 1e-10);
        let three = pow_log2_6(3, 48);
        assert_encloses(&three, 3f64.powf(6f64.log2()), 1e-9);
        assert_encloses(&pow_log2_6(1, 48), 1.0, 1e-30);
    }

    #[test]
    fn verdicts() {
        let enc = Enclosure {
            lo: Rat::new(1, 2),
            hi: Rat::new(2, 3),
        };
        assert_eq!(le_verdict(&Rat::new(1, 3), &enc), Verdict::Pass);
        assert_eq!(le_verdict(&Rat::int(1), &enc), Verdict::Fail);
        assert_eq!(le_verdict(&Rat::new(3, 5), &enc), Verdict::Inconclusive);
    }
}
