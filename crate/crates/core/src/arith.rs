//! Exact scalars, the small multiplicative characters, the Möbius function and
//! the smooth/rough integer classes used by the sieves.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::{BigRational, Ratio};
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Character mod 3: 1, -1, 0 for residues 1, 2, 0.
pub fn chi3(n: u64) -> i8 {
    match n % 3 {
        1 => 1,
        2 => -1,
        _ => 0,
    }
}

/// Character mod 4: 1 on 1 mod 4, -1 on 3 mod 4, 0 on even n.
pub fn gamma4(n: u64) -> i8 {
    match n % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// Distinct prime factors by trial division, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn mobius(mut n: u64) -> i8 {
    assert!(n >= 1, "mobius is defined on positive integers");
    let mut sign = 1i8;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

pub fn primes_upto(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Thresholds for the two sieves.
///
/// `q` separates smooth from rough integers in the Γ/Λ sieves and the density
/// diagnostics; `p` is the threshold of the f-sieve. The limits bound every
/// enumeration of rough or smooth numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveContext {
    pub q: u64,
    pub p: u64,
    pub n1_limit: u64,
    pub n2_limit: u64,
}

impl SieveContext {
    pub const DEFAULT_LIMIT: u64 = 50_000_000;

    pub fn new(q: u64, p: u64) -> Result<Self> {
        let ctx = SieveContext { q, p, n1_limit: Self::DEFAULT_LIMIT, n2_limit: Self::DEFAULT_LIMIT };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 3 {
            return Err(Error::InvalidContext(format!("Q = {} must be at least 3", self.q)));
        }
        if !is_prime(self.q) {
            return Err(Error::InvalidContext(format!("Q = {} is not prime", self.q)));
        }
        if !is_prime(self.p) {
            return Err(Error::InvalidContext(format!("P = {} is not prime", self.p)));
        }
        Ok(())
    }

    fn check_n1(&self, limit: u64) -> Result<()> {
        if limit > self.n1_limit {
            return Err(Error::Resource {
                what: "rough-number enumeration",
                cap: self.n1_limit as u128,
                required: limit as u128,
            });
        }
        Ok(())
    }
}

/// Squarefree integers in `[1, limit]` whose prime factors are all `<= bound`.
fn squarefree_smooth_upto(bound: u64, limit: u64, skip_two: bool) -> Vec<u64> {
    let mut out = vec![1u64];
    if limit == 0 {
        return Vec::new();
    }
    for p in primes_upto(bound) {
        if skip_two && p == 2 {
            continue;
        }
        let len = out.len();
        for i in 0..len {
            if let Some(v) = out[i].checked_mul(p) {
                if v <= limit {
                    out.push(v);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// The squarefree `Q`-smooth integers up to `limit` (contains 1 and 3).
pub fn smooth_squarefree(ctx: &SieveContext, limit: u64) -> Result<Vec<u64>> {
    ctx.validate()?;
    if limit > ctx.n2_limit {
        return Err(Error::Resource {
            what: "smooth-number enumeration",
            cap: ctx.n2_limit as u128,
            required: limit as u128,
        });
    }
    Ok(squarefree_smooth_upto(ctx.q, limit, false))
}

/// Odd members of [`smooth_squarefree`]: the sieving set of the Λ side.
///
/// The inner Möbius sum of the Λ sieve only collapses onto 𝒩₁ ∪ 3·𝒩₁ when the
/// sieve ranges over odd `t`; even `t` leave residues at `2·𝒩₁` and `6·𝒩₁`.
pub fn smooth_squarefree_odd(ctx: &SieveContext, limit: u64) -> Result<Vec<u64>> {
    ctx.validate()?;
    Ok(squarefree_smooth_upto(ctx.q, limit, true))
}

/// Squarefree integers up to `limit` generated by primes `< p` (the f-sieve set).
pub fn squarefree_below_p(ctx: &SieveContext, limit: u64) -> Result<Vec<u64>> {
    ctx.validate()?;
    Ok(squarefree_smooth_upto(ctx.p - 1, limit, false))
}

/// Every prime factor of `n` is `>= Q`. `is_rough(1)` holds vacuously.
pub fn is_rough(n: u64, ctx: &SieveContext) -> bool {
    prime_factors(n).iter().all(|&p| p >= ctx.q)
}

/// Every prime factor of `n` is `> Q`: membership in 𝒩₁ for the Γ/Λ sieves,
/// the exact complement of the generators of the smooth class.
pub fn sieve_rough(n: u64, ctx: &SieveContext) -> bool {
    prime_factors(n).iter().all(|&p| p > ctx.q)
}

/// Every prime factor of `n` is `>= P` (the f-sieve's surviving class).
pub fn p_rough(n: u64, ctx: &SieveContext) -> bool {
    prime_factors(n).iter().all(|&p| p >= ctx.p)
}

/// Members of 𝒩₁ (prime factors `> Q`) in `[1, limit]`, ascending.
pub fn sieve_rough_upto(ctx: &SieveContext, limit: u64) -> Result<Vec<u64>> {
    ctx.check_n1(limit)?;
    Ok(rough_upto(limit, ctx.q + 1))
}

/// Integers in `[1, limit]` with all prime factors `>= bound`.
pub fn rough_upto(limit: u64, bound: u64) -> Vec<u64> {
    if limit == 0 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut ok = vec![true; n + 1];
    ok[0] = false;
    for p in primes_upto(bound.saturating_sub(1).min(limit)) {
        let p = p as usize;
        let mut j = p;
        while j <= n {
            ok[j] = false;
            j += p;
        }
    }
    (1..=n).filter(|&i| ok[i]).map(|i| i as u64).collect()
}

/// η = 1/2 on 𝒩₁ and −3/2 on 3·𝒩₁ (𝒩₁ = prime factors `> Q`).
pub fn eta(n: u64, ctx: &SieveContext) -> Result<Rational> {
    ctx.validate()?;
    if n >= 1 && sieve_rough(n, ctx) {
        Ok(Rational::new(1, 2))
    } else if n.is_multiple_of(3) && n >= 3 && sieve_rough(n / 3, ctx) {
        Ok(Rational::new(-3, 2))
    } else {
        Err(Error::Domain(format!("{n} is in neither 𝒩₁ nor 3·𝒩₁ for Q = {}", ctx.q)))
    }
}

/// `sin(nπ/6)` as `r` or `r·√3` with `r` rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SinSixth {
    pub r: Rational,
    pub sqrt3: bool,
}

pub fn sin_pi_sixths(n: i64) -> SinSixth {
    let (num, den, sqrt3) = match n.rem_euclid(12) {
        0 | 6 => (0, 1, false),
        1 | 5 => (1, 2, false),
        2 | 4 => (1, 2, true),
        3 => (1, 1, false),
        7 | 11 => (-1, 2, false),
        8 | 10 => (-1, 2, true),
        9 => (-1, 1, false),
        _ => unreachable!(),
    };
    SinSixth { r: Rational::new(num, den), sqrt3: sqrt3 && num != 0 }
}

/// `sin(nπ/3)`.
pub fn sin_pi_thirds(n: i64) -> SinSixth {
    sin_pi_sixths(2 * n)
}

pub fn big(r: Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn big_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn big_frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator beyond f64 range individually
        let shift = r.denom().bits().max(r.numer().bits()) as i64 - 900;
        if shift <= 0 {
            return f64::NAN;
        }
        let n = (r.numer() >> shift as usize).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift as usize).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn ratio_pair(r: &BigRational) -> [String; 2] {
    [r.numer().to_string(), r.denom().to_string()]
}

/// Exact `a + b·i` with arbitrary-precision rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn imag(im: BigRational) -> Self {
        GaussRat { re: BigRational::zero(), im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        GaussRat { re: &self.re * s, im: &self.im * s }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        GaussRat { re: -self.im.clone(), im: self.re.clone() }
    }

    /// `max(|re|, |im|)`, the defect measure used by identity checks.
    pub fn max_abs_part(&self) -> BigRational {
        let a = self.re.abs();
        let b = self.im.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (big_to_f64(&self.re), big_to_f64(&self.im))
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        GaussRat { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<'a> AddAssign<&'a GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &'a GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        GaussRat { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.re, self.im)
    }
}

/// Symbolic constant multiplying a whole coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Prefactor {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "sqrt3/pi")]
    Sqrt3OverPi,
    #[serde(rename = "1/pi")]
    OneOverPi,
    #[serde(rename = "sqrt3/(2pi)")]
    Sqrt3OverTwoPi,
    #[serde(rename = "2/pi")]
    TwoOverPi,
}

/// Transcendental part of a prefactor; tables compare only within a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrefactorClass {
    pub sqrt3: bool,
    pub pi_power: i8,
}

impl Prefactor {
    /// `(rational scale, √3 present, power of π)`.
    pub fn parts(self) -> (Rational, bool, i8) {
        match self {
            Prefactor::One => (Rational::one(), false, 0),
            Prefactor::Sqrt3OverPi => (Rational::one(), true, -1),
            Prefactor::OneOverPi => (Rational::one(), false, -1),
            Prefactor::Sqrt3OverTwoPi => (Rational::new(1, 2), true, -1),
            Prefactor::TwoOverPi => (Rational::from_integer(2), false, -1),
        }
    }

    pub fn class(self) -> PrefactorClass {
        let (_, sqrt3, pi_power) = self.parts();
        PrefactorClass { sqrt3, pi_power }
    }

    pub fn value(self) -> f64 {
        let (r, s, p) = self.parts();
        let mut v = *r.numer() as f64 / *r.denom() as f64;
        if s {
            v *= 3f64.sqrt();
        }
        v * std::f64::consts::PI.powi(p as i32)
    }

    /// The unit-scale tag of a class, if the class is representable.
    pub fn canonical(class: PrefactorClass) -> Option<Prefactor> {
        match (class.sqrt3, class.pi_power) {
            (false, 0) => Some(Prefactor::One),
            (true, -1) => Some(Prefactor::Sqrt3OverPi),
            (false, -1) => Some(Prefactor::OneOverPi),
            _ => None,
        }
    }

    /// Ratio `self / other` when both lie in the same class.
    pub fn ratio_to(self, other: Prefactor) -> Result<Rational> {
        if self.class() != other.class() {
            return Err(Error::PrefactorMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(self.parts().0 / other.parts().0)
    }
}

/// Gaussian rational times a symbolic prefactor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactScalar {
    pub value: GaussRat,
    pub prefactor: Prefactor,
}

impl ExactScalar {
    pub fn new(value: GaussRat, prefactor: Prefactor) -> Self {
        ExactScalar { value, prefactor }
    }

    pub fn zero(prefactor: Prefactor) -> Self {
        ExactScalar { value: GaussRat::zero(), prefactor }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Re-express under another tag of the same class.
    pub fn in_prefactor(&self, target: Prefactor) -> Result<ExactScalar> {
        let r = self.prefactor.ratio_to(target)?;
        Ok(ExactScalar { value: self.value.scale(&big(r)), prefactor: target })
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let (re, im) = self.value.to_f64_pair();
        let s = self.prefactor.value();
        (re * s, im * s)
    }
}

/// Serde adapter writing a [`Rational`] as `[num, den]`.
pub mod rat_serde {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        [*r.numer(), *r.denom()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let [n, den] = <[i64; 2]>::deserialize(d)?;
        if den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(n, den))
    }
}

/// Serde adapter writing a [`BigRational`] as `["num", "den"]` decimal strings.
pub mod big_serde {
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        super::ratio_pair(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let [n, den] = <[String; 2]>::deserialize(d)?;
        let n: BigInt = n.parse().map_err(serde::de::Error::custom)?;
        let den: BigInt = den.parse().map_err(serde::de::Error::custom)?;
        if den == BigInt::from(0) {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(n, den))
    }
}
