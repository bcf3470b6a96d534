//! Coefficientwise verification of the Möbius sieving identities and the
//! exact L¹ report for G_A and L_A.
//!
//! Left sides are assembled from the truncated series of `fourier`; right
//! sides from the closed forms in the characters χ, η and the labels ε.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::{BigRational, Ratio};
use num::{CheckedAdd, CheckedMul, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcs::ArcSet;
use crate::arith::{
    big_serde, chi3, eta, gamma4, mobius, p_rough, prime_factors, rat_serde, sieve_rough, sieve_rough_upto,
    sin_pi_sixths, smooth_squarefree, smooth_squarefree_odd, squarefree_below_p, GaussRat, Prefactor, Rational,
    SieveContext,
};
use crate::dilation::{exact_l1, PiecewiseConstantFn, DEFAULT_BREAKPOINT_CAP};
use crate::error::{Error, Result};
use crate::fourier::{max_abs_defect, omega_t, series_truncated, Kind, TrigPoly};
use crate::sets::{structure, IntegerSet};

type Q128 = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Sec2F,
    GammaSieved,
    Lambda1,
    G1,
    Final,
}

impl IdentityId {
    pub const ALL: [IdentityId; 5] =
        [IdentityId::Sec2F, IdentityId::GammaSieved, IdentityId::Lambda1, IdentityId::G1, IdentityId::Final];

    pub fn prefactor(self) -> Prefactor {
        match self {
            IdentityId::Sec2F | IdentityId::GammaSieved => Prefactor::Sqrt3OverPi,
            IdentityId::Lambda1 | IdentityId::G1 => Prefactor::OneOverPi,
            IdentityId::Final => Prefactor::One,
        }
    }
}

/// Exact coefficient accumulator with 128-bit rationals.
#[derive(Debug, Clone, Default)]
struct Acc {
    map: BTreeMap<i64, (Q128, Q128)>,
}

fn overflow() -> Error {
    Error::Overflow("128-bit coefficient accumulator".into())
}

impl Acc {
    fn add(&mut self, n: i64, re: Q128, im: Q128) -> Result<()> {
        let e = self.map.entry(n).or_insert((Q128::zero(), Q128::zero()));
        e.0 = e.0.checked_add(&re).ok_or_else(overflow)?;
        e.1 = e.1.checked_add(&im).ok_or_else(overflow)?;
        Ok(())
    }

    fn merge(mut self, other: Acc) -> Result<Acc> {
        for (n, (re, im)) in other.map {
            self.add(n, re, im)?;
        }
        Ok(self)
    }

    fn scaled(self, re_s: Q128, im_s: Q128) -> Result<Acc> {
        // (a + bi)(c + di)
        let mut out = Acc::default();
        for (n, (a, b)) in self.map {
            let re = a.checked_mul(&re_s).zip(b.checked_mul(&im_s)).map(|(x, y)| x - y).ok_or_else(overflow)?;
            let im = a.checked_mul(&im_s).zip(b.checked_mul(&re_s)).map(|(x, y)| x + y).ok_or_else(overflow)?;
            out.add(n, re, im)?;
        }
        Ok(out)
    }

    fn into_poly(self, prefactor: Prefactor) -> TrigPoly {
        let to_big = |q: Q128| BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()));
        let mut p = TrigPoly::new(prefactor);
        for (n, (re, im)) in self.map {
            p.add_term(n, &GaussRat::new(to_big(re), to_big(im)));
        }
        p
    }
}

fn q(n: i64, d: i64) -> Q128 {
    Q128::new(n as i128, d as i128)
}

fn small(c: &BigRational) -> Result<Q128> {
    match (c.numer().to_i128(), c.denom().to_i128()) {
        (Some(n), Some(d)) => Ok(Q128::new(n, d)),
        _ => Err(overflow()),
    }
}

fn base_table(p: &TrigPoly) -> Result<Vec<(i64, Q128, Q128)>> {
    p.coeffs().iter().map(|(&n, c)| Ok((n, small(&c.re)?, small(&c.im)?))).collect()
}

/// Σ_t w(t) Σ_{m ∈ mults} g(t·m·x), truncated at |frequency| ≤ X, for g given
/// by its coefficient table.
fn sieve_sum(weights: &[(i64, Q128)], mults: &[i64], base: &[(i64, Q128, Q128)], x: i64) -> Result<Acc> {
    weights
        .par_iter()
        .try_fold(Acc::default, |mut acc, &(t, w)| {
            for &m in mults {
                let step = t * m;
                if step > x {
                    continue;
                }
                for &(n, re, im) in base {
                    let f = n * step;
                    if f.abs() > x {
                        continue;
                    }
                    acc.add(f, re * w, im * w)?;
                }
            }
            Ok(acc)
        })
        .try_reduce(Acc::default, |a, b| a.merge(b))
}

fn as_i64(a: &IntegerSet) -> Result<Vec<i64>> {
    a.iter().map(|v| i64::try_from(v).map_err(|_| Error::Overflow(format!("element {v} exceeds 64 bits")))).collect()
}

fn gamma_weights(ctx: &SieveContext, x: i64) -> Result<Vec<(i64, Q128)>> {
    Ok(smooth_squarefree(ctx, x as u64)?
        .into_iter()
        .map(|t| (t as i64, q(mobius(t) as i64 * chi3(t) as i64, t as i64)))
        .collect())
}

fn lambda_weights(ctx: &SieveContext, x: i64) -> Result<Vec<(i64, Q128)>> {
    Ok(smooth_squarefree_odd(ctx, x as u64)?.into_iter().map(|t| (t as i64, q(mobius(t) as i64, t as i64))).collect())
}

fn sec2_weights(ctx: &SieveContext, x: i64) -> Result<Vec<(i64, Q128)>> {
    Ok(squarefree_below_p(ctx, x as u64)?
        .into_iter()
        .map(|k| (k as i64, q(mobius(k) as i64 * chi3(k) as i64, k as i64)))
        .collect())
}

fn gamma_lhs(a: &[i64], ctx: &SieveContext, x: i64) -> Result<Acc> {
    let base = base_table(&series_truncated(Kind::Gamma, x as u64)?.sqrt3)?;
    sieve_sum(&gamma_weights(ctx, x)?, a, &base, x)
}

fn lambda_lhs(a: &[i64], ctx: &SieveContext, x: i64) -> Result<Acc> {
    let base = base_table(&series_truncated(Kind::Lambda, x as u64)?.rational)?;
    sieve_sum(&lambda_weights(ctx, x)?, a, &base, x)
}

/// Left side of an identity as an exact truncated table.
pub fn sieve_lhs(id: IdentityId, a: &IntegerSet, ctx: &SieveContext, x: u64) -> Result<TrigPoly> {
    ctx.validate()?;
    if x == 0 {
        return Err(Error::Domain("cutoff X must be at least 1".into()));
    }
    let xi = x as i64;
    let av = as_i64(a)?;
    let acc = match id {
        IdentityId::Sec2F => {
            let base = base_table(&series_truncated(Kind::F, x)?.sqrt3)?;
            sieve_sum(&sec2_weights(ctx, xi)?, &av, &base, xi)?
        }
        IdentityId::GammaSieved => gamma_lhs(&av, ctx, xi)?,
        IdentityId::Lambda1 | IdentityId::G1 => lambda_lhs(&av, ctx, xi)?,
        IdentityId::Final => {
            // −(2√3π/3)·Γ-sieve(A) + (2√3π/3)·Γ-sieve(3A) + iπ·Λ-sieve(2A); the
            // constants turn √3/π and 1/π units into plain numbers
            let tri: Vec<i64> = av.iter().map(|m| 3 * m).collect();
            let dbl: Vec<i64> = av.iter().map(|m| 2 * m).collect();
            let g = gamma_lhs(&av, ctx, xi)?.scaled(q(-2, 1), Q128::zero())?;
            let g3 = gamma_lhs(&tri, ctx, xi)?.scaled(q(2, 1), Q128::zero())?;
            let l = lambda_lhs(&dbl, ctx, xi)?.scaled(Q128::zero(), q(1, 1))?;
            g.merge(g3)?.merge(l)?
        }
    };
    Ok(acc.into_poly(id.prefactor()))
}

fn add_cos(acc: &mut Acc, f: i64, c: Q128, x: i64) -> Result<()> {
    // c·cos(2πfx) = (c/2)(e(fx) + e(−fx))
    if f.abs() <= x {
        let h = c / 2;
        acc.add(f, h, Q128::zero())?;
        acc.add(-f, h, Q128::zero())?;
    }
    Ok(())
}

fn add_sin(acc: &mut Acc, f: i64, c: Q128, x: i64) -> Result<()> {
    // c·sin(2πfx) = (c/2i)(e(fx) − e(−fx))
    if f.abs() <= x {
        let h = c / 2;
        acc.add(f, Q128::zero(), -h)?;
        acc.add(-f, Q128::zero(), h)?;
    }
    Ok(())
}

/// Right side of an identity from its closed form.
pub fn sieve_rhs(id: IdentityId, a: &IntegerSet, ctx: &SieveContext, x: u64) -> Result<TrigPoly> {
    ctx.validate()?;
    if x == 0 {
        return Err(Error::Domain("cutoff X must be at least 1".into()));
    }
    let xi = x as i64;
    let av = as_i64(a)?;
    let mut acc = Acc::default();
    match id {
        IdentityId::Sec2F => {
            // −(√3/π) Σ_m Σ_{n ∈ 𝒩} χ(n)/n cos(2πmnx), 𝒩 = prime factors ≥ P
            for &m in &av {
                for n in 1..=xi / m {
                    if p_rough(n as u64, ctx) {
                        add_cos(&mut acc, n * m, q(-(chi3(n as u64) as i64), n), xi)?;
                    }
                }
            }
        }
        IdentityId::GammaSieved => {
            // −(√3/π) Σ_m (cos(4πmx) + Σ_{n ∈ 𝒩₁∖{1}} χ(n)/n cos(4πnmx))
            let rough = sieve_rough_upto(ctx, (x / 2).max(1))?;
            for &m in &av {
                add_cos(&mut acc, 2 * m, q(-1, 1), xi)?;
                for &n in rough.iter().skip_while(|&&n| n == 1) {
                    let n = n as i64;
                    if 2 * n * m > xi {
                        break;
                    }
                    add_cos(&mut acc, 2 * n * m, q(-(chi3(n as u64) as i64), n), xi)?;
                }
            }
        }
        IdentityId::Lambda1 => {
            // (4/π) Σ_m (½ sin(2πmx) − ½ sin(6πmx) + Σ_{n ∈ 𝒩₁ ∪ 3𝒩₁, n ∉ {1,3}} η(n)/n sin(2πnmx))
            for &m in &av {
                add_sin(&mut acc, m, q(2, 1), xi)?;
                add_sin(&mut acc, 3 * m, q(-2, 1), xi)?;
                for n in 2..=xi / m {
                    if n == 3 {
                        continue;
                    }
                    let nu = n as u64;
                    let in_class = sieve_rough(nu, ctx) || (nu.is_multiple_of(3) && sieve_rough(nu / 3, ctx));
                    if in_class {
                        let e = eta(nu, ctx)?;
                        add_sin(&mut acc, n * m, q(4 * e.numer(), e.denom() * n), xi)?;
                    }
                }
            }
        }
        IdentityId::G1 | IdentityId::Final => {
            if !a.is_empty() {
                let st = structure(a, crate::sets::default_threshold())?;
                let rough = sieve_rough_upto(ctx, x)?;
                for (&b, &e) in st.symdiff.iter().zip(&st.epsilon) {
                    let m = i64::try_from(b).map_err(|_| Error::Overflow(format!("{b}")))?;
                    let e = e as i64;
                    if id == IdentityId::G1 {
                        // (2/π) Σ_{m∈B} ε(m)(sin(2πmx) + Σ_{n ∈ 𝒩₁∖{1}} sin(2πnmx)/n)
                        add_sin(&mut acc, m, q(2 * e, 1), xi)?;
                        for &n in rough.iter().skip(1) {
                            let n = n as i64;
                            if n * m > xi {
                                break;
                            }
                            add_sin(&mut acc, n * m, q(2 * e, n), xi)?;
                        }
                    } else {
                        // Σ_{m∈B} Σ_{n ∈ 𝒩₁} (ε(m)/n)((χ(n)+1)e(2nmx) + (χ(n)−1)e(−2nmx))
                        for &n in &rough {
                            let n = n as i64;
                            let f = 2 * n * m;
                            if f > xi {
                                break;
                            }
                            let c = chi3(n as u64) as i64;
                            acc.add(f, q(e * (c + 1), n), Q128::zero())?;
                            acc.add(-f, q(e * (c - 1), n), Q128::zero())?;
                        }
                    }
                }
            }
        }
    }
    Ok(acc.into_poly(id.prefactor()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "X")]
    pub x: u64,
    pub equal: bool,
    #[serde(with = "big_serde")]
    pub defect: BigRational,
    pub witness: Option<i64>,
    pub terms: usize,
}

pub fn verify_identity(id: IdentityId, a: &IntegerSet, ctx: &SieveContext, x: u64) -> Result<IdentityReport> {
    let lhs = sieve_lhs(id, a, ctx, x)?;
    let rhs = sieve_rhs(id, a, ctx, x)?;
    let (defect, witness) = max_abs_defect(&lhs, &rhs)?;
    Ok(IdentityReport {
        identity_id: id,
        q: ctx.q,
        p: ctx.p,
        x,
        equal: defect.is_zero(),
        defect,
        witness,
        terms: lhs.coeffs().len(),
    })
}

/// The inner Möbius sum over odd m ∈ 𝒩₂ dividing n, grouped by the 3-adic
/// valuation of n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerSum {
    /// 3 ∤ n.
    #[serde(with = "rat_serde")]
    pub i1: Rational,
    /// 3 ‖ n.
    #[serde(with = "rat_serde")]
    pub i2: Rational,
    /// 9 | n.
    #[serde(with = "rat_serde")]
    pub i3: Rational,
    #[serde(with = "rat_serde")]
    pub total: Rational,
}

/// `Σ_{m odd ∈ 𝒩₂, m | n} μ(m) γ(n/m) sin(nπ/(6m))`.
///
/// Only odd m enter: with n/m even, γ(n/m) = 0, and the Λ-side sieve runs over
/// odd t.
pub fn inner_sum_decomposition(n: u64, ctx: &SieveContext) -> Result<InnerSum> {
    ctx.validate()?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let small: Vec<u64> = prime_factors(n).into_iter().filter(|&p| p != 2 && p <= ctx.q).collect();
    let mut total = Rational::zero();
    for mask in 0u32..(1 << small.len()) {
        let mut m = 1u64;
        for (i, &p) in small.iter().enumerate() {
            if mask >> i & 1 == 1 {
                m *= p;
            }
        }
        let j = n / m;
        let g = gamma4(j) as i64;
        if g == 0 {
            continue;
        }
        // j odd, so sin(jπ/6) ∈ {±1/2, ±1}
        let s = sin_pi_sixths(j as i64);
        debug_assert!(!s.sqrt3);
        total += s.r * (mobius(m) as i64 * g);
    }
    let zero = Rational::zero();
    let (i1, i2, i3) = if !n.is_multiple_of(3) {
        (total, zero, zero)
    } else if !n.is_multiple_of(9) {
        (zero, total, zero)
    } else {
        (zero, zero, total)
    };
    Ok(InnerSum { i1, i2, i3, total })
}

/// Exact rational with a float rendering, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    #[serde(with = "big_serde")]
    pub exact: BigRational,
    pub approx: f64,
}

impl ExactValue {
    pub fn new(exact: BigRational) -> Self {
        let approx = crate::arith::big_to_f64(&exact);
        ExactValue { exact, approx }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Report {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: u64,
    pub g_a: ExactValue,
    pub l_a: ExactValue,
    pub f1: ExactValue,
    pub f2: ExactValue,
    /// max_x F_t and a maximizing x for t = 1, 2.
    pub max_f: [ExactValue; 2],
    #[serde(with = "rat_serde_pair")]
    pub argmax_f: [Rational; 2],
    /// Σ_{t∈𝒩₂} 1/t = Π_{p≤Q}(1 + 1/p), and the same over odd t.
    pub mertens: ExactValue,
    pub mertens_odd: ExactValue,
    /// Triangle-inequality ceiling on ‖(final) left side‖₁ from ‖G_A‖₁, ‖L_A‖₁.
    pub final_lhs_ceiling: f64,
    pub winning_t: u8,
    pub max_half_l1_holds: [bool; 2],
    pub headline: ExactValue,
    /// max{‖G_A‖₁, ‖L_A‖₁} / (log N / log log N), for N ≥ 3.
    pub ratio_to_log_over_loglog: Option<f64>,
}

mod rat_serde_pair {
    use crate::arith::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &[Rational; 2], s: S) -> Result<S::Ok, S::Error> {
        [[*r[0].numer(), *r[0].denom()], [*r[1].numer(), *r[1].denom()]].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 2], D::Error> {
        let v = <[[i64; 2]; 2]>::deserialize(d)?;
        if v[0][1] == 0 || v[1][1] == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok([Rational::new(v[0][0], v[0][1]), Rational::new(v[1][0], v[1][1])])
    }
}

fn big_of(r: Rational) -> BigRational {
    crate::arith::big(r)
}

/// Step functions G_A = Σ Γ(mx), L_A = Σ Λ(mx), F_t = Σ f_t(mx).
pub fn step_functions(a: &IntegerSet) -> Result<[PiecewiseConstantFn; 4]> {
    let av = a.to_u64()?;
    let (o1, o2) = (omega_t(1)?, omega_t(2)?);
    let n = av.len() as i64;
    let cap = DEFAULT_BREAKPOINT_CAP;
    let sys = |s: &[(&ArcSet, i64)], c: Rational| PiecewiseConstantFn::weighted(&av, s, c, cap);
    Ok([
        sys(&[(&o1, 1), (&o2, 1)], Rational::new(-n, 3))?,
        sys(&[(&o1, 1), (&o2, -1)], Rational::zero())?,
        sys(&[(&o1, 1)], Rational::new(-n, 6))?,
        sys(&[(&o2, 1)], Rational::new(-n, 6))?,
    ])
}

pub fn l1_lower_report(a: &IntegerSet, ctx: &SieveContext) -> Result<L1Report> {
    ctx.validate()?;
    let [g, l, f1, f2] = step_functions(a)?;
    let (g1n, l1n, f1n, f2n) = (exact_l1(&g), exact_l1(&l), exact_l1(&f1), exact_l1(&f2));
    let (x1, m1) = f1.max();
    let (x2, m2) = f2.max();
    let half = BigRational::new(1.into(), 2.into());
    let holds = [big_of(m1) >= &half * &f1n, big_of(m2) >= &half * &f2n];
    let mut mertens = Rational::from_integer(1);
    let mut mertens_odd = Rational::from_integer(1);
    for p in crate::arith::primes_upto(ctx.q) {
        let factor = Rational::new(p as i64 + 1, p as i64);
        mertens *= factor;
        if p != 2 {
            mertens_odd *= factor;
        }
    }
    let to_f = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
    let gf = crate::arith::big_to_f64(&g1n);
    let lf = crate::arith::big_to_f64(&l1n);
    let ceiling = 4.0 * 3f64.sqrt() * std::f64::consts::PI / 3.0 * to_f(mertens) * gf
        + std::f64::consts::PI * to_f(mertens_odd) * lf;
    let headline = if g1n >= l1n { g1n.clone() } else { l1n.clone() };
    let n = a.len();
    let ratio = (n >= 3).then(|| {
        let ln = (n as f64).ln();
        crate::arith::big_to_f64(&headline) / (ln / ln.ln())
    });
    Ok(L1Report {
        n,
        q: ctx.q,
        g_a: ExactValue::new(g1n),
        l_a: ExactValue::new(l1n),
        f1: ExactValue::new(f1n),
        f2: ExactValue::new(f2n),
        max_f: [ExactValue::new(big_of(m1)), ExactValue::new(big_of(m2))],
        argmax_f: [x1, x2],
        mertens: ExactValue::new(big_of(mertens)),
        mertens_odd: ExactValue::new(big_of(mertens_odd)),
        final_lhs_ceiling: ceiling,
        winning_t: if m1 >= m2 { 1 } else { 2 },
        max_half_l1_holds: holds,
        headline: ExactValue::new(headline),
        ratio_to_log_over_loglog: ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "X")]
    pub x: u64,
    pub l2: f64,
    /// |A|·P^{−1/2}.
    pub scale: f64,
    /// l2 / scale, the measured constant.
    pub constant: f64,
}

/// L² norm of Σ_{m∈A} Σ_{n∈𝒩, n>1, nm≤X} χ(n)/n cos(2πmnx) (𝒩: prime factors ≥ P).
///
/// The e(Fx) coefficient is c_F = (1/2F)·Σ_{m|F} χ(F/m)·m, so each c_F·2F is
/// an exact integer.
pub fn sec2_tail_l2(a: &IntegerSet, ctx: &SieveContext, x: u64) -> Result<TailReport> {
    ctx.validate()?;
    let av = as_i64(a)?;
    let xi = x as i64;
    let mut num: BTreeMap<i64, i128> = BTreeMap::new();
    for &m in &av {
        for n in 2..=xi / m {
            if p_rough(n as u64, ctx) {
                let c = chi3(n as u64) as i128;
                if c != 0 {
                    *num.entry(n * m).or_insert(0) += c * m as i128;
                }
            }
        }
    }
    let sq: f64 = num
        .iter()
        .map(|(&f, &v)| {
            let c = v as f64 / (2.0 * f as f64);
            2.0 * c * c
        })
        .sum();
    let l2 = sq.sqrt();
    let scale = a.len() as f64 / (ctx.p as f64).sqrt();
    Ok(TailReport { p: ctx.p, x, l2, scale, constant: if scale > 0.0 { l2 / scale } else { 0.0 } })
}
