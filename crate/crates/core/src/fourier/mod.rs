//! Exact Fourier data of the balanced arc functions and their Γ/Λ
//! combinations, plus a float grid engine for norms.
//!
//! Frequencies are in cycles: a table entry `c_n` stands for `c_n·e(nx)` with
//! `e(θ) = exp(2πiθ)`.

pub mod grid;

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arcs::{frac, r, ArcSet};
use crate::arith::{big, sin_pi_sixths, sin_pi_thirds, ExactScalar, GaussRat, Prefactor, Rational};
use crate::error::{Error, Result};

/// Sparse exact trigonometric polynomial under one symbolic prefactor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrigPoly {
    pub prefactor: Prefactor,
    coeffs: BTreeMap<i64, GaussRat>,
}

impl TrigPoly {
    pub fn new(prefactor: Prefactor) -> Self {
        TrigPoly { prefactor, coeffs: BTreeMap::new() }
    }

    pub fn add_term(&mut self, n: i64, c: &GaussRat) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(n).or_default();
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn get(&self, n: i64) -> GaussRat {
        self.coeffs.get(&n).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, GaussRat> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.coeffs.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// `c_{-n} = conj(c_n)` for every n.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|(&n, c)| self.get(-n) == c.conj())
    }

    pub fn scale(&self, s: &GaussRat) -> TrigPoly {
        let mut out = TrigPoly::new(self.prefactor);
        for (&n, c) in &self.coeffs {
            out.add_term(n, &(c * s));
        }
        out
    }

    /// Sum of two tables with matching prefactors.
    pub fn plus(&self, other: &TrigPoly) -> Result<TrigPoly> {
        if self.prefactor != other.prefactor {
            return Err(Error::PrefactorMismatch(format!("{:?} + {:?}", self.prefactor, other.prefactor)));
        }
        let mut out = self.clone();
        for (&n, c) in &other.coeffs {
            out.add_term(n, c);
        }
        Ok(out)
    }

    /// Same function expressed under another tag of the same class.
    pub fn in_prefactor(&self, target: Prefactor) -> Result<TrigPoly> {
        let ratio = big(self.prefactor.ratio_to(target)?);
        let mut out = TrigPoly::new(target);
        for (&n, c) in &self.coeffs {
            out.add_term(n, &c.scale(&ratio));
        }
        Ok(out)
    }

    /// Keeps frequencies with `keep(n)`.
    pub fn filter<F: Fn(i64) -> bool>(&self, keep: F) -> TrigPoly {
        TrigPoly {
            prefactor: self.prefactor,
            coeffs: self.coeffs.iter().filter(|(n, _)| keep(**n)).map(|(n, c)| (*n, c.clone())).collect(),
        }
    }

    /// Coefficient of `cos(2πnx)` (n > 0): `c_n + c_{-n}`.
    pub fn cos_coefficient(&self, n: i64) -> GaussRat {
        self.get(n) + self.get(-n)
    }

    /// Coefficient of `sin(2πnx)` (n > 0): `i(c_n − c_{-n})`.
    pub fn sin_coefficient(&self, n: i64) -> GaussRat {
        (self.get(n) - self.get(-n)).mul_i()
    }

    /// Float coefficients with the prefactor multiplied in.
    pub fn to_complex_map(&self) -> BTreeMap<i64, num::complex::Complex64> {
        let s = self.prefactor.value();
        self.coeffs
            .iter()
            .map(|(&n, c)| {
                let (re, im) = c.to_f64_pair();
                (n, num::complex::Complex64::new(re * s, im * s))
            })
            .collect()
    }

    pub fn eval_f64(&self, x: f64) -> num::complex::Complex64 {
        let mut acc = num::complex::Complex64::zero();
        for (n, c) in self.to_complex_map() {
            let t = 2.0 * std::f64::consts::PI * frac_f64(n as f64 * x);
            acc += c * num::complex::Complex64::new(t.cos(), t.sin());
        }
        acc
    }

    /// `{prefactor, entries: [[n, re_num, re_den, im_num, im_den], ...]}`; big
    /// integers beyond 64 bits are written as decimal strings.
    pub fn to_json(&self) -> Value {
        let num = |x: &num::BigInt| -> Value {
            match i64::try_from(x) {
                Ok(v) => json!(v),
                Err(_) => json!(x.to_string()),
            }
        };
        let entries: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(n, c)| json!([n, num(c.re.numer()), num(c.re.denom()), num(c.im.numer()), num(c.im.denom())]))
            .collect();
        json!({ "prefactor": self.prefactor, "entries": entries })
    }
}

fn frac_f64(x: f64) -> f64 {
    x - x.floor()
}

/// Largest |entry| difference between two tables under the same prefactor.
pub fn max_abs_defect(a: &TrigPoly, b: &TrigPoly) -> Result<(BigRational, Option<i64>)> {
    if a.prefactor != b.prefactor {
        return Err(Error::PrefactorMismatch(format!("{:?} vs {:?}", a.prefactor, b.prefactor)));
    }
    let mut worst = BigRational::zero();
    let mut witness = None;
    let keys: std::collections::BTreeSet<i64> = a.coeffs.keys().chain(b.coeffs.keys()).copied().collect();
    for n in keys {
        let d = (a.get(n) - b.get(n)).max_abs_part();
        if d > worst {
            worst = d;
            witness = Some(n);
        }
    }
    Ok((worst, witness))
}

/// `i^q`.
fn i_pow(q: i64) -> GaussRat {
    match q.rem_euclid(4) {
        0 => GaussRat::real(BigRational::one()),
        1 => GaussRat::imag(BigRational::one()),
        2 => GaussRat::real(-BigRational::one()),
        _ => GaussRat::imag(-BigRational::one()),
    }
}

/// f̂(n) for f = 1_Ω − 1/3, Ω = (1/3, 2/3): `(−1)ⁿ sin(nπ/3)/(πn)`, tagged √3/π.
pub fn fhat(n: i64) -> ExactScalar {
    if n == 0 {
        return ExactScalar::zero(Prefactor::Sqrt3OverPi);
    }
    let s = sin_pi_thirds(n);
    let sign = if n % 2 == 0 { 1 } else { -1 };
    // sin(nπ/3) is 0 or ±√3/2, so the value is (−1)ⁿ·s.r/n in units of √3/π
    let v = s.r * sign / n;
    ExactScalar::new(GaussRat::real(big(v)), Prefactor::Sqrt3OverPi)
}

/// Arc of f_t: Ω₁ = (1/6, 1/3), Ω₂ = (2/3, 5/6).
pub fn omega_t(t: u8) -> Result<ArcSet> {
    match t {
        1 => ArcSet::single(r(1, 6), r(1, 3)),
        2 => ArcSet::single(r(2, 3), r(5, 6)),
        _ => Err(Error::Domain(format!("t must be 1 or 2, got {t}"))),
    }
}

/// f̂_t(n) for f_t = 1_{Ω_t} − 1/6: `e(−(2t−1)n/4)·sin(nπ/6)/(πn)`.
///
/// Tagged 1/π or √3/π according to the value of sin(nπ/6).
pub fn fhat_t(n: i64, t: u8) -> Result<ExactScalar> {
    if t != 1 && t != 2 {
        return Err(Error::Domain(format!("t must be 1 or 2, got {t}")));
    }
    if n == 0 {
        return Ok(ExactScalar::zero(Prefactor::OneOverPi));
    }
    let s = sin_pi_sixths(n);
    let phase = i_pow(-(2 * t as i64 - 1) * n);
    let v = phase.scale(&big(s.r / n));
    let tag = if s.sqrt3 { Prefactor::Sqrt3OverPi } else { Prefactor::OneOverPi };
    Ok(ExactScalar::new(v, tag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "f1")]
    F1,
    #[serde(rename = "f2")]
    F2,
    Gamma,
    Lambda,
}

/// Truncated series split by prefactor class: a 1/π table and a √3/π table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    pub rational: TrigPoly,
    pub sqrt3: TrigPoly,
}

impl Series {
    fn new() -> Self {
        Series { rational: TrigPoly::new(Prefactor::OneOverPi), sqrt3: TrigPoly::new(Prefactor::Sqrt3OverPi) }
    }

    fn add(&mut self, n: i64, s: &ExactScalar) {
        match s.prefactor {
            Prefactor::OneOverPi => self.rational.add_term(n, &s.value),
            Prefactor::Sqrt3OverPi => self.sqrt3.add_term(n, &s.value),
            other => {
                let conv = s
                    .in_prefactor(Prefactor::canonical(other.class()).expect("series tags are 1/π or √3/π"))
                    .expect("canonical tag shares the class");
                self.add(n, &conv);
            }
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.rational.eval_f64(x).re + self.sqrt3.eval_f64(x).re
    }

    pub fn degree(&self) -> u64 {
        self.rational.degree().max(self.sqrt3.degree())
    }
}

/// All terms of the series with |frequency| ≤ X, from the closed forms.
pub fn series_truncated(kind: Kind, x: u64) -> Result<Series> {
    if x == 0 {
        return Err(Error::Domain("cutoff X must be at least 1".into()));
    }
    let x = x as i64;
    let mut s = Series::new();
    for n in (-x..=x).filter(|&n| n != 0) {
        match kind {
            Kind::F => s.add(n, &fhat(n)),
            Kind::F1 => s.add(n, &fhat_t(n, 1)?),
            Kind::F2 => s.add(n, &fhat_t(n, 2)?),
            Kind::Gamma => {
                s.add(n, &fhat_t(n, 1)?);
                s.add(n, &fhat_t(n, 2)?);
            }
            Kind::Lambda => {
                s.add(n, &fhat_t(n, 1)?);
                let mut m = fhat_t(n, 2)?;
                m.value = -m.value;
                s.add(n, &m);
            }
        }
    }
    Ok(s)
}

/// Exact value of the function at a rational point off the arc endpoints.
pub fn eval_exact(kind: Kind, x: Rational) -> Result<Rational> {
    let y = frac(x);
    let omega = ArcSet::single(r(1, 3), r(2, 3))?;
    let (o1, o2) = (omega_t(1)?, omega_t(2)?);
    let relevant: Vec<&ArcSet> = match kind {
        Kind::F => vec![&omega],
        Kind::F1 => vec![&o1],
        Kind::F2 => vec![&o2],
        Kind::Gamma | Kind::Lambda => vec![&o1, &o2],
    };
    if relevant.iter().any(|o| o.is_endpoint(y)) {
        return Err(Error::Endpoint(y.to_string()));
    }
    let ind = |o: &ArcSet| if o.contains(y) { Rational::one() } else { Rational::zero() };
    Ok(match kind {
        Kind::F => ind(&omega) - r(1, 3),
        Kind::F1 => ind(&o1) - r(1, 6),
        Kind::F2 => ind(&o2) - r(1, 6),
        Kind::Gamma => ind(&o1) + ind(&o2) - r(1, 3),
        Kind::Lambda => ind(&o1) - ind(&o2),
    })
}
