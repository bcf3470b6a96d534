//! Dilation counting: exact step functions x ↦ Σ_{n∈A} w·1_O(nx), their
//! maxima and L¹ norms, and certified subset extraction.

use std::cmp::Ordering;
use std::collections::HashMap;

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcs::{canonical_family, is_arc_kl_sumfree, ArcSet};
use crate::arith::{rat_serde, Rational};
use crate::error::{Error, Result};
use crate::sets::{is_kl_sumfree, IntegerSet};

pub const DEFAULT_BREAKPOINT_CAP: u64 = 50_000_000;

/// Step function on [0,1): `values[i]` holds on `(breakpoints[i], breakpoints[i+1])`,
/// the last piece running up to 1. `breakpoints[0] = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseConstantFn {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

fn cmp_frac(a: &(i64, i64), b: &(i64, i64)) -> Ordering {
    (a.0 as i128 * b.1 as i128).cmp(&(b.0 as i128 * a.1 as i128))
}

/// Event count for a weighted system, `2·Σ|arcs|·Σn`.
pub fn required_breakpoints(a: &[u64], systems: &[(&ArcSet, i64)]) -> u128 {
    let arcs: u128 = systems.iter().map(|(o, _)| o.len() as u128).sum();
    let total: u128 = a.iter().map(|&n| n as u128).sum();
    2 * arcs * total
}

impl PiecewiseConstantFn {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() != values.len() || breakpoints.first() != Some(&Rational::zero()) {
            return Err(Error::Domain("step function needs matching pieces starting at 0".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) || *breakpoints.last().unwrap() >= Rational::from_integer(1) {
            return Err(Error::Domain("breakpoints must increase within [0,1)".into()));
        }
        Ok(PiecewiseConstantFn { breakpoints, values })
    }

    pub fn constant(c: Rational) -> Self {
        PiecewiseConstantFn { breakpoints: vec![Rational::zero()], values: vec![c] }
    }

    /// x ↦ constant + Σ_systems weight·Σ_{n∈a} 1_O(nx).
    pub fn weighted(a: &[u64], systems: &[(&ArcSet, i64)], constant: Rational, cap: u64) -> Result<Self> {
        let required = required_breakpoints(a, systems);
        if required > cap as u128 {
            return Err(Error::Resource { what: "dilation breakpoints", cap: cap as u128, required });
        }
        if a.iter().any(|&n| n == 0 || n > i64::MAX as u64 / 4) {
            return Err(Error::Overflow("dilation factors must lie in [1, 2^61)".into()));
        }
        let mut events: Vec<((i64, i64), i64)> = a
            .par_iter()
            .flat_map_iter(|&n| {
                let n = n as i64;
                systems.iter().flat_map(move |(o, w)| {
                    let w = *w;
                    o.arcs().iter().flat_map(move |arc| {
                        let (ln, ld) = (*arc.lo.numer(), *arc.lo.denom());
                        let (hn, hd) = (*arc.hi.numer(), *arc.hi.denom());
                        (0..n).flat_map(move |j| [((ln + j * ld, ld * n), w), ((hn + j * hd, hd * n), -w)])
                    })
                })
            })
            .collect();
        events.par_sort_unstable_by(|x, y| cmp_frac(&x.0, &y.0));

        let mut breakpoints = vec![Rational::zero()];
        let mut counts = vec![0i64];
        let mut cur = 0i64;
        let mut i = 0;
        while i < events.len() {
            let pos = events[i].0;
            let mut delta = 0;
            while i < events.len() && cmp_frac(&events[i].0, &pos) == Ordering::Equal {
                delta += events[i].1;
                i += 1;
            }
            if pos.0 >= pos.1 {
                break;
            }
            cur += delta;
            if pos.0 == 0 {
                counts[0] = cur;
            } else {
                breakpoints.push(Rational::new(pos.0, pos.1));
                counts.push(cur);
            }
        }
        let values = counts.into_iter().map(|c| Rational::from_integer(c) + constant).collect();
        Ok(PiecewiseConstantFn { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    fn right_end(&self, i: usize) -> Rational {
        self.breakpoints.get(i + 1).copied().unwrap_or(Rational::from_integer(1))
    }

    pub fn midpoint(&self, i: usize) -> Rational {
        (self.breakpoints[i] + self.right_end(i)) / 2
    }

    /// Value at `x mod 1`; `None` on a breakpoint.
    pub fn eval(&self, x: Rational) -> Option<Rational> {
        let y = crate::arcs::frac(x);
        match self.breakpoints.binary_search(&y) {
            Ok(_) => None,
            Err(i) => Some(self.values[i - 1]),
        }
    }

    /// Exact Σ h(v_i)·|piece i| with h mapping to rationals of bounded denominator.
    fn weighted_length_sum<H: Fn(Rational) -> Rational>(&self, h: H) -> BigRational {
        let hv: Vec<Rational> = self.values.iter().map(|&v| h(v)).collect();
        let q = hv.iter().fold(1i64, |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<i128> = hv.iter().map(|v| *v.numer() as i128 * (q / v.denom()) as i128).collect();
        // summation by parts: Σ s_i (b_{i+1} - b_i) = s_last + Σ_{i≥1} b_i (s_{i-1} - s_i)
        let mut buckets: HashMap<i64, i128> = HashMap::new();
        for i in 1..scaled.len() {
            let d = scaled[i - 1] - scaled[i];
            if d != 0 {
                let b = self.breakpoints[i];
                *buckets.entry(*b.denom()).or_insert(0) += *b.numer() as i128 * d;
            }
        }
        let mut total = BigRational::from_integer(BigInt::from(*scaled.last().unwrap()));
        let mut dens: Vec<_> = buckets.into_iter().filter(|(_, v)| *v != 0).collect();
        dens.sort_unstable();
        for (den, num) in dens {
            total += BigRational::new(BigInt::from(num), BigInt::from(den));
        }
        total / BigRational::from_integer(BigInt::from(q))
    }

    pub fn integral(&self) -> BigRational {
        self.weighted_length_sum(|v| v)
    }

    pub fn max(&self) -> (Rational, Rational) {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        (self.midpoint(best), self.values[best])
    }

    /// x ↦ g(t·x).
    pub fn dilate(&self, t: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::Domain("dilation factor must be positive".into()));
        }
        let t = t as i64;
        let mut bps = Vec::with_capacity(self.breakpoints.len() * t as usize);
        let mut vals = Vec::with_capacity(bps.capacity());
        for j in 0..t {
            for (b, v) in self.breakpoints.iter().zip(&self.values) {
                bps.push((b + Rational::from_integer(j)) / t);
                vals.push(*v);
            }
        }
        Ok(PiecewiseConstantFn { breakpoints: bps, values: vals })
    }

    /// Pointwise combination on the common refinement.
    pub fn combine<F: Fn(Rational, Rational) -> Rational>(&self, other: &Self, f: F) -> Self {
        let mut bps: Vec<Rational> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_unstable();
        bps.dedup();
        let mut vals = Vec::with_capacity(bps.len());
        let (mut i, mut j) = (0, 0);
        for b in &bps {
            while i + 1 < self.breakpoints.len() && self.breakpoints[i + 1] <= *b {
                i += 1;
            }
            while j + 1 < other.breakpoints.len() && other.breakpoints[j + 1] <= *b {
                j += 1;
            }
            vals.push(f(self.values[i], other.values[j]));
        }
        PiecewiseConstantFn { breakpoints: bps, values: vals }
    }
}

/// Exact Σ |value|·length.
pub fn exact_l1(g: &PiecewiseConstantFn) -> BigRational {
    g.weighted_length_sum(|v| v.abs())
}

/// `{n ∈ A : n·x mod 1 ∈ O}`.
pub fn orbit_subset(a: &IntegerSet, o: &ArcSet, x: Rational) -> Result<IntegerSet> {
    let (p, q) = (*x.numer() as i128, *x.denom() as i128);
    let mut keep = Vec::new();
    for n in a.iter() {
        let n = i128::try_from(n).map_err(|_| Error::Overflow(format!("{n} too large for orbit arithmetic")))?;
        let r = n.checked_mul(p).ok_or_else(|| Error::Overflow(format!("{n}·{x}")))?.rem_euclid(q);
        if o.contains(Rational::new(r as i64, q as i64)) {
            keep.push(n as u128);
        }
    }
    IntegerSet::new(keep)
}

pub fn count_function(a: &IntegerSet, o: &ArcSet) -> Result<PiecewiseConstantFn> {
    count_function_capped(a, o, DEFAULT_BREAKPOINT_CAP)
}

pub fn count_function_capped(a: &IntegerSet, o: &ArcSet, cap: u64) -> Result<PiecewiseConstantFn> {
    PiecewiseConstantFn::weighted(&a.to_u64()?, &[(o, 1)], Rational::zero(), cap)
}

pub fn balanced_function(a: &IntegerSet, o: &ArcSet) -> Result<PiecewiseConstantFn> {
    let c = -o.measure() * a.len() as i64;
    PiecewiseConstantFn::weighted(&a.to_u64()?, &[(o, 1)], c, DEFAULT_BREAKPOINT_CAP)
}

/// Maximum of the counting function: lowest maximizing midpoint and the count.
pub fn maximize_count(a: &IntegerSet, o: &ArcSet) -> Result<(Rational, u64)> {
    maximize_count_capped(a, o, DEFAULT_BREAKPOINT_CAP)
}

pub fn maximize_count_capped(a: &IntegerSet, o: &ArcSet, cap: u64) -> Result<(Rational, u64)> {
    let g = count_function_capped(a, o, cap)?;
    let (x, v) = g.max();
    Ok((x, v.to_integer() as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub arc: ArcSet,
    #[serde(with = "rat_serde")]
    pub x_star: Rational,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionCertificate {
    pub k: u32,
    pub l: u32,
    #[serde(with = "rat_serde")]
    pub x_star: Rational,
    pub subset: IntegerSet,
    pub count: u64,
    pub arc_used: ArcSet,
    pub sumfree_checked: bool,
    #[serde(with = "rat_serde")]
    pub surplus: Rational,
    pub candidates: Vec<CandidateResult>,
}

impl ExtractionCertificate {
    /// Recomputes the subset and its sum-freeness from the stored data.
    pub fn reverify(&self, a: &IntegerSet) -> Result<bool> {
        let subset = orbit_subset(a, &self.arc_used, self.x_star)?;
        Ok(subset == self.subset
            && subset.len() as u64 == self.count
            && is_kl_sumfree(&subset, self.k, self.l)?
            && self.surplus == Rational::from_integer(self.count as i64) - self.arc_used.measure() * a.len() as i64)
    }
}

/// Best orbit subset over the canonical arc candidates (or `custom`), verified
/// (k,l)-sum-free.
pub fn extract_certified(a: &IntegerSet, k: u32, l: u32, custom: Option<&[ArcSet]>) -> Result<ExtractionCertificate> {
    let family = match custom {
        Some(c) => {
            for o in c {
                if !is_arc_kl_sumfree(o, k, l)? {
                    return Err(Error::Domain(format!(
                        "custom arcs {:?} are not ({k},{l})-sum-free",
                        o.to_json_rows()
                    )));
                }
            }
            c.to_vec()
        }
        None => {
            let fam = canonical_family(k, l)?;
            for o in &fam {
                if !is_arc_kl_sumfree(o, k, l)? {
                    return Err(Error::Internal(format!(
                        "canonical arc {:?} failed the sum-free check",
                        o.to_json_rows()
                    )));
                }
            }
            fam
        }
    };
    if family.is_empty() {
        return Err(Error::InvalidParams("no candidate arcs".into()));
    }
    let mut candidates = Vec::with_capacity(family.len());
    for o in family {
        let (x_star, count) = maximize_count(a, &o)?;
        candidates.push(CandidateResult { arc: o, x_star, count });
    }
    let best = candidates
        .iter()
        .enumerate()
        .max_by(|(i, x), (j, y)| x.count.cmp(&y.count).then(j.cmp(i)))
        .map(|(i, _)| i)
        .unwrap();
    let c = &candidates[best];
    let subset = orbit_subset(a, &c.arc, c.x_star)?;
    if subset.len() as u64 != c.count {
        return Err(Error::Internal(format!(
            "orbit at x = {} has {} elements, step function says {}",
            c.x_star,
            subset.len(),
            c.count
        )));
    }
    if !is_kl_sumfree(&subset, k, l)? {
        return Err(Error::Internal(format!("extracted subset {:?} is not ({k},{l})-sum-free", subset.elements())));
    }
    let surplus = Rational::from_integer(c.count as i64) - c.arc.measure() * a.len() as i64;
    Ok(ExtractionCertificate {
        k,
        l,
        x_star: c.x_star,
        subset,
        count: c.count,
        arc_used: c.arc.clone(),
        sumfree_checked: true,
        surplus,
        candidates,
    })
}
