//! Open arcs on ℝ/ℤ with exact rational endpoints.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::Rational;
use crate::error::{Error, Result};

/// Open arc `(lo, hi)` with `0 ≤ lo < hi ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub lo: Rational,
    pub hi: Rational,
}

impl Arc {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo < Rational::zero() || hi > Rational::one() || lo >= hi {
            return Err(Error::Domain(format!("arc ({lo}, {hi}) must satisfy 0 ≤ lo < hi ≤ 1")));
        }
        Ok(Arc { lo, hi })
    }

    pub fn len(&self) -> Rational {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ArcSet {
    arcs: Vec<Arc>,
}

pub fn frac(x: Rational) -> Rational {
    x - x.floor()
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

impl ArcSet {
    /// Sorts the arcs and rejects overlaps.
    pub fn new(mut arcs: Vec<Arc>) -> Result<Self> {
        arcs.sort();
        for w in arcs.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::Domain(format!(
                    "arcs ({}, {}) and ({}, {}) overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(ArcSet { arcs })
    }

    pub fn single(lo: Rational, hi: Rational) -> Result<Self> {
        Ok(ArcSet { arcs: vec![Arc::new(lo, hi)?] })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.arcs.iter().map(Arc::len).sum()
    }

    /// Open-arc membership of `x mod 1`.
    pub fn contains(&self, x: Rational) -> bool {
        let y = frac(x);
        self.arcs.iter().any(|a| a.lo < y && y < a.hi)
    }

    /// Whether `x mod 1` is an endpoint of some arc.
    pub fn is_endpoint(&self, x: Rational) -> bool {
        let y = frac(x);
        self.arcs.iter().any(|a| a.lo == y || frac(a.hi) == y)
    }

    /// `{x : m·x mod 1 ∈ self}`.
    pub fn pullback(&self, m: u32) -> Result<ArcSet> {
        if m == 0 {
            return Err(Error::Domain("pullback needs m ≥ 1".into()));
        }
        let mi = m as i64;
        let mut arcs = Vec::with_capacity(self.arcs.len() * m as usize);
        for j in 0..mi {
            for a in &self.arcs {
                arcs.push(Arc {
                    lo: (a.lo + Rational::from_integer(j)) / mi,
                    hi: (a.hi + Rational::from_integer(j)) / mi,
                });
            }
        }
        ArcSet::new(arcs)
    }

    /// Each arc as its own one-arc system.
    pub fn components(&self) -> Vec<ArcSet> {
        self.arcs.iter().map(|&a| ArcSet { arcs: vec![a] }).collect()
    }

    /// JSON form: list of `[lo_num, lo_den, hi_num, hi_den]`.
    pub fn to_json_rows(&self) -> Vec<[i64; 4]> {
        self.arcs.iter().map(|a| [*a.lo.numer(), *a.lo.denom(), *a.hi.numer(), *a.hi.denom()]).collect()
    }

    pub fn from_json_rows(rows: &[[i64; 4]]) -> Result<ArcSet> {
        let mut arcs = Vec::with_capacity(rows.len());
        for row in rows {
            if row[1] <= 0 || row[3] <= 0 {
                return Err(Error::Domain(format!("arc row {row:?} has a nonpositive denominator")));
            }
            arcs.push(Arc::new(r(row[0], row[1]), r(row[2], row[3]))?);
        }
        ArcSet::new(arcs)
    }

    pub fn parse_json(text: &str) -> Result<ArcSet> {
        let rows: Vec<[i64; 4]> = serde_json::from_str(text)?;
        Self::from_json_rows(&rows)
    }
}

impl Serialize for ArcSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ArcSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<[i64; 4]>::deserialize(d)?;
        ArcSet::from_json_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Arc on the circle as start plus length; length may exceed 1 (full circle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct TorusArc {
    start: Rational,
    len: Rational,
}

fn torus_intersect(a: &TorusArc, b: &TorusArc) -> bool {
    let d = frac(b.start - a.start);
    d < a.len || d + b.len > Rational::one()
}

/// Union of open torus arcs, merging only arcs that overlap in an open set.
fn merge(mut v: Vec<TorusArc>) -> Vec<TorusArc> {
    if v.iter().any(|a| a.len > Rational::one()) {
        return vec![TorusArc { start: Rational::zero(), len: Rational::from_integer(2) }];
    }
    v.sort();
    let mut out: Vec<TorusArc> = Vec::with_capacity(v.len());
    for a in v {
        match out.last_mut() {
            Some(c) if a.start < c.start + c.len => {
                let end = (a.start + a.len).max(c.start + c.len);
                c.len = end - c.start;
            }
            _ => out.push(a),
        }
    }
    // arcs running past 1 may swallow arcs at the front
    while out.len() > 1 {
        let last = *out.last().unwrap();
        let first = out[0];
        let wrap_end = last.start + last.len - Rational::one();
        if first.start < wrap_end {
            let end = (first.start + first.len + Rational::one()).max(last.start + last.len);
            out.remove(0);
            let l = out.last_mut().unwrap();
            l.len = end - l.start;
            if l.len > Rational::one() {
                return vec![TorusArc { start: Rational::zero(), len: Rational::from_integer(2) }];
            }
        } else {
            break;
        }
    }
    out
}

/// Ceiling on arcs in intermediate sumsets.
pub const SUMSET_ARC_CAP: usize = 1_000_000;

fn fold_sumsets(base: &[TorusArc], depth: u32, cap: usize) -> Result<Vec<Vec<TorusArc>>> {
    let mut out = vec![base.to_vec()];
    for _ in 1..depth {
        let prev = out.last().unwrap();
        let required = prev.len().saturating_mul(base.len());
        if required > cap {
            return Err(Error::Resource { what: "arc sumset", cap: cap as u128, required: required as u128 });
        }
        let mut next = Vec::with_capacity(required);
        for a in prev {
            for b in base {
                next.push(TorusArc { start: frac(a.start + b.start), len: a.len + b.len });
            }
        }
        out.push(merge(next));
    }
    Ok(out)
}

/// Whether the k-fold and l-fold sumsets of `o` are disjoint in ℝ/ℤ.
pub fn is_arc_kl_sumfree(o: &ArcSet, k: u32, l: u32) -> Result<bool> {
    is_arc_kl_sumfree_capped(o, k, l, SUMSET_ARC_CAP)
}

pub fn is_arc_kl_sumfree_capped(o: &ArcSet, k: u32, l: u32, cap: usize) -> Result<bool> {
    if k == 0 || l == 0 {
        return Err(Error::Domain("k and l must be positive".into()));
    }
    if o.is_empty() {
        return Ok(true);
    }
    let base: Vec<TorusArc> = o.arcs.iter().map(|a| TorusArc { start: a.lo, len: a.len() }).collect();
    let folds = fold_sumsets(&merge(base), k.max(l), cap)?;
    let (sk, sl) = (&folds[k as usize - 1], &folds[l as usize - 1]);
    Ok(!sk.iter().any(|a| sl.iter().any(|b| torus_intersect(a, b))))
}

/// Canonical arc system for the supported pairs.
///
/// (2,1): Ω = (1/3, 2/3). (2,4): Ω₁ = (1/6, 1/3) or Ω₂ = (2/3, 5/6).
/// (2m,4m): the pullback of the (2,4) arc under x ↦ mx.
pub fn canonical_omega(k: u32, l: u32, variant: u8) -> Result<ArcSet> {
    if variant != 1 && variant != 2 {
        return Err(Error::InvalidParams(format!("arc variant must be 1 or 2, got {variant}")));
    }
    if (k, l) == (2, 1) {
        return ArcSet::single(r(1, 3), r(2, 3));
    }
    if k >= 2 && k.is_multiple_of(2) && l == 2 * k {
        let base = if variant == 1 { ArcSet::single(r(1, 6), r(1, 3))? } else { ArcSet::single(r(2, 3), r(5, 6))? };
        return base.pullback(k / 2);
    }
    Err(Error::UnsupportedPair { k, l })
}

/// Single-arc candidates for extraction.
///
/// For (2m,4m) the union of the m pullback arcs is not itself sum-free once
/// m ≥ 2, while each pullback arc is; extraction picks one arc, as in the
/// pigeonhole over the m components.
pub fn canonical_family(k: u32, l: u32) -> Result<Vec<ArcSet>> {
    if (k, l) == (2, 1) {
        return Ok(vec![canonical_omega(2, 1, 1)?]);
    }
    let mut out = canonical_omega(k, l, 1)?.components();
    out.extend(canonical_omega(k, l, 2)?.components());
    Ok(out)
}
