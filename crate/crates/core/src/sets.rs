//! Integer sets: ingestion, structure against tripling, (k,l)-sum-freeness and
//! test families.

use std::collections::BTreeSet;

use num::rational::Ratio;
use num::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u128>", into = "Vec<u128>")]
pub struct IntegerSet {
    elements: Vec<u128>,
}

impl TryFrom<Vec<u128>> for IntegerSet {
    type Error = Error;
    fn try_from(v: Vec<u128>) -> Result<Self> {
        IntegerSet::new(v)
    }
}

impl From<IntegerSet> for Vec<u128> {
    fn from(s: IntegerSet) -> Self {
        s.elements
    }
}

impl IntegerSet {
    /// Sorts and deduplicates; zero is rejected.
    pub fn new(mut v: Vec<u128>) -> Result<Self> {
        if v.contains(&0) {
            return Err(Error::Domain("integer sets hold positive integers only".into()));
        }
        v.sort_unstable();
        v.dedup();
        Ok(IntegerSet { elements: v })
    }

    pub fn from_u64<I: IntoIterator<Item = u64>>(it: I) -> Result<Self> {
        Self::new(it.into_iter().map(u128::from).collect())
    }

    pub fn empty() -> Self {
        IntegerSet::default()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[u128] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = u128> + '_ {
        self.elements.iter().copied()
    }

    pub fn contains(&self, x: u128) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn max(&self) -> Option<u128> {
        self.elements.last().copied()
    }

    pub fn min(&self) -> Option<u128> {
        self.elements.first().copied()
    }

    /// Elements as `u64`, failing if any exceeds the 64-bit range.
    pub fn to_u64(&self) -> Result<Vec<u64>> {
        self.elements
            .iter()
            .map(|&x| u64::try_from(x).map_err(|_| Error::Overflow(format!("element {x} exceeds 64 bits"))))
            .collect()
    }

    /// `t·A`.
    pub fn dilate(&self, t: u128) -> Result<IntegerSet> {
        let v = self
            .elements
            .iter()
            .map(|&x| x.checked_mul(t).ok_or_else(|| Error::Overflow(format!("{t}·{x}"))))
            .collect::<Result<Vec<_>>>()?;
        IntegerSet::new(v)
    }

    pub fn subset_where<F: Fn(u128) -> bool>(&self, keep: F) -> IntegerSet {
        IntegerSet { elements: self.elements.iter().copied().filter(|&x| keep(x)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Lines,
    Json,
}

pub fn load_set(raw: &[u8], format: Format) -> Result<IntegerSet> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    match format {
        Format::Lines => {
            let mut v = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let tok = line.trim();
                if tok.is_empty() {
                    continue;
                }
                let x: u128 = tok
                    .parse()
                    .map_err(|_| Error::Parse { line: i + 1, msg: format!("not a positive integer: {tok:?}") })?;
                if x == 0 {
                    return Err(Error::Parse { line: i + 1, msg: "zero is not positive".into() });
                }
                v.push(x);
            }
            IntegerSet::new(v)
        }
        Format::Json => {
            let vals: Vec<serde_json::Value> =
                serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line().max(1), msg: e.to_string() })?;
            let mut v = Vec::with_capacity(vals.len());
            for (i, val) in vals.iter().enumerate() {
                let x = val.as_u64().filter(|&x| x > 0).ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("array entry {i} is not a positive integer: {val}"),
                })?;
                v.push(x as u128);
            }
            IntegerSet::new(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub n: usize,
    /// B = A △ 3·A.
    pub symdiff: Vec<u128>,
    /// ε(m) for m in B, in the order of `symdiff`.
    pub epsilon: Vec<i8>,
    pub cover_indices: Vec<u32>,
    pub lacunary_exponent: f64,
    pub threshold_exponent: [u64; 2],
    pub threshold: u128,
    pub geometric: bool,
}

impl StructureReport {
    pub fn epsilon_of(&self, m: u128) -> Option<i8> {
        self.symdiff.binary_search(&m).ok().map(|i| self.epsilon[i])
    }
}

/// `⌈N^{p/q}⌉` in exact integer arithmetic.
pub fn ceil_pow(n: u128, e: Ratio<u64>) -> u128 {
    let (p, q) = (*e.numer() as u32, *e.denom() as u32);
    if n <= 1 || p == 0 {
        return 1;
    }
    let target = BigInt::from(n).pow(p);
    let guess = (n as f64).powf(p as f64 / q as f64);
    let mut c = (guess.floor() as u128).saturating_sub(2).max(1);
    while BigInt::from(c).pow(q) < target {
        c += 1;
    }
    while c > 1 && BigInt::from(c - 1).pow(q) >= target {
        c -= 1;
    }
    c
}

/// Index k with 3^k ≤ a < 3^{k+1}.
pub fn triadic_index(a: u128) -> u32 {
    let mut k = 0;
    let mut p: u128 = 3;
    while p <= a {
        k += 1;
        match p.checked_mul(3) {
            Some(q) => p = q,
            None => break,
        }
    }
    k
}

pub fn structure(a: &IntegerSet, threshold_exponent: Ratio<u64>) -> Result<StructureReport> {
    if a.is_empty() {
        return Err(Error::Domain("structure needs a nonempty set".into()));
    }
    let tripled = a.dilate(3)?;
    let mut symdiff = Vec::new();
    let mut epsilon = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (x, y) = (a.elements(), tripled.elements());
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i] < y[j]) {
            symdiff.push(x[i]);
            epsilon.push(1);
            i += 1;
        } else if i == x.len() || y[j] < x[i] {
            symdiff.push(y[j]);
            epsilon.push(-1);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    let cover: BTreeSet<u32> = a.iter().map(triadic_index).collect();
    let n = a.len();
    let lacunary_exponent = if n >= 2 { (cover.len() as f64).ln() / (n as f64).ln() } else { 0.0 };
    let threshold = ceil_pow(n as u128, threshold_exponent);
    Ok(StructureReport {
        n,
        geometric: symdiff.len() as u128 <= threshold,
        symdiff,
        epsilon,
        cover_indices: cover.into_iter().collect(),
        lacunary_exponent,
        threshold_exponent: [*threshold_exponent.numer(), *threshold_exponent.denom()],
        threshold,
    })
}

pub fn default_threshold() -> Ratio<u64> {
    Ratio::new(1, 2)
}

/// Growable bitset with the shift-or needed for reachable-sum tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= other << shift`, truncated to `self.len`.
    pub fn or_shifted(&mut self, other: &Bits, shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        let n = self.words.len();
        for i in (ws..n).rev() {
            let src = i - ws;
            let mut v = if src < other.words.len() { other.words[src] << bs } else { 0 };
            if bs != 0 && src >= 1 && src - 1 < other.words.len() {
                v |= other.words[src - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
        self.mask_tail();
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << r) - 1;
            }
        }
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// Largest `l·max(X)` accepted by the sum tables.
pub const MAGNITUDE_CAP: u128 = i64::MAX as u128;
/// Largest reachable-sum table, in bits.
pub const BITSET_CAP: u128 = 1 << 32;

fn sum_table_len(max: u128, k: u32, l: u32) -> Result<usize> {
    let top = max
        .checked_mul(k.max(l) as u128)
        .filter(|&t| t <= MAGNITUDE_CAP)
        .ok_or_else(|| Error::Overflow(format!("{}·{max} exceeds the magnitude cap 2^63-1", k.max(l))))?;
    if top + 1 > BITSET_CAP {
        return Err(Error::Resource { what: "reachable-sum table (bits)", cap: BITSET_CAP, required: top + 1 });
    }
    Ok(top as usize + 1)
}

/// Tables `S_j` of all j-fold sums (with repetition) for `j = 0..=depth`.
pub fn sum_tables(x: &[usize], depth: u32, len: usize) -> Vec<Bits> {
    let mut tables = Vec::with_capacity(depth as usize + 1);
    let mut s0 = Bits::new(len);
    s0.set(0);
    tables.push(s0);
    for j in 1..=depth as usize {
        let mut s = Bits::new(len);
        for &a in x {
            s.or_shifted(&tables[j - 1], a);
        }
        tables.push(s);
    }
    tables
}

/// No k-fold sum of X equals an l-fold sum of X (repetition allowed).
pub fn is_kl_sumfree(x: &IntegerSet, k: u32, l: u32) -> Result<bool> {
    if k == 0 || l == 0 {
        return Err(Error::Domain("k and l must be positive".into()));
    }
    let Some(max) = x.max() else { return Ok(true) };
    if k == l {
        return Ok(false);
    }
    let len = sum_table_len(max, k, l)?;
    let elems: Vec<usize> = x.iter().map(|a| a as usize).collect();
    let t = sum_tables(&elems, k.max(l), len);
    Ok(!t[k as usize].intersects(&t[l as usize]))
}

/// Checked length of sum tables for callers that maintain tables incrementally.
pub fn checked_table_len(max: u128, k: u32, l: u32) -> Result<usize> {
    sum_table_len(max, k, l)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// {1, …, n}.
    Interval { n: u64 },
    /// n distinct integers drawn uniformly from [1, max].
    Random { n: u64, max: u64, seed: u64 },
    /// {s·3^j : s in starts, 0 ≤ j < length}.
    TriadicChains { starts: Vec<u64>, length: u32 },
    /// All products of primes[i]^{e_i} with 0 ≤ e_i ≤ exponent_box.
    FolnerLike { primes: Vec<u64>, exponent_box: u32 },
}

pub fn generate(family: &Family) -> Result<IntegerSet> {
    match family {
        Family::Interval { n } => {
            if *n == 0 {
                return Err(Error::InvalidParams("interval needs n ≥ 1".into()));
            }
            IntegerSet::from_u64(1..=*n)
        }
        Family::Random { n, max, seed } => {
            if *n == 0 || n > max {
                return Err(Error::InvalidParams(format!("cannot draw {n} distinct values from [1, {max}]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let picks = rand::seq::index::sample(&mut rng, *max as usize, *n as usize);
            IntegerSet::from_u64(picks.into_iter().map(|i| i as u64 + 1))
        }
        Family::TriadicChains { starts, length } => {
            if starts.is_empty() || *length == 0 {
                return Err(Error::InvalidParams("triadic chains need starts and length ≥ 1".into()));
            }
            let mut v = Vec::new();
            for &s in starts {
                if s == 0 {
                    return Err(Error::InvalidParams("chain start must be positive".into()));
                }
                let mut x = s as u128;
                for j in 0..*length {
                    v.push(x);
                    if j + 1 < *length {
                        x = x.checked_mul(3).ok_or_else(|| Error::Overflow("triadic chain beyond 128 bits".into()))?;
                    }
                }
            }
            IntegerSet::new(v)
        }
        Family::FolnerLike { primes, exponent_box } => {
            if primes.is_empty() || primes.iter().any(|&p| p < 2) {
                return Err(Error::InvalidParams("folner_like needs primes ≥ 2".into()));
            }
            let mut v = vec![1u128];
            for &p in primes {
                let mut next = Vec::with_capacity(v.len() * (*exponent_box as usize + 1));
                for &x in &v {
                    let mut y = x;
                    for e in 0..=*exponent_box {
                        next.push(y);
                        if e < *exponent_box {
                            y = y
                                .checked_mul(p as u128)
                                .ok_or_else(|| Error::Overflow("folner box beyond 128 bits".into()))?;
                        }
                    }
                }
                v = next;
            }
            IntegerSet::new(v)
        }
    }
}
