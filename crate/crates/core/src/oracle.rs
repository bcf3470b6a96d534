//! Exact maximum (k,l)-sum-free subsets of small sets by branch and bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::extract_certified;
use crate::error::{Error, Result};
use crate::sets::{checked_table_len, is_kl_sumfree, Bits, IntegerSet};

pub const DEFAULT_ORACLE_CAP: usize = 22;
const PREFIX_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_size: usize,
    pub witness: IntegerSet,
    /// Search nodes visited.
    pub explored: u64,
}

/// Reachable j-fold sums of the current subset, j = 0..=depth.
#[derive(Clone)]
struct Tables(Vec<Bits>);

impl Tables {
    fn new(depth: usize, len: usize) -> Self {
        let mut t = vec![Bits::new(len); depth + 1];
        t[0].set(0);
        Tables(t)
    }

    /// Tables of the subset with `a` added: S'_j = S_j ∪ (S'_{j−1} + a).
    fn with(&self, a: usize) -> Tables {
        let mut out = self.0.clone();
        for j in 1..out.len() {
            let (lo, hi) = out.split_at_mut(j);
            hi[0].or_shifted(&lo[j - 1], a);
        }
        Tables(out)
    }

    fn sumfree(&self, k: usize, l: usize) -> bool {
        !self.0[k].intersects(&self.0[l])
    }
}

struct Search<'a> {
    elems: &'a [usize],
    k: usize,
    l: usize,
}

#[derive(Clone)]
struct Found {
    size: usize,
    chosen: Vec<usize>,
    explored: u64,
}

impl Search<'_> {
    /// Include-first DFS from position `i`; records strictly larger subsets
    /// than `best.size`.
    fn dfs(&self, i: usize, tables: &Tables, current: &mut Vec<usize>, best: &mut Found) {
        best.explored += 1;
        if current.len() > best.size {
            best.size = current.len();
            best.chosen = current.clone();
        }
        if i == self.elems.len() || current.len() + (self.elems.len() - i) <= best.size {
            return;
        }
        let a = self.elems[i];
        let next = tables.with(a);
        if next.sumfree(self.k, self.l) {
            current.push(a);
            self.dfs(i + 1, &next, current, best);
            current.pop();
        }
        self.dfs(i + 1, tables, current, best);
    }

    /// Sum-free subsets of the first `depth` elements, in include-first order.
    fn prefixes(&self, depth: usize, tables: Tables) -> Vec<(Vec<usize>, Tables)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new(), tables)];
        // explicit stack, pushing exclude before include so include pops first
        while let Some((i, chosen, t)) = stack.pop() {
            if i == depth {
                out.push((chosen, t));
                continue;
            }
            stack.push((i + 1, chosen.clone(), t.clone()));
            let next = t.with(self.elems[i]);
            if next.sumfree(self.k, self.l) {
                let mut c = chosen;
                c.push(self.elems[i]);
                stack.push((i + 1, c, next));
            }
        }
        out
    }

    fn greedy(&self, tables: &Tables) -> usize {
        let mut t = tables.clone();
        let mut n = 0;
        for &a in self.elems {
            let next = t.with(a);
            if next.sumfree(self.k, self.l) {
                t = next;
                n += 1;
            }
        }
        n
    }
}

pub fn max_sumfree_exact(a: &IntegerSet, k: u32, l: u32) -> Result<OracleResult> {
    max_sumfree_exact_capped(a, k, l, DEFAULT_ORACLE_CAP)
}

/// Exact maximum with the witness that comes first when subsets are ordered
/// by their largest element outside the other (larger wins).
///
/// Elements are tried in descending order, include before exclude. The
/// prefix subtrees run in parallel with a common greedy floor and no shared
/// state, so the witness and node count do not depend on scheduling.
pub fn max_sumfree_exact_capped(a: &IntegerSet, k: u32, l: u32, cap: usize) -> Result<OracleResult> {
    if k == 0 || l == 0 {
        return Err(Error::Domain("k and l must be positive".into()));
    }
    if a.len() > cap {
        return Err(Error::Resource { what: "oracle set size", cap: cap as u128, required: a.len() as u128 });
    }
    let Some(max) = a.max() else {
        return Ok(OracleResult { best_size: 0, witness: IntegerSet::empty(), explored: 1 });
    };
    let len = checked_table_len(max, k, l)?;
    let mut elems: Vec<usize> = a.iter().map(|v| v as usize).collect();
    elems.reverse();
    let s = Search { elems: &elems, k: k as usize, l: l as usize };
    let root = Tables::new(k.max(l) as usize, len);
    let floor = s.greedy(&root);
    let depth = PREFIX_DEPTH.min(elems.len());
    let prefixes = s.prefixes(depth, root);
    let results: Vec<Found> = prefixes
        .into_par_iter()
        .map(|(chosen, t)| {
            let mut best = Found { size: floor.saturating_sub(1), chosen: Vec::new(), explored: 0 };
            let mut cur = chosen;
            s.dfs(depth, &t, &mut cur, &mut best);
            best
        })
        .collect();
    let explored = results.iter().map(|r| r.explored).sum::<u64>() + 1;
    let top = results.iter().map(|r| r.size).max().unwrap_or(0);
    let found = results.into_iter().find(|r| r.size == top && !r.chosen.is_empty());
    let chosen = found.map(|f| f.chosen).unwrap_or_default();
    let witness = IntegerSet::new(chosen.into_iter().map(|v| v as u128).collect())?;
    Ok(OracleResult { best_size: witness.len(), witness, explored })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub oracle: usize,
    pub extractor: u64,
    pub gap: i64,
    pub witness: IntegerSet,
    /// Oracle search nodes visited.
    pub explored: u64,
    pub extracted: IntegerSet,
}

/// Oracle maximum against the dilation extractor; the extractor can never win.
pub fn compare(a: &IntegerSet, k: u32, l: u32) -> Result<CompareReport> {
    let o = max_sumfree_exact(a, k, l)?;
    let cert = extract_certified(a, k, l, None)?;
    if !is_kl_sumfree(&o.witness, k, l)? {
        return Err(Error::Internal("oracle witness failed re-verification".into()));
    }
    if cert.count > o.best_size as u64 {
        return Err(Error::Internal(format!("extractor count {} exceeds oracle {}", cert.count, o.best_size)));
    }
    Ok(CompareReport {
        oracle: o.best_size,
        extractor: cert.count,
        gap: o.best_size as i64 - cert.count as i64,
        witness: o.witness,
        explored: o.explored,
        extracted: cert.subset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{generate, Family};

    fn set(v: &[u64]) -> IntegerSet {
        IntegerSet::from_u64(v.iter().copied()).unwrap()
    }

    /// Subset enumeration in the same preference order, for cross-checking.
    fn brute(a: &IntegerSet, k: u32, l: u32) -> (usize, IntegerSet) {
        let el: Vec<u128> = a.iter().collect();
        let n = el.len();
        let mut best: Option<(usize, Vec<u128>)> = None;
        for mask in 0u32..(1 << n) {
            let sub: Vec<u128> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| el[i]).collect();
            let s = IntegerSet::new(sub.clone()).unwrap();
            if !is_kl_sumfree(&s, k, l).unwrap() {
                continue;
            }
            let mut desc = sub.clone();
            desc.reverse();
            let better = match &best {
                None => true,
                Some((sz, w)) => desc.len() > *sz || (desc.len() == *sz && desc > *w),
            };
            if better {
                best = Some((desc.len(), desc));
            }
        }
        let (sz, w) = best.unwrap();
        (sz, IntegerSet::new(w).unwrap())
    }

    #[test]
    fn examples() {
        let r = max_sumfree_exact(&set(&[1, 2, 3]), 2, 1).unwrap();
        assert_eq!((r.best_size, r.witness), (2, set(&[2, 3])));
        assert_eq!(max_sumfree_exact(&set(&[1]), 2, 1).unwrap().best_size, 1);
        let r = max_sumfree_exact(&set(&[1, 2, 3, 4, 5]), 2, 1).unwrap();
        assert_eq!((r.best_size, r.witness), (3, set(&[3, 4, 5])));
        let r = max_sumfree_exact(&IntegerSet::empty(), 2, 1).unwrap();
        assert_eq!(r.best_size, 0);
    }

    #[test]
    fn equal_k_l_admits_nothing() {
        assert_eq!(max_sumfree_exact(&set(&[1, 2, 3]), 2, 2).unwrap().best_size, 0);
    }

    #[test]
    fn cap_enforced() {
        let a = IntegerSet::from_u64(1..=23).unwrap();
        assert!(matches!(max_sumfree_exact(&a, 2, 1), Err(Error::Resource { .. })));
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..12 {
            let a = generate(&Family::Random { n: 9, max: 40, seed }).unwrap();
            for (k, l) in [(2, 1), (3, 1), (2, 4)] {
                let r = max_sumfree_exact(&a, k, l).unwrap();
                let (sz, w) = brute(&a, k, l);
                assert_eq!((r.best_size, &r.witness), (sz, &w), "seed {seed} ({k},{l})");
            }
        }
    }

    #[test]
    fn deterministic_and_dominant() {
        let a = generate(&Family::Random { n: 16, max: 200, seed: 5 }).unwrap();
        let r1 = max_sumfree_exact(&a, 2, 1).unwrap();
        let r2 = max_sumfree_exact(&a, 2, 1).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.best_size >= (a.len() + 2).div_ceil(3));
        let c = compare(&set(&[1, 2, 3]), 2, 1).unwrap();
        assert_eq!((c.oracle, c.extractor, c.gap), (2, 2, 0));
        let c = compare(&set(&[1]), 2, 1).unwrap();
        assert_eq!((c.oracle, c.extractor, c.gap), (1, 1, 0));
    }
}
