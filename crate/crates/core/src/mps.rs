//! The P_k/Q_k/Φ test-function construction with certificates, and the
//! projection and corollary diagnostics that use it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::rational::BigRational;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{rough_upto, GaussRat, Prefactor, SieveContext};
use crate::error::{Error, Result};
use crate::fourier::grid::{
    certified_sup, check_pow2, coefficients, fft_inverse, hilbert_grid, signed_index, SpectralPoly, C,
};
use crate::fourier::TrigPoly;
use crate::sets::IntegerSet;

/// Numeric slack for float checks.
pub const DELTA_NUM: f64 = 1e-6;
/// Allowed gap between the recursive and explicit constructions of Φ.
pub const RECURSION_TOL: f64 = 1e-8;
/// The bound ‖Φ‖∞ < 10, with slack for the certified sup.
pub const SUP_BOUND: f64 = 10.0 + 1e-3;

/// Fejér kernel `F_C = Σ_{|m|<C} ((C−|m|)/C) e(mx)`.
pub fn fejer(c: u64) -> Result<TrigPoly> {
    if c == 0 {
        return Err(Error::Domain("Fejér order must be at least 1".into()));
    }
    let ci = c as i64;
    let mut p = TrigPoly::new(Prefactor::One);
    for m in -(ci - 1)..=ci - 1 {
        let w = BigRational::new((ci - m.abs()).into(), ci.into());
        p.add_term(m, &GaussRat::real(w));
    }
    Ok(p)
}

pub fn fejer_weight(j: i64, c: u64) -> f64 {
    let a = j.unsigned_abs();
    if a >= c {
        0.0
    } else {
        (c - a) as f64 / c as f64
    }
}

/// Exact Hilbert transform, multiplier `−i·sgn(n)`.
pub fn hilbert(p: &TrigPoly) -> TrigPoly {
    let mut out = TrigPoly::new(p.prefactor);
    for (&n, c) in p.coeffs() {
        if n > 0 {
            out.add_term(n, &-c.mul_i());
        } else if n < 0 {
            out.add_term(n, &c.mul_i());
        }
    }
    out
}

/// Hilbert transform of grid samples.
pub fn hilbert_samples(samples: &[C]) -> Vec<C> {
    hilbert_grid(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub elements: Vec<i64>,
    /// I_k = [a, b].
    pub a: i64,
    pub b: i64,
    /// ⌊(a+b)/2⌋.
    pub xi: i64,
    /// max(b − a, 1).
    pub width: u64,
    /// Order of the Fejér window, b − a + 1.
    pub fejer_order: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub base: u64,
    pub k0: usize,
    pub blocks: Vec<Block>,
}

impl BlockPartition {
    /// Σ_k w_k, the depth of Φ's negative spectrum.
    pub fn total_width(&self) -> u64 {
        self.blocks.iter().map(|b| b.width).sum()
    }

    pub fn max_element(&self) -> i64 {
        self.blocks.last().map_or(0, |b| b.b)
    }
}

/// B_0 = first element, B_k = next b^k elements, B_{k0} = the rest, where k0
/// is the largest k with b^k < |B|. Sets with |B| ≤ b form a single block.
pub fn partition(set: &IntegerSet, base: u64) -> Result<BlockPartition> {
    if base < 4 {
        return Err(Error::InvalidParams(format!("base b = {base} must be at least 4")));
    }
    if set.is_empty() {
        return Err(Error::Domain("partition of an empty set".into()));
    }
    let elems: Vec<i64> = set
        .iter()
        .map(|v| i64::try_from(v).map_err(|_| Error::Overflow(format!("element {v} exceeds 64 bits"))))
        .collect::<Result<_>>()?;
    let n = elems.len() as u128;
    let mut k0 = 0usize;
    while (base as u128).pow(k0 as u32 + 1) < n {
        k0 += 1;
    }
    let mut sizes = Vec::new();
    if k0 == 0 {
        sizes.push(elems.len());
    } else {
        sizes.push(1);
        for k in 1..k0 {
            sizes.push((base as usize).pow(k as u32));
        }
        sizes.push(elems.len() - sizes.iter().sum::<usize>());
    }
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for s in sizes {
        let e = elems[at..at + s].to_vec();
        at += s;
        let (a, b) = (e[0], *e.last().unwrap());
        blocks.push(Block {
            elements: e,
            a,
            b,
            xi: (a + b).div_euclid(2),
            width: ((b - a) as u64).max(1),
            fejer_order: (b - a) as u64 + 1,
        });
    }
    Ok(BlockPartition { base, k0, blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WeightSpec {
    Unit,
    Random { seed: u64 },
}

/// Weights aligned with the sorted elements of B.
pub fn make_weights(set: &IntegerSet, spec: WeightSpec) -> Vec<C> {
    match spec {
        WeightSpec::Unit => vec![C::new(1.0, 0.0); set.len()],
        WeightSpec::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..set.len()).map(|_| C::from_polar(1.0, 2.0 * PI * rng.random::<f64>())).collect()
        }
    }
}

/// τ = conj(w)/|w|, and 1 where w = 0.
pub fn tau(w: C) -> C {
    let r = w.norm();
    if r == 0.0 {
        C::new(1.0, 0.0)
    } else {
        w.conj() / r
    }
}

/// `P̂_k(m) = τ(m)·F̂_C(m − ξ_k)/|B_k|` for m ∈ B_k.
pub fn build_pk(block: &Block, taus: &[C]) -> SpectralPoly {
    let n = block.elements.len() as f64;
    let map: BTreeMap<i64, C> = block
        .elements
        .iter()
        .zip(taus)
        .map(|(&m, &t)| (m, t * fejer_weight(m - block.xi, block.fejer_order) / n))
        .collect();
    SpectralPoly::from_map(&map)
}

/// P̃_k = (1/|B_k|) Σ τ(m) e(mx).
fn build_ptilde(block: &Block, taus: &[C]) -> SpectralPoly {
    let n = block.elements.len() as f64;
    let map: BTreeMap<i64, C> = block.elements.iter().zip(taus).map(|(&m, &t)| (m, t / n)).collect();
    SpectralPoly::from_map(&map)
}

/// Q_k: grid samples of exp(−(u − iHu)) with u = |P̃_k|, projected onto
/// nonpositive frequencies and windowed by F_C, so the spectrum lies in
/// [−w_k, 0].
pub fn build_qk(block: &Block, taus: &[C], m: usize) -> Result<SpectralPoly> {
    check_pow2(m)?;
    let c = block.fejer_order;
    if (m as u64) < 2 * c {
        return Err(Error::Resolution { needed: 2 * c as usize, got: m });
    }
    let pt = build_ptilde(block, taus).to_grid(m)?;
    let u: Vec<C> = pt.samples.iter().map(|z| C::new(z.norm(), 0.0)).collect();
    let v = hilbert_grid(&u);
    let g: Vec<C> = u.iter().zip(&v).map(|(a, b)| (C::new(-a.re, b.re)).exp()).collect();
    let coef = coefficients(&g);
    let lo = -(c as i64 - 1);
    let mut out = vec![C::zero(); c as usize];
    for (i, z) in coef.iter().enumerate() {
        let n = signed_index(i, m);
        if (lo..=0).contains(&n) {
            out[(n - lo) as usize] = z * fejer_weight(n, c);
        }
    }
    Ok(SpectralPoly { lo, coeffs: out })
}

/// Uncentred samples `p(j/M)`.
fn samples(p: &SpectralPoly, m: usize) -> Vec<C> {
    let mut buf = vec![C::zero(); m];
    for (i, &v) in p.coeffs.iter().enumerate() {
        let n = p.lo + i as i64;
        buf[n.rem_euclid(m as i64) as usize] += v;
    }
    fft_inverse(&mut buf);
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// A recorded inequality with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub block: Option<usize>,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl Check {
    fn new(name: &str, block: Option<usize>, value: f64, relation: Relation, bound: f64, tolerance: f64) -> Self {
        let holds = match relation {
            Relation::Le => value <= bound + tolerance,
            Relation::Ge => value >= bound - tolerance,
            Relation::Eq => (value - bound).abs() <= tolerance,
        };
        Check { name: name.into(), block, value, relation, bound, tolerance, holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub k: usize,
    pub size: usize,
    pub interval: [i64; 2],
    pub xi: i64,
    pub width: u64,
    pub l2_one_minus_q: f64,
    /// Lowest and highest frequency carrying a nonzero Q̂_k.
    pub q_support: Option<[i64; 2]>,
    pub closeness: f64,
}

/// `‖Φ‖∞`, coefficients on B, per-block checks and the pairing bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCertificate {
    pub base: u64,
    pub grid: usize,
    pub n: usize,
    pub k0: usize,
    pub elements: Vec<i64>,
    pub weights: Vec<[f64; 2]>,
    pub sup_grid: usize,
    pub sup_bound: f64,
    /// Φ̂(m) for m ∈ B, aligned with `elements`.
    pub coeff_table: Vec<[f64; 2]>,
    /// Frequency range [−Σw_k, max B] allowed for Φ̂ and the largest
    /// coefficient seen outside it.
    pub support: [i64; 2],
    pub outside_support: f64,
    pub blocks: Vec<BlockReport>,
    pub pairing: [f64; 2],
    pub target: f64,
    pub epsilon_b: f64,
    pub c_b: f64,
    pub recursion_deviation: f64,
    pub checks: Vec<Check>,
}

/// ε(b) = 4b^{−1/2}/((1 − b^{−1/2})(1 − b^{−1})).
pub fn epsilon_b(b: u64) -> f64 {
    let s = (b as f64).powf(-0.5);
    4.0 * s / ((1.0 - s) * (1.0 - 1.0 / b as f64))
}

/// c(b) = (1 − ε(b))/(2b).
pub fn c_b(b: u64) -> f64 {
    (1.0 - epsilon_b(b)) / (2.0 * b as f64)
}

pub fn required_phi_grid(part: &BlockPartition) -> usize {
    (2 * (part.max_element() as u64 + part.total_width())) as usize
}

fn pair(z: C) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> C {
    C::new(p[0], p[1])
}

/// Φ as a float trigonometric polynomial, together with its grid samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi {
    pub poly: SpectralPoly,
    pub samples: Vec<C>,
}

/// Build Φ = Φ_{k0} by Φ_k = Q_k Φ_{k−1} + P_k, with products on an M-point grid.
///
/// M must be at least 2(max B + Σ w_k): the spectrum of every partial product
/// lies in [−Σw_k, max B], so products are alias free.
pub fn build_phi(set: &IntegerSet, w: &[C], base: u64, m: usize) -> Result<(Phi, PhiCertificate)> {
    check_pow2(m)?;
    if w.len() != set.len() {
        return Err(Error::InvalidParams(format!("{} weights for {} elements", w.len(), set.len())));
    }
    if w.iter().any(|z| z.norm() > 1.0 + 1e-12) {
        return Err(Error::Domain("weights must satisfy |w(m)| ≤ 1".into()));
    }
    let part = partition(set, base)?;
    let need = required_phi_grid(&part);
    if m < need {
        return Err(Error::Resolution { needed: need, got: m });
    }
    let taus: Vec<C> = w.iter().map(|&z| tau(z)).collect();
    let mut offsets = Vec::with_capacity(part.blocks.len());
    let mut at = 0;
    for b in &part.blocks {
        offsets.push(at);
        at += b.elements.len();
    }

    let built: Vec<(SpectralPoly, SpectralPoly)> = part
        .blocks
        .par_iter()
        .zip(offsets.par_iter())
        .map(|(b, &o)| {
            let t = &taus[o..o + b.elements.len()];
            Ok((build_pk(b, t), build_qk(b, t, m)?))
        })
        .collect::<Result<_>>()?;
    let grids: Vec<(Vec<C>, Vec<C>)> = built.par_iter().map(|(p, q)| (samples(p, m), samples(q, m))).collect();

    // recursion
    let mut phi = grids[0].0.clone();
    for (ps, qs) in &grids[1..] {
        phi.par_iter_mut().zip(qs).zip(ps).for_each(|((f, q), p)| *f = *f * q + p);
    }
    // explicit Σ_j P_j Q_{j+1}⋯Q_{k0}
    let mut suffix = vec![C::new(1.0, 0.0); m];
    let mut explicit = vec![C::zero(); m];
    for (j, (ps, qs)) in grids.iter().enumerate().rev() {
        explicit.par_iter_mut().zip(ps).zip(&suffix).for_each(|((e, p), s)| *e += p * s);
        if j > 0 {
            suffix.par_iter_mut().zip(qs).for_each(|(s, q)| *s *= q);
        }
    }
    let coef = coefficients(&phi);
    let coef_explicit = coefficients(&explicit);
    let recursion_deviation = coef.iter().zip(&coef_explicit).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);

    let lo = -(part.total_width() as i64);
    let hi = part.max_element();
    let mut map = BTreeMap::new();
    let mut outside = 0.0f64;
    for (i, &z) in coef.iter().enumerate() {
        let n = if (i as i64) > hi { i as i64 - m as i64 } else { i as i64 };
        if (lo..=hi).contains(&n) {
            map.insert(n, z);
        } else {
            outside = outside.max(z.norm());
        }
    }
    let poly = SpectralPoly::from_map(&map);

    // certified sup on a refined grid
    let (_, d) = poly.centring();
    let sup_grid = ((32.0 * d).ceil() as usize).max(poly.coeffs.len()).max(8).next_power_of_two();
    let sup_bound = certified_sup(poly.to_grid(sup_grid)?.max_abs(), d, sup_grid)?;

    let elements: Vec<i64> = part.blocks.iter().flat_map(|b| b.elements.iter().copied()).collect();
    let coeff_table: Vec<[f64; 2]> = elements.iter().map(|&e| pair(poly.get(e))).collect();
    let cert_core = CertCore { part: &part, taus: &taus, built: &built, grids: &grids };
    let blocks = cert_core.block_reports(&coeff_table, &offsets);

    let mut cert = PhiCertificate {
        base,
        grid: m,
        n: set.len(),
        k0: part.k0,
        elements,
        weights: w.iter().map(|&z| pair(z)).collect(),
        sup_grid,
        sup_bound,
        coeff_table,
        support: [lo, hi],
        outside_support: outside,
        blocks,
        pairing: [0.0; 2],
        target: 0.0,
        epsilon_b: epsilon_b(base),
        c_b: c_b(base),
        recursion_deviation,
        checks: Vec::new(),
    };
    let (s, target) = cert.recompute_pairing();
    cert.pairing = pair(s);
    cert.target = target;
    cert.checks = cert_core.checks(&cert);
    Ok((Phi { poly, samples: phi }, cert))
}

struct CertCore<'a> {
    part: &'a BlockPartition,
    taus: &'a [C],
    built: &'a [(SpectralPoly, SpectralPoly)],
    grids: &'a [(Vec<C>, Vec<C>)],
}

impl CertCore<'_> {
    fn block_reports(&self, table: &[[f64; 2]], offsets: &[usize]) -> Vec<BlockReport> {
        self.part
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let (_, q) = &self.built[k];
                let one_minus: f64 = (0..q.coeffs.len())
                    .map(|i| {
                        let n = q.lo + i as i64;
                        let z = if n == 0 { C::new(1.0, 0.0) - q.coeffs[i] } else { q.coeffs[i] };
                        z.norm_sqr()
                    })
                    .sum::<f64>()
                    .sqrt();
                let nz: Vec<i64> =
                    (0..q.coeffs.len()).filter(|&i| q.coeffs[i] != C::zero()).map(|i| q.lo + i as i64).collect();
                let q_support = nz.first().map(|&a| [a, *nz.last().unwrap()]);
                let o = offsets[k];
                let closeness = b
                    .elements
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| {
                        let p = self.taus[o + i] * fejer_weight(e - b.xi, b.fejer_order) / b.elements.len() as f64;
                        (unpair(table[o + i]) - p).norm() / p.norm()
                    })
                    .fold(0.0, f64::max);
                BlockReport {
                    k,
                    size: b.elements.len(),
                    interval: [b.a, b.b],
                    xi: b.xi,
                    width: b.width,
                    l2_one_minus_q: one_minus,
                    q_support,
                    closeness,
                }
            })
            .collect()
    }

    fn checks(&self, cert: &PhiCertificate) -> Vec<Check> {
        let mut out = vec![
            Check::new("sup_phi", None, cert.sup_bound, Relation::Le, SUP_BOUND, 0.0),
            Check::new("recursion_vs_explicit", None, cert.recursion_deviation, Relation::Le, RECURSION_TOL, 0.0),
            Check::new("phi_support", None, cert.outside_support, Relation::Le, 0.0, 1e-9),
            Check::new("pairing_lower_bound", None, cert.pairing[0], Relation::Ge, cert.c_b * cert.target, 0.0),
        ];
        for (k, (b, r)) in self.part.blocks.iter().zip(&cert.blocks).enumerate() {
            let size = b.elements.len() as f64;
            let inside = r.q_support.is_none_or(|[a, z]| a >= -(b.width as i64) && z <= 0);
            out.push(Check::new("q_support", Some(k), if inside { 0.0 } else { 1.0 }, Relation::Eq, 0.0, 0.0));
            out.push(Check::new(
                "l2_one_minus_q",
                Some(k),
                r.l2_one_minus_q,
                Relation::Le,
                2.0 / size.sqrt(),
                DELTA_NUM,
            ));
            out.push(Check::new("closeness", Some(k), r.closeness, Relation::Le, cert.epsilon_b, DELTA_NUM));
            let (p, _) = &self.built[k];
            out.push(Check::new("l2_p", Some(k), p.l2(), Relation::Le, size.powf(-0.5), 1e-12));
            let o: usize = self.part.blocks[..k].iter().map(|b| b.elements.len()).sum();
            let pt = self.taus[o..o + b.elements.len()].iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt() / size;
            out.push(Check::new("l2_p_tilde", Some(k), pt, Relation::Eq, size.powf(-0.5), 1e-12));
            let (ps, qs) = &self.grids[k];
            let mix = ps.iter().zip(qs).map(|(p, q)| p.norm() / 10.0 + q.norm()).fold(0.0, f64::max);
            out.push(Check::new("p_over_10_plus_q", Some(k), mix, Relation::Le, 1.0, DELTA_NUM));
        }
        out
    }
}

impl PhiCertificate {
    /// S = Σ_j w(m_j)Φ̂(m_j) and the target Σ_j |w(m_j)|/j, from the tables.
    pub fn recompute_pairing(&self) -> (C, f64) {
        let s = self.weights.iter().zip(&self.coeff_table).map(|(&w, &c)| unpair(w) * unpair(c)).sum();
        let t = self.weights.iter().enumerate().map(|(j, &w)| unpair(w).norm() / (j + 1) as f64).sum();
        (s, t)
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    /// Recompute every check that depends only on the recorded tables and
    /// return the names of those whose stored verdict disagrees.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let (s, t) = self.recompute_pairing();
        if (s - unpair(self.pairing)).norm() > 1e-9 * (1.0 + s.norm()) || (t - self.target).abs() > 1e-9 * (1.0 + t) {
            bad.push("pairing".to_string());
        }
        let set = match IntegerSet::new(self.elements.iter().map(|&e| e as u128).collect()) {
            Ok(s) => s,
            Err(_) => return vec!["elements".into()],
        };
        let Ok(part) = partition(&set, self.base) else { return vec!["partition".into()] };
        let taus: Vec<C> = self.weights.iter().map(|&w| tau(unpair(w))).collect();
        let mut o = 0;
        for (k, b) in part.blocks.iter().enumerate() {
            let closeness = b
                .elements
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    let p = taus[o + i] * fejer_weight(e - b.xi, b.fejer_order) / b.elements.len() as f64;
                    (unpair(self.coeff_table[o + i]) - p).norm() / p.norm()
                })
                .fold(0.0, f64::max);
            o += b.elements.len();
            if self.blocks.get(k).is_none_or(|r| (r.closeness - closeness).abs() > 1e-12) {
                bad.push(format!("closeness[{k}]"));
            }
        }
        for c in &self.checks {
            let again = Check::new(&c.name, c.block, c.value, c.relation, c.bound, c.tolerance);
            if again.holds != c.holds {
                bad.push(c.name.clone());
            }
        }
        if (self.epsilon_b - epsilon_b(self.base)).abs() > 1e-15 || (self.c_b - c_b(self.base)).abs() > 1e-15 {
            bad.push("constants".into());
        }
        bad
    }
}

/// `S = Σ w(m)·Φ̂(m)`, the bilinear pairing ∫ f(x)Φ(−x) dx.
pub fn pairing(w: &BTreeMap<i64, C>, phi: &SpectralPoly) -> C {
    w.iter().map(|(&m, &c)| c * phi.get(m)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffChoice {
    /// a_n = 1.
    Unit,
    /// a_n = χ(n).
    Chi3,
}

impl CoeffChoice {
    fn at(self, n: u64) -> i64 {
        match self {
            CoeffChoice::Unit => 1,
            CoeffChoice::Chi3 => crate::arith::chi3(n) as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjReport {
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "Q")]
    pub q: u64,
    /// |A_R| with A_R = {m ∈ A : m < R}.
    pub a_r: usize,
    /// ℓ² norm of the truncated coefficients over all n ∈ 𝒩₁.
    pub norm: f64,
    /// The same with n = 1 left out.
    pub norm_rough: f64,
    /// Q^{−1/15}·|A_R|^{1/2}.
    pub scale: f64,
    pub ratio: f64,
    pub ratio_rough: f64,
}

/// Rough integers here have every prime factor `≥ Q`.
fn proj_coefficients(
    a: &IntegerSet,
    coeffs: CoeffChoice,
    ctx: &SieveContext,
    r: u64,
    skip_one: bool,
) -> Result<BTreeMap<u64, i128>> {
    ctx.validate()?;
    let av = a.to_u64()?;
    let rough = rough_upto(r, ctx.q);
    let mut num: BTreeMap<u64, i128> = BTreeMap::new();
    for &m in av.iter().filter(|&&m| m <= r) {
        for &n in rough.iter().skip(usize::from(skip_one)) {
            let Some(f) = n.checked_mul(m).filter(|&f| f <= r) else { break };
            // a_n/n = a_n·m/F
            *num.entry(f).or_insert(0) += coeffs.at(n) as i128 * m as i128;
        }
    }
    Ok(num)
}

fn l2_of(num: &BTreeMap<u64, i128>) -> f64 {
    num.iter().map(|(&f, &v)| (v as f64 / f as f64).powi(2)).sum::<f64>().sqrt()
}

/// ℓ² norm of `Proj_R Σ_{n∈𝒩₁, m∈A} (a_n/n) e(nmx)`; coefficients are
/// `c_F = Σ_{m|F} a_{F/m}·m/F` with integer numerators.
pub fn proj_diagnostic(a: &IntegerSet, coeffs: CoeffChoice, ctx: &SieveContext, r: u64) -> Result<ProjReport> {
    let norm = l2_of(&proj_coefficients(a, coeffs, ctx, r, false)?);
    let norm_rough = l2_of(&proj_coefficients(a, coeffs, ctx, r, true)?);
    let a_r = a.iter().filter(|&m| m < r as u128).count();
    let scale = (ctx.q as f64).powf(-1.0 / 15.0) * (a_r as f64).sqrt();
    let div = |x: f64| if scale > 0.0 { x / scale } else { 0.0 };
    Ok(ProjReport { r, q: ctx.q, a_r, norm, norm_rough, scale, ratio: div(norm), ratio_rough: div(norm_rough) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub betas: Vec<i64>,
    #[serde(rename = "X")]
    pub cutoff: u64,
    pub l1: f64,
    pub l1_error: f64,
    pub l1_grid: usize,
    pub pairing: [f64; 2],
    /// Σ_F ĥ(F)Φ̂(F) over Φ's support: exact for the untruncated sum.
    pub cross: [f64; 2],
    pub sup_bound: f64,
    /// (|S| − |cross|)/‖Φ‖∞, a lower bound for the L¹ norm.
    pub chain_bound: f64,
    pub target: f64,
    pub c_b: f64,
    pub holds: bool,
}

/// L¹ of `Σ w(m_j)e(m_j x) + Σ_{n∈𝒩₁, m∈B, β∈Γ} (a_n/n) e(βmnx)`, truncated at
/// |frequency| ≤ X, against the pairing chain through Φ.
#[allow(clippy::too_many_arguments)]
pub fn corollary_check(
    set: &IntegerSet,
    w: &[C],
    betas: &[i64],
    coeffs: CoeffChoice,
    ctx: &SieveContext,
    base: u64,
    m: usize,
    cutoff: Option<u64>,
) -> Result<CorollaryReport> {
    ctx.validate()?;
    if betas.contains(&0) {
        return Err(Error::Domain("β = 0 collapses the rough sum onto the constant term".into()));
    }
    let limit = ((set.len() as f64).ln().floor() as usize).max(1);
    if betas.len() > limit {
        return Err(Error::Domain(format!("|Γ| = {} exceeds log N (allowed {limit})", betas.len())));
    }
    let (phi, cert) = build_phi(set, w, base, m)?;
    let extent = cert.support[0].unsigned_abs().max(cert.support[1].unsigned_abs());
    let x = cutoff.unwrap_or(extent).max(extent);
    let av = set.to_u64()?;
    let rough = rough_upto(x, ctx.q);
    let mut h: BTreeMap<i64, C> = BTreeMap::new();
    for &beta in betas {
        for &mm in &av {
            let step = beta.unsigned_abs() * mm;
            for &n in &rough {
                let Some(f) = step.checked_mul(n).filter(|&f| f <= x) else { break };
                let f = f as i64 * beta.signum();
                *h.entry(f).or_insert(C::zero()) += C::new(coeffs.at(n) as f64 / n as f64, 0.0);
            }
        }
    }
    let cross: C = h.iter().map(|(&f, &c)| c * phi.poly.get(f)).sum();
    let mut total = h;
    for (e, &wz) in set.iter().zip(w) {
        *total.entry(e as i64).or_insert(C::zero()) += wz;
    }
    let f = SpectralPoly::from_map(&total);
    let (_, d) = f.centring();
    let s_abs: f64 = f.coeffs.iter().map(|c| c.norm()).sum();
    let want = (PI * d * s_abs / (2.0 * 1e-3)).min((1u64 << 22) as f64);
    let grid = (want.ceil() as usize).max((32.0 * d).ceil() as usize).max(f.coeffs.len()).max(8).next_power_of_two();
    let g = f.to_grid(grid)?;
    let sup = certified_sup(g.max_abs(), d, grid)?;
    let l1 = g.mean_abs();
    let l1_error = PI * d * sup / (2.0 * grid as f64);
    let s = unpair(cert.pairing);
    let chain_bound = (s.norm() - cross.norm()) / cert.sup_bound;
    Ok(CorollaryReport {
        betas: betas.to_vec(),
        cutoff: x,
        l1,
        l1_error,
        l1_grid: grid,
        pairing: cert.pairing,
        cross: pair(cross),
        sup_bound: cert.sup_bound,
        chain_bound,
        target: cert.target,
        c_b: cert.c_b,
        holds: l1 + l1_error >= chain_bound,
    })
}
