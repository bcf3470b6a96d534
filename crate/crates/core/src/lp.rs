//! Triadic Littlewood–Paley blocks and L¹ growth diagnostics for lacunary
//! exponential sums.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::grid::{certified_sup, check_pow2, NormEstimate, SpectralPoly, C};
use crate::fourier::TrigPoly;
use crate::sets::{structure, triadic_index, IntegerSet};

/// Exponential sum with float coefficients on frequencies up to 2^127.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparsePoly {
    pub coeffs: BTreeMap<i128, C>,
}

impl SparsePoly {
    /// `Σ_{n ∈ A} e(nx)`.
    pub fn unit_sum(a: &IntegerSet) -> Result<Self> {
        let coeffs = a
            .iter()
            .map(|n| {
                i128::try_from(n)
                    .map(|n| (n, C::new(1.0, 0.0)))
                    .map_err(|_| Error::Overflow(format!("frequency {n} exceeds 127 bits")))
            })
            .collect::<Result<_>>()?;
        Ok(SparsePoly { coeffs })
    }

    pub fn from_trig(p: &TrigPoly) -> Self {
        SparsePoly { coeffs: p.to_complex_map().into_iter().map(|(n, c)| (n as i128, c)).collect() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn span(&self) -> Option<(i128, i128)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    /// Half-span of the spectrum about its integer centre.
    pub fn half_span(&self) -> u128 {
        self.span().map_or(0, |(lo, hi)| (hi - lo).unsigned_abs().div_ceil(2))
    }

    /// Dense copy shifted by `−centre`; needs the span to fit in 64 bits.
    fn centred(&self) -> Result<SpectralPoly> {
        let Some((lo, hi)) = self.span() else {
            return Ok(SpectralPoly { lo: 0, coeffs: Vec::new() });
        };
        let c = lo + (hi - lo) / 2;
        let map = self
            .coeffs
            .iter()
            .map(|(&n, &v)| {
                i64::try_from(n - c)
                    .map(|k| (k, v))
                    .map_err(|_| Error::Overflow("spectral span exceeds 64 bits".into()))
            })
            .collect::<Result<BTreeMap<i64, C>>>()?;
        Ok(SpectralPoly::from_map(&map))
    }

    /// Value at `x = r/2^128`, with phases `n·r mod 2^128` computed exactly.
    pub fn eval_dyadic(&self, r: u128) -> C {
        let scale = 2.0 * PI / 2f64.powi(128);
        self.coeffs
            .iter()
            .map(|(&n, &c)| {
                let t = (n as u128).wrapping_mul(r) as f64 * scale;
                c * C::new(t.cos(), t.sin())
            })
            .sum()
    }
}

/// Δ_k collects frequencies in [3^k, 3^{k+1}).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub blocks: BTreeMap<u32, SparsePoly>,
    pub occupied: Vec<u32>,
}

impl BlockDecomposition {
    pub fn recompose(&self) -> SparsePoly {
        let mut out = SparsePoly::default();
        for b in self.blocks.values() {
            for (&n, &c) in &b.coeffs {
                *out.coeffs.entry(n).or_insert(C::zero()) += c;
            }
        }
        out
    }
}

pub fn decompose(g: &SparsePoly) -> Result<BlockDecomposition> {
    let mut blocks: BTreeMap<u32, SparsePoly> = BTreeMap::new();
    for (&n, &c) in &g.coeffs {
        if n <= 0 {
            return Err(Error::Domain(format!("nonpositive frequency {n} in a block decomposition")));
        }
        blocks.entry(triadic_index(n as u128)).or_default().coeffs.insert(n, c);
    }
    let occupied = blocks.keys().copied().collect();
    Ok(BlockDecomposition { blocks, occupied })
}

pub fn decompose_trig(g: &TrigPoly) -> Result<BlockDecomposition> {
    decompose(&SparsePoly::from_trig(g))
}

/// `‖(Σ_k |Δ_k|²)^{1/2}‖_p` on an M-point grid.
///
/// Each |Δ_k| is modulation invariant, so blocks are centred separately and
/// M must be at least 8 times the largest block half-span.
pub fn square_function_lp(d: &BlockDecomposition, p: f64, m: usize) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must exceed 1")));
    }
    check_pow2(m)?;
    let need = d.blocks.values().map(|b| 8 * b.half_span()).max().unwrap_or(0).max(1);
    if (m as u128) < need {
        return Err(Error::Resolution { needed: need.min(usize::MAX as u128) as usize, got: m });
    }
    let per_block: Vec<(Vec<f64>, f64)> = d
        .blocks
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|b| {
            let sp = b.centred()?;
            let g = sp.to_grid(m)?;
            let (_, hs) = sp.centring();
            let sup = certified_sup(g.max_abs(), hs, m)?;
            // Lipschitz constant of |Δ_k| via Bernstein
            Ok((g.samples.iter().map(|c| c.norm_sqr()).collect(), 2.0 * PI * hs * sup))
        })
        .collect::<Result<_>>()?;
    let mut sq = vec![0.0; m];
    for (s, _) in &per_block {
        sq.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let lip = per_block.iter().map(|(_, l)| l * l).sum::<f64>().sqrt();
    let smax = sq.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt() + lip / (2.0 * m as f64);
    let mean = sq.iter().map(|&v| v.sqrt().powf(p)).sum::<f64>() / m as f64;
    let err_mean = p * smax.powf(p - 1.0) * lip / (4.0 * m as f64);
    let value = mean.powf(1.0 / p);
    let lo = (mean - err_mean).max(0.0).powf(1.0 / p);
    let hi = (mean + err_mean).powf(1.0 / p);
    Ok(NormEstimate { value, error: (value - lo).max(hi - value) })
}

/// Largest grid used for quadrature before switching to sampling.
pub const GRID_CAP: usize = 1 << 22;
pub const MC_SAMPLES: usize = 1 << 18;
/// Error bars of sampled estimates are this many standard errors.
pub const MC_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Certified grid quadrature.
    Grid,
    /// Seeded sampling at exact dyadic points; error bar in standard errors.
    MonteCarlo,
}

/// Means of |g| and |g|^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub l1: NormEstimate,
    /// `∫|g|^p` for the Hölder exponent requested.
    pub lp_pow: f64,
    pub method: Method,
}

fn grid_moments(g: &SparsePoly, p: f64) -> Result<Moments> {
    let sp = g.centred()?;
    let (_, d) = sp.centring();
    // the error bar is at most πd·Σ|c|/(2M); aim for 1% of the lower bound
    // ‖g‖₂²/Σ|c| on ‖g‖₁, within the grid cap
    let s: f64 = g.coeffs.values().map(|c| c.norm()).sum();
    let l2sq: f64 = g.coeffs.values().map(|c| c.norm_sqr()).sum();
    let want = (PI * d * s * s / (2.0 * 0.01 * l2sq)).min(GRID_CAP as f64);
    let m = (want.ceil() as usize).max((32.0 * d).ceil() as usize).max(sp.coeffs.len()).max(8).next_power_of_two();
    let grid = sp.to_grid(m)?;
    let sup = certified_sup(grid.max_abs(), d, m)?;
    let l1 = NormEstimate { value: grid.mean_abs(), error: PI * d * sup / (2.0 * m as f64) };
    let lp_pow = grid.samples.iter().map(|c| c.norm().powf(p)).sum::<f64>() / m as f64;
    Ok(Moments { l1, lp_pow, method: Method::Grid })
}

fn sampled_moments(g: &SparsePoly, p: f64, seed: u64) -> Moments {
    const CHUNK: usize = 1 << 12;
    let chunks = MC_SAMPLES / CHUNK;
    let parts: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let (mut s1, mut s2, mut sp) = (0.0, 0.0, 0.0);
            for _ in 0..CHUNK {
                let v = g.eval_dyadic(rng.random::<u128>()).norm();
                s1 += v;
                s2 += v * v;
                sp += v.powf(p);
            }
            (s1, s2, sp)
        })
        .collect();
    let n = MC_SAMPLES as f64;
    let (s1, s2, sp) = parts.iter().fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Moments {
        l1: NormEstimate { value: mean, error: MC_SIGMAS * (var / n).sqrt() },
        lp_pow: sp / n,
        method: Method::MonteCarlo,
    }
}

/// L¹ (and ∫|g|^p) of g, by grid quadrature when the spectrum is narrow enough.
pub fn moments(g: &SparsePoly, p: f64, seed: u64) -> Result<Moments> {
    if g.is_empty() {
        return Ok(Moments { l1: NormEstimate { value: 0.0, error: 0.0 }, lp_pow: 0.0, method: Method::Grid });
    }
    if g.len() == 1 {
        let a = g.coeffs.values().next().unwrap().norm();
        return Ok(Moments { l1: NormEstimate { value: a, error: 0.0 }, lp_pow: a.powf(p), method: Method::Grid });
    }
    if 32 * g.half_span() <= GRID_CAP as u128 {
        grid_moments(g, p)
    } else {
        Ok(sampled_moments(g, p, seed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub k: u32,
    pub terms: usize,
    pub l1: NormEstimate,
    pub method: Method,
    /// ‖Δ_k g‖₁ ≥ 1 with the error bar counted against it.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Row {
    #[serde(rename = "N")]
    pub n: usize,
    pub l1: f64,
    pub l1_error: f64,
    pub method: Method,
    /// Hölder chain ‖g‖₁ ≥ N^{1−p}‖g‖_p^p at p = 1 + c/6.
    pub holder_p: f64,
    pub holder_lhs: f64,
    pub holder_rhs: f64,
    pub holder_holds: bool,
    pub blocks: Vec<BlockCheck>,
}

/// One row of the diagnostic for g = Σ_{n∈A} e(nx).
pub fn l1_row(a: &IntegerSet, c: f64, seed: u64) -> Result<L1Row> {
    let g = SparsePoly::unit_sum(a)?;
    let p = 1.0 + c / 6.0;
    let mo = moments(&g, p, seed)?;
    let n = a.len();
    let rhs = (n as f64).powf(1.0 - p) * mo.lp_pow;
    let d = decompose(&g)?;
    let blocks = d
        .blocks
        .iter()
        .map(|(&k, b)| {
            let bm = moments(b, 2.0, seed.wrapping_add(k as u64 + 1))?;
            Ok(BlockCheck {
                k,
                terms: b.len(),
                l1: bm.l1,
                method: bm.method,
                holds: bm.l1.value - bm.l1.error >= 1.0 - 1e-9,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(L1Row {
        n,
        l1: mo.l1.value,
        l1_error: mo.l1.error,
        method: mo.method,
        holder_p: p,
        holder_lhs: mo.l1.value + mo.l1.error,
        holder_rhs: rhs,
        holder_holds: mo.l1.value + mo.l1.error >= rhs * (1.0 - 1e-12),
        blocks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// Slope range over all values inside the error bars.
    pub slope_lo: f64,
    pub slope_hi: f64,
}

/// Least-squares slope of `ln y` against `ln x`, with worst-case propagation
/// of the error bars.
pub fn fit_loglog(points: &[(f64, f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y, e)| x <= 0.0 || y - e <= 0.0) {
        return Err(Error::Fit("values must stay positive within their error bars".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all sizes coincide".into()));
    }
    let w: Vec<f64> = xs.iter().map(|x| (x - xbar) / sxx).collect();
    let slope: f64 = w.iter().zip(points).map(|(w, p)| w * p.1.ln()).sum();
    let spread: f64 = w.iter().zip(points).map(|(w, &(_, y, e))| w.abs() * (y / (y - e)).ln()).sum();
    Ok(SlopeFit { slope, slope_lo: slope - spread, slope_hi: slope + spread })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LacunaryReport {
    pub rows: Vec<L1Row>,
    /// Smallest lacunary exponent c over the family.
    pub c: f64,
    pub fit: SlopeFit,
    /// The lemma's exponent c/3 and the final c/4.
    pub target_lemma: f64,
    pub target_final: f64,
}

pub fn lacunary_l1_diagnostic(family: &[IntegerSet], seed: u64) -> Result<LacunaryReport> {
    if family.len() < 3 {
        return Err(Error::Fit(format!("family of {} sets; a slope needs at least 3", family.len())));
    }
    let mut c = f64::INFINITY;
    for a in family {
        c = c.min(structure(a, crate::sets::default_threshold())?.lacunary_exponent);
    }
    let rows = family.iter().map(|a| l1_row(a, c, seed)).collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.n as f64, r.l1, r.l1_error)).collect();
    let fit = fit_loglog(&pts)?;
    Ok(LacunaryReport { rows, c, fit, target_lemma: c / 3.0, target_final: c / 4.0 })
}

/// CSV with header `N,l1,l1_error,exponent_fit`; the fitted slope repeats on
/// every row.
pub fn report_csv(r: &LacunaryReport) -> String {
    let mut out = String::from("N,l1,l1_error,exponent_fit\n");
    for row in &r.rows {
        out.push_str(&format!("{},{},{},{}\n", row.n, row.l1, row.l1_error, r.fit.slope));
    }
    out
}

pub fn triadic_family(sizes: &[usize]) -> Result<Vec<IntegerSet>> {
    sizes
        .iter()
        .map(|&n| {
            if n > 80 {
                return Err(Error::Overflow(format!("3^{} exceeds 127 bits", n - 1)));
            }
            IntegerSet::new((0..n as u32).map(|j| 3u128.pow(j)).collect())
        })
        .collect()
}
