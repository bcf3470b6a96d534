//! Float trigonometric polynomials sampled on equispaced grids.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use num::Zero;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::TrigPoly;
use crate::error::{Error, Result};

pub type C = Complex64;

/// Dense float coefficients on the frequency range `lo..lo+len`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoly {
    pub lo: i64,
    pub coeffs: Vec<C>,
}

impl SpectralPoly {
    pub fn from_map(map: &BTreeMap<i64, C>) -> Self {
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return SpectralPoly { lo: 0, coeffs: Vec::new() };
        };
        let mut coeffs = vec![C::zero(); (hi - lo + 1) as usize];
        for (&n, &c) in map {
            coeffs[(n - lo) as usize] = c;
        }
        SpectralPoly { lo, coeffs }
    }

    pub fn from_trig(p: &TrigPoly) -> Self {
        Self::from_map(&p.to_complex_map())
    }

    /// `Σ e(nx)` over the given frequencies.
    pub fn unit_sum(freqs: &[i64]) -> Self {
        let map: BTreeMap<i64, C> = freqs.iter().map(|&n| (n, C::new(1.0, 0.0))).collect();
        Self::from_map(&map)
    }

    pub fn constant(c: C) -> Self {
        SpectralPoly { lo: 0, coeffs: vec![c] }
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> C {
        let i = n - self.lo;
        if i < 0 || i >= self.coeffs.len() as i64 {
            C::zero()
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Integer centre of the spectrum and half-span after centring.
    pub fn centring(&self) -> (i64, f64) {
        if self.coeffs.is_empty() {
            return (0, 0.0);
        }
        let c = (self.lo + self.hi()).div_euclid(2);
        let d = (self.hi() - c).max(c - self.lo) as f64;
        (c, d)
    }

    /// Parseval: `(Σ|c_n|²)^{1/2}`.
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Samples of `e(−c·x)·p(x)` at `j/M`, `c` the integer centre.
    pub fn to_grid(&self, m: usize) -> Result<GridFn> {
        check_pow2(m)?;
        let (c, _) = self.centring();
        if self.coeffs.len() > m {
            return Err(Error::Resolution { needed: self.coeffs.len(), got: m });
        }
        let mut buf = vec![C::zero(); m];
        for (i, &v) in self.coeffs.iter().enumerate() {
            let n = self.lo + i as i64 - c;
            buf[n.rem_euclid(m as i64) as usize] += v;
        }
        fft_inverse(&mut buf);
        Ok(GridFn { samples: buf, shift: c })
    }

    pub fn eval(&self, x: f64) -> C {
        let mut acc = C::zero();
        for (i, &v) in self.coeffs.iter().enumerate() {
            let t = 2.0 * PI * ((self.lo + i as i64) as f64 * x).rem_euclid(1.0);
            acc += v * C::new(t.cos(), t.sin());
        }
        acc
    }
}

/// Samples of `e(−shift·x)·g(x)` at `x = j/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    pub samples: Vec<C>,
    pub shift: i64,
}

impl GridFn {
    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn mean_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).sum::<f64>() / self.m() as f64
    }

    /// Coefficients back on frequencies `shift + k`, `k ∈ (−M/2, M/2]`.
    pub fn to_coefficients(&self) -> BTreeMap<i64, C> {
        let coef = coefficients(&self.samples);
        let m = self.m() as i64;
        coef.into_iter()
            .enumerate()
            .map(|(i, c)| {
                let k = if i as i64 > m / 2 { i as i64 - m } else { i as i64 };
                (k + self.shift, c)
            })
            .collect()
    }
}

pub fn check_pow2(m: usize) -> Result<()> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::InvalidParams(format!("grid size {m} is not a power of two")));
    }
    Ok(())
}

/// In place `a_j ← Σ_k a_k e(−jk/M)`.
pub fn fft_forward(buf: &mut [C]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// In place `a_j ← Σ_k a_k e(jk/M)`: coefficients to samples.
pub fn fft_inverse(buf: &mut [C]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// Normalized DFT: sample values to coefficients, index `k mod M`.
pub fn coefficients(samples: &[C]) -> Vec<C> {
    let mut buf = samples.to_vec();
    fft_forward(&mut buf);
    let s = 1.0 / samples.len() as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Signed frequency of DFT index `i`; the Nyquist index maps to `M/2`.
pub fn signed_index(i: usize, m: usize) -> i64 {
    if i > m / 2 {
        i as i64 - m as i64
    } else {
        i as i64
    }
}

/// Hilbert transform on a grid: multiplier `−i·sgn(n)`, Nyquist term dropped.
pub fn hilbert_grid(samples: &[C]) -> Vec<C> {
    let m = samples.len();
    let mut coef = coefficients(samples);
    for (i, c) in coef.iter_mut().enumerate() {
        let n = signed_index(i, m);
        *c = if n == 0 || (m.is_multiple_of(2) && i == m / 2) {
            C::zero()
        } else if n > 0 {
            *c * C::new(0.0, -1.0)
        } else {
            *c * C::new(0.0, 1.0)
        };
    }
    fft_inverse(&mut coef);
    coef
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    L1,
    L2,
    Linf,
}

/// Value with a certified absolute error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub error: f64,
}

impl NormEstimate {
    pub fn lo(&self) -> f64 {
        self.value - self.error
    }

    pub fn hi(&self) -> f64 {
        self.value + self.error
    }
}

/// `max|g|` over the torus from grid samples of a trigonometric polynomial
/// whose centred spectrum lies in `[−d, d]`.
///
/// Bernstein gives `|g′| ≤ 2πd·‖g‖∞`, and every point is within `1/(2M)` of
/// a sample, so `‖g‖∞ ≤ gridmax + πd‖g‖∞/M`.
pub fn certified_sup(gridmax: f64, d: f64, m: usize) -> Result<f64> {
    let ratio = PI * d / m as f64;
    if ratio >= 1.0 {
        return Err(Error::Resolution { needed: (PI * d).ceil() as usize + 1, got: m });
    }
    Ok(gridmax / (1.0 - ratio))
}

/// L¹ and L∞ estimates from samples of a polynomial with centred half-span `d`.
///
/// The midpoint rule on a Lipschitz function with constant `L` errs by at most
/// `L/(4M)`; here `L = 2πd·sup`.
pub fn grid_l1_linf(g: &GridFn, d: f64) -> Result<(NormEstimate, NormEstimate)> {
    let m = g.m();
    let gridmax = g.max_abs();
    let sup = certified_sup(gridmax, d, m)?;
    let l1 = NormEstimate { value: g.mean_abs(), error: PI * d * sup / (2.0 * m as f64) };
    let linf = NormEstimate { value: gridmax, error: sup - gridmax };
    Ok((l1, linf))
}

/// Minimum grid size for norm quadrature: `M ≥ 8·d`.
pub fn required_grid(d: f64) -> usize {
    ((8.0 * d).ceil() as usize).max(1)
}

pub fn grid_norms(p: &SpectralPoly, which: Which, m: usize) -> Result<NormEstimate> {
    check_pow2(m)?;
    if which == Which::L2 {
        return Ok(NormEstimate { value: p.l2(), error: 0.0 });
    }
    let (_, d) = p.centring();
    let need = required_grid(d).max(p.coeffs.len());
    if m < need {
        return Err(Error::Resolution { needed: need, got: m });
    }
    let g = p.to_grid(m)?;
    let (l1, linf) = grid_l1_linf(&g, d)?;
    Ok(if which == Which::L1 { l1 } else { linf })
}

/// Smallest power of two meeting the norm precondition for `p`.
pub fn auto_grid(p: &SpectralPoly) -> usize {
    let (_, d) = p.centring();
    required_grid(d).max(p.coeffs.len()).next_power_of_two().max(8)
}
