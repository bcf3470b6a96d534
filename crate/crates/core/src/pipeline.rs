//! Run configuration, stage orchestration and report emission.

use std::collections::BTreeMap;
use std::time::Instant;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arcs::{canonical_omega, ArcSet};
use crate::arith::{next_prime, rat_serde, Rational, SieveContext};
use crate::dilation::{extract_certified, ExtractionCertificate};
use crate::error::{Error, Result};
use crate::fourier::grid::C;
use crate::lp::{lacunary_l1_diagnostic, triadic_family, LacunaryReport};
use crate::mps::{build_phi, make_weights, PhiCertificate, WeightSpec};
use crate::oracle::{compare, CompareReport};
use crate::sets::{load_set, structure, Format, IntegerSet, StructureReport};
use crate::sieve::{l1_lower_report, verify_identity, IdentityId, IdentityReport, L1Report};
use crate::WORKERS_ENV;

pub const VERSION: &str = concat!("sumfree ", env!("CARGO_PKG_VERSION"));

/// Size the global worker pool from the environment, if set.
pub fn install_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParams(format!("{WORKERS_ENV}={raw:?} is not a positive integer")))?;
    // a pool that is already installed keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Extract,
    Verify,
    Phi,
    Lp,
    Oracle,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Unit,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpFamily {
    /// {3^j : j < N}.
    Triadic,
    /// {1..N}.
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<String>,
    pub format: Format,
    pub k: u32,
    pub l: u32,
    #[serde(rename = "Q")]
    pub q: u64,
    /// f-sieve threshold; defaults to the least prime ≥ N².
    #[serde(rename = "P")]
    pub p: Option<u64>,
    pub cutoff: u64,
    pub grid: usize,
    pub base: u64,
    pub threshold_exp: [u64; 2],
    pub seed: u64,
    /// B = {1..size} for `phi` when no input is given.
    pub size: Option<u64>,
    pub weights: WeightKind,
    pub family: LpFamily,
    /// Sizes for `lp` and the growth and surplus tables of `report`.
    pub sizes: Vec<u64>,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Analyze,
            input: None,
            format: Format::Lines,
            k: 2,
            l: 1,
            q: 5,
            p: None,
            cutoff: 2000,
            grid: 1 << 17,
            base: 100,
            threshold_exp: [1, 2],
            seed: 0,
            size: None,
            weights: WeightKind::Unit,
            family: LpFamily::Triadic,
            sizes: Vec::new(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 {
            return Err(Error::InvalidParams("k and l must be positive".into()));
        }
        if self.threshold_exp[1] == 0 {
            return Err(Error::InvalidParams("threshold exponent has zero denominator".into()));
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidParams("cutoff must be at least 1".into()));
        }
        SieveContext::new(self.q, self.p.unwrap_or(self.q))?;
        let needs_input = matches!(
            self.command,
            Command::Analyze | Command::Extract | Command::Verify | Command::Oracle | Command::Report
        );
        if needs_input && self.input.is_none() {
            return Err(Error::InvalidParams(format!("{:?} needs --input", self.command).to_lowercase()));
        }
        if self.command == Command::Phi && self.input.is_none() && self.size.is_none() {
            return Err(Error::InvalidParams("phi needs --input or --size".into()));
        }
        Ok(())
    }

    pub fn threshold(&self) -> Ratio<u64> {
        Ratio::new(self.threshold_exp[0], self.threshold_exp[1])
    }

    fn sizes_or(&self, default: &[u64]) -> Vec<u64> {
        if self.sizes.is_empty() {
            default.to_vec()
        } else {
            self.sizes.clone()
        }
    }
}

pub fn load_input(path: &str, format: Format) -> Result<IntegerSet> {
    let raw = std::fs::read(path)?;
    load_set(&raw, format)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// |A △ 3·A| above threshold: the Ω₁/Ω₂ arcs pulled back by x ↦ kx.
    Arcs,
    /// Geometric set: Ω = (1/3, 2/3) pulled back by x ↦ 2k·x.
    Lacunary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub geometric: bool,
    pub route: Route,
    pub symdiff_size: usize,
    pub threshold: u128,
    pub lacunary_exponent: f64,
}

pub fn classify(s: &StructureReport) -> Classification {
    Classification {
        geometric: s.geometric,
        route: if s.geometric { Route::Lacunary } else { Route::Arcs },
        symdiff_size: s.symdiff.len(),
        threshold: s.threshold,
        lacunary_exponent: s.lacunary_exponent,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStage {
    pub route: Route,
    /// Dilation factor m of the arcs' pullback (x* = base point / m).
    pub rescale: u32,
    /// m·x* mod 1: the base point for the unscaled arc.
    #[serde(with = "rat_serde")]
    pub base_point: Rational,
    pub certificate: ExtractionCertificate,
}

/// Candidate arcs and pullback factor for the route.
///
/// For (2k,4k) both routes produce the same arcs: the components of Ω pulled
/// back by x ↦ 2k·x are the components of Ω₁ and Ω₂ pulled back by x ↦ kx.
pub fn route_arcs(route: Route, k: u32, l: u32) -> Result<(u32, Vec<ArcSet>)> {
    if (k, l) == (2, 1) {
        return Ok((1, vec![canonical_omega(2, 1, 1)?]));
    }
    if !(k >= 2 && k.is_multiple_of(2) && l == 2 * k) {
        return Err(Error::UnsupportedPair { k, l });
    }
    let half = k / 2;
    Ok(match route {
        Route::Arcs => {
            let mut v = canonical_omega(k, l, 1)?.components();
            v.extend(canonical_omega(k, l, 2)?.components());
            (half, v)
        }
        Route::Lacunary => (k, canonical_omega(2, 1, 1)?.pullback(k)?.components()),
    })
}

pub fn extract_stage(a: &IntegerSet, k: u32, l: u32, class: &Classification) -> Result<ExtractionStage> {
    let (rescale, arcs) = route_arcs(class.route, k, l)?;
    let certificate = extract_certified(a, k, l, Some(&arcs))?;
    let y = certificate.x_star * rescale as i64;
    let base_point = y - Rational::from_integer(y.floor().to_integer());
    Ok(ExtractionStage { route: class.route, rescale, base_point, certificate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub g_a: f64,
    pub l_a: f64,
    pub g_a_exact: [String; 2],
    pub l_a_exact: [String; 2],
    pub log_over_loglog: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub count: u64,
    #[serde(with = "rat_serde")]
    pub surplus: Rational,
}

pub fn growth_rows(sizes: &[u64], q: u64) -> Result<Vec<GrowthRow>> {
    let ctx = SieveContext::new(q, q)?;
    sizes
        .iter()
        .map(|&n| {
            let a = IntegerSet::from_u64(1..=n)?;
            let r = l1_lower_report(&a, &ctx)?;
            let ln = (n as f64).ln();
            let scale = if n >= 3 { ln / ln.ln() } else { f64::NAN };
            let head = r.g_a.approx.max(r.l_a.approx);
            Ok(GrowthRow {
                n,
                g_a: r.g_a.approx,
                l_a: r.l_a.approx,
                g_a_exact: crate::arith::ratio_pair(&r.g_a.exact),
                l_a_exact: crate::arith::ratio_pair(&r.l_a.exact),
                log_over_loglog: scale,
                ratio: head / scale,
            })
        })
        .collect()
}

pub fn surplus_rows(sizes: &[u64], k: u32, l: u32) -> Result<Vec<SurplusRow>> {
    sizes
        .iter()
        .map(|&n| {
            let a = IntegerSet::from_u64(1..=n)?;
            let c = extract_certified(&a, k, l, None)?;
            Ok(SurplusRow { n, count: c.count, surplus: c.surplus })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stages {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub structure: Option<StructureReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extraction: Option<ExtractionStage>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub identities: Vec<IdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l1: Option<L1Report>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<PhiCertificate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lp: Option<LacunaryReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<CompareReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub growth: Option<Vec<GrowthRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub surplus: Option<Vec<SurplusRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_set: Option<IntegerSet>,
    pub stages: Stages,
    /// Failed invariants; nonempty means exit status 1.
    pub violations: Vec<String>,
    /// Seconds per stage, kept apart from the reproducible content.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::from)
    }

    /// The JSON with timings blanked: identical across runs of one config.
    pub fn reproducible_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.timings.clear();
        r.to_json()
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(Error::from)
    }

    /// Re-derive every extraction from the stored input set.
    pub fn reverify(&self) -> Result<bool> {
        let Some(st) = &self.stages.extraction else { return Ok(true) };
        let a = self.input_set.as_ref().ok_or_else(|| Error::InvalidParams("report has no input set".into()))?;
        st.certificate.reverify(a)
    }
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f();
        self.0.insert(name.to_string(), t.elapsed().as_secs_f64());
        out
    }
}

fn sieve_ctx(cfg: &RunConfig, n: usize) -> Result<SieveContext> {
    let p = match cfg.p {
        Some(p) => p,
        None => next_prime((n as u64).saturating_mul(n as u64).max(2)),
    };
    SieveContext::new(cfg.q, p)
}

/// Execute a validated configuration on an already loaded input set.
pub fn run(cfg: &RunConfig, input: Option<IntegerSet>) -> Result<Report> {
    cfg.validate()?;
    let mut t = Timer(BTreeMap::new());
    let mut st = Stages::default();
    let mut violations = Vec::new();
    let need = || input.as_ref().ok_or_else(|| Error::InvalidParams("input set missing".into()));

    let wants_structure = matches!(cfg.command, Command::Analyze | Command::Extract | Command::Report);
    if wants_structure {
        let a = need()?;
        let s = t.run("structure", || structure(a, cfg.threshold()))?;
        st.classification = Some(classify(&s));
        st.structure = Some(s);
    }
    if matches!(cfg.command, Command::Extract | Command::Report) {
        let a = need()?;
        let class = st.classification.clone().expect("structure stage ran");
        let e = t.run("extraction", || extract_stage(a, cfg.k, cfg.l, &class))?;
        if !e.certificate.reverify(a)? {
            violations.push("extraction certificate failed re-verification".into());
        }
        st.extraction = Some(e);
    }
    if matches!(cfg.command, Command::Verify | Command::Report) {
        let a = need()?;
        let ctx = sieve_ctx(cfg, a.len())?;
        let reps = t.run("identities", || {
            IdentityId::ALL.iter().map(|&id| verify_identity(id, a, &ctx, cfg.cutoff)).collect::<Result<Vec<_>>>()
        })?;
        for r in &reps {
            if !r.equal {
                violations.push(format!("identity {:?} has defect at frequency {:?}", r.identity_id, r.witness));
            }
        }
        st.identities = reps;
    }
    if cfg.command == Command::Report {
        let a = need()?;
        let ctx = sieve_ctx(cfg, a.len())?;
        st.l1 = Some(t.run("l1", || l1_lower_report(a, &ctx))?);
        let sizes = cfg.sizes_or(&[30, 100, 300]);
        st.growth = Some(t.run("growth", || growth_rows(&sizes, cfg.q))?);
        st.surplus = Some(t.run("surplus", || surplus_rows(&sizes, cfg.k, cfg.l))?);
    }
    if cfg.command == Command::Phi {
        let b = match (&input, cfg.size) {
            (Some(a), _) => a.clone(),
            (None, Some(n)) => IntegerSet::from_u64(1..=n)?,
            (None, None) => return Err(Error::InvalidParams("phi needs --input or --size".into())),
        };
        let w = phi_weights(cfg, &b);
        let (_, cert) = t.run("phi", || build_phi(&b, &w, cfg.base, cfg.grid))?;
        for c in cert.checks.iter().filter(|c| !c.holds) {
            violations.push(format!("phi check {} (block {:?}) failed: {} vs {}", c.name, c.block, c.value, c.bound));
        }
        st.phi = Some(cert);
    }
    if cfg.command == Command::Lp {
        let sizes = cfg.sizes_or(&[16, 32, 64]);
        let family = match cfg.family {
            LpFamily::Triadic => triadic_family(&sizes.iter().map(|&n| n as usize).collect::<Vec<_>>())?,
            LpFamily::Interval => sizes.iter().map(|&n| IntegerSet::from_u64(1..=n)).collect::<Result<_>>()?,
        };
        st.lp = Some(t.run("lp", || lacunary_l1_diagnostic(&family, cfg.seed))?);
    }
    if cfg.command == Command::Oracle {
        let a = need()?;
        st.oracle = Some(t.run("oracle", || compare(a, cfg.k, cfg.l))?);
    }
    let keep_input = !matches!(cfg.command, Command::Phi | Command::Lp) || input.is_some();
    Ok(Report {
        version: VERSION.into(),
        config: cfg.clone(),
        input_set: if keep_input { input } else { None },
        stages: st,
        violations,
        timings: t.0,
    })
}

fn phi_weights(cfg: &RunConfig, b: &IntegerSet) -> Vec<C> {
    let spec = match cfg.weights {
        WeightKind::Unit => WeightSpec::Unit,
        WeightKind::Random => WeightSpec::Random { seed: cfg.seed },
    };
    make_weights(b, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    L1Growth,
    SurplusVsN,
    PhiProfile,
}

fn missing(stage: &str) -> Error {
    Error::InvalidParams(format!("report has no {stage} stage"))
}

/// Headered CSV for one of the plot kinds.
pub fn emit_plotdata(report: &Report, kind: PlotKind) -> Result<String> {
    let mut out = String::new();
    match kind {
        PlotKind::L1Growth => {
            let rows = report.stages.growth.as_ref().ok_or_else(|| missing("growth"))?;
            out.push_str("N,g_a_l1,l_a_l1,log_over_loglog\n");
            for r in rows {
                out.push_str(&format!("{},{},{},{}\n", r.n, r.g_a, r.l_a, r.log_over_loglog));
            }
        }
        PlotKind::SurplusVsN => {
            let rows = report.stages.surplus.as_ref().ok_or_else(|| missing("surplus"))?;
            out.push_str("N,count,surplus_num,surplus_den\n");
            for r in rows {
                out.push_str(&format!("{},{},{},{}\n", r.n, r.count, r.surplus.numer(), r.surplus.denom()));
            }
        }
        PlotKind::PhiProfile => {
            let cert = report.stages.phi.as_ref().ok_or_else(|| missing("phi"))?;
            // Φ is rebuilt from the echoed configuration
            let b = IntegerSet::new(cert.elements.iter().map(|&e| e as u128).collect())?;
            let w = phi_weights(&report.config, &b);
            let (phi, _) = build_phi(&b, &w, cert.base, cert.grid)?;
            let m = phi.samples.len();
            out.push_str("x,abs_phi\n");
            for (j, z) in phi.samples.iter().enumerate() {
                out.push_str(&format!("{},{}\n", j as f64 / m as f64, z.norm()));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> RunConfig {
        RunConfig { command, input: Some("<memory>".into()), ..RunConfig::default() }
    }

    #[test]
    fn analyze_classifies() {
        let a = IntegerSet::from_u64([1, 3, 9, 27]).unwrap();
        let r = run(&cfg(Command::Analyze), Some(a)).unwrap();
        let c = r.stages.classification.unwrap();
        assert!(c.geometric);
        assert!((c.lacunary_exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extract_meets_floor() {
        let a = IntegerSet::from_u64(1..=30).unwrap();
        let r = run(&cfg(Command::Extract), Some(a)).unwrap();
        assert!(r.stages.extraction.as_ref().unwrap().certificate.count >= 11);
        assert!(r.violations.is_empty());
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert!(back.reverify().unwrap());
    }

    #[test]
    fn routes_agree_for_2k_4k() {
        for k in [2, 4, 6] {
            let (m1, mut a1) = route_arcs(Route::Arcs, k, 2 * k).unwrap();
            let (m2, mut a2) = route_arcs(Route::Lacunary, k, 2 * k).unwrap();
            assert_eq!((m1 * 2, m2), (k, k));
            a1.sort_by_key(|a| a.arcs()[0].lo);
            a2.sort_by_key(|a| a.arcs()[0].lo);
            assert_eq!(a1, a2);
        }
    }

    #[test]
    fn reproducible_minus_timings() {
        let a = IntegerSet::from_u64([2, 5, 7, 11, 12]).unwrap();
        let c = RunConfig { k: 2, l: 4, ..cfg(Command::Extract) };
        let r1 = run(&c, Some(a.clone())).unwrap();
        let r2 = run(&c, Some(a)).unwrap();
        assert_eq!(r1.reproducible_json().unwrap(), r2.reproducible_json().unwrap());
    }

    #[test]
    fn plotdata_needs_stage() {
        let a = IntegerSet::from_u64([1, 2]).unwrap();
        let r = run(&cfg(Command::Analyze), Some(a)).unwrap();
        assert!(emit_plotdata(&r, PlotKind::L1Growth).is_err());
        let g = growth_rows(&[30, 100, 300], 5).unwrap();
        let r = Report { stages: Stages { growth: Some(g), ..Stages::default() }, ..r };
        let csv = emit_plotdata(&r, PlotKind::L1Growth).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn missing_input_rejected() {
        let c = RunConfig { input: None, ..cfg(Command::Extract) };
        assert!(run(&c, None).unwrap_err().is_input_error());
    }
}
