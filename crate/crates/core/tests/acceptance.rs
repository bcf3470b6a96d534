//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every criterion is also checked against an oracle written here, apart from
//! the library code path it exercises.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num::rational::Ratio;
use num::{BigInt, BigRational, Signed, Zero};
use sumfree_core::arcs::{canonical_family, canonical_omega, is_arc_kl_sumfree, r, ArcSet};
use sumfree_core::arith::{gamma4, mobius, next_prime, prime_factors, sieve_rough, SieveContext};
use sumfree_core::dilation::{balanced_function, exact_l1, extract_certified, maximize_count};
use sumfree_core::fourier::grid::{grid_norms, SpectralPoly, Which, C};
use sumfree_core::lp::{lacunary_l1_diagnostic, triadic_family};
use sumfree_core::mps::{build_phi, make_weights, WeightSpec};
use sumfree_core::oracle::compare;
use sumfree_core::pipeline::growth_rows;
use sumfree_core::sets::{generate, is_kl_sumfree, Family, IntegerSet};
use sumfree_core::sieve::{inner_sum_decomposition, l1_lower_report, verify_identity, IdentityId};

type Q = Ratio<i128>;

/// Outcome of one criterion: pass flag and a one-line summary.
type Outcome = (bool, String);

type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

fn random(n: u64, max: u64, seed: u64) -> IntegerSet {
    generate(&Family::Random { n, max, seed }).unwrap()
}

/// All k-fold sums of `x` (with repetition).
fn fold_sums(x: &[u64], k: u32) -> BTreeSet<u64> {
    let mut s = BTreeSet::from([0u64]);
    for _ in 0..k {
        s = s.iter().flat_map(|&a| x.iter().map(move |&b| a + b)).collect();
    }
    s
}

fn naive_sumfree(x: &[u64], k: u32, l: u32) -> bool {
    fold_sums(x, k).is_disjoint(&fold_sums(x, l))
}

fn frac(x: Q) -> Q {
    x - x.floor()
}

/// Exact L¹, integral and maximum of `c + Σ_j w_j Σ_{m∈A} 1_{arc_j}(m·x)` on
/// the torus, by enumerating every breakpoint and evaluating at midpoints.
fn brute_step(a: &[u64], arcs: &[(Q, Q, i128)], c: Q) -> (BigRational, BigRational, Q) {
    let mut cuts = BTreeSet::from([q(0, 1), q(1, 1)]);
    for &m in a {
        let m = m as i128;
        for &(lo, hi, _) in arcs {
            for e in [lo, hi] {
                for j in 0..m {
                    cuts.insert((e + j) / m);
                }
            }
        }
    }
    let cuts: Vec<Q> = cuts.into_iter().collect();
    let (mut l1, mut int, mut max) = (BigRational::zero(), BigRational::zero(), None::<Q>);
    for w in cuts.windows(2) {
        let mid = (w[0] + w[1]) / 2;
        let mut v = c;
        for &m in a {
            let y = frac(mid * m as i128);
            for &(lo, hi, wt) in arcs {
                if lo < y && y < hi {
                    v += wt;
                }
            }
        }
        let len = w[1] - w[0];
        l1 += to_big(v.abs() * len);
        int += to_big(v * len);
        max = Some(max.map_or(v, |m| m.max(v)));
    }
    (l1, int, max.unwrap())
}

fn to_big(x: Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn c1_sieve_exactness() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let a = random(4 + seed % 7, 40, 1000 + seed);
        for qq in [3u64, 5] {
            let n = a.len() as u64;
            let ctx = SieveContext::new(qq, next_prime((n * n).max(qq + 1))).unwrap();
            for id in IdentityId::ALL {
                let rep = verify_identity(id, &a, &ctx, 2000).unwrap();
                checked += 1;
                if !(rep.equal && rep.defect.is_zero()) {
                    failures.push(format!("seed {seed} Q={qq} {id:?}"));
                }
            }
        }
    }
    (failures.is_empty(), format!("{checked} identity checks, failures {failures:?}"))
}

/// `Σ μ(m) γ(n/m) sin(nπ/(6m))` over odd squarefree m | n with prime factors ≤ Q.
fn inner_sum_float(n: u64, qq: u64) -> f64 {
    (1..=n)
        .filter(|&m| n.is_multiple_of(m) && m % 2 == 1 && mobius(m) != 0 && prime_factors(m).iter().all(|&p| p <= qq))
        .map(|m| mobius(m) as f64 * gamma4(n / m) as f64 * (n as f64 * PI / (6.0 * m as f64)).sin())
        .sum()
}

fn c2_inner_sum() -> Outcome {
    let ctx = SieveContext::new(5, 5).unwrap();
    let mut bad = Vec::new();
    let mut oracle_gap: f64 = 0.0;
    for n in 1..=10_000u64 {
        let v = inner_sum_decomposition(n, &ctx).unwrap().total;
        let in_n1 = sieve_rough(n, &ctx);
        let in_3n1 = n % 3 == 0 && sieve_rough(n / 3, &ctx);
        let want = if in_n1 {
            Ratio::new(1, 2)
        } else if in_3n1 {
            Ratio::new(-3, 2)
        } else {
            Ratio::from_integer(0)
        };
        if v != want {
            bad.push(n);
        }
        if n <= 2000 {
            oracle_gap = oracle_gap.max((inner_sum_float(n, 5) - *want.numer() as f64 / *want.denom() as f64).abs());
        }
    }
    let one = inner_sum_decomposition(1, &ctx).unwrap().total;
    let three = inner_sum_decomposition(3, &ctx).unwrap().total;
    let ok = bad.is_empty() && one == Ratio::new(1, 2) && three == Ratio::new(-3, 2) && oracle_gap < 1e-9;
    (ok, format!("I(1) = {one}, I(3) = {three}, mismatches {}, float oracle gap {oracle_gap:.1e}", bad.len()))
}

fn c3_bourgain_floor() -> Outcome {
    let omega = canonical_omega(2, 1, 1).unwrap();
    let mut worst = u64::MAX;
    let mut slowest = Duration::ZERO;
    let mut bad = Vec::new();
    for seed in 0..100u64 {
        let a = random(30, 10_000, seed);
        let t = Instant::now();
        let (x, count) = maximize_count(&a, &omega).unwrap();
        slowest = slowest.max(t.elapsed());
        let x = q(*x.numer() as i128, *x.denom() as i128);
        let orbit: Vec<u64> = a
            .iter()
            .map(|m| m as u64)
            .filter(|&m| {
                let y = frac(x * m as i128);
                q(1, 3) < y && y < q(2, 3)
            })
            .collect();
        if orbit.len() as u64 != count || !naive_sumfree(&orbit, 2, 1) || count < 11 {
            bad.push(seed);
        }
        worst = worst.min(count);
    }
    let ok = bad.is_empty() && slowest <= Duration::from_secs(2);
    (ok, format!("min count {worst} (floor 11), slowest {:.3}s, bad seeds {bad:?}", slowest.as_secs_f64()))
}

fn c4_extract_24() -> Outcome {
    let mut worst = u64::MAX;
    let mut bad = Vec::new();
    for seed in 0..100u64 {
        let a = random(30, 10_000, seed);
        let c = extract_certified(&a, 2, 4, None).unwrap();
        let sub: Vec<u64> = c.subset.iter().map(|v| v as u64).collect();
        let sub_in_a = sub.iter().all(|&v| a.contains(v as u128));
        let ok = c.count >= 5
            && c.count == sub.len() as u64
            && sub_in_a
            && is_kl_sumfree(&c.subset, 2, 4).unwrap()
            && naive_sumfree(&sub, 2, 4);
        if !ok {
            bad.push(seed);
        }
        worst = worst.min(c.count);
    }
    (bad.is_empty(), format!("min count {worst} (floor 5), bad seeds {bad:?}"))
}

fn c5_oracle_dominance() -> Outcome {
    let mut violations = Vec::new();
    let mut gaps = 0i64;
    for seed in 0..50u64 {
        let a = random(6 + seed % 9, 100, 500 + seed);
        for (k, l) in [(2, 1), (2, 4)] {
            match compare(&a, k, l) {
                Ok(c) => {
                    let w: Vec<u64> = c.witness.iter().map(|v| v as u64).collect();
                    if c.extractor > c.oracle as u64 || !naive_sumfree(&w, k, l) || w.len() != c.oracle {
                        violations.push((seed, k, l));
                    }
                    gaps += c.gap;
                }
                Err(_) => violations.push((seed, k, l)),
            }
        }
    }
    (violations.is_empty(), format!("100 comparisons, total gap {gaps}, violations {violations:?}"))
}

fn c6_l1_engine() -> Outcome {
    let omega = canonical_omega(2, 1, 1).unwrap();
    let one = IntegerSet::from_u64([1]).unwrap();
    let l1_one = exact_l1(&balanced_function(&one, &omega).unwrap());
    let (brute_one, _, _) = brute_step(&[1], &[(q(1, 3), q(2, 3), 1)], q(-1, 3));
    let mut ok = l1_one == to_big(q(4, 9)) && brute_one == to_big(q(4, 9));
    let mut bad = Vec::new();
    for seed in 0..20u64 {
        let a = random(8, 60, 200 + seed);
        let f = balanced_function(&a, &omega).unwrap();
        let l1 = exact_l1(&f);
        let int = f.integral();
        let (_, max) = f.max();
        let av: Vec<u64> = a.iter().map(|v| v as u64).collect();
        let n = av.len() as i128;
        let (bl1, bint, bmax) = brute_step(&av, &[(q(1, 3), q(2, 3), 1)], q(-n, 3));
        let maxq = q(*max.numer() as i128, *max.denom() as i128);
        let good = int.is_zero()
            && bint.is_zero()
            && l1 == bl1
            && maxq == bmax
            && to_big(maxq) * BigRational::from_integer(2.into()) >= l1;
        if !good {
            bad.push(seed);
        }
    }
    ok &= bad.is_empty();
    (ok, format!("‖F‖₁({{1}}) = {l1_one}, 20 sets: ∫F = 0 and max F ≥ ½‖F‖₁, bad seeds {bad:?}"))
}

fn c7_c8_phi() -> (Outcome, Outcome) {
    let b = IntegerSet::from_u64(1..=10_101).unwrap();
    let base = 100u64;
    let eps = 4.0 * 0.1 / (0.9 * 0.99);
    let c100 = (1.0 - 0.449) / 200.0;
    let harmonic: f64 = (1..=10_101).map(|j| 1.0 / j as f64).sum();
    let mut lines = Vec::new();
    let mut ok7 = true;
    let mut worst_dev: f64 = 0.0;
    let t = Instant::now();
    for spec in [WeightSpec::Unit, WeightSpec::Random { seed: 1 }] {
        let w: Vec<C> = make_weights(&b, spec);
        let (_, cert) = build_phi(&b, &w, base, 1 << 17).unwrap();
        let mut ok = cert.sup_bound <= 10.001 && cert.all_hold() && cert.validate().is_empty();
        for blk in &cert.blocks {
            let w = blk.width as i64;
            let supp_ok = blk.q_support.is_none_or(|[lo, hi]| lo >= -w && hi <= 0);
            ok &= supp_ok
                && blk.l2_one_minus_q <= 2.0 / (blk.size as f64).sqrt() + 1e-6
                && blk.closeness <= 0.45 + 1e-6
                && blk.closeness <= eps + 1e-6;
        }
        ok &= cert.outside_support <= 1e-6;
        ok &= cert.pairing[0] >= c100 * harmonic;
        ok7 &= ok;
        worst_dev = worst_dev.max(cert.recursion_deviation);
        lines.push(format!(
            "{spec:?}: ‖Φ‖∞ ≤ {:.4}, max closeness {:.4}, Re S {:.3} ≥ {:.5}",
            cert.sup_bound,
            cert.blocks.iter().map(|b| b.closeness).fold(0.0, f64::max),
            cert.pairing[0],
            c100 * harmonic
        ));
    }
    let elapsed = t.elapsed();
    ok7 &= elapsed <= Duration::from_secs(300);
    (
        (ok7, format!("{} ({:.1}s)", lines.join("; "), elapsed.as_secs_f64())),
        (worst_dev <= 1e-8, format!("max |recursive − explicit| = {worst_dev:.2e}")),
    )
}

fn c9_lacunary() -> Outcome {
    let t = Instant::now();
    let fam = triadic_family(&[16, 32, 64]).unwrap();
    let rep = lacunary_l1_diagnostic(&fam, 0).unwrap();
    let mut ok = rep.fit.slope >= 1.0 / 3.0 && rep.fit.slope_lo > 1.0 / 3.0;
    // distinct pairwise sums give ‖g‖₄⁴ = 2N² − N, and Hölder
    // ‖g‖₂² ≤ ‖g‖₁^{2/3}‖g‖₄^{4/3} bounds ‖g‖₁ from below; ‖g‖₁ ≤ ‖g‖₂ above
    for row in &rep.rows {
        let n = row.n as f64;
        let lower = n.powf(1.5) / (2.0 * n * n - n).sqrt();
        ok &= row.l1 + row.l1_error >= lower && row.l1 - row.l1_error <= n.sqrt();
    }
    let elapsed = t.elapsed();
    ok &= elapsed <= Duration::from_secs(60);
    let rows: Vec<String> = rep.rows.iter().map(|r| format!("N={} ‖g‖₁={:.3}±{:.3}", r.n, r.l1, r.l1_error)).collect();
    (
        ok,
        format!(
            "slope {:.3} in [{:.3}, {:.3}] vs 1/3; {} ({:.1}s)",
            rep.fit.slope,
            rep.fit.slope_lo,
            rep.fit.slope_hi,
            rows.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

/// Midpoint rule for ∫|sin(πNx)/sin(πx)| with 2^22 nodes; nodes avoid x = 0.
fn dirichlet_brute(n: u64) -> f64 {
    let m = 1u64 << 22;
    let s: f64 = (0..m)
        .map(|j| {
            let x = (j as f64 + 0.5) / m as f64;
            ((PI * n as f64 * x).sin() / (PI * x).sin()).abs()
        })
        .sum();
    s / m as f64
}

fn c10_dirichlet() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [100u64, 1000] {
        let freqs: Vec<i64> = (1..=n as i64).collect();
        let p = SpectralPoly::unit_sum(&freqs);
        let est = grid_norms(&p, Which::L1, 1 << 24).unwrap();
        let brute = dirichlet_brute(n);
        let ratio = est.value / (n as f64).ln();
        let agree = (est.value - brute).abs() <= est.error + 1e-6;
        ok &= agree && (0.30..=0.60).contains(&ratio);
        parts.push(format!("N={n}: ‖D‖₁ = {:.5}±{:.1e} (brute {brute:.5}), ratio {ratio:.4}", est.value, est.error));
    }
    (ok, format!("{}; band [0.30, 0.60]", parts.join("; ")))
}

fn c11_growth() -> Outcome {
    let rows = growth_rows(&[30, 100, 300], 5).unwrap();
    let ctx = SieveContext::new(5, 5).unwrap();
    let mut heads = Vec::new();
    let mut ok = true;
    for row in &rows {
        let a = IntegerSet::from_u64(1..=row.n).unwrap();
        let rep = l1_lower_report(&a, &ctx).unwrap();
        heads.push(rep.headline.exact.clone());
        ok &= row.ratio.is_finite();
        if row.n <= 100 {
            // G = Σ(1_{Ω₁} + 1_{Ω₂})(mx) − N/3, L = Σ(1_{Ω₁} − 1_{Ω₂})(mx)
            let av: Vec<u64> = (1..=row.n).collect();
            let n = row.n as i128;
            let (g, _, _) = brute_step(&av, &[(q(1, 6), q(1, 3), 1), (q(2, 3), q(5, 6), 1)], q(-n, 3));
            let (l, _, _) = brute_step(&av, &[(q(1, 6), q(1, 3), 1), (q(2, 3), q(5, 6), -1)], Q::zero());
            ok &= rep.headline.exact == g.clone().max(l.clone());
            ok &= g == rep.g_a.exact && l == rep.l_a.exact;
        }
    }
    ok &= heads.windows(2).all(|w| w[0] <= w[1]);
    let text: Vec<String> =
        rows.iter().map(|r| format!("N={} max ‖·‖₁={:.4} ratio {:.4}", r.n, r.g_a.max(r.l_a), r.ratio)).collect();
    (ok, text.join("; "))
}

/// Grid oracle: the k-fold and l-fold sumsets of the points j/D inside `o`
/// never meet.
fn grid_sumfree(o: &ArcSet, k: u32, l: u32, d: i64) -> bool {
    let pts: Vec<usize> = (0..d).filter(|&j| o.contains(r(j, d))).map(|j| j as usize).collect();
    let fold = |t: u32| {
        let mut cur = vec![false; d as usize];
        cur[0] = true;
        for _ in 0..t {
            let mut next = vec![false; d as usize];
            for (s, &on) in cur.iter().enumerate() {
                if on {
                    for &p in &pts {
                        next[(s + p) % d as usize] = true;
                    }
                }
            }
            cur = next;
        }
        cur
    };
    let (a, b) = (fold(k), fold(l));
    !a.iter().zip(&b).any(|(x, y)| *x && *y)
}

fn c12_arcs() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (k, l) in [(2u32, 1u32), (2, 4), (4, 8), (6, 12)] {
        let want = if (k, l) == (2, 1) { r(1, 3) } else { r(1, 6) };
        let variants: &[u8] = if (k, l) == (2, 1) { &[1] } else { &[1, 2] };
        for &v in variants {
            let o = canonical_omega(k, l, v).unwrap();
            ok &= o.measure() == want;
            for m in 1..=12 {
                ok &= o.pullback(m).unwrap().measure() == o.measure();
            }
        }
        let fam = canonical_family(k, l).unwrap();
        for o in &fam {
            ok &= is_arc_kl_sumfree(o, k, l).unwrap() && grid_sumfree(o, k, l, 1260);
        }
        notes.push(format!("({k},{l}): {} arcs", fam.len()));
    }
    (ok, notes.join(", "))
}

fn run(id: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        }
    };
    println!("{} criterion {id}: {detail} [{:.1}s]", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    ok
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let want = |id: &str| filter.is_empty() || filter.iter().any(|f| f == id);
    let mut all = true;
    let simple: [Criterion; 10] = [
        ("1", c1_sieve_exactness),
        ("2", c2_inner_sum),
        ("3", c3_bourgain_floor),
        ("4", c4_extract_24),
        ("5", c5_oracle_dominance),
        ("6", c6_l1_engine),
        ("9", c9_lacunary),
        ("10", c10_dirichlet),
        ("11", c11_growth),
        ("12", c12_arcs),
    ];
    for (id, f) in simple.iter().take(6) {
        if want(id) {
            all &= run(id, f);
        }
    }
    if want("7") || want("8") {
        let mut second = None;
        all &= run("7", || {
            let (a, b) = c7_c8_phi();
            second = Some(b);
            a
        });
        all &= run("8", || second.unwrap_or((false, "criterion 7 did not complete".into())));
    }
    for (id, f) in simple.iter().skip(6) {
        if want(id) {
            all &= run(id, f);
        }
    }
    if !all {
        std::process::exit(1);
    }
}
