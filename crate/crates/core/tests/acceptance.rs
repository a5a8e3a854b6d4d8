//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use weighted_lp::algebra::{lpalg_ratio, property_suite, GroupFunction, NormContext, RatioVerdict};
use weighted_lp::asymptotics::{numeric_f, LaplaceProblem};
use weighted_lp::conditions::{condition_row, MatrixOptions, Verdict};
use weighted_lp::funcalc::{build_bump, spectral_mapping_check, u_recursive, u_series, SeriesBudget};
use weighted_lp::operator::{OperatorModel, RealFunction};
use weighted_lp::spectral::{character_domain, exponent_grid, finite_spectrum, spectral_radii};
use weighted_lp::weight::{Weight, WeightSpec};
use weighted_lp::{GroupElement, GroupModel};

type Outcome = Result<(bool, String), String>;

struct Harness {
    failures: usize,
}

impl Harness {
    fn run(&mut self, id: u32, title: &str, limit: Duration, body: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= limit;
        let pass = ok && in_time;
        if !pass {
            self.failures += 1;
        }
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), limit.as_secs());
        let timing = if in_time { timing } else { format!("{timing}, over the limit") };
        println!("{} criterion {id} ({title}): {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn integers() -> GroupModel {
    GroupModel::integers()
}

fn on_z(spec: WeightSpec) -> Result<Weight, String> {
    Weight::on(spec, &integers()).map_err(e)
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// `R(m) = Σ_k e^{−q(√|k| + √|m−k| − √|m|)}` by brute force over `|k| ≤ K`.
fn ratio_oracle_sqrt(m: i64, q: f64, k_max: i64) -> f64 {
    let sm = (m.abs() as f64).sqrt();
    (-k_max..=k_max)
        .map(|k| (-q * ((k.abs() as f64).sqrt() + ((m - k).abs() as f64).sqrt() - sm)).exp())
        .sum()
}

/// Composite Simpson rule on `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `F(x)` for `Q = 1`, `γ = 1/2` after `t = s²`: `∫_0^{√½} 2s³ e^{x(1 − s − √(1−s²))} ds`.
fn laplace_oracle(x: f64) -> f64 {
    simpson(|s| 2.0 * s * s * s * (x * (1.0 - s - (1.0 - s * s).sqrt())).exp(), 0.0, 0.5f64.sqrt(), 1_000_000)
}

fn fft_convolution(f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let (mut a, mut b) = (f.to_vec(), g.to_vec());
    fwd.process(&mut a);
    fwd.process(&mut b);
    let mut c: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    inv.process(&mut c);
    c.iter().map(|z| z / n as f64).collect()
}

fn dense(f: &GroupFunction, n: i64) -> Vec<Complex64> {
    (0..n).map(|k| f.get(GroupElement::scalar(k))).collect()
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let w = on_z(WeightSpec::subexponential(1.0, 0.5))?;
    let rep = lpalg_ratio(&w, 2.0, 200).map_err(e)?;
    let mut worst = 0.0f64;
    for m in [0i64, 1, 7, 20, 100, 200] {
        let oracle = ratio_oracle_sqrt(m, 2.0, 60_000);
        let ours = rep.points[m as usize].ratio;
        worst = worst.max((ours / oracle - 1.0).abs());
    }
    let ok = rep.verdict == RatioVerdict::Bounded && rep.slope <= 1e-3 && rep.argmax <= 50 && worst < 1e-6;
    Ok((ok, format!("max R = {:.6} at m = {}, slope on [100, 200] = {:.3e}, oracle rel. diff {:.1e}", rep.max_ratio, rep.argmax, rep.slope, worst)))
}

fn criterion_2() -> Outcome {
    let w = on_z(WeightSpec::exponential(1.0))?;
    let rep = lpalg_ratio(&w, 2.0, 50).map_err(e)?;
    // For ω = e^{|n|}, q = 2: R(m) = m + 1 + 2e^{−4}/(1 − e^{−4}) exactly.
    let extra = 2.0 * (-4f64).exp() / (1.0 - (-4f64).exp());
    let mut ok = true;
    let mut worst = 0.0f64;
    for p in &rep.points {
        let m = p.m as f64;
        ok &= p.ln_ratio >= (m + 1.0).ln();
        worst = worst.max((p.ratio / (m + 1.0 + extra) - 1.0).abs());
    }
    ok &= worst < 1e-9;
    Ok((ok, format!("R(m) ≥ m+1 for all m ≤ 50; closed-form rel. diff {worst:.1e}")))
}

fn criterion_3() -> Outcome {
    let prob = LaplaceProblem::new(1.0, 0.5, 2.0).map_err(e)?;
    let c2 = prob.c2();
    let f500 = numeric_f(&prob, 500.0).map_err(e)?;
    let clause_b = f500.value * 500f64.powi(4) / 12.0;
    let x = 500f64;
    let fq = numeric_f(&prob, 2.0 * x.sqrt()).map_err(e)?;
    let clause_c = x * x * fq.value / prob.c3();
    let f100 = numeric_f(&prob, 100.0).map_err(e)?.value;
    let oracle = laplace_oracle(100.0);
    let oracle_diff = (f100 / oracle - 1.0).abs();
    let ok = (c2 - 12.0).abs() < 1e-12 && (clause_b - 1.0).abs() < 0.05 && (clause_c - 1.0).abs() < 0.05 && oracle_diff < 1e-8;
    let later = [1e4, 1e6]
        .iter()
        .map(|&y: &f64| Ok(format!("{:.4} at x = {y:e}", y * y * numeric_f(&prob, 2.0 * y.sqrt())?.value / prob.c3())))
        .collect::<Result<Vec<String>, weighted_lp::Error>>()
        .map_err(e)?;
    Ok((
        ok,
        format!(
            "C₂ = {c2}; F(500)·500⁴/12 = {clause_b:.4}; x²F(q√x)/C₃ = {clause_c:.4} at x = 500 ({}); F(100) oracle rel. diff {oracle_diff:.1e}",
            later.join(", ")
        ),
    ))
}

fn criterion_4() -> Outcome {
    let z = integers();
    let w = on_z(WeightSpec::polynomial(1.0, 2.0))?;
    let ctx = NormContext::new(2.0, w).map_err(e)?;
    let f = GroupFunction::from_real(&z, &[(-1, 1.0), (1, 1.0)]).map_err(e)?;
    let radii = spectral_radii(&f, &ctx, 10).map_err(e)?;
    let ok = radii.l1.contains(2.0)
        && radii.weighted.contains(2.0)
        && radii.l1.width() < 0.05
        && radii.weighted.width() < 0.05
        && radii.ordered_at_every_n();
    Ok((
        ok,
        format!(
            "r₁ ∈ [{:.6}, {:.6}], r_(2,ω) ∈ [{:.6}, {:.6}], ordered at every N: {}",
            radii.l1.lower,
            radii.l1.upper,
            radii.weighted.lower,
            radii.weighted.upper,
            radii.ordered_at_every_n()
        ),
    ))
}

fn criterion_5() -> Outcome {
    let grid = exponent_grid(-2.0, 2.0, 0.01);
    let poly = character_domain(&on_z(WeightSpec::polynomial(1.0, 2.0))?, 2.0, &grid).map_err(e)?;
    let sub = character_domain(&on_z(WeightSpec::subexponential(1.0, 0.5))?, 2.0, &grid).map_err(e)?;
    let mixed = on_z(WeightSpec::product(WeightSpec::exponential(1.0), WeightSpec::polynomial(1.0, 2.0)))?;
    let dom = character_domain(&mixed, 2.0, &grid).map_err(e)?;
    let covers = dom.undecided.is_empty() && dom.intervals.iter().any(|&(lo, hi)| lo <= -0.9 && hi >= 0.9);

    let c32 = GroupModel::cyclic(32).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_im = 0.0f64;
    let mut worst_eig = 0.0f64;
    for _ in 0..20 {
        let mut vals = vec![Complex64::new(0.0, 0.0); 32];
        vals[0] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for k in 1..=16 {
            let v = Complex64::new(rng.random_range(-1.0..1.0), if k == 16 { 0.0 } else { rng.random_range(-1.0..1.0) });
            vals[k] = v;
            vals[(32 - k) % 32] = v.conj();
        }
        let f = GroupFunction::from_pairs(&c32, vals.iter().enumerate().map(|(k, &v)| (GroupElement::scalar(k as i64), v))).map_err(e)?;
        let spec = finite_spectrum(&f).map_err(e)?;
        worst_im = worst_im.max(spec.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        // Circulant matrix of g ↦ f*g, diagonalized independently.
        let m = DMatrix::from_fn(32, 32, |i, j| vals[(i + 32 - j) % 32]);
        let eig = m.symmetric_eigen();
        let mut ours: Vec<f64> = spec.iter().map(|z| z.re).collect();
        let mut theirs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        worst_eig = worst_eig.max(ours.iter().zip(&theirs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let ok = poly.is_only_zero() && sub.is_only_zero() && covers && worst_im < 1e-10 && worst_eig < 1e-10;
    Ok((
        ok,
        format!(
            "domains: poly {{0}} {}, subexp {{0}} {}, e^|n|(1+|n|)² intervals {:?}; finite spectra max |Im| {worst_im:.1e}, eigen oracle diff {worst_eig:.1e}",
            poly.is_only_zero(),
            sub.is_only_zero(),
            dom.intervals
        ),
    ))
}

fn criterion_6() -> Outcome {
    let c16 = GroupModel::cyclic(16).map_err(e)?;
    let ctx = NormContext::new(2.0, Weight::on(WeightSpec::polynomial(1.0, 2.0), &c16).map_err(e)?).map_err(e)?;
    // (δ₁+δ₋₁)/2 scaled by 0.02 and shifted by 0.98δ₀: characters in [0.96, 1].
    let f = GroupFunction::from_real(&c16, &[(0, 0.98), (1, 0.01), (15, 0.01)]).map_err(e)?;
    let (a, b, eps) = (0.02, TAU - 0.02, 0.93);
    let psi = build_bump(a, b, eps, 64).map_err(e)?;
    let budget = SeriesBudget { abs_tol: 1e-9, n_max: 64, ..Default::default() };
    let rep = spectral_mapping_check(&f, &psi, &ctx, &budget).map_err(e)?;
    let in_plateau = rep.characters.iter().all(|c| c.1 > a + eps && c.1 < b - eps);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let c = rng.random_range(-0.3..0.3);
        let s = rng.random_range(-0.2..0.2);
        let g = GroupFunction::from_real(&c16, &[(0, c), (1, s), (15, s)]).map_err(e)?;
        for n in 1..=8 {
            let us = u_series(&g, n, &ctx, &budget).map_err(e)?;
            let ur = u_recursive(&g, n, &ctx, &budget).map_err(e)?;
            worst = worst.max(us.value.distance_sup(&ur.value).map_err(e)?);
        }
    }
    let ok = in_plateau && rep.max_error < 1e-6 && worst < 1e-7;
    Ok((
        ok,
        format!("mapping error {:.2e} (tail estimate {:.1e}), series vs recursion max diff {worst:.1e} for n ≤ 8", rep.max_error, rep.tail_estimate),
    ))
}

fn criterion_7() -> Outcome {
    let zoo = [
        (WeightSpec::polynomial(1.0, 2.0), Some((Verdict::Holds, Verdict::Holds, Verdict::Holds))),
        (WeightSpec::polynomial(2.0, 0.5), Some((Verdict::Holds, Verdict::Holds, Verdict::Holds))),
        (WeightSpec::subexponential(1.0, 0.5), Some((Verdict::Holds, Verdict::Holds, Verdict::Holds))),
        (WeightSpec::subexponential(2.0, 0.3), Some((Verdict::Holds, Verdict::Holds, Verdict::Holds))),
        (WeightSpec::exponential(1.0), Some((Verdict::Fails, Verdict::Fails, Verdict::Fails))),
        (WeightSpec::exponential(0.2), Some((Verdict::Fails, Verdict::Fails, Verdict::Fails))),
        (WeightSpec::product(WeightSpec::subexponential(1.0, 0.5), WeightSpec::polynomial(1.0, 1.0)), Some((Verdict::Holds, Verdict::Holds, Verdict::Holds))),
        (WeightSpec::product(WeightSpec::exponential(1.0), WeightSpec::polynomial(1.0, 2.0)), None),
    ];
    let mut mismatches = Vec::new();
    let mut disagreements = 0;
    for (spec, expect) in zoo {
        let row = condition_row(&on_z(spec.clone())?, MatrixOptions::default()).map_err(e)?;
        if !row.s_matches_o_exp() {
            disagreements += 1;
        }
        if let Some((s, grs, bdna)) = expect {
            if (row.s, row.grs, row.bdna) != (s, grs, bdna) {
                mismatches.push(row.weight.clone());
            }
        }
    }
    let ok = mismatches.is_empty() && disagreements == 0;
    Ok((ok, format!("classification mismatches {mismatches:?}, (S) vs envelope disagreements {disagreements}")))
}

fn criterion_8() -> Outcome {
    let mut ops = Vec::new();
    for n in 2..=5 {
        ops.push(OperatorModel::jordan_nilpotent(n).map_err(e)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10 {
        ops.push(OperatorModel::random_contraction(2 + i % 4, 1e-3, 0.9, &mut rng).map_err(e)?);
    }
    let mut worst_ratio = 0.0f64;
    for t in &ops {
        for eps in [0.5, 0.1, 0.01] {
            let r = t.commutator_check(eps).map_err(e)?;
            worst_ratio = worst_ratio.max(r.defect / r.bound);
        }
    }
    let jordan2 = ops[0].commutator_check(0.1).map_err(e)?.defect;

    let pairs = [
        (RealFunction::indicator(0.0, 1.0), RealFunction::indicator(0.0, 1.0)),
        (RealFunction::indicator(-0.5, 0.25), RealFunction::indicator(0.0, 1.0)),
        (RealFunction::indicator(-1.0, 0.0), RealFunction::indicator(0.3, 2.0)),
    ];
    let mut hom = 0.0f64;
    for t in [&ops[1], &ops[4], &ops[9]] {
        for (f, g) in &pairs {
            hom = hom.max(t.homomorphism_defect(f, g, 1e-13).map_err(e)?);
        }
    }
    let mut finite = true;
    for t in &ops {
        for eps in [1.0, 0.1, 0.01] {
            let g = t.epsilon_growth_check(eps, 100.0, 401);
            finite &= g.measured.is_finite() && g.bound.is_some_and(|b| b.is_finite() && g.measured <= b * (1.0 + 1e-9));
        }
    }
    let ok = worst_ratio < 1.0 && jordan2 < 1e-14 && hom < 1e-8 && finite;
    Ok((
        ok,
        format!("max defect/ε² {worst_ratio:.3}, 2×2 defect {jordan2:.1e}, homomorphism defect {hom:.1e}, C(ε) finite and dominating: {finite}"),
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let z = integers();
    let c16 = GroupModel::cyclic(16).map_err(e)?;
    let mut total = 0;
    let mut cases = 0;
    for model in [&z, &c16] {
        let ctx = NormContext::new(2.0, Weight::on(WeightSpec::polynomial(1.0, 2.0), model).map_err(e)?).map_err(e)?;
        let tally = property_suite(&ctx, 4, 1000, &mut rng).map_err(e)?;
        total += tally.total_violations();
        cases += tally.cases;
    }
    let mut fft_fail = 0;
    for _ in 0..1000 {
        let f = weighted_lp::algebra::random_function(&c16, 8, &mut rng).map_err(e)?;
        let g = weighted_lp::algebra::random_function(&c16, 8, &mut rng).map_err(e)?;
        let ours = dense(&f.convolve(&g).map_err(e)?, 16);
        let oracle = fft_convolution(&dense(&f, 16), &dense(&g, 16));
        if ours.iter().zip(&oracle).any(|(a, b)| (a - b).norm() > 1e-9) {
            fft_fail += 1;
        }
    }
    cases += 1000;
    let ok = total == 0 && fft_fail == 0;
    Ok((ok, format!("{cases} cases, {total} property violations, {fft_fail} DFT-oracle mismatches")))
}

fn main() {
    let mut h = Harness { failures: 0 };
    h.run(1, "sub-exponential algebra ratio", Duration::from_secs(10), criterion_1);
    h.run(2, "exponential negative example", Duration::from_secs(1), criterion_2);
    h.run(3, "Laplace asymptotic", Duration::from_secs(5), criterion_3);
    h.run(4, "spectral radii", Duration::from_secs(30), criterion_4);
    h.run(5, "symmetry evidence", Duration::from_secs(60), criterion_5);
    h.run(6, "functional calculus", Duration::from_secs(60), criterion_6);
    h.run(7, "conditions matrix", Duration::from_secs(120), criterion_7);
    h.run(8, "operator example", Duration::from_secs(120), criterion_8);
    h.run(9, "algebra property suite", Duration::from_secs(300), criterion_9);
    if h.failures > 0 {
        println!("{} criterion(s) failed", h.failures);
        std::process::exit(1);
    }
}
