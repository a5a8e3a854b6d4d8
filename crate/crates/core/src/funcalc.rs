//! Functional calculus: the series `u(nf) = e^{inf} − 1`, its recursion, a
//! smooth periodic bump `ψ` and the element `ψ{f} = Σ ψ̂(n) u(nf)`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{GroupFunction, NormContext, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::numeric::{exp_tail_bound, fit_line};
use crate::par::{self, Execution};
use crate::quad::{integrate_adaptive, QuadOptions};
use crate::spectral::dft;

/// Relative self-adjointness defect tolerated for `f = f*`.
pub const SELF_ADJOINT_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Budgets
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesBudget {
    /// Starting truncation order for the exponential series.
    pub k_max: usize,
    /// Hard ceiling for the automatic raise of `k_max`.
    pub k_limit: usize,
    /// Fourier truncation `|n| ≤ n_max`.
    pub n_max: usize,
    pub abs_tol: f64,
    /// Largest support any intermediate function may reach.
    pub support_cap: usize,
}

impl Default for SeriesBudget {
    fn default() -> Self {
        SeriesBudget { k_max: 16, k_limit: 4096, n_max: 64, abs_tol: 1e-9, support_cap: 1 << 16 }
    }
}

fn check_support(f: &GroupFunction, budget: &SeriesBudget) -> Result<()> {
    if f.len() > budget.support_cap {
        return Err(Error::BudgetExceeded { what: "series support", size: f.len(), cap: budget.support_cap });
    }
    Ok(())
}

fn check_self_adjoint(f: &GroupFunction) -> Result<()> {
    let defect = f.self_adjoint_defect();
    if defect > SELF_ADJOINT_TOL * f.max_abs().max(1.0) {
        return Err(Error::NotSelfAdjoint { defect });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The series u(nf)
// ---------------------------------------------------------------------------

/// A truncated value with an `ℓ¹_ω` error bound.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: GroupFunction,
    /// Bound on the truncated tail, `Σ_{k>K} (|n|‖f‖)^k/k!`.
    pub tail_bound: f64,
    /// Crude floating-point error estimate for the partial sum.
    pub rounding: f64,
    pub order: usize,
}

impl SeriesValue {
    pub fn error_bound(&self) -> f64 {
        self.tail_bound + self.rounding
    }
}

/// `u(nf) = Σ_{k≥1} (in)^k/k! f^{*k}`, truncated once the remainder bound
/// drops below `budget.abs_tol`.
pub fn u_series(f: &GroupFunction, n: i64, ctx: &NormContext, budget: &SeriesBudget) -> Result<SeriesValue> {
    check_self_adjoint(f)?;
    let model = f.model();
    if n == 0 || f.is_empty() {
        return Ok(SeriesValue { value: GroupFunction::zero(model), tail_bound: 0.0, rounding: 0.0, order: 0 });
    }
    let a = n.unsigned_abs() as f64 * ctx.norm_1w(f)?;
    let mut order = budget.k_max.max(1);
    while exp_tail_bound(a, order) >= budget.abs_tol {
        order += 1;
        if order > budget.k_limit {
            return Err(Error::SeriesTruncation { tol: budget.abs_tol, max_terms: budget.k_limit });
        }
    }
    let mut power = f.clone();
    let mut acc = GroupFunction::zero(model);
    let mut coeff = Complex64::new(1.0, 0.0);
    let step = Complex64::new(0.0, n as f64);
    for k in 1..=order {
        coeff = coeff * step / k as f64;
        if k > 1 {
            power = power.convolve_with(f, Execution::default(), DEFAULT_PAIR_BUDGET)?;
            check_support(&power, budget)?;
        }
        acc = acc.linear_combination(Complex64::new(1.0, 0.0), &power, coeff)?;
    }
    Ok(SeriesValue {
        value: acc,
        tail_bound: exp_tail_bound(a, order),
        rounding: f64::EPSILON * order as f64 * a.exp(),
        order,
    })
}

/// `u(kf)` for `k = 0..=n` by the cocycle step
/// `u(kf) = u((k−1)f) + u(f) + u((k−1)f) * u(f)`, with first-order error
/// propagation.
pub fn u_sequence(u1: &SeriesValue, n: usize, ctx: &NormContext, budget: &SeriesBudget) -> Result<Vec<SeriesValue>> {
    let model = u1.value.model();
    let one = Complex64::new(1.0, 0.0);
    let norm1 = ctx.norm_1w(&u1.value)?;
    let e1 = u1.error_bound();
    let mut out = Vec::with_capacity(n + 1);
    out.push(SeriesValue { value: GroupFunction::zero(model), tail_bound: 0.0, rounding: 0.0, order: 0 });
    if n >= 1 {
        out.push(u1.clone());
    }
    for k in 2..=n {
        let prev = &out[k - 1];
        let prod = prev.value.convolve_with(&u1.value, Execution::default(), DEFAULT_PAIR_BUDGET)?;
        let value = prev.value.linear_combination(one, &u1.value, one)?.linear_combination(one, &prod, one)?;
        check_support(&value, budget)?;
        let prev_norm = ctx.norm_1w(&prev.value)?;
        let err = prev.error_bound() * (1.0 + norm1 + e1) + e1 * (1.0 + prev_norm);
        let rounding = f64::EPSILON * (prev_norm + norm1 + prev_norm * norm1) * (value.len() as f64).sqrt();
        out.push(SeriesValue { value, tail_bound: err, rounding: prev.rounding + rounding, order: u1.order });
    }
    Ok(out)
}

/// `u(nf) = n·u(f) + (Σ_{k=1}^{n−1} u(kf)) * u(f)` with `u(f)` from the
/// series and the intermediate `u(kf)` from the cocycle step.
pub fn u_recursive(f: &GroupFunction, n: i64, ctx: &NormContext, budget: &SeriesBudget) -> Result<SeriesValue> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("the recursion needs n ≥ 1, got {n}")));
    }
    let u1 = u_series(f, 1, ctx, budget)?;
    if n == 1 {
        return Ok(u1);
    }
    let n = n as usize;
    let seq = u_sequence(&u1, n - 1, ctx, budget)?;
    let one = Complex64::new(1.0, 0.0);
    let mut partial = GroupFunction::zero(f.model());
    let mut partial_err = 0.0;
    for term in &seq[1..] {
        partial = partial.linear_combination(one, &term.value, one)?;
        partial_err += term.error_bound();
    }
    let prod = partial.convolve_with(&u1.value, Execution::default(), DEFAULT_PAIR_BUDGET)?;
    let value = u1.value.linear_combination(Complex64::new(n as f64, 0.0), &prod, one)?;
    check_support(&value, budget)?;
    let norm1 = ctx.norm_1w(&u1.value)?;
    let partial_norm = ctx.norm_1w(&partial)?;
    let e1 = u1.error_bound();
    Ok(SeriesValue {
        value,
        tail_bound: n as f64 * e1 + partial_err * (norm1 + e1) + partial_norm * e1,
        rounding: seq.last().map_or(0.0, |s| s.rounding) + f64::EPSILON * partial_norm * norm1,
        order: u1.order,
    })
}

/// `‖u(nf) + u(mf) + u(nf)*u(mf) − u((n+m)f)‖_{1,ω}` with all terms from the
/// series.
pub fn cocycle_defect(f: &GroupFunction, n: i64, m: i64, ctx: &NormContext, budget: &SeriesBudget) -> Result<f64> {
    let un = u_series(f, n, ctx, budget)?.value;
    let um = u_series(f, m, ctx, budget)?.value;
    let unm = u_series(f, n + m, ctx, budget)?.value;
    let one = Complex64::new(1.0, 0.0);
    let lhs = un.linear_combination(one, &um, one)?.linear_combination(one, &un.convolve(&um)?, one)?;
    let diff = lhs.sub(&unm)?;
    if diff.is_empty() {
        return Ok(0.0);
    }
    ctx.norm_1w(&diff)
}

// ---------------------------------------------------------------------------
// Periodic bump
// ---------------------------------------------------------------------------

fn quad_opts() -> QuadOptions {
    QuadOptions { rel_tol: 0.0, abs_tol: 1e-15, max_segments: 50_000 }
}

/// Serialized form of a [`PeriodicFunction`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpDescriptor {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub n_max: usize,
    /// Exponent `α` of the mollifier `exp(−α/(1−(t/δ)²))`.
    pub sharpness: f64,
    /// `(n, Re ψ̂(n), Im ψ̂(n))` for `|n| ≤ n_max`.
    pub coefficients: Vec<(i64, f64, f64)>,
}

/// Measured decay constants `C_m = max_{1≤n≤N} |ψ̂(n)| n^m`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub constants: Vec<(u32, f64)>,
}

/// `ψ = 1_J * ρ` with `J = [a+ε/2, b−ε/2]` and `ρ` a smooth mollifier of
/// half-width `ε/2`, extended `2π`-periodically. Vanishes off `[a, b]` and
/// equals one on `[a+ε, b−ε]`.
#[derive(Clone, Debug)]
pub struct PeriodicFunction {
    a: f64,
    b: f64,
    eps: f64,
    sharpness: f64,
    mass: f64,
    coefficients: Vec<Complex64>,
}

/// Mollifier sharpness balancing the Gaussian core against the edge
/// singularity at frequency `n_max`.
fn default_sharpness(half_width: f64, n_max: usize) -> f64 {
    (n_max as f64 * half_width / 2.3).max(1.0)
}

fn unnormalized_rho(t: f64, delta: f64, alpha: f64) -> f64 {
    let s = t / delta;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-alpha / (1.0 - s * s)).exp()
    }
}

/// `(1/2π) ∫_J e^{−inθ} dθ`.
fn interval_coefficient(lo: f64, hi: f64, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new((hi - lo) / TAU, 0.0);
    }
    let nf = n as f64;
    let num = Complex64::from_polar(1.0, -nf * lo) - Complex64::from_polar(1.0, -nf * hi);
    num / Complex64::new(0.0, nf * TAU)
}

pub fn build_bump(a: f64, b: f64, eps: f64, n_max: usize) -> Result<PeriodicFunction> {
    build_bump_with(a, b, eps, n_max, None)
}

pub fn build_bump_with(a: f64, b: f64, eps: f64, n_max: usize, sharpness: Option<f64>) -> Result<PeriodicFunction> {
    if !(0.0 < a && eps > 0.0 && a + eps < b - eps && b < TAU) {
        return Err(Error::InvalidArgument(format!("need 0 < a < a+ε < b−ε < b < 2π, got a={a}, b={b}, ε={eps}")));
    }
    let delta = eps / 2.0;
    let alpha = sharpness.unwrap_or_else(|| default_sharpness(delta, n_max));
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("mollifier sharpness must be positive".into()));
    }
    let breaks: Vec<f64> = (0..=16).map(|i| -delta + 2.0 * delta * i as f64 / 16.0).collect();
    let mass = integrate_adaptive(|t| unnormalized_rho(t, delta, alpha), &breaks, QuadOptions { rel_tol: 1e-15, ..quad_opts() })?.value;
    let mut psi = PeriodicFunction { a, b, eps, sharpness: alpha, mass, coefficients: Vec::new() };
    let mut coefficients = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    for n in 0..=n_max as i64 {
        let r = psi.mollifier_transform(n)?;
        let c = interval_coefficient(a + delta, b - delta, n) * r;
        coefficients[(n + n_max as i64) as usize] = c;
        coefficients[(n_max as i64 - n) as usize] = c.conj();
    }
    psi.coefficients = coefficients;
    Ok(psi)
}

impl PeriodicFunction {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    /// `ψ̂(n)`, zero beyond the truncation.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        let nm = self.n_max() as i64;
        if n.abs() > nm {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(n + nm) as usize]
        }
    }

    fn delta(&self) -> f64 {
        self.eps / 2.0
    }

    /// `∫ ρ(t) e^{−int} dt` for the normalized mollifier (real since `ρ` is even).
    fn mollifier_transform(&self, n: i64) -> Result<f64> {
        let delta = self.delta();
        let panels = 16 + 2 * n.unsigned_abs() as usize;
        let breaks: Vec<f64> = (0..=panels).map(|i| -delta + 2.0 * delta * i as f64 / panels as f64).collect();
        let nf = n as f64;
        let q = integrate_adaptive(|t| unnormalized_rho(t, delta, self.sharpness) * (nf * t).cos(), &breaks, quad_opts())?;
        Ok(q.value / self.mass)
    }

    /// `∫_{−∞}^x ρ`.
    fn smooth_step(&self, x: f64) -> f64 {
        let delta = self.delta();
        if x <= -delta {
            return 0.0;
        }
        if x >= delta {
            return 1.0;
        }
        let part = |lo: f64, hi: f64| {
            integrate_adaptive(|t| unnormalized_rho(t, delta, self.sharpness), &[lo, hi], quad_opts())
                .map(|q| q.value / self.mass)
                .unwrap_or(f64::NAN)
        };
        if x <= 0.0 {
            part(-delta, x)
        } else {
            1.0 - part(x, delta)
        }
    }

    /// Exact pointwise value of `ψ`.
    pub fn eval(&self, theta: f64) -> f64 {
        let r = theta.rem_euclid(TAU);
        let delta = self.delta();
        self.smooth_step(r - (self.a + delta)) - self.smooth_step(r - (self.b - delta))
    }

    /// The truncated Fourier sum `Σ_{|n|≤N} ψ̂(n) e^{inθ}`.
    pub fn eval_truncated(&self, theta: f64) -> f64 {
        let nm = self.n_max() as i64;
        (-nm..=nm).map(|n| self.coefficient(n) * Complex64::from_polar(1.0, n as f64 * theta)).sum::<Complex64>().re
    }

    /// Largest `|ψ − ψ_N|` on a uniform grid of `samples` points.
    pub fn truncation_gap(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| TAU * i as f64 / samples as f64)
            .map(|t| (self.eval(t) - self.eval_truncated(t)).abs())
            .fold(0.0, f64::max)
    }

    pub fn decay(&self) -> DecayReport {
        let nm = self.n_max() as i64;
        let constants = (1..=6u32)
            .map(|m| (m, (1..=nm).map(|n| self.coefficient(n).norm() * (n as f64).powi(m as i32)).fold(0.0, f64::max)))
            .collect();
        DecayReport { constants }
    }

    pub fn descriptor(&self) -> BumpDescriptor {
        let nm = self.n_max() as i64;
        BumpDescriptor {
            a: self.a,
            b: self.b,
            eps: self.eps,
            n_max: self.n_max(),
            sharpness: self.sharpness,
            coefficients: (-nm..=nm).map(|n| (n, self.coefficient(n).re, self.coefficient(n).im)).collect(),
        }
    }

    pub fn from_descriptor(d: &BumpDescriptor) -> Result<Self> {
        let mut psi = build_bump_with(d.a, d.b, d.eps, 0, Some(d.sharpness))?;
        let nm = d.n_max as i64;
        if d.coefficients.len() != 2 * d.n_max + 1 {
            return Err(Error::InvalidArgument("coefficient list does not match n_max".into()));
        }
        let mut coefficients = vec![Complex64::new(0.0, 0.0); 2 * d.n_max + 1];
        for &(n, re, im) in &d.coefficients {
            if n.abs() > nm {
                return Err(Error::InvalidArgument(format!("coefficient index {n} outside ±{nm}")));
            }
            coefficients[(n + nm) as usize] = Complex64::new(re, im);
        }
        psi.coefficients = coefficients;
        Ok(psi)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.descriptor())?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// ψ{f}
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TermDiagnostic {
    pub n: i64,
    /// `‖u(nf)‖_{p,ω}`.
    pub term_norm: f64,
    /// `|ψ̂(n)|`.
    pub coefficient: f64,
}

#[derive(Clone, Debug)]
pub struct PsiResult {
    pub value: GroupFunction,
    pub terms: Vec<TermDiagnostic>,
    /// Accumulated error of the truncated terms, `Σ |ψ̂(n)|·err(u(nf))`.
    pub series_error: f64,
    /// Estimate of `Σ_{|n|>N} ‖u(nf)‖|ψ̂(n)|` from the measured growth of the
    /// term norms and decay of the coefficients.
    pub tail_estimate: f64,
    /// Fitted exponent `β` in `‖u(nf)‖_{p,ω} ≈ A(1+|n|)^β`.
    pub growth_exponent: f64,
}

impl PsiResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "term_norm", "coefficient"])?;
        for t in &self.terms {
            w.write_record([t.n.to_string(), format!("{:.17e}", t.term_norm), format!("{:.17e}", t.coefficient)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `ψ{f} = Σ_{|n|≤N} ψ̂(n) u(nf)`. Requires `f = f*` and `‖f‖₁ ≤ 1`.
pub fn psi_of_f(f: &GroupFunction, psi: &PeriodicFunction, ctx: &NormContext, budget: &SeriesBudget) -> Result<PsiResult> {
    psi_of_f_with(f, psi, ctx, budget, Execution::default())
}

pub fn psi_of_f_with(
    f: &GroupFunction,
    psi: &PeriodicFunction,
    ctx: &NormContext,
    budget: &SeriesBudget,
    exec: Execution,
) -> Result<PsiResult> {
    check_self_adjoint(f)?;
    let l1 = f.l1_norm();
    if l1 > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("ψ{{f}} needs ‖f‖₁ ≤ 1, got {l1}")));
    }
    let n_max = budget.n_max.min(psi.n_max());
    let u1 = u_series(f, 1, ctx, budget)?;
    let seq = u_sequence(&u1, n_max, ctx, budget)?;

    let one = Complex64::new(1.0, 0.0);
    let mut value = GroupFunction::zero(f.model());
    let mut series_error = 0.0;
    for (n, term) in seq.iter().enumerate().skip(1) {
        let cp = psi.coefficient(n as i64);
        let cm = psi.coefficient(-(n as i64));
        // u(−nf) = u(nf)*
        value = value.linear_combination(one, &term.value, cp)?;
        value = value.linear_combination(one, &term.value.involution(), cm)?;
        series_error += (cp.norm() + cm.norm()) * term.error_bound();
    }

    let norms = par::try_map_slice(exec, &seq[1..], |t| ctx.norm(&t.value))?;
    let terms: Vec<TermDiagnostic> = norms
        .iter()
        .enumerate()
        .map(|(i, &term_norm)| TermDiagnostic { n: i as i64 + 1, term_norm, coefficient: psi.coefficient(i as i64 + 1).norm() })
        .collect();

    let contributions: Vec<f64> = terms.iter().map(|t| t.term_norm * t.coefficient).collect();
    if contributions.len() >= 8 {
        let quarter = contributions.len() / 4;
        let head = contributions[..quarter].iter().copied().fold(0.0, f64::max);
        let tail = contributions[contributions.len() - quarter..].iter().copied().fold(0.0, f64::max);
        if tail > head && tail > budget.abs_tol {
            return Err(Error::DivergenceSuspected(format!(
                "term norms ‖u(nf)‖·|ψ̂(n)| grow from {head:e} to {tail:e} over n ≤ {n_max}"
            )));
        }
    }

    let (growth_exponent, tail_estimate) = tail_estimate(&terms, &psi.decay());
    Ok(PsiResult { value, terms, series_error, tail_estimate, growth_exponent })
}

/// Fit `‖u(nf)‖ ≤ A(1+n)^β` on the upper half of the range and combine with
/// the best measured `C_m n^{−m}` coefficient bound.
fn tail_estimate(terms: &[TermDiagnostic], decay: &DecayReport) -> (f64, f64) {
    let Some(last) = terms.last() else {
        return (0.0, 0.0);
    };
    let big_n = last.n as f64;
    let upper: Vec<&TermDiagnostic> = terms.iter().filter(|t| 2 * t.n >= last.n && t.term_norm > 0.0).collect();
    let xs: Vec<f64> = upper.iter().map(|t| (1.0 + t.n as f64).ln()).collect();
    let ys: Vec<f64> = upper.iter().map(|t| t.term_norm.ln()).collect();
    let beta = fit_line(&xs, &ys).map_or(0.0, |fit| fit.slope.max(0.0));
    let amp = upper
        .iter()
        .map(|t| t.term_norm / (1.0 + t.n as f64).powf(beta))
        .fold(0.0, f64::max);
    let mut best = f64::INFINITY;
    for &(m, c) in &decay.constants {
        let excess = m as f64 - beta - 1.0;
        if excess > 0.0 {
            // 2·A·C_m ∫_N^∞ (1+t)^β t^{−m} dt
            let est = 2.0 * amp * c * (1.0 + 1.0 / big_n).powf(beta) * big_n.powf(-excess) / excess;
            best = best.min(est);
        }
    }
    (beta, best)
}

// ---------------------------------------------------------------------------
// Spectral mapping
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct MappingReport {
    /// `max_j |χ_j(ψ{f}) − ψ(χ_j(f))|`.
    pub max_error: f64,
    /// `(j, χ_j(f), χ_j(ψ{f}), ψ(χ_j(f)))`.
    pub characters: Vec<(usize, f64, Complex64, f64)>,
    pub series_error: f64,
    pub tail_estimate: f64,
}

/// Compares the characters of `ψ{f}` with `ψ` applied to the characters of
/// `f` on a cyclic model.
pub fn spectral_mapping_check(f: &GroupFunction, psi: &PeriodicFunction, ctx: &NormContext, budget: &SeriesBudget) -> Result<MappingReport> {
    let result = psi_of_f(f, psi, ctx, budget)?;
    let chi_f = dft(f)?;
    let chi_psi = dft(&result.value)?;
    let mut characters = Vec::with_capacity(chi_f.len());
    let mut max_error: f64 = 0.0;
    for (j, (cf, cp)) in chi_f.iter().zip(&chi_psi).enumerate() {
        let target = psi.eval(cf.re);
        max_error = max_error.max((cp - target).norm());
        characters.push((j, cf.re, *cp, target));
    }
    Ok(MappingReport { max_error, characters, series_error: result.series_error, tail_estimate: result.tail_estimate })
}

/// Plateau and support checks on `samples` grid points of each region.
pub fn bump_invariants(psi: &PeriodicFunction, samples: usize) -> (f64, f64) {
    let (a, b, e) = (psi.a, psi.b, psi.eps);
    let grid = |lo: f64, hi: f64| (0..=samples).map(move |i| lo + (hi - lo) * i as f64 / samples as f64);
    let plateau = grid(a + e, b - e).map(|t| (psi.eval(t) - 1.0).abs()).fold(0.0, f64::max);
    let outside = grid(b, TAU + a).map(|t| psi.eval(t).abs()).fold(0.0, f64::max);
    (plateau, outside)
}

/// `(a, b, ε)` of a bump centred at `π`.
pub const DEMO_BUMP: (f64, f64, f64) = (PI / 2.0, 3.0 * PI / 2.0, PI / 4.0);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupElement, GroupModel};
    use crate::weight::{Weight, WeightSpec};

    fn ctx_on(model: &GroupModel) -> NormContext {
        NormContext::new(2.0, Weight::on(WeightSpec::polynomial(1.0, 1.0), model).unwrap()).unwrap()
    }

    #[test]
    fn scalar_series() {
        let z = GroupModel::integers();
        let ctx = ctx_on(&z);
        let t = 0.7;
        let f = GroupFunction::from_real(&z, &[(0, t)]).unwrap();
        for n in [-3i64, 1, 4] {
            let u = u_series(&f, n, &ctx, &SeriesBudget { abs_tol: 1e-14, ..Default::default() }).unwrap();
            let want = Complex64::from_polar(1.0, n as f64 * t) - 1.0;
            assert!((u.value.get(GroupElement::scalar(0)) - want).norm() < 1e-12);
            assert!(u.tail_bound < 1e-9);
        }
        assert!(u_series(&f, 0, &ctx, &SeriesBudget::default()).unwrap().value.is_empty());
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let z = GroupModel::integers();
        let f = GroupFunction::from_real(&z, &[(1, 1.0)]).unwrap();
        assert!(matches!(u_series(&f, 1, &ctx_on(&z), &SeriesBudget::default()), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn recursion_matches_series() {
        let z = GroupModel::integers();
        let ctx = ctx_on(&z);
        let f = GroupFunction::from_real(&z, &[(-1, 0.15), (0, 0.3), (1, 0.15)]).unwrap();
        let budget = SeriesBudget { abs_tol: 1e-13, ..Default::default() };
        for n in 1..=8 {
            let s = u_series(&f, n, &ctx, &budget).unwrap();
            let r = u_recursive(&f, n, &ctx, &budget).unwrap();
            let d = s.value.distance_sup(&r.value).unwrap();
            assert!(d < 1e-10, "n={n} d={d}");
            assert!(d <= s.error_bound() + r.error_bound() + 1e-14);
        }
    }

    #[test]
    fn adjoint_and_cocycle() {
        let z = GroupModel::integers();
        let ctx = ctx_on(&z);
        let f = GroupFunction::from_real(&z, &[(-2, 0.1), (0, -0.2), (2, 0.1)]).unwrap();
        let budget = SeriesBudget { abs_tol: 1e-13, ..Default::default() };
        let up = u_series(&f, 3, &ctx, &budget).unwrap().value;
        let um = u_series(&f, -3, &ctx, &budget).unwrap().value;
        assert!(up.involution().distance_sup(&um).unwrap() < 1e-12);
        assert!(cocycle_defect(&f, 2, 3, &ctx, &budget).unwrap() < 1e-10);
    }

    #[test]
    fn bump_shape() {
        let (a, b, e) = DEMO_BUMP;
        let psi = build_bump(a, b, e, 64).unwrap();
        assert_eq!(psi.eval(PI), 1.0);
        assert_eq!(psi.eval(0.0), 0.0);
        assert_eq!(psi.eval(a / 2.0), 0.0);
        let (plateau, outside) = bump_invariants(&psi, 200);
        assert!(plateau < 1e-8 && outside == 0.0);
        let mid = psi.eval(a + e / 2.0);
        assert!((mid - 0.5).abs() < 1e-12, "{mid}");
        for n in 1..=64 {
            let c = psi.coefficient(n);
            assert!((psi.coefficient(-n) - c.conj()).norm() < 1e-15);
        }
        assert!(psi.truncation_gap(400) < 1e-3);
    }

    #[test]
    fn coefficients_match_direct_quadrature() {
        let psi = build_bump(0.3, 4.0, 0.5, 12).unwrap();
        for n in [0i64, 1, 5, 12] {
            let re = integrate_adaptive(|t| psi.eval(t) * (n as f64 * t).cos(), &[0.3, 0.8, 3.5, 4.0], QuadOptions { rel_tol: 0.0, abs_tol: 1e-12, max_segments: 5000 })
                .unwrap()
                .value
                / TAU;
            assert!((psi.coefficient(n).re - re).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn descriptor_roundtrip() {
        let psi = build_bump(0.2, 3.0, 0.4, 8).unwrap();
        let mut buf = Vec::new();
        psi.write_json(&mut buf).unwrap();
        let d: BumpDescriptor = serde_json::from_slice(&buf).unwrap();
        let back = PeriodicFunction::from_descriptor(&d).unwrap();
        assert_eq!(back.coefficient(3), psi.coefficient(3));
        assert_eq!(back.eval(1.0), psi.eval(1.0));
        assert!(build_bump(0.5, 0.4, 0.1, 4).is_err());
    }

    #[test]
    fn scalar_calculus_and_disjoint_product() {
        let z = GroupModel::integers();
        let ctx = ctx_on(&z);
        let budget = SeriesBudget { abs_tol: 1e-12, ..Default::default() };
        let f = GroupFunction::from_real(&z, &[(0, 0.98)]).unwrap();
        let psi = build_bump(0.02, TAU - 0.02, 0.93, 64).unwrap();
        let r = psi_of_f(&f, &psi, &ctx, &budget).unwrap();
        assert!((r.value.get(GroupElement::scalar(0)) - 1.0).norm() < 1e-6, "{:?}", r.value.get(GroupElement::scalar(0)));
        let g = GroupFunction::from_real(&z, &[(0, 0.95)]).unwrap();
        let psi = build_bump(0.5, 1.6, 0.3, 64).unwrap();
        let phi = build_bump(2.0, 4.0, 0.5, 64).unwrap();
        let r = psi_of_f(&g, &psi, &ctx, &budget).unwrap();
        let s = psi_of_f(&g, &phi, &ctx, &budget).unwrap();
        let prod = r.value.convolve(&s.value).unwrap();
        let gaps = 2.0 * (1.0 + 2.0 * psi.truncation_gap(500)) * phi.truncation_gap(500);
        assert!(prod.max_abs() <= gaps, "{} > {gaps}", prod.max_abs());
    }

    #[test]
    fn mapping_on_cyclic_group() {
        let c = GroupModel::cyclic(16).unwrap();
        let ctx = ctx_on(&c);
        let f = GroupFunction::from_real(&c, &[(1, 0.5), (15, 0.5)]).unwrap();
        let psi = build_bump(0.02, TAU - 0.02, 0.93, 64).unwrap();
        let rep = spectral_mapping_check(&f, &psi, &ctx, &SeriesBudget::default()).unwrap();
        assert!(rep.max_error < 1e-6, "{}", rep.max_error);
        let zero = GroupFunction::zero(&c);
        assert_eq!(spectral_mapping_check(&zero, &psi, &ctx, &SeriesBudget::default()).unwrap().max_error, 0.0);
    }
}
