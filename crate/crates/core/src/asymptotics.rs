//! The Laplace-method integral `F(x) = ∫_0^{1/2} t^Q e^{x h(t)} dt` with
//! `h(t) = 1 − t^γ − (1−t)^γ`, its asymptotic constant, and the discrete
//! case-4 sum it controls.

use std::io::Write;

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::algebra::RatioVerdict;
use crate::error::{Error, Result};
use crate::numeric::{fit_line, log_sum_exp};
use crate::par::{self, Execution};
use crate::quad::{integrate_adaptive, QuadOptions};

/// Slope threshold for calling `S(m)` bounded, matching the ratio test.
pub const CASE4_SLOPE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplaceProblem {
    pub q_exp: f64,
    pub gamma: f64,
    pub q: f64,
}

impl LaplaceProblem {
    /// `Q ≥ 0`, `γ ∈ (0, 1)`, `q > 1`. Also checks that `h` is negative and
    /// decreasing on a grid of `10⁴` points in `(0, 1/2]`.
    pub fn new(q_exp: f64, gamma: f64, q: f64) -> Result<Self> {
        if !(q_exp >= 0.0 && q_exp.is_finite()) {
            return Err(Error::InvalidArgument(format!("Q must be nonnegative, got {q_exp}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("γ must lie in (0, 1), got {gamma}")));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!("q must exceed 1, got {q}")));
        }
        let prob = LaplaceProblem { q_exp, gamma, q };
        let grid = 10_000;
        let mut prev = prob.h(0.0);
        for i in 1..=grid {
            let t = 0.5 * i as f64 / grid as f64;
            let v = prob.h(t);
            if !(v < 0.0 && v < prev) {
                return Err(Error::InvalidArgument(format!("h fails to decrease at t = {t}")));
            }
            prev = v;
        }
        Ok(prob)
    }

    /// `h(t) = 1 − t^γ − (1−t)^γ`, free of cancellation for small `t`.
    pub fn h(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        -t.powf(self.gamma) - (self.gamma * (-t).ln_1p()).exp_m1()
    }

    pub fn g(&self, t: f64) -> f64 {
        t.powf(self.q_exp)
    }

    /// `C₂ = Γ((Q+1)/γ)/γ`.
    pub fn c2(&self) -> f64 {
        gamma((self.q_exp + 1.0) / self.gamma) / self.gamma
    }

    /// `C₃ = C₂ q^{−(Q+1)/γ}`.
    pub fn c3(&self) -> f64 {
        self.c2() * self.q.powf(-(self.q_exp + 1.0) / self.gamma)
    }

    /// `ln C₂`, usable when `Γ` overflows.
    pub fn ln_c2(&self) -> f64 {
        ln_gamma((self.q_exp + 1.0) / self.gamma) - self.gamma.ln()
    }

    /// Decay exponent `(Q+1)/γ` of `F`.
    pub fn decay_exponent(&self) -> f64 {
        (self.q_exp + 1.0) / self.gamma
    }
}

// ---------------------------------------------------------------------------
// F(x)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FValue {
    pub x: f64,
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Relative tolerance requested from the quadrature.
pub const F_REL_TOL: f64 = 1e-12;

/// Breakpoints graded geometrically toward `t = 0`, reaching well inside the
/// boundary layer of width `x^{−1/γ}`.
fn graded_breaks(prob: &LaplaceProblem, x: f64) -> Vec<f64> {
    let layer = if x > 1.0 { x.powf(-1.0 / prob.gamma) } else { 1.0 };
    let floor = (1e-6 * layer).clamp(1e-300, 1e-8);
    let mut breaks = vec![0.5];
    let mut t = 0.5;
    while t > floor {
        t *= 0.5;
        breaks.push(t);
    }
    breaks.push(0.0);
    breaks.reverse();
    breaks
}

/// `F(x) = ∫_0^{1/2} t^Q e^{x h(t)} dt` by adaptive Gauss–Kronrod on a
/// partition graded toward the endpoint singularity.
pub fn numeric_f(prob: &LaplaceProblem, x: f64) -> Result<FValue> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("x must be nonnegative and finite, got {x}")));
    }
    let qe = prob.q_exp;
    let integrand = |t: f64| {
        if t <= 0.0 {
            return if qe == 0.0 { 1.0 } else { 0.0 };
        }
        (qe * t.ln() + x * prob.h(t)).exp()
    };
    let breaks = graded_breaks(prob, x);
    let q = integrate_adaptive(integrand, &breaks, QuadOptions { rel_tol: F_REL_TOL, abs_tol: 0.0, max_segments: 100_000 })?;
    Ok(FValue { x, value: q.value, error: q.error, evaluations: q.evaluations })
}

/// `C₂ x^{−(Q+1)/γ}`.
pub fn asymptotic_f(prob: &LaplaceProblem, x: f64) -> f64 {
    (prob.ln_c2() - prob.decay_exponent() * x.ln()).exp()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FRow {
    pub x: f64,
    pub numeric: f64,
    pub error: f64,
    pub asymptotic: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FTable {
    pub rows: Vec<FRow>,
    /// First grid point after which the scaled values `x^{(Q+1)/γ}F(x)` at
    /// consecutive grid points differ by less than 5%.
    pub onset: Option<f64>,
}

impl FTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "numeric_F", "asymptotic_F", "ratio"])?;
        for r in &self.rows {
            w.write_record([format!("{}", r.x), format!("{:.17e}", r.numeric), format!("{:.17e}", r.asymptotic), format!("{:.17e}", r.ratio)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `F` and its asymptotic along a grid (typically doubling); the onset `x*`
/// is read off the grid, not assumed.
pub fn f_table(prob: &LaplaceProblem, xs: &[f64], exec: Execution) -> Result<FTable> {
    let rows = par::try_map_slice(exec, xs, |&x| {
        let f = numeric_f(prob, x)?;
        let asymptotic = asymptotic_f(prob, x);
        Ok::<FRow, Error>(FRow { x, numeric: f.value, error: f.error, asymptotic, ratio: f.value / asymptotic })
    })?;
    let mut onset = None;
    for i in (0..rows.len().saturating_sub(1)).rev() {
        let (a, b) = (rows[i].ratio, rows[i + 1].ratio);
        if (b / a - 1.0).abs() < 0.05 {
            onset = Some(rows[i].x);
        } else {
            break;
        }
    }
    Ok(FTable { rows, onset })
}

/// `x₀, 2x₀, 4x₀, …` up to `x_max`.
pub fn doubling_grid(x0: f64, x_max: f64) -> Vec<f64> {
    std::iter::successors(Some(x0), |&x| Some(2.0 * x)).take_while(|&x| x <= x_max * (1.0 + 1e-12)).collect()
}

// ---------------------------------------------------------------------------
// Case-4 sum
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Case4Point {
    pub m: usize,
    pub s: f64,
    pub ln_s: f64,
    /// `f(m) = m^{Q+1} F(q m^γ)`, absent when `γ = 1`.
    pub continuum: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Case4Report {
    pub q_exp: f64,
    pub gamma: f64,
    pub q: f64,
    pub points: Vec<Case4Point>,
    pub slope: f64,
    pub sup: f64,
    pub argsup: usize,
    /// `C₃`, absent when `γ = 1`.
    pub c3: Option<f64>,
    /// Range of `S(m)/f(m)` over the upper half of the range.
    pub ratio_range: Option<(f64, f64)>,
    pub verdict: RatioVerdict,
}

impl Case4Report {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "S", "continuum"])?;
        for p in &self.points {
            w.write_record([p.m.to_string(), format!("{:.17e}", p.s), p.continuum.map_or(String::new(), |c| format!("{c:.17e}"))])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `ln S(m)` with `S(m) = Σ_{n=0}^{⌊m/2⌋} e^{q(m^γ−n^γ−(m−n)^γ)} n^Q`.
pub fn ln_case4_sum(q_exp: f64, gamma: f64, q: f64, m: usize) -> f64 {
    let mf = m as f64;
    let mg = mf.powf(gamma);
    let logs: Vec<f64> = (0..=m / 2)
        .filter_map(|n| {
            let nf = n as f64;
            let weight = if n == 0 {
                if q_exp == 0.0 { 0.0 } else { return None }
            } else {
                q_exp * nf.ln()
            };
            Some(q * (mg - nf.powf(gamma) - (mf - nf).powf(gamma)) + weight)
        })
        .collect();
    log_sum_exp(&logs)
}

/// `S(m)` for `m = 1..=m_max`, compared with the continuum bound and `C₃`.
/// `γ = 1` is accepted as the degenerate edge where `S` grows like `m^{Q+1}`.
pub fn case4_sum_check(q_exp: f64, gamma: f64, q: f64, m_max: usize, exec: Execution) -> Result<Case4Report> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("γ must lie in (0, 1], got {gamma}")));
    }
    if m_max < 4 {
        return Err(Error::InvalidArgument("m_max must be at least 4".into()));
    }
    let prob = if gamma < 1.0 { Some(LaplaceProblem::new(q_exp, gamma, q)?) } else { None };
    let ms: Vec<usize> = (1..=m_max).collect();
    let points = par::try_map_slice(exec, &ms, |&m| {
        let ln_s = ln_case4_sum(q_exp, gamma, q, m);
        let continuum = match &prob {
            Some(p) => {
                let mf = m as f64;
                Some(mf.powf(q_exp + 1.0) * numeric_f(p, q * mf.powf(gamma))?.value)
            }
            None => None,
        };
        Ok::<Case4Point, Error>(Case4Point { m, s: ln_s.exp(), ln_s, continuum })
    })?;
    let upper: Vec<&Case4Point> = points.iter().filter(|p| p.m >= m_max / 2).collect();
    let xs: Vec<f64> = upper.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = upper.iter().map(|p| p.s).collect();
    let slope = fit_line(&xs, &ys).map_or(0.0, |f| f.slope);
    let (argsup, sup) = points.iter().fold((0, f64::NEG_INFINITY), |acc, p| if p.s > acc.1 { (p.m, p.s) } else { acc });
    let ratio_range = prob.as_ref().map(|_| {
        upper
            .iter()
            .filter_map(|p| p.continuum.map(|c| p.s / c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
    });
    let verdict = if slope <= CASE4_SLOPE_TOL && sup.is_finite() { RatioVerdict::Bounded } else { RatioVerdict::UnboundedTrend };
    Ok(Case4Report { q_exp, gamma, q, points, slope, sup, argsup, c3: prob.map(|p| p.c3()), ratio_range, verdict })
}
