//! Operator-generated weights and the representation `U(f) = ∫ e^{xT} f(x) dx`.
//!
//! `T` is a finite complex matrix with `‖T‖ ≤ 1`; typical choices are Jordan
//! nilpotent blocks and random strict contractions whose power norms decay
//! quickly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use std::io::Write;

use crate::algebra::{lpalg_ratio, RatioReport};
use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::numeric::exp_tail_bound;
use crate::quad::kronrod_nodes;
use crate::weight::{Weight, WeightSpec};

pub type CMatrix = DMatrix<Complex64>;

const NORM_SLACK: f64 = 1e-12;
const SERIES_TOL: f64 = 1e-24;

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn norm_bound(m: &CMatrix) -> f64 {
    let one = (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let inf = (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    (one * inf).sqrt()
}

fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// Matrix exponential together with a bound on the neglected series tail.
#[derive(Debug, Clone)]
pub struct Expm {
    pub matrix: CMatrix,
    pub remainder: f64,
    pub squarings: u32,
}

/// `e^A` by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &CMatrix) -> Expm {
    let n = a.nrows();
    let norm = norm_bound(a);
    let squarings = if norm <= 0.5 { 0 } else { (norm / 0.5).log2().ceil() as u32 };
    let b = a.map(|z| z / 2f64.powi(squarings as i32));
    let b_norm = norm / 2f64.powi(squarings as i32);

    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    let mut k = 0;
    while exp_tail_bound(b_norm, k) > SERIES_TOL {
        k += 1;
        term = &term * &b / Complex64::from(k as f64);
        sum += &term;
    }
    let scaled_rem = exp_tail_bound(b_norm, k);
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    let remainder = if squarings == 0 {
        scaled_rem
    } else {
        2f64.powi(squarings as i32) * scaled_rem * norm.exp()
    };
    Expm { matrix: sum, remainder, squarings }
}

// ---------------------------------------------------------------------------
// Operator model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// A square matrix `T` with `‖T‖ ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorRepr", try_from = "OperatorRepr")]
pub struct OperatorModel {
    t: CMatrix,
    norm: f64,
    nilpotency: Option<usize>,
}

impl From<OperatorModel> for OperatorRepr {
    fn from(m: OperatorModel) -> Self {
        let n = m.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(m.t[(i, j)].re);
                im.push(m.t[(i, j)].im);
            }
        }
        OperatorRepr { dim: n, re, im }
    }
}

impl TryFrom<OperatorRepr> for OperatorModel {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let n = r.dim;
        if r.re.len() != n * n || (!r.im.is_empty() && r.im.len() != n * n) {
            return Err(Error::InvalidArgument(format!("operator entries do not form a {n}x{n} matrix")));
        }
        let t = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(r.re[i * n + j], r.im.get(i * n + j).copied().unwrap_or(0.0))
        });
        OperatorModel::new(t)
    }
}

impl OperatorModel {
    pub fn new(t: CMatrix) -> Result<Self> {
        if t.nrows() != t.ncols() || t.nrows() == 0 {
            return Err(Error::InvalidArgument("operator must be a non-empty square matrix".into()));
        }
        if t.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        let norm = op_norm(&t);
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::InvalidArgument(format!("operator norm {norm} exceeds 1")));
        }
        let n = t.nrows();
        let mut power = CMatrix::identity(n, n);
        let mut nilpotency = None;
        for k in 1..=n {
            power = &power * &t;
            if is_zero(&power) {
                nilpotency = Some(k);
                break;
            }
        }
        Ok(OperatorModel { t, norm, nilpotency })
    }

    /// `n×n` Jordan block with zero eigenvalue.
    pub fn jordan_nilpotent(n: usize) -> Result<Self> {
        Self::new(CMatrix::from_fn(n, n, |i, j| if j == i + 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }))
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(CMatrix::zeros(n, n))
    }

    /// Random strictly upper-triangular part plus a diagonal of size at most
    /// `diag_scale`, rescaled to norm `target_norm`. Power norms decay like
    /// the diagonal once the nilpotent part is exhausted.
    pub fn random_contraction<R: Rng + ?Sized>(n: usize, diag_scale: f64, target_norm: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&target_norm) {
            return Err(Error::InvalidArgument("target norm must lie in [0, 1]".into()));
        }
        let t = CMatrix::from_fn(n, n, |i, j| {
            if j > i {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else if i == j {
                Complex64::new(diag_scale * rng.random_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let norm = op_norm(&t);
        let t = if norm > 0.0 { t / Complex64::from(norm / target_norm) } else { t };
        Self::new(t)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Smallest `m` with `T^m = 0`, if any.
    pub fn nilpotency(&self) -> Option<usize> {
        self.nilpotency
    }

    /// `e^{xT}`; the series is finite for nilpotent `T`.
    pub fn exp(&self, x: f64) -> Expm {
        let a = self.t.map(|z| z * x);
        match self.nilpotency {
            Some(m) => {
                let n = self.dim();
                let mut sum = CMatrix::identity(n, n);
                let mut term = CMatrix::identity(n, n);
                for k in 1..m {
                    term = &term * &a / Complex64::from(k as f64);
                    sum += &term;
                }
                Expm { matrix: sum, remainder: 0.0, squarings: 0 }
            }
            None => expm(&a),
        }
    }

    /// `‖e^{xT}‖`.
    pub fn matexp_norm(&self, x: f64) -> f64 {
        op_norm(&self.exp(x).matrix)
    }

    /// `ω_T(x) = max(‖e^{xT}‖, ‖e^{−xT}‖)`.
    pub fn omega(&self, x: f64) -> f64 {
        self.matexp_norm(x).max(self.matexp_norm(-x))
    }

    /// `‖T^k‖` for `k = 0..=k_max`.
    pub fn power_norms(&self, k_max: usize) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(k_max + 1);
        let mut p = CMatrix::identity(n, n);
        out.push(1.0);
        for _ in 0..k_max {
            p = &p * &self.t;
            out.push(op_norm(&p));
        }
        out
    }

    /// `‖T^k‖^{1/k}` for `k = 1..=k_max`.
    pub fn power_norm_roots(&self, k_max: usize) -> Vec<f64> {
        self.power_norms(k_max)
            .into_iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v.powf(1.0 / k as f64))
            .collect()
    }

    /// Bound `C(ε)` with `ω_T(x) ≤ C(ε) e^{ε|x|}` for all `x`, split at an
    /// order `N(ε)` past which the power norms are dominated by `εⁿ`.
    pub fn growth_bound(&self, eps: f64, search_max: usize) -> Option<(f64, usize)> {
        let norms = self.power_norms(search_max.max(self.dim()));
        if let Some(m) = self.nilpotency {
            let c = (0..m).map(|n| norms[n] * eps.powi(-(n as i32))).fold(0.0, f64::max);
            return Some((1.0 + c, m));
        }
        for big_n in 1..norms.len() {
            let rho = norms[big_n].powf(1.0 / big_n as f64);
            if rho <= eps && rho > 0.0 {
                let c = (0..big_n).map(|r| norms[r] * rho.powi(-(r as i32))).fold(1.0, f64::max);
                return Some((c, big_n));
            }
        }
        None
    }

    /// Measured `max_{0 ≤ x ≤ x_max} ω_T(x) e^{−εx}` on a uniform grid plus
    /// the certified bound when one is available.
    pub fn epsilon_growth_check(&self, eps: f64, x_max: f64, grid_points: usize) -> GrowthCheck {
        let grid_points = grid_points.max(2);
        let (mut measured, mut argmax) = (f64::NEG_INFINITY, 0.0);
        for i in 0..grid_points {
            let x = x_max * i as f64 / (grid_points - 1) as f64;
            let v = self.omega(x).ln() - eps * x;
            if v > measured {
                measured = v;
                argmax = x;
            }
        }
        let bound = self.growth_bound(eps, 256);
        GrowthCheck {
            eps,
            x_max,
            measured: measured.exp(),
            argmax,
            bound: bound.map(|b| b.0),
            split_order: bound.map(|b| b.1),
        }
    }

    /// `‖U(ξ_ε) − I − (ε/2)T‖` where `ξ_ε = ε⁻¹·1_{[0,ε]}`.
    pub fn commutator_check(&self, eps: f64) -> Result<CommutatorReport> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument("ε must lie in (0, 1)".into()));
        }
        let u = self.rep_u(&RealFunction::xi(eps), 1e-15)?;
        let n = self.dim();
        let target = CMatrix::identity(n, n) + self.t.map(|z| z * (eps / 2.0));
        let defect = op_norm(&(&u.matrix - target));
        Ok(CommutatorReport { eps, defect, bound: eps * eps, quadrature_error: u.error })
    }

    // -----------------------------------------------------------------------
    // Representation
    // -----------------------------------------------------------------------

    /// `U(f) = ∫ e^{xT} f(x) dx` by composite Gauss–Kronrod panels on each
    /// smooth segment of `f`, doubling panels until successive results agree
    /// to `tol` (relative to `max(1, ‖U‖)`).
    pub fn rep_u(&self, f: &RealFunction, tol: f64) -> Result<RepResult> {
        let breaks = f.breakpoints();
        if breaks.len() < 2 {
            return Ok(RepResult { matrix: CMatrix::zeros(self.dim(), self.dim()), error: 0.0, panels: 0 });
        }
        let mut panels = 1;
        let mut prev = self.rep_u_fixed(f, &breaks, panels);
        loop {
            panels *= 2;
            let cur = self.rep_u_fixed(f, &breaks, panels);
            let error = op_norm(&(&cur - &prev));
            let scale = op_norm(&cur).max(1.0);
            if error <= tol * scale {
                return Ok(RepResult { matrix: cur, error, panels });
            }
            if panels >= 4096 {
                return Err(Error::QuadratureNonConvergent {
                    lo: breaks[0],
                    hi: *breaks.last().unwrap(),
                    estimate: op_norm(&cur),
                    error,
                    evaluations: panels * 15 * (breaks.len() - 1),
                });
            }
            prev = cur;
        }
    }

    fn rep_u_fixed(&self, f: &RealFunction, breaks: &[f64], panels: usize) -> CMatrix {
        let n = self.dim();
        let mut acc = CMatrix::zeros(n, n);
        for seg in breaks.windows(2) {
            let h = (seg[1] - seg[0]) / panels as f64;
            for p in 0..panels {
                let lo = seg[0] + p as f64 * h;
                for (x, w) in kronrod_nodes(lo, lo + h) {
                    let fx = f.eval(x);
                    if fx != Complex64::new(0.0, 0.0) {
                        acc += self.exp(x).matrix * (fx * w);
                    }
                }
            }
        }
        acc
    }

    /// `‖U(f*g) − U(f)U(g)‖`.
    pub fn homomorphism_defect(&self, f: &RealFunction, g: &RealFunction, tol: f64) -> Result<f64> {
        let fg = RealFunction::convolution(f.clone(), g.clone());
        let ufg = self.rep_u(&fg, tol)?;
        let uf = self.rep_u(f, tol)?;
        let ug = self.rep_u(g, tol)?;
        Ok(op_norm(&(ufg.matrix - uf.matrix * ug.matrix)))
    }

    /// `∫ ω_T(x)|f(x)| dx`, the norm bound for `U(f)`.
    pub fn weighted_l1(&self, f: &RealFunction, panels: usize) -> f64 {
        let breaks = f.breakpoints();
        let mut acc = 0.0;
        for seg in breaks.windows(2) {
            let h = (seg[1] - seg[0]) / panels as f64;
            for p in 0..panels {
                let lo = seg[0] + p as f64 * h;
                for (x, w) in kronrod_nodes(lo, lo + h) {
                    acc += w * self.omega(x) * f.eval(x).norm();
                }
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    pub eps: f64,
    pub x_max: f64,
    /// `max ω_T(x) e^{−εx}` over the sampled grid.
    pub measured: f64,
    pub argmax: f64,
    /// Certified `C(ε)` valid for every real `x`.
    pub bound: Option<f64>,
    pub split_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub eps: f64,
    pub defect: f64,
    pub bound: f64,
    pub quadrature_error: f64,
}

impl CommutatorReport {
    pub fn passes(&self) -> bool {
        self.defect < self.bound
    }
}

#[derive(Debug, Clone)]
pub struct RepResult {
    pub matrix: CMatrix,
    pub error: f64,
    pub panels: usize,
}

// ---------------------------------------------------------------------------
// Real functions with compact support
// ---------------------------------------------------------------------------

/// Polynomial `Σ c_j (x − lo)^j` on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<Complex64>,
}

impl Piece {
    fn eval(&self, x: f64) -> Complex64 {
        let t = x - self.lo;
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }
}

/// Compactly supported complex function on the real line.
#[derive(Debug, Clone, PartialEq)]
pub enum RealFunction {
    Piecewise(Vec<Piece>),
    Convolution(Box<RealFunction>, Box<RealFunction>),
    Combination(Vec<(Complex64, RealFunction)>),
}

impl RealFunction {
    pub fn piecewise(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for p in &pieces {
            if !(p.lo.is_finite() && p.hi.is_finite() && p.lo < p.hi) {
                return Err(Error::InvalidArgument(format!("bad piece interval [{}, {})", p.lo, p.hi)));
            }
        }
        if pieces.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(Error::InvalidArgument("pieces overlap".into()));
        }
        Ok(RealFunction::Piecewise(pieces))
    }

    /// `1_{[a,b)}`.
    pub fn indicator(a: f64, b: f64) -> Self {
        RealFunction::Piecewise(vec![Piece { lo: a, hi: b, coeffs: vec![Complex64::new(1.0, 0.0)] }])
    }

    /// `ξ_ε = ε⁻¹ 1_{[0,ε)}`.
    pub fn xi(eps: f64) -> Self {
        RealFunction::Piecewise(vec![Piece { lo: 0.0, hi: eps, coeffs: vec![Complex64::new(1.0 / eps, 0.0)] }])
    }

    pub fn convolution(f: RealFunction, g: RealFunction) -> Self {
        RealFunction::Convolution(Box::new(f), Box::new(g))
    }

    pub fn combination(terms: Vec<(Complex64, RealFunction)>) -> Self {
        RealFunction::Combination(terms)
    }

    /// Sorted points between which the function is smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = match self {
            RealFunction::Piecewise(ps) => ps.iter().flat_map(|p| [p.lo, p.hi]).collect::<Vec<_>>(),
            RealFunction::Convolution(f, g) => {
                let (bf, bg) = (f.breakpoints(), g.breakpoints());
                bf.iter().flat_map(|x| bg.iter().map(move |y| x + y)).collect()
            }
            RealFunction::Combination(ts) => ts.iter().flat_map(|(_, f)| f.breakpoints()).collect(),
        };
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
        b
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            RealFunction::Piecewise(ps) => {
                let i = ps.partition_point(|p| p.hi <= x);
                match ps.get(i) {
                    Some(p) if p.lo <= x => p.eval(x),
                    _ => Complex64::new(0.0, 0.0),
                }
            }
            RealFunction::Convolution(f, g) => {
                let bf = f.breakpoints();
                let bg = g.breakpoints();
                let (Some(&flo), Some(&fhi)) = (bf.first(), bf.last()) else {
                    return Complex64::new(0.0, 0.0);
                };
                let (Some(&glo), Some(&ghi)) = (bg.first(), bg.last()) else {
                    return Complex64::new(0.0, 0.0);
                };
                let lo = flo.max(x - ghi);
                let hi = fhi.min(x - glo);
                if lo >= hi {
                    return Complex64::new(0.0, 0.0);
                }
                let mut ts: Vec<f64> = bf.into_iter().chain(bg.iter().map(|b| x - b)).filter(|t| *t > lo && *t < hi).collect();
                ts.push(lo);
                ts.push(hi);
                ts.sort_by(f64::total_cmp);
                let mut acc = Complex64::new(0.0, 0.0);
                for seg in ts.windows(2) {
                    if seg[1] > seg[0] {
                        for (t, w) in kronrod_nodes(seg[0], seg[1]) {
                            acc += f.eval(t) * g.eval(x - t) * w;
                        }
                    }
                }
                acc
            }
            RealFunction::Combination(ts) => ts.iter().map(|(c, f)| c * f.eval(x)).sum(),
        }
    }
}

// ---------------------------------------------------------------------------
// Reports and exports
// ---------------------------------------------------------------------------

impl OperatorModel {
    /// Commutator defects for each `ε`.
    pub fn commutator_sweep(&self, eps: &[f64]) -> Result<Vec<CommutatorReport>> {
        eps.iter().map(|&e| self.commutator_check(e)).collect()
    }

    /// `max ln ω(x+y) − ln ω(x) − ln ω(y)` over the grid; nonpositive up to
    /// rounding when `ω_T` is submultiplicative.
    pub fn submultiplicativity_excess(&self, xs: &[f64]) -> f64 {
        let ln: Vec<f64> = xs.iter().map(|&x| self.omega(x).ln()).collect();
        let mut worst = f64::NEG_INFINITY;
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                worst = worst.max(self.omega(x + y).ln() - ln[i] - ln[j]);
            }
        }
        worst
    }
}

/// Row-major `(row, col, re, im)` table.
pub fn write_matrix_csv<W: Write>(m: &CMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"])?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_record([i.to_string(), j.to_string(), format!("{:.17e}", z.re), format!("{:.17e}", z.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// The constant that turns `ω₁(x) = ω_T(x)(1+|x|)²` into an algebra weight.
#[derive(Debug, Clone, Serialize)]
pub struct Omega1Report {
    pub step: f64,
    pub q: f64,
    pub ratio: RatioReport,
    /// `c = (sup R)^{1/q}`: the ratio of `c·ω₁` is at most one.
    pub constant: f64,
}

/// Measures the (LPAlg) ratio of `ω₁ = ω_T(1+|x|)²` on the mesh line with
/// spacing `step` for `|x| ≤ m_max·step`.
pub fn omega1_constant(t: &OperatorModel, step: f64, q: f64, m_max: usize) -> Result<Omega1Report> {
    let mesh = GroupModel::mesh_line(step)?;
    let spec = WeightSpec::product(WeightSpec::Operator { operator: t.clone() }, WeightSpec::polynomial(1.0, 2.0));
    let w = Weight::on(spec, &mesh)?;
    let ratio = lpalg_ratio(&w, q, m_max)?;
    let constant = ratio.max_ratio.powf(1.0 / q).max(1.0);
    Ok(Omega1Report { step, q, ratio, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn expm_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for scale in [0.1, 1.0, 5.0, 20.0] {
            let a = CMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale);
            let ours = expm(&a);
            let theirs = a.clone().exp();
            let rel = op_norm(&(&ours.matrix - &theirs)) / op_norm(&theirs);
            assert!(rel < 1e-11, "scale {scale}: rel {rel}");
        }
    }

    #[test]
    fn jordan_shear_norm_is_golden_ratio() {
        let t = OperatorModel::jordan_nilpotent(2).unwrap();
        assert_eq!(t.nilpotency(), Some(2));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((t.matexp_norm(1.0) - golden).abs() < 1e-13);
        assert!((t.matexp_norm(0.0) - 1.0).abs() < 1e-15);
        let z = OperatorModel::zero(3).unwrap();
        assert!((z.omega(17.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oversized_operator_is_rejected() {
        let t = CMatrix::from_element(2, 2, c(1.0));
        assert!(OperatorModel::new(t).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let t = OperatorModel::jordan_nilpotent(3).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: OperatorModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn growth_bound_dominates_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ops = [
            OperatorModel::jordan_nilpotent(4).unwrap(),
            OperatorModel::random_contraction(4, 1e-3, 0.95, &mut rng).unwrap(),
        ];
        for t in &ops {
            for eps in [1.0, 0.1] {
                let g = t.epsilon_growth_check(eps, 100.0, 401);
                let b = g.bound.expect("bound available");
                assert!(g.measured <= b * (1.0 + 1e-9), "eps {eps}: {} > {b}", g.measured);
            }
        }
    }

    #[test]
    fn xi_representation_is_affine_for_shear() {
        let t = OperatorModel::jordan_nilpotent(2).unwrap();
        for eps in [0.5, 0.1, 0.01] {
            let r = t.commutator_check(eps).unwrap();
            assert!(r.defect < 1e-14, "eps {eps}: {}", r.defect);
        }
        let t3 = OperatorModel::jordan_nilpotent(3).unwrap();
        let r = t3.commutator_check(0.5).unwrap();
        assert!((r.defect - 0.25 / 6.0).abs() < 1e-12, "{}", r.defect);
    }

    #[test]
    fn convolution_of_indicators_is_a_tent() {
        let f = RealFunction::indicator(0.0, 1.0);
        let tent = RealFunction::convolution(f.clone(), f);
        for (x, want) in [(-0.5, 0.0), (0.25, 0.25), (1.0, 1.0), (1.5, 0.5), (2.5, 0.0)] {
            assert!((tent.eval(x).re - want).abs() < 1e-14, "x={x}");
        }
        assert_eq!(tent.breakpoints(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn representation_is_multiplicative_on_indicators() {
        let t = OperatorModel::jordan_nilpotent(3).unwrap();
        let f = RealFunction::indicator(0.0, 1.0);
        let g = RealFunction::indicator(-0.5, 0.25);
        assert!(t.homomorphism_defect(&f, &g, 1e-14).unwrap() < 1e-10);
    }

    #[test]
    fn omega_is_even_submultiplicative_and_at_least_one() {
        let t = OperatorModel::jordan_nilpotent(4).unwrap();
        let xs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.37).collect();
        for &x in &xs {
            assert!((t.omega(x) - t.omega(-x)).abs() <= 1e-12 * t.omega(x));
            assert!(t.omega(x) >= 1.0 - 1e-14);
        }
        assert_eq!(t.omega(0.0), 1.0);
        assert!(t.submultiplicativity_excess(&xs) <= 1e-12);
        // degree-3 polynomial bound: ‖e^{xT}‖ ≤ Σ_{k<4} |x|^k/k!
        for &x in &xs {
            let poly: f64 = (0..4).map(|k| x.abs().powi(k) / (1..=k).product::<i32>().max(1) as f64).sum();
            assert!(t.omega(x) <= poly * (1.0 + 1e-12));
        }
    }

    #[test]
    fn representation_is_linear_and_norm_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = OperatorModel::random_contraction(3, 1e-3, 0.9, &mut rng).unwrap();
        let f = RealFunction::indicator(-0.4, 0.7);
        let g = RealFunction::xi(0.3);
        let (a, b) = (Complex64::new(0.5, -1.0), Complex64::new(2.0, 0.25));
        let combo = RealFunction::combination(vec![(a, f.clone()), (b, g.clone())]);
        let lhs = t.rep_u(&combo, 1e-14).unwrap().matrix;
        let rhs = t.rep_u(&f, 1e-14).unwrap().matrix * a + t.rep_u(&g, 1e-14).unwrap().matrix * b;
        assert!(op_norm(&(lhs - rhs)) < 1e-12);
        let u = t.rep_u(&f, 1e-14).unwrap();
        assert!(op_norm(&u.matrix) <= t.weighted_l1(&f, 64) * (1.0 + 1e-12));
    }

    #[test]
    fn omega1_constant_for_jordan_block() {
        let t = OperatorModel::jordan_nilpotent(2).unwrap();
        let rep = omega1_constant(&t, 0.1, 2.0, 100).unwrap();
        assert!(rep.constant.is_finite() && rep.constant >= 1.0);
        assert_eq!(rep.ratio.verdict, crate::algebra::RatioVerdict::Bounded);
    }

    #[test]
    fn matrix_csv_layout() {
        let t = OperatorModel::jordan_nilpotent(2).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(t.matrix(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(2).unwrap().starts_with("0,1,1.0"));
    }
}
