//! Finitely supported functions, exact convolution and weighted norms.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, GroupModel};
use crate::numeric::{fit_line, log_sum_exp, CompensatedSum};
use crate::par::{self, Execution};
use crate::weight::Weight;

/// Relative slack used by every inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Values below this fraction of the largest modulus are dropped.
pub const PRUNE_TOL: f64 = 1e-15;
/// Default cap on `|supp f|·|supp g|` for one convolution.
pub const DEFAULT_PAIR_BUDGET: usize = 200_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// ---------------------------------------------------------------------------
// Group functions
// ---------------------------------------------------------------------------

/// A finitely supported complex function on a group model, stored as
/// `(element, value)` pairs sorted by element.
#[derive(Clone, Debug)]
pub struct GroupFunction {
    model: GroupModel,
    entries: Vec<(GroupElement, Complex64)>,
}

impl PartialEq for GroupFunction {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.entries == other.entries
    }
}

impl GroupFunction {
    pub fn zero(model: &GroupModel) -> Self {
        GroupFunction { model: model.clone(), entries: Vec::new() }
    }

    /// Builds a function from pairs; repeated elements are summed.
    pub fn from_pairs<I>(model: &GroupModel, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, Complex64)>,
    {
        let mut entries: Vec<(GroupElement, Complex64)> = Vec::new();
        for (x, v) in pairs {
            model.check(x)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite value at {x}")));
            }
            entries.push((x, v));
        }
        entries.sort_by_key(|a| a.0);
        let mut merged: Vec<(GroupElement, Complex64)> = Vec::with_capacity(entries.len());
        for (x, v) in entries {
            match merged.last_mut() {
                Some((y, w)) if *y == x => *w += v,
                _ => merged.push((x, v)),
            }
        }
        Ok(Self::from_sorted(model, merged))
    }

    fn from_sorted(model: &GroupModel, mut entries: Vec<(GroupElement, Complex64)>) -> Self {
        let max = entries.iter().map(|e| e.1.norm()).fold(0.0, f64::max);
        let cut = PRUNE_TOL * max;
        entries.retain(|e| e.1.norm() > cut);
        GroupFunction { model: model.clone(), entries }
    }

    pub fn delta(model: &GroupModel, x: GroupElement) -> Result<Self> {
        Self::from_pairs(model, [(x, Complex64::new(1.0, 0.0))])
    }

    /// Real-valued function on a one-dimensional model from `(k, value)` pairs.
    pub fn from_real(model: &GroupModel, pairs: &[(i64, f64)]) -> Result<Self> {
        Self::from_pairs(model, pairs.iter().map(|&(k, v)| (model.reduce(GroupElement::scalar(k)), Complex64::new(v, 0.0))))
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn entries(&self) -> &[(GroupElement, Complex64)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: GroupElement) -> Complex64 {
        match self.entries.binary_search_by(|e| e.0.cmp(&x)) {
            Ok(i) => self.entries[i].1,
            Err(_) => ZERO,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    fn same_model(&self, other: &Self) -> Result<()> {
        if self.model == other.model {
            Ok(())
        } else {
            Err(Error::ModelMismatch(format!("{} vs {}", self.model.name(), other.model.name())))
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_sorted(&self.model, self.entries.iter().map(|&(x, v)| (x, v * c)).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.same_model(other)?;
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let take_left = j >= other.entries.len()
                || (i < self.entries.len() && self.entries[i].0 <= other.entries[j].0);
            let take_right = i >= self.entries.len()
                || (j < other.entries.len() && other.entries[j].0 <= self.entries[i].0);
            if take_left && take_right {
                out.push((self.entries[i].0, a * self.entries[i].1 + b * other.entries[j].1));
                i += 1;
                j += 1;
            } else if take_left {
                out.push((self.entries[i].0, a * self.entries[i].1));
                i += 1;
            } else {
                out.push((other.entries[j].0, b * other.entries[j].1));
                j += 1;
            }
        }
        Ok(Self::from_sorted(&self.model, out))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// `f*(x) = conj(f(x⁻¹))`.
    pub fn involution(&self) -> Self {
        let entries: Vec<_> = self.entries.iter().map(|&(x, v)| (self.model.inverse(x), v.conj())).collect();
        Self::from_pairs(&self.model, entries).expect("inverses stay in the model")
    }

    /// `(τ_x f)(t) = f(x⁻¹t)`.
    pub fn translate(&self, x: GroupElement) -> Result<Self> {
        self.model.check(x)?;
        Self::from_pairs(&self.model, self.entries.iter().map(|&(s, v)| (self.model.op(x, s), v)))
    }

    /// `max |f − f*|`.
    pub fn self_adjoint_defect(&self) -> f64 {
        self.sub(&self.involution()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// `‖f − g‖_∞`.
    pub fn distance_sup(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Unweighted `‖f‖₁ = h Σ |f(x)|`.
    pub fn l1_norm(&self) -> f64 {
        self.model.haar_mass() * self.entries.iter().map(|e| e.1.norm()).collect::<CompensatedSum>().value()
    }

    pub fn ln_l1_norm(&self) -> f64 {
        self.l1_norm().ln()
    }

    // -----------------------------------------------------------------------
    // Convolution
    // -----------------------------------------------------------------------

    /// `(f*g)(x) = h Σ_y f(y) g(y⁻¹x)`, summed over `y` in sorted order.
    pub fn convolve(&self, g: &Self) -> Result<Self> {
        self.convolve_with(g, Execution::default(), DEFAULT_PAIR_BUDGET)
    }

    pub fn convolve_with(&self, g: &Self, exec: Execution, pair_budget: usize) -> Result<Self> {
        self.same_model(g)?;
        if self.is_empty() || g.is_empty() {
            return Ok(Self::zero(&self.model));
        }
        let pairs = self.len().saturating_mul(g.len());
        if pairs > pair_budget {
            return Err(Error::BudgetExceeded { what: "convolution pairs", size: pairs, cap: pair_budget });
        }
        let h = self.model.haar_mass();
        if matches!(self.model.kind(), GroupKind::IntegerLattice { dim: 1 } | GroupKind::MeshLine { .. }) {
            return Ok(self.convolve_line(g, exec, h));
        }
        let mut support: Vec<GroupElement> =
            self.entries.iter().flat_map(|a| g.entries.iter().map(move |b| (a.0, b.0))).map(|(a, b)| self.model.op(a, b)).collect();
        par::sort_unstable(exec, &mut support);
        support.dedup();
        let values = par::map_slice(exec, &support, |&x| {
            let mut acc = ZERO;
            for &(y, fy) in &self.entries {
                let gy = g.get(self.model.op(self.model.inverse(y), x));
                if gy != ZERO {
                    acc += fy * gy;
                }
            }
            acc * h
        });
        Ok(Self::from_sorted(&self.model, support.into_iter().zip(values).collect()))
    }

    fn convolve_line(&self, g: &Self, exec: Execution, h: f64) -> Self {
        let (f0, f1) = (self.entries[0].0 .0[0], self.entries.last().unwrap().0 .0[0]);
        let (g0, g1) = (g.entries[0].0 .0[0], g.entries.last().unwrap().0 .0[0]);
        let dense = |fun: &Self, lo: i64, hi: i64| {
            let mut v = vec![ZERO; (hi - lo + 1) as usize];
            for &(x, val) in &fun.entries {
                v[(x.0[0] - lo) as usize] = val;
            }
            v
        };
        let fd = dense(self, f0, f1);
        let gd = dense(g, g0, g1);
        let out_len = fd.len() + gd.len() - 1;
        let values = par::map_range(exec, out_len, |i| {
            let j_lo = i.saturating_sub(gd.len() - 1);
            let j_hi = i.min(fd.len() - 1);
            let mut acc = ZERO;
            for j in j_lo..=j_hi {
                acc += fd[j] * gd[i - j];
            }
            acc * h
        });
        let entries = values
            .into_iter()
            .enumerate()
            .filter(|(_, v)| *v != ZERO)
            .map(|(i, v)| (GroupElement::scalar(f0 + g0 + i as i64), v))
            .collect();
        Self::from_sorted(&self.model, entries)
    }

    /// `f^{*n}` for `n ≥ 1`.
    pub fn conv_power(&self, n: usize, method: PowerMethod) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("convolution power needs n ≥ 1".into()));
        }
        match method {
            PowerMethod::Repeated => {
                let mut acc = self.clone();
                for _ in 1..n {
                    acc = acc.convolve(self)?;
                }
                Ok(acc)
            }
            PowerMethod::Squaring => {
                let mut base = self.clone();
                let mut acc: Option<Self> = None;
                let mut e = n;
                loop {
                    if e & 1 == 1 {
                        acc = Some(match acc {
                            None => base.clone(),
                            Some(a) => a.convolve(&base)?,
                        });
                    }
                    e >>= 1;
                    if e == 0 {
                        break;
                    }
                    base = base.convolve(&base)?;
                }
                Ok(acc.expect("n ≥ 1"))
            }
        }
    }

    // -----------------------------------------------------------------------
    // Serialization
    // -----------------------------------------------------------------------

    /// CSV with one column per coordinate followed by `re`, `im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rank = self.model.rank();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..rank).map(|i| format!("x{i}")).collect();
        header.extend(["re".to_string(), "im".to_string()]);
        w.write_record(&header)?;
        for (x, v) in &self.entries {
            let mut rec: Vec<String> = x.coords(rank).iter().map(|c| c.to_string()).collect();
            rec.push(format!("{:.17e}", v.re));
            rec.push(format!("{:.17e}", v.im));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(model: &GroupModel, input: R) -> Result<Self> {
        let rank = model.rank();
        let mut r = csv::Reader::from_reader(input);
        let mut pairs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != rank + 2 {
                return Err(Error::InvalidArgument(format!("expected {} columns, found {}", rank + 2, rec.len())));
            }
            let parse_err = |s: &str| Error::InvalidArgument(format!("cannot parse '{s}'"));
            let coords = (0..rank).map(|i| rec[i].trim().parse::<i64>().map_err(|_| parse_err(&rec[i]))).collect::<Result<Vec<_>>>()?;
            let re = rec[rank].trim().parse::<f64>().map_err(|_| parse_err(&rec[rank]))?;
            let im = rec[rank + 1].trim().parse::<f64>().map_err(|_| parse_err(&rec[rank + 1]))?;
            pairs.push((GroupElement::new(&coords), Complex64::new(re, im)));
        }
        Self::from_pairs(model, pairs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMethod {
    Repeated,
    Squaring,
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Exponent pair `(p, q)` and the weight for `‖·‖_{p,ω}`.
#[derive(Clone, Debug)]
pub struct NormContext {
    pub p: f64,
    /// Conjugate exponent; `None` when `p = 1`.
    pub q: Option<f64>,
    pub weight: Weight,
}

impl NormContext {
    pub fn new(p: f64, weight: Weight) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("p must lie in [1, ∞), got {p}")));
        }
        let q = if p == 1.0 { None } else { Some(p / (p - 1.0)) };
        Ok(NormContext { p, q, weight })
    }

    pub fn q(&self) -> Result<f64> {
        self.q.ok_or_else(|| Error::InvalidArgument("this check needs p > 1".into()))
    }

    /// `ln ‖f‖_{p,ω}`, computed in log space.
    pub fn ln_norm(&self, f: &GroupFunction) -> Result<f64> {
        ln_weighted_norm(f, &self.weight, self.p)
    }

    /// `‖f‖_{p,ω} = (h Σ |f|^p ω^p)^{1/p}`.
    pub fn norm(&self, f: &GroupFunction) -> Result<f64> {
        Ok(self.ln_norm(f)?.exp())
    }

    /// `‖f‖_{1,ω}`.
    pub fn norm_1w(&self, f: &GroupFunction) -> Result<f64> {
        Ok(ln_weighted_norm(f, &self.weight, 1.0)?.exp())
    }
}

/// `ln (h Σ |f(x)|^p ω(x)^p)^{1/p}`.
pub fn ln_weighted_norm(f: &GroupFunction, w: &Weight, p: f64) -> Result<f64> {
    if f.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let logs = f
        .entries()
        .iter()
        .map(|&(x, v)| Ok(p * (v.norm().ln() + w.ln_eval(x)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((log_sum_exp(&logs) + f.model().haar_mass().ln()) / p)
}

pub fn weighted_norm(f: &GroupFunction, ctx: &NormContext) -> Result<f64> {
    ctx.norm(f)
}

// ---------------------------------------------------------------------------
// (LPAlg) ratio
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioVerdict {
    Bounded,
    UnboundedTrend,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioPoint {
    pub m: usize,
    /// `R(m)` from the truncated sum (a certified lower bound).
    pub ratio: f64,
    pub ln_ratio: f64,
    /// Certified upper bound on the neglected tail relative to the partial sum.
    pub rel_tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub q: f64,
    pub points: Vec<RatioPoint>,
    pub truncation: usize,
    /// Slope of the least-squares line through `R(m)` on `[m_max/2, m_max]`.
    pub slope: f64,
    pub max_ratio: f64,
    pub argmax: usize,
    pub verdict: RatioVerdict,
}

impl RatioReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "ratio", "ln_ratio", "rel_tail"])?;
        for p in &self.points {
            w.write_record([p.m.to_string(), format!("{:.12e}", p.ratio), format!("{:.12e}", p.ln_ratio), format!("{:.3e}", p.rel_tail)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Slope threshold separating a plateau from an increasing trend.
pub const RATIO_SLOPE_TOL: f64 = 1e-3;
/// Target relative size of the neglected tail.
pub const RATIO_TAIL_TOL: f64 = 1e-6;

/// `R(m) = (u*u)(m)/u(m)` with `u = ω^{−q}` for `m = 0..=m_max` on `ℤ`, the
/// mesh line or a cyclic group.
pub fn lpalg_ratio(w: &Weight, q: f64, m_max: usize) -> Result<RatioReport> {
    lpalg_ratio_with(w, q, m_max, Execution::default())
}

pub fn lpalg_ratio_with(w: &Weight, q: f64, m_max: usize, exec: Execution) -> Result<RatioReport> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must lie in (1, ∞), got {q}")));
    }
    let model = w.model();
    let h = model.haar_mass();
    let points = match *model.kind() {
        GroupKind::CyclicGroup { order } => {
            let lnu = (0..order).map(|k| Ok(-q * w.ln_eval(GroupElement::scalar(k))?)).collect::<Result<Vec<f64>>>()?;
            let n = order as usize;
            let ms: Vec<usize> = (0..=m_max.min(n - 1)).collect();
            par::map_slice(exec, &ms, |&m| {
                let logs: Vec<f64> = (0..n).map(|k| lnu[k] + lnu[(m + n - k) % n]).collect();
                let ln_ratio = log_sum_exp(&logs) + h.ln() - lnu[m];
                RatioPoint { m, ratio: ln_ratio.exp(), ln_ratio, rel_tail: 0.0 }
            })
        }
        GroupKind::IntegerLattice { dim: 1 } | GroupKind::MeshLine { .. } => {
            return line_ratio(w, q, m_max, exec);
        }
        _ => {
            return Err(Error::UnsupportedModel(format!(
                "the (LPAlg) ratio is computed on one-dimensional models only, not {}",
                model.name()
            )))
        }
    };
    Ok(summarize_ratio(q, points, 0, m_max))
}

fn line_ratio(w: &Weight, q: f64, m_max: usize, exec: Execution) -> Result<RatioReport> {
    let env = w.lower_envelope().ok_or_else(|| Error::NoEnvelope(format!("{} has no analytic lower envelope", w.label())))?;
    if !env.is_summable(q) {
        return Err(if w.envelope_exact() {
            Error::Divergent(format!("ω^(-q) is not summable for ω = {}, q = {q}", w.label()))
        } else {
            Error::NoEnvelope(format!("the lower envelope of {} is too weak to certify the tail", w.label()))
        });
    }
    let s = w.index_scale()?;
    let h = w.model().haar_mass();
    let mut big_k = (2 * m_max).max(64);
    loop {
        if big_k > 1 << 22 {
            return Err(Error::BudgetExceeded { what: "ratio truncation", size: big_k, cap: 1 << 22 });
        }
        let span = (big_k + m_max) as i64;
        let ks: Vec<i64> = (-span..=span).collect();
        let lnu = par::try_map_slice(exec, &ks, |&k| Ok::<f64, Error>(-q * w.ln_eval(GroupElement::scalar(k))?))?;
        let at = |k: i64| lnu[(k + span) as usize];
        let ln_tail_one_side = -s.ln() + env.ln_tail_integral(q, s * big_k as f64).expect("summable envelope");
        let ms: Vec<usize> = (0..=m_max).collect();
        let points = par::map_slice(exec, &ms, |&m| {
            let mi = m as i64;
            let bk = big_k as i64;
            let logs: Vec<f64> = (-bk..=bk).map(|k| at(k) + at(mi - k)).collect();
            let ln_partial = log_sum_exp(&logs);
            let ln_tail = 2f64.ln() + ln_tail_one_side - q * env.eval(s * (big_k - m) as f64);
            let ln_ratio = ln_partial + h.ln() - at(mi);
            RatioPoint { m, ratio: ln_ratio.exp(), ln_ratio, rel_tail: (ln_tail - ln_partial).exp() }
        });
        if points.iter().all(|p| p.rel_tail < RATIO_TAIL_TOL) {
            return Ok(summarize_ratio(q, points, big_k, m_max));
        }
        big_k *= 2;
    }
}

fn summarize_ratio(q: f64, points: Vec<RatioPoint>, truncation: usize, m_max: usize) -> RatioReport {
    let lo = m_max / 2;
    let tail: Vec<&RatioPoint> = points.iter().filter(|p| p.m >= lo).collect();
    let xs: Vec<f64> = tail.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.ratio).collect();
    let slope = fit_line(&xs, &ys).map_or(0.0, |f| f.slope);
    let (argmax, max_ratio) = points.iter().fold((0, f64::NEG_INFINITY), |acc, p| if p.ratio > acc.1 { (p.m, p.ratio) } else { acc });
    let verdict = if slope <= RATIO_SLOPE_TOL && max_ratio.is_finite() { RatioVerdict::Bounded } else { RatioVerdict::UnboundedTrend };
    RatioReport { q, points, truncation, slope, max_ratio, argmax, verdict }
}

// ---------------------------------------------------------------------------
// Norm inequalities
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub witness: Option<String>,
}

impl InequalityCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs * (1.0 + INEQUALITY_SLACK) + f64::MIN_POSITIVE;
        InequalityCheck { name, lhs, rhs, slack: INEQUALITY_SLACK, holds, witness: None }
    }

    fn equality(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let holds = (lhs - rhs).abs() <= INEQUALITY_SLACK * lhs.abs().max(rhs.abs()) + f64::MIN_POSITIVE;
        InequalityCheck { name, lhs, rhs, slack: INEQUALITY_SLACK, holds, witness: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    /// Largest `ω(xy)/(ω(x)+ω(y))` over `x ∈ supp f`, `y ∈ supp g`.
    pub pytlik_constant: f64,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Largest `ω(xy)/(ω(x)+ω(y))` over the given element lists, with the
/// maximizing pair.
pub fn measured_pytlik_constant(w: &Weight, xs: &[GroupElement], ys: &[GroupElement]) -> Result<(f64, Option<(GroupElement, GroupElement)>)> {
    let model = w.model();
    let ln_y = ys.iter().map(|y| w.ln_eval(*y)).collect::<Result<Vec<_>>>()?;
    let mut best = (f64::NEG_INFINITY, None);
    for x in xs {
        let lx = w.ln_eval(*x)?;
        for (y, ly) in ys.iter().zip(&ln_y) {
            let v = w.ln_eval(model.op(*x, *y))? - log_sum_exp(&[lx, *ly]);
            if v > best.0 {
                best = (v, Some((*x, *y)));
            }
        }
    }
    Ok((best.0.exp(), best.1))
}

/// Module inequality, Pytlik inequality, Hölder embedding and involution
/// isometry for one pair `(f, g)`.
pub fn inequality_suite(f: &GroupFunction, g: &GroupFunction, ctx: &NormContext) -> Result<InequalityReport> {
    let fg = f.convolve(g)?;
    let w = &ctx.weight;
    let n_fg = ctx.norm(&fg)?;
    let (nf, ng) = (ctx.norm(f)?, ctx.norm(g)?);
    let mut checks = vec![InequalityCheck::new("module", n_fg, ctx.norm_1w(f)? * ng)];

    let fs: Vec<GroupElement> = f.support().collect();
    let gs: Vec<GroupElement> = g.support().collect();
    let (c, pair) = measured_pytlik_constant(w, &fs, &gs)?;
    let mut pyt = InequalityCheck::new("pytlik", n_fg, c * (nf * g.l1_norm() + ng * f.l1_norm()));
    pyt.witness = pair.map(|(x, y)| format!("{x};{y}"));
    checks.push(pyt);

    if let Some(q) = ctx.q {
        let ln_sum = log_sum_exp(&fs.iter().map(|x| Ok(-q * w.ln_eval(*x)?)).collect::<Result<Vec<_>>>()?);
        let h = f.model().haar_mass();
        let constant = ((ln_sum + h.ln()) / q).exp();
        checks.push(InequalityCheck::new("embedding", f.l1_norm(), constant * nf));
    }
    checks.push(InequalityCheck::equality("involution", ctx.norm(&f.involution())?, nf));
    Ok(InequalityReport { checks, pytlik_constant: c })
}

/// `‖τ_x f‖_{p,ω} ≤ ω(x)‖f‖_{p,ω}`.
pub fn translation_check(f: &GroupFunction, x: GroupElement, ctx: &NormContext) -> Result<InequalityCheck> {
    let lhs = ctx.norm(&f.translate(x)?)?;
    Ok(InequalityCheck::new("translation", lhs, ctx.weight.eval(x)? * ctx.norm(f)?))
}

// ---------------------------------------------------------------------------
// Randomized property suite
// ---------------------------------------------------------------------------

/// Violation counts of the algebraic properties over randomized cases.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PropertyTally {
    pub cases: usize,
    pub module: usize,
    pub pytlik: usize,
    pub embedding: usize,
    pub involution: usize,
    pub translation: usize,
    pub associativity: usize,
    pub anti_multiplicative_involution: usize,
}

impl PropertyTally {
    pub fn total_violations(&self) -> usize {
        self.module + self.pytlik + self.embedding + self.involution + self.translation + self.associativity + self.anti_multiplicative_involution
    }
}

/// Random complex function supported in the ball of the given radius.
pub fn random_function<R: Rng + ?Sized>(model: &GroupModel, radius: usize, rng: &mut R) -> Result<GroupFunction> {
    let ball = model.enumerate_ball(radius)?;
    let mut pairs = Vec::with_capacity(ball.len());
    for x in ball {
        if rng.random_bool(0.7) {
            pairs.push((x, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
        }
    }
    GroupFunction::from_pairs(model, pairs)
}

fn rel_close(a: &GroupFunction, b: &GroupFunction) -> Result<bool> {
    let scale = a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE);
    Ok(a.distance_sup(b)? <= 1e-12 * scale)
}

/// Runs `cases` randomized checks with functions supported in balls of radius
/// `radius`.
pub fn property_suite<R: Rng + ?Sized>(ctx: &NormContext, radius: usize, cases: usize, rng: &mut R) -> Result<PropertyTally> {
    let model = ctx.weight.model().clone();
    let mut t = PropertyTally { cases, ..Default::default() };
    for _ in 0..cases {
        let f = random_function(&model, radius, rng)?;
        let g = random_function(&model, radius, rng)?;
        let k = random_function(&model, radius.min(3), rng)?;
        let rep = inequality_suite(&f, &g, ctx)?;
        for c in rep.violations() {
            match c.name {
                "module" => t.module += 1,
                "pytlik" => t.pytlik += 1,
                "embedding" => t.embedding += 1,
                _ => t.involution += 1,
            }
        }
        let ball = model.enumerate_ball(radius)?;
        let x = ball[rng.random_range(0..ball.len())];
        if !translation_check(&f, x, ctx)?.holds {
            t.translation += 1;
        }
        if !rel_close(&f.convolve(&g)?.convolve(&k)?, &f.convolve(&g.convolve(&k)?)?)? {
            t.associativity += 1;
        }
        if !rel_close(&f.convolve(&g)?.involution(), &g.involution().convolve(&f.involution())?)? {
            t.anti_multiplicative_involution += 1;
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Approximate units
// ---------------------------------------------------------------------------

/// `f_k = (1/(k·h))·1` on the `k` mesh points centred at `0` (`k` odd).
pub fn approximate_unit(model: &GroupModel, k: usize, compact_radius: f64) -> Result<GroupFunction> {
    let GroupKind::MeshLine { step } = *model.kind() else {
        return Err(Error::UnsupportedModel(format!("approximate units live on the mesh line, not {}", model.name())));
    };
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("approximate unit needs an odd number of points, got {k}")));
    }
    let half = (k / 2) as i64;
    if half as f64 * step > compact_radius {
        return Err(Error::BudgetExceeded { what: "approximate unit support", size: k, cap: (2.0 * (compact_radius / step).floor() + 1.0) as usize });
    }
    let v = 1.0 / (k as f64 * step);
    GroupFunction::from_real(model, &(-half..=half).map(|j| (j, v)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(k: i64) -> GroupElement {
        GroupElement::scalar(k)
    }

    fn ints() -> GroupModel {
        GroupModel::integers()
    }

    #[test]
    fn delta_is_the_unit() {
        let m = ints();
        let f = GroupFunction::from_real(&m, &[(-1, 2.0), (3, -1.5)]).unwrap();
        let e = GroupFunction::delta(&m, z(0)).unwrap();
        assert_eq!(e.convolve(&f).unwrap(), f);
        assert_eq!(f.convolve(&e).unwrap(), f);
    }

    #[test]
    fn binomial_square() {
        let m = ints();
        let f = GroupFunction::from_real(&m, &[(-1, 1.0), (1, 1.0)]).unwrap();
        let sq = f.convolve(&f).unwrap();
        assert_eq!(sq, GroupFunction::from_real(&m, &[(-2, 1.0), (0, 2.0), (2, 1.0)]).unwrap());
        assert_eq!(f.conv_power(4, PowerMethod::Repeated).unwrap().get(z(0)).re, 6.0);
        assert_eq!(GroupFunction::delta(&m, z(1)).unwrap().conv_power(7, PowerMethod::Squaring).unwrap(), GroupFunction::delta(&m, z(7)).unwrap());
    }

    #[test]
    fn generic_path_matches_line_path() {
        let m = ints();
        let z1 = GroupModel::integer_lattice(1).unwrap().with_generators(vec![z(0), z(1), z(-1), z(2), z(-2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_function(&m, 5, &mut rng).unwrap();
        let g = random_function(&m, 4, &mut rng).unwrap();
        let line = f.convolve(&g).unwrap();
        let f2 = GroupFunction::from_pairs(&z1, f.entries().to_vec()).unwrap();
        let g2 = GroupFunction::from_pairs(&z1, g.entries().to_vec()).unwrap();
        let mut s = GroupFunction::zero(&z1);
        for &(x, v) in f2.entries() {
            s = s.add(&g2.translate(x).unwrap().scale(v)).unwrap();
        }
        assert_eq!(line.len(), s.len());
        for (a, b) in line.entries().iter().zip(s.entries()) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).norm() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_convolution_is_noncommutative() {
        let h = GroupModel::heisenberg();
        let x = GroupFunction::delta(&h, GroupElement::new(&[1, 0, 0])).unwrap();
        let y = GroupFunction::delta(&h, GroupElement::new(&[0, 1, 0])).unwrap();
        let xy = x.convolve(&y).unwrap();
        let yx = y.convolve(&x).unwrap();
        assert_eq!(xy.support().next(), Some(GroupElement::new(&[1, 1, 1])));
        assert_eq!(yx.support().next(), Some(GroupElement::new(&[1, 1, 0])));
    }

    #[test]
    fn involution_and_translation() {
        let m = ints();
        let f = GroupFunction::from_real(&m, &[(-2, 1.0), (0, 3.0), (2, 1.0)]).unwrap();
        assert_eq!(f.involution(), f);
        let g = GroupFunction::from_pairs(&m, [(z(1), Complex64::new(1.0, 2.0))]).unwrap();
        assert_eq!(g.involution().involution(), g);
        assert_eq!(g.involution().get(z(-1)), Complex64::new(1.0, -2.0));
        assert_eq!(GroupFunction::delta(&m, z(0)).unwrap().translate(z(2)).unwrap(), GroupFunction::delta(&m, z(2)).unwrap());
    }

    #[test]
    fn norms() {
        let m = ints();
        let ctx = NormContext::new(2.0, Weight::polynomial_on_integers(2.0)).unwrap();
        assert!((ctx.norm(&GroupFunction::delta(&m, z(0)).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((ctx.norm(&GroupFunction::delta(&m, z(1)).unwrap()).unwrap() - 4.0).abs() < 1e-14);
        let f = GroupFunction::from_real(&m, &[(-1, 1.0), (1, 1.0)]).unwrap();
        assert_eq!(f.l1_norm(), 2.0);
        assert!(NormContext::new(0.5, Weight::polynomial_on_integers(2.0)).is_err());
    }

    #[test]
    fn model_mismatch_is_reported() {
        let f = GroupFunction::delta(&ints(), z(0)).unwrap();
        let g = GroupFunction::delta(&GroupModel::cyclic(4).unwrap(), z(0)).unwrap();
        assert!(matches!(f.convolve(&g), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let m = ints();
        let f = GroupFunction::from_real(&m, &(0..100).map(|k| (k, 1.0)).collect::<Vec<_>>()).unwrap();
        assert!(matches!(f.convolve_with(&f, Execution::Sequential, 100), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn ratio_for_exponential_weight_grows_linearly() {
        let w = Weight::on(WeightSpec::exponential(1.0), &ints()).unwrap();
        let r = lpalg_ratio(&w, 2.0, 50).unwrap();
        for p in &r.points {
            assert!(p.ln_ratio >= ((p.m + 1) as f64).ln() - 1e-12);
        }
        assert_eq!(r.verdict, RatioVerdict::UnboundedTrend);
    }

    #[test]
    fn ratio_for_polynomial_weight_is_bounded() {
        let w = Weight::polynomial_on_integers(2.0);
        let r = lpalg_ratio(&w, 2.0, 100).unwrap();
        assert_eq!(r.verdict, RatioVerdict::Bounded, "slope {}", r.slope);
        assert!(r.points.iter().all(|p| p.rel_tail < RATIO_TAIL_TOL));
    }

    #[test]
    fn ratio_rejects_non_summable_weights() {
        let flat = Weight::on(WeightSpec::polynomial(1.0, 0.0), &ints()).unwrap();
        assert!(matches!(lpalg_ratio(&flat, 2.0, 10), Err(Error::Divergent(_))));
        let table = Weight::on(WeightSpec::Table { entries: vec![], outside: 1.0 }, &ints()).unwrap();
        assert!(matches!(lpalg_ratio(&table, 2.0, 10), Err(Error::NoEnvelope(_))));
    }

    #[test]
    fn ratio_on_cyclic_group_is_exact() {
        let c = GroupModel::cyclic(8).unwrap();
        let w = Weight::on(WeightSpec::polynomial(1.0, 1.0), &c).unwrap();
        let r = lpalg_ratio(&w, 2.0, 20).unwrap();
        assert_eq!(r.points.len(), 8);
        let u = |k: i64| (1.0 + (k.rem_euclid(8)).min(8 - k.rem_euclid(8)) as f64).powi(-2);
        let direct: f64 = (0..8).map(|k| u(k) * u(3 - k)).sum::<f64>() / u(3);
        assert!((r.points[3].ratio - direct).abs() < 1e-13);
    }

    #[test]
    fn inequality_suite_on_deltas() {
        let m = ints();
        let ctx = NormContext::new(2.0, Weight::polynomial_on_integers(2.0)).unwrap();
        let d = GroupFunction::delta(&m, z(1)).unwrap();
        let rep = inequality_suite(&d, &d, &ctx).unwrap();
        assert!(rep.all_hold(), "{rep:?}");
        assert!(rep.pytlik_constant <= 2.0);
    }

    #[test]
    fn property_suite_has_no_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ctx = NormContext::new(2.0, Weight::polynomial_on_integers(2.0)).unwrap();
        let t = property_suite(&ctx, 4, 20, &mut rng).unwrap();
        assert_eq!(t.total_violations(), 0, "{t:?}");
    }

    #[test]
    fn approximate_units() {
        let mesh = GroupModel::mesh_line(0.1).unwrap();
        let f1 = approximate_unit(&mesh, 1, 1.0).unwrap();
        assert!((f1.get(z(0)).re - 10.0).abs() < 1e-12);
        assert!((f1.l1_norm() - 1.0).abs() < 1e-15);
        let f5 = approximate_unit(&mesh, 5, 1.0).unwrap();
        assert_eq!(f5.involution(), f5);
        assert!((f5.l1_norm() - 1.0).abs() < 1e-14);
        assert!(approximate_unit(&mesh, 4, 1.0).is_err());
        assert!(approximate_unit(&mesh, 41, 1.0).is_err());
        assert!(approximate_unit(&ints(), 1, 1.0).is_err());
    }

    #[test]
    fn approximate_units_shrink_the_defect() {
        let mesh = GroupModel::mesh_line(0.1).unwrap();
        let ctx = NormContext::new(2.0, Weight::on(WeightSpec::polynomial(1.0, 1.0), &mesh).unwrap()).unwrap();
        let g = GroupFunction::from_real(&mesh, &(-40..=40).map(|j| (j, (-(j as f64 * 0.1).powi(2)).exp())).collect::<Vec<_>>()).unwrap();
        let defects: Vec<f64> = [21, 15, 9, 5, 3, 1]
            .iter()
            .map(|&k| {
                let f = approximate_unit(&mesh, k, 2.0).unwrap();
                ctx.norm(&f.convolve(&g).unwrap().sub(&g).unwrap()).unwrap()
            })
            .collect();
        assert!(defects.windows(2).all(|w| w[1] < w[0]), "{defects:?}");
        assert!(defects[5] < 1e-12, "{defects:?}");
    }

    #[test]
    fn csv_round_trip() {
        let h = GroupModel::heisenberg();
        let f = GroupFunction::from_pairs(&h, [(GroupElement::new(&[1, -2, 3]), Complex64::new(0.1, -0.7))]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("x0,x1,x2,re,im\n"));
        assert_eq!(GroupFunction::read_csv(&h, buf.as_slice()).unwrap(), f);
    }
}
