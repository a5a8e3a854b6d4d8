//! GRS, condition (S), the `o(e^{ε|x|})` envelope and the BDna summability
//! condition, each decided from analytic envelopes where possible.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, GroupModel};
use crate::numeric::CompensatedSum;
use crate::weight::{Envelope, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub verdict: Verdict,
    /// `(n, statistic)` pairs; the statistic depends on the condition.
    pub diagnostics: Vec<(f64, f64)>,
    /// Certified tail bound or envelope constant backing the verdict.
    pub tail_bound: Option<f64>,
    pub note: String,
}

impl ConditionReport {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Length of the largest element of `Uⁿ` per unit of `n` on infinite models.
fn radius_unit(w: &Weight) -> Result<f64> {
    w.model().ball_radius_length(1, w.length_mode())
}

// ---------------------------------------------------------------------------
// GRS
// ---------------------------------------------------------------------------

/// Lower bound for the translation length `lim |xⁿ|/n` and whether it is
/// known to vanish.
fn translation_length(model: &GroupModel, x: GroupElement) -> (f64, bool) {
    let gen_l1 = model.generators().iter().map(|g| g.0.iter().map(|c| c.unsigned_abs()).sum::<u64>()).max().unwrap_or(1).max(1) as f64;
    match model.kind() {
        GroupKind::CyclicGroup { .. } => (0.0, true),
        GroupKind::DiscreteHeisenberg => {
            let ab = (x.0[0].unsigned_abs() + x.0[1].unsigned_abs()) as f64;
            let gen_ab = model.generators().iter().map(|g| g.0[0].unsigned_abs() + g.0[1].unsigned_abs()).max().unwrap_or(1).max(1) as f64;
            (ab / gen_ab, ab == 0.0)
        }
        _ => {
            let l1 = x.0.iter().map(|c| c.unsigned_abs()).sum::<u64>() as f64;
            (l1 / gen_l1, l1 == 0.0)
        }
    }
}

/// `ω(xⁿ)^{1/n} → 1`.
pub fn check_grs(w: &Weight, x: GroupElement, n_max: usize) -> Result<ConditionReport> {
    let model = w.model();
    model.check(x)?;
    let mut diagnostics = Vec::new();
    let mut note = String::new();
    for n in 1..=n_max {
        match w.ln_eval(model.power(x, n as i64)) {
            Ok(l) => diagnostics.push((n as f64, l / n as f64)),
            Err(Error::RadiusCapExceeded { cap, .. }) => {
                note = format!("powers beyond n = {} exceed the radius cap {cap}", n - 1);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let (tau, tau_zero) = translation_length(model, x);
    let up = w.upper_envelope();
    let lo = w.lower_envelope();
    let verdict = if model.is_finite() || up.as_ref().is_some_and(|e| e.exp_rate == 0.0) || (tau_zero && up.is_some()) {
        Verdict::Holds
    } else if lo.as_ref().is_some_and(|e| e.exp_rate > 0.0) && tau > 0.0 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let unit = match w.length_mode() {
        crate::group::LengthMode::Absolute => radius_unit(w)?,
        _ => 1.0,
    };
    let limit = match (&verdict, &lo) {
        (Verdict::Fails, Some(e)) => Some((e.exp_rate * tau * unit).exp()),
        (Verdict::Holds, _) => Some(1.0),
        _ => None,
    };
    if note.is_empty() {
        note = match limit {
            Some(l) => format!("limit {l}"),
            None => "no certified limit".into(),
        };
    }
    Ok(ConditionReport { condition: "GRS".into(), verdict, diagnostics, tail_bound: limit, note })
}

// ---------------------------------------------------------------------------
// Condition (S)
// ---------------------------------------------------------------------------

/// `s(n)^{1/n} → 1`.
pub fn check_condition_s(w: &Weight, n_max: usize) -> Result<ConditionReport> {
    let diagnostics = ln_s_sequence(w, n_max)?.into_iter().map(|(n, l)| (n as f64, l / n as f64)).collect();
    let (verdict, limit) = if w.model().is_finite() {
        (Verdict::Holds, Some(1.0))
    } else if let Some(e) = w.upper_envelope().filter(|e| e.exp_rate == 0.0) {
        let _ = e;
        (Verdict::Holds, Some(1.0))
    } else if let Some(e) = w.lower_envelope().filter(|e| e.exp_rate > 0.0) {
        (Verdict::Fails, Some((e.exp_rate * radius_unit(w)?).exp()))
    } else {
        (Verdict::Inconclusive, None)
    };
    Ok(ConditionReport {
        condition: "S".into(),
        verdict,
        diagnostics,
        tail_bound: limit,
        note: limit.map_or("no certified limit".into(), |l| format!("limit {l}")),
    })
}

fn ln_s_sequence(w: &Weight, n_max: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        match w.ln_sup_on_ball(n) {
            Ok(l) => out.push((n, l)),
            Err(Error::RadiusCapExceeded { .. }) if n > 1 => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Exponential envelope
// ---------------------------------------------------------------------------

/// `d/dn E(u n)`.
fn envelope_slope(e: &Envelope, u: f64, n: f64) -> f64 {
    let l = u * n;
    u * (e.exp_rate + e.subexp.iter().map(|(c, g)| c * g * l.powf(g - 1.0)).sum::<f64>() + e.poly / (1.0 + l))
}

/// `s(n) = O(e^{εn})`: reports `C(ε) = max_n s(n)e^{−εn}`.
pub fn check_o_exp(w: &Weight, eps: f64, n_max: usize) -> Result<ConditionReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    let model = w.model();
    let unit = radius_unit(w)?;
    let mut horizon = n_max;
    let up = w.upper_envelope();
    if !model.is_finite() {
        if let Some(e) = &up {
            if e.exp_rate * unit < eps {
                while envelope_slope(e, unit, horizon as f64) > eps && horizon < 1 << 26 {
                    horizon *= 2;
                }
            }
        }
    }
    let seq = if w.is_radial() {
        let mut v = Vec::with_capacity(horizon);
        for n in 1..=horizon {
            v.push((n, w.ln_sup_on_ball(n)?));
        }
        v
    } else {
        ln_s_sequence(w, n_max)?
    };
    let diagnostics: Vec<(f64, f64)> = seq.iter().map(|&(n, l)| (n as f64, l - eps * n as f64)).collect();
    let measured = diagnostics.iter().map(|d| d.1).fold(0.0f64, f64::max).exp();

    let (verdict, bound, note) = if model.is_finite() {
        (Verdict::Holds, Some(measured), "finite group".to_string())
    } else if let Some(e) = up.as_ref().filter(|e| e.exp_rate * unit < eps) {
        let mut best = e.log_const.max(0.0);
        for n in 1..=horizon {
            best = best.max(e.eval(unit * n as f64) - eps * n as f64);
        }
        (Verdict::Holds, Some(best.exp()), format!("envelope maximum certified on n ≤ {horizon}"))
    } else if w.lower_envelope().is_some_and(|e| e.exp_rate * unit > eps || (e.exp_rate * unit == eps && (e.poly > 0.0 || !e.subexp.is_empty()))) {
        (Verdict::Fails, None, "lower envelope outgrows e^{εn}".to_string())
    } else if up.as_ref().is_some_and(|e| e.exp_rate * unit == eps && e.poly == 0.0 && e.subexp.is_empty()) {
        let e = up.as_ref().unwrap();
        (Verdict::Holds, Some(e.log_const.max(0.0).exp()), "envelope rate equals ε".to_string())
    } else {
        (Verdict::Inconclusive, None, "no certified envelope".to_string())
    };
    Ok(ConditionReport {
        condition: format!("o-exp(eps={eps})"),
        verdict,
        diagnostics,
        tail_bound: bound.or(Some(measured)),
        note,
    })
}

/// The default ε grid for the envelope cross-check.
pub const EPS_GRID: [f64; 6] = [1.0, 0.5, 0.1, 0.05, 0.01, 0.001];

/// Holds iff `check_o_exp` holds for every ε in the grid; fails if any fails.
pub fn check_o_exp_grid(w: &Weight, grid: &[f64], n_max: usize) -> Result<Verdict> {
    let mut all = Verdict::Holds;
    for &eps in grid {
        match check_o_exp(w, eps, n_max)?.verdict {
            Verdict::Fails => return Ok(Verdict::Fails),
            Verdict::Inconclusive => all = Verdict::Inconclusive,
            Verdict::Holds => {}
        }
    }
    Ok(all)
}

// ---------------------------------------------------------------------------
// BDna
// ---------------------------------------------------------------------------

/// First index of the BDna sum (`n ≥ e^e`).
pub const BDNA_START: usize = 16;

/// `∫_N^∞ (ln t)^k t^{−s} dt` for `s > 1`.
fn int_log_power(k: u32, s: f64, n: f64) -> f64 {
    let l = n.ln();
    let r = s - 1.0;
    let mut acc = 0.0;
    let mut fact_ratio = 1.0;
    for j in (0..=k).rev() {
        acc += fact_ratio * l.powi(j as i32) / r.powi((k - j + 1) as i32);
        fact_ratio *= j as f64;
    }
    (-r * l).exp() * acc
}

/// Upper bound on `∫_N^∞ ln(ln t)·E(ut)/t² dt` for an envelope without an
/// exponential term and `log_const ≥ 0`.
fn bdna_tail(e: &Envelope, u: f64, n: f64) -> f64 {
    let alpha = n.ln().ln() - 1.0;
    let beta = 1.0 / n.ln();
    // ∫ (α + β ln t) (ln t)^k t^{-s}
    let mixed = |k: u32, s: f64| alpha * int_log_power(k, s, n) + beta * int_log_power(k + 1, s, n);
    let mut total = e.log_const * mixed(0, 2.0);
    for &(c, g) in &e.subexp {
        total += c * u.powf(g) * mixed(0, 2.0 - g);
    }
    if e.poly > 0.0 {
        total += e.poly * ((u.ln() + 1.0 / (u * n)) * mixed(0, 2.0) + mixed(1, 2.0));
    }
    total
}

/// `Σ_{n ≥ e^e} ln(ln n)·ln s(n)/(1+n²) < ∞`.
pub fn check_bdna(w: &Weight, n_max: usize) -> Result<ConditionReport> {
    let n_max = n_max.max(BDNA_START);
    let model = w.model();
    let mut sum = CompensatedSum::new();
    let mut diagnostics = Vec::new();
    let mut last = BDNA_START - 1;
    for n in BDNA_START..=n_max {
        let ln_s = match w.ln_sup_on_ball(n) {
            Ok(v) => v,
            Err(Error::RadiusCapExceeded { .. }) if n > BDNA_START => break,
            Err(e) => return Err(e),
        };
        let nf = n as f64;
        sum.add(nf.ln().ln() * ln_s / (1.0 + nf * nf));
        diagnostics.push((nf, sum.value()));
        last = n;
    }
    let partial = sum.value();
    let tail_env = if model.is_finite() {
        let diam = model.diameter()?.unwrap_or(1).max(1);
        Some(Envelope { log_const: w.ln_sup_on_ball(diam)?.max(0.0), ..Default::default() })
    } else {
        w.upper_envelope().filter(|e| e.exp_rate == 0.0 && e.log_const >= 0.0)
    };
    let unit = radius_unit(w)?;
    let (verdict, tail_bound, note) = if let Some(e) = tail_env {
        let u = if model.is_finite() { 1.0 } else { unit };
        let tail = bdna_tail(&e, u, last as f64);
        (Verdict::Holds, Some(tail), format!("partial sum {partial:.6e} + certified tail {tail:.3e}"))
    } else if !model.is_finite() && w.lower_envelope().is_some_and(|e| e.exp_rate > 0.0) {
        (Verdict::Fails, None, "ln s(n) grows linearly; the tail diverges like Σ ln ln n / n".to_string())
    } else {
        (Verdict::Inconclusive, None, format!("partial sum {partial:.6e}; no envelope for the tail"))
    };
    Ok(ConditionReport { condition: "BDna".into(), verdict, diagnostics, tail_bound, note })
}

// ---------------------------------------------------------------------------
// Condition matrix
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ConditionRow {
    pub weight: String,
    pub grs: Verdict,
    pub s: Verdict,
    pub o_exp: Verdict,
    pub bdna: Verdict,
}

impl ConditionRow {
    /// (S) and the envelope condition agree, as they must.
    pub fn s_matches_o_exp(&self) -> bool {
        self.s == self.o_exp
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MatrixOptions {
    pub n_max: usize,
    pub grs_n_max: usize,
    pub bdna_n_max: usize,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions { n_max: 200, grs_n_max: 200, bdna_n_max: 2000 }
    }
}

fn first_generator(model: &GroupModel) -> GroupElement {
    model.generators().iter().copied().find(|g| *g != model.identity()).unwrap_or_else(|| model.identity())
}

pub fn condition_row(w: &Weight, opts: MatrixOptions) -> Result<ConditionRow> {
    let x = first_generator(w.model());
    Ok(ConditionRow {
        weight: w.label(),
        grs: check_grs(w, x, opts.grs_n_max)?.verdict,
        s: check_condition_s(w, opts.n_max)?.verdict,
        o_exp: check_o_exp_grid(w, &EPS_GRID, opts.n_max)?,
        bdna: check_bdna(w, opts.bdna_n_max)?.verdict,
    })
}

pub fn condition_matrix(weights: &[Weight], opts: MatrixOptions) -> Result<Vec<ConditionRow>> {
    weights.iter().map(|w| condition_row(w, opts)).collect()
}

pub fn write_matrix_csv<W: Write>(rows: &[ConditionRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["weight", "grs", "s", "o_exp", "bdna"])?;
    for r in rows {
        w.write_record([r.weight.as_str(), r.grs.symbol(), r.s.symbol(), r.o_exp.symbol(), r.bdna.symbol()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightSpec;

    fn on_z(spec: WeightSpec) -> Weight {
        Weight::on(spec, &GroupModel::integers()).unwrap()
    }

    fn one() -> GroupElement {
        GroupElement::scalar(1)
    }

    #[test]
    fn grs_verdicts() {
        assert_eq!(check_grs(&on_z(WeightSpec::subexponential(1.0, 0.5)), one(), 100).unwrap().verdict, Verdict::Holds);
        let e = check_grs(&on_z(WeightSpec::exponential(1.0)), one(), 100).unwrap();
        assert_eq!(e.verdict, Verdict::Fails);
        assert!((e.tail_bound.unwrap() - 1f64.exp()).abs() < 1e-12);
        assert!(e.diagnostics.iter().all(|d| (d.1 - 1.0).abs() < 1e-12));
        assert_eq!(check_grs(&on_z(WeightSpec::polynomial(1.0, 3.0)), one(), 100).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn grs_on_heisenberg_center() {
        let h = GroupModel::heisenberg().with_radius_cap(12);
        let w = Weight::on(WeightSpec::exponential(1.0), &h).unwrap();
        let center = check_grs(&w, GroupElement::new(&[0, 0, 1]), 30).unwrap();
        assert_eq!(center.verdict, Verdict::Holds);
        let x = check_grs(&w, GroupElement::new(&[1, 0, 0]), 8).unwrap();
        assert_eq!(x.verdict, Verdict::Fails);
    }

    #[test]
    fn s_verdicts() {
        assert_eq!(check_condition_s(&on_z(WeightSpec::subexponential(2.0, 0.3)), 100).unwrap().verdict, Verdict::Holds);
        let e = check_condition_s(&on_z(WeightSpec::exponential(0.7)), 100).unwrap();
        assert_eq!(e.verdict, Verdict::Fails);
        assert!((e.tail_bound.unwrap() - 0.7f64.exp()).abs() < 1e-12);
        assert_eq!(check_condition_s(&on_z(WeightSpec::polynomial(1.0, 2.0)), 100).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn o_exp_constant_matches_one_dimensional_maximum() {
        let w = on_z(WeightSpec::subexponential(1.0, 0.5));
        let r = check_o_exp(&w, 0.1, 50).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        // max over n of √n − 0.1 n sits at n = 25 with value 2.5
        assert!((r.tail_bound.unwrap() - 2.5f64.exp()).abs() < 1e-9);
        assert_eq!(check_o_exp(&on_z(WeightSpec::exponential(1.0)), 0.5, 50).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn tail_integral_helper() {
        // ∫_N^∞ ln t / t² dt = (ln N + 1)/N
        let n = 20.0f64;
        assert!((int_log_power(1, 2.0, n) - (n.ln() + 1.0) / n).abs() < 1e-15);
        assert!((int_log_power(0, 2.5, n) - n.powf(-1.5) / 1.5).abs() < 1e-15);
    }

    #[test]
    fn bdna_tail_dominates_the_true_tail() {
        let w = on_z(WeightSpec::subexponential(1.0, 0.5));
        let r = check_bdna(&w, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let true_tail: f64 = (101..2_000_000).map(|n| n as f64).map(|n| n.ln().ln() * n.sqrt() / (1.0 + n * n)).sum();
        assert!(r.tail_bound.unwrap() >= true_tail, "{} < {true_tail}", r.tail_bound.unwrap());
    }

    #[test]
    fn bdna_verdict_survives_squaring_the_generators() {
        let specs = [
            (WeightSpec::polynomial(1.0, 2.0), Verdict::Holds),
            (WeightSpec::subexponential(1.0, 0.5), Verdict::Holds),
            (WeightSpec::exponential(0.5), Verdict::Fails),
        ];
        for model in [GroupModel::integers(), GroupModel::integer_lattice(2).unwrap()] {
            let squared = model.squared_generators().unwrap();
            for (spec, expect) in &specs {
                for m in [&model, &squared] {
                    let w = Weight::on(spec.clone(), m).unwrap();
                    let r = check_bdna(&w, 200).unwrap();
                    assert_eq!(r.verdict, *expect, "{spec} on {} with {} generators", m.name(), m.generators().len());
                }
            }
        }
    }

    #[test]
    fn matrix_classification() {
        let zoo = [
            (WeightSpec::polynomial(2.0, 3.0), Verdict::Holds),
            (WeightSpec::subexponential(1.0, 0.5), Verdict::Holds),
            (WeightSpec::exponential(1.0), Verdict::Fails),
        ];
        for (spec, expect) in zoo {
            let row = condition_row(&on_z(spec.clone()), MatrixOptions::default()).unwrap();
            assert_eq!(row.s, expect, "{spec}");
            assert_eq!(row.bdna, expect, "{spec}");
            assert_eq!(row.grs, expect, "{spec}");
            assert!(row.s_matches_o_exp(), "{row:?}");
        }
    }

    #[test]
    fn finite_groups_satisfy_everything() {
        let c = GroupModel::cyclic(12).unwrap();
        let w = Weight::on(WeightSpec::exponential(1.0), &c).unwrap();
        let row = condition_row(&w, MatrixOptions { n_max: 30, grs_n_max: 30, bdna_n_max: 40 }).unwrap();
        assert_eq!((row.grs, row.s, row.o_exp, row.bdna), (Verdict::Holds, Verdict::Holds, Verdict::Holds, Verdict::Holds));
    }
}
