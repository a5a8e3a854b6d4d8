//! Spectral radii from convolution powers, characters of abelian models and
//! the exponents of unbounded characters admitted by a weight.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{ln_weighted_norm, GroupFunction, NormContext, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, GroupModel};
use crate::par::{self, Execution};
use crate::weight::Weight;

const ROUNDOFF_PAD: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Spectral radius estimates
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RootPoint {
    pub k: usize,
    pub n: u64,
    /// `‖f^{*N}‖^{1/N}`.
    pub root: f64,
    pub ln_norm: f64,
    /// Three-point extrapolation using this and the two previous roots.
    pub extrapolated: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralEstimate {
    pub norm: String,
    pub points: Vec<RootPoint>,
    pub extrapolated: f64,
    /// Discrepancy between the last two extrapolations.
    pub slack: f64,
    pub lower: f64,
    pub upper: f64,
    pub self_adjoint: bool,
    /// Set when the power sequence stopped early on the support budget.
    pub truncated: bool,
}

impl SpectralEstimate {
    pub fn contains(&self, r: f64) -> bool {
        self.lower <= r && r <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn last_root(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.root)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "N", "root", "ln_norm", "extrapolated"])?;
        for p in &self.points {
            w.write_record([
                p.k.to_string(),
                p.n.to_string(),
                format!("{:.15e}", p.root),
                format!("{:.15e}", p.ln_norm),
                p.extrapolated.map(|e| format!("{e:.15e}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One bound of the chain `‖f^{*2ⁿ}‖_{p,ω} ≤ (2C)ⁿ ‖f‖_{p,ω} ‖f‖₁^{2ⁿ−1}`.
#[derive(Clone, Debug, Serialize)]
pub struct PytlikBound {
    pub k: usize,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRadii {
    pub l1: SpectralEstimate,
    pub weighted: SpectralEstimate,
    pub pytlik_chain: Option<Vec<PytlikBound>>,
}

impl SpectralRadii {
    /// Every computed `r₁` root is at most the weighted root of the same power.
    pub fn ordered_at_every_n(&self) -> bool {
        self.l1
            .points
            .iter()
            .zip(&self.weighted.points)
            .all(|(a, b)| a.root <= b.root * (1.0 + ROUNDOFF_PAD))
    }
}

fn extrapolate(ns: [f64; 3], ys: [f64; 3]) -> Option<f64> {
    let m = Matrix3::from_fn(|i, j| match j {
        0 => 1.0,
        1 => ns[i].ln() / ns[i],
        _ => 1.0 / ns[i],
    });
    m.lu().solve(&Vector3::from(ys)).map(|s| s[0])
}

fn finish(norm: String, points: Vec<RootPoint>, self_adjoint: bool, truncated: bool, upper_is_certified: bool) -> SpectralEstimate {
    let extraps: Vec<f64> = points.iter().filter_map(|p| p.extrapolated).collect();
    let last_root = points.last().map_or(f64::NAN, |p| p.root);
    let min_root = points.iter().map(|p| p.root).fold(f64::INFINITY, f64::min);
    let (extrapolated, slack) = match extraps.as_slice() {
        [.., a, b] => (b.exp(), (b.exp() - a.exp()).abs()),
        [b] => (b.exp(), (b.exp() - last_root).abs()),
        [] => (last_root, 0.0),
    };
    let mut upper = extrapolated + slack;
    if upper_is_certified {
        upper = upper.min(min_root);
    }
    let lower = (extrapolated - slack).min(upper);
    SpectralEstimate {
        norm,
        points,
        extrapolated,
        slack,
        lower: lower * (1.0 - ROUNDOFF_PAD),
        upper: upper * (1.0 + ROUNDOFF_PAD),
        self_adjoint,
        truncated,
    }
}

/// Roots `‖f^{*2^k}‖^{2^{-k}}` for `k = 0..=k_max` in the unweighted `ℓ¹`
/// norm and in `‖·‖_{p,ω}`, computed from normalized powers so nothing
/// overflows.
pub fn spectral_radii(f: &GroupFunction, ctx: &NormContext, k_max: usize) -> Result<SpectralRadii> {
    spectral_radii_with(f, ctx, k_max, Execution::default(), DEFAULT_PAIR_BUDGET)
}

pub fn spectral_radii_with(f: &GroupFunction, ctx: &NormContext, k_max: usize, exec: Execution, pair_budget: usize) -> Result<SpectralRadii> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("spectral radius of the zero function".into()));
    }
    let self_adjoint = f.self_adjoint_defect() <= 1e-12 * f.max_abs();
    let w = &ctx.weight;
    let mut scale = f.ln_l1_norm();
    let mut h = f.scale_real((-scale).exp());
    let mut l1_pts = Vec::new();
    let mut w_pts = Vec::new();
    let mut truncated = false;
    for k in 0..=k_max {
        let n = 1u64 << k;
        let ln1 = scale + h.ln_l1_norm();
        let lnw = scale + ln_weighted_norm(&h, w, ctx.p)?;
        for (pts, ln_norm) in [(&mut l1_pts, ln1), (&mut w_pts, lnw)] {
            let y = ln_norm / n as f64;
            let extrapolated = if k >= 2 {
                let prev: &Vec<RootPoint> = pts;
                extrapolate(
                    [(n / 4) as f64, (n / 2) as f64, n as f64],
                    [prev[k - 2].root.ln(), prev[k - 1].root.ln(), y],
                )
            } else {
                None
            };
            pts.push(RootPoint { k, n, root: y.exp(), ln_norm, extrapolated });
        }
        if k == k_max {
            break;
        }
        let sq = match h.convolve_with(&h, exec, pair_budget) {
            Ok(sq) => sq,
            Err(Error::BudgetExceeded { .. }) if k >= 2 => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let ln_sq = sq.ln_l1_norm();
        if !ln_sq.is_finite() {
            return Err(Error::InvalidArgument("convolution power vanished".into()));
        }
        scale = 2.0 * scale + ln_sq;
        h = sq.scale_real((-ln_sq).exp());
    }
    let pytlik_chain = w.pytlik_constant().map(|c| {
        let ln_f1 = f.ln_l1_norm();
        let ln_fw = w_pts[0].ln_norm;
        w_pts
            .iter()
            .map(|p| {
                let ln_rhs = p.k as f64 * (2.0 * c).ln() + ln_fw + (p.n as f64 - 1.0) * ln_f1;
                PytlikBound { k: p.k, ln_lhs: p.ln_norm, ln_rhs, holds: p.ln_norm <= ln_rhs + 1e-9 * ln_rhs.abs().max(1.0) }
            })
            .collect()
    });
    Ok(SpectralRadii {
        l1: finish("l1".into(), l1_pts, self_adjoint, truncated, true),
        weighted: finish(format!("p={},omega={}", ctx.p, w.label()), w_pts, self_adjoint, truncated, true),
        pytlik_chain,
    })
}

/// Estimate in a single norm.
pub fn spectral_radius_estimate(f: &GroupFunction, ctx: &NormContext, k_max: usize, weighted: bool) -> Result<SpectralEstimate> {
    let r = spectral_radii(f, ctx, k_max)?;
    Ok(if weighted { r.weighted } else { r.l1 })
}

// ---------------------------------------------------------------------------
// Characters
// ---------------------------------------------------------------------------

/// A unitary character of an abelian model.
#[derive(Clone, Debug, PartialEq)]
pub enum Character {
    /// `x ↦ e^{i⟨θ, x⟩}` on `ℤ^d` (or on the mesh index).
    Angles(Vec<f64>),
    /// `k ↦ e^{2πi jk/N}` on `ℤ/N`.
    Index(i64),
}

fn character_value(model: &GroupModel, chi: &Character, x: GroupElement) -> Result<Complex64> {
    match (model.kind(), chi) {
        (GroupKind::DiscreteHeisenberg, _) => Err(Error::UnsupportedModel("the Heisenberg group is not abelian".into())),
        (GroupKind::CyclicGroup { order }, Character::Index(j)) => {
            let phase = 2.0 * PI * ((j.rem_euclid(*order) * x.0[0]) % order) as f64 / *order as f64;
            Ok(Complex64::from_polar(1.0, phase))
        }
        (GroupKind::IntegerLattice { dim }, Character::Angles(th)) if th.len() == *dim => {
            Ok(Complex64::from_polar(1.0, th.iter().zip(x.0).map(|(t, c)| t * c as f64).sum()))
        }
        (GroupKind::MeshLine { .. }, Character::Angles(th)) if th.len() == 1 => Ok(Complex64::from_polar(1.0, th[0] * x.0[0] as f64)),
        _ => Err(Error::InvalidArgument(format!("character {chi:?} does not fit {}", model.name()))),
    }
}

/// `χ(f) = Σ_x f(x) χ(x)` (times the Haar mass).
pub fn character_eval(f: &GroupFunction, chi: &Character) -> Result<Complex64> {
    let model = f.model();
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, v) in f.entries() {
        acc += v * character_value(model, chi, x)?;
    }
    Ok(acc * model.haar_mass())
}

fn cyclic_order(model: &GroupModel) -> Result<i64> {
    match model.kind() {
        GroupKind::CyclicGroup { order } => Ok(*order),
        _ => Err(Error::UnsupportedModel(format!("{} is not a cyclic group", model.name()))),
    }
}

/// All character values `χ_j(f)` on `ℤ/N`, `j = 0..N`.
pub fn dft(f: &GroupFunction) -> Result<Vec<Complex64>> {
    let n = cyclic_order(f.model())?;
    (0..n).map(|j| character_eval(f, &Character::Index(j))).collect()
}

/// Eigenvalues of the `N×N` circulant operator `g ↦ f*g` (listed by
/// character index).
pub fn finite_spectrum(f: &GroupFunction) -> Result<Vec<Complex64>> {
    dft(f)
}

/// Circular convolution computed through characters (the oracle path).
pub fn dft_convolution(f: &GroupFunction, g: &GroupFunction) -> Result<GroupFunction> {
    let n = cyclic_order(f.model())?;
    let (ff, gg) = (dft(f)?, dft(g)?);
    let prod: Vec<Complex64> = ff.iter().zip(&gg).map(|(a, b)| a * b).collect();
    let pairs = (0..n).map(|k| {
        let v: Complex64 = (0..n)
            .map(|j| prod[j as usize] * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
            .sum::<Complex64>()
            / n as f64;
        (GroupElement::scalar(k), v)
    });
    GroupFunction::from_pairs(f.model(), pairs.collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// Unbounded characters
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Converges,
    Diverges,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterDomain {
    pub q: f64,
    /// Grid points `a` with `Σ e^{qan} ω(n)^{-q} < ∞` certified.
    pub admissible: Vec<f64>,
    pub undecided: Vec<f64>,
    /// Maximal runs of consecutive admissible grid points.
    pub intervals: Vec<(f64, f64)>,
}

impl CharacterDomain {
    pub fn is_only_zero(&self) -> bool {
        self.admissible == [0.0] && self.undecided.is_empty()
    }
}

const RATE_TOL: f64 = 1e-9;

/// Decides convergence of `Σ_n e^{qan} ω(n)^{-q}` on `ℤ` from the weight's
/// analytic envelopes.
pub fn character_membership(w: &Weight, q: f64, a: f64) -> Result<Membership> {
    if !matches!(w.model().kind(), GroupKind::IntegerLattice { dim: 1 }) || w.model().generators().len() != 3 {
        return Err(Error::UnsupportedModel("character domains are computed on ℤ with its standard generators".into()));
    }
    let (lo, hi) = match (w.lower_envelope(), w.upper_envelope()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Error::NoEnvelope(format!("{} has no analytic envelope", w.label()))),
    };
    let a = a.abs();
    let converges = if a < lo.exp_rate - RATE_TOL {
        true
    } else if (a - lo.exp_rate).abs() <= RATE_TOL {
        !lo.subexp.is_empty() || q * lo.poly > 1.0
    } else {
        false
    };
    if converges {
        return Ok(Membership::Converges);
    }
    let diverges = if a > hi.exp_rate + RATE_TOL {
        true
    } else if (a - hi.exp_rate).abs() <= RATE_TOL {
        hi.subexp.is_empty() && q * hi.poly <= 1.0
    } else {
        false
    };
    Ok(if diverges { Membership::Diverges } else { Membership::Undecided })
}

pub fn character_domain(w: &Weight, q: f64, grid: &[f64]) -> Result<CharacterDomain> {
    let verdicts = par::try_map_slice(Execution::default(), grid, |&a| character_membership(w, q, a))?;
    let mut admissible = Vec::new();
    let mut undecided = Vec::new();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for (&a, v) in grid.iter().zip(&verdicts) {
        match v {
            Membership::Converges => {
                admissible.push(a);
                run = Some(run.map_or((a, a), |(s, _)| (s, a)));
                continue;
            }
            Membership::Undecided => undecided.push(a),
            Membership::Diverges => {}
        }
        if let Some(r) = run.take() {
            intervals.push(r);
        }
    }
    intervals.extend(run);
    Ok(CharacterDomain { q, admissible, undecided, intervals })
}

/// Uniform grid `lo, lo+step, …, hi` built from integer multiples of `step`.
pub fn exponent_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let i0 = (lo / step).round() as i64;
    let i1 = (hi / step).round() as i64;
    (i0..=i1).map(|i| i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightSpec;

    fn z(k: i64) -> GroupElement {
        GroupElement::scalar(k)
    }

    #[test]
    fn characters_on_integers() {
        let m = GroupModel::integers();
        let f = GroupFunction::from_real(&m, &[(-1, 1.0), (1, 1.0)]).unwrap();
        assert!((character_eval(&f, &Character::Angles(vec![0.0])).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(character_eval(&f, &Character::Angles(vec![PI / 2.0])).unwrap().norm() < 1e-15);
        let h = GroupFunction::delta(&GroupModel::heisenberg(), GroupElement::new(&[0, 0, 0])).unwrap();
        assert!(matches!(character_eval(&h, &Character::Angles(vec![0.0; 3])), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn finite_spectra() {
        let c4 = GroupModel::cyclic(4).unwrap();
        let s = finite_spectrum(&GroupFunction::delta(&c4, z(1)).unwrap()).unwrap();
        let want = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
        let c8 = GroupModel::cyclic(8).unwrap();
        let f = GroupFunction::from_real(&c8, &[(1, 1.0), (-1, 1.0)]).unwrap();
        for (j, l) in finite_spectrum(&f).unwrap().into_iter().enumerate() {
            assert!((l.re - 2.0 * (2.0 * PI * j as f64 / 8.0).cos()).abs() < 1e-14);
            assert!(l.im.abs() < 1e-14);
        }
    }

    #[test]
    fn dft_convolution_agrees() {
        let c = GroupModel::cyclic(6).unwrap();
        let f = GroupFunction::from_real(&c, &[(0, 1.0), (2, -0.5), (5, 0.25)]).unwrap();
        let g = GroupFunction::from_real(&c, &[(1, 2.0), (3, 1.0)]).unwrap();
        let a = f.convolve(&g).unwrap();
        let b = dft_convolution(&f, &g).unwrap();
        for k in 0..6 {
            assert!((a.get(z(k)) - b.get(z(k))).norm() < 1e-12);
        }
    }

    #[test]
    fn radius_of_translate_is_one() {
        let m = GroupModel::integers();
        let ctx = NormContext::new(1.0, Weight::polynomial_on_integers(2.0)).unwrap();
        let r = spectral_radii(&GroupFunction::delta(&m, z(1)).unwrap(), &ctx, 8).unwrap();
        for p in &r.weighted.points {
            assert!((p.root - (1.0 + p.n as f64).powf(2.0 / p.n as f64)).abs() < 1e-12);
        }
        assert!(r.weighted.contains(1.0), "{:?}", (r.weighted.lower, r.weighted.upper));
    }

    #[test]
    fn domains() {
        let m = GroupModel::integers();
        let grid = exponent_grid(-2.0, 2.0, 0.01);
        assert_eq!(grid.len(), 401);
        let poly = Weight::on(WeightSpec::polynomial(1.0, 2.0), &m).unwrap();
        assert!(character_domain(&poly, 2.0, &grid).unwrap().is_only_zero());
        let mixed = Weight::on(WeightSpec::product(WeightSpec::exponential(1.0), WeightSpec::polynomial(1.0, 2.0)), &m).unwrap();
        let d = character_domain(&mixed, 2.0, &grid).unwrap();
        assert_eq!(d.intervals, vec![(-1.0, 1.0)]);
        let bare = Weight::on(WeightSpec::exponential(1.0), &m).unwrap();
        let d = character_domain(&bare, 2.0, &grid).unwrap();
        assert_eq!(d.intervals, vec![(-0.99, 0.99)]);
    }
}
