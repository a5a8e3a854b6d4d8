//! Weight families, ball suprema `s(n)`, axiom checks and analytic envelopes.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, GroupModel, LengthMode};
use crate::operator::OperatorModel;
use crate::par::{self, Execution};

/// Serializable weight description, `{kind, params}` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum WeightSpec {
    /// `K(1+|x|)^D`.
    Polynomial { k: f64, d: f64 },
    /// `e^{C|x|^γ}`.
    SubExponential { c: f64, gamma: f64 },
    /// `e^{C|x|}`.
    Exponential { c: f64 },
    /// `u(x)·w1(x)`.
    Product { u: Box<WeightSpec>, w1: Box<WeightSpec> },
    /// `max(‖e^{xT}‖, ‖e^{−xT}‖)` at the real coordinate of `x`.
    Operator { operator: OperatorModel },
    /// Explicit values; points not listed take the value `outside`.
    Table { entries: Vec<TableEntry>, outside: f64 },
    /// `factor·ω`.
    Scaled { factor: f64, inner: Box<WeightSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub x: Vec<i64>,
    pub value: f64,
}

impl WeightSpec {
    pub fn polynomial(k: f64, d: f64) -> Self {
        WeightSpec::Polynomial { k, d }
    }

    pub fn subexponential(c: f64, gamma: f64) -> Self {
        WeightSpec::SubExponential { c, gamma }
    }

    pub fn exponential(c: f64) -> Self {
        WeightSpec::Exponential { c }
    }

    pub fn product(u: WeightSpec, w1: WeightSpec) -> Self {
        WeightSpec::Product { u: Box::new(u), w1: Box::new(w1) }
    }

    pub fn scaled(factor: f64, inner: WeightSpec) -> Self {
        WeightSpec::Scaled { factor, inner: Box::new(inner) }
    }

    fn contains_operator(&self) -> bool {
        match self {
            WeightSpec::Operator { .. } => true,
            WeightSpec::Product { u, w1 } => u.contains_operator() || w1.contains_operator(),
            WeightSpec::Scaled { inner, .. } => inner.contains_operator(),
            _ => false,
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Polynomial { k, d } if *k == 1.0 => write!(f, "(1+|x|)^{d}"),
            WeightSpec::Polynomial { k, d } => write!(f, "{k}(1+|x|)^{d}"),
            WeightSpec::SubExponential { c, gamma } => write!(f, "exp({c}|x|^{gamma})"),
            WeightSpec::Exponential { c } => write!(f, "exp({c}|x|)"),
            WeightSpec::Product { u, w1 } => write!(f, "{u}*{w1}"),
            WeightSpec::Operator { operator } => write!(f, "omega_T(dim {})", operator.dim()),
            WeightSpec::Table { entries, .. } => write!(f, "table({} entries)", entries.len()),
            WeightSpec::Scaled { factor, inner } => write!(f, "{factor}*{inner}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Envelopes
// ---------------------------------------------------------------------------

/// A nondecreasing function of the length,
/// `E(L) = log_const + exp_rate·L + Σ c_i L^{γ_i} + poly·ln(1+L)`,
/// used as a lower or upper bound for `ln ω`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Envelope {
    pub log_const: f64,
    pub exp_rate: f64,
    pub subexp: Vec<(f64, f64)>,
    pub poly: f64,
}

impl Envelope {
    pub fn eval(&self, l: f64) -> f64 {
        self.log_const
            + self.exp_rate * l
            + self.subexp.iter().map(|(c, g)| c * l.powf(*g)).sum::<f64>()
            + self.poly * l.ln_1p()
    }

    fn add(mut self, other: Envelope) -> Envelope {
        self.log_const += other.log_const;
        self.exp_rate += other.exp_rate;
        self.subexp.extend(other.subexp);
        self.poly += other.poly;
        self
    }

    /// Whether `∫^∞ e^{−q E(L)} dL` is finite.
    pub fn is_summable(&self, q: f64) -> bool {
        self.exp_rate > 0.0 || !self.subexp.is_empty() || q * self.poly > 1.0
    }

    /// `ln ∫_X^∞ e^{−q E(L)} dL`, bounded from above by keeping one factor
    /// inside the integral and freezing the others at `L = X`. `None` when
    /// the integral diverges.
    pub fn ln_tail_integral(&self, q: f64, x: f64) -> Option<f64> {
        let x = x.max(0.0);
        let mut factors: Vec<(f64, Option<f64>)> = Vec::new();
        if self.exp_rate > 0.0 {
            let a = q * self.exp_rate;
            factors.push((-a * x, Some(-a * x - a.ln())));
        }
        for &(c, g) in &self.subexp {
            let qc = q * c;
            let s = 1.0 / g;
            let z = qc * x.powf(g);
            factors.push((-z, Some(-g.ln() - s * qc.ln() + ln_upper_gamma_bound(s, z))));
        }
        if self.poly > 0.0 {
            let frozen = -q * self.poly * x.ln_1p();
            let qd = q * self.poly;
            let integral = if qd > 1.0 { Some((1.0 - qd) * x.ln_1p() - (qd - 1.0).ln()) } else { None };
            factors.push((frozen, integral));
        }
        let frozen_total: f64 = factors.iter().map(|f| f.0).sum();
        factors
            .iter()
            .filter_map(|(frozen, integral)| integral.map(|i| i + frozen_total - frozen))
            .min_by(f64::total_cmp)
            .map(|v| v - q * self.log_const)
    }
}

/// Upper bound on `ln Γ(s, z)`.
fn ln_upper_gamma_bound(s: f64, z: f64) -> f64 {
    let excess = (s - 1.0).max(0.0);
    if z > excess + 1.0 {
        (s - 1.0) * z.ln() - z - (1.0 - excess / z).ln()
    } else {
        ln_gamma(s) + gamma_ur(s, z).ln()
    }
}

// ---------------------------------------------------------------------------
// Evaluation tree
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Node {
    Poly { ln_k: f64, d: f64 },
    SubExp { c: f64, gamma: f64 },
    Exp { c: f64 },
    Product(Box<Node>, Box<Node>),
    Operator(OperatorModel),
    Table { map: HashMap<GroupElement, f64>, ln_outside: f64 },
    Scaled { ln_factor: f64, inner: Box<Node> },
}

impl Node {
    fn build(spec: &WeightSpec, model: &GroupModel) -> Result<Node> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        Ok(match spec {
            WeightSpec::Polynomial { k, d } => {
                if !(*k >= 1.0 && k.is_finite()) || !(*d >= 0.0 && d.is_finite()) {
                    return bad(format!("polynomial weight needs K ≥ 1 and D ≥ 0, got K={k}, D={d}"));
                }
                Node::Poly { ln_k: k.ln(), d: *d }
            }
            WeightSpec::SubExponential { c, gamma } => {
                if !(*c > 0.0 && c.is_finite()) || !(*gamma > 0.0 && *gamma <= 1.0) {
                    return bad(format!("sub-exponential weight needs C > 0 and γ in (0,1], got C={c}, γ={gamma}"));
                }
                if *gamma == 1.0 {
                    Node::Exp { c: *c }
                } else {
                    Node::SubExp { c: *c, gamma: *gamma }
                }
            }
            WeightSpec::Exponential { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return bad(format!("exponential weight needs C > 0, got {c}"));
                }
                Node::Exp { c: *c }
            }
            WeightSpec::Product { u, w1 } => {
                Node::Product(Box::new(Node::build(u, model)?), Box::new(Node::build(w1, model)?))
            }
            WeightSpec::Operator { operator } => {
                if !matches!(model.kind(), GroupKind::IntegerLattice { dim: 1 } | GroupKind::MeshLine { .. }) {
                    return Err(Error::UnsupportedModel(format!(
                        "operator weights need a real coordinate; {} has none",
                        model.name()
                    )));
                }
                Node::Operator(operator.clone())
            }
            WeightSpec::Table { entries, outside } => {
                if !(*outside >= 1.0 && outside.is_finite()) {
                    return bad(format!("table default must be ≥ 1, got {outside}"));
                }
                let mut map = HashMap::with_capacity(entries.len());
                for e in entries {
                    if e.x.len() != model.rank() {
                        return bad(format!("table point {:?} has wrong rank", e.x));
                    }
                    if !(e.value >= 1.0 && e.value.is_finite()) {
                        return bad(format!("table value {} at {:?} is below 1", e.value, e.x));
                    }
                    let x = model.reduce(GroupElement::new(&e.x));
                    model.check(x)?;
                    map.insert(x, e.value.ln());
                }
                Node::Table { map, ln_outside: outside.ln() }
            }
            WeightSpec::Scaled { factor, inner } => {
                if !(*factor >= 1.0 && factor.is_finite()) {
                    return bad(format!("scale factor must be ≥ 1, got {factor}"));
                }
                Node::Scaled { ln_factor: factor.ln(), inner: Box::new(Node::build(inner, model)?) }
            }
        })
    }

    fn is_radial(&self) -> bool {
        match self {
            Node::Poly { .. } | Node::SubExp { .. } | Node::Exp { .. } => true,
            Node::Product(a, b) => a.is_radial() && b.is_radial(),
            Node::Scaled { inner, .. } => inner.is_radial(),
            Node::Operator(_) | Node::Table { .. } => false,
        }
    }

    /// `ln ω` for radial nodes as a function of the length.
    fn ln_radial(&self, l: f64) -> f64 {
        match self {
            Node::Poly { ln_k, d } => ln_k + d * l.ln_1p(),
            Node::SubExp { c, gamma } => c * l.powf(*gamma),
            Node::Exp { c } => c * l,
            Node::Product(a, b) => a.ln_radial(l) + b.ln_radial(l),
            Node::Scaled { ln_factor, inner } => ln_factor + inner.ln_radial(l),
            Node::Operator(_) | Node::Table { .. } => unreachable!("not a radial node"),
        }
    }

    fn ln_eval(&self, x: GroupElement, length: &dyn Fn() -> Result<f64>, coord: &dyn Fn() -> Result<f64>) -> Result<f64> {
        Ok(match self {
            Node::Poly { .. } | Node::SubExp { .. } | Node::Exp { .. } => self.ln_radial(length()?),
            Node::Product(a, b) => a.ln_eval(x, length, coord)? + b.ln_eval(x, length, coord)?,
            Node::Scaled { ln_factor, inner } => ln_factor + inner.ln_eval(x, length, coord)?,
            Node::Operator(t) => t.omega(coord()?).ln(),
            Node::Table { map, ln_outside } => *map.get(&x).unwrap_or(ln_outside),
        })
    }

    fn lower_envelope(&self) -> Option<Envelope> {
        self.envelope(false)
    }

    fn upper_envelope(&self) -> Option<Envelope> {
        self.envelope(true)
    }

    fn envelope(&self, upper: bool) -> Option<Envelope> {
        Some(match self {
            Node::Poly { ln_k, d } => Envelope { log_const: *ln_k, poly: *d, ..Default::default() },
            Node::SubExp { c, gamma } => Envelope { subexp: vec![(*c, *gamma)], ..Default::default() },
            Node::Exp { c } => Envelope { exp_rate: *c, ..Default::default() },
            Node::Product(a, b) => a.envelope(upper)?.add(b.envelope(upper)?),
            Node::Scaled { ln_factor, inner } => {
                let mut e = inner.envelope(upper)?;
                e.log_const += ln_factor;
                e
            }
            Node::Operator(t) => {
                if !upper {
                    Envelope::default()
                } else if let Some(m) = t.nilpotency() {
                    Envelope { poly: (m - 1) as f64, ..Default::default() }
                } else {
                    Envelope { exp_rate: t.norm(), ..Default::default() }
                }
            }
            Node::Table { .. } => return None,
        })
    }

    fn is_exact(&self) -> bool {
        match self {
            Node::Poly { .. } | Node::SubExp { .. } | Node::Exp { .. } => true,
            Node::Product(a, b) => a.is_exact() && b.is_exact(),
            Node::Scaled { inner, .. } => inner.is_exact(),
            Node::Operator(_) | Node::Table { .. } => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Weight
// ---------------------------------------------------------------------------

/// A weight bound to a group model and a length convention.
#[derive(Clone, Debug)]
pub struct Weight {
    spec: WeightSpec,
    node: Arc<Node>,
    model: GroupModel,
    mode: LengthMode,
    sup_cache: Arc<Mutex<HashMap<usize, f64>>>,
}

impl Weight {
    pub fn new(spec: WeightSpec, model: &GroupModel, mode: LengthMode) -> Result<Self> {
        if spec.contains_operator() && mode != LengthMode::Absolute && matches!(model.kind(), GroupKind::MeshLine { .. }) {
            return Err(Error::InvalidArgument("operator weights on the mesh line use the absolute-value length".into()));
        }
        let node = Node::build(&spec, model)?;
        if mode == LengthMode::Absolute && !model.is_one_dimensional() {
            return Err(Error::UnsupportedModel(format!(
                "absolute-value length is undefined on {}",
                model.name()
            )));
        }
        Ok(Weight { spec, node: Arc::new(node), model: model.clone(), mode, sup_cache: Arc::default() })
    }

    /// Weight with the default metric length.
    pub fn on(spec: WeightSpec, model: &GroupModel) -> Result<Self> {
        let mode = match (model.kind(), spec.contains_operator()) {
            (GroupKind::MeshLine { .. }, true) => LengthMode::Absolute,
            _ => LengthMode::Metric,
        };
        Self::new(spec, model, mode)
    }

    /// `(1+|x|)^D` on `ℤ`, the most common test weight.
    pub fn polynomial_on_integers(d: f64) -> Self {
        Self::on(WeightSpec::polynomial(1.0, d), &GroupModel::integers()).expect("valid polynomial weight")
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn length_mode(&self) -> LengthMode {
        self.mode
    }

    pub fn with_model(&self, model: &GroupModel) -> Result<Self> {
        Self::new(self.spec.clone(), model, self.mode)
    }

    pub fn label(&self) -> String {
        self.spec.to_string()
    }

    /// A function of `|x|` alone, nondecreasing.
    pub fn is_radial(&self) -> bool {
        self.node.is_radial()
    }

    pub fn length(&self, x: GroupElement) -> Result<f64> {
        self.model.length(x, self.mode)
    }

    pub fn ln_eval(&self, x: GroupElement) -> Result<f64> {
        self.model.check(x)?;
        let length = || self.model.length(x, self.mode);
        let coord = || self.model.real_coordinate(x);
        self.node.ln_eval(x, &length, &coord)
    }

    pub fn eval(&self, x: GroupElement) -> Result<f64> {
        Ok(self.ln_eval(x)?.exp())
    }

    /// `ln ω` as a function of the length, for radial weights.
    pub fn ln_radial(&self, l: f64) -> Option<f64> {
        self.is_radial().then(|| self.node.ln_radial(l))
    }

    /// `ln s(n)` with `s(n) = sup_{x ∈ Uⁿ} ω(x)` and `s(0) = 1`.
    pub fn ln_sup_on_ball(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        if self.is_radial() {
            return Ok(self.node.ln_radial(self.model.ball_radius_length(n, self.mode)?));
        }
        let mut cache = self.sup_cache.lock().expect("sup cache poisoned");
        if let Some(v) = cache.get(&n) {
            return Ok(*v);
        }
        let ball = self.model.enumerate_ball(n)?;
        let vals = par::try_map_slice(Execution::default(), &ball, |x| self.ln_eval(*x))?;
        let v = vals.into_iter().fold(f64::NEG_INFINITY, f64::max);
        cache.insert(n, v);
        Ok(v)
    }

    pub fn sup_on_ball(&self, n: usize) -> Result<f64> {
        Ok(self.ln_sup_on_ball(n)?.exp())
    }

    pub fn profile(&self, n_max: usize) -> Result<WeightProfile> {
        let ln_s = (0..=n_max).map(|n| self.ln_sup_on_ball(n)).collect::<Result<Vec<_>>>()?;
        let c_exp = if n_max >= 1 { ln_s[1] } else { self.ln_sup_on_ball(1)? };
        Ok(WeightProfile { ln_s, c_exp })
    }

    /// Exhaustive symmetry and submultiplicativity scan over `Uⁿ × Uⁿ`.
    pub fn check_weight_axioms(&self, n: usize) -> Result<AxiomReport> {
        self.check_weight_axioms_with(n, Execution::default())
    }

    pub fn check_weight_axioms_with(&self, n: usize, exec: Execution) -> Result<AxiomReport> {
        let ball = self.model.enumerate_ball(n)?;
        let ln_w = par::try_map_slice(exec, &ball, |x| self.ln_eval(*x))?;
        let ln_inv = par::try_map_slice(exec, &ball, |x| self.ln_eval(self.model.inverse(*x)))?;

        let mut asym = (0.0f64, None);
        for (i, x) in ball.iter().enumerate() {
            let d = ln_inv[i] - ln_w[i];
            if d > asym.0 {
                asym = (d, Some(*x));
            }
        }
        let symmetric = asym.0 <= AXIOM_SLACK;

        let rows = par::try_map_slice(exec, &(0..ball.len()).collect::<Vec<_>>(), |&i| -> Result<(f64, usize)> {
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, y) in ball.iter().enumerate() {
                let d = self.ln_eval(self.model.op(ball[i], *y))? - ln_w[i] - ln_w[j];
                if d > best.0 {
                    best = (d, j);
                }
            }
            Ok(best)
        })?;
        let (mut worst, mut witness) = (f64::NEG_INFINITY, None);
        for (i, (d, j)) in rows.into_iter().enumerate() {
            if d > worst {
                worst = d;
                witness = Some((ball[i], ball[j]));
            }
        }
        let min_value = ln_w.iter().copied().fold(f64::INFINITY, f64::min).exp();
        Ok(AxiomReport {
            radius: n,
            symmetric,
            asymmetry_witness: if symmetric { None } else { asym.1 },
            max_asymmetry: asym.0.exp(),
            submultiplicative: worst <= AXIOM_SLACK,
            worst_ratio: worst.exp(),
            witness,
            min_value,
        })
    }

    /// `C·ω` with `C = max(C1, C2^{1/q})`.
    pub fn renormalize(&self, c1: f64, c2: f64, q: f64) -> Result<Weight> {
        if !(c1 >= 1.0 && c2 >= 1.0 && q > 1.0) {
            return Err(Error::InvalidArgument("renormalization needs C1, C2 ≥ 1 and q > 1".into()));
        }
        let factor = renormalization_factor(c1, c2, q);
        if factor == 1.0 {
            return Ok(self.clone());
        }
        Weight::new(WeightSpec::scaled(factor, self.spec.clone()), &self.model, self.mode)
    }

    pub fn lower_envelope(&self) -> Option<Envelope> {
        self.node.lower_envelope()
    }

    pub fn upper_envelope(&self) -> Option<Envelope> {
        self.node.upper_envelope()
    }

    /// Whether the envelopes coincide with `ln ω` as a function of length.
    pub fn envelope_exact(&self) -> bool {
        self.node.is_exact()
    }

    /// Closed-form Pytlik constant `C` with `ω(xy) ≤ C(ω(x)+ω(y))` for
    /// (scaled) polynomial weights: `max(1, 2^{D−1})`.
    pub fn pytlik_constant(&self) -> Option<f64> {
        fn poly_degree(n: &Node) -> Option<f64> {
            match n {
                Node::Poly { d, .. } => Some(*d),
                Node::Scaled { inner, .. } => poly_degree(inner),
                _ => None,
            }
        }
        poly_degree(&self.node).map(|d| 2f64.powf(d - 1.0).max(1.0))
    }

    /// Lower bound of `L(x)/|k|` for elements `x = k` of a one-dimensional
    /// model, converting lengths to index units.
    pub fn index_scale(&self) -> Result<f64> {
        if !self.model.is_one_dimensional() {
            return Err(Error::UnsupportedModel(format!("{} is not one-dimensional", self.model.name())));
        }
        let max_gen = self.model.generators().iter().map(|g| g.0[0].unsigned_abs()).max().unwrap_or(1).max(1) as f64;
        Ok(match (self.mode, self.model.kind()) {
            (LengthMode::Absolute, GroupKind::MeshLine { step }) => *step,
            (LengthMode::Absolute, _) => 1.0,
            _ => 1.0 / max_gen,
        })
    }
}

pub fn renormalization_factor(c1: f64, c2: f64, q: f64) -> f64 {
    c1.max(c2.powf(1.0 / q))
}

/// Relative slack for weight comparisons (log scale).
pub const AXIOM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub radius: usize,
    pub symmetric: bool,
    /// `x` maximizing `ω(x⁻¹)/ω(x)` when the weight is not symmetric.
    pub asymmetry_witness: Option<GroupElement>,
    pub max_asymmetry: f64,
    pub submultiplicative: bool,
    /// `max ω(xy)/(ω(x)ω(y))` over the scanned pairs.
    pub worst_ratio: f64,
    pub witness: Option<(GroupElement, GroupElement)>,
    pub min_value: f64,
}

/// `s(n)` for `n = 0..=n_max` and the exponential envelope constant
/// `C = ln s(1)`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightProfile {
    pub ln_s: Vec<f64>,
    pub c_exp: f64,
}

impl WeightProfile {
    pub fn s(&self, n: usize) -> f64 {
        self.ln_s[n].exp()
    }

    /// `s₂(n) = e^{Cn}`.
    pub fn s2(&self, n: usize) -> f64 {
        (self.c_exp * n as f64).exp()
    }

    pub fn root(&self, n: usize) -> f64 {
        (self.ln_s[n] / n as f64).exp()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "s", "s_root", "ln_s"])?;
        for n in 1..self.ln_s.len() {
            w.write_record([
                n.to_string(),
                format!("{:.12e}", self.s(n)),
                format!("{:.12e}", self.root(n)),
                format!("{:.12e}", self.ln_s[n]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
