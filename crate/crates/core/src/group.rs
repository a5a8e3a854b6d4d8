//! Concrete groups of polynomial growth with word metric and ball enumeration.
//!
//! Four model families are provided: integer lattices `ℤ^d`, the discrete
//! Heisenberg group, cyclic groups `ℤ/N`, and a mesh model `hℤ` of the real
//! line carrying Haar mass `h` per point. Elements are integer coordinate
//! tuples in every case.
//!
//! Word length follows the convention `|e| = 1`; [`LengthMode::Metric`] gives
//! the Cayley-graph distance (`0` at the identity), which is what the weight
//! families evaluate.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fit_line;

pub const MAX_RANK: usize = 4;

/// A group element as an integer coordinate tuple. Unused trailing
/// coordinates are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub [i64; MAX_RANK]);

impl GroupElement {
    pub fn new(coords: &[i64]) -> Self {
        assert!(coords.len() <= MAX_RANK, "at most {MAX_RANK} coordinates");
        let mut c = [0; MAX_RANK];
        c[..coords.len()].copy_from_slice(coords);
        GroupElement(c)
    }

    pub fn scalar(k: i64) -> Self {
        GroupElement([k, 0, 0, 0])
    }

    pub fn coords(&self, rank: usize) -> &[i64] {
        &self.0[..rank]
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).unwrap_or(0);
        write!(f, "(")?;
        for (i, c) in self.0[..=last].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum GroupKind {
    IntegerLattice { dim: usize },
    DiscreteHeisenberg,
    CyclicGroup { order: i64 },
    MeshLine { step: f64 },
}

impl GroupKind {
    pub fn rank(&self) -> usize {
        match self {
            GroupKind::IntegerLattice { dim } => *dim,
            GroupKind::DiscreteHeisenberg => 3,
            GroupKind::CyclicGroup { .. } | GroupKind::MeshLine { .. } => 1,
        }
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self, GroupKind::DiscreteHeisenberg)
    }
}

/// How `|x|` is measured when a weight or ball radius needs a length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthMode {
    /// `inf { n ≥ 1 : x ∈ Uⁿ }`, so the identity has length 1.
    Word,
    /// Cayley-graph distance to the identity (identity has length 0).
    #[default]
    Metric,
    /// Absolute value of the real coordinate on one-dimensional models
    /// (`h·|k|` on the mesh line).
    Absolute,
}

/// JSON form `{kind, params, generator_list}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    #[serde(flatten)]
    pub kind: GroupKind,
    pub generator_list: Vec<Vec<i64>>,
}

#[derive(Debug, Default)]
struct BfsCache {
    dist: HashMap<GroupElement, u32>,
    /// `spheres[n]` holds the sorted elements at distance exactly `n`.
    spheres: Vec<Vec<GroupElement>>,
    exhausted: bool,
}

/// A group model with a finite symmetric generating set containing the identity.
///
/// Cloning shares the breadth-first-search cache, which only ever grows.
#[derive(Clone, Debug)]
pub struct GroupModel {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    standard: bool,
    radius_cap: usize,
    cache: Arc<Mutex<BfsCache>>,
}

impl PartialEq for GroupModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.generators == other.generators
    }
}

impl GroupModel {
    pub fn integer_lattice(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_RANK {
            return Err(Error::InvalidArgument(format!("lattice dimension must be in 1..={MAX_RANK}")));
        }
        let kind = GroupKind::IntegerLattice { dim };
        let gens = standard_generators(&kind);
        Ok(Self::build(kind, gens, true))
    }

    pub fn integers() -> Self {
        Self::integer_lattice(1).expect("rank 1 is valid")
    }

    pub fn heisenberg() -> Self {
        let kind = GroupKind::DiscreteHeisenberg;
        let gens = standard_generators(&kind);
        Self::build(kind, gens, true)
    }

    pub fn cyclic(order: i64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("cyclic order must be positive".into()));
        }
        let kind = GroupKind::CyclicGroup { order };
        let gens = standard_generators(&kind);
        Ok(Self::build(kind, gens, true))
    }

    pub fn mesh_line(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument("mesh step must be positive and finite".into()));
        }
        let kind = GroupKind::MeshLine { step };
        let gens = standard_generators(&kind);
        Ok(Self::build(kind, gens, true))
    }

    fn build(kind: GroupKind, mut generators: Vec<GroupElement>, standard: bool) -> Self {
        generators.sort_unstable();
        generators.dedup();
        let radius_cap = match &kind {
            GroupKind::IntegerLattice { dim: 1 } | GroupKind::MeshLine { .. } => 1 << 20,
            GroupKind::IntegerLattice { dim: 2 } => 2048,
            GroupKind::IntegerLattice { .. } => 128,
            GroupKind::CyclicGroup { .. } => 1 << 20,
            GroupKind::DiscreteHeisenberg => 40,
        };
        GroupModel { kind, generators, standard, radius_cap, cache: Arc::default() }
    }

    /// Replace the generating set. The new set must be symmetric and contain
    /// the identity.
    pub fn with_generators(&self, gens: Vec<GroupElement>) -> Result<Self> {
        let gens: Vec<GroupElement> = gens.into_iter().map(|g| self.reduce(g)).collect();
        if !gens.contains(&self.identity()) {
            return Err(Error::InvalidArgument("generating set must contain the identity".into()));
        }
        for g in &gens {
            if !gens.contains(&self.inverse(*g)) {
                return Err(Error::InvalidArgument(format!("generating set is not symmetric: {g} lacks an inverse")));
            }
        }
        let mut sorted = gens.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let standard = sorted == {
            let mut s = standard_generators(&self.kind);
            s.sort_unstable();
            s
        };
        let mut m = Self::build(self.kind.clone(), gens, standard);
        m.radius_cap = self.radius_cap;
        Ok(m)
    }

    /// The generating set `U²` (all products of two generators).
    pub fn squared_generators(&self) -> Result<Self> {
        let mut sq = Vec::with_capacity(self.generators.len().pow(2));
        for a in &self.generators {
            for b in &self.generators {
                sq.push(self.op(*a, *b));
            }
        }
        let mut m = self.with_generators(sq)?;
        m.radius_cap = (self.radius_cap / 2).max(1);
        Ok(m)
    }

    pub fn with_radius_cap(mut self, cap: usize) -> Self {
        self.radius_cap = cap;
        self
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn rank(&self) -> usize {
        self.kind.rank()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn radius_cap(&self) -> usize {
        self.radius_cap
    }

    pub fn haar_mass(&self) -> f64 {
        match self.kind {
            GroupKind::MeshLine { step } => step,
            _ => 1.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::CyclicGroup { .. })
    }

    /// Rank-one abelian models (`ℤ`, `ℤ/N`, mesh line).
    pub fn is_one_dimensional(&self) -> bool {
        self.kind.rank() == 1
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::IntegerLattice { dim: 1 } => "Z".into(),
            GroupKind::IntegerLattice { dim } => format!("Z^{dim}"),
            GroupKind::DiscreteHeisenberg => "Heisenberg".into(),
            GroupKind::CyclicGroup { order } => format!("Z/{order}"),
            GroupKind::MeshLine { step } => format!("mesh({step})"),
        }
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor {
            kind: self.kind.clone(),
            generator_list: self.generators.iter().map(|g| g.coords(self.rank()).to_vec()).collect(),
        }
    }

    pub fn from_descriptor(d: &GroupDescriptor) -> Result<Self> {
        let base = match &d.kind {
            GroupKind::IntegerLattice { dim } => Self::integer_lattice(*dim)?,
            GroupKind::DiscreteHeisenberg => Self::heisenberg(),
            GroupKind::CyclicGroup { order } => Self::cyclic(*order)?,
            GroupKind::MeshLine { step } => Self::mesh_line(*step)?,
        };
        if d.generator_list.is_empty() {
            return Ok(base);
        }
        let rank = base.rank();
        let gens = d
            .generator_list
            .iter()
            .map(|c| {
                if c.len() != rank {
                    Err(Error::InvalidArgument(format!("generator {c:?} has wrong rank (expected {rank})")))
                } else {
                    Ok(GroupElement::new(c))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        base.with_generators(gens)
    }

    // -----------------------------------------------------------------------
    // Group law
    // -----------------------------------------------------------------------

    pub fn identity(&self) -> GroupElement {
        GroupElement::default()
    }

    pub fn contains(&self, x: GroupElement) -> bool {
        let rank = self.rank();
        if x.0[rank..].iter().any(|&c| c != 0) {
            return false;
        }
        match self.kind {
            GroupKind::CyclicGroup { order } => (0..order).contains(&x.0[0]),
            _ => true,
        }
    }

    pub fn check(&self, x: GroupElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::ModelMismatch(format!("{x} is not an element of {}", self.name())))
        }
    }

    /// Canonical representative (reduction mod `N` on cyclic groups).
    pub fn reduce(&self, x: GroupElement) -> GroupElement {
        match self.kind {
            GroupKind::CyclicGroup { order } => GroupElement::scalar(x.0[0].rem_euclid(order)),
            _ => x,
        }
    }

    /// Group law without membership checks; callers guarantee both operands
    /// belong to the model.
    #[inline]
    pub fn op(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        let (a, b) = (a.0, b.0);
        match self.kind {
            GroupKind::IntegerLattice { .. } | GroupKind::MeshLine { .. } => {
                GroupElement([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
            }
            GroupKind::DiscreteHeisenberg => {
                GroupElement([a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1], 0])
            }
            GroupKind::CyclicGroup { order } => GroupElement::scalar((a[0] + b[0]).rem_euclid(order)),
        }
    }

    #[inline]
    pub fn inverse(&self, a: GroupElement) -> GroupElement {
        let a = a.0;
        match self.kind {
            GroupKind::IntegerLattice { .. } | GroupKind::MeshLine { .. } => {
                GroupElement([-a[0], -a[1], -a[2], -a[3]])
            }
            GroupKind::DiscreteHeisenberg => GroupElement([-a[0], -a[1], -a[2] + a[0] * a[1], 0]),
            GroupKind::CyclicGroup { order } => GroupElement::scalar((-a[0]).rem_euclid(order)),
        }
    }

    /// Checked group law.
    pub fn group_law(&self, a: GroupElement, b: GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.op(a, b))
    }

    /// `xⁿ` for any integer `n` by binary exponentiation.
    pub fn power(&self, x: GroupElement, n: i64) -> GroupElement {
        let mut base = if n < 0 { self.inverse(x) } else { x };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.op(acc, base);
            }
            base = self.op(base, base);
            e >>= 1;
        }
        acc
    }

    /// Real coordinate `h·k` on the mesh line, `k` on `ℤ`.
    pub fn real_coordinate(&self, x: GroupElement) -> Result<f64> {
        match self.kind {
            GroupKind::MeshLine { step } => Ok(step * x.0[0] as f64),
            GroupKind::IntegerLattice { dim: 1 } => Ok(x.0[0] as f64),
            _ => Err(Error::UnsupportedModel(format!("{} has no real coordinate", self.name()))),
        }
    }

    // -----------------------------------------------------------------------
    // Word metric
    // -----------------------------------------------------------------------

    /// Cayley-graph distance from the identity.
    pub fn distance(&self, x: GroupElement) -> Result<usize> {
        self.check(x)?;
        if self.standard {
            match self.kind {
                GroupKind::IntegerLattice { .. } | GroupKind::MeshLine { .. } => {
                    return Ok(x.0.iter().map(|c| c.unsigned_abs() as usize).sum());
                }
                GroupKind::CyclicGroup { order } => {
                    let k = x.0[0];
                    return Ok(k.min(order - k) as usize);
                }
                GroupKind::DiscreteHeisenberg => {}
            }
        }
        self.bfs_distance(x)
    }

    /// `|x|_U = min { n ≥ 1 : x ∈ Uⁿ }`; the identity has word length 1.
    pub fn word_length(&self, x: GroupElement) -> Result<usize> {
        Ok(self.distance(x)?.max(1))
    }

    pub fn length(&self, x: GroupElement, mode: LengthMode) -> Result<f64> {
        match mode {
            LengthMode::Word => Ok(self.word_length(x)? as f64),
            LengthMode::Metric => Ok(self.distance(x)? as f64),
            LengthMode::Absolute => {
                self.check(x)?;
                match self.kind {
                    GroupKind::MeshLine { step } => Ok(step * x.0[0].unsigned_abs() as f64),
                    GroupKind::IntegerLattice { dim: 1 } => Ok(x.0[0].unsigned_abs() as f64),
                    GroupKind::CyclicGroup { order } => Ok(x.0[0].min(order - x.0[0]) as f64),
                    _ => Err(Error::UnsupportedModel(format!(
                        "absolute-value length is only defined on one-dimensional models, not {}",
                        self.name()
                    ))),
                }
            }
        }
    }

    /// Largest length attained on the ball `Uⁿ` (`n ≥ 1`); `0` for `n = 0`
    /// except in word mode.
    pub fn ball_radius_length(&self, n: usize, mode: LengthMode) -> Result<f64> {
        let metric = match self.diameter()? {
            Some(d) => n.min(d),
            None => n,
        };
        Ok(match mode {
            LengthMode::Word => metric.max(1) as f64,
            LengthMode::Metric => metric as f64,
            LengthMode::Absolute => {
                let unit = self
                    .generators
                    .iter()
                    .map(|g| self.length(*g, LengthMode::Absolute))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                match self.kind {
                    GroupKind::CyclicGroup { order } => (n as f64 * unit).min((order / 2) as f64),
                    _ => n as f64 * unit,
                }
            }
        })
    }

    /// Graph diameter for finite models.
    pub fn diameter(&self) -> Result<Option<usize>> {
        match self.kind {
            GroupKind::CyclicGroup { order } => {
                if self.standard {
                    Ok(Some((order / 2) as usize))
                } else {
                    let mut cache = self.cache.lock().expect("bfs cache poisoned");
                    self.extend_bfs(&mut cache, order as usize)?;
                    Ok(Some(cache.spheres.len() - 1))
                }
            }
            _ => Ok(None),
        }
    }

    fn bfs_distance(&self, x: GroupElement) -> Result<usize> {
        let mut cache = self.cache.lock().expect("bfs cache poisoned");
        loop {
            if let Some(&d) = cache.dist.get(&x) {
                return Ok(d as usize);
            }
            if cache.exhausted {
                return Err(Error::ModelMismatch(format!("{x} is unreachable from the generators")));
            }
            let next = cache.spheres.len();
            if next > self.radius_cap {
                return Err(Error::RadiusCapExceeded { requested: next, cap: self.radius_cap });
            }
            self.extend_bfs(&mut cache, next)?;
        }
    }

    fn extend_bfs(&self, cache: &mut BfsCache, radius: usize) -> Result<()> {
        if cache.spheres.is_empty() {
            let e = self.identity();
            cache.dist.insert(e, 0);
            cache.spheres.push(vec![e]);
        }
        while cache.spheres.len() <= radius && !cache.exhausted {
            let n = cache.spheres.len();
            let mut next = Vec::new();
            for s in &cache.spheres[n - 1] {
                for g in &self.generators {
                    let y = self.op(*s, *g);
                    if let std::collections::hash_map::Entry::Vacant(e) = cache.dist.entry(y) {
                        e.insert(n as u32);
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                cache.exhausted = true;
            } else {
                next.sort_unstable();
                cache.spheres.push(next);
            }
        }
        Ok(())
    }

    // -----------------------------------------------------------------------
    // Balls
    // -----------------------------------------------------------------------

    fn check_radius(&self, n: usize) -> Result<()> {
        if n > self.radius_cap {
            Err(Error::RadiusCapExceeded { requested: n, cap: self.radius_cap })
        } else {
            Ok(())
        }
    }

    /// The ball `Uⁿ = { x : |x|_U ≤ n }` as a sorted list.
    pub fn enumerate_ball(&self, n: usize) -> Result<Vec<GroupElement>> {
        if n == 0 {
            return Err(Error::InvalidArgument("ball radius must be positive".into()));
        }
        self.ball_upto(n)
    }

    /// Elements at graph distance at most `n` (`n = 0` gives `{e}`).
    pub fn ball_upto(&self, n: usize) -> Result<Vec<GroupElement>> {
        self.check_radius(n)?;
        if self.standard {
            match self.kind {
                GroupKind::IntegerLattice { dim } => return Ok(lattice_ball(dim, n as i64)),
                GroupKind::MeshLine { .. } => return Ok(lattice_ball(1, n as i64)),
                GroupKind::CyclicGroup { order } => {
                    let r = (n as i64).min(order / 2);
                    let mut v: Vec<GroupElement> =
                        (-r..=r).map(|k| GroupElement::scalar(k.rem_euclid(order))).collect();
                    v.sort_unstable();
                    v.dedup();
                    return Ok(v);
                }
                GroupKind::DiscreteHeisenberg => {}
            }
        }
        let mut cache = self.cache.lock().expect("bfs cache poisoned");
        self.extend_bfs(&mut cache, n)?;
        let mut v: Vec<GroupElement> = cache.spheres.iter().take(n + 1).flatten().copied().collect();
        v.sort_unstable();
        Ok(v)
    }

    /// The sphere `Uⁿ \ Uⁿ⁻¹` (for `n ≥ 1`; the identity sits in `U¹`).
    pub fn sphere(&self, n: usize) -> Result<Vec<GroupElement>> {
        let outer = self.enumerate_ball(n)?;
        if n == 1 {
            return Ok(outer);
        }
        let inner = self.enumerate_ball(n - 1)?;
        Ok(outer.into_iter().filter(|x| inner.binary_search(x).is_err()).collect())
    }

    pub fn ball_counts(&self, n_max: usize) -> Result<Vec<usize>> {
        self.check_radius(n_max)?;
        if !self.standard || matches!(self.kind, GroupKind::DiscreteHeisenberg) {
            let mut cache = self.cache.lock().expect("bfs cache poisoned");
            self.extend_bfs(&mut cache, n_max)?;
            let mut total = 0;
            return Ok((0..=n_max)
                .map(|n| {
                    total += cache.spheres.get(n).map_or(0, Vec::len);
                    total
                })
                .skip(1)
                .collect());
        }
        (1..=n_max).map(|n| Ok(self.enumerate_ball(n)?.len())).collect()
    }

    /// Least-squares fit of `log|Uⁿ|` against `log n` over `n ∈ [n_max/2, n_max]`.
    pub fn growth_fit(&self, n_max: usize) -> Result<GrowthFit> {
        if n_max < 8 {
            return Err(Error::InvalidArgument("growth fit needs n_max ≥ 8".into()));
        }
        let counts = self.ball_counts(n_max)?;
        let lo = n_max / 2;
        let xs: Vec<f64> = (lo..=n_max).map(|n| (n as f64).ln()).collect();
        let ys: Vec<f64> = (lo..=n_max).map(|n| (counts[n - 1] as f64).ln()).collect();
        let fit = fit_line(&xs, &ys).ok_or_else(|| Error::InvalidArgument("degenerate growth fit".into()))?;
        let exponent = fit.slope;
        let constant = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / ((i + 1) as f64).powf(exponent))
            .fold(0.0, f64::max);
        Ok(GrowthFit { exponent, constant, counts })
    }

    /// CSV dump of a ball: one column per coordinate, then the word length.
    pub fn write_ball_csv<W: Write>(&self, n: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.rank()).map(|i| format!("x{i}")).collect();
        header.push("word_length".into());
        w.write_record(&header)?;
        for x in self.enumerate_ball(n)? {
            let mut rec: Vec<String> = x.coords(self.rank()).iter().map(|c| c.to_string()).collect();
            rec.push(self.word_length(x)?.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fitted polynomial growth `|Uⁿ| ≤ C nᑫ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub exponent: f64,
    /// Smallest `C` with `|Uⁿ| ≤ C n^exponent` on every computed `n`.
    pub constant: f64,
    /// `counts[n-1] = |Uⁿ|`.
    pub counts: Vec<usize>,
}

fn standard_generators(kind: &GroupKind) -> Vec<GroupElement> {
    let mut gens = vec![GroupElement::default()];
    match kind {
        GroupKind::IntegerLattice { dim } => {
            for i in 0..*dim {
                for s in [-1, 1] {
                    let mut c = [0; MAX_RANK];
                    c[i] = s;
                    gens.push(GroupElement(c));
                }
            }
        }
        GroupKind::DiscreteHeisenberg => {
            for c in [[1, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0]] {
                gens.push(GroupElement(c));
            }
        }
        GroupKind::CyclicGroup { order } => {
            if *order > 1 {
                gens.push(GroupElement::scalar(1));
                gens.push(GroupElement::scalar(order - 1));
            }
        }
        GroupKind::MeshLine { .. } => {
            gens.push(GroupElement::scalar(1));
            gens.push(GroupElement::scalar(-1));
        }
    }
    gens.sort_unstable();
    gens.dedup();
    gens
}

fn lattice_ball(dim: usize, r: i64) -> Vec<GroupElement> {
    fn rec(dim: usize, i: usize, budget: i64, cur: &mut [i64; MAX_RANK], out: &mut Vec<GroupElement>) {
        if i == dim {
            out.push(GroupElement(*cur));
            return;
        }
        for c in -budget..=budget {
            cur[i] = c;
            rec(dim, i + 1, budget - c.abs(), cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(dim, 0, r, &mut [0; MAX_RANK], &mut out);
    out.sort_unstable();
    out
}
