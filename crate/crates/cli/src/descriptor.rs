//! Text descriptors for groups, weights and finitely supported functions.
//!
//! Groups: `Z`, `Z^d` (or `Z2`), `H` / `heisenberg`, `C16` / `cyclic:16` /
//! `Z/16`, `mesh:0.1`.
//!
//! Weights: factors joined by `*`, each `name:key=value,...`:
//! `poly:K=1,D=2`, `subexp:C=1,γ=0.5`, `exp:C=1`, `jordan:n=3`. A bare number
//! factor scales the weight, so `2*poly:D=1` is `2(1+|x|)`.
//!
//! Functions: comma-separated `coords=value` entries with coordinates joined
//! by `:`, e.g. `1=1,-1=1` on `ℤ` or `1:0=0.5,0:-1=0.5` on `ℤ²`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use weighted_lp::algebra::GroupFunction;
use weighted_lp::operator::OperatorModel;
use weighted_lp::weight::WeightSpec;
use weighted_lp::{GroupElement, GroupModel};

use crate::error::CliError;

fn bad(what: &str, text: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot parse {what} '{text}': {why}"))
}

// ---------------------------------------------------------------------------
// Groups
// ---------------------------------------------------------------------------

pub fn parse_group(text: &str) -> Result<GroupModel, CliError> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let err = |why: &str| bad("group", text, why);
    let model = if lower == "z" {
        GroupModel::integers()
    } else if lower == "h" || lower == "heisenberg" {
        GroupModel::heisenberg()
    } else if let Some(d) = lower.strip_prefix("z^").or_else(|| lower.strip_prefix("z").filter(|r| r.chars().all(|c| c.is_ascii_digit()))) {
        let dim: usize = d.parse().map_err(|_| err("expected a dimension"))?;
        GroupModel::integer_lattice(dim)?
    } else if let Some(n) = lower.strip_prefix("cyclic:").or_else(|| lower.strip_prefix("z/")).or_else(|| lower.strip_prefix('c')) {
        let order: i64 = n.parse().map_err(|_| err("expected an order"))?;
        GroupModel::cyclic(order)?
    } else if let Some(s) = lower.strip_prefix("mesh:") {
        let step: f64 = s.parse().map_err(|_| err("expected a step"))?;
        GroupModel::mesh_line(step)?
    } else {
        return Err(err("unknown group"));
    };
    Ok(model)
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

fn params(text: &str, body: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| bad("weight", text, format!("'{item}' is not key=value")))?;
        let key = match k.trim().to_lowercase().as_str() {
            "γ" | "g" | "gamma" => "gamma".to_string(),
            other => other.to_string(),
        };
        let value: f64 = v.trim().parse().map_err(|_| bad("weight", text, format!("'{v}' is not a number")))?;
        if out.insert(key.clone(), value).is_some() {
            return Err(bad("weight", text, format!("duplicate key {key}")));
        }
    }
    Ok(out)
}

fn take(map: &mut BTreeMap<String, f64>, key: &str, default: Option<f64>, text: &str) -> Result<f64, CliError> {
    map.remove(key).or(default).ok_or_else(|| bad("weight", text, format!("missing {key}")))
}

fn parse_factor(text: &str, factor: &str) -> Result<Result<WeightSpec, f64>, CliError> {
    let factor = factor.trim();
    if let Ok(c) = factor.parse::<f64>() {
        return Ok(Err(c));
    }
    let (name, body) = factor.split_once(':').unwrap_or((factor, ""));
    let mut p = params(text, body)?;
    let spec = match name.trim().to_lowercase().as_str() {
        "poly" | "polynomial" => WeightSpec::polynomial(take(&mut p, "k", Some(1.0), text)?, take(&mut p, "d", None, text)?),
        "subexp" | "subexponential" => WeightSpec::subexponential(take(&mut p, "c", Some(1.0), text)?, take(&mut p, "gamma", None, text)?),
        "exp" | "exponential" => WeightSpec::exponential(take(&mut p, "c", Some(1.0), text)?),
        "jordan" => {
            let n = take(&mut p, "n", None, text)?;
            if n.fract() != 0.0 || n < 1.0 {
                return Err(bad("weight", text, "jordan size must be a positive integer"));
            }
            WeightSpec::Operator { operator: OperatorModel::jordan_nilpotent(n as usize)? }
        }
        other => return Err(bad("weight", text, format!("unknown weight family '{other}'"))),
    };
    if let Some(k) = p.keys().next() {
        return Err(bad("weight", text, format!("unexpected key {k}")));
    }
    Ok(Ok(spec))
}

pub fn parse_weight(text: &str) -> Result<WeightSpec, CliError> {
    let mut scale = 1.0;
    let mut factors = Vec::new();
    for f in text.split('*') {
        match parse_factor(text, f)? {
            Ok(spec) => factors.push(spec),
            Err(c) => scale *= c,
        }
    }
    let mut spec = factors.into_iter().rev().reduce(|acc, f| WeightSpec::product(f, acc)).ok_or_else(|| bad("weight", text, "no weight factor"))?;
    if scale != 1.0 {
        spec = WeightSpec::scaled(scale, spec);
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Functions
// ---------------------------------------------------------------------------

pub fn parse_function(model: &GroupModel, text: &str) -> Result<GroupFunction, CliError> {
    let rank = model.rank();
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (coords, value) = item.split_once('=').ok_or_else(|| bad("function", text, format!("'{item}' is not coords=value")))?;
        let coords: Vec<i64> = coords.split(':').map(|c| c.trim().parse::<i64>()).collect::<Result<_, _>>().map_err(|e| bad("function", text, e))?;
        if coords.len() != rank {
            return Err(bad("function", text, format!("'{item}' needs {rank} coordinate(s)")));
        }
        let value: f64 = value.trim().parse().map_err(|e| bad("function", text, e))?;
        pairs.push((model.reduce(GroupElement::new(&coords)), Complex64::new(value, 0.0)));
    }
    Ok(GroupFunction::from_pairs(model, pairs)?)
}

/// Comma-separated list of numbers.
pub fn parse_list(what: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| s.parse::<f64>().map_err(|e| bad(what, text, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use weighted_lp::GroupKind;

    #[test]
    fn groups() {
        assert_eq!(parse_group("Z").unwrap().kind(), &GroupKind::IntegerLattice { dim: 1 });
        assert_eq!(parse_group("Z^3").unwrap().kind(), &GroupKind::IntegerLattice { dim: 3 });
        assert_eq!(parse_group("z2").unwrap().kind(), &GroupKind::IntegerLattice { dim: 2 });
        assert_eq!(parse_group("H").unwrap().kind(), &GroupKind::DiscreteHeisenberg);
        assert_eq!(parse_group("C16").unwrap().kind(), &GroupKind::CyclicGroup { order: 16 });
        assert_eq!(parse_group("cyclic:7").unwrap().kind(), &GroupKind::CyclicGroup { order: 7 });
        assert_eq!(parse_group("Z/5").unwrap().kind(), &GroupKind::CyclicGroup { order: 5 });
        assert_eq!(parse_group("mesh:0.1").unwrap().kind(), &GroupKind::MeshLine { step: 0.1 });
        for bad in ["", "Q", "Z^x", "C", "mesh:", "mesh:-1"] {
            assert!(parse_group(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn weights() {
        assert_eq!(parse_weight("poly:K=1,D=2").unwrap(), WeightSpec::polynomial(1.0, 2.0));
        assert_eq!(parse_weight("poly:D=2").unwrap(), WeightSpec::polynomial(1.0, 2.0));
        assert_eq!(parse_weight("subexp:γ=0.5").unwrap(), WeightSpec::subexponential(1.0, 0.5));
        assert_eq!(parse_weight("subexp:C=2, gamma=0.3").unwrap(), WeightSpec::subexponential(2.0, 0.3));
        assert_eq!(parse_weight("exp:C=1").unwrap(), WeightSpec::exponential(1.0));
        assert_eq!(
            parse_weight("exp:C=1*poly:D=2").unwrap(),
            WeightSpec::product(WeightSpec::exponential(1.0), WeightSpec::polynomial(1.0, 2.0))
        );
        assert_eq!(parse_weight("2*exp").unwrap(), WeightSpec::scaled(2.0, WeightSpec::exponential(1.0)));
        assert!(matches!(parse_weight("jordan:n=3").unwrap(), WeightSpec::Operator { .. }));
        for bad in ["", "poly", "poly:D", "poly:D=x", "exp:C=1,C=2", "exp:Z=1", "gauss:C=1", "3", "jordan:n=1.5"] {
            assert!(parse_weight(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn functions() {
        let z = GroupModel::integers();
        let f = parse_function(&z, "1=1, -1=1").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.get(GroupElement::scalar(-1)).re, 1.0);
        let c = GroupModel::cyclic(16).unwrap();
        assert_eq!(parse_function(&c, "-1=0.5").unwrap().get(GroupElement::scalar(15)).re, 0.5);
        let z2 = GroupModel::integer_lattice(2).unwrap();
        assert_eq!(parse_function(&z2, "1:0=0.5,0:-1=0.25").unwrap().len(), 2);
        assert!(parse_function(&z2, "1=0.5").is_err());
        assert!(parse_function(&z, "1").is_err());
    }
}
