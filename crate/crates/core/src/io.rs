//! JSON encodings. Rationals are written as `"num/den"` strings (bare integers
//! for integral values) and read from either strings or JSON integers.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cglmp::{Condition1Report, TightnessReport, WitnessBatch};
use crate::correlators::{corr_index, CorrVector};
use crate::error::{Error, Result};
use crate::facets::{Equation, FacetLabel, HRep};
use crate::membership::Verdict;
use crate::rational::Rational;
use crate::scenario::{Behavior, Inequality, Space};

const BLOCKS: [&str; 4] = ["a1b1", "a1b2", "a2b1", "a2b2"];

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn rational(v: &Value) -> Result<Rational> {
    serde_json::from_value(v.clone()).map_err(|e| parse_err(format!("bad rational {v}: {e}")))
}

fn rationals(v: &Value) -> Result<Vec<Rational>> {
    v.as_array().ok_or_else(|| parse_err(format!("expected an array, got {v}")))?.iter().map(rational).collect()
}

fn outcome_count(v: &Value) -> Result<usize> {
    let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| parse_err("missing integer field \"d\""))?;
    if d < 2 {
        return Err(Error::InvalidOutcomeCount(d as usize));
    }
    Ok(d as usize)
}

fn to_value<T: Serialize + ?Sized>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn behavior_to_json(p: &Behavior) -> Value {
    let d = p.d();
    let mut blocks = Map::new();
    for (blk, name) in BLOCKS.iter().enumerate() {
        let rows: Vec<Vec<&Rational>> = (0..d).map(|k| (0..d).map(|s| p.get(blk / 2, blk % 2, k, s)).collect()).collect();
        blocks.insert(name.to_string(), to_value(&rows));
    }
    json!({ "d": d, "P": blocks })
}

pub fn behavior_from_json(v: &Value) -> Result<Behavior> {
    let d = outcome_count(v)?;
    let blocks = v.get("P").ok_or_else(|| parse_err("missing field \"P\""))?;
    let mut p = Behavior::zero(d);
    for (blk, name) in BLOCKS.iter().enumerate() {
        let rows = blocks
            .get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err(format!("missing block {name}")))?;
        if rows.len() != d {
            return Err(Error::DimensionMismatch(format!("block {name} needs {d} rows")));
        }
        for (k, row) in rows.iter().enumerate() {
            let row = rationals(row)?;
            if row.len() != d {
                return Err(Error::DimensionMismatch(format!("block {name} row {k} needs {d} entries")));
            }
            for (s, x) in row.into_iter().enumerate() {
                p.set(blk / 2, blk % 2, k, s, x);
            }
        }
    }
    Ok(p)
}

pub fn corr_to_json(c: &CorrVector) -> Value {
    let d = c.d();
    let mut blocks = Map::new();
    for (blk, name) in BLOCKS.iter().enumerate() {
        blocks.insert(name.to_string(), to_value(&c.coords()[blk * d..(blk + 1) * d]));
    }
    json!({ "d": d, "C": blocks })
}

pub fn corr_from_json(v: &Value) -> Result<CorrVector> {
    let d = outcome_count(v)?;
    let blocks = v.get("C").ok_or_else(|| parse_err("missing field \"C\""))?;
    let mut coords = vec![Rational::zero(); 4 * d];
    for (blk, name) in BLOCKS.iter().enumerate() {
        let entries = rationals(blocks.get(name).ok_or_else(|| parse_err(format!("missing block {name}")))?)?;
        if entries.len() != d {
            return Err(Error::DimensionMismatch(format!("block {name} needs {d} entries")));
        }
        for (n, x) in entries.into_iter().enumerate() {
            coords[corr_index(d, blk / 2, blk % 2, n)] = x;
        }
    }
    CorrVector::new(d, coords)
}

/// A point to test for locality.
#[derive(Clone, Debug)]
pub enum Point {
    Behavior(Behavior),
    Correlator(CorrVector),
}

pub fn point_from_json(v: &Value) -> Result<Point> {
    if v.get("P").is_some() {
        Ok(Point::Behavior(behavior_from_json(v)?))
    } else if v.get("C").is_some() {
        Ok(Point::Correlator(corr_from_json(v)?))
    } else {
        Err(parse_err("expected a behavior (\"P\") or correlator vector (\"C\")"))
    }
}

fn space_fields(space: Space, obj: &mut Map<String, Value>) {
    obj.insert("space".into(), json!(space.name()));
    match space {
        Space::Euclidean(n) => obj.insert("n".into(), json!(n)),
        other => obj.insert("d".into(), json!(other.outcomes())),
    };
}

fn space_from_json(v: &Value) -> Result<Space> {
    match v.get("space").and_then(Value::as_str) {
        Some("behavior") => Ok(Space::Behavior(outcome_count(v)?)),
        Some("correlator") | Some("corr") => Ok(Space::Correlator(outcome_count(v)?)),
        Some("euclidean") => {
            let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| parse_err("missing integer field \"n\""))?;
            Ok(Space::Euclidean(n as usize))
        }
        other => Err(parse_err(format!("unknown space {other:?}"))),
    }
}

pub fn inequality_to_json(ineq: &Inequality) -> Value {
    let mut obj = Map::new();
    space_fields(ineq.space, &mut obj);
    obj.insert("coeffs".into(), to_value(&ineq.coeffs));
    obj.insert("bound".into(), to_value(&ineq.bound));
    Value::Object(obj)
}

pub fn inequality_from_json(v: &Value) -> Result<Inequality> {
    let space = space_from_json(v)?;
    let coeffs = rationals(v.get("coeffs").ok_or_else(|| parse_err("missing field \"coeffs\""))?)?;
    let bound = rational(v.get("bound").ok_or_else(|| parse_err("missing field \"bound\""))?)?;
    Inequality::new(space, coeffs, bound)
}

pub fn verdict_to_json(v: &Verdict) -> Value {
    match v {
        Verdict::Local { weights } => {
            let w: Map<String, Value> = weights.iter().map(|(l, x)| (l.to_string(), to_value(x))).collect();
            json!({ "verdict": "local", "weights": w, "certificate": null, "violation": null })
        }
        Verdict::Nonlocal { certificate, value, violation, class } => json!({
            "verdict": "nonlocal",
            "weights": null,
            "certificate": inequality_to_json(certificate),
            "value": value,
            "violation": violation,
            "class": class,
        }),
    }
}

pub fn facet_list_to_json(h: &HRep, labels: &[FacetLabel]) -> Value {
    let mut obj = Map::new();
    space_fields(h.space, &mut obj);
    obj.insert("equations".into(), to_value(&h.equations));
    let facets: Vec<Value> = h
        .facets
        .iter()
        .zip(labels)
        .map(|(f, l)| json!({ "coeffs": f.coeffs, "bound": f.bound, "trivial": l.trivial, "class": l.class }))
        .collect();
    obj.insert("facets".into(), Value::Array(facets));
    obj.insert("complete".into(), json!(h.complete));
    Value::Object(obj)
}

/// Reads a facet list; labels are ignored and recomputed by callers.
pub fn facet_list_from_json(v: &Value) -> Result<HRep> {
    let space = space_from_json(v)?;
    let facets = v
        .get("facets")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing array \"facets\""))?
        .iter()
        .map(|f| {
            let coeffs = rationals(f.get("coeffs").ok_or_else(|| parse_err("facet without coeffs"))?)?;
            let bound = rational(f.get("bound").ok_or_else(|| parse_err("facet without bound"))?)?;
            Inequality::new(space, coeffs, bound)
        })
        .collect::<Result<Vec<_>>>()?;
    let equations = match v.get("equations").and_then(Value::as_array) {
        Some(eqs) => eqs
            .iter()
            .map(|e| {
                let coeffs = rationals(e.get("coeffs").ok_or_else(|| parse_err("equation without coeffs"))?)?;
                let rhs = rational(e.get("rhs").ok_or_else(|| parse_err("equation without rhs"))?)?;
                Ok(Equation { coeffs, rhs })
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![],
    };
    let complete = v.get("complete").and_then(Value::as_bool).unwrap_or(true);
    Ok(HRep { space, equations, facets, complete })
}

/// Condition 1 and Condition 2 results for one `d`.
pub fn report_to_json(c1: &Condition1Report, tight: Option<&TightnessReport>, witness: Option<&[WitnessBatch]>) -> Value {
    let mut obj = Map::new();
    obj.insert("d".into(), json!(c1.d));
    obj.insert("max".into(), to_value(&c1.max));
    obj.insert("generators".into(), json!(c1.generators));
    let hist: Map<String, Value> = c1.histogram.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    obj.insert("histogram".into(), Value::Object(hist));
    obj.insert("cases".into(), to_value(&c1.cases));
    if let Some(t) = tight {
        obj.insert("tight".into(), json!(t.tight));
        obj.insert("rank".into(), json!(t.rank));
        obj.insert("h".into(), json!(t.h));
        obj.insert("saturating".into(), json!(t.saturating));
    }
    if let Some(w) = witness {
        obj.insert("witness_steps".into(), to_value(&w));
    }
    Value::Object(obj)
}
