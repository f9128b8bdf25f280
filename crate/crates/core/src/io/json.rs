//! JSON encodings of scalars, signatures, instances, grids and graphs.
//!
//! Exact scalars are `{"w0":"p/q","w1":"p/q","w2":"p/q","w3":"p/q"}` over
//! the basis 1, ω, ω², ω³; approximate scalars are `{"re":x,"im":y}`. On
//! input a scalar may also be a JSON number or a `"p/q"` string.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serializer;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::instance::{BipartiteGrid, CspInstance, HolantGrid, InstanceError, Side};
use crate::numeric::{ApproxComplex, ExactComplex, Field, Mode, NumericError, Scalar};
use crate::signature::{Signature, SignatureError};

pub const FORMAT: &str = "cspkit-v1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Format(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

fn bad(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_rational(s: &str) -> Result<BigRational, IoError> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad(format!("bad rational `{s}`")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad(format!("bad rational `{s}`")))?;
        if q.is_zero() {
            return Err(bad(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    parse_decimal(s)
}

/// Exact value of a decimal literal such as `-1.25e3`.
fn parse_decimal(s: &str) -> Result<BigRational, IoError> {
    let err = || bad(format!("bad number `{s}`"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(&digits).map_err(|_| err())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn exact_to_json(z: &ExactComplex) -> Value {
    let c = z.coeffs();
    json!({
        "w0": rational_to_string(&c[0]),
        "w1": rational_to_string(&c[1]),
        "w2": rational_to_string(&c[2]),
        "w3": rational_to_string(&c[3]),
    })
}

pub fn approx_to_json(z: &ApproxComplex) -> Value {
    json!({"re": z.re(), "im": z.im()})
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(e) => exact_to_json(e),
        Scalar::Approx(a) => approx_to_json(a),
    }
}

pub fn field_to_json<S: Field>(s: &S) -> Value {
    scalar_to_json(&s.to_scalar())
}

pub fn serialize_exact<Ser: Serializer>(z: &ExactComplex, ser: Ser) -> Result<Ser::Ok, Ser::Error> {
    ser.serialize_some(&exact_to_json(z))
}

pub fn serialize_exact_pair<Ser: Serializer>(
    z: &[ExactComplex; 2],
    ser: Ser,
) -> Result<Ser::Ok, Ser::Error> {
    ser.serialize_some(&json!([exact_to_json(&z[0]), exact_to_json(&z[1])]))
}

/// Parses a scalar literal. Approximate literals are refused in exact mode.
pub fn parse_scalar(v: &Value, mode: Mode) -> Result<Scalar, IoError> {
    let exact = match v {
        Value::Number(n) => {
            let r = parse_decimal(&n.to_string())?;
            ExactComplex::from_rational(r)
        }
        Value::String(s) => ExactComplex::from_rational(parse_rational(s)?),
        Value::Object(m) if m.contains_key("re") || m.contains_key("im") => {
            let part = |k: &str| -> Result<f64, IoError> {
                match m.get(k) {
                    None => Ok(0.0),
                    Some(x) => x.as_f64().ok_or_else(|| bad(format!("`{k}` must be a number"))),
                }
            };
            let a = ApproxComplex::new(part("re")?, part("im")?);
            return match mode {
                Mode::Approx => Ok(Scalar::Approx(a)),
                Mode::Exact => Err(NumericError::ModeMismatch(Mode::Approx, Mode::Exact).into()),
            };
        }
        Value::Object(m) => {
            let mut c: [BigRational; 4] = Default::default();
            for (k, val) in m {
                let j = match k.as_str() {
                    "w0" => 0,
                    "w1" => 1,
                    "w2" => 2,
                    "w3" => 3,
                    _ => return Err(bad(format!("unknown scalar key `{k}`"))),
                };
                c[j] = match val {
                    Value::String(s) => parse_rational(s)?,
                    Value::Number(n) => parse_decimal(&n.to_string())?,
                    _ => return Err(bad("coefficient must be a string or number")),
                };
            }
            ExactComplex::from_coeffs(c)
        }
        _ => return Err(bad(format!("not a scalar: {v}"))),
    };
    Ok(match mode {
        Mode::Exact => Scalar::Exact(exact),
        Mode::Approx => Scalar::Exact(exact).to_approx(),
    })
}

pub fn parse_field<S: Field>(v: &Value) -> Result<S, IoError> {
    Ok(S::from_scalar(&parse_scalar(v, S::MODE)?)?)
}

/// Named signature constants.
pub fn named_signature<S: Field>(name: &str) -> Option<Signature<S>> {
    Some(match name.trim() {
        "EQ1" => Signature::equality(1),
        "EQ2" => Signature::equality(2),
        "EQ3" => Signature::equality(3),
        "NEQ2" => Signature::disequality(),
        "DELTA0" => Signature::pin_unary(0),
        "DELTA1" => Signature::pin_unary(1),
        "OR2" => Signature::or2(),
        "OR3" => Signature::symmetric(vec![S::zero(), S::one(), S::one(), S::one()]).ok()?,
        _ => return None,
    })
}

fn parse_list<S: Field>(v: &Value) -> Result<Vec<S>, IoError> {
    v.as_array()
        .ok_or_else(|| bad("expected an array of scalars"))?
        .iter()
        .map(parse_field)
        .collect()
}

/// Parses a signature: `{"arity":k,"values":[…]}`, `{"symmetric":[…]}`, a
/// named constant, or a bare array (a full table when its length is a power
/// of two, otherwise a symmetric signature).
pub fn parse_signature<S: Field>(v: &Value) -> Result<Signature<S>, IoError> {
    match v {
        Value::String(name) => {
            named_signature(name).ok_or_else(|| bad(format!("unknown signature `{name}`")))
        }
        Value::Array(items) => {
            let vals = parse_list(v)?;
            let n = items.len();
            if n >= 1 && n.is_power_of_two() {
                Ok(Signature::new(n.trailing_zeros() as usize, vals)?)
            } else {
                Ok(Signature::symmetric(vals)?)
            }
        }
        Value::Object(m) => {
            if let Some(sym) = m.get("symmetric") {
                return Ok(Signature::symmetric(parse_list(sym)?)?);
            }
            let vals = parse_list(m.get("values").ok_or_else(|| bad("signature needs `values`"))?)?;
            let arity = match m.get("arity") {
                Some(a) => a.as_u64().ok_or_else(|| bad("`arity` must be an integer"))? as usize,
                None => {
                    if !vals.len().is_power_of_two() {
                        return Err(bad("table length is not a power of two"));
                    }
                    vals.len().trailing_zeros() as usize
                }
            };
            Ok(Signature::new(arity, vals)?)
        }
        _ => Err(bad(format!("not a signature: {v}"))),
    }
}

pub fn signature_to_json<S: Field>(f: &Signature<S>) -> Value {
    json!({
        "arity": f.arity(),
        "values": f.values().iter().map(field_to_json).collect::<Vec<_>>(),
    })
}

/// Parses a family such as `{EQ2,NEQ2}`, `{OR2,[1,2]}` or a JSON array of
/// signatures.
pub fn parse_family<S: Field>(text: &str) -> Result<Vec<Signature<S>>, IoError> {
    let t = text.trim();
    if let Ok(v) = serde_json::from_str::<Value>(t) {
        let items = match &v {
            Value::Object(m) if m.contains_key("family") => m["family"].clone(),
            other => other.clone(),
        };
        if let Value::Array(xs) = &items {
            if !xs.is_empty() && xs.iter().all(is_signature_value::<S>) {
                return xs.iter().map(parse_signature).collect();
            }
        }
        return Ok(vec![parse_signature(&items)?]);
    }
    let inner = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| bad(format!("cannot parse family `{t}`")))?;
    split_top_level(inner)
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .map(|item| parse_signature_text(item.trim()))
        .collect()
}

/// Distinguishes a family member from a scalar entry of a bare table.
fn is_signature_value<S: Field>(v: &Value) -> bool {
    match v {
        Value::Array(_) => true,
        Value::String(s) => named_signature::<S>(s).is_some(),
        Value::Object(m) => m.contains_key("values") || m.contains_key("symmetric"),
        _ => false,
    }
}

/// Parses a signature given as text: a constant name or JSON.
pub fn parse_signature_text<S: Field>(text: &str) -> Result<Signature<S>, IoError> {
    let t = text.trim();
    if let Some(sig) = named_signature(t) {
        return Ok(sig);
    }
    let v: Value = serde_json::from_str(t)?;
    parse_signature(&v)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn check_format(m: &Map<String, Value>) -> Result<(), IoError> {
    match m.get("format") {
        None => Ok(()),
        Some(Value::String(f)) if f == FORMAT => Ok(()),
        Some(other) => Err(bad(format!("unsupported format {other}"))),
    }
}

fn var_key(v: &Value) -> Result<String, IoError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_u64() => Ok(n.to_string()),
        _ => Err(bad(format!("bad variable name {v}"))),
    }
}

pub fn parse_instance<S: Field>(text: &str) -> Result<CspInstance<S>, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let m = v.as_object().ok_or_else(|| bad("instance must be an object"))?;
    check_format(m)?;
    let (num_vars, index): (usize, BTreeMap<String, usize>) = match m.get("variables") {
        Some(Value::Number(n)) => {
            let n = n.as_u64().ok_or_else(|| bad("bad variable count"))? as usize;
            (n, (0..n).map(|i| (i.to_string(), i)).collect())
        }
        Some(Value::Array(names)) => {
            let mut index = BTreeMap::new();
            for (i, name) in names.iter().enumerate() {
                if index.insert(var_key(name)?, i).is_some() {
                    return Err(bad(format!("duplicate variable {name}")));
                }
            }
            (names.len(), index)
        }
        _ => return Err(bad("`variables` must be a list or a count")),
    };
    let mut inst = CspInstance::new(num_vars);
    let funcs = m
        .get("functions")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("`functions` must be an object"))?;
    for (name, sig) in funcs {
        inst.add_function(name, parse_signature(sig)?)?;
    }
    let constraints = m
        .get("constraints")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("`constraints` must be a list"))?;
    for c in constraints {
        let name = c
            .get("fn")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("constraint needs `fn`"))?;
        let vars = c
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("constraint needs `vars`"))?
            .iter()
            .map(|x| {
                let k = var_key(x)?;
                index
                    .get(&k)
                    .copied()
                    .ok_or_else(|| bad(format!("undeclared variable {x}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !inst.functions.contains_key(name) {
            if let Some(sig) = named_signature(name) {
                inst.add_function(name, sig)?;
            }
        }
        inst.add_constraint(name, vars)?;
    }
    Ok(inst)
}

pub fn instance_to_json<S: Field>(inst: &CspInstance<S>) -> Value {
    let functions: Map<String, Value> = inst
        .functions
        .iter()
        .map(|(k, f)| (k.clone(), signature_to_json(f)))
        .collect();
    json!({
        "format": FORMAT,
        "mode": S::MODE,
        "variables": (0..inst.num_vars).collect::<Vec<_>>(),
        "functions": functions,
        "constraints": inst.constraints,
    })
}

/// Parses a grid; sides are returned when every vertex declares one.
pub fn parse_grid<S: Field>(text: &str) -> Result<(HolantGrid<S>, Option<Vec<Side>>), IoError> {
    let v: Value = serde_json::from_str(text)?;
    let m = v.as_object().ok_or_else(|| bad("grid must be an object"))?;
    check_format(m)?;
    let mut grid = HolantGrid::new();
    let mut sides = Vec::new();
    for vert in m
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("`vertices` must be a list"))?
    {
        let sig = vert.get("sig").ok_or_else(|| bad("vertex needs `sig`"))?;
        grid.add_vertex(parse_signature(sig)?);
        match vert.get("side").and_then(Value::as_str) {
            Some("left") => sides.push(Some(Side::Left)),
            Some("right") => sides.push(Some(Side::Right)),
            Some(other) => return Err(bad(format!("unknown side `{other}`"))),
            None => sides.push(None),
        }
    }
    let port = |p: &Value| -> Result<(usize, usize), IoError> {
        let a = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("port must be [v,p]"))?;
        let get = |x: &Value| x.as_u64().map(|u| u as usize).ok_or_else(|| bad("port index"));
        Ok((get(&a[0])?, get(&a[1])?))
    };
    for e in m
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("`edges` must be a list"))?
    {
        let ends = e.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("edge must join two ports"))?;
        grid.add_edge(port(&ends[0])?, port(&ends[1])?);
    }
    grid.validate()?;
    let sides = if sides.iter().all(Option::is_some) && !sides.is_empty() {
        Some(sides.into_iter().map(Option::unwrap).collect())
    } else {
        None
    };
    Ok((grid, sides))
}

pub fn parse_bipartite<S: Field>(text: &str) -> Result<BipartiteGrid<S>, IoError> {
    let (grid, sides) = parse_grid(text)?;
    let sides = sides.ok_or_else(|| bad("every vertex needs a `side`"))?;
    let g = BipartiteGrid { grid, sides };
    g.validate()?;
    Ok(g)
}

pub fn grid_to_json<S: Field>(grid: &HolantGrid<S>, sides: Option<&[Side]>) -> Value {
    let vertices: Vec<Value> = grid
        .vertices
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut o = json!({"sig": signature_to_json(s)});
            if let Some(sd) = sides {
                o["side"] = serde_json::to_value(sd[i]).unwrap();
            }
            o
        })
        .collect();
    let edges: Vec<Value> = grid
        .edges
        .iter()
        .map(|[(a, p), (b, q)]| json!([[a, p], [b, q]]))
        .collect();
    json!({"format": FORMAT, "mode": S::MODE, "vertices": vertices, "edges": edges})
}

/// A simple graph: `{"vertices": n, "edges": [[u,v],…]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn parse_graph(text: &str) -> Result<Graph, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let m = v.as_object().ok_or_else(|| bad("graph must be an object"))?;
    check_format(m)?;
    let n = m
        .get("vertices")
        .or_else(|| m.get("n"))
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("graph needs a vertex count"))? as usize;
    let mut edges = Vec::new();
    for e in m
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("graph needs `edges`"))?
    {
        let pair = e
            .as_array()
            .filter(|a| a.len() == 2)
            .and_then(|a| Some((a[0].as_u64()? as usize, a[1].as_u64()? as usize)))
            .ok_or_else(|| bad("edge must be [u,v]"))?;
        if pair.0 >= n || pair.1 >= n {
            return Err(bad(format!("edge {pair:?} out of range")));
        }
        edges.push(pair);
    }
    Ok(Graph { n, edges })
}

pub fn graph_to_json(g: &Graph) -> Value {
    json!({"format": FORMAT, "vertices": g.n, "edges": g.edges})
}

/// True if `r` is an integer; used by callers formatting counts.
pub fn is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}
