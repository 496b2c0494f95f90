//! JSON file formats for classes, datasets, queries and encodings.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::compression::VsEncoding;
use crate::geometry::{simplex_face_domain, HalfspaceOracle, Point, Rational};
use crate::instances::{
    all_labelings, parity_class, random_class, thresholds_1d, tilu_ub_class, vclb_instance,
};
use crate::model::{ClassHandle, Dataset, FiniteClass, LabeledPair, Query};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

fn invalid(path: &Path, msg: impl Into<String>) -> InputError {
    InputError::Invalid { path: path.to_path_buf(), msg: msg.into() }
}

pub fn read_json(path: &Path) -> Result<Value, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| InputError::Read { path: path.to_path_buf(), source })?;
    parse_json(path, &text)
}

pub fn parse_json(path: &Path, text: &str) -> Result<Value, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

fn typed<T: for<'de> Deserialize<'de>>(path: &Path, v: Value) -> Result<T, InputError> {
    serde_json::from_value(v).map_err(|e| invalid(path, e.to_string()))
}

fn bit(path: &Path, v: &Value) -> Result<bool, InputError> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
        other => Err(invalid(path, format!("expected a bit, got {other}"))),
    }
}

fn rational(path: &Path, v: &Value) -> Result<Rational, InputError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(i.into()))
            .ok_or_else(|| invalid(path, format!("coordinate {n} is not an integer; write it as \"a/b\""))),
        Value::String(s) => {
            Rational::from_str(s.trim()).map_err(|_| invalid(path, format!("bad rational {s:?}")))
        }
        other => Err(invalid(path, format!("expected a rational, got {other}"))),
    }
}

fn usize_field(path: &Path, obj: &Value, key: &str) -> Result<usize, InputError> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| invalid(path, format!("missing natural number field {key:?}")))
}

fn points(path: &Path, v: &Value) -> Result<Vec<Point>, InputError> {
    let rows = v.as_array().ok_or_else(|| invalid(path, "points must be a list"))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| invalid(path, "each point must be a list of coordinates"))?
                .iter()
                .map(|c| rational(path, c))
                .collect()
        })
        .collect()
}

fn domain_err(path: &Path) -> impl Fn(crate::Error) -> InputError + '_ {
    move |e| invalid(path, e.to_string())
}

/// A loaded class with a short human-readable descriptor.
#[derive(Clone, Debug)]
pub struct LoadedClass {
    pub handle: ClassHandle,
    pub descriptor: String,
}

/// Parses a class file. `rng` is only drawn from by the `random` generator.
pub fn class_from_value(path: &Path, v: &Value, rng: &mut impl Rng) -> Result<LoadedClass, InputError> {
    let de = domain_err(path);
    if let Some(g) = v.get("generator") {
        let kind = g
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| invalid(path, "generator needs a \"kind\""))?;
        let field = |k: &str| usize_field(path, g, k);
        let (class, desc): (ClassHandle, String) = match kind {
            "thresholds" => {
                let m = field("m")?;
                (thresholds_1d(m).map_err(&de)?.into(), format!("thresholds(m={m})"))
            }
            "parity" => {
                let d = field("d")?;
                (parity_class(d).map_err(&de)?.into(), format!("parity(d={d})"))
            }
            "all-labelings" => {
                let m = field("m")?;
                (all_labelings(m).map_err(&de)?.into(), format!("all-labelings(m={m})"))
            }
            "tilu" => {
                let (d, dom) = (field("d")?, field("domain")?);
                (tilu_ub_class(d, dom).map_err(&de)?.into(), format!("tilu(d={d},domain={dom})"))
            }
            "vclb" => {
                let inv_beta = match g.get("inv_beta") {
                    Some(_) => field("inv_beta")?,
                    None => {
                        let beta = g
                            .get("beta")
                            .and_then(Value::as_f64)
                            .ok_or_else(|| invalid(path, "vclb needs beta or inv_beta"))?;
                        inv_beta_of(path, beta)?
                    }
                };
                let m = field("m")?;
                let inst = vclb_instance(inv_beta, m).map_err(&de)?;
                (inst.class, format!("vclb(1/beta={inv_beta},m={m})"))
            }
            "random" => {
                let (m, h) = (field("m")?, field("h")?);
                (random_class(rng, m, h).map_err(&de)?.into(), format!("random(m={m},h={h})"))
            }
            "halfspace" => {
                let (pts, desc) = if let Some(p) = g.get("points") {
                    let pts = points(path, p)?;
                    let desc = format!("halfspace({} points)", pts.len());
                    (pts, desc)
                } else if let Some(dom) = g.get("domain") {
                    if dom.get("kind").and_then(Value::as_str) != Some("simplex-faces") {
                        return Err(invalid(path, "halfspace domain kind must be \"simplex-faces\""));
                    }
                    let (d, k) = (usize_field(path, dom, "d")?, usize_field(path, dom, "k")?);
                    let fd = simplex_face_domain(d, k).map_err(&de)?;
                    (fd.points, format!("halfspace(simplex-faces d={d},k={k})"))
                } else {
                    return Err(invalid(path, "halfspace needs \"points\" or \"domain\""));
                };
                (ClassHandle::oracle(HalfspaceOracle::new(pts).map_err(&de)?), desc)
            }
            other => return Err(invalid(path, format!("unknown generator kind {other:?}"))),
        };
        return Ok(LoadedClass { handle: class, descriptor: desc });
    }
    let domain = v.get("domain").ok_or_else(|| invalid(path, "class needs \"domain\" or \"generator\""))?;
    let hyps = v.get("hypotheses").and_then(Value::as_array);
    match (domain, hyps) {
        (Value::Number(_), Some(rows)) => {
            let m = usize_field(path, v, "domain")?;
            let rows = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| invalid(path, "each hypothesis must be a list of bits"))?
                        .iter()
                        .map(|b| bit(path, b))
                        .collect()
                })
                .collect::<Result<Vec<Vec<bool>>, _>>()?;
            let class = FiniteClass::new(m, rows).map_err(&de)?;
            let desc = format!("explicit(m={m},h={})", class.len());
            Ok(LoadedClass { handle: class.into(), descriptor: desc })
        }
        (Value::Array(_), None) => {
            let pts = points(path, domain)?;
            let desc = format!("halfspace({} points)", pts.len());
            Ok(LoadedClass { handle: ClassHandle::oracle(HalfspaceOracle::new(pts).map_err(&de)?), descriptor: desc })
        }
        (Value::Array(_), Some(_)) => {
            Err(invalid(path, "a point-list domain defines halfspaces; drop \"hypotheses\""))
        }
        _ => Err(invalid(path, "\"domain\" must be a size with \"hypotheses\", or a list of points")),
    }
}

fn inv_beta_of(path: &Path, beta: f64) -> Result<usize, InputError> {
    let inv = (1.0 / beta).round();
    if beta <= 0.0 || beta > 1.0 || ((1.0 / inv) - beta).abs() > 1e-9 {
        return Err(invalid(path, format!("beta must be 1/r for a positive integer r, got {beta}")));
    }
    Ok(inv as usize)
}

pub fn load_class(path: &Path, rng: &mut impl Rng) -> Result<LoadedClass, InputError> {
    class_from_value(path, &read_json(path)?, rng)
}

pub fn dataset_from_value(path: &Path, v: &Value) -> Result<Dataset, InputError> {
    let items = v
        .get("items")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid(path, "dataset needs an \"items\" list"))?;
    let pairs = items
        .iter()
        .map(|it| Ok(LabeledPair::new(usize_field(path, it, "x")?, bit(path, it.get("y").unwrap_or(&Value::Null))?)))
        .collect::<Result<Vec<_>, InputError>>()?;
    Ok(Dataset::from_pairs(pairs))
}

pub fn load_dataset(path: &Path) -> Result<Dataset, InputError> {
    dataset_from_value(path, &read_json(path)?)
}

/// Accepts `{"indices": [...]}` for one query or `{"queries": [[...], ...]}`.
pub fn queries_from_value(path: &Path, v: &Value) -> Result<Vec<Query>, InputError> {
    let one = |v: &Value| -> Result<Query, InputError> {
        let ids: Vec<usize> = typed(path, v.clone())?;
        Query::new(ids).map_err(|e| invalid(path, e.to_string()))
    };
    if let Some(ix) = v.get("indices") {
        Ok(vec![one(ix)?])
    } else if let Some(qs) = v.get("queries").and_then(Value::as_array) {
        qs.iter()
            .map(|q| one(q.get("indices").unwrap_or(q)))
            .collect()
    } else {
        Err(invalid(path, "query file needs \"indices\" or \"queries\""))
    }
}

pub fn load_queries(path: &Path) -> Result<Vec<Query>, InputError> {
    queries_from_value(path, &read_json(path)?)
}

/// An encoding on its own or wrapped as `{"encoding": ...}`, which is the
/// shape the encoder prints.
pub fn encoding_from_value(path: &Path, v: &Value) -> Result<VsEncoding, InputError> {
    typed(path, v.get("encoding").unwrap_or(v).clone())
}

pub fn load_encoding(path: &Path) -> Result<VsEncoding, InputError> {
    encoding_from_value(path, &read_json(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;
    use serde_json::json;

    fn p() -> &'static Path {
        Path::new("t.json")
    }

    #[test]
    fn explicit_class_and_bits() {
        let v = json!({"domain": 2, "hypotheses": [[0, 1], [true, false], [0, 1]]});
        let c = class_from_value(p(), &v, &mut StepRng::new(0, 1)).unwrap();
        assert_eq!(c.handle.finite().unwrap().len(), 2);
    }

    #[test]
    fn parse_error_has_position() {
        match parse_json(p(), "{\n  \"domain\": ,\n}") {
            Err(InputError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn point_domain_is_halfspaces() {
        let v = json!({"domain": [["0"], ["1/2"], [1]]});
        let c = class_from_value(p(), &v, &mut StepRng::new(0, 1)).unwrap();
        assert_eq!(c.handle.domain_size(), 3);
        let y = |x, b| LabeledPair::new(x, b);
        assert!(c.handle.realizable(&[y(0, false), y(2, true)]).unwrap());
        assert!(!c.handle.realizable(&[y(0, true), y(1, false), y(2, true)]).unwrap());
    }

    #[test]
    fn queries_both_shapes() {
        assert_eq!(queries_from_value(p(), &json!({"indices": [2, 1]})).unwrap().len(), 1);
        let qs = queries_from_value(p(), &json!({"queries": [[1], {"indices": [2, 3]}]})).unwrap();
        assert_eq!(qs[1].len(), 2);
        assert!(queries_from_value(p(), &json!({"indices": [1, 1]})).is_err());
    }

    #[test]
    fn beta_must_be_reciprocal() {
        assert_eq!(inv_beta_of(p(), 0.5).unwrap(), 2);
        assert!(inv_beta_of(p(), 0.4).is_err());
    }
}
