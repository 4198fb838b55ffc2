//! JSON body descriptions.
//!
//! ```json
//! {"type": "minkowski",
//!  "left": {"type": "ball", "center": [0, 0], "radius": 1},
//!  "right": {"type": "segment", "a": [0, 0], "b": [1, 0]}}
//! ```

use std::fmt;
use std::path::Path;

use intrinsic_metrics::bodies::{Body, BodyError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Point {
        coords: Vec<f64>,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Segment {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `center + shape · B`, one row of `shape` per coordinate.
    Ellipsoid {
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
    Zonotope {
        base: Vec<f64>,
        generators: Vec<Vec<f64>>,
    },
    Minkowski {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    Hull {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    Scale {
        factor: f64,
        inner: Box<BodySpec>,
    },
    Translate {
        offset: Vec<f64>,
        inner: Box<BodySpec>,
    },
    Embed {
        inner: Box<BodySpec>,
        dim: usize,
    },
    CoordHull {
        first: usize,
        last: usize,
        dim: usize,
    },
}

/// A parse or validation failure, located by a JSON path such as
/// `left.vertices[2]`.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct SpecError {
    pub source_name: String,
    pub path: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: at {}: {}",
            self.source_name, self.path, self.message
        )
    }
}

fn err(path: &str, message: impl ToString) -> SpecError {
    SpecError {
        source_name: String::new(),
        path: if path.is_empty() {
            ".".into()
        } else {
            path.into()
        },
        message: message.to_string(),
    }
}

fn join(path: &str, field: &str) -> String {
    if path.is_empty() {
        field.to_string()
    } else {
        format!("{path}.{field}")
    }
}

fn check_len(path: &str, expected: usize, v: &[f64]) -> Result<(), SpecError> {
    if v.len() != expected {
        return Err(err(
            path,
            format!("expected {expected} coordinates, found {}", v.len()),
        ));
    }
    Ok(())
}

fn check_rows(path: &str, expected: usize, rows: &[Vec<f64>]) -> Result<(), SpecError> {
    for (i, r) in rows.iter().enumerate() {
        check_len(&format!("{path}[{i}]"), expected, r)?;
    }
    Ok(())
}

impl BodySpec {
    /// Builds the body, checking dimensions node by node.
    pub fn to_body(&self) -> Result<Body, SpecError> {
        self.build("")
    }

    fn build(&self, path: &str) -> Result<Body, SpecError> {
        let at = |e: BodyError| err(path, e);
        match self {
            BodySpec::Point { coords } => Body::point(coords.clone()).map_err(at),
            BodySpec::Polytope { vertices } => {
                if let Some(first) = vertices.first() {
                    check_rows(&join(path, "vertices"), first.len(), vertices)?;
                }
                Body::polytope(vertices.clone()).map_err(at)
            }
            BodySpec::Segment { a, b } => {
                check_len(&join(path, "b"), a.len(), b)?;
                Body::segment(a.clone(), b.clone()).map_err(at)
            }
            BodySpec::Ball { center, radius } => Body::ball(center.clone(), *radius).map_err(at),
            BodySpec::Ellipsoid { center, shape } => {
                let p = join(path, "shape");
                if shape.len() != center.len() {
                    return Err(err(
                        &p,
                        format!("expected {} rows, found {}", center.len(), shape.len()),
                    ));
                }
                if let Some(first) = shape.first() {
                    check_rows(&p, first.len(), shape)?;
                }
                Body::ellipsoid(center.clone(), shape.clone()).map_err(at)
            }
            BodySpec::Zonotope { base, generators } => {
                check_rows(&join(path, "generators"), base.len(), generators)?;
                Body::zonotope(base.clone(), generators.clone()).map_err(at)
            }
            BodySpec::Minkowski { left, right } | BodySpec::Hull { left, right } => {
                let l = left.build(&join(path, "left"))?;
                let r = right.build(&join(path, "right"))?;
                if l.dim() != r.dim() {
                    return Err(err(
                        &join(path, "right"),
                        format!(
                            "dimension {} does not match left operand dimension {}",
                            r.dim(),
                            l.dim()
                        ),
                    ));
                }
                match self {
                    BodySpec::Minkowski { .. } => Body::minkowski_sum(l, r),
                    _ => Body::hull_union(l, r),
                }
                .map_err(at)
            }
            BodySpec::Scale { factor, inner } => {
                let b = inner.build(&join(path, "inner"))?;
                Body::scale(*factor, b).map_err(|e| err(&join(path, "factor"), e))
            }
            BodySpec::Translate { offset, inner } => {
                let b = inner.build(&join(path, "inner"))?;
                check_len(&join(path, "offset"), b.dim(), offset)?;
                Body::translate(offset.clone(), b).map_err(at)
            }
            BodySpec::Embed { inner, dim } => {
                let b = inner.build(&join(path, "inner"))?;
                Body::embed(b, *dim).map_err(|e| err(&join(path, "dim"), e))
            }
            BodySpec::CoordHull { first, last, dim } => {
                Body::coord_hull(*first, *last, *dim).map_err(at)
            }
        }
    }

    /// The spec describing `body`.
    pub fn from_body(body: &Body) -> BodySpec {
        let boxed = |b: &Body| Box::new(BodySpec::from_body(b));
        match body {
            Body::Point(c) => BodySpec::Point { coords: c.clone() },
            Body::Polytope(v) => BodySpec::Polytope {
                vertices: v.clone(),
            },
            Body::Segment(a, b) => BodySpec::Segment {
                a: a.clone(),
                b: b.clone(),
            },
            Body::Ball { center, radius } => BodySpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Body::Ellipsoid { center, shape } => BodySpec::Ellipsoid {
                center: center.clone(),
                shape: shape.clone(),
            },
            Body::Zonotope { base, generators } => BodySpec::Zonotope {
                base: base.clone(),
                generators: generators.clone(),
            },
            Body::MinkowskiSum(l, r) => BodySpec::Minkowski {
                left: boxed(l),
                right: boxed(r),
            },
            Body::HullUnion(l, r) => BodySpec::Hull {
                left: boxed(l),
                right: boxed(r),
            },
            Body::Scale(f, b) => BodySpec::Scale {
                factor: *f,
                inner: boxed(b),
            },
            Body::Translate(o, b) => BodySpec::Translate {
                offset: o.clone(),
                inner: boxed(b),
            },
            Body::Embed(b, d) => BodySpec::Embed {
                inner: boxed(b),
                dim: *d,
            },
            Body::CoordHull(c) => BodySpec::CoordHull {
                first: c.first(),
                last: c.last(),
                dim: c.ambient(),
            },
        }
    }
}

fn field<T: DeserializeOwned>(
    obj: &Map<String, Value>,
    name: &str,
    path: &str,
) -> Result<T, SpecError> {
    let here = join(path, name);
    let v = obj
        .get(name)
        .ok_or_else(|| err(path, format!("missing field `{name}`")))?;
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let at = if inner == "." {
            here.clone()
        } else if inner.starts_with('[') {
            format!("{here}{inner}")
        } else {
            format!("{here}.{inner}")
        };
        err(&at, e.into_inner())
    })
}

fn child(obj: &Map<String, Value>, name: &str, path: &str) -> Result<Box<BodySpec>, SpecError> {
    let here = join(path, name);
    let v = obj
        .get(name)
        .ok_or_else(|| err(path, format!("missing field `{name}`")))?;
    Ok(Box::new(from_value(v, &here)?))
}

const VARIANTS: &[(&str, &[&str])] = &[
    ("point", &["coords"]),
    ("polytope", &["vertices"]),
    ("segment", &["a", "b"]),
    ("ball", &["center", "radius"]),
    ("ellipsoid", &["center", "shape"]),
    ("zonotope", &["base", "generators"]),
    ("minkowski", &["left", "right"]),
    ("hull", &["left", "right"]),
    ("scale", &["factor", "inner"]),
    ("translate", &["offset", "inner"]),
    ("embed", &["inner", "dim"]),
    ("coord_hull", &["first", "last", "dim"]),
];

/// Reads a spec from a JSON value, reporting failures with their path.
pub fn from_value(v: &Value, path: &str) -> Result<BodySpec, SpecError> {
    let obj = v
        .as_object()
        .ok_or_else(|| err(path, "expected a JSON object describing a body"))?;
    let tag = obj
        .get("type")
        .ok_or_else(|| err(path, "missing field `type`"))?
        .as_str()
        .ok_or_else(|| err(&join(path, "type"), "expected a string"))?;
    let Some((_, fields)) = VARIANTS.iter().find(|(name, _)| *name == tag) else {
        let names: Vec<&str> = VARIANTS.iter().map(|(n, _)| *n).collect();
        return Err(err(
            &join(path, "type"),
            format!(
                "unknown variant `{tag}`, expected one of {}",
                names.join(", ")
            ),
        ));
    };
    if let Some(k) = obj
        .keys()
        .find(|k| *k != "type" && !fields.contains(&k.as_str()))
    {
        return Err(err(
            &join(path, k),
            format!("unknown field `{k}`, expected one of {}", fields.join(", ")),
        ));
    }
    Ok(match tag {
        "point" => BodySpec::Point {
            coords: field(obj, "coords", path)?,
        },
        "polytope" => BodySpec::Polytope {
            vertices: field(obj, "vertices", path)?,
        },
        "segment" => BodySpec::Segment {
            a: field(obj, "a", path)?,
            b: field(obj, "b", path)?,
        },
        "ball" => BodySpec::Ball {
            center: field(obj, "center", path)?,
            radius: field(obj, "radius", path)?,
        },
        "ellipsoid" => BodySpec::Ellipsoid {
            center: field(obj, "center", path)?,
            shape: field(obj, "shape", path)?,
        },
        "zonotope" => BodySpec::Zonotope {
            base: field(obj, "base", path)?,
            generators: field(obj, "generators", path)?,
        },
        "minkowski" => BodySpec::Minkowski {
            left: child(obj, "left", path)?,
            right: child(obj, "right", path)?,
        },
        "hull" => BodySpec::Hull {
            left: child(obj, "left", path)?,
            right: child(obj, "right", path)?,
        },
        "scale" => BodySpec::Scale {
            factor: field(obj, "factor", path)?,
            inner: child(obj, "inner", path)?,
        },
        "translate" => BodySpec::Translate {
            offset: field(obj, "offset", path)?,
            inner: child(obj, "inner", path)?,
        },
        "embed" => BodySpec::Embed {
            inner: child(obj, "inner", path)?,
            dim: field(obj, "dim", path)?,
        },
        _ => BodySpec::CoordHull {
            first: field(obj, "first", path)?,
            last: field(obj, "last", path)?,
            dim: field(obj, "dim", path)?,
        },
    })
}

/// Parses a spec from JSON text. `source_name` prefixes error messages;
/// syntax errors report line and column, everything else a field path.
pub fn parse_spec(text: &str, source_name: &str) -> Result<(BodySpec, Body), SpecError> {
    let named = |e: SpecError| SpecError {
        source_name: source_name.to_string(),
        ..e
    };
    let value: Value = serde_json::from_str(text).map_err(|e| named(err("", e)))?;
    let spec = from_value(&value, "").map_err(named)?;
    let body = spec.to_body().map_err(named)?;
    Ok((spec, body))
}

/// Inline JSON when `arg` starts with `{`, otherwise a file path.
pub fn load_spec(arg: &str) -> Result<(BodySpec, Body), SpecError> {
    if arg.trim_start().starts_with('{') {
        return parse_spec(arg, "<inline>");
    }
    let text = std::fs::read_to_string(Path::new(arg)).map_err(|e| SpecError {
        source_name: arg.to_string(),
        path: ".".into(),
        message: e.to_string(),
    })?;
    parse_spec(&text, arg)
}
