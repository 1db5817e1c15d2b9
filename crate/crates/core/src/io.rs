//! `vsf-1` field files.
//!
//! A single JSON document:
//!
//! ```text
//! {"format": "vsf-1",
//!  "grid": {"l_max", "n_r", "r_max", "n_theta", "n_phi", ["r_min"]},
//!  "kind": "scalar" | "vector",
//!  "data": base64 of little-endian f64 pairs [re, im] in coefficient order}
//! ```
//!
//! Grid nodes are recomputed from the header.

use std::path::Path;
use std::sync::Arc;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, SphericalGrid, VectorField, C64};

pub const FORMAT: &str = "vsf-1";

/// A field read from or written to disk.
#[derive(Debug, Clone)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Field {
    pub fn kind(&self) -> &'static str {
        match self {
            Field::Scalar(_) => "scalar",
            Field::Vector(_) => "vector",
        }
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        match self {
            Field::Scalar(f) => &f.grid,
            Field::Vector(v) => &v.grid,
        }
    }

    fn coef(&self) -> &[C64] {
        match self {
            Field::Scalar(f) => &f.coef,
            Field::Vector(v) => &v.coef,
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            Field::Vector(v) => Ok(v),
            Field::Scalar(_) => Err(Error::Format("key 'kind': expected \"vector\", found \"scalar\"".into())),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            Field::Scalar(f) => Ok(f),
            Field::Vector(_) => Err(Error::Format("key 'kind': expected \"scalar\", found \"vector\"".into())),
        }
    }
}

impl From<ScalarField> for Field {
    fn from(f: ScalarField) -> Self {
        Field::Scalar(f)
    }
}

impl From<VectorField> for Field {
    fn from(v: VectorField) -> Self {
        Field::Vector(v)
    }
}

fn encode_data(coef: &[C64]) -> String {
    let mut bytes = Vec::with_capacity(coef.len() * 16);
    for c in coef {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    STANDARD.encode(bytes)
}

fn decode_data(text: &str) -> Result<Vec<C64>> {
    let bytes = STANDARD.decode(text.trim()).map_err(|e| Error::Format(format!("key 'data': invalid base64 ({e})")))?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Format(format!("key 'data': {} bytes is not a whole number of complex values", bytes.len())));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
    Ok(bytes.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect())
}

/// Serializes a field as a `vsf-1` document.
pub fn to_json(field: &Field) -> String {
    let s = &field.grid().spec;
    let mut grid = json!({
        "l_max": s.l_max,
        "n_r": s.n_r,
        "r_max": s.r_max,
        "n_theta": s.n_theta,
        "n_phi": s.n_phi,
    });
    if s.r_min != 0.0 {
        grid["r_min"] = json!(s.r_min);
    }
    let doc = json!({
        "format": FORMAT,
        "grid": grid,
        "kind": field.kind(),
        "data": encode_data(field.coef()),
    });
    serde_json::to_string_pretty(&doc).expect("JSON value serializes") + "\n"
}

fn key<'a>(obj: &'a Map<String, Value>, name: &str, path: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::Format(format!("missing key '{path}{name}'")))
}

fn uint(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    key(obj, name, "grid.")?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::Format(format!("key 'grid.{name}': expected a non-negative integer")))
}

fn real(obj: &Map<String, Value>, name: &str) -> Result<f64> {
    key(obj, name, "grid.")?
        .as_f64()
        .ok_or_else(|| Error::Format(format!("key 'grid.{name}': expected a number")))
}

/// Parses a `vsf-1` document.
pub fn from_json(text: &str) -> Result<Field> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Format(format!("not valid JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| Error::Format("top level must be a JSON object".into()))?;
    match key(obj, "format", "")?.as_str() {
        Some(FORMAT) => {}
        other => return Err(Error::Format(format!("key 'format': expected \"{FORMAT}\", found {other:?}"))),
    }
    let g = key(obj, "grid", "")?
        .as_object()
        .ok_or_else(|| Error::Format("key 'grid': expected an object".into()))?;
    let spec = GridSpec {
        l_max: uint(g, "l_max")?,
        n_r: uint(g, "n_r")?,
        r_max: real(g, "r_max")?,
        n_theta: uint(g, "n_theta")?,
        n_phi: uint(g, "n_phi")?,
        r_min: if g.contains_key("r_min") { real(g, "r_min")? } else { 0.0 },
    };
    let grid = spec.build().map_err(|e| Error::Format(format!("key 'grid': {e}")))?;
    let data = key(obj, "data", "")?
        .as_str()
        .ok_or_else(|| Error::Format("key 'data': expected a base64 string".into()))?;
    let coef = decode_data(data)?;
    let kind = key(obj, "kind", "")?.as_str();
    let expected = |n: usize| {
        if coef.len() == n {
            Ok(())
        } else {
            Err(Error::Format(format!("key 'data': {} values, grid needs {n}", coef.len())))
        }
    };
    match kind {
        Some("scalar") => {
            expected(grid.n_r() * grid.n_h())?;
            Ok(Field::Scalar(ScalarField::from_coef(&grid, coef)?))
        }
        Some("vector") => {
            expected(3 * grid.n_r() * grid.n_h())?;
            Ok(Field::Vector(VectorField::from_coef(&grid, coef)?))
        }
        other => Err(Error::Format(format!("key 'kind': expected \"scalar\" or \"vector\", found {other:?}"))),
    }
}

pub fn write_field(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    std::fs::write(path, to_json(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    from_json(&std::fs::read_to_string(path)?)
}
