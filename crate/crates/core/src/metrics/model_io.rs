//! Versioned model file holding the fitted spacing, tail and delay models.
//!
//! Two encodings share one logical layout, the JSON document
//! `{"format": "avfrontier-models", "version": 1, "models": {...}}`:
//!
//! * `Json`: that document as UTF-8 text.
//! * `Binary`: the 8-byte magic `AVFMODEL`, a little-endian `u32` version, then the
//!   `models` value as a tagged tree. Each node starts with a tag byte:
//!   `0` null, `1` false, `2` true, `3` float (`f64` LE), `4` integer (`i64` LE),
//!   `5` string (`u64` LE byte length + UTF-8), `6` array (`u64` LE count + nodes),
//!   `7` object (`u64` LE count + (string key, node) pairs in ascending key order).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use super::delay::DelayModel;
use super::spacing::SpacingModel;
use super::tail::TailModel;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "avfrontier-models";
const MAGIC: &[u8; 8] = b"AVFMODEL";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricModels {
    pub spacing: Option<SpacingModel>,
    pub tail: Option<TailModel>,
    pub delay: Option<DelayModel>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelEncoding {
    #[default]
    Json,
    Binary,
}

pub fn write_models<W: Write>(mut w: W, models: &MetricModels, encoding: ModelEncoding) -> Result<()> {
    let value = serde_json::to_value(models)?;
    match encoding {
        ModelEncoding::Json => {
            let doc = serde_json::json!({ "format": FORMAT_NAME, "version": MODEL_FORMAT_VERSION, "models": value });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            w.write_all(b"\n")?;
        }
        ModelEncoding::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&MODEL_FORMAT_VERSION.to_le_bytes())?;
            encode(&mut w, &value)?;
        }
    }
    Ok(())
}

/// Read a model file in either encoding (detected from the leading bytes).
pub fn read_models<R: Read>(mut r: R) -> Result<MetricModels> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let value = if bytes.starts_with(MAGIC) {
        let mut cur = &bytes[MAGIC.len()..];
        let version = u32::from_le_bytes(take::<4>(&mut cur)?);
        check_version(version as u64)?;
        let v = decode(&mut cur, 0)?;
        if !cur.is_empty() {
            return Err(Error::ModelFormat("trailing bytes after model tree".into()));
        }
        v
    } else {
        let doc: Value = serde_json::from_slice(&bytes)?;
        if doc.get("format").and_then(Value::as_str) != Some(FORMAT_NAME) {
            return Err(Error::ModelFormat("not an avfrontier model file".into()));
        }
        check_version(doc.get("version").and_then(Value::as_u64).unwrap_or(0))?;
        doc.get("models").cloned().ok_or_else(|| Error::ModelFormat("missing `models`".into()))?
    };
    Ok(serde_json::from_value(value)?)
}

fn check_version(v: u64) -> Result<()> {
    if v != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::ModelFormat(format!("unsupported version {v}, expected {MODEL_FORMAT_VERSION}")));
    }
    Ok(())
}

fn encode<W: Write>(w: &mut W, v: &Value) -> Result<()> {
    match v {
        Value::Null => w.write_all(&[0])?,
        Value::Bool(b) => w.write_all(&[1 + *b as u8])?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => {
                w.write_all(&[4])?;
                w.write_all(&i.to_le_bytes())?;
            }
            None => {
                w.write_all(&[3])?;
                w.write_all(&n.as_f64().unwrap_or(f64::NAN).to_le_bytes())?;
            }
        },
        Value::String(s) => {
            w.write_all(&[5])?;
            write_str(w, s)?;
        }
        Value::Array(a) => {
            w.write_all(&[6])?;
            w.write_all(&(a.len() as u64).to_le_bytes())?;
            for x in a {
                encode(w, x)?;
            }
        }
        Value::Object(m) => {
            w.write_all(&[7])?;
            w.write_all(&(m.len() as u64).to_le_bytes())?;
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for k in keys {
                write_str(w, k)?;
                encode(w, &m[k])?;
            }
        }
    }
    Ok(())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u64).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn take<const N: usize>(cur: &mut &[u8]) -> Result<[u8; N]> {
    if cur.len() < N {
        return Err(Error::ModelFormat("truncated model file".into()));
    }
    let (head, rest) = cur.split_at(N);
    *cur = rest;
    Ok(head.try_into().expect("length checked"))
}

fn read_len(cur: &mut &[u8]) -> Result<usize> {
    let n = u64::from_le_bytes(take::<8>(cur)?) as usize;
    if n > cur.len() {
        return Err(Error::ModelFormat("length prefix exceeds file size".into()));
    }
    Ok(n)
}

fn read_str(cur: &mut &[u8]) -> Result<String> {
    let n = read_len(cur)?;
    let (s, rest) = cur.split_at(n);
    *cur = rest;
    String::from_utf8(s.to_vec()).map_err(|_| Error::ModelFormat("invalid UTF-8 string".into()))
}

fn decode(cur: &mut &[u8], depth: usize) -> Result<Value> {
    if depth > 64 {
        return Err(Error::ModelFormat("model tree nested too deeply".into()));
    }
    let [tag] = take::<1>(cur)?;
    Ok(match tag {
        0 => Value::Null,
        1 => Value::Bool(false),
        2 => Value::Bool(true),
        3 => {
            let f = f64::from_le_bytes(take::<8>(cur)?);
            Number::from_f64(f).map(Value::Number).unwrap_or(Value::Null)
        }
        4 => Value::Number(i64::from_le_bytes(take::<8>(cur)?).into()),
        5 => Value::String(read_str(cur)?),
        6 => {
            let n = read_len(cur)?;
            Value::Array((0..n).map(|_| decode(cur, depth + 1)).collect::<Result<_>>()?)
        }
        7 => {
            let n = read_len(cur)?;
            let mut m = Map::new();
            for _ in 0..n {
                let k = read_str(cur)?;
                m.insert(k, decode(cur, depth + 1)?);
            }
            Value::Object(m)
        }
        t => return Err(Error::ModelFormat(format!("unknown node tag {t}"))),
    })
}
