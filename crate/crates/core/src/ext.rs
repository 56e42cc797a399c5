//! Extended reals: `f64::INFINITY` stands for ∞. Serialized as a JSON number or the string "inf".

use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;
use std::fmt;

use crate::error::{Error, Result};

pub fn parse(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    if t == "inf" || t == "infinity" || t == "+inf" {
        return Ok(f64::INFINITY);
    }
    if let Some((a, b)) = t.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
        let b: f64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
        return Ok(a / b);
    }
    t.parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

struct ExtVisitor;

impl<'de> Visitor<'de> for ExtVisitor {
    type Value = f64;
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or \"inf\"")
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }
    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        parse(v).map_err(E::custom)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    d.deserialize_any(ExtVisitor)
}

/// `|v|^p` with cheap paths for the common exponents.
#[inline]
pub fn pow_abs(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// `s^{1/p}` for a sum of p-th powers.
#[inline]
pub fn root(s: f64, p: f64) -> f64 {
    if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}
