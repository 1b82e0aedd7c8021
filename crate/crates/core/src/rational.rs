//! Exact rationals and their text form (`"p/q"`, or `"p"` when integral).

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn int(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn format_q(x: &Q) -> String {
    x.to_string()
}

pub fn parse_q(text: &str) -> Result<Q> {
    let bad = || Error::Invalid(format!("`{text}` is not a rational number"));
    let t = text.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

pub fn floor(x: &Q) -> i64 {
    Integer::div_floor(x.numer(), x.denom())
}

pub fn ceil(x: &Q) -> i64 {
    -Integer::div_floor(&-x.numer(), x.denom())
}

/// Serde adapter writing a rational as a string.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let text = String::deserialize(d)?;
        parse_q(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of rationals as strings.
pub mod vec_as_string {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts.iter().map(|t| parse_q(t).map_err(serde::de::Error::custom)).collect()
    }
}
