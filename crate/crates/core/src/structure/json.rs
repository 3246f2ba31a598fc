//! The shared structure file format.
//!
//! ```json
//! { "signature": {"R": 2},
//!   "universe": ["a", "b"],
//!   "relations": {"R": [["a", "b"]]},
//!   "point": "a" }
//! ```
//!
//! `point` is optional; unknown fields are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Signature, Structure};
use crate::error::{Error, Result};

/// A JSON object read with its keys in file order and duplicates preserved,
/// so that validation can report them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrderedMap<V>(pub Vec<(String, V)>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for OrderedMap<V> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EntriesVisitor<V>(PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for EntriesVisitor<V> {
            type Value = OrderedMap<V>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<M: MapAccess<'de>>(self, mut access: M) -> std::result::Result<Self::Value, M::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, V>()? {
                    entries.push((k, v));
                }
                Ok(OrderedMap(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor(PhantomData))
    }
}

impl<V: Serialize> Serialize for OrderedMap<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawStructure {
    pub signature: OrderedMap<usize>,
    pub universe: Vec<String>,
    #[serde(default)]
    pub relations: OrderedMap<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

/// Checks every invariant of the format and returns the structure together
/// with the index of its point, if one was given.
pub fn validate_structure(raw: RawStructure) -> Result<(Structure, Option<usize>)> {
    let signature = Signature::new(raw.signature.0)?;
    let mut relations = BTreeMap::new();
    for (name, tuples) in raw.relations.0 {
        if relations.contains_key(&name) {
            return Err(Error::DuplicateRelation(name));
        }
        relations.insert(name, tuples);
    }
    let structure = Structure::new(signature, raw.universe, relations)?;
    let point = match raw.point {
        Some(p) => Some(structure.index(&p).ok_or(Error::UnknownElement(p))?),
        None => None,
    };
    Ok((structure, point))
}

pub fn parse_structure(text: &str) -> Result<(Structure, Option<usize>)> {
    let raw: RawStructure = serde_json::from_str(text)?;
    validate_structure(raw)
}

pub fn structure_to_json(structure: &Structure, point: Option<usize>) -> serde_json::Value {
    let raw = RawStructure {
        signature: OrderedMap(
            structure
                .signature()
                .symbols()
                .map(|(n, a)| (n.to_string(), a))
                .collect(),
        ),
        universe: structure.universe().to_vec(),
        relations: OrderedMap(structure.named_relations().into_iter().collect()),
        point: point.map(|p| structure.name(p).to_string()),
    };
    serde_json::to_value(raw).expect("structures serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pointed_structure() {
        let (s, p) = parse_structure(
            r#"{"signature":{"R":2},"universe":["a","b"],"relations":{"R":[["a","b"]]},"point":"b"}"#,
        )
        .unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(p, Some(1));
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = parse_structure(r#"{"signature":{},"universe":["a"],"extra":1}"#).unwrap_err();
        assert!(matches!(err, Error::Json(_)));
    }

    #[test]
    fn rejects_duplicate_relation_names() {
        let err = parse_structure(r#"{"signature":{"R":2,"R":1},"universe":["a"]}"#).unwrap_err();
        assert!(matches!(err, Error::DuplicateRelation(ref n) if n == "R"));
        let err = parse_structure(
            r#"{"signature":{"R":2},"universe":["a"],"relations":{"R":[],"R":[]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateRelation(_)));
    }

    #[test]
    fn reports_unknown_element_and_arity() {
        let err = parse_structure(
            r#"{"signature":{"R":2},"universe":["a"],"relations":{"R":[["a","b"]]}}"#,
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "unknown element b");
        let err = parse_structure(
            r#"{"signature":{"R":2},"universe":["a","b"],"relations":{"R":[["a","b","a"]]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { .. }));
        let err = parse_structure(r#"{"signature":{"R":2},"universe":["a"],"point":"z"}"#)
            .unwrap_err();
        assert_eq!(err.to_string(), "unknown element z");
    }

    #[test]
    fn round_trips_through_json() {
        let s = super::super::families::cycle(4);
        let v = structure_to_json(&s, Some(2));
        let (back, p) = parse_structure(&v.to_string()).unwrap();
        assert_eq!(back.universe(), s.universe());
        assert_eq!(back.named_relations(), s.named_relations());
        assert_eq!(p, Some(2));
    }
}
