//! JSON shapes of the public API.

use std::collections::BTreeMap;
use std::fmt;

use meshsuggest_core::suggest::{Method, SuggestionGroup};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Most candidates returned per group.
pub const MAX_TERMS: usize = 10;

/// `{"Keywords": [...], "Type": "Semantic" | "Atomic" | "Fragment"}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiSuggestionRequest {
    #[serde(rename = "Keywords")]
    pub keywords: Vec<String>,
    #[serde(rename = "Type")]
    pub kind: String,
}

/// One group record of a response; a response is a JSON array of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiGroup {
    #[serde(rename = "Keywords")]
    pub keywords: Vec<String>,
    #[serde(rename = "Type")]
    pub kind: String,
    #[serde(rename = "MeSH_Terms")]
    pub mesh_terms: MeshTerms,
}

pub type ApiSuggestionResponse = Vec<ApiGroup>;

impl ApiGroup {
    /// Keeps the first [`MAX_TERMS`] names of `group`, echoing `kind`.
    pub fn from_group(group: &SuggestionGroup, kind: &str) -> Self {
        Self {
            keywords: group.keywords.clone(),
            kind: kind.to_string(),
            mesh_terms: MeshTerms(group.names().take(MAX_TERMS).map(String::from).collect()),
        }
    }
}

/// Ranked term names, serialized as `{"0": name, "1": name, ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeshTerms(pub Vec<String>);

impl Serialize for MeshTerms {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (i, name) in self.0.iter().enumerate() {
            map.serialize_entry(&i.to_string(), name)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MeshTerms {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Terms;

        impl<'de> Visitor<'de> for Terms {
            type Value = MeshTerms;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map from \"0\"..\"{}\" to term names", MAX_TERMS - 1)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<MeshTerms, A::Error> {
                let mut by_index = BTreeMap::new();
                while let Some((key, name)) = access.next_entry::<String, String>()? {
                    let i: usize = key
                        .parse()
                        .ok()
                        .filter(|i: &usize| i.to_string() == key)
                        .ok_or_else(|| de::Error::custom(format!("bad index {key:?}")))?;
                    if by_index.insert(i, name).is_some() {
                        return Err(de::Error::custom(format!("duplicate index {key}")));
                    }
                }
                if by_index.len() > MAX_TERMS {
                    return Err(de::Error::custom(format!(
                        "{} terms, at most {MAX_TERMS} allowed",
                        by_index.len()
                    )));
                }
                if by_index.keys().enumerate().any(|(want, &got)| want != got) {
                    return Err(de::Error::custom("indices are not contiguous from 0"));
                }
                Ok(MeshTerms(by_index.into_values().collect()))
            }
        }

        d.deserialize_map(Terms)
    }
}

/// Maps an API `Type` to a method. Lexical method names are accepted only
/// when `lexical` is set.
pub fn method_for(kind: &str, lexical: bool) -> Option<Method> {
    match kind {
        "Atomic" => Some(Method::AtomicBert),
        "Fragment" => Some(Method::FragmentBert),
        "Semantic" => Some(Method::SemanticBert),
        "ATM" if lexical => Some(Method::Atm),
        "MetaMap" if lexical => Some(Method::MetaMap),
        "UMLS" if lexical => Some(Method::Umls),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    QuerySubmitted,
    TermAdded,
    TermCopied,
    MethodChanged,
}

/// A front-end interaction, as posted to `/log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionEvent {
    pub session_id: String,
    /// Client clock, milliseconds since the epoch.
    pub timestamp: u64,
    pub kind: EventKind,
    #[serde(default)]
    pub payload: serde_json::Map<String, serde_json::Value>,
}
