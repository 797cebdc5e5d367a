use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REGISTRY_CSV: &str = include_str!("../../data/feature_registry.csv");

pub const REGISTRY_VERSION: &str = "v1";

pub const FEATURE_COUNT: usize = 88;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    AllFrames,
    VoicedOnly,
    UnvoicedOnly,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Mean,
    SdNorm,
    Pctl20,
    Pctl50,
    Pctl80,
    PctlRange,
    RisingSlopeMean,
    RisingSlopeSd,
    FallingSlopeMean,
    FallingSlopeSd,
    PeaksPerSecond,
    Rate,
    LengthMean,
    LengthSd,
    LeqDb,
}

macro_rules! serde_str {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                serde_json::from_value(serde_json::Value::String(s.to_string()))
                    .map_err(|_| Error::RegistryMismatch(format!("unknown {} {s:?}", stringify!($t))))
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match serde_json::to_value(self) {
                    Ok(serde_json::Value::String(s)) => f.write_str(&s),
                    _ => Err(fmt::Error),
                }
            }
        }
    };
}

serde_str!(Scope);
serde_str!(Functional);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub name: String,
    pub lld: String,
    pub functional: Functional,
    pub scope: Scope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRegistry {
    pub version: String,
    pub entries: Vec<RegistryEntry>,
    index: HashMap<String, usize>,
}

/// Canonical form of a typeset feature name: subscripts flattened, en dashes
/// as hyphens, whitespace collapsed.
pub fn normalize_name(raw: &str) -> String {
    let mut s = raw.replace("\\textsubscript{", "\u{1}");
    let mut out = String::with_capacity(s.len());
    let mut depth = 0;
    for ch in s.drain(..) {
        match ch {
            '\u{1}' => depth += 1,
            '}' if depth > 0 => depth -= 1,
            _ => out.push(ch),
        }
    }
    out.replace("--", "-").split_whitespace().collect::<Vec<_>>().join(" ")
}

impl FeatureRegistry {
    /// Parses a registry file: an optional `# ... vN` stamp line, then CSV
    /// `name,lld,functional,scope`.
    pub fn parse(text: &str) -> Result<FeatureRegistry> {
        let mut version = String::from("unversioned");
        let mut body = text;
        if let Some(first) = text.lines().next() {
            if let Some(stamp) = first.strip_prefix('#') {
                version = stamp.split_whitespace().last().unwrap_or("").to_string();
                body = &text[first.len()..];
            }
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.trim_start().as_bytes());
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["name", "lld", "functional", "scope"] {
            return Err(Error::RegistryMismatch("header must be name,lld,functional,scope".into()));
        }
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let entry = RegistryEntry {
                name: rec[0].to_string(),
                lld: rec[1].to_string(),
                functional: rec[2].parse()?,
                scope: rec[3].parse()?,
            };
            if index.insert(normalize_name(&entry.name), entries.len()).is_some() {
                return Err(Error::RegistryMismatch(format!("duplicate name {:?}", entry.name)));
            }
            entries.push(entry);
        }
        Ok(FeatureRegistry { version, entries, index })
    }

    /// The bundled 88-entry registry.
    pub fn builtin() -> &'static FeatureRegistry {
        static REG: OnceLock<FeatureRegistry> = OnceLock::new();
        REG.get_or_init(|| {
            let reg = FeatureRegistry::parse(REGISTRY_CSV).expect("bundled registry parses");
            assert_eq!(reg.entries.len(), FEATURE_COUNT);
            reg
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    /// Position of a feature given in registry or typeset form.
    pub fn resolve(&self, name: &str) -> Option<usize> {
        self.index.get(&normalize_name(name)).copied()
    }
}
