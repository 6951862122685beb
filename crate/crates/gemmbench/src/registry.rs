//! Kernel metadata files and the registry built from them.
//!
//! Each `*.json` file in a dataset directory holds one object with the keys
//! `name`, `file`, `type`, `transA`, `transB`, `dj` and `di`. Other keys are
//! ignored so metadata carrying extra fields loads unmodified.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gemmbench_core::{Flavour, KernelSpec, Precision, Transpose};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: malformed JSON: {source}")]
    Parse {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{origin}: invalid or missing key `{key}`: {reason}")]
    Schema { origin: String, key: String, reason: String },
    #[error("kernel name `{0}` is defined more than once")]
    DuplicateName(String),
}

impl RegistryError {
    /// The offending key of a schema error.
    pub fn key(&self) -> Option<&str> {
        match self {
            RegistryError::Schema { key, .. } => Some(key),
            _ => None,
        }
    }
}

fn schema(origin: &str, key: &str, reason: impl Into<String>) -> RegistryError {
    RegistryError::Schema { origin: origin.into(), key: key.into(), reason: reason.into() }
}

fn string_field<'a>(obj: &'a Map<String, Value>, origin: &str, key: &str) -> Result<&'a str, RegistryError> {
    match obj.get(key) {
        None => Err(schema(origin, key, "missing")),
        Some(Value::String(s)) if !s.is_empty() => Ok(s),
        Some(_) => Err(schema(origin, key, "expected a non-empty string")),
    }
}

fn block_field(obj: &Map<String, Value>, origin: &str, key: &str) -> Result<usize, RegistryError> {
    match obj.get(key) {
        None => Err(schema(origin, key, "missing")),
        Some(v) => match v.as_u64() {
            Some(d) if d >= 1 => Ok(d as usize),
            _ => Err(schema(origin, key, format!("expected a positive integer, got {v}"))),
        },
    }
}

/// Parses one metadata object. `origin` names the source in error messages.
///
/// `file` is optional and defaults to the kernel name.
pub fn parse_spec(text: &str, origin: &str) -> Result<KernelSpec, RegistryError> {
    let value: Value =
        serde_json::from_str(text).map_err(|source| RegistryError::Parse { origin: origin.into(), source })?;
    let Value::Object(obj) = value else {
        return Err(schema(origin, "(root)", "expected a JSON object"));
    };
    let name = string_field(&obj, origin, "name")?.to_string();
    let source_id = match obj.get("file") {
        None => name.clone(),
        Some(_) => string_field(&obj, origin, "file")?.to_string(),
    };
    let precision = match string_field(&obj, origin, "type")? {
        "S" => Precision::S,
        "D" => Precision::D,
        other => return Err(schema(origin, "type", format!("expected \"S\" or \"D\", got {other:?}"))),
    };
    let transpose = |key: &str| -> Result<Transpose, RegistryError> {
        match string_field(&obj, origin, key)? {
            "N" => Ok(Transpose::N),
            "T" => Ok(Transpose::T),
            other => Err(schema(origin, key, format!("expected \"N\" or \"T\", got {other:?}"))),
        }
    };
    let trans_a = transpose("transA")?;
    let trans_b = transpose("transB")?;
    let d_j = block_field(&obj, origin, "dj")?;
    let d_i = block_field(&obj, origin, "di")?;
    Ok(KernelSpec { name, source_id, precision, trans_a, trans_b, d_j, d_i })
}

pub fn load_spec(path: &Path) -> Result<KernelSpec, RegistryError> {
    let text = fs::read_to_string(path).map_err(|source| RegistryError::Io { path: path.to_path_buf(), source })?;
    parse_spec(&text, &path.display().to_string())
}

/// Serializes a spec with the metadata key names.
pub fn spec_to_json(spec: &KernelSpec) -> String {
    serde_json::to_string_pretty(spec).expect("kernel spec serializes")
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../dataset/", $name, ".json")))),*]
    };
}

const BUNDLED: &[(&str, &str)] = bundled![
    "SGEMM_NN_1x1",
    "SGEMM_NN_4x1",
    "SGEMM_NN_4x1_barrier",
    "SGEMM_NT_1x1",
    "SGEMM_NT_4x1",
    "SGEMM_NT_4x1_barrier",
    "DGEMM_NN_1x1",
    "DGEMM_NN_4x1",
    "DGEMM_NN_4x1_barrier",
    "DGEMM_NT_1x1",
    "DGEMM_NT_4x1",
    "DGEMM_NT_4x1_barrier",
];

/// Immutable set of kernel specs indexed by name.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    specs: BTreeMap<String, KernelSpec>,
}

impl Registry {
    pub fn from_specs(specs: impl IntoIterator<Item = KernelSpec>) -> Result<Self, RegistryError> {
        let mut map = BTreeMap::new();
        for spec in specs {
            if map.contains_key(&spec.name) {
                return Err(RegistryError::DuplicateName(spec.name));
            }
            map.insert(spec.name.clone(), spec);
        }
        Ok(Registry { specs: map })
    }

    /// The metadata shipped with this crate: three variants for each of the
    /// four flavours.
    pub fn bundled() -> Self {
        let specs = BUNDLED
            .iter()
            .map(|(name, text)| parse_spec(text, &format!("bundled:{name}.json")).expect("bundled metadata is valid"));
        Self::from_specs(specs).expect("bundled names are unique")
    }

    /// Loads every `*.json` file directly under `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, RegistryError> {
        let io = |source| RegistryError::Io { path: dir.to_path_buf(), source };
        let mut paths = Vec::new();
        for entry in fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "json") {
                paths.push(path);
            }
        }
        paths.sort();
        let specs = paths.iter().map(|p| load_spec(p)).collect::<Result<Vec<_>, _>>()?;
        Self::from_specs(specs)
    }

    pub fn get(&self, name: &str) -> Option<&KernelSpec> {
        self.specs.get(name)
    }

    /// Specs of one flavour, ordered by name.
    pub fn lookup(&self, flavour: Flavour) -> Vec<&KernelSpec> {
        self.specs.values().filter(|s| s.flavour() == flavour).collect()
    }

    pub fn flavours(&self) -> Vec<Flavour> {
        let mut f: Vec<_> = self.specs.values().map(KernelSpec::flavour).collect();
        f.sort();
        f.dedup();
        f
    }

    pub fn iter(&self) -> impl Iterator<Item = &KernelSpec> {
        self.specs.values()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LISTED_SPEC: &str = r#"{
        "name"   : "SGEMM_NT_1x1",
        "file"   : "SGEMM_NT_1x1.cl",
        "type"   : "S",
        "transA" : "N",
        "transB" : "T",
        "dj"     : 1,
        "di"     : 1
    }"#;

    #[test]
    fn parses_metadata_listing() {
        let s = parse_spec(LISTED_SPEC, "t").unwrap();
        assert_eq!(s.name, "SGEMM_NT_1x1");
        assert_eq!(s.source_id, "SGEMM_NT_1x1.cl");
        assert_eq!(s.flavour(), Flavour::SGEMM_NT);
        assert_eq!((s.d_j, s.d_i), (1, 1));
    }

    #[test]
    fn coarsened_metadata() {
        let text =
            r#"{"name":"SGEMM_NT_4x1","file":"SGEMM_NT_4x1.cl","type":"S","transA":"N","transB":"T","dj":4,"di":1}"#;
        let s = parse_spec(text, "t").unwrap();
        assert_eq!((s.precision, s.trans_a, s.trans_b, s.d_j, s.d_i), (Precision::S, Transpose::N, Transpose::T, 4, 1));
    }

    #[test]
    fn missing_key_is_named() {
        let text = r#"{"name":"X","type":"S","transA":"N","transB":"T","dj":1}"#;
        assert_eq!(parse_spec(text, "t").unwrap_err().key(), Some("di"));
    }

    #[test]
    fn invalid_values_are_named() {
        let base = |k: &str, v: &str| {
            let mut obj: Map<String, Value> = serde_json::from_str(LISTED_SPEC).unwrap();
            obj.insert(k.into(), serde_json::from_str(v).unwrap());
            serde_json::to_string(&obj).unwrap()
        };
        for (key, value) in [
            ("dj", "0"),
            ("di", "-1"),
            ("di", "1.5"),
            ("dj", "\"4\""),
            ("type", "\"C\""),
            ("transA", "\"X\""),
            ("transB", "1"),
            ("name", "\"\""),
            ("file", "null"),
        ] {
            let err = parse_spec(&base(key, value), "t").unwrap_err();
            assert_eq!(err.key(), Some(key), "{key}={value}");
        }
    }

    #[test]
    fn malformed_and_non_object() {
        assert!(matches!(parse_spec("{", "t"), Err(RegistryError::Parse { .. })));
        assert_eq!(parse_spec("[1]", "t").unwrap_err().key(), Some("(root)"));
    }

    #[test]
    fn unknown_keys_ignored_and_file_optional() {
        let text =
            r#"{"name":"X_1x1","type":"D","transA":"N","transB":"N","dj":1,"di":1,"author":"me","extra":{"a":1}}"#;
        let s = parse_spec(text, "t").unwrap();
        assert_eq!(s.source_id, "X_1x1");
    }

    #[test]
    fn bundled_lookup() {
        let r = Registry::bundled();
        assert_eq!(r.len(), 12);
        let names: Vec<_> = r.lookup(Flavour::SGEMM_NT).iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["SGEMM_NT_1x1", "SGEMM_NT_4x1", "SGEMM_NT_4x1_barrier"]);
        assert_eq!(r.flavours().len(), 4);
    }

    #[test]
    fn empty_and_unmatched_lookup() {
        let empty = Registry::default();
        assert!(empty.lookup(Flavour::DGEMM_NN).is_empty());
        let nt_only = Registry::from_specs(Registry::bundled().lookup(Flavour::SGEMM_NT).into_iter().cloned()).unwrap();
        assert!(nt_only.lookup(Flavour::SGEMM_NN).is_empty());
    }

    #[test]
    fn duplicate_names_rejected() {
        let s = parse_spec(LISTED_SPEC, "t").unwrap();
        assert!(matches!(Registry::from_specs([s.clone(), s]), Err(RegistryError::DuplicateName(_))));
    }

    #[test]
    fn directory_scan() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.json"), LISTED_SPEC).unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let r = Registry::from_dir(dir.path()).unwrap();
        assert_eq!(r.len(), 1);
        fs::write(dir.path().join("b.json"), r#"{"name":"Y"}"#).unwrap();
        assert!(matches!(Registry::from_dir(dir.path()), Err(RegistryError::Schema { .. })));
    }

    fn arb_spec() -> impl Strategy<Value = KernelSpec> {
        (
            "[A-Za-z][A-Za-z0-9_]{0,15}",
            "[A-Za-z0-9_.]{1,20}",
            prop_oneof![Just(Precision::S), Just(Precision::D)],
            prop_oneof![Just(Transpose::N), Just(Transpose::T)],
            prop_oneof![Just(Transpose::N), Just(Transpose::T)],
            1usize..64,
            1usize..64,
        )
            .prop_map(|(name, source_id, precision, trans_a, trans_b, d_j, d_i)| KernelSpec {
                name,
                source_id,
                precision,
                trans_a,
                trans_b,
                d_j,
                d_i,
            })
    }

    proptest! {
        #[test]
        fn json_round_trip(spec in arb_spec()) {
            prop_assert_eq!(parse_spec(&spec_to_json(&spec), "rt").unwrap(), spec);
        }
    }
}
