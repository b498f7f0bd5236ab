//! Plain-text `key = value` run configs with dotted section keys.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Raw overrides as written in a config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Lines are `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", no + 1)));
            }
            if values.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", no + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Applies overrides to the defaults of named sections and keeps track of
/// which keys were consumed.
pub struct Resolver {
    raw: RunConfig,
    used: Vec<String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(raw: RunConfig) -> Self {
        Self { raw, used: Vec::new(), resolved: BTreeMap::new() }
    }

    /// Section `name` with struct defaults; `fixed` keys are set by the run
    /// (seeds) and may not be overridden.
    pub fn section<S: Serialize + DeserializeOwned>(&mut self, name: &str, defaults: &S, fixed: &[&str]) -> Result<S> {
        let mut tree = serde_json::to_value(defaults)?;
        let mut leaves = BTreeMap::new();
        flatten("", &tree, &mut leaves);
        let prefix = format!("{name}.");
        let keys: Vec<String> = self.raw.values.keys().filter(|k| k.starts_with(&prefix)).cloned().collect();
        for key in keys {
            let path = &key[prefix.len()..];
            if !leaves.contains_key(path) || fixed.contains(&path) {
                continue;
            }
            let raw = &self.raw.values[&key];
            let parsed = parse_like(&leaves[path], raw).map_err(|e| Error::Config(format!("`{key}`: {e}")))?;
            set_path(&mut tree, path, parsed);
            self.used.push(key);
        }
        let value: S = serde_json::from_value(tree.clone()).map_err(|e| Error::Config(format!("section `{name}`: {e}")))?;
        let mut out = BTreeMap::new();
        flatten("", &serde_json::to_value(&value)?, &mut out);
        for (k, v) in out {
            if !fixed.contains(&k.as_str()) {
                self.resolved.insert(format!("{prefix}{k}"), render(&v));
            }
        }
        Ok(value)
    }

    /// A single scalar key with a default.
    pub fn scalar<S: Serialize + DeserializeOwned>(&mut self, key: &str, default: S) -> Result<S> {
        let def = serde_json::to_value(&default)?;
        let value = match self.raw.values.get(key) {
            Some(raw) => {
                self.used.push(key.to_string());
                let v = parse_like(&def, raw).map_err(|e| Error::Config(format!("`{key}`: {e}")))?;
                serde_json::from_value(v).map_err(|e| Error::Config(format!("`{key}`: {e}")))?
            }
            None => default,
        };
        self.resolved.insert(key.to_string(), render(&serde_json::to_value(&value)?));
        Ok(value)
    }

    /// Fails listing every key no section consumed.
    pub fn finish(self) -> Result<RunConfig> {
        let unknown: Vec<&String> = self.raw.values.keys().filter(|k| !self.used.contains(k)).collect();
        if !unknown.is_empty() {
            let list: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            return Err(Error::Config(format!("unknown config keys: {}", list.join(", "))));
        }
        Ok(RunConfig { values: self.resolved })
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn set_path(tree: &mut Value, path: &str, v: Value) {
    let mut node = tree;
    let parts: Vec<&str> = path.split('.').collect();
    for p in &parts[..parts.len() - 1] {
        node = node.as_object_mut().and_then(|m| m.get_mut(*p)).expect("path checked against defaults");
    }
    if let Some(m) = node.as_object_mut() {
        m.insert(parts[parts.len() - 1].to_string(), v);
    }
}

fn scalar_from(raw: &str) -> Value {
    let t = raw.trim();
    if t == "none" || t == "null" {
        return Value::Null;
    }
    match serde_json::from_str::<Value>(t) {
        Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
        _ => Value::String(t.to_string()),
    }
}

/// Parses `raw` with the shape of the default value `like`.
fn parse_like(like: &Value, raw: &str) -> std::result::Result<Value, String> {
    Ok(match like {
        Value::String(_) => Value::String(raw.to_string()),
        Value::Array(_) => {
            if raw.trim().is_empty() {
                Value::Array(Vec::new())
            } else {
                Value::Array(raw.split(',').map(scalar_from).collect())
            }
        }
        Value::Object(_) => return Err("not a leaf".into()),
        Value::Bool(_) => match raw.trim() {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => return Err(format!("expected true or false, got `{raw}`")),
        },
        Value::Number(_) => match scalar_from(raw) {
            v @ Value::Number(_) => v,
            _ => return Err(format!("expected a number, got `{raw}`")),
        },
        Value::Null => scalar_from(raw),
    })
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(a) => a.iter().map(render).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}
