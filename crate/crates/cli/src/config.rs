//! Subcommand schemas, config-file parsing and typed parameter access.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Bool,
    IntList,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Int => "nonnegative integer".into(),
            Kind::Float => "number".into(),
            Kind::Bool => "true or false".into(),
            Kind::IntList => "comma-separated integers".into(),
            Kind::Choice(c) => format!("one of {}", c.join(", ")),
        }
    }

    fn check(&self, raw: &str) -> Result<(), String> {
        let ok = match self {
            Kind::Int => raw.parse::<u64>().is_ok(),
            Kind::Float => raw.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false),
            Kind::Bool => parse_bool(raw).is_some(),
            Kind::IntList => parse_list(raw).is_some(),
            Kind::Choice(c) => c.contains(&raw),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("expected {}, got '{raw}'", self.describe()))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec { name, kind, required: false, default, help }
}

pub const fn required(name: &'static str, kind: Kind, help: &'static str) -> KeySpec {
    KeySpec { name, kind, required: true, default: None, help }
}

/// Keys every subcommand accepts, on the command line or in a config file.
pub const GLOBAL_KEYS: &[&str] = &["seed", "out"];

fn parse_bool(raw: &str) -> Option<bool> {
    match raw {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn parse_list(raw: &str) -> Option<Vec<u64>> {
    let v: Option<Vec<u64>> = raw.split(',').map(|p| p.trim().parse().ok()).collect();
    v.filter(|v| !v.is_empty())
}

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Flag,
    File { path: String, line: usize },
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag => write!(f, "command line"),
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Default => write!(f, "default"),
        }
    }
}

/// `key=value` lines; blank lines, `#`/`;` comments and `[section]` headers
/// are skipped.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String, Origin)>, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    let shown = path.display().to_string();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                out.push((k.trim().to_string(), v.trim().to_string(), Origin::File { path: shown.clone(), line: i + 1 }))
            }
            None => errors.push(format!("{shown}:{}: expected key=value, got '{line}'", i + 1)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Resolved parameters for one run.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, (String, Origin)>,
    pub seed: u64,
}

impl Params {
    /// Merges file entries and flags (flags win) and checks them against the
    /// schema. Returns every diagnostic found, not just the first.
    pub fn resolve(
        schema: &[KeySpec],
        file: Vec<(String, String, Origin)>,
        flags: Vec<(String, String)>,
    ) -> (Params, Vec<String>) {
        let mut diags = Vec::new();
        let mut values: BTreeMap<String, (String, Origin)> = BTreeMap::new();
        for (k, v, origin) in file {
            if schema.iter().any(|s| s.name == k) || GLOBAL_KEYS.contains(&k.as_str()) {
                values.insert(k, (v, origin));
            } else {
                diags.push(format!("{origin}: unknown key '{k}'"));
            }
        }
        for (k, v) in flags {
            values.insert(k, (v, Origin::Flag));
        }
        for spec in schema {
            match values.get(spec.name) {
                Some((raw, origin)) => {
                    if let Err(e) = spec.kind.check(raw) {
                        diags.push(format!("{origin}: key '{}': {e}", spec.name));
                    }
                }
                None => match spec.default {
                    Some(d) => {
                        values.insert(spec.name.to_string(), (d.to_string(), Origin::Default));
                    }
                    None if spec.required => diags.push(format!("missing required key {}", spec.name)),
                    None => {}
                },
            }
        }
        let seed = match values.get("seed") {
            Some((raw, origin)) => raw.parse().unwrap_or_else(|_| {
                diags.push(format!("{origin}: key 'seed': expected 64-bit unsigned integer, got '{raw}'"));
                0
            }),
            None => 0,
        };
        values.remove("seed");
        (Params { values, seed }, diags)
    }

    pub fn has(&self, k: &str) -> bool {
        self.values.contains_key(k)
    }

    pub fn raw(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(|(v, _)| v.as_str())
    }

    pub fn out(&self) -> Option<&str> {
        self.raw("out")
    }

    /// Resolved `key=value` pairs in key order, excluding the output path.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.values.iter().filter(|(k, _)| k.as_str() != "out").map(|(k, (v, _))| (k.clone(), v.clone())).collect()
    }

    fn need(&self, k: &str) -> Result<&str, String> {
        self.raw(k).ok_or_else(|| format!("missing required key {k}"))
    }

    pub fn usize(&self, k: &str) -> Result<usize, String> {
        let raw = self.need(k)?;
        raw.parse().map_err(|_| format!("key '{k}': expected nonnegative integer, got '{raw}'"))
    }

    pub fn u64(&self, k: &str) -> Result<u64, String> {
        let raw = self.need(k)?;
        raw.parse().map_err(|_| format!("key '{k}': expected nonnegative integer, got '{raw}'"))
    }

    pub fn f64(&self, k: &str) -> Result<f64, String> {
        let raw = self.need(k)?;
        raw.parse().map_err(|_| format!("key '{k}': expected number, got '{raw}'"))
    }

    pub fn opt_f64(&self, k: &str) -> Result<Option<f64>, String> {
        if self.has(k) {
            self.f64(k).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn bool(&self, k: &str) -> Result<bool, String> {
        let raw = self.need(k)?;
        parse_bool(raw).ok_or_else(|| format!("key '{k}': expected true or false, got '{raw}'"))
    }

    pub fn list(&self, k: &str) -> Result<Vec<usize>, String> {
        let raw = self.need(k)?;
        parse_list(raw)
            .map(|v| v.into_iter().map(|x| x as usize).collect())
            .ok_or_else(|| format!("key '{k}': expected comma-separated integers, got '{raw}'"))
    }

    pub fn text(&self, k: &str) -> Result<&str, String> {
        self.need(k)
    }
}
