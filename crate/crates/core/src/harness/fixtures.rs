//! Bundled strike sets and parameter sets.
//!
//! The files under `fixtures/` are compiled in. Setting
//! [`FIXTURE_DIR_VAR`] points named lookups at a directory holding files of
//! the same names instead.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::quote_file::QuoteFile;
use super::HarnessError;
use crate::heston::HestonParams;

pub const FIXTURE_DIR_VAR: &str = "HESTON_SWIFT_FIXTURES";

pub const SET1_QUOTES: &str = include_str!("../../fixtures/set1.quotes");
pub const SET2_QUOTES: &str = include_str!("../../fixtures/set2.quotes");
pub const STRESS_QUOTES: &str = include_str!("../../fixtures/stress.quotes");
pub const PARAMS_JSON: &str = include_str!("../../fixtures/params.json");

/// Named strike/maturity sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuoteSet {
    /// 40 strikes at one maturity.
    Set1,
    /// 8 maturities with 5 strikes each.
    Set2,
    /// Set 2 priced one quote at a time (no strikes share a pricer).
    Set3,
    /// Long and short maturity stress strikes around `S0 = 100`.
    Stress,
}

impl QuoteSet {
    pub const ALL: [QuoteSet; 4] = [
        QuoteSet::Set1,
        QuoteSet::Set2,
        QuoteSet::Set3,
        QuoteSet::Stress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuoteSet::Set1 => "set1",
            QuoteSet::Set2 => "set2",
            QuoteSet::Set3 => "set3",
            QuoteSet::Stress => "stress",
        }
    }

    fn file_name(self) -> &'static str {
        match self {
            QuoteSet::Set1 => "set1.quotes",
            QuoteSet::Set2 | QuoteSet::Set3 => "set2.quotes",
            QuoteSet::Stress => "stress.quotes",
        }
    }

    fn embedded(self) -> &'static str {
        match self {
            QuoteSet::Set1 => SET1_QUOTES,
            QuoteSet::Set2 | QuoteSet::Set3 => SET2_QUOTES,
            QuoteSet::Stress => STRESS_QUOTES,
        }
    }

    /// Whether the set is priced quote by quote.
    pub fn per_quote(self) -> bool {
        self == QuoteSet::Set3
    }

    pub fn load(self) -> Result<QuoteFile, HarnessError> {
        match fixture_dir() {
            Some(dir) => QuoteFile::read(&dir.join(self.file_name())),
            None => QuoteFile::parse(self.embedded())
                .map_err(|e| e.in_file(Path::new(self.file_name()))),
        }
    }
}

impl std::str::FromStr for QuoteSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown quote set '{s}' (expected set1, set2, set3 or stress)"))
    }
}

fn fixture_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURE_DIR_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// A named set or a path to a quote file.
pub fn resolve_quotes(spec: &str) -> Result<(QuoteFile, Option<QuoteSet>), HarnessError> {
    match spec.parse::<QuoteSet>() {
        Ok(set) => Ok((set.load()?, Some(set))),
        Err(_) => Ok((QuoteFile::read(Path::new(spec))?, None)),
    }
}

/// Every named parameter set.
pub fn named_params() -> Result<BTreeMap<String, HestonParams>, HarnessError> {
    let text = match fixture_dir() {
        Some(dir) => {
            let path = dir.join("params.json");
            std::fs::read_to_string(&path)
                .map_err(|e| HarnessError::Input(format!("cannot read {}: {e}", path.display())))?
        }
        None => PARAMS_JSON.to_string(),
    };
    let sets: BTreeMap<String, HestonParams> = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Input(format!("params.json: {e}")))?;
    for (name, p) in &sets {
        p.validate()
            .map_err(|e| HarnessError::Input(format!("parameter set '{name}': {e}")))?;
    }
    Ok(sets)
}

/// Parameters from a set name (`theta2`, `fx`, ...), a JSON file holding one
/// parameter object, or five comma-separated numbers
/// `kappa,v_bar,sigma,rho,v0`.
pub fn resolve_params(spec: &str) -> Result<HestonParams, HarnessError> {
    if let Some(p) = named_params()?.get(spec) {
        return Ok(*p);
    }
    let fields: Vec<&str> = spec.split(',').collect();
    if fields.len() == 5 {
        let v = fields
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| HarnessError::Input(format!("cannot parse parameters '{spec}'")))?;
        return HestonParams::new(v[0], v[1], v[2], v[3], v[4])
            .map_err(|e| HarnessError::Input(e.to_string()));
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Input(format!("cannot read {}: {e}", path.display())))?;
        let p: HestonParams = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
        p.validate()
            .map_err(|e| HarnessError::Input(e.to_string()))?;
        return Ok(p);
    }
    let names: Vec<String> = named_params()?.into_keys().collect();
    Err(HarnessError::Input(format!(
        "unknown parameters '{spec}' (known sets: {})",
        names.join(", ")
    )))
}
