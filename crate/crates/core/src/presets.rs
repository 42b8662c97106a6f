//! Field preset files and the built-in catalog.
//!
//! A preset is a JSON object with keys `name`, `min_poly` (ascending integer
//! coefficients), `basis` (`"power"` or an explicit table), optional
//! `fundamental_units` (coordinate arrays) and `torsion` (`order`, `gen`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldHandle;

/// Colon-separated directories searched for `<name>.json` before the
/// built-in catalog.
pub const PRESET_PATH_ENV: &str = "NFAPPROX_PRESET_PATH";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub name: String,
    pub min_poly: Vec<i64>,
    pub basis: BasisConfig,
    #[serde(default)]
    pub fundamental_units: Vec<Vec<i64>>,
    pub torsion: TorsionConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisConfig {
    Power(String),
    Explicit(ExplicitBasis),
}

/// Basis `e_k = (Σ_t power_coords[k][t] x^t) / denominators[k]` with
/// `e_i e_j = Σ_k mult_table[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitBasis {
    pub mult_table: Vec<Vec<Vec<i64>>>,
    pub power_coords: Vec<Vec<i64>>,
    pub denominators: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionConfig {
    pub order: u32,
    pub gen: Vec<i64>,
}

const BUILTIN: &[(&str, &str)] = &[
    ("Q", include_str!("../presets/Q.json")),
    ("Qi", include_str!("../presets/Qi.json")),
    ("Qsqrt2", include_str!("../presets/Qsqrt2.json")),
    ("Qsqrt5", include_str!("../presets/Qsqrt5.json")),
    ("Qcubic", include_str!("../presets/Qcubic.json")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn parse_config(text: &str, origin: &str) -> Result<FieldConfig> {
    serde_json::from_str(text).map_err(|e| {
        Error::Preset(format!("{origin}: line {}, column {}: {e}", e.line(), e.column()))
    })
}

fn builtin_config(name: &str) -> Option<FieldConfig> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_config(text, n).expect("built-in preset parses"))
}

/// Builds a built-in preset by name.
pub fn builtin(name: &str) -> Result<FieldHandle> {
    let cfg = builtin_config(name)
        .ok_or_else(|| Error::Preset(format!("no built-in preset named {name:?}")))?;
    FieldHandle::build(&cfg)
}

fn search_dirs() -> Vec<PathBuf> {
    std::env::var_os(PRESET_PATH_ENV)
        .map(|v| std::env::split_paths(&v).collect())
        .unwrap_or_default()
}

/// Resolves a preset given by file path, by name on the search path, or by
/// built-in name, in that order.
pub fn resolve_config(name_or_path: &str) -> Result<FieldConfig> {
    let path = Path::new(name_or_path);
    if name_or_path.ends_with(".json") || path.components().count() > 1 {
        return load_file(path);
    }
    for dir in search_dirs() {
        let candidate = dir.join(format!("{name_or_path}.json"));
        if candidate.is_file() {
            return load_file(&candidate);
        }
    }
    builtin_config(name_or_path).ok_or_else(|| {
        Error::Preset(format!(
            "unknown preset {name_or_path:?}; built-in presets are {}",
            builtin_names().join(", ")
        ))
    })
}

fn load_file(path: &Path) -> Result<FieldConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Preset(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

pub fn load_field(name_or_path: &str) -> Result<FieldHandle> {
    FieldHandle::build(&resolve_config(name_or_path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub degree: usize,
    pub r1: usize,
    pub r2: usize,
    pub unit_rank: usize,
}

/// Built-in presets followed by any extra presets on the search path.
pub fn catalog() -> Result<Vec<CatalogEntry>> {
    let mut names: Vec<String> = builtin_names().iter().map(|s| s.to_string()).collect();
    for dir in search_dirs() {
        if let Ok(entries) = std::fs::read_dir(&dir) {
            let mut extra: Vec<String> = entries
                .filter_map(|e| e.ok())
                .filter_map(|e| {
                    let p = e.path();
                    (p.extension()? == "json").then(|| p.file_stem()?.to_str().map(String::from))?
                })
                .filter(|n| !names.contains(n))
                .collect();
            extra.sort();
            names.extend(extra);
        }
    }
    names
        .iter()
        .map(|n| {
            let k = load_field(n)?;
            let (r1, r2) = k.signature();
            Ok(CatalogEntry {
                name: n.clone(),
                degree: k.degree(),
                r1,
                r2,
                unit_rank: k.unit_rank(),
            })
        })
        .collect()
}
