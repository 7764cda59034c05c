//! Run configuration: defaults, a TOML file, then dotted overrides.

use std::path::{Path, PathBuf};

use cogtrack::ingest::{IngestOptions, TrackFormat};
use cogtrack::learn::{ModelKind, ModelSpec};
use cogtrack::model::{FeatureSubset, DEFAULT_MOCA_THRESHOLD};
use cogtrack::pipeline::FeatureConfig;
use cogtrack::simulate::{CohortProfile, NoiseModel, StudyOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    pub tracks: PathBuf,
    pub manifest: PathBuf,
    /// Floor plan file; the built-in facility when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floorplan: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            tracks: PathBuf::from("out/tracks.jsonl"),
            manifest: PathBuf::from("out/manifest.toml"),
            floorplan: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    /// Cohorts whose mean MoCA score is above this are high functioning.
    pub moca_threshold: f64,
}

impl Default for Labels {
    fn default() -> Self {
        Labels {
            moca_threshold: DEFAULT_MOCA_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub subsets: Vec<FeatureSubset>,
    pub global_scaling: bool,
    pub models: Vec<ModelSpec>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            subsets: FeatureSubset::ALL.to_vec(),
            global_scaling: false,
            models: ModelKind::REPORTED.iter().map(|&k| ModelSpec::default_for(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceConfig {
    pub subsets: Vec<FeatureSubset>,
    pub repeats: usize,
    pub model: ModelSpec,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        ImportanceConfig {
            subsets: FeatureSubset::ALL.to_vec(),
            repeats: 10,
            model: ModelSpec::default_for(ModelKind::SvmRbf),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub study: StudyOptions,
    pub high: CohortProfile,
    pub low: CohortProfile,
    pub noise: NoiseModel,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            study: StudyOptions::default(),
            high: CohortProfile::default_high(),
            low: CohortProfile::default_low(),
            noise: NoiseModel::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub ingest: IngestOptions,
    pub labels: Labels,
    pub features: FeatureConfig,
    pub classify: ClassifyConfig,
    pub importance: ImportanceConfig,
    pub simulate: SimulateConfig,
}

impl RunConfig {
    /// Build from defaults, an optional TOML document and `key.path=value`
    /// overrides, applied in that order.
    pub fn resolve(file: Option<&str>, overrides: &[String]) -> Result<Self, CliError> {
        let mut tree = Value::try_from(RunConfig::default())
            .map_err(|e| CliError::Internal(format!("default config does not serialise: {e}")))?;
        if let Some(text) = file {
            let user: Table = text.parse().map_err(|e| CliError::Validation(format!("config: {e}")))?;
            merge(&mut tree, Value::Table(user));
        }
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("override {o:?} is not key=value")))?;
            set_path(&mut tree, key.trim(), parse_value(raw.trim()))?;
        }
        let config: RunConfig = tree
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {}", e.message())))?;
        let back = Value::try_from(&config).map_err(|e| CliError::Internal(e.to_string()))?;
        if let Some(key) = unknown_key(&tree, &back, "") {
            return Err(CliError::Validation(format!("config: unknown key {key}")));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::missing(p, e))?),
            None => None,
        };
        Self::resolve(text.as_deref(), overrides)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        let m = &self.features.movement;
        if !(m.split_deg > 0.0 && m.split_deg < 180.0) {
            return bad(format!("split_deg must be in (0, 180), got {}", m.split_deg));
        }
        if !(m.stationary_m >= 0.0) {
            return bad("movement stationary_m must be non-negative".into());
        }
        if m.entropy_m == 0 || !(m.entropy_r > 0.0) {
            return bad("entropy m must be >= 1 and r > 0".into());
        }
        let s = &self.features.social;
        if !(s.d_max > 0.0) || !(s.facing_deg > 0.0 && s.facing_deg <= 180.0) || s.min_persist_s == 0 {
            return bad("social parameters need d_max > 0, facing_deg in (0, 180] and min_persist_s >= 1".into());
        }
        if !self.labels.moca_threshold.is_finite() {
            return bad("moca_threshold must be finite".into());
        }
        if self.classify.models.is_empty() || self.classify.subsets.is_empty() {
            return bad("classify needs at least one model and one subset".into());
        }
        for spec in self.classify.models.iter().chain([&self.importance.model]) {
            spec.validate().map_err(CliError::from)?;
        }
        self.simulate.study.validate()?;
        self.simulate.high.validate()?;
        self.simulate.low.validate()?;
        self.simulate.noise.validate()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn track_format(&self) -> TrackFormat {
        TrackFormat::from_path(&self.paths.tracks)
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.paths.output_dir.join(name)
    }
}

/// Deep-merge `top` into `base`. Tables merge key by key unless their
/// `kind` tags differ, in which case the table is replaced.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Table(b), Value::Table(t)) => {
            let retag = matches!((b.get("kind"), t.get("kind")), (Some(x), Some(y)) if x != y);
            if retag {
                *b = t;
                return;
            }
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn set_path(tree: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Validation(format!("bad override key {key:?}")));
    }
    let mut node = tree;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::Validation(format!("override {key:?} descends into a non-table")))?;
        node = table.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| CliError::Validation(format!("override {key:?} descends into a non-table")))?;
    let last = parts[parts.len() - 1].to_string();
    match table.get_mut(&last) {
        Some(slot) => merge(slot, value),
        None => {
            table.insert(last, value);
        }
    }
    Ok(())
}

/// A TOML literal, or a bare string when it does not parse as one.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn unknown_key(given: &Value, known: &Value, prefix: &str) -> Option<String> {
    let (Value::Table(g), Value::Table(k)) = (given, known) else {
        return None;
    };
    for (key, v) in g {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match k.get(key) {
            Some(kv) => {
                if let Some(bad) = unknown_key(v, kv, &path) {
                    return Some(bad);
                }
            }
            None => return Some(path),
        }
    }
    None
}
