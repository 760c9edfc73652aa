use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::corpus::DatasetKind;
use crate::llm::{AuthStyle, PriceTable};
use crate::prompts::PromptKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Live,
    Replay,
    #[default]
    Stub,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Ok(BackendKind::Live),
            "replay" => Ok(BackendKind::Replay),
            "stub" => Ok(BackendKind::Stub),
            _ => Err(format!("unknown backend `{s}` (live, replay or stub)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Dev,
    Test,
}

impl Split {
    pub fn id(self) -> &'static str {
        match self {
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    /// Chat-completions URL (live only).
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub auth: AuthStyle,
    /// Environment variable holding the credential.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    /// Fixture store directory. Required for replay; live runs default to a
    /// store inside the run directory.
    #[serde(default)]
    pub store: Option<PathBuf>,
    /// JSON list of stub rules.
    #[serde(default)]
    pub stub_script: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub max_in_flight: Option<usize>,
    #[serde(default)]
    pub requests_per_minute: Option<usize>,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
}

fn default_key_env() -> String {
    "CODEPROMPT_API_KEY".into()
}
fn default_timeout() -> u64 {
    120
}
fn default_attempts() -> u32 {
    5
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Stub,
            endpoint: None,
            auth: AuthStyle::default(),
            api_key_env: default_key_env(),
            store: None,
            stub_script: None,
            timeout_secs: default_timeout(),
            max_in_flight: None,
            requests_per_minute: None,
            max_attempts: default_attempts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default)]
    pub enabled: bool,
    /// Overrides of the per-dataset instance cap.
    #[serde(default)]
    pub max_instances: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model_id: String,
    #[serde(default)]
    pub backend: BackendConfig,
    /// Holds `<dataset>/{train,dev,test}.jsonl`.
    pub data_dir: PathBuf,
    #[serde(default)]
    pub split: Split,
    pub datasets: Vec<DatasetKind>,
    #[serde(default = "default_kinds", with = "kind_ids")]
    pub kinds: Vec<PromptKind>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub n_per_class: usize,
    /// Evaluate only the first N instances of each dataset.
    #[serde(default)]
    pub limit: Option<usize>,
    /// Hand-written translation demonstrations per dataset; unset entries
    /// follow [`default_translation_demos`].
    #[serde(default)]
    pub translation_demos: BTreeMap<DatasetKind, usize>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "half")]
    pub span_threshold: f64,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub prices: PriceTable,
    #[serde(default)]
    pub templates_dir: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
}

fn default_kinds() -> Vec<PromptKind> {
    vec![PromptKind::Text, PromptKind::CodeAnswer]
}
fn default_seeds() -> Vec<u64> {
    vec![0, 1]
}
fn one() -> usize {
    1
}
fn half() -> f64 {
    0.5
}
fn default_out() -> PathBuf {
    "out".into()
}

mod kind_ids {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::prompts::PromptKind;

    pub fn serialize<S: Serializer>(kinds: &[PromptKind], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(kinds.iter().map(|k| k.id()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<PromptKind>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Translation demonstrations per dataset and model family (GPT, Mixtral,
/// Mistral). Models outside these families get the GPT column.
pub fn default_translation_demos(model_id: &str, dataset: DatasetKind) -> usize {
    let m = model_id.to_ascii_lowercase();
    let col = if m.contains("mixtral") {
        1
    } else if m.contains("mistral") {
        2
    } else {
        0
    };
    let row = match dataset {
        DatasetKind::CondQa => [4, 4, 4],
        DatasetKind::Sharc => [5, 4, 4],
        DatasetKind::Bgqa1 => [4, 3, 3],
        DatasetKind::Bgqa2 | DatasetKind::Bgqa3 => [4, 3, 4],
    };
    row[col]
}

impl ExperimentConfig {
    /// A stub-backed configuration over `data_dir` with every default.
    pub fn new(model_id: impl Into<String>, data_dir: impl Into<PathBuf>, datasets: Vec<DatasetKind>) -> Self {
        ExperimentConfig {
            model_id: model_id.into(),
            backend: BackendConfig::default(),
            data_dir: data_dir.into(),
            split: Split::Dev,
            datasets,
            kinds: default_kinds(),
            seeds: default_seeds(),
            n_per_class: 1,
            limit: None,
            translation_demos: BTreeMap::new(),
            strict: false,
            span_threshold: 0.5,
            probe: ProbeConfig::default(),
            prices: PriceTable::default(),
            templates_dir: None,
            out_dir: default_out(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    /// Reads a config file; relative paths in it are taken from the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        fix(&mut self.out_dir);
        for p in [
            &mut self.backend.store,
            &mut self.backend.stub_script,
            &mut self.templates_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn translation_demo_count(&self, dataset: DatasetKind) -> usize {
        self.translation_demos
            .get(&dataset)
            .copied()
            .unwrap_or_else(|| default_translation_demos(&self.model_id, dataset))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty".into());
        }
        if self.datasets.is_empty() {
            return bad("no datasets".into());
        }
        if self.kinds.is_empty() {
            return bad("no prompt kinds".into());
        }
        if let Some(k) = self.kinds.iter().find(|k| !PromptKind::RUNNABLE.contains(k)) {
            return bad(format!("`{k}` is not a runnable prompt kind"));
        }
        if self.seeds.is_empty() {
            return bad("no seeds".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("duplicate seeds".into());
        }
        if self.n_per_class == 0 {
            return bad("n_per_class must be at least 1".into());
        }
        if self.limit == Some(0) {
            return bad("limit must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.span_threshold) {
            return bad(format!("span_threshold {} is outside [0, 1]", self.span_threshold));
        }
        if let Some((d, _)) = self.translation_demos.iter().find(|(_, n)| **n == 0) {
            return bad(format!("translation_demos for {d} must be at least 1"));
        }
        self.prices
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        if !self.prices.models.is_empty() && !self.prices.models.contains_key(&self.model_id) {
            return bad(format!("price table has no entry for `{}`", self.model_id));
        }
        match self.backend.kind {
            BackendKind::Live if self.backend.endpoint.as_deref().is_none_or(|e| e.trim().is_empty()) => {
                bad("live backend needs an endpoint".into())
            }
            BackendKind::Replay if self.backend.store.is_none() => bad("replay backend needs a store".into()),
            _ => Ok(()),
        }
    }

    /// The configuration with machine-specific paths blanked, as recorded in
    /// the manifest.
    pub fn portable(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.data_dir = PathBuf::new();
        c.out_dir = PathBuf::new();
        c.templates_dir = c.templates_dir.map(|_| PathBuf::from("<custom>"));
        c.backend.store = c.backend.store.map(|_| PathBuf::from("<store>"));
        c.backend.stub_script = c.backend.stub_script.map(|_| PathBuf::from("<script>"));
        serde_json::to_value(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(&self.portable()).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
