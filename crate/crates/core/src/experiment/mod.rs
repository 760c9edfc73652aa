//! Experiment runner: configuration, the (dataset, kind, seed) cell loop,
//! probe suites, the run manifest, and report rendering over manifests.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chain::{
    self, key_entities_bgqa, key_entities_code, key_entities_scenario, run_probe_session, select_probe_instances,
    ChainEnv, ProbeBudget, ProbeResult, ProbeSession, Status, Transcript, TRANSCRIPT_SCHEMA,
};
use crate::corpus::{self, CorpusError, DatasetKind, Instance};
use crate::eval::{
    self, aggregate_runs, aligned, CellKey, CostRow, EvalError, EvalReport, MemoryErrorRow, Summary,
};
use crate::llm::{
    estimate_cost, CallCounts, FixtureStore, HttpBackend, HttpConfig, LlmClient, LlmError, Policy, RetryPolicy,
    StubBackend, Throttle,
};
use crate::prompts::{ProbeMode, PromptError, PromptKind, Templates};

pub use config::*;

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0} is locked by another run; delete the lock file if that run is gone")]
    Locked(PathBuf),
    #[error("{path}: manifest schema {found} is not supported (expected {expected})")]
    Schema { path: PathBuf, found: u32, expected: u32 },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), ExperimentError> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).expect("record serializes");
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| ExperimentError::Json {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

struct RunLock(PathBuf);

impl RunLock {
    fn acquire(dir: &Path) -> Result<Self, ExperimentError> {
        let path = dir.join("lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RunLock(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(ExperimentError::Locked(dir.to_path_buf())),
            Err(e) => Err(io_err(&path)(e)),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStatus {
    pub id: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub seed: u64,
    /// Paths are relative to the run directory.
    pub transcripts: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    pub instances: Vec<InstanceStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headline: Option<f64>,
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub mode: ProbeMode,
    pub seed: u64,
    pub file: String,
    pub instances: usize,
    pub probes: usize,
    pub diagnostics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub transcript_schema: u32,
    pub report_schema: u32,
    pub run_id: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub template_version: String,
    pub template_hash: String,
    pub template_files: BTreeMap<String, String>,
    /// Content digests of the dataset files and stub script that were read.
    pub inputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub store_digest: Option<String>,
    pub cells: Vec<CellRecord>,
    #[serde(default)]
    pub probes: Vec<ProbeRecord>,
    pub summary: String,
    pub total_cost: f64,
    /// Digest of this manifest with this field left out.
    pub manifest_hash: String,
}

impl RunManifest {
    pub fn compute_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v.as_object_mut().expect("object").remove("manifest_hash");
        sha_hex(&serde_json::to_vec(&v).expect("manifest serializes"))
    }
}

/// Wall-clock and call accounting, kept out of the manifest so the manifest
/// stays byte-identical across replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub started_unix_ms: u128,
    pub wall_clock_ms: u128,
    pub calls: CallCounts,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub timing: RunTiming,
}

fn cell_stem(dataset: DatasetKind, kind: PromptKind, seed: u64) -> String {
    format!("{}__{}__seed{}", dataset.id(), kind.id(), seed)
}

/// Builds the client the configuration asks for. Live runs without a store
/// record into `fallback_store`.
pub fn build_client(config: &ExperimentConfig, fallback_store: &Path) -> Result<LlmClient, ExperimentError> {
    let b = &config.backend;
    let store_dir = match (b.kind, &b.store) {
        (_, Some(s)) => Some(s.clone()),
        (BackendKind::Live, None) => Some(fallback_store.to_path_buf()),
        _ => None,
    };
    let policy = match b.kind {
        BackendKind::Replay => Policy::ReplayOnly,
        _ => Policy::CacheFirst,
    };
    let mut client = LlmClient::new(policy)
        .with_retry(RetryPolicy {
            max_attempts: b.max_attempts.max(1),
            ..RetryPolicy::default()
        })
        .with_throttle(Throttle::new(b.max_in_flight, b.requests_per_minute));
    if let Some(dir) = store_dir {
        if b.kind == BackendKind::Replay && !dir.is_dir() {
            return Err(ExperimentError::Config(format!("store {} does not exist", dir.display())));
        }
        client = client.with_store(Arc::new(FixtureStore::open(dir)?));
    }
    match b.kind {
        BackendKind::Live => {
            let key = std::env::var(&b.api_key_env).ok().filter(|k| !k.is_empty());
            if key.is_none() {
                return Err(ExperimentError::Config(format!("environment variable {} is not set", b.api_key_env)));
            }
            let http = HttpConfig {
                endpoint: b.endpoint.clone().unwrap_or_default(),
                auth: b.auth,
                timeout_secs: b.timeout_secs,
            };
            client = client.with_backend(Arc::new(HttpBackend::new(http, key)));
        }
        BackendKind::Stub => {
            let stub = match &b.stub_script {
                Some(p) => StubBackend::from_script(&fs::read_to_string(p).map_err(io_err(p))?)?,
                None => StubBackend::new(),
            };
            client = client.with_backend(Arc::new(stub));
        }
        BackendKind::Replay => {}
    }
    Ok(client)
}

fn load_split(
    config: &ExperimentConfig,
    dataset: DatasetKind,
    split: &str,
    inputs: &mut BTreeMap<String, String>,
) -> Result<Vec<Instance>, ExperimentError> {
    let rel = format!("{}/{split}.jsonl", dataset.id());
    let path = config.data_dir.join(&rel);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    inputs.insert(rel, sha_hex(text.as_bytes()));
    let instances = corpus::load_records(dataset, &text)?;
    if dataset == DatasetKind::CondQa {
        instances.iter().map(corpus::with_oracle_document).collect::<Result<_, _>>().map_err(Into::into)
    } else {
        Ok(instances)
    }
}

fn status_label(s: &Status) -> String {
    match s {
        Status::Ok => "ok".into(),
        Status::Skipped { .. } => "skipped".into(),
        Status::FailedTranslation { .. } => "failed_translation".into(),
        Status::Failed { category, .. } => format!("failed:{category}"),
    }
}

fn cost_of(config: &ExperimentConfig, exchanges: &[crate::llm::LlmExchange]) -> Result<f64, ExperimentError> {
    if config.prices.models.is_empty() {
        Ok(0.0)
    } else {
        Ok(estimate_cost(exchanges, &config.prices)?)
    }
}

struct Loaded {
    train: Vec<Instance>,
    eval: Vec<Instance>,
}

/// Runs every (dataset, kind, seed) cell of `config`, then the probe suite if
/// enabled, and writes `<out_dir>/<run id>/`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    let started = Instant::now();
    let started_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    config.validate()?;
    let config_hash = config.hash();
    let run_id = config_hash[..12].to_string();
    let dir = config.out_dir.join(&run_id);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let _lock = RunLock::acquire(&dir)?;

    let templates = match &config.templates_dir {
        Some(d) => {
            let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Templates::from_dir(&format!("custom:{name}"), d)?
        }
        None => Templates::builtin(),
    };
    let mut inputs = BTreeMap::new();
    if let Some(p) = &config.backend.stub_script {
        inputs.insert("stub_script".into(), sha_hex(&fs::read(p).map_err(io_err(p))?));
    }
    let mut data: BTreeMap<DatasetKind, Loaded> = BTreeMap::new();
    for &d in &config.datasets {
        let train = load_split(config, d, "train", &mut inputs)?;
        let mut eval = load_split(config, d, config.split.id(), &mut inputs)?;
        if let Some(n) = config.limit {
            eval.truncate(n);
        }
        data.insert(d, Loaded { train, eval });
    }
    let client = build_client(config, &dir.join("store"))?;
    let env = ChainEnv {
        client: &client,
        templates: &templates,
        model_id: config.model_id.clone(),
        strict: config.strict,
    };

    let mut cells = Vec::new();
    let mut reports = Vec::new();
    let mut transcripts_by_cell: BTreeMap<(DatasetKind, PromptKind, u64), Vec<Transcript>> = BTreeMap::new();
    for &d in &config.datasets {
        let loaded = &data[&d];
        for &seed in &config.seeds {
            for &kind in &config.kinds {
                let stem = cell_stem(d, kind, seed);
                let demos = corpus::sample_demonstrations(&loaded.train, seed, config.n_per_class)?;
                tracing::info!(dataset = %d, kind = %kind, seed, "cell");
                let (transcripts, prep_exchanges, error) =
                    match chain::prepare_cell(&env, d, kind, seed, demos, config.translation_demo_count(d)) {
                        Ok(cell) => {
                            let ts: Vec<Transcript> = loaded
                                .eval
                                .par_iter()
                                .map(|i| chain::run_instance(&env, &cell, i))
                                .collect();
                            (ts, cell.exchanges, None)
                        }
                        Err(e) => {
                            tracing::warn!(dataset = %d, kind = %kind, seed, error = %e, "cell preparation failed");
                            (Vec::new(), Vec::new(), Some(format!("{}: {e}", e.category())))
                        }
                    };
                let transcripts_rel = format!("transcripts/{stem}.jsonl");
                write_jsonl(&dir.join(&transcripts_rel), &transcripts)?;
                let mut exchanges = prep_exchanges;
                exchanges.extend(transcripts.iter().flat_map(|t| t.exchanges.iter().cloned()));
                let cost = cost_of(config, &exchanges)?;
                let golds: BTreeMap<String, Instance> =
                    loaded.eval.iter().map(|i| (i.id.clone(), i.clone())).collect();
                let key = CellKey {
                    model: config.model_id.clone(),
                    dataset: d,
                    kind,
                    seed,
                };
                let mut record = CellRecord {
                    dataset: d,
                    kind,
                    seed,
                    transcripts: transcripts_rel,
                    report: None,
                    instances: transcripts
                        .iter()
                        .map(|t| InstanceStatus {
                            id: t.instance_id.clone(),
                            status: status_label(&t.status),
                        })
                        .collect(),
                    headline: None,
                    cost,
                    error,
                };
                match eval::evaluate(&key, &transcripts, &golds, config.span_threshold, cost) {
                    Ok(r) => {
                        let rel = format!("reports/{stem}.json");
                        write_atomic(&dir.join(&rel), &pretty(&r))?;
                        if let Some(m) = &r.confusion {
                            write_atomic(&dir.join(format!("reports/{stem}.confusion.csv")), m.to_csv().as_bytes())?;
                        }
                        record.report = Some(rel);
                        record.headline = Some(r.headline);
                        reports.push(r);
                    }
                    Err(EvalError::Empty) => {}
                    Err(e) => return Err(e.into()),
                }
                cells.push(record);
                transcripts_by_cell.insert((d, kind, seed), transcripts);
            }
        }
    }

    let mut probes = Vec::new();
    if config.probe.enabled {
        for r in &reports {
            let mode = match r.kind {
                PromptKind::Text => ProbeMode::Text,
                PromptKind::CodeAnswer => ProbeMode::Code,
                _ => continue,
            };
            let transcripts = &transcripts_by_cell[&(r.dataset, r.kind, r.seed)];
            probes.push(probe_cell(config, &env, &dir, r, transcripts, &data[&r.dataset].eval, mode)?);
        }
    }

    let total_cost = cells.iter().map(|c| c.cost).sum();
    let summary_rel = "reports/summary.json".to_string();
    let summary = if reports.is_empty() {
        Summary::default()
    } else {
        aggregate_runs(&reports)?
    };
    write_atomic(&dir.join(&summary_rel), &pretty(&summary))?;

    if client.policy() != Policy::ReplayOnly {
        if let Some(store) = client.store() {
            store.compact()?;
        }
    }
    let mut manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        transcript_schema: TRANSCRIPT_SCHEMA,
        report_schema: eval::REPORT_SCHEMA,
        run_id,
        config_hash,
        config: config.portable(),
        template_version: templates.version().to_string(),
        template_hash: templates.hash(),
        template_files: templates.file_hashes(),
        inputs,
        store_digest: client.store().map(|s| s.digest()),
        cells,
        probes,
        summary: summary_rel,
        total_cost,
        manifest_hash: String::new(),
    };
    manifest.manifest_hash = manifest.compute_hash();

    let rendered = render_report(&collect_report(&dir, &manifest)?);
    write_atomic(&dir.join("reports/summary.txt"), rendered.as_bytes())?;
    write_atomic(&dir.join("manifest.json"), &pretty(&manifest))?;
    let timing = RunTiming {
        started_unix_ms,
        wall_clock_ms: started.elapsed().as_millis(),
        calls: client.counts(),
    };
    write_atomic(&dir.join("timing.json"), &pretty(&timing))?;
    Ok(RunOutcome { dir, manifest, timing })
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("value serializes");
    out.push(b'\n');
    out
}

fn probe_cell(
    config: &ExperimentConfig,
    env: &ChainEnv<'_>,
    dir: &Path,
    report: &EvalReport,
    transcripts: &[Transcript],
    instances: &[Instance],
    mode: ProbeMode,
) -> Result<ProbeRecord, ExperimentError> {
    let mut budget = ProbeBudget::for_dataset(report.dataset);
    if let Some(n) = config.probe.max_instances {
        budget.max_instances = n;
    }
    let by_id: BTreeMap<&str, &Transcript> = transcripts.iter().map(|t| (t.instance_id.as_str(), t)).collect();
    let inst: BTreeMap<&str, &Instance> = instances.iter().map(|i| (i.id.as_str(), i)).collect();
    let candidates: Vec<(String, bool)> = report
        .scores
        .iter()
        .filter(|s| by_id.get(s.instance_id.as_str()).is_some_and(|t| t.status.is_ok()))
        .map(|s| (s.instance_id.clone(), s.correct))
        .collect();
    let correct: BTreeMap<&str, bool> = candidates.iter().map(|(i, c)| (i.as_str(), *c)).collect();
    let chosen = select_probe_instances(&candidates, &budget, report.seed);
    let sessions: Vec<ProbeSession> = chosen
        .par_iter()
        .map(|id| {
            let t = by_id[id.as_str()];
            let instance = inst[id.as_str()];
            let mut pre = Vec::new();
            let entities = match mode {
                ProbeMode::Text if instance.dataset.is_bgqa() => Ok(key_entities_bgqa(instance)),
                ProbeMode::Text => key_entities_scenario(env, instance, &mut pre),
                ProbeMode::Code => Ok(t.generated_code.as_ref().map(key_entities_code).unwrap_or_default()),
            };
            let result = entities.and_then(|e| run_probe_session(env, t, &e, mode, &budget, correct[id.as_str()]));
            match result {
                Ok(mut s) => {
                    pre.append(&mut s.exchanges);
                    s.exchanges = pre;
                    s
                }
                Err(e) => ProbeSession {
                    instance_id: id.clone(),
                    results: Vec::new(),
                    diagnostic: Some(format!("{}: {e}", e.category())),
                    exchanges: pre,
                },
            }
        })
        .collect();
    let file = format!("probes/{}.jsonl", cell_stem(report.dataset, report.kind, report.seed));
    write_jsonl(&dir.join(&file), &sessions)?;
    Ok(ProbeRecord {
        dataset: report.dataset,
        kind: report.kind,
        mode,
        seed: report.seed,
        file,
        instances: sessions.len(),
        probes: sessions.iter().map(|s| s.results.len()).sum(),
        diagnostics: sessions.iter().filter(|s| s.diagnostic.is_some()).count(),
    })
}

/// Everything the report tables are built from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportData {
    pub reports: Vec<EvalReport>,
    pub summary: Summary,
    pub memory_errors: Vec<MemoryErrorRow>,
    pub costs: Vec<CostRow>,
}

fn collect_report(dir: &Path, manifest: &RunManifest) -> Result<ReportData, ExperimentError> {
    collect_many(&[(dir.to_path_buf(), manifest.clone())])
}

fn collect_many(runs: &[(PathBuf, RunManifest)]) -> Result<ReportData, ExperimentError> {
    let mut reports = Vec::new();
    let mut probe_sets = Vec::new();
    for (dir, m) in runs {
        for c in &m.cells {
            if let Some(rel) = &c.report {
                reports.push(read_json::<EvalReport>(&dir.join(rel))?);
            }
        }
        for p in &m.probes {
            let sessions: Vec<ProbeSession> = read_jsonl(&dir.join(&p.file))?;
            let results: Vec<ProbeResult> = sessions.into_iter().flat_map(|s| s.results).collect();
            probe_sets.push((p.dataset, p.mode, results));
        }
    }
    let summary = if reports.is_empty() {
        Summary::default()
    } else {
        aggregate_runs(&reports)?
    };
    let mut cost: BTreeMap<(DatasetKind, PromptKind), (usize, f64)> = BTreeMap::new();
    for r in &reports {
        let e = cost.entry((r.dataset, r.kind)).or_default();
        e.0 += r.scores.len();
        e.1 += r.cost;
    }
    let costs = cost
        .into_iter()
        .map(|((dataset, kind), (questions, total))| CostRow {
            dataset,
            kind,
            questions,
            total,
        })
        .collect();
    Ok(ReportData {
        memory_errors: eval::memory_error_rows(&probe_sets),
        reports,
        summary,
        costs,
    })
}

/// Loads manifests (files or run directories) and gathers their reports.
pub fn load_report(paths: &[PathBuf]) -> Result<ReportData, ExperimentError> {
    let mut runs = Vec::new();
    for p in paths {
        let file = if p.is_dir() { p.join("manifest.json") } else { p.clone() };
        let v: serde_json::Value = read_json(&file)?;
        let found = v.get("schema").and_then(|s| s.as_u64()).unwrap_or(0) as u32;
        if found != MANIFEST_SCHEMA {
            return Err(ExperimentError::Schema {
                path: file,
                found,
                expected: MANIFEST_SCHEMA,
            });
        }
        let m: RunManifest = serde_json::from_value(v).map_err(|e| ExperimentError::Json {
            path: file.clone(),
            message: e.to_string(),
        })?;
        let dir = file.parent().unwrap_or(Path::new(".")).to_path_buf();
        runs.push((dir, m));
    }
    collect_many(&runs)
}

/// Score grid, ablation gaps, memory errors and per-question cost as aligned
/// text; sections without data are left out.
pub fn render_report(data: &ReportData) -> String {
    let mut out = String::new();
    let (h, rows) = eval::score_grid(&data.summary);
    out.push_str("Scores (F1, points)\n");
    out.push_str(&aligned(&h, &rows));
    let (h, rows) = eval::ablation_grid(&data.summary);
    if !rows.is_empty() {
        out.push_str("\nAblations (ablation - code)\n");
        out.push_str(&aligned(&h, &rows));
    }
    if data.memory_errors.iter().any(|r| r.probes > 0) {
        let (h, rows) = eval::memory_error_grid(&data.memory_errors);
        out.push_str("\nMemory errors (%)\n");
        out.push_str(&aligned(&h, &rows));
    }
    if data.costs.iter().any(|c| c.total > 0.0) {
        let (h, rows) = eval::cost_grid(&data.costs);
        out.push_str("\nCost\n");
        out.push_str(&aligned(&h, &rows));
    }
    out
}

/// Writes the CSV forms of the report tables into `dir`.
pub fn write_report_csv(data: &ReportData, dir: &Path) -> Result<(), ExperimentError> {
    let (h, rows) = eval::score_grid(&data.summary);
    write_atomic(&dir.join("scores.csv"), eval::csv(&h, &rows).as_bytes())?;
    let (h, rows) = eval::ablation_grid(&data.summary);
    write_atomic(&dir.join("ablations.csv"), eval::csv(&h, &rows).as_bytes())?;
    let (h, rows) = eval::memory_error_grid(&data.memory_errors);
    write_atomic(&dir.join("memory_errors.csv"), eval::csv(&h, &rows).as_bytes())?;
    let (h, rows) = eval::cost_grid(&data.costs);
    write_atomic(&dir.join("costs.csv"), eval::csv(&h, &rows).as_bytes())
}
