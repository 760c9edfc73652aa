use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use codeprompt::corpus::DatasetKind;
use codeprompt::experiment::{
    load_report, render_report, run_experiment, write_report_csv, BackendKind, ExperimentConfig, RunOutcome, Split,
};
use codeprompt::prompts::PromptKind;
use codeprompt::pseudocode::{complexity_stats, lint, parse, Severity};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "codeprompt", version, about = "Text vs. code prompting experiments over conditional-reasoning QA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured (dataset, kind, seed) cells.
    Run(RunArgs),
    /// Run code prompts together with the ablations.
    Ablate(RunArgs),
    /// Run text and code prompts, then the variable-tracking probes.
    Probe(RunArgs),
    /// Merge run manifests into score, ablation, memory-error and cost tables.
    Report {
        /// Manifest files or run directories.
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Also write the tables as CSV into this directory.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Parse and lint pseudo-code files and print dialect statistics.
    ValidateCode {
        /// Files, or directories searched for *.py files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Warn when no variable carries the question marker.
        #[arg(long)]
        require_question: bool,
    },
    /// Run against a live or stub backend and keep every response in a store.
    RecordFixtures {
        #[command(flatten)]
        run: RunArgs,
        /// Store directory to record into.
        #[arg(long)]
        store: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model id when no config is given.
    #[arg(long)]
    model: Option<String>,
    /// Dataset directory when no config is given.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long = "dataset")]
    datasets: Vec<DatasetKind>,
    #[arg(long = "kind")]
    kinds: Vec<PromptKind>,
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    backend: Option<BackendKind>,
    /// Chat-completions URL for the live backend.
    #[arg(long, env = "CODEPROMPT_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long)]
    split: Option<String>,
    /// Evaluate only the first N instances of each dataset.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => {
                let (Some(model), Some(data)) = (&self.model, &self.data_dir) else {
                    bail!("either --config or both --model and --data-dir are required");
                };
                if self.datasets.is_empty() {
                    bail!("--dataset is required without --config");
                }
                ExperimentConfig::new(model.clone(), data.clone(), self.datasets.clone())
            }
        };
        if !self.datasets.is_empty() {
            cfg.datasets = self.datasets.clone();
        }
        if !self.kinds.is_empty() {
            cfg.kinds = self.kinds.clone();
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(b) = self.backend {
            cfg.backend.kind = b;
        }
        if let Some(e) = &self.endpoint {
            cfg.backend.endpoint = Some(e.clone());
        }
        if let Some(s) = &self.split {
            cfg.split = match s.as_str() {
                "dev" => Split::Dev,
                "test" => Split::Test,
                other => bail!("unknown split `{other}` (dev or test)"),
            };
        }
        if let Some(n) = self.limit {
            cfg.limit = Some(n);
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        Ok(cfg)
    }
}

const ABLATIONS: [PromptKind; 6] = [
    PromptKind::CodeAnswer,
    PromptKind::AtomicStatements,
    PromptKind::BackTranslatedCode,
    PromptKind::AnonymizedCode,
    PromptKind::RandomCode,
    PromptKind::NoComments,
];

fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let out = run_experiment(cfg)?;
    let summary = std::fs::read_to_string(out.dir.join("reports/summary.txt")).unwrap_or_default();
    print!("{summary}");
    let failed: usize = out
        .manifest
        .cells
        .iter()
        .flat_map(|c| &c.instances)
        .filter(|i| i.status != "ok" && i.status != "skipped")
        .count();
    println!();
    println!("run:       {}", out.dir.display());
    println!("manifest:  {}", out.manifest.manifest_hash);
    println!("cost:      {:.4}", out.manifest.total_cost);
    println!(
        "calls:     {} live, {} cached, {} replayed, {} retries",
        out.timing.calls.live_calls,
        out.timing.calls.cache_hits,
        out.timing.calls.replay_hits,
        out.timing.calls.retries
    );
    if failed > 0 {
        println!("failed instances: {failed} (see transcripts)");
    }
    Ok(out)
}

fn code_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for e in entries {
            if e.is_dir() || e.extension().is_some_and(|x| x == "py") {
                code_files(&e, out)?;
            }
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

fn validate_code(paths: &[PathBuf], require_question: bool) -> Result<bool> {
    let mut files = Vec::new();
    for p in paths {
        code_files(p, &mut files)?;
    }
    if files.is_empty() {
        bail!("no code files found");
    }
    let mut programs = Vec::new();
    let mut fatal = 0;
    for f in &files {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        let parsed = parse(&text);
        let mut diags = parsed.diagnostics.clone();
        diags.extend(lint(&parsed.program, require_question));
        for d in &diags {
            let sev = match d.severity {
                Severity::Fatal => {
                    fatal += 1;
                    "fatal"
                }
                Severity::Warning => "warning",
            };
            let at = if d.line == 0 {
                f.display().to_string()
            } else {
                format!("{}:{}", f.display(), d.line)
            };
            println!("{at}: {sev}: {:?}: {}", d.kind, d.message);
        }
        programs.push(parsed.program);
    }
    let stats = complexity_stats(&programs)?;
    println!(
        "{} files, {} fatal; reasoning-op ratio {:.2}%, mean lines {:.1}",
        stats.programs,
        fatal,
        100.0 * stats.mean_reasoning_op_ratio,
        stats.mean_line_count
    );
    Ok(fatal == 0)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            execute(&args.config()?)?;
        }
        Command::Ablate(args) => {
            let mut cfg = args.config()?;
            if args.kinds.is_empty() {
                cfg.kinds = ABLATIONS.to_vec();
            }
            execute(&cfg)?;
        }
        Command::Probe(args) => {
            let mut cfg = args.config()?;
            if args.kinds.is_empty() {
                cfg.kinds = vec![PromptKind::Text, PromptKind::CodeAnswer];
            }
            cfg.probe.enabled = true;
            execute(&cfg)?;
        }
        Command::Report { manifests, csv } => {
            let data = load_report(&manifests)?;
            print!("{}", render_report(&data));
            if let Some(dir) = csv {
                write_report_csv(&data, &dir)?;
            }
        }
        Command::ValidateCode {
            paths,
            require_question,
        } => return validate_code(&paths, require_question),
        Command::RecordFixtures { run, store } => {
            let mut cfg = run.config()?;
            if cfg.backend.kind == BackendKind::Replay {
                bail!("record-fixtures needs a live or stub backend");
            }
            cfg.backend.store = Some(store);
            let out = execute(&cfg)?;
            if let Some(d) = &out.manifest.store_digest {
                println!("store:     {d}");
            }
        }
    }
    Ok(true)
}
