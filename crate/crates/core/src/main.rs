//! Command-line front end for the adversarial-scenario toolkit.
//!
//! Exit codes: 0 on success, 2 when some scenarios failed after retries
//! (partial results persisted), 1 on usage or configuration errors.

use advdrive::campaign::{
    load_records, report_from_records, run_benign_suite, run_campaign, run_frame_ablation,
    run_prompt_ablation, run_temperature_sweep, write_scene_files, CampaignManifest,
};
use advdrive::gateway::{Backend, BackendKind, RemoteHttp, Script, ScriptedMock};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "advdrive",
    about = "Generate adversarial driving scenarios, query an LLM for control decisions, and score them against a kinematic safety oracle",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Campaign manifest (TOML); defaults mirror the full evaluation setup
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Override the manifest's campaign seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the manifest's output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Backend: "mock" (deterministic, needs --script) or "remote"
    #[arg(long)]
    backend: Option<String>,
    /// Script file for the mock backend (JSONL of matcher/response entries)
    #[arg(long)]
    script: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the campaign's scene files without querying any backend
    Gen {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the full campaign: query, judge, persist records, print metrics
    Run {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate benign scenes for false positives and conservative decisions
    Benign {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of benign scenes
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Re-prompt identical scenes with shrinking frame windows
    AblateFrames {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated history lengths
        #[arg(long, value_delimiter = ',', default_values_t = [7usize, 6, 5, 4])]
        windows: Vec<usize>,
    },
    /// Paired runs with and without the driving instruction
    AblatePrompt {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Replay a scenario sample across sampling temperatures
    SweepTemp {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 100)]
        sample: usize,
        /// Comma-separated temperatures
        #[arg(long, value_delimiter = ',')]
        temps: Option<Vec<f64>>,
    },
    /// Re-aggregate metrics from an existing record file (no queries)
    Report {
        /// records.jsonl produced by `run`
        #[arg(long)]
        records: PathBuf,
    },
}

#[derive(Debug)]
struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn load_manifest(common: &CommonOpts) -> Result<CampaignManifest, CliError> {
    let mut manifest = match &common.manifest {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
            CampaignManifest::from_toml(&text)?
        }
        None => CampaignManifest::default(),
    };
    if let Some(seed) = common.seed {
        manifest.seed = seed;
    }
    if let Some(out) = &common.out {
        manifest.output_dir = out.clone();
    }
    match common.backend.as_deref() {
        Some("mock") => manifest.backend.kind = BackendKind::ScriptedMock,
        Some("remote") => manifest.backend.kind = BackendKind::RemoteHttp,
        Some(other) => return Err(CliError(format!("unknown backend {other:?} (mock|remote)"))),
        None => {}
    }
    Ok(manifest)
}

fn build_backend(
    manifest: &CampaignManifest,
    common: &CommonOpts,
) -> Result<Box<dyn Backend>, CliError> {
    match manifest.backend.kind {
        BackendKind::ScriptedMock => {
            let script = match &common.script {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
                    Script::from_jsonl(&text)?
                }
                None => return Err(CliError("mock backend needs --script <file>".into())),
            };
            Ok(Box::new(ScriptedMock::new(script)))
        }
        BackendKind::RemoteHttp => Ok(Box::new(RemoteHttp::from_config(&manifest.backend)?)),
    }
}

/// Ok(true) = fully processed, Ok(false) = partial failures.
fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Gen { common } => {
            if common.seed.is_none() && common.manifest.is_none() {
                return Err(CliError("gen needs --seed (or a --manifest fixing one)".into()));
            }
            let manifest = load_manifest(&common)?;
            let entries = manifest.entries()?;
            let dir = manifest.output_dir.join("scenes");
            let n = write_scene_files(&entries, &manifest.prompt, &dir)?;
            println!("wrote {n} scenes to {}", dir.display());
            Ok(true)
        }
        Command::Run { common } => {
            let manifest = load_manifest(&common)?;
            let backend = build_backend(&manifest, &common)?;
            let outcome = run_campaign(&manifest, backend.as_ref())?;
            println!(
                "scenarios: {} enumerated, {} newly processed, {} resumed from disk",
                outcome.enumerated, outcome.written, outcome.skipped
            );
            print!("{}", outcome.table.to_text());
            let csv_path = manifest.output_dir.join("metrics.csv");
            std::fs::write(&csv_path, outcome.table.to_csv())?;
            println!("metrics written to {}", csv_path.display());
            if !outcome.failures.is_empty() {
                eprintln!("{} scenario(s) failed after retries:", outcome.failures.len());
                for f in &outcome.failures {
                    eprintln!("  {}: {}", f.scenario_id, f.message);
                }
            }
            Ok(outcome.fully_processed())
        }
        Command::Benign { common, count } => {
            let manifest = load_manifest(&common)?;
            let backend = build_backend(&manifest, &common)?;
            let report = run_benign_suite(&manifest, count, backend.as_ref())?;
            println!(
                "benign scenes: {} judged\ninconsistent: {} ({:.2}%)\nsafe decisions: {} ({:.2}%)\nconservative decisions: {} ({:.2}%)",
                report.total,
                report.inconsistent,
                report.inconsistent_rate,
                report.safe,
                report.safe_rate,
                report.conservative,
                report.conservative_rate
            );
            for f in &report.failures {
                eprintln!("failed query {}: {}", f.scenario_id, f.message);
            }
            Ok(report.failures.is_empty())
        }
        Command::AblateFrames { common, windows } => {
            let manifest = load_manifest(&common)?;
            let backend = build_backend(&manifest, &common)?;
            let rows = run_frame_ablation(&manifest, &windows, backend.as_ref())?;
            println!("{:>7}  {:>10}  {:>10}  {:>10}", "frames", "overall %", "od %", "ot %");
            let mut clean = true;
            for r in &rows {
                println!(
                    "{:>7}  {:>10.2}  {:>10.2}  {:>10.2}",
                    r.window, r.overall.defense_rate, r.od.defense_rate, r.ot.defense_rate
                );
                clean &= r.failures == 0;
            }
            Ok(clean)
        }
        Command::AblatePrompt { common } => {
            let manifest = load_manifest(&common)?;
            let backend = build_backend(&manifest, &common)?;
            let report = run_prompt_ablation(&manifest, backend.as_ref())?;
            println!(
                "pairs: {}\nwith instruction:    defense {:.2}%  detection {:.2}%\nwithout instruction: defense {:.2}%  detection {:.2}%",
                report.pairs,
                report.with_instruction.overall.defense_rate,
                report.with_instruction.overall.detection_rate,
                report.without_instruction.overall.defense_rate,
                report.without_instruction.overall.detection_rate
            );
            println!(
                "defense contingency: both {}, instruction-only {}, no-instruction-only {}, neither {}",
                report.both_defended, report.only_with, report.only_without, report.neither
            );
            Ok(report.failures.is_empty())
        }
        Command::SweepTemp { common, sample, temps } => {
            let manifest = load_manifest(&common)?;
            let backend = build_backend(&manifest, &common)?;
            let temps =
                temps.unwrap_or_else(|| (1..=10).map(|i| f64::from(i) / 10.0).collect());
            let rows = run_temperature_sweep(&manifest, &temps, sample, backend.as_ref())?;
            println!("{:>12}  {:>8}  {:>10}", "temperature", "total", "defense %");
            let mut clean = true;
            for r in &rows {
                println!("{:>12.1}  {:>8}  {:>10.2}", r.temperature, r.total, r.defense_rate);
                clean &= r.failures == 0;
            }
            Ok(clean)
        }
        Command::Report { records } => {
            let (digest, table) = report_from_records(&records)?;
            let (_, rows) = load_records(&records)?;
            println!("manifest digest: {digest} ({} records)", rows.len());
            print!("{}", table.to_text());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    // clap's default error exit code is 2; this tool reserves 2 for partial
    // failures, so usage errors map to 1 explicitly
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
