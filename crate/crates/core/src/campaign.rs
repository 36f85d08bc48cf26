//! Campaign orchestration: enumerate adversarial scenarios, render prompts,
//! query a backend, judge replies against the oracle, and aggregate metrics —
//! plus the benign false-positive suite and the frame/prompt/temperature
//! ablations.
//!
//! Records persist as newline-delimited JSON under an append-only file whose
//! first line pins the manifest digest. Scenario ids are content digests of
//! (scene, attack spec, prompt config), so a killed run resumes by skipping
//! ids already on disk and renaming files never corrupts resume logic.

use crate::dsl::serialize_scene;
use crate::forge::{
    benign_counterpart, enumerate_campaign, generate_benign, AttackError, AttackGoal, AttackSpec,
    CampaignEntry, GoalMapMatrix, SceneSeed, BENIGN_FRAMES, PERTURBED_FRAMES,
};
use crate::gateway::{user_message_digest, Backend, BackendConfig, GatewayError};
use crate::oracle::{safe_set, OracleError, SafetyConfig};
use crate::prompt::{build_query, FrameWindow, PromptConfig, PromptError};
use crate::scene::{ControlDecision, DrivingScene, MapKind, WeatherPreset};
use crate::verdict::{
    aggregate, judge, parse_verdict, pct, InconsistencyKind, LabeledJudgment, MetricsTable,
    VerdictError,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("i/o error at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scene generation failed: {0}")]
    Generation(#[from] AttackError),
    #[error("prompt construction failed: {0}")]
    Prompt(#[from] PromptError),
    #[error("oracle failed: {0}")]
    Oracle(#[from] OracleError),
    #[error("metrics aggregation failed: {0}")]
    Metrics(#[from] VerdictError),
    #[error("record file {path} belongs to a different manifest (header {found}, expected {expected})")]
    ManifestMismatch { path: PathBuf, found: String, expected: String },
    #[error("malformed record file {path}: {reason}")]
    BadRecordFile { path: PathBuf, reason: String },
    #[error("invalid manifest: {0}")]
    BadManifest(String),
    #[error("campaign enumerates zero scenarios")]
    EmptyCampaign,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io { path: path.to_path_buf(), source }
}

// ---------------------------------------------------------------------------
// manifest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignManifest {
    pub maps: Vec<MapKind>,
    pub weathers: Vec<WeatherPreset>,
    pub goals: Vec<AttackGoal>,
    pub reps: u32,
    pub seed: u64,
    pub benign_frames: usize,
    pub perturbed_frames: usize,
    pub prompt: PromptConfig,
    pub backend: BackendConfig,
    pub output_dir: PathBuf,
}

impl Default for CampaignManifest {
    fn default() -> Self {
        let (maps, weathers, goals, reps) = crate::forge::paper_campaign();
        CampaignManifest {
            maps,
            weathers,
            goals,
            reps,
            seed: 7,
            benign_frames: BENIGN_FRAMES,
            perturbed_frames: PERTURBED_FRAMES,
            prompt: PromptConfig::default(),
            backend: BackendConfig::mock(),
            output_dir: PathBuf::from("campaign-out"),
        }
    }
}

impl CampaignManifest {
    pub fn from_toml(text: &str) -> Result<Self, CampaignError> {
        let manifest: CampaignManifest =
            toml::from_str(text).map_err(|e| CampaignError::BadManifest(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.maps.is_empty() || self.weathers.is_empty() || self.goals.is_empty() {
            return Err(CampaignError::BadManifest(
                "maps, weathers, and goals must all be non-empty".into(),
            ));
        }
        if self.reps == 0 {
            return Err(CampaignError::BadManifest("reps must be at least 1".into()));
        }
        if self.prompt.history_frames == 0 {
            return Err(CampaignError::BadManifest("prompt history must be at least 1 frame".into()));
        }
        Ok(())
    }

    /// Digest pinning everything that determines scenario content.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("manifest serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..16])
    }

    pub fn entries(&self) -> Result<Vec<CampaignEntry>, CampaignError> {
        let entries = enumerate_campaign(
            &self.maps,
            &self.weathers,
            &self.goals,
            self.reps,
            self.seed,
            &GoalMapMatrix::default(),
        )?;
        if entries.is_empty() {
            return Err(CampaignError::EmptyCampaign);
        }
        Ok(entries)
    }
}

/// Content digest of (scene, attack spec, prompt config).
pub fn scenario_id(scene: &DrivingScene, spec: &AttackSpec, prompt: &PromptConfig) -> String {
    let mut h = Sha256::new();
    h.update(serialize_scene(scene).expect("campaign scenes are structurally valid").as_bytes());
    h.update(serde_json::to_string(spec).expect("spec serializes").as_bytes());
    h.update(serde_json::to_string(prompt).expect("config serializes").as_bytes());
    hex::encode(&h.finalize()[..16])
}

// ---------------------------------------------------------------------------
// record persistence

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    pub goal: AttackGoal,
    pub map: MapKind,
    pub weather: WeatherPreset,
    pub rep: u32,
    pub spec: AttackSpec,
    pub query_digest: String,
    pub completion_text: String,
    pub input_tokens: f64,
    pub output_tokens: f64,
    pub latency_secs: f64,
    pub decision: Option<ControlDecision>,
    pub consistent: Option<bool>,
    pub kinds: BTreeSet<InconsistencyKind>,
    pub detected: bool,
    pub defended: bool,
    pub decision_safe: bool,
    pub decision_conservative: bool,
    pub wall_secs: f64,
}

impl RunRecord {
    pub fn labeled(&self) -> LabeledJudgment {
        LabeledJudgment {
            attack_type: self.goal.attack_type(),
            goal: self.goal,
            kinds: self.kinds.clone(),
            judgment: crate::verdict::Judgment {
                detected: self.detected,
                defended: self.defended,
                decision_safe: self.decision_safe,
                decision_conservative: self.decision_conservative,
            },
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordHeader {
    manifest_digest: String,
}

/// Append-only JSONL store; line 1 is the manifest-digest header.
pub struct RecordStore {
    path: PathBuf,
    writer: BufWriter<File>,
    pub existing: Vec<RunRecord>,
}

impl RecordStore {
    pub fn open(path: &Path, manifest_digest: &str) -> Result<Self, CampaignError> {
        let existing = if path.exists() {
            let (found, records) = load_records(path)?;
            if found != manifest_digest {
                return Err(CampaignError::ManifestMismatch {
                    path: path.to_path_buf(),
                    found,
                    expected: manifest_digest.to_string(),
                });
            }
            records
        } else {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(io_err(path))?;
                }
            }
            let header = serde_json::to_string(&RecordHeader {
                manifest_digest: manifest_digest.to_string(),
            })
            .expect("header serializes");
            let mut file = File::create(path).map_err(io_err(path))?;
            writeln!(file, "{header}").map_err(io_err(path))?;
            Vec::new()
        };
        let file = OpenOptions::new().append(true).open(path).map_err(io_err(path))?;
        Ok(RecordStore { path: path.to_path_buf(), writer: BufWriter::new(file), existing })
    }

    pub fn existing_ids(&self) -> BTreeSet<String> {
        self.existing.iter().map(|r| r.scenario_id.clone()).collect()
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<(), CampaignError> {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(self.writer, "{line}").map_err(io_err(&self.path))?;
        // flush per record: resume correctness depends on what reached disk
        self.writer.flush().map_err(io_err(&self.path))
    }
}

pub fn load_records(path: &Path) -> Result<(String, Vec<RunRecord>), CampaignError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| CampaignError::BadRecordFile {
            path: path.to_path_buf(),
            reason: "empty file (missing header)".into(),
        })?
        .map_err(io_err(path))?;
    let header: RecordHeader =
        serde_json::from_str(&header_line).map_err(|e| CampaignError::BadRecordFile {
            path: path.to_path_buf(),
            reason: format!("bad header: {e}"),
        })?;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord =
            serde_json::from_str(&line).map_err(|e| CampaignError::BadRecordFile {
                path: path.to_path_buf(),
                reason: format!("record {}: {e}", i + 1),
            })?;
        records.push(record);
    }
    Ok((header.manifest_digest, records))
}

// ---------------------------------------------------------------------------
// single-scenario processing

struct Processed {
    record: RunRecord,
}

fn process_entry(
    entry: &CampaignEntry,
    prompt: &PromptConfig,
    backend: &dyn Backend,
    backend_cfg: &BackendConfig,
) -> Result<Processed, GatewayError> {
    let started = Instant::now();
    let window = FrameWindow::last_n(&entry.scene, prompt.history_frames);
    let query = build_query(&entry.scene, window, prompt).expect("campaign scenes render");
    let completion = backend.complete(&query, backend_cfg)?;
    let verdict = parse_verdict(&completion.text);
    // ground truth: the benign counterpart at the decision frame
    let benign = benign_counterpart(entry);
    let cfg = SafetyConfig::default();
    let set =
        safe_set(&benign, benign.last_frame(), cfg.horizon, &cfg).expect("decision frame exists");
    let judgment = judge(&verdict, &set, entry.goal.consequence());
    Ok(Processed {
        record: RunRecord {
            scenario_id: scenario_id(&entry.scene, &entry.spec, prompt),
            goal: entry.goal,
            map: entry.map,
            weather: entry.weather,
            rep: entry.rep,
            spec: entry.spec.clone(),
            query_digest: user_message_digest(&query.user_message),
            completion_text: completion.text,
            input_tokens: completion.input_tokens,
            output_tokens: completion.output_tokens,
            latency_secs: completion.latency_secs,
            decision: verdict.decision,
            consistent: verdict.consistent,
            kinds: verdict.kinds,
            detected: judgment.detected,
            defended: judgment.defended,
            decision_safe: judgment.decision_safe,
            decision_conservative: judgment.decision_conservative,
            wall_secs: started.elapsed().as_secs_f64(),
        },
    })
}

// ---------------------------------------------------------------------------
// run_campaign

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub scenario_id: String,
    pub message: String,
}

#[derive(Debug)]
pub struct CampaignOutcome {
    pub table: MetricsTable,
    pub enumerated: usize,
    pub written: usize,
    pub skipped: usize,
    pub failures: Vec<Failure>,
}

impl CampaignOutcome {
    pub fn fully_processed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Processes every enumerated scenario exactly once, skipping ids already in
/// the record file, and aggregates metrics over all records on disk.
pub fn run_campaign(
    manifest: &CampaignManifest,
    backend: &dyn Backend,
) -> Result<CampaignOutcome, CampaignError> {
    manifest.validate()?;
    let entries = manifest.entries()?;
    let records_path = manifest.output_dir.join("records.jsonl");
    let mut store = RecordStore::open(&records_path, &manifest.digest())?;
    let done = store.existing_ids();

    let mut written = 0;
    let mut skipped = 0;
    let mut failures = Vec::new();
    for entry in &entries {
        let id = scenario_id(&entry.scene, &entry.spec, &manifest.prompt);
        if done.contains(&id) {
            skipped += 1;
            continue;
        }
        match process_entry(entry, &manifest.prompt, backend, &manifest.backend) {
            Ok(p) => {
                store.append(&p.record)?;
                store.existing.push(p.record);
                written += 1;
            }
            Err(e) => failures.push(Failure { scenario_id: id, message: e.to_string() }),
        }
    }

    let labeled: Vec<_> = store.existing.iter().map(RunRecord::labeled).collect();
    let table = aggregate(&labeled)?;
    Ok(CampaignOutcome { table, enumerated: entries.len(), written, skipped, failures })
}

/// Re-aggregate metrics from a record file without re-querying.
pub fn report_from_records(path: &Path) -> Result<(String, MetricsTable), CampaignError> {
    let (digest, records) = load_records(path)?;
    let labeled: Vec<_> = records.iter().map(RunRecord::labeled).collect();
    Ok((digest, aggregate(&labeled)?))
}

/// Write each entry's scene to `<dir>/<scenario_id>.scene` plus a spec index.
pub fn write_scene_files(
    entries: &[CampaignEntry],
    prompt: &PromptConfig,
    dir: &Path,
) -> Result<usize, CampaignError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let index_path = dir.join("index.jsonl");
    let mut index = BufWriter::new(File::create(&index_path).map_err(io_err(&index_path))?);
    for entry in entries {
        let id = scenario_id(&entry.scene, &entry.spec, prompt);
        let path = dir.join(format!("{id}.scene"));
        let text =
            serialize_scene(&entry.scene).expect("campaign scenes are structurally valid");
        std::fs::write(&path, text).map_err(io_err(&path))?;
        let line = serde_json::json!({
            "scenario_id": id,
            "goal": entry.goal,
            "map": entry.map,
            "weather": entry.weather,
            "rep": entry.rep,
            "spec": entry.spec,
        });
        writeln!(index, "{line}").map_err(io_err(&index_path))?;
    }
    index.flush().map_err(io_err(&index_path))?;
    Ok(entries.len())
}

// ---------------------------------------------------------------------------
// benign false-positive suite

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsePositiveReport {
    pub total: usize,
    pub inconsistent: usize,
    pub safe: usize,
    pub conservative: usize,
    /// Percentages to 2 decimals.
    pub inconsistent_rate: f64,
    pub safe_rate: f64,
    pub conservative_rate: f64,
    pub failures: Vec<Failure>,
}

/// The deterministic benign scenes the suite evaluates, cycling through the
/// manifest's maps and weathers. Exposed so scripts can be built against the
/// exact prompts the suite will send.
pub fn benign_suite_scenes(
    manifest: &CampaignManifest,
    count: usize,
) -> Result<Vec<DrivingScene>, CampaignError> {
    manifest.validate()?;
    let frames = manifest.benign_frames + manifest.perturbed_frames;
    let mut scenes = Vec::with_capacity(count);
    for i in 0..count {
        let map = manifest.maps[i % manifest.maps.len()];
        let weather = manifest.weathers[(i / manifest.maps.len()) % manifest.weathers.len()];
        let mut h = Sha256::new();
        h.update(manifest.seed.to_le_bytes());
        h.update(b"benign-suite");
        h.update((i as u64).to_le_bytes());
        let rng_seed = u64::from_le_bytes(h.finalize()[..8].try_into().unwrap());
        let mut seed = SceneSeed::new(map, weather, rng_seed);
        seed.census.vehicles = 1 + (i % 3);
        seed.census.pedestrians = i % 2;
        let scene = generate_benign(&seed, frames)
            .map_err(|e| CampaignError::BadManifest(format!("benign generation: {e}")))?;
        scenes.push(scene);
    }
    Ok(scenes)
}

/// Evaluate `count` benign scenes (no attack) and report how often the model
/// calls them inconsistent and how safe/conservative its decisions are.
pub fn run_benign_suite(
    manifest: &CampaignManifest,
    count: usize,
    backend: &dyn Backend,
) -> Result<FalsePositiveReport, CampaignError> {
    if count == 0 {
        return Err(CampaignError::BadManifest("benign suite needs count >= 1".into()));
    }
    let scenes = benign_suite_scenes(manifest, count)?;
    let cfg = SafetyConfig::default();
    let (mut inconsistent, mut safe, mut conservative) = (0, 0, 0);
    let mut failures = Vec::new();
    let mut judged = 0usize;
    for scene in &scenes {
        let window = FrameWindow::last_n(scene, manifest.prompt.history_frames);
        let query = build_query(scene, window, &manifest.prompt)?;
        let completion = match backend.complete(&query, &manifest.backend) {
            Ok(c) => c,
            Err(e) => {
                failures.push(Failure {
                    scenario_id: user_message_digest(&query.user_message),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let verdict = parse_verdict(&completion.text);
        let set = safe_set(scene, scene.last_frame(), cfg.horizon, &cfg)?;
        judged += 1;
        if verdict.consistent == Some(false) {
            inconsistent += 1;
        }
        if let Some(d) = verdict.decision {
            if set.is_safe(d) {
                safe += 1;
            }
            if set.is_conservative(d) {
                conservative += 1;
            }
        }
    }
    Ok(FalsePositiveReport {
        total: judged,
        inconsistent,
        safe,
        conservative,
        inconsistent_rate: pct(inconsistent, judged),
        safe_rate: pct(safe, judged),
        conservative_rate: pct(conservative, judged),
        failures,
    })
}

// ---------------------------------------------------------------------------
// frame-count ablation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowMetrics {
    pub window: usize,
    pub overall: crate::verdict::GroupRow,
    /// Detection attacks (creation/removal/misclassification).
    pub od: crate::verdict::GroupRow,
    /// Tracking attacks (bounding-box moves).
    pub ot: crate::verdict::GroupRow,
    pub failures: usize,
}

fn family_rows(
    window: usize,
    labeled: &[LabeledJudgment],
    failures: usize,
) -> Result<WindowMetrics, CampaignError> {
    let row = |label: &str, filter: &dyn Fn(&LabeledJudgment) -> bool| {
        let subset: Vec<_> = labeled.iter().filter(|j| filter(j)).collect();
        let detected = subset.iter().filter(|j| j.judgment.detected).count();
        let defended = subset.iter().filter(|j| j.judgment.defended).count();
        crate::verdict::GroupRow {
            label: label.to_string(),
            total: subset.len(),
            detected,
            defended,
            detection_rate: pct(detected, subset.len()),
            defense_rate: pct(defended, subset.len()),
        }
    };
    Ok(WindowMetrics {
        window,
        overall: row("overall", &|_| true),
        od: row("od", &|j| !j.attack_type.targets_tracking()),
        ot: row("ot", &|j| j.attack_type.targets_tracking()),
        failures,
    })
}

/// Re-prompt the identical scenes with shrinking frame windows (`windows` is
/// the history length per arm, e.g. [7, 6, 5, 4]); only the prompt varies.
pub fn run_frame_ablation(
    manifest: &CampaignManifest,
    windows: &[usize],
    backend: &dyn Backend,
) -> Result<Vec<WindowMetrics>, CampaignError> {
    manifest.validate()?;
    for &w in windows {
        if w < 1 + manifest.perturbed_frames {
            return Err(CampaignError::BadManifest(format!(
                "window {w} would drop every benign frame; need at least {}",
                1 + manifest.perturbed_frames
            )));
        }
    }
    let entries = manifest.entries()?;
    let mut out = Vec::with_capacity(windows.len());
    for &w in windows {
        let prompt = PromptConfig { history_frames: w, ..manifest.prompt.clone() };
        let mut labeled = Vec::with_capacity(entries.len());
        let mut failures = 0;
        for entry in &entries {
            match process_entry(entry, &prompt, backend, &manifest.backend) {
                Ok(p) => labeled.push(p.record.labeled()),
                Err(_) => failures += 1,
            }
        }
        out.push(family_rows(w, &labeled, failures)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// driving-instruction ablation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptAblationReport {
    pub with_instruction: MetricsTable,
    pub without_instruction: MetricsTable,
    pub pairs: usize,
    /// Per-pair defense contingency: both arms, instruction-only,
    /// no-instruction-only, neither.
    pub both_defended: usize,
    pub only_with: usize,
    pub only_without: usize,
    pub neither: usize,
    /// Headline no-instruction defense percentage, truncated to 2 decimals
    /// (the convention for this figure, unlike the rounded table rates).
    pub without_defense_headline: f64,
    pub failures: Vec<Failure>,
}

/// Run the same scenarios with and without the driving instruction in the
/// system prompt; everything else (scenes, windows, backend) is identical.
pub fn run_prompt_ablation(
    manifest: &CampaignManifest,
    backend: &dyn Backend,
) -> Result<PromptAblationReport, CampaignError> {
    manifest.validate()?;
    let entries = manifest.entries()?;
    let arm = |include: bool| PromptConfig {
        include_driving_instruction: include,
        ..manifest.prompt.clone()
    };
    let with_cfg = arm(true);
    let without_cfg = arm(false);

    let mut with_rows = Vec::new();
    let mut without_rows = Vec::new();
    let mut contingency = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for entry in &entries {
        let a = process_entry(entry, &with_cfg, backend, &manifest.backend);
        let b = process_entry(entry, &without_cfg, backend, &manifest.backend);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                match (a.record.defended, b.record.defended) {
                    (true, true) => contingency.0 += 1,
                    (true, false) => contingency.1 += 1,
                    (false, true) => contingency.2 += 1,
                    (false, false) => contingency.3 += 1,
                }
                with_rows.push(a.record.labeled());
                without_rows.push(b.record.labeled());
            }
            (a, b) => {
                let msg = a.err().or(b.err()).expect("one arm failed").to_string();
                failures.push(Failure {
                    scenario_id: scenario_id(&entry.scene, &entry.spec, &manifest.prompt),
                    message: msg,
                });
            }
        }
    }
    let without_defended = contingency.0 + contingency.2;
    Ok(PromptAblationReport {
        with_instruction: aggregate(&with_rows)?,
        without_instruction: aggregate(&without_rows)?,
        pairs: with_rows.len(),
        both_defended: contingency.0,
        only_with: contingency.1,
        only_without: contingency.2,
        neither: contingency.3,
        without_defense_headline: crate::verdict::pct_floor(without_defended, with_rows.len()),
        failures,
    })
}

// ---------------------------------------------------------------------------
// temperature sweep

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureRow {
    pub temperature: f64,
    pub total: usize,
    pub defended: usize,
    pub defense_rate: f64,
    pub failures: usize,
}

/// Replay a seeded sample of scenarios at each temperature. Meaningful only
/// against a live backend — the scripted mock ignores temperature, which the
/// plumbing tests use as a control.
pub fn run_temperature_sweep(
    manifest: &CampaignManifest,
    temps: &[f64],
    sample: usize,
    backend: &dyn Backend,
) -> Result<Vec<TemperatureRow>, CampaignError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    manifest.validate()?;
    if temps.is_empty() || sample == 0 {
        return Err(CampaignError::BadManifest("sweep needs temperatures and a sample size".into()));
    }
    let mut entries = manifest.entries()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(manifest.seed ^ 0x7357_5eed);
    entries.shuffle(&mut rng);
    entries.truncate(sample);

    let mut out = Vec::with_capacity(temps.len());
    for &t in temps {
        let backend_cfg = BackendConfig { temperature: t, ..manifest.backend.clone() };
        backend_cfg.validate().map_err(|e| CampaignError::BadManifest(e.to_string()))?;
        let (mut defended, mut failures) = (0, 0);
        let mut total = 0;
        for entry in &entries {
            match process_entry(entry, &manifest.prompt, backend, &backend_cfg) {
                Ok(p) => {
                    total += 1;
                    defended += p.record.defended as usize;
                }
                Err(_) => failures += 1,
            }
        }
        out.push(TemperatureRow {
            temperature: t,
            total,
            defended,
            defense_rate: pct(defended, total),
            failures,
        });
    }
    Ok(out)
}
