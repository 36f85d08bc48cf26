//! LLM gateway: a uniform backend abstraction with a deterministic scripted
//! mock for CI and a remote chat-completion client for live runs, plus
//! per-query token/latency accounting.
//!
//! Backends are registered by name ("scripted_mock", "remote_http") and
//! selected at runtime from the campaign configuration. Credentials for the
//! remote backend come from the `ADVDRIVE_API_KEY` environment variable,
//! never from flags. Query text is not logged at default verbosity.

use crate::prompt::Query;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Environment variable holding the remote backend's API key.
pub const API_KEY_ENV: &str = "ADVDRIVE_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    ScriptedMock,
    RemoteHttp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Base backoff; attempt k sleeps k × this.
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, backoff_ms: 250 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Chat-completion endpoint URL (remote backend only).
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default)]
    pub retry: RetryPolicy,
    /// Minimum spacing between requests (campaigns issue thousands).
    #[serde(default)]
    pub min_interval_ms: u64,
}

fn default_model() -> String {
    "gpt-4-turbo".to_string()
}
fn default_temperature() -> f64 {
    0.3
}
fn default_max_output_tokens() -> u32 {
    1024
}
fn default_timeout_secs() -> f64 {
    60.0
}

impl BackendConfig {
    pub fn mock() -> Self {
        BackendConfig {
            kind: BackendKind::ScriptedMock,
            endpoint: None,
            model: default_model(),
            temperature: default_temperature(),
            max_output_tokens: default_max_output_tokens(),
            timeout_secs: default_timeout_secs(),
            retry: RetryPolicy::default(),
            min_interval_ms: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidConfig(format!(
                "temperature {} outside [0, 1]",
                self.temperature
            )));
        }
        if self.timeout_secs <= 0.0 {
            return Err(GatewayError::InvalidConfig("timeout must be positive".into()));
        }
        if self.kind == BackendKind::RemoteHttp && self.endpoint.is_none() {
            return Err(GatewayError::InvalidConfig("remote backend needs an endpoint".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// Token counts are real-valued: remote backends report integers, and
    /// estimates/averages need not be whole.
    pub input_tokens: f64,
    pub output_tokens: f64,
    pub latency_secs: f64,
    pub backend_id: String,
    /// True when counts come from the whitespace heuristic, not the backend.
    pub tokens_estimated: bool,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("no script entry matches the query (user-message digest {0})")]
    ScriptMiss(String),
    #[error("backend unavailable after {attempts} attempts: {last}")]
    BackendUnavailable { attempts: u32, last: String },
    #[error("request timed out after {0} s")]
    Timeout(f64),
    #[error("missing credentials: set {0}")]
    MissingCredentials(&'static str),
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
    #[error("empty input")]
    EmptyInput,
    #[error("unknown backend kind {0:?}")]
    UnknownBackend(String),
    #[error("malformed backend response: {0}")]
    BadResponse(String),
}

/// Documented tokenizer-free estimate: whitespace-separated token count.
pub fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Stable matcher key: hex SHA-256 of the user message.
pub fn user_message_digest(user_message: &str) -> String {
    hex::encode(Sha256::digest(user_message.as_bytes()))
}

/// Matcher key over the whole query, for scripts that must answer the same
/// user message differently depending on the system prompt (ablation arms).
pub fn full_query_digest(system_prompt: &str, user_message: &str) -> String {
    let mut h = Sha256::new();
    h.update(system_prompt.as_bytes());
    h.update([0]);
    h.update(user_message.as_bytes());
    hex::encode(h.finalize())
}

// ---------------------------------------------------------------------------
// backend trait + registry

pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, query: &Query, config: &BackendConfig) -> Result<Completion, GatewayError>;
}

type BackendFactory = Box<dyn Fn(&BackendConfig) -> Result<Box<dyn Backend>, GatewayError> + Send + Sync>;

/// Name → backend constructor registry. `standard()` knows the built-in
/// backends; embedders can register additional ones.
pub struct BackendRegistry {
    factories: BTreeMap<String, BackendFactory>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry { factories: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register("scripted_mock", |_cfg| {
            Ok(Box::new(ScriptedMock::new(Script::default())) as Box<dyn Backend>)
        });
        reg.register("remote_http", |cfg| {
            Ok(Box::new(RemoteHttp::from_config(cfg)?) as Box<dyn Backend>)
        });
        reg
    }

    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn(&BackendConfig) -> Result<Box<dyn Backend>, GatewayError> + Send + Sync + 'static,
    ) {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn build(&self, name: &str, config: &BackendConfig) -> Result<Box<dyn Backend>, GatewayError> {
        config.validate()?;
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| GatewayError::UnknownBackend(name.to_string()))?;
        factory(config)
    }
}

// ---------------------------------------------------------------------------
// scripted mock

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    /// Hex SHA-256 of the user message this entry answers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    /// Exact-match alternative for golden tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    /// Hex SHA-256 over system prompt + user message (see
    /// [`full_query_digest`]); distinguishes prompt-ablation arms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_digest: Option<String>,
    pub response: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Script {
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    /// One JSON object per line.
    pub fn from_jsonl(text: &str) -> Result<Self, GatewayError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line).map_err(|e| {
                GatewayError::InvalidConfig(format!("script line {}: {e}", lineno + 1))
            })?;
            if entry.digest.is_none() && entry.exact.is_none() && entry.query_digest.is_none() {
                return Err(GatewayError::InvalidConfig(format!(
                    "script line {}: needs a digest, query_digest, or exact matcher",
                    lineno + 1
                )));
            }
            entries.push(entry);
        }
        Ok(Script { entries })
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("script entries serialize"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Answer every user message with the same response.
    pub fn constant(response: &str) -> Self {
        Script {
            entries: vec![ScriptEntry {
                digest: Some("*".to_string()),
                exact: None,
                query_digest: None,
                response: response.to_string(),
            }],
        }
    }

    fn lookup(&self, system_prompt: &str, user_message: &str) -> Option<&str> {
        let qdigest = full_query_digest(system_prompt, user_message);
        let digest = user_message_digest(user_message);
        // most specific first: exact text, whole-query digest, user-message
        // digest, then wildcard
        if let Some(e) = self.entries.iter().find(|e| e.exact.as_deref() == Some(user_message)) {
            return Some(&e.response);
        }
        if let Some(e) =
            self.entries.iter().find(|e| e.query_digest.as_deref() == Some(qdigest.as_str()))
        {
            return Some(&e.response);
        }
        if let Some(e) = self.entries.iter().find(|e| e.digest.as_deref() == Some(digest.as_str())) {
            return Some(&e.response);
        }
        self.entries
            .iter()
            .find(|e| e.digest.as_deref() == Some("*"))
            .map(|e| e.response.as_str())
    }
}

/// Bit-deterministic mock: same script + same query → identical completion.
pub struct ScriptedMock {
    script: Script,
}

impl ScriptedMock {
    pub fn new(script: Script) -> Self {
        ScriptedMock { script }
    }
}

impl Backend for ScriptedMock {
    fn id(&self) -> &str {
        "scripted_mock"
    }

    fn complete(&self, query: &Query, _config: &BackendConfig) -> Result<Completion, GatewayError> {
        let response = self
            .script
            .lookup(&query.system_prompt, &query.user_message)
            .ok_or_else(|| GatewayError::ScriptMiss(user_message_digest(&query.user_message)))?;
        Ok(Completion {
            text: response.to_string(),
            input_tokens: (whitespace_tokens(&query.system_prompt)
                + whitespace_tokens(&query.user_message)) as f64,
            output_tokens: whitespace_tokens(response) as f64,
            latency_secs: 0.0,
            backend_id: self.id().to_string(),
            tokens_estimated: true,
        })
    }
}

// ---------------------------------------------------------------------------
// remote HTTP backend

#[derive(Debug, Clone, Serialize)]
pub struct RemoteRequest {
    pub endpoint: String,
    pub api_key: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub system: String,
    pub user: String,
    pub timeout: Duration,
}

#[derive(Debug, Clone)]
pub struct RemoteResponse {
    pub text: String,
    /// (input, output) token usage as reported by the service.
    pub usage: Option<(u64, u64)>,
}

/// Transport seam: production uses reqwest; tests inject faults.
pub trait HttpTransport: Send + Sync {
    fn post(&self, request: &RemoteRequest) -> Result<RemoteResponse, String>;
}

pub struct ReqwestTransport;

impl HttpTransport for ReqwestTransport {
    fn post(&self, request: &RemoteRequest) -> Result<RemoteResponse, String> {
        let client = reqwest::blocking::Client::builder()
            .timeout(request.timeout)
            .build()
            .map_err(|e| e.to_string())?;
        let body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let resp = client
            .post(&request.endpoint)
            .bearer_auth(&request.api_key)
            .json(&body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let json: serde_json::Value = resp.json().map_err(|e| e.to_string())?;
        let text = json["choices"][0]["message"]["content"]
            .as_str()
            .ok_or("response has no choices[0].message.content")?
            .to_string();
        let usage = json.get("usage").and_then(|u| {
            Some((u.get("prompt_tokens")?.as_u64()?, u.get("completion_tokens")?.as_u64()?))
        });
        Ok(RemoteResponse { text, usage })
    }
}

/// Chat-completion client with retry/backoff and a minimum inter-request
/// interval shared across callers.
pub struct RemoteHttp {
    transport: Box<dyn HttpTransport>,
    last_request: Mutex<Option<Instant>>,
}

impl RemoteHttp {
    pub fn from_config(config: &BackendConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(RemoteHttp {
            transport: Box::new(ReqwestTransport),
            last_request: Mutex::new(None),
        })
    }

    pub fn with_transport(transport: Box<dyn HttpTransport>) -> Self {
        RemoteHttp { transport, last_request: Mutex::new(None) }
    }

    fn pace(&self, min_interval: Duration) {
        if min_interval.is_zero() {
            return;
        }
        let mut last = self.last_request.lock().expect("pacing lock");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < min_interval {
                std::thread::sleep(min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

impl Backend for RemoteHttp {
    fn id(&self) -> &str {
        "remote_http"
    }

    fn complete(&self, query: &Query, config: &BackendConfig) -> Result<Completion, GatewayError> {
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| GatewayError::InvalidConfig("remote backend needs an endpoint".into()))?;
        let api_key = std::env::var(API_KEY_ENV)
            .map_err(|_| GatewayError::MissingCredentials(API_KEY_ENV))?;
        let request = RemoteRequest {
            endpoint,
            api_key,
            model: config.model.clone(),
            temperature: config.temperature,
            max_tokens: config.max_output_tokens,
            system: query.system_prompt.clone(),
            user: query.user_message.clone(),
            timeout: Duration::from_secs_f64(config.timeout_secs),
        };
        let attempts = config.retry.max_attempts.max(1);
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            self.pace(Duration::from_millis(config.min_interval_ms));
            let started = Instant::now();
            match self.transport.post(&request) {
                Ok(resp) => {
                    let latency = started.elapsed().as_secs_f64();
                    let (input, output, estimated) = match resp.usage {
                        Some((i, o)) => (i as f64, o as f64, false),
                        None => (
                            (whitespace_tokens(&query.system_prompt)
                                + whitespace_tokens(&query.user_message))
                                as f64,
                            whitespace_tokens(&resp.text) as f64,
                            true,
                        ),
                    };
                    return Ok(Completion {
                        text: resp.text,
                        input_tokens: input,
                        output_tokens: output,
                        latency_secs: latency,
                        backend_id: self.id().to_string(),
                        tokens_estimated: estimated,
                    });
                }
                Err(e) => {
                    last_error = e;
                    if attempt < attempts {
                        std::thread::sleep(Duration::from_millis(
                            config.retry.backoff_ms * attempt as u64,
                        ));
                    }
                }
            }
        }
        Err(GatewayError::BackendUnavailable { attempts, last: last_error })
    }
}

// ---------------------------------------------------------------------------
// overhead accounting

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverheadSummary {
    pub mean_input_tokens: f64,
    pub mean_output_tokens: f64,
    pub mean_latency_secs: f64,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Arithmetic means over a batch of completions, reported to 2 decimals.
pub fn overhead_summary(completions: &[Completion]) -> Result<OverheadSummary, GatewayError> {
    if completions.is_empty() {
        return Err(GatewayError::EmptyInput);
    }
    let n = completions.len() as f64;
    let (mut i, mut o, mut l) = (0.0, 0.0, 0.0);
    for c in completions {
        i += c.input_tokens;
        o += c.output_tokens;
        l += c.latency_secs;
    }
    Ok(OverheadSummary {
        mean_input_tokens: round2(i / n),
        mean_output_tokens: round2(o / n),
        mean_latency_secs: round2(l / n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn query(user: &str) -> Query {
        Query {
            system_prompt: "system prompt text".to_string(),
            user_message: user.to_string(),
            decision_vocabulary: vec![],
        }
    }

    const LISTING4_STYLE: &str = "Plausibility: No, the scene includes spatial/temporal \
inconsistency. Decision: CHANGE LANES TO LEFT";

    #[test]
    fn mock_returns_scripted_text() {
        let user = "At time 0, your speed is 30 m/s.";
        let script = Script {
            entries: vec![ScriptEntry {
                digest: Some(user_message_digest(user)),
                exact: None,
                query_digest: None,
                response: LISTING4_STYLE.to_string(),
            }],
        };
        let mock = ScriptedMock::new(script);
        let completion = mock.complete(&query(user), &BackendConfig::mock()).unwrap();
        assert!(completion.text.contains("Decision: CHANGE LANES TO LEFT"));
        assert!(completion.tokens_estimated);
    }

    #[test]
    fn mock_empty_script_is_a_script_miss() {
        let mock = ScriptedMock::new(Script::default());
        let err = mock.complete(&query("anything"), &BackendConfig::mock()).unwrap_err();
        assert!(matches!(err, GatewayError::ScriptMiss(_)));
    }

    #[test]
    fn mock_is_deterministic_and_counts_whitespace_tokens() {
        let mock = ScriptedMock::new(Script::constant("one two three"));
        let q = query("a b c d");
        let first = mock.complete(&q, &BackendConfig::mock()).unwrap();
        let second = mock.complete(&q, &BackendConfig::mock()).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.output_tokens, 3.0);
        // "system prompt text" (3) + "a b c d" (4)
        assert_eq!(first.input_tokens, 7.0);
    }

    #[test]
    fn exact_matcher_takes_priority() {
        let user = "the message";
        let script = Script {
            entries: vec![
                ScriptEntry { digest: Some("*".into()), exact: None, query_digest: None, response: "generic".into() },
                ScriptEntry { digest: None, exact: Some(user.into()), query_digest: None, response: "specific".into() },
            ],
        };
        let mock = ScriptedMock::new(script);
        assert_eq!(mock.complete(&query(user), &BackendConfig::mock()).unwrap().text, "specific");
        assert_eq!(mock.complete(&query("other"), &BackendConfig::mock()).unwrap().text, "generic");
    }

    #[test]
    fn script_jsonl_round_trip() {
        let script = Script {
            entries: vec![ScriptEntry {
                digest: Some(user_message_digest("m")),
                exact: None,
                query_digest: None,
                response: "r".to_string(),
            }],
        };
        let parsed = Script::from_jsonl(&script.to_jsonl()).unwrap();
        assert_eq!(parsed, script);
        assert!(Script::from_jsonl("{\"response\": \"no matcher\"}").is_err());
    }

    struct Flaky {
        calls: AtomicU32,
        fail_first: u32,
    }

    impl HttpTransport for Flaky {
        fn post(&self, _request: &RemoteRequest) -> Result<RemoteResponse, String> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
            if n <= self.fail_first {
                Err(format!("injected failure {n}"))
            } else {
                Ok(RemoteResponse { text: "Decision: MAINTAIN".into(), usage: Some((10, 3)) })
            }
        }
    }

    fn remote_config() -> BackendConfig {
        BackendConfig {
            kind: BackendKind::RemoteHttp,
            endpoint: Some("http://localhost/unused".into()),
            retry: RetryPolicy { max_attempts: 3, backoff_ms: 1 },
            ..BackendConfig::mock()
        }
    }

    #[test]
    fn remote_retries_until_success() {
        std::env::set_var(API_KEY_ENV, "test-key");
        let transport = Flaky { calls: AtomicU32::new(0), fail_first: 2 };
        let backend = RemoteHttp::with_transport(Box::new(transport));
        let completion = backend.complete(&query("q"), &remote_config()).unwrap();
        assert_eq!(completion.text, "Decision: MAINTAIN");
        assert_eq!(completion.input_tokens, 10.0);
        assert!(!completion.tokens_estimated);
    }

    #[test]
    fn remote_surfaces_exhausted_retries() {
        std::env::set_var(API_KEY_ENV, "test-key");
        let transport = Flaky { calls: AtomicU32::new(0), fail_first: 99 };
        let backend = RemoteHttp::with_transport(Box::new(transport));
        match backend.complete(&query("q"), &remote_config()) {
            Err(GatewayError::BackendUnavailable { attempts: 3, last }) => {
                assert!(last.contains("injected failure 3"));
            }
            other => panic!("expected exhausted retries, got {other:?}"),
        }
    }

    #[test]
    fn registry_knows_builtin_backends() {
        let reg = BackendRegistry::standard();
        assert!(reg.build("scripted_mock", &BackendConfig::mock()).is_ok());
        assert!(matches!(
            reg.build("nope", &BackendConfig::mock()),
            Err(GatewayError::UnknownBackend(_))
        ));
        // invalid temperature rejected before construction
        let bad = BackendConfig { temperature: 1.5, ..BackendConfig::mock() };
        assert!(matches!(
            reg.build("scripted_mock", &bad),
            Err(GatewayError::InvalidConfig(_))
        ));
    }

    fn completion(input: f64, output: f64, latency: f64) -> Completion {
        Completion {
            text: String::new(),
            input_tokens: input,
            output_tokens: output,
            latency_secs: latency,
            backend_id: "test".into(),
            tokens_estimated: true,
        }
    }

    #[test]
    fn overhead_means_match_reference_figures() {
        let batch = [completion(900.0, 230.0, 12.0), completion(922.66, 237.42, 11.6)];
        let summary = overhead_summary(&batch).unwrap();
        assert_eq!(summary.mean_input_tokens, 911.33);
        assert_eq!(summary.mean_output_tokens, 233.71);
        assert_eq!(summary.mean_latency_secs, 11.8);
    }

    #[test]
    fn overhead_edge_cases() {
        let single = [completion(5.0, 7.0, 1.25)];
        let s = overhead_summary(&single).unwrap();
        assert_eq!((s.mean_input_tokens, s.mean_output_tokens, s.mean_latency_secs), (5.0, 7.0, 1.25));

        let zeros = [completion(0.0, 0.0, 0.0), completion(0.0, 0.0, 0.0)];
        let z = overhead_summary(&zeros).unwrap();
        assert_eq!((z.mean_input_tokens, z.mean_output_tokens, z.mean_latency_secs), (0.0, 0.0, 0.0));

        assert!(matches!(overhead_summary(&[]), Err(GatewayError::EmptyInput)));
    }
}
