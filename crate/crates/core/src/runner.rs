//! Evaluation runner: executes prompt sets against chat-completion backends.
//!
//! Requests run on a bounded worker pool, retry transient failures with
//! exponential backoff, and cache responses content-addressed by
//! `(backend, sampling params, reasoning, prompt hash)` so reruns are free
//! and offline. Mock backends (oracle, uniform-random) drive the test and
//! acceptance suites without any network.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::prelude::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompting::{ChatMessage, Condition, ExpectedAnswer, PromptInstance, PromptPayload, SeedCoords};
use crate::scoring::{matches_expected, parse_for_task, ParsedAnswer};
use crate::tasks::{Anchor, QueryKind};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("backend unavailable after {attempts} attempts: {reason}")]
    BackendUnavailable { attempts: u32, reason: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("cache io error at {path}: {source}")]
    CacheIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no prompts to run")]
    EmptyPromptSet,
}

/// Reasoning setting for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningMode {
    #[default]
    Off,
    /// Allow up to this many intermediate reasoning tokens.
    Budget(u32),
}

impl ReasoningMode {
    pub const DEFAULT_BUDGET: u32 = 256;

    pub fn fingerprint(&self) -> String {
        match self {
            ReasoningMode::Off => "off".to_string(),
            ReasoningMode::Budget(tokens) => format!("budget:{tokens}"),
        }
    }
}

/// How a backend exposes intermediate reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningChannel {
    /// Request-level reasoning field; trace returned alongside the answer.
    Native,
    /// System-instructed think-then-answer inside a `<think>` block that is
    /// stripped before parsing.
    #[default]
    Fallback,
}

/// HTTP chat-completion backend settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub id: String,
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_answer_tokens")]
    pub max_answer_tokens: u32,
    #[serde(default)]
    pub reasoning: ReasoningMode,
    #[serde(default)]
    pub reasoning_channel: ReasoningChannel,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Environment variable holding the API key.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
}

fn default_temperature() -> f64 {
    0.7
}
fn default_max_answer_tokens() -> u32 {
    32
}
fn default_timeout_secs() -> u64 {
    60
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    250
}
fn default_concurrency() -> usize {
    4
}
fn default_api_key_env() -> String {
    "POSKIT_API_KEY".to_string()
}

/// One model call, scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub condition: Condition,
    pub queried_offset: Option<u32>,
    /// Anchor position `r` for relative-anchor trials.
    pub anchor_position: Option<u32>,
    pub prompt_hash: String,
    pub expected: ExpectedAnswer,
    pub raw_response: String,
    pub reasoning_trace: Option<String>,
    pub parsed: ParsedAnswer,
    /// Absolute 1-based position of the answered item (position→item only).
    pub answered_position: Option<u32>,
    pub correct: bool,
    pub latency_ms: u64,
    pub backend_id: String,
    #[serde(default)]
    pub seed_coords: SeedCoords,
}

/// A reply from any backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendReply {
    pub text: String,
    pub reasoning_trace: Option<String>,
    pub latency_ms: u64,
}

/// A chat-completion backend. Real backends look only at the prompt's
/// messages; mock backends may consult the gold metadata.
pub trait Backend: Sync {
    fn id(&self) -> &str;
    /// Parameters that must invalidate cached responses when changed.
    fn sampling_fingerprint(&self) -> String;
    fn complete(
        &self,
        prompt: &PromptInstance,
        reasoning: ReasoningMode,
    ) -> Result<BackendReply, RunnerError>;
}

/// Stable hash of a prompt's rendered messages.
pub fn prompt_hash(messages: &[ChatMessage]) -> String {
    let json = serde_json::to_string(messages).expect("messages serialize");
    hex_digest(json.as_bytes())
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Content-addressed response cache: one JSON file per
/// `(backend, sampling, reasoning, prompt)` key.
pub struct ResponseCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    backend_id: String,
    reply: BackendReply,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, RunnerError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| RunnerError::CacheIo {
            path: dir.clone(),
            source,
        })?;
        Ok(ResponseCache { dir })
    }

    fn key(&self, backend: &dyn Backend, reasoning: ReasoningMode, prompt_hash: &str) -> String {
        hex_digest(
            format!(
                "{}\n{}\n{}\n{}",
                backend.id(),
                backend.sampling_fingerprint(),
                reasoning.fingerprint(),
                prompt_hash
            )
            .as_bytes(),
        )
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(
        &self,
        backend: &dyn Backend,
        reasoning: ReasoningMode,
        prompt_hash: &str,
    ) -> Option<BackendReply> {
        let path = self.path_for(&self.key(backend, reasoning, prompt_hash));
        let bytes = std::fs::read(path).ok()?;
        serde_json::from_slice::<CacheEntry>(&bytes)
            .ok()
            .map(|e| e.reply)
    }

    pub fn put(
        &self,
        backend: &dyn Backend,
        reasoning: ReasoningMode,
        prompt_hash: &str,
        reply: &BackendReply,
    ) -> Result<(), RunnerError> {
        static NONCE: AtomicUsize = AtomicUsize::new(0);
        let key = self.key(backend, reasoning, prompt_hash);
        let path = self.path_for(&key);
        let tmp = self.dir.join(format!(
            "{key}.tmp.{}.{}",
            std::process::id(),
            NONCE.fetch_add(1, Ordering::Relaxed)
        ));
        let entry = CacheEntry {
            backend_id: backend.id().to_string(),
            reply: reply.clone(),
        };
        let bytes = serde_json::to_vec(&entry).expect("cache entry serializes");
        std::fs::write(&tmp, bytes).map_err(|source| RunnerError::CacheIo {
            path: tmp.clone(),
            source,
        })?;
        match std::fs::rename(&tmp, &path) {
            Ok(()) => Ok(()),
            // A concurrent writer landed the same deterministic entry.
            Err(_) if path.exists() => {
                let _ = std::fs::remove_file(&tmp);
                Ok(())
            }
            Err(source) => Err(RunnerError::CacheIo { path, source }),
        }
    }
}

/// Tracks the number of requests in flight, for throughput-bound checks.
#[derive(Default)]
pub struct InFlightGauge {
    current: AtomicUsize,
    max: AtomicUsize,
}

impl InFlightGauge {
    pub fn enter(&self) {
        let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.max.fetch_max(now, Ordering::SeqCst);
    }
    pub fn exit(&self) {
        self.current.fetch_sub(1, Ordering::SeqCst);
    }
    pub fn max_observed(&self) -> usize {
        self.max.load(Ordering::SeqCst)
    }
}

/// Execution settings for a run, independent of the backend transport.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    pub concurrency: usize,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub reasoning: ReasoningMode,
    pub cache: Option<&'a ResponseCache>,
    pub gauge: Option<&'a InFlightGauge>,
}

impl Default for RunContext<'_> {
    fn default() -> Self {
        RunContext {
            concurrency: default_concurrency(),
            max_retries: default_max_retries(),
            backoff_base_ms: default_backoff_ms(),
            reasoning: ReasoningMode::Off,
            cache: None,
            gauge: None,
        }
    }
}

impl<'a> RunContext<'a> {
    pub fn from_backend_config(config: &BackendConfig) -> RunContext<'a> {
        RunContext {
            concurrency: config.concurrency,
            max_retries: config.max_retries,
            backoff_base_ms: config.backoff_base_ms,
            reasoning: config.reasoning,
            ..RunContext::default()
        }
    }
}

/// Runs every prompt against the backend, one [`TrialRecord`] per prompt.
///
/// Malformed responses score as unparseable-incorrect without aborting the
/// run; a backend that stays unavailable through the retry budget aborts
/// with the first failure in prompt order.
pub fn run_condition(
    prompts: &[PromptInstance],
    backend: &dyn Backend,
    ctx: &RunContext,
) -> Result<Vec<TrialRecord>, RunnerError> {
    if prompts.is_empty() {
        return Err(RunnerError::EmptyPromptSet);
    }
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<Result<TrialRecord, RunnerError>>>> =
        prompts.iter().map(|_| Mutex::new(None)).collect();
    let workers = ctx.concurrency.max(1).min(prompts.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= prompts.len() {
                    break;
                }
                let outcome = run_one(&prompts[index], backend, ctx);
                if outcome.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                *slots[index].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut records = Vec::with_capacity(prompts.len());
    let mut skipped = false;
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(Ok(record)) => records.push(record),
            // The error that tripped the abort wins over skipped slots.
            Some(Err(error)) => return Err(error),
            None => skipped = true,
        }
    }
    if skipped {
        return Err(RunnerError::BackendUnavailable {
            attempts: 0,
            reason: "run aborted before some prompts were attempted".into(),
        });
    }
    Ok(records)
}

fn run_one(
    prompt: &PromptInstance,
    backend: &dyn Backend,
    ctx: &RunContext,
) -> Result<TrialRecord, RunnerError> {
    let hash = prompt_hash(&prompt.messages);

    let cached = ctx
        .cache
        .and_then(|cache| cache.get(backend, ctx.reasoning, &hash));
    let reply = match cached {
        Some(reply) => Ok(reply),
        None => {
            let fresh = call_with_retries(prompt, backend, ctx);
            if let (Ok(reply), Some(cache)) = (&fresh, ctx.cache) {
                cache.put(backend, ctx.reasoning, &hash, reply)?;
            }
            fresh
        }
    };

    match reply {
        Ok(reply) => Ok(score_reply(prompt, &hash, backend.id(), reply)),
        // Malformed bodies become unparseable-incorrect trials.
        Err(RunnerError::MalformedResponse(body)) => Ok(score_reply(
            prompt,
            &hash,
            backend.id(),
            BackendReply {
                text: body,
                reasoning_trace: None,
                latency_ms: 0,
            },
        )),
        Err(error) => Err(error),
    }
}

fn call_with_retries(
    prompt: &PromptInstance,
    backend: &dyn Backend,
    ctx: &RunContext,
) -> Result<BackendReply, RunnerError> {
    let mut attempt = 0u32;
    loop {
        if let Some(gauge) = ctx.gauge {
            gauge.enter();
        }
        let result = backend.complete(prompt, ctx.reasoning);
        if let Some(gauge) = ctx.gauge {
            gauge.exit();
        }
        match result {
            Ok(reply) => return Ok(reply),
            Err(RunnerError::Transient(reason)) => {
                attempt += 1;
                if attempt > ctx.max_retries {
                    return Err(RunnerError::BackendUnavailable {
                        attempts: attempt,
                        reason,
                    });
                }
                let delay = ctx.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(8));
                if delay > 0 {
                    std::thread::sleep(Duration::from_millis(delay));
                }
            }
            Err(other) => return Err(other),
        }
    }
}

fn score_reply(
    prompt: &PromptInstance,
    hash: &str,
    backend_id: &str,
    reply: BackendReply,
) -> TrialRecord {
    let kind = match &prompt.payload {
        PromptPayload::Retrieval { query, .. } => Some(query.kind()),
        PromptPayload::PyIndex { .. } => None,
    };
    let candidates = prompt.candidates().map(|seq| seq.items());
    let parsed = parse_for_task(kind, &reply.text, candidates);
    let answered_position = match (&parsed, prompt.candidates()) {
        (ParsedAnswer::Item(item), Some(seq)) => seq.position_of(&item.text),
        _ => None,
    };
    let correct = matches_expected(&parsed, &prompt.expected);
    let anchor_position = match &prompt.payload {
        PromptPayload::Retrieval { query, .. } => match query.anchor() {
            Some(Anchor::Relative(r)) => Some(r),
            _ => None,
        },
        PromptPayload::PyIndex { .. } => None,
    };

    TrialRecord {
        condition: prompt.condition.clone(),
        queried_offset: prompt.queried_offset(),
        anchor_position,
        prompt_hash: hash.to_string(),
        expected: prompt.expected.clone(),
        raw_response: reply.text,
        reasoning_trace: reply.reasoning_trace,
        parsed,
        answered_position,
        correct,
        latency_ms: reply.latency_ms,
        backend_id: backend_id.to_string(),
        seed_coords: prompt.seed_coords,
    }
}

/// One prompt evaluated with reasoning off and on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReasoningPair {
    pub prompt_hash: String,
    pub off: TrialRecord,
    pub on: TrialRecord,
}

/// Runs the same prompts twice, reasoning off then on, pairing records by
/// prompt hash. Everything else (prompts, sequences, seeds) is identical,
/// so accuracy differences are attributable to the reasoning setting.
pub fn run_reasoning_comparison(
    prompts: &[PromptInstance],
    backend: &dyn Backend,
    ctx: &RunContext,
) -> Result<Vec<ReasoningPair>, RunnerError> {
    let budget = match ctx.reasoning {
        ReasoningMode::Budget(tokens) => tokens,
        ReasoningMode::Off => ReasoningMode::DEFAULT_BUDGET,
    };
    let off_ctx = RunContext {
        concurrency: ctx.concurrency,
        max_retries: ctx.max_retries,
        backoff_base_ms: ctx.backoff_base_ms,
        reasoning: ReasoningMode::Off,
        cache: ctx.cache,
        gauge: ctx.gauge,
    };
    let on_ctx = RunContext {
        reasoning: ReasoningMode::Budget(budget),
        ..off_ctx
    };
    let off = run_condition(prompts, backend, &off_ctx)?;
    let on = run_condition(prompts, backend, &on_ctx)?;
    Ok(off
        .into_iter()
        .zip(on)
        .map(|(off, on)| {
            debug_assert_eq!(off.prompt_hash, on.prompt_hash);
            ReasoningPair {
                prompt_hash: off.prompt_hash.clone(),
                off,
                on,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Mock backends
// ---------------------------------------------------------------------------

/// Answers every prompt with its gold answer.
pub struct OracleBackend;

impl Backend for OracleBackend {
    fn id(&self) -> &str {
        "mock-oracle"
    }
    fn sampling_fingerprint(&self) -> String {
        "oracle".to_string()
    }
    fn complete(
        &self,
        prompt: &PromptInstance,
        reasoning: ReasoningMode,
    ) -> Result<BackendReply, RunnerError> {
        let trace = match reasoning {
            ReasoningMode::Off => None,
            ReasoningMode::Budget(_) => Some("looked it up".to_string()),
        };
        Ok(BackendReply {
            text: prompt.expected.canonical_text(),
            reasoning_trace: trace,
            latency_ms: 0,
        })
    }
}

/// Answers uniformly at random over the plausible answer space, seeded per
/// prompt so runs are deterministic.
pub struct UniformRandomBackend {
    pub seed: u64,
}

impl Backend for UniformRandomBackend {
    fn id(&self) -> &str {
        "mock-random"
    }
    fn sampling_fingerprint(&self) -> String {
        format!("random:{}", self.seed)
    }
    fn complete(
        &self,
        prompt: &PromptInstance,
        _reasoning: ReasoningMode,
    ) -> Result<BackendReply, RunnerError> {
        let hash = prompt_hash(&prompt.messages);
        let lane = u64::from_le_bytes(hash.as_bytes()[0..8].try_into().unwrap());
        let mut stream = crate::rng::substream(self.seed, lane, 0, 0);
        let text = match &prompt.payload {
            PromptPayload::Retrieval { sequence, query, .. } => match query.kind() {
                QueryKind::PositionToItem => sequence
                    .texts()
                    .choose(&mut stream)
                    .expect("non-empty sequence")
                    .to_string(),
                QueryKind::ItemToPosition | QueryKind::Counting => stream
                    .random_range(1..=sequence.length())
                    .to_string(),
            },
            PromptPayload::PyIndex { .. } => stream.random_range(0..100).to_string(),
        };
        Ok(BackendReply {
            text,
            reasoning_trace: None,
            latency_ms: 0,
        })
    }
}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

/// A chat-completion HTTP backend speaking the widely adopted JSON schema:
/// `{model, messages, temperature, max_tokens}` in, `choices[0].message`
/// out.
pub struct HttpBackend {
    config: BackendConfig,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, RunnerError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| RunnerError::BackendUnavailable {
                attempts: 0,
                reason: format!("client construction failed: {e}"),
            })?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        Ok(HttpBackend {
            config,
            client,
            api_key,
        })
    }

    fn request_body(&self, messages: &[ChatMessage], reasoning: ReasoningMode) -> serde_json::Value {
        let mut body = serde_json::json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_answer_tokens,
        });
        if let ReasoningMode::Budget(tokens) = reasoning {
            match self.config.reasoning_channel {
                ReasoningChannel::Native => {
                    body["reasoning"] = serde_json::json!({ "max_tokens": tokens });
                }
                ReasoningChannel::Fallback => {
                    // Budget rides on top of the answer allowance.
                    body["max_tokens"] = serde_json::json!(
                        self.config.max_answer_tokens + tokens
                    );
                }
            }
        }
        body
    }

    fn effective_messages(
        &self,
        prompt: &PromptInstance,
        reasoning: ReasoningMode,
    ) -> Vec<ChatMessage> {
        match (reasoning, self.config.reasoning_channel) {
            (ReasoningMode::Budget(tokens), ReasoningChannel::Fallback) => {
                let mut messages = Vec::with_capacity(prompt.messages.len() + 1);
                messages.push(ChatMessage::system(format!(
                    "Before answering, think step by step inside a <think>...</think> \
                     block using at most {tokens} tokens. After the block, give only \
                     your final answer."
                )));
                messages.extend(prompt.messages.iter().cloned());
                messages
            }
            _ => prompt.messages.clone(),
        }
    }
}

/// Splits a `<think>...</think>` block off the front of a response.
pub fn strip_think_block(text: &str) -> (Option<String>, String) {
    let Some(open) = text.find("<think>") else {
        return (None, text.to_string());
    };
    let after_open = &text[open + "<think>".len()..];
    match after_open.find("</think>") {
        Some(close) => {
            let trace = after_open[..close].trim().to_string();
            let mut rest = String::new();
            rest.push_str(&text[..open]);
            rest.push_str(&after_open[close + "</think>".len()..]);
            (Some(trace), rest.trim().to_string())
        }
        None => (Some(after_open.trim().to_string()), text[..open].trim().to_string()),
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn sampling_fingerprint(&self) -> String {
        format!(
            "model={};temperature={};max_tokens={}",
            self.config.model, self.config.temperature, self.config.max_answer_tokens
        )
    }

    fn complete(
        &self,
        prompt: &PromptInstance,
        reasoning: ReasoningMode,
    ) -> Result<BackendReply, RunnerError> {
        let messages = self.effective_messages(prompt, reasoning);
        let body = self.request_body(&messages, reasoning);
        let started = Instant::now();
        let mut request = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| RunnerError::Transient(format!("request failed: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| RunnerError::Transient(format!("body read failed: {e}")))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(RunnerError::Transient(format!("status {status}: {text}")));
        }
        if !status.is_success() {
            return Err(RunnerError::BackendUnavailable {
                attempts: 1,
                reason: format!("status {status}: {text}"),
            });
        }
        let latency_ms = started.elapsed().as_millis() as u64;

        let parsed: serde_json::Value = serde_json::from_str(&text)
            .map_err(|_| RunnerError::MalformedResponse(text.clone()))?;
        let message = parsed
            .get("choices")
            .and_then(|c| c.get(0))
            .and_then(|c| c.get("message"))
            .ok_or_else(|| RunnerError::MalformedResponse(text.clone()))?;
        let content = message
            .get("content")
            .and_then(|c| c.as_str())
            .ok_or_else(|| RunnerError::MalformedResponse(text.clone()))?;

        let native_trace = message
            .get("reasoning_content")
            .and_then(|c| c.as_str())
            .map(str::to_string);

        let (trace, answer) = match (reasoning, self.config.reasoning_channel) {
            (ReasoningMode::Budget(_), ReasoningChannel::Fallback) => {
                strip_think_block(content)
            }
            _ => (native_trace, content.to_string()),
        };

        Ok(BackendReply {
            text: answer,
            reasoning_trace: trace,
            latency_ms,
        })
    }
}

/// Writes trial records as newline-delimited JSON, sorted by prompt hash for
/// stable bytes across worker counts.
pub fn write_trials(path: &Path, trials: &[TrialRecord]) -> std::io::Result<()> {
    let mut ordered: Vec<&TrialRecord> = trials.iter().collect();
    ordered.sort_by(|a, b| {
        (&a.condition.id(), &a.prompt_hash).cmp(&(&b.condition.id(), &b.prompt_hash))
    });
    let mut out = String::new();
    for trial in ordered {
        out.push_str(&serde_json::to_string(trial).expect("trial serializes"));
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, out)
}

/// Reads trial records from newline-delimited JSON.
pub fn read_trials(path: &Path) -> std::io::Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            serde_json::from_str(line).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::{render_prompt, PromptVariant};
    use crate::rng::{lanes, substream};
    use crate::seqgen::{ItemPool, PoolName};
    use crate::tasks::{Anchor, Direction, IndexQuery};

    fn sample_prompts(count: usize) -> Vec<PromptInstance> {
        let pool = ItemPool::builtin(PoolName::Letters);
        (0..count)
            .map(|i| {
                let mut gen = substream(50, lanes::SEQUENCE_GEN, i as u64, 0);
                let seq = pool.sample_sequence(10, &mut gen).unwrap();
                let query = IndexQuery::PositionToItem {
                    anchor: Anchor::Endpoint,
                    direction: Direction::Backward,
                    offset: (i as u32 % 10) + 1,
                };
                let variant = PromptVariant::default_for(&query);
                let mut demo = substream(50, lanes::DEMOS, i as u64, 0);
                render_prompt(&seq, &query, &variant, &pool, &mut demo).unwrap()
            })
            .collect()
    }

    #[test]
    fn oracle_gets_everything_right() {
        let prompts = sample_prompts(20);
        let ctx = RunContext::default();
        let records = run_condition(&prompts, &OracleBackend, &ctx).unwrap();
        assert_eq!(records.len(), 20);
        assert!(records.iter().all(|r| r.correct));
    }

    #[test]
    fn failed_trials_do_not_disturb_others() {
        struct HalfMalformed;
        impl Backend for HalfMalformed {
            fn id(&self) -> &str {
                "mock-half"
            }
            fn sampling_fingerprint(&self) -> String {
                "half".into()
            }
            fn complete(
                &self,
                prompt: &PromptInstance,
                _reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                if prompt.queried_offset().unwrap_or(0).is_multiple_of(2) {
                    Err(RunnerError::MalformedResponse("{}".into()))
                } else {
                    Ok(BackendReply {
                        text: prompt.expected.canonical_text(),
                        reasoning_trace: None,
                        latency_ms: 0,
                    })
                }
            }
        }
        let prompts = sample_prompts(10);
        let records = run_condition(&prompts, &HalfMalformed, &RunContext::default()).unwrap();
        assert_eq!(records.len(), 10);
        for record in &records {
            if record.queried_offset.unwrap() % 2 == 0 {
                assert!(!record.correct);
                assert_eq!(record.parsed, ParsedAnswer::Unparseable);
            } else {
                assert!(record.correct);
            }
        }
    }

    #[test]
    fn transient_failures_retry_then_succeed() {
        struct Flaky {
            calls: AtomicUsize,
        }
        impl Backend for Flaky {
            fn id(&self) -> &str {
                "mock-flaky"
            }
            fn sampling_fingerprint(&self) -> String {
                "flaky".into()
            }
            fn complete(
                &self,
                prompt: &PromptInstance,
                _reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                let n = self.calls.fetch_add(1, Ordering::SeqCst);
                if n < 2 {
                    Err(RunnerError::Transient("first calls fail".into()))
                } else {
                    Ok(BackendReply {
                        text: prompt.expected.canonical_text(),
                        reasoning_trace: None,
                        latency_ms: 0,
                    })
                }
            }
        }
        let prompts = sample_prompts(1);
        let backend = Flaky {
            calls: AtomicUsize::new(0),
        };
        let ctx = RunContext {
            max_retries: 3,
            backoff_base_ms: 0,
            concurrency: 1,
            ..RunContext::default()
        };
        let records = run_condition(&prompts, &backend, &ctx).unwrap();
        assert!(records[0].correct);
        assert_eq!(backend.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn exhausted_retries_become_unavailable() {
        struct AlwaysDown;
        impl Backend for AlwaysDown {
            fn id(&self) -> &str {
                "mock-down"
            }
            fn sampling_fingerprint(&self) -> String {
                "down".into()
            }
            fn complete(
                &self,
                _prompt: &PromptInstance,
                _reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                Err(RunnerError::Transient("connection refused".into()))
            }
        }
        let prompts = sample_prompts(3);
        let ctx = RunContext {
            max_retries: 1,
            backoff_base_ms: 0,
            ..RunContext::default()
        };
        assert!(matches!(
            run_condition(&prompts, &AlwaysDown, &ctx),
            Err(RunnerError::BackendUnavailable { .. })
        ));
    }

    #[test]
    fn warm_cache_avoids_backend_calls_and_reproduces_records() {
        struct Counting {
            calls: AtomicUsize,
        }
        impl Backend for Counting {
            fn id(&self) -> &str {
                "mock-counting"
            }
            fn sampling_fingerprint(&self) -> String {
                "counting".into()
            }
            fn complete(
                &self,
                prompt: &PromptInstance,
                _reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                self.calls.fetch_add(1, Ordering::SeqCst);
                Ok(BackendReply {
                    text: prompt.expected.canonical_text(),
                    reasoning_trace: None,
                    latency_ms: 7,
                })
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path()).unwrap();
        let prompts = sample_prompts(8);
        let backend = Counting {
            calls: AtomicUsize::new(0),
        };
        let ctx = RunContext {
            cache: Some(&cache),
            ..RunContext::default()
        };
        let first = run_condition(&prompts, &backend, &ctx).unwrap();
        assert_eq!(backend.calls.load(Ordering::SeqCst), 8);
        let second = run_condition(&prompts, &backend, &ctx).unwrap();
        assert_eq!(backend.calls.load(Ordering::SeqCst), 8, "cache was cold");
        assert_eq!(first, second);
    }

    #[test]
    fn cache_keys_include_sampling_params() {
        struct Tunable {
            temperature: f64,
            calls: AtomicUsize,
        }
        impl Backend for Tunable {
            fn id(&self) -> &str {
                "mock-tunable"
            }
            fn sampling_fingerprint(&self) -> String {
                format!("temperature={}", self.temperature)
            }
            fn complete(
                &self,
                prompt: &PromptInstance,
                _reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                self.calls.fetch_add(1, Ordering::SeqCst);
                Ok(BackendReply {
                    text: prompt.expected.canonical_text(),
                    reasoning_trace: None,
                    latency_ms: 0,
                })
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path()).unwrap();
        let prompts = sample_prompts(2);
        let warm = Tunable {
            temperature: 0.7,
            calls: AtomicUsize::new(0),
        };
        let ctx = RunContext {
            cache: Some(&cache),
            ..RunContext::default()
        };
        run_condition(&prompts, &warm, &ctx).unwrap();
        assert_eq!(warm.calls.load(Ordering::SeqCst), 2);
        // Same id, different sampling params: must miss the cache.
        let changed = Tunable {
            temperature: 0.0,
            calls: AtomicUsize::new(0),
        };
        run_condition(&prompts, &changed, &ctx).unwrap();
        assert_eq!(changed.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn concurrency_stays_within_the_limit() {
        struct Slow;
        impl Backend for Slow {
            fn id(&self) -> &str {
                "mock-slow"
            }
            fn sampling_fingerprint(&self) -> String {
                "slow".into()
            }
            fn complete(
                &self,
                prompt: &PromptInstance,
                _reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                std::thread::sleep(Duration::from_millis(3));
                Ok(BackendReply {
                    text: prompt.expected.canonical_text(),
                    reasoning_trace: None,
                    latency_ms: 3,
                })
            }
        }
        let prompts = sample_prompts(40);
        let gauge = InFlightGauge::default();
        let ctx = RunContext {
            concurrency: 5,
            gauge: Some(&gauge),
            ..RunContext::default()
        };
        let records = run_condition(&prompts, &Slow, &ctx).unwrap();
        assert_eq!(records.len(), 40);
        assert!(
            gauge.max_observed() <= 5,
            "{} requests in flight",
            gauge.max_observed()
        );
    }

    #[test]
    fn reasoning_comparison_pairs_by_hash_and_attributes_the_delta() {
        struct ThinkerOnly;
        impl Backend for ThinkerOnly {
            fn id(&self) -> &str {
                "mock-thinker"
            }
            fn sampling_fingerprint(&self) -> String {
                "thinker".into()
            }
            fn complete(
                &self,
                prompt: &PromptInstance,
                reasoning: ReasoningMode,
            ) -> Result<BackendReply, RunnerError> {
                match reasoning {
                    ReasoningMode::Budget(_) => Ok(BackendReply {
                        text: prompt.expected.canonical_text(),
                        reasoning_trace: Some("worked it out".into()),
                        latency_ms: 0,
                    }),
                    ReasoningMode::Off => Ok(BackendReply {
                        text: "no clue".into(),
                        reasoning_trace: None,
                        latency_ms: 0,
                    }),
                }
            }
        }
        let prompts = sample_prompts(12);
        let ctx = RunContext::default();
        let pairs = run_reasoning_comparison(&prompts, &ThinkerOnly, &ctx).unwrap();
        assert_eq!(pairs.len(), 12);
        for pair in &pairs {
            assert_eq!(pair.off.prompt_hash, pair.on.prompt_hash);
            assert!(!pair.off.correct);
            assert!(pair.on.correct);
        }

        // Oracle in both conditions: identical accuracy.
        let pairs = run_reasoning_comparison(&prompts, &OracleBackend, &ctx).unwrap();
        assert!(pairs.iter().all(|p| p.off.correct && p.on.correct));
    }

    #[test]
    fn think_block_stripping() {
        let (trace, answer) = strip_think_block("<think>count from the end</think>\nZ");
        assert_eq!(trace.as_deref(), Some("count from the end"));
        assert_eq!(answer, "Z");

        let (trace, answer) = strip_think_block("Z");
        assert_eq!(trace, None);
        assert_eq!(answer, "Z");

        // Unclosed block: everything after the tag is trace, answer empty.
        let (trace, answer) = strip_think_block("<think>hmm");
        assert_eq!(trace.as_deref(), Some("hmm"));
        assert_eq!(answer, "");
    }

    #[test]
    fn trial_files_round_trip() {
        let prompts = sample_prompts(5);
        let records = run_condition(&prompts, &OracleBackend, &RunContext::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.jsonl");
        write_trials(&path, &records).unwrap();
        let loaded = read_trials(&path).unwrap();
        assert_eq!(loaded.len(), records.len());
        let mut sorted = records.clone();
        sorted.sort_by(|a, b| a.prompt_hash.cmp(&b.prompt_hash));
        let mut loaded_sorted = loaded;
        loaded_sorted.sort_by(|a, b| a.prompt_hash.cmp(&b.prompt_hash));
        assert_eq!(sorted, loaded_sorted);
    }
}
