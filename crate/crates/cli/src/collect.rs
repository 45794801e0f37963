//! Elicitation against an OpenAI-compatible chat completions endpoint.
//!
//! Every (statement, question) pair is answered either from the append-only
//! response cache or by a live request; raw responses always land in the
//! cache first, and the ratings file is assembled from the cache afterwards,
//! sorted by statement id. A rerun over a fully cached corpus makes zero
//! network calls, and an interrupted run resumes to the same final bytes.
//!
//! Failed statements (after bounded retries with exponential backoff) are
//! marked pending and skipped; the run stays resumable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sensus_core::corpus::{Corpus, ModelRating, ModelRatings};
use sensus_core::elicit::{
    aggregate_token_probs, build_prompt, repeated_sampling_estimate, AnswerDistribution, Lexicon,
    PromptSpec, Question, Role,
};

use crate::error::{Result, RunError};

pub const API_KEY_ENV: &str = "SENSUS_API_KEY";
pub const API_KEY_ENV_FALLBACK: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectMode {
    /// One request per question; top-20 next-token log-probabilities.
    TokenProbs,
    /// n completions per question; empirical first-token frequencies.
    Sampling,
}

impl CollectMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CollectMode::TokenProbs => "token",
            CollectMode::Sampling => "sampling",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CollectConfig {
    /// Chat completions URL, or a base URL to which the standard path is
    /// appended.
    pub endpoint: String,
    pub model: String,
    pub mode: CollectMode,
    /// Completions per question in sampling mode.
    pub samples: usize,
    pub concurrency: usize,
    /// Token-bucket rate limit on request starts.
    pub requests_per_second: Option<f64>,
    pub system_prompt: Option<String>,
    pub suppress_reasoning: bool,
    pub most_other_people: bool,
    pub api_key: Option<String>,
    pub max_retries: u32,
    pub retry_base_ms: u64,
    pub timeout_secs: u64,
}

impl CollectConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        CollectConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            mode: CollectMode::TokenProbs,
            samples: 23,
            concurrency: 4,
            requests_per_second: None,
            system_prompt: None,
            suppress_reasoning: false,
            most_other_people: false,
            api_key: None,
            max_retries: 4,
            retry_base_ms: 250,
            timeout_secs: 60,
        }
    }

    fn url(&self) -> String {
        if self.endpoint.contains("/chat/completions") {
            self.endpoint.clone()
        } else {
            format!(
                "{}/v1/chat/completions",
                self.endpoint.trim_end_matches('/')
            )
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    request: serde_json::Value,
    response: serde_json::Value,
    timestamp: u64,
}

/// Cache key: hash of the identity of one elicitation call.
fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            use std::fmt::Write as _;
            let _ = write!(acc, "{b:02x}");
            acc
        })
}

pub fn cache_key(config: &CollectConfig, statement_id: &str, question: Question) -> String {
    let identity = serde_json::json!({
        "model": config.model,
        "statement_id": statement_id,
        "question": question.as_str(),
        "mode": config.mode.as_str(),
        "samples": if config.mode == CollectMode::Sampling { Some(config.samples) } else { None },
        "system_prompt": config.system_prompt,
        "suppress_reasoning": config.suppress_reasoning,
        "most_other_people": config.most_other_people,
        "temperature": 1.0,
    });
    let mut hasher = Sha256::new();
    hasher.update(identity.to_string().as_bytes());
    hex_digest(hasher)
}

fn request_body(config: &CollectConfig, statement: &str, question: Question) -> serde_json::Value {
    let spec = PromptSpec {
        statement: statement.to_string(),
        question,
        system_prompt: config.system_prompt.clone(),
        suppress_reasoning: config.suppress_reasoning,
        most_other_people: config.most_other_people,
    };
    let messages: Vec<serde_json::Value> = build_prompt(&spec)
        .into_iter()
        .map(|m| {
            serde_json::json!({
                "role": match m.role { Role::System => "system", Role::User => "user" },
                "content": m.content,
            })
        })
        .collect();
    match config.mode {
        CollectMode::TokenProbs => serde_json::json!({
            "model": config.model,
            "messages": messages,
            "temperature": 1.0,
            "logprobs": true,
            "top_logprobs": 20,
            "max_tokens": 1,
        }),
        CollectMode::Sampling => serde_json::json!({
            "model": config.model,
            "messages": messages,
            "temperature": 1.0,
            "n": config.samples,
            "max_tokens": 8,
        }),
    }
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    #[serde(default)]
    message: Option<ChoiceMessage>,
    #[serde(default)]
    logprobs: Option<ChoiceLogprobs>,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ChoiceLogprobs {
    #[serde(default)]
    content: Vec<TokenLogprob>,
}

#[derive(Debug, Deserialize)]
struct TokenLogprob {
    token: String,
    logprob: f64,
    #[serde(default)]
    top_logprobs: Vec<TopToken>,
}

#[derive(Debug, Deserialize)]
struct TopToken {
    token: String,
    logprob: f64,
}

/// First maximal ASCII-letter run of a sampled completion; what the answer
/// classifier sees in sampling mode.
pub fn first_answer_token(content: &str) -> &str {
    let start = content.find(|c: char| c.is_ascii_alphabetic());
    match start {
        Some(s) => {
            let rest = &content[s..];
            let end = rest
                .find(|c: char| !c.is_ascii_alphabetic())
                .unwrap_or(rest.len());
            &rest[..end]
        }
        None => "",
    }
}

/// Turns one raw response into an answer distribution.
pub fn parse_response(
    response: &serde_json::Value,
    mode: CollectMode,
    lexicon: &Lexicon,
) -> Result<AnswerDistribution> {
    let parsed: ChatResponse = serde_json::from_value(response.clone())
        .map_err(|e| RunError::runtime(format!("malformed chat response: {e}")))?;
    match mode {
        CollectMode::TokenProbs => {
            let first = parsed
                .choices
                .first()
                .and_then(|c| c.logprobs.as_ref())
                .and_then(|l| l.content.first())
                .ok_or_else(|| RunError::runtime("response carries no logprobs".to_string()))?;
            let pairs: Vec<(String, f64)> = if first.top_logprobs.is_empty() {
                vec![(first.token.clone(), first.logprob.exp())]
            } else {
                first
                    .top_logprobs
                    .iter()
                    .map(|t| (t.token.clone(), t.logprob.exp()))
                    .collect()
            };
            Ok(aggregate_token_probs(
                pairs.iter().map(|(t, p)| (t.as_str(), *p)),
                lexicon,
            ))
        }
        CollectMode::Sampling => {
            let tokens: Vec<String> = parsed
                .choices
                .iter()
                .filter_map(|c| c.message.as_ref().and_then(|m| m.content.as_deref()))
                .map(|content| first_answer_token(content).to_string())
                .collect();
            Ok(repeated_sampling_estimate(
                tokens.iter().map(|s| s.as_str()),
                lexicon,
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CollectReport {
    pub n_statements: usize,
    pub n_requests_made: usize,
    pub n_from_cache: usize,
    pub n_pending: usize,
    pub n_invalid_rows: usize,
}

struct CacheWriter {
    file: Mutex<fs::File>,
}

impl CacheWriter {
    fn append(&self, entry: &CacheEntry) -> Result<()> {
        let line = serde_json::to_string(entry).map_err(|e| RunError::runtime(e.to_string()))?;
        let mut file = self.file.lock().expect("cache writer lock");
        writeln!(file, "{line}")?;
        file.flush()?;
        Ok(())
    }
}

struct TokenBucket {
    state: Mutex<(f64, Instant)>,
    rate: f64,
    capacity: f64,
}

impl TokenBucket {
    fn new(rate: f64) -> Self {
        TokenBucket {
            state: Mutex::new((rate.max(1.0), Instant::now())),
            rate,
            capacity: rate.max(1.0),
        }
    }

    fn take(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().expect("bucket lock");
                let now = Instant::now();
                let refill = now.duration_since(st.1).as_secs_f64() * self.rate;
                st.0 = (st.0 + refill).min(self.capacity);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    None
                } else {
                    Some(Duration::from_secs_f64((1.0 - st.0) / self.rate))
                }
            };
            match wait {
                None => return,
                Some(d) => std::thread::sleep(d),
            }
        }
    }
}

fn load_cache(path: &Path) -> Result<BTreeMap<String, serde_json::Value>> {
    let mut map = BTreeMap::new();
    if !path.exists() {
        return Ok(map);
    }
    let text = fs::read_to_string(path)?;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CacheEntry = serde_json::from_str(line).map_err(|e| {
            RunError::validation(format!("{}:{}: bad cache line: {e}", path.display(), idx + 1))
        })?;
        map.insert(entry.key, entry.response);
    }
    Ok(map)
}

fn send_with_retries(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &serde_json::Value,
    max_retries: u32,
    retry_base_ms: u64,
) -> std::result::Result<serde_json::Value, String> {
    let mut last_err = String::new();
    for attempt in 0..=max_retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(retry_base_ms << (attempt - 1).min(6)));
        }
        let mut req = client.post(url).json(body);
        if let Some(key) = api_key {
            req = req.bearer_auth(key);
        }
        match req.send() {
            Ok(resp) => {
                let status = resp.status();
                if status.is_success() {
                    match resp.json::<serde_json::Value>() {
                        Ok(v) => return Ok(v),
                        Err(e) => last_err = format!("bad JSON body: {e}"),
                    }
                } else if status.as_u16() == 429 || status.is_server_error() {
                    last_err = format!("HTTP {status}");
                } else {
                    return Err(format!("HTTP {status}"));
                }
            }
            Err(e) => last_err = format!("transport: {e}"),
        }
    }
    Err(last_err)
}

/// Runs the full elicitation: answers every (statement, question) pair from
/// cache or the endpoint, appends raw responses to the cache, and writes the
/// assembled ratings file.
pub fn collect(
    corpus: &Corpus,
    config: &CollectConfig,
    cache_path: &Path,
    out_path: &Path,
) -> Result<(CollectReport, ModelRatings)> {
    let lexicon = Lexicon::default();
    let mut cache = load_cache(cache_path)?;

    // Work items not answerable from cache.
    #[derive(Clone)]
    struct Task {
        key: String,
        body: serde_json::Value,
    }
    let mut tasks: Vec<Task> = Vec::new();
    let mut n_from_cache = 0usize;
    for statement in corpus.statements() {
        for question in [Question::Agree, Question::OthersAgree] {
            let key = cache_key(config, &statement.id, question);
            if cache.contains_key(&key) {
                n_from_cache += 1;
            } else {
                tasks.push(Task {
                    key,
                    body: request_body(config, &statement.text, question),
                });
            }
        }
    }

    let mut n_requests_made = 0usize;
    let mut pending_keys: Vec<String> = Vec::new();
    if !tasks.is_empty() {
        if let Some(parent) = cache_path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let writer = CacheWriter {
            file: Mutex::new(
                fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(cache_path)?,
            ),
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| RunError::runtime(e.to_string()))?;
        let bucket = config.requests_per_second.map(TokenBucket::new);
        let url = config.url();
        let queue = Mutex::new(tasks.into_iter().collect::<std::collections::VecDeque<_>>());
        let results: Mutex<Vec<(String, std::result::Result<serde_json::Value, String>)>> =
            Mutex::new(Vec::new());

        std::thread::scope(|scope| {
            for _ in 0..config.concurrency.max(1) {
                scope.spawn(|| loop {
                    let task = {
                        let mut q = queue.lock().expect("queue lock");
                        q.pop_front()
                    };
                    let Some(task) = task else { break };
                    if let Some(bucket) = &bucket {
                        bucket.take();
                    }
                    let outcome = send_with_retries(
                        &client,
                        &url,
                        config.api_key.as_deref(),
                        &task.body,
                        config.max_retries,
                        config.retry_base_ms,
                    );
                    if let Ok(response) = &outcome {
                        let entry = CacheEntry {
                            key: task.key.clone(),
                            request: task.body.clone(),
                            response: response.clone(),
                            timestamp: SystemTime::now()
                                .duration_since(UNIX_EPOCH)
                                .map(|d| d.as_secs())
                                .unwrap_or(0),
                        };
                        // A failed append is fatal for resumability; surface
                        // it as a failed task.
                        if let Err(e) = writer.append(&entry) {
                            results
                                .lock()
                                .expect("results lock")
                                .push((task.key.clone(), Err(e.to_string())));
                            continue;
                        }
                    }
                    results
                        .lock()
                        .expect("results lock")
                        .push((task.key.clone(), outcome));
                });
            }
        });

        for (key, outcome) in results.into_inner().expect("results") {
            match outcome {
                Ok(response) => {
                    n_requests_made += 1;
                    cache.insert(key, response);
                }
                Err(_) => pending_keys.push(key),
            }
        }
    }

    // Assemble ratings from the cache, in statement order.
    let mut builder = ModelRatings::builder(corpus);
    let mut n_invalid_rows = 0usize;
    let mut n_complete = 0usize;
    let mut line = 0u64;
    for statement in corpus.statements() {
        let key_a = cache_key(config, &statement.id, Question::Agree);
        let key_b = cache_key(config, &statement.id, Question::OthersAgree);
        let (Some(resp_a), Some(resp_b)) = (cache.get(&key_a), cache.get(&key_b)) else {
            continue;
        };
        let dist_a = parse_response(resp_a, config.mode, &lexicon)?;
        let dist_b = parse_response(resp_b, config.mode, &lexicon)?;
        let valid = dist_a.valid && dist_b.valid;
        if !valid {
            n_invalid_rows += 1;
        }
        line += 1;
        builder
            .add(
                &config.model,
                &statement.id,
                ModelRating {
                    p_yes_a: dist_a.p_yes_rescaled,
                    p_yes_b: dist_b.p_yes_rescaled,
                    n_samples_a: dist_a.n_samples,
                    n_samples_b: dist_b.n_samples,
                    valid,
                },
                line,
            )
            .map_err(|e| RunError::runtime(format!("assembling ratings: {e}")))?;
        n_complete += 1;
    }
    let ratings = builder.finish();
    crate::formats::write_model_ratings(out_path, corpus, &ratings)?;

    let report = CollectReport {
        n_statements: n_complete,
        n_requests_made,
        n_from_cache,
        n_pending: pending_keys.len(),
        n_invalid_rows,
    };
    Ok((report, ratings))
}
