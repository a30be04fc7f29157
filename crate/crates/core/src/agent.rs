//! Pluggable gateway to the model-backed pipeline roles (relation
//! extraction, anchor verification, synthesis, correction, judging) over an
//! OpenAI-compatible chat endpoint, plus a scripted transport so the whole
//! test suite runs offline.

use crate::program::{parse_program, ParseError, Program};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};
use thiserror::Error;

pub const ENV_ENDPOINT: &str = "GEO_AGENT_ENDPOINT";
pub const ENV_KEY: &str = "GEO_AGENT_KEY";
pub const ENV_MODEL: &str = "GEO_AGENT_MODEL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentRole {
    Extract,
    Verify,
    Generate,
    Refine,
    Judge,
}

#[derive(Debug, Clone)]
pub struct AgentRequest {
    pub role: AgentRole,
    pub prompt: String,
    /// PNG-encoded attachments, at most four, each <= 8 MiB.
    pub images: Vec<Vec<u8>>,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl AgentRequest {
    pub fn new(role: AgentRole, prompt: String) -> Self {
        Self {
            role,
            prompt,
            images: Vec::new(),
            max_tokens: 4096,
            temperature: 0.0,
        }
    }

    pub fn with_image(mut self, png_bytes: Vec<u8>) -> Self {
        self.images.push(png_bytes);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent credentials missing: set {ENV_ENDPOINT} and {ENV_KEY}")]
    CredentialMissing,
    #[error("transport failure (status {status}): {body}")]
    Transport { status: u16, body: String },
    #[error("agent request timed out")]
    Timeout,
    #[error("no program found in the agent reply")]
    NoProgramFound,
    #[error("agent program failed to parse: {0}")]
    Program(#[from] ParseError),
    #[error("malformed request: {0}")]
    BadRequest(String),
}

/// One chat round trip. Implementations make a single attempt; the gateway
/// owns retry policy.
pub trait ChatTransport: Send + Sync {
    fn send(&self, req: &AgentRequest) -> Result<AgentResponse, AgentError>;
    /// True when requests leave the process.
    fn is_remote(&self) -> bool {
        false
    }
}

/// HTTP transport against an OpenAI-compatible chat-completions endpoint.
pub struct HttpTransport {
    endpoint: String,
    key: String,
    model: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(endpoint: String, key: String, model: String, timeout: Duration) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("client builds");
        Self {
            endpoint,
            key,
            model,
            client,
        }
    }

    /// Build from `GEO_AGENT_*` environment variables; fails before any
    /// network activity when they are absent.
    pub fn from_env() -> Result<Self, AgentError> {
        let endpoint = std::env::var(ENV_ENDPOINT).map_err(|_| AgentError::CredentialMissing)?;
        let key = std::env::var(ENV_KEY).map_err(|_| AgentError::CredentialMissing)?;
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4o-mini".to_string());
        if endpoint.trim().is_empty() || key.trim().is_empty() {
            return Err(AgentError::CredentialMissing);
        }
        Ok(Self::new(endpoint, key, model, Duration::from_secs(60)))
    }
}

const MAX_IMAGE_BYTES: usize = 8 * 1024 * 1024;

fn validate_request(req: &AgentRequest) -> Result<(), AgentError> {
    if req.prompt.is_empty() {
        return Err(AgentError::BadRequest("empty prompt".into()));
    }
    if req.images.len() > 4 {
        return Err(AgentError::BadRequest("more than 4 images".into()));
    }
    if req.images.iter().any(|i| i.len() > MAX_IMAGE_BYTES) {
        return Err(AgentError::BadRequest("image exceeds 8 MiB".into()));
    }
    Ok(())
}

impl ChatTransport for HttpTransport {
    fn send(&self, req: &AgentRequest) -> Result<AgentResponse, AgentError> {
        use base64_encode as b64;
        let mut content = vec![serde_json::json!({"type": "text", "text": req.prompt})];
        for img in &req.images {
            content.push(serde_json::json!({
                "type": "image_url",
                "image_url": {"url": format!("data:image/png;base64,{}", b64(img))}
            }));
        }
        let body = serde_json::json!({
            "model": self.model,
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
            "messages": [{"role": "user", "content": content}],
        });
        let started = Instant::now();
        let resp = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    AgentError::Timeout
                } else {
                    AgentError::Transport {
                        status: 0,
                        body: e.to_string(),
                    }
                }
            })?;
        let status = resp.status().as_u16();
        let text = resp.text().unwrap_or_default();
        if !(200..300).contains(&status) {
            return Err(AgentError::Transport {
                status,
                body: text.chars().take(400).collect(),
            });
        }
        let parsed: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| AgentError::Transport {
                status,
                body: format!("unparseable reply: {e}"),
            })?;
        let reply = parsed["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string();
        Ok(AgentResponse {
            text: reply,
            prompt_tokens: parsed["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
            completion_tokens: parsed["usage"]["completion_tokens"].as_u64().unwrap_or(0),
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn is_remote(&self) -> bool {
        true
    }
}

fn base64_encode(bytes: &[u8]) -> String {
    const TABLE: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    let mut out = String::with_capacity(bytes.len().div_ceil(3) * 4);
    for chunk in bytes.chunks(3) {
        let b = [
            chunk[0],
            chunk.get(1).copied().unwrap_or(0),
            chunk.get(2).copied().unwrap_or(0),
        ];
        let n = (b[0] as u32) << 16 | (b[1] as u32) << 8 | b[2] as u32;
        out.push(TABLE[(n >> 18) as usize & 63] as char);
        out.push(TABLE[(n >> 12) as usize & 63] as char);
        out.push(if chunk.len() > 1 {
            TABLE[(n >> 6) as usize & 63] as char
        } else {
            '='
        });
        out.push(if chunk.len() > 2 {
            TABLE[n as usize & 63] as char
        } else {
            '='
        });
    }
    out
}

/// One scripted reply for the mock transport.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockReply {
    #[serde(default = "default_status")]
    pub status: u16,
    #[serde(default)]
    pub text: String,
}

fn default_status() -> u16 {
    200
}

/// Scripted transport: replies are consumed in sequence order. Never touches
/// the network.
pub struct MockTransport {
    replies: Mutex<VecDeque<MockReply>>,
}

impl MockTransport {
    pub fn new(replies: Vec<MockReply>) -> Self {
        Self {
            replies: Mutex::new(replies.into()),
        }
    }

    pub fn echo(text: &str) -> Self {
        Self::new(vec![MockReply {
            status: 200,
            text: text.to_string(),
        }])
    }

    /// Load one JSON object per line: {"status": 200, "text": "..."}.
    pub fn from_jsonl(source: &str) -> Result<Self, serde_json::Error> {
        let mut replies = Vec::new();
        for line in source.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            replies.push(serde_json::from_str::<MockReply>(line)?);
        }
        Ok(Self::new(replies))
    }
}

impl ChatTransport for MockTransport {
    fn send(&self, _req: &AgentRequest) -> Result<AgentResponse, AgentError> {
        let reply = self
            .replies
            .lock()
            .expect("mock lock")
            .pop_front()
            .ok_or(AgentError::Transport {
                status: 0,
                body: "mock script exhausted".into(),
            })?;
        if !(200..300).contains(&reply.status) {
            return Err(AgentError::Transport {
                status: reply.status,
                body: reply.text.chars().take(400).collect(),
            });
        }
        Ok(AgentResponse {
            text: reply.text,
            prompt_tokens: 0,
            completion_tokens: 0,
            latency_ms: 0,
        })
    }
}

/// Counting semaphore bounding in-flight requests.
struct Gate {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Self {
            permits: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut p = self.permits.lock().expect("gate lock");
        while *p == 0 {
            p = self.cv.wait(p).expect("gate wait");
        }
        *p -= 1;
    }

    fn release(&self) {
        *self.permits.lock().expect("gate lock") += 1;
        self.cv.notify_one();
    }
}

/// A recorded exchange, kept verbatim for auditability.
#[derive(Debug, Clone, Serialize)]
pub struct Exchange {
    pub role: AgentRole,
    pub prompt: String,
    pub reply: Option<String>,
    pub error: Option<String>,
    pub attempts: u32,
    pub latency_ms: u64,
}

/// Shared gateway: concurrency cap, retry with exponential backoff, and a
/// verbatim exchange log.
pub struct AgentGateway {
    transport: Box<dyn ChatTransport>,
    gate: Gate,
    backoff: Vec<Duration>,
    log: Mutex<Vec<Exchange>>,
}

impl AgentGateway {
    pub fn new(transport: Box<dyn ChatTransport>) -> Self {
        Self {
            transport,
            gate: Gate::new(4),
            backoff: vec![
                Duration::from_secs(1),
                Duration::from_secs(2),
                Duration::from_secs(4),
            ],
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn with_backoff(mut self, backoff: Vec<Duration>) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_concurrency(mut self, cap: usize) -> Self {
        self.gate = Gate::new(cap);
        self
    }

    pub fn from_env() -> Result<Self, AgentError> {
        Ok(Self::new(Box::new(HttpTransport::from_env()?)))
    }

    pub fn mock(transport: MockTransport) -> Self {
        // Same retry count as production, no sleeping.
        Self::new(Box::new(transport)).with_backoff(vec![Duration::ZERO; 3])
    }

    pub fn is_remote(&self) -> bool {
        self.transport.is_remote()
    }

    /// One logical request: retried on transport failures and timeouts, never
    /// after a success.
    pub fn complete(&self, req: &AgentRequest) -> Result<AgentResponse, AgentError> {
        validate_request(req)?;
        self.gate.acquire();
        let result = self.complete_inner(req);
        self.gate.release();
        result
    }

    fn complete_inner(&self, req: &AgentRequest) -> Result<AgentResponse, AgentError> {
        let started = Instant::now();
        let mut attempts = 0u32;
        let mut last_err: Option<AgentError> = None;
        for attempt in 0..=self.backoff.len() {
            attempts += 1;
            match self.transport.send(req) {
                Ok(mut resp) => {
                    resp.latency_ms = resp.latency_ms.max(started.elapsed().as_millis() as u64);
                    self.push_log(req, Some(&resp), None, attempts);
                    return Ok(resp);
                }
                Err(e @ (AgentError::Transport { .. } | AgentError::Timeout)) => {
                    if attempt < self.backoff.len() {
                        std::thread::sleep(self.backoff[attempt]);
                    }
                    last_err = Some(e);
                }
                Err(e) => {
                    self.push_log(req, None, Some(&e), attempts);
                    return Err(e);
                }
            }
        }
        let err = last_err.unwrap_or(AgentError::Timeout);
        self.push_log(req, None, Some(&err), attempts);
        Err(err)
    }

    fn push_log(
        &self,
        req: &AgentRequest,
        resp: Option<&AgentResponse>,
        err: Option<&AgentError>,
        attempts: u32,
    ) {
        self.log.lock().expect("log lock").push(Exchange {
            role: req.role,
            prompt: req.prompt.clone(),
            reply: resp.map(|r| r.text.clone()),
            error: err.map(|e| e.to_string()),
            attempts,
            latency_ms: resp.map(|r| r.latency_ms).unwrap_or(0),
        });
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().expect("log lock").clone()
    }
}

/// Fill a role template: `{NAME}` placeholders are substituted verbatim.
pub fn render_prompt(role: AgentRole, substitutions: &[(&str, &str)]) -> String {
    let template = match role {
        AgentRole::Extract => include_str!("prompts/extract.txt"),
        AgentRole::Verify => include_str!("prompts/verify.txt"),
        AgentRole::Generate => include_str!("prompts/generate.txt"),
        AgentRole::Refine => include_str!("prompts/refine.txt"),
        AgentRole::Judge => include_str!("prompts/judge.txt"),
    };
    let mut out = template.to_string();
    for (name, value) in substitutions {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// Extract the program from an agent reply: the first fenced code block, or
/// the whole body when there is none. A candidate without a `canvas` line is
/// not a program at all.
pub fn parse_agent_program(text: &str) -> Result<Program, AgentError> {
    let candidate = first_fenced_block(text).unwrap_or_else(|| text.trim().to_string());
    let has_canvas = candidate
        .lines()
        .any(|l| l.trim_start().starts_with("canvas"));
    if !has_canvas {
        return Err(AgentError::NoProgramFound);
    }
    Ok(parse_program(&candidate)?)
}

fn first_fenced_block(text: &str) -> Option<String> {
    let mut in_block = false;
    let mut body = String::new();
    for line in text.lines() {
        if line.trim_start().starts_with("```") {
            if in_block {
                return Some(body);
            }
            in_block = true;
            continue;
        }
        if in_block {
            body.push_str(line);
            body.push('\n');
        }
    }
    None
}

/// Judge reply contract: four 0-100 rubric scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeScores {
    pub sc: f64,
    pub pp: f64,
    pub scp: f64,
    pub lo: f64,
}

pub fn parse_judge_scores(text: &str) -> Option<JudgeScores> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    serde_json::from_str(&text[start..=end]).ok()
}
