use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::LlmConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }
}

/// Body of a chat-completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub top_p: f64,
}

/// Why a single request attempt failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportFailure {
    Status { code: u16, body: String },
    Io(String),
}

/// Sends one chat request and returns the assistant text.
///
/// The HTTP transport and test stubs implement the same interface.
pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportFailure>;
}

/// OpenAI-compatible JSON transport.
pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

impl HttpTransport {
    pub fn new(cfg: &LlmConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport { agent, endpoint: cfg.endpoint.clone(), api_key: cfg.api_key.clone().unwrap_or_default() }
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportFailure> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .header("api-key", &self.api_key)
            .send_json(request)
            .map_err(|e| TransportFailure::Io(e.to_string()))?;
        let code = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| TransportFailure::Io(e.to_string()))?;
        if !(200..300).contains(&code) {
            return Err(TransportFailure::Status { code, body });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&body).map_err(|e| TransportFailure::Io(format!("malformed completion body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportFailure::Io("completion has no choices".into()))
    }
}

/// Counting semaphore bounding in-flight requests.
struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore { free: Mutex::new(n), cv: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientStats {
    pub requests: u64,
    pub retries: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Transport attempts spent, 1 when the first succeeded.
    pub attempts: u32,
}

/// Shareable chat client with retry and a global concurrency cap.
pub struct LlmClient {
    config: LlmConfig,
    transport: Arc<dyn Transport>,
    permits: Semaphore,
    stats: Mutex<ClientStats>,
}

impl LlmClient {
    pub fn new(config: LlmConfig, transport: Arc<dyn Transport>) -> Result<Self> {
        config.validate()?;
        let permits = Semaphore::new(config.max_concurrent);
        Ok(LlmClient { config, transport, permits, stats: Mutex::new(ClientStats::default()) })
    }

    /// Client over the HTTP transport; requires endpoint, model and key.
    pub fn http(config: LlmConfig) -> Result<Self> {
        config.validate_credentials()?;
        let transport = Arc::new(HttpTransport::new(&config));
        LlmClient::new(config, transport)
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn stats(&self) -> ClientStats {
        *self.stats.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn complete(&self, messages: &[ChatMessage], temperature: f64) -> Result<Completion> {
        if messages.is_empty() {
            return Err(Error::Invariant("completion needs at least one message".into()));
        }
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: messages.to_vec(),
            temperature,
            top_p: self.config.top_p,
        };
        let max_attempts = self.config.max_retries + 1;
        let mut attempt = 0;
        loop {
            attempt += 1;
            let outcome = {
                let _permit = self.permits.acquire();
                self.transport.send(&request)
            };
            self.bump(|s| s.requests += 1);
            let failure = match outcome {
                Ok(text) => return Ok(Completion { text, attempts: attempt }),
                Err(f) => f,
            };
            let retryable = match &failure {
                TransportFailure::Status { code: 401 | 403, body } => {
                    return Err(Error::Auth(format!("status {}: {}", status_code(&failure), truncate(body))))
                }
                TransportFailure::Status { code, .. } => *code == 429 || *code >= 500,
                TransportFailure::Io(_) => true,
            };
            if !retryable || attempt >= max_attempts {
                return Err(match failure {
                    TransportFailure::Status { code: 429, .. } => Error::RateLimited { attempts: attempt },
                    TransportFailure::Status { code, body } => {
                        Error::Transport(format!("status {code} after {attempt} attempts: {}", truncate(&body)))
                    }
                    TransportFailure::Io(m) => Error::Transport(format!("{m} (after {attempt} attempts)")),
                });
            }
            let delay = self.config.retry_base_delay_ms.saturating_mul(1 << (attempt - 1).min(6));
            log::warn!("chat request attempt {attempt} failed ({failure:?}); retry {attempt} in {delay} ms");
            self.bump(|s| s.retries += 1);
            thread::sleep(Duration::from_millis(delay));
        }
    }

    fn bump(&self, f: impl FnOnce(&mut ClientStats)) {
        f(&mut self.stats.lock().unwrap_or_else(|e| e.into_inner()));
    }
}

fn status_code(f: &TransportFailure) -> u16 {
    match f {
        TransportFailure::Status { code, .. } => *code,
        TransportFailure::Io(_) => 0,
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(200).collect()
}
