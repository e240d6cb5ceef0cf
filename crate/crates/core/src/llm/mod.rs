//! Chat-model realization of the six module roles.

mod backend;
mod client;
mod parse;
mod prompts;
mod simulated;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use backend::{llm_full_solution, LlmBackend, SolutionMode};
pub use client::{
    ChatMessage, ChatRequest, ClientStats, Completion, HttpTransport, LlmClient, Transport, TransportFailure,
};
pub use parse::{parse_subgoal, parse_value, parse_verdict, parse_yes_no};
pub use prompts::{count_word, PromptSet, PromptTask, PromptTemplate};
pub use simulated::SimulatedModel;

pub const ENV_ENDPOINT: &str = "PFC_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "PFC_LLM_API_KEY";
pub const ENV_MODEL: &str = "PFC_LLM_MODEL";

/// How the actor's sampling temperature grows across distinctness retries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureSchedule {
    /// `base + k * step` on attempt `k`.
    #[default]
    Additive,
    /// `base` on attempt 0, then `max(base, step) * (1 + step)^(k-1)`.
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    /// Never serialized; read from the environment or set programmatically.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub top_p: f64,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub max_concurrent: usize,
    /// First backoff delay; doubles per retry.
    pub retry_base_delay_ms: u64,
    pub temperature_schedule: TemperatureSchedule,
    pub temperature_step: f64,
    /// Actor attempts to obtain the requested number of distinct moves.
    pub max_actor_attempts: u32,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key: None,
            top_p: 0.0,
            temperature: 0.0,
            timeout_secs: 120,
            max_retries: 5,
            max_concurrent: 4,
            retry_base_delay_ms: 1000,
            temperature_schedule: TemperatureSchedule::Additive,
            temperature_step: 0.1,
            max_actor_attempts: 10,
        }
    }
}

impl LlmConfig {
    /// Fills endpoint, key and model from the environment where they are
    /// still empty; explicit values win.
    pub fn with_env(mut self) -> Self {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        if self.endpoint.is_empty() {
            self.endpoint = var(ENV_ENDPOINT).unwrap_or_default();
        }
        if self.api_key.as_deref().unwrap_or("").is_empty() {
            self.api_key = var(ENV_API_KEY);
        }
        if self.model.is_empty() {
            self.model = var(ENV_MODEL).unwrap_or_default();
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.top_p) {
            return Err(Error::Config(format!("top_p must lie in [0, 1], got {}", self.top_p)));
        }
        if !(0.0..=2.0).contains(&self.temperature) || self.temperature_step < 0.0 {
            return Err(Error::Config("temperature must lie in [0, 2] with a non-negative step".into()));
        }
        if self.max_concurrent == 0 || self.max_actor_attempts == 0 {
            return Err(Error::Config("max_concurrent and max_actor_attempts must be positive".into()));
        }
        Ok(())
    }

    /// Validation for talking to a real endpoint.
    pub fn validate_credentials(&self) -> Result<()> {
        self.validate()?;
        if self.endpoint.is_empty() {
            return Err(Error::Config(format!("no model endpoint; set {ENV_ENDPOINT}")));
        }
        if self.model.is_empty() {
            return Err(Error::Config(format!("no model name; set {ENV_MODEL}")));
        }
        if self.api_key.as_deref().unwrap_or("").is_empty() {
            return Err(Error::Config(format!("no API key; set {ENV_API_KEY}")));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    /// Temperature for the `attempt`-th actor sample (0-based).
    pub fn actor_temperature(&self, attempt: u32) -> f64 {
        let t = match self.temperature_schedule {
            TemperatureSchedule::Additive => self.temperature + attempt as f64 * self.temperature_step,
            TemperatureSchedule::Multiplicative if attempt == 0 => self.temperature,
            TemperatureSchedule::Multiplicative => {
                self.temperature.max(self.temperature_step) * (1.0 + self.temperature_step).powi(attempt as i32 - 1)
            }
        };
        // keeps 0.1 * 3 from printing as 0.30000000000000004 in traces
        (t * 1e9).round() / 1e9
    }
}
