//! The chat-completions HTTP client with retry and cache.
//!
//! Wire contract: `POST` a JSON body `{model, messages, temperature,
//! max_tokens}` and read `choices[0].message.content` from the response.
//! 429 and 5xx responses and transport failures are retried with
//! exponential backoff; other non-2xx statuses fail immediately. A cache
//! hit returns without touching the network at all.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::llm::cache::{cache_key, prompt_text, CacheParams, CacheRecord, PredictionCache};
use crate::llm::{GenerationParams, Message};
use crate::{Error, Result};

/// Backend connection settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendConfig {
    /// Chat-completions endpoint URL.
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token; no
    /// Authorization header is sent when unset.
    pub auth_env: Option<String>,
    pub timeout_secs: u64,
    /// Upper bound on concurrent in-flight requests.
    pub max_parallel: usize,
    /// Total attempts per request (first try included).
    pub max_attempts: u32,
    pub base_backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            auth_env: None,
            timeout_secs: 30,
            max_parallel: 4,
            max_attempts: 3,
            base_backoff_ms: 250,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.endpoint.is_empty() {
            return Err(Error::Config("backend endpoint is not set".into()));
        }
        if self.max_parallel < 1 {
            return Err(Error::Config("max_parallel must be >= 1".into()));
        }
        if self.max_attempts < 1 {
            return Err(Error::Config("max_attempts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

/// A configured backend: HTTP agent plus completion cache.
pub struct Backend {
    config: BackendConfig,
    agent: ureq::Agent,
    cache: PredictionCache,
}

impl Backend {
    pub fn new(config: BackendConfig, cache: PredictionCache) -> Result<Self> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            agent,
            cache,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn cache(&self) -> &PredictionCache {
        &self.cache
    }

    /// Returns the completion for `messages`: from the cache when
    /// present (no network), otherwise via one retried HTTP exchange,
    /// storing the result before returning it.
    pub fn complete(&self, params: &GenerationParams, messages: &[Message]) -> Result<String> {
        let key = cache_key(params, messages);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit);
        }

        let completion = self.request_with_retry(params, messages)?;
        self.cache.insert(CacheRecord {
            key,
            model: params.model_name.clone(),
            prompt: prompt_text(messages),
            params: CacheParams {
                temperature: params.temperature,
                max_output_tokens: params.max_output_tokens,
            },
            completion: completion.clone(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        })?;
        Ok(completion)
    }

    fn request_with_retry(
        &self,
        params: &GenerationParams,
        messages: &[Message],
    ) -> Result<String> {
        let token = match &self.config.auth_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| Error::MissingAuth(var.clone()))?,
            ),
            None => None,
        };
        let body = ChatRequest {
            model: &params.model_name,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_output_tokens,
        };

        let max = self.config.max_attempts;
        for attempt in 1..=max {
            let mut request = self.agent.post(&self.config.endpoint);
            if let Some(token) = &token {
                request = request.header("Authorization", &format!("Bearer {token}"));
            }
            let outcome = request.send_json(&body);

            let retriable: String = match outcome {
                Ok(mut response) => {
                    let status = response.status().as_u16();
                    if (200..300).contains(&status) {
                        return extract_content(&mut response);
                    }
                    if status == 429 || (500..600).contains(&status) {
                        if attempt == max {
                            return Err(Error::BackendStatus {
                                status,
                                attempts: max,
                            });
                        }
                        format!("HTTP {status}")
                    } else {
                        return Err(Error::BackendStatus {
                            status,
                            attempts: attempt,
                        });
                    }
                }
                Err(e) => {
                    if attempt == max {
                        return Err(Error::Transport {
                            attempts: max,
                            message: e.to_string(),
                        });
                    }
                    e.to_string()
                }
            };

            let delay = self.config.base_backoff_ms.saturating_mul(1 << (attempt - 1));
            log::warn!(
                "backend attempt {attempt}/{max} failed ({retriable}); retrying in {delay} ms"
            );
            std::thread::sleep(Duration::from_millis(delay));
        }
        unreachable!("loop returns on the final attempt");
    }
}

fn extract_content(response: &mut ureq::http::Response<ureq::Body>) -> Result<String> {
    let parsed: ChatResponse = response
        .body_mut()
        .read_json()
        .map_err(|e| Error::MalformedResponse(e.to_string()))?;
    parsed
        .choices
        .into_iter()
        .next()
        .map(|c| c.message.content)
        .ok_or_else(|| Error::MalformedResponse("response has no choices".into()))
}
