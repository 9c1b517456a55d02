//! Completion-model backends.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::stable_hash64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("completion backend unavailable: {0}")]
    Transport(String),
    #[error("no replay fixture for prompt hash {hash}")]
    ReplayMiss { hash: String },
    #[error("client misconfigured: {0}")]
    Config(String),
}

/// Anything that maps a prompt to a raw completion.
pub trait CompletionClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ClientError>;
}

impl<C: CompletionClient + ?Sized> CompletionClient for &C {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        (**self).complete(prompt)
    }
}

impl<C: CompletionClient + ?Sized> CompletionClient for Box<C> {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        (**self).complete(prompt)
    }
}

impl<C: CompletionClient + ?Sized> CompletionClient for Arc<C> {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        (**self).complete(prompt)
    }
}

/// Replay key of a prompt: 64-bit stable hash of its exact text.
pub fn prompt_hash(prompt: &str) -> String {
    stable_hash64(prompt)
}

pub fn replay_file(dir: &Path, prompt: &str) -> PathBuf {
    dir.join(format!("{}.txt", prompt_hash(prompt)))
}

/// Serves recorded completions from `<dir>/<prompt-hash>.txt`. A missing
/// fixture is an error; there is no fallback to a live backend.
#[derive(Debug, Clone)]
pub struct ReplayClient {
    dir: PathBuf,
}

impl ReplayClient {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, ClientError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(ClientError::Config(format!("replay directory {} not found", dir.display())));
        }
        Ok(Self { dir })
    }
}

impl CompletionClient for ReplayClient {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let path = replay_file(&self.dir, prompt);
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(ClientError::ReplayMiss { hash: prompt_hash(prompt) })
            }
            Err(e) => Err(ClientError::Transport(format!("{}: {e}", path.display()))),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptRule {
    /// Rule fires when the prompt contains this text.
    pub contains: String,
    pub response: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub rules: Vec<ScriptRule>,
    /// Reply when no rule fires; `None` means a transport error.
    #[serde(default)]
    pub default: Option<String>,
}

/// Test backend answering from a fixed rule list. Every prompt is logged.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    script: Script,
    calls: Mutex<Vec<String>>,
}

impl ScriptedClient {
    pub fn new(script: Script) -> Self {
        Self { script, calls: Mutex::new(Vec::new()) }
    }

    /// Always answer `response`.
    pub fn constant(response: impl Into<String>) -> Self {
        Self::new(Script { rules: Vec::new(), default: Some(response.into()) })
    }

    /// Every call fails with a transport error.
    pub fn unavailable() -> Self {
        Self::new(Script::default())
    }

    pub fn rule(mut self, contains: impl Into<String>, response: impl Into<String>) -> Self {
        self.script.rules.push(ScriptRule { contains: contains.into(), response: response.into() });
        self
    }

    pub fn calls(&self) -> Vec<String> {
        self.calls.lock().expect("call log poisoned").clone()
    }
}

impl CompletionClient for ScriptedClient {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        self.calls.lock().expect("call log poisoned").push(prompt.to_string());
        self.script
            .rules
            .iter()
            .find(|r| prompt.contains(&r.contains))
            .map(|r| r.response.clone())
            .or_else(|| self.script.default.clone())
            .ok_or_else(|| ClientError::Transport("scripted backend has no answer".into()))
    }
}

/// Writes every successful completion into a replay directory.
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        Self { inner, dir: dir.into() }
    }
}

impl<C: CompletionClient> CompletionClient for RecordingClient<C> {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let text = self.inner.complete(prompt)?;
        std::fs::create_dir_all(&self.dir)
            .and_then(|_| std::fs::write(replay_file(&self.dir, prompt), &text))
            .map_err(|e| ClientError::Transport(format!("recording completion: {e}")))?;
        Ok(text)
    }
}

/// Enforces a minimum interval between calls across all threads.
pub struct RateLimited<C> {
    inner: C,
    min_interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl<C> RateLimited<C> {
    pub fn new(inner: C, min_interval: Duration) -> Self {
        Self { inner, min_interval, last: Mutex::new(None) }
    }
}

impl<C: CompletionClient> CompletionClient for RateLimited<C> {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        {
            let mut last = self.last.lock().expect("rate limiter poisoned");
            if let Some(prev) = *last {
                let ready = prev + self.min_interval;
                let now = Instant::now();
                if ready > now {
                    std::thread::sleep(ready - now);
                }
            }
            *last = Some(Instant::now());
        }
        self.inner.complete(prompt)
    }
}

pub const ENV_API_KEY: &str = "PDNET_API_KEY";
pub const ENV_API_BASE: &str = "PDNET_API_BASE";
pub const ENV_MODEL: &str = "PDNET_MODEL";
pub const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn user(model: &str, prompt: &str) -> Self {
        Self {
            model: model.to_string(),
            messages: vec![ChatMessage { role: "user".into(), content: prompt.to_string() }],
        }
    }
}

/// Content of the first choice of a chat-completion response.
pub fn first_choice_content(response: &serde_json::Value) -> Result<String, ClientError> {
    response
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| ClientError::Transport("response has no choices[0].message.content".into()))
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub api_base: String,
    pub model: String,
    pub api_key: String,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn from_env() -> Result<Self, ClientError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ClientError> {
        let api_key = get(ENV_API_KEY)
            .filter(|k| !k.is_empty())
            .ok_or_else(|| ClientError::Config(format!("{ENV_API_KEY} is not set")))?;
        Ok(Self {
            api_base: get(ENV_API_BASE).unwrap_or_else(|| DEFAULT_API_BASE.to_string()),
            model: get(ENV_MODEL).unwrap_or_else(|| DEFAULT_MODEL.to_string()),
            api_key,
            timeout: Duration::from_secs(120),
        })
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.api_base.trim_end_matches('/'))
    }
}

/// Chat-completion HTTP backend.
#[cfg(feature = "remote")]
pub struct RemoteClient {
    config: RemoteConfig,
    agent: ureq::Agent,
}

#[cfg(feature = "remote")]
impl RemoteClient {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Self { config, agent }
    }
}

#[cfg(feature = "remote")]
impl CompletionClient for RemoteClient {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let request = ChatRequest::user(&self.config.model, prompt);
        let mut response = self
            .agent
            .post(&self.config.endpoint())
            .header("Authorization", &format!("Bearer {}", self.config.api_key))
            .send_json(&request)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let body: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        first_choice_content(&body)
    }
}

/// Replay fixtures held in memory, keyed by prompt hash.
#[derive(Debug, Clone, Default)]
pub struct MemoryReplay {
    by_hash: BTreeMap<String, String>,
}

impl MemoryReplay {
    pub fn insert(&mut self, prompt: &str, completion: impl Into<String>) {
        self.by_hash.insert(prompt_hash(prompt), completion.into());
    }
}

impl CompletionClient for MemoryReplay {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let hash = prompt_hash(prompt);
        self.by_hash.get(&hash).cloned().ok_or(ClientError::ReplayMiss { hash })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_deterministic_and_misses_loudly() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(replay_file(dir.path(), "hello"), "[]").unwrap();
        let client = ReplayClient::new(dir.path()).unwrap();
        assert_eq!(client.complete("hello").unwrap(), "[]");
        assert_eq!(client.complete("hello").unwrap(), client.complete("hello").unwrap());
        assert!(matches!(client.complete("hello "), Err(ClientError::ReplayMiss { .. })));
        assert!(ReplayClient::new(dir.path().join("nope")).is_err());
    }

    #[test]
    fn recording_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let rec = RecordingClient::new(ScriptedClient::constant("{\"a\": 1}"), dir.path());
        rec.complete("p").unwrap();
        let replay = ReplayClient::new(dir.path()).unwrap();
        assert_eq!(replay.complete("p").unwrap(), "{\"a\": 1}");
    }

    #[test]
    fn scripted_rules() {
        let c = ScriptedClient::constant("default").rule("Summarize", "summary");
        assert_eq!(c.complete("please Summarize this").unwrap(), "summary");
        assert_eq!(c.complete("other").unwrap(), "default");
        assert_eq!(c.calls().len(), 2);
        assert!(ScriptedClient::unavailable().complete("x").is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(prompt_hash("abc"), "ba7816bf8f01cfea");
        assert_eq!(prompt_hash("abc").len(), 16);
    }

    #[test]
    fn remote_config_from_env_lookup() {
        let env: BTreeMap<&str, &str> = [(ENV_API_KEY, "k"), (ENV_API_BASE, "http://h/v1/")].into();
        let cfg = RemoteConfig::from_lookup(|k| env.get(k).map(|s| s.to_string())).unwrap();
        assert_eq!(cfg.endpoint(), "http://h/v1/chat/completions");
        assert_eq!(cfg.model, DEFAULT_MODEL);
        assert!(RemoteConfig::from_lookup(|_| None).is_err());
    }

    #[test]
    fn chat_wire_format() {
        let req = ChatRequest::user("m", "hi");
        assert_eq!(
            serde_json::to_value(&req).unwrap(),
            serde_json::json!({"model": "m", "messages": [{"role": "user", "content": "hi"}]})
        );
        let resp = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": "ok"}}]});
        assert_eq!(first_choice_content(&resp).unwrap(), "ok");
        assert!(first_choice_content(&serde_json::json!({"choices": []})).is_err());
    }

    #[test]
    fn rate_limit_spaces_calls() {
        let c = RateLimited::new(ScriptedClient::constant("x"), Duration::from_millis(20));
        let start = Instant::now();
        for _ in 0..3 {
            c.complete("p").unwrap();
        }
        assert!(start.elapsed() >= Duration::from_millis(40));
    }
}
