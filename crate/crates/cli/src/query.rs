//! Batch client for OpenAI-compatible chat-completion endpoints.
//!
//! Workers pull jobs from a shared queue; every result goes through the
//! calling thread, which is the only writer of the responses file and the
//! ledger.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use araoc_core::render::MatrixQuestion;
use araoc_core::gen::GENERATOR_VERSION;
use araoc_core::{build_prompt, PromptStyle, RenderedPrompt, TaskStyle};
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::QueryArgs;
use crate::ledger::{self, Ledger, TaskStatus};
use crate::records::ResponseRecord;
use crate::{read_jsonl, read_tasks, CliError};

/// Settings that define a run. Everything here except the operational
/// fields (timeout, retries, backoff, concurrency) enters the fingerprint.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub endpoint: String,
    pub model: String,
    pub style: PromptStyle,
    pub temperature: Option<f64>,
    pub top_p: Option<f64>,
    pub max_tokens: u32,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub timeout: Duration,
    #[serde(skip)]
    pub retries: u32,
    #[serde(skip)]
    pub backoff: Duration,
    #[serde(skip)]
    pub concurrency: usize,
}

impl RunConfig {
    pub fn check(&self) -> Result<(), CliError> {
        if self.endpoint.trim().is_empty() {
            return Err(CliError::Usage("--endpoint must not be empty".into()));
        }
        if self.concurrency == 0 {
            return Err(CliError::Usage("--concurrency must be at least 1".into()));
        }
        if self.max_tokens == 0 {
            return Err(CliError::Usage("--max-tokens must be at least 1".into()));
        }
        Ok(())
    }

    fn fingerprint_input(&self, prompts: &[RenderedPrompt]) -> Value {
        let mut h = Sha256::new();
        for p in prompts {
            for part in [&p.task_id, &p.system, &p.user] {
                h.update((part.len() as u64).to_le_bytes());
                h.update(part.as_bytes());
            }
        }
        json!({
            "run": self,
            "prompts_sha256": ledger::hex(&h.finalize()),
            "generator_version": GENERATOR_VERSION,
        })
    }

    fn request_body(&self, prompt: &RenderedPrompt) -> Value {
        let mut body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "max_tokens": self.max_tokens,
        });
        let obj = body.as_object_mut().expect("object literal");
        if let Some(t) = self.temperature {
            obj.insert("temperature".into(), json!(t));
        }
        if let Some(p) = self.top_p {
            obj.insert("top_p".into(), json!(p));
        }
        if let Some(s) = self.seed {
            obj.insert("seed".into(), json!(s));
        }
        body
    }
}

impl From<&QueryArgs> for RunConfig {
    fn from(a: &QueryArgs) -> Self {
        RunConfig {
            endpoint: a.endpoint.clone(),
            model: a.model.clone(),
            style: if a.prompts.is_some() {
                PromptStyle::MatrixProperty
            } else {
                TaskStyle::from(a.style).into()
            },
            temperature: a.temperature,
            top_p: a.top_p,
            max_tokens: a.max_tokens,
            seed: a.seed,
            timeout: Duration::from_secs(a.timeout_secs),
            retries: a.retries,
            backoff: Duration::from_millis(a.backoff_ms),
            concurrency: a.concurrency,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryOutcome {
    pub total: usize,
    pub already_responded: usize,
    /// Requests sent in this invocation, retries included.
    pub requests: usize,
    pub responded: usize,
    pub failed: usize,
}

#[derive(Debug)]
enum Failure {
    /// Rejected credentials: stops the whole run.
    Auth(String),
    /// Could not reach the endpoint at all.
    Transport(String),
    Other(String),
}

impl Failure {
    fn message(&self) -> &str {
        match self {
            Failure::Auth(m) | Failure::Transport(m) | Failure::Other(m) => m,
        }
    }
}

struct Reply {
    index: usize,
    requests: usize,
    result: Result<String, Failure>,
}

pub fn cmd_query(args: &QueryArgs) -> Result<String, CliError> {
    let config = RunConfig::from(args);
    config.check()?;
    let api_key = std::env::var(&args.api_key_env)
        .ok()
        .filter(|k| !k.trim().is_empty())
        .ok_or_else(|| CliError::Auth(format!("environment variable {} is not set", args.api_key_env)))?;
    let prompts: Vec<RenderedPrompt> = match (&args.tasks, &args.prompts) {
        (Some(path), _) => {
            let style = TaskStyle::from(args.style);
            read_tasks(path)?.iter().map(|t| build_prompt(t, style)).collect()
        }
        (None, Some(path)) => read_jsonl::<MatrixQuestion>(path)?
            .into_iter()
            .map(|q| q.prompt)
            .collect(),
        (None, None) => return Err(CliError::Usage("either --tasks or --prompts is required".into())),
    };
    let outcome = run_query(&config, &api_key, &prompts, &args.out)?;
    Ok(format!(
        "{} tasks: {} already responded, {} responded now, {} failed ({} requests)\nresponses: {}\nledger: {}",
        outcome.total,
        outcome.already_responded,
        outcome.responded,
        outcome.failed,
        outcome.requests,
        args.out.display(),
        ledger::ledger_path(&args.out).display()
    ))
}

/// Queries every prompt not yet answered under this run's fingerprint.
pub fn run_query(config: &RunConfig, api_key: &str, prompts: &[RenderedPrompt], out: &Path) -> Result<QueryOutcome, CliError> {
    config.check()?;
    let mut seen = HashSet::new();
    if let Some(p) = prompts.iter().find(|p| !seen.insert(p.task_id.as_str())) {
        return Err(CliError::Data(format!("duplicate task id {}", p.task_id)));
    }

    let ledger_file = ledger::ledger_path(out);
    if out.exists() && !ledger_file.exists() {
        return Err(CliError::Data(format!(
            "{} exists but has no ledger; refusing to append to it",
            out.display()
        )));
    }
    let fp_input = config.fingerprint_input(prompts);
    let fp = ledger::fingerprint(&fp_input);
    let (mut ledger, mut done) = Ledger::open(&ledger_file, &fp, &fp_input)?;
    if out.exists() {
        ledger::truncate_torn_tail(out)?;
        // A response may have been written just before a crash, ahead of
        // its ledger line.
        for r in read_jsonl::<ResponseRecord>(out)? {
            if r.raw_response.is_some() && done.insert(r.task_id.clone()) {
                ledger.status(&r.task_id, TaskStatus::Responded, None)?;
            }
        }
    }
    let mut responses = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(CliError::io(out))?;

    let todo: Vec<&RenderedPrompt> = prompts.iter().filter(|p| !done.contains(&p.task_id)).collect();
    let mut outcome = QueryOutcome {
        total: prompts.len(),
        already_responded: prompts.len() - todo.len(),
        ..Default::default()
    };
    if todo.is_empty() {
        return Ok(outcome);
    }
    for p in &todo {
        ledger.status(&p.task_id, TaskStatus::Pending, None)?;
    }

    let client = build_client(config)?;
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let mut auth_error = None;
    let mut transport_failures = 0;
    let (tx, rx) = mpsc::channel::<Reply>();
    let write_result = std::thread::scope(|s| -> Result<(), CliError> {
        for _ in 0..config.concurrency.min(todo.len()) {
            let tx = tx.clone();
            let (client, next, stop, todo) = (&client, &next, &stop, &todo);
            s.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                let Some(prompt) = todo.get(index) else { break };
                let (requests, result) = request_with_retries(client, config, api_key, prompt, stop);
                if matches!(result, Err(Failure::Auth(_))) {
                    stop.store(true, Ordering::SeqCst);
                }
                if tx.send(Reply { index, requests, result }).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for reply in rx {
            let task_id = &todo[reply.index].task_id;
            outcome.requests += reply.requests;
            let (record, status, error) = match reply.result {
                Ok(text) => {
                    outcome.responded += 1;
                    let record = ResponseRecord {
                        task_id: task_id.clone(),
                        raw_response: Some(text),
                        error: None,
                    };
                    (Some(record), TaskStatus::Responded, None)
                }
                Err(Failure::Auth(m)) => {
                    auth_error.get_or_insert(m);
                    continue;
                }
                Err(f) => {
                    outcome.failed += 1;
                    if matches!(f, Failure::Transport(_)) {
                        transport_failures += 1;
                    }
                    let record = ResponseRecord {
                        task_id: task_id.clone(),
                        raw_response: None,
                        error: Some(f.message().to_string()),
                    };
                    (Some(record), TaskStatus::Failed, Some(f.message().to_string()))
                }
            };
            if let Some(record) = record {
                let mut line = serde_json::to_vec(&record).expect("records serialize");
                line.push(b'\n');
                responses.write_all(&line).map_err(CliError::io(out))?;
                responses.flush().map_err(CliError::io(out))?;
            }
            ledger.status(task_id, status, error)?;
        }
        Ok(())
    });
    write_result?;
    if let Some(m) = auth_error {
        return Err(CliError::Auth(m));
    }
    if outcome.responded == 0 && transport_failures == outcome.failed && outcome.failed > 0 {
        return Err(CliError::Network(format!("endpoint {} unreachable", config.endpoint)));
    }
    Ok(outcome)
}

fn build_client(config: &RunConfig) -> Result<Client, CliError> {
    let mut builder = Client::builder().timeout(config.timeout);
    if is_loopback(&config.endpoint) {
        builder = builder.no_proxy();
    }
    builder.build().map_err(|e| CliError::Network(e.to_string()))
}

fn is_loopback(endpoint: &str) -> bool {
    reqwest::Url::parse(endpoint)
        .ok()
        .and_then(|u| u.host_str().map(str::to_owned))
        .is_some_and(|h| h == "localhost" || h == "127.0.0.1" || h == "[::1]")
}

/// Returns the number of requests sent and the final result.
fn request_with_retries(
    client: &Client,
    config: &RunConfig,
    api_key: &str,
    prompt: &RenderedPrompt,
    stop: &AtomicBool,
) -> (usize, Result<String, Failure>) {
    let body = config.request_body(prompt);
    let mut sent = 0;
    loop {
        sent += 1;
        let (result, transient) = send_once(client, config, api_key, &body);
        match result {
            Err(_) if transient && sent <= config.retries as usize && !stop.load(Ordering::SeqCst) => {
                std::thread::sleep(config.backoff * 2u32.saturating_pow(sent as u32 - 1));
            }
            r => return (sent, r),
        }
    }
}

fn send_once(client: &Client, config: &RunConfig, api_key: &str, body: &Value) -> (Result<String, Failure>, bool) {
    let resp = match client.post(&config.endpoint).bearer_auth(api_key).json(body).send() {
        Ok(r) => r,
        Err(e) => return (Err(Failure::Transport(e.to_string())), true),
    };
    let status = resp.status();
    if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
        return (Err(Failure::Auth(format!("endpoint answered {status}"))), false);
    }
    let transient = status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error();
    let text = match resp.text() {
        Ok(t) => t,
        Err(e) => return (Err(Failure::Transport(e.to_string())), true),
    };
    if !status.is_success() {
        return (Err(Failure::Other(format!("HTTP {status}: {}", snippet(&text)))), transient);
    }
    (extract_content(&text).map_err(Failure::Other), false)
}

/// First choice's message text. A refusal given in place of content is
/// kept as the response.
pub fn extract_content(body: &str) -> Result<String, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    let msg = &v["choices"][0]["message"];
    if let Some(s) = msg["content"].as_str() {
        return Ok(s.to_string());
    }
    if let Some(s) = msg["refusal"].as_str() {
        return Ok(s.to_string());
    }
    Err(format!("no message content in response: {}", snippet(body)))
}

fn snippet(s: &str) -> String {
    s.chars().take(200).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            endpoint: "http://127.0.0.1:1/v1/chat/completions".into(),
            model: "m".into(),
            style: PromptStyle::MatrixStandard,
            temperature: None,
            top_p: None,
            max_tokens: 3000,
            seed: None,
            timeout: Duration::from_secs(1),
            retries: 0,
            backoff: Duration::ZERO,
            concurrency: 1,
        }
    }

    #[test]
    fn body_has_defaults_only() {
        let p = RenderedPrompt {
            task_id: "t".into(),
            style: PromptStyle::MatrixStandard,
            system: "s".into(),
            user: "u".into(),
        };
        let body = config().request_body(&p);
        assert_eq!(
            body,
            json!({"model": "m", "messages": [{"role": "system", "content": "s"}, {"role": "user", "content": "u"}], "max_tokens": 3000})
        );
        let mut c = config();
        c.temperature = Some(0.0);
        assert_eq!(c.request_body(&p)["temperature"], json!(0.0));
    }

    #[test]
    fn content_extraction() {
        assert_eq!(extract_content(r#"{"choices":[{"message":{"content":"[[0]]"}}]}"#).unwrap(), "[[0]]");
        assert_eq!(
            extract_content(r#"{"choices":[{"message":{"content":null,"refusal":"no"}}]}"#).unwrap(),
            "no"
        );
        assert!(extract_content(r#"{"choices":[]}"#).is_err());
        assert!(extract_content("<html>").is_err());
    }

    #[test]
    fn operational_settings_do_not_change_fingerprint() {
        let a = config();
        let mut b = config();
        b.concurrency = 8;
        b.retries = 5;
        assert_eq!(a.fingerprint_input(&[]), b.fingerprint_input(&[]));
        b.model = "other".into();
        assert_ne!(a.fingerprint_input(&[]), b.fingerprint_input(&[]));
    }

    #[test]
    fn invalid_config_is_usage_error() {
        let mut c = config();
        c.concurrency = 0;
        assert_eq!(c.check().unwrap_err().exit_code(), 1);
        let mut c = config();
        c.endpoint = " ".into();
        assert_eq!(c.check().unwrap_err().exit_code(), 1);
    }
}
