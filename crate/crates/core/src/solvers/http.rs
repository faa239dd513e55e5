//! JSON completion endpoint client.
//!
//! Defaults target a local inference server of the `/api/generate` kind:
//! `{model, prompt, stream: false, options: {seed, temperature, top_k, top_p}}`
//! in, `{"response": "..."}` out. Field names are configurable.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{Decoding, Engine, EngineReply, SolverError, SolverRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpEndpoint {
    pub url: String,
    pub model_field: String,
    pub prompt_field: String,
    pub stream_field: String,
    pub options_field: String,
    /// JSON pointer to the completion text in the response body.
    pub response_pointer: String,
    /// JSON pointer to a stop-reason field; the reply is flagged truncated
    /// when it equals `truncation_value`.
    pub truncation_pointer: String,
    pub truncation_value: String,
}

impl Default for HttpEndpoint {
    fn default() -> Self {
        Self {
            url: "http://127.0.0.1:11434/api/generate".into(),
            model_field: "model".into(),
            prompt_field: "prompt".into(),
            stream_field: "stream".into(),
            options_field: "options".into(),
            response_pointer: "/response".into(),
            truncation_pointer: "/done_reason".into(),
            truncation_value: "length".into(),
        }
    }
}

impl HttpEndpoint {
    pub fn payload(&self, model: &str, prompt: &str, decoding: &Decoding) -> Value {
        let mut body = Map::new();
        body.insert(self.model_field.clone(), json!(model));
        body.insert(self.prompt_field.clone(), json!(prompt));
        body.insert(self.stream_field.clone(), json!(false));
        body.insert(
            self.options_field.clone(),
            json!({
                "seed": decoding.seed,
                "temperature": decoding.temperature,
                "top_k": decoding.top_k,
                "top_p": decoding.top_p,
            }),
        );
        Value::Object(body)
    }

    pub fn extract(&self, body: &Value) -> Result<EngineReply, SolverError> {
        let text = body
            .pointer(&self.response_pointer)
            .and_then(Value::as_str)
            .ok_or_else(|| SolverError::Transport(format!("response has no string at {}", self.response_pointer)))?;
        let truncated = body
            .pointer(&self.truncation_pointer)
            .and_then(Value::as_str)
            .is_some_and(|v| v == self.truncation_value);
        Ok(EngineReply {
            text: text.to_string(),
            truncated,
        })
    }
}

pub struct HttpEngine {
    endpoint: HttpEndpoint,
    model: String,
    decoding: Decoding,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpEngine {
    pub fn new(endpoint: HttpEndpoint, model: String, decoding: Decoding, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        Self {
            endpoint,
            model,
            decoding,
            timeout,
            agent,
        }
    }
}

impl Engine for HttpEngine {
    fn generate(&self, request: &SolverRequest<'_>) -> Result<EngineReply, SolverError> {
        let payload = self.endpoint.payload(&self.model, request.prompt, &self.decoding);
        let response = self
            .agent
            .post(&self.endpoint.url)
            .send_json(payload)
            .map_err(|e| match e {
                ureq::Error::Transport(t) if is_timeout(&t) => SolverError::Timeout(self.timeout),
                ureq::Error::Transport(t) => SolverError::Transport(t.to_string()),
                ureq::Error::Status(code, _) => SolverError::Transport(format!("HTTP status {code}")),
            })?;
        let body: Value = response.into_json().map_err(|e| {
            if e.kind() == std::io::ErrorKind::TimedOut || e.kind() == std::io::ErrorKind::WouldBlock {
                SolverError::Timeout(self.timeout)
            } else {
                SolverError::Transport(format!("invalid JSON body: {e}"))
            }
        })?;
        self.endpoint.extract(&body)
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    use std::error::Error;
    let mut source = t.source();
    while let Some(err) = source {
        if let Some(io) = err.downcast_ref::<std::io::Error>() {
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                return true;
            }
        }
        source = err.source();
    }
    t.to_string().contains("timed out")
}
