//! Blocking client for the REST surface.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use blocksbench_core::domain::Action;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach {url}: {message}")]
    Unreachable { url: String, message: String },
    #[error("malformed response from {url}: {message}")]
    Malformed { url: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<String>,
    pub message: String,
}

/// A decoded response envelope plus its HTTP status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub status: u16,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl Envelope {
    /// The data payload, or the error message.
    pub fn into_result(self) -> Result<Value, ErrorBody> {
        match (self.success, self.data, self.error) {
            (true, Some(data), _) => Ok(data),
            (_, _, Some(error)) => Err(error),
            _ => Err(ErrorBody {
                rule_id: None,
                message: String::from("response carried neither data nor error"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestClient {
    base: String,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct Wire {
    success: bool,
    #[serde(default)]
    data: Option<Value>,
    #[serde(default)]
    error: Option<ErrorBody>,
}

impl RestClient {
    pub fn new(base: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn decode(
        &self,
        url: &str,
        response: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<Envelope, ClientError> {
        let mut response = response.map_err(|e| ClientError::Unreachable {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        let status = response.status().as_u16();
        let wire: Wire = response
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Malformed {
                url: url.to_string(),
                message: e.to_string(),
            })?;
        Ok(Envelope {
            status,
            success: wire.success,
            data: wire.data,
            error: wire.error,
        })
    }

    pub fn get(&self, path: &str) -> Result<Envelope, ClientError> {
        let url = format!("{}{path}", self.base);
        let response = self.agent.get(&url).call();
        self.decode(&url, response)
    }

    pub fn post(&self, path: &str, body: &Value) -> Result<Envelope, ClientError> {
        let url = format!("{}{path}", self.base);
        let response = self.agent.post(&url).send_json(body);
        self.decode(&url, response)
    }

    pub fn start(&self, scenario_id: &str) -> Result<Envelope, ClientError> {
        self.post(
            "/simulation/start",
            &serde_json::json!({"scenario_id": scenario_id, "force": true}),
        )
    }

    pub fn stop(&self) -> Result<Envelope, ClientError> {
        self.post("/simulation/stop", &serde_json::json!({}))
    }

    pub fn status(&self) -> Result<Envelope, ClientError> {
        self.get("/status")
    }

    pub fn rules(&self) -> Result<Envelope, ClientError> {
        self.get("/rules")
    }

    pub fn scenarios(&self) -> Result<Envelope, ClientError> {
        self.get("/scenarios")
    }

    pub fn log(&self) -> Result<Envelope, ClientError> {
        self.get("/simulation/log")
    }

    pub fn verify(&self, plan: &Value) -> Result<Envelope, ClientError> {
        self.post("/verify", plan)
    }

    pub fn act(&self, action: &Action) -> Result<Envelope, ClientError> {
        let mut body = serde_json::json!({"block": action.block()});
        if let Some(target) = action.target() {
            body["target"] = Value::String(target.to_string());
        }
        self.post(&format!("/actions/{}", action.kind().as_str()), &body)
    }
}
