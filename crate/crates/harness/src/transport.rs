//! How agents reach the seven tools: REST directly, the MCP gateway in
//! process, or an MCP gateway subprocess over stdio.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use blocksbench_mcp::tools::{route, Route};
use blocksbench_mcp::{Gateway, HttpUpstream, PROTOCOL_VERSION};
use blocksbench_service::{Envelope, RestClient};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportKind {
    Rest,
    Mcp,
    McpStdio,
}

impl TransportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportKind::Rest => "rest",
            TransportKind::Mcp => "mcp",
            TransportKind::McpStdio => "mcp-stdio",
        }
    }
}

impl fmt::Display for TransportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rest" => Ok(TransportKind::Rest),
            "mcp" => Ok(TransportKind::Mcp),
            "mcp-stdio" => Ok(TransportKind::McpStdio),
            other => Err(format!(
                "unknown transport `{other}` (rest, mcp, mcp-stdio)"
            )),
        }
    }
}

/// Outcome of one tool call as an agent sees it.
#[derive(Debug, Clone, PartialEq)]
pub enum ToolReply {
    /// The tool's data payload.
    Data(Value),
    /// An action broke a rule; the world is unchanged.
    Violation { rule_id: String, message: String },
    /// The tool could not run (no session, malformed arguments).
    Error(String),
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("simulation service unreachable: {0}")]
    Unreachable(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("gateway process: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Transport {
    fn kind(&self) -> TransportKind;
    fn call(&mut self, tool: &str, arguments: Value) -> Result<ToolReply, TransportError>;
}

fn is_action_tool(tool: &str) -> bool {
    matches!(tool, "pick_up" | "put_down" | "stack" | "unstack")
}

fn from_envelope(envelope: Envelope) -> ToolReply {
    let status = envelope.status;
    match envelope.into_result() {
        Ok(data) => ToolReply::Data(data),
        Err(err) => match err.rule_id {
            Some(rule_id) if status == 200 => ToolReply::Violation {
                rule_id,
                message: err.message,
            },
            _ => ToolReply::Error(err.message),
        },
    }
}

/// Calls the REST surface with the same argument mapping the gateway uses.
pub struct RestTransport {
    client: RestClient,
}

impl RestTransport {
    pub fn new(base_url: &str) -> Self {
        Self {
            client: RestClient::new(base_url),
        }
    }
}

impl Transport for RestTransport {
    fn kind(&self) -> TransportKind {
        TransportKind::Rest
    }

    fn call(&mut self, tool: &str, arguments: Value) -> Result<ToolReply, TransportError> {
        let empty = Map::new();
        let args = arguments.as_object().unwrap_or(&empty);
        let route = match route(tool, args) {
            Ok(route) => route,
            Err(message) => return Ok(ToolReply::Error(message)),
        };
        let envelope = match route {
            Route::Get(path) => self.client.get(path),
            Route::Post(path, body) => self.client.post(&path, &body),
        }
        .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        Ok(from_envelope(envelope))
    }
}

fn request(id: u64, method: &str, params: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params})
}

fn initialize_params() -> Value {
    json!({
        "protocolVersion": PROTOCOL_VERSION,
        "capabilities": {},
        "clientInfo": {"name": "blocksbench-harness", "version": env!("CARGO_PKG_VERSION")}
    })
}

/// Decodes a `tools/call` response.
fn from_rpc(tool: &str, id: u64, response: Value) -> Result<ToolReply, TransportError> {
    if response.get("jsonrpc") != Some(&json!("2.0")) || response.get("id") != Some(&json!(id)) {
        return Err(TransportError::Protocol(format!(
            "response does not answer request {id}: {response}"
        )));
    }
    if let Some(error) = response.get("error") {
        let message = error["message"].as_str().unwrap_or_default().to_string();
        return match error["code"].as_i64() {
            Some(-32000) => Err(TransportError::Unreachable(message)),
            Some(-32602) => Ok(ToolReply::Error(message)),
            code => Err(TransportError::Protocol(format!("{code:?}: {message}"))),
        };
    }
    let result = &response["result"];
    if result["isError"] == json!(true) {
        let text = result["content"][0]["text"].as_str().unwrap_or_default();
        return Ok(ToolReply::Error(text.to_string()));
    }
    let data = result["structuredContent"].clone();
    if is_action_tool(tool) && data.get("status").is_none() {
        if let (Some(rule_id), Some(message)) = (data["rule_id"].as_str(), data["message"].as_str())
        {
            return Ok(ToolReply::Violation {
                rule_id: rule_id.to_string(),
                message: message.to_string(),
            });
        }
    }
    Ok(ToolReply::Data(data))
}

fn check_initialized(response: &Value) -> Result<(), TransportError> {
    match response["result"]["protocolVersion"].as_str() {
        Some(_) => Ok(()),
        None => Err(TransportError::Protocol(format!(
            "initialize failed: {response}"
        ))),
    }
}

/// The MCP gateway in this process, driven through its text interface.
pub struct McpTransport {
    gateway: Gateway<HttpUpstream>,
    next_id: u64,
}

impl McpTransport {
    pub fn new(base_url: &str) -> Result<Self, TransportError> {
        let mut t = Self {
            gateway: Gateway::new(RestClient::new(base_url)),
            next_id: 1,
        };
        let init = t.exchange(&request(0, "initialize", initialize_params()))?;
        check_initialized(&init)?;
        t.gateway.handle_line(
            &json!({"jsonrpc": "2.0", "method": "notifications/initialized"}).to_string(),
        );
        Ok(t)
    }

    fn exchange(&mut self, message: &Value) -> Result<Value, TransportError> {
        let line = self
            .gateway
            .handle_line(&message.to_string())
            .ok_or_else(|| TransportError::Protocol(String::from("request got no response")))?;
        serde_json::from_str(&line).map_err(|e| TransportError::Protocol(e.to_string()))
    }
}

impl Transport for McpTransport {
    fn kind(&self) -> TransportKind {
        TransportKind::Mcp
    }

    fn call(&mut self, tool: &str, arguments: Value) -> Result<ToolReply, TransportError> {
        let id = self.next_id;
        self.next_id += 1;
        let params = json!({"name": tool, "arguments": arguments});
        let response = self.exchange(&request(id, "tools/call", params))?;
        from_rpc(tool, id, response)
    }
}

/// A gateway child process speaking newline-delimited JSON-RPC on stdio.
pub struct McpProcess {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

impl McpProcess {
    /// Spawns `command` with piped stdio and performs the handshake.
    pub fn spawn(mut command: Command) -> Result<Self, TransportError> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        let mut p = Self {
            child,
            stdin,
            stdout,
            next_id: 1,
        };
        let init = p.exchange(&request(0, "initialize", initialize_params()))?;
        check_initialized(&init)?;
        p.send(&json!({"jsonrpc": "2.0", "method": "notifications/initialized"}))?;
        Ok(p)
    }

    fn send(&mut self, message: &Value) -> Result<(), TransportError> {
        writeln!(self.stdin, "{message}")?;
        self.stdin.flush()?;
        Ok(())
    }

    fn exchange(&mut self, message: &Value) -> Result<Value, TransportError> {
        self.send(message)?;
        let mut line = String::new();
        if self.stdout.read_line(&mut line)? == 0 {
            return Err(TransportError::Protocol(String::from(
                "gateway process closed its output",
            )));
        }
        serde_json::from_str(&line).map_err(|e| TransportError::Protocol(e.to_string()))
    }
}

impl Transport for McpProcess {
    fn kind(&self) -> TransportKind {
        TransportKind::McpStdio
    }

    fn call(&mut self, tool: &str, arguments: Value) -> Result<ToolReply, TransportError> {
        let id = self.next_id;
        self.next_id += 1;
        let params = json!({"name": tool, "arguments": arguments});
        let response = self.exchange(&request(id, "tools/call", params))?;
        from_rpc(tool, id, response)
    }
}

impl Drop for McpProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rpc_results_map_to_replies() {
        let violation = json!({"jsonrpc": "2.0", "id": 3, "result": {
            "content": [{"type": "text", "text": "no"}],
            "structuredContent": {"rule_id": "gripper_empty", "message": "no"},
            "isError": false
        }});
        assert_eq!(
            from_rpc("stack", 3, violation).unwrap(),
            ToolReply::Violation {
                rule_id: "gripper_empty".into(),
                message: "no".into()
            }
        );
        let report = json!({"jsonrpc": "2.0", "id": 4, "result": {
            "content": [], "structuredContent": {"verified": false, "rule_id": "x", "message": "m"},
            "isError": false
        }});
        assert!(matches!(
            from_rpc("verify_plan", 4, report).unwrap(),
            ToolReply::Data(_)
        ));
        let down = json!({"jsonrpc": "2.0", "id": 5, "error": {"code": -32000, "message": "down"}});
        assert!(matches!(
            from_rpc("get_status", 5, down),
            Err(TransportError::Unreachable(_))
        ));
        let stray = json!({"jsonrpc": "2.0", "id": 9, "result": {}});
        assert!(matches!(
            from_rpc("get_status", 6, stray),
            Err(TransportError::Protocol(_))
        ));
    }

    #[test]
    fn transport_names_parse() {
        for kind in [
            TransportKind::Rest,
            TransportKind::Mcp,
            TransportKind::McpStdio,
        ] {
            assert_eq!(kind.as_str().parse::<TransportKind>(), Ok(kind));
        }
        assert!("grpc".parse::<TransportKind>().is_err());
    }
}
