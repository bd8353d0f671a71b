//! JSON-RPC 2.0 dispatch for the MCP methods the gateway supports:
//! `initialize`, `notifications/initialized`, `ping`, `tools/list` and
//! `tools/call`. Tool calls are forwarded to the simulation service.

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value};

use blocksbench_service::{ClientError, Envelope, RestClient};

use crate::tools::{descriptors, route, Route};

pub const PROTOCOL_VERSION: &str = "2025-06-18";
pub const SUPPORTED_VERSIONS: [&str; 3] = ["2025-06-18", "2025-03-26", "2024-11-05"];

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const UPSTREAM_UNREACHABLE: i64 = -32000;

/// Where tool calls are forwarded.
pub trait Upstream {
    fn get(&self, path: &str) -> Result<Envelope, ClientError>;
    fn post(&self, path: &str, body: &Value) -> Result<Envelope, ClientError>;
}

impl Upstream for RestClient {
    fn get(&self, path: &str) -> Result<Envelope, ClientError> {
        RestClient::get(self, path)
    }

    fn post(&self, path: &str, body: &Value) -> Result<Envelope, ClientError> {
        RestClient::post(self, path, body)
    }
}

/// HTTP upstream at a base URL.
pub type HttpUpstream = RestClient;

pub struct Gateway<U> {
    upstream: U,
    initialized: bool,
}

fn error(id: Value, code: i64, message: impl Into<String>) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message.into()}})
}

fn result(id: Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

/// Compact JSON text used for tool text content.
pub fn canonical_json(value: &Value) -> String {
    serde_json::to_string(value).expect("values serialize")
}

impl<U: Upstream> Gateway<U> {
    pub fn new(upstream: U) -> Self {
        Self {
            upstream,
            initialized: false,
        }
    }

    pub fn upstream(&self) -> &U {
        &self.upstream
    }

    /// Handles one raw line; `None` when no response is due.
    pub fn handle_line(&mut self, line: &str) -> Option<String> {
        let response = match serde_json::from_str::<Value>(line) {
            Ok(message) => self.handle_message(message)?,
            Err(e) => error(Value::Null, PARSE_ERROR, format!("parse error: {e}")),
        };
        Some(canonical_json(&response))
    }

    /// Handles one decoded message; `None` for notifications.
    pub fn handle_message(&mut self, message: Value) -> Option<Value> {
        let Value::Object(obj) = message else {
            return Some(error(
                Value::Null,
                INVALID_REQUEST,
                "a message must be a single JSON-RPC object",
            ));
        };
        let id = obj.get("id").cloned();
        let valid_id = matches!(id, None | Some(Value::String(_)) | Some(Value::Number(_)));
        let method = obj.get("method").and_then(Value::as_str);
        if obj.get("jsonrpc") != Some(&json!("2.0")) || !valid_id {
            return Some(error(
                id.filter(|_| valid_id).unwrap_or(Value::Null),
                INVALID_REQUEST,
                "invalid JSON-RPC 2.0 request",
            ));
        }
        let Some(method) = method else {
            // A response from the client; nothing to answer.
            if id.is_some() && (obj.contains_key("result") || obj.contains_key("error")) {
                return None;
            }
            return Some(error(
                id.unwrap_or(Value::Null),
                INVALID_REQUEST,
                "missing method",
            ));
        };
        let params = obj.get("params").cloned().unwrap_or(Value::Null);
        let Some(id) = id else {
            self.notify(method);
            return None;
        };
        Some(match self.dispatch(method, &params) {
            Ok(value) => result(id, value),
            Err((code, message)) => error(id, code, message),
        })
    }

    fn notify(&mut self, method: &str) {
        if method == "notifications/initialized" {
            self.initialized = true;
        }
    }

    fn dispatch(&mut self, method: &str, params: &Value) -> Result<Value, (i64, String)> {
        match method {
            "initialize" => Ok(self.initialize(params)),
            "ping" => Ok(json!({})),
            "tools/list" | "tools/call" if !self.initialized => Err((
                INVALID_REQUEST,
                String::from("the session is not initialized; send initialize first"),
            )),
            "tools/list" => Ok(json!({"tools": descriptors()})),
            "tools/call" => self.call(params),
            other => Err((METHOD_NOT_FOUND, format!("method not found: {other}"))),
        }
    }

    fn initialize(&mut self, params: &Value) -> Value {
        let requested = params.get("protocolVersion").and_then(Value::as_str);
        let version = requested
            .filter(|v| SUPPORTED_VERSIONS.contains(v))
            .unwrap_or(PROTOCOL_VERSION);
        self.initialized = true;
        json!({
            "protocolVersion": version,
            "capabilities": {"tools": {"listChanged": false}},
            "serverInfo": {"name": "blocksbench", "version": env!("CARGO_PKG_VERSION")}
        })
    }

    fn call(&mut self, params: &Value) -> Result<Value, (i64, String)> {
        let name = params.get("name").and_then(Value::as_str).ok_or((
            INVALID_PARAMS,
            String::from("tools/call needs a string `name`"),
        ))?;
        let empty = Map::new();
        let arguments = match params.get("arguments") {
            None | Some(Value::Null) => &empty,
            Some(Value::Object(args)) => args,
            Some(_) => {
                return Err((
                    INVALID_PARAMS,
                    String::from("`arguments` must be an object"),
                ))
            }
        };
        let route = route(name, arguments).map_err(|m| (INVALID_PARAMS, m))?;
        let envelope = match route {
            Route::Get(path) => self.upstream.get(path),
            Route::Post(path, body) => self.upstream.post(&path, &body),
        }
        .map_err(|e| (UPSTREAM_UNREACHABLE, e.to_string()))?;
        Ok(tool_result(envelope))
    }
}

/// Successful data and rule violations are ordinary results; other service
/// errors (no session, bad request) are flagged `isError`.
fn tool_result(envelope: Envelope) -> Value {
    match (envelope.success, envelope.data, envelope.error) {
        (true, Some(data), _) => json!({
            "content": [{"type": "text", "text": canonical_json(&data)}],
            "structuredContent": data,
            "isError": false
        }),
        (_, _, Some(err)) => {
            let structured = serde_json::to_value(&err).expect("error bodies serialize");
            json!({
                "content": [{"type": "text", "text": err.message}],
                "structuredContent": structured,
                "isError": envelope.status != 200
            })
        }
        _ => json!({
            "content": [{"type": "text", "text": "the simulation service returned an empty response"}],
            "isError": true
        }),
    }
}

/// Serves newline-delimited JSON-RPC until `input` ends.
pub fn run_stdio<U: Upstream>(
    gateway: &mut Gateway<U>,
    input: impl BufRead,
    mut output: impl Write,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(response) = gateway.handle_line(&line) {
            output.write_all(response.as_bytes())?;
            output.write_all(b"\n")?;
            output.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    /// Records requests and answers with a fixed envelope.
    struct Canned {
        reply: Option<Envelope>,
        seen: RefCell<Vec<String>>,
    }

    impl Upstream for Canned {
        fn get(&self, path: &str) -> Result<Envelope, ClientError> {
            self.seen.borrow_mut().push(format!("GET {path}"));
            self.reply.clone().ok_or(ClientError::Unreachable {
                url: path.into(),
                message: "down".into(),
            })
        }

        fn post(&self, path: &str, body: &Value) -> Result<Envelope, ClientError> {
            self.seen.borrow_mut().push(format!("POST {path} {body}"));
            self.get(path).map(|e| {
                self.seen.borrow_mut().pop();
                e
            })
        }
    }

    fn gateway(reply: Option<Envelope>) -> Gateway<Canned> {
        Gateway::new(Canned {
            reply,
            seen: RefCell::new(Vec::new()),
        })
    }

    fn ok_envelope() -> Envelope {
        Envelope {
            status: 200,
            success: true,
            data: Some(json!({"x": 1})),
            error: None,
        }
    }

    fn request(id: i64, method: &str, params: Value) -> Value {
        json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params})
    }

    fn init(g: &mut Gateway<Canned>) {
        let r = g
            .handle_message(request(
                0,
                "initialize",
                json!({"protocolVersion": "2025-03-26"}),
            ))
            .unwrap();
        assert_eq!(r["result"]["protocolVersion"], json!("2025-03-26"));
        assert_eq!(
            r["result"]["capabilities"],
            json!({"tools": {"listChanged": false}})
        );
    }

    #[test]
    fn handshake_and_ordering() {
        let mut g = gateway(Some(ok_envelope()));
        let r = g
            .handle_message(request(1, "tools/list", json!({})))
            .unwrap();
        assert_eq!(r["error"]["code"], json!(INVALID_REQUEST));
        init(&mut g);
        let r = g
            .handle_message(request(2, "tools/list", json!({})))
            .unwrap();
        assert_eq!(r["id"], json!(2));
        assert_eq!(r["result"]["tools"].as_array().unwrap().len(), 7);
        let unknown_version = g
            .handle_message(request(
                3,
                "initialize",
                json!({"protocolVersion": "1999-01-01"}),
            ))
            .unwrap();
        assert_eq!(
            unknown_version["result"]["protocolVersion"],
            json!(PROTOCOL_VERSION)
        );
    }

    #[test]
    fn framing_errors() {
        let mut g = gateway(None);
        let parse = g.handle_line("{not json").unwrap();
        assert!(parse.contains("-32700"));
        let r = g.handle_message(json!([1, 2])).unwrap();
        assert_eq!(r["error"]["code"], json!(INVALID_REQUEST));
        let r = g
            .handle_message(json!({"jsonrpc": "1.0", "id": 5, "method": "ping"}))
            .unwrap();
        assert_eq!(
            (r["id"].clone(), r["error"]["code"].clone()),
            (json!(5), json!(INVALID_REQUEST))
        );
        let r = g
            .handle_message(request(6, "resources/list", json!({})))
            .unwrap();
        assert_eq!(r["error"]["code"], json!(METHOD_NOT_FOUND));
        assert!(g
            .handle_message(json!({"jsonrpc": "2.0", "method": "notifications/initialized"}))
            .is_none());
        assert!(g
            .handle_message(json!({"jsonrpc": "2.0", "method": "no/such/notification"}))
            .is_none());
    }

    #[test]
    fn calls_route_and_map_results() {
        let mut g = gateway(Some(ok_envelope()));
        init(&mut g);
        let r = g
            .handle_message(request(
                7,
                "tools/call",
                json!({"name": "stack", "arguments": {"block": "A", "target": "B"}}),
            ))
            .unwrap();
        assert_eq!(r["result"]["structuredContent"], json!({"x": 1}));
        assert_eq!(r["result"]["isError"], json!(false));
        assert_eq!(
            g.upstream().seen.borrow().as_slice(),
            [r#"POST /actions/stack {"block":"A","target":"B"}"#]
        );
        let r = g
            .handle_message(request(8, "tools/call", json!({"name": "fly"})))
            .unwrap();
        assert_eq!(r["error"]["code"], json!(INVALID_PARAMS));
    }

    #[test]
    fn violations_are_not_tool_errors() {
        let mut g = gateway(Some(Envelope {
            status: 200,
            success: false,
            data: None,
            error: Some(blocksbench_service::client::ErrorBody {
                rule_id: Some("gripper_empty".into()),
                message: "Cannot stack A on B: the gripper is empty.".into(),
            }),
        }));
        init(&mut g);
        let r = g
            .handle_message(request(
                9,
                "tools/call",
                json!({"name": "stack", "arguments": {"block": "A", "target": "B"}}),
            ))
            .unwrap();
        assert_eq!(r["result"]["isError"], json!(false));
        assert_eq!(
            r["result"]["structuredContent"]["rule_id"],
            json!("gripper_empty")
        );
        assert!(r["result"]["content"][0]["text"]
            .as_str()
            .unwrap()
            .contains("gripper is empty"));
    }

    #[test]
    fn unreachable_upstream_is_a_protocol_error() {
        let mut g = gateway(None);
        init(&mut g);
        let r = g
            .handle_message(request(10, "tools/call", json!({"name": "get_status"})))
            .unwrap();
        assert_eq!(r["error"]["code"], json!(UPSTREAM_UNREACHABLE));
    }

    #[test]
    fn stdio_loop_answers_requests_only() {
        let mut g = gateway(Some(ok_envelope()));
        let input = [
            request(1, "initialize", json!({})).to_string(),
            String::new(),
            json!({"jsonrpc": "2.0", "method": "notifications/initialized"}).to_string(),
            request(2, "ping", json!({})).to_string(),
        ]
        .join("\n");
        let mut out = Vec::new();
        run_stdio(&mut g, input.as_bytes(), &mut out).unwrap();
        let lines: Vec<Value> = String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], json!({"jsonrpc": "2.0", "id": 2, "result": {}}));
    }
}
