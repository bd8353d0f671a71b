//! MCP gateway: the seven benchmark tools over newline-delimited JSON-RPC,
//! forwarded to the simulation service's REST API.

pub mod gateway;
pub mod tools;

pub use gateway::{canonical_json, run_stdio, Gateway, HttpUpstream, Upstream, PROTOCOL_VERSION};
pub use tools::{descriptors, ToolDescriptor, TOOL_NAMES};

/// Upstream base URL from `BLOCKSBENCH_URL`, defaulting to the local service.
pub fn upstream_url_from_env() -> String {
    std::env::var("BLOCKSBENCH_URL")
        .unwrap_or_else(|_| format!("http://127.0.0.1:{}", blocksbench_service::DEFAULT_PORT))
}
