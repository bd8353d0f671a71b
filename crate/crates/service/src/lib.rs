//! Simulation service: one live Blocksworld session behind a REST API.

pub mod client;
pub mod http;
pub mod session;

pub use client::{ClientError, Envelope, RestClient};
pub use http::{router, serve, spawn_server, ServerHandle, DEFAULT_PORT};
pub use session::{
    ActionOutcome, ServiceError, SessionSummary, SimService, StartRequest, StatusPayload,
};
