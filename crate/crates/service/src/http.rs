//! REST surface. Every response body is an envelope:
//! `{"success":true,"data":…}` or `{"success":false,"error":{"rule_id"?,"message"}}`.
//!
//! | method | path | data |
//! |---|---|---|
//! | POST | `/simulation/start` | session summary |
//! | POST | `/simulation/stop` | session summary |
//! | GET | `/simulation/log` | executed actions and goal flag |
//! | GET | `/status` | masked status |
//! | GET | `/rules` | rules text for the live constraint set |
//! | GET | `/scenarios` | catalog |
//! | POST | `/actions/{pick_up,put_down,stack,unstack}` | message and post-action status |
//! | POST | `/verify` | verification report |
//!
//! Rule violations are HTTP 200 with `success: false`.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Map, Value};
use tokio::sync::oneshot;

use blocksbench_core::constraints::RuleId;
use blocksbench_core::domain::ActionKind;
use blocksbench_core::verifier::parse_step;

use crate::session::{ActionOutcome, ServiceError, SimService, StartRequest};

/// Default port when `BLOCKSBENCH_PORT` is unset.
pub const DEFAULT_PORT: u16 = 8350;

pub fn ok<T: Serialize>(data: T) -> Response {
    let data = serde_json::to_value(data).expect("payloads serialize");
    (StatusCode::OK, Json(json!({"success": true, "data": data}))).into_response()
}

fn fail(status: u16, rule_id: Option<RuleId>, message: String) -> Response {
    let mut error = Map::new();
    if let Some(rule_id) = rule_id {
        error.insert("rule_id".into(), json!(rule_id));
    }
    error.insert("message".into(), json!(message));
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(json!({"success": false, "error": error}))).into_response()
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        fail(self.status_code(), None, self.to_string())
    }
}

fn reply<T: Serialize>(result: Result<T, ServiceError>) -> Response {
    match result {
        Ok(data) => ok(data),
        Err(err) => err.into_response(),
    }
}

fn json_body(body: &Bytes) -> Result<Value, ServiceError> {
    if body.is_empty() {
        return Ok(Value::Object(Map::new()));
    }
    serde_json::from_slice(body)
        .map_err(|e| ServiceError::BadRequest(format!("invalid JSON body: {e}")))
}

type Shared = State<Arc<SimService>>;

async fn start(State(service): Shared, body: Bytes) -> Response {
    let request = json_body(&body).and_then(|v| {
        serde_json::from_value::<StartRequest>(v)
            .map_err(|e| ServiceError::BadRequest(format!("invalid start request: {e}")))
    });
    reply(request.and_then(|r| service.start(r)))
}

async fn stop(State(service): Shared) -> Response {
    reply(service.stop())
}

async fn log(State(service): Shared) -> Response {
    reply(service.log())
}

async fn status(State(service): Shared) -> Response {
    reply(service.status())
}

async fn rules(State(service): Shared) -> Response {
    reply(service.rules())
}

async fn scenarios(State(service): Shared) -> Response {
    ok(service.scenarios())
}

async fn verify(State(service): Shared, body: Bytes) -> Response {
    reply(json_body(&body).and_then(|plan| service.verify(&plan)))
}

async fn act(State(service): Shared, Path(kind): Path<String>, body: Bytes) -> Response {
    let Ok(kind) = kind.parse::<ActionKind>() else {
        return fail(404, None, format!("unknown action endpoint `{kind}`"));
    };
    let action = json_body(&body).and_then(|mut value| {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| ServiceError::BadRequest(String::from("body must be a JSON object")))?;
        if obj.contains_key("action") {
            return Err(ServiceError::BadRequest(String::from(
                "the action is given by the path, not the body",
            )));
        }
        obj.insert("action".into(), json!(kind.as_str()));
        parse_step(&value).map_err(ServiceError::BadRequest)
    });
    let action = match action {
        Ok(action) => action,
        Err(err) => return err.into_response(),
    };
    let outcome = tokio::task::spawn_blocking(move || service.execute(&action))
        .await
        .expect("action task does not panic");
    match outcome {
        Ok(ActionOutcome::Executed(payload)) => ok(payload),
        Ok(ActionOutcome::Rejected(rejected)) => {
            fail(200, Some(rejected.rule_id), rejected.message)
        }
        Err(err) => err.into_response(),
    }
}

async fn not_found() -> Response {
    fail(404, None, String::from("no such endpoint"))
}

pub fn router(service: Arc<SimService>) -> Router {
    Router::new()
        .route("/simulation/start", post(start))
        .route("/simulation/stop", post(stop))
        .route("/simulation/log", get(log))
        .route("/status", get(status))
        .route("/rules", get(rules))
        .route("/scenarios", get(scenarios))
        .route("/actions/{kind}", post(act))
        .route("/verify", post(verify))
        .fallback(not_found)
        .with_state(service)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<SimService>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}

/// A server running on its own thread; stopped on drop.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) -> std::io::Result<()> {
        self.shutdown_now()
    }

    fn shutdown_now(&mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(thread) => thread.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.shutdown_now();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves on a background thread.
pub fn spawn_server(service: Arc<SimService>, addr: SocketAddr) -> std::io::Result<ServerHandle> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind(addr))?;
    let addr = listener.local_addr()?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        runtime.block_on(serve(listener, service, async {
            let _ = rx.await;
        }))
    });
    Ok(ServerHandle {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
