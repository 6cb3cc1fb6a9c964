//! HTTP surfaces: the robot simulator under `/api` and the console API under
//! `/v1`.

use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, BoxStream, Stream, StreamExt};
use pilot_core::robot::{Robot, RobotSim};
use pilot_core::{Error, SensorId};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;

use crate::app::System;

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::InvalidInput(_) | Error::BadRequest(_) | Error::UnknownSensor(_) => StatusCode::BAD_REQUEST,
            Error::RobotUnreachable(_) | Error::ProviderUnavailable(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({"error": self.0.to_string(), "kind": self.0.kind()}))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Broadcast receiver as a stream; lagging subscribers skip ahead.
fn from_broadcast<T: Clone + Send + 'static>(rx: broadcast::Receiver<T>) -> impl Stream<Item = T> + Send {
    stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(v) => return Some((v, rx)),
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    })
}

fn sse(events: BoxStream<'static, Event>) -> Sse<impl Stream<Item = std::result::Result<Event, Infallible>>> {
    Sse::new(events.map(Ok)).keep_alive(KeepAlive::default())
}

fn event(kind: &str, data: &impl serde::Serialize) -> Event {
    Event::default().event(kind).data(serde_json::to_string(data).unwrap_or_else(|_| "null".into()))
}

// ------------------------------------------------------------- robot sim

#[derive(Deserialize)]
struct Since {
    #[serde(default)]
    since: u64,
}

pub fn robot_routes(sim: Arc<RobotSim>) -> Router {
    Router::new()
        .route("/api/actions", get(robot_actions))
        .route("/api/events", get(robot_events))
        .route("/api/sensors/{id}/trigger", post(robot_trigger))
        .route("/api/{endpoint}", post(robot_request))
        .with_state(sim)
}

async fn robot_request(
    State(sim): State<Arc<RobotSim>>,
    Path(endpoint): Path<String>,
    body: Option<Json<Value>>,
) -> ApiResult<Json<Value>> {
    let payload = body.map(|Json(v)| v).unwrap_or_else(|| json!({}));
    Ok(Json(sim.request(&endpoint, payload).await?))
}

async fn robot_trigger(State(sim): State<Arc<RobotSim>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let event_id = sim.inject_sensor_event_named(&id)?;
    Ok(Json(json!({"event_id": event_id})))
}

async fn robot_actions(State(sim): State<Arc<RobotSim>>, Query(q): Query<Since>) -> Json<Value> {
    Json(json!(sim.action_log(q.since)))
}

async fn robot_events(State(sim): State<Arc<RobotSim>>) -> impl IntoResponse {
    sse(from_broadcast(Robot::subscribe(sim.as_ref())).map(|e| event("sensor", &e)).boxed())
}

// --------------------------------------------------------------- console

#[derive(Deserialize)]
struct TurnRequest {
    session_id: String,
    text: String,
}

pub fn console_routes(system: Arc<System>) -> Router {
    Router::new()
        .route("/v1/ready", get(ready))
        .route("/v1/turns", post(submit))
        .route("/v1/state/tsm/{session_id}", get(tsm))
        .route("/v1/state/process-table", get(process_table))
        .route("/v1/state/memory", get(memory))
        .route("/v1/skills", get(skills))
        .route("/v1/sensors/{id}/trigger", post(trigger))
        .route("/v1/events", get(events))
        .with_state(system)
}

/// Console API plus, for an in-process simulator, the robot API.
pub fn router(system: Arc<System>) -> Router {
    let console = console_routes(system.clone());
    match &system.sim {
        Some(sim) => console.merge(robot_routes(sim.clone())),
        None => console,
    }
}

async fn ready(State(s): State<Arc<System>>) -> impl IntoResponse {
    let r = s.readiness().await;
    let status = if r.ready { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    (status, Json(r))
}

async fn submit(State(s): State<Arc<System>>, Json(req): Json<TurnRequest>) -> ApiResult<Json<Value>> {
    if req.session_id.trim().is_empty() {
        return Err(Error::InvalidInput("session_id is empty".into()).into());
    }
    let turn = s.orchestrator.submit(&req.session_id, &req.text).await?;
    Ok(Json(serde_json::to_value(turn).map_err(|e| Error::InvalidInput(e.to_string()))?))
}

async fn tsm(State(s): State<Arc<System>>, Path(session_id): Path<String>) -> Response {
    match s.orchestrator.session_view(&session_id).await {
        Some(view) => Json(view).into_response(),
        None => (StatusCode::NOT_FOUND, Json(json!({"error": format!("no session {session_id}")}))).into_response(),
    }
}

async fn process_table(State(s): State<Arc<System>>) -> impl IntoResponse {
    Json(s.orchestrator.process_table().await)
}

async fn memory(State(s): State<Arc<System>>) -> impl IntoResponse {
    let records: Vec<Value> = s
        .orchestrator
        .memory()
        .records()
        .into_iter()
        .map(|r| json!({"main_task": r.main_task, "hit_count": r.hit_count, "created_at": r.created_at, "utterances": r.script.len()}))
        .collect();
    Json(json!({"stats": s.orchestrator.memory_stats(), "records": records}))
}

async fn skills(State(s): State<Arc<System>>) -> impl IntoResponse {
    Json(json!(s.orchestrator.inventory().iter().collect::<Vec<_>>()))
}

async fn trigger(State(s): State<Arc<System>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let sensor: SensorId = id.parse()?;
    let table = s.orchestrator.process_table().await;
    let binding = table.entries.iter().find(|e| e.sensor == sensor).map(|e| e.skill.clone());
    let event_id = s.orchestrator.robot().trigger(sensor).await?;
    Ok(Json(json!({"sensor": sensor, "event_id": event_id, "binding": binding})))
}

/// Merged stream of turns, supervisor events, sensor firings and, for an
/// in-process simulator, robot actions.
async fn events(State(s): State<Arc<System>>) -> impl IntoResponse {
    let o = &s.orchestrator;
    let mut streams: Vec<BoxStream<'static, Event>> = vec![
        from_broadcast(o.subscribe_turns()).map(|t| event("turn", &t)).boxed(),
        from_broadcast(o.stm().subscribe()).map(|e| event("stm", &e)).boxed(),
        from_broadcast(o.robot().subscribe()).map(|e| event("sensor", &e)).boxed(),
    ];
    if let Some(sim) = &s.sim {
        streams.push(from_broadcast(sim.subscribe_actions()).map(|a| event("action", &a)).boxed());
    }
    sse(stream::select_all(streams).boxed())
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    router: Router,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await
}
