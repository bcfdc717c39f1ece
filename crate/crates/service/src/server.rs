//! HTTP routes and the per-connection WebSocket loop.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use amrrt_core::metrics::{AssistingMetric, MetricKind, MetricParams, MetricRegistry};
use amrrt_core::planner::{BudgetMode, PlannerConfig, VariantRegistry};
use amrrt_core::{fixtures, Environment, State};
use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State as Extract};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::protocol::{Body, Hello, Message, Open, Welcome};
use crate::session::{Command, Session, SessionOptions, SessionSpec};
use crate::ServiceError;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub snapshot_hz: f64,
    /// Tree nodes per snapshot before subsampling.
    pub node_cap: usize,
    pub inbox_cap: usize,
    pub realtime: bool,
    pub default_map: String,
    pub default_variant: String,
    /// Used when `hello` carries no config. A partial config is completed
    /// from the planner defaults instead.
    pub planner: PlannerConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            snapshot_hz: 10.0,
            node_cap: 20_000,
            inbox_cap: 64,
            realtime: true,
            default_map: "empty".into(),
            default_variant: "am-rrt-d".into(),
            planner: PlannerConfig { budget_mode: BudgetMode::Wallclock, ..PlannerConfig::default() },
        }
    }
}

/// Listing entry of `GET /maps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapInfo {
    pub id: String,
    pub width: f64,
    pub height: f64,
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
}

type MetricCache = Mutex<HashMap<(String, MetricKind), Arc<dyn AssistingMetric>>>;

pub struct AppState {
    pub config: ServiceConfig,
    next_id: AtomicU64,
    metrics: MetricCache,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState { config, next_id: AtomicU64::new(1), metrics: Mutex::new(HashMap::new()) }
    }

    fn options(&self) -> SessionOptions {
        SessionOptions {
            snapshot_interval: Duration::from_secs_f64(1.0 / self.config.snapshot_hz.max(1e-3)),
            realtime: self.config.realtime,
            inbox_cap: self.config.inbox_cap,
        }
    }

    /// Assisting metrics are built once per map and kind, off the runtime.
    async fn metric(&self, map: &str, env: &Environment, kind: MetricKind) -> Result<Arc<dyn AssistingMetric>, ServiceError> {
        let key = (map.to_string(), kind);
        if let Some(m) = self.metrics.lock().expect("cache poisoned").get(&key) {
            return Ok(m.clone());
        }
        let env = env.clone();
        let built = tokio::task::spawn_blocking(move || {
            MetricRegistry::standard().build(kind.name(), &env, &MetricParams::default())
        })
        .await
        .expect("metric build panicked")?;
        Ok(self.metrics.lock().expect("cache poisoned").entry(key).or_insert(built).clone())
    }

    pub async fn open(&self, req: Open) -> Result<(Session, Welcome), ServiceError> {
        let map = req.map.unwrap_or_else(|| self.config.default_map.clone());
        let env = fixtures::load(&map).ok_or_else(|| ServiceError::UnknownMap(map.clone()))?;
        let variant_name = req.variant.unwrap_or_else(|| self.config.default_variant.clone());
        let variant = VariantRegistry::standard().get(&variant_name)?.clone();
        let config = variant.configure(&req.config.unwrap_or_else(|| self.config.planner.clone()));
        config.validate()?;
        let start = req.start.unwrap_or_else(|| default_start(&map, &env));
        let metric = self.metric(&map, &env, variant.metric).await?;
        let welcome = Welcome {
            session: self.next_id.fetch_add(1, Ordering::Relaxed),
            map,
            variant: variant_name.clone(),
            width: env.width(),
            height: env.height(),
            cell_size: env.cell_size(),
            start,
            config: config.clone(),
        };
        let spec = SessionSpec { env, variant: variant_name, start, config, metric };
        let session = Session::start(welcome.session, spec, self.options())?;
        Ok((session, welcome))
    }
}

/// Start used when `hello` names none: the benchmark start for the shipped
/// maps, else the first free cell.
pub fn default_start(map: &str, env: &Environment) -> State {
    let known = match map {
        "empty" => Some(State::new(10.0, 10.0)),
        "corridor" => Some(State::new(8.0, 8.0)),
        "maze" => Some(State::new(6.0, 6.0)),
        "office" => Some(State::new(10.0, 26.0)),
        "bugtrap" => Some(State::new(5.0, 25.0)),
        _ => None,
    };
    known.filter(|s| env.in_free(s)).unwrap_or_else(|| {
        (0..env.rows())
            .flat_map(|r| (0..env.cols()).map(move |c| (c, r)))
            .find(|&(c, r)| !env.is_cell_blocked(c, r))
            .map(|(c, r)| env.cell_center(c, r))
            .expect("maps have at least one free cell")
    })
}

pub fn router(config: ServiceConfig) -> Router {
    Router::new()
        .route("/maps", get(list_maps))
        .route("/maps/{id}", get(map_document))
        .route("/session", get(session_ws))
        .with_state(Arc::new(AppState::new(config)))
}

pub async fn serve(listener: TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

async fn list_maps() -> Json<Vec<MapInfo>> {
    Json(
        fixtures::names()
            .filter_map(|id| {
                fixtures::load(id).map(|env| MapInfo {
                    id: id.to_string(),
                    width: env.width(),
                    height: env.height(),
                    cell_size: env.cell_size(),
                    cols: env.cols(),
                    rows: env.rows(),
                })
            })
            .collect(),
    )
}

async fn map_document(Path(id): Path<String>) -> Response {
    match fixtures::document(&id) {
        Some(doc) => ([("content-type", "text/plain; charset=utf-8")], doc).into_response(),
        None => (StatusCode::NOT_FOUND, format!("unknown map `{id}`")).into_response(),
    }
}

async fn session_ws(ws: WebSocketUpgrade, Extract(app): Extract<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, app))
}

/// Outbound half: numbers every message sent on one connection.
struct Outbound {
    socket: WebSocket,
    seq: u64,
}

impl Outbound {
    async fn send(&mut self, body: Body) -> bool {
        self.seq += 1;
        let text = Message::new(self.seq, body).encode();
        self.socket.send(WsMessage::Text(text.into())).await.is_ok()
    }
}

enum Incoming {
    Msg(Message),
    /// Already answered with an error.
    Rejected,
    Closed,
}

/// Reads one client message, answering protocol faults so the caller only
/// sees well-formed, in-order messages.
async fn receive(out: &mut Outbound, last_seq: &mut Option<u64>, frame: Option<Result<WsMessage, axum::Error>>) -> Incoming {
    let text = match frame {
        None | Some(Err(_)) | Some(Ok(WsMessage::Close(_))) => return Incoming::Closed,
        Some(Ok(WsMessage::Text(t))) => t,
        Some(Ok(WsMessage::Binary(_))) => {
            return reject(out, Body::error("binary frames are not supported", None)).await;
        }
        Some(Ok(_)) => return Incoming::Rejected,
    };
    match Message::decode(text.as_str()) {
        Err(e) => reject(out, Body::error(e.to_string(), e.seq())).await,
        Ok(m) if last_seq.is_some_and(|s| m.seq <= s) => {
            let msg = format!("sequence number {} does not increase past {}", m.seq, last_seq.unwrap_or(0));
            reject(out, Body::error(msg, Some(m.seq))).await
        }
        Ok(m) => {
            *last_seq = Some(m.seq);
            Incoming::Msg(m)
        }
    }
}

async fn reject(out: &mut Outbound, body: Body) -> Incoming {
    if out.send(body).await {
        Incoming::Rejected
    } else {
        Incoming::Closed
    }
}

async fn connection(socket: WebSocket, app: Arc<AppState>) {
    let mut out = Outbound { socket, seq: 0 };
    let mut last_seq = None;

    let mut session = loop {
        let frame = out.socket.recv().await;
        let msg = match receive(&mut out, &mut last_seq, frame).await {
            Incoming::Msg(m) => m,
            Incoming::Rejected => continue,
            Incoming::Closed => return,
        };
        let body = match msg.body {
            Body::Hello(Hello::Open(req)) => match app.open(req).await {
                Ok((session, welcome)) => {
                    if !out.send(Body::Hello(Hello::Welcome(welcome))).await {
                        session.close();
                        return;
                    }
                    break session;
                }
                Err(e) => Body::error(e.to_string(), Some(msg.seq)),
            },
            _ => Body::error("no session is open; send hello first", Some(msg.seq)),
        };
        if !out.send(body).await {
            return;
        }
    };

    let cap = app.config.node_cap;
    let mut frames = session.frames();
    frames.mark_changed();
    loop {
        tokio::select! {
            frame = out.socket.recv() => {
                let msg = match receive(&mut out, &mut last_seq, frame).await {
                    Incoming::Msg(m) => m,
                    Incoming::Rejected => continue,
                    Incoming::Closed => break,
                };
                let cmd = match msg.body {
                    Body::SetGoal(g) => Ok(Command::SetGoal { seq: msg.seq, goal: g.goal }),
                    Body::AddObstacle(rect) => Ok(Command::AddObstacle { seq: msg.seq, rect }),
                    Body::RemoveObstacle(which) => Ok(Command::RemoveObstacle { seq: msg.seq, which }),
                    Body::Pause => Ok(Command::Pause { seq: msg.seq }),
                    Body::Resume => Ok(Command::Resume { seq: msg.seq }),
                    Body::Hello(_) => Err("a session is already open on this connection".to_string()),
                    other => Err(format!("{:?} is a server message", other.kind())),
                };
                let sent = match cmd.map(|c| session.send(c).map_err(|e| e.to_string())) {
                    Ok(Ok(())) => true,
                    Ok(Err(e)) | Err(e) => out.send(Body::error(e, Some(msg.seq))).await,
                };
                if !sent {
                    break;
                }
            }
            changed = frames.changed() => {
                if changed.is_err() {
                    break;
                }
                let frame = frames.borrow_and_update().clone();
                let snap = frame.to_snapshot(cap);
                if !out.send(Body::Snapshot(Box::new(snap))).await {
                    break;
                }
            }
            Some(err) = session.next_error() => {
                if !out.send(Body::Error(err)).await {
                    break;
                }
            }
        }
    }
    session.close();
}
