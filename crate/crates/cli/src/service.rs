//! Local session API: create plays against the engine, inspect them, submit
//! moves, solve formulas, and browse game trees.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lingame_core::strategy::PlayStatus;
use lingame_core::{AtomEnv, BangMode, ExplicitTree, Referee, Role, Turn};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{build, Engine, EngineKind};

/// Service-wide defaults.
#[derive(Clone, Copy, Debug)]
pub struct ServiceConfig {
    pub bang_cap: u32,
    pub bang_mode: BangMode,
    pub engine: EngineKind,
    pub seed: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bang_cap: 2,
            bang_mode: BangMode::Consistent,
            engine: EngineKind::Solver,
            seed: 0,
        }
    }
}

struct Session {
    referee: Referee,
    human: Role,
    engine: Engine,
}

impl Session {
    fn engine_to_move(&self) -> bool {
        self.referee.status() == PlayStatus::Ongoing && self.referee.turn() == self.engine.role().turn()
    }

    fn run_engine(&mut self) {
        while self.engine_to_move() {
            let Some(m) = self.engine.choose(&self.referee) else { break };
            self.referee.apply_move(&m).expect("engine moves are legal");
        }
    }

    fn view(&self) -> SessionView {
        let status = self.referee.status();
        SessionView {
            turn: self.referee.turn(),
            legal_moves: self.referee.legal_moves().iter().map(ToString::to_string).collect(),
            history: self.referee.history().iter().map(ToString::to_string).collect(),
            terminated: status == PlayStatus::Terminated,
            stuck_side: match status {
                PlayStatus::Stuck(role) => Some(role),
                _ => None,
            },
            human_side: self.human,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub turn: Turn,
    pub legal_moves: Vec<String>,
    pub history: Vec<String>,
    pub terminated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stuck_side: Option<Role>,
    pub human_side: Role,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<u64, Session>>>,
    next_id: Arc<AtomicU64>,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
            config,
        }
    }
}

pub fn router(config: ServiceConfig) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/move", post(submit_move))
        .route("/solve", post(solve_formula))
        .route("/game/tree", get(game_tree))
        .with_state(AppState::new(config))
}

/// Serves on `addr` until the process ends.
pub async fn serve(addr: &str, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateSession {
    formula: String,
    atoms: Option<BTreeMap<String, ExplicitTree>>,
    human_side: Role,
    bang_cap: Option<u32>,
    bang_mode: Option<BangMode>,
    engine: Option<EngineKind>,
    seed: Option<u64>,
}

/// The request's atom trees (name to tree), or unit games for every atom.
fn env_or_unit(atoms: Option<BTreeMap<String, ExplicitTree>>, formula: &str) -> Result<AtomEnv, String> {
    match atoms {
        Some(atoms) => {
            let env = AtomEnv { atoms };
            env.validate().map_err(|e| e.to_string())?;
            Ok(env)
        }
        None => Ok(AtomEnv::unit_for(&lingame_core::parse(formula).map_err(|e| e.to_string())?)),
    }
}

async fn create_session(State(app): State<AppState>, Json(req): Json<CreateSession>) -> Response {
    let env = match env_or_unit(req.atoms, &req.formula) {
        Ok(env) => env,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    let cap = req.bang_cap.unwrap_or(app.config.bang_cap);
    let mode = req.bang_mode.unwrap_or(app.config.bang_mode);
    let p = match build(&req.formula, &env, cap, mode) {
        Ok((_, p)) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let id = app.next_id.fetch_add(1, Ordering::Relaxed);
    let kind = req.engine.unwrap_or(app.config.engine);
    let engine = Engine::new(&p, req.human_side.opponent(), kind, req.seed.unwrap_or(app.config.seed ^ id));
    let mut session = Session {
        referee: Referee::new(p),
        human: req.human_side,
        engine,
    };
    session.run_engine();
    let view = session.view();
    app.sessions.lock().expect("session lock").insert(id, session);
    (StatusCode::CREATED, Json(json!({ "id": id.to_string(), "state": view }))).into_response()
}

fn parse_id(id: &str) -> Option<u64> {
    id.parse().ok()
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let sessions = app.sessions.lock().expect("session lock");
    match parse_id(&id).and_then(|id| sessions.get(&id)) {
        Some(s) => Json(s.view()).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown session {id}")),
    }
}

#[derive(Deserialize)]
struct MoveRequest {
    #[serde(rename = "move")]
    mv: String,
}

async fn submit_move(State(app): State<AppState>, Path(id): Path<String>, Json(req): Json<MoveRequest>) -> Response {
    let mut sessions = app.sessions.lock().expect("session lock");
    let Some(session) = parse_id(&id).and_then(|id| sessions.get_mut(&id)) else {
        return error(StatusCode::NOT_FOUND, format!("unknown session {id}"));
    };
    if session.referee.status() != PlayStatus::Ongoing {
        return error(StatusCode::CONFLICT, format!("play is over ({})", session.referee.status()));
    }
    if session.referee.turn() != session.human.turn() {
        return error(StatusCode::CONFLICT, format!("it is the {}'s turn", session.referee.turn()));
    }
    let Some(m) = session.referee.find_move(&req.mv) else {
        return error(StatusCode::BAD_REQUEST, format!("illegal move `{}`", req.mv));
    };
    session.referee.apply_move(&m).expect("found moves are legal");
    session.run_engine();
    Json(session.view()).into_response()
}

#[derive(Deserialize)]
struct SolveRequest {
    formula: String,
    atoms: Option<BTreeMap<String, ExplicitTree>>,
}

async fn solve_formula(State(app): State<AppState>, Json(req): Json<SolveRequest>) -> Response {
    let env = match env_or_unit(req.atoms, &req.formula) {
        Ok(env) => env,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    match build(&req.formula, &env, app.config.bang_cap, app.config.bang_mode) {
        Ok((_, p)) => Json(json!({ "winner": lingame_core::solve(&p).winner })).into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

#[derive(Deserialize)]
struct TreeQuery {
    formula: String,
    #[serde(default)]
    path: String,
}

/// One level of the game tree: the turn after following `path` (moves
/// separated by commas) and the legal moves there. Atoms are unit games.
async fn game_tree(State(app): State<AppState>, Query(q): Query<TreeQuery>) -> Response {
    let env = match env_or_unit(None, &q.formula) {
        Ok(env) => env,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    let p = match build(&q.formula, &env, app.config.bang_cap, app.config.bang_mode) {
        Ok((_, p)) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let mut referee = Referee::new(p);
    for step in q.path.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some(m) = referee.find_move(step) else {
            return error(StatusCode::BAD_REQUEST, format!("illegal move `{step}` in path"));
        };
        referee.apply_move(&m).expect("found moves are legal");
    }
    let moves: Vec<String> = referee.legal_moves().iter().map(ToString::to_string).collect();
    Json(json!({ "turn": referee.turn(), "moves": moves })).into_response()
}
