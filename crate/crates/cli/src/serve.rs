//! HTTP session endpoint.
//!
//! | route            | method | body / response                                  |
//! |------------------|--------|--------------------------------------------------|
//! | `/state`         | GET    | full [`SessionState`] as JSON                    |
//! | `/params`        | POST   | partial state JSON, answered with the new state  |
//! | `/frame.png`     | GET    | PNG of the current state                         |
//! | `/lights`        | GET    | `{"lights": [names], "current": name}`           |
//!
//! Errors come back as `{"error": message}` with status 400 (bad request) or
//! 500 (render failure); a rejected update leaves the state untouched.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use anyhow::{bail, Context, Result};
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Args;
use serde_json::json;

use gsav_core::io::encode_png;
use gsav_core::model::{EnvironmentLight, GaussianCloud, Rig};

use crate::assets::{load_avatar_rig, load_env, parse_size, parse_triple};
use crate::session::{render_display, ParamsPatch, SessionState, View};

/// Serve an interactive rendering session over HTTP.
#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub avatar: PathBuf,
    #[arg(long)]
    pub rig: PathBuf,
    /// Directory of light assets (*.gslt); each is named by its file stem.
    #[arg(long)]
    pub lights: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Frame size, WIDTHxHEIGHT or a single number.
    #[arg(long, default_value = "512", value_parser = parse_size)]
    pub size: (usize, usize),
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = 30.0)]
    pub fov: f64,
    /// Orbit target as X,Y,Z.
    #[arg(long, default_value = "0,0,0", value_parser = parse_triple, allow_hyphen_values = true)]
    pub target: [f64; 3],
}

pub struct App {
    cloud: GaussianCloud,
    rig: Rig,
    lights: BTreeMap<String, EnvironmentLight>,
    names: Vec<String>,
    view: View,
    state: RwLock<SessionState>,
    updates: tokio::sync::Mutex<()>,
    renders: Mutex<()>,
}

impl App {
    pub fn new(
        cloud: GaussianCloud,
        rig: Rig,
        lights: BTreeMap<String, EnvironmentLight>,
        view: View,
    ) -> Result<Self> {
        let names: Vec<String> = lights.keys().cloned().collect();
        let Some(first) = names.first().cloned() else {
            bail!("no lights to serve");
        };
        let state = SessionState::new(&rig, first);
        Ok(Self {
            cloud,
            rig,
            lights,
            names,
            view,
            state: RwLock::new(state),
            updates: tokio::sync::Mutex::new(()),
            renders: Mutex::new(()),
        })
    }

    pub fn state(&self) -> SessionState {
        self.state.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn view(&self) -> View {
        self.view
    }

    /// PNG bytes of `state`; renders run one at a time.
    pub fn render_png(&self, state: &SessionState) -> Result<Vec<u8>> {
        let _turn = self.renders.lock().unwrap_or_else(|e| e.into_inner());
        let env = &self.lights[&state.light];
        let image = render_display(
            &self.cloud,
            &self.rig,
            &state.pose(&self.rig),
            &self.view.camera(&state.camera),
            env,
            &state.shade_params(),
            state.background,
        )?;
        Ok(encode_png(&image)?)
    }
}

/// Light assets of a directory keyed by file stem.
pub fn load_light_dir(dir: &Path) -> Result<BTreeMap<String, EnvironmentLight>> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "gslt") {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.insert(name, load_env(&path)?);
        }
    }
    if out.is_empty() {
        bail!("no .gslt light assets in {}", dir.display());
    }
    Ok(out)
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

async fn get_state(State(app): State<Arc<App>>) -> Json<SessionState> {
    Json(app.state())
}

async fn post_params(
    State(app): State<Arc<App>>,
    body: Bytes,
) -> Result<Json<SessionState>, ApiError> {
    let patch: ParamsPatch = serde_json::from_slice(&body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    let _queue = app.updates.lock().await;
    let next = app
        .state()
        .merged(patch, &app.rig, &app.names)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e))?;
    *app.state.write().unwrap_or_else(|e| e.into_inner()) = next.clone();
    Ok(Json(next))
}

async fn get_frame(State(app): State<Arc<App>>) -> Result<Response, ApiError> {
    let state = app.state();
    let png = tokio::task::spawn_blocking(move || app.render_png(&state))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn get_lights(State(app): State<Arc<App>>) -> Json<serde_json::Value> {
    Json(json!({ "lights": app.names, "current": app.state().light }))
}

pub fn router(app: Arc<App>) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/params", post(post_params))
        .route("/frame.png", get(get_frame))
        .route("/lights", get(get_lights))
        .with_state(app)
}

pub fn build_app(args: &ServeArgs) -> Result<App> {
    let (cloud, rig) = load_avatar_rig(&args.avatar, &args.rig)?;
    let lights = load_light_dir(&args.lights)?;
    let view = View {
        width: args.size.0,
        height: args.size.1,
        fov: args.fov,
        target: args.target,
    };
    App::new(cloud, rig, lights, view)
}

pub async fn run(args: &ServeArgs) -> Result<()> {
    let app = Arc::new(build_app(args)?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("bad address {}:{}", args.host, args.port))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot listen on {addr}"))?;
    log::info!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
