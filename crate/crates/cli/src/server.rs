//! Websocket session server. `/ws` speaks the session protocol; everything
//! else is served from an optional static asset directory.

use std::collections::HashSet;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use crate::protocol::ServerMessage;
use crate::session::{ServerOptions, Session};

/// Live session ids, bounded by `ServerOptions::max_sessions`.
#[derive(Default)]
pub struct Registry {
    next_id: AtomicU64,
    active: Mutex<HashSet<u64>>,
}

impl Registry {
    fn open(&self, max: usize) -> Option<u64> {
        let mut active = self.active.lock().expect("registry lock");
        if active.len() >= max {
            return None;
        }
        let id = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        active.insert(id);
        Some(id)
    }

    fn close(&self, id: u64) {
        self.active.lock().expect("registry lock").remove(&id);
    }

    pub fn len(&self) -> usize {
        self.active.lock().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone)]
pub struct AppState {
    pub options: Arc<ServerOptions>,
    pub registry: Arc<Registry>,
}

pub fn router(options: ServerOptions, static_dir: Option<PathBuf>) -> Router {
    let state = AppState {
        options: Arc::new(options),
        registry: Arc::new(Registry::default()),
    };
    let app = Router::new().route("/ws", get(upgrade)).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| run_session(socket, state))
}

async fn send(socket: &mut WebSocket, m: &ServerMessage) -> bool {
    let text = serde_json::to_string(m).expect("message serializes");
    socket.send(Message::Text(text.into())).await.is_ok()
}

async fn run_session(mut socket: WebSocket, state: AppState) {
    let Some(id) = state.registry.open(state.options.max_sessions) else {
        let refuse = ServerMessage::Error {
            seq: 1,
            ack: None,
            message: "server is at its session limit".into(),
        };
        send(&mut socket, &refuse).await;
        let _ = socket.send(Message::Close(None)).await;
        return;
    };
    log::info!("session {id} opened");
    let mut session = Session::new(id);
    while let Some(Ok(msg)) = socket.recv().await {
        let reply = match msg {
            Message::Text(t) => session.handle_text(t.as_str(), &state.options),
            Message::Binary(_) => session.handle_text("binary frame", &state.options),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        let mut ok = true;
        for m in &reply.messages {
            ok &= send(&mut socket, m).await;
        }
        if !ok || reply.close {
            let _ = socket.send(Message::Close(None)).await;
            break;
        }
    }
    state.registry.close(id);
    log::info!("session {id} closed");
}

/// Serve until ctrl-c.
pub async fn serve(listener: TcpListener, app: Router) -> std::io::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    log::info!("listening on {addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
