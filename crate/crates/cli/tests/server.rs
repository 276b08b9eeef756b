use std::net::SocketAddr;
use std::path::PathBuf;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use buildzone_cli::protocol::decode_png;
use buildzone_cli::server::router;
use buildzone_cli::session::{Mode, ServerOptions};
use buildzone_core::behavior::{parse_record, replay_tape, IdOffsetMap};
use buildzone_core::voxel::Grid;

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(options: ServerOptions, static_dir: Option<PathBuf>) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(options, static_dir)).await });
    addr
}

struct Client {
    ws: Ws,
    seq: u64,
    last_server_seq: u64,
}

impl Client {
    async fn connect(addr: SocketAddr) -> Client {
        let (ws, _) = connect_async(format!("ws://{addr}/ws")).await.unwrap();
        Client {
            ws,
            seq: 0,
            last_server_seq: 0,
        }
    }

    async fn send_raw(&mut self, text: String) {
        self.ws.send(Message::text(text)).await.unwrap();
    }

    /// Send `msg` with the next sequence number.
    async fn send(&mut self, mut msg: Value) -> u64 {
        self.seq += 1;
        msg["seq"] = json!(self.seq);
        self.send_raw(msg.to_string()).await;
        self.seq
    }

    async fn recv(&mut self) -> Option<Value> {
        loop {
            match self.ws.next().await? {
                Ok(Message::Text(t)) => {
                    let v: Value = serde_json::from_str(t.as_str()).unwrap();
                    let s = v["seq"].as_u64().unwrap();
                    assert!(s > self.last_server_seq, "server seq must increase");
                    self.last_server_seq = s;
                    return Some(v);
                }
                Ok(Message::Close(_)) | Err(_) => return None,
                Ok(_) => continue,
            }
        }
    }

    async fn request(&mut self, msg: Value) -> Value {
        let seq = self.send(msg).await;
        let r = self.recv().await.unwrap();
        assert_eq!(r["ack"], json!(seq), "{r}");
        r
    }

    async fn hello(&mut self) {
        let r = self.request(json!({"type": "hello", "version": 1})).await;
        assert_eq!(r["type"], "hello");
    }

    /// Config reply plus the step-0 observation.
    async fn configure(&mut self, extra: Value) -> (Value, Value) {
        let mut msg = json!({"type": "config"});
        for (k, v) in extra.as_object().unwrap() {
            msg[k] = v.clone();
        }
        let c = self.request(msg).await;
        let o = self.recv().await.unwrap();
        (c, o)
    }

    async fn act(&mut self, verb: &str, camera: [f64; 2]) -> Value {
        let r = self.request(json!({"type": "action", "verb": verb, "camera": camera})).await;
        assert_eq!(r["type"], "observation", "{r}");
        r
    }
}

fn grid_of(obs: &Value) -> Grid {
    serde_json::from_value(obs["grid"].clone()).unwrap()
}

#[tokio::test]
async fn handshake_then_noop_returns_step_one() {
    let addr = start(ServerOptions::default(), None).await;
    let mut c = Client::connect(addr).await;
    c.hello().await;
    let (cfg, obs0) = c.configure(json!({"seed": 3})).await;
    assert_eq!(cfg["type"], "config");
    assert_eq!(obs0["step"], 0);
    let obs = c.act("noop", [0.0, 0.0]).await;
    assert_eq!(obs["step"], 1);
    assert_eq!(obs["reward"], 0.0);
    assert!(obs["grid"].is_array());
    assert!(obs.get("pov").is_none());
}

#[tokio::test]
async fn version_mismatch_is_refused() {
    let addr = start(ServerOptions::default(), None).await;
    let mut c = Client::connect(addr).await;
    let r = c.request(json!({"type": "hello", "version": 2})).await;
    assert_eq!(r["type"], "error");
    assert!(c.recv().await.is_none());
}

#[tokio::test]
async fn malformed_messages_keep_the_session() {
    let addr = start(ServerOptions::default(), None).await;
    let mut c = Client::connect(addr).await;
    c.hello().await;
    c.configure(json!({})).await;
    c.send_raw("not json".into()).await;
    let e = c.recv().await.unwrap();
    assert_eq!(e["type"], "error");
    assert_eq!(e["ack"], Value::Null);
    let e = c.request(json!({"type": "action", "verb": "teleport"})).await;
    assert_eq!(e["type"], "error");
    // a repeated sequence number is rejected too
    c.send_raw(json!({"type": "action", "seq": c.seq, "verb": "noop"}).to_string()).await;
    assert_eq!(c.recv().await.unwrap()["type"], "error");
    assert_eq!(c.act("noop", [0.0, 0.0]).await["step"], 1);
}

#[tokio::test]
async fn visual_profile_hides_grid_and_sends_png() {
    let addr = start(ServerOptions::default(), None).await;
    let mut c = Client::connect(addr).await;
    c.hello().await;
    let (_, obs) = c.configure(json!({"profile": "visual"})).await;
    assert!(obs.get("grid").is_none());
    assert!(obs.get("pose").is_none());
    let png = STANDARD.decode(obs["pov"].as_str().unwrap()).unwrap();
    let img = decode_png(&png).unwrap();
    assert_eq!((img.width, img.height, img.pixels.len()), (64, 64, 64 * 64 * 3));
}

#[tokio::test]
async fn human_session_log_replays_to_final_grid() {
    let options = ServerOptions {
        mode: Mode::HumanCollect,
        ..Default::default()
    };
    let addr = start(options, None).await;
    let mut c = Client::connect(addr).await;
    c.hello().await;
    let task = json!({"task_id": "t", "target_blocks": [[5, 0, 2, 3], [4, 0, 2, 3]]});
    let (cfg, _) = c.configure(json!({"task": task})).await;
    assert_eq!(cfg["config"]["end_action_enabled"], true);
    let r = c
        .request(json!({"type": "instruction_submit", "text": "two red blocks in a row"}))
        .await;
    assert_eq!(r["type"], "instruction_submit");

    c.act("select_3", [0.0, 0.0]).await;
    for _ in 0..8 {
        c.act("noop", [-5.0, 0.0]).await;
    }
    c.act("place_block", [0.0, 0.0]).await;
    for _ in 0..6 {
        c.act("step_right", [0.0, 3.0]).await;
    }
    c.act("place_block", [0.0, 0.0]).await;
    c.act("jump", [0.0, 0.0]).await;
    c.act("break_block", [0.0, 0.0]).await;
    c.act("step_forward", [0.0, 0.0]).await;
    let end = c.request(json!({"type": "end_episode"})).await;
    assert_eq!(end["done"], true);
    let world = grid_of(&end);
    assert!(!world.is_empty(), "session placed no blocks");

    let log = c.request(json!({"type": "export_log"})).await;
    assert_eq!(log["type"], "export_log");
    let rec = parse_record(&log["record"].to_string()).unwrap();
    assert_eq!(rec.extra["instruction"], "two red blocks in a row");
    let replay = replay_tape(&rec, &IdOffsetMap::default()).unwrap();
    assert!(replay.warnings.is_empty(), "{:?}", replay.warnings);
    assert_eq!(replay.grid, world);
    assert_eq!(IdOffsetMap::default().ending_grid(&rec).unwrap(), world);
}

#[tokio::test]
async fn concurrent_sessions_are_isolated() {
    let addr = start(ServerOptions::default(), None).await;
    let task = json!({"task_id": "t", "target_blocks": [[5, 0, 2, 1]]});
    let mut a = Client::connect(addr).await;
    let mut b = Client::connect(addr).await;
    a.hello().await;
    b.hello().await;
    a.configure(json!({"task": task})).await;
    b.configure(json!({"task": task})).await;
    for _ in 0..8 {
        a.act("noop", [-5.0, 0.0]).await;
    }
    let oa = a.act("place_block", [0.0, 0.0]).await;
    let ob = b.act("noop", [0.0, 0.0]).await;
    assert_eq!(grid_of(&oa).nonzero_count(), 1);
    assert!(grid_of(&ob).is_empty());
    assert_eq!(ob["step"], 1);
}

#[tokio::test]
async fn session_limit_refuses_extra_connections() {
    let options = ServerOptions {
        max_sessions: 1,
        ..Default::default()
    };
    let addr = start(options, None).await;
    let mut a = Client::connect(addr).await;
    a.hello().await;
    let mut b = Client::connect(addr).await;
    let r = b.recv().await.unwrap();
    assert_eq!(r["type"], "error");
    assert!(b.recv().await.is_none());
}

#[tokio::test]
async fn serves_static_assets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>client</html>").unwrap();
    let addr = start(ServerOptions::default(), Some(dir.path().to_path_buf())).await;
    let mut s = TcpStream::connect(addr).await.unwrap();
    s.write_all(b"GET /index.html HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut body = String::new();
    s.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"), "{body}");
    assert!(body.ends_with("<html>client</html>"));
}
