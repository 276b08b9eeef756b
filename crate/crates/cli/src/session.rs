//! Transport-independent session state machine.

use serde_json::Value;

use buildzone_core::behavior::{record_to_json, IdOffsetMap, RecordBuilder};
use buildzone_core::env::{Action, Env, EpisodeConfig, Verb};
use buildzone_core::tasks::{generate_task, GeneratorParams, TaskRecord};

use crate::protocol::{parse_verb, ClientMessage, ServerMessage, WireObservation, PROTOCOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    #[value(name = "human_collect")]
    HumanCollect,
    #[value(name = "agent_eval")]
    AgentEval,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::HumanCollect => "human_collect",
            Mode::AgentEval => "agent_eval",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerOptions {
    pub mode: Mode,
    pub tasks: Vec<TaskRecord>,
    pub map: IdOffsetMap,
    pub max_sessions: usize,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            mode: Mode::AgentEval,
            tasks: Vec::new(),
            map: IdOffsetMap::default(),
            max_sessions: 64,
        }
    }
}

struct Episode {
    env: Env,
    builder: RecordBuilder,
}

pub struct Session {
    id: u64,
    greeted: bool,
    last_client_seq: Option<u64>,
    next_seq: u64,
    episode: Option<Episode>,
    instruction: Option<String>,
}

/// Replies to one client frame, and whether the connection should close.
pub struct Reply {
    pub messages: Vec<ServerMessage>,
    pub close: bool,
}

fn merge_config(profile: Option<&str>, overrides: Option<&Value>) -> Result<EpisodeConfig, String> {
    let base = match profile {
        Some(p) => EpisodeConfig::for_profile(p).ok_or_else(|| format!("unknown profile {p:?}"))?,
        None => EpisodeConfig::default(),
    };
    let Some(Value::Object(o)) = overrides else {
        return match overrides {
            None | Some(Value::Null) => Ok(base),
            Some(_) => Err("config must be an object".into()),
        };
    };
    let mut v = serde_json::to_value(&base).expect("config serializes");
    let obj = v.as_object_mut().expect("config is an object");
    for (k, val) in o {
        obj.insert(k.clone(), val.clone());
    }
    let cfg: EpisodeConfig = serde_json::from_value(v).map_err(|e| format!("invalid config: {e}"))?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

impl Session {
    pub fn new(id: u64) -> Self {
        Session {
            id,
            greeted: false,
            last_client_seq: None,
            next_seq: 1,
            episode: None,
            instruction: None,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    fn seq(&mut self) -> u64 {
        let s = self.next_seq;
        self.next_seq += 1;
        s
    }

    fn error(&mut self, ack: Option<u64>, message: impl Into<String>) -> ServerMessage {
        ServerMessage::Error {
            seq: self.seq(),
            ack,
            message: message.into(),
        }
    }

    fn one(&mut self, m: ServerMessage) -> Reply {
        Reply {
            messages: vec![m],
            close: false,
        }
    }

    pub fn handle_text(&mut self, text: &str, opts: &ServerOptions) -> Reply {
        let msg: ClientMessage = match serde_json::from_str(text) {
            Ok(m) => m,
            Err(e) => {
                let ack = serde_json::from_str::<Value>(text).ok().and_then(|v| v.get("seq")?.as_u64());
                let m = self.error(ack, format!("malformed message: {e}"));
                return self.one(m);
            }
        };
        let seq = msg.seq();
        if self.last_client_seq.is_some_and(|last| seq <= last) {
            let m = self.error(Some(seq), format!("sequence {seq} does not increase"));
            return self.one(m);
        }
        self.last_client_seq = Some(seq);

        if !self.greeted {
            return match msg {
                ClientMessage::Hello { version, .. } if version == PROTOCOL_VERSION => {
                    self.greeted = true;
                    let m = ServerMessage::Hello {
                        seq: self.seq(),
                        ack: seq,
                        version: PROTOCOL_VERSION,
                        session_id: self.id,
                        mode: opts.mode.as_str().into(),
                    };
                    self.one(m)
                }
                ClientMessage::Hello { version, .. } => {
                    let m = self.error(
                        Some(seq),
                        format!("protocol version {version} not supported (server speaks {PROTOCOL_VERSION})"),
                    );
                    Reply {
                        messages: vec![m],
                        close: true,
                    }
                }
                _ => {
                    let m = self.error(Some(seq), "expected hello");
                    self.one(m)
                }
            };
        }

        let is_config = matches!(msg, ClientMessage::Config { .. });
        let result = match msg {
            ClientMessage::Hello { .. } => Err("already greeted".to_string()),
            ClientMessage::Config {
                profile,
                config,
                task,
                task_index,
                seed,
                ..
            } => self.configure(seq, profile.as_deref(), config.as_ref(), task, task_index, seed, opts),
            ClientMessage::Action { verb, camera, .. } => match parse_verb(&verb) {
                Some(v) => self.act(seq, Action::new(v, camera[0], camera[1])),
                None => Err(format!("unknown verb {verb:?}")),
            },
            ClientMessage::EndEpisode { .. } => self.act(seq, Action::verb(Verb::EndEpisode)),
            ClientMessage::InstructionSubmit { text, .. } => {
                self.instruction = Some(text.clone());
                if let Some(ep) = &mut self.episode {
                    ep.builder.set_extra("instruction", Value::String(text.clone()));
                }
                Ok(ServerMessage::InstructionSubmit {
                    seq: self.seq(),
                    ack: seq,
                    text,
                })
            }
            ClientMessage::ExportLog { .. } => match &self.episode {
                Some(ep) => {
                    let rec = ep.builder.finish(ep.env.world(), ep.env.pose());
                    let record = serde_json::from_str(&record_to_json(&rec)).expect("record JSON");
                    Ok(ServerMessage::ExportLog {
                        seq: self.seq(),
                        ack: seq,
                        record,
                    })
                }
                None => Err("no episode configured".into()),
            },
        };
        match result {
            Ok(m) => {
                let mut messages = vec![m];
                if is_config {
                    messages.extend(self.initial_observation(seq));
                }
                Reply { messages, close: false }
            }
            Err(e) => {
                let m = self.error(Some(seq), e);
                self.one(m)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn configure(
        &mut self,
        seq: u64,
        profile: Option<&str>,
        overrides: Option<&Value>,
        task: Option<Box<TaskRecord>>,
        task_index: Option<usize>,
        seed: u64,
        opts: &ServerOptions,
    ) -> Result<ServerMessage, String> {
        let mut cfg = merge_config(profile, overrides)?;
        if opts.mode == Mode::HumanCollect {
            cfg.end_action_enabled = true;
        }
        let task = match (task, task_index) {
            (Some(t), _) => *t,
            (None, Some(i)) => opts
                .tasks
                .get(i)
                .cloned()
                .ok_or_else(|| format!("task_index {i} out of range ({} tasks)", opts.tasks.len()))?,
            (None, None) => generate_task(seed, GeneratorParams::default()).map_err(|e| e.to_string())?,
        };
        let env = Env::new(&task, cfg.clone(), seed).map_err(|e| e.to_string())?;
        let mut builder = RecordBuilder::new(self.id as i64, 1, opts.map.clone(), &task.starting_grid, env.pose());
        if let Some(text) = &self.instruction {
            builder.set_extra("instruction", Value::String(text.clone()));
        }
        self.episode = Some(Episode { env, builder });
        Ok(ServerMessage::Config {
            seq: self.seq(),
            ack: seq,
            task_id: task.task_id,
            config: cfg,
        })
    }

    /// Step-0 observation sent right after a successful config.
    fn initial_observation(&mut self, ack: u64) -> Option<ServerMessage> {
        let ep = self.episode.as_ref()?;
        let obs = WireObservation::new(&ep.env.observe(), ep.env.config().profile, 0.0, false, None);
        Some(ServerMessage::Observation {
            seq: self.seq(),
            ack,
            observation: Box::new(obs),
        })
    }

    fn act(&mut self, seq: u64, action: Action) -> Result<ServerMessage, String> {
        let ep = self.episode.as_mut().ok_or("no episode configured")?;
        let r = ep.env.step(action).map_err(|e| e.to_string())?;
        ep.builder.step(&action.clamped(), ep.env.pose(), &r.changes);
        let obs = WireObservation::new(&r.observation, ep.env.config().profile, r.reward, r.done, Some(r.info));
        Ok(ServerMessage::Observation {
            seq: self.seq(),
            ack: seq,
            observation: Box::new(obs),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use buildzone_core::env::Profile;

    fn send(s: &mut Session, text: &str) -> Vec<ServerMessage> {
        s.handle_text(text, &ServerOptions::default()).messages
    }

    #[test]
    fn handshake_required() {
        let mut s = Session::new(1);
        assert!(matches!(send(&mut s, r#"{"type":"config","seq":1}"#)[0], ServerMessage::Error { .. }));
        let r = s.handle_text(r#"{"type":"hello","seq":2,"version":9}"#, &ServerOptions::default());
        assert!(r.close);
        let mut s = Session::new(1);
        assert!(matches!(send(&mut s, r#"{"type":"hello","seq":1,"version":1}"#)[0], ServerMessage::Hello { .. }));
    }

    #[test]
    fn sequence_must_increase() {
        let mut s = Session::new(1);
        send(&mut s, r#"{"type":"hello","seq":5,"version":1}"#);
        let r = send(&mut s, r#"{"type":"config","seq":5}"#);
        assert!(matches!(r[0], ServerMessage::Error { ack: Some(5), .. }));
        let r = send(&mut s, r#"{"type":"config","seq":6}"#);
        assert!(matches!(r[0], ServerMessage::Config { ack: 6, .. }));
        assert!(r.iter().all(|m| m.seq() > 1));
    }

    #[test]
    fn malformed_and_unknown_keep_session() {
        let mut s = Session::new(1);
        send(&mut s, r#"{"type":"hello","seq":1,"version":1}"#);
        send(&mut s, r#"{"type":"config","seq":2}"#);
        assert!(matches!(send(&mut s, "{nope")[0], ServerMessage::Error { ack: None, .. }));
        assert!(matches!(
            send(&mut s, r#"{"type":"action","seq":3,"verb":"fly"}"#)[0],
            ServerMessage::Error { ack: Some(3), .. }
        ));
        let r = send(&mut s, r#"{"type":"action","seq":4,"verb":"noop"}"#);
        let ServerMessage::Observation { observation, .. } = &r[0] else {
            panic!("{r:?}")
        };
        assert_eq!(observation.step, 1);
    }

    #[test]
    fn config_overrides_and_profile() {
        let cfg = merge_config(Some("visual"), Some(&serde_json::json!({"max_steps": 7}))).unwrap();
        assert!(cfg.render);
        assert_eq!(cfg.profile, Profile::Visual);
        assert_eq!(cfg.max_steps, 7);
        assert!(merge_config(None, Some(&serde_json::json!({"max_steps": 0}))).is_err());
        assert!(merge_config(Some("x"), None).is_err());
    }
}
