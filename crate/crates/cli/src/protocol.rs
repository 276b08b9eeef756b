//! JSON messages exchanged over the session websocket, one per text frame.
//!
//! Every message carries `seq`, strictly increasing per direction. Server
//! replies also carry `ack`, the `seq` of the client message they answer.

use std::io::Cursor;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use buildzone_core::env::{EpisodeConfig, Observation, Profile, StepInfo, Verb};
use buildzone_core::render::Image;
use buildzone_core::tasks::TaskRecord;
use buildzone_core::voxel::Grid;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        seq: u64,
        version: u32,
    },
    Config {
        seq: u64,
        /// `"visual"` or `"full"`; applied before `config` overrides.
        #[serde(default)]
        profile: Option<String>,
        #[serde(default)]
        config: Option<Value>,
        /// Inline task; otherwise `task_index` into the server's task list,
        /// otherwise a task generated from `seed`.
        #[serde(default)]
        task: Option<Box<TaskRecord>>,
        #[serde(default)]
        task_index: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    Action {
        seq: u64,
        verb: String,
        #[serde(default)]
        camera: [f64; 2],
    },
    InstructionSubmit {
        seq: u64,
        text: String,
    },
    EndEpisode {
        seq: u64,
    },
    ExportLog {
        seq: u64,
    },
}

impl ClientMessage {
    pub fn seq(&self) -> u64 {
        match *self {
            ClientMessage::Hello { seq, .. }
            | ClientMessage::Config { seq, .. }
            | ClientMessage::Action { seq, .. }
            | ClientMessage::InstructionSubmit { seq, .. }
            | ClientMessage::EndEpisode { seq }
            | ClientMessage::ExportLog { seq } => seq,
        }
    }
}

/// Observation as sent to clients. Grid and pose are omitted in the visual profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireObservation {
    pub step: u32,
    pub reward: f64,
    pub done: bool,
    pub info: Option<StepInfo>,
    /// Base64 PNG, present when rendering.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pov: Option<String>,
    pub inventory: [u32; 6],
    pub selected: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pose: Option<[f64; 5]>,
    pub compass: f64,
    pub chat: String,
}

impl WireObservation {
    pub fn new(obs: &Observation, profile: Profile, reward: f64, done: bool, info: Option<StepInfo>) -> Self {
        let full = profile == Profile::Full;
        WireObservation {
            step: obs.step,
            reward,
            done,
            info,
            pov: obs.pov.as_ref().map(|img| STANDARD.encode(encode_png(img))),
            inventory: obs.inventory,
            selected: obs.selected,
            grid: full.then(|| obs.grid.clone()),
            pose: full.then_some(obs.pose),
            compass: obs.compass,
            chat: obs.chat.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        seq: u64,
        ack: u64,
        version: u32,
        session_id: u64,
        mode: String,
    },
    Config {
        seq: u64,
        ack: u64,
        task_id: String,
        config: EpisodeConfig,
    },
    Observation {
        seq: u64,
        ack: u64,
        #[serde(flatten)]
        observation: Box<WireObservation>,
    },
    InstructionSubmit {
        seq: u64,
        ack: u64,
        text: String,
    },
    ExportLog {
        seq: u64,
        ack: u64,
        record: Value,
    },
    Error {
        seq: u64,
        /// Absent when the offending message could not be parsed.
        ack: Option<u64>,
        message: String,
    },
}

impl ServerMessage {
    pub fn seq(&self) -> u64 {
        match *self {
            ServerMessage::Hello { seq, .. }
            | ServerMessage::Config { seq, .. }
            | ServerMessage::Observation { seq, .. }
            | ServerMessage::InstructionSubmit { seq, .. }
            | ServerMessage::ExportLog { seq, .. }
            | ServerMessage::Error { seq, .. } => seq,
        }
    }
}

pub fn parse_verb(name: &str) -> Option<Verb> {
    Verb::ALL.into_iter().find(|v| v.name() == name)
}

/// Lossless RGB8 PNG.
pub fn encode_png(img: &Image) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("png header");
        w.write_image_data(&img.pixels).expect("png data");
    }
    out.into_inner()
}

pub fn decode_png(bytes: &[u8]) -> Option<Image> {
    let dec = png::Decoder::new(Cursor::new(bytes));
    let mut reader = dec.read_info().ok()?;
    let mut buf = vec![0; reader.output_buffer_size()?];
    let info = reader.next_frame(&mut buf).ok()?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return None;
    }
    buf.truncate(info.buffer_size());
    Some(Image {
        width: info.width as usize,
        height: info.height as usize,
        pixels: buf,
    })
}
