use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::voxel::BlockColor;

/// Camera delta bound per step, degrees.
pub const CAMERA_LIMIT: f64 = 5.0;

/// Discrete action verb. Indices 0..=13 are the base action set;
/// 14 is the optional end-of-episode action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Noop,
    StepForward,
    StepBackward,
    StepLeft,
    StepRight,
    Jump,
    BreakBlock,
    PlaceBlock,
    #[serde(rename = "select_1")]
    Select1,
    #[serde(rename = "select_2")]
    Select2,
    #[serde(rename = "select_3")]
    Select3,
    #[serde(rename = "select_4")]
    Select4,
    #[serde(rename = "select_5")]
    Select5,
    #[serde(rename = "select_6")]
    Select6,
    EndEpisode,
}

impl Verb {
    /// Size of the base discrete action set (without `EndEpisode`).
    pub const BASE_COUNT: usize = 14;

    pub const ALL: [Verb; 15] = [
        Verb::Noop,
        Verb::StepForward,
        Verb::StepBackward,
        Verb::StepLeft,
        Verb::StepRight,
        Verb::Jump,
        Verb::BreakBlock,
        Verb::PlaceBlock,
        Verb::Select1,
        Verb::Select2,
        Verb::Select3,
        Verb::Select4,
        Verb::Select5,
        Verb::Select6,
        Verb::EndEpisode,
    ];

    pub fn index(self) -> usize {
        Verb::ALL.iter().position(|&v| v == self).expect("verb in table")
    }

    pub fn from_index(i: usize) -> Option<Verb> {
        Verb::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Verb::Noop => "noop",
            Verb::StepForward => "step_forward",
            Verb::StepBackward => "step_backward",
            Verb::StepLeft => "step_left",
            Verb::StepRight => "step_right",
            Verb::Jump => "jump",
            Verb::BreakBlock => "break_block",
            Verb::PlaceBlock => "place_block",
            Verb::Select1 => "select_1",
            Verb::Select2 => "select_2",
            Verb::Select3 => "select_3",
            Verb::Select4 => "select_4",
            Verb::Select5 => "select_5",
            Verb::Select6 => "select_6",
            Verb::EndEpisode => "end_episode",
        }
    }

    pub fn is_movement(self) -> bool {
        matches!(
            self,
            Verb::StepForward | Verb::StepBackward | Verb::StepLeft | Verb::StepRight | Verb::Jump
        )
    }

    /// Color chosen by a `select_k` verb.
    pub fn selected_color(self) -> Option<BlockColor> {
        let k = match self {
            Verb::Select1 => 1,
            Verb::Select2 => 2,
            Verb::Select3 => 3,
            Verb::Select4 => 4,
            Verb::Select5 => 5,
            Verb::Select6 => 6,
            _ => return None,
        };
        Some(BlockColor::placeable(k))
    }

    pub fn select(color: BlockColor) -> Option<Verb> {
        match color.value() {
            1 => Some(Verb::Select1),
            2 => Some(Verb::Select2),
            3 => Some(Verb::Select3),
            4 => Some(Verb::Select4),
            5 => Some(Verb::Select5),
            6 => Some(Verb::Select6),
            _ => None,
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownVerb(pub String);

impl fmt::Display for UnknownVerb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown verb {:?}", self.0)
    }
}

impl std::error::Error for UnknownVerb {}

impl FromStr for Verb {
    type Err = UnknownVerb;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Verb::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| UnknownVerb(s.to_string()))
    }
}

/// A verb plus a continuous `(pitch, yaw)` camera delta in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub verb: Verb,
    #[serde(default)]
    pub camera: [f64; 2],
}

impl Action {
    /// Build an action; camera components are clamped to ±5°.
    pub fn new(verb: Verb, d_pitch: f64, d_yaw: f64) -> Self {
        Action {
            verb,
            camera: [clamp_camera(d_pitch), clamp_camera(d_yaw)],
        }
    }

    pub fn verb(verb: Verb) -> Self {
        Action::new(verb, 0.0, 0.0)
    }

    pub fn look(d_pitch: f64, d_yaw: f64) -> Self {
        Action::new(Verb::Noop, d_pitch, d_yaw)
    }

    pub fn clamped(self) -> Self {
        Action::new(self.verb, self.camera[0], self.camera[1])
    }
}

fn clamp_camera(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-CAMERA_LIMIT, CAMERA_LIMIT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_indices_round_trip() {
        for (i, v) in Verb::ALL.iter().enumerate() {
            assert_eq!(v.index(), i);
            assert_eq!(Verb::from_index(i), Some(*v));
            assert_eq!(v.name().parse::<Verb>().unwrap(), *v);
        }
        assert_eq!(Verb::from_index(15), None);
        assert_eq!(Verb::BASE_COUNT, 14);
    }

    #[test]
    fn camera_is_clamped() {
        let a = Action::new(Verb::Noop, 12.0, -40.0);
        assert_eq!(a.camera, [5.0, -5.0]);
        assert_eq!(Action::new(Verb::Noop, f64::NAN, 1.0).camera, [0.0, 1.0]);
    }

    #[test]
    fn verb_serde_names() {
        assert_eq!(serde_json::to_string(&Verb::Select3).unwrap(), "\"select_3\"");
        assert_eq!(serde_json::from_str::<Verb>("\"step_forward\"").unwrap(), Verb::StepForward);
    }
}
