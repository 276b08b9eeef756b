use serde::Serialize;

use buildzone_core::behavior::{parse_records, replay_tape, to_trajectory, trajectory_to_jsonl, IdOffsetMap};
use buildzone_core::tasks::TaskRecord;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConvertSummary {
    pub parsed: usize,
    pub replay_ok: usize,
    pub warnings: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct Converted {
    pub jsonl: String,
    /// One task per converted record, targeting its final grid.
    pub tasks: Vec<TaskRecord>,
    pub summary: ConvertSummary,
    pub errors: Vec<String>,
}

/// Records whose replay reproduces their ending state count as `replay_ok`.
pub fn convert(text: &str, map: &IdOffsetMap) -> Converted {
    let mut out = Converted {
        jsonl: String::new(),
        tasks: Vec::new(),
        summary: ConvertSummary::default(),
        errors: Vec::new(),
    };
    let records = match parse_records(text) {
        Ok(r) => r,
        Err(e) => {
            out.summary.failed = 1;
            out.errors.push(e.to_string());
            return out;
        }
    };
    for (i, rec) in records.into_iter().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                out.summary.failed += 1;
                out.errors.push(format!("record {i}: {e}"));
                continue;
            }
        };
        out.summary.parsed += 1;
        let converted = replay_tape(&rec, map).and_then(|replay| {
            let ending = map.ending_grid(&rec)?;
            Ok((replay, ending, to_trajectory(&rec, map)?))
        });
        match converted {
            Ok((replay, ending, traj)) => {
                out.summary.warnings += replay.warnings.len();
                if replay.grid == ending {
                    out.summary.replay_ok += 1;
                } else {
                    out.errors.push(format!(
                        "record {i} (game {} step {}): replay does not reach the ending state",
                        rec.game_id, rec.step_id
                    ));
                }
                out.jsonl.push_str(&trajectory_to_jsonl(&traj));
                out.tasks.push(traj.task);
            }
            Err(e) => {
                out.summary.failed += 1;
                out.errors.push(format!("record {i}: {e}"));
            }
        }
    }
    out
}
