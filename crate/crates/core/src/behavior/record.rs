//! Game-log records and their JSON form.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::tape::{parse_tape, TapeEvent};
use super::BehaviorError;

/// One logged game turn.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorRecord {
    pub game_id: i64,
    pub step_id: i64,
    pub avatar_pos: [f64; 3],
    /// Raw `(pitch, yaw)` as recorded.
    pub avatar_look: [f64; 2],
    /// `[x, y, z, raw_id]` in raw world coordinates.
    pub world_ending_blocks: Vec<[i64; 4]>,
    pub clarification_question: Option<String>,
    pub tape: Vec<TapeEvent>,
    /// Top-level fields this crate does not interpret, kept for re-serialization.
    pub extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct AvatarInfo {
    pos: [f64; 3],
    look: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct WorldState {
    blocks: Vec<[i64; 4]>,
}

#[derive(Serialize, Deserialize)]
struct WireRecord {
    #[serde(rename = "gameId")]
    game_id: i64,
    #[serde(rename = "stepId")]
    step_id: i64,
    #[serde(rename = "avatarInfo")]
    avatar_info: AvatarInfo,
    #[serde(rename = "worldEndingState")]
    world_ending_state: WorldState,
    #[serde(default)]
    clarification_question: Option<String>,
    tape: String,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

/// Rewrite Python-literal style input (single-quoted strings, raw newlines in
/// strings, `None`/`True`/`False`) as JSON. Returns the text plus, for every
/// output byte, the source byte it came from.
pub(crate) fn normalize(src: &str) -> (String, Vec<usize>) {
    let mut out = String::with_capacity(src.len());
    let mut map = Vec::with_capacity(src.len());
    let push = |out: &mut String, map: &mut Vec<usize>, s: &str, at: usize| {
        out.push_str(s);
        map.extend(std::iter::repeat_n(at, s.len()));
    };
    let mut chars = src.char_indices().peekable();
    let mut quote: Option<char> = None;
    while let Some((i, c)) = chars.next() {
        match quote {
            Some(q) => match c {
                '\\' => {
                    if let Some(&(j, n)) = chars.peek() {
                        chars.next();
                        if n == '\'' {
                            push(&mut out, &mut map, "'", j);
                        } else {
                            push(&mut out, &mut map, "\\", i);
                            push(&mut out, &mut map, n.encode_utf8(&mut [0; 4]), j);
                        }
                    }
                }
                c if c == q => {
                    push(&mut out, &mut map, "\"", i);
                    quote = None;
                }
                '"' => push(&mut out, &mut map, "\\\"", i),
                '\n' => push(&mut out, &mut map, "\\n", i),
                '\r' => push(&mut out, &mut map, "\\r", i),
                '\t' => push(&mut out, &mut map, "\\t", i),
                c if (c as u32) < 0x20 => push(&mut out, &mut map, &format!("\\u{:04x}", c as u32), i),
                c => push(&mut out, &mut map, c.encode_utf8(&mut [0; 4]), i),
            },
            None => match c {
                '\'' | '"' => {
                    push(&mut out, &mut map, "\"", i);
                    quote = Some(c);
                }
                c if c.is_ascii_alphabetic() => {
                    let mut word = String::from(c);
                    while let Some(&(_, n)) = chars.peek() {
                        if !n.is_ascii_alphanumeric() && n != '_' {
                            break;
                        }
                        word.push(n);
                        chars.next();
                    }
                    let w = match word.as_str() {
                        "None" => "null",
                        "True" => "true",
                        "False" => "false",
                        w => w,
                    };
                    push(&mut out, &mut map, w, i);
                }
                c => push(&mut out, &mut map, c.encode_utf8(&mut [0; 4]), i),
            },
        }
    }
    (out, map)
}

/// 1-based line/column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parse a record in JSON or single-quoted style.
/// Position a JSON error in the original (unnormalized) source.
fn syntax_error(text: &str, json: &str, map: &[usize], e: serde_json::Error) -> BehaviorError {
    let at = offset_of(json, e.line(), e.column());
    let src = map.get(at).copied().unwrap_or(text.len());
    let (line, column) = if e.line() == 0 { (0, 0) } else { line_col(text, src) };
    BehaviorError::Syntax {
        line,
        column,
        message: e.to_string(),
    }
}

pub fn parse_record(text: &str) -> Result<BehaviorRecord, BehaviorError> {
    let (json, map) = normalize(text);
    let wire: WireRecord = serde_json::from_str(&json).map_err(|e| syntax_error(text, &json, &map, e))?;
    from_wire(wire)
}

/// JSON text of a record; the tape is written one source line per line.
fn from_wire(wire: WireRecord) -> Result<BehaviorRecord, BehaviorError> {
    let tape = parse_tape(&wire.tape).map_err(BehaviorError::Tape)?;
    if tape.is_empty() {
        return Err(BehaviorError::EmptyTape);
    }
    let clarification_question = wire.clarification_question.filter(|q| q != "null");
    Ok(BehaviorRecord {
        game_id: wire.game_id,
        step_id: wire.step_id,
        avatar_pos: wire.avatar_info.pos,
        avatar_look: wire.avatar_info.look,
        world_ending_blocks: wire.world_ending_state.blocks,
        clarification_question,
        tape,
        extra: wire.extra,
    })
}

/// Parse a file holding either one record or a JSON array of records. A syntax
/// error fails the whole file; a bad element fails only that record.
pub fn parse_records(text: &str) -> Result<Vec<Result<BehaviorRecord, BehaviorError>>, BehaviorError> {
    if !text.trim_start().starts_with('[') {
        return Ok(vec![parse_record(text)]);
    }
    let (json, map) = normalize(text);
    let items: Vec<serde_json::Value> = serde_json::from_str(&json).map_err(|e| syntax_error(text, &json, &map, e))?;
    Ok(items
        .into_iter()
        .map(|v| {
            let wire: WireRecord = serde_json::from_value(v).map_err(|e| BehaviorError::Syntax {
                line: 0,
                column: 0,
                message: e.to_string(),
            })?;
            from_wire(wire)
        })
        .collect())
}

pub fn record_to_json(rec: &BehaviorRecord) -> String {
    let tape: Vec<&str> = rec.tape.iter().map(|e| e.raw_line.as_str()).collect();
    let wire = WireRecord {
        game_id: rec.game_id,
        step_id: rec.step_id,
        avatar_info: AvatarInfo {
            pos: rec.avatar_pos,
            look: rec.avatar_look,
        },
        world_ending_state: WorldState {
            blocks: rec.world_ending_blocks.clone(),
        },
        clarification_question: rec.clarification_question.clone(),
        tape: tape.join("\n"),
        extra: rec.extra.clone(),
    };
    serde_json::to_string_pretty(&wire).expect("record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_single_quotes() {
        let (j, map) = normalize("{'a': 'it\\'s \"x\"\nnext', 'b': None, 'c': True}");
        let v: Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["a"], "it's \"x\"\nnext");
        assert_eq!(v["b"], Value::Null);
        assert_eq!(v["c"], Value::Bool(true));
        assert_eq!(map.len(), j.len());
    }

    #[test]
    fn plain_json_is_unchanged() {
        let src = r#"{"a": [1, 2.5e-3, null], "b": "x\ny"}"#;
        assert_eq!(normalize(src).0, src);
    }

    #[test]
    fn missing_tape_is_reported_with_position() {
        let text = "{'gameId': 1,\n 'stepId': 2,\n 'avatarInfo': {'pos': [0, 0, 0], 'look': [0, 0]},\n 'worldEndingState': {'blocks': []}\n}";
        match parse_record(text) {
            Err(BehaviorError::Syntax { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("tape"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_maps_back_to_source() {
        let text = "{'gameId': 1,\n 'stepId': ?}";
        match parse_record(text) {
            Err(BehaviorError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 12)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_tape_is_an_error() {
        let text = "{'gameId': 1, 'stepId': 2, 'avatarInfo': {'pos': [0, 0, 0], 'look': [0, 0]}, 'worldEndingState': {'blocks': []}, 'tape': '\n   '}";
        assert!(matches!(parse_record(text), Err(BehaviorError::EmptyTape)));
    }

    #[test]
    fn extra_fields_survive() {
        let text = r#"{"gameId": 1, "stepId": 2, "avatarInfo": {"pos": [0, 0, 0], "look": [0, 0]},
            "worldEndingState": {"blocks": []}, "tape": "action noop", "builder": "b7"}"#;
        let rec = parse_record(text).unwrap();
        assert_eq!(rec.extra["builder"], "b7");
        assert_eq!(parse_record(&record_to_json(&rec)).unwrap(), rec);
    }
}
