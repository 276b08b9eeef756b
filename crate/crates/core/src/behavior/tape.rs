//! Line-oriented tape events.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

/// One `(x, y, z, old, new)` tuple of a `block_change` line, in raw coordinates and ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawBlockChange {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub old: i64,
    pub new: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// `action <name> <args...>`; arguments are kept as raw tokens.
    Action { name: String, args: Vec<String> },
    BlockChange { changes: Vec<RawBlockChange> },
    PosChange { pos: [f64; 3] },
    /// Raw look values as recorded, `(pitch, yaw)`.
    SetLook { look: [f64; 2] },
    /// A `...` line standing for omitted events.
    Elision,
    /// Any line the parser does not recognize.
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapeEvent {
    pub kind: EventKind,
    /// The trimmed source line.
    pub raw_line: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapeLineError {
    /// 1-based line within the tape string.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TapeLineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tape line {}: {}", self.line, self.message)
    }
}

impl TapeEvent {
    /// Canonical text for the event. Parsing it yields the same `kind`.
    pub fn to_line(&self) -> String {
        match &self.kind {
            EventKind::Action { name, args } => {
                let mut s = format!("action {name}");
                for a in args {
                    s.push(' ');
                    s.push_str(a);
                }
                s
            }
            EventKind::BlockChange { changes } => {
                let mut s = String::from("block_change ");
                for c in changes {
                    let _ = write!(s, " ({}, {}, {}, {}, {})", c.x, c.y, c.z, c.old, c.new);
                }
                s
            }
            EventKind::PosChange { pos } => format!("pos_change ({:?}, {:?}, {:?})", pos[0], pos[1], pos[2]),
            EventKind::SetLook { look } => format!("set_look ({:?}, {:?})", look[0], look[1]),
            EventKind::Elision => "...".to_string(),
            EventKind::Opaque => self.raw_line.clone(),
        }
    }

    pub fn from_kind(kind: EventKind) -> Self {
        let mut e = TapeEvent {
            kind,
            raw_line: String::new(),
        };
        e.raw_line = e.to_line();
        e
    }
}

/// Parse every non-blank line of a tape string.
pub fn parse_tape(tape: &str) -> Result<Vec<TapeEvent>, TapeLineError> {
    let mut events = Vec::new();
    for (i, line) in tape.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let kind = parse_line(line).map_err(|message| TapeLineError { line: i + 1, message })?;
        events.push(TapeEvent {
            kind,
            raw_line: line.to_string(),
        });
    }
    Ok(events)
}

fn parse_line(line: &str) -> Result<EventKind, String> {
    if line.chars().all(|c| c == '.') {
        return Ok(EventKind::Elision);
    }
    let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    match head {
        "action" => {
            let mut tokens = rest.split_whitespace().map(str::to_string);
            let name = tokens.next().ok_or("action without a name")?;
            Ok(EventKind::Action {
                name,
                args: tokens.collect(),
            })
        }
        "block_change" => {
            let changes = tuples(rest)?
                .into_iter()
                .map(|t| {
                    let v: Vec<i64> = t
                        .iter()
                        .map(|s| s.parse::<i64>().map_err(|e| format!("bad integer {s:?}: {e}")))
                        .collect::<Result<_, _>>()?;
                    match v[..] {
                        [x, y, z, old, new] => Ok(RawBlockChange { x, y, z, old, new }),
                        _ => Err(format!("block_change tuple needs 5 values, got {}", v.len())),
                    }
                })
                .collect::<Result<Vec<_>, String>>()?;
            if changes.is_empty() {
                return Err("block_change without tuples".into());
            }
            Ok(EventKind::BlockChange { changes })
        }
        "pos_change" => {
            let v = single_float_tuple(rest, 3)?;
            Ok(EventKind::PosChange { pos: [v[0], v[1], v[2]] })
        }
        "set_look" => {
            let v = single_float_tuple(rest, 2)?;
            Ok(EventKind::SetLook { look: [v[0], v[1]] })
        }
        _ => Ok(EventKind::Opaque),
    }
}

/// Split `(a, b) (c, d)` into token lists.
fn tuples(s: &str) -> Result<Vec<Vec<&str>>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| format!("expected '(' at {rest:?}"))?;
        let end = body.find(')').ok_or("unclosed '('")?;
        out.push(body[..end].split(',').map(str::trim).collect());
        rest = body[end + 1..].trim_start();
    }
    Ok(out)
}

fn single_float_tuple(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let t = tuples(s)?;
    let [one] = &t[..] else {
        return Err(format!("expected one tuple, got {}", t.len()));
    };
    if one.len() != n {
        return Err(format!("expected {n} values, got {}", one.len()));
    }
    one.iter()
        .map(|s| s.parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_each_kind() {
        let tape = "
            action start_recover_world_state
            action select_and_place_block 59 3 63 1 6.93311074709203e-24  64.12000274658203 4
            block_change  (3, 63, 1, 0, 59) (3, 65, 1, 0, 59)
            pos_change (0.7800644185765344, 66.83999999999992, 3.38537289325922)
            set_look (-0.4079999999999997, -0.3500000000000002)
              ...
            action wave_hand
            mystery 1 2 3
        ";
        let ev = parse_tape(tape).unwrap();
        assert_eq!(ev.len(), 8);
        assert!(matches!(&ev[1].kind, EventKind::Action { name, args } if name == "select_and_place_block" && args.len() == 7));
        let EventKind::BlockChange { changes } = &ev[2].kind else { panic!() };
        assert_eq!(changes[1], RawBlockChange { x: 3, y: 65, z: 1, old: 0, new: 59 });
        assert_eq!(ev[3].kind, EventKind::PosChange { pos: [0.7800644185765344, 66.83999999999992, 3.38537289325922] });
        assert_eq!(ev[5].kind, EventKind::Elision);
        assert!(matches!(&ev[6].kind, EventKind::Action { name, .. } if name == "wave_hand"));
        assert_eq!(ev[7].kind, EventKind::Opaque);
        assert_eq!(ev[7].raw_line, "mystery 1 2 3");
    }

    #[test]
    fn malformed_known_event_reports_line() {
        let err = parse_tape("action noop\npos_change (1.0, x, 2.0)").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_tape("block_change (1, 2, 3)").is_err());
    }

    proptest! {
        #[test]
        fn canonical_lines_reparse(x in -1e6f64..1e6, y in -1e-20f64..1e-20, z: f64, p: f64, q in -4.0f64..4.0) {
            prop_assume!(z.is_finite() && p.is_finite());
            for kind in [
                EventKind::PosChange { pos: [x, y, z] },
                EventKind::SetLook { look: [p, q] },
                EventKind::BlockChange { changes: vec![RawBlockChange { x: 1, y: 63, z: -2, old: 0, new: 59 }] },
                EventKind::Action { name: "step_left".into(), args: vec!["1".into(), "2.5e-3".into()] },
            ] {
                let e = TapeEvent::from_kind(kind.clone());
                let back = parse_tape(&e.to_line()).unwrap();
                prop_assert_eq!(&back[0].kind, &kind);
            }
        }
    }
}
