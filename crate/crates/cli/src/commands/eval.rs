use std::collections::BTreeMap;

use serde::Serialize;

use buildzone_core::behavior::DemoStep;
use buildzone_core::reward::{f1_score, F1Report};
use buildzone_core::tasks::TaskRecord;
use buildzone_core::voxel::Grid;

#[derive(Debug, Clone, Serialize)]
pub struct EvalEntry {
    pub task_id: String,
    pub demo_steps: usize,
    pub report: F1Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub tasks: Vec<EvalEntry>,
    pub mean_f1: f64,
}

/// Score each task's final demo snapshot. Tasks with no demo steps score an
/// empty zone; demo steps naming an unknown task are an error.
pub fn evaluate(demos: &[(String, DemoStep)], tasks: &[TaskRecord]) -> Result<EvalReport, String> {
    let mut last: BTreeMap<&str, (usize, &Grid)> = BTreeMap::new();
    for (id, step) in demos {
        if !tasks.iter().any(|t| &t.task_id == id) {
            return Err(format!("demo task id {id:?} not found in the task file"));
        }
        let e = last.entry(id.as_str()).or_insert((0, &step.grid));
        e.0 += 1;
        e.1 = &step.grid;
    }
    let empty = Grid::empty();
    let entries: Vec<EvalEntry> = tasks
        .iter()
        .map(|t| {
            let (n, snapshot) = last.get(t.task_id.as_str()).copied().unwrap_or((0, &empty));
            EvalEntry {
                task_id: t.task_id.clone(),
                demo_steps: n,
                report: f1_score(snapshot, &t.target_grid),
            }
        })
        .collect();
    let mean_f1 = entries.iter().map(|e| e.report.f1).sum::<f64>() / entries.len().max(1) as f64;
    Ok(EvalReport {
        tasks: entries,
        mean_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use buildzone_core::behavior::{parse_record, read_jsonl, to_trajectory, trajectory_to_jsonl, IdOffsetMap};

    const RECORD: &str = include_str!("../../../core/tests/fixtures/game19_completed.txt");

    fn demo() -> (Vec<(String, DemoStep)>, TaskRecord) {
        let t = to_trajectory(&parse_record(RECORD).unwrap(), &IdOffsetMap::default()).unwrap();
        (read_jsonl(&trajectory_to_jsonl(&t)).unwrap(), t.task)
    }

    #[test]
    fn self_target_scores_one() {
        let (steps, task) = demo();
        let r = evaluate(&steps, &[task]).unwrap();
        assert_eq!(r.tasks[0].report.f1, 1.0);
    }

    #[test]
    fn empty_demo_scores_zero() {
        let (_, task) = demo();
        assert_eq!(evaluate(&[], &[task]).unwrap().mean_f1, 0.0);
    }

    #[test]
    fn truncated_demo_matches_direct_score() {
        let (steps, task) = demo();
        let half = &steps[..steps.len() / 2];
        let r = evaluate(half, std::slice::from_ref(&task)).unwrap();
        assert_eq!(r.tasks[0].report, f1_score(&half.last().unwrap().1.grid, &task.target_grid));
    }

    #[test]
    fn unknown_task_id_is_rejected() {
        let (steps, mut task) = demo();
        task.task_id = "other".into();
        assert!(evaluate(&steps, &[task]).is_err());
    }
}
