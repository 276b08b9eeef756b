use std::collections::BTreeMap;

use serde::Serialize;

use buildzone_core::agent::{Agent, RandomAgent, ScriptedAgent};
use buildzone_core::env::{Env, EnvError, EpisodeConfig};
use buildzone_core::reward::f1_score;
use buildzone_core::tasks::TaskRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Scripted,
    Random,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub task_id: String,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub reward_sum: f64,
    pub steps: u32,
    pub skills: Vec<String>,
    pub termination_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkillAggregate {
    pub count: usize,
    pub mean_f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub agent: AgentKind,
    pub tasks: Vec<TaskReport>,
    /// Over all tasks, independent of skills.
    pub mean_f1: f64,
    pub complete_rate: f64,
    pub per_skill: BTreeMap<String, SkillAggregate>,
}

pub fn run_episode(task: &TaskRecord, agent: AgentKind, max_steps: u32, seed: u64) -> Result<TaskReport, EnvError> {
    let cfg = EpisodeConfig {
        max_steps,
        ..Default::default()
    };
    let mut env = Env::new(task, cfg, seed)?;
    let mut policy: Box<dyn Agent> = match agent {
        AgentKind::Scripted => Box::new(ScriptedAgent::new()),
        AgentKind::Random => Box::new(RandomAgent::new(seed)),
    };
    let mut reward_sum = 0.0;
    while !env.is_done() {
        let a = policy.act(&env);
        reward_sum += env.step(a)?.reward;
    }
    let f1 = f1_score(env.world(), &task.target_grid);
    Ok(TaskReport {
        task_id: task.task_id.clone(),
        f1: f1.f1,
        precision: f1.precision,
        recall: f1.recall,
        reward_sum,
        steps: env.steps(),
        skills: task.skills.iter().map(|s| s.as_str().to_string()).collect(),
        termination_reason: env.termination().map(|t| t.as_str().to_string()),
    })
}

pub fn aggregate(agent: AgentKind, tasks: Vec<TaskReport>) -> RunReport {
    let n = tasks.len().max(1) as f64;
    let mean_f1 = tasks.iter().map(|t| t.f1).sum::<f64>() / n;
    let complete_rate = tasks
        .iter()
        .filter(|t| t.termination_reason.as_deref() == Some("complete"))
        .count() as f64
        / n;
    let mut sums: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for t in &tasks {
        for s in &t.skills {
            let e = sums.entry(s.clone()).or_default();
            e.0 += 1;
            e.1 += t.f1;
        }
    }
    let per_skill = sums
        .into_iter()
        .map(|(k, (count, sum))| {
            (
                k,
                SkillAggregate {
                    count,
                    mean_f1: sum / count as f64,
                },
            )
        })
        .collect();
    RunReport {
        agent,
        tasks,
        mean_f1,
        complete_rate,
        per_skill,
    }
}

pub fn run(tasks: &[TaskRecord], agent: AgentKind, max_steps: u32, seed: u64) -> Result<RunReport, EnvError> {
    let reports = tasks
        .iter()
        .map(|t| run_episode(t, agent, max_steps, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(agent, reports))
}
