use buildzone_core::agent::{Agent, ScriptedAgent};
use buildzone_core::env::{Env, EpisodeConfig};
use buildzone_core::tasks::flat_tall_suite;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = EpisodeConfig { max_steps: 2000, ..Default::default() };
    let mut ok = 0;
    for t in flat_tall_suite(n, seed) {
        let mut env = Env::new(&t, cfg.clone(), 0).unwrap();
        let mut a = ScriptedAgent::new();
        while !env.is_done() {
            let act = a.act(&env);
            env.step(act).unwrap();
        }
        let done = env.termination() == Some(buildzone_core::env::TerminationReason::Complete);
        if done { ok += 1 } else {
            println!("FAIL {} blocks={} steps={} inter={} replans={}", t.task_id, t.target_grid.nonzero_count(), env.steps(), env.intersection_size(), a.replans);
        }
    }
    println!("{ok}/{n}");
}
