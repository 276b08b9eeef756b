use std::time::{Duration, Instant};

use serde::Serialize;

use buildzone_core::agent::{Agent, RandomAgent};
use buildzone_core::env::{Env, EpisodeConfig};
use buildzone_core::tasks::{generate_task, GeneratorParams};
use buildzone_core::voxel::Grid;

#[derive(Debug, Clone, Copy)]
pub struct BenchArgs {
    pub steps: u64,
    pub render: bool,
    pub episodes: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub steps: u64,
    pub episodes: u64,
    pub render: bool,
    pub seed: u64,
    pub seconds: f64,
    pub sps: f64,
    pub p50_us: f64,
    pub p99_us: f64,
    /// FNV-1a over the JSON of every action taken.
    pub action_digest: String,
    pub final_grids: Vec<Grid>,
}

fn fnv1a(hash: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(hash, |h, &b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

fn percentile(sorted: &[Duration], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i].as_secs_f64() * 1e6
}

/// Step seeded random policies; the total step budget is split evenly over episodes.
pub fn bench(args: BenchArgs) -> BenchReport {
    let episodes = args.episodes.max(1);
    let per_episode = (args.steps / episodes).max(1);
    let mut latencies = Vec::with_capacity(args.steps as usize);
    let mut digest = 0xcbf29ce484222325u64;
    let mut final_grids = Vec::new();
    let mut total = 0;
    let start = Instant::now();
    for e in 0..episodes {
        let seed = args.seed.wrapping_add(e);
        let task = generate_task(seed, GeneratorParams::default()).expect("default params");
        let cfg = EpisodeConfig {
            max_steps: per_episode.min(u32::MAX as u64) as u32,
            render: args.render,
            ..Default::default()
        };
        let mut env = Env::new(&task, cfg, seed).expect("generated task");
        let mut agent = RandomAgent::new(seed);
        while !env.is_done() {
            let a = agent.act(&env);
            digest = fnv1a(digest, serde_json::to_string(&a).expect("action").as_bytes());
            let t = Instant::now();
            env.step(a).expect("episode running");
            latencies.push(t.elapsed());
            total += 1;
        }
        final_grids.push(env.world().clone());
    }
    let seconds = start.elapsed().as_secs_f64();
    latencies.sort();
    BenchReport {
        steps: total,
        episodes,
        render: args.render,
        seed: args.seed,
        seconds,
        sps: total as f64 / seconds.max(1e-9),
        p50_us: percentile(&latencies, 0.5),
        p99_us: percentile(&latencies, 0.99),
        action_digest: format!("{digest:016x}"),
        final_grids,
    }
}

impl BenchReport {
    pub fn summary(&self) -> String {
        format!(
            "{} steps over {} episodes (render {}): {:.0} SPS, p50 {:.1} us, p99 {:.1} us",
            self.steps,
            self.episodes,
            if self.render { "on" } else { "off" },
            self.sps,
            self.p50_us,
            self.p99_us
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_actions_and_render_does_not_matter() {
        let args = BenchArgs {
            steps: 600,
            render: false,
            episodes: 2,
            seed: 9,
        };
        let a = bench(args);
        let b = bench(args);
        let c = bench(BenchArgs { render: true, ..args });
        assert_eq!(a.steps, 600);
        assert!(a.sps > 0.0);
        assert_eq!(a.action_digest, b.action_digest);
        assert_eq!(a.action_digest, c.action_digest);
        assert_eq!(a.final_grids, c.final_grids);
    }
}
