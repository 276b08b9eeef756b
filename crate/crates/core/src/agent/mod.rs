//! Reference agents driving [`Env`] directly.

mod nav;
mod scripted;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use nav::{neighbors, node_of, standable, Node, Reach, MAX_STAND};
pub use scripted::{
    find_aim, performs, pillar_for, plan, resting_node, stand_for, BuilderPlan, PillarPlan, PlannedSubtask,
    ScriptedAgent, AIM_REACH, MAX_FAILURES, STAND_TOLERANCE,
};

use crate::env::{Action, Env, Verb, CAMERA_LIMIT};

pub trait Agent {
    fn act(&mut self, env: &Env) -> Action;

    /// Forget per-episode state.
    fn reset(&mut self) {}
}

/// Uniform over the base verbs with a uniform camera delta.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> Action {
        let verb = Verb::from_index(self.rng.random_range(0..Verb::BASE_COUNT)).expect("base verb");
        let dp = self.rng.random_range(-CAMERA_LIMIT..=CAMERA_LIMIT);
        let dy = self.rng.random_range(-CAMERA_LIMIT..=CAMERA_LIMIT);
        Action::new(verb, dp, dy)
    }
}

impl Agent for RandomAgent {
    fn act(&mut self, _env: &Env) -> Action {
        self.sample()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_agent_is_seeded_and_in_range() {
        let a: Vec<Action> = {
            let mut r = RandomAgent::new(3);
            (0..200).map(|_| r.sample()).collect()
        };
        let mut r = RandomAgent::new(3);
        assert!(a.iter().all(|x| *x == r.sample()));
        assert!(a.iter().all(|x| x.verb.index() < Verb::BASE_COUNT));
        assert!(a.iter().all(|x| x.camera.iter().all(|c| c.abs() <= CAMERA_LIMIT)));
    }
}
