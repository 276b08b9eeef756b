use std::thread;

use super::{Action, Env, EnvError, StepResult};

/// Steps independent environments on scoped worker threads.
#[derive(Debug)]
pub struct VecEnv {
    envs: Vec<Env>,
    workers: usize,
}

impl VecEnv {
    pub fn new(envs: Vec<Env>) -> Self {
        let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        VecEnv { envs, workers }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[Env] {
        &self.envs
    }

    pub fn envs_mut(&mut self) -> &mut [Env] {
        &mut self.envs
    }

    /// Step every environment with its action; results keep input order.
    ///
    /// # Panics
    /// If `actions.len()` differs from the number of environments.
    pub fn step(&mut self, actions: &[Action]) -> Vec<Result<StepResult, EnvError>> {
        assert_eq!(actions.len(), self.envs.len(), "one action per environment");
        let chunk = self.envs.len().div_ceil(self.workers).max(1);
        thread::scope(|s| {
            let handles: Vec<_> = self
                .envs
                .chunks_mut(chunk)
                .zip(actions.chunks(chunk))
                .map(|(envs, acts)| {
                    s.spawn(move || envs.iter_mut().zip(acts).map(|(e, a)| e.step(*a)).collect::<Vec<_>>())
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("env worker panicked"))
                .collect()
        })
    }
}
