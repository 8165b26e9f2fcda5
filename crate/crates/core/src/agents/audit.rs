//! Access accounting for the decentralization boundary.
//!
//! The trainer routes every per-agent data access through this log with an
//! explicit (reader, owner) pair. Tests assert that decentralized runs never
//! read another agent's observations, rewards, or actor parameters, and that
//! networked runs read critic parameters only along communication edges.

use crate::Comm;

/// Per-category (reader, owner) access counters for N agents.
#[derive(Debug, Clone)]
pub struct AccessLog {
    n: usize,
    observation: Vec<u64>,
    reward: Vec<u64>,
    actor_params: Vec<u64>,
    critic_params: Vec<u64>,
}

impl AccessLog {
    pub fn new(n_agents: usize) -> Self {
        Self {
            n: n_agents,
            observation: vec![0; n_agents * n_agents],
            reward: vec![0; n_agents * n_agents],
            actor_params: vec![0; n_agents * n_agents],
            critic_params: vec![0; n_agents * n_agents],
        }
    }

    #[inline]
    fn idx(&self, reader: usize, owner: usize) -> usize {
        reader * self.n + owner
    }

    pub fn record_observation(&mut self, reader: usize, owner: usize) {
        let i = self.idx(reader, owner);
        self.observation[i] += 1;
    }

    pub fn record_reward(&mut self, reader: usize, owner: usize) {
        let i = self.idx(reader, owner);
        self.reward[i] += 1;
    }

    pub fn record_actor_params(&mut self, reader: usize, owner: usize) {
        let i = self.idx(reader, owner);
        self.actor_params[i] += 1;
    }

    pub fn record_critic_params(&mut self, reader: usize, owner: usize) {
        let i = self.idx(reader, owner);
        self.critic_params[i] += 1;
    }

    pub fn observation_reads(&self, reader: usize, owner: usize) -> u64 {
        self.observation[self.idx(reader, owner)]
    }

    pub fn reward_reads(&self, reader: usize, owner: usize) -> u64 {
        self.reward[self.idx(reader, owner)]
    }

    pub fn actor_param_reads(&self, reader: usize, owner: usize) -> u64 {
        self.actor_params[self.idx(reader, owner)]
    }

    pub fn critic_param_reads(&self, reader: usize, owner: usize) -> u64 {
        self.critic_params[self.idx(reader, owner)]
    }

    fn cross_total(&self, counts: &[u64]) -> u64 {
        let mut total = 0;
        for reader in 0..self.n {
            for owner in 0..self.n {
                if reader != owner {
                    total += counts[reader * self.n + owner];
                }
            }
        }
        total
    }

    /// Reads of another agent's observations.
    pub fn cross_observation_reads(&self) -> u64 {
        self.cross_total(&self.observation)
    }

    /// Reads of another agent's rewards.
    pub fn cross_reward_reads(&self) -> u64 {
        self.cross_total(&self.reward)
    }

    /// Reads of another agent's actor parameters.
    pub fn cross_actor_param_reads(&self) -> u64 {
        self.cross_total(&self.actor_params)
    }

    /// Reads of another agent's critic parameters.
    pub fn cross_critic_param_reads(&self) -> u64 {
        self.cross_total(&self.critic_params)
    }

    /// Cross critic-parameter reads on pairs without a communication edge
    /// (`C(i, j) == 0`). Zero for a well-behaved networked trainer.
    pub fn critic_reads_off_edges(&self, comm: &Comm) -> u64 {
        let mut total = 0;
        for reader in 0..self.n {
            for owner in 0..self.n {
                if reader != owner && comm.get(reader, owner) == 0.0 {
                    total += self.critic_params[reader * self.n + owner];
                }
            }
        }
        total
    }
}
