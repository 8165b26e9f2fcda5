//! The trainers: centralized multi-agent DDPG, the fully-decentralized
//! surrogate-policy variant, the networked variants with hard and soft
//! consensus, and the two-phase mixed-setting actor updates.

mod audit;
mod evaluate;
mod gradients;
mod metrics;
mod trainer;

pub use audit::AccessLog;
pub use evaluate::{evaluate, evaluate_episodes, EvalReport, Policy};
pub use gradients::{
    actor_objective_grad, actor_update_centralized, actor_update_mixed, actor_update_surrogate,
    critic_loss_grad, critic_target_centralized, critic_target_decentralized, critic_update,
    sample_minibatch, select_action, Minibatch, SlotBinding, SoftPenaltyTerm,
};
pub use metrics::{MetricsRow, RunStatus, TrainOutcome, METRICS_HEADER};
pub use trainer::{AgentSnapshot, RngPositions, Trainer, TrainerState};

use std::ops::Range;

use crate::error::{Error, Result};
use crate::nn::MlpSpec;
use crate::{AdamOpt, Buffer, ConsensusCfg, ParamVec};

/// Which trainer drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Centralized critics over joint observations and actions.
    Maddpg,
    /// Per-agent surrogate joint policies, local replay, no communication.
    Decentralized,
    /// Decentralized plus critic-parameter averaging after each learning
    /// interval.
    HardConsensus,
    /// Decentralized plus a critic-loss penalty toward neighbors' critics.
    SoftConsensus,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Maddpg => "maddpg",
            Algorithm::Decentralized => "decentralized",
            Algorithm::HardConsensus => "hard_consensus",
            Algorithm::SoftConsensus => "soft_consensus",
        }
    }

    pub fn is_networked(self) -> bool {
        matches!(self, Algorithm::HardConsensus | Algorithm::SoftConsensus)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "maddpg" => Ok(Algorithm::Maddpg),
            "decentralized" => Ok(Algorithm::Decentralized),
            "hard_consensus" => Ok(Algorithm::HardConsensus),
            "soft_consensus" => Ok(Algorithm::SoftConsensus),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Cooperative runs optimize all joint-action slots; mixed runs split actor
/// updates into a team-ascent phase and an adversary-descent phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Cooperative,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
}

/// Exploration noise: per-component Gaussian with a linearly annealed sigma.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma_initial: f64,
    pub sigma_final: f64,
    pub decay_steps: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_initial < 0.0 || self.sigma_final < 0.0 {
            return Err(Error::InvalidConfig("noise sigmas must be >= 0".into()));
        }
        if self.sigma_final > self.sigma_initial {
            return Err(Error::InvalidConfig(
                "sigma_final must not exceed sigma_initial".into(),
            ));
        }
        if self.decay_steps == 0 {
            return Err(Error::InvalidConfig("noise decay_steps must be >= 1".into()));
        }
        Ok(())
    }

    /// Sigma at a (1-based) environment step: linear from initial to final
    /// over `decay_steps`, flat afterwards.
    pub fn sigma_at(&self, step: u64) -> f64 {
        let t = step.min(self.decay_steps) as f64 / self.decay_steps as f64;
        self.sigma_initial + (self.sigma_final - self.sigma_initial) * t
    }
}

/// Agent-index partition into teams; `teammates` includes the agent itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamAssignment {
    team_of: Vec<usize>,
}

impl TeamAssignment {
    pub fn new(team_of: Vec<usize>) -> Result<Self> {
        if team_of.is_empty() {
            return Err(Error::InvalidConfig("team assignment must be non-empty".into()));
        }
        Ok(Self { team_of })
    }

    /// Everyone on one team.
    pub fn single_team(n_agents: usize) -> Self {
        Self {
            team_of: vec![0; n_agents],
        }
    }

    /// Agent 0 alone versus everyone else, matching the adversary scenario.
    pub fn adversary_vs_team(n_agents: usize) -> Self {
        let mut team_of = vec![1; n_agents];
        team_of[0] = 0;
        Self { team_of }
    }

    pub fn n_agents(&self) -> usize {
        self.team_of.len()
    }

    pub fn team_of(&self, agent: usize) -> usize {
        self.team_of[agent]
    }

    pub fn teammates(&self, agent: usize) -> Vec<usize> {
        let team = self.team_of[agent];
        (0..self.team_of.len())
            .filter(|&j| self.team_of[j] == team)
            .collect()
    }

    pub fn adversaries(&self, agent: usize) -> Vec<usize> {
        let team = self.team_of[agent];
        (0..self.team_of.len())
            .filter(|&j| self.team_of[j] != team)
            .collect()
    }
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub algorithm: Algorithm,
    pub setting: Setting,
    pub gamma: f64,
    pub tau: f64,
    pub minibatch_size: usize,
    /// Environment steps between learning rounds.
    pub learning_interval: u64,
    /// Must agree with the environment's episode horizon.
    pub max_episode_length: usize,
    pub total_steps: u64,
    pub noise: NoiseSpec,
    pub consensus: Option<ConsensusCfg>,
    pub hidden_dims: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub buffer_capacity: usize,
    /// Minimum per-agent buffer size before learning starts.
    pub warmup: usize,
    pub eval_interval: u64,
    pub eval_episodes: usize,
}

impl TrainerConfig {
    /// Desk-scale defaults: 2x64 networks, batch 256, gamma 0.95, tau 0.01.
    /// Published-scale runs use 5x256 networks and millions of steps; see the
    /// README.
    pub fn desk(algorithm: Algorithm, setting: Setting, total_steps: u64) -> Self {
        Self {
            algorithm,
            setting,
            gamma: 0.95,
            tau: 0.01,
            minibatch_size: 256,
            learning_interval: 100,
            max_episode_length: 25,
            total_steps,
            noise: NoiseSpec {
                kind: NoiseKind::Gaussian,
                sigma_initial: 0.3,
                sigma_final: 0.05,
                decay_steps: (total_steps / 2).max(1),
            },
            consensus: if algorithm.is_networked() {
                Some(ConsensusCfg::default())
            } else {
                None
            },
            hidden_dims: vec![64, 64],
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            buffer_capacity: 100_000,
            warmup: 1024,
            eval_interval: 1000,
            eval_episodes: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig("gamma must lie in [0, 1)".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidConfig("tau must lie in (0, 1]".into()));
        }
        if self.minibatch_size == 0 {
            return Err(Error::InvalidConfig("minibatch_size must be >= 1".into()));
        }
        if self.learning_interval == 0 {
            return Err(Error::InvalidConfig("learning_interval must be >= 1".into()));
        }
        if self.max_episode_length == 0 {
            return Err(Error::InvalidConfig("max_episode_length must be >= 1".into()));
        }
        if self.hidden_dims.is_empty() || self.hidden_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig(
                "hidden_dims must be non-empty with positive sizes".into(),
            ));
        }
        if self.buffer_capacity == 0 || self.warmup == 0 {
            return Err(Error::InvalidConfig(
                "buffer_capacity and warmup must be >= 1".into(),
            ));
        }
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return Err(Error::InvalidConfig(
                "eval_interval and eval_episodes must be >= 1".into(),
            ));
        }
        if self.algorithm.is_networked() && self.consensus.is_none() {
            return Err(Error::InvalidConfig(
                "networked algorithms need a consensus config".into(),
            ));
        }
        self.noise.validate()
    }
}

/// One agent's networks, optimizer states, and replay buffer.
///
/// For the decentralized family the actor outputs the whole joint action
/// (the surrogate policy) and `local observation` means the agent's own
/// observation. For the centralized algorithm the actor outputs only the
/// agent's own action and the buffer stores the concatenated joint
/// observation.
#[derive(Debug, Clone)]
pub struct AgentRuntime {
    pub actor_spec: MlpSpec,
    pub critic_spec: MlpSpec,
    pub actor_params: ParamVec,
    pub actor_target: ParamVec,
    pub critic_params: ParamVec,
    pub critic_target: ParamVec,
    pub actor_opt: AdamOpt,
    pub critic_opt: AdamOpt,
    pub buffer: Buffer,
    /// This agent's slots within the joint action vector.
    pub own_action_slice: Range<usize>,
}
