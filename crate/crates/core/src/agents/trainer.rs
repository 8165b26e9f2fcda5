//! The training loop shared by all four algorithms.
//!
//! Randomness discipline: every consumer draws from its own ChaCha stream of
//! a single root seed, so runs are bit-reproducible and stream positions can
//! be checkpointed. Stream ids:
//!
//! ```text
//! 0        training environment (episode resets)
//! 1        evaluation episodes
//! 16 + 4i  agent i actor initialization
//! 17 + 4i  agent i critic initialization
//! 18 + 4i  agent i exploration noise
//! 19 + 4i  agent i minibatch sampling
//! ```
//!
//! Update order within a learning round: all critics, then all actors, then
//! target soft-updates, then (hard variant) the consensus overwrite. Critic
//! targets are computed before any update, so they always see pre-round
//! target networks.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    critic_target_centralized, critic_target_decentralized, evaluate, sample_minibatch,
    select_action, AccessLog, AgentRuntime, Algorithm, MetricsRow, Policy, RunStatus, Setting,
    SoftPenaltyTerm, TeamAssignment, TrainOutcome, TrainerConfig,
};
use crate::agents::gradients::{
    actor_update_centralized, actor_update_mixed, actor_update_surrogate, critic_update,
};
use crate::comms::{hard_consensus, soft_penalty};
use crate::env::{env_reset, env_step, Scenario};
use crate::error::{Error, Result};
use crate::nn::{mlp_init, soft_update, AdamState, HiddenActivation, MlpSpec, OutputActivation};
use crate::replay::ReplayBuffer;
use crate::{Action, AdamOpt, Comm, CommSched, EnvCfg, ParamVec, Transition, World};

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct AgentDiag {
    critic_loss: f64,
    actor_objective: f64,
    consensus_penalty: f64,
}

/// Owned copy of everything a run needs to continue from a step boundary.
#[derive(Debug, Clone)]
pub struct TrainerState {
    pub step: u64,
    pub agents: Vec<AgentSnapshot>,
    pub world: World,
    pub rng: RngPositions,
    /// (critic_loss, actor_objective, consensus_penalty) per agent.
    pub diagnostics: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct AgentSnapshot {
    pub actor_spec: MlpSpec,
    pub critic_spec: MlpSpec,
    pub actor_params: ParamVec,
    pub actor_target: ParamVec,
    pub critic_params: ParamVec,
    pub critic_target: ParamVec,
    pub actor_opt: AdamOpt,
    pub critic_opt: AdamOpt,
    pub buffer_capacity: usize,
    pub buffer_storage: Vec<Transition>,
    pub buffer_cursor: usize,
}

/// ChaCha word positions for every stream, keyed as documented above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngPositions {
    pub env: u128,
    pub eval: u128,
    pub noise: Vec<u128>,
    pub sample: Vec<u128>,
}

/// One full training run: environment, agents, streams, and access log.
#[derive(Debug)]
pub struct Trainer {
    config: TrainerConfig,
    env_config: EnvCfg,
    teams: TeamAssignment,
    comm: Option<CommSched>,
    agents: Vec<AgentRuntime>,
    /// Per-agent slices into the concatenated joint observation.
    obs_slices: Vec<Range<usize>>,
    access: AccessLog,
    seed: u64,
    rng_env: ChaCha8Rng,
    rng_eval: ChaCha8Rng,
    rng_noise: Vec<ChaCha8Rng>,
    rng_sample: Vec<ChaCha8Rng>,
    world: World,
    observations: Vec<Vec<f64>>,
    diag: Vec<AgentDiag>,
    steps_done: u64,
}

impl Trainer {
    /// Builds agents and performs the initial environment reset.
    ///
    /// `teams` defaults to a single team in cooperative runs and to
    /// adversary-versus-rest in mixed adversary-scenario runs. Networked
    /// algorithms require `comm`.
    pub fn new(
        config: TrainerConfig,
        env_config: EnvCfg,
        teams: Option<TeamAssignment>,
        comm: Option<CommSched>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        env_config.validate()?;
        if config.max_episode_length != env_config.max_episode_length {
            return Err(Error::InvalidConfig(format!(
                "trainer max_episode_length {} disagrees with environment {}",
                config.max_episode_length, env_config.max_episode_length
            )));
        }
        let n = env_config.n_agents;
        if config.algorithm.is_networked() {
            match &comm {
                None => {
                    return Err(Error::InvalidConfig(
                        "networked algorithm needs a communication schedule".into(),
                    ))
                }
                Some(CommSched::Constant(m)) => {
                    m.validate()?;
                    if m.n_agents() != n {
                        return Err(Error::dim("comm matrix size", n, m.n_agents()));
                    }
                }
                Some(CommSched::Varying(_)) => {}
            }
        }
        let teams = match teams {
            Some(t) => t,
            None => match (config.setting, env_config.scenario) {
                (Setting::Mixed, Scenario::Adversary) => TeamAssignment::adversary_vs_team(n),
                _ => TeamAssignment::single_team(n),
            },
        };
        if teams.n_agents() != n {
            return Err(Error::dim("team assignment", n, teams.n_agents()));
        }

        let obs_dims: Vec<usize> = (0..n).map(|i| env_config.observation_dim(i)).collect();
        let mut obs_slices = Vec::with_capacity(n);
        let mut offset = 0;
        for &d in &obs_dims {
            obs_slices.push(offset..offset + d);
            offset += d;
        }
        let total_obs_dim = offset;
        let joint_action_dim = 2 * n;

        let mut agents = Vec::with_capacity(n);
        for i in 0..n {
            let actor_out = match config.algorithm {
                Algorithm::Maddpg => 2,
                _ => joint_action_dim,
            };
            let critic_in = match config.algorithm {
                Algorithm::Maddpg => total_obs_dim + joint_action_dim,
                _ => obs_dims[i] + joint_action_dim,
            };
            let actor_spec = MlpSpec::new(
                obs_dims[i],
                config.hidden_dims.clone(),
                actor_out,
                HiddenActivation::Relu,
                OutputActivation::Tanh,
            )?;
            let critic_spec = MlpSpec::new(
                critic_in,
                config.hidden_dims.clone(),
                1,
                HiddenActivation::Relu,
                OutputActivation::Identity,
            )?;
            let actor_params: ParamVec =
                mlp_init(&actor_spec, &mut stream(seed, 16 + 4 * i as u64));
            let critic_params: ParamVec =
                mlp_init(&critic_spec, &mut stream(seed, 17 + 4 * i as u64));
            agents.push(AgentRuntime {
                actor_target: actor_params.clone(),
                critic_target: critic_params.clone(),
                actor_opt: AdamState::new(actor_spec.param_count(), config.actor_lr),
                critic_opt: AdamState::new(critic_spec.param_count(), config.critic_lr),
                buffer: ReplayBuffer::new(config.buffer_capacity)?,
                own_action_slice: 2 * i..2 * i + 2,
                actor_spec,
                critic_spec,
                actor_params,
                critic_params,
            });
        }

        let mut rng_env = stream(seed, 0);
        let rng_eval = stream(seed, 1);
        let rng_noise = (0..n).map(|i| stream(seed, 18 + 4 * i as u64)).collect();
        let rng_sample = (0..n).map(|i| stream(seed, 19 + 4 * i as u64)).collect();

        let (world, observations) = env_reset(&env_config, &mut rng_env)?;
        let observations = observations.iter().map(|o| o.flatten()).collect();

        Ok(Self {
            access: AccessLog::new(n),
            diag: vec![AgentDiag::default(); n],
            config,
            env_config,
            teams,
            comm,
            agents,
            obs_slices,
            seed,
            rng_env,
            rng_eval,
            rng_noise,
            rng_sample,
            world,
            observations,
            steps_done: 0,
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn env_config(&self) -> &EnvCfg {
        &self.env_config
    }

    pub fn agents(&self) -> &[AgentRuntime] {
        &self.agents
    }

    pub fn access_log(&self) -> &AccessLog {
        &self.access
    }

    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Frozen policy views of the current actors.
    pub fn policies(&self) -> Vec<Policy> {
        self.agents
            .iter()
            .map(|a| Policy {
                spec: a.actor_spec.clone(),
                params: a.actor_params.clone(),
                own_action_slice: a.own_action_slice.clone(),
                outputs_joint_action: self.config.algorithm != Algorithm::Maddpg,
            })
            .collect()
    }

    fn n(&self) -> usize {
        self.env_config.n_agents
    }

    fn agent_label(&self, i: usize) -> String {
        match self.env_config.scenario {
            Scenario::Adversary if i == 0 => "adversary".to_owned(),
            _ => format!("agent_{i}"),
        }
    }

    /// Reads one agent's current observation on behalf of `reader`.
    fn read_observation(&mut self, reader: usize, owner: usize) -> Vec<f64> {
        self.access.record_observation(reader, owner);
        self.observations[owner].clone()
    }

    /// Concatenates all current observations on behalf of `reader`
    /// (centralized storage path).
    fn read_joint(&mut self, reader: usize, per_agent: &[Vec<f64>]) -> Vec<f64> {
        let mut joint = Vec::new();
        for (owner, obs) in per_agent.iter().enumerate() {
            self.access.record_observation(reader, owner);
            joint.extend_from_slice(obs);
        }
        joint
    }

    fn buffers_warm(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.buffer.len() >= self.config.warmup)
    }

    /// Runs the training loop to `total_steps`, recording an evaluation row
    /// per agent at step 0, every `eval_interval` steps, and at the end.
    pub fn train(&mut self) -> Result<TrainOutcome> {
        self.train_with(None, |_, _| Ok(()))
    }

    /// [`Self::train`] with a periodic checkpoint hook. The hook runs after
    /// the learning and evaluation work of its step, so a restored run
    /// continues the metrics with no duplicated or skipped evaluation
    /// points.
    pub fn train_with<F>(
        &mut self,
        checkpoint_interval: Option<u64>,
        mut on_checkpoint: F,
    ) -> Result<TrainOutcome>
    where
        F: FnMut(&Trainer, u64) -> Result<()>,
    {
        let mut metrics = Vec::new();
        if self.steps_done == 0 {
            self.record_eval(0, &mut metrics)?;
        }
        let total = self.config.total_steps;
        let mut status = RunStatus::Completed;

        for step in self.steps_done + 1..=total {
            let sigma = self.config.noise.sigma_at(step);
            let mut actions: Vec<Action> = Vec::with_capacity(self.n());
            for i in 0..self.n() {
                let obs = self.read_observation(i, i);
                let action = select_action(
                    &self.agents[i],
                    self.config.algorithm,
                    &obs,
                    sigma,
                    &mut self.rng_noise[i],
                )?;
                actions.push(action);
            }

            let (next_world, next_obs, rewards, done) =
                env_step(&self.world, &actions, &self.env_config)?;
            let next_observations: Vec<Vec<f64>> =
                next_obs.iter().map(|o| o.flatten()).collect();
            let mut joint_action = Vec::with_capacity(2 * self.n());
            for a in &actions {
                let acc = a.acceleration();
                joint_action.push(acc.x);
                joint_action.push(acc.y);
            }

            match self.config.algorithm {
                Algorithm::Maddpg => {
                    for i in 0..self.n() {
                        let current = std::mem::take(&mut self.observations);
                        let joint_obs = self.read_joint(i, &current);
                        self.observations = current;
                        let joint_next = self.read_joint(i, &next_observations);
                        self.access.record_reward(i, i);
                        self.agents[i].buffer.push(Transition {
                            local_observation: joint_obs,
                            joint_action: joint_action.clone(),
                            local_reward: rewards[i],
                            next_local_observation: joint_next,
                        })?;
                    }
                }
                _ => {
                    for i in 0..self.n() {
                        let own = self.read_observation(i, i);
                        self.access.record_observation(i, i);
                        let own_next = next_observations[i].clone();
                        self.access.record_reward(i, i);
                        self.agents[i].buffer.push(Transition {
                            local_observation: own,
                            joint_action: joint_action.clone(),
                            local_reward: rewards[i],
                            next_local_observation: own_next,
                        })?;
                    }
                }
            }

            self.world = next_world;
            self.observations = next_observations;
            if done {
                let (world, obs) = env_reset(&self.env_config, &mut self.rng_env)?;
                self.world = world;
                self.observations = obs.iter().map(|o| o.flatten()).collect();
            }

            if step % self.config.learning_interval == 0 && self.buffers_warm() {
                if let Err(e) = self.learning_round(step) {
                    status = RunStatus::Diverged {
                        step,
                        detail: e.to_string(),
                    };
                    self.steps_done = step;
                    break;
                }
            }

            self.steps_done = step;

            if step % self.config.eval_interval == 0 || step == total {
                self.record_eval(step, &mut metrics)?;
            }
            if let Some(interval) = checkpoint_interval {
                if step % interval == 0 {
                    on_checkpoint(&*self, step)?;
                }
            }
        }

        Ok(TrainOutcome {
            metrics,
            status,
            access: self.access.clone(),
        })
    }

    fn learning_round(&mut self, step: u64) -> Result<()> {
        let n = self.n();

        // One minibatch per agent, shared by its critic and actor updates.
        let mut batches = Vec::with_capacity(n);
        for i in 0..n {
            let batch = sample_minibatch(
                &self.agents[i].buffer,
                self.config.minibatch_size,
                &mut self.rng_sample[i],
            )?;
            batches.push(batch);
        }

        let comm_matrix: Option<Comm> = match (&self.comm, self.config.algorithm.is_networked()) {
            (Some(sched), true) => {
                let m = sched.at(step);
                m.validate()?;
                if m.n_agents() != n {
                    return Err(Error::dim("comm matrix size", n, m.n_agents()));
                }
                Some(m)
            }
            _ => None,
        };

        // Bootstrap targets from pre-round target networks.
        let mut targets_list = Vec::with_capacity(n);
        for i in 0..n {
            let targets = match self.config.algorithm {
                Algorithm::Maddpg => {
                    for owner in 0..n {
                        self.access.record_actor_params(i, owner);
                    }
                    critic_target_centralized(
                        &self.agents,
                        i,
                        &self.obs_slices,
                        &batches[i],
                        self.config.gamma,
                    )?
                }
                _ => critic_target_decentralized(&self.agents[i], &batches[i], self.config.gamma)?,
            };
            targets_list.push(targets);
        }

        // Soft-consensus penalties against a pre-round critic snapshot.
        let mut penalties: Vec<Option<SoftPenaltyTerm>> = vec![None; n];
        if self.config.algorithm == Algorithm::SoftConsensus {
            let c = comm_matrix.as_ref().expect("validated above");
            let consensus = self
                .config
                .consensus
                .expect("validated: networked algorithms carry a consensus config");
            let snapshot: Vec<ParamVec> = self
                .agents
                .iter()
                .map(|a| a.critic_params.clone())
                .collect();
            for i in 0..n {
                let row = c.row(i).to_vec();
                for (j, &w) in row.iter().enumerate() {
                    if j != i && w != 0.0 {
                        self.access.record_critic_params(i, j);
                    }
                }
                let (value, grad) = soft_penalty(
                    &snapshot[i],
                    &snapshot,
                    &row,
                    consensus.zeta,
                    consensus.denom_floor,
                )?;
                penalties[i] = Some(SoftPenaltyTerm { value, grad });
            }
        }

        for i in 0..n {
            let loss = critic_update(
                &mut self.agents[i],
                &batches[i],
                &targets_list[i],
                penalties[i].as_ref(),
            )?;
            self.diag[i].critic_loss = loss;
            self.diag[i].consensus_penalty =
                penalties[i].as_ref().map(|p| p.value).unwrap_or(0.0);
        }

        for i in 0..n {
            let objective = match (self.config.algorithm, self.config.setting) {
                (Algorithm::Maddpg, _) => actor_update_centralized(
                    &mut self.agents[i],
                    &batches[i],
                    self.obs_slices[i].clone(),
                )?,
                (_, Setting::Cooperative) => {
                    actor_update_surrogate(&mut self.agents[i], &batches[i])?
                }
                (_, Setting::Mixed) => {
                    actor_update_mixed(&mut self.agents[i], &batches[i], &self.teams, i)?.0
                }
            };
            self.diag[i].actor_objective = objective;
        }

        for agent in &mut self.agents {
            agent.actor_target = soft_update(&agent.actor_target, &agent.actor_params, self.config.tau)?;
            agent.critic_target =
                soft_update(&agent.critic_target, &agent.critic_params, self.config.tau)?;
        }

        if self.config.algorithm == Algorithm::HardConsensus {
            let c = comm_matrix.as_ref().expect("validated above");
            for i in 0..n {
                for j in 0..n {
                    if i != j && c.get(i, j) != 0.0 {
                        self.access.record_critic_params(i, j);
                    }
                }
            }
            let snapshot: Vec<ParamVec> = self
                .agents
                .iter()
                .map(|a| a.critic_params.clone())
                .collect();
            let averaged = hard_consensus(&snapshot, c)?;
            for (agent, params) in self.agents.iter_mut().zip(averaged) {
                agent.critic_params = params;
            }
        }

        for (i, agent) in self.agents.iter().enumerate() {
            if !agent.actor_params.is_finite()
                || !agent.critic_params.is_finite()
                || !agent.actor_target.is_finite()
                || !agent.critic_target.is_finite()
            {
                return Err(Error::NonFinite(format!(
                    "agent {i} holds non-finite parameters"
                )));
            }
        }
        Ok(())
    }

    fn record_eval(&mut self, step: u64, metrics: &mut Vec<MetricsRow>) -> Result<()> {
        let policies = self.policies();
        let report = evaluate(
            &policies,
            &self.env_config,
            self.config.eval_episodes,
            &mut self.rng_eval,
        )?;
        for i in 0..self.n() {
            metrics.push(MetricsRow {
                step,
                algorithm: self.config.algorithm,
                agent_or_team: self.agent_label(i),
                mean_eval_score: report.mean_per_agent[i],
                critic_loss: self.diag[i].critic_loss,
                actor_objective: self.diag[i].actor_objective,
                consensus_penalty: self.diag[i].consensus_penalty,
            });
        }
        Ok(())
    }

    /// Owned snapshot of everything needed to continue this run.
    pub fn snapshot(&self) -> TrainerState {
        TrainerState {
            step: self.steps_done,
            agents: self
                .agents
                .iter()
                .map(|a| {
                    let (capacity, storage, cursor) = a.buffer.raw_parts();
                    AgentSnapshot {
                        actor_spec: a.actor_spec.clone(),
                        critic_spec: a.critic_spec.clone(),
                        actor_params: a.actor_params.clone(),
                        actor_target: a.actor_target.clone(),
                        critic_params: a.critic_params.clone(),
                        critic_target: a.critic_target.clone(),
                        actor_opt: a.actor_opt.clone(),
                        critic_opt: a.critic_opt.clone(),
                        buffer_capacity: capacity,
                        buffer_storage: storage.to_vec(),
                        buffer_cursor: cursor,
                    }
                })
                .collect(),
            world: self.world.clone(),
            rng: RngPositions {
                env: self.rng_env.get_word_pos(),
                eval: self.rng_eval.get_word_pos(),
                noise: self.rng_noise.iter().map(|r| r.get_word_pos()).collect(),
                sample: self.rng_sample.iter().map(|r| r.get_word_pos()).collect(),
            },
            diagnostics: self
                .diag
                .iter()
                .map(|d| (d.critic_loss, d.actor_objective, d.consensus_penalty))
                .collect(),
        }
    }

    /// Rebuilds a trainer mid-run from a snapshot. The config, environment,
    /// teams, comm schedule, and seed must match the original run.
    pub fn restore(
        config: TrainerConfig,
        env_config: EnvCfg,
        teams: Option<TeamAssignment>,
        comm: Option<CommSched>,
        seed: u64,
        state: TrainerState,
    ) -> Result<Self> {
        let mut trainer = Self::new(config, env_config, teams, comm, seed)?;
        let n = trainer.n();
        if state.agents.len() != n
            || state.rng.noise.len() != n
            || state.rng.sample.len() != n
            || state.diagnostics.len() != n
        {
            return Err(Error::InvalidConfig(
                "snapshot agent count does not match configuration".into(),
            ));
        }
        for (agent, snap) in trainer.agents.iter_mut().zip(state.agents) {
            if snap.actor_spec != agent.actor_spec || snap.critic_spec != agent.critic_spec {
                return Err(Error::InvalidConfig(
                    "snapshot network specs do not match configuration".into(),
                ));
            }
            agent.actor_params = snap.actor_params;
            agent.actor_target = snap.actor_target;
            agent.critic_params = snap.critic_params;
            agent.critic_target = snap.critic_target;
            agent.actor_opt = snap.actor_opt;
            agent.critic_opt = snap.critic_opt;
            agent.buffer = ReplayBuffer::from_raw_parts(
                snap.buffer_capacity,
                snap.buffer_storage,
                snap.buffer_cursor,
            )?;
        }
        trainer.rng_env.set_word_pos(state.rng.env);
        trainer.rng_eval.set_word_pos(state.rng.eval);
        for (rng, pos) in trainer.rng_noise.iter_mut().zip(&state.rng.noise) {
            rng.set_word_pos(*pos);
        }
        for (rng, pos) in trainer.rng_sample.iter_mut().zip(&state.rng.sample) {
            rng.set_word_pos(*pos);
        }
        trainer.observations = (0..n)
            .map(|i| crate::env::observe(&state.world, i, &trainer.env_config).flatten())
            .collect();
        trainer.world = state.world;
        for (diag, &(c, a, p)) in trainer.diag.iter_mut().zip(&state.diagnostics) {
            diag.critic_loss = c;
            diag.actor_objective = a;
            diag.consensus_penalty = p;
        }
        trainer.steps_done = state.step;
        Ok(trainer)
    }
}
