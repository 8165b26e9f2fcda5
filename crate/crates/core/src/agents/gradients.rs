//! Per-operation math for the trainers: action selection, bootstrap targets,
//! and the critic/actor gradient computations with their Adam updates.
//!
//! Gradient computation is split from update application so the
//! finite-difference suites can check the gradients in isolation.

use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::agents::{AgentRuntime, Algorithm, TeamAssignment};
use crate::error::{Error, Result};
use crate::nn::{adam_step_in_place, mlp_backward, mlp_forward, MlpSpec};
use crate::replay::ReplayBuffer;
use crate::{Action, ParamVec};

/// A sampled minibatch in column layout.
#[derive(Debug, Clone)]
pub struct Minibatch {
    pub observations: Vec<Vec<f64>>,
    pub joint_actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub next_observations: Vec<Vec<f64>>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Uniform with-replacement draw of `size` transitions.
pub fn sample_minibatch<R: Rng + ?Sized>(
    buffer: &ReplayBuffer<f64>,
    size: usize,
    rng: &mut R,
) -> Result<Minibatch> {
    let samples = buffer.sample(size, rng)?;
    let mut batch = Minibatch {
        observations: Vec::with_capacity(size),
        joint_actions: Vec::with_capacity(size),
        rewards: Vec::with_capacity(size),
        next_observations: Vec::with_capacity(size),
    };
    for t in samples {
        batch.observations.push(t.local_observation.clone());
        batch.joint_actions.push(t.joint_action.clone());
        batch.rewards.push(t.local_reward);
        batch.next_observations.push(t.next_local_observation.clone());
    }
    Ok(batch)
}

/// Evaluates the policy on an observation and returns the agent's own action
/// with exploration noise added and clamped to the action box.
///
/// Decentralized-family actors emit the joint surrogate action, from which
/// the agent's own slots are extracted; the centralized actor emits its own
/// action directly.
pub fn select_action<R: Rng + ?Sized>(
    agent: &AgentRuntime,
    algorithm: Algorithm,
    observation: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Action> {
    let out = mlp_forward(&agent.actor_params, &agent.actor_spec, observation)?;
    let own: &[f64] = match algorithm {
        Algorithm::Maddpg => &out,
        _ => &out[agent.own_action_slice.clone()],
    };
    debug_assert_eq!(own.len(), 2);
    let z0: f64 = rng.sample(StandardNormal);
    let z1: f64 = rng.sample(StandardNormal);
    Ok(Action::new(own[0] + sigma * z0, own[1] + sigma * z1))
}

fn critic_input(obs: &[f64], action: &[f64]) -> Vec<f64> {
    let mut input = Vec::with_capacity(obs.len() + action.len());
    input.extend_from_slice(obs);
    input.extend_from_slice(action);
    input
}

/// Bootstrap targets `y_j = r_j + gamma * Q'(o'_j, a'_j)` where the entire
/// next joint action comes from the agent's own target surrogate policy.
pub fn critic_target_decentralized(
    agent: &AgentRuntime,
    batch: &Minibatch,
    gamma: f64,
) -> Result<Vec<f64>> {
    let mut targets = Vec::with_capacity(batch.len());
    for j in 0..batch.len() {
        let next_obs = &batch.next_observations[j];
        let next_action = mlp_forward(&agent.actor_target, &agent.actor_spec, next_obs)?;
        let q = mlp_forward(
            &agent.critic_target,
            &agent.critic_spec,
            &critic_input(next_obs, &next_action),
        )?[0];
        targets.push(batch.rewards[j] + gamma * q);
    }
    Ok(targets)
}

/// Centralized bootstrap targets: the next joint action is assembled from
/// every agent's own target policy applied to its slice of the stored joint
/// observation.
pub fn critic_target_centralized(
    agents: &[AgentRuntime],
    agent_index: usize,
    obs_slices: &[Range<usize>],
    batch: &Minibatch,
    gamma: f64,
) -> Result<Vec<f64>> {
    let me = &agents[agent_index];
    let mut targets = Vec::with_capacity(batch.len());
    for j in 0..batch.len() {
        let next_joint_obs = &batch.next_observations[j];
        let mut next_action = Vec::new();
        for (k, other) in agents.iter().enumerate() {
            let o_k = &next_joint_obs[obs_slices[k].clone()];
            next_action.extend(mlp_forward(&other.actor_target, &other.actor_spec, o_k)?);
        }
        let q = mlp_forward(
            &me.critic_target,
            &me.critic_spec,
            &critic_input(next_joint_obs, &next_action),
        )?[0];
        targets.push(batch.rewards[j] + gamma * q);
    }
    Ok(targets)
}

/// Soft-consensus penalty contribution to one agent's critic loss.
#[derive(Debug, Clone)]
pub struct SoftPenaltyTerm {
    pub value: f64,
    pub grad: ParamVec,
}

/// Mean-squared critic loss and its gradient, with the targets treated as
/// constants. An optional consensus penalty adds to both the value and the
/// gradient.
pub fn critic_loss_grad(
    critic_spec: &MlpSpec,
    critic_params: &ParamVec,
    batch: &Minibatch,
    targets: &[f64],
    penalty: Option<&SoftPenaltyTerm>,
) -> Result<(f64, ParamVec)> {
    if targets.len() != batch.len() {
        return Err(Error::dim("critic targets", batch.len(), targets.len()));
    }
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty minibatch".into()));
    }
    let s = batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = ParamVec::zeros(critic_params.len());
    for j in 0..batch.len() {
        let input = critic_input(&batch.observations[j], &batch.joint_actions[j]);
        let q = mlp_forward(critic_params, critic_spec, &input)?[0];
        let err = q - targets[j];
        loss += err * err / s;
        let cotangent = [2.0 * err / s];
        let (dp, _) = mlp_backward(critic_params, critic_spec, &input, &cotangent)?;
        for (g, d) in grad.as_mut_slice().iter_mut().zip(dp.as_slice()) {
            *g += d;
        }
    }
    if let Some(p) = penalty {
        if p.grad.len() != grad.len() {
            return Err(Error::dim("penalty gradient", grad.len(), p.grad.len()));
        }
        loss += p.value;
        for (g, d) in grad.as_mut_slice().iter_mut().zip(p.grad.as_slice()) {
            *g += d;
        }
    }
    Ok((loss, grad))
}

/// Which joint-action slots the actor's output drives during an actor
/// update, and which actor output index feeds each slot. Slots not listed
/// stay pinned to the stored (observed) actions and receive no gradient.
#[derive(Debug, Clone)]
pub struct SlotBinding {
    slots: Vec<usize>,
    outs: Vec<usize>,
}

impl SlotBinding {
    /// Surrogate update: the actor drives every joint-action slot.
    pub fn full(joint_dim: usize) -> Self {
        Self {
            slots: (0..joint_dim).collect(),
            outs: (0..joint_dim).collect(),
        }
    }

    /// Mixed-phase update: the actor drives only the listed slots (actor
    /// output index equals slot index).
    pub fn subset(slots: Vec<usize>) -> Self {
        Self {
            outs: slots.clone(),
            slots,
        }
    }

    /// Centralized update: the actor's whole (own-sized) output drives the
    /// agent's own slot range.
    pub fn own_range(range: Range<usize>) -> Self {
        Self {
            outs: (0..range.len()).collect(),
            slots: range.collect(),
        }
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.slots.iter().copied().zip(self.outs.iter().copied())
    }
}

/// Sampled policy objective `(1/S) sum_j Q(o_j, a_j)` with the bound slots
/// replaced by actor outputs, and its gradient with respect to the actor
/// parameters. Gradient flows through the critic's action inputs only for
/// bound slots; pinned slots are constants.
#[allow(clippy::too_many_arguments)]
pub fn actor_objective_grad(
    actor_spec: &MlpSpec,
    actor_params: &ParamVec,
    critic_spec: &MlpSpec,
    critic_params: &ParamVec,
    actor_inputs: &[Vec<f64>],
    critic_obs: &[Vec<f64>],
    stored_actions: &[Vec<f64>],
    binding: &SlotBinding,
) -> Result<(f64, ParamVec)> {
    let s = actor_inputs.len();
    if s == 0 {
        return Err(Error::InvalidConfig("empty minibatch".into()));
    }
    if critic_obs.len() != s || stored_actions.len() != s {
        return Err(Error::dim("actor update batch", s, critic_obs.len()));
    }

    let inv_s = 1.0 / s as f64;
    let mut objective = 0.0;
    let mut grad = ParamVec::zeros(actor_params.len());
    for j in 0..s {
        let actor_out = mlp_forward(actor_params, actor_spec, &actor_inputs[j])?;
        let mut action = stored_actions[j].clone();
        for (slot, out) in binding.pairs() {
            action[slot] = actor_out[out];
        }
        let obs_len = critic_obs[j].len();
        let input = critic_input(&critic_obs[j], &action);
        let q = mlp_forward(critic_params, critic_spec, &input)?[0];
        objective += q;

        let (_, d_input) = mlp_backward(critic_params, critic_spec, &input, &[1.0])?;
        let action_grad = &d_input[obs_len..];
        let mut cotangent = vec![0.0; actor_spec.output_dim];
        for (slot, out) in binding.pairs() {
            cotangent[out] = action_grad[slot];
        }
        let (d_actor, _) = mlp_backward(actor_params, actor_spec, &actor_inputs[j], &cotangent)?;
        for (g, d) in grad.as_mut_slice().iter_mut().zip(d_actor.as_slice()) {
            *g += d;
        }
    }
    for g in grad.as_mut_slice() {
        *g *= inv_s;
    }
    Ok((objective * inv_s, grad))
}

fn negated(p: &ParamVec) -> ParamVec {
    ParamVec::from_vec(p.as_slice().iter().map(|&v| -v).collect())
}

/// One Adam step on the critic. Returns the pre-step loss; a non-finite
/// loss or gradient is an error so the caller can abort the run.
pub fn critic_update(
    agent: &mut AgentRuntime,
    batch: &Minibatch,
    targets: &[f64],
    penalty: Option<&SoftPenaltyTerm>,
) -> Result<f64> {
    let (loss, grad) = critic_loss_grad(
        &agent.critic_spec,
        &agent.critic_params,
        batch,
        targets,
        penalty,
    )?;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("critic loss is {loss}")));
    }
    adam_step_in_place(&mut agent.critic_params, &grad, &mut agent.critic_opt)?;
    Ok(loss)
}

/// Gradient-ascent Adam step on the surrogate policy objective, with the
/// entire joint action produced by the agent's own actor.
pub fn actor_update_surrogate(agent: &mut AgentRuntime, batch: &Minibatch) -> Result<f64> {
    let binding = SlotBinding::full(agent.actor_spec.output_dim);
    let (objective, grad) = actor_objective_grad(
        &agent.actor_spec,
        &agent.actor_params,
        &agent.critic_spec,
        &agent.critic_params,
        &batch.observations,
        &batch.observations,
        &batch.joint_actions,
        &binding,
    )?;
    if !objective.is_finite() {
        return Err(Error::NonFinite(format!("actor objective is {objective}")));
    }
    adam_step_in_place(&mut agent.actor_params, &negated(&grad), &mut agent.actor_opt)?;
    Ok(objective)
}

/// Joint-action slot range of each agent, assuming equal per-agent action
/// dimension (true for the particle environments).
fn agent_slots(joint_dim: usize, n_agents: usize, agent: usize) -> Result<Range<usize>> {
    if joint_dim % n_agents != 0 {
        return Err(Error::InvalidConfig(format!(
            "joint action dim {joint_dim} not divisible by {n_agents} agents"
        )));
    }
    let per = joint_dim / n_agents;
    Ok(agent * per..(agent + 1) * per)
}

/// Two-phase mixed-setting actor update: ascent on team slots with observed
/// adversary actions pinned, then descent on adversary slots with observed
/// team actions pinned. With no adversaries this is exactly the surrogate
/// update. Returns (team objective, adversary objective).
pub fn actor_update_mixed(
    agent: &mut AgentRuntime,
    batch: &Minibatch,
    teams: &TeamAssignment,
    agent_index: usize,
) -> Result<(f64, Option<f64>)> {
    let adversaries = teams.adversaries(agent_index);
    if adversaries.is_empty() {
        let objective = actor_update_surrogate(agent, batch)?;
        return Ok((objective, None));
    }

    let joint_dim = agent.actor_spec.output_dim;
    let n = teams.n_agents();
    let mut team_slots = Vec::new();
    for a in teams.teammates(agent_index) {
        team_slots.extend(agent_slots(joint_dim, n, a)?);
    }
    let mut adv_slots = Vec::new();
    for a in adversaries {
        adv_slots.extend(agent_slots(joint_dim, n, a)?);
    }

    let run_phase = |agent: &AgentRuntime, slots: Vec<usize>| -> Result<(f64, ParamVec)> {
        actor_objective_grad(
            &agent.actor_spec,
            &agent.actor_params,
            &agent.critic_spec,
            &agent.critic_params,
            &batch.observations,
            &batch.observations,
            &batch.joint_actions,
            &SlotBinding::subset(slots),
        )
    };

    let (team_objective, team_grad) = run_phase(agent, team_slots)?;
    if !team_objective.is_finite() {
        return Err(Error::NonFinite(format!(
            "mixed team objective is {team_objective}"
        )));
    }
    adam_step_in_place(&mut agent.actor_params, &negated(&team_grad), &mut agent.actor_opt)?;

    let (adv_objective, adv_grad) = run_phase(agent, adv_slots)?;
    if !adv_objective.is_finite() {
        return Err(Error::NonFinite(format!(
            "mixed adversary objective is {adv_objective}"
        )));
    }
    adam_step_in_place(&mut agent.actor_params, &adv_grad, &mut agent.actor_opt)?;

    Ok((team_objective, Some(adv_objective)))
}

/// Centralized actor update: only the agent's own slots come from its actor;
/// all other slots stay at the stored actions.
pub fn actor_update_centralized(
    agent: &mut AgentRuntime,
    batch: &Minibatch,
    own_obs_slice: Range<usize>,
) -> Result<f64> {
    let actor_inputs: Vec<Vec<f64>> = batch
        .observations
        .iter()
        .map(|joint| joint[own_obs_slice.clone()].to_vec())
        .collect();
    let binding = SlotBinding::own_range(agent.own_action_slice.clone());
    let (objective, grad) = actor_objective_grad(
        &agent.actor_spec,
        &agent.actor_params,
        &agent.critic_spec,
        &agent.critic_params,
        &actor_inputs,
        &batch.observations,
        &batch.joint_actions,
        &binding,
    )?;
    if !objective.is_finite() {
        return Err(Error::NonFinite(format!("actor objective is {objective}")));
    }
    adam_step_in_place(&mut agent.actor_params, &negated(&grad), &mut agent.actor_opt)?;
    Ok(objective)
}
