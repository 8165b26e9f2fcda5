//! Noise-free policy evaluation: mean undiscounted episode returns.

use rand::Rng;
use std::ops::Range;

use crate::env::{env_reset, env_step};
use crate::error::Result;
use crate::nn::{mlp_forward, MlpSpec};
use crate::{Action, EnvCfg, ParamVec, World};

/// A frozen policy for evaluation. `outputs_joint_action` distinguishes
/// surrogate actors (which emit all agents' actions and use only their own
/// slots) from centralized actors (which emit their own action directly).
#[derive(Debug, Clone)]
pub struct Policy {
    pub spec: MlpSpec,
    pub params: ParamVec,
    pub own_action_slice: Range<usize>,
    pub outputs_joint_action: bool,
}

impl Policy {
    pub fn act(&self, observation: &[f64]) -> Result<Action> {
        let out = mlp_forward(&self.params, &self.spec, observation)?;
        let own: &[f64] = if self.outputs_joint_action {
            &out[self.own_action_slice.clone()]
        } else {
            &out
        };
        Ok(Action::new(own[0], own[1]))
    }
}

/// Per-episode and mean undiscounted returns, per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mean_per_agent: Vec<f64>,
    /// `per_episode[e][agent]`
    pub per_episode: Vec<Vec<f64>>,
}

/// Runs `n_episodes` full episodes with exploration disabled, invoking
/// `on_step(episode, step, world, actions, rewards)` after every transition.
pub fn evaluate_episodes<R, F>(
    policies: &[Policy],
    env_config: &EnvCfg,
    n_episodes: usize,
    rng: &mut R,
    mut on_step: F,
) -> Result<EvalReport>
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize, &World, &[Action], &[f64]),
{
    let n = policies.len();
    let mut per_episode = Vec::with_capacity(n_episodes);
    for episode in 0..n_episodes {
        let (mut state, mut observations) = env_reset(env_config, rng)?;
        let mut returns = vec![0.0; n];
        loop {
            let actions: Vec<Action> = policies
                .iter()
                .zip(&observations)
                .map(|(p, o)| p.act(&o.flatten()))
                .collect::<Result<_>>()?;
            let (next, next_obs, rewards, done) = env_step(&state, &actions, env_config)?;
            for (acc, r) in returns.iter_mut().zip(&rewards) {
                *acc += r;
            }
            on_step(episode, next.step_counter, &next, &actions, &rewards);
            state = next;
            observations = next_obs;
            if done {
                break;
            }
        }
        per_episode.push(returns);
    }

    let mean_per_agent = (0..n)
        .map(|i| per_episode.iter().map(|e| e[i]).sum::<f64>() / n_episodes as f64)
        .collect();
    Ok(EvalReport {
        mean_per_agent,
        per_episode,
    })
}

/// Mean undiscounted return over `n_episodes` noise-free episodes.
pub fn evaluate<R: Rng + ?Sized>(
    policies: &[Policy],
    env_config: &EnvCfg,
    n_episodes: usize,
    rng: &mut R,
) -> Result<EvalReport> {
    evaluate_episodes(policies, env_config, n_episodes, rng, |_, _, _, _, _| {})
}
