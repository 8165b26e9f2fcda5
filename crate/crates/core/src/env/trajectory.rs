//! Trajectory CSV rows: one row per environment step.

use crate::env::{ActionVector, EnvConfig, WorldState};
use crate::scalar::Real;

/// Column header matching [`trajectory_row`]: episode and step indices, then
/// per-agent positions, landmark positions, per-agent velocities, actions,
/// and rewards.
pub fn trajectory_header<T: Real>(config: &EnvConfig<T>) -> String {
    let mut cols = vec!["episode".to_owned(), "step".to_owned()];
    for i in 0..config.n_agents {
        cols.push(format!("pos_x_{i}"));
        cols.push(format!("pos_y_{i}"));
    }
    for k in 0..config.n_landmarks() {
        cols.push(format!("landmark_x_{k}"));
        cols.push(format!("landmark_y_{k}"));
    }
    for i in 0..config.n_agents {
        cols.push(format!("vel_x_{i}"));
        cols.push(format!("vel_y_{i}"));
    }
    for i in 0..config.n_agents {
        cols.push(format!("act_x_{i}"));
        cols.push(format!("act_y_{i}"));
    }
    for i in 0..config.n_agents {
        cols.push(format!("reward_{i}"));
    }
    cols.join(",")
}

/// Formats one step. `state` is the post-step world; `actions` and `rewards`
/// are what produced it.
pub fn trajectory_row<T: Real>(
    episode: usize,
    step: usize,
    state: &WorldState<T>,
    actions: &[ActionVector<T>],
    rewards: &[T],
) -> String {
    let mut fields = vec![episode.to_string(), step.to_string()];
    for p in &state.agent_positions {
        fields.push(format!("{}", p.x));
        fields.push(format!("{}", p.y));
    }
    for p in &state.landmark_positions {
        fields.push(format!("{}", p.x));
        fields.push(format!("{}", p.y));
    }
    for v in &state.agent_velocities {
        fields.push(format!("{}", v.x));
        fields.push(format!("{}", v.y));
    }
    for a in actions {
        let acc = a.acceleration();
        fields.push(format!("{}", acc.x));
        fields.push(format!("{}", acc.y));
    }
    for r in rewards {
        fields.push(format!("{r}"));
    }
    fields.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::env_reset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn header_and_row_have_matching_column_counts() {
        let config = EnvConfig::<f64>::spread(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (state, _) = env_reset(&config, &mut rng).unwrap();
        let actions = vec![ActionVector::new(0.0, 0.0); 3];
        let rewards = vec![0.0; 3];
        let header = trajectory_header(&config);
        let row = trajectory_row(0, 1, &state, &actions, &rewards);
        assert_eq!(
            header.split(',').count(),
            row.split(',').count(),
        );
    }
}
