//! Training metrics rows and run outcomes.

use crate::agents::{AccessLog, Algorithm};

pub const METRICS_HEADER: &str =
    "step,algorithm,agent_or_team,mean_eval_score,critic_loss,actor_objective,consensus_penalty";

/// One evaluation-point row, per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub algorithm: Algorithm,
    pub agent_or_team: String,
    pub mean_eval_score: f64,
    pub critic_loss: f64,
    pub actor_objective: f64,
    pub consensus_penalty: f64,
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.step,
            self.algorithm.name(),
            self.agent_or_team,
            self.mean_eval_score,
            self.critic_loss,
            self.actor_objective,
            self.consensus_penalty
        )
    }

    /// Parses a row previously produced by [`Self::to_csv`].
    pub fn from_csv(line: &str) -> Option<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return None;
        }
        Some(Self {
            step: fields[0].parse().ok()?,
            algorithm: Algorithm::parse(fields[1]).ok()?,
            agent_or_team: fields[2].to_owned(),
            mean_eval_score: fields[3].parse().ok()?,
            critic_loss: fields[4].parse().ok()?,
            actor_objective: fields[5].parse().ok()?,
            consensus_penalty: fields[6].parse().ok()?,
        })
    }
}

/// How a training run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Training hit a non-finite loss, gradient, or parameter and stopped.
    Diverged { step: u64, detail: String },
}

/// Everything a finished (or aborted) run produced in memory.
#[derive(Debug)]
pub struct TrainOutcome {
    pub metrics: Vec<MetricsRow>,
    pub status: RunStatus,
    pub access: AccessLog,
}

impl TrainOutcome {
    pub fn final_scores(&self) -> Vec<&MetricsRow> {
        let last_step = match self.metrics.last() {
            Some(row) => row.step,
            None => return Vec::new(),
        };
        self.metrics.iter().filter(|r| r.step == last_step).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let row = MetricsRow {
            step: 4000,
            algorithm: Algorithm::SoftConsensus,
            agent_or_team: "agent_1".into(),
            mean_eval_score: -12.625,
            critic_loss: 0.5,
            actor_objective: -3.0,
            consensus_penalty: 0.001,
        };
        let parsed = MetricsRow::from_csv(&row.to_csv()).unwrap();
        assert_eq!(parsed, row);
        assert_eq!(METRICS_HEADER.split(',').count(), 7);
    }
}
