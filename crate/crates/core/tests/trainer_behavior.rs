//! Trainer-level behavior: algorithm equivalences, access audit,
//! determinism, divergence handling, and mid-run restore.

use marl_core::agents::{
    Algorithm, RunStatus, Setting, TeamAssignment, Trainer, TrainerConfig, TrainerState,
};
use marl_core::comms::build_ring;
use marl_core::{Comm, CommSched, EnvCfg};

fn small_config(algorithm: Algorithm, setting: Setting, total: u64) -> TrainerConfig {
    let mut c = TrainerConfig::desk(algorithm, setting, total);
    c.minibatch_size = 32;
    c.learning_interval = 20;
    c.warmup = 64;
    c.hidden_dims = vec![16, 16];
    c.eval_interval = 200;
    c.eval_episodes = 5;
    c
}

/// Actor and critic parameter bits for every agent.
fn param_bits(trainer: &Trainer) -> Vec<Vec<u64>> {
    trainer
        .agents()
        .iter()
        .flat_map(|a| {
            [
                a.actor_params.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<u64>>(),
                a.critic_params.as_slice().iter().map(|v| v.to_bits()).collect(),
            ]
        })
        .collect()
}

/// Runs to completion, capturing the parameter trace at every learning
/// interval.
fn run_with_trace(trainer: &mut Trainer) -> (Vec<Vec<Vec<u64>>>, Vec<String>) {
    let interval = trainer.config().learning_interval;
    let mut trace = Vec::new();
    let outcome = trainer
        .train_with(Some(interval), |t, _| {
            trace.push(param_bits(t));
            Ok(())
        })
        .unwrap();
    assert_eq!(outcome.status, RunStatus::Completed);
    let rows = outcome.metrics.iter().map(|r| r.to_csv()).collect();
    (trace, rows)
}

/// Metrics with the algorithm column blanked, for cross-algorithm trace
/// comparison.
fn rows_without_algorithm(rows: &[String]) -> Vec<String> {
    rows.iter()
        .map(|r| {
            let mut fields: Vec<&str> = r.split(',').collect();
            fields[1] = "-";
            fields.join(",")
        })
        .collect()
}

#[test]
fn no_learning_before_warmup() {
    let mut config = small_config(Algorithm::Decentralized, Setting::Cooperative, 50);
    config.warmup = 1000; // larger than total_steps
    let env = EnvCfg::spread(2);
    let mut trainer = Trainer::new(config, env, None, None, 3).unwrap();
    let before = param_bits(&trainer);
    let outcome = trainer.train().unwrap();
    assert_eq!(outcome.status, RunStatus::Completed);
    assert_eq!(param_bits(&trainer), before);
}

#[test]
fn hard_consensus_with_identity_matches_decentralized_bitwise() {
    let total = 600;
    let env = EnvCfg::spread(2);
    let seed = 11;

    let mut hard = Trainer::new(
        small_config(Algorithm::HardConsensus, Setting::Cooperative, total),
        env.clone(),
        None,
        Some(CommSched::Constant(Comm::identity(2))),
        seed,
    )
    .unwrap();
    let mut plain = Trainer::new(
        small_config(Algorithm::Decentralized, Setting::Cooperative, total),
        env,
        None,
        None,
        seed,
    )
    .unwrap();

    let (trace_hard, rows_hard) = run_with_trace(&mut hard);
    let (trace_plain, rows_plain) = run_with_trace(&mut plain);
    assert!(!trace_hard.is_empty());
    assert_eq!(trace_hard, trace_plain);
    assert_eq!(
        rows_without_algorithm(&rows_hard),
        rows_without_algorithm(&rows_plain)
    );
}

#[test]
fn all_algorithms_coincide_for_a_single_agent() {
    let total = 600;
    let env = EnvCfg::spread(1);
    let seed = 7;

    let mut runs = Vec::new();
    for algorithm in [
        Algorithm::Maddpg,
        Algorithm::Decentralized,
        Algorithm::HardConsensus,
        Algorithm::SoftConsensus,
    ] {
        let comm = algorithm
            .is_networked()
            .then(|| CommSched::Constant(Comm::identity(1)));
        let mut trainer = Trainer::new(
            small_config(algorithm, Setting::Cooperative, total),
            env.clone(),
            None,
            comm,
            seed,
        )
        .unwrap();
        runs.push(run_with_trace(&mut trainer));
    }

    let (reference_trace, reference_rows) = &runs[0];
    let reference_rows = rows_without_algorithm(reference_rows);
    for (trace, rows) in &runs[1..] {
        assert_eq!(trace, reference_trace);
        assert_eq!(rows_without_algorithm(rows), reference_rows);
    }
}

#[test]
fn mixed_with_single_team_matches_cooperative() {
    let total = 600;
    let env = EnvCfg::spread(2);
    let seed = 19;

    let mut mixed = Trainer::new(
        small_config(Algorithm::Decentralized, Setting::Mixed, total),
        env.clone(),
        Some(TeamAssignment::single_team(2)),
        None,
        seed,
    )
    .unwrap();
    let mut cooperative = Trainer::new(
        small_config(Algorithm::Decentralized, Setting::Cooperative, total),
        env,
        None,
        None,
        seed,
    )
    .unwrap();

    let (trace_mixed, rows_mixed) = run_with_trace(&mut mixed);
    let (trace_coop, rows_coop) = run_with_trace(&mut cooperative);
    assert_eq!(trace_mixed, trace_coop);
    assert_eq!(rows_mixed, rows_coop);
}

#[test]
fn decentralized_run_never_reads_foreign_data() {
    let env = EnvCfg::spread(3);
    let mut trainer = Trainer::new(
        small_config(Algorithm::Decentralized, Setting::Cooperative, 400),
        env,
        None,
        None,
        23,
    )
    .unwrap();
    let outcome = trainer.train().unwrap();
    assert_eq!(outcome.access.cross_observation_reads(), 0);
    assert_eq!(outcome.access.cross_reward_reads(), 0);
    assert_eq!(outcome.access.cross_actor_param_reads(), 0);
    assert_eq!(outcome.access.cross_critic_param_reads(), 0);
    // the agents did read their own data
    assert!(outcome.access.observation_reads(0, 0) > 0);
}

#[test]
fn centralized_run_reads_everything() {
    let env = EnvCfg::spread(2);
    let mut trainer = Trainer::new(
        small_config(Algorithm::Maddpg, Setting::Cooperative, 400),
        env,
        None,
        None,
        23,
    )
    .unwrap();
    let outcome = trainer.train().unwrap();
    assert!(outcome.access.cross_observation_reads() > 0);
    assert!(outcome.access.cross_actor_param_reads() > 0);
}

#[test]
fn networked_critic_reads_stay_on_communication_edges() {
    let ring = build_ring::<f64>(3, 0.05).unwrap();
    let env = EnvCfg::spread(3);
    for algorithm in [Algorithm::HardConsensus, Algorithm::SoftConsensus] {
        let mut trainer = Trainer::new(
            small_config(algorithm, Setting::Cooperative, 400),
            env.clone(),
            None,
            Some(CommSched::Constant(ring.clone())),
            29,
        )
        .unwrap();
        let outcome = trainer.train().unwrap();
        assert_eq!(outcome.access.cross_observation_reads(), 0);
        assert_eq!(outcome.access.cross_reward_reads(), 0);
        assert_eq!(outcome.access.cross_actor_param_reads(), 0);
        assert!(outcome.access.cross_critic_param_reads() > 0);
        assert_eq!(outcome.access.critic_reads_off_edges(&ring), 0);
    }
}

#[test]
fn same_seed_reproduces_metrics_exactly() {
    let env = EnvCfg::spread(2);
    let run = |seed: u64| {
        let mut trainer = Trainer::new(
            small_config(Algorithm::SoftConsensus, Setting::Cooperative, 400),
            env.clone(),
            None,
            Some(CommSched::Constant(
                marl_core::comms::build_cooperative(2, 0.01).unwrap(),
            )),
            seed,
        )
        .unwrap();
        let outcome = trainer.train().unwrap();
        outcome
            .metrics
            .iter()
            .map(|r| r.to_csv())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn runaway_learning_rate_aborts_with_step_index() {
    let mut config = small_config(Algorithm::Decentralized, Setting::Cooperative, 300);
    config.critic_lr = 1e200;
    config.warmup = 32;
    let env = EnvCfg::spread(2);
    let mut trainer = Trainer::new(config, env, None, None, 31).unwrap();
    let outcome = trainer.train().unwrap();
    match outcome.status {
        RunStatus::Diverged { step, .. } => assert!(step >= 20 && step <= 300),
        RunStatus::Completed => panic!("expected divergence"),
    }
    // the initial evaluation is retained
    assert!(outcome.metrics.iter().any(|r| r.step == 0));
}

#[test]
fn restore_continues_identically() {
    let total = 1200;
    let split = 600;
    let env = EnvCfg::spread(2);
    let seed = 41;
    let config = small_config(Algorithm::Decentralized, Setting::Cooperative, total);

    let mut full = Trainer::new(config.clone(), env.clone(), None, None, seed).unwrap();
    let mut snapshot: Option<TrainerState> = None;
    let full_outcome = full
        .train_with(Some(split), |t, step| {
            if step == split {
                snapshot = Some(t.snapshot());
            }
            Ok(())
        })
        .unwrap();
    let snapshot = snapshot.expect("snapshot taken at the split point");

    let mut resumed = Trainer::restore(config, env, None, None, seed, snapshot).unwrap();
    let resumed_outcome = resumed.train().unwrap();

    let tail: Vec<String> = full_outcome
        .metrics
        .iter()
        .filter(|r| r.step > split)
        .map(|r| r.to_csv())
        .collect();
    let resumed_rows: Vec<String> = resumed_outcome.metrics.iter().map(|r| r.to_csv()).collect();
    assert_eq!(resumed_rows, tail);
    assert_eq!(param_bits(&resumed), param_bits(&full));
}
