// Temporary hyperparameter scratchpad; not part of the deliverable surface.
use marl_core::agents::{evaluate, Algorithm, Policy, RunStatus, Setting, Trainer, TrainerConfig};
use marl_core::comms::build_cooperative;
use marl_core::nn::{mlp_init, HiddenActivation, MlpSpec, OutputActivation};
use marl_core::{CommSched, EnvCfg};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_baseline(n: usize, env: &EnvCfg, episodes: usize) -> f64 {
    let mut scores = Vec::new();
    for seed in [1001, 1002, 1003] {
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        let policies: Vec<Policy> = (0..n)
            .map(|i| {
                let spec = MlpSpec::new(
                    env.observation_dim(i),
                    vec![64, 64],
                    2 * n,
                    HiddenActivation::Relu,
                    OutputActivation::Tanh,
                )
                .unwrap();
                Policy {
                    params: mlp_init(&spec, &mut init_rng),
                    spec,
                    own_action_slice: 2 * i..2 * i + 2,
                    outputs_joint_action: true,
                }
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 50);
        let report = evaluate(&policies, env, episodes, &mut rng).unwrap();
        scores.push(report.mean_per_agent[0]);
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let steps: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let interval: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(25);
    let actor_lr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let batch: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(128);
    let n = 2usize;

    let env = EnvCfg::spread(n);
    let baseline = random_baseline(n, &env, 100);
    let threshold = baseline + 0.3 * baseline.abs();
    println!("baseline {baseline:.3}  threshold {threshold:.3}");

    let only: Option<usize> = args.get(6).and_then(|s| s.parse().ok());
    for (idx, algorithm) in [
        Algorithm::Maddpg,
        Algorithm::Decentralized,
        Algorithm::HardConsensus,
        Algorithm::SoftConsensus,
    ]
    .into_iter()
    .enumerate()
    {
        if only.is_some_and(|o| o != idx) {
            continue;
        }
        for seed in [1u64, 2, 3] {
            let t0 = std::time::Instant::now();
            let mut config = TrainerConfig::desk(algorithm, Setting::Cooperative, steps);
            config.learning_interval = interval;
            config.actor_lr = actor_lr;
            config.critic_lr = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(3e-3);
            config.minibatch_size = batch;
            config.eval_interval = steps / 10;
            config.eval_episodes = 100;
            let comm = algorithm.is_networked().then(|| {
                CommSched::Constant(build_cooperative(n, 0.001).unwrap())
            });
            let mut trainer = Trainer::new(config, env.clone(), None, comm, seed).unwrap();
            let outcome = trainer.train().unwrap();
            let last = outcome.metrics.last().unwrap();
            let ok = last.mean_eval_score >= threshold && outcome.status == RunStatus::Completed;
            let curve: Vec<String> = outcome
                .metrics
                .iter()
                .step_by(n)
                .map(|r| format!("{:.1}", r.mean_eval_score))
                .collect();
            println!(
                "{:<15} seed {seed}: final {:>8.3} {} [{}] ({:.1?})",
                algorithm.name(),
                last.mean_eval_score,
                if ok { "PASS" } else { "fail" },
                curve.join(" "),
                t0.elapsed(),
            );
        }
    }
}
