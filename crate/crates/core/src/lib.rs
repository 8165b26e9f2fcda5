//! Multi-agent deterministic policy gradient training on 2-D particle
//! environments, with a centralized trainer and three fully-decentralized
//! variants: surrogate joint policies, and networked critics with hard or
//! soft consensus over a right-stochastic communication matrix.
//!
//! The numeric core (`nn`, `env`, `replay`, `comms`) is generic over the
//! scalar type via [`scalar::Real`]; the trainers and everything downstream
//! run at `f64` through the aliases below.

pub mod agents;
pub mod comms;
pub mod env;
pub mod error;
pub mod nn;
pub mod replay;
pub mod scalar;

pub use error::{Error, Result};

/// Concrete `f64` aliases — the precision the trainers and CLI run at.
pub type ParamVec = nn::ParamVector<f64>;
pub type AdamOpt = nn::AdamState<f64>;
pub type EnvCfg = env::EnvConfig<f64>;
pub type World = env::WorldState<f64>;
pub type Observation = env::AgentObservation<f64>;
pub type Action = env::ActionVector<f64>;
pub type Vec2f = env::Vec2<f64>;
pub type Transition = replay::Transition<f64>;
pub type Buffer = replay::ReplayBuffer<f64>;
pub type Comm = comms::CommMatrix<f64>;
pub type CommSched = comms::CommSchedule<f64>;
pub type ConsensusCfg = comms::ConsensusConfig<f64>;
