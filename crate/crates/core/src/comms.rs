//! Communication matrices and the consensus mechanisms built on them.
//!
//! A communication matrix is right-stochastic: entry `(i, j) > 0` means
//! agent `i` receives from agent `j`. Only critic parameters ever travel
//! over it; actors are never exchanged.

use std::io::Read;

use crate::error::{Error, Result};
use crate::nn::{param_weighted_sum, ParamVector};
use crate::scalar::Real;

/// Row-major N x N right-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CommMatrix<T> {
    entries: Vec<T>,
    n_agents: usize,
}

impl<T: Real> CommMatrix<T> {
    /// Builds from row-major entries, validating stochasticity.
    pub fn from_flat(n_agents: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != n_agents * n_agents {
            return Err(Error::dim(
                "comm matrix entries",
                n_agents * n_agents,
                entries.len(),
            ));
        }
        let m = Self { entries, n_agents };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(n_agents: usize) -> Self {
        let mut entries = vec![T::zero(); n_agents * n_agents];
        for i in 0..n_agents {
            entries[i * n_agents + i] = T::one();
        }
        Self { entries, n_agents }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n_agents + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n_agents..(i + 1) * self.n_agents]
    }

    /// Checks entries >= 0 and row sums within tolerance of 1. The tolerance
    /// is 1e-12 or a small multiple of the scalar epsilon, whichever is
    /// larger, so `f32` matrices validate too.
    pub fn validate(&self) -> Result<()> {
        let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
        for i in 0..self.n_agents {
            let mut sum = T::zero();
            for j in 0..self.n_agents {
                let e = self.get(i, j);
                if !(e >= T::zero()) {
                    return Err(Error::InvalidConfig(format!(
                        "comm matrix entry ({i},{j}) = {e} is negative or NaN"
                    )));
                }
                sum += e;
            }
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidConfig(format!(
                    "comm matrix row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(())
    }
}

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if eta < T::zero() || eta > T::one() {
        return Err(Error::InvalidConfig(format!(
            "communication hyperparameter eta must lie in [0, 1], got {eta}"
        )));
    }
    Ok(())
}

/// Fully-connected cooperative matrix: diagonal `1 - eta`, off-diagonal
/// `eta / (N - 1)`.
pub fn build_cooperative<T: Real>(n_agents: usize, eta: T) -> Result<CommMatrix<T>> {
    if n_agents < 2 {
        return Err(Error::InvalidConfig(
            "cooperative comm matrix needs at least 2 agents".into(),
        ));
    }
    check_eta(eta)?;
    let off = eta / T::of((n_agents - 1) as f64);
    let diag = T::one() - eta;
    let mut entries = Vec::with_capacity(n_agents * n_agents);
    for i in 0..n_agents {
        for j in 0..n_agents {
            entries.push(if i == j { diag } else { off });
        }
    }
    CommMatrix::from_flat(n_agents, entries)
}

/// 1-vs-N mixed matrix: the adversary (index 0) is isolated in its own
/// row/column; the team block is the cooperative matrix over the remaining
/// agents.
pub fn build_one_vs_n<T: Real>(n_total: usize, eta: T) -> Result<CommMatrix<T>> {
    if n_total < 3 {
        return Err(Error::InvalidConfig(
            "1-vs-N comm matrix needs an adversary plus at least 2 team members".into(),
        ));
    }
    check_eta(eta)?;
    let team = build_cooperative::<T>(n_total - 1, eta)?;
    let mut entries = vec![T::zero(); n_total * n_total];
    entries[0] = T::one();
    for i in 0..n_total - 1 {
        for j in 0..n_total - 1 {
            entries[(i + 1) * n_total + (j + 1)] = team.get(i, j);
        }
    }
    CommMatrix::from_flat(n_total, entries)
}

/// Sparse ring matrix: diagonal `1 - eta`, superdiagonal `eta`, and the
/// cyclic closure entry `(N-1, 0) = eta`.
pub fn build_ring<T: Real>(n_agents: usize, eta: T) -> Result<CommMatrix<T>> {
    if n_agents < 2 {
        return Err(Error::InvalidConfig(
            "ring comm matrix needs at least 2 agents".into(),
        ));
    }
    check_eta(eta)?;
    let mut entries = vec![T::zero(); n_agents * n_agents];
    for i in 0..n_agents {
        entries[i * n_agents + i] = T::one() - eta;
        entries[i * n_agents + (i + 1) % n_agents] = entries[i * n_agents + (i + 1) % n_agents] + eta;
    }
    CommMatrix::from_flat(n_agents, entries)
}

/// Consensus hyperparameters: soft-penalty weight `zeta`, communication
/// weight `eta`, and the stabilizing constant added to the penalty
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusConfig<T> {
    pub zeta: T,
    pub eta: T,
    pub denom_floor: T,
}

impl<T: Real> ConsensusConfig<T> {
    pub fn new(zeta: T, eta: T, denom_floor: T) -> Result<Self> {
        if zeta < T::zero() {
            return Err(Error::InvalidConfig("zeta must be >= 0".into()));
        }
        check_eta(eta)?;
        if denom_floor <= T::zero() {
            return Err(Error::InvalidConfig("denom_floor must be > 0".into()));
        }
        Ok(Self {
            zeta,
            eta,
            denom_floor,
        })
    }
}

impl<T: Real> Default for ConsensusConfig<T> {
    fn default() -> Self {
        Self {
            zeta: T::of(0.1),
            eta: T::of(0.001),
            denom_floor: T::of(1e-8),
        }
    }
}

/// Replaces every parameter vector by the matrix-weighted average of the
/// snapshot: `mu_i <- sum_j C(i,j) mu_j`.
///
/// All outputs are computed from the same input snapshot, and zero-weight
/// terms are skipped, so `C = I` returns the inputs bit-for-bit.
pub fn hard_consensus<T: Real>(
    critic_params: &[ParamVector<T>],
    c: &CommMatrix<T>,
) -> Result<Vec<ParamVector<T>>> {
    if critic_params.len() != c.n_agents() {
        return Err(Error::dim(
            "hard consensus vectors",
            c.n_agents(),
            critic_params.len(),
        ));
    }
    (0..c.n_agents())
        .map(|i| param_weighted_sum(c.row(i), critic_params))
        .collect()
}

/// Consensus penalty for one agent and its gradient with respect to the
/// agent's own parameters:
///
/// ```text
/// penalty  = zeta * sum_j row[j] * |own - mu_j|^2 / (|mu_j|^2 + floor)
/// gradient = 2 zeta * sum_j row[j] * (own - mu_j) / (|mu_j|^2 + floor)
/// ```
///
/// Neighbors are treated as constants. Terms with `own == mu_j` (in
/// particular the self term) contribute exactly zero and are skipped, which
/// also avoids 0/0 when the floor is disabled.
pub fn soft_penalty<T: Real>(
    own: &ParamVector<T>,
    all_params: &[ParamVector<T>],
    row: &[T],
    zeta: T,
    denom_floor: T,
) -> Result<(T, ParamVector<T>)> {
    if row.len() != all_params.len() {
        return Err(Error::dim("soft penalty row", all_params.len(), row.len()));
    }
    for p in all_params {
        if p.len() != own.len() {
            return Err(Error::dim("soft penalty vectors", own.len(), p.len()));
        }
    }
    if row.iter().any(|w| *w < T::zero()) {
        return Err(Error::InvalidConfig(
            "soft penalty row entries must be >= 0".into(),
        ));
    }

    let mut penalty = T::zero();
    let mut grad = vec![T::zero(); own.len()];
    let two = T::of(2.0);
    for (&w, neighbor) in row.iter().zip(all_params) {
        if w == T::zero() {
            continue;
        }
        let diff_sq = own.dist_sq(neighbor);
        if diff_sq == T::zero() {
            continue;
        }
        let denom = neighbor.norm_sq() + denom_floor;
        penalty += w * diff_sq / denom;
        let scale = two * zeta * w / denom;
        for ((g, &o), &m) in grad.iter_mut().zip(own.as_slice()).zip(neighbor.as_slice()) {
            *g += scale * (o - m);
        }
    }
    Ok((zeta * penalty, ParamVector::from_vec(grad)))
}

/// Communication topology over training time. Shipped experiments use a
/// constant matrix; a callback supports time-varying networks.
pub enum CommSchedule<T> {
    Constant(CommMatrix<T>),
    Varying(Box<dyn Fn(u64) -> CommMatrix<T> + Send>),
}

impl<T: Real> CommSchedule<T> {
    pub fn at(&self, step: u64) -> CommMatrix<T> {
        match self {
            CommSchedule::Constant(m) => m.clone(),
            CommSchedule::Varying(f) => f(step),
        }
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for CommSchedule<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommSchedule::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            CommSchedule::Varying(_) => f.write_str("Varying(..)"),
        }
    }
}

/// Parses the plain-text matrix format: first line N, then N lines of N
/// space-separated reals. Validates stochasticity.
pub fn parse_comm_matrix<T: Real>(text: &str) -> Result<CommMatrix<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::InvalidFormat("empty comm matrix file".into()))?
        .trim()
        .parse()
        .map_err(|e| Error::InvalidFormat(format!("bad matrix size line: {e}")))?;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidFormat(format!("missing matrix row {i}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::InvalidFormat(format!("bad entry in row {i}: {e}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::InvalidFormat(format!(
                "matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        entries.extend(row.into_iter().map(T::of));
    }
    if lines.next().is_some() {
        return Err(Error::InvalidFormat("trailing content after matrix rows".into()));
    }
    CommMatrix::from_flat(n, entries)
}

/// Reads and validates a matrix from a reader (see [`parse_comm_matrix`]).
pub fn read_comm_matrix<T: Real, R: Read>(r: &mut R) -> Result<CommMatrix<T>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_comm_matrix(&text)
}
