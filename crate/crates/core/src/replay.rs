//! Per-agent replay buffers: a fixed-capacity ring of transitions with
//! uniform with-replacement sampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One stored interaction: the agent's own observation, the joint action
/// everyone took, the agent's own reward, and its next observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub local_observation: Vec<T>,
    pub joint_action: Vec<T>,
    pub local_reward: T,
    pub next_local_observation: Vec<T>,
}

/// FIFO ring buffer. Dimensions are pinned by the first pushed transition;
/// later pushes with different shapes are rejected.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    storage: Vec<Transition<T>>,
    write_cursor: usize,
}

impl<T: Real> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be >= 1".into()));
        }
        Ok(Self {
            capacity,
            storage: Vec::new(),
            write_cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends a transition, overwriting the oldest record once full.
    pub fn push(&mut self, t: Transition<T>) -> Result<()> {
        if let Some(first) = self.storage.first() {
            if t.local_observation.len() != first.local_observation.len() {
                return Err(Error::dim(
                    "transition observation",
                    first.local_observation.len(),
                    t.local_observation.len(),
                ));
            }
            if t.joint_action.len() != first.joint_action.len() {
                return Err(Error::dim(
                    "transition joint action",
                    first.joint_action.len(),
                    t.joint_action.len(),
                ));
            }
        }
        if t.local_observation.len() != t.next_local_observation.len() {
            return Err(Error::dim(
                "transition next observation",
                t.local_observation.len(),
                t.next_local_observation.len(),
            ));
        }

        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.write_cursor] = t;
        }
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
        Ok(())
    }

    /// `sample_size` independent uniform draws with replacement over the
    /// current contents. Deterministic given the rng state.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        sample_size: usize,
        rng: &mut R,
    ) -> Result<Vec<&Transition<T>>> {
        if self.storage.is_empty() {
            return Err(Error::InvalidConfig(
                "cannot sample from an empty replay buffer".into(),
            ));
        }
        Ok((0..sample_size)
            .map(|_| &self.storage[rng.gen_range(0..self.storage.len())])
            .collect())
    }

    /// Contents oldest-first; inverse of repeated `push` for any size.
    pub fn iter_in_insertion_order(&self) -> impl Iterator<Item = &Transition<T>> {
        let split = if self.storage.len() < self.capacity {
            0
        } else {
            self.write_cursor
        };
        self.storage[split..].iter().chain(self.storage[..split].iter())
    }

    /// Raw pieces for persistence: (capacity, slots in storage order, cursor).
    pub fn raw_parts(&self) -> (usize, &[Transition<T>], usize) {
        (self.capacity, &self.storage, self.write_cursor)
    }

    /// Rebuilds a buffer from [`Self::raw_parts`] output.
    pub fn from_raw_parts(
        capacity: usize,
        storage: Vec<Transition<T>>,
        write_cursor: usize,
    ) -> Result<Self> {
        if capacity == 0 || storage.len() > capacity || write_cursor >= capacity.max(1) {
            return Err(Error::InvalidConfig(format!(
                "inconsistent replay parts: capacity {capacity}, len {}, cursor {write_cursor}",
                storage.len()
            )));
        }
        Ok(Self {
            capacity,
            storage,
            write_cursor,
        })
    }
}
