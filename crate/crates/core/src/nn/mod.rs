//! Minimal feed-forward networks with exact reverse-mode gradients.
//!
//! Everything here works on a flat [`ParamVector`] whose layout is derived
//! from an [`MlpSpec`]: for each layer, the weight matrix (row-major,
//! `out_dim x in_dim`) followed by the bias vector. That flat layout is the
//! unit of exchange for the consensus routines, so it is part of the
//! checkpoint format and must stay stable.

mod adam;
pub mod checkpoint;

pub use adam::{adam_step, adam_step_in_place, AdamState};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

/// Output-layer activation. `Tanh` bounds every output to (-1, 1), which is
/// what actor networks use for box-constrained actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Identity,
    Tanh,
}

#[derive(Clone, Copy)]
enum Act {
    Relu,
    Tanh,
    Identity,
}

impl Act {
    #[inline]
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Act::Relu => {
                if z > T::zero() {
                    z
                } else {
                    T::zero()
                }
            }
            Act::Tanh => z.tanh(),
            Act::Identity => z,
        }
    }

    /// Derivative given pre-activation `z` and post-activation `a`.
    /// ReLU uses subgradient 0 at z == 0.
    #[inline]
    fn deriv<T: Real>(self, z: T, a: T) -> T {
        match self {
            Act::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Act::Tanh => T::one() - a * a,
            Act::Identity => T::one(),
        }
    }
}

/// Shape and activations of a fully-connected network.
///
/// `hidden_dims` may be empty, giving a single affine layer with the output
/// activation; trainable actor/critic nets always use at least one hidden
/// layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

impl MlpSpec {
    pub fn new(
        input_dim: usize,
        hidden_dims: Vec<usize>,
        output_dim: usize,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig(
                "all network dimensions must be >= 1".to_owned(),
            ));
        }
        Ok(Self {
            input_dim,
            hidden_dims,
            output_dim,
            hidden_activation,
            output_activation,
        })
    }

    /// (in_dim, out_dim) for each layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output_dim));
        dims
    }

    /// Total parameter count: sum over layers of `in*out + out`.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|&(i, o)| i * o + o)
            .sum()
    }
}

/// Flat parameter store for one network, in the canonical layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<T> {
    values: Vec<T>,
}

impl<T: Real> ParamVector<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Squared Euclidean norm of the flat vector.
    pub fn norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    /// Squared Euclidean distance to another vector of the same length.
    pub fn dist_sq(&self, other: &Self) -> T {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()
    }
}

/// Initializes parameters for `spec`: weights uniform in
/// `[-1/sqrt(fan_in), +1/sqrt(fan_in)]` per layer, biases zero.
/// Deterministic given the rng state.
pub fn mlp_init<T: Real, R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> ParamVector<T> {
    let mut values = Vec::with_capacity(spec.param_count());
    for (in_dim, out_dim) in spec.layer_dims() {
        let limit = 1.0 / (in_dim as f64).sqrt();
        for _ in 0..in_dim * out_dim {
            values.push(T::of(rng.gen_range(-limit..limit)));
        }
        for _ in 0..out_dim {
            values.push(T::zero());
        }
    }
    ParamVector::from_vec(values)
}

fn check_shapes<T: Real>(
    params: &ParamVector<T>,
    spec: &MlpSpec,
    input: &[T],
) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::dim("param vector", spec.param_count(), params.len()));
    }
    if input.len() != spec.input_dim {
        return Err(Error::dim("network input", spec.input_dim, input.len()));
    }
    Ok(())
}

#[inline]
fn act_for_layer(spec: &MlpSpec, layer: usize, n_layers: usize) -> Act {
    if layer + 1 == n_layers {
        match spec.output_activation {
            OutputActivation::Identity => Act::Identity,
            OutputActivation::Tanh => Act::Tanh,
        }
    } else {
        match spec.hidden_activation {
            HiddenActivation::Relu => Act::Relu,
            HiddenActivation::Tanh => Act::Tanh,
        }
    }
}

/// Evaluates the network. Pure: repeated calls agree bitwise.
pub fn mlp_forward<T: Real>(
    params: &ParamVector<T>,
    spec: &MlpSpec,
    input: &[T],
) -> Result<Vec<T>> {
    check_shapes(params, spec, input)?;
    let dims = spec.layer_dims();
    let n_layers = dims.len();
    let p = params.as_slice();

    let mut activation = input.to_vec();
    let mut offset = 0;
    for (layer, &(in_dim, out_dim)) in dims.iter().enumerate() {
        let act = act_for_layer(spec, layer, n_layers);
        let weights = &p[offset..offset + in_dim * out_dim];
        let biases = &p[offset + in_dim * out_dim..offset + in_dim * out_dim + out_dim];
        let mut next = Vec::with_capacity(out_dim);
        for o in 0..out_dim {
            let row = &weights[o * in_dim..(o + 1) * in_dim];
            let mut z = biases[o];
            for (w, a) in row.iter().zip(&activation) {
                z = z + *w * *a;
            }
            next.push(act.apply(z));
        }
        activation = next;
        offset += in_dim * out_dim + out_dim;
    }
    Ok(activation)
}

/// Reverse-mode gradients of `cotangent . output` with respect to the
/// parameters and the input. Exact up to floating-point rounding.
pub fn mlp_backward<T: Real>(
    params: &ParamVector<T>,
    spec: &MlpSpec,
    input: &[T],
    output_cotangent: &[T],
) -> Result<(ParamVector<T>, Vec<T>)> {
    check_shapes(params, spec, input)?;
    if output_cotangent.len() != spec.output_dim {
        return Err(Error::dim(
            "output cotangent",
            spec.output_dim,
            output_cotangent.len(),
        ));
    }

    let dims = spec.layer_dims();
    let n_layers = dims.len();
    let p = params.as_slice();

    // Forward pass keeping pre- and post-activations for every layer.
    let mut pre: Vec<Vec<T>> = Vec::with_capacity(n_layers);
    let mut post: Vec<Vec<T>> = Vec::with_capacity(n_layers);
    {
        let mut activation: &[T] = input;
        let mut offset = 0;
        for (layer, &(in_dim, out_dim)) in dims.iter().enumerate() {
            let act = act_for_layer(spec, layer, n_layers);
            let weights = &p[offset..offset + in_dim * out_dim];
            let biases = &p[offset + in_dim * out_dim..offset + in_dim * out_dim + out_dim];
            let mut z_vec = Vec::with_capacity(out_dim);
            let mut a_vec = Vec::with_capacity(out_dim);
            for o in 0..out_dim {
                let row = &weights[o * in_dim..(o + 1) * in_dim];
                let mut z = biases[o];
                for (w, a) in row.iter().zip(activation) {
                    z = z + *w * *a;
                }
                z_vec.push(z);
                a_vec.push(act.apply(z));
            }
            pre.push(z_vec);
            post.push(a_vec);
            activation = post.last().unwrap();
            offset += in_dim * out_dim + out_dim;
        }
    }

    // Layer parameter offsets, then walk backwards.
    let mut offsets = Vec::with_capacity(n_layers);
    {
        let mut offset = 0;
        for &(in_dim, out_dim) in &dims {
            offsets.push(offset);
            offset += in_dim * out_dim + out_dim;
        }
    }

    let mut grad = vec![T::zero(); params.len()];
    let mut delta = output_cotangent.to_vec();
    for layer in (0..n_layers).rev() {
        let (in_dim, out_dim) = dims[layer];
        let act = act_for_layer(spec, layer, n_layers);
        let offset = offsets[layer];
        let weights = &p[offset..offset + in_dim * out_dim];
        let below: &[T] = if layer == 0 { input } else { &post[layer - 1] };

        let mut prev_delta = vec![T::zero(); in_dim];
        for o in 0..out_dim {
            let dz = delta[o] * act.deriv(pre[layer][o], post[layer][o]);
            grad[offset + in_dim * out_dim + o] = dz;
            let row = &weights[o * in_dim..(o + 1) * in_dim];
            for i in 0..in_dim {
                grad[offset + o * in_dim + i] = dz * below[i];
                prev_delta[i] += row[i] * dz;
            }
        }
        delta = prev_delta;
    }

    Ok((ParamVector::from_vec(grad), delta))
}

/// Polyak update `tau*online + (1-tau)*target`, elementwise.
pub fn soft_update<T: Real>(
    target: &ParamVector<T>,
    online: &ParamVector<T>,
    tau: T,
) -> Result<ParamVector<T>> {
    if target.len() != online.len() {
        return Err(Error::dim("soft update", target.len(), online.len()));
    }
    if tau < T::zero() || tau > T::one() {
        return Err(Error::InvalidConfig(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    let one_minus = T::one() - tau;
    let values = online
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&o, &t)| tau * o + one_minus * t)
        .collect();
    Ok(ParamVector::from_vec(values))
}

/// Elementwise `sum_j weights[j] * params[j]`.
///
/// Zero-weight terms are skipped entirely, so a one-hot weight vector
/// returns the selected input bit-for-bit.
pub fn param_weighted_sum<T: Real>(
    weights: &[T],
    params: &[ParamVector<T>],
) -> Result<ParamVector<T>> {
    if weights.len() != params.len() {
        return Err(Error::dim("weighted sum weights", params.len(), weights.len()));
    }
    let len = match params.first() {
        Some(first) => first.len(),
        None => return Ok(ParamVector::from_vec(Vec::new())),
    };
    for p in params {
        if p.len() != len {
            return Err(Error::dim("weighted sum vectors", len, p.len()));
        }
    }

    let mut acc: Option<Vec<T>> = None;
    for (&w, p) in weights.iter().zip(params) {
        if w == T::zero() {
            continue;
        }
        match acc.as_mut() {
            None => acc = Some(p.as_slice().iter().map(|&v| w * v).collect()),
            Some(acc) => {
                for (a, &v) in acc.iter_mut().zip(p.as_slice()) {
                    *a += w * v;
                }
            }
        }
    }
    Ok(ParamVector::from_vec(
        acc.unwrap_or_else(|| vec![T::zero(); len]),
    ))
}
