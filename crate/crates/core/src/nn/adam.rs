//! Adam optimizer over flat parameter vectors.

use crate::error::{Error, Result};
use crate::nn::ParamVector;
use crate::scalar::Real;

/// Optimizer state for one parameter vector. Moment arrays always match the
/// parameter length.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub first_moment: ParamVector<T>,
    pub second_moment: ParamVector<T>,
    pub step_count: u64,
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Real> AdamState<T> {
    /// Fresh state with the conventional betas (0.9, 0.999) and epsilon 1e-8.
    pub fn new(param_len: usize, learning_rate: T) -> Self {
        Self {
            first_moment: ParamVector::zeros(param_len),
            second_moment: ParamVector::zeros(param_len),
            step_count: 0,
            learning_rate,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
        }
    }

    fn validate(&self, param_len: usize) -> Result<()> {
        if self.first_moment.len() != param_len || self.second_moment.len() != param_len {
            return Err(Error::dim(
                "adam moments",
                param_len,
                self.first_moment.len(),
            ));
        }
        let in_unit = |b: T| b >= T::zero() && b < T::one();
        if !in_unit(self.beta1) || !in_unit(self.beta2) || self.epsilon <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "adam hyperparameters out of range: beta1={}, beta2={}, epsilon={}",
                self.beta1, self.beta2, self.epsilon
            )));
        }
        Ok(())
    }
}

/// One Adam update with bias correction, in place.
///
/// Rejects non-finite gradient entries so a diverged loss surfaces as an
/// error instead of poisoning the parameters.
pub fn adam_step_in_place<T: Real>(
    params: &mut ParamVector<T>,
    grads: &ParamVector<T>,
    state: &mut AdamState<T>,
) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::dim("adam gradient", params.len(), grads.len()));
    }
    state.validate(params.len())?;
    if let Some(idx) = grads.as_slice().iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!(
            "gradient entry {idx} is {}",
            grads.as_slice()[idx]
        )));
    }

    let t = state.step_count + 1;
    let b1 = state.beta1;
    let b2 = state.beta2;
    let bias1 = T::one() - b1.powi(t as i32);
    let bias2 = T::one() - b2.powi(t as i32);
    let lr = state.learning_rate;
    let eps = state.epsilon;

    let m = state.first_moment.as_mut_slice();
    let v = state.second_moment.as_mut_slice();
    let p = params.as_mut_slice();
    for i in 0..p.len() {
        let g = grads.as_slice()[i];
        m[i] = b1 * m[i] + (T::one() - b1) * g;
        v[i] = b2 * v[i] + (T::one() - b2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
    state.step_count = t;
    Ok(())
}

/// Value-semantics Adam step: returns the updated parameters and state.
pub fn adam_step<T: Real>(
    params: &ParamVector<T>,
    grads: &ParamVector<T>,
    state: &AdamState<T>,
) -> Result<(ParamVector<T>, AdamState<T>)> {
    let mut new_params = params.clone();
    let mut new_state = state.clone();
    adam_step_in_place(&mut new_params, grads, &mut new_state)?;
    Ok((new_params, new_state))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let params = ParamVector::from_vec(vec![1.5_f64, -0.25, 0.0]);
        let grads = ParamVector::zeros(3);
        let state = AdamState::new(3, 1e-3);
        let (new_params, new_state) = adam_step(&params, &grads, &state).unwrap();
        assert_eq!(new_params, params);
        assert_eq!(new_state.step_count, 1);
    }

    #[test]
    fn first_step_is_bias_corrected() {
        let params = ParamVector::from_vec(vec![0.0_f64, 2.0]);
        let grads = ParamVector::from_vec(vec![0.4_f64, -3.0]);
        let lr = 1e-3;
        let state = AdamState::new(2, lr);
        let (new_params, _) = adam_step(&params, &grads, &state).unwrap();

        // Independent evaluation of the step-1 Adam formula.
        for i in 0..2 {
            let g: f64 = grads.as_slice()[i];
            let (b1, b2) = (0.9_f64, 0.999_f64);
            let m_hat = ((1.0 - b1) * g) / (1.0 - b1);
            let v_hat = ((1.0 - b2) * g * g) / (1.0 - b2);
            let expected = params.as_slice()[i] - lr * m_hat / (v_hat.sqrt() + 1e-8);
            assert_eq!(new_params.as_slice()[i], expected);
            // Magnitude of the first step is ~lr in the direction of -sign(g).
            let delta = new_params.as_slice()[i] - params.as_slice()[i];
            assert!((delta.abs() - lr).abs() < 1e-6);
            assert_eq!(delta.signum(), -g.signum());
        }
    }

    #[test]
    fn deterministic_given_identical_state() {
        let params = ParamVector::from_vec(vec![0.3_f64, -0.9, 4.0]);
        let grads = ParamVector::from_vec(vec![0.01_f64, 0.7, -0.2]);
        let state = AdamState::new(3, 1e-2);
        let a = adam_step(&params, &grads, &state).unwrap();
        let b = adam_step(&params, &grads, &state).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let params = ParamVector::from_vec(vec![0.0_f64]);
        let grads = ParamVector::from_vec(vec![f64::NAN]);
        let state = AdamState::new(1, 1e-3);
        assert!(adam_step(&params, &grads, &state).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        let params = ParamVector::from_vec(vec![0.0_f64, 1.0]);
        let grads = ParamVector::from_vec(vec![0.0_f64]);
        let state = AdamState::new(2, 1e-3);
        assert!(adam_step(&params, &grads, &state).is_err());
    }

    #[test]
    fn functional_and_in_place_agree() {
        let params = ParamVector::from_vec(vec![1.0_f64, -1.0]);
        let grads = ParamVector::from_vec(vec![0.5_f64, 0.25]);
        let state = AdamState::new(2, 5e-3);
        let (functional, func_state) = adam_step(&params, &grads, &state).unwrap();
        let mut p = params.clone();
        let mut s = state.clone();
        adam_step_in_place(&mut p, &grads, &mut s).unwrap();
        assert_eq!(functional, p);
        assert_eq!(func_state, s);
    }
}
