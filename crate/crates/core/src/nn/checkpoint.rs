//! Self-describing binary containers for network parameters and optimizer
//! state.
//!
//! Layout (all multi-byte fields little-endian, declared by an endianness
//! tag so readers can reject foreign byte order):
//!
//! ```text
//! network:  magic "MLPC" | version u16 | endian u8 (1 = LE) |
//!           hidden_act u8 | output_act u8 |
//!           input_dim u32 | output_dim u32 | n_hidden u32 | hidden u32 * |
//!           count u64 | values f64 * (canonical flat layout)
//! optimizer: magic "ADMS" | version u16 | endian u8 | pad u8 |
//!            step_count u64 | lr f64 | beta1 f64 | beta2 f64 | eps f64 |
//!            len u64 | first_moment f64 * | second_moment f64 *
//! ```
//!
//! Scalars are stored as their `f64` value; `f32 -> f64 -> f32` is exact, so
//! round trips are bit-exact for both supported scalar types.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::nn::{AdamState, HiddenActivation, MlpSpec, OutputActivation, ParamVector};
use crate::scalar::Real;

pub const MLP_MAGIC: [u8; 4] = *b"MLPC";
pub const ADAM_MAGIC: [u8; 4] = *b"ADMS";
pub const FORMAT_VERSION: u16 = 1;
pub const ENDIAN_LITTLE: u8 = 1;

fn write_u16<W: Write>(w: &mut W, v: u16) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}
fn write_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}
fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}
fn write_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_bytes<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    Ok(u16::from_le_bytes(read_bytes(r)?))
}
fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_bytes(r)?))
}
fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_bytes(r)?))
}
fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_bytes(r)?))
}

fn hidden_act_tag(a: HiddenActivation) -> u8 {
    match a {
        HiddenActivation::Relu => 0,
        HiddenActivation::Tanh => 1,
    }
}
fn hidden_act_from(tag: u8) -> Result<HiddenActivation> {
    match tag {
        0 => Ok(HiddenActivation::Relu),
        1 => Ok(HiddenActivation::Tanh),
        other => Err(Error::InvalidFormat(format!(
            "unknown hidden activation tag {other}"
        ))),
    }
}
fn output_act_tag(a: OutputActivation) -> u8 {
    match a {
        OutputActivation::Identity => 0,
        OutputActivation::Tanh => 1,
    }
}
fn output_act_from(tag: u8) -> Result<OutputActivation> {
    match tag {
        0 => Ok(OutputActivation::Identity),
        1 => Ok(OutputActivation::Tanh),
        other => Err(Error::InvalidFormat(format!(
            "unknown output activation tag {other}"
        ))),
    }
}

fn check_header<R: Read>(r: &mut R, magic: [u8; 4], what: &str) -> Result<()> {
    let got: [u8; 4] = read_bytes(r)?;
    if got != magic {
        return Err(Error::InvalidFormat(format!("bad {what} magic {got:?}")));
    }
    let version = read_u16(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::InvalidFormat(format!(
            "unsupported {what} version {version}"
        )));
    }
    let endian = read_bytes::<R, 1>(r)?[0];
    if endian != ENDIAN_LITTLE {
        return Err(Error::InvalidFormat(format!(
            "unsupported {what} endianness tag {endian}"
        )));
    }
    Ok(())
}

/// Writes a network container.
pub fn write_mlp<T: Real, W: Write>(
    w: &mut W,
    spec: &MlpSpec,
    params: &ParamVector<T>,
) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::dim("checkpoint params", spec.param_count(), params.len()));
    }
    w.write_all(&MLP_MAGIC)?;
    write_u16(w, FORMAT_VERSION)?;
    w.write_all(&[ENDIAN_LITTLE])?;
    w.write_all(&[hidden_act_tag(spec.hidden_activation)])?;
    w.write_all(&[output_act_tag(spec.output_activation)])?;
    write_u32(w, spec.input_dim as u32)?;
    write_u32(w, spec.output_dim as u32)?;
    write_u32(w, spec.hidden_dims.len() as u32)?;
    for &h in &spec.hidden_dims {
        write_u32(w, h as u32)?;
    }
    write_u64(w, params.len() as u64)?;
    for &v in params.as_slice() {
        write_f64(w, v.to_f64().expect("scalar convertible to f64"))?;
    }
    Ok(())
}

/// Reads a network container, validating structure and finiteness.
pub fn read_mlp<T: Real, R: Read>(r: &mut R) -> Result<(MlpSpec, ParamVector<T>)> {
    check_header(r, MLP_MAGIC, "network")?;
    let hidden_act = hidden_act_from(read_bytes::<R, 1>(r)?[0])?;
    let output_act = output_act_from(read_bytes::<R, 1>(r)?[0])?;
    let input_dim = read_u32(r)? as usize;
    let output_dim = read_u32(r)? as usize;
    let n_hidden = read_u32(r)? as usize;
    if n_hidden > 1024 {
        return Err(Error::InvalidFormat(format!(
            "implausible hidden layer count {n_hidden}"
        )));
    }
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(read_u32(r)? as usize);
    }
    let spec = MlpSpec::new(input_dim, hidden, output_dim, hidden_act, output_act)
        .map_err(|e| Error::InvalidFormat(format!("invalid stored spec: {e}")))?;
    let count = read_u64(r)? as usize;
    if count != spec.param_count() {
        return Err(Error::InvalidFormat(format!(
            "parameter count {count} does not match spec count {}",
            spec.param_count()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let v = read_f64(r)?;
        if !v.is_finite() {
            return Err(Error::InvalidFormat(format!(
                "non-finite parameter at index {i}"
            )));
        }
        values.push(T::of(v));
    }
    Ok((spec, ParamVector::from_vec(values)))
}

/// Writes an optimizer-state container.
pub fn write_adam<T: Real, W: Write>(w: &mut W, state: &AdamState<T>) -> Result<()> {
    w.write_all(&ADAM_MAGIC)?;
    write_u16(w, FORMAT_VERSION)?;
    w.write_all(&[ENDIAN_LITTLE, 0])?;
    write_u64(w, state.step_count)?;
    let f = |v: T| v.to_f64().expect("scalar convertible to f64");
    write_f64(w, f(state.learning_rate))?;
    write_f64(w, f(state.beta1))?;
    write_f64(w, f(state.beta2))?;
    write_f64(w, f(state.epsilon))?;
    write_u64(w, state.first_moment.len() as u64)?;
    for &v in state.first_moment.as_slice() {
        write_f64(w, f(v))?;
    }
    for &v in state.second_moment.as_slice() {
        write_f64(w, f(v))?;
    }
    Ok(())
}

/// Reads an optimizer-state container.
pub fn read_adam<T: Real, R: Read>(r: &mut R) -> Result<AdamState<T>> {
    check_header(r, ADAM_MAGIC, "optimizer")?;
    let _pad = read_bytes::<R, 1>(r)?;
    let step_count = read_u64(r)?;
    let learning_rate = T::of(read_f64(r)?);
    let beta1 = T::of(read_f64(r)?);
    let beta2 = T::of(read_f64(r)?);
    let epsilon = T::of(read_f64(r)?);
    let len = read_u64(r)? as usize;
    let mut read_vec = |what: &str| -> Result<ParamVector<T>> {
        let mut values = Vec::with_capacity(len);
        for i in 0..len {
            let v = read_f64(r)?;
            if !v.is_finite() {
                return Err(Error::InvalidFormat(format!(
                    "non-finite {what} entry at index {i}"
                )));
            }
            values.push(T::of(v));
        }
        Ok(ParamVector::from_vec(values))
    };
    let first_moment = read_vec("first moment")?;
    let second_moment = read_vec("second moment")?;
    Ok(AdamState {
        first_moment,
        second_moment,
        step_count,
        learning_rate,
        beta1,
        beta2,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp_init;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_truncated_and_foreign_data() {
        let spec = MlpSpec::new(
            2,
            vec![3],
            1,
            HiddenActivation::Relu,
            OutputActivation::Identity,
        )
        .unwrap();
        let params = ParamVector::<f64>::zeros(spec.param_count());
        let mut buf = Vec::new();
        write_mlp(&mut buf, &spec, &params).unwrap();

        let truncated = &buf[..buf.len() - 3];
        assert!(read_mlp::<f64, _>(&mut &truncated[..]).is_err());

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(read_mlp::<f64, _>(&mut &bad_magic[..]).is_err());

        let mut bad_endian = buf.clone();
        bad_endian[6] = 2;
        assert!(read_mlp::<f64, _>(&mut &bad_endian[..]).is_err());
    }

    #[test]
    fn adam_round_trip_preserves_step_count() {
        let mut state = AdamState::<f64>::new(5, 3e-4);
        state.step_count = 1234;
        state.first_moment.as_mut_slice()[2] = -0.125;
        state.second_moment.as_mut_slice()[4] = 0.5;
        let mut buf = Vec::new();
        write_adam(&mut buf, &state).unwrap();
        let back = read_adam::<f64, _>(&mut &buf[..]).unwrap();
        assert_eq!(back, state);
    }

    proptest! {
        #[test]
        fn mlp_round_trip_is_bit_exact(
            input in 1_usize..5,
            hidden in proptest::collection::vec(1_usize..7, 0..3),
            output in 1_usize..4,
            seed in 0_u64..500,
            relu in proptest::bool::ANY,
            tanh_out in proptest::bool::ANY,
        ) {
            let spec = MlpSpec::new(
                input,
                hidden,
                output,
                if relu { HiddenActivation::Relu } else { HiddenActivation::Tanh },
                if tanh_out { OutputActivation::Tanh } else { OutputActivation::Identity },
            ).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params: ParamVector<f64> = mlp_init(&spec, &mut rng);

            let mut buf = Vec::new();
            write_mlp(&mut buf, &spec, &params).unwrap();
            let (spec_back, params_back) = read_mlp::<f64, _>(&mut &buf[..]).unwrap();

            prop_assert_eq!(spec_back, spec);
            let bits_a: Vec<u64> = params.as_slice().iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u64> = params_back.as_slice().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(bits_a, bits_b);
        }
    }
}
