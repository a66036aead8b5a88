//! Multilayer perceptron shapes and their evaluation, either on the tape or
//! directly on f64 slices.
//!
//! The same [`MlpSpec`] drives both the training path (tape nodes, weights
//! possibly generated by another network) and the inference hot path (plain
//! f64). Both evaluators accumulate dot products in the same index order, so
//! their outputs agree bit for bit.

use super::{Tape, Value};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    SoftplusShifted,
    Linear,
}

impl Activation {
    fn apply_f64(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::SoftplusShifted => {
                x.max(0.0) + (-x.abs()).exp().ln_1p() - std::f64::consts::LN_2
            }
            Activation::Linear => x,
        }
    }

    fn apply_tape(self, tape: &mut Tape, x: Value) -> Value {
        match self {
            Activation::Tanh => tape.tanh(x),
            Activation::SoftplusShifted => tape.softplus_shifted(x),
            Activation::Linear => x,
        }
    }
}

/// Widths and activations of a fully connected network.
///
/// `widths` lists the input width followed by each layer's output width;
/// `activations` has one entry per layer. Weight layout is layer-major, each
/// layer storing its `out x in` matrix row-major followed by `out` biases
/// when `bias` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub bias: bool,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>, bias: bool) -> Self {
        assert!(widths.len() >= 2, "need at least one layer");
        assert!(widths.iter().all(|&w| w > 0), "widths must be positive");
        assert_eq!(
            activations.len(),
            widths.len() - 1,
            "one activation per layer"
        );
        MlpSpec {
            widths,
            activations,
            bias,
        }
    }

    /// Hidden layers use tanh; the output layer uses `output` activation.
    pub fn tanh_stack(widths: Vec<usize>, output: Activation, bias: bool) -> Self {
        let layers = widths.len() - 1;
        let mut acts = vec![Activation::Tanh; layers];
        acts[layers - 1] = output;
        MlpSpec::new(widths, acts, bias)
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Total number of weights (plus biases when enabled).
    pub fn param_count(&self) -> usize {
        self.widths
            .windows(2)
            .map(|w| w[0] * w[1] + if self.bias { w[1] } else { 0 })
            .sum()
    }

    /// Glorot-uniform initialization.
    pub fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.init_params_with_output_gain(rng, 1.0)
    }

    /// Glorot-uniform with the final layer scaled by `gain`. Weight
    /// generators start with a small gain so the network they emit begins
    /// in its active region instead of saturated.
    pub fn init_params_with_output_gain(&self, rng: &mut ChaCha8Rng, gain: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        let last = self.num_layers() - 1;
        for (layer, w) in self.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let mut bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            if layer == last {
                bound *= gain;
            }
            for _ in 0..fan_in * fan_out {
                out.push((2.0 * rng.random::<f64>() - 1.0) * bound);
            }
            if self.bias {
                out.extend(std::iter::repeat_n(0.0, fan_out));
            }
        }
        out
    }

    /// Evaluates on the tape. `weights` may be parameter leaves or values
    /// generated by another network; length must equal [`param_count`].
    ///
    /// [`param_count`]: MlpSpec::param_count
    pub fn apply(&self, tape: &mut Tape, weights: &[Value], input: &[Value]) -> Vec<Value> {
        assert_eq!(weights.len(), self.param_count(), "weight count mismatch");
        assert_eq!(input.len(), self.input_width(), "input width mismatch");
        let mut x = input.to_vec();
        let mut off = 0;
        for (layer, w) in self.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let act = self.activations[layer];
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let row = &weights[off + o * fan_in..off + (o + 1) * fan_in];
                let mut pre = tape.dot(&x, row);
                if self.bias {
                    let b = weights[off + fan_in * fan_out + o];
                    pre = tape.add(pre, b);
                }
                next.push(act.apply_tape(tape, pre));
            }
            off += fan_in * fan_out + if self.bias { fan_out } else { 0 };
            x = next;
        }
        x
    }

    /// Plain f64 evaluation with the same accumulation order as [`apply`].
    ///
    /// [`apply`]: MlpSpec::apply
    pub fn forward_f64(&self, weights: &[f64], input: &[f64]) -> Vec<f64> {
        assert_eq!(weights.len(), self.param_count(), "weight count mismatch");
        assert_eq!(input.len(), self.input_width(), "input width mismatch");
        let mut x = input.to_vec();
        let mut off = 0;
        for (layer, w) in self.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let act = self.activations[layer];
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let row = &weights[off + o * fan_in..off + (o + 1) * fan_in];
                let mut pre: f64 = x.iter().zip(row).map(|(a, b)| a * b).sum();
                if self.bias {
                    pre += weights[off + fan_in * fan_out + o];
                }
                next.push(act.apply_f64(pre));
            }
            off += fan_in * fan_out + if self.bias { fan_out } else { 0 };
            x = next;
        }
        x
    }
}
