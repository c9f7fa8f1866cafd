use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::model::SystemConfig;

pub const PRELU_SLOPE: f64 = 0.25;
pub const HIDDEN: [usize; 3] = [768, 576, 384];

pub fn prelu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Fully connected network with PReLU after every layer but the last.
///
/// All weights and biases live in one flat vector; layer `l` stores its
/// row-major `out x in` weight matrix followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub dims: Vec<usize>,
    pub slope: f64,
    /// Multiplies each input element before the first layer.
    pub input_scale: Vec<f64>,
    pub data: Vec<f64>,
}

impl NetworkParams {
    fn count(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            slope: PRELU_SLOPE,
            input_scale: vec![1.0; dims[0]],
            data: vec![0.0; Self::count(dims)],
        }
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights and biases.
    pub fn init(dims: &[usize], seed: u64) -> Self {
        let mut p = Self::zeros(dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..p.layers() {
            let bound = 1.0 / (dims[l] as f64).sqrt();
            let (w, b) = p.layer_mut(l);
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v = rng.random_range(-bound..bound);
            }
        }
        p
    }

    /// Network sized for `config`: `4 T` inputs, `(3 + K_EV + K_TES) T` outputs.
    pub fn for_config(config: &SystemConfig, seed: u64) -> Self {
        let mut dims = vec![4 * config.slots];
        dims.extend(HIDDEN);
        dims.push(output_width(config));
        let mut p = Self::init(&dims, seed);
        p.input_scale = input_scale(config);
        p
    }

    pub fn layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, l: usize) -> usize {
        Self::count(&self.dims[..=l])
    }

    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.dims[l], self.dims[l + 1]);
        let start = self.offset(l);
        let (w, b) = self.data[start..start + i * o + o].split_at(i * o);
        (w, b)
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (i, o) = (self.dims[l], self.dims[l + 1]);
        let start = self.offset(l);
        self.data[start..start + i * o + o].split_at_mut(i * o)
    }

    /// Same shape, all entries zero.
    pub fn zeros_like(&self) -> Self {
        Self { data: vec![0.0; self.data.len()], ..self.clone() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_input(&self, len: usize) -> Result<(), ModelError> {
        if len != self.input_dim() {
            return Err(ModelError::DimensionMismatch { what: "network input".into(), expected: self.input_dim(), found: len });
        }
        Ok(())
    }
}

/// Inputs divided by the device limit of their series.
pub fn input_scale(config: &SystemConfig) -> Vec<f64> {
    let t = config.slots;
    let scales = [
        config.grid_max,
        config.boiler_max * config.eta_boiler,
        config.wind_max * config.wind_units as f64,
        config.pv_max * config.pv_units as f64,
    ];
    scales.iter().flat_map(|&s| std::iter::repeat_n(if s > 0.0 { 1.0 / s } else { 1.0 }, t)).collect()
}

pub fn output_width(config: &SystemConfig) -> usize {
    (3 + config.ev_count() + config.tes_count()) * config.slots
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Input of every layer (scaled network input first).
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activation of every hidden layer.
    pub pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(o, &bias)| {
            let row = &w[o * n..(o + 1) * n];
            bias + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
        })
        .collect()
}

pub fn forward_trace(params: &NetworkParams, input: &[f64]) -> Result<ForwardTrace, ModelError> {
    params.check_input(input.len())?;
    let mut x: Vec<f64> = input.iter().zip(&params.input_scale).map(|(v, s)| v * s).collect();
    let mut inputs = Vec::with_capacity(params.layers());
    let mut pre = Vec::with_capacity(params.layers() - 1);
    for l in 0..params.layers() {
        let (w, b) = params.layer(l);
        let z = affine(w, b, &x);
        inputs.push(x);
        if l + 1 == params.layers() {
            return Ok(ForwardTrace { inputs, pre, output: z });
        }
        x = z.iter().map(|&v| prelu(v, params.slope)).collect();
        pre.push(z);
    }
    unreachable!("a network has at least one layer")
}

/// Raw network output for an unscaled input vector (kWh).
pub fn forward_raw(params: &NetworkParams, input: &[f64]) -> Result<Vec<f64>, ModelError> {
    forward_trace(params, input).map(|t| t.output)
}

/// Accumulates `d loss / d params` into `grad` given `d loss / d output`.
pub fn backward(params: &NetworkParams, trace: &ForwardTrace, d_output: &[f64], grad: &mut NetworkParams) {
    let mut dz = d_output.to_vec();
    for l in (0..params.layers()).rev() {
        let x = &trace.inputs[l];
        let n = x.len();
        let (w, _) = params.layer(l);
        let (gw, gb) = grad.layer_mut(l);
        for (o, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            gb[o] += d;
            for (g, v) in gw[o * n..(o + 1) * n].iter_mut().zip(x) {
                *g += d * v;
            }
        }
        if l == 0 {
            break;
        }
        let mut dx = vec![0.0; n];
        for (o, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (g, a) in dx.iter_mut().zip(&w[o * n..(o + 1) * n]) {
                *g += d * a;
            }
        }
        // PReLU derivative, taking 1 at zero
        for (g, &z) in dx.iter_mut().zip(&trace.pre[l - 1]) {
            if z < 0.0 {
                *g *= params.slope;
            }
        }
        dz = dx;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prelu_values() {
        assert_eq!(prelu(-1.0, PRELU_SLOPE), -0.25);
        assert_eq!(prelu(2.0, PRELU_SLOPE), 2.0);
    }

    #[test]
    fn default_shape() {
        let p = NetworkParams::for_config(&SystemConfig::default(), 1);
        assert_eq!(p.dims, vec![96, 768, 576, 384, 216]);
        assert_eq!(p.input_scale.len(), 96);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = NetworkParams::zeros(&[4, 3, 2]);
        assert_eq!(forward_raw(&p, &[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
        assert!(forward_raw(&p, &[1.0]).is_err());
    }

    #[test]
    fn layer_views_partition_data() {
        let mut p = NetworkParams::zeros(&[2, 3, 1]);
        p.data.iter_mut().enumerate().for_each(|(i, v)| *v = i as f64);
        let (w0, b0) = p.layer(0);
        assert_eq!(w0.len(), 6);
        assert_eq!(b0, &[6.0, 7.0, 8.0]);
        let (w1, b1) = p.layer(1);
        assert_eq!(w1, &[9.0, 10.0, 11.0]);
        assert_eq!(b1, &[12.0]);
    }

    #[test]
    fn backward_matches_finite_difference() {
        let p = NetworkParams::init(&[3, 5, 4, 2], 3);
        let x = [0.3, -0.7, 1.1];
        let weights = [0.7, -1.3];
        let f = |p: &NetworkParams| -> f64 {
            forward_raw(p, &x).unwrap().iter().zip(weights).map(|(a, b)| a * b).sum()
        };
        let trace = forward_trace(&p, &x).unwrap();
        let mut g = p.zeros_like();
        backward(&p, &trace, &weights, &mut g);
        for i in 0..p.len() {
            let mut hi = p.clone();
            hi.data[i] += 1e-6;
            let mut lo = p.clone();
            lo.data[i] -= 1e-6;
            let fd = (f(&hi) - f(&lo)) / 2e-6;
            assert!((fd - g.data[i]).abs() < 1e-7, "param {i}: {fd} vs {}", g.data[i]);
        }
    }
}
