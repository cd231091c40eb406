//! Randomized reservoirs and their input-driven dynamics.
//!
//! A reservoir evolves as `x(t+1) = f(g ⊙ (W_res x(t) + W_in u(t)))`, where
//! `g` is a per-node gain (all ones unless the transfer kind is variable) and
//! `f` is either a saturated linear clamp to `[-1, 1]` or `tanh`.

mod spectral;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

pub use spectral::{
    spectral_radius, spectral_radius_with, SpectralEstimate, DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
};

/// Standard deviation of the noise added to each connected input weight.
pub const INPUT_WEIGHT_NOISE_STD: f64 = 1.0;

/// Upper bound of the uniform per-node gain for variable transfer kinds.
pub const MAX_VARIABLE_GAIN: f64 = 2.0;

/// Distribution of the nonzero reservoir weights before spectral scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPattern {
    /// Every connection has weight one.
    Identical,
    /// Uniform on `[-1, 1]`.
    Uniform,
    /// Standard normal.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transfer {
    SatLinear,
    Tanh,
    SatLinearVariable,
    TanhVariable,
}

impl Transfer {
    pub fn is_variable(self) -> bool {
        matches!(self, Transfer::SatLinearVariable | Transfer::TanhVariable)
    }

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Transfer::SatLinear | Transfer::SatLinearVariable => z.clamp(-1.0, 1.0),
            Transfer::Tanh | Transfer::TanhVariable => z.tanh(),
        }
    }
}

impl WeightPattern {
    pub fn name(self) -> &'static str {
        match self {
            WeightPattern::Identical => "identical",
            WeightPattern::Uniform => "uniform",
            WeightPattern::Normal => "normal",
        }
    }
}

impl Transfer {
    pub fn name(self) -> &'static str {
        match self {
            Transfer::SatLinear => "sat_linear",
            Transfer::Tanh => "tanh",
            Transfer::SatLinearVariable => "sat_linear_variable",
            Transfer::TanhVariable => "tanh_variable",
        }
    }
}

/// Build-time hyperparameters of a reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    /// Node count N.
    #[serde(rename = "N")]
    pub nodes: usize,
    /// Input coefficient v.
    #[serde(rename = "v")]
    pub input_scale: f64,
    /// Target spectral radius λ.
    #[serde(rename = "lambda")]
    pub spectral_radius: f64,
    /// Fraction of nodes driven by the inputs (each such node sees every input).
    #[serde(rename = "delta_i")]
    pub input_density: f64,
    /// Fraction of the N² reservoir slots that carry a connection.
    #[serde(rename = "delta_r")]
    pub reservoir_density: f64,
    /// Fraction of nodes visible to the readout.
    #[serde(rename = "delta_o")]
    pub output_density: f64,
    pub weight_pattern: WeightPattern,
    pub transfer: Transfer,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            nodes: 100,
            input_scale: 1.0,
            spectral_radius: 0.1,
            input_density: 0.5,
            reservoir_density: 1.0,
            output_density: 1.0,
            weight_pattern: WeightPattern::Normal,
            transfer: Transfer::SatLinear,
            n_inputs: 2,
            n_outputs: 1,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.nodes == 0 {
            return fail("reservoir needs at least one node".into());
        }
        if self.n_inputs == 0 {
            return fail("reservoir needs at least one input".into());
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius < 1.0) {
            return fail(format!("lambda = {} outside (0, 1)", self.spectral_radius));
        }
        if !self.input_scale.is_finite() {
            return fail(format!("v = {} is not finite", self.input_scale));
        }
        for (name, d) in [
            ("delta_i", self.input_density),
            ("delta_r", self.reservoir_density),
            ("delta_o", self.output_density),
        ] {
            if !(0.0..=1.0).contains(&d) {
                return fail(format!("{name} = {d} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn input_nodes(&self) -> usize {
        (self.input_density * self.nodes as f64).round() as usize
    }

    pub fn reservoir_connections(&self) -> usize {
        (self.reservoir_density * (self.nodes * self.nodes) as f64).round() as usize
    }

    pub fn visible_nodes(&self) -> usize {
        (self.output_density * self.nodes as f64).round() as usize
    }
}

/// Augmented states `x'(t) = [x(t); 1]`, one row per retained step.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    /// (steps - washout) x (N + 1); the last column is the bias.
    pub rows: DMatrix<f64>,
    /// Input index whose absorption produced the first row.
    pub t0: usize,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn nodes(&self) -> usize {
        self.rows.ncols() - 1
    }
}

/// A realized reservoir with its current state.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    /// N x n_inputs; entry (i, j) is the weight from input j to node i.
    w_in: DMatrix<f64>,
    w_res: DMatrix<f64>,
    gains: DVector<f64>,
    /// Nodes the readout is connected to.
    output_mask: Vec<bool>,
    state: DVector<f64>,
    nonzero: Vec<(usize, usize)>,
    scratch: DVector<f64>,
}

fn nonzero_entries(m: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                out.push((i, j));
            }
        }
    }
    out
}

/// Realize a reservoir from its configuration.
pub fn build_network(config: &NetworkConfig) -> Result<Network> {
    config.validate()?;
    let n = config.nodes;
    let mut rng = seeded(config.seed);

    let mut w_in = DMatrix::zeros(n, config.n_inputs);
    for node in sample(&mut rng, n, config.input_nodes()) {
        for j in 0..config.n_inputs {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            w_in[(node, j)] = sign * config.input_scale + INPUT_WEIGHT_NOISE_STD * noise;
        }
    }

    let mut w_res = DMatrix::zeros(n, n);
    let uniform = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    for slot in sample(&mut rng, n * n, config.reservoir_connections()) {
        let value = match config.weight_pattern {
            WeightPattern::Identical => 1.0,
            WeightPattern::Uniform => uniform.sample(&mut rng),
            WeightPattern::Normal => rng.sample(StandardNormal),
        };
        w_res[(slot / n, slot % n)] = value;
    }

    let estimate = spectral_radius(&w_res);
    if !estimate.converged {
        return Err(Error::UnconvergedSpectrum {
            seed: config.seed,
            iterations: estimate.iterations,
            estimate: estimate.radius,
        });
    }
    if estimate.radius == 0.0 {
        return Err(Error::DegenerateReservoir { seed: config.seed });
    }
    w_res *= config.spectral_radius / estimate.radius;

    let gains = if config.transfer.is_variable() {
        let gain = Uniform::new_inclusive(0.0, MAX_VARIABLE_GAIN).expect("valid range");
        DVector::from_fn(n, |_, _| gain.sample(&mut rng))
    } else {
        DVector::from_element(n, 1.0)
    };

    let mut output_mask = vec![false; n];
    for node in sample(&mut rng, n, config.visible_nodes()) {
        output_mask[node] = true;
    }

    Ok(Network::assemble(config.clone(), w_in, w_res, gains, output_mask))
}

impl Network {
    fn assemble(
        config: NetworkConfig,
        w_in: DMatrix<f64>,
        w_res: DMatrix<f64>,
        gains: DVector<f64>,
        output_mask: Vec<bool>,
    ) -> Self {
        let n = config.nodes;
        let nonzero = nonzero_entries(&w_res);
        Network {
            config,
            w_in,
            w_res,
            gains,
            output_mask,
            state: DVector::zeros(n),
            nonzero,
            scratch: DVector::zeros(n),
        }
    }

    /// Reassemble a network from stored parts, checking shapes.
    pub fn from_parts(
        config: NetworkConfig,
        w_in: DMatrix<f64>,
        w_res: DMatrix<f64>,
        gains: DVector<f64>,
        output_mask: Vec<bool>,
    ) -> Result<Self> {
        config.validate()?;
        let n = config.nodes;
        if w_in.shape() != (n, config.n_inputs) {
            return Err(Error::Shape(format!(
                "w_in is {:?}, expected ({n}, {})",
                w_in.shape(),
                config.n_inputs
            )));
        }
        if w_res.shape() != (n, n) {
            return Err(Error::Shape(format!("w_res is {:?}, expected ({n}, {n})", w_res.shape())));
        }
        if gains.len() != n || output_mask.len() != n {
            return Err(Error::Shape(format!(
                "gains/output mask lengths {}/{} differ from N = {n}",
                gains.len(),
                output_mask.len()
            )));
        }
        Ok(Network::assemble(config, w_in, w_res, gains, output_mask))
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn nodes(&self) -> usize {
        self.config.nodes
    }

    pub fn n_inputs(&self) -> usize {
        self.config.n_inputs
    }

    pub fn w_in(&self) -> &DMatrix<f64> {
        &self.w_in
    }

    pub fn w_res(&self) -> &DMatrix<f64> {
        &self.w_res
    }

    pub fn gains(&self) -> &DVector<f64> {
        &self.gains
    }

    pub fn output_mask(&self) -> &[bool] {
        &self.output_mask
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.state
    }

    /// Positions of the nonzero reservoir weights, column-major order.
    pub fn nonzero_reservoir_entries(&self) -> &[(usize, usize)] {
        &self.nonzero
    }

    pub fn reset_state(&mut self) {
        self.state.fill(0.0);
    }

    pub fn set_state(&mut self, state: &[f64]) -> Result<()> {
        if state.len() != self.nodes() {
            return Err(Error::Shape(format!(
                "state has {} entries, network has {} nodes",
                state.len(),
                self.nodes()
            )));
        }
        self.state.copy_from_slice(state);
        Ok(())
    }

    /// Elementwise `f(gain_i * z_i)`.
    pub fn transfer_apply(&self, pre_activation: &DVector<f64>) -> DVector<f64> {
        let kind = self.config.transfer;
        pre_activation.zip_map(&self.gains, |z, g| kind.apply(g * z))
    }

    fn check_input(&self, u: &[f64]) {
        assert_eq!(u.len(), self.n_inputs(), "input vector length must equal n_inputs");
    }

    /// Add `W_in u` to the scratch buffer and apply the transfer into `state`.
    fn finish_step(&mut self, u: &[f64]) {
        for (j, &uj) in u.iter().enumerate() {
            if uj != 0.0 {
                self.scratch.axpy(uj, &self.w_in.column(j), 1.0);
            }
        }
        let kind = self.config.transfer;
        for i in 0..self.state.len() {
            self.state[i] = kind.apply(self.gains[i] * self.scratch[i]);
        }
    }

    /// Advance one step; `effective_w_res` replaces `W_res` for this step only.
    pub fn step(&mut self, u: &[f64], effective_w_res: Option<&DMatrix<f64>>) -> &DVector<f64> {
        self.check_input(u);
        let w = effective_w_res.unwrap_or(&self.w_res);
        assert_eq!(w.shape(), self.w_res.shape(), "override must match W_res shape");
        self.scratch.gemv(1.0, w, &self.state, 0.0);
        self.finish_step(u);
        &self.state
    }

    /// Advance one step with sparse additive offsets on `W_res`.
    ///
    /// Equivalent to `step` with an override equal to `W_res` plus the offsets.
    pub fn step_with_offsets(&mut self, u: &[f64], offsets: &[WeightOffset]) -> &DVector<f64> {
        self.check_input(u);
        self.scratch.gemv(1.0, &self.w_res, &self.state, 0.0);
        for o in offsets {
            self.scratch[o.row] += o.delta * self.state[o.col];
        }
        self.finish_step(u);
        &self.state
    }

    /// Drive from `x(0) = 0` through `inputs`, keeping every step after `washout`.
    pub fn run<I: AsRef<[f64]>>(&mut self, inputs: &[I], washout: usize) -> Result<StateTrajectory> {
        self.drive(inputs, washout, |net, _, u| {
            net.step(u, None);
        })
    }

    /// Shared driver: `advance` performs one step given the step index.
    pub(crate) fn drive<I, F>(&mut self, inputs: &[I], washout: usize, mut advance: F) -> Result<StateTrajectory>
    where
        I: AsRef<[f64]>,
        F: FnMut(&mut Network, usize, &[f64]),
    {
        if inputs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if washout >= inputs.len() {
            return Err(Error::InvalidConfig(format!(
                "washout {washout} must be shorter than the {}-step input",
                inputs.len()
            )));
        }
        let n = self.nodes();
        self.reset_state();
        let mut rows = DMatrix::zeros(inputs.len() - washout, n + 1);
        for (t, u) in inputs.iter().enumerate() {
            advance(self, t, u.as_ref());
            if t >= washout {
                let r = t - washout;
                for i in 0..n {
                    rows[(r, i)] = self.state[i];
                }
                rows[(r, n)] = 1.0;
            }
        }
        Ok(StateTrajectory { rows, t0: washout })
    }

    /// Permanently disconnect a node: zero its reservoir row and column,
    /// its input weights, and its state.
    pub(crate) fn disconnect_node(&mut self, node: usize) {
        self.w_res.row_mut(node).fill(0.0);
        self.w_res.column_mut(node).fill(0.0);
        self.w_in.row_mut(node).fill(0.0);
        self.state[node] = 0.0;
        self.nonzero = nonzero_entries(&self.w_res);
    }
}

/// An additive perturbation of one reservoir weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightOffset {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
}
