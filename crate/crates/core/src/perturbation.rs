//! Temporal weight variation and permanent node faults.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{Network, StateTrajectory, WeightOffset};
use crate::rng::seeded;

/// Per-step Gaussian noise on `n` randomly chosen nonzero reservoir weights.
///
/// Offsets for step `t` are a pure function of `(seed, t)` and are always
/// applied to the unperturbed weights, so they never accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationModel {
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for VariationModel {
    fn default() -> Self {
        VariationModel {
            n: 1,
            sigma: 0.1,
            seed: 0,
        }
    }
}

impl VariationModel {
    pub fn with_seed(self, seed: u64) -> Self {
        VariationModel { seed, ..self }
    }

    /// Offsets for step `t` over the given nonzero positions.
    pub fn offsets(&self, nonzero: &[(usize, usize)], t: u64) -> Result<Vec<WeightOffset>> {
        if self.n > nonzero.len() {
            return Err(Error::TooManyPerturbed {
                requested: self.n,
                available: nonzero.len(),
            });
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma = {} must be >= 0", self.sigma)));
        }
        let mut rng = seeded(self.seed);
        rng.set_stream(t);
        let normal = Normal::new(0.0, self.sigma).expect("sigma checked");
        Ok(sample(&mut rng, nonzero.len(), self.n)
            .into_iter()
            .map(|k| {
                let (row, col) = nonzero[k];
                WeightOffset {
                    row,
                    col,
                    delta: normal.sample(&mut rng),
                }
            })
            .collect())
    }
}

/// Copy of `base` with the step-`t` perturbation applied.
pub fn noisy_weights(base: &DMatrix<f64>, model: &VariationModel, t: u64) -> Result<DMatrix<f64>> {
    let mut nonzero = Vec::new();
    for j in 0..base.ncols() {
        for i in 0..base.nrows() {
            if base[(i, j)] != 0.0 {
                nonzero.push((i, j));
            }
        }
    }
    let mut out = base.clone();
    for o in model.offsets(&nonzero, t)? {
        out[(o.row, o.col)] += o.delta;
    }
    Ok(out)
}

/// One noisy (or nominal) step at time index `t`.
pub fn step_varied(net: &mut Network, u: &[f64], model: Option<&VariationModel>, t: u64) -> Result<()> {
    match model {
        Some(m) if m.n > 0 => {
            let offsets = m.offsets(net.nonzero_reservoir_entries(), t)?;
            net.step_with_offsets(u, &offsets);
        }
        _ => {
            net.step(u, None);
        }
    }
    Ok(())
}

/// `Network::run` with per-step variation; step `t` uses the model's stream `t`.
pub fn run_with_variation<I: AsRef<[f64]>>(
    net: &mut Network,
    inputs: &[I],
    washout: usize,
    model: Option<&VariationModel>,
) -> Result<StateTrajectory> {
    let Some(model) = model.filter(|m| m.n > 0) else {
        return net.run(inputs, washout);
    };
    if model.n > net.nonzero_reservoir_entries().len() {
        return Err(Error::TooManyPerturbed {
            requested: model.n,
            available: net.nonzero_reservoir_entries().len(),
        });
    }
    let mut failure = None;
    let traj = net.drive(inputs, washout, |net, t, u| {
        if failure.is_none() {
            if let Err(e) = step_varied(net, u, Some(model), t as u64) {
                failure = Some(e);
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Permanent disconnection of `m` nodes at step `t_fail`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub m: usize,
    pub t_fail: usize,
    pub victims: Vec<usize>,
}

impl FaultEvent {
    /// Choose `m` distinct victims uniformly among `nodes`.
    pub fn sample(m: usize, t_fail: usize, nodes: usize, seed: u64) -> Result<Self> {
        if m > nodes {
            return Err(Error::InvalidConfig(format!("cannot fail {m} of {nodes} nodes")));
        }
        let mut rng = seeded(seed);
        let mut victims = sample(&mut rng, nodes, m).into_vec();
        victims.sort_unstable();
        Ok(FaultEvent { m, t_fail, victims })
    }

    pub fn with_victims(t_fail: usize, victims: Vec<usize>) -> Result<Self> {
        let mut sorted = victims.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != victims.len() {
            return Err(Error::InvalidConfig("fault victims must be distinct".into()));
        }
        Ok(FaultEvent {
            m: victims.len(),
            t_fail,
            victims,
        })
    }
}

/// Zero every incoming and outgoing connection of each victim, its input
/// weights and its state. Readout weights are left alone.
pub fn apply_fault(net: &mut Network, event: &FaultEvent) -> Result<()> {
    if let Some(&bad) = event.victims.iter().find(|&&v| v >= net.nodes()) {
        return Err(Error::InvalidConfig(format!(
            "fault victim {bad} out of range for {} nodes",
            net.nodes()
        )));
    }
    for &v in &event.victims {
        net.disconnect_node(v);
    }
    Ok(())
}
