//! Grid sweeps over design parameters.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_probabilities, run_trials, Probabilities, TrialSetup};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// A swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    V,
    Lambda,
    DeltaI,
    DeltaR,
    DeltaO,
    /// δ_I and δ_O tied to one value.
    DeltaIo,
    K,
    N,
}

impl Axis {
    fn key(self) -> u64 {
        self as u64 + 1
    }

    pub fn apply(self, setup: &mut TrialSetup, value: f64) -> Result<()> {
        let count = || {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{self:?} needs a whole number, got {value}")))
            }
        };
        let net = &mut setup.network;
        match self {
            Axis::V => net.input_scale = value,
            Axis::Lambda => net.spectral_radius = value,
            Axis::DeltaI => net.input_density = value,
            Axis::DeltaR => net.reservoir_density = value,
            Axis::DeltaO => net.output_density = value,
            Axis::DeltaIo => {
                net.input_density = value;
                net.output_density = value;
            }
            Axis::K => setup.task.k = count()?,
            Axis::N => net.nodes = count()?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// One grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coords: Vec<(Axis, f64)>,
}

impl Cell {
    /// Seed keyed by the cell's coordinates, so adding or reordering grid
    /// values leaves every other cell's trials untouched.
    pub fn seed(&self, master_seed: u64) -> u64 {
        self.coords.iter().fold(master_seed, |acc, &(axis, value)| {
            derive_seed(derive_seed(acc, axis.key()), value.to_bits())
        })
    }

    pub fn value(&self, axis: Axis) -> Option<f64> {
        self.coords.iter().find(|(a, _)| *a == axis).map(|&(_, v)| v)
    }
}

/// Cartesian product of the axes; the first axis varies slowest.
pub fn grid_cells(grid: &[GridAxis]) -> Vec<Cell> {
    grid.iter().fold(vec![Cell { coords: Vec::new() }], |cells, axis| {
        cells
            .iter()
            .flat_map(|cell| {
                axis.values.iter().map(move |&v| {
                    let mut coords = cell.coords.clone();
                    coords.push((axis.axis, v));
                    Cell { coords }
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cell: Cell,
    /// Fully resolved setup for this cell.
    pub setup: TrialSetup,
    pub probabilities: Probabilities,
    pub master_seed: u64,
}

pub fn sweep(base: &TrialSetup, grid: &[GridAxis], trials: usize, master_seed: u64) -> Result<Vec<SweepResult>> {
    if grid.is_empty() || grid.iter().any(|a| a.values.is_empty()) {
        return Err(Error::InvalidConfig("sweep grid must have values on every axis".into()));
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    grid_cells(grid)
        .into_par_iter()
        .map(|cell| {
            let mut setup = base.clone();
            for &(axis, value) in &cell.coords {
                axis.apply(&mut setup, value)?;
            }
            setup.validate()?;
            let metrics = run_trials(&setup, trials, cell.seed(master_seed))?;
            Ok(SweepResult {
                probabilities: estimate_probabilities(&metrics)?,
                cell,
                setup,
                master_seed,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: [&str; 20] = [
    "task",
    "k",
    "N",
    "weight_pattern",
    "transfer",
    "v",
    "lambda",
    "delta_i",
    "delta_r",
    "delta_o",
    "gamma",
    "tau",
    "sigma",
    "n_noise",
    "trials",
    "TP",
    "GP",
    "LP_joint",
    "LP_product",
    "master_seed",
];

pub fn write_sweep_csv<W: Write>(results: &[SweepResult], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(SWEEP_CSV_HEADER)?;
    for r in results {
        let s = &r.setup;
        let net = &s.network;
        let p = &r.probabilities;
        let (sigma, n_noise) = s.noise.map_or((0.0, 0), |n| (n.sigma, n.n));
        out.write_record([
            s.task.kind.to_string(),
            s.task.k.to_string(),
            net.nodes.to_string(),
            net.weight_pattern.name().to_string(),
            net.transfer.name().to_string(),
            net.input_scale.to_string(),
            net.spectral_radius.to_string(),
            net.input_density.to_string(),
            net.reservoir_density.to_string(),
            net.output_density.to_string(),
            s.readout.gamma.to_string(),
            s.readout.tau.to_string(),
            sigma.to_string(),
            n_noise.to_string(),
            p.trials.to_string(),
            p.tp.to_string(),
            p.gp.to_string(),
            p.lp_joint.to_string(),
            p.lp_product.to_string(),
            r.master_seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::NetworkConfig;
    use crate::tasks::TaskSpec;

    #[test]
    fn product_order() {
        let cells = grid_cells(&[
            GridAxis { axis: Axis::V, values: vec![0.5, 1.0] },
            GridAxis { axis: Axis::Lambda, values: vec![0.1, 0.2, 0.3] },
        ]);
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].coords, vec![(Axis::V, 0.5), (Axis::Lambda, 0.1)]);
        assert_eq!(cells[5].coords, vec![(Axis::V, 1.0), (Axis::Lambda, 0.3)]);
    }

    #[test]
    fn cell_seed_ignores_neighbors() {
        let a = grid_cells(&[GridAxis { axis: Axis::V, values: vec![0.5, 1.0] }]);
        let b = grid_cells(&[GridAxis { axis: Axis::V, values: vec![0.1, 1.0, 0.5] }]);
        assert_eq!(a[1].seed(9), b[1].seed(9));
        assert_eq!(a[0].seed(9), b[2].seed(9));
        assert_ne!(a[0].seed(9), a[1].seed(9));
        assert_ne!(a[0].seed(9), a[0].seed(10));
    }

    #[test]
    fn axes_apply() {
        let mut s = TrialSetup::default();
        Axis::DeltaIo.apply(&mut s, 0.4).unwrap();
        assert_eq!((s.network.input_density, s.network.output_density), (0.4, 0.4));
        Axis::K.apply(&mut s, 3.0).unwrap();
        assert_eq!(s.task.k, 3);
        assert!(Axis::N.apply(&mut s, 2.5).is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let base = TrialSetup::default();
        assert!(sweep(&base, &[], 1, 0).is_err());
        assert!(sweep(&base, &[GridAxis { axis: Axis::V, values: vec![] }], 1, 0).is_err());
    }

    #[test]
    fn csv_has_fixed_header() {
        let base = TrialSetup {
            network: NetworkConfig { nodes: 20, ..NetworkConfig::default() },
            task: TaskSpec { k: 2, length: 100, ..TaskSpec::default() },
            ..TrialSetup::default()
        };
        let results = sweep(&base, &[GridAxis { axis: Axis::Lambda, values: vec![0.1] }], 2, 3).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&results, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "nand");
        assert_eq!(row[2], "20");
        assert_eq!(row[6], "0.1");
        assert_eq!(row[14], "2");
        assert_eq!(row[19], "3");
    }
}
