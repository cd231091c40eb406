//! Linear readouts trained by regularized least squares.
//!
//! The readout computes `y(t) = W_out x'(t + τ - 1)` in trajectory-row terms:
//! a trajectory row holds the state that has just absorbed one input, so with
//! the default delay τ = 1 the target for input `u(t)` is paired with the row
//! produced by `u(t)` itself. Larger τ pairs it with later rows.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::StateTrajectory;
use crate::tasks::{evaluate_accuracy, BitMatrix};

/// Systems whose estimated condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e15;

/// Sign of the regularization term in the normal equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// `(XᵀX + γ²I) w = XᵀY`
    #[default]
    StandardRidge,
    /// `(XᵀX - γ²I) w = XᵀY`
    PaperExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadoutParams {
    pub gamma: f64,
    pub tau: usize,
    pub theta: f64,
    pub sign_mode: SignMode,
}

impl Default for ReadoutParams {
    fn default() -> Self {
        ReadoutParams {
            gamma: 0.015,
            tau: 1,
            theta: 0.5,
            sign_mode: SignMode::StandardRidge,
        }
    }
}

impl ReadoutParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidConfig(format!("theta = {} outside (0, 1)", self.theta)));
        }
        Ok(())
    }
}

/// A regularized least-squares problem over augmented states.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    /// Rows are augmented states restricted to visible nodes; last column all ones.
    pub design: DMatrix<f64>,
    pub targets: DMatrix<f64>,
    pub gamma: f64,
    pub sign_mode: SignMode,
}

impl RegressionProblem {
    /// Solve for the weight matrix, one column per output.
    ///
    /// All outputs share one factorization of the regularized Gram matrix.
    pub fn solve(&self) -> Result<DMatrix<f64>> {
        if self.design.nrows() != self.targets.nrows() {
            return Err(Error::Shape(format!(
                "design has {} rows, targets have {}",
                self.design.nrows(),
                self.targets.nrows()
            )));
        }
        let mut gram = self.design.tr_mul(&self.design);
        let reg = self.gamma * self.gamma;
        let shift = match self.sign_mode {
            SignMode::StandardRidge => reg,
            SignMode::PaperExact => -reg,
        };
        for i in 0..gram.nrows() {
            gram[(i, i)] += shift;
        }
        let rhs = self.design.tr_mul(&self.targets);
        let singular = |condition: f64| Error::SingularSystem {
            mode: self.sign_mode,
            condition,
        };

        if self.sign_mode == SignMode::StandardRidge {
            if let Some(chol) = Cholesky::new(gram.clone()) {
                let diag = chol.l_dirty().diagonal();
                let condition = (diag.max() / diag.min()).powi(2);
                if !(condition <= MAX_CONDITION) {
                    return Err(singular(condition));
                }
                return Ok(chol.solve(&rhs));
            }
        }

        // Indefinite (PaperExact) or a Cholesky breakdown: pivoted LU.
        let lu = gram.lu();
        let u_diag = lu.u().diagonal().abs();
        let condition = u_diag.max() / u_diag.min();
        if !(condition <= MAX_CONDITION) {
            return Err(singular(condition));
        }
        lu.solve(&rhs).ok_or_else(|| singular(f64::INFINITY))
    }
}

/// Pairs of (trajectory row, target index) under delay `tau`.
///
/// Row `r` holds the state after absorbing input `t0 + r`; under delay τ it
/// is scored against the target of input `t0 + r + 1 - τ`.
pub fn aligned_pairs(t0: usize, rows: usize, tau: usize, n_targets: usize) -> Vec<(usize, usize)> {
    (0..rows)
        .filter_map(|r| {
            let t = (t0 + r + 1).checked_sub(tau)?;
            (t < n_targets).then_some((r, t))
        })
        .collect()
}

/// Trained output layer: `n_outputs x (N + 1)` weights, bias last.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    w_out: DMatrix<f64>,
    pub tau: usize,
    pub theta: f64,
    pub gamma: f64,
    pub sign_mode: SignMode,
    visible_mask: Vec<bool>,
}

impl Readout {
    pub fn from_parts(w_out: DMatrix<f64>, params: ReadoutParams, visible_mask: Vec<bool>) -> Result<Self> {
        params.validate()?;
        if w_out.ncols() != visible_mask.len() + 1 {
            return Err(Error::Shape(format!(
                "w_out has {} columns, mask implies {}",
                w_out.ncols(),
                visible_mask.len() + 1
            )));
        }
        for (i, &visible) in visible_mask.iter().enumerate() {
            if !visible && w_out.column(i).iter().any(|&w| w != 0.0) {
                return Err(Error::Shape(format!("hidden node {i} carries nonzero readout weight")));
            }
        }
        Ok(Readout {
            w_out,
            tau: params.tau,
            theta: params.theta,
            gamma: params.gamma,
            sign_mode: params.sign_mode,
            visible_mask,
        })
    }

    pub fn w_out(&self) -> &DMatrix<f64> {
        &self.w_out
    }

    pub fn visible_mask(&self) -> &[bool] {
        &self.visible_mask
    }

    pub fn n_outputs(&self) -> usize {
        self.w_out.nrows()
    }

    pub fn params(&self) -> ReadoutParams {
        ReadoutParams {
            gamma: self.gamma,
            tau: self.tau,
            theta: self.theta,
            sign_mode: self.sign_mode,
        }
    }

    /// Analog outputs, one row per trajectory row.
    pub fn predict(&self, traj: &StateTrajectory) -> DMatrix<f64> {
        &traj.rows * self.w_out.transpose()
    }

    /// Analog output for a single augmented state `[x; 1]`.
    pub fn output_for_state(&self, state: &nalgebra::DVector<f64>) -> Vec<f64> {
        let n = state.len();
        (0..self.n_outputs())
            .map(|o| {
                let row = self.w_out.row(o);
                row.columns(0, n).dot(&state.transpose()) + row[n]
            })
            .collect()
    }

    /// Thresholded outputs paired with their targets under this readout's delay.
    pub fn aligned_bits(&self, traj: &StateTrajectory, targets: &BitMatrix) -> Result<(BitMatrix, BitMatrix)> {
        if targets.cols() != self.n_outputs() {
            return Err(Error::Shape(format!(
                "targets have {} columns, readout has {} outputs",
                targets.cols(),
                self.n_outputs()
            )));
        }
        let analog = self.predict(traj);
        let pairs = aligned_pairs(traj.t0, traj.len(), self.tau, targets.rows());
        let mut predicted = BitMatrix::zeros(pairs.len(), self.n_outputs());
        let mut expected = BitMatrix::zeros(pairs.len(), self.n_outputs());
        for (i, &(r, t)) in pairs.iter().enumerate() {
            for o in 0..self.n_outputs() {
                predicted.set(i, o, analog[(r, o)] >= self.theta);
                expected.set(i, o, targets.get(t, o) == 1);
            }
        }
        Ok((predicted, expected))
    }

    /// Accuracy against bit targets indexed by input time.
    pub fn score(&self, traj: &StateTrajectory, targets: &BitMatrix) -> Result<f64> {
        let (predicted, expected) = self.aligned_bits(traj, targets)?;
        evaluate_accuracy(&predicted, &expected)
    }
}

/// Train a readout on a trajectory. `targets` has one row per input index.
pub fn train(
    traj: &StateTrajectory,
    targets: &DMatrix<f64>,
    params: &ReadoutParams,
    mask: &[bool],
) -> Result<Readout> {
    params.validate()?;
    let n = traj.nodes();
    if mask.len() != n {
        return Err(Error::Shape(format!("mask has {} entries for {n} nodes", mask.len())));
    }
    let pairs = aligned_pairs(traj.t0, traj.len(), params.tau, targets.nrows());
    if pairs.is_empty() {
        return Err(Error::Shape("no trajectory rows align with targets".into()));
    }
    let visible: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let cols = visible.len() + 1;
    let mut design = DMatrix::zeros(pairs.len(), cols);
    let mut y = DMatrix::zeros(pairs.len(), targets.ncols());
    for (row, &(r, t)) in pairs.iter().enumerate() {
        for (c, &node) in visible.iter().enumerate() {
            design[(row, c)] = traj.rows[(r, node)];
        }
        design[(row, cols - 1)] = 1.0;
        for o in 0..targets.ncols() {
            y[(row, o)] = targets[(t, o)];
        }
    }
    let weights = RegressionProblem {
        design,
        targets: y,
        gamma: params.gamma,
        sign_mode: params.sign_mode,
    }
    .solve()?;

    let mut w_out = DMatrix::zeros(targets.ncols(), n + 1);
    for o in 0..targets.ncols() {
        for (c, &node) in visible.iter().enumerate() {
            w_out[(o, node)] = weights[(c, o)];
        }
        w_out[(o, n)] = weights[(cols - 1, o)];
    }
    Readout::from_parts(w_out, *params, mask.to_vec())
}

/// Train against bit targets.
pub fn train_bits(
    traj: &StateTrajectory,
    targets: &BitMatrix,
    params: &ReadoutParams,
    mask: &[bool],
) -> Result<Readout> {
    let real = DMatrix::from_fn(targets.rows(), targets.cols(), |r, c| f64::from(targets.get(r, c)));
    train(traj, &real, params, mask)
}

/// `1` where the value reaches `theta`.
pub fn threshold_bits(analog: &DMatrix<f64>, theta: f64) -> BitMatrix {
    let mut bits = BitMatrix::zeros(analog.nrows(), analog.ncols());
    for r in 0..analog.nrows() {
        for c in 0..analog.ncols() {
            bits.set(r, c, analog[(r, c)] >= theta);
        }
    }
    bits
}
