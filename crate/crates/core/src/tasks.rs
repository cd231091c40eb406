//! Boolean target functions and random bit streams.
//!
//! Inputs and targets are encoded as `{0, 1}` bytes. Every target row is a
//! pure function of the input row at the same time index; none of the tasks
//! carry history.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Gates accept between 2 and 10 inputs.
pub const MIN_GATE_INPUTS: usize = 2;
pub const MAX_GATE_INPUTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    /// 2-bit adder: operands `a = 2*b1 + b0`, `b = 2*b3 + b2`; 3 sum bits, LSB first.
    Adder2,
    /// 2-bit multiplier with the adder's operand packing; 4 product bits, LSB first.
    Multiplier2,
    /// Adder2 and Multiplier2 on the same 4 inputs: 3 sum bits then 4 product bits.
    AdderMultiplier,
    /// 1-bit half adder: sum then carry.
    HalfAdder,
    /// OR, AND, XOR, NOR, NAND, XNOR of the same k inputs.
    SixGateBundle,
    /// Constant 0 on a single output.
    Zero,
}

impl TaskKind {
    pub const ALL: [TaskKind; 12] = [
        TaskKind::And,
        TaskKind::Nand,
        TaskKind::Or,
        TaskKind::Nor,
        TaskKind::Xor,
        TaskKind::Xnor,
        TaskKind::Adder2,
        TaskKind::Multiplier2,
        TaskKind::AdderMultiplier,
        TaskKind::HalfAdder,
        TaskKind::SixGateBundle,
        TaskKind::Zero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::And => "and",
            TaskKind::Nand => "nand",
            TaskKind::Or => "or",
            TaskKind::Nor => "nor",
            TaskKind::Xor => "xor",
            TaskKind::Xnor => "xnor",
            TaskKind::Adder2 => "adder2",
            TaskKind::Multiplier2 => "multiplier2",
            TaskKind::AdderMultiplier => "adder_multiplier",
            TaskKind::HalfAdder => "half_adder",
            TaskKind::SixGateBundle => "six_gate_bundle",
            TaskKind::Zero => "zero",
        }
    }

    pub fn is_gate(self) -> bool {
        matches!(
            self,
            TaskKind::And
                | TaskKind::Nand
                | TaskKind::Or
                | TaskKind::Nor
                | TaskKind::Xor
                | TaskKind::Xnor
                | TaskKind::SixGateBundle
        )
    }

    /// Input count forced by the task, if any.
    pub fn fixed_inputs(self) -> Option<usize> {
        match self {
            TaskKind::Adder2 | TaskKind::Multiplier2 | TaskKind::AdderMultiplier => Some(4),
            TaskKind::HalfAdder => Some(2),
            _ => None,
        }
    }

    pub fn n_outputs(self) -> usize {
        match self {
            TaskKind::Adder2 => 3,
            TaskKind::Multiplier2 => 4,
            TaskKind::AdderMultiplier => 7,
            TaskKind::HalfAdder => 2,
            TaskKind::SixGateBundle => 6,
            _ => 1,
        }
    }

    /// Target bits for one input row.
    pub fn evaluate(self, row: &[u8]) -> Vec<u8> {
        let all = row.iter().all(|&b| b == 1);
        let any = row.iter().any(|&b| b == 1);
        let parity = row.iter().fold(0u8, |acc, &b| acc ^ b);
        let operands = || {
            let a = row[0] + 2 * row[1];
            let b = row[2] + 2 * row[3];
            (a, b)
        };
        let bits = |value: u8, width: usize| (0..width).map(move |i| (value >> i) & 1);
        match self {
            TaskKind::And => vec![all as u8],
            TaskKind::Nand => vec![!all as u8],
            TaskKind::Or => vec![any as u8],
            TaskKind::Nor => vec![!any as u8],
            TaskKind::Xor => vec![parity],
            TaskKind::Xnor => vec![1 - parity],
            TaskKind::Adder2 => {
                let (a, b) = operands();
                bits(a + b, 3).collect()
            }
            TaskKind::Multiplier2 => {
                let (a, b) = operands();
                bits(a * b, 4).collect()
            }
            TaskKind::AdderMultiplier => {
                let (a, b) = operands();
                bits(a + b, 3).chain(bits(a * b, 4)).collect()
            }
            TaskKind::HalfAdder => vec![row[0] ^ row[1], row[0] & row[1]],
            TaskKind::SixGateBundle => vec![
                any as u8,
                all as u8,
                parity,
                !any as u8,
                !all as u8,
                1 - parity,
            ],
            TaskKind::Zero => vec![0],
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let needle = s.to_ascii_lowercase().replace('-', "_");
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == needle)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task kind `{s}`")))
    }
}

fn default_p() -> f64 {
    0.5
}

/// A Boolean task together with the stream that exercises it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Input bit count.
    pub k: usize,
    /// Stream length T.
    pub length: usize,
    /// Per-bit probability of a 1.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TaskSpec {
    /// Build a spec, forcing `k` for tasks with a fixed input count.
    pub fn new(kind: TaskKind, k: usize, length: usize, seed: u64) -> Result<Self> {
        let spec = TaskSpec {
            kind,
            k: kind.fixed_inputs().unwrap_or(k),
            length,
            p: default_p(),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        TaskSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(fixed) = self.kind.fixed_inputs() {
            if self.k != fixed {
                return Err(Error::InvalidConfig(format!(
                    "{} requires k = {fixed}, got {}",
                    self.kind, self.k
                )));
            }
        } else if self.kind.is_gate() && !(MIN_GATE_INPUTS..=MAX_GATE_INPUTS).contains(&self.k) {
            return Err(Error::InvalidConfig(format!(
                "gate tasks need {MIN_GATE_INPUTS} <= k <= {MAX_GATE_INPUTS}, got {}",
                self.k
            )));
        } else if self.k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if self.length == 0 {
            return Err(Error::InvalidConfig("stream length must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("p = {} outside [0, 1]", self.p)));
        }
        Ok(())
    }

    pub fn n_outputs(&self) -> usize {
        self.kind.n_outputs()
    }
}

/// Dense row-major matrix of bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|&&b| b > 1) {
                return Err(Error::Shape(format!("row {i} holds non-bit value {bad}")));
            }
            data.extend_from_slice(row);
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.data[r * self.cols + c] = bit as u8;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Rows as real-valued input vectors.
    pub fn to_real_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows()
            .map(|r| r.iter().map(|&b| f64::from(b)).collect())
            .collect()
    }

    /// Select a subset of columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }

    /// Concatenate columns of two matrices with equal row counts.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "cannot stack {} rows beside {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(BitMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&b| f64::from(b)).sum::<f64>() / self.data.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStreams {
    pub inputs: BitMatrix,
    pub targets: BitMatrix,
}

impl BitStreams {
    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    /// One CSV row per timestep: input bits `u0..`, then target bits `y0..`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.inputs.cols())
            .map(|i| format!("u{i}"))
            .chain((0..self.targets.cols()).map(|i| format!("y{i}")))
            .collect();
        out.write_record(&header)?;
        for t in 0..self.len() {
            let record: Vec<String> = self
                .inputs
                .row(t)
                .iter()
                .chain(self.targets.row(t))
                .map(|b| b.to_string())
                .collect();
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Targets of `kind` for every row of `inputs`.
pub fn targets_for(kind: TaskKind, inputs: &BitMatrix) -> BitMatrix {
    let mut targets = BitMatrix::zeros(inputs.rows(), kind.n_outputs());
    for t in 0..inputs.rows() {
        for (j, bit) in kind.evaluate(inputs.row(t)).into_iter().enumerate() {
            targets.set(t, j, bit == 1);
        }
    }
    targets
}

/// I.i.d. Bernoulli(p) inputs and their targets.
pub fn generate_streams(spec: &TaskSpec) -> Result<BitStreams> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let mut inputs = BitMatrix::zeros(spec.length, spec.k);
    for t in 0..spec.length {
        for i in 0..spec.k {
            inputs.set(t, i, rng.random_bool(spec.p));
        }
    }
    let targets = targets_for(spec.kind, &inputs);
    Ok(BitStreams { inputs, targets })
}

/// Fraction of rows on which every output bit matches.
pub fn evaluate_accuracy(predicted: &BitMatrix, targets: &BitMatrix) -> Result<f64> {
    if predicted.rows() != targets.rows() || predicted.cols() != targets.cols() {
        return Err(Error::Shape(format!(
            "predicted {}x{} vs targets {}x{}",
            predicted.rows(),
            predicted.cols(),
            targets.rows(),
            targets.cols()
        )));
    }
    if targets.rows() == 0 {
        return Err(Error::Shape("cannot score an empty stream".into()));
    }
    let correct = predicted
        .iter_rows()
        .zip(targets.iter_rows())
        .filter(|(p, t)| p == t)
        .count();
    Ok(correct as f64 / targets.rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn nand2_truth_table() {
        assert_eq!(TaskKind::Nand.evaluate(&[1, 1]), vec![0]);
        for row in [[0, 0], [0, 1], [1, 0]] {
            assert_eq!(TaskKind::Nand.evaluate(&row), vec![1]);
        }
    }

    #[test]
    fn xor5_is_parity() {
        assert_eq!(TaskKind::Xor.evaluate(&[1, 1, 1, 0, 0]), vec![1]);
        assert_eq!(TaskKind::Xnor.evaluate(&[1, 1, 1, 0, 0]), vec![0]);
        assert_eq!(TaskKind::Xor.evaluate(&[1, 1, 0, 0, 0]), vec![0]);
    }

    #[test]
    fn kary_gates() {
        let row = [1, 0, 1, 1];
        assert_eq!(TaskKind::And.evaluate(&row), vec![0]);
        assert_eq!(TaskKind::Or.evaluate(&row), vec![1]);
        assert_eq!(TaskKind::Nor.evaluate(&[0, 0, 0]), vec![1]);
        assert_eq!(TaskKind::And.evaluate(&[1; 10]), vec![1]);
    }

    #[test]
    fn adder_and_multiplier_bits() {
        // a = 3 (bits 1,1), b = 2 (bits 0,1)
        let row = [1, 1, 0, 1];
        assert_eq!(TaskKind::Adder2.evaluate(&row), vec![1, 0, 1]);
        assert_eq!(TaskKind::Multiplier2.evaluate(&row), vec![0, 1, 1, 0]);
        assert_eq!(
            TaskKind::AdderMultiplier.evaluate(&row),
            vec![1, 0, 1, 0, 1, 1, 0]
        );
        assert_eq!(TaskKind::HalfAdder.evaluate(&[1, 1]), vec![0, 1]);
    }

    #[test]
    fn six_gate_bundle_order() {
        // OR, AND, XOR, NOR, NAND, XNOR
        assert_eq!(
            TaskKind::SixGateBundle.evaluate(&[1, 0]),
            vec![1, 0, 1, 0, 1, 0]
        );
    }

    #[test]
    fn spec_validation() {
        assert!(TaskSpec::new(TaskKind::Nand, 1, 10, 0).is_err());
        assert!(TaskSpec::new(TaskKind::Xor, 11, 10, 0).is_err());
        assert!(TaskSpec::new(TaskKind::Nand, 2, 0, 0).is_err());
        let forced = TaskSpec::new(TaskKind::Adder2, 7, 10, 0).unwrap();
        assert_eq!(forced.k, 4);
        let mut bad = forced.clone();
        bad.k = 3;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn parse_kind() {
        assert_eq!("NAND".parse::<TaskKind>().unwrap(), TaskKind::Nand);
        assert_eq!(
            "six-gate-bundle".parse::<TaskKind>().unwrap(),
            TaskKind::SixGateBundle
        );
        assert!("majority".parse::<TaskKind>().is_err());
    }

    #[test]
    fn accuracy_examples() {
        let a = bits(&[&[1], &[0], &[1], &[1], &[0], &[0], &[1], &[1], &[0], &[1]]);
        assert_eq!(evaluate_accuracy(&a, &a).unwrap(), 1.0);
        let mut b = a.clone();
        b.set(3, 0, false);
        assert!((evaluate_accuracy(&b, &a).unwrap() - 0.9).abs() < 1e-15);

        let p = bits(&[&[1, 0, 1]]);
        let t = bits(&[&[1, 0, 0]]);
        assert_eq!(evaluate_accuracy(&p, &t).unwrap(), 0.0);

        assert!(evaluate_accuracy(&p, &a).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_balanced() {
        let spec = TaskSpec::new(TaskKind::Nand, 5, 1000, 17).unwrap();
        let a = generate_streams(&spec).unwrap();
        let b = generate_streams(&spec).unwrap();
        assert_eq!(a, b);
        let mean = a.inputs.mean();
        assert!((mean - 0.5).abs() < 0.05, "mean {mean}");
        let c = generate_streams(&spec.with_seed(18)).unwrap();
        assert_ne!(a.inputs, c.inputs);
    }

    #[test]
    fn csv_layout() {
        let streams = BitStreams {
            inputs: bits(&[&[1, 1], &[0, 1]]),
            targets: bits(&[&[0], &[1]]),
        };
        let mut buf = Vec::new();
        streams.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u0,u1,y0\n1,1,0\n0,1,1\n");
    }

    #[test]
    fn bit_matrix_shape_errors() {
        assert!(BitMatrix::from_rows(&[vec![1u8, 0], vec![1]]).is_err());
        assert!(BitMatrix::from_rows(&[vec![2u8]]).is_err());
        let a = bits(&[&[1], &[0]]);
        let b = bits(&[&[1]]);
        assert!(a.hstack(&b).is_err());
        let s = a.hstack(&bits(&[&[0], &[1]])).unwrap();
        assert_eq!(s.row(1), &[0, 1]);
        assert_eq!(s.select_columns(&[1]).row(0), &[0]);
    }
}
