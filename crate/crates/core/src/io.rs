//! JSON persistence for trained networks.
//!
//! Floats are written with 17 significant digits so a saved network reloads
//! bit-for-bit.

use std::io;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};

use crate::error::{Error, Result};
use crate::readout::{Readout, ReadoutParams, SignMode};
use crate::reservoir::{Network, NetworkConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutDocument {
    pub w_out: Vec<Vec<f64>>,
    pub tau: usize,
    pub theta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub sign_mode: SignMode,
    pub visible_mask: Vec<bool>,
}

/// A network and its readouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub config: NetworkConfig,
    /// `n_inputs` rows of `N` weights.
    pub w_in: Vec<Vec<f64>>,
    pub w_res: Vec<Vec<f64>>,
    pub gains: Vec<f64>,
    pub output_mask: Vec<bool>,
    pub readouts: Vec<ReadoutDocument>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape(format!("{what} rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl NetworkDocument {
    pub fn new(net: &Network, readouts: &[Readout]) -> Self {
        NetworkDocument {
            config: net.config().clone(),
            w_in: rows_of(&net.w_in().transpose()),
            w_res: rows_of(net.w_res()),
            gains: net.gains().iter().copied().collect(),
            output_mask: net.output_mask().to_vec(),
            readouts: readouts
                .iter()
                .map(|r| ReadoutDocument {
                    w_out: rows_of(r.w_out()),
                    tau: r.tau,
                    theta: r.theta,
                    gamma: r.gamma,
                    sign_mode: r.sign_mode,
                    visible_mask: r.visible_mask().to_vec(),
                })
                .collect(),
        }
    }

    pub fn into_parts(self) -> Result<(Network, Vec<Readout>)> {
        let net = Network::from_parts(
            self.config,
            matrix_from(&self.w_in, "w_in")?.transpose(),
            matrix_from(&self.w_res, "w_res")?,
            DVector::from_vec(self.gains),
            self.output_mask,
        )?;
        let readouts = self
            .readouts
            .into_iter()
            .map(|r| {
                let params = ReadoutParams {
                    gamma: r.gamma,
                    tau: r.tau,
                    theta: r.theta,
                    sign_mode: r.sign_mode,
                };
                Readout::from_parts(matrix_from(&r.w_out, "w_out")?, params, r.visible_mask)
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(r) = readouts.iter().find(|r| r.visible_mask().len() != net.nodes()) {
            return Err(Error::Shape(format!(
                "readout covers {} nodes, network has {}",
                r.visible_mask().len(),
                net.nodes()
            )));
        }
        Ok((net, readouts))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        let mut ser = Serializer::with_formatter(&mut buf, FullPrecision);
        self.serialize(&mut ser)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Compact JSON with every float in `d.ddddddddddddddddeN` form.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{build_network, Transfer};
    use crate::tasks::{generate_streams, TaskKind, TaskSpec};

    fn trained() -> (Network, Readout) {
        let mut net = build_network(&NetworkConfig {
            nodes: 25,
            output_density: 0.6,
            transfer: Transfer::TanhVariable,
            seed: 5,
            ..NetworkConfig::default()
        })
        .unwrap();
        let s = generate_streams(&TaskSpec::new(TaskKind::Xor, 2, 200, 1).unwrap()).unwrap();
        let traj = net.run(&s.inputs.to_real_rows(), 10).unwrap();
        let r = crate::readout::train_bits(&traj, &s.targets, &ReadoutParams::default(), net.output_mask()).unwrap();
        (net, r)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (net, r) = trained();
        let text = NetworkDocument::new(&net, std::slice::from_ref(&r)).to_json().unwrap();
        let (net2, rs) = NetworkDocument::from_json(&text).unwrap().into_parts().unwrap();
        assert_eq!(net2.w_in(), net.w_in());
        assert_eq!(net2.w_res(), net.w_res());
        assert_eq!(net2.gains(), net.gains());
        assert_eq!(net2.output_mask(), net.output_mask());
        assert_eq!(rs, vec![r]);
    }

    #[test]
    fn floats_carry_17_digits() {
        let (net, r) = trained();
        let text = NetworkDocument::new(&net, &[r]).to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["w_res"].is_array() && v["readouts"][0]["w_out"].is_array());
        let lambda_pos = text.find("\"lambda\":").unwrap() + 9;
        let mantissa: String = text[lambda_pos..].chars().take_while(|&c| c != 'e').collect();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    }

    #[test]
    fn shape_errors() {
        let (net, r) = trained();
        let mut doc = NetworkDocument::new(&net, &[r]);
        doc.w_res[3].pop();
        assert!(doc.into_parts().is_err());
    }
}
