//! Versioned plain-text checkpoints.
//!
//! ```text
//! qontinual-ckpt v1
//! n_qubits=8
//! n_layers=10
//! n_params=248
//! <n_params lines: parameters>
//! anchor <task_name> lambda=<λ> mode=<diag|full>
//! <n_params lines: θ*>
//! <n_params lines: Fisher diagonal>
//! <n_params² lines, row-major: full Fisher matrix, mode=full only>
//! ...
//! ```
//!
//! Every float is written with 17 significant digits, which reproduces the
//! `f64` bit pattern on reading.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::fisher::{EwcAnchor, FisherInfo, FisherMode};
use crate::ansatz::ParameterVector;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "qontinual-ckpt v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub params: ParameterVector,
    pub anchors: Vec<EwcAnchor>,
}

fn num(out: &mut String, v: f64) {
    writeln!(out, "{v:.16e}").unwrap();
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CHECKPOINT_MAGIC}").unwrap();
        writeln!(out, "n_qubits={}", self.n_qubits).unwrap();
        writeln!(out, "n_layers={}", self.n_layers).unwrap();
        writeln!(out, "n_params={}", self.params.len()).unwrap();
        for &p in self.params.as_slice() {
            num(&mut out, p);
        }
        for a in &self.anchors {
            writeln!(out, "anchor {} lambda={:.16e} mode={}", a.task_name, a.lambda, a.mode.as_str()).unwrap();
            for &v in a.theta_star.as_slice() {
                num(&mut out, v);
            }
            for &v in &a.fisher.diagonal {
                num(&mut out, v);
            }
            if a.mode == FisherMode::Full {
                let m = a.fisher.full.as_ref().expect("validated anchor");
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        num(&mut out, m[(i, j)]);
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::at_line(source, text.lines().count() + 1, format!("missing {what}")))
        };
        let (ln, magic) = next("header")?;
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::at_line(source, ln, format!("expected `{CHECKPOINT_MAGIC}`")));
        }
        let mut field = |key: &str| -> Result<usize> {
            let (ln, line) = next(key)?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::at_line(source, ln, format!("expected `{key}=<integer>`")))
        };
        let n_qubits = field("n_qubits")?;
        let n_layers = field("n_layers")?;
        let n_params = field("n_params")?;

        let body: Vec<(usize, &str)> = text.lines().enumerate().skip(4).map(|(i, l)| (i + 1, l.trim_end())).collect();
        let mut pos = 0;
        let floats = |count: usize, pos: &mut usize| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                let &(ln, line) = body
                    .get(*pos)
                    .ok_or_else(|| Error::at_line(source, text.lines().count() + 1, "unexpected end of checkpoint"))?;
                v.push(line.parse::<f64>().map_err(|e| Error::at_line(source, ln, format!("bad number: {e}")))?);
                *pos += 1;
            }
            Ok(v)
        };
        let params = ParameterVector::new(floats(n_params, &mut pos)?);
        let mut anchors = Vec::new();
        while pos < body.len() {
            let (ln, line) = body[pos];
            pos += 1;
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::at_line(source, ln, msg.to_string());
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 4 || parts[0] != "anchor" {
                return Err(bad("expected `anchor <task> lambda=<λ> mode=<diag|full>`"));
            }
            let lambda: f64 = parts[2]
                .strip_prefix("lambda=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("bad lambda field"))?;
            let mode: FisherMode = parts[3].strip_prefix("mode=").ok_or_else(|| bad("bad mode field"))?.parse()?;
            let theta_star = ParameterVector::new(floats(n_params, &mut pos)?);
            let diagonal = floats(n_params, &mut pos)?;
            let full = if mode == FisherMode::Full {
                Some(DMatrix::from_row_slice(n_params, n_params, &floats(n_params * n_params, &mut pos)?))
            } else {
                None
            };
            let anchor = EwcAnchor::new(parts[1], theta_star, FisherInfo { diagonal, full }, lambda, mode)
                .map_err(|e| bad(&e.to_string()))?;
            anchors.push(anchor);
        }
        Ok(Self { n_qubits, n_layers, params, anchors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_header() {
        assert!(Checkpoint::from_text("qontinual-ckpt v2\n", "x").is_err());
        assert!(Checkpoint::from_text("qontinual-ckpt v1\nn_qubits=2\nn_layers=1\nn_params=2\n0.5\n", "x").is_err());
    }

    #[test]
    fn anchor_block_parsed() {
        let text = "qontinual-ckpt v1\nn_qubits=1\nn_layers=0\nn_params=1\n1.0\nanchor t0 lambda=2.5 mode=diag\n0.25\n3.0\n";
        let c = Checkpoint::from_text(text, "x").unwrap();
        assert_eq!(c.anchors.len(), 1);
        assert_eq!(c.anchors[0].lambda, 2.5);
        assert_eq!(c.anchors[0].fisher.diagonal, vec![3.0]);
    }
}
