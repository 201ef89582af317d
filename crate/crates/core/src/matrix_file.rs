//! JSON storage for operators.
//!
//! ```json
//! {"version":1,"in_dims":[["P",4],["AO",2]],"out_dims":[["AI",2],["F",4]],
//!  "data":[[1.0,0.0],[0.0,-0.5], ...]}
//! ```
//!
//! `data` lists the matrix row-major as `[re, im]` pairs. Floats are written in
//! shortest round-trip form and parsed with correct rounding, so save then load is
//! bit-exact.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::tensor::{LinOp, SystemDims, C64};
use crate::{Error, Result};

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub version: u32,
    pub in_dims: Vec<(String, usize)>,
    pub out_dims: Vec<(String, usize)>,
    pub data: Vec<[f64; 2]>,
}

fn dims_of(s: &SystemDims) -> Vec<(String, usize)> {
    s.factors().iter().map(|f| (f.label.clone(), f.dim)).collect()
}

impl MatrixFile {
    pub fn from_linop(op: &LinOp) -> Self {
        let m = op.data();
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            version: VERSION,
            in_dims: dims_of(op.in_space()),
            out_dims: dims_of(op.out_space()),
            data,
        }
    }

    pub fn to_linop(&self) -> Result<LinOp> {
        if self.version != VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        let ins = SystemDims::new(self.in_dims.iter().cloned()).map_err(|e| Error::Format(e.to_string()))?;
        let outs = SystemDims::new(self.out_dims.iter().cloned()).map_err(|e| Error::Format(e.to_string()))?;
        let (rows, cols) = (outs.total_dim(), ins.total_dim());
        if self.data.len() != rows * cols {
            return Err(Error::Format(format!(
                "{} entries for a {rows}x{cols} matrix",
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite entry".into()));
        }
        let m = DMatrix::from_fn(rows, cols, |r, c| {
            let [re, im] = self.data[r * cols + c];
            C64::new(re, im)
        });
        LinOp::new(ins, outs, m)
    }

    pub fn to_json(&self) -> Result<String> {
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite entry".into()));
        }
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Writes `op` to `path`.
pub fn save(op: &LinOp, path: impl AsRef<Path>) -> Result<()> {
    MatrixFile::from_linop(op).save(path)
}

/// Reads an operator from `path`.
pub fn load(path: impl AsRef<Path>) -> Result<LinOp> {
    MatrixFile::load(path)?.to_linop()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed() {
        assert!(MatrixFile::from_json("{\"version\":1,").is_err());
        let f = MatrixFile {
            version: 1,
            in_dims: vec![("A".into(), 2)],
            out_dims: vec![("B".into(), 1)],
            data: vec![[1.0, 0.0]],
        };
        assert!(f.to_linop().is_err());
        let g = MatrixFile {
            version: 2,
            data: vec![[1.0, 0.0], [0.0, 0.0]],
            ..f.clone()
        };
        assert!(g.to_linop().is_err());
        let h = MatrixFile {
            in_dims: vec![("A".into(), 1), ("A".into(), 2)],
            data: vec![[1.0, 0.0], [0.0, 0.0]],
            ..f
        };
        assert!(h.to_linop().is_err());
    }

    #[test]
    fn awkward_floats_survive_text() {
        let vals = [
            0.1,
            -0.0,
            1e-300,
            5e-324,
            1.0 / 3.0,
            f64::MAX,
            2.0_f64.sqrt(),
            -7.123456789012345e-17,
        ];
        let f = MatrixFile {
            version: 1,
            in_dims: vec![("A".into(), vals.len())],
            out_dims: vec![("B".into(), 1)],
            data: vals.iter().map(|&v| [v, -v]).collect(),
        };
        let back = MatrixFile::from_json(&f.to_json().unwrap()).unwrap();
        for (a, b) in f.data.iter().zip(&back.data) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
    }
}
