//! Machine-readable summaries of a command run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use supermap_core::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub test: f64,
    pub unitary: f64,
    pub rank: f64,
}

/// Past and future dims of one direct-sum block.
#[derive(Clone, Debug, Serialize)]
pub struct BlockDims {
    pub p: usize,
    pub f: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub kind: String,
    pub inputs: Vec<InputDigest>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub residuals: BTreeMap<String, f64>,
    /// Keyed by `ab` and `ba`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub block_dims: BTreeMap<String, BlockDims>,
    /// `(|, □, −)` dims of the global P and F triples.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub triple_dims: BTreeMap<String, [usize; 3]>,
    /// Ancilla chain `k_0 … k_{N+1}` per staircase.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub ancilla_dims: BTreeMap<String, Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
}

impl Report {
    pub fn new(command: &str, kind: &str, test_tol: f64) -> Self {
        Self {
            command: command.into(),
            kind: kind.into(),
            inputs: Vec::new(),
            verdict: Verdict::Pass,
            message: None,
            residuals: BTreeMap::new(),
            block_dims: BTreeMap::new(),
            triple_dims: BTreeMap::new(),
            ancilla_dims: BTreeMap::new(),
            classification: None,
            tolerances: Tolerances {
                test: test_tol,
                unitary: tol::UNITARY,
                rank: tol::RANK,
            },
            outputs: Vec::new(),
        }
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.verdict = Verdict::Fail;
        self.message = Some(message.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn human(&self) -> String {
        let mut s = String::new();
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        let _ = writeln!(s, "{} {}: {verdict}", self.command, self.kind);
        for i in &self.inputs {
            let _ = writeln!(s, "  input {} sha256:{}", i.path, i.sha256);
        }
        if let Some(m) = &self.message {
            let _ = writeln!(s, "  {m}");
        }
        for (k, v) in &self.residuals {
            let _ = writeln!(s, "  residual {k}: {v:.3e}");
        }
        for (k, v) in &self.triple_dims {
            let _ = writeln!(s, "  {k} triple (|, box, -): {v:?}");
        }
        for (k, b) in &self.block_dims {
            let _ = writeln!(s, "  block {k}: P {} F {}", b.p, b.f);
        }
        for (k, v) in &self.ancilla_dims {
            let _ = writeln!(s, "  ancillas {k}: {v:?}");
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(s, "  classification: {c}");
        }
        for o in &self.outputs {
            let _ = writeln!(s, "  wrote {o}");
        }
        let _ = writeln!(
            s,
            "  tol test {:e} unitary {:e} rank {:e}",
            self.tolerances.test, self.tolerances.unitary, self.tolerances.rank
        );
        s
    }
}
