//! Machine-readable run record: input digest, configuration, result summary,
//! and rate diagnostics. Serialized as JSON with shortest-round-trip float
//! formatting, so reloading reproduces every numeric field bit for bit. The
//! timestamp is the only field that differs between identical runs.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    /// Seconds since the Unix epoch; excluded from determinism comparisons.
    pub timestamp_unix: u64,
    /// `sha256:<hex>` of the raw matrix file bytes.
    pub input_digest: String,
    pub config: RunConfig,
    pub result: RunResult,
    pub diagnostics: Option<RunDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub target: String,
    pub epsilon: f64,
    pub gamma: f64,
    /// Where gamma came from: "analytic", "gershgorin", or "user".
    pub gamma_source: String,
    pub step_tol: f64,
    pub feasibility_tol: f64,
    pub max_iter: usize,
    pub radicand_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: String,
    /// The reported quantity: abscissa, leftmost real part, or radius.
    pub value: f64,
    pub objective: f64,
    pub omega_star: Vec<f64>,
    pub iterations: usize,
    pub gamma_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub predicted_lo: f64,
    pub predicted_hi: f64,
    pub h_v: Vec<Vec<f64>>,
    pub final_empirical_ratio: Option<f64>,
    pub final_tangential_fraction: Option<f64>,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

pub fn sha256_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut out = String::with_capacity(7 + 64);
    out.push_str("sha256:");
    for byte in hash {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
