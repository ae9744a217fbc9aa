//! Serializable results, one top-level record per command.

use knudsen_core::profiles::{
    ConvergenceEstimate, ConvergenceIndexing, Spacing, TemperatureLayerSolution, VelocityLayerSolution,
};
use knudsen_core::verification::VerifyReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureJumpRecord {
    pub command: String,
    pub zeta: f64,
    pub solution: TemperatureLayerSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KramersRecord {
    pub command: String,
    pub slip: f64,
    pub solution: VelocityLayerSolution,
}

/// `zeta[c][m]` belongs to `chis[c]` and `orders[m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Record {
    pub command: String,
    pub kn: f64,
    pub pr: f64,
    pub chis: Vec<f64>,
    pub orders: Vec<usize>,
    pub zeta: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Record {
    pub command: String,
    pub kn: f64,
    pub indexing: ConvergenceIndexing,
    pub chis: Vec<f64>,
    pub ks: Vec<u32>,
    /// Ordered by `k`, then `χ`.
    pub estimates: Vec<ConvergenceEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub command: String,
    pub order: usize,
    pub kn: f64,
    pub pr: f64,
    pub spacing: Spacing,
    pub chi: Vec<f64>,
    pub zeta: Vec<f64>,
    /// `χ/(2-χ) ζ`, finite as `χ -> 0`.
    pub scaled_zeta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub command: String,
    pub spacing: Spacing,
    pub y: Vec<f64>,
    #[serde(flatten)]
    pub data: ProfileData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileData {
    Temperature {
        zeta: f64,
        solution: TemperatureLayerSolution,
        theta_defect: Vec<f64>,
        theta_normalized: Vec<f64>,
        /// `None` past a pole of the effective conductivity.
        conductivity_ratio: Vec<Option<f64>>,
    },
    Kramers {
        slip: f64,
        solution: VelocityLayerSolution,
        u1: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub command: String,
    pub passed: bool,
    pub report: VerifyReport,
}

/// Nonzero entries of the coupling block, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub command: String,
    pub kind: String,
    pub order: usize,
    pub pr: Option<f64>,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}
