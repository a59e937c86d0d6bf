use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{EngineKind, ModelParams};

/// Mean sojourn figures. `s10` is absent when state (1,0) does not exist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SojournSummary {
    pub s10: Option<f64>,
    pub s00: f64,
    pub mean: f64,
}

/// All scalar measures from one engine run.
///
/// For several servers `p_vac` is `P(J = 0)`, `p_idle` is `P(N = 0, J ≥ 1)`
/// and the phase marginals are listed in `extra` as `phase_<j>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub engine: EngineKind,
    pub params: ModelParams,
    pub p00: f64,
    pub p_vac: f64,
    pub p_idle: f64,
    pub p_ser: f64,
    pub mean_n0: f64,
    pub mean_n1: f64,
    pub mean_n_total: f64,
    pub sojourn: SojournSummary,
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
    /// 95% half-widths, keyed like the measure they belong to. Simulation only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub half_widths: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PerformanceReport {
    /// Looks up a measure by the name used in tables and comparisons.
    pub fn measure(&self, name: &str) -> Option<f64> {
        match name {
            "p00" => Some(self.p00),
            "p_vac" => Some(self.p_vac),
            "p_idle" => Some(self.p_idle),
            "p_ser" => Some(self.p_ser),
            "mean_n0" => Some(self.mean_n0),
            "mean_n1" => Some(self.mean_n1),
            "mean_n_total" => Some(self.mean_n_total),
            "sojourn_s10" => self.sojourn.s10,
            "sojourn_s00" => Some(self.sojourn.s00),
            "sojourn_mean" => Some(self.sojourn.mean),
            other => self.extra.get(other).copied(),
        }
    }

    /// Headline measures in a fixed order.
    pub const HEADLINE: [&'static str; 10] = [
        "p00",
        "p_vac",
        "p_idle",
        "p_ser",
        "mean_n0",
        "mean_n1",
        "mean_n_total",
        "sojourn_s10",
        "sojourn_s00",
        "sojourn_mean",
    ];

    pub fn set_extra(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.extra.insert(key.to_string(), value);
        }
    }
}
