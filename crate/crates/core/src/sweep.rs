//! One engine over a line of parameter values.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineOptions};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::model::ModelParams;
use crate::report::PerformanceReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Lambda,
    Mu,
    Gamma,
    Xi,
}

impl SweepParam {
    pub fn apply(self, p: ModelParams, v: f64) -> ModelParams {
        let mut p = p;
        match self {
            SweepParam::Lambda => p.lambda = v,
            SweepParam::Mu => p.mu = v,
            SweepParam::Gamma => p.gamma = v,
            SweepParam::Xi => p.xi = v,
        }
        p
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Mu => "mu",
            SweepParam::Gamma => "gamma",
            SweepParam::Xi => "xi",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepParam::Lambda),
            "mu" => Ok(SweepParam::Mu),
            "gamma" => Ok(SweepParam::Gamma),
            "xi" => Ok(SweepParam::Xi),
            other => Err(Error::UnknownName {
                kind: "sweep parameter",
                name: other.into(),
                known: "lambda, mu, gamma, xi".into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub report: Option<PerformanceReport>,
    /// Why the point was skipped.
    pub skipped: Option<String>,
}

/// `steps` evenly spaced points from `from` to `to`, both included.
pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => Err(Error::InvalidConfig("steps must be at least 1".into())),
        1 => Ok(vec![from]),
        _ => Ok((0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()),
    }
}

/// Runs every point; failures become skipped rows. Rows come back in grid order.
pub fn sweep(
    base: &ModelParams,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    engine: &dyn Engine,
    opts: &EngineOptions,
) -> Result<Vec<SweepRow>> {
    let points = grid(from, to, steps)?;
    Ok(points
        .par_iter()
        .enumerate()
        .map(|(index, &value)| match engine.run(&param.apply(*base, value), opts) {
            Ok(out) => SweepRow {
                index,
                value,
                report: Some(out.report),
                skipped: None,
            },
            Err(e) => SweepRow {
                index,
                value,
                report: None,
                skipped: Some(e.to_string()),
            },
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

/// Direction of `measure` over the rows that were not skipped.
pub fn trend(rows: &[SweepRow], measure: &str) -> Trend {
    let xs: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.report.as_ref()?.measure(measure))
        .collect();
    let up = xs.windows(2).all(|w| w[1] >= w[0]);
    let down = xs.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => Trend::Constant,
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        _ => Trend::Mixed,
    }
}

/// CSV with the swept value, a status column and the headline measures.
pub fn to_csv(rows: &[SweepRow], param: SweepParam) -> String {
    let mut s = format!("index,{param},status");
    for m in PerformanceReport::HEADLINE {
        s.push(',');
        s.push_str(m);
    }
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{}", r.index, sig12(r.value)));
        match &r.report {
            Some(rep) => {
                s.push_str(",OK");
                for m in PerformanceReport::HEADLINE {
                    s.push(',');
                    if let Some(v) = rep.measure(m) {
                        s.push_str(&sig12(v));
                    }
                }
            }
            None => {
                s.push_str(",SKIPPED");
                s.push_str(&",".repeat(PerformanceReport::HEADLINE.len()));
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{AnalyticEngine, OracleEngine};

    #[test]
    fn inclusive_grid() {
        let g = grid(0.05, 0.5, 10).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.05);
        assert!((g[9] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analytic_skips_unstable_points() {
        let base = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let opts = EngineOptions::default();
        let rows = sweep(&base, SweepParam::Lambda, 0.5, 1.5, 5, &AnalyticEngine, &opts).unwrap();
        let skipped: Vec<f64> = rows.iter().filter(|r| r.skipped.is_some()).map(|r| r.value).collect();
        assert_eq!(skipped, [1.0, 1.25, 1.5]);
        let oracle = sweep(&base, SweepParam::Lambda, 0.5, 1.5, 5, &OracleEngine, &opts).unwrap();
        assert!(oracle.iter().all(|r| r.skipped.is_none()));
        assert!(to_csv(&rows, SweepParam::Lambda).contains("SKIPPED"));
    }

    #[test]
    fn patience_sweep_trend() {
        let base = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let rows = sweep(&base, SweepParam::Xi, 0.05, 0.5, 10, &OracleEngine, &EngineOptions::default()).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(trend(&rows, "mean_n0"), Trend::Decreasing);
    }
}
