//! Side-by-side engine runs with a pass/fail gate on analytic vs oracle.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{EngineOptions, EngineRegistry};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::model::{EngineKind, ModelParams};
use crate::report::PerformanceReport;
use crate::sim::SimEstimate;

pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowStatus {
    Pass,
    Fail,
    /// Reported for information; never gates.
    Info,
    /// Fewer than two deterministic values to compare.
    Unchecked,
}

impl RowStatus {
    pub fn label(self) -> &'static str {
        match self {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Info => "INFO",
            RowStatus::Unchecked => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub measure: String,
    pub analytic: Option<f64>,
    pub oracle: Option<f64>,
    pub sim: Option<SimEstimate>,
    /// Whether the simulation interval covers the oracle (else analytic) value.
    pub sim_covers: Option<bool>,
    pub abs_diff: Option<f64>,
    pub tol: f64,
    /// For printed-formula rows: distance from the corrected value.
    pub discrepancy: Option<f64>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub params: ModelParams,
    pub engines: Vec<String>,
    pub rows: Vec<CompareRow>,
    pub notes: Vec<String>,
}

const MEASURES: [&str; 13] = [
    "p00",
    "p10",
    "p11",
    "p_vac",
    "p_idle",
    "p_ser",
    "mean_n0",
    "mean_n1",
    "mean_n_total",
    "fraction_served",
    "sojourn_s10",
    "sojourn_s00",
    "sojourn_mean",
];

/// Printed formula name and the corrected measure it should equal.
const PRINTED: [(&str, &str); 4] = [
    ("sojourn_s00_paper_formula", "sojourn_s00"),
    ("sojourn_s01_paper_sum", "sojourn_s01"),
    ("mean_n1_paper_formula", "mean_n1"),
    ("p00_paper_formula", "p00"),
];

pub fn compare(
    params: &ModelParams,
    engines: &[&str],
    registry: &EngineRegistry,
    opts: &EngineOptions,
    tol: f64,
) -> Result<Comparison> {
    if engines.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "compare needs at least two engines, got {}",
            engines.len()
        )));
    }
    let mut analytic = None;
    let mut oracle = None;
    let mut sim = None;
    let mut names = Vec::new();
    for name in engines {
        let e = registry.get(name)?;
        let out = e.run(params, opts)?;
        names.push(e.name().to_string());
        match e.kind() {
            EngineKind::Analytic => analytic = Some(out.report),
            EngineKind::Oracle => oracle = Some(out.report),
            EngineKind::Simulation => sim = Some(out.report),
        }
    }
    Ok(build(*params, names, analytic.as_ref(), oracle.as_ref(), sim.as_ref(), tol))
}

fn sim_estimate(r: &PerformanceReport, name: &str) -> Option<SimEstimate> {
    let mean = r.measure(name).filter(|v| v.is_finite())?;
    let hw = *r.half_widths.get(name)?;
    let used = r.extra.get("samples").map_or(0, |v| *v as usize);
    Some(SimEstimate {
        mean,
        half_width_95: hw,
        replications_used: used,
    })
}

/// Assembles rows from whichever reports are present.
pub fn build(
    params: ModelParams,
    engines: Vec<String>,
    analytic: Option<&PerformanceReport>,
    oracle: Option<&PerformanceReport>,
    sim: Option<&PerformanceReport>,
    tol: f64,
) -> Comparison {
    let mut rows = Vec::new();
    for name in MEASURES {
        let a = analytic.and_then(|r| r.measure(name));
        let o = oracle.and_then(|r| r.measure(name));
        let s = sim.and_then(|r| sim_estimate(r, name));
        if a.is_none() && o.is_none() && s.is_none() {
            continue;
        }
        let abs_diff = a.zip(o).map(|(x, y)| (x - y).abs());
        let status = match abs_diff {
            Some(d) if d <= tol => RowStatus::Pass,
            Some(_) => RowStatus::Fail,
            None => RowStatus::Unchecked,
        };
        let target = o.or(a);
        rows.push(CompareRow {
            measure: name.to_string(),
            analytic: a,
            oracle: o,
            sim: s,
            sim_covers: s.zip(target).map(|(e, t)| e.covers(t)),
            abs_diff,
            tol,
            discrepancy: None,
            status,
        });
    }
    let mut notes = Vec::new();
    if let Some(ar) = analytic {
        for (printed, corrected) in PRINTED {
            let Some(v) = ar.extra.get(printed).copied() else { continue };
            let reference = oracle
                .and_then(|r| r.measure(corrected))
                .or_else(|| ar.measure(corrected));
            rows.push(CompareRow {
                measure: printed.to_string(),
                analytic: Some(v),
                oracle: oracle.and_then(|r| r.measure(corrected)),
                sim: None,
                sim_covers: None,
                abs_diff: None,
                tol,
                discrepancy: reference.map(|r| (v - r).abs()),
                status: RowStatus::Info,
            });
        }
        notes.extend(ar.notes.iter().cloned());
    }
    if let Some(sr) = sim {
        notes.extend(sr.notes.iter().map(|n| format!("simulation: {n}")));
    }
    Comparison {
        params,
        engines,
        rows,
        notes,
    }
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != RowStatus::Fail)
    }

    pub fn row(&self, measure: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.measure == measure)
    }

    fn cells(&self) -> Vec<[String; 10]> {
        let f = |x: Option<f64>| x.map(sig12).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| {
                [
                    r.measure.clone(),
                    f(r.analytic),
                    f(r.oracle),
                    f(r.sim.map(|e| e.mean)),
                    f(r.sim.map(|e| e.half_width_95)),
                    r.sim_covers.map(|c| if c { "yes" } else { "no" }.to_string()).unwrap_or_default(),
                    f(r.abs_diff),
                    sig12(r.tol),
                    f(r.discrepancy),
                    r.status.label().to_string(),
                ]
            })
            .collect()
    }

    pub const COLUMNS: [&'static str; 10] = [
        "measure",
        "analytic",
        "oracle",
        "sim_mean",
        "sim_half_width",
        "sim_covers",
        "abs_diff",
        "tol",
        "discrepancy",
        "status",
    ];

    pub fn to_csv(&self) -> String {
        let mut s = Self::COLUMNS.join(",");
        s.push('\n');
        for row in self.cells() {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_table(&self) -> String {
        let cells = self.cells();
        let mut width = Self::COLUMNS.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut s = String::new();
        let line = |s: &mut String, row: &[String]| {
            for (i, c) in row.iter().enumerate() {
                let _ = write!(s, "{:<w$}  ", c, w = width[i]);
            }
            let trimmed = s.trim_end().len();
            s.truncate(trimmed);
            s.push('\n');
        };
        line(&mut s, &Self::COLUMNS.map(String::from));
        for row in &cells {
            line(&mut s, row);
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(
            s,
            "overall: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_engine_is_not_a_comparison() {
        let r = EngineRegistry::default();
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        assert!(compare(&p, &["oracle"], &r, &EngineOptions::default(), DEFAULT_TOL).is_err());
    }

    #[test]
    fn standard_point_passes_and_flags_printed_formulas() {
        let r = EngineRegistry::default();
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let c = compare(&p, &["analytic", "oracle"], &r, &EngineOptions::default(), DEFAULT_TOL).unwrap();
        assert!(c.passed(), "{}", c.to_table());
        let s00 = c.row("sojourn_s00_paper_formula").unwrap();
        assert_eq!(s00.status, RowStatus::Info);
        assert!(s00.discrepancy.unwrap() > 1e-3);
        assert!(c.row("mean_n1_paper_formula").is_some());
        assert!(c.to_csv().starts_with("measure,analytic,oracle"));
    }
}
