//! Multiple-vacation entry points.

use super::{require_policy, AnalyticOptions, PgfEvaluation, VacationSolution};
use crate::error::{Error, Result};
use crate::kernels::Kernels;
use crate::model::{validate, EngineKind, ModelParams, Policy};
use crate::report::PerformanceReport;

pub use super::sojourn::mv_sojourn;

fn solve(p: &ModelParams) -> Result<VacationSolution> {
    require_policy(p, Policy::Multiple)?;
    VacationSolution::new(p, AnalyticOptions::default())
}

pub fn mv_kernels(p: &ModelParams) -> Result<Kernels> {
    validate(p, EngineKind::Analytic)?;
    Kernels::new(p, AnalyticOptions::default().quad)
}

pub fn mv_p00(p: &ModelParams) -> Result<f64> {
    Ok(solve(p)?.p00())
}

/// `p11 = (ξ - γA) p00 / (μA)`; positive because `A < ξ/γ`.
pub fn mv_p11(p: &ModelParams) -> Result<f64> {
    let s = solve(p)?;
    let p11 = s.boundary().p11;
    if p11 > 0.0 {
        Ok(p11)
    } else {
        Err(Error::NonPositiveResult {
            what: "p11".into(),
            value: p11,
        })
    }
}

pub fn mv_pgf0(p: &ModelParams, z: f64) -> Result<PgfEvaluation> {
    solve(p)?.pgf0(z)
}

pub fn mv_pgf1(p: &ModelParams, z: f64) -> Result<PgfEvaluation> {
    solve(p)?.pgf1(z)
}

pub fn mv_measures(p: &ModelParams) -> Result<PerformanceReport> {
    solve(p)?.measures()
}
