//! Single-vacation entry points. Each call builds a fresh
//! [`VacationSolution`]; hold on to one when evaluating repeatedly.

use super::{require_policy, AnalyticOptions, BoundaryProbs, PgfEvaluation, VacationSolution};
use crate::error::Result;
use crate::kernels::Kernels;
use crate::model::{validate, EngineKind, ModelParams, Policy};
use crate::report::PerformanceReport;

pub use super::sojourn::{sv_sojourn_busy, sv_sojourn_vacation};

fn solve(p: &ModelParams) -> Result<VacationSolution> {
    require_policy(p, Policy::Single)?;
    VacationSolution::new(p, AnalyticOptions::default())
}

pub fn sv_kernels(p: &ModelParams) -> Result<Kernels> {
    validate(p, EngineKind::Analytic)?;
    Kernels::new(p, AnalyticOptions::default().quad)
}

pub fn sv_p00(p: &ModelParams) -> Result<f64> {
    Ok(solve(p)?.p00())
}

pub fn sv_boundary(p: &ModelParams) -> Result<BoundaryProbs> {
    Ok(solve(p)?.boundary())
}

pub fn sv_pgf0(p: &ModelParams, z: f64) -> Result<PgfEvaluation> {
    solve(p)?.pgf0(z)
}

pub fn sv_pgf1(p: &ModelParams, z: f64) -> Result<PgfEvaluation> {
    solve(p)?.pgf1(z)
}

pub fn sv_measures(p: &ModelParams) -> Result<PerformanceReport> {
    solve(p)?.measures()
}
