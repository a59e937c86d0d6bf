//! Engines behind one trait, looked up by name.

use crate::analytic::{AnalyticOptions, PgfEvaluation, VacationSolution};
use crate::error::{Error, Result};
use crate::model::{EngineKind, ModelParams};
use crate::oracle::{self, OracleOptions, SteadyStateTable};
use crate::report::PerformanceReport;
use crate::sim::{self, SimConfig, SimResult};

/// Simulation settings without the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSettings {
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
    pub batch_count: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        let c = SimConfig::new(ModelParams::single(1.0, 1.0, 1.0, 1.0));
        Self {
            horizon: c.horizon,
            warmup: c.warmup,
            replications: c.replications,
            seed: c.seed,
            batch_count: c.batch_count,
        }
    }
}

impl SimSettings {
    pub fn config(&self, params: ModelParams) -> SimConfig {
        SimConfig {
            params,
            horizon: self.horizon,
            warmup: self.warmup,
            replications: self.replications,
            seed: self.seed,
            batch_count: self.batch_count,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    pub analytic: AnalyticOptions,
    pub oracle: OracleOptions,
    pub sim: SimSettings,
    /// Points at which the analytic engine also evaluates `P0` and `P1`.
    pub pgf_grid: Vec<f64>,
}

/// What an engine produced besides the report.
#[derive(Clone, Debug)]
pub enum Detail {
    Analytic { pgf: Vec<(PgfEvaluation, PgfEvaluation)> },
    Oracle(Box<SteadyStateTable>),
    Simulation(Box<SimResult>),
}

#[derive(Clone, Debug)]
pub struct EngineOutput {
    pub report: PerformanceReport,
    pub detail: Detail,
}

pub trait Engine: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> EngineKind;
    fn run(&self, params: &ModelParams, opts: &EngineOptions) -> Result<EngineOutput>;
}

pub struct AnalyticEngine;
pub struct OracleEngine;
pub struct SimulationEngine;

impl Engine for AnalyticEngine {
    fn name(&self) -> &'static str {
        "analytic"
    }
    fn kind(&self) -> EngineKind {
        EngineKind::Analytic
    }
    fn run(&self, params: &ModelParams, opts: &EngineOptions) -> Result<EngineOutput> {
        let sol = VacationSolution::new(params, opts.analytic)?;
        let report = sol.measures()?;
        let pgf = opts
            .pgf_grid
            .iter()
            .map(|&z| Ok((sol.pgf0(z)?, sol.pgf1(z)?)))
            .collect::<Result<_>>()?;
        Ok(EngineOutput {
            report,
            detail: Detail::Analytic { pgf },
        })
    }
}

impl Engine for OracleEngine {
    fn name(&self) -> &'static str {
        "oracle"
    }
    fn kind(&self) -> EngineKind {
        EngineKind::Oracle
    }
    fn run(&self, params: &ModelParams, opts: &EngineOptions) -> Result<EngineOutput> {
        let (table, report) = oracle::run(params, opts.oracle)?;
        Ok(EngineOutput {
            report,
            detail: Detail::Oracle(Box::new(table)),
        })
    }
}

impl Engine for SimulationEngine {
    fn name(&self) -> &'static str {
        "simulation"
    }
    fn kind(&self) -> EngineKind {
        EngineKind::Simulation
    }
    fn run(&self, params: &ModelParams, opts: &EngineOptions) -> Result<EngineOutput> {
        let result = sim::simulate(&opts.sim.config(*params))?;
        Ok(EngineOutput {
            report: result.to_report(),
            detail: Detail::Simulation(Box::new(result)),
        })
    }
}

pub struct EngineRegistry {
    engines: Vec<Box<dyn Engine>>,
}

impl Default for EngineRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(AnalyticEngine));
        r.register(Box::new(OracleEngine));
        r.register(Box::new(SimulationEngine));
        r
    }
}

impl EngineRegistry {
    pub fn empty() -> Self {
        Self { engines: Vec::new() }
    }

    /// Adds an engine, replacing any with the same name.
    pub fn register(&mut self, engine: Box<dyn Engine>) {
        self.engines.retain(|e| e.name() != engine.name());
        self.engines.push(engine);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.iter().map(|e| e.name()).collect()
    }

    /// Looks up by name; `sim` is accepted for `simulation`.
    pub fn get(&self, name: &str) -> Result<&dyn Engine> {
        let want = if name == "sim" { "simulation" } else { name };
        self.engines
            .iter()
            .find(|e| e.name() == want)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "engine",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn by_kind(&self, kind: EngineKind) -> Option<&dyn Engine> {
        self.engines.iter().find(|e| e.kind() == kind).map(|e| e.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let r = EngineRegistry::default();
        assert_eq!(r.names(), ["analytic", "oracle", "simulation"]);
        assert_eq!(r.get("sim").unwrap().kind(), EngineKind::Simulation);
        assert!(matches!(r.get("spectral"), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn pgf_grid_is_evaluated() {
        let opts = EngineOptions {
            pgf_grid: vec![-0.5, 0.0, 0.5],
            ..EngineOptions::default()
        };
        let out = AnalyticEngine
            .run(&ModelParams::single(0.5, 1.0, 0.5, 0.2), &opts)
            .unwrap();
        let Detail::Analytic { pgf } = out.detail else { panic!() };
        assert_eq!(pgf.len(), 3);
        assert_eq!(pgf[1].0.value, out.report.p00);
    }
}
