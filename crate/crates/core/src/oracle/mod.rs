//! Truncated-chain engine: the reference every other engine is checked
//! against.

mod csv;
mod generator;
mod sojourn;
mod stationary;

pub use csv::{read_table_csv, write_table_csv};
pub use generator::{build_generator, build_generator_with, Generator};
pub use sojourn::{solve_sojourn, SojournSystem};
pub use stationary::{solve_stationary, solve_stationary_with, SteadyStateTable, TAIL_THRESHOLD};

use crate::error::Result;
use crate::model::{validate, EngineKind, ModelParams};
use crate::report::{PerformanceReport, SojournSummary};

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub n_trunc: usize,
    pub tail_threshold: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n_trunc: 400,
            tail_threshold: TAIL_THRESHOLD,
        }
    }
}

/// Validates, builds, solves and summarises.
pub fn run(params: &ModelParams, opts: OracleOptions) -> Result<(SteadyStateTable, PerformanceReport)> {
    validate(params, EngineKind::Oracle)?;
    let gen = build_generator(params, opts.n_trunc)?;
    let table = solve_stationary_with(&gen, opts.tail_threshold)?;
    let report = oracle_measures(&table)?;
    Ok((table, report))
}

pub fn oracle_measures(table: &SteadyStateTable) -> Result<PerformanceReport> {
    let p = table.params;
    let c = p.servers;
    let big_n = table.n_trunc;
    let sums = |phases: std::ops::RangeInclusive<usize>, from: usize| -> (f64, f64) {
        phases
            .flat_map(|j| (from..=big_n).map(move |n| (j, n)))
            .fold((0.0, 0.0), |(m, e), (j, n)| {
                let v = table.prob(j, n);
                (m + v, e + n as f64 * v)
            })
    };
    let (p_vac, mean_n0) = sums(0..=0, 0);
    let (p_idle, _) = sums(1..=c, 0);
    let p_idle = if c == 1 { table.prob(1, 0) } else { p_idle - sums(1..=c, 1).0 };
    let (p_ser, mean_n1) = sums(1..=c, 1);

    let sys = solve_sojourn(&p, big_n)?;
    let (mut arrive, mut weighted) = (0.0, 0.0);
    for (s, v) in table.states() {
        if s.count < big_n && p.is_valid_state(s) {
            arrive += v;
            weighted += v * sys.value(s.phase, s.count)?;
        }
    }
    let served_rate: f64 = table
        .states()
        .map(|(s, v)| v * s.count.min(s.phase) as f64 * p.mu)
        .sum();

    let mut r = PerformanceReport {
        engine: EngineKind::Oracle,
        params: p,
        p00: table.prob(0, 0),
        p_vac,
        p_idle,
        p_ser,
        mean_n0,
        mean_n1,
        mean_n_total: mean_n0 + mean_n1,
        sojourn: SojournSummary {
            s10: sys.value(1, 0).ok(),
            s00: sys.value(0, 0)?,
            mean: weighted / arrive,
        },
        extra: Default::default(),
        half_widths: Default::default(),
        notes: Vec::new(),
    };
    r.set_extra("p10", table.prob(1, 0));
    r.set_extra("p11", table.prob(1, 1));
    r.set_extra("fraction_served", served_rate / p.lambda);
    r.set_extra("sojourn_s01", sys.value(0, 1)?);
    if let Ok(v) = sys.value(1, 1) {
        r.set_extra("sojourn_s11", v);
    }
    if c > 1 {
        for j in 0..=c {
            r.set_extra(&format!("phase_{j}"), table.phase_marginal(j));
        }
    }
    r.set_extra("tail_mass", table.tail_mass);
    r.set_extra("residual", table.residual);
    r.set_extra("n_trunc", big_n as f64);
    Ok(r)
}
