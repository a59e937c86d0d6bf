//! Discrete-event simulation of the same queues.

mod des;
mod stats;

pub use des::{run_replication, sojourn_key, Accumulator, Conservation, RunOutput, TAGGED_MAX_COUNT};
pub use stats::{t_interval, SimEstimate};

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, EngineKind, ModelParams, Policy, QueueState};
use crate::report::{PerformanceReport, SojournSummary};

/// Fewest tagged arrivals accepted for a conditional sojourn estimate.
pub const MIN_TAGGED: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
    /// Batches per replication; the interval uses them when there is one replication.
    pub batch_count: usize,
}

impl SimConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            horizon: 1e5,
            warmup: 1e4,
            replications: 10,
            seed: 1,
            batch_count: 20,
        }
    }

    pub fn check(&self) -> Result<()> {
        validate(&self.params, EngineKind::Simulation)?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.warmup >= 0.0 && self.warmup < self.horizon && self.horizon.is_finite()) {
            return bad(format!(
                "need 0 <= warmup < horizon (warmup {}, horizon {})",
                self.warmup, self.horizon
            ));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.batch_count == 0 || (self.replications == 1 && self.batch_count < 2) {
            return bad(format!(
                "batch_count = {} too small for {} replication(s)",
                self.batch_count, self.replications
            ));
        }
        Ok(())
    }
}

/// Per-replication summary, also the row format of the raw CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replication: usize,
    pub values: BTreeMap<String, f64>,
    pub tagged_counts: BTreeMap<String, u64>,
    pub arrivals: u64,
    pub served: u64,
    pub reneged: u64,
    pub in_system: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub estimates: BTreeMap<String, SimEstimate>,
    /// Tagged arrivals per conditional sojourn key, summed over replications.
    pub tagged_counts: BTreeMap<String, u64>,
    pub replications: Vec<ReplicationSummary>,
}

pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.check()?;
    let runs: Vec<RunOutput> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            run_replication(
                &cfg.params,
                cfg.horizon,
                cfg.warmup,
                cfg.batch_count,
                cfg.seed,
                r as u64,
            )
        })
        .collect();

    let mut replications = Vec::with_capacity(runs.len());
    let mut tagged_counts: BTreeMap<String, u64> = BTreeMap::new();
    for (r, run) in runs.iter().enumerate() {
        let mut total = run.batches[0].clone();
        for b in &run.batches[1..] {
            total.merge(b);
        }
        let mut counts = BTreeMap::new();
        for (s, t) in &total.tagged {
            counts.insert(sojourn_key(*s, false), t.count);
            counts.insert(sojourn_key(*s, true), t.served_count);
        }
        for (k, v) in &counts {
            *tagged_counts.entry(k.clone()).or_default() += v;
        }
        let k = run.conservation;
        replications.push(ReplicationSummary {
            replication: r,
            values: total.values(),
            tagged_counts: counts,
            arrivals: k.arrivals,
            served: k.served,
            reneged: k.reneged,
            in_system: k.in_system,
        });
    }

    // Independent samples: replications, or batches of the only replication.
    let samples: Vec<BTreeMap<String, f64>> = if cfg.replications > 1 {
        replications.iter().map(|r| r.values.clone()).collect()
    } else {
        runs[0].batches.iter().map(Accumulator::values).collect()
    };
    let mut keys: Vec<String> = samples.iter().flat_map(|m| m.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let mut estimates = BTreeMap::new();
    for key in keys {
        if let Some(&n) = tagged_counts.get(&key) {
            if n < MIN_TAGGED {
                continue;
            }
        }
        let xs: Vec<f64> = samples.iter().filter_map(|m| m.get(&key).copied()).collect();
        if let Ok(e) = t_interval(&xs) {
            estimates.insert(key, e);
        }
    }
    Ok(SimResult {
        config: *cfg,
        estimates,
        tagged_counts,
        replications,
    })
}

/// Conditional sojourn of customers arriving to find `entry`.
pub fn estimate_conditional_sojourn(cfg: &SimConfig, entry: QueueState) -> Result<SimEstimate> {
    simulate(cfg)?.conditional_sojourn(entry, false)
}

impl SimResult {
    pub fn estimate(&self, name: &str) -> Option<SimEstimate> {
        self.estimates.get(name).copied()
    }

    pub fn conditional_sojourn(&self, entry: QueueState, served_only: bool) -> Result<SimEstimate> {
        let key = sojourn_key(entry, served_only);
        if entry.count > TAGGED_MAX_COUNT || !self.config.params.is_valid_state(entry) {
            return Err(Error::InvalidState {
                phase: entry.phase,
                count: entry.count,
                reason: format!("not tracked (counts up to {TAGGED_MAX_COUNT})"),
            });
        }
        let got = self.tagged_counts.get(&key).copied().unwrap_or(0);
        match self.estimates.get(&key) {
            Some(e) if got >= MIN_TAGGED => Ok(*e),
            _ => Err(Error::InsufficientSamples {
                got,
                needed: MIN_TAGGED,
            }),
        }
    }

    pub fn to_report(&self) -> PerformanceReport {
        let p = self.config.params;
        let mean = |k: &str| self.estimate(k).map_or(f64::NAN, |e| e.mean);
        let s10 = (p.policy == Policy::Single)
            .then(|| self.estimate("sojourn_s10").map(|e| e.mean))
            .flatten();
        let mut r = PerformanceReport {
            engine: EngineKind::Simulation,
            params: p,
            p00: mean("p00"),
            p_vac: mean("p_vac"),
            p_idle: mean("p_idle"),
            p_ser: mean("p_ser"),
            mean_n0: mean("mean_n0"),
            mean_n1: mean("mean_n1"),
            mean_n_total: mean("mean_n_total"),
            sojourn: SojournSummary {
                s10,
                s00: mean("sojourn_s00"),
                mean: mean("sojourn_mean"),
            },
            extra: BTreeMap::new(),
            half_widths: BTreeMap::new(),
            notes: Vec::new(),
        };
        for (k, e) in &self.estimates {
            if r.measure(k).is_none() {
                r.set_extra(k, e.mean);
            }
            r.half_widths.insert(k.clone(), e.half_width_95);
        }
        let samples = if self.config.replications > 1 {
            self.config.replications
        } else {
            self.config.batch_count
        };
        r.set_extra("samples", samples as f64);
        for key in ["sojourn_s00", "sojourn_s10"] {
            if !self.estimates.contains_key(key) {
                let got = self.tagged_counts.get(key).copied().unwrap_or(0);
                if p.policy == Policy::Single || key == "sojourn_s00" {
                    r.notes.push(format!("{key}: only {got} tagged arrivals, no estimate"));
                }
            }
        }
        r
    }

    /// One row per replication: counts, then every measure in name order.
    pub fn write_raw_csv(&self, mut w: impl Write) -> Result<()> {
        let mut keys: Vec<&String> = self
            .replications
            .iter()
            .flat_map(|r| r.values.keys())
            .collect();
        keys.sort();
        keys.dedup();
        write!(w, "replication,arrivals,served,reneged,in_system")?;
        for k in &keys {
            write!(w, ",{k}")?;
        }
        writeln!(w)?;
        for r in &self.replications {
            write!(
                w,
                "{},{},{},{},{}",
                r.replication, r.arrivals, r.served, r.reneged, r.in_system
            )?;
            for k in &keys {
                match r.values.get(*k) {
                    Some(v) => write!(w, ",{v:e}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
