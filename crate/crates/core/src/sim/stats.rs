use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    /// Independent samples behind the interval (replications or batches).
    pub replications_used: usize,
}

impl SimEstimate {
    pub fn covers(&self, x: f64) -> bool {
        (self.mean - x).abs() <= self.half_width_95
    }
}

/// Student-t 95% interval from independent samples.
pub fn t_interval(samples: &[f64]) -> Result<SimEstimate> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "a confidence interval needs at least 2 independent samples, got {k}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / k as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (k - 1) as f64)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SimEstimate {
        mean,
        half_width_95: t * (var / k as f64).sqrt(),
        replications_used: k,
    })
}
