use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::{rate_with, ModelParams, QueueState};

/// Expected sojourn of a customer by the state it finds on arrival.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SojournSystem {
    pub params: ModelParams,
    pub n_trunc: usize,
    /// `values[j][n] = E(S_{j,n})`; `NaN` where `(j, n)` is not a state.
    pub values: Vec<Vec<f64>>,
    pub method: String,
}

impl SojournSystem {
    pub fn value(&self, phase: usize, count: usize) -> Result<f64> {
        match self.values.get(phase).and_then(|r| r.get(count)) {
            Some(v) if v.is_finite() => Ok(*v),
            _ => Err(Error::InvalidState {
                phase,
                count,
                reason: format!("no sojourn value (levels 0..={})", self.n_trunc),
            }),
        }
    }
}

/// First-step equations for a tagged customer.
///
/// The chain state is `(j, k)` where `k` counts the tagged customer and
/// everyone ahead of it; customers behind never affect it, so the system has
/// no coupling to higher levels and needs no truncation. While `k > j` the
/// tagged customer waits; it leaves unserved at rate ξ. Once `k ≤ j` it is in
/// service and `1/μ` remains.
pub fn solve_sojourn(params: &ModelParams, n_trunc: usize) -> Result<SojournSystem> {
    let c = params.servers;
    let rules = params.rules();
    let top = n_trunc + 1;
    let width = c + 1;
    let idx = |j: usize, k: usize| k * width + j;
    let size = (top + 1) * width;
    let mut a = BandMatrix::zeros(size, width, 1);
    let mut b = vec![0.0; size];
    let served = 1.0 / params.mu;

    for k in 0..=top {
        for j in 0..=c {
            let i = idx(j, k);
            a.add(i, i, 1.0);
            let s = QueueState::new(j, k);
            if k <= j || !params.is_valid_state(s) {
                b[i] = if params.is_valid_state(s) { served } else { 0.0 };
                continue;
            }
            let up = if j < c {
                rate_with(params, rules, s, QueueState::new(j + 1, k))?
            } else {
                0.0
            };
            let ahead = rate_with(params, rules, s, QueueState::new(j, k - 1))? - params.xi;
            let total = up + ahead + params.xi;
            if !(total > 0.0) {
                return Err(Error::SingularSystem { pivot: i });
            }
            // Scaled by the holding time: e = 1/total + Σ (r/total) e'.
            b[i] = 1.0 / total;
            if up > 0.0 {
                a.add(i, idx(j + 1, k), -up / total);
            }
            if ahead > 0.0 {
                a.add(i, idx(j, k - 1), -ahead / total);
            }
        }
    }
    let e = a.solve(&b)?;

    let mut values = vec![vec![f64::NAN; n_trunc + 1]; c + 1];
    for (j, row) in values.iter_mut().enumerate() {
        for (n, v) in row.iter_mut().enumerate() {
            if params.is_valid_state(QueueState::new(j, n)) {
                *v = e[idx(j, n + 1)];
            }
        }
    }
    Ok(SojournSystem {
        params: *params,
        n_trunc,
        values,
        method: "first-step linear equations, banded LU".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::sojourn::{sv_sojourn_busy, sv_sojourn_vacation};

    #[test]
    fn busy_entries_match_closed_form() {
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let s = solve_sojourn(&p, 40).unwrap();
        for n in 0..=20 {
            let exact = (n + 1) as f64 / (p.mu + n as f64 * p.xi);
            assert!((s.value(1, n).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn vacation_entries_match_recursion() {
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let s = solve_sojourn(&p, 40).unwrap();
        for n in 0..=20 {
            assert!((s.value(0, n).unwrap() - sv_sojourn_vacation(&p, n)).abs() < 1e-12);
        }
        assert!((s.value(1, 0).unwrap() - sv_sojourn_busy(&p, 0)).abs() < 1e-15);
    }

    #[test]
    fn multiple_has_no_idle_entry() {
        let p = ModelParams::multiple(0.5, 1.0, 0.5, 0.2);
        let s = solve_sojourn(&p, 20).unwrap();
        assert!(s.value(1, 0).is_err());
        assert!(s.value(1, 1).is_ok());
    }

    #[test]
    fn free_server_means_service_only() {
        let p = ModelParams::multi_server(1.5, 1.0, 0.5, 0.2, 3);
        let s = solve_sojourn(&p, 20).unwrap();
        assert_eq!(s.value(3, 2).unwrap(), 1.0);
        // Wait for the first of c services or own patience, then serve.
        let expect = (1.0 + 3.0) / (3.0 * p.mu + p.xi);
        assert!((s.value(3, 3).unwrap() - expect).abs() < 1e-14);
    }
}
