use serde::{Deserialize, Serialize};

use super::generator::Generator;
use crate::error::{Error, Result};
use crate::model::{ModelParams, QueueState};

/// Default bound on the mass of the top five levels.
pub const TAIL_THRESHOLD: f64 = 1e-9;

/// Truncated stationary distribution `π(j, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateTable {
    pub params: ModelParams,
    pub n_trunc: usize,
    /// `probs[j][n]`, clamped to be nonnegative.
    pub probs: Vec<Vec<f64>>,
    /// Mass at levels `N-4 ..= N`.
    pub tail_mass: f64,
    /// `max |(π Q)_i|`.
    pub residual: f64,
}

impl SteadyStateTable {
    pub fn prob(&self, phase: usize, count: usize) -> f64 {
        self.probs
            .get(phase)
            .and_then(|r| r.get(count))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn phase_marginal(&self, phase: usize) -> f64 {
        self.probs[phase].iter().sum()
    }

    /// `Σ_n z^n π(j, n)`.
    pub fn partial_pgf(&self, phase: usize, z: f64) -> f64 {
        self.probs[phase].iter().rev().fold(0.0, |acc, p| acc * z + p)
    }

    pub fn states(&self) -> impl Iterator<Item = (QueueState, f64)> + '_ {
        self.probs.iter().enumerate().flat_map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(n, &p)| (QueueState::new(j, n), p))
        })
    }
}

/// Solves `π Q = 0`, `Σ π = 1` with the threshold [`TAIL_THRESHOLD`].
pub fn solve_stationary(gen: &Generator) -> Result<SteadyStateTable> {
    solve_stationary_with(gen, TAIL_THRESHOLD)
}

/// Grassmann–Taksar–Heyman elimination on a level-major ordering.
///
/// With states ordered by count and then phase the generator is banded, and
/// GTH keeps that band. It never subtracts, so small probabilities deep in
/// the tail keep full relative accuracy.
pub fn solve_stationary_with(gen: &Generator, tail_threshold: f64) -> Result<SteadyStateTable> {
    let c = gen.params.servers;
    let big_n = gen.n_trunc;

    // Compact order over valid states and its inverse.
    let mut order = Vec::new();
    let mut pos = vec![usize::MAX; gen.dim()];
    for n in 0..=big_n {
        for j in 0..=c {
            let i = gen.index(QueueState::new(j, n));
            if gen.is_valid(i) {
                pos[i] = order.len();
                order.push(i);
            }
        }
    }
    let size = order.len();
    let mut w = 0;
    for (k, &i) in order.iter().enumerate() {
        for (col, _) in gen.row(i) {
            w = w.max(k.abs_diff(pos[col]));
        }
    }
    let width = 2 * w + 1;
    let mut q = vec![0.0; size * width];
    let at = |r: usize, col: usize| r * width + (col + w - r);
    for (k, &i) in order.iter().enumerate() {
        for (col, v) in gen.row(i) {
            if col != i {
                q[at(k, pos[col])] = v;
            }
        }
    }

    let mut pivots = vec![0.0; size];
    for k in (1..size).rev() {
        let lo = k.saturating_sub(w);
        let s: f64 = (lo..k).map(|l| q[at(k, l)]).sum();
        if !(s > 0.0) {
            return Err(Error::SingularSystem { pivot: k });
        }
        pivots[k] = s;
        for i in lo..k {
            let qik = q[at(i, k)];
            if qik == 0.0 {
                continue;
            }
            let f = qik / s;
            for l in lo..k {
                if l != i {
                    let qkl = q[at(k, l)];
                    if qkl != 0.0 {
                        q[at(i, l)] += f * qkl;
                    }
                }
            }
        }
    }

    let mut x = vec![0.0; size];
    x[0] = 1.0;
    for k in 1..size {
        let lo = k.saturating_sub(w);
        let s: f64 = (lo..k).map(|i| x[i] * q[at(i, k)]).sum();
        x[k] = s / pivots[k];
    }
    let total: f64 = x.iter().sum();

    let mut flat = vec![0.0; gen.dim()];
    for (k, &i) in order.iter().enumerate() {
        flat[i] = (x[k] / total).max(0.0);
    }
    let residual = gen
        .left_multiply(&flat)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let probs: Vec<Vec<f64>> = flat.chunks(big_n + 1).map(<[f64]>::to_vec).collect();
    let tail_mass: f64 = probs
        .iter()
        .map(|row| row[big_n.saturating_sub(4)..].iter().sum::<f64>())
        .sum();
    if tail_mass > tail_threshold {
        return Err(Error::TruncationInsufficient {
            tail_mass,
            threshold: tail_threshold,
        });
    }
    Ok(SteadyStateTable {
        params: gen.params,
        n_trunc: big_n,
        probs,
        tail_mass,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Policy;
    use crate::oracle::build_generator;

    fn table(p: ModelParams, n: usize) -> SteadyStateTable {
        solve_stationary(&build_generator(&p, n).unwrap()).unwrap()
    }

    #[test]
    fn level_cuts_balance() {
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let t = table(p, 200);
        for n in 0..50 {
            // Cut between levels n and n+1: λ(π0n + π1n) = (n+1)ξ π0,n+1 + (μ + nξ) π1,n+1.
            let up = p.lambda * (t.prob(0, n) + t.prob(1, n));
            let down = (n + 1) as f64 * p.xi * t.prob(0, n + 1)
                + (p.mu + n as f64 * p.xi) * t.prob(1, n + 1);
            assert!((up - down).abs() < 1e-14, "level {n}: {up} vs {down}");
        }
    }

    #[test]
    fn boundary_identity_single() {
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let t = table(p, 400);
        assert!((t.prob(1, 0) - p.gamma / p.lambda * t.prob(0, 0)).abs() < 1e-10);
        assert!(t.residual <= 1e-10, "{}", t.residual);
        assert!((t.states().map(|(_, v)| v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiple_never_idles() {
        let p = ModelParams::multiple(0.5, 1.0, 0.5, 0.2);
        assert_eq!(p.policy, Policy::Multiple);
        let t = table(p, 300);
        assert_eq!(t.prob(1, 0), 0.0);
    }

    #[test]
    fn doubling_truncation_is_stable() {
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let (a, b) = (table(p, 200), table(p, 400));
        for j in 0..=1 {
            for n in 0..=200 {
                assert!((a.prob(j, n) - b.prob(j, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heavy_load_needs_more_levels() {
        let p = ModelParams::single(20.0, 1.0, 0.5, 0.05);
        let g = build_generator(&p, 20).unwrap();
        assert!(matches!(
            solve_stationary(&g),
            Err(Error::TruncationInsufficient { .. })
        ));
    }
}
