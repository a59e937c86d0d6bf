use std::f64::consts::FRAC_PI_2;

use super::{QuadResult, QuadratureRule, Tolerance};
use crate::error::{Error, Result};

/// Double-exponential rule refined by step halving.
///
/// The error estimate is the change between the last two levels, which is
/// pessimistic once the rule converges doubly exponentially.
#[derive(Clone, Copy, Debug, Default)]
pub struct TanhSinh;

const T_MAX: f64 = 4.0;
const MIN_LEVEL: usize = 3;
const MAX_LEVEL: usize = 12;

impl TanhSinh {
    /// Sum of `w * (f(left) + f(right))` over nodes `t = k * step` with `k` in `ks`.
    fn level_sum(
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        step: f64,
        ks: impl Iterator<Item = usize>,
        evals: &mut usize,
    ) -> Result<f64> {
        let half = 0.5 * (hi - lo);
        let mut sum = 0.0;
        for k in ks {
            let t = k as f64 * step;
            if t > T_MAX {
                break;
            }
            let u = FRAC_PI_2 * t.sinh();
            let ch = u.cosh();
            let w = FRAC_PI_2 * t.cosh() / (ch * ch);
            // Distance from the nearer endpoint, 1 - tanh(u), without cancellation.
            let d = half * (-u).exp() / ch;
            if k == 0 {
                sum += w * checked(f, lo + half)?;
                *evals += 1;
                continue;
            }
            for x in [lo + d, hi - d] {
                // Nodes that round onto an endpoint carry negligible weight.
                if x > lo && x < hi {
                    sum += w * checked(f, x)?;
                    *evals += 1;
                }
            }
        }
        Ok(sum * half)
    }
}

fn checked(f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("integrand is {v} at s = {x}")))
    }
}

impl QuadratureRule for TanhSinh {
    fn name(&self) -> &'static str {
        "tanh-sinh"
    }

    fn integrate_plain(
        &self,
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        tol: Tolerance,
        max_evals: usize,
    ) -> Result<QuadResult> {
        let mut evaluations = 0;
        let mut step = 1.0;
        let mut raw = Self::level_sum(f, lo, hi, step, 0.., &mut evaluations)?;
        let mut value = raw * step;
        let mut error = f64::INFINITY;
        for level in 1..=MAX_LEVEL {
            step *= 0.5;
            raw += Self::level_sum(f, lo, hi, step, (1..).step_by(2), &mut evaluations)?;
            let next = raw * step;
            error = (next - value).abs();
            value = next;
            if level >= MIN_LEVEL && error <= tol.target(value) {
                return Ok(QuadResult {
                    value,
                    abs_error_estimate: error,
                    evaluations,
                });
            }
            if evaluations > max_evals {
                break;
            }
        }
        Err(Error::ToleranceNotMet {
            value,
            error,
            evaluations,
        })
    }
}
