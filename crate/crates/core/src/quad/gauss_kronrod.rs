// Nodes and weights are kept at the published 33 digits.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{QuadResult, QuadratureRule, Tolerance};
use crate::error::{Error, Result};

/// Globally adaptive 7/15-point Gauss-Kronrod with the QUADPACK error rescaling.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussKronrod;

const XK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];

const WK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];

/// Gauss weights at `XK[0], XK[2], XK[4], XK[6]`.
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    /// Part of `error` that is rounding, not truncation; splitting cannot lower it.
    noise: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn qk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Segment> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("integrand is {v} at s = {x}")))
        }
    };

    let fc = eval(centre)?;
    let mut resk = WK[0] * fc;
    let mut resg = WG[0] * fc;
    let mut resabs = resk.abs();
    let mut pairs = [(0.0, 0.0); 8];
    for i in 1..8 {
        let dx = half * XK[i];
        let (a, b) = (eval(centre - dx)?, eval(centre + dx)?);
        pairs[i] = (a, b);
        resk += WK[i] * (a + b);
        resabs += WK[i] * (a.abs() + b.abs());
        if i % 2 == 0 {
            resg += WG[i / 2] * (a + b);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WK[0] * (fc - mean).abs();
    for i in 1..8 {
        resasc += WK[i] * ((pairs[i].0 - mean).abs() + (pairs[i].1 - mean).abs());
    }

    let scale = half.abs();
    let value = resk * half;
    resabs *= scale;
    resasc *= scale;
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let noise = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(noise);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
        noise,
    })
}

impl QuadratureRule for GaussKronrod {
    fn name(&self) -> &'static str {
        "gauss-kronrod"
    }

    fn integrate_plain(
        &self,
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        tol: Tolerance,
        max_evals: usize,
    ) -> Result<QuadResult> {
        let mut evaluations = 15;
        let first = qk15(f, lo, hi)?;
        let mut value = first.value;
        let mut error = first.error;
        let mut noise = first.noise;
        let mut heap = BinaryHeap::from([first]);
        // Segments too narrow to split; their error stays in the total.
        let mut frozen: Vec<Segment> = Vec::new();

        loop {
            // A target below the rounding floor cannot be met; stop once
            // what is left is essentially all rounding.
            if error <= tol.target(value) || error <= 2.0 * noise {
                // Re-sum to shed drift from the running updates.
                let all = heap.iter().chain(frozen.iter());
                let (v, e) = all.fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
                value = v;
                error = e;
                if error <= tol.target(value) || error <= 2.0 * noise {
                    break;
                }
            }
            let Some(worst) = heap.pop() else {
                return Err(Error::ToleranceNotMet {
                    value,
                    error,
                    evaluations,
                });
            };
            let mid = 0.5 * (worst.lo + worst.hi);
            let width = worst.hi - worst.lo;
            if mid <= worst.lo || mid >= worst.hi || width <= 64.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs()) {
                frozen.push(worst);
                continue;
            }
            if evaluations + 30 > max_evals {
                return Err(Error::ToleranceNotMet {
                    value,
                    error,
                    evaluations,
                });
            }
            let left = qk15(f, worst.lo, mid)?;
            let right = qk15(f, mid, worst.hi)?;
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            noise += left.noise + right.noise - worst.noise;
            heap.push(left);
            heap.push(right);
        }

        Ok(QuadResult {
            value,
            abs_error_estimate: error,
            evaluations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_constants_exactly() {
        let k: f64 = WK[0] + 2.0 * WK[1..].iter().sum::<f64>();
        let g: f64 = WG[0] + 2.0 * WG[1..].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_of_degree_22_is_exact_on_one_panel() {
        let r = qk15(&|x: f64| x.powi(22), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_a_peak() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3).powi(2));
        let exact = 100.0 * ((0.7f64 / 0.01).atan() + (0.3f64 / 0.01).atan());
        let r = GaussKronrod
            .integrate_plain(&f, 0.0, 1.0, Tolerance { abs: 1e-9, rel: 0.0 }, 1_000_000)
            .unwrap();
        assert!((r.value - exact).abs() < 1e-8, "{} vs {exact}", r.value);
        assert!(r.abs_error_estimate <= 1e-9);
    }
}
