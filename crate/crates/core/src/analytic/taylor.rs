use std::f64::consts::PI;

use crate::error::Result;

/// Taylor coefficients `f^(n)(0)/n!` for `n = 0..=max_order`, recovered from
/// the Chebyshev interpolant of `f` on `[-radius, radius]`.
///
/// A symmetric stencil keeps the recovery well conditioned; one-sided
/// differences on `[0, r]` lose several digits by order five.
pub fn taylor_coefficients(
    f: impl Fn(f64) -> Result<f64>,
    radius: f64,
    degree: usize,
    max_order: usize,
) -> Result<Vec<f64>> {
    let n = degree + 1;
    let theta: Vec<f64> = (0..n).map(|i| PI * (i as f64 + 0.5) / n as f64).collect();
    let values = theta
        .iter()
        .map(|t| f(radius * t.cos()))
        .collect::<Result<Vec<_>>>()?;

    // Chebyshev coefficients by the discrete cosine transform at the nodes.
    let cheb: Vec<f64> = (0..n)
        .map(|k| {
            let s: f64 = values
                .iter()
                .zip(&theta)
                .map(|(v, t)| v * (k as f64 * t).cos())
                .sum();
            let scale = if k == 0 { 1.0 } else { 2.0 };
            scale * s / n as f64
        })
        .collect();

    // Power-basis coefficients of T_k by the three-term recurrence.
    let mut power = vec![0.0; n];
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    t_prev[0] = 1.0;
    if n > 1 {
        t_cur[1] = 1.0;
    }
    for (k, c) in cheb.iter().enumerate() {
        let tk = if k == 0 { &t_prev } else { &t_cur };
        for (p, t) in power.iter_mut().zip(tk.iter()) {
            *p += c * t;
        }
        if k >= 1 && k + 1 < n {
            let mut next = vec![0.0; n];
            for i in 0..n - 1 {
                next[i + 1] += 2.0 * t_cur[i];
            }
            for i in 0..n {
                next[i] -= t_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
    }

    Ok((0..=max_order.min(degree))
        .map(|j| power[j] / radius.powi(j as i32))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_series() {
        let c = taylor_coefficients(|z| Ok((0.7 * z).exp()), 0.8, 16, 5).unwrap();
        let mut fact = 1.0;
        for (n, v) in c.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            let want = 0.7f64.powi(n as i32) / fact;
            assert!((v - want).abs() < 1e-10, "order {n}: {v} vs {want}");
        }
    }

    #[test]
    fn polynomials_are_reproduced() {
        let c = taylor_coefficients(|z| Ok(1.0 - 2.0 * z + 0.5 * z.powi(3)), 0.5, 8, 4).unwrap();
        let want = [1.0, -2.0, 0.0, 0.5, 0.0];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}
