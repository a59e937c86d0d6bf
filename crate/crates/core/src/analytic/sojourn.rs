//! Conditional mean sojourn times `E(S_{j,n})` of a customer who finds the
//! system in state `(j, n)` on arrival. Reneging ends the sojourn.

use crate::error::{Error, Result};
use crate::model::{ModelParams, Policy};

/// `E(S_{1,n}) = (n+1)/(μ+nξ)`.
pub fn sv_sojourn_busy(p: &ModelParams, n: usize) -> f64 {
    (n as f64 + 1.0) / (p.mu + n as f64 * p.xi)
}

/// `E(S_{0,n})` from the first-step recursion
/// `E(S_{0,n}) = [1 + γ E(S_{1,n}) + nξ E(S_{0,n-1})] / (γ + (n+1)ξ)`.
pub fn sv_sojourn_vacation(p: &ModelParams, n: usize) -> f64 {
    let mut prev = 0.0;
    for k in 0..=n {
        let kf = k as f64;
        let rate = p.gamma + (kf + 1.0) * p.xi;
        prev = (1.0 + p.gamma * sv_sojourn_busy(p, k) + kf * p.xi * prev) / rate;
    }
    prev
}

/// Which denominator the unrolled sum uses in its busy-phase term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormVariant {
    /// `(k+1)γ/(μ+kξ)`, what unrolling the recursion produces.
    Unrolled,
    /// `(k+1)γ/(μ+nξ)`, as printed.
    Printed,
}

/// The recursion unrolled into
/// `Σ_k ξ^{n-k} n!/k! / Π_{j=k+1}^{n+1}(γ+jξ) · ((k+1)γ/(μ+·ξ) + 1)`.
pub fn sojourn_vacation_closed_form(p: &ModelParams, n: usize, variant: ClosedFormVariant) -> f64 {
    // coef_k = ξ^{n-k} n!/k! / Π_{j=k+1}^{n+1}(γ+jξ), built downward from k = n.
    let mut coef = 1.0 / (p.gamma + (n as f64 + 1.0) * p.xi);
    let mut sum = 0.0;
    for k in (0..=n).rev() {
        let kf = k as f64;
        let busy_rate = match variant {
            ClosedFormVariant::Unrolled => p.mu + kf * p.xi,
            ClosedFormVariant::Printed => p.mu + n as f64 * p.xi,
        };
        sum += coef * ((kf + 1.0) * p.gamma / busy_rate + 1.0);
        if k > 0 {
            coef *= kf * p.xi / (p.gamma + kf * p.xi);
        }
    }
    sum
}

/// `E(S_{0,0})` as printed: `γ/(γ+ξ) (1 + γ/μ)`.
pub fn sojourn_s00_printed(p: &ModelParams) -> f64 {
    p.gamma / (p.gamma + p.xi) * (1.0 + p.gamma / p.mu)
}

/// Multiple-vacation sojourn: same recursions, but `(1,0)` does not exist.
pub fn mv_sojourn(p: &ModelParams, phase: usize, n: usize) -> Result<f64> {
    match (phase, n) {
        (1, 0) => Err(Error::Domain(
            "state (1,0) does not exist under multiple vacations".into(),
        )),
        (1, _) => Ok(sv_sojourn_busy(p, n)),
        (0, _) => Ok(sv_sojourn_vacation(p, n)),
        _ => Err(Error::Domain(format!("phase {phase} is not 0 or 1"))),
    }
}

/// Dispatches on the policy.
pub fn sojourn(p: &ModelParams, phase: usize, n: usize) -> Result<f64> {
    match (p.policy, phase) {
        (Policy::Multiple, _) => mv_sojourn(p, phase, n),
        (Policy::Single, 0) => Ok(sv_sojourn_vacation(p, n)),
        (Policy::Single, 1) => Ok(sv_sojourn_busy(p, n)),
        _ => Err(Error::Domain(format!("phase {phase} is not 0 or 1"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn std_point() -> ModelParams {
        ModelParams::single(0.5, 1.0, 0.5, 0.2)
    }

    #[test]
    fn busy_examples() {
        let p = std_point();
        assert_eq!(sv_sojourn_busy(&p, 0), 1.0);
        assert!((sv_sojourn_busy(&p, 3) - 2.5).abs() < 1e-15);
        let no_impatience = ModelParams::single(0.5, 2.0, 0.5, 0.0);
        for n in 0..10 {
            assert!((sv_sojourn_busy(&no_impatience, n) - (n as f64 + 1.0) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vacation_base_case_and_printed_mismatch() {
        let p = std_point();
        let want = 1.0 / 0.7 + 0.5 / 0.7;
        assert!((sv_sojourn_vacation(&p, 0) - want).abs() < 1e-15);
        assert!((sojourn_s00_printed(&p) - want).abs() > 1e-3);
    }

    #[test]
    fn instant_vacations_reduce_to_busy() {
        let p = ModelParams::single(0.5, 1.0, 1e12, 0.2);
        for n in 0..8 {
            assert!((sv_sojourn_vacation(&p, n) - sv_sojourn_busy(&p, n)).abs() < 1e-9);
        }
    }

    #[test]
    fn printed_sum_differs_from_n_one() {
        let p = std_point();
        let d0 = sojourn_vacation_closed_form(&p, 0, ClosedFormVariant::Printed) - sv_sojourn_vacation(&p, 0);
        let d2 = sojourn_vacation_closed_form(&p, 2, ClosedFormVariant::Printed) - sv_sojourn_vacation(&p, 2);
        assert!(d0.abs() < 1e-15);
        assert!(d2.abs() > 1e-3);
    }

    #[test]
    fn multiple_vacation_domain() {
        let p = ModelParams::multiple(0.5, 1.0, 0.5, 0.2);
        assert!(mv_sojourn(&p, 1, 0).is_err());
        assert!((mv_sojourn(&p, 1, 1).unwrap() - 2.0 / 1.2).abs() < 1e-15);
        assert_eq!(mv_sojourn(&p, 0, 0).unwrap(), sv_sojourn_vacation(&std_point(), 0));
    }

    proptest! {
        #[test]
        fn unrolled_sum_equals_recursion(l in 0.1..2.0f64, m in 0.2..3.0f64, g in 0.05..5.0f64, x in 0.01..2.0f64, n in 0usize..=10) {
            let p = ModelParams::single(l, m, g, x);
            let r = sv_sojourn_vacation(&p, n);
            let c = sojourn_vacation_closed_form(&p, n, ClosedFormVariant::Unrolled);
            prop_assert!((r - c).abs() <= 1e-12 * r.max(1.0), "{r} vs {c}");
        }
    }
}
