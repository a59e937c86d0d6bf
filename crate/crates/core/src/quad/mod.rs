//! One-dimensional quadrature on subintervals of `[0, 1]` for integrands of
//! the form `s^a (1-s)^b f(s)` with `f` smooth.
//!
//! Singular endpoint weights are removed by the substitutions
//! `u = s^(a+1)` at the left and `u = (1-s)^(b+1)` at the right before a
//! rule ever sees the integrand. Rules sit behind [`QuadratureRule`] and are
//! picked by name from [`rule_by_name`].

mod gauss_kronrod;
mod tanh_sinh;

pub use gauss_kronrod::GaussKronrod;
pub use tanh_sinh::TanhSinh;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn scaled(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            abs_error_estimate: self.abs_error_estimate * k.abs(),
            ..self
        }
    }

    fn plus(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            abs_error_estimate: self.abs_error_estimate + o.abs_error_estimate,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

/// Stopping target: done once the error estimate is below
/// `max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }

    fn halved(self) -> Self {
        Self {
            abs: self.abs / 2.0,
            rel: self.rel,
        }
    }
}

/// A basic rule for bounded integrands on a finite interval.
pub trait QuadratureRule: Send + Sync {
    fn name(&self) -> &'static str;

    fn integrate_plain(
        &self,
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        tol: Tolerance,
        max_evals: usize,
    ) -> Result<QuadResult>;
}

static GAUSS_KRONROD: GaussKronrod = GaussKronrod;
static TANH_SINH: TanhSinh = TanhSinh;
static RULES: [&dyn QuadratureRule; 2] = [&GAUSS_KRONROD, &TANH_SINH];

pub fn rule_names() -> Vec<&'static str> {
    RULES.iter().map(|r| r.name()).collect()
}

pub fn rule_by_name(name: &str) -> Result<&'static dyn QuadratureRule> {
    RULES
        .iter()
        .copied()
        .find(|r| r.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "quadrature rule",
            name: name.to_string(),
            known: rule_names().join(", "),
        })
}

#[derive(Clone, Copy)]
pub struct QuadOptions {
    pub tol: Tolerance,
    pub max_evals: usize,
    pub rule: &'static dyn QuadratureRule,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance {
                abs: DEFAULT_TOL,
                rel: 0.0,
            },
            max_evals: DEFAULT_MAX_EVALS,
            rule: &GAUSS_KRONROD,
        }
    }
}

impl std::fmt::Debug for QuadOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadOptions")
            .field("tol", &self.tol)
            .field("max_evals", &self.max_evals)
            .field("rule", &self.rule.name())
            .finish()
    }
}

impl QuadOptions {
    pub fn with_rule(self, rule: &'static dyn QuadratureRule) -> Self {
        Self { rule, ..self }
    }

    pub fn with_abs_tol(self, abs: f64) -> Self {
        Self {
            tol: Tolerance { abs, ..self.tol },
            ..self
        }
    }

    /// Purely relative target, used for nested inner integrals.
    pub fn relative(self, rel: f64) -> Self {
        Self {
            tol: Tolerance { abs: 0.0, rel },
            ..self
        }
    }
}

/// `s^left_exponent * (1-s)^right_exponent * smooth(s)`.
#[derive(Clone, Copy)]
pub struct WeightedIntegrand<'a> {
    pub smooth: &'a dyn Fn(f64) -> f64,
    pub left_exponent: f64,
    pub right_exponent: f64,
}

impl<'a> WeightedIntegrand<'a> {
    pub fn new(smooth: &'a dyn Fn(f64) -> f64, left_exponent: f64, right_exponent: f64) -> Self {
        Self {
            smooth,
            left_exponent,
            right_exponent,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let mut v = (self.smooth)(s);
        if self.left_exponent != 0.0 {
            v *= s.powf(self.left_exponent);
        }
        if self.right_exponent != 0.0 {
            v *= (1.0 - s).powf(self.right_exponent);
        }
        v
    }
}

/// Integrates `f` over `[lo, hi]` with the default rule and an absolute tolerance.
pub fn integrate(f: &WeightedIntegrand<'_>, lo: f64, hi: f64, tol: f64) -> Result<QuadResult> {
    integrate_with(f, lo, hi, &QuadOptions::default().with_abs_tol(tol))
}

pub fn integrate_with(
    f: &WeightedIntegrand<'_>,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(Error::Domain(format!(
            "integration bounds [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
        )));
    }
    let (a, b) = (f.left_exponent, f.right_exponent);
    // An exponent <= -1 is harmless when its endpoint lies outside [lo, hi].
    if lo == 0.0 && a <= -1.0 {
        return Err(Error::NonIntegrable { exponent: a });
    }
    if hi == 1.0 && b <= -1.0 {
        return Err(Error::NonIntegrable { exponent: b });
    }
    if lo == hi {
        return Ok(QuadResult::zero());
    }

    let left_singular = lo == 0.0 && a < 0.0;
    let right_singular = hi == 1.0 && b < 0.0;
    match (left_singular, right_singular) {
        (false, false) => {
            let g = |s: f64| f.eval(s);
            opts.rule.integrate_plain(&g, lo, hi, opts.tol, opts.max_evals)
        }
        (true, false) => left_substituted(f, hi, opts.tol, opts),
        (false, true) => right_substituted(f, lo, opts.tol, opts),
        (true, true) => {
            let half = opts.tol.halved();
            let l = left_substituted(f, 0.5, half, opts)?;
            let r = right_substituted(f, 0.5, half, opts)?;
            Ok(l.plus(r))
        }
    }
}

/// `∫_0^hi s^a φ(s) ds = 1/(a+1) ∫_0^{hi^(a+1)} φ(u^(1/(a+1))) du`.
fn left_substituted(
    f: &WeightedIntegrand<'_>,
    hi: f64,
    tol: Tolerance,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let p = f.left_exponent + 1.0;
    let b = f.right_exponent;
    let g = |u: f64| {
        let s = u.powf(1.0 / p);
        let mut v = (f.smooth)(s);
        if b != 0.0 {
            v *= (1.0 - s).powf(b);
        }
        v
    };
    let scaled_tol = Tolerance {
        abs: tol.abs * p,
        rel: tol.rel,
    };
    Ok(opts
        .rule
        .integrate_plain(&g, 0.0, hi.powf(p), scaled_tol, opts.max_evals)?
        .scaled(1.0 / p))
}

/// `∫_lo^1 (1-s)^b ψ(s) ds = 1/(b+1) ∫_0^{(1-lo)^(b+1)} ψ(1 - u^(1/(b+1))) du`.
fn right_substituted(
    f: &WeightedIntegrand<'_>,
    lo: f64,
    tol: Tolerance,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let q = f.right_exponent + 1.0;
    let a = f.left_exponent;
    let g = |u: f64| {
        let s = 1.0 - u.powf(1.0 / q);
        let mut v = (f.smooth)(s);
        if a != 0.0 {
            v *= s.powf(a);
        }
        v
    };
    let scaled_tol = Tolerance {
        abs: tol.abs * q,
        rel: tol.rel,
    };
    Ok(opts
        .rule
        .integrate_plain(&g, 0.0, (1.0 - lo).powf(q), scaled_tol, opts.max_evals)?
        .scaled(1.0 / q))
}

/// Integrates `Σ coeffs[i] * pair[i]` pointwise, where each member carries a
/// `(1-s)^-1` weight that is only integrable in combination.
///
/// Near `s = 1` the combined integrand is probed first; if it grows faster
/// than `(1-s)^(-1/2)` the divergences did not cancel and the call fails.
pub fn integrate_cancelling(
    pair: [WeightedIntegrand<'_>; 2],
    coeffs: [f64; 2],
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if pair.iter().any(|w| w.right_exponent != -1.0) {
        return Err(Error::Domain(
            "integrate_cancelling expects right exponents equal to -1".into(),
        ));
    }
    let a_min = pair[0].left_exponent.min(pair[1].left_exponent);
    let combined = |s: f64| {
        let mut num = 0.0;
        for (w, c) in pair.iter().zip(coeffs) {
            let mut v = c * (w.smooth)(s);
            let da = w.left_exponent - a_min;
            if da != 0.0 {
                v *= s.powf(da);
            }
            num += v;
        }
        num / (1.0 - s)
    };

    if hi == 1.0 {
        check_cancellation(&combined, lo)?;
    }
    integrate_with(&WeightedIntegrand::new(&combined, a_min, 0.0), lo, hi, opts)
}

fn check_cancellation(h: &dyn Fn(f64) -> f64, lo: f64) -> Result<()> {
    let span = 1.0 - lo;
    let reference = [0.1, 0.01]
        .iter()
        .map(|d| h(1.0 - d * span).abs())
        .fold(0.0, f64::max);
    for k in 3..=12 {
        let distance = span * 10f64.powi(-k);
        let value = h(1.0 - distance).abs();
        let bound = 10.0 * reference * (0.01 * span / distance).sqrt();
        if !value.is_finite() || value > bound {
            return Err(Error::CancellationFailure {
                distance,
                value,
                bound,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn both_rules() -> Vec<QuadOptions> {
        rule_names()
            .into_iter()
            .map(|n| QuadOptions::default().with_rule(rule_by_name(n).unwrap()).with_abs_tol(1e-12))
            .collect()
    }

    #[test]
    fn unit_integrand() {
        let one = |_: f64| 1.0;
        let r = integrate(&WeightedIntegrand::new(&one, 0.0, 0.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn vacation_kernel_without_arrivals() {
        // e^0 (1-s)^(g-1) integrates to 1/g = xi/gamma.
        for (gamma, xi) in [(0.5, 0.2), (0.1, 0.3), (3.0, 0.1)] {
            let one = |_: f64| 1.0;
            let w = WeightedIntegrand::new(&one, 0.0, gamma / xi - 1.0);
            for opts in both_rules() {
                let r = integrate_with(&w, 0.0, 1.0, &opts).unwrap();
                assert!((r.value - xi / gamma).abs() < 1e-11, "{} {}", opts.rule.name(), r.value);
            }
        }
    }

    #[test]
    fn beta_integrals_with_two_singular_ends() {
        // B(0.5, 0.3) = Γ(0.5)Γ(0.3)/Γ(0.8)
        let one = |_: f64| 1.0;
        let w = WeightedIntegrand::new(&one, -0.5, -0.7);
        let exact = 4.554443087962173;
        for opts in both_rules() {
            let r = integrate_with(&w, 0.0, 1.0, &opts).unwrap();
            assert!((r.value - exact).abs() < 1e-10, "{} {}", opts.rule.name(), r.value);
        }
    }

    #[test]
    fn rejects_non_integrable_weights() {
        let one = |_: f64| 1.0;
        assert!(matches!(
            integrate(&WeightedIntegrand::new(&one, -1.0, 0.0), 0.0, 0.5, 1e-10),
            Err(Error::NonIntegrable { .. })
        ));
        assert!(matches!(
            integrate(&WeightedIntegrand::new(&one, 0.0, -1.2), 0.2, 1.0, 1e-10),
            Err(Error::NonIntegrable { .. })
        ));
        // Excluding the endpoint makes it fine: ∫_0^z (1-s)^-1 = -ln(1-z).
        let r = integrate(&WeightedIntegrand::new(&one, 0.0, -1.0), 0.0, 0.9, 1e-12).unwrap();
        assert!((r.value - 10f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn evaluation_cap_is_reported() {
        let wild = |s: f64| (1.0 / (s + 1e-9)).sin();
        let opts = QuadOptions {
            max_evals: 200,
            ..QuadOptions::default()
        };
        let e = integrate_with(&WeightedIntegrand::new(&wild, 0.0, 0.0), 0.0, 1.0, &opts);
        assert!(matches!(e, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn exact_cancellation_gives_zero() {
        let one = |_: f64| 1.0;
        let pair = [WeightedIntegrand::new(&one, 0.0, -1.0); 2];
        let r = integrate_cancelling(pair, [1.0, -1.0], 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn removable_singularity_is_integrated() {
        // (1 - e^{-(1-s)}) / (1-s) integrates to Ein(1).
        let one = |_: f64| 1.0;
        let e = |s: f64| (-(1.0 - s)).exp();
        let pair = [WeightedIntegrand::new(&one, 0.0, -1.0), WeightedIntegrand::new(&e, 0.0, -1.0)];
        let r = integrate_cancelling(pair, [1.0, -1.0], 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 0.7965995992970531).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn residual_divergence_is_caught() {
        let one = |_: f64| 1.0;
        let e = |s: f64| 0.999 * (-(1.0 - s)).exp();
        let pair = [WeightedIntegrand::new(&one, 0.0, -1.0), WeightedIntegrand::new(&e, 0.0, -1.0)];
        let r = integrate_cancelling(pair, [1.0, -1.0], 0.0, 1.0, &QuadOptions::default());
        assert!(matches!(r, Err(Error::CancellationFailure { .. })), "{r:?}");
    }

    #[test]
    fn target_below_rounding_floor_returns() {
        // Both endpoints singular and a growing exponential: the requested
        // 1e-12 sits under the rounding floor of a value near 15.
        let f = |s: f64| (2.990853914741348 * s).exp();
        let w = WeightedIntegrand::new(&f, -0.6978494918891062, -0.8089441667923327);
        let vals: Vec<f64> = both_rules().iter().map(|o| integrate_with(&w, 0.0, 1.0, o).unwrap().value).collect();
        assert!((vals[0] - vals[1]).abs() <= 1e-10 * vals[0].abs());
    }

    #[test]
    fn unknown_rule_name() {
        assert!(rule_by_name("simpson").is_err());
        assert_eq!(rule_by_name("tanh-sinh").unwrap().name(), "tanh-sinh");
    }

    proptest! {
        #[test]
        fn additive_over_split_points(a in -0.9..2.0f64, b in -0.9..2.0f64, k in 0.0..4.0f64, zi in 1usize..10) {
            let z = zi as f64 / 10.0;
            let f = move |s: f64| (-k * s).exp();
            let w = WeightedIntegrand::new(&f, a, b);
            let tol = 1e-10;
            let whole = integrate(&w, 0.0, 1.0, tol).unwrap().value;
            let parts = integrate(&w, 0.0, z, tol).unwrap().value + integrate(&w, z, 1.0, tol).unwrap().value;
            prop_assert!((whole - parts).abs() <= 2.0 * tol, "{whole} vs {parts}");
        }

        #[test]
        fn monotone_in_upper_limit(a in -0.9..2.0f64, b in -0.9..2.0f64, z1 in 0.0..1.0f64, z2 in 0.0..1.0f64) {
            let (lo, hi) = if z1 < z2 { (z1, z2) } else { (z2, z1) };
            let f = |s: f64| 1.0 + s * s;
            let w = WeightedIntegrand::new(&f, a, b);
            let small = integrate(&w, 0.0, lo, 1e-12).unwrap().value;
            let big = integrate(&w, 0.0, hi, 1e-12).unwrap().value;
            prop_assert!(big >= small - 1e-11);
        }

        #[test]
        fn rules_agree_on_weighted_exponentials(a in -0.9..3.0f64, b in -0.9..3.0f64, k in -3.0..8.0f64) {
            let f = move |s: f64| (-k * s).exp();
            let w = WeightedIntegrand::new(&f, a, b);
            let vals: Vec<f64> = both_rules().iter().map(|o| integrate_with(&w, 0.0, 1.0, o).unwrap().value).collect();
            prop_assert!((vals[0] - vals[1]).abs() <= 1e-10 * vals[0].abs().max(1.0), "{vals:?}");
        }
    }
}
