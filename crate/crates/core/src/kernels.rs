//! The integral kernels `A, B, C, D, E` of the one-server solutions, plus the
//! numerically stable forms the engines actually evaluate.
//!
//! Notation: `a = λ/ξ`, `g = γ/ξ`, `m = μ/ξ`. The raw kernels `B, D, E`
//! diverge logarithmically at `z = 1`; they are only exposed on
//! `[0, 1 - RAW_DELTA]`. Values at `z = 1` come from cancelling combinations.
//!
//! Stable building blocks, valid for `z` in `[-1, 1]`:
//!
//! * `tail(z) = ∫_0^1 e^{-a(1-z)(1-v)} g v^{g-1} dv`, so that
//!   `(1-z)^{-g} e^{az} [A - A(z)] = tail(z) / g`.
//! * `khat(s) = (a/A) ∫_0^1 e^{a t v} (1-v) E1(a t (1-v)) g v^{g-1} dv`, `t = 1-s`,
//!   with `E1(x) = (e^x - 1)/x`. It equals `e^a (e^{-as} - e^{-as} tail(s)) / (A t)`,
//!   the bracket of the combined `-g B' + D'/A` integrand, without the `0/0`.
//! * `jhat(z) = ∫_0^1 u^{m-1} khat(zu) du` and
//!   `lhat(z) = ∫_0^1 u^{m-2} e^{a(1-zu)} du`.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad::{self, QuadOptions, QuadResult, WeightedIntegrand};

/// Raw `B, D, E` are refused closer than this to 1.
pub const RAW_DELTA: f64 = 1e-6;

/// Relative accuracy of inner integrals nested inside outer quadratures.
const INNER_REL_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct Kernels {
    pub params: ModelParams,
    pub a: f64,
    pub g: f64,
    pub m: f64,
    a1: QuadResult,
    outer: QuadOptions,
    inner: QuadOptions,
}

impl Kernels {
    pub fn new(params: &ModelParams, opts: QuadOptions) -> Result<Self> {
        if !(params.xi > 0.0 && params.gamma > 0.0 && params.lambda > 0.0) {
            return Err(Error::Domain(
                "kernels need lambda, gamma and xi strictly positive".into(),
            ));
        }
        let a = params.lambda / params.xi;
        let g = params.gamma / params.xi;
        let m = params.mu / params.xi;
        let inner = opts.relative(INNER_REL_TOL);
        let f = move |s: f64| (-a * s).exp();
        let a1 = quad::integrate_with(&WeightedIntegrand::new(&f, 0.0, g - 1.0), 0.0, 1.0, &opts)?;
        Ok(Self {
            params: *params,
            a,
            g,
            m,
            a1,
            outer: opts,
            inner,
        })
    }

    /// `A = A(1)`.
    pub fn a1(&self) -> f64 {
        self.a1.value
    }

    pub fn a1_result(&self) -> QuadResult {
        self.a1
    }

    pub fn options(&self) -> &QuadOptions {
        &self.outer
    }

    /// `A(z) = ∫_0^z e^{-as} (1-s)^{g-1} ds` for `z` in `[0, 1]`.
    pub fn a_of(&self, z: f64) -> Result<f64> {
        check_range("A", z, 0.0, 1.0)?;
        if z == 1.0 {
            return Ok(self.a1());
        }
        let a = self.a;
        let f = move |s: f64| (-a * s).exp();
        Ok(quad::integrate_with(&WeightedIntegrand::new(&f, 0.0, self.g - 1.0), 0.0, z, &self.outer)?.value)
    }

    /// `tail(z)`, see the module docs. Equals `g A` at `z = 0` and 1 at `z = 1`.
    pub fn tail(&self, z: f64) -> Result<f64> {
        let k = self.a * (1.0 - z);
        let f = move |v: f64| self.g * (-k * (1.0 - v)).exp();
        Ok(quad::integrate_with(&WeightedIntegrand::new(&f, self.g - 1.0, 0.0), 0.0, 1.0, &self.inner)?.value)
    }

    /// `e^a K̂(s)`, the smooth bracket of the combined integrand.
    pub fn khat(&self, s: f64) -> Result<f64> {
        let at = self.a * (1.0 - s);
        let g = self.g;
        let f = move |v: f64| g * (at * v).exp() * (1.0 - v) * exprel(at * (1.0 - v));
        let r = quad::integrate_with(&WeightedIntegrand::new(&f, g - 1.0, 0.0), 0.0, 1.0, &self.inner)?;
        Ok(self.a / self.a1() * r.value)
    }

    /// `jhat(z) = ∫_0^1 u^{m-1} khat(zu) du`, `z` in `[-1, 1]`.
    pub fn jhat(&self, z: f64) -> Result<QuadResult> {
        check_range("jhat", z, -1.0, 1.0)?;
        let failure = std::cell::RefCell::new(None);
        let f = |u: f64| match self.khat(z * u) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let r = quad::integrate_with(&WeightedIntegrand::new(&f, self.m - 1.0, 0.0), 0.0, 1.0, &self.outer);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        r
    }

    /// `lhat(z) = ∫_0^1 u^{m-2} e^{a(1-zu)} du = e^a z^{1-m} C(z)`.
    pub fn lhat(&self, z: f64) -> Result<QuadResult> {
        check_range("lhat", z, -1.0, 1.0)?;
        let a = self.a;
        let f = move |u: f64| (a * (1.0 - z * u)).exp();
        quad::integrate_with(&WeightedIntegrand::new(&f, self.m - 2.0, 0.0), 0.0, 1.0, &self.outer)
    }

    /// Raw `B(z) = ∫_0^z s^{m-1}(1-s)^{-(g+1)} (1 - A(s)/A) ds`.
    pub fn b_of(&self, z: f64) -> Result<f64> {
        check_range("B", z, 0.0, 1.0 - RAW_DELTA)?;
        let f = |s: f64| self.b_smooth(s);
        self.raw_integral(&f, self.m - 1.0, -1.0, z)
    }

    /// `C(z) = ∫_0^z e^{-as} s^{m-2} ds`; finite up to and including 1.
    pub fn c_of(&self, z: f64) -> Result<f64> {
        check_range("C", z, 0.0, 1.0)?;
        let a = self.a;
        let f = move |s: f64| (-a * s).exp();
        self.raw_integral(&f, self.m - 2.0, 0.0, z)
    }

    /// Raw `D(z) = ∫_0^z e^{-as} s^{m-1} (1-s)^{-1} ds`.
    pub fn d_of(&self, z: f64) -> Result<f64> {
        check_range("D", z, 0.0, 1.0 - RAW_DELTA)?;
        let a = self.a;
        let f = move |s: f64| (-a * s).exp();
        self.raw_integral(&f, self.m - 1.0, -1.0, z)
    }

    /// Raw `E(z) = ∫_0^z e^{-as} s^{m-2} (1-s)^{-1} ds`.
    pub fn e_of(&self, z: f64) -> Result<f64> {
        check_range("E", z, 0.0, 1.0 - RAW_DELTA)?;
        let a = self.a;
        let f = move |s: f64| (-a * s).exp();
        self.raw_integral(&f, self.m - 2.0, -1.0, z)
    }

    fn raw_integral(&self, f: &dyn Fn(f64) -> f64, left: f64, right: f64, z: f64) -> Result<f64> {
        Ok(quad::integrate_with(&WeightedIntegrand::new(f, left, right), 0.0, z, &self.outer)?.value)
    }

    /// Smooth part of `B'` once `s^{m-1}` and `(1-s)^{-1}` are split off:
    /// `e^{-as} tail(s) / (g A)`.
    fn b_smooth(&self, s: f64) -> f64 {
        (-self.a * s).exp() * self.tail(s).unwrap_or(f64::NAN) / (self.g * self.a1())
    }

    /// `e^a ∫_0^1 (-g B' + D'/A) ds` through the cancelling path.
    pub fn combined_bd(&self) -> Result<QuadResult> {
        let fb = |s: f64| self.a.exp() * self.b_smooth(s);
        let fd = |s: f64| (self.a * (1.0 - s)).exp();
        quad::integrate_cancelling(
            [
                WeightedIntegrand::new(&fb, self.m - 1.0, -1.0),
                WeightedIntegrand::new(&fd, self.m - 1.0, -1.0),
            ],
            [-self.g, 1.0 / self.a1()],
            0.0,
            1.0,
            &self.outer,
        )
    }

    /// `e^a ∫_0^1 (-g B' + coeff_e E') ds` through the cancelling path.
    pub fn combined_be(&self, coeff_e: f64) -> Result<QuadResult> {
        let fb = |s: f64| self.a.exp() * self.b_smooth(s);
        let fe = |s: f64| (self.a * (1.0 - s)).exp();
        quad::integrate_cancelling(
            [
                WeightedIntegrand::new(&fb, self.m - 1.0, -1.0),
                WeightedIntegrand::new(&fe, self.m - 2.0, -1.0),
            ],
            [-self.g, coeff_e],
            0.0,
            1.0,
            &self.outer,
        )
    }

    /// The `E` coefficient that makes `-g B + c E` finite at 1.
    pub fn be_coefficient(&self) -> f64 {
        1.0 / self.a1()
    }

    /// The `E` coefficient as printed for the multiple-vacation normalisation.
    pub fn be_coefficient_printed(&self) -> f64 {
        1.0 / self.a1() - 1.0 / (self.a1() * self.m) + self.g / self.m
    }
}

/// `(e^x - 1)/x`, equal to 1 at 0.
fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

fn check_range(what: &str, z: f64, lo: f64, hi: f64) -> Result<()> {
    if (lo..=hi).contains(&z) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what}({z}) is only available for z in [{lo}, {hi}]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::rule_by_name;

    fn standard() -> Kernels {
        Kernels::new(&ModelParams::single(0.5, 1.0, 0.5, 0.2), QuadOptions::default().with_abs_tol(1e-12)).unwrap()
    }

    /// `khat` from the power series `Φ(t) = Σ (at)^k / k! / (g+k+1)`.
    fn khat_series(k: &Kernels, s: f64) -> f64 {
        let t = 1.0 - s;
        let (mut sum, mut term, mut i) = (0.0f64, 1.0f64, 0.0f64);
        while term.abs() > 1e-18 * sum.abs().max(1e-300) || i < 3.0 {
            sum += term / (k.g + i + 1.0);
            i += 1.0;
            term *= k.a * t / i;
        }
        k.a / k.a1() * sum
    }

    #[test]
    fn a1_closed_form_without_arrivals() {
        // λ→0: A → ξ/γ.
        let k = Kernels::new(&ModelParams::single(1e-12, 1.0, 0.5, 0.2), QuadOptions::default()).unwrap();
        assert!((k.a1() - 0.4).abs() < 1e-10);
    }

    #[test]
    fn kernels_vanish_at_zero_and_a_is_increasing() {
        let k = standard();
        for v in [k.a_of(0.0), k.b_of(0.0), k.c_of(0.0), k.d_of(0.0), k.e_of(0.0)] {
            assert_eq!(v.unwrap(), 0.0);
        }
        assert!(k.a_of(0.5).unwrap() < k.a1());
        assert!(k.a1() <= 0.2 / 0.5);
    }

    #[test]
    fn a1_agrees_across_rules() {
        let p = ModelParams::single(0.5, 1.0, 0.5, 0.2);
        let v: Vec<f64> = ["gauss-kronrod", "tanh-sinh"]
            .iter()
            .map(|n| {
                let o = QuadOptions::default().with_rule(rule_by_name(n).unwrap()).with_abs_tol(1e-12);
                Kernels::new(&p, o).unwrap().a1()
            })
            .collect();
        assert!((v[0] - v[1]).abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn tail_endpoints() {
        let k = standard();
        assert!((k.tail(0.0).unwrap() - k.g * k.a1()).abs() < 1e-12);
        assert!((k.tail(1.0).unwrap() - 1.0).abs() < 1e-14);
        // Against the raw definition at an interior point.
        let z: f64 = 0.4;
        let raw = (1.0 - z).powf(-k.g) * (k.a * z).exp() * (k.a1() - k.a_of(z).unwrap()) * k.g;
        assert!((k.tail(z).unwrap() - raw).abs() < 1e-11);
    }

    #[test]
    fn khat_matches_series_including_the_removable_point() {
        for p in [ModelParams::single(0.5, 1.0, 0.5, 0.2), ModelParams::single(0.8, 1.0, 3.0, 0.1), ModelParams::single(0.3, 1.0, 0.3, 0.6)] {
            let k = Kernels::new(&p, QuadOptions::default()).unwrap();
            for s in [-1.0, -0.3, 0.0, 0.5, 0.9, 1.0 - 1e-9, 1.0] {
                let want = khat_series(&k, s);
                let got = k.khat(s).unwrap();
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "s={s}: {got} vs {want}");
            }
            // Limit at s = 1 is λ / ((γ+ξ) A).
            let lim = p.lambda / ((p.gamma + p.xi) * k.a1());
            assert!((k.khat(1.0).unwrap() - lim).abs() < 1e-12 * lim);
        }
    }

    #[test]
    fn cancelling_combination_matches_stable_form() {
        let k = standard();
        let cbd = k.combined_bd().unwrap();
        let j1 = k.jhat(1.0).unwrap();
        assert!((cbd.value - j1.value).abs() < 1e-9, "{} vs {}", cbd.value, j1.value);
        assert!(cbd.abs_error_estimate <= 1e-9);
        // -gB + E/A = -gB + D/A + C/A.
        let cbe = k.combined_be(k.be_coefficient()).unwrap();
        let c1 = k.lhat(1.0).unwrap().value;
        assert!((cbe.value - (j1.value + c1 / k.a1())).abs() < 1e-9);
    }

    #[test]
    fn printed_be_coefficient_leaves_a_divergence() {
        let k = standard();
        assert!(matches!(
            k.combined_be(k.be_coefficient_printed()),
            Err(Error::CancellationFailure { .. })
        ));
    }

    #[test]
    fn raw_kernels_grow_logarithmically() {
        let k = standard();
        let b: Vec<f64> = (2..=6).map(|e| k.b_of(1.0 - 10f64.powi(-e)).unwrap()).collect();
        let steps: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
        // Near 1, B' ~ e^{-a} / (g A (1-s)), so each decade adds a fixed amount.
        let per_decade = (-k.a).exp() * 10f64.ln() / (k.g * k.a1());
        for s in &steps {
            assert!((s - per_decade).abs() < 0.05 * per_decade, "{steps:?} vs {per_decade}");
        }
        assert!(k.b_of(1.0).is_err());
        assert!(k.d_of(1.0 - 1e-7).is_err());
        assert!(k.c_of(1.0).is_ok());
    }
}
