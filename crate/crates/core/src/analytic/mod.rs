//! Closed-form engine for the one-server models.
//!
//! Both policies share one [`VacationSolution`]. With `p00` known the
//! generating functions are
//!
//! ```text
//! P0(z) = p00 tail(z) / (g A)
//! P1(z) = p00 e^{-a(1-z)} [ z jhat(z) + kC lhat(z) ]
//! ```
//!
//! where `kC = (μ-ξ)γ/(ξλ)` for single vacations and 0 for multiple
//! vacations (see [`crate::kernels`]). Both are entire, so they are evaluated
//! on `[-1, 1)` and the coefficient recovery can use a symmetric stencil.

pub mod mv;
pub mod richardson;
pub mod sojourn;
pub mod sv;
pub mod taylor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernels;
use crate::model::{validate, EngineKind, ModelParams, Policy};
use crate::quad::{QuadOptions, Tolerance};
use crate::report::{PerformanceReport, SojournSummary};

#[derive(Clone, Copy, Debug)]
pub struct AnalyticOptions {
    pub quad: QuadOptions,
    /// First step of the backward differences feeding the extrapolation.
    pub richardson_h0: f64,
    pub richardson_levels: usize,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions {
                tol: Tolerance {
                    abs: 1e-12,
                    rel: 1e-12,
                },
                ..QuadOptions::default()
            },
            richardson_h0: 0.25,
            richardson_levels: 9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgfEvaluation {
    pub z: f64,
    pub value: f64,
    pub abs_error_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProbs {
    pub p00: f64,
    pub p10: f64,
    pub p11: f64,
}

#[derive(Clone, Debug)]
pub struct VacationSolution {
    kernels: Kernels,
    opts: AnalyticOptions,
    p00: f64,
    p00_error: f64,
    k_c: f64,
}

impl VacationSolution {
    pub fn new(params: &ModelParams, opts: AnalyticOptions) -> Result<Self> {
        validate(params, EngineKind::Analytic)?;
        Self::from_kernels(Kernels::new(params, opts.quad)?, opts)
    }

    /// Builds on precomputed kernels; the policy is read from `kernels.params`.
    pub fn from_kernels(kernels: Kernels, opts: AnalyticOptions) -> Result<Self> {
        let p = kernels.params;
        let a1 = kernels.a1();
        let vac = 1.0 / (kernels.g * a1);
        let l1 = kernels.lhat(1.0)?;
        let (k_c, bracket, err) = match p.policy {
            Policy::Single => {
                let k_c = (p.mu - p.xi) * p.gamma / (p.xi * p.lambda);
                let bd = kernels.combined_bd()?;
                (
                    k_c,
                    bd.value + k_c * l1.value,
                    bd.abs_error_estimate + k_c * l1.abs_error_estimate,
                )
            }
            Policy::Multiple => {
                // -gB + D/A written with the pair that diverges at 1: D = E - C.
                let be = kernels.combined_be(kernels.be_coefficient())?;
                (
                    0.0,
                    be.value - l1.value / a1,
                    be.abs_error_estimate + l1.abs_error_estimate / a1,
                )
            }
        };
        let denom = vac + bracket;
        let p00 = 1.0 / denom;
        if !(p00 > 0.0 && p00 < 1.0) {
            return Err(Error::NonPositiveResult {
                what: "p00".into(),
                value: p00,
            });
        }
        Ok(Self {
            kernels,
            opts,
            p00,
            p00_error: p00 * p00 * err,
            k_c,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.kernels.params
    }

    pub fn kernels(&self) -> &Kernels {
        &self.kernels
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    pub fn boundary(&self) -> BoundaryProbs {
        let p = self.params();
        let a1 = self.kernels.a1();
        match p.policy {
            Policy::Single => BoundaryProbs {
                p00: self.p00,
                p10: p.gamma / p.lambda * self.p00,
                p11: p.xi / (p.mu * a1) * self.p00,
            },
            Policy::Multiple => BoundaryProbs {
                p00: self.p00,
                p10: 0.0,
                p11: (p.xi - p.gamma * a1) / (p.mu * a1) * self.p00,
            },
        }
    }

    /// `P(J = 0) = P0(1) = p00 ξ / (γ A)`.
    pub fn p_vac(&self) -> f64 {
        self.p00 / (self.kernels.g * self.kernels.a1())
    }

    fn check_z(z: f64) -> Result<()> {
        if (-1.0..1.0).contains(&z) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "partial generating functions are evaluated on [-1, 1); z = {z} (use p_vac / p_ser at z = 1)"
            )))
        }
    }

    pub fn pgf0(&self, z: f64) -> Result<PgfEvaluation> {
        Self::check_z(z)?;
        if z == 0.0 {
            return Ok(PgfEvaluation {
                z,
                value: self.p00,
                abs_error_estimate: self.p00_error,
            });
        }
        let value = self.p00 * self.kernels.tail(z)? / (self.kernels.g * self.kernels.a1());
        Ok(PgfEvaluation {
            z,
            value,
            abs_error_estimate: self.p00_error + value * 1e-13,
        })
    }

    pub fn pgf1(&self, z: f64) -> Result<PgfEvaluation> {
        Self::check_z(z)?;
        if z == 0.0 {
            // Continuity: P1(0) = p10.
            return Ok(PgfEvaluation {
                z,
                value: self.boundary().p10,
                abs_error_estimate: self.p00_error,
            });
        }
        let (value, err) = self.p1_with_error(z)?;
        Ok(PgfEvaluation {
            z,
            value,
            abs_error_estimate: err,
        })
    }

    fn p1_with_error(&self, z: f64) -> Result<(f64, f64)> {
        let j = self.kernels.jhat(z)?;
        let scale = self.p00 * (-self.kernels.a * (1.0 - z)).exp();
        let (mut v, mut e) = (z * j.value, z.abs() * j.abs_error_estimate);
        if self.k_c != 0.0 {
            let l = self.kernels.lhat(z)?;
            v += self.k_c * l.value;
            e += self.k_c * l.abs_error_estimate;
        }
        Ok((scale * v, scale * e + self.p00_error))
    }

    /// `E(N1) = P1'(1)` by extrapolating backward differences from below.
    pub fn mean_n1_extrapolated(&self) -> Result<(f64, f64)> {
        let (p1_one, _) = self.p1_with_error(1.0)?;
        richardson::extrapolate(
            |h| Ok((p1_one - self.p1_with_error(1.0 - h)?.0) / h),
            self.opts.richardson_h0,
            self.opts.richardson_levels,
        )
    }

    /// `E(N1)` from differentiating the `P1` equation at `z = 1`.
    pub fn mean_n1_closed_form(&self) -> f64 {
        let p = self.params();
        let pv = self.p_vac();
        let n0 = p.lambda / (p.gamma + p.xi) * pv;
        let mut num = (p.lambda - p.mu + p.xi) * (1.0 - pv) + p.gamma * n0;
        if p.policy == Policy::Single {
            num += (p.mu - p.xi) * self.boundary().p10;
        }
        num / p.xi
    }

    /// `E(N1)` exactly as printed for the policy (may be non-finite).
    pub fn mean_n1_paper_formula(&self) -> f64 {
        let p = self.params();
        let a1 = self.kernels.a1();
        match p.policy {
            Policy::Single => {
                (p.lambda - p.mu + p.xi) / p.xi
                    + (p.lambda / ((p.lambda + p.xi) * a1) - p.gamma / p.lambda
                        + p.mu * p.gamma / (p.lambda * p.xi))
                        * self.p00
            }
            Policy::Multiple => {
                let p0 = self.p_vac();
                ((-p.lambda + p.mu - p.xi) * (1.0 - p0) - p.gamma * p0) / (p.xi - p.gamma)
            }
        }
    }

    pub fn measures(&self) -> Result<PerformanceReport> {
        let p = *self.params();
        let b = self.boundary();
        let p_vac = self.p_vac();
        let p_idle = b.p10;
        let p_ser = 1.0 - p_vac - p_idle;
        let mean_n0 = p.lambda / (p.gamma + p.xi) * p_vac;
        let (mean_n1, n1_err) = self.mean_n1_extrapolated()?;
        let mean_n_total = mean_n0 + mean_n1;
        let s00 = sojourn::sv_sojourn_vacation(&p, 0);

        let mut r = PerformanceReport {
            engine: EngineKind::Analytic,
            params: p,
            p00: self.p00,
            p_vac,
            p_idle,
            p_ser,
            mean_n0,
            mean_n1,
            mean_n_total,
            sojourn: SojournSummary {
                s10: (p.policy == Policy::Single).then(|| sojourn::sv_sojourn_busy(&p, 0)),
                s00,
                mean: mean_n_total / p.lambda,
            },
            extra: Default::default(),
            half_widths: Default::default(),
            notes: Vec::new(),
        };
        r.set_extra("p10", b.p10);
        r.set_extra("p11", b.p11);
        r.set_extra("a1", self.kernels.a1());
        r.set_extra("p00_error_estimate", self.p00_error);
        r.set_extra("fraction_served", p.mu * p_ser / p.lambda);
        r.set_extra("mean_n1_extrapolation_error", n1_err);
        r.set_extra("mean_n1_closed_form", self.mean_n1_closed_form());
        r.set_extra("mean_n1_paper_formula", self.mean_n1_paper_formula());
        r.set_extra("sojourn_s00_paper_formula", sojourn::sojourn_s00_printed(&p));
        r.set_extra("sojourn_s01", sojourn::sv_sojourn_vacation(&p, 1));
        r.set_extra(
            "sojourn_s01_paper_sum",
            sojourn::sojourn_vacation_closed_form(&p, 1, sojourn::ClosedFormVariant::Printed),
        );
        r.set_extra("sojourn_s11", sojourn::sv_sojourn_busy(&p, 1));

        if p.policy == Policy::Multiple {
            let printed = self.kernels.be_coefficient_printed();
            match self.kernels.combined_be(printed) {
                Ok(v) => {
                    let alt = 1.0 / (p_vac / self.p00 + v.value);
                    r.set_extra("p00_paper_formula", alt);
                }
                Err(e) => r.notes.push(format!(
                    "printed multiple-vacation normalisation has no finite value: {e}"
                )),
            }
        }
        if !mean_n1.is_finite() || n1_err > 1e-6 {
            r.notes.push(format!(
                "mean_n1 extrapolation error estimate is {n1_err:e}"
            ));
        }
        Ok(r)
    }
}

fn require_policy(p: &ModelParams, want: Policy) -> Result<()> {
    if p.policy == want {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "this operation needs policy '{want}', got '{}'",
            p.policy
        )))
    }
}
