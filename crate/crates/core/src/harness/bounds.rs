//! Closed-form reward and risk bounds.
//!
//! Data-poor regime (`1 < t ≤ pΔ`): `C₁ t^{3/2} p^{-1/2} ≤ R_t ≤ C₂ t^{3/2} p^{-1/2}`.
//! Data-rich regime (`t > pΔ`): `√(ptΔ) - pΔ/2 ≤ t r_opt - R_t ≤ C₃ (pt)^{1/2 + ω(p)}`,
//! the upper risk bound being specific to the ball-exploration policy on the unit ball.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub p: usize,
    pub delta: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// `C(γ, Δ) = γ / (4(Δ + 1))`.
    pub c_gamma_delta: f64,
    /// `α(γ, Δ) = 1 + [3 ln(96 / (Δ C(γ, Δ)))]^{1/2}`.
    pub alpha: f64,
    /// `C₁ = κ √Δ C(γ, Δ) / (24 α)`.
    pub c1: f64,
    /// `C₂ = 2 / (3 √Δ)`.
    pub c2: f64,
    /// `C₃ = 70 (Δ + 1) / √Δ`.
    pub c3: f64,
    /// `C₄ = 3 (Δ + 1) / √Δ`.
    pub c4: f64,
    /// `ω(p) = 1 / (2(p + 2))`.
    pub omega: f64,
}

impl BoundConstants {
    pub fn new(p: usize, delta: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Hypothesis(format!("p = {p} but p >= 2 is required")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Hypothesis(format!("Δ = {delta} must be finite and > 0")));
        }
        if p as f64 * delta < 2.0 {
            return Err(Error::Hypothesis(format!(
                "p·Δ = {} but p·Δ >= 2 is required",
                p as f64 * delta
            )));
        }
        for (name, v) in [("κ", kappa), ("γ", gamma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Hypothesis(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        let sqrt_delta = delta.sqrt();
        let c_gamma_delta = gamma / (4.0 * (delta + 1.0));
        let alpha = 1.0 + (3.0 * (96.0 / (delta * c_gamma_delta)).ln()).sqrt();
        Ok(Self {
            p,
            delta,
            kappa,
            gamma,
            c_gamma_delta,
            alpha,
            c1: kappa * sqrt_delta * c_gamma_delta / (24.0 * alpha),
            c2: 2.0 / (3.0 * sqrt_delta),
            c3: 70.0 * (delta + 1.0) / sqrt_delta,
            c4: 3.0 * (delta + 1.0) / sqrt_delta,
            omega: 1.0 / (2.0 * (p as f64 + 2.0)),
        })
    }

    pub fn boundary(&self) -> f64 {
        self.p as f64 * self.delta
    }

    fn short_scale(&self, t: f64) -> f64 {
        t.powf(1.5) / (self.p as f64).sqrt()
    }

    /// Reward lower bound `C₁ t^{3/2}/√p`, defined for `1 < t ≤ pΔ`.
    pub fn lower_short(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        (t > 1 && tf <= self.boundary()).then(|| self.c1 * self.short_scale(tf))
    }

    /// Reward upper bound `C₂ t^{3/2}/√p`, defined for `1 ≤ t ≤ pΔ`.
    pub fn upper_short(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        (t >= 1 && tf <= self.boundary()).then(|| self.c2 * self.short_scale(tf))
    }

    /// Risk lower bound `√(ptΔ) - pΔ/2`, defined for `t > pΔ`.
    pub fn lower_long_risk(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        (tf > self.boundary()).then(|| (self.p as f64 * tf * self.delta).sqrt() - self.boundary() / 2.0)
    }

    /// Risk upper bound `C₃ (pt)^{1/2 + ω}`, defined for `t > pΔ`.
    pub fn upper_long_risk(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        (tf > self.boundary()).then(|| self.c3 * (self.p as f64 * tf).powf(0.5 + self.omega))
    }

    /// Trace bound `C₄ √(p/t)`, defined for `t ≥ pΔ + 1`.
    pub fn trace_bound(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        (tf >= self.boundary() + 1.0).then(|| self.c4 * (self.p as f64 / tf).sqrt())
    }

    /// Second-moment growth bound `C(γ, Δ)(t - 1)/p`, defined for `1 ≤ t ≤ pΔ`.
    pub fn second_moment_bound(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        (t >= 1 && tf <= self.boundary()).then(|| self.c_gamma_delta * (tf - 1.0) / self.p as f64)
    }

    /// Sub-Gaussian tail threshold `√(8(t - 1)/(pΔ)) ν` and its probability bound `e^{-(ν-1)²/3}`.
    pub fn sub_gaussian(&self, t: usize, nu: f64) -> (f64, f64) {
        let threshold = (8.0 * (t as f64 - 1.0) / self.boundary()).sqrt() * nu;
        (threshold, (-(nu - 1.0).powi(2) / 3.0).exp())
    }
}

/// Bound curves on `t = 1..=T`; `None` where a bound does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurves {
    pub constants: BoundConstants,
    pub lower_short: Vec<Option<f64>>,
    pub upper_short: Vec<Option<f64>>,
    pub lower_long_risk: Vec<Option<f64>>,
    pub upper_long_risk: Vec<Option<f64>>,
}

pub fn bound_curves(p: usize, delta: f64, kappa: f64, gamma: f64, horizon: usize) -> Result<BoundCurves> {
    let c = BoundConstants::new(p, delta, kappa, gamma)?;
    let ts = 1..=horizon;
    Ok(BoundCurves {
        lower_short: ts.clone().map(|t| c.lower_short(t)).collect(),
        upper_short: ts.clone().map(|t| c.upper_short(t)).collect(),
        lower_long_risk: ts.clone().map(|t| c.lower_long_risk(t)).collect(),
        upper_long_risk: ts.map(|t| c.upper_long_risk(t)).collect(),
        constants: c,
    })
}
