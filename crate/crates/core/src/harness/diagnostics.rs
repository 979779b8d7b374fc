//! Empirical checks of the posterior lemmas at the probe times.

use serde::Serialize;

use super::bounds::BoundConstants;
use super::config::SimulationConfig;
use super::runner::TrajectorySummary;
use crate::error::Result;

/// Tail levels checked for the sub-Gaussian bound on `‖θ̂_t‖`.
pub const SUB_GAUSSIAN_NUS: [f64; 3] = [1.5, 2.0, 3.0];

/// Monte Carlo slack in standard errors.
pub const SE_SLACK: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckKind {
    /// `E‖θ̂_t‖² ≥ C(γ,Δ)(t-1)/p` for `t ≤ pΔ`.
    SecondMomentGrowth,
    /// `P(‖θ̂_t‖ ≥ √(8(t-1)/(pΔ)) ν) ≤ e^{-(ν-1)²/3}`.
    SubGaussianTail { nu: f64 },
    /// `E Tr Σ_t ≤ C₄ √(p/t)` for `t ≥ pΔ + 1`.
    TraceDecay,
    /// `E‖θ̂_t‖² + E Tr Σ_t = 1`.
    Conservation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticCheck {
    pub t: usize,
    #[serde(flatten)]
    pub kind: CheckKind,
    pub empirical: f64,
    pub se: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub checks: Vec<DiagnosticCheck>,
}

impl DiagnosticReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &DiagnosticCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Evaluates every lemma check that applies at each probe time of `summary`.
///
/// The conservation identity is checked at every probe time; it only holds
/// when the posterior noise model matches the feedback model.
pub fn run_diagnostics(summary: &TrajectorySummary, config: &SimulationConfig) -> Result<DiagnosticReport> {
    let c = BoundConstants::new(config.p, config.delta, config.kappa, config.gamma)?;
    let mut checks = Vec::new();
    for probe in &summary.probes {
        let t = probe.t;
        let Some(k) = summary.at(t) else { continue };

        let total = summary.second_moment_total[k];
        checks.push(DiagnosticCheck {
            t,
            kind: CheckKind::Conservation,
            empirical: total.mean,
            se: total.se,
            bound: 1.0,
            passed: (total.mean - 1.0).abs() <= SE_SLACK * total.se + 1e-12,
        });

        if t >= 2 {
            if let Some(bound) = c.second_moment_bound(t) {
                let s = summary.thetahat_norm_sq[k];
                checks.push(DiagnosticCheck {
                    t,
                    kind: CheckKind::SecondMomentGrowth,
                    empirical: s.mean,
                    se: s.se,
                    bound,
                    passed: s.mean + SE_SLACK * s.se >= bound,
                });
            }
            let n = probe.thetahat_norms.len() as f64;
            for nu in SUB_GAUSSIAN_NUS {
                let (threshold, bound) = c.sub_gaussian(t, nu);
                let hits = probe.thetahat_norms.iter().filter(|&&x| x >= threshold).count() as f64;
                let freq = hits / n;
                let se = (freq * (1.0 - freq) / n).sqrt();
                checks.push(DiagnosticCheck {
                    t,
                    kind: CheckKind::SubGaussianTail { nu },
                    empirical: freq,
                    se,
                    bound,
                    passed: freq <= bound + SE_SLACK * se,
                });
            }
        }

        if let Some(bound) = c.trace_bound(t) {
            let s = summary.trace[k];
            checks.push(DiagnosticCheck {
                t,
                kind: CheckKind::TraceDecay,
                empirical: s.mean,
                se: s.se,
                bound,
                passed: s.mean <= bound + SE_SLACK * s.se,
            });
        }
    }
    Ok(DiagnosticReport { checks })
}
