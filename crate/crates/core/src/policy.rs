//! Decision rules: the smooth exploration policies and the baselines they are
//! compared against.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::ParameterVector;
use crate::error::{invalid, Error, Result};
use crate::geometry::{unit_direction, Arm, ArmSet};
use crate::posterior::PosteriorState;
use crate::sampling::{project_out, unit_vector};

/// Default exploration batch length multiplier for the phased baseline (`E_k = p`).
pub const DEFAULT_PHASED_EXPLORE: usize = 1;
/// Default exploitation base (`K_k = 2^k · p`).
pub const DEFAULT_PHASED_EXPLOIT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    BallExplore,
    SmoothExplore,
    Neighborhood,
    Phased,
    Greedy,
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::BallExplore,
        PolicyKind::SmoothExplore,
        PolicyKind::Neighborhood,
        PolicyKind::Phased,
        PolicyKind::Greedy,
        PolicyKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::BallExplore => "ball-explore",
            PolicyKind::SmoothExplore => "smooth-explore",
            PolicyKind::Neighborhood => "neighborhood",
            PolicyKind::Phased => "phased",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid("policy", format!("unknown policy `{s}`")))
    }
}

/// Phase lengths of the phased baseline, in units of `p`:
/// exploration batches last `explore · p` steps and the `k`-th exploitation
/// batch lasts `exploit · 2^k · p` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasedSchedule {
    pub explore: usize,
    pub exploit: usize,
}

impl Default for PhasedSchedule {
    fn default() -> Self {
        Self {
            explore: DEFAULT_PHASED_EXPLORE,
            exploit: DEFAULT_PHASED_EXPLOIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Exploration step playing basis vector `e_{index}` (zero-based).
    Explore {
        batch: u32,
        index: usize,
    },
    Exploit {
        batch: u32,
    },
}

impl PhasedSchedule {
    /// Phase of 1-based step `step` at dimension `p`.
    pub fn phase_at(&self, step: u64, p: usize) -> Phase {
        let explore_len = (self.explore * p) as u64;
        let mut offset = step - 1;
        let mut k: u32 = 1;
        loop {
            let exploit_len = (self.exploit * p) as u64 * 2u64.saturating_pow(k);
            if offset < explore_len {
                return Phase::Explore {
                    batch: k,
                    index: (offset % p as u64) as usize,
                };
            }
            if offset < explore_len + exploit_len {
                return Phase::Exploit { batch: k };
            }
            offset -= explore_len + exploit_len;
            k += 1;
        }
    }
}

/// `β_ℓ = √(2/3) · min(pΔ/ℓ, 1)^{1/4}`.
pub fn beta_schedule(step: u64, p: usize, delta: f64) -> f64 {
    let ratio = (p as f64 * delta / step as f64).min(1.0);
    (2.0f64 / 3.0).sqrt() * ratio.powf(0.25)
}

/// `sup_{x ∈ X} ⟨x, θ⟩`.
pub fn oracle_reward(set: &ArmSet, theta: &ParameterVector) -> Result<f64> {
    set.max_reward(theta.as_vector())
}

/// Per-realization policy state.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    posterior: PosteriorState,
    delta: f64,
    phased: PhasedSchedule,
    theta: Option<DVector<f64>>,
}

impl PolicyState {
    /// Fresh state at step 1 with `σ² = Δ/p`. The oracle policy keeps a copy of `θ`.
    pub fn new(kind: PolicyKind, p: usize, delta: f64, theta: &ParameterVector) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be finite and > 0, got {delta}")));
        }
        if theta.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: theta.dim(),
            });
        }
        Ok(Self {
            kind,
            posterior: PosteriorState::new(p, delta / p as f64)?,
            delta,
            phased: PhasedSchedule::default(),
            theta: (kind == PolicyKind::Oracle).then(|| theta.as_vector().clone()),
        })
    }

    pub fn with_phased_schedule(mut self, schedule: PhasedSchedule) -> Self {
        self.phased = schedule;
        self
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn posterior(&self) -> &PosteriorState {
        &self.posterior
    }

    pub fn dim(&self) -> usize {
        self.posterior.dim()
    }

    /// Current 1-based step `ℓ`.
    pub fn step(&self) -> u64 {
        self.posterior.step()
    }

    pub fn beta(&self) -> f64 {
        beta_schedule(self.step(), self.dim(), self.delta)
    }

    /// Chooses the arm to play at the current step.
    pub fn select_arm<R: Rng + ?Sized>(&self, set: &ArmSet, rng: &mut R) -> Result<Arm> {
        if set.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: set.dim(),
            });
        }
        let mean = self.posterior.mean();
        match self.kind {
            PolicyKind::BallExplore => {
                let radius = set
                    .ball_radius()
                    .ok_or_else(|| incompatible(self.kind, set, "needs a ball"))?;
                let d = unit_direction(mean);
                let beta = self.beta();
                let u = unit_vector(self.dim(), rng);
                let perp = project_out(&u, &d);
                let x = d * ((1.0 - beta * beta).sqrt() * radius) + perp * (beta * radius);
                Ok(Arm::unchecked(x))
            }
            PolicyKind::SmoothExplore => {
                let center = set.best_arm(mean)?;
                set.sample_exploration(&center, rng)
            }
            PolicyKind::Neighborhood => self.select_arm_neighborhood(set, rng),
            PolicyKind::Greedy => set.best_arm_full(mean),
            PolicyKind::Oracle => {
                let theta = self.theta.as_ref().expect("oracle state carries θ");
                set.best_arm_full(theta)
            }
            PolicyKind::Phased => self.phased_step(set),
        }
    }

    /// Best catalog item, then a uniform pick among the items within `β_ℓ` of it.
    pub fn select_arm_neighborhood<R: Rng + ?Sized>(&self, set: &ArmSet, rng: &mut R) -> Result<Arm> {
        if set.is_ball() {
            return Err(incompatible(PolicyKind::Neighborhood, set, "needs a finite catalog"));
        }
        let best = set.best_index_full(self.posterior.mean())?;
        let center = set.points()[best].vector();
        let members = set.neighbors(center, self.beta())?;
        if members.is_empty() {
            return Ok(set.points()[best].clone());
        }
        let pick = members[rng.random_range(0..members.len())];
        Ok(set.points()[pick].clone())
    }

    /// Phased baseline: scaled basis vectors during exploration batches, greedy otherwise.
    pub fn phased_step(&self, set: &ArmSet) -> Result<Arm> {
        match self.phased.phase_at(self.step(), self.dim()) {
            Phase::Explore { index, .. } => basis_arm(set, index),
            Phase::Exploit { .. } => set.best_arm_full(self.posterior.mean()),
        }
    }

    /// Absorbs the observed feedback for `arm`.
    pub fn observe(&mut self, arm: &Arm, observed: f64) -> Result<()> {
        self.posterior.observe(arm.vector(), observed)
    }
}

fn incompatible(kind: PolicyKind, set: &ArmSet, reason: &str) -> Error {
    Error::Incompatible {
        policy: kind.to_string(),
        arm_set: set.to_string(),
        reason: reason.into(),
    }
}

/// `e_i` scaled into the ball, or the catalog item nearest to it.
pub fn basis_arm(set: &ArmSet, index: usize) -> Result<Arm> {
    let p = set.dim();
    let mut e = DVector::zeros(p);
    e[index] = 1.0;
    match set.ball_radius() {
        Some(r) => Ok(Arm::unchecked(e * r)),
        None => Ok(set.points()[set.nearest_index(&e)?].clone()),
    }
}

/// Rejects policy/arm-set pairs that cannot run, before any simulation.
pub fn check_compatible(kind: PolicyKind, set: &ArmSet) -> Result<()> {
    match kind {
        PolicyKind::BallExplore if !set.is_ball() => Err(incompatible(kind, set, "needs a ball")),
        PolicyKind::Neighborhood if set.is_ball() => Err(incompatible(kind, set, "needs a finite catalog")),
        PolicyKind::SmoothExplore if !set.is_ball() => {
            if set.inner_indices().is_empty() {
                return Err(incompatible(kind, set, "inner subset is empty"));
            }
            for &i in set.inner_indices() {
                if let Err(e) = set.cloud_kernel(set.points()[i].vector(), set.kernel_delta()) {
                    return Err(incompatible(kind, set, &format!("kernel at item {i}: {e}")));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
