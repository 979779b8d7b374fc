use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::RngCore;
use serde::Serialize;

use crate::environment::FeedbackModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::{parse_catalog, ArmSet, DEFAULT_KERNEL_DELTA};
use crate::policy::{PhasedSchedule, PolicyKind};
use crate::sampling::stream;

/// Default number of realizations.
pub const DEFAULT_REPS: usize = 2000;

/// Arm set descriptor as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmSetSpec {
    Ball,
    Cloud { m: usize },
    Catalog { path: PathBuf },
}

impl fmt::Display for ArmSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArmSetSpec::Ball => f.write_str("ball"),
            ArmSetSpec::Cloud { m } => write!(f, "cloud:{m}"),
            ArmSetSpec::Catalog { path } => write!(f, "catalog:{}", path.display()),
        }
    }
}

impl FromStr for ArmSetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ball" {
            return Ok(ArmSetSpec::Ball);
        }
        if let Some(m) = s.strip_prefix("cloud:") {
            let m: usize = m
                .parse()
                .map_err(|_| invalid("arm-set", format!("bad cloud size `{m}`")))?;
            if m == 0 {
                return Err(invalid("arm-set", "cloud size must be at least 1"));
            }
            return Ok(ArmSetSpec::Cloud { m });
        }
        if let Some(path) = s.strip_prefix("catalog:") {
            if path.is_empty() {
                return Err(invalid("arm-set", "catalog path is empty"));
            }
            return Ok(ArmSetSpec::Catalog { path: path.into() });
        }
        Err(invalid(
            "arm-set",
            format!("expected ball, cloud:M or catalog:PATH, got `{s}`"),
        ))
    }
}

/// Feedback descriptor: Gaussian noise with `σ² = Δ/p`, or quantized star ratings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackSpec {
    Gaussian,
    Quant { user_offset: f64 },
}

impl fmt::Display for FeedbackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeedbackSpec::Gaussian => f.write_str("gaussian"),
            FeedbackSpec::Quant { user_offset } => write!(f, "quant:{user_offset}"),
        }
    }
}

impl FromStr for FeedbackSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "gaussian" {
            return Ok(FeedbackSpec::Gaussian);
        }
        if let Some(a) = s.strip_prefix("quant:") {
            let user_offset: f64 = a
                .parse()
                .map_err(|_| invalid("feedback", format!("bad user offset `{a}`")))?;
            if !user_offset.is_finite() {
                return Err(invalid("feedback", "user offset must be finite"));
            }
            return Ok(FeedbackSpec::Quant { user_offset });
        }
        Err(invalid("feedback", format!("expected gaussian or quant:A, got `{s}`")))
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub p: usize,
    /// Noise-to-signal ratio `Δ = pσ²`.
    pub delta: f64,
    pub horizon: usize,
    pub reps: usize,
    pub policy: PolicyKind,
    pub arm_set: ArmSetSpec,
    pub seed: u64,
    pub feedback: FeedbackSpec,
    pub phased: PhasedSchedule,
    /// Inner subset radius for finite sets (`X' = X ∩ Ball(r)`).
    pub inner_radius: Option<f64>,
    pub kernel_delta: f64,
    /// Divide catalog vectors by the largest norm instead of rejecting rows outside the unit ball.
    pub renormalize: bool,
    /// Assumed arm-set constants for the bound curves.
    pub kappa: f64,
    pub gamma: f64,
    pub diagnostics: bool,
    pub check_bounds: bool,
    /// Extra probe times for per-realization samples.
    pub probes: Vec<usize>,
    /// Worker threads; 0 uses all available. Never affects results.
    #[serde(skip)]
    pub workers: usize,
}

impl SimulationConfig {
    /// Unit-ball defaults at dimension `p`.
    pub fn new(p: usize, delta: f64, horizon: usize, policy: PolicyKind, seed: u64) -> Self {
        Self {
            p,
            delta,
            horizon,
            reps: DEFAULT_REPS,
            policy,
            arm_set: ArmSetSpec::Ball,
            seed,
            feedback: FeedbackSpec::Gaussian,
            phased: PhasedSchedule::default(),
            inner_radius: None,
            kernel_delta: DEFAULT_KERNEL_DELTA,
            renormalize: false,
            kappa: 1.0 / 3f64.sqrt(),
            gamma: 2.0 / 3.0,
            diagnostics: false,
            check_bounds: true,
            probes: Vec::new(),
            workers: 0,
        }
    }

    /// `p = 30`, `Δ = 1`, 5000 realizations.
    pub fn paper_figure(policy: PolicyKind, seed: u64) -> Self {
        let mut c = Self::new(30, 1.0, 1000, policy, seed);
        c.reps = 5000;
        c
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_arm_set(mut self, arm_set: ArmSetSpec) -> Self {
        self.arm_set = arm_set;
        self
    }

    pub fn with_feedback(mut self, feedback: FeedbackSpec) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn with_probes(mut self, probes: Vec<usize>) -> Self {
        self.probes = probes;
        self
    }

    pub fn noise_var(&self) -> f64 {
        self.delta / self.p as f64
    }

    /// `pΔ`, the boundary between the data-poor and data-rich regimes.
    pub fn regime_boundary(&self) -> f64 {
        self.p as f64 * self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid("delta", format!("must be finite and > 0, got {}", self.delta)));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        if self.reps == 0 {
            return Err(invalid("reps", "must be at least 1"));
        }
        if self.phased.explore == 0 || self.phased.exploit == 0 {
            return Err(invalid("phased", "phase multipliers must be at least 1"));
        }
        if !(self.kernel_delta > 0.0 && self.kernel_delta.is_finite()) {
            return Err(invalid("kernel-delta", "must be > 0"));
        }
        if let Some(r) = self.inner_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("inner-radius", "must be > 0"));
            }
        }
        if self.check_bounds {
            self.check_hypotheses()?;
        }
        Ok(())
    }

    /// `p ≥ 2`, `pΔ ≥ 2`, `κ, γ ∈ (0, 1]`.
    pub fn check_hypotheses(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::Hypothesis(format!("p = {} but p >= 2 is required", self.p)));
        }
        if self.regime_boundary() < 2.0 {
            return Err(Error::Hypothesis(format!(
                "p·Δ = {} but p·Δ >= 2 is required",
                self.regime_boundary()
            )));
        }
        for (name, v) in [("kappa", self.kappa), ("gamma", self.gamma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Hypothesis(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn feedback_model(&self) -> Result<FeedbackModel> {
        match self.feedback {
            FeedbackSpec::Gaussian => FeedbackModel::gaussian(self.noise_var().sqrt()),
            FeedbackSpec::Quant { user_offset } => FeedbackModel::quantized(user_offset),
        }
    }

    /// Seed used to generate a uniform cloud, derived from the master seed.
    pub fn cloud_seed(&self) -> u64 {
        stream(self.seed, u64::MAX).next_u64()
    }

    /// Builds the arm set, reading the catalog file if needed.
    pub fn build_arm_set(&self) -> Result<ArmSet> {
        let set = match &self.arm_set {
            ArmSetSpec::Ball => ArmSet::unit_ball(self.p)?,
            ArmSetSpec::Cloud { m } => ArmSet::uniform_cloud(self.p, *m, self.cloud_seed())?,
            ArmSetSpec::Catalog { path } => {
                let bytes = std::fs::read(path).map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
                self.catalog_from_bytes(&bytes, &path.display().to_string())?
            }
        };
        self.finish_arm_set(set)
    }

    pub fn catalog_from_bytes(&self, bytes: &[u8], name: &str) -> Result<ArmSet> {
        let set = parse_catalog(bytes, name, self.renormalize)?;
        if set.dim() != self.p {
            return Err(Error::Catalog(format!(
                "catalog has {} features but p = {}",
                set.dim(),
                self.p
            )));
        }
        Ok(set)
    }

    pub fn finish_arm_set(&self, set: ArmSet) -> Result<ArmSet> {
        let mut set = set;
        if !set.is_ball() {
            set = set.with_kernel_delta(self.kernel_delta)?;
            if let Some(r) = self.inner_radius {
                set = set.with_inner_radius(r)?;
            }
        }
        Ok(set)
    }

    /// Probe times: powers of two, `pΔ`, `2pΔ`, `10pΔ`, `20pΔ` and any extras, within the horizon.
    pub fn probe_times(&self) -> Vec<usize> {
        let mut times = Vec::new();
        let mut t = 2;
        while t <= self.horizon {
            times.push(t);
            t *= 2;
        }
        let base = self.regime_boundary().floor() as usize;
        for k in [1, 2, 10, 20] {
            times.push(base * k);
        }
        times.extend(self.probes.iter().copied());
        times.retain(|&t| t >= 1 && t <= self.horizon);
        times.sort_unstable();
        times.dedup();
        times
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arm_set_specs_parse() {
        assert_eq!("ball".parse::<ArmSetSpec>().unwrap(), ArmSetSpec::Ball);
        assert_eq!(
            "cloud:5000".parse::<ArmSetSpec>().unwrap(),
            ArmSetSpec::Cloud { m: 5000 }
        );
        assert_eq!(
            "catalog:data/items.csv".parse::<ArmSetSpec>().unwrap(),
            ArmSetSpec::Catalog {
                path: "data/items.csv".into()
            }
        );
        for bad in ["cloud:", "cloud:0", "cloud:x", "catalog:", "sphere"] {
            assert!(bad.parse::<ArmSetSpec>().is_err(), "{bad}");
        }
        for s in ["ball", "cloud:7", "catalog:a/b.csv"] {
            assert_eq!(s.parse::<ArmSetSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn feedback_specs_parse() {
        assert_eq!("gaussian".parse::<FeedbackSpec>().unwrap(), FeedbackSpec::Gaussian);
        assert_eq!(
            "quant:3.5".parse::<FeedbackSpec>().unwrap(),
            FeedbackSpec::Quant { user_offset: 3.5 }
        );
        assert!("quant:nan".parse::<FeedbackSpec>().is_err());
    }

    #[test]
    fn hypotheses() {
        let c = SimulationConfig::new(2, 1.0, 10, PolicyKind::Greedy, 1);
        c.validate().unwrap();
        let c = SimulationConfig::new(1, 1.0, 10, PolicyKind::Greedy, 1);
        assert!(matches!(c.validate(), Err(Error::Hypothesis(_))));
        let mut c = SimulationConfig::new(3, 0.5, 10, PolicyKind::Greedy, 1);
        assert!(matches!(c.validate(), Err(Error::Hypothesis(_))));
        c.check_bounds = false;
        c.validate().unwrap();
    }

    #[test]
    fn probe_grid() {
        let c = SimulationConfig::new(30, 1.0, 1000, PolicyKind::BallExplore, 1).with_probes(vec![60, 300, 1000, 5000]);
        assert_eq!(
            c.probe_times(),
            vec![2, 4, 8, 16, 30, 32, 60, 64, 128, 256, 300, 512, 600, 1000]
        );
    }
}
