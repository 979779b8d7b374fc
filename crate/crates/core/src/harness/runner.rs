//! Monte Carlo runner.
//!
//! Realization `i` draws from RNG stream `(seed, i)`. Realizations are grouped
//! into fixed-size blocks, each block is accumulated in index order, and the
//! block results are merged pairwise in block order. The output therefore
//! depends only on the configuration, never on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{draw_theta, FeedbackModel};
use crate::error::{Error, Result};
use crate::geometry::ArmSet;
use crate::policy::{check_compatible, oracle_reward, PolicyState};
use crate::sampling::stream;

use super::config::SimulationConfig;
use super::stats::{pairwise, Moments, Stat};

const BLOCK: usize = 16;

/// Per-realization `‖θ̂_t‖` samples at one probe time, in realization order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSamples {
    pub t: usize,
    pub thetahat_norms: Vec<f64>,
}

/// Averages over realizations; index `t - 1` holds step `t`.
///
/// `trace`, `thetahat_norm` and friends describe the posterior used to choose
/// the arm at step `t`, i.e. after `t - 1` observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub reps: usize,
    pub horizon: usize,
    /// Cumulative expected reward `R_t`.
    pub reward: Vec<Stat>,
    /// Cumulative risk `t r_opt - R_t`.
    pub risk: Vec<Stat>,
    pub trace: Vec<Stat>,
    pub thetahat_norm: Vec<Stat>,
    pub thetahat_norm_sq: Vec<Stat>,
    /// `‖θ̂_t‖² + Tr Σ_t`.
    pub second_moment_total: Vec<Stat>,
    pub r_opt: Stat,
    /// Present when diagnostics are enabled.
    pub probes: Vec<ProbeSamples>,
}

impl TrajectorySummary {
    pub fn reward_means(&self) -> Vec<f64> {
        self.reward.iter().map(|s| s.mean).collect()
    }

    pub fn at(&self, t: usize) -> Option<usize> {
        (t >= 1 && t <= self.horizon).then(|| t - 1)
    }

    pub fn probe(&self, t: usize) -> Option<&ProbeSamples> {
        self.probes.iter().find(|p| p.t == t)
    }
}

#[derive(Debug, Clone)]
struct Block {
    reward: Vec<Moments>,
    risk: Vec<Moments>,
    trace: Vec<Moments>,
    norm: Vec<Moments>,
    norm_sq: Vec<Moments>,
    total: Vec<Moments>,
    r_opt: Moments,
    probes: Vec<Vec<f64>>,
}

impl Block {
    fn new(horizon: usize, n_probes: usize) -> Self {
        let z = vec![Moments::default(); horizon];
        Self {
            reward: z.clone(),
            risk: z.clone(),
            trace: z.clone(),
            norm: z.clone(),
            norm_sq: z.clone(),
            total: z,
            r_opt: Moments::default(),
            probes: vec![Vec::new(); n_probes],
        }
    }

    fn merge(&self, other: &Block) -> Block {
        let m = |a: &[Moments], b: &[Moments]| a.iter().zip(b).map(|(x, y)| x.merge(y)).collect::<Vec<_>>();
        Block {
            reward: m(&self.reward, &other.reward),
            risk: m(&self.risk, &other.risk),
            trace: m(&self.trace, &other.trace),
            norm: m(&self.norm, &other.norm),
            norm_sq: m(&self.norm_sq, &other.norm_sq),
            total: m(&self.total, &other.total),
            r_opt: self.r_opt.merge(&other.r_opt),
            probes: self
                .probes
                .iter()
                .zip(&other.probes)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
        }
    }
}

struct Context<'a> {
    config: &'a SimulationConfig,
    set: &'a ArmSet,
    feedback: FeedbackModel,
    probe_times: Vec<usize>,
}

impl Context<'_> {
    fn run_realization(&self, index: u64, block: &mut Block) -> Result<()> {
        let cfg = self.config;
        let p = cfg.p;
        let mut rng = stream(cfg.seed, index);
        let theta = draw_theta(p, &mut rng);
        let r_opt = oracle_reward(self.set, &theta)?;
        let mut policy = PolicyState::new(cfg.policy, p, cfg.delta, &theta)?.with_phased_schedule(cfg.phased);
        block.r_opt.push(r_opt);

        let mut cumulative = 0.0;
        let mut next_probe = 0;
        for t in 1..=cfg.horizon {
            let post = policy.posterior();
            let trace = post.trace_cov();
            let norm_sq = post.mean_norm_sq();
            let norm = norm_sq.sqrt();
            if self.probe_times.get(next_probe) == Some(&t) {
                block.probes[next_probe].push(norm);
                next_probe += 1;
            }

            let arm = policy.select_arm(self.set, &mut rng)?;
            let r = self.feedback.reward(arm.vector(), &theta, &mut rng)?;
            cumulative += r.expected;

            let k = t - 1;
            block.reward[k].push(cumulative);
            block.risk[k].push(t as f64 * r_opt - cumulative);
            block.trace[k].push(trace);
            block.norm[k].push(norm);
            block.norm_sq[k].push(norm_sq);
            block.total[k].push(norm_sq + trace);

            policy.observe(&arm, r.observed)?;
        }
        Ok(())
    }

    fn run_block(&self, start: usize, end: usize) -> Result<Block> {
        let mut block = Block::new(self.config.horizon, self.probe_times.len());
        for i in start..end {
            self.run_realization(i as u64, &mut block)?;
        }
        Ok(block)
    }
}

/// Validates the configuration and the policy/arm-set pairing.
pub fn preflight(config: &SimulationConfig, set: &ArmSet) -> Result<()> {
    config.validate()?;
    if set.dim() != config.p {
        return Err(Error::DimensionMismatch {
            expected: config.p,
            actual: set.dim(),
        });
    }
    check_compatible(config.policy, set)
}

/// Runs `config.reps` realizations on `set` and averages them.
pub fn run_experiment(config: &SimulationConfig, set: &ArmSet) -> Result<TrajectorySummary> {
    preflight(config, set)?;
    let probe_times = if config.diagnostics {
        config.probe_times()
    } else {
        Vec::new()
    };
    let ctx = Context {
        config,
        set,
        feedback: config.feedback_model()?,
        probe_times,
    };
    let ranges: Vec<(usize, usize)> = (0..config.reps)
        .step_by(BLOCK)
        .map(|s| (s, (s + BLOCK).min(config.reps)))
        .collect();

    let work = || -> Vec<Result<Block>> { ranges.par_iter().map(|&(s, e)| ctx.run_block(s, e)).collect() };
    let blocks = if config.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "workers",
                reason: e.to_string(),
            })?
            .install(work)
    };
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    let total = pairwise(&blocks, &|a: &Block, b: &Block| a.merge(b)).expect("reps >= 1");

    let stats = |v: &[Moments]| v.iter().map(Moments::stat).collect::<Vec<_>>();
    Ok(TrajectorySummary {
        reps: config.reps,
        horizon: config.horizon,
        reward: stats(&total.reward),
        risk: stats(&total.risk),
        trace: stats(&total.trace),
        thetahat_norm: stats(&total.norm),
        thetahat_norm_sq: stats(&total.norm_sq),
        second_moment_total: stats(&total.total),
        r_opt: total.r_opt.stat(),
        probes: ctx
            .probe_times
            .iter()
            .zip(total.probes)
            .map(|(&t, thetahat_norms)| ProbeSamples { t, thetahat_norms })
            .collect(),
    })
}
