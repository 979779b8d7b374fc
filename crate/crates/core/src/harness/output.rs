//! CSV and JSON renderings of a run.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::bounds::{BoundConstants, BoundCurves};
use super::config::SimulationConfig;
use super::runner::TrajectorySummary;

pub const CSV_HEADER: &str = "t,mean_reward,se_reward,mean_risk,se_risk,mean_trace,mean_thetahat_norm,\
lower_short,upper_short,lower_long_risk,upper_long_risk";

/// Rounding rule recorded in metadata for quantized feedback.
pub const QUANT_RULE: &str = "round half up to the nearest integer, clamp to [1, 5]";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per step. Bound columns are empty where a bound does not apply.
pub fn render_csv(summary: &TrajectorySummary, curves: Option<&BoundCurves>) -> String {
    let mut out = String::with_capacity(summary.horizon * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..summary.horizon {
        let bound = |f: fn(&BoundCurves) -> &Vec<Option<f64>>| opt(curves.and_then(|c| f(c).get(k).copied().flatten()));
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            k + 1,
            summary.reward[k].mean,
            summary.reward[k].se,
            summary.risk[k].mean,
            summary.risk[k].se,
            summary.trace[k].mean,
            summary.thetahat_norm[k].mean,
            bound(|c| &c.lower_short),
            bound(|c| &c.upper_short),
            bound(|c| &c.lower_long_risk),
            bound(|c| &c.upper_long_risk),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Deterministic identifier of a configuration (hex prefix of its SHA-256).
pub fn run_id(config: &SimulationConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    hex(&Sha256::digest(&json)[..8])
}

/// Lowercase hexadecimal encoding.
pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a> {
    pub run_id: String,
    pub seed: u64,
    pub version: &'static str,
    pub config: &'a SimulationConfig,
    pub noise_var: f64,
    pub constants: Option<BoundConstants>,
    pub mean_r_opt: f64,
    pub quant_rule: Option<&'static str>,
    pub phased_exploration_len: usize,
    pub phased_exploitation_base: usize,
}

impl<'a> Metadata<'a> {
    pub fn new(config: &'a SimulationConfig, summary: &TrajectorySummary, curves: Option<&BoundCurves>) -> Self {
        Self {
            run_id: run_id(config),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION"),
            config,
            noise_var: config.noise_var(),
            constants: curves.map(|c| c.constants),
            mean_r_opt: summary.r_opt.mean,
            quant_rule: matches!(config.feedback, super::config::FeedbackSpec::Quant { .. }).then_some(QUANT_RULE),
            phased_exploration_len: config.phased.explore * config.p,
            phased_exploitation_base: config.phased.exploit * config.p,
        }
    }
}
