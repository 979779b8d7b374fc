//! Least-squares comparison of the two growth laws for the cumulative reward:
//! `c₃ t^{3/2}` (data-poor) against `c₁ t - c₂ √t` (classical).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthLaw {
    ThreeHalvesPower,
    LinearMinusRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub split: usize,
    pub c3: f64,
    pub rss_power: f64,
    pub c1: f64,
    pub c2: f64,
    pub rss_linear_root: f64,
    pub winner: GrowthLaw,
}

/// Fits both laws to `rewards[t - 1]` for `t = 1..=split`.
pub fn fit_regimes(rewards: &[f64], split: usize) -> Result<FitReport> {
    if split < 2 || split > rewards.len() {
        return Err(Error::DegenerateFit(format!(
            "split {split} must lie in [2, {}]",
            rewards.len()
        )));
    }
    let data = &rewards[..split];
    let ts = || (1..=split).map(|t| t as f64);

    let s_pp: f64 = ts().map(|t| t.powi(3)).sum();
    let s_py: f64 = ts().zip(data).map(|(t, y)| t.powf(1.5) * y).sum();
    let c3 = s_py / s_pp;
    let rss_power: f64 = ts().zip(data).map(|(t, y)| (y - c3 * t.powf(1.5)).powi(2)).sum();

    // normal equations for y ≈ a t + b √t, then c₁ = a, c₂ = -b
    let (mut s_tt, mut s_tr, mut s_rr, mut s_ty, mut s_ry) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, &y) in ts().zip(data) {
        let r = t.sqrt();
        s_tt += t * t;
        s_tr += t * r;
        s_rr += r * r;
        s_ty += t * y;
        s_ry += r * y;
    }
    let det = s_tt * s_rr - s_tr * s_tr;
    if det.abs() <= 1e-12 * s_tt * s_rr {
        return Err(Error::DegenerateFit("singular normal equations".into()));
    }
    let a = (s_ty * s_rr - s_ry * s_tr) / det;
    let b = (s_tt * s_ry - s_tr * s_ty) / det;
    let rss_linear_root: f64 = ts().zip(data).map(|(t, y)| (y - a * t - b * t.sqrt()).powi(2)).sum();

    let winner = if rss_power < rss_linear_root {
        GrowthLaw::ThreeHalvesPower
    } else {
        GrowthLaw::LinearMinusRoot
    };
    Ok(FitReport {
        split,
        c3,
        rss_power,
        c1: a,
        c2: -b,
        rss_linear_root,
        winner,
    })
}
