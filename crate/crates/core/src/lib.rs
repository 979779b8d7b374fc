//! Bayesian linear bandits in high dimension.
//!
//! A hidden parameter `θ ~ N(0, I/p)` generates rewards `⟨x, θ⟩ + z` with
//! Gaussian noise of variance `Δ/p`. Policies act on a Gaussian posterior
//! updated in closed form after each observation. The [`harness`] averages
//! many realizations and overlays the theoretical reward and risk bounds.
//!
//! ```
//! use linbandit::harness::{run_experiment, SimulationConfig};
//! use linbandit::PolicyKind;
//!
//! let config = SimulationConfig::new(8, 1.0, 20, PolicyKind::BallExplore, 7).with_reps(32);
//! let set = config.build_arm_set().unwrap();
//! let summary = run_experiment(&config, &set).unwrap();
//! assert_eq!(summary.reward.len(), 20);
//! ```

pub mod cli;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod policy;
pub mod posterior;
pub mod sampling;

pub use environment::{draw_theta, quantize, FeedbackModel, ParameterVector, Reward};
pub use error::{Error, Result};
pub use geometry::{parse_catalog, Arm, ArmSet, ArmSource, GeometryCertificate, InnerRule, Kernel};
pub use policy::{PhasedSchedule, PolicyKind, PolicyState};
pub use posterior::{init_posterior, PosteriorState};
