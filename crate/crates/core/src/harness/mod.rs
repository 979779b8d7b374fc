//! Experiment runner, bound curves, diagnostics and growth-law fits.

pub mod bounds;
pub mod config;
pub mod diagnostics;
pub mod fit;
pub mod output;
pub mod runner;
pub mod stats;

pub use bounds::{bound_curves, BoundConstants, BoundCurves};
pub use config::{ArmSetSpec, FeedbackSpec, SimulationConfig, DEFAULT_REPS};
pub use diagnostics::{run_diagnostics, CheckKind, DiagnosticCheck, DiagnosticReport};
pub use fit::{fit_regimes, FitReport, GrowthLaw};
pub use output::{render_csv, run_id, Metadata, CSV_HEADER};
pub use runner::{preflight, run_experiment, ProbeSamples, TrajectorySummary};
pub use stats::{Moments, Stat};
