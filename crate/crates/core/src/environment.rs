//! User parameter draws and the reward models.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sampling::gaussian_vector;

/// The user feature vector `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    theta: DVector<f64>,
}

impl ParameterVector {
    pub fn new(theta: DVector<f64>) -> Result<Self> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta"));
        }
        Ok(Self { theta })
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// Draws `θ ~ N(0, I_p / p)`.
pub fn draw_theta<R: Rng + ?Sized>(p: usize, rng: &mut R) -> ParameterVector {
    let scale = 1.0 / (p as f64).sqrt();
    ParameterVector {
        theta: gaussian_vector(p, rng) * scale,
    }
}

/// Lowest and highest star rating.
pub const RATING_MIN: f64 = 1.0;
pub const RATING_MAX: f64 = 5.0;

/// Round half up to the nearest integer, then clamp to the 1..=5 star scale.
pub fn quantize(z: f64) -> f64 {
    (z + 0.5).floor().clamp(RATING_MIN, RATING_MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackModel {
    /// `y = ⟨x, θ⟩ + z`, `z ~ N(0, σ²)`.
    GaussianLinear { sigma: f64 },
    /// `y = Quant(a_u + ⟨x, θ⟩) - a_u`.
    QuantizedCatalog { user_offset: f64 },
}

/// Observed and expected reward of one pull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reward {
    pub observed: f64,
    pub expected: f64,
}

impl FeedbackModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        Ok(Self::GaussianLinear { sigma })
    }

    pub fn quantized(user_offset: f64) -> Result<Self> {
        if !user_offset.is_finite() {
            return Err(invalid("user_offset", "must be finite"));
        }
        Ok(Self::QuantizedCatalog { user_offset })
    }

    pub fn reward<R: Rng + ?Sized>(&self, arm: &DVector<f64>, theta: &ParameterVector, rng: &mut R) -> Result<Reward> {
        if arm.len() != theta.dim() {
            return Err(Error::DimensionMismatch {
                expected: theta.dim(),
                actual: arm.len(),
            });
        }
        let expected = arm.dot(theta.as_vector());
        let observed = match *self {
            Self::GaussianLinear { sigma } => {
                if sigma == 0.0 {
                    expected
                } else {
                    let z: f64 = Normal::new(0.0, sigma)
                        .map_err(|e| invalid("sigma", e.to_string()))?
                        .sample(rng);
                    expected + z
                }
            }
            Self::QuantizedCatalog { user_offset } => quantize(user_offset + expected) - user_offset,
        };
        Ok(Reward { observed, expected })
    }
}
