//! Gaussian posterior over the user parameter under linear observations.
//!
//! With prior `N(0, I/p)` and noise variance `σ²`, the posterior after `t - 1`
//! observations has precision `p I + Σ x xᵀ / σ²` and mean equal to the ridge
//! solution. The state is advanced by rank-one inversion-lemma updates, so each
//! observation costs `O(p²)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Arm, NORM_TOL};

/// Diagonal entries below this value are reported as a PSD violation.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    step: u64,
    noise_var: f64,
}

impl PosteriorState {
    /// Prior state: zero mean, covariance `I/p`, step 1.
    pub fn new(dim: usize, noise_var: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(invalid("noise_var", format!("must be finite and > 0, got {noise_var}")));
        }
        Ok(Self {
            mean: DVector::zeros(dim),
            covariance: DMatrix::identity(dim, dim) / dim as f64,
            step: 1,
            noise_var,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Number of observations absorbed plus one.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn trace_cov(&self) -> f64 {
        self.covariance.trace()
    }

    pub fn mean_norm(&self) -> f64 {
        self.mean.norm()
    }

    pub fn mean_norm_sq(&self) -> f64 {
        self.mean.norm_squared()
    }

    /// Absorbs one observation `(arm, reward)` in place.
    ///
    /// `Σ' = Σ - Σx xᵀΣ / (σ² + xᵀΣx)`, `θ̂' = θ̂ + Σx (y - xᵀθ̂) / (σ² + xᵀΣx)`.
    pub fn observe(&mut self, arm: &DVector<f64>, reward: f64) -> Result<()> {
        let p = self.dim();
        if arm.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: arm.len(),
            });
        }
        if !reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        let norm = arm.norm();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::ArmOutsideBall { norm, tol: NORM_TOL });
        }

        let sx = &self.covariance * arm;
        let denom = self.noise_var + arm.dot(&sx);
        let innovation = reward - arm.dot(&self.mean);
        self.mean.axpy(innovation / denom, &sx, 1.0);

        let inv = 1.0 / denom;
        for j in 0..p {
            let sj = sx[j] * inv;
            for i in 0..p {
                self.covariance[(i, j)] -= sx[i] * sj;
            }
        }
        symmetrize(&mut self.covariance);
        self.step += 1;

        for i in 0..p {
            let d = self.covariance[(i, i)];
            if !d.is_finite() {
                return Err(Error::NonFinite("posterior covariance"));
            }
            if d < -PSD_TOL {
                return Err(Error::Numerical(format!(
                    "covariance diagonal entry {i} is {d:e} after step {}",
                    self.step
                )));
            }
        }
        Ok(())
    }

    /// Value-style update: returns the posterior after observing `(arm, reward)`.
    pub fn update(&self, arm: &Arm, reward: f64) -> Result<Self> {
        let mut next = self.clone();
        next.observe(arm.vector(), reward)?;
        Ok(next)
    }

    /// Full eigenvalue check of positive semidefiniteness.
    ///
    /// `O(p³)`, so it is not run on every update.
    pub fn check_psd(&self) -> Result<()> {
        let eig = self.covariance.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -PSD_TOL {
            return Err(Error::Numerical(format!(
                "covariance has eigenvalue {min:e} at step {}",
                self.step
            )));
        }
        Ok(())
    }
}

/// Convenience constructor mirroring the operation name.
pub fn init_posterior(p: usize, noise_var: f64) -> Result<PosteriorState> {
    PosteriorState::new(p, noise_var)
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
