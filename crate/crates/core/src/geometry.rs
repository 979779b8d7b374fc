//! Arm sets, exploration kernels and numerical checks of the arm-set geometry.
//!
//! An arm set `X` lives in the unit ball. Exploitation picks from an inner
//! subset `X'`; exploration around an inner arm `x` draws from a kernel `P_x`
//! supported on `X` with mean `x` and second moment bounded below by `(γ/p) I`.
//! The inner subset must also be "spread out": `sup_{x ∈ X'} ⟨x, θ⟩ ≥ κ ‖θ‖`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sampling::{project_out, stream, uniform_in_ball, unit_vector};

/// Slack allowed on `‖x‖ ≤ 1` for features normalized in floating point.
pub const NORM_TOL: f64 = 1e-9;

/// Default neighborhood radius for kernels on finite arm sets.
pub const DEFAULT_KERNEL_DELTA: f64 = 0.5;

/// A playable feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    vector: DVector<f64>,
    id: Option<String>,
}

impl Arm {
    pub fn new(vector: DVector<f64>) -> Result<Self> {
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("arm vector"));
        }
        let norm = vector.norm();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::ArmOutsideBall { norm, tol: NORM_TOL });
        }
        Ok(Self { vector, id: None })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    // Callers guarantee the norm constraint.
    pub(crate) fn unchecked(vector: DVector<f64>) -> Self {
        Self { vector, id: None }
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.vector
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.vector
    }
}

/// Where an arm set came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmSource {
    ContainedBall { rho: f64 },
    UniformCloud { m: usize, seed: u64 },
    Catalog { name: String },
}

/// Rule selecting the inner subset `X'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum InnerRule {
    /// `X' = ∂Ball(radius)` (ball-type sets only).
    Sphere { radius: f64 },
    /// `X' = X ∩ Ball(radius)` (finite sets only).
    WithinRadius { radius: f64 },
}

#[derive(Debug, Clone)]
enum Support {
    Ball { radius: f64 },
    Points { arms: Vec<Arm>, inner: Vec<usize> },
}

/// An immutable arm set together with its inner subset and kernel parameters.
#[derive(Debug, Clone)]
pub struct ArmSet {
    dim: usize,
    source: ArmSource,
    support: Support,
    inner_rule: InnerRule,
    kernel_delta: f64,
}

/// A finitely supported exploration kernel around a center arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    /// Indices into the arm set.
    pub members: Vec<usize>,
    pub weights: Vec<f64>,
    /// Set when the moment-matching weights had a negative entry and uniform
    /// weights were substituted.
    pub fallback: bool,
}

/// Numerical estimates of the arm-set constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryCertificate {
    /// Minimum of the support function of `X'` over probed unit directions.
    /// An upper estimate of the true `κ`.
    pub kappa_est: f64,
    /// Minimum over probed inner arms of `λ_min(p · E_x[z zᵀ])`.
    pub gamma_est: f64,
    pub directions_probed: usize,
    pub centers_probed: usize,
    pub kernel_failures: usize,
}

impl fmt::Display for ArmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            ArmSource::ContainedBall { rho } if *rho == 1.0 => write!(f, "ball"),
            ArmSource::ContainedBall { rho } => write!(f, "ball:{rho}"),
            ArmSource::UniformCloud { m, .. } => write!(f, "cloud:{m}"),
            ArmSource::Catalog { name } => write!(f, "catalog:{name}"),
        }
    }
}

fn e1(dim: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[0] = 1.0;
    v
}

/// Unit vector along `direction`, or `e_1` for the zero vector.
pub fn unit_direction(direction: &DVector<f64>) -> DVector<f64> {
    let n = direction.norm();
    if n > 0.0 {
        direction / n
    } else {
        e1(direction.len())
    }
}

impl ArmSet {
    /// `X = Ball(1)` with `X' = ∂Ball(1/√3)`.
    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::contained_ball(dim, 1.0)
    }

    /// `X = Ball(ρ)` with `X' = ∂Ball(ρ/√3)`.
    pub fn contained_ball(dim: usize, rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid("rho", format!("must lie in (0, 1], got {rho}")));
        }
        Ok(Self {
            dim,
            source: ArmSource::ContainedBall { rho },
            support: Support::Ball { radius: rho },
            inner_rule: InnerRule::Sphere {
                radius: rho / 3f64.sqrt(),
            },
            kernel_delta: DEFAULT_KERNEL_DELTA,
        })
    }

    /// `m` points i.i.d. uniform in `Ball(1)`, generated from `seed`.
    pub fn uniform_cloud(dim: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "uniform cloud needs at least one point"));
        }
        if dim == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        let mut rng = stream(seed, 0);
        let arms = (0..m)
            .map(|i| Arm::unchecked(uniform_in_ball(dim, 1.0, &mut rng)).with_id(i.to_string()))
            .collect();
        Self::from_points(dim, arms, ArmSource::UniformCloud { m, seed })
    }

    /// Finite catalog of arms. All arms must share a dimension and lie in `Ball(1)`.
    pub fn catalog(arms: Vec<Arm>, name: impl Into<String>) -> Result<Self> {
        let dim = arms
            .first()
            .map(Arm::dim)
            .ok_or_else(|| Error::Catalog("catalog is empty".into()))?;
        for a in &arms {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: a.dim(),
                });
            }
            let n = a.vector().norm();
            if n > 1.0 + NORM_TOL {
                return Err(Error::ArmOutsideBall { norm: n, tol: NORM_TOL });
            }
        }
        Self::from_points(dim, arms, ArmSource::Catalog { name: name.into() })
    }

    fn from_points(dim: usize, arms: Vec<Arm>, source: ArmSource) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        let inner = (0..arms.len()).collect();
        Ok(Self {
            dim,
            source,
            support: Support::Points { arms, inner },
            inner_rule: InnerRule::WithinRadius { radius: 1.0 + NORM_TOL },
            kernel_delta: DEFAULT_KERNEL_DELTA,
        })
    }

    /// Restricts a finite set's inner subset to `X ∩ Ball(radius)`, or sets the
    /// inner sphere radius of a ball-type set.
    pub fn with_inner_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("inner_radius", format!("must be > 0, got {radius}")));
        }
        match &mut self.support {
            Support::Ball { radius: outer } => {
                if radius > *outer {
                    return Err(invalid("inner_radius", "inner sphere must lie in the ball"));
                }
                self.inner_rule = InnerRule::Sphere { radius };
            }
            Support::Points { arms, inner } => {
                *inner = arms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.vector().norm() <= radius)
                    .map(|(i, _)| i)
                    .collect();
                self.inner_rule = InnerRule::WithinRadius { radius };
            }
        }
        Ok(self)
    }

    /// Explicit inner subset by index (finite sets only).
    pub fn with_inner_indices(mut self, indices: Vec<usize>) -> Result<Self> {
        match &mut self.support {
            Support::Ball { .. } => Err(invalid("inner", "explicit inner subsets need a finite set")),
            Support::Points { arms, inner } => {
                if let Some(&bad) = indices.iter().find(|&&i| i >= arms.len()) {
                    return Err(invalid("inner", format!("index {bad} out of range")));
                }
                *inner = indices;
                Ok(self)
            }
        }
    }

    pub fn with_kernel_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be > 0, got {delta}")));
        }
        self.kernel_delta = delta;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &ArmSource {
        &self.source
    }

    pub fn inner_rule(&self) -> InnerRule {
        self.inner_rule
    }

    pub fn kernel_delta(&self) -> f64 {
        self.kernel_delta
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.support, Support::Ball { .. })
    }

    /// Radius of the ball for ball-type sets.
    pub fn ball_radius(&self) -> Option<f64> {
        match self.support {
            Support::Ball { radius } => Some(radius),
            Support::Points { .. } => None,
        }
    }

    /// Arms of a finite set (empty for balls).
    pub fn points(&self) -> &[Arm] {
        match &self.support {
            Support::Ball { .. } => &[],
            Support::Points { arms, .. } => arms,
        }
    }

    pub fn inner_indices(&self) -> &[usize] {
        match &self.support {
            Support::Ball { .. } => &[],
            Support::Points { inner, .. } => inner,
        }
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Membership in `X` (norm test for balls, exact list membership otherwise).
    pub fn contains(&self, v: &DVector<f64>) -> bool {
        if v.len() != self.dim {
            return false;
        }
        match &self.support {
            Support::Ball { radius } => v.norm() <= radius + NORM_TOL,
            Support::Points { arms, .. } => arms.iter().any(|a| a.vector() == v),
        }
    }

    fn argmax<'a>(arms: &[Arm], candidates: impl Iterator<Item = &'a usize>, dir: &DVector<f64>) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &i in candidates {
            let s = arms[i].vector().dot(dir);
            // strict comparison keeps the lowest index on ties
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Index of the maximizer of `⟨x, direction⟩` over the inner subset of a finite set.
    /// The zero direction is replaced by `e_1`.
    pub fn best_index(&self, direction: &DVector<f64>) -> Result<usize> {
        self.check_dim(direction)?;
        match &self.support {
            Support::Ball { .. } => Err(invalid("arm_set", "ball-type sets have no item indices")),
            Support::Points { arms, inner } => {
                let dir = if direction.norm() > 0.0 {
                    direction.clone()
                } else {
                    e1(self.dim)
                };
                Self::argmax(arms, inner.iter(), &dir).ok_or(Error::EmptyInnerSet)
            }
        }
    }

    /// Index of the maximizer of `⟨x, direction⟩` over all of `X` (finite sets).
    pub fn best_index_full(&self, direction: &DVector<f64>) -> Result<usize> {
        self.check_dim(direction)?;
        match &self.support {
            Support::Ball { .. } => Err(invalid("arm_set", "ball-type sets have no item indices")),
            Support::Points { arms, .. } => {
                let dir = if direction.norm() > 0.0 {
                    direction.clone()
                } else {
                    e1(self.dim)
                };
                let all: Vec<usize> = (0..arms.len()).collect();
                Self::argmax(arms, all.iter(), &dir).ok_or(Error::EmptyInnerSet)
            }
        }
    }

    /// Maximizer of `⟨x, direction⟩` over `X'`.
    ///
    /// For the zero direction the maximizer along `e_1` is returned.
    pub fn best_arm(&self, direction: &DVector<f64>) -> Result<Arm> {
        self.check_dim(direction)?;
        match &self.support {
            Support::Ball { .. } => {
                let InnerRule::Sphere { radius } = self.inner_rule else {
                    unreachable!("ball-type sets use a sphere inner rule")
                };
                Ok(Arm::unchecked(unit_direction(direction) * radius))
            }
            Support::Points { arms, .. } => Ok(arms[self.best_index(direction)?].clone()),
        }
    }

    /// Maximizer of `⟨x, direction⟩` over all of `X`.
    pub fn best_arm_full(&self, direction: &DVector<f64>) -> Result<Arm> {
        self.check_dim(direction)?;
        match &self.support {
            Support::Ball { radius } => Ok(Arm::unchecked(unit_direction(direction) * *radius)),
            Support::Points { arms, .. } => Ok(arms[self.best_index_full(direction)?].clone()),
        }
    }

    /// `sup_{x ∈ X'} ⟨x, direction⟩`.
    pub fn support_function(&self, direction: &DVector<f64>) -> Result<f64> {
        self.check_dim(direction)?;
        match &self.support {
            Support::Ball { .. } => {
                let InnerRule::Sphere { radius } = self.inner_rule else {
                    unreachable!()
                };
                Ok(radius * direction.norm())
            }
            Support::Points { arms, inner } => inner
                .iter()
                .map(|&i| arms[i].vector().dot(direction))
                .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))))
                .ok_or(Error::EmptyInnerSet),
        }
    }

    /// `sup_{x ∈ X} ⟨x, θ⟩`, the oracle one-step reward.
    pub fn max_reward(&self, theta: &DVector<f64>) -> Result<f64> {
        self.check_dim(theta)?;
        match &self.support {
            Support::Ball { radius } => Ok(radius * theta.norm()),
            Support::Points { arms, .. } => Ok(arms
                .iter()
                .map(|a| a.vector().dot(theta))
                .fold(f64::NEG_INFINITY, f64::max)),
        }
    }

    /// Indices of all arms within Euclidean distance `radius` of `center`.
    pub fn neighbors(&self, center: &DVector<f64>, radius: f64) -> Result<Vec<usize>> {
        self.check_dim(center)?;
        match &self.support {
            Support::Ball { .. } => Err(invalid("arm_set", "neighbor lists need a finite set")),
            Support::Points { arms, .. } => {
                let r2 = radius * radius;
                Ok(arms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| (a.vector() - center).norm_squared() <= r2)
                    .map(|(i, _)| i)
                    .collect())
            }
        }
    }

    /// Index of the arm closest to `target` (lowest index on ties).
    pub fn nearest_index(&self, target: &DVector<f64>) -> Result<usize> {
        self.check_dim(target)?;
        match &self.support {
            Support::Ball { .. } => Err(invalid("arm_set", "nearest item needs a finite set")),
            Support::Points { arms, .. } => {
                let mut best = (0usize, f64::INFINITY);
                for (i, a) in arms.iter().enumerate() {
                    let d = (a.vector() - target).norm_squared();
                    if d < best.1 {
                        best = (i, d);
                    }
                }
                Ok(best.0)
            }
        }
    }

    /// Minimum number of neighbors required before building a kernel.
    pub fn kernel_min_neighbors(&self) -> usize {
        (self.dim + 2).max(8)
    }

    /// Moment-matching kernel on the arms within `delta` of `center`.
    ///
    /// With `u_j = v_j - center`, `ū` their mean and `Q = Σ u_j u_jᵀ / n`, the
    /// weights `w_j = (1 - u_jᵀQ⁻¹ū) / (n (1 - ūᵀQ⁻¹ū))` sum to one and
    /// reproduce `center` as their first moment. If any weight is negative the
    /// kernel falls back to uniform weights.
    pub fn cloud_kernel(&self, center: &DVector<f64>, delta: f64) -> Result<Kernel> {
        let members = self.neighbors(center, delta)?;
        let n = members.len();
        let n_min = self.kernel_min_neighbors();
        if n < n_min {
            return Err(Error::KernelInfeasible(format!(
                "{n} neighbors within {delta}, need {n_min}"
            )));
        }
        let arms = self.points();
        let p = self.dim;
        let us: Vec<DVector<f64>> = members.iter().map(|&i| arms[i].vector() - center).collect();
        let mut ubar = DVector::zeros(p);
        let mut q = DMatrix::zeros(p, p);
        for u in &us {
            ubar += u;
            q.ger(1.0, u, u, 1.0);
        }
        ubar /= n as f64;
        q /= n as f64;
        let chol = q
            .cholesky()
            .ok_or_else(|| Error::KernelInfeasible("neighbor second-moment matrix is singular".into()))?;
        let qinv_ubar = chol.solve(&ubar);
        let denom = 1.0 - ubar.dot(&qinv_ubar);
        if denom.is_nan() || denom <= 1e-12 {
            return Err(Error::KernelInfeasible(
                "center lies outside the affine hull of its neighbors".into(),
            ));
        }
        let weights: Vec<f64> = us
            .iter()
            .map(|u| (1.0 - u.dot(&qinv_ubar)) / (n as f64 * denom))
            .collect();
        if weights.iter().any(|&w| w < 0.0) {
            return Ok(Kernel {
                members,
                weights: vec![1.0 / n as f64; n],
                fallback: true,
            });
        }
        Ok(Kernel {
            members,
            weights,
            fallback: false,
        })
    }

    /// Draws an exploration arm from `P_center`.
    ///
    /// Ball-type sets use `z = x + √(2/3) ρ P⊥_x u` with `u` uniform on the
    /// sphere; finite sets sample the moment-matching kernel.
    pub fn sample_exploration<R: Rng + ?Sized>(&self, center: &Arm, rng: &mut R) -> Result<Arm> {
        self.check_dim(center.vector())?;
        match &self.support {
            Support::Ball { radius } => {
                let d = unit_direction(center.vector());
                let u = unit_vector(self.dim, rng);
                let perp = project_out(&u, &d);
                let scale = (2.0f64 / 3.0).sqrt() * radius;
                Ok(Arm::unchecked(center.vector() + perp * scale))
            }
            Support::Points { arms, .. } => {
                let kernel = self.cloud_kernel(center.vector(), self.kernel_delta)?;
                Ok(arms[kernel.sample(rng)].clone())
            }
        }
    }

    /// Second moment `E_x[z zᵀ]` of the exploration kernel at `center`.
    pub fn kernel_second_moment(&self, center: &DVector<f64>) -> Result<(DMatrix<f64>, bool)> {
        self.check_dim(center)?;
        match &self.support {
            Support::Ball { radius } => {
                let p = self.dim;
                let d = unit_direction(center);
                let perp = DMatrix::identity(p, p) - &d * d.transpose();
                let m = center * center.transpose() + perp * (2.0 * radius * radius / (3.0 * p as f64));
                Ok((m, false))
            }
            Support::Points { arms, .. } => {
                let k = self.cloud_kernel(center, self.kernel_delta)?;
                let mut m = DMatrix::zeros(self.dim, self.dim);
                for (&i, &w) in k.members.iter().zip(&k.weights) {
                    let v = arms[i].vector();
                    m.ger(w, v, v, 1.0);
                }
                Ok((m, k.fallback))
            }
        }
    }

    /// Probes the constants `κ` and `γ` with `n_directions` random unit
    /// directions and up to `n_directions` inner arms.
    pub fn verify_assumption<R: Rng + ?Sized>(&self, n_directions: usize, rng: &mut R) -> Result<GeometryCertificate> {
        if n_directions == 0 {
            return Err(invalid("n_directions", "must be at least 1"));
        }
        let directions: Vec<DVector<f64>> = (0..n_directions).map(|_| unit_vector(self.dim, rng)).collect();
        let centers: Vec<DVector<f64>> = match &self.support {
            Support::Ball { .. } => {
                let InnerRule::Sphere { radius } = self.inner_rule else {
                    unreachable!()
                };
                (0..n_directions.min(64))
                    .map(|_| unit_vector(self.dim, rng) * radius)
                    .collect()
            }
            Support::Points { arms, inner } => {
                let mut idx = inner.clone();
                idx.shuffle(rng);
                idx.truncate(n_directions);
                idx.iter().map(|&i| arms[i].vector().clone()).collect()
            }
        };
        self.certify(&directions, &centers)
    }

    /// Same as [`ArmSet::verify_assumption`] with caller-supplied probes.
    pub fn certify(&self, directions: &[DVector<f64>], centers: &[DVector<f64>]) -> Result<GeometryCertificate> {
        let mut kappa = f64::INFINITY;
        for d in directions {
            let n = d.norm();
            if n == 0.0 {
                continue;
            }
            let s = match self.support_function(&(d / n)) {
                Ok(s) => s,
                Err(Error::EmptyInnerSet) => f64::NEG_INFINITY,
                Err(e) => return Err(e),
            };
            kappa = kappa.min(s);
        }
        if !kappa.is_finite() {
            kappa = 0.0;
        }
        let mut gamma = f64::INFINITY;
        let mut failures = 0;
        let mut ok = 0;
        for c in centers {
            match self.kernel_second_moment(c) {
                Ok((m, fallback)) => {
                    if fallback {
                        failures += 1;
                    }
                    let lmin = m.symmetric_eigen().eigenvalues.min();
                    gamma = gamma.min(lmin * self.dim as f64);
                    ok += 1;
                }
                Err(Error::KernelInfeasible(_)) => failures += 1,
                Err(e) => return Err(e),
            }
        }
        if ok == 0 {
            gamma = 0.0;
        }
        Ok(GeometryCertificate {
            kappa_est: kappa.clamp(0.0, 1.0),
            gamma_est: gamma.max(0.0),
            directions_probed: directions.len(),
            centers_probed: centers.len(),
            kernel_failures: failures,
        })
    }
}

impl Kernel {
    /// Draws one member index according to the weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (&i, &w) in self.members.iter().zip(&self.weights) {
            acc += w;
            if r < acc {
                return i;
            }
        }
        *self.members.last().expect("kernels are non-empty")
    }
}

/// Parses a catalog from CSV bytes with header `id,f1,...,fp`.
///
/// Rows with norm above `1 + NORM_TOL` are rejected unless `renormalize` is
/// set, in which case every vector is divided by the largest norm.
pub fn parse_catalog(bytes: &[u8], name: &str, renormalize: bool) -> Result<ArmSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Catalog(format!("unreadable header: {e}")))?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("id") {
        return Err(Error::Catalog("header must be `id,f1,...,fp`".into()));
    }
    let p = headers.len() - 1;
    let mut rows: Vec<(String, DVector<f64>)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::CatalogRow {
            row,
            reason: e.to_string(),
        })?;
        if rec.len() != p + 1 {
            return Err(Error::CatalogRow {
                row,
                reason: format!("expected {} fields, found {}", p + 1, rec.len()),
            });
        }
        let id = rec[0].to_string();
        let mut v = DVector::zeros(p);
        for k in 0..p {
            let x: f64 = rec[k + 1].parse().map_err(|_| Error::CatalogRow {
                row,
                reason: format!("feature {} is not a number: `{}`", k + 1, &rec[k + 1]),
            })?;
            if !x.is_finite() {
                return Err(Error::CatalogRow {
                    row,
                    reason: format!("feature {} is not finite", k + 1),
                });
            }
            v[k] = x;
        }
        let norm = v.norm();
        if !renormalize && norm > 1.0 + NORM_TOL {
            return Err(Error::CatalogRow {
                row,
                reason: format!("norm {norm} exceeds 1 (use --renormalize)"),
            });
        }
        rows.push((id, v));
    }
    if rows.is_empty() {
        return Err(Error::Catalog("catalog has no items".into()));
    }
    if renormalize {
        let max = rows.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        if max > 0.0 {
            for (_, v) in &mut rows {
                *v /= max;
            }
        }
    }
    let arms = rows.into_iter().map(|(id, v)| Arm::unchecked(v).with_id(id)).collect();
    ArmSet::catalog(arms, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn catalog(points: &[&[f64]]) -> ArmSet {
        let arms = points.iter().map(|p| Arm::from_slice(p).unwrap()).collect();
        ArmSet::catalog(arms, "test").unwrap()
    }

    #[test]
    fn ball_best_arm_is_scaled_direction() {
        let set = ArmSet::unit_ball(3).unwrap();
        let a = set.best_arm_full(&v(&[0.0, 3.0, 4.0])).unwrap();
        assert_relative_eq!(a.vector(), &v(&[0.0, 0.6, 0.8]), epsilon = 1e-15);
        let inner = set.best_arm(&v(&[0.0, 3.0, 4.0])).unwrap();
        assert_relative_eq!(inner.vector().norm(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        // zero direction falls back to e1
        let z = set.best_arm_full(&v(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(z.vector(), &v(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn catalog_best_arm() {
        let set = catalog(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let a = set.best_arm(&v(&[0.3, 0.9])).unwrap();
        assert_eq!(a.vector(), &v(&[0.0, 1.0]));
        // ties keep the lowest index
        assert_eq!(set.best_index(&v(&[1.0, 1.0])).unwrap(), 0);
        // zero direction → e1
        assert_eq!(set.best_index(&v(&[0.0, 0.0])).unwrap(), 0);
    }

    #[test]
    fn cloud_best_arm_matches_scan() {
        let set = ArmSet::uniform_cloud(3, 100, 11).unwrap();
        let mut rng = stream(5, 0);
        for _ in 0..20 {
            let d = unit_vector(3, &mut rng);
            let got = set.best_arm(&d).unwrap();
            let mut best = (0, f64::NEG_INFINITY);
            for (i, a) in set.points().iter().enumerate() {
                let s: f64 = (0..3).map(|k| a.vector()[k] * d[k]).sum();
                if s > best.1 {
                    best = (i, s);
                }
            }
            assert_eq!(got.vector(), set.points()[best.0].vector());
        }
    }

    #[test]
    fn empty_inner_set_is_an_error() {
        let set = catalog(&[&[0.9, 0.0], &[0.0, 0.9]]).with_inner_radius(0.5).unwrap();
        assert_eq!(set.best_arm(&v(&[1.0, 0.0])), Err(Error::EmptyInnerSet));
    }

    #[test]
    fn ball_kernel_stays_in_ball() {
        let set = ArmSet::unit_ball(5).unwrap();
        let mut rng = stream(9, 0);
        let center = set.best_arm(&unit_vector(5, &mut rng)).unwrap();
        for _ in 0..1000 {
            let z = set.sample_exploration(&center, &mut rng).unwrap();
            assert!(z.vector().norm() <= 1.0 + 1e-12);
            assert!(set.contains(z.vector()));
        }
    }

    #[test]
    fn symmetric_neighbors_get_uniform_weights() {
        let c = [0.2, -0.1];
        let d = 0.05;
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for k in 0..2 {
            for s in [-1.0, 1.0] {
                for scale in [1.0, 0.5] {
                    let mut q = c.to_vec();
                    q[k] += s * d * scale;
                    pts.push(q);
                }
            }
        }
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let set = catalog(&refs);
        let k = set.cloud_kernel(&v(&c), 0.1).unwrap();
        assert!(!k.fallback);
        assert_eq!(k.members.len(), 8);
        for w in &k.weights {
            assert_relative_eq!(*w, 1.0 / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_few_neighbors_is_infeasible() {
        let set = catalog(&[&[0.1, 0.0], &[0.0, 0.1], &[0.1, 0.1]]);
        assert!(matches!(
            set.cloud_kernel(&v(&[0.05, 0.05]), 0.5),
            Err(Error::KernelInfeasible(_))
        ));
    }

    #[test]
    fn collinear_neighbors_are_infeasible() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![0.05 * i as f64, 0.0]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let set = catalog(&refs);
        assert!(matches!(
            set.cloud_kernel(&v(&[0.2, 0.0]), 0.9),
            Err(Error::KernelInfeasible(_))
        ));
    }

    #[test]
    fn lopsided_neighbors_fall_back_to_uniform() {
        // center far off to one side of the neighbor cloud: some weights go negative
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for i in 0..10 {
            let a = i as f64 * 0.6;
            pts.push(vec![0.3 + 0.05 * a.cos(), 0.05 * a.sin()]);
        }
        pts.push(vec![0.0, 0.0]);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let set = catalog(&refs);
        let k = set.cloud_kernel(&v(&[0.02, 0.0]), 0.5).unwrap();
        assert!(k.fallback);
        assert!(k.weights.iter().all(|&w| (w - 1.0 / 11.0).abs() < 1e-15));
    }

    #[test]
    fn segment_hull_has_zero_kappa() {
        let set = catalog(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        let cert = set.certify(&[v(&[0.0, 1.0])], &[]).unwrap();
        assert!(cert.kappa_est.abs() < 1e-15);
    }

    #[test]
    fn analytic_sphere_kappa_and_gamma() {
        let set = ArmSet::unit_ball(4).unwrap();
        let mut rng = stream(4, 0);
        let cert = set.verify_assumption(200, &mut rng).unwrap();
        assert_relative_eq!(cert.kappa_est, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(cert.gamma_est, 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(cert.kernel_failures, 0);
    }

    #[test]
    fn catalog_parsing() {
        let csv = b"id,f1,f2\na,0.6,0.8\nb,0.1,0.2\n";
        let set = parse_catalog(csv, "mem", false).unwrap();
        assert_eq!(set.dim(), 2);
        assert_eq!(set.points().len(), 2);
        assert_eq!(set.points()[0].id(), Some("a"));

        let bad = b"id,f1,f2\na,0.6,0.8\nb,3.0,0.0\n";
        match parse_catalog(bad, "mem", false) {
            Err(Error::CatalogRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
        let set = parse_catalog(bad, "mem", true).unwrap();
        assert_relative_eq!(set.points()[1].vector().norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(set.points()[0].vector()[0], 0.2, epsilon = 1e-15);

        let short = b"id,f1,f2\na,0.6\n";
        assert!(matches!(
            parse_catalog(short, "mem", false),
            Err(Error::CatalogRow { row: 1, .. })
        ));
        let nan = b"id,f1,f2\na,x,0.1\n";
        assert!(matches!(
            parse_catalog(nan, "mem", false),
            Err(Error::CatalogRow { row: 1, .. })
        ));
        assert!(parse_catalog(b"name,f1\na,0.1\n", "mem", false).is_err());
        assert!(parse_catalog(b"id,f1\n", "mem", false).is_err());
    }
}
