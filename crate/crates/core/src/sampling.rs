//! Random geometry primitives and reproducible RNG streams.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// RNG used everywhere in the simulator.
pub type SimRng = ChaCha8Rng;

/// Independent stream `index` derived from `seed`.
///
/// Streams are a pure function of `(seed, index)`, so realizations can be
/// evaluated in any order on any number of threads.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

/// Uniform draw from the unit sphere in `R^dim` (normalized Gaussian).
pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let g = gaussian_vector(dim, rng);
        let n = g.norm();
        if n > 0.0 {
            return g / n;
        }
    }
}

/// Uniform draw from `Ball(radius)` in `R^dim`.
pub fn uniform_in_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> DVector<f64> {
    let dir = unit_vector(dim, rng);
    let r: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
    dir * (radius * r)
}

/// `u - ⟨u, d⟩ d` for a unit vector `d`.
pub fn project_out(u: &DVector<f64>, unit_dir: &DVector<f64>) -> DVector<f64> {
    let c = u.dot(unit_dir);
    u - unit_dir * c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 3), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 3), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 4), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = stream(1, 0);
        for d in 1..8 {
            let u = unit_vector(d, &mut rng);
            assert!((u.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ball_radius_distribution() {
        // P(‖x‖ ≤ 1/2) = 2^-p for the uniform ball.
        let mut rng = stream(2, 0);
        let n = 40_000;
        let p = 3;
        let inside = (0..n)
            .filter(|_| uniform_in_ball(p, 1.0, &mut rng).norm() <= 0.5)
            .count() as f64
            / n as f64;
        let expected = 0.125;
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((inside - expected).abs() < 4.0 * se);
    }

    #[test]
    fn projection_is_orthogonal() {
        let mut rng = stream(3, 0);
        let d = unit_vector(5, &mut rng);
        let u = unit_vector(5, &mut rng);
        let v = project_out(&u, &d);
        assert!(v.dot(&d).abs() < 1e-15);
        assert!(v.norm() <= 1.0 + 1e-15);
    }
}
