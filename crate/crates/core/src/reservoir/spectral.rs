//! Spectral radius by orthogonal subspace (block power) iteration.
//!
//! Signed random matrices often have a complex-conjugate dominant pair, or
//! several eigenvalues of nearly equal modulus, on which single-vector power
//! iteration oscillates or crawls. Iterating a small block of vectors and
//! taking the eigenvalues of the Rayleigh-Ritz projection handles both.

use nalgebra::{DMatrix, DVector, Schur};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::seeded;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Consecutive sub-tolerance updates required before declaring convergence.
const STABLE_UPDATES: usize = 3;
const BLOCK: usize = 8;
const START_SEED: u64 = 0x5eed_5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub radius: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest eigenvalue modulus of a small dense matrix.
fn ritz_radius(h: DMatrix<f64>) -> f64 {
    match Schur::try_new(h, f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => f64::NAN,
    }
}

pub fn spectral_radius(m: &DMatrix<f64>) -> SpectralEstimate {
    spectral_radius_with(m, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
}

pub fn spectral_radius_with(m: &DMatrix<f64>, tolerance: f64, max_iterations: usize) -> SpectralEstimate {
    assert!(m.is_square(), "spectral radius needs a square matrix");
    let n = m.nrows();
    let done = |radius, iterations| SpectralEstimate {
        radius,
        converged: true,
        iterations,
    };
    match n {
        0 => return done(0.0, 0),
        1 => return done(m[(0, 0)].abs(), 0),
        _ => {}
    }
    if m.iter().all(|&x| x == 0.0) {
        return done(0.0, 0);
    }
    if n <= BLOCK {
        let radius = ritz_radius(m.clone());
        return SpectralEstimate {
            radius,
            converged: radius.is_finite(),
            iterations: 0,
        };
    }

    let mut rng = seeded(START_SEED);
    let start = DMatrix::from_fn(n, BLOCK, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = start.qr().q();

    let mut previous = f64::NAN;
    let mut stable = 0;
    let mut estimate = 0.0;
    for iteration in 1..=max_iterations {
        let z = m * &q;
        // Householder QR keeps the first column equal to M^k r / |M^k r| up to
        // sign, so a vanishing first column means M is nilpotent (almost
        // surely over the random start r)
        let lead: DVector<f64> = z.column(0).into_owned();
        if lead.norm() == 0.0 {
            return done(0.0, iteration);
        }
        estimate = ritz_radius(q.transpose() * &z);
        q = z.qr().q();

        if (estimate - previous).abs() <= tolerance * estimate {
            stable += 1;
            if stable >= STABLE_UPDATES {
                return done(estimate, iteration);
            }
        } else {
            stable = 0;
        }
        previous = estimate;
    }
    SpectralEstimate {
        radius: estimate,
        converged: false,
        iterations: max_iterations,
    }
}
