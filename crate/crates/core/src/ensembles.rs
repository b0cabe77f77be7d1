//! Seeded random ensembles for the randomized theorem suites.
//!
//! All randomness flows from a single [`ChaCha8Rng`]; the algorithm name is
//! recorded in reports so runs can be reproduced on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numkernel::{c, identity, lambda_max_hermitian, op_norm, ComplexMatrix, ComplexVector};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9)";

pub type LabRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn matrix(rng: &mut LabRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn vector(rng: &mut LabRng, n: usize) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn dim(rng: &mut LabRng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Skew-Hermitian matrix.
pub fn skew(rng: &mut LabRng, n: usize) -> ComplexMatrix {
    let w = matrix(rng, n, n);
    (&w - w.adjoint()).scale(0.5)
}

/// Positive semidefinite matrix `R R*`, with a random rank between 0 and `n`.
pub fn psd(rng: &mut LabRng, n: usize) -> ComplexMatrix {
    let rank = if n == 0 { 0 } else { rng.random_range(0..=n) };
    let r = matrix(rng, n, rank);
    &r * r.adjoint()
}

/// Dissipative matrix `skew - PSD`; roughly a third of the draws are exactly
/// skew-Hermitian.
pub fn dissipative(rng: &mut LabRng, n: usize) -> ComplexMatrix {
    let k = skew(rng, n).scale(2.0);
    if rng.random_bool(1.0 / 3.0) {
        k
    } else {
        k - psd(rng, n)
    }
}

/// Accretive matrix whose Hermitian part is at least `delta`, with an
/// arbitrary (generally non-normal) skew part. A third of the draws are
/// Hermitian.
pub fn accretive(rng: &mut LabRng, n: usize, delta: f64) -> ComplexMatrix {
    let herm = psd(rng, n) + identity(n).scale(delta);
    if rng.random_bool(1.0 / 3.0) {
        herm
    } else {
        herm + skew(rng, n).scale(3.0)
    }
}

/// Matrix with operator norm exactly `norm`.
pub fn contraction(rng: &mut LabRng, n: usize, norm: f64) -> ComplexMatrix {
    let w = matrix(rng, n, n);
    let s = op_norm(&w);
    if s == 0.0 {
        return ComplexMatrix::zeros(n, n);
    }
    w.scale(norm / s)
}

/// Matrix `W - (lambda_max(Herm W) + shift) I`, whose dissipativity margin is
/// exactly `-shift`.
pub fn shifted(rng: &mut LabRng, n: usize, shift: f64) -> ComplexMatrix {
    let w = matrix(rng, n, n);
    let top = lambda_max_hermitian(&w).expect("square");
    w - identity(n).scale(top + shift)
}
