//! Operator Cayley transform between accretive operators `S` and
//! contractions `K = (S - I)(S + I)^-1`, with the quantitative bounds that
//! tie the accretivity constant of `S` to the norm of `K`.

use crate::error::{LabError, Result};
use crate::numkernel::{ensure_finite, ensure_square, identity, lambda_min_hermitian, op_norm, ComplexMatrix, Factored};

/// Relative slack allowed on the accretivity and contraction invariants.
const INVARIANT_SLACK: f64 = 1e-12;

/// Square matrix `S` with `Re<Sf, f> >= delta |f|^2`, `delta >= 0`.
///
/// `delta` is the smallest eigenvalue of the Hermitian part of `S`, clamped
/// at zero, and is computed rather than supplied.
#[derive(Clone, Debug)]
pub struct AccretiveOperator {
    matrix: ComplexMatrix,
    delta: f64,
}

impl AccretiveOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let lmin = lambda_min_hermitian(&matrix)?;
        let slack = INVARIANT_SLACK * op_norm(&matrix).max(1.0);
        if lmin < -slack {
            return Err(LabError::NotAccretive(lmin));
        }
        Ok(Self { matrix, delta: lmin.max(0.0) })
    }

    /// Multiplication by nonnegative real samples.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(crate::numkernel::diag_real(values))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_uniformly_accretive(&self) -> bool {
        self.delta > 0.0
    }
}

/// Square matrix with operator norm at most `1` (up to `1e-12`).
#[derive(Clone, Debug)]
pub struct ContractionOperator {
    matrix: ComplexMatrix,
    norm: f64,
}

impl ContractionOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let norm = op_norm(&matrix);
        if norm > 1.0 + INVARIANT_SLACK {
            return Err(LabError::NotContraction(norm));
        }
        Ok(Self { matrix, norm })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn negated(&self) -> Self {
        Self { matrix: -&self.matrix, norm: self.norm }
    }
}

/// `K = (S - I)(S + I)^-1`.
pub fn cayley_of_accretive(s: &AccretiveOperator) -> Result<ContractionOperator> {
    let id = identity(s.dim());
    let k = solve_right(&(s.matrix() - &id), &(s.matrix() + &id), "S + I")?;
    ContractionOperator::new(k)
}

/// Returns `X` with `X M = B`, via `M* X* = B*`.
fn solve_right(b: &ComplexMatrix, m: &ComplexMatrix, what: &'static str) -> Result<ComplexMatrix> {
    Ok(Factored::new(&m.adjoint(), what)?.solve(&b.adjoint()).adjoint())
}

/// `S = (I + K)(I - K)^-1`, the inverse Cayley transform.
pub fn accretive_of_contraction(k: &ContractionOperator) -> Result<AccretiveOperator> {
    let id = identity(k.dim());
    let s = solve_right(&(&id + k.matrix()), &(&id - k.matrix()), "I - K")?;
    AccretiveOperator::new(s)
}

/// `sqrt(1 - 4 delta / |S + I|^2)`, an upper bound on `|K|` that is strictly
/// below one when `S` is uniformly accretive.
pub fn strict_contraction_bound(s: &AccretiveOperator) -> Result<f64> {
    if !s.is_uniformly_accretive() {
        return Err(LabError::DegenerateBound);
    }
    let plus = op_norm(&(s.matrix() + identity(s.dim())));
    Ok((1.0 - 4.0 * s.delta() / (plus * plus)).max(0.0).sqrt())
}

/// `(1 - |K|^2) / |I - K|^2`, a lower bound on the accretivity constant of
/// the inverse transform of `K`.
pub fn accretivity_lower_bound(k: &ContractionOperator) -> Result<f64> {
    let minus = identity(k.dim()) - k.matrix();
    Factored::new(&minus, "I - K")?;
    let d = op_norm(&minus);
    Ok((1.0 - k.norm() * k.norm()) / (d * d))
}

/// `(1 + |K|) / (1 - |K|)`, an upper bound on the norm of the inverse
/// transform of `K`.
pub fn s_norm_bound(k: &ContractionOperator) -> Result<f64> {
    if k.norm() >= 1.0 {
        return Err(LabError::InvalidParameter {
            name: "K",
            reason: format!("norm {} is not below one", k.norm()),
        });
    }
    Ok((1.0 + k.norm()) / (1.0 - k.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles;
    use crate::numkernel::{c, real, ComplexMatrix};

    fn scalar(z: crate::numkernel::C64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, z)
    }

    #[test]
    fn forward_examples() {
        for n in [1, 3, 7] {
            let k = cayley_of_accretive(&AccretiveOperator::new(identity(n)).unwrap()).unwrap();
            assert!(op_norm(k.matrix()) < 1e-15);
        }
        let k = cayley_of_accretive(&AccretiveOperator::new(scalar(c(0.0, 1.0))).unwrap()).unwrap();
        assert!((k.matrix()[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        let k = cayley_of_accretive(&AccretiveOperator::new(scalar(real(3.0))).unwrap()).unwrap();
        assert!((k.matrix()[(0, 0)] - real(0.5)).norm() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let s = accretive_of_contraction(&ContractionOperator::new(ComplexMatrix::zeros(2, 2)).unwrap()).unwrap();
        assert!(op_norm(&(s.matrix() - identity(2))) < 1e-15);
        let s = accretive_of_contraction(&ContractionOperator::new(scalar(real(0.5))).unwrap()).unwrap();
        assert!((s.matrix()[(0, 0)] - real(3.0)).norm() < 1e-14);
        let s = accretive_of_contraction(&ContractionOperator::new(scalar(c(0.0, 1.0))).unwrap()).unwrap();
        assert!((s.matrix()[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(s.delta(), 0.0);
    }

    #[test]
    fn inverse_rejects_eigenvalue_one() {
        let k = ContractionOperator::new(identity(2)).unwrap();
        assert!(matches!(accretive_of_contraction(&k), Err(LabError::IllConditioned { .. })));
        assert!(matches!(accretivity_lower_bound(&k), Err(LabError::IllConditioned { .. })));
    }

    #[test]
    fn type_invariants() {
        assert!(matches!(AccretiveOperator::new(scalar(real(-0.1))), Err(LabError::NotAccretive(_))));
        assert!(matches!(ContractionOperator::new(scalar(real(1.5))), Err(LabError::NotContraction(_))));
        let s = AccretiveOperator::new(crate::numkernel::diag_real(&[2.0, 0.5])).unwrap();
        assert!((s.delta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn strict_bound_examples() {
        let s = AccretiveOperator::new(scalar(real(3.0))).unwrap();
        let bound = strict_contraction_bound(&s).unwrap();
        let k = cayley_of_accretive(&s).unwrap();
        assert!((bound - 0.5).abs() < 1e-15);
        assert!((k.norm() - 0.5).abs() < 1e-15);
        assert!(strict_contraction_bound(&AccretiveOperator::new(identity(4)).unwrap()).unwrap() < 1e-8);
        let skew = AccretiveOperator::new(scalar(c(0.0, 2.0))).unwrap();
        assert_eq!(strict_contraction_bound(&skew), Err(LabError::DegenerateBound));
    }

    #[test]
    fn strict_bound_dominates_random_hermitian() {
        let mut rng = ensembles::rng_from_seed(11);
        for _ in 0..20 {
            let p = ensembles::psd(&mut rng, 8) + identity(8).scale(0.1);
            let s = AccretiveOperator::new(p).unwrap();
            let k = cayley_of_accretive(&s).unwrap();
            assert!(strict_contraction_bound(&s).unwrap() >= op_norm(k.matrix()) - 1e-10);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let k0 = ContractionOperator::new(ComplexMatrix::zeros(3, 3)).unwrap();
        assert!((accretivity_lower_bound(&k0).unwrap() - 1.0).abs() < 1e-15);
        let k = ContractionOperator::new(scalar(real(0.5))).unwrap();
        assert!((accretivity_lower_bound(&k).unwrap() - 3.0).abs() < 1e-14);
        let mut rng = ensembles::rng_from_seed(5);
        for _ in 0..20 {
            let k = ContractionOperator::new(ensembles::contraction(&mut rng, 6, 0.9)).unwrap();
            let delta = accretivity_lower_bound(&k).unwrap();
            let s = accretive_of_contraction(&k).unwrap();
            assert!(lambda_min_hermitian(s.matrix()).unwrap() >= delta - 1e-10);
        }
    }

    #[test]
    fn s_norm_bound_examples() {
        let k0 = ContractionOperator::new(ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(s_norm_bound(&k0).unwrap(), 1.0);
        let k = ContractionOperator::new(scalar(real(0.5))).unwrap();
        assert!((s_norm_bound(&k).unwrap() - 3.0).abs() < 1e-15);
        let mut rng = ensembles::rng_from_seed(9);
        let k = ContractionOperator::new(ensembles::contraction(&mut rng, 5, 0.8)).unwrap();
        let bound = s_norm_bound(&k).unwrap();
        assert!((bound - 9.0).abs() < 1e-12);
        let s = accretive_of_contraction(&k).unwrap();
        assert!(op_norm(s.matrix()) <= bound + 1e-10);
        let unit = ContractionOperator::new(scalar(c(0.0, 1.0))).unwrap();
        assert!(s_norm_bound(&unit).is_err());
    }

    #[test]
    fn bound_tends_to_one_as_delta_vanishes() {
        let mut last = 0.0;
        for delta in [1.0, 0.5, 0.1, 1e-2, 1e-4, 1e-8] {
            let s = AccretiveOperator::new(identity(3).scale(delta)).unwrap();
            let b = strict_contraction_bound(&s).unwrap();
            assert!(b < 1.0 && b >= last);
            last = b;
        }
        assert!(last > 1.0 - 1e-7);
    }
}
