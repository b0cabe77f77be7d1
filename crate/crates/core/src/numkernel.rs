//! Dense complex linear algebra and the semigroup primitives used by every
//! other module: hermitian parts, dissipativity margins, the matrix
//! exponential and contraction certificates.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{LabError, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Padé degree of the exponential; with the scaled 1-norm kept at or below
/// `EXPM_SCALED_NORM` the truncation error sits well under unit roundoff.
const PADE_DEGREE: usize = 8;
const EXPM_SCALED_NORM: f64 = 0.5;
const EXPM_MAX_NORM: f64 = 1e12;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Builds a complex matrix from real row-major data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols, "row-major data length");
    ComplexMatrix::from_fn(rows, cols, |i, j| real(data[i * cols + j]))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| real(v))))
}

pub fn ensure_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(LabError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LabError::NonFinite)
    }
}

/// Returns `(A + A*)/2`.
pub fn herm_part(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a)?;
    Ok(symmetrize(a))
}

fn symmetrize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the Hermitian
/// part of the input is used.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = ensure_square(h)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(symmetrize(h));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values)
}

pub fn lambda_max_hermitian(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.last().copied().unwrap_or(0.0))
}

pub fn lambda_min_hermitian(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.first().copied().unwrap_or(0.0))
}

/// Largest singular value.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// 2-norm condition number `σ_max / σ_min`; infinite for singular input.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = a.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A square matrix factored with column-pivoted QR, together with its
/// condition number.
pub struct Factored {
    qr: nalgebra::linalg::ColPivQR<C64, Dyn, Dyn>,
    cond: f64,
}

impl Factored {
    /// Factors `a`, refusing matrices whose condition number exceeds
    /// [`MAX_CONDITION`].
    pub fn new(a: &ComplexMatrix, what: &'static str) -> Result<Self> {
        ensure_square(a)?;
        let cond = condition_number(a);
        if !(cond < MAX_CONDITION) {
            return Err(LabError::IllConditioned { what, cond });
        }
        Ok(Self { qr: a.clone().col_piv_qr(), cond })
    }

    pub fn condition(&self) -> f64 {
        self.cond
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        self.qr.solve(b).expect("factorization checked for conditioning")
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.qr.q().nrows();
        self.solve(&identity(n))
    }
}

/// Hermitian positive-definite weight `H` defining `<x, y>_H = <Hx, y>`.
#[derive(Clone, Debug)]
pub struct Gram {
    matrix: ComplexMatrix,
    chol: ComplexMatrix,
}

impl Gram {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let scale = op_norm(&matrix);
        let asym = op_norm(&(&matrix - matrix.adjoint()));
        if asym > 1e-12 * scale {
            return Err(LabError::InvalidGram(format!("not hermitian (|H - H*| = {asym:e})")));
        }
        // complex Cholesky happily takes square roots of negative pivots
        let lmin = lambda_min_hermitian(&matrix)?;
        if !(lmin > 0.0) {
            return Err(LabError::InvalidGram(format!("not positive definite (lambda_min = {lmin:e})")));
        }
        let chol = Cholesky::new(symmetrize(&matrix))
            .ok_or_else(|| LabError::InvalidGram("not positive definite".into()))?
            .l();
        Ok(Self { matrix, chol })
    }

    /// Diagonal gram from positive real weights.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(LabError::InvalidGram(format!("non-positive weight {w}")));
        }
        Self::new(diag_real(weights))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Lower Cholesky factor `L` with `H = L L*`.
    pub fn cholesky_factor(&self) -> &ComplexMatrix {
        &self.chol
    }

    pub fn inner(&self, x: &ComplexVector, y: &ComplexVector) -> C64 {
        y.dotc(&(&self.matrix * x))
    }

    pub fn norm_squared(&self, x: &ComplexVector) -> f64 {
        self.inner(x, x).re.max(0.0)
    }

    /// Induced operator norm of `M` on `(C^n, <.,.>_H)`, i.e. `|L* M L^-*|`.
    pub fn weighted_op_norm(&self, m: &ComplexMatrix) -> f64 {
        op_norm(&self.congruence(m))
    }

    /// `L* M L^-*`: the matrix of `M` in an `H`-orthonormal basis.
    fn congruence(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let lt = self.chol.adjoint();
        // L* M L^-* = (L^-1 (L* M)^*)^*
        let left = &lt * m;
        let solved = self
            .chol
            .solve_lower_triangular(&left.adjoint())
            .expect("cholesky factor is nonsingular");
        solved.adjoint()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(LabError::DimensionMismatch(format!(
                "gram is {}x{}, operator is {n}x{n}",
                self.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Largest value of `Re<Ax, x>_H / <x, x>_H`; `A` is dissipative in the given
/// inner product iff the result is `<= 0`.
///
/// For a weighted inner product this is the largest eigenvalue of the pencil
/// `(HA + A*H, 2H)`, reduced through the Cholesky factor of `H`.
pub fn dissipativity_margin(a: &ComplexMatrix, gram: Option<&Gram>) -> Result<f64> {
    let n = ensure_square(a)?;
    match gram {
        None => lambda_max_hermitian(a),
        Some(g) => {
            g.check_dim(n)?;
            lambda_max_hermitian(&g.congruence(a))
        }
    }
}

fn pade_coefficients() -> [f64; PADE_DEGREE + 1] {
    let m = PADE_DEGREE;
    let mut coeffs = [0.0; PADE_DEGREE + 1];
    coeffs[0] = 1.0;
    for k in 1..=m {
        // c_k = c_{k-1} (m - k + 1) / (k (2m - k + 1))
        coeffs[k] = coeffs[k - 1] * (m - k + 1) as f64 / (k as f64 * (2 * m - k + 1) as f64);
    }
    coeffs
}

/// `e^{At}` by scaling and squaring with a diagonal Padé approximant.
///
/// Accurate to about `1e-13` relative for `|At| <= 100`; arguments with
/// `|At|_1 > 1e12`, or whose exponential overflows, are rejected.
pub fn expm(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    if !t.is_finite() {
        return Err(LabError::InvalidParameter { name: "t", reason: format!("{t} is not finite") });
    }
    let at = a.scale(t);
    let norm = one_norm(&at);
    if !norm.is_finite() || norm > EXPM_MAX_NORM {
        return Err(LabError::ExpOverflow(norm));
    }
    let squarings = if norm > EXPM_SCALED_NORM {
        (norm / EXPM_SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let x = at.scale(0.5f64.powi(squarings));

    let coeffs = pade_coefficients();
    let mut numer = identity(n);
    let mut denom = identity(n);
    let mut power = identity(n);
    for (k, &ck) in coeffs.iter().enumerate().skip(1) {
        power = &power * &x;
        numer += power.scale(ck);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        denom += power.scale(sign * ck);
    }
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or(LabError::IllConditioned { what: "Padé denominator", cond: f64::INFINITY })?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    ensure_finite(&result).map_err(|_| LabError::ExpOverflow(norm))?;
    Ok(result)
}

/// Semigroup norms sampled at a list of times.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

impl ContractionReport {
    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Samples `|e^{At}|` (or its `H`-weighted norm) and passes when every sample
/// is at most `1 + tol`.
pub fn contraction_certificate(
    a: &ComplexMatrix,
    gram: Option<&Gram>,
    times: &[f64],
    tol: f64,
) -> Result<ContractionReport> {
    let n = ensure_square(a)?;
    if times.is_empty() {
        return Err(LabError::InvalidParameter { name: "times", reason: "empty".into() });
    }
    if let Some(g) = gram {
        g.check_dim(n)?;
    }
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0) {
            return Err(LabError::InvalidParameter { name: "times", reason: format!("negative time {t}") });
        }
        let e = expm(a, t)?;
        norms.push(match gram {
            None => op_norm(&e),
            Some(g) => g.weighted_op_norm(&e),
        });
    }
    let passed = norms.iter().all(|&v| v <= 1.0 + tol);
    Ok(ContractionReport { times: times.to_vec(), norms, tol, passed })
}

/// Checks `(QR)* = R*Q*` to `1e-12 (|Q||R| + 1)`. Always true in finite
/// dimensions; kept as a fixture for the adjoint bookkeeping elsewhere.
pub fn adjoint_compose_check(q: &ComplexMatrix, r: &ComplexMatrix) -> Result<bool> {
    if q.ncols() != r.nrows() {
        return Err(LabError::DimensionMismatch(format!(
            "Q is {}x{}, R is {}x{}",
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    let lhs = (q * r).adjoint();
    let rhs = r.adjoint() * q.adjoint();
    Ok(op_norm(&(lhs - rhs)) <= 1e-12 * (op_norm(q) * op_norm(r) + 1.0))
}

/// Stacks a 2x2 block matrix.
pub fn block2(
    a11: &ComplexMatrix,
    a12: &ComplexMatrix,
    a21: &ComplexMatrix,
    a22: &ComplexMatrix,
) -> ComplexMatrix {
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    assert_eq!(a12.shape(), (r1, c2), "block (1,2) shape");
    assert_eq!(a21.shape(), (r2, c1), "block (2,1) shape");
    let mut m = ComplexMatrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(a11);
    m.view_mut((0, c1), (r1, c2)).copy_from(a12);
    m.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    m.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    m
}

/// Stacks matrices with equal column counts vertically.
pub fn vstack(parts: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut m = ComplexMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack column count");
        m.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    m
}

/// Stacks matrices with equal row counts horizontally.
pub fn hstack(parts: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut m = ComplexMatrix::zeros(rows, cols);
    let mut col = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hstack row count");
        m.view_mut((0, col), (rows, p.ncols())).copy_from(*p);
        col += p.ncols();
    }
    m
}

pub fn vector_norm(x: &ComplexVector) -> f64 {
    x.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        op_norm(&(a - b)) <= tol
    }

    #[test]
    fn herm_part_examples() {
        let rot = from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(herm_part(&rot).unwrap().iter().all(|z| z.norm() == 0.0));
        assert_eq!(herm_part(&identity(3)).unwrap(), identity(3));
        let a = ComplexMatrix::from_row_slice(2, 2, &[real(1.0), c(0.0, 2.0), real(0.0), real(3.0)]);
        let expected = ComplexMatrix::from_row_slice(2, 2, &[real(1.0), c(0.0, 1.0), c(0.0, -1.0), real(3.0)]);
        assert!(close(&herm_part(&a).unwrap(), &expected, 1e-15));
        assert!(matches!(
            herm_part(&ComplexMatrix::zeros(2, 3)),
            Err(LabError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn margin_examples() {
        let skew = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), real(2.0), real(-2.0), c(0.0, -3.0)]);
        assert!(dissipativity_margin(&skew, None).unwrap().abs() < 1e-15);
        assert!((dissipativity_margin(&(-identity(4)), None).unwrap() + 1.0).abs() < 1e-15);
        let ex = ComplexMatrix::from_row_slice(2, 2, &[real(0.0), real(0.0), real(0.0), c(0.0, 1.0)]);
        assert_eq!(dissipativity_margin(&ex, None).unwrap(), 0.0);
    }

    #[test]
    fn margin_rejects_gram_of_wrong_size() {
        let g = Gram::diagonal(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            dissipativity_margin(&identity(3), Some(&g)),
            Err(LabError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn weighted_margin_matches_rayleigh_quotient() {
        // H = diag(1, 4), A = [[0, 1], [-1, 0]]: HA + A*H = [[0, -3], [-3, 0]],
        // pencil eigenvalues of ([[0,-3],[-3,0]], 2 diag(1,4)) are +-3/4.
        let g = Gram::diagonal(&[1.0, 4.0]).unwrap();
        let a = from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let m = dissipativity_margin(&a, Some(&g)).unwrap();
        assert!((m - 0.75).abs() < 1e-14, "{m}");
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(op_norm(&ComplexMatrix::zeros(3, 2)), 0.0);
        assert!((op_norm(&diag_real(&[3.0, 1.0])) - 3.0).abs() < 1e-14);
        assert!((op_norm(&from_real_rows(2, 2, &[0.0, 2.0, 0.0, 0.0])) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn expm_examples() {
        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(expm(&zero, 5.0).unwrap(), identity(3));
        let e = expm(&(-identity(2)), 1.0).unwrap();
        assert!(close(&e, &identity(2).scale(1.0 / E), 1e-15));
        let rot = from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let quarter = expm(&rot, FRAC_PI_2).unwrap();
        assert!(close(&quarter, &rot, 1e-14), "{quarter}");
    }

    #[test]
    fn expm_agrees_with_taylor_series_oracle() {
        // Taylor series with many terms is an independent reference for
        // moderate norms.
        let a = ComplexMatrix::from_fn(5, 5, |i, j| c((i as f64 - j as f64) * 0.3, ((i * j) % 3) as f64 * 0.2));
        let mut term = identity(5);
        let mut sum = identity(5);
        for k in 1..80 {
            term = &term * &a / real(k as f64);
            sum += &term;
        }
        let e = expm(&a, 1.0).unwrap();
        assert!(op_norm(&(&e - &sum)) <= 1e-12 * op_norm(&sum));
    }

    #[test]
    fn expm_rejects_overflow() {
        assert!(matches!(expm(&identity(2), 1e13), Err(LabError::ExpOverflow(_))));
        assert!(matches!(expm(&identity(2), 1000.0), Err(LabError::ExpOverflow(_))));
    }

    #[test]
    fn certificate_examples() {
        let r = contraction_certificate(&(-identity(2)), None, &[1.0, 10.0], 1e-12).unwrap();
        assert!(r.passed);
        assert!((r.norms[0] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((r.norms[1] - (-10.0f64).exp()).abs() < 1e-18);
        let skew = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), real(2.0), real(-2.0), real(0.0)]);
        let r = contraction_certificate(&skew, None, &[1.0], 1e-12).unwrap();
        assert!(r.passed && (r.norms[0] - 1.0).abs() < 1e-13);
        let r = contraction_certificate(&identity(1), None, &[1.0], 1e-12).unwrap();
        assert!(!r.passed && (r.norms[0] - E).abs() < 1e-14);
        assert!(contraction_certificate(&identity(1), None, &[], 0.0).is_err());
        assert!(contraction_certificate(&identity(1), None, &[-1.0], 0.0).is_err());
    }

    #[test]
    fn adjoint_compose_examples() {
        assert!(adjoint_compose_check(&identity(3), &identity(3)).unwrap());
        let q = from_real_rows(1, 2, &[1.0, 0.0]);
        let r = from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(adjoint_compose_check(&q, &r).unwrap());
        assert!(adjoint_compose_check(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn gram_validation() {
        assert!(Gram::new(from_real_rows(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        assert!(Gram::new(from_real_rows(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(Gram::diagonal(&[1.0, 0.0]).is_err());
        let g = Gram::new(from_real_rows(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let l = g.cholesky_factor();
        assert!(close(&(l * l.adjoint()), g.matrix(), 1e-14));
    }

    #[test]
    fn factored_reports_singularity() {
        let singular = from_real_rows(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            Factored::new(&singular, "test"),
            Err(LabError::IllConditioned { what: "test", .. })
        ));
        let f = Factored::new(&diag_real(&[2.0, 4.0]), "test").unwrap();
        assert!((f.condition() - 2.0).abs() < 1e-14);
        assert!(close(&f.inverse(), &diag_real(&[0.5, 0.25]), 1e-15));
    }
}
