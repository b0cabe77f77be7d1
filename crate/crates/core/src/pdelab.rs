//! Staggered 1-D discretizations of the wave, damped wave and (degenerate)
//! heat extended operators on `(0, 1)`.
//!
//! Nodes are `xi_i = i h` and midpoints `(i - 1/2) h`. Every space carries
//! the weight `h`, which is uniform, so Euclidean adjoints of the assembled
//! matrices are the adjoints in the discrete `L^2` inner product.

use crate::cayley::AccretiveOperator;
use crate::error::{LabError, Result};
use crate::numkernel::{
    block2, diag_real, hermitian_eigenvalues, hstack, identity, real, vstack, ComplexMatrix, Gram,
};
use crate::sysnode::{ExtendedOperator, Structure};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(LabError::InvalidParameter { name: "n_cells", reason: format!("{n_cells} < 2") });
        }
        Ok(Self { n_cells, h: 1.0 / n_cells as f64 })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior nodes `xi_1 .. xi_{n-1}`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..self.n_cells).map(|i| i as f64 * self.h).collect()
    }

    /// Nodes `xi_1 .. xi_n`, i.e. the interior nodes plus `xi = 1`.
    pub fn nodes_to_right(&self) -> Vec<f64> {
        (1..=self.n_cells).map(|i| i as f64 * self.h).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (1..=self.n_cells).map(|i| (i as f64 - 0.5) * self.h).collect()
    }
}

/// Coefficient function of `xi`, sampled onto the grid by [`PdeCoefficients`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `a + b xi`.
    Linear { a: f64, b: f64 },
    /// `xi^p`.
    Power(f64),
}

impl Profile {
    pub fn eval(&self, xi: f64) -> f64 {
        match *self {
            Profile::Constant(v) => v,
            Profile::Linear { a, b } => a + b * xi,
            Profile::Power(p) => xi.powf(p),
        }
    }

    pub fn sample(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&xi| self.eval(xi)).collect()
    }
}

/// Profiles from which [`PdeCoefficients`] are sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientProfiles {
    pub rho: Profile,
    pub young: Profile,
    pub k_v: Profile,
    pub k_s: Profile,
    pub s_fun: Profile,
    pub alpha_exp: f64,
    pub kappa: f64,
    /// Lower bound required of `rho`, `young` and `s_fun`.
    pub delta_floor: f64,
}

impl Default for CoefficientProfiles {
    fn default() -> Self {
        Self {
            rho: Profile::Constant(1.0),
            young: Profile::Constant(1.0),
            k_v: Profile::Constant(0.0),
            k_s: Profile::Constant(0.0),
            s_fun: Profile::Constant(1.0),
            alpha_exp: 0.5,
            kappa: 0.0,
            delta_floor: 1e-8,
        }
    }
}

/// Per-point coefficient samples on a fixed grid.
///
/// `rho` and `k_v` live on interior nodes, `young` and `k_s` on midpoints.
/// `s_fun` lives on the nodes `xi_1 .. xi_n`, where the flux of the heat
/// constructions sits; [`neumann_heat_ext`] uses the first `n - 1` of them.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeCoefficients {
    pub rho: Vec<f64>,
    pub young: Vec<f64>,
    pub k_v: Vec<f64>,
    pub k_s: Vec<f64>,
    pub s_fun: Vec<f64>,
    pub alpha_exp: f64,
    pub kappa: f64,
    /// Smallest sample of `rho`, `young` and `s_fun`.
    pub delta: f64,
}

impl PdeCoefficients {
    pub fn sample(grid: &Grid1D, profiles: &CoefficientProfiles) -> Result<Self> {
        let nodes = grid.nodes();
        let mids = grid.midpoints();
        let coeffs = Self {
            rho: profiles.rho.sample(&nodes),
            young: profiles.young.sample(&mids),
            k_v: profiles.k_v.sample(&nodes),
            k_s: profiles.k_s.sample(&mids),
            s_fun: profiles.s_fun.sample(&grid.nodes_to_right()),
            alpha_exp: profiles.alpha_exp,
            kappa: profiles.kappa,
            delta: 0.0,
        };
        coeffs.validated(grid, profiles.delta_floor)
    }

    /// Checks lengths and ranges and records `delta`.
    pub fn validated(mut self, grid: &Grid1D, delta_floor: f64) -> Result<Self> {
        let n = grid.n_cells();
        let lengths = [
            ("rho", self.rho.len(), n - 1),
            ("young", self.young.len(), n),
            ("k_v", self.k_v.len(), n - 1),
            ("k_s", self.k_s.len(), n),
            ("s_fun", self.s_fun.len(), n),
        ];
        for (name, got, want) in lengths {
            if got != want {
                return Err(LabError::DimensionMismatch(format!("{name} has {got} samples, grid needs {want}")));
            }
        }
        if !(delta_floor > 0.0) {
            return Err(LabError::InvalidParameter { name: "delta_floor", reason: format!("{delta_floor} is not positive") });
        }
        let delta = self.rho.iter().chain(&self.young).chain(&self.s_fun).copied().fold(f64::INFINITY, f64::min);
        if !(delta >= delta_floor) {
            return Err(LabError::InvalidParameter {
                name: "rho/young/s_fun",
                reason: format!("minimum sample {delta} is below the floor {delta_floor}"),
            });
        }
        let damping_min = self.k_v.iter().chain(&self.k_s).copied().fold(f64::INFINITY, f64::min);
        if !(damping_min >= 0.0) {
            return Err(LabError::InvalidParameter { name: "k_v/k_s", reason: format!("negative sample {damping_min}") });
        }
        if !(0.0..1.0).contains(&self.alpha_exp) {
            return Err(LabError::InvalidParameter { name: "alpha_exp", reason: format!("{} not in [0, 1)", self.alpha_exp) });
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(LabError::InvalidParameter { name: "kappa", reason: format!("{} is negative", self.kappa) });
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn uniform(grid: &Grid1D) -> Self {
        Self::sample(grid, &CoefficientProfiles::default()).expect("default profiles are valid")
    }

    /// `beta(xi) = xi^-alpha` at the given points.
    pub fn beta(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&xi| xi.powf(-self.alpha_exp)).collect()
    }
}

/// `G` (interior nodes to midpoints, forward differences with zero boundary
/// values) and `Dv = -G^T`.
pub fn grad_div_pair(grid: &Grid1D) -> (ComplexMatrix, ComplexMatrix) {
    let n = grid.n_cells();
    let inv_h = 1.0 / grid.h();
    let mut g = ComplexMatrix::zeros(n, n - 1);
    for j in 0..n {
        if j < n - 1 {
            g[(j, j)] = real(inv_h);
        }
        if j > 0 {
            g[(j, j - 1)] = real(-inv_h);
        }
    }
    let dv = -g.transpose();
    (g, dv)
}

/// `[[0, Dv], [G, 0]]` with the displacement on interior nodes and the loop
/// channel on midpoints.
pub fn wave_ext(grid: &Grid1D) -> ExtendedOperator {
    let n = grid.n_cells();
    let (g, dv) = grad_div_pair(grid);
    ExtendedOperator::from_blocks(ComplexMatrix::zeros(n - 1, n - 1), dv, g, ComplexMatrix::zeros(n, n))
        .and_then(|e| e.with_structure(Structure::Skew))
        .expect("staggered wave operator is skew by construction")
}

/// Damped wave fixture: extended operator on (momentum at nodes, strain at
/// midpoints), the energy Gram `diag(1/rho, T)` and the damping `S`.
#[derive(Clone, Debug)]
pub struct DampedWave {
    pub ext: ExtendedOperator,
    pub gram: Gram,
    pub damping: AccretiveOperator,
}

impl DampedWave {
    pub fn uniformly_accretive(&self) -> Result<&AccretiveOperator> {
        if self.damping.is_uniformly_accretive() {
            Ok(&self.damping)
        } else {
            Err(LabError::NotUniformlyAccretive("damping coefficient vanishes somewhere".into()))
        }
    }

    /// `A_S H`, the generator in energy variables.
    pub fn energy_generator(&self) -> Result<ComplexMatrix> {
        let a_s = crate::feedback::internal_loop(&self.ext, &self.damping)?
            .a_s
            .ok_or(LabError::IllConditioned { what: "I - A22 S", cond: f64::INFINITY })?;
        Ok(a_s * self.gram.matrix())
    }
}

fn wave_state_block(grid: &Grid1D) -> ComplexMatrix {
    let n = grid.n_cells();
    let (g, dv) = grad_div_pair(grid);
    block2(&ComplexMatrix::zeros(n - 1, n - 1), &dv, &g, &ComplexMatrix::zeros(n, n))
}

fn energy_gram(coeffs: &PdeCoefficients) -> Result<Gram> {
    let weights: Vec<f64> = coeffs.rho.iter().map(|r| 1.0 / r).chain(coeffs.young.iter().copied()).collect();
    Gram::diagonal(&weights)
}

fn check_grid(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<()> {
    if coeffs.young.len() != grid.n_cells() {
        return Err(LabError::DimensionMismatch(format!(
            "coefficients sampled for {} cells, grid has {}",
            coeffs.young.len(),
            grid.n_cells()
        )));
    }
    Ok(())
}

fn skew(a11: ComplexMatrix, a12: ComplexMatrix, a21: ComplexMatrix, a22: ComplexMatrix) -> Result<ExtendedOperator> {
    ExtendedOperator::from_blocks(a11, a12, a21, a22)?.with_structure(Structure::Skew)
}

/// Viscous damping: loop channel on nodes,
/// `A_ext = [[0, Dv, I], [G, 0, 0], [-I, 0, 0]]`, `S = diag(k_v)`.
pub fn wave_viscous_ext(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<DampedWave> {
    check_grid(grid, coeffs)?;
    let n = grid.n_cells();
    let eye = identity(n - 1);
    let zero = ComplexMatrix::zeros(n, n - 1);
    let ext = skew(wave_state_block(grid), vstack(&[&eye, &zero]), hstack(&[&(-&eye), &zero.transpose()]), ComplexMatrix::zeros(n - 1, n - 1))?;
    Ok(DampedWave { ext, gram: energy_gram(coeffs)?, damping: AccretiveOperator::diagonal(&coeffs.k_v)? })
}

/// Structural damping: loop channel on midpoints,
/// `A_ext = [[0, Dv, Dv], [G, 0, 0], [G, 0, 0]]`, `S = diag(k_s)`.
pub fn wave_structural_ext(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<DampedWave> {
    check_grid(grid, coeffs)?;
    let n = grid.n_cells();
    let (g, dv) = grad_div_pair(grid);
    let a12 = vstack(&[&dv, &ComplexMatrix::zeros(n, n)]);
    let a21 = hstack(&[&g, &ComplexMatrix::zeros(n, n)]);
    let ext = skew(wave_state_block(grid), a12, a21, ComplexMatrix::zeros(n, n))?;
    Ok(DampedWave { ext, gram: energy_gram(coeffs)?, damping: AccretiveOperator::diagonal(&coeffs.k_s)? })
}

/// Viscous and structural damping together, loop channel `(midpoints,
/// nodes)` and `S = diag(k_s, k_v)`. Both coefficients must be positive
/// everywhere, otherwise `S` is not uniformly accretive.
pub fn wave_combined_ext(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<DampedWave> {
    check_grid(grid, coeffs)?;
    for (name, values) in [("k_s", &coeffs.k_s), ("k_v", &coeffs.k_v)] {
        if values.iter().any(|&k| !(k > 0.0)) {
            return Err(LabError::NotUniformlyAccretive(format!("{name} vanishes somewhere")));
        }
    }
    let n = grid.n_cells();
    let (g, dv) = grad_div_pair(grid);
    let eye = identity(n - 1);
    let a12 = block2(&dv, &eye, &ComplexMatrix::zeros(n, n), &ComplexMatrix::zeros(n, n - 1));
    let a21 = block2(&g, &ComplexMatrix::zeros(n, n), &(-&eye), &ComplexMatrix::zeros(n - 1, n));
    let ext = skew(wave_state_block(grid), a12, a21, ComplexMatrix::zeros(2 * n - 1, 2 * n - 1))?;
    let damping: Vec<f64> = coeffs.k_s.iter().chain(&coeffs.k_v).copied().collect();
    Ok(DampedWave { ext, gram: energy_gram(coeffs)?, damping: AccretiveOperator::diagonal(&damping)? })
}

/// `D1`: flux on nodes `xi_1 .. xi_n` (with zero flux at `xi = 0`) to
/// differences on midpoints.
fn flux_divergence(grid: &Grid1D) -> ComplexMatrix {
    let n = grid.n_cells();
    let inv_h = 1.0 / grid.h();
    let mut d = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = real(inv_h);
        if j > 0 {
            d[(j, j - 1)] = real(-inv_h);
        }
    }
    d
}

/// Degenerate parabolic extended operator: state `(x1, x2)` with `x1` on
/// midpoints and `x2` on the nodes `xi_1 .. xi_n` (`x2(0) = 0`), loop
/// channel on the same nodes as `x2`, `M_beta = diag(xi^-alpha)` there.
///
/// The coupling `x1(1) = -kappa x2(1)` enters as `-kappa/h` on the last
/// diagonal entry, so `Re<A v, v>_h = -kappa |x2(1)|^2`.
pub fn degenerate_ext(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<ExtendedOperator> {
    check_grid(grid, coeffs)?;
    if !(coeffs.kappa >= 0.0) {
        return Err(LabError::InvalidParameter { name: "kappa", reason: format!("{} is negative", coeffs.kappa) });
    }
    let n = grid.n_cells();
    let d1 = flux_divergence(grid);
    let mut boundary = ComplexMatrix::zeros(n, n);
    boundary[(n - 1, n - 1)] = real(-coeffs.kappa / grid.h());
    let a11 = block2(&ComplexMatrix::zeros(n, n), &d1, &(-d1.transpose()), &boundary);
    let m_beta = diag_real(&coeffs.beta(&grid.nodes_to_right()));
    let zero = ComplexMatrix::zeros(n, n);
    let a12 = vstack(&[&zero, &m_beta]);
    let a21 = hstack(&[&zero, &(-&m_beta)]);
    let structure = if coeffs.kappa == 0.0 { Structure::Skew } else { Structure::Dissipative };
    ExtendedOperator::from_blocks(a11, a12, a21, ComplexMatrix::zeros(n, n))?.with_structure(structure)
}

/// Direct assembly of `A_{S,1} x = d/dxi (d(xi) dx/dxi)` with diffusivity
/// `d = 1 / (1/s + beta^2) = s xi^{2 alpha} / (s + xi^{2 alpha})` on the flux
/// nodes and the last flux weight reduced to `1 / (1/d + kappa/h)` by the
/// coupling at `xi = 1`. For `s = 1` this is `xi^{2 alpha} / (1 + xi^{2 alpha})`.
pub fn degenerate_as1(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<ComplexMatrix> {
    check_grid(grid, coeffs)?;
    let n = grid.n_cells();
    let xi = grid.nodes_to_right();
    let mut d: Vec<f64> = xi
        .iter()
        .zip(&coeffs.s_fun)
        .map(|(&x, &s)| {
            let w = x.powf(2.0 * coeffs.alpha_exp);
            s * w / (s + w)
        })
        .collect();
    d[n - 1] = 1.0 / (1.0 / d[n - 1] + coeffs.kappa / grid.h());
    let d1 = flux_divergence(grid);
    Ok(-(&d1 * diag_real(&d) * d1.transpose()))
}

/// Second loop of the degenerate construction: `A_{S,0}` (the internal loop
/// with `S = I`) viewed as an extended operator with the flux as loop
/// channel, closed through `diag(s)`.
pub fn degenerate_as1_via_loops(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<ComplexMatrix> {
    let n = grid.n_cells();
    let ext = degenerate_ext(grid, coeffs)?;
    let a_s0 = crate::feedback::internal_loop(&ext, &AccretiveOperator::new(identity(n))?)?
        .a_s
        .ok_or(LabError::IllConditioned { what: "I - A22 S", cond: f64::INFINITY })?;
    let second = ExtendedOperator::from_assembled(&a_s0, n)?;
    crate::feedback::internal_loop(&second, &AccretiveOperator::diagonal(&coeffs.s_fun)?)?
        .a_s
        .ok_or(LabError::IllConditioned { what: "I - A22 S", cond: f64::INFINITY })
}

/// Heat extended operator with zero normal trace: `x1` on midpoints, flux
/// `x2` on interior nodes (zero at both ends), blocks
/// `[[0, div], [grad, -diag(beta^2)]]` with `div = G` and `grad = -G^T`.
pub fn neumann_heat_ext(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<ExtendedOperator> {
    check_grid(grid, coeffs)?;
    let n = grid.n_cells();
    let (div, grad) = grad_div_pair(grid);
    let beta_sq: Vec<f64> = coeffs.beta(&grid.nodes()).iter().map(|b| -b * b).collect();
    ExtendedOperator::from_blocks(ComplexMatrix::zeros(n, n), div, grad, diag_real(&beta_sq))?
        .with_structure(Structure::Dissipative)
}

/// Flux samples of `s` used by [`neumann_heat_ext`].
pub fn neumann_heat_s(grid: &Grid1D, coeffs: &PdeCoefficients) -> Vec<f64> {
    coeffs.s_fun[..grid.n_cells() - 1].to_vec()
}

/// `div (S^-1 + beta^2)^-1 grad` for the zero-normal-trace layout.
pub fn neumann_heat_as(grid: &Grid1D, coeffs: &PdeCoefficients) -> Result<ComplexMatrix> {
    check_grid(grid, coeffs)?;
    let (div, grad) = grad_div_pair(grid);
    let beta = coeffs.beta(&grid.nodes());
    let d: Vec<f64> = neumann_heat_s(grid, coeffs).iter().zip(&beta).map(|(s, b)| 1.0 / (1.0 / s + b * b)).collect();
    Ok(div * diag_real(&d) * grad)
}

/// Smallest eigenvalue of `-Dv G`, which approximates `pi^2`.
pub fn principal_dirichlet_eigenvalue(grid: &Grid1D) -> Result<f64> {
    let (g, dv) = grad_div_pair(grid);
    Ok(hermitian_eigenvalues(&(-(dv * g)))?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::internal_loop;
    use crate::numkernel::{contraction_certificate, dissipativity_margin, op_norm, ComplexVector};
    use crate::sysnode::external_cayley;
    use std::f64::consts::{PI, SQRT_2};

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    fn rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        op_norm(&(a - b)) / (1.0 + op_norm(b))
    }

    fn a_s(ext: &ExtendedOperator, s: &AccretiveOperator) -> ComplexMatrix {
        internal_loop(ext, s).unwrap().a_s.unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid1D::new(1).is_err());
        let g = grid(7);
        assert!((g.h() * 7.0 - 1.0).abs() <= 1e-15);
        assert_eq!(g.nodes().len(), 6);
        assert_eq!(g.midpoints().len(), 7);
        assert!((g.midpoints()[0] - g.h() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn sine_mode_is_eigenvector() {
        for n in [4, 9, 32] {
            let g = grid(n);
            let (gr, dv) = grad_div_pair(&g);
            assert_eq!(dv, -gr.transpose());
            let mode = ComplexVector::from_iterator(n - 1, g.nodes().iter().map(|&x| real((PI * x).sin())));
            let lambda = 4.0 / (g.h() * g.h()) * (PI * g.h() / 2.0).sin().powi(2);
            let residual = &dv * (&gr * &mode) + mode.scale(lambda);
            assert!(residual.norm() < 1e-10 * lambda);
            assert_eq!((&gr * ComplexVector::zeros(n - 1)).norm(), 0.0);
            assert_eq!((&dv * ComplexVector::from_element(n, real(1.0))).norm(), 0.0);
        }
    }

    #[test]
    fn wave_examples() {
        let g = grid(4);
        let ext = wave_ext(&g);
        assert_eq!(ext.assembled().shape(), (7, 7));
        assert!(dissipativity_margin(&ext.assembled(), None).unwrap().abs() < 1e-14);
        let node = external_cayley(&ext).unwrap();
        assert!(op_norm(&(&node.d - identity(4))) < 1e-14);
        let (gr, dv) = grad_div_pair(&g);
        assert!(rel(&node.a, &(&dv * &gr)) < 1e-14);
        assert!(rel(&node.b, &dv.scale(SQRT_2)) < 1e-14);
        let lap = a_s(&ext, &AccretiveOperator::new(identity(4)).unwrap());
        assert!(rel(&lap, &(dv * gr)) < 1e-14);
    }

    #[test]
    fn viscous_examples() {
        let g = grid(6);
        let mut coeffs = PdeCoefficients::uniform(&g);
        let undamped = wave_viscous_ext(&g, &coeffs).unwrap();
        assert_eq!(undamped.ext.structure(), Structure::Skew);
        assert!(undamped.uniformly_accretive().is_err());

        coeffs.k_v = vec![0.7; 5];
        let fixture = wave_viscous_ext(&g, &coeffs).unwrap();
        let (gr, dv) = grad_div_pair(&g);
        let expected = block2(&identity(5).scale(-0.7), &dv, &gr, &ComplexMatrix::zeros(6, 6));
        assert!(rel(&a_s(&fixture.ext, &fixture.damping), &expected) < 1e-14);

        let node = external_cayley(&fixture.ext).unwrap();
        assert!(op_norm(&(&node.d - identity(5))) < 1e-14);
        let b = vstack(&[&identity(5).scale(SQRT_2), &ComplexMatrix::zeros(6, 5)]);
        let c = hstack(&[&identity(5).scale(-SQRT_2), &ComplexMatrix::zeros(5, 6)]);
        assert!(rel(&node.b, &b) < 1e-14 && rel(&node.c, &c) < 1e-14);
    }

    #[test]
    fn structural_examples() {
        let g = grid(5);
        let mut coeffs = PdeCoefficients::uniform(&g);
        coeffs.k_s = g.midpoints().iter().map(|x| 1.0 + x).collect();
        let fixture = wave_structural_ext(&g, &coeffs).unwrap();
        let (gr, dv) = grad_div_pair(&g);
        let top_left = &dv * diag_real(&coeffs.k_s) * &gr;
        let expected = block2(&top_left, &dv, &gr, &ComplexMatrix::zeros(5, 5));
        assert!(rel(&a_s(&fixture.ext, &fixture.damping), &expected) < 1e-13);

        coeffs.k_s = vec![0.0; 5];
        let undamped = wave_structural_ext(&g, &coeffs).unwrap();
        assert!(rel(&a_s(&undamped.ext, &undamped.damping), &wave_state_block(&g)) < 1e-15);

        // main operator of the Cayley node: (Dv(G x1 + x2), G x1)
        let node = external_cayley(&fixture.ext).unwrap();
        let expected_main = block2(&(&dv * &gr), &dv, &gr, &ComplexMatrix::zeros(5, 5));
        assert!(rel(&node.a, &expected_main) < 1e-14);
    }

    #[test]
    fn combined_examples() {
        let g = grid(6);
        let mut coeffs = PdeCoefficients::uniform(&g);
        assert!(matches!(wave_combined_ext(&g, &coeffs), Err(LabError::NotUniformlyAccretive(_))));
        coeffs.k_v = vec![1.0; 5];
        assert!(matches!(wave_combined_ext(&g, &coeffs), Err(LabError::NotUniformlyAccretive(_))));
        coeffs.k_s = vec![1.0; 6];
        let fixture = wave_combined_ext(&g, &coeffs).unwrap();
        assert!(dissipativity_margin(&fixture.ext.assembled(), None).unwrap() <= 1e-12);
        let a = a_s(&fixture.ext, &fixture.damping);
        let cert = contraction_certificate(&a, None, &[0.1, 1.0, 10.0], 1e-10).unwrap();
        assert!(cert.passed);
        // both damping paths enter additively
        let (gr, dv) = grad_div_pair(&g);
        let expected = block2(&(&dv * &gr - identity(5)), &dv, &gr, &ComplexMatrix::zeros(6, 6));
        assert!(rel(&a, &expected) < 1e-13);
    }

    #[test]
    fn energy_generators_contract_in_gram() {
        let g = grid(8);
        let profiles = CoefficientProfiles {
            rho: Profile::Linear { a: 1.0, b: 1.0 },
            young: Profile::Linear { a: 2.0, b: -1.0 },
            k_v: Profile::Constant(0.5),
            k_s: Profile::Linear { a: 0.2, b: 1.0 },
            ..CoefficientProfiles::default()
        };
        let coeffs = PdeCoefficients::sample(&g, &profiles).unwrap();
        for fixture in [
            wave_viscous_ext(&g, &coeffs).unwrap(),
            wave_structural_ext(&g, &coeffs).unwrap(),
            wave_combined_ext(&g, &coeffs).unwrap(),
        ] {
            let gen = fixture.energy_generator().unwrap();
            assert!(dissipativity_margin(&gen, Some(&fixture.gram)).unwrap() <= 1e-10);
            let cert = contraction_certificate(&gen, Some(&fixture.gram), &[0.1, 1.0, 5.0], 1e-10).unwrap();
            assert!(cert.passed, "{:?}", cert.norms);
        }
    }

    #[test]
    fn undamped_energy_is_conserved() {
        let g = grid(8);
        let coeffs = PdeCoefficients::sample(
            &g,
            &CoefficientProfiles { rho: Profile::Linear { a: 1.0, b: 2.0 }, ..CoefficientProfiles::default() },
        )
        .unwrap();
        let gen = wave_viscous_ext(&g, &coeffs).unwrap().energy_generator().unwrap();
        let e = crate::numkernel::expm(&gen, 1.0).unwrap();
        let gram = energy_gram(&coeffs).unwrap();
        let x = ComplexVector::from_fn(gen.nrows(), |i, _| real((i as f64 * 0.37).sin()));
        let before = gram.norm_squared(&x);
        assert!((gram.norm_squared(&(e * &x)) - before).abs() <= 1e-8 * before);
    }

    #[test]
    fn coefficient_validation() {
        let g = grid(4);
        let bad_rho = CoefficientProfiles { rho: Profile::Constant(0.0), ..CoefficientProfiles::default() };
        assert!(PdeCoefficients::sample(&g, &bad_rho).is_err());
        let bad_alpha = CoefficientProfiles { alpha_exp: 1.0, ..CoefficientProfiles::default() };
        assert!(PdeCoefficients::sample(&g, &bad_alpha).is_err());
        let bad_kappa = CoefficientProfiles { kappa: -0.1, ..CoefficientProfiles::default() };
        assert!(PdeCoefficients::sample(&g, &bad_kappa).is_err());
        let bad_k = CoefficientProfiles { k_v: Profile::Constant(-1.0), ..CoefficientProfiles::default() };
        assert!(PdeCoefficients::sample(&g, &bad_k).is_err());
        let c = PdeCoefficients::uniform(&g);
        assert!(wave_viscous_ext(&grid(5), &c).is_err());
        assert_eq!(c.delta, 1.0);
    }

    fn degenerate(n: usize, alpha: f64, s: Profile, kappa: f64) -> (Grid1D, PdeCoefficients) {
        let g = grid(n);
        let profiles = CoefficientProfiles { s_fun: s, alpha_exp: alpha, kappa, ..CoefficientProfiles::default() };
        let coeffs = PdeCoefficients::sample(&g, &profiles).unwrap();
        (g, coeffs)
    }

    #[test]
    fn degenerate_ext_examples() {
        let (g, coeffs) = degenerate(8, 0.5, Profile::Constant(1.0), 0.0);
        let ext = degenerate_ext(&g, &coeffs).unwrap();
        assert_eq!(ext.structure(), Structure::Skew);

        let (g, coeffs) = degenerate(8, 0.5, Profile::Constant(1.0), 1.0);
        let ext = degenerate_ext(&g, &coeffs).unwrap();
        let a = ext.assembled();
        assert!(dissipativity_margin(&a, None).unwrap() <= 1e-12);
        // h-weighted quadratic form equals -kappa |x2(1)|^2
        let v = ComplexVector::from_fn(3 * 8, |i, _| real(((i + 1) as f64 * 0.7).cos()));
        let form = (v.adjoint() * &a * &v)[(0, 0)].re * g.h();
        let x2_end = v[2 * 8 - 1].norm();
        assert!((form + x2_end * x2_end).abs() < 1e-12);
        assert!(form < 0.0);

        let a_s0 = a_s(&ext, &AccretiveOperator::new(identity(8)).unwrap());
        let d1 = flux_divergence(&g);
        let beta = coeffs.beta(&g.nodes_to_right());
        let mut corner: Vec<f64> = beta.iter().map(|b| -b * b).collect();
        corner[7] -= 1.0 / g.h();
        let expected = block2(&ComplexMatrix::zeros(8, 8), &d1, &(-d1.transpose()), &diag_real(&corner));
        assert!(rel(&a_s0, &expected) < 1e-14);
    }

    #[test]
    fn degenerate_diffusivity_examples() {
        let (g, coeffs) = degenerate(10, 0.0, Profile::Constant(3.0), 0.0);
        let a = degenerate_as1(&g, &coeffs).unwrap();
        let d1 = flux_divergence(&g);
        assert!(rel(&a, &(-(&d1 * d1.transpose()).scale(0.75))) < 1e-14);

        // s = 1: flux weights xi^{2a} / (1 + xi^{2a}) = h / (1 + h), 2h / (1 + 2h), ...
        let (g, coeffs) = degenerate(64, 0.5, Profile::Constant(1.0), 0.0);
        let a = degenerate_as1(&g, &coeffs).unwrap();
        let (h, h2) = (g.h(), g.h() * g.h());
        let d0 = -a[(0, 0)].re * h2;
        let d1 = -a[(1, 1)].re * h2 - d0;
        assert!((d0 - h / (1.0 + h)).abs() < 1e-12);
        assert!((d1 - 2.0 * h / (1.0 + 2.0 * h)).abs() < 1e-12);
        assert!(d0 < d1 && d0 < 0.02);
    }

    #[test]
    fn diffusivity_depends_on_s_through_the_harmonic_sum() {
        let (g, coeffs) = degenerate(4, 0.5, Profile::Constant(3.0), 0.0);
        let a = degenerate_as1(&g, &coeffs).unwrap();
        // xi = 1/4: 1 / (1/3 + 4) = 3/13
        assert!((-a[(0, 0)].re * g.h() * g.h() - 3.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_paths_agree() {
        for (alpha, s, kappa) in [
            (0.5, Profile::Constant(1.0), 1.0),
            (0.25, Profile::Linear { a: 1.0, b: 1.0 }, 0.0),
            (0.75, Profile::Linear { a: 1.0, b: 1.0 }, 1.0),
        ] {
            let (g, coeffs) = degenerate(16, alpha, s, kappa);
            let direct = degenerate_as1(&g, &coeffs).unwrap();
            let loops = degenerate_as1_via_loops(&g, &coeffs).unwrap();
            assert!(rel(&loops, &direct) < 1e-9);
            assert!(dissipativity_margin(&direct, None).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn neumann_heat_examples() {
        let g = grid(8);
        let zero_beta = PdeCoefficients { alpha_exp: 0.0, ..PdeCoefficients::uniform(&g) };
        let ext = neumann_heat_ext(&g, &zero_beta).unwrap();
        assert!(dissipativity_margin(&ext.assembled(), None).unwrap() <= 1e-14);

        // alpha = 0 gives beta = 1; with s = 1 the loop halves the Laplacian
        let s = AccretiveOperator::diagonal(&neumann_heat_s(&g, &zero_beta)).unwrap();
        let (div, grad) = grad_div_pair(&g);
        assert!(rel(&a_s(&ext, &s), &(&div * &grad).scale(0.5)) < 1e-14);
        // constants are in the kernel: zero flux at both ends
        let ones = ComplexVector::from_element(8, real(1.0));
        assert!((a_s(&ext, &s) * ones).norm() < 1e-12);

        let (g, coeffs) = degenerate(12, 0.6, Profile::Linear { a: 0.5, b: 2.0 }, 0.0);
        let ext = neumann_heat_ext(&g, &coeffs).unwrap();
        let s = AccretiveOperator::diagonal(&neumann_heat_s(&g, &coeffs)).unwrap();
        assert!(rel(&a_s(&ext, &s), &neumann_heat_as(&g, &coeffs).unwrap()) < 1e-9);
    }

    #[test]
    fn neumann_heat_reduces_to_wave_without_damping() {
        let g = grid(6);
        let (div, grad) = grad_div_pair(&g);
        let ext = ExtendedOperator::from_blocks(ComplexMatrix::zeros(6, 6), div, grad, ComplexMatrix::zeros(5, 5)).unwrap();
        // the same skew pair as the wave operator, with the roles of the two grids swapped
        let wave = wave_ext(&g).assembled();
        let heat = ext.assembled();
        let perm = ComplexMatrix::from_fn(11, 11, |i, j| {
            let target = if i < 6 { i + 5 } else { i - 6 };
            real(if j == target { 1.0 } else { 0.0 })
        });
        assert!(rel(&(&perm * wave * perm.transpose()), &heat) < 1e-15);
    }

    #[test]
    fn dirichlet_eigenvalue_converges_at_second_order() {
        let errors: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| (principal_dirichlet_eigenvalue(&grid(n)).unwrap() - PI * PI).abs())
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.1, "observed order {order}");
        }
    }
}
