//! Time stepping, node trajectories with a scattering ledger, and norms of
//! the discretized input/output map.
//!
//! Inputs are held constant on each step. For the input/output map both the
//! input and the output are projected onto step functions, so the assembled
//! block Toeplitz matrix is a compression of the true map and its norm
//! approaches `|D_0^T|` from below as the step shrinks.

use crate::error::{LabError, Result};
use crate::numkernel::{
    block2, expm, identity, op_norm, vector_norm, ComplexMatrix, ComplexVector, Factored, Gram,
};
use crate::sysnode::SystemNode;

/// Largest Toeplitz dimension handled by a dense SVD.
pub const DENSE_SVD_LIMIT: usize = 1024;
/// Largest number of steps handled by a dense SVD.
pub const DENSE_SVD_MAX_STEPS: usize = 512;

const POWER_MAX_ITERS: usize = 2000;
const POWER_REL_TOL: f64 = 1e-12;

/// `(I - dt/2 A)^-1 (I + dt/2 A)`.
pub fn cn_step(a: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    let n = crate::numkernel::ensure_square(a)?;
    let half = a.scale(dt / 2.0);
    Factored::new(&(identity(n) - &half), "I - dt/2 A").map(|f| f.solve(&(identity(n) + half)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stepper {
    Expm,
    CrankNicolson,
}

impl Stepper {
    pub fn step_matrix(&self, a: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
        match self {
            Stepper::Expm => expm(a, dt),
            Stepper::CrankNicolson => cn_step(a, dt),
        }
    }
}

/// Energy balance of a node trajectory over `[0, T]`.
///
/// `output_energy` is the exact integral of `|y(t)|^2` for the held input,
/// so for a passive node `final_energy + output_energy <= initial_energy +
/// input_energy` holds without discretization error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassivityLedger {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub input_energy: f64,
    pub output_energy: f64,
    /// `sum |y_k|^2 dt` over the sampled outputs, for reference.
    pub sampled_output_energy: f64,
}

impl PassivityLedger {
    /// `initial + input - final - output`; nonnegative for passive nodes.
    pub fn slack(&self) -> f64 {
        self.initial_energy + self.input_energy - self.final_energy - self.output_energy
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack() >= -tol * (1.0 + self.initial_energy + self.input_energy)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Empty vectors for autonomous runs.
    pub u_samples: Vec<ComplexVector>,
    pub x_samples: Vec<ComplexVector>,
    /// Empty vectors for autonomous runs.
    pub y_samples: Vec<ComplexVector>,
    pub energy: Vec<f64>,
    pub ledger: Option<PassivityLedger>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest per-step energy increase (negative when strictly decaying).
    pub fn max_energy_increase(&self) -> f64 {
        self.energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Number of steps of size `dt` covering `[0, t_final]`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::InvalidParameter { name: "dt", reason: format!("{dt} is not positive") });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(LabError::InvalidParameter { name: "T", reason: format!("{t_final} is not a valid horizon") });
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
        return Err(LabError::InvalidParameter { name: "dt", reason: format!("{dt} does not divide T = {t_final}") });
    }
    Ok(steps as usize)
}

fn energy_of(x: &ComplexVector, gram: Option<&Gram>) -> f64 {
    match gram {
        Some(g) => g.norm_squared(x),
        None => {
            let v = vector_norm(x);
            v * v
        }
    }
}

pub fn simulate_semigroup(
    a: &ComplexMatrix,
    gram: Option<&Gram>,
    x0: &ComplexVector,
    t_final: f64,
    dt: f64,
    stepper: Stepper,
) -> Result<Trajectory> {
    let n = crate::numkernel::ensure_square(a)?;
    if x0.len() != n {
        return Err(LabError::DimensionMismatch(format!("x0 has length {}, A is {n}x{n}", x0.len())));
    }
    if let Some(g) = gram {
        if g.dim() != n {
            return Err(LabError::DimensionMismatch(format!("gram is {0}x{0}, A is {n}x{n}", g.dim())));
        }
    }
    let steps = step_count(t_final, dt)?;
    let step = stepper.step_matrix(a, dt)?;
    let mut x = x0.clone();
    let mut traj = Trajectory {
        dt,
        times: Vec::with_capacity(steps + 1),
        u_samples: Vec::with_capacity(steps + 1),
        x_samples: Vec::with_capacity(steps + 1),
        y_samples: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        ledger: None,
    };
    for k in 0..=steps {
        if k > 0 {
            x = &step * &x;
        }
        traj.times.push(k as f64 * dt);
        traj.energy.push(energy_of(&x, gram));
        traj.u_samples.push(ComplexVector::zeros(0));
        traj.y_samples.push(ComplexVector::zeros(0));
        traj.x_samples.push(x.clone());
    }
    Ok(traj)
}

/// Exact zero-order-hold simulation of `x' = Ax + Bu`, `y = Cx + Du`.
///
/// `u` holds one sample per step boundary (`N + 1` samples for `N` steps);
/// `u_k` is held on `[t_k, t_{k+1})` and the last sample only enters `y_N`.
pub fn simulate_node(
    node: &SystemNode,
    x0: &ComplexVector,
    u: &[ComplexVector],
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    let (n, m) = (node.state_dim(), node.input_dim());
    if x0.len() != n {
        return Err(LabError::DimensionMismatch(format!("x0 has length {}, state dimension is {n}", x0.len())));
    }
    let steps = step_count(t_final, dt)?;
    if u.len() != steps + 1 {
        return Err(LabError::DimensionMismatch(format!("{} input samples for {steps} steps", u.len())));
    }
    if let Some(bad) = u.iter().find(|v| v.len() != m) {
        return Err(LabError::DimensionMismatch(format!("input sample of length {}, expected {m}", bad.len())));
    }
    let hold = zoh_matrices(node, dt)?;
    let mut x = x0.clone();
    let mut traj = Trajectory {
        dt,
        times: Vec::with_capacity(steps + 1),
        u_samples: u.to_vec(),
        x_samples: Vec::with_capacity(steps + 1),
        y_samples: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        ledger: None,
    };
    let (mut input_energy, mut output_energy, mut sampled) = (0.0, 0.0, 0.0);
    for k in 0..=steps {
        let y = &node.c * &x + &node.d * &u[k];
        traj.times.push(k as f64 * dt);
        traj.energy.push(energy_of(&x, None));
        traj.x_samples.push(x.clone());
        if k < steps {
            let v = vector_norm(&u[k]);
            input_energy += v * v * dt;
            let w = vector_norm(&y);
            sampled += w * w * dt;
            let z = ComplexVector::from_iterator(x.len() + m, x.iter().chain(u[k].iter()).copied());
            output_energy += z.dotc(&(&hold.output_gram * &z)).re;
            x = &hold.state * &x + &hold.input * &u[k];
        }
        traj.y_samples.push(y);
    }
    traj.ledger = Some(PassivityLedger {
        initial_energy: energy_of(x0, None),
        final_energy: energy_of(&x, None),
        input_energy,
        output_energy,
        sampled_output_energy: sampled,
    });
    Ok(traj)
}

/// Per-step maps for a held input.
#[derive(Clone, Debug)]
pub struct ZeroOrderHold {
    /// `e^{A dt}`.
    pub state: ComplexMatrix,
    /// `(int_0^dt e^{As} ds) B`.
    pub input: ComplexMatrix,
    /// `W` with `int_0^dt |y|^2 = z* W z` for `z = (x_k, u_k)`.
    pub output_gram: ComplexMatrix,
}

/// Exponential of `F = [[A, B], [0, 0]]` for the state update, and the
/// output Gram `int_0^dt e^{F*t} H*H e^{Ft} dt` with `H = [C, D]` via the
/// Van Loan block exponential.
pub fn zoh_matrices(node: &SystemNode, dt: f64) -> Result<ZeroOrderHold> {
    let (n, m) = (node.state_dim(), node.input_dim());
    let f = block2(&node.a, &node.b, &ComplexMatrix::zeros(m, n), &ComplexMatrix::zeros(m, m));
    let h = crate::numkernel::hstack(&[&node.c, &node.d]);
    let q = h.adjoint() * &h;
    let k = n + m;
    let van_loan = block2(&(-f.adjoint()), &q, &ComplexMatrix::zeros(k, k), &f);
    let big = expm(&van_loan, dt)?;
    let e_f = big.view((k, k), (k, k)).into_owned();
    let upper = big.view((0, k), (k, k)).into_owned();
    let mut output_gram = e_f.adjoint() * upper;
    output_gram = (&output_gram + output_gram.adjoint()).scale(0.5);
    Ok(ZeroOrderHold {
        state: e_f.view((0, 0), (n, n)).into_owned(),
        input: e_f.view((0, n), (n, m)).into_owned(),
        output_gram,
    })
}

/// `(e^{A dt}, int_0^dt e^{As} ds, int_0^dt (dt - s) e^{As} ds)` from one
/// exponential of `[[A, I, 0], [0, 0, I], [0, 0, 0]] dt`.
pub fn step_integrals(a: &ComplexMatrix, dt: f64) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let n = crate::numkernel::ensure_square(a)?;
    let mut big = ComplexMatrix::zeros(3 * n, 3 * n);
    big.view_mut((0, 0), (n, n)).copy_from(a);
    big.view_mut((0, n), (n, n)).copy_from(&identity(n));
    big.view_mut((n, 2 * n), (n, n)).copy_from(&identity(n));
    let e = expm(&big, dt)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
        e.view((0, 2 * n), (n, n)).into_owned(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IoNormMethod {
    ToeplitzSvd,
    PowerIteration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IoMapEstimate {
    pub horizon: f64,
    pub nsteps: usize,
    pub norm_estimate: f64,
    pub method: IoNormMethod,
    /// `|C| |B| dt`, the scale of the projection error of the strictly
    /// causal part; the estimate never exceeds the true norm.
    pub bias: f64,
}

/// Blocks of the step-function compression of the input/output map:
/// `blocks[0] = D + C Psi2 B / dt` and
/// `blocks[k] = C e^{A (k-1) dt} Psi1^2 B / dt` for `k >= 1`.
pub struct IoToeplitz {
    pub blocks: Vec<ComplexMatrix>,
    pub dt: f64,
}

impl IoToeplitz {
    pub fn new(node: &SystemNode, t_final: f64, nsteps: usize) -> Result<Self> {
        if nsteps < 4 {
            return Err(LabError::InvalidParameter { name: "nsteps", reason: format!("{nsteps} < 4") });
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(LabError::InvalidParameter { name: "T", reason: format!("{t_final} is not positive") });
        }
        let dt = t_final / nsteps as f64;
        let (step, psi1, psi2) = step_integrals(&node.a, dt)?;
        let mut blocks = Vec::with_capacity(nsteps);
        blocks.push(&node.d + (&node.c * psi2 * &node.b).unscale(dt));
        let mut left = node.c.clone();
        let right = (&psi1 * &psi1 * &node.b).unscale(dt);
        for _ in 1..nsteps {
            blocks.push(&left * &right);
            left = &left * &step;
        }
        Ok(Self { blocks, dt })
    }

    pub fn nsteps(&self) -> usize {
        self.blocks.len()
    }

    /// Dense block lower-triangular matrix, optionally without the `D`
    /// blocks on the diagonal.
    pub fn dense(&self, feedthrough_removed: Option<&ComplexMatrix>) -> ComplexMatrix {
        let (p, m) = self.blocks[0].shape();
        let n = self.nsteps();
        let mut t = ComplexMatrix::zeros(n * p, n * m);
        for i in 0..n {
            for j in 0..=i {
                t.view_mut((i * p, j * m), (p, m)).copy_from(&self.blocks[i - j]);
            }
            if let Some(d) = feedthrough_removed {
                let mut diag = t.view_mut((i * p, i * m), (p, m));
                diag -= d;
            }
        }
        t
    }

    fn apply(&self, u: &[ComplexVector], feedthrough_removed: Option<&ComplexMatrix>) -> Vec<ComplexVector> {
        let p = self.blocks[0].nrows();
        (0..u.len())
            .map(|i| {
                let mut y = ComplexVector::zeros(p);
                for j in 0..=i {
                    y += &self.blocks[i - j] * &u[j];
                }
                if let Some(d) = feedthrough_removed {
                    y -= d * &u[i];
                }
                y
            })
            .collect()
    }

    fn apply_adjoint(&self, y: &[ComplexVector], feedthrough_removed: Option<&ComplexMatrix>) -> Vec<ComplexVector> {
        let m = self.blocks[0].ncols();
        let n = y.len();
        (0..n)
            .map(|j| {
                let mut u = ComplexVector::zeros(m);
                for i in j..n {
                    u += self.blocks[i - j].adjoint() * &y[i];
                }
                if let Some(d) = feedthrough_removed {
                    u -= d.adjoint() * &y[j];
                }
                u
            })
            .collect()
    }

    /// Operator norm, dense SVD for small problems and power iteration on
    /// `T* T` otherwise.
    pub fn norm(&self, feedthrough_removed: Option<&ComplexMatrix>) -> (f64, IoNormMethod) {
        let (p, m) = self.blocks[0].shape();
        let n = self.nsteps();
        if n <= DENSE_SVD_MAX_STEPS && n * p.max(m) <= DENSE_SVD_LIMIT {
            return (op_norm(&self.dense(feedthrough_removed)), IoNormMethod::ToeplitzSvd);
        }
        (self.power_norm(feedthrough_removed), IoNormMethod::PowerIteration)
    }

    /// Power iteration on `T* T` from the all-ones input.
    pub fn power_norm(&self, feedthrough_removed: Option<&ComplexMatrix>) -> f64 {
        let (m, n) = (self.blocks[0].ncols(), self.nsteps());
        let norm_of = |v: &[ComplexVector]| v.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
        let mut u: Vec<ComplexVector> = vec![ComplexVector::from_element(m, crate::numkernel::real(1.0)); n];
        let mut estimate = 0.0;
        for _ in 0..POWER_MAX_ITERS {
            let scale = norm_of(&u);
            if scale == 0.0 {
                return 0.0;
            }
            u.iter_mut().for_each(|b| *b /= crate::numkernel::real(scale));
            let y = self.apply(&u, feedthrough_removed);
            let next = norm_of(&y);
            u = self.apply_adjoint(&y, feedthrough_removed);
            if (next - estimate).abs() <= POWER_REL_TOL * next {
                estimate = next;
                break;
            }
            estimate = next;
        }
        estimate
    }
}

/// Estimate of `|D_0^T|` from `nsteps` held steps.
pub fn io_map_norm(node: &SystemNode, t_final: f64, nsteps: usize) -> Result<IoMapEstimate> {
    let toeplitz = IoToeplitz::new(node, t_final, nsteps)?;
    let (norm_estimate, method) = toeplitz.norm(None);
    Ok(IoMapEstimate {
        horizon: t_final,
        nsteps,
        norm_estimate,
        method,
        bias: op_norm(&node.c) * op_norm(&node.b) * toeplitz.dt,
    })
}

/// `|D_0^T - Lambda_D^T|` for each horizon, where `Lambda_D^T` is
/// multiplication by `D`.
pub fn feedthrough_deviation(node: &SystemNode, horizons: &[f64], nsteps: usize) -> Result<Vec<f64>> {
    horizons
        .iter()
        .map(|&t| Ok(IoToeplitz::new(node, t, nsteps)?.norm(Some(&node.d)).0))
        .collect()
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(LabError::DimensionMismatch(format!("{} abscissae, {} ordinates", xs.len(), ys.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidParameter { name: "xs", reason: "all abscissae coincide".into() });
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit { slope, intercept: my - slope * mx })
}

/// Largest `eps` with `|x(T)|^2 >= eps int |u|^2` over inputs held on
/// `nsteps` steps from `x(0) = 0`. Zero whenever the held inputs outnumber
/// the state dimension.
pub fn input_to_state_floor(node: &SystemNode, t_final: f64, nsteps: usize) -> Result<f64> {
    let (n, m) = (node.state_dim(), node.input_dim());
    if nsteps == 0 {
        return Err(LabError::InvalidParameter { name: "nsteps", reason: "zero".into() });
    }
    if nsteps * m > n {
        return Ok(0.0);
    }
    let dt = t_final / nsteps as f64;
    let (step, psi1, _) = step_integrals(&node.a, dt)?;
    // orthonormal step functions carry amplitude 1/sqrt(dt)
    let last = (psi1 * &node.b).unscale(dt.sqrt());
    let mut reach = ComplexMatrix::zeros(n, nsteps * m);
    let mut block = last;
    for j in (0..nsteps).rev() {
        reach.view_mut((0, j * m), (n, m)).copy_from(&block);
        block = &step * block;
    }
    let smallest = reach.singular_values().min();
    Ok(smallest * smallest)
}

/// Upwind transport `x_t = -x_xi` on `(0, 1)` with `n_cells` cells, inflow
/// `u` at `xi = 0` and outflow `y` at `xi = 1`, scaled so that the state
/// norm is the `L^2` norm. A finite-dimensional stand-in for the outgoing
/// shift.
pub fn transport_node(n_cells: usize) -> Result<SystemNode> {
    if n_cells == 0 {
        return Err(LabError::InvalidParameter { name: "n_cells", reason: "zero".into() });
    }
    let h = 1.0 / n_cells as f64;
    let mut a = identity(n_cells).scale(-1.0 / h);
    for i in 1..n_cells {
        a[(i, i - 1)] = crate::numkernel::real(1.0 / h);
    }
    let mut b = ComplexMatrix::zeros(n_cells, 1);
    b[(0, 0)] = crate::numkernel::real(1.0 / h.sqrt());
    let mut c = ComplexMatrix::zeros(1, n_cells);
    c[(0, n_cells - 1)] = crate::numkernel::real(1.0 / h.sqrt());
    SystemNode::new(a, b, c, ComplexMatrix::zeros(1, 1))
}
