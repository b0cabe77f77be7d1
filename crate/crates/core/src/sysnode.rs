//! Extended operators with a loop channel, finite-dimensional system nodes,
//! the external Cayley system transform and the scattering-passivity LMI.

use std::f64::consts::SQRT_2;

use crate::error::{LabError, Result};
use crate::numkernel::{
    block2, dissipativity_margin, ensure_finite, identity, lambda_max_hermitian, op_norm, ComplexMatrix,
    ComplexVector, Factored,
};

/// Tolerance used when verifying the `Skew` and `Dissipative` flags.
pub const FLAG_TOL: f64 = 1e-10;

/// Tolerance for [`SystemNode::is_passive`].
pub const PASSIVITY_TOL: f64 = 1e-9;

/// Structural property an [`ExtendedOperator`] is certified to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Unchecked,
    Dissipative,
    Skew,
}

/// Operator on `X1 x X2` split as `[[A11, A12], [A21, A22]]`, where `X1` is
/// the state and `X2` the loop channel.
#[derive(Clone, Debug)]
pub struct ExtendedOperator {
    n1: usize,
    n2: usize,
    a11: ComplexMatrix,
    a12: ComplexMatrix,
    a21: ComplexMatrix,
    a22: ComplexMatrix,
    structure: Structure,
}

impl ExtendedOperator {
    pub fn from_blocks(
        a11: ComplexMatrix,
        a12: ComplexMatrix,
        a21: ComplexMatrix,
        a22: ComplexMatrix,
    ) -> Result<Self> {
        let n1 = a11.nrows();
        let n2 = a22.nrows();
        let shapes_ok = a11.ncols() == n1
            && a22.ncols() == n2
            && a12.shape() == (n1, n2)
            && a21.shape() == (n2, n1);
        if !shapes_ok {
            return Err(LabError::DimensionMismatch(format!(
                "blocks {:?} {:?} / {:?} {:?} do not form a square 2x2 partition",
                a11.shape(),
                a12.shape(),
                a21.shape(),
                a22.shape()
            )));
        }
        for b in [&a11, &a12, &a21, &a22] {
            ensure_finite(b)?;
        }
        Ok(Self { n1, n2, a11, a12, a21, a22, structure: Structure::Unchecked })
    }

    /// Splits an assembled `(n1 + n2)`-square matrix after its first `n1`
    /// rows and columns.
    pub fn from_assembled(m: &ComplexMatrix, n1: usize) -> Result<Self> {
        let n = crate::numkernel::ensure_square(m)?;
        if n1 > n {
            return Err(LabError::DimensionMismatch(format!("n1 = {n1} exceeds size {n}")));
        }
        let n2 = n - n1;
        Self::from_blocks(
            m.view((0, 0), (n1, n1)).into_owned(),
            m.view((0, n1), (n1, n2)).into_owned(),
            m.view((n1, 0), (n2, n1)).into_owned(),
            m.view((n1, n1), (n2, n2)).into_owned(),
        )
    }

    /// Verifies and records a structural flag.
    pub fn with_structure(mut self, structure: Structure) -> Result<Self> {
        match structure {
            Structure::Unchecked => {}
            Structure::Dissipative => {
                let margin = dissipativity_margin(&self.assembled(), None)?;
                if margin > FLAG_TOL {
                    return Err(LabError::FlagViolated(format!("dissipativity margin {margin:e}")));
                }
            }
            Structure::Skew => {
                let defect = self.skew_defect();
                if defect > FLAG_TOL {
                    return Err(LabError::FlagViolated(format!("relative skew defect {defect:e}")));
                }
            }
        }
        self.structure = structure;
        Ok(self)
    }

    /// `|A + A*| / (1 + |A|)`.
    pub fn skew_defect(&self) -> f64 {
        let a = self.assembled();
        op_norm(&(&a + a.adjoint())) / (1.0 + op_norm(&a))
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn a11(&self) -> &ComplexMatrix {
        &self.a11
    }

    pub fn a12(&self) -> &ComplexMatrix {
        &self.a12
    }

    pub fn a21(&self) -> &ComplexMatrix {
        &self.a21
    }

    pub fn a22(&self) -> &ComplexMatrix {
        &self.a22
    }

    pub fn assembled(&self) -> ComplexMatrix {
        block2(&self.a11, &self.a12, &self.a21, &self.a22)
    }

    /// `(z, f) = A_ext (x, e)`.
    pub fn apply(&self, x: &ComplexVector, e: &ComplexVector) -> Result<(ComplexVector, ComplexVector)> {
        if x.len() != self.n1 || e.len() != self.n2 {
            return Err(LabError::DimensionMismatch(format!(
                "expected ({}, {}), got ({}, {})",
                self.n1,
                self.n2,
                x.len(),
                e.len()
            )));
        }
        let z = &self.a11 * x + &self.a12 * e;
        let f = &self.a21 * x + &self.a22 * e;
        Ok((z, f))
    }
}

/// Finite-dimensional system node `[[A, B], [C, D]]` with its cached
/// passivity margin.
#[derive(Clone, Debug)]
pub struct SystemNode {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
    passivity_margin: f64,
}

impl SystemNode {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix, d: ComplexMatrix) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let p = c.nrows();
        let ok = a.ncols() == n && b.nrows() == n && c.ncols() == n && d.shape() == (p, m);
        if !ok {
            return Err(LabError::DimensionMismatch(format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for blk in [&a, &b, &c, &d] {
            ensure_finite(blk)?;
        }
        let passivity_margin = passivity_lmi_max(&a, &b, &c, &d);
        Ok(Self { a, b, c, d, passivity_margin })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn passivity_margin(&self) -> f64 {
        self.passivity_margin
    }

    pub fn is_passive(&self) -> bool {
        self.passivity_margin <= PASSIVITY_TOL
    }
}

fn passivity_lmi_max(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> f64 {
    let m = b.ncols();
    let ch = c.adjoint();
    let top_left = a + a.adjoint() + &ch * c;
    let top_right = b + &ch * d;
    let bottom_right = d.adjoint() * d - identity(m);
    let lmi = block2(&top_left, &top_right, &top_right.adjoint(), &bottom_right);
    lambda_max_hermitian(&lmi).expect("square by construction")
}

/// Largest eigenvalue of
/// `[[A + A* + C*C, B + C*D], [B* + D*C, D*D - I]]`, the quadratic form of
/// `2 Re<z, x> - |u|^2 + |y|^2` over `(x, u)`. The node is scattering
/// passive iff the result is at most `tol`.
pub fn passivity_check(node: &SystemNode, tol: f64) -> (f64, bool) {
    let value = node.passivity_margin;
    (value, value <= tol)
}

/// Main operator: `x -> A&B (x, 0)`.
pub fn main_operator(node: &SystemNode) -> ComplexMatrix {
    node.a.clone()
}

/// `(z, y) = (Ax + Bu, Cx + Du)`.
pub fn node_apply(node: &SystemNode, x: &ComplexVector, u: &ComplexVector) -> Result<(ComplexVector, ComplexVector)> {
    if x.len() != node.state_dim() || u.len() != node.input_dim() {
        return Err(LabError::DimensionMismatch(format!(
            "node expects state {} and input {}, got {} and {}",
            node.state_dim(),
            node.input_dim(),
            x.len(),
            u.len()
        )));
    }
    Ok((&node.a * x + &node.b * u, &node.c * x + &node.d * u))
}

/// External Cayley system transform: the node mapping `(x, (e - f)/sqrt 2)`
/// to `(z, (e + f)/sqrt 2)` where `(z, f) = A_ext (x, e)`.
///
/// Eliminating `e` gives, with `R = (I - A22)^-1`,
/// `A = A11 + A12 R A21`, `B = sqrt2 A12 R`, `C = sqrt2 R A21`,
/// `D = (I + A22) R`.
pub fn external_cayley(ext: &ExtendedOperator) -> Result<SystemNode> {
    let id = identity(ext.n2());
    let resolvent = Factored::new(&(&id - ext.a22()), "I - A22")?.inverse();
    let a12r = ext.a12() * &resolvent;
    let a = ext.a11() + &a12r * ext.a21();
    let b = a12r.scale(SQRT_2);
    let c = (&resolvent * ext.a21()).scale(SQRT_2);
    let d = (&id + ext.a22()) * &resolvent;
    SystemNode::new(a, b, c, d)
}
