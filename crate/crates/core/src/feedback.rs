//! Internal loops through an accretive `S`, static output feedback on the
//! external Cayley node, and the identity between the two constructions.
//!
//! Admissibility is decided by invertibility of the feedthrough factor
//! `I - K D`. With bounded blocks the strictly causal part of the
//! input/output map is a Volterra operator, so `I - K D0^T` is invertible
//! exactly when `I - K D` is; `simkit` cross-checks this against the
//! discretized input/output map.

use std::f64::consts::SQRT_2;

use crate::cayley::{cayley_of_accretive, AccretiveOperator, ContractionOperator};
use crate::error::{LabError, Result};
use crate::numkernel::{hstack, identity, op_norm, ComplexMatrix, Factored, MAX_CONDITION};
use crate::sysnode::{external_cayley, main_operator, ExtendedOperator, SystemNode};

/// Outcome of closing a static output feedback loop.
#[derive(Clone, Debug)]
pub struct FeedbackResult {
    pub admissible: bool,
    pub closed_loop: Option<SystemNode>,
    /// Condition number of `I - K D` relative to `1 + |K D|`.
    pub m_condition: f64,
}

/// Outcome of constraining the loop channel of `A_ext` by `e = S f`.
#[derive(Clone, Debug)]
pub struct InternalLoopResult {
    pub a_s: Option<ComplexMatrix>,
    /// Condition number of `I - A22 S` relative to `1 + |A22 S|`.
    pub loop_solve_condition: f64,
}

impl InternalLoopResult {
    pub fn is_solvable(&self) -> bool {
        self.a_s.is_some()
    }
}

/// `A_S x = z` where `(z, f) = A_ext (x, S f)`.
///
/// Eliminating `f = A21 x + A22 S f` gives
/// `A_S = A11 + A12 S (I - A22 S)^-1 A21` whenever `I - A22 S` is
/// invertible. When it is singular the loop may still define a matrix (see
/// `singular_loop`); otherwise it has a proper domain or a multi-valued part
/// and `a_s` is `None`.
pub fn internal_loop(ext: &ExtendedOperator, s: &AccretiveOperator) -> Result<InternalLoopResult> {
    if s.dim() != ext.n2() {
        return Err(LabError::DimensionMismatch(format!(
            "S is {0}x{0}, loop channel has dimension {1}",
            s.dim(),
            ext.n2()
        )));
    }
    let a22_s = ext.a22() * s.matrix();
    let loop_matrix = identity(ext.n2()) - &a22_s;
    let cond = identity_minus_condition(&loop_matrix, &a22_s);
    if cond < MAX_CONDITION {
        let f_of_x = Factored::new(&loop_matrix, "I - A22 S")?.solve(ext.a21());
        let a_s = ext.a11() + ext.a12() * s.matrix() * f_of_x;
        return Ok(InternalLoopResult { a_s: Some(a_s), loop_solve_condition: cond });
    }
    Ok(InternalLoopResult { a_s: singular_loop(ext, s, &loop_matrix), loop_solve_condition: cond })
}

/// Elimination when `L = I - A22 S` is singular. The loop still defines an
/// everywhere-defined single-valued operator when `A21` maps into `ran L`
/// (every `x` admits some `f`) and `A12 S` vanishes on `ker L` (the choice of
/// `f` does not change `z`). Any particular solution then gives `A_S`.
fn singular_loop(ext: &ExtendedOperator, s: &AccretiveOperator, loop_matrix: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n2 = ext.n2();
    let scale = op_norm(loop_matrix).max(1.0);
    let pinv = loop_matrix.clone().pseudo_inverse(scale / MAX_CONDITION).ok()?;
    let onto_range = loop_matrix * &pinv;
    let onto_kernel = identity(n2) - &pinv * loop_matrix;
    let a12_s = ext.a12() * s.matrix();
    let unreachable = op_norm(&(ext.a21() - &onto_range * ext.a21()));
    let multivalued = op_norm(&(&a12_s * onto_kernel));
    let tol = 1e-10 * (1.0 + op_norm(ext.a21()) + op_norm(&a12_s));
    if unreachable > tol || multivalued > tol {
        return None;
    }
    Some(ext.a11() + a12_s * pinv * ext.a21())
}

/// Condition of `I - X` measured against the scale `1 + |X|` of its terms,
/// so that cancellation to a tiny scalar counts as singular.
fn identity_minus_condition(i_minus_x: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    if i_minus_x.is_empty() {
        return 1.0;
    }
    let smallest = i_minus_x.clone().singular_values().min();
    let scale = op_norm(i_minus_x).max(1.0 + op_norm(x));
    if smallest == 0.0 {
        f64::INFINITY
    } else {
        scale / smallest
    }
}

/// Closes `u = K y + v` around `node` for an arbitrary `m x p` gain.
///
/// With `u = (I - KD)^-1 (K C x + v)`:
/// `A^f = A + B K (I - DK)^-1 C`, `B^f = B (I - KD)^-1`,
/// `C^f = (I - DK)^-1 C`, `D^f = (I - DK)^-1 D`.
pub fn close_loop(node: &SystemNode, k: &ComplexMatrix) -> Result<FeedbackResult> {
    let (m, p) = (node.input_dim(), node.output_dim());
    if k.shape() != (m, p) {
        return Err(LabError::DimensionMismatch(format!(
            "feedback is {:?}, node needs {m}x{p}",
            k.shape()
        )));
    }
    let kd = k * &node.d;
    let i_kd = identity(m) - &kd;
    let m_condition = identity_minus_condition(&i_kd, &kd);
    if !(m_condition < MAX_CONDITION) {
        return Ok(FeedbackResult { admissible: false, closed_loop: None, m_condition });
    }
    let i_dk = identity(p) - &node.d * k;
    let inv_kd = Factored::new(&i_kd, "I - KD")?.inverse();
    let inv_dk = Factored::new(&i_dk, "I - DK")?.inverse();
    let a = &node.a + &node.b * k * &inv_dk * &node.c;
    let b = &node.b * &inv_kd;
    let c = &inv_dk * &node.c;
    let d = &inv_dk * &node.d;
    Ok(FeedbackResult { admissible: true, closed_loop: Some(SystemNode::new(a, b, c, d)?), m_condition })
}

/// Admissibility of the contraction `K` as static output feedback for
/// `node`, together with the closed loop when it exists.
pub fn check_admissible(node: &SystemNode, k: &ContractionOperator) -> Result<FeedbackResult> {
    close_loop(node, k.matrix())
}

/// Main operator of the closed loop obtained by feeding back
/// `K = (S - I)(S + I)^-1` around the external Cayley node of `ext`.
///
/// This is a second route to `A_S`; [`internal_loop`] is the direct one.
pub fn a_s_via_feedback(ext: &ExtendedOperator, s: &AccretiveOperator) -> Result<ComplexMatrix> {
    if s.dim() != ext.n2() {
        return Err(LabError::DimensionMismatch(format!(
            "S is {0}x{0}, loop channel has dimension {1}",
            s.dim(),
            ext.n2()
        )));
    }
    let k = cayley_of_accretive(s)?;
    let node = external_cayley(ext)?;
    let fb = check_admissible(&node, &k)?;
    match fb.closed_loop {
        Some(closed) => Ok(main_operator(&closed)),
        None => Err(LabError::Inadmissible { m_condition: fb.m_condition }),
    }
}

/// The node `[[A11, A12/sqrt2], [A21/sqrt2, (A22 + I)/2]]`, i.e. the closed
/// loop of the external Cayley node under `K = -I`.
pub fn minus_identity_closed_loop(ext: &ExtendedOperator) -> Result<SystemNode> {
    let n2 = ext.n2();
    let a = ext.a11().clone();
    let b = ext.a12().unscale(SQRT_2);
    let c = ext.a21().unscale(SQRT_2);
    let d = (ext.a22() + identity(n2)).scale(0.5);
    SystemNode::new(a, b, c, d)
}

/// Feedback gain of the closed loop written as a single operator
/// `[[A^f, B^f], [C^f, D^f]]`.
pub fn node_matrix(node: &SystemNode) -> ComplexMatrix {
    crate::numkernel::vstack(&[&hstack(&[&node.a, &node.b]), &hstack(&[&node.c, &node.d])])
}
