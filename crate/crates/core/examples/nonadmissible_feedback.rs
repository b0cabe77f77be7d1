//! A feedback that is not admissible although the internal loop is a fine
//! generator, and a multivalued loop that has no generator at all.

use contraction_lab::cayley::{cayley_of_accretive, AccretiveOperator};
use contraction_lab::feedback::{check_admissible, internal_loop};
use contraction_lab::numkernel::{c, real, ComplexMatrix};
use contraction_lab::sysnode::{external_cayley, ExtendedOperator};

fn scalar(z: contraction_lab::numkernel::C64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, z)
}

fn main() -> contraction_lab::Result<()> {
    let i = c(0.0, 1.0);
    let zero = real(0.0);
    let s = AccretiveOperator::new(scalar(i))?;

    let ext = ExtendedOperator::from_blocks(scalar(zero), scalar(zero), scalar(zero), scalar(-i))?;
    let node = external_cayley(&ext)?;
    let k = cayley_of_accretive(&s)?;
    let fb = check_admissible(&node, &k)?;
    println!("D = {}, K = {}, 1 - KD = {}", node.d[(0, 0)], k.matrix()[(0, 0)], real(1.0) - k.matrix()[(0, 0)] * node.d[(0, 0)]);
    println!("admissible: {} (conditioning {:.2e})", fb.admissible, fb.m_condition);
    println!("internal loop A_S = {:?}", internal_loop(&ext, &s)?.a_s.map(|m| m[(0, 0)]));

    let multi = ExtendedOperator::from_blocks(scalar(zero), scalar(i), scalar(i), scalar(-i))?;
    println!("multivalued loop solvable: {}", internal_loop(&multi, &s)?.is_solvable());
    Ok(())
}
