//! Closing the Cayley node with the Cayley transform of `S` reproduces the
//! internal loop `A_S`.

use contraction_lab::cayley::AccretiveOperator;
use contraction_lab::ensembles::{self, rng_from_seed};
use contraction_lab::feedback::{a_s_via_feedback, internal_loop};
use contraction_lab::numkernel::{contraction_certificate, dissipativity_margin, op_norm};
use contraction_lab::sysnode::ExtendedOperator;

fn main() -> contraction_lab::Result<()> {
    let mut rng = rng_from_seed(11);
    let (n1, n2) = (6, 3);
    let ext = ExtendedOperator::from_assembled(&ensembles::dissipative(&mut rng, n1 + n2), n1)?;
    let s = AccretiveOperator::new(ensembles::accretive(&mut rng, n2, 0.1))?;

    let direct = internal_loop(&ext, &s)?.a_s.expect("uniformly accretive S gives a regular loop");
    let via_feedback = a_s_via_feedback(&ext, &s)?;
    println!("|A^f - A_S| = {:.3e}", op_norm(&(&via_feedback - &direct)));
    println!("margin of A_S = {:+.3e}", dissipativity_margin(&direct, None)?);
    let cert = contraction_certificate(&direct, None, &[0.1, 1.0, 10.0], 1e-10)?;
    println!("max |e^(A_S t)| = {:.6} (passed: {})", cert.max_norm(), cert.passed);
    Ok(())
}
