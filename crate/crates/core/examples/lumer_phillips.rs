//! Dissipative generators give contraction semigroups; shifted ones do not.

use contraction_lab::ensembles::{self, rng_from_seed};
use contraction_lab::numkernel::{contraction_certificate, dissipativity_margin};

fn main() -> contraction_lab::Result<()> {
    let mut rng = rng_from_seed(0);
    let times = [0.1, 1.0, 10.0];
    for (label, a) in [
        ("dissipative", ensembles::dissipative(&mut rng, 6)),
        ("shifted by +0.5", ensembles::shifted(&mut rng, 6, -0.5)),
    ] {
        let margin = dissipativity_margin(&a, None)?;
        let cert = contraction_certificate(&a, None, &times, 1e-10)?;
        println!(
            "{label:>16}: margin {margin:+.3e}, max |e^(At)| over t in {times:?} = {:.6}, contraction: {}",
            cert.max_norm(),
            cert.passed
        );
    }
    Ok(())
}
