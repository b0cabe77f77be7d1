//! Operator Cayley transform of a uniformly accretive matrix and the
//! quantitative bounds linking `S` and `K`.

use contraction_lab::cayley::{
    accretive_of_contraction, accretivity_lower_bound, cayley_of_accretive, s_norm_bound, strict_contraction_bound,
    AccretiveOperator,
};
use contraction_lab::ensembles::{self, rng_from_seed};
use contraction_lab::numkernel::{lambda_min_hermitian, op_norm};

fn main() -> contraction_lab::Result<()> {
    let mut rng = rng_from_seed(3);
    let s = AccretiveOperator::new(ensembles::accretive(&mut rng, 5, 0.2))?;
    let k = cayley_of_accretive(&s)?;
    let back = accretive_of_contraction(&k)?;

    println!("delta(S)            = {:.6}", s.delta());
    println!("|K|                 = {:.6} <= {:.6}", k.norm(), strict_contraction_bound(&s)?);
    println!("min Herm(S)         = {:.6} >= {:.6}", lambda_min_hermitian(back.matrix())?, accretivity_lower_bound(&k)?);
    println!("|S|                 = {:.6} <= {:.6}", op_norm(s.matrix()), s_norm_bound(&k)?);
    println!("round trip |S' - S| = {:.3e}", op_norm(&(back.matrix() - s.matrix())));
    Ok(())
}
