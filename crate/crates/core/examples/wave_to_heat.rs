//! The staggered 1-D wave operator, its external Cayley node, and the heat
//! generator obtained from it by an internal loop.

use std::f64::consts::PI;

use contraction_lab::cayley::AccretiveOperator;
use contraction_lab::feedback::internal_loop;
use contraction_lab::numkernel::{hermitian_eigenvalues, op_norm};
use contraction_lab::pdelab::{grad_div_pair, wave_ext, Grid1D};
use contraction_lab::sysnode::{external_cayley, passivity_check};

fn main() -> contraction_lab::Result<()> {
    let grid = Grid1D::new(32)?;
    let ext = wave_ext(&grid);
    println!("wave ext skew defect: {:.1e}", ext.skew_defect());

    let node = external_cayley(&ext)?;
    let (g, dv) = grad_div_pair(&grid);
    println!("Cayley main operator equals Dv G: {:.1e}", op_norm(&(&node.a - &dv * &g)));
    println!("passivity LMI eigenvalue: {:.3e}", passivity_check(&node, 1e-9).0);

    let s = AccretiveOperator::diagonal(&vec![2.0; grid.n_cells()])?;
    let heat = internal_loop(&ext, &s)?.a_s.expect("regular loop");
    let mut spectrum = hermitian_eigenvalues(&(-&heat))?;
    spectrum.sort_by(f64::total_cmp);
    println!("smallest decay rates {:.4?} (continuum 2 pi^2 k^2: {:.4?})", &spectrum[..3], [1, 2, 3].map(|k| 2.0 * PI * PI * (k * k) as f64));
    Ok(())
}
