//! Input/output map norms over growing horizons for a few nodes.

use contraction_lab::numkernel::{from_real_rows, op_norm};
use contraction_lab::pdelab::{wave_ext, wave_viscous_ext, Grid1D, PdeCoefficients};
use contraction_lab::simkit::{feedthrough_deviation, fit_line, io_map_norm};
use contraction_lab::sysnode::{external_cayley, SystemNode};

fn main() -> contraction_lab::Result<()> {
    let grid = Grid1D::new(8)?;
    let one = |v: f64| from_real_rows(1, 1, &[v]);
    let nodes = [
        ("wave Cayley", external_cayley(&wave_ext(&grid))?),
        ("integrator", SystemNode::new(one(0.0), one(1.0), one(1.0), one(0.0))?),
        ("feedthrough 0.5", SystemNode::new(one(0.0), one(0.0), one(0.0), one(0.5))?),
    ];
    for (name, node) in &nodes {
        let row: Vec<String> = [0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|&t| io_map_norm(node, t, (t * 32.0) as usize).map(|e| format!("{:.4}", e.norm_estimate)))
            .collect::<contraction_lab::Result<_>>()?;
        println!("{name:>16}: {}", row.join("  "));
    }

    let viscous = external_cayley(&wave_viscous_ext(&grid, &PdeCoefficients::uniform(&grid))?.ext)?;
    let horizons = [0.05, 0.1, 0.2, 0.4];
    let dev = feedthrough_deviation(&viscous, &horizons, 32)?;
    let fit = fit_line(&horizons, &dev)?;
    println!("viscous |D| = {:.4}, |D_0^T - D| = {dev:.4?}", op_norm(&viscous.d));
    println!("least-squares line: slope {:.4}, intercept {:.4}", fit.slope, fit.intercept);
    Ok(())
}
