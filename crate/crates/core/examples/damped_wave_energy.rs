//! Energy of viscous, structural and combined damped waves under
//! Crank-Nicolson, against the undamped wave.

use contraction_lab::ensembles::{self, rng_from_seed};
use contraction_lab::pdelab::{
    wave_combined_ext, wave_structural_ext, wave_viscous_ext, CoefficientProfiles, Grid1D, PdeCoefficients, Profile,
};
use contraction_lab::simkit::{simulate_semigroup, Stepper};

fn main() -> contraction_lab::Result<()> {
    let grid = Grid1D::new(64)?;
    let coeffs = |k_v: f64, k_s: f64| {
        let profiles = CoefficientProfiles {
            k_v: Profile::Constant(k_v),
            k_s: Profile::Constant(k_s),
            ..CoefficientProfiles::default()
        };
        PdeCoefficients::sample(&grid, &profiles)
    };
    let mut rng = rng_from_seed(0);
    for (name, fixture) in [
        ("undamped", wave_viscous_ext(&grid, &coeffs(0.0, 0.0)?)?),
        ("viscous", wave_viscous_ext(&grid, &coeffs(1.0, 0.0)?)?),
        ("structural", wave_structural_ext(&grid, &coeffs(0.0, 1.0)?)?),
        ("combined", wave_combined_ext(&grid, &coeffs(1.0, 1.0)?)?),
    ] {
        let a = fixture.energy_generator()?;
        let x0 = ensembles::vector(&mut rng, a.nrows());
        let traj = simulate_semigroup(&a, Some(&fixture.gram), &x0, 5.0, 0.01, Stepper::CrankNicolson)?;
        let e0 = traj.energy[0];
        println!(
            "{name:>10}: E(5)/E(0) = {:.6}, largest step increase {:.2e}",
            traj.energy[traj.len() - 1] / e0,
            traj.max_energy_increase() / e0
        );
    }
    Ok(())
}
