//! Randomized theorem suites behind `verify`.

use std::f64::consts::SQRT_2;

use super::config::{ExperimentConfig, Inject};
use super::report::{Check, RunReport};
use crate::cayley::{
    accretive_of_contraction, accretivity_lower_bound, cayley_of_accretive, s_norm_bound, strict_contraction_bound,
    AccretiveOperator,
};
use crate::ensembles::{self, LabRng, RNG_ALGORITHM};
use crate::feedback::{a_s_via_feedback, check_admissible, internal_loop};
use crate::numkernel::{
    c, contraction_certificate, dissipativity_margin, expm, identity, lambda_min_hermitian, op_norm, real,
    ComplexMatrix, Factored,
};
use crate::sysnode::{external_cayley, node_apply, passivity_check, ExtendedOperator};
use crate::Result;

/// Largest random dimension used by the suites.
pub const MAX_SUITE_DIM: usize = 10;

const LP_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

fn random_ext(rng: &mut LabRng, max_dim: usize) -> Result<ExtendedOperator> {
    let n1 = ensembles::dim(rng, 1, max_dim);
    let n2 = ensembles::dim(rng, 1, max_dim);
    ExtendedOperator::from_assembled(&ensembles::dissipative(rng, n1 + n2), n1)
}

/// Mismatches between `margin <= 0` and `max_t |e^{At}| <= 1 + 1e-10`.
pub fn lumer_phillips_mismatches(rng: &mut LabRng, trials: usize, max_dim: usize) -> Result<usize> {
    let mut mismatches = 0;
    for i in 0..trials {
        let n = ensembles::dim(rng, 1, max_dim);
        let a = if i % 2 == 0 {
            ensembles::dissipative(rng, n)
        } else {
            let shift = 0.5 + 1.5 * ensembles::vector(rng, 1)[0].re.abs();
            ensembles::shifted(rng, n, -shift)
        };
        let dissipative = dissipativity_margin(&a, None)? <= 1e-12 * (1.0 + op_norm(&a));
        let mut contractive = true;
        for t in LP_TIMES {
            contractive &= op_norm(&expm(&a, t)?) <= 1.0 + 1e-10;
        }
        if dissipative != contractive {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

/// Largest relative round-trip error and largest bound violation.
pub fn cayley_suite(rng: &mut LabRng, trials: usize, max_dim: usize) -> Result<(f64, f64)> {
    let (mut round_trip, mut violation) = (0.0_f64, f64::NEG_INFINITY);
    for _ in 0..trials {
        let n = ensembles::dim(rng, 1, max_dim);
        let delta = 0.05 + ensembles::vector(rng, 1)[0].re.abs();
        let s = AccretiveOperator::new(ensembles::accretive(rng, n, delta))?;
        let k = cayley_of_accretive(&s)?;
        let back = accretive_of_contraction(&k)?;
        round_trip = round_trip.max(op_norm(&(back.matrix() - s.matrix())) / op_norm(s.matrix()));
        violation = violation.max(op_norm(k.matrix()) - strict_contraction_bound(&s)?);
        let herm_min = lambda_min_hermitian(back.matrix())?;
        violation = violation.max(accretivity_lower_bound(&k)? - herm_min);
        violation = violation.max(op_norm(back.matrix()) - s_norm_bound(&k)?);
    }
    Ok((round_trip, violation))
}

/// Direct evaluation of the Cayley node: with `u = (e - f)/sqrt2` and
/// `(z, f) = A_ext (x, e)`, solve for `e`, then `y = (e + f)/sqrt2`.
pub fn cayley_by_definition(
    ext: &ExtendedOperator,
    x: &crate::numkernel::ComplexVector,
    u: &crate::numkernel::ComplexVector,
) -> Result<(crate::numkernel::ComplexVector, crate::numkernel::ComplexVector)> {
    let lhs = identity(ext.n2()) - ext.a22();
    let rhs = ext.a21() * x + u.scale(SQRT_2);
    let e = Factored::new(&lhs, "I - A22")?.solve(&ComplexMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()));
    let e = e.column(0).into_owned();
    let (z, f) = ext.apply(x, &e)?;
    Ok((z, (e + f).unscale(SQRT_2)))
}

/// Largest LMI eigenvalue and largest relative disagreement between the
/// block formulas and the definition.
pub fn passivity_suite(rng: &mut LabRng, trials: usize, max_dim: usize, inject: Inject) -> Result<(f64, f64)> {
    let (mut lmi, mut closed_form) = (f64::NEG_INFINITY, 0.0_f64);
    for _ in 0..trials {
        let ext = random_ext(rng, max_dim)?;
        let node = external_cayley(&ext)?;
        lmi = lmi.max(passivity_check(&node, 0.0).0);
        let x = ensembles::vector(rng, ext.n1());
        let u = ensembles::vector(rng, ext.n2());
        let (z, y) = node_apply(&node, &x, &u)?;
        let (z_def, y_def) = cayley_by_definition(&ext, &x, &u)?;
        let scale = 1.0 + z_def.norm() + y_def.norm();
        closed_form = closed_form.max(((z - z_def).norm() + (y - y_def).norm()) / scale);
    }
    if inject == Inject::NonDissipative {
        let bad = ExtendedOperator::from_blocks(
            ComplexMatrix::from_element(1, 1, real(0.5)),
            ComplexMatrix::zeros(1, 1),
            ComplexMatrix::zeros(1, 1),
            ComplexMatrix::zeros(1, 1),
        )?;
        lmi = lmi.max(passivity_check(&external_cayley(&bad)?, 0.0).0);
    }
    Ok((lmi, closed_form))
}

/// Largest relative gap between the closed-loop main operator and the
/// internal loop, largest margin of `A_S`, and whether every certificate
/// passed.
pub fn feedback_suite(rng: &mut LabRng, trials: usize, max_dim: usize) -> Result<(f64, f64, bool)> {
    let (mut gap, mut margin, mut certified) = (0.0_f64, f64::NEG_INFINITY, true);
    for _ in 0..trials {
        let ext = random_ext(rng, max_dim)?;
        let delta = 0.05 + ensembles::vector(rng, 1)[0].re.abs();
        let s = AccretiveOperator::new(ensembles::accretive(rng, ext.n2(), delta))?;
        let Some(a_s) = internal_loop(&ext, &s)?.a_s else {
            return Ok((f64::INFINITY, f64::INFINITY, false));
        };
        let via_feedback = match a_s_via_feedback(&ext, &s) {
            Ok(m) => m,
            Err(crate::LabError::Inadmissible { .. }) => return Ok((f64::INFINITY, margin, false)),
            Err(e) => return Err(e),
        };
        gap = gap.max(op_norm(&(&via_feedback - &a_s)) / (1.0 + op_norm(&a_s)));
        margin = margin.max(dissipativity_margin(&a_s, None)?);
        certified &= contraction_certificate(&a_s, None, &LP_TIMES, 1e-10)?.passed;
    }
    Ok((gap, margin, certified))
}

/// `max(|1 - KD|, |A_S|)` for the inadmissible feedback whose internal loop
/// is nevertheless the zero generator.
pub fn non_admissible_fixture() -> Result<f64> {
    let i = c(0.0, 1.0);
    let scalar = |z| ComplexMatrix::from_element(1, 1, z);
    let ext = ExtendedOperator::from_blocks(scalar(real(0.0)), scalar(real(0.0)), scalar(real(0.0)), scalar(-i))?;
    let s = AccretiveOperator::new(scalar(i))?;
    let node = external_cayley(&ext)?;
    let k = cayley_of_accretive(&s)?;
    let fb = check_admissible(&node, &k)?;
    let defect = (real(1.0) - k.matrix()[(0, 0)] * node.d[(0, 0)]).norm();
    let a_s = internal_loop(&ext, &s)?.a_s.map(|m| op_norm(&m)).unwrap_or(f64::INFINITY);
    Ok(if fb.admissible { f64::INFINITY } else { defect.max(a_s) })
}

pub fn run_suites(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let max_dim = cfg.n.min(MAX_SUITE_DIM);
    let mut rng = ensembles::rng_from_seed(cfg.seed);
    report.rng = Some(RNG_ALGORITHM);
    report.note("max_dim", max_dim);

    let lp = lumer_phillips_mismatches(&mut rng, cfg.trials, max_dim)?;
    report.push(Check::at_most("lumer_phillips", lp as f64, 0.0));

    let (round_trip, violation) = cayley_suite(&mut rng, cfg.trials, max_dim)?;
    report.push(Check::at_most("cayley_round_trip", round_trip, 1e-9));
    report.push(Check::at_most("cayley_bounds", violation, 1e-10));

    let (lmi, closed_form) = passivity_suite(&mut rng, cfg.trials, max_dim, cfg.inject)?;
    report.push(Check::at_most("passivity_lmi", lmi, cfg.tol));
    report.push(Check::at_most("cayley_closed_form", closed_form, 1e-9));

    let (gap, margin, certified) = feedback_suite(&mut rng, cfg.trials, max_dim)?;
    report.push(Check::at_most("feedback_equals_internal_loop", gap, 1e-9));
    report.push(Check::at_most("internal_loop_dissipative", margin, 1e-9));
    report.push(Check::at_least("internal_loop_contraction", if certified { 1.0 } else { 0.0 }, 1.0));

    report.push(Check::at_most("non_admissible_feedback", non_admissible_fixture()?, 1e-14));
    Ok(())
}
