//! Command-line front end: `verify`, `simulate` and `ionorm` over a flat
//! configuration file, with CSV output and exit codes 0 (pass), 1 (a check
//! failed) and 2 (usage, configuration or I/O error).

pub mod config;
pub mod report;
pub mod suites;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{parse_config, ExperimentConfig, ExperimentKind, Fixture};
use report::{Check, RunReport};

use crate::cayley::AccretiveOperator;
use crate::ensembles::{self, RNG_ALGORITHM};
use crate::feedback::internal_loop;
use crate::numkernel::{op_norm, ComplexMatrix, Gram};
use crate::pdelab::{
    degenerate_as1, wave_combined_ext, wave_ext, wave_structural_ext, wave_viscous_ext, DampedWave,
};
use crate::simkit::{io_map_norm, simulate_semigroup, transport_node, IoMapEstimate, Trajectory};
use crate::sysnode::{external_cayley, SystemNode};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Simulate,
    Ionorm,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Ionorm => "ionorm",
        }
    }
}

/// Failure that maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<crate::LabError> for UsageError {
    fn from(e: crate::LabError) -> Self {
        UsageError(e.to_string())
    }
}

/// Report plus the CSV it produced, if any.
pub struct RunOutput {
    pub report: RunReport,
    pub csv: Option<(String, String)>,
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunOutput, UsageError> {
    let mut report = RunReport::new(Command::Verify.name(), cfg);
    suites::run_suites(cfg, &mut report)?;
    Ok(RunOutput { report, csv: None })
}

/// Generator, optional Gram and a label for the `simulate` experiments.
fn simulation_system(cfg: &ExperimentConfig) -> Result<(ComplexMatrix, Option<Gram>, bool), UsageError> {
    let grid = cfg.grid();
    let coeffs = cfg.coefficients();
    let damped = |fixture: DampedWave, undamped: bool| -> Result<_, UsageError> {
        Ok((fixture.energy_generator()?, Some(fixture.gram), undamped))
    };
    match cfg.experiment {
        ExperimentKind::WaveHeat => {
            // heat equation obtained from the wave operator with S = diag(s) on midpoints
            let s = AccretiveOperator::diagonal(&cfg.profiles.s_fun.sample(&grid.midpoints()))?;
            let a_s = internal_loop(&wave_ext(&grid), &s)?
                .a_s
                .ok_or_else(|| UsageError("heat internal loop is not solvable".into()))?;
            Ok((a_s, None, false))
        }
        ExperimentKind::Viscous => {
            let undamped = coeffs.k_v.iter().all(|&k| k == 0.0);
            damped(wave_viscous_ext(&grid, &coeffs)?, undamped)
        }
        ExperimentKind::Structural => {
            let undamped = coeffs.k_s.iter().all(|&k| k == 0.0);
            damped(wave_structural_ext(&grid, &coeffs)?, undamped)
        }
        ExperimentKind::Combined => damped(wave_combined_ext(&grid, &coeffs)?, false),
        ExperimentKind::Degenerate => Ok((degenerate_as1(&grid, &coeffs)?, None, false)),
        ExperimentKind::VerifyRandom | ExperimentKind::Ionorm => Err(UsageError(format!(
            "experiment `{}` cannot be simulated; use wave_heat, viscous, structural, combined or degenerate",
            cfg.experiment.name()
        ))),
    }
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<RunOutput, UsageError> {
    let mut report = RunReport::new(Command::Simulate.name(), cfg);
    let (a, gram, undamped) = simulation_system(cfg)?;
    let mut rng = ensembles::rng_from_seed(cfg.seed);
    report.rng = Some(RNG_ALGORITHM);
    let x0 = ensembles::vector(&mut rng, a.nrows());
    let traj: Trajectory = simulate_semigroup(&a, gram.as_ref(), &x0, cfg.t_final, cfg.dt, cfg.stepper)?;

    let e0 = traj.energy[0];
    let bound = e0 * (1.0 + 1e-10);
    let max_ratio = traj.energy.iter().fold(0.0_f64, |m, &e| m.max(e / e0));
    report.note("state_dim", a.nrows());
    report.note("steps", traj.len() - 1);
    report.note("final_energy_ratio", traj.energy[traj.len() - 1] / e0);
    report.push(Check::at_most("max_energy_ratio", max_ratio, 1.0 + 1e-10));
    report.push(Check::at_most("energy_nonincreasing", traj.max_energy_increase().max(0.0) / e0, 1e-10));
    if undamped {
        let drift = (traj.energy[traj.len() - 1] / e0 - 1.0).abs();
        report.push(Check::at_most("energy_conserved", drift, 1e-6));
    }

    let mut rows = vec![vec!["t".to_string(), "energy".to_string(), "norm_bound_ok".to_string()]];
    for (t, e) in traj.times.iter().zip(&traj.energy) {
        rows.push(vec![t.to_string(), e.to_string(), (*e <= bound).to_string()]);
    }
    let name = cfg.output.clone().unwrap_or_else(|| "simulate.csv".to_string());
    Ok(RunOutput { report, csv: Some((name, csv_text(&rows)?)) })
}

/// Node for the input/output sweep and whether its norm is known to be one.
fn ionorm_node(cfg: &ExperimentConfig) -> Result<(SystemNode, Fixture), UsageError> {
    let grid = cfg.grid();
    let fixture = match cfg.experiment {
        ExperimentKind::WaveHeat => Fixture::WaveCayley,
        ExperimentKind::Viscous => Fixture::ViscousCayley,
        ExperimentKind::Ionorm => cfg.fixture,
        other => {
            return Err(UsageError(format!(
                "experiment `{}` has no input/output sweep; use wave_heat, viscous or ionorm",
                other.name()
            )))
        }
    };
    let scalar = |v: f64| ComplexMatrix::from_element(1, 1, crate::numkernel::real(v));
    let node = match fixture {
        Fixture::WaveCayley => external_cayley(&wave_ext(&grid))?,
        Fixture::ViscousCayley => external_cayley(&wave_viscous_ext(&grid, &cfg.coefficients())?.ext)?,
        Fixture::Feedthrough => SystemNode::new(scalar(0.0), scalar(0.0), scalar(0.0), scalar(cfg.feedthrough_d))?,
        Fixture::Integrator => SystemNode::new(scalar(0.0), scalar(1.0), scalar(1.0), scalar(0.0))?,
        Fixture::Transport => transport_node(cfg.n)?,
    };
    Ok((node, fixture))
}

/// Horizons `k T / 4`, `k = 1..4`, with a common step `T / (4 q)` where
/// `q = max(4, ceil(T / (4 dt)))`; matched steps make the sweep monotone.
pub fn ionorm_grid(t_final: f64, dt: f64) -> Vec<(f64, usize)> {
    let q = ((t_final / (4.0 * dt)).ceil() as usize).max(4);
    (1..=4).map(|k| (k as f64 * t_final / 4.0, k * q)).collect()
}

pub fn run_ionorm(cfg: &ExperimentConfig) -> Result<RunOutput, UsageError> {
    let mut report = RunReport::new(Command::Ionorm.name(), cfg);
    let (node, fixture) = ionorm_node(cfg)?;
    report.note("fixture", fixture.name());
    let estimates: Vec<IoMapEstimate> = ionorm_grid(cfg.t_final, cfg.dt)
        .into_iter()
        .map(|(t, steps)| io_map_norm(&node, t, steps))
        .collect::<crate::Result<_>>()?;
    let bias = estimates.iter().map(|e| e.bias).fold(0.0, f64::max);
    let worst_drop = estimates
        .windows(2)
        .map(|w| w[0].norm_estimate - w[1].norm_estimate)
        .fold(0.0_f64, f64::max);
    report.note("bias", bias);
    report.push(Check::at_most("io_monotone", worst_drop, 2.0 * bias));
    let lowest = estimates.iter().map(|e| e.norm_estimate).fold(f64::INFINITY, f64::min);
    let highest = estimates.iter().map(|e| e.norm_estimate).fold(0.0_f64, f64::max);
    if node.is_passive() {
        report.push(Check::at_most("io_passive_bound", highest, 1.0 + bias));
    }
    let d_norm = op_norm(&node.d);
    if d_norm > 0.0 {
        report.push(Check::at_least("io_feedthrough_bound", lowest, d_norm - 1e-3));
    }
    if fixture == Fixture::WaveCayley {
        report.push(Check::at_least("io_lower_bound", lowest, 1.0 - 1e-3));
    }

    let mut rows = vec![vec!["T".to_string(), "norm_estimate".to_string(), "nsteps".to_string()]];
    for e in &estimates {
        rows.push(vec![e.horizon.to_string(), e.norm_estimate.to_string(), e.nsteps.to_string()]);
    }
    let name = cfg.output.clone().unwrap_or_else(|| "ionorm.csv".to_string());
    Ok(RunOutput { report, csv: Some((name, csv_text(&rows)?)) })
}

/// Comma separated, LF line endings.
pub fn csv_text(rows: &[Vec<String>]) -> Result<String, UsageError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        writer.write_record(row).map_err(|e| UsageError(format!("csv: {e}")))?;
    }
    let bytes = writer.into_inner().map_err(|e| UsageError(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| UsageError(format!("csv: {e}")))
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<RunOutput, UsageError> {
    let started = Instant::now();
    let mut out = match command {
        Command::Verify => run_verify(cfg)?,
        Command::Simulate => run_simulate(cfg)?,
        Command::Ionorm => run_ionorm(cfg)?,
    };
    out.report.wall_time = started.elapsed();
    Ok(out)
}

/// Runs a command end to end, writing `report.txt` and the CSV into
/// `out_dir`. Returns the process exit code; never panics on bad input.
pub fn run_command(command: Command, config_path: &Path, out_dir: Option<&Path>, seed: Option<u64>) -> i32 {
    match run_inner(command, config_path, out_dir, seed) {
        Ok(report) => {
            print!("{}", report.body());
            eprintln!("wall_time_s = {:.3}", report.wall_time.as_secs_f64());
            if report.passed() {
                EXIT_PASS
            } else {
                for name in report.failed_checks() {
                    eprintln!("failed check: {name}");
                }
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn run_inner(command: Command, config_path: &Path, out_dir: Option<&Path>, seed: Option<u64>) -> Result<RunReport, UsageError> {
    let cfg = load_config(config_path, seed)?;
    let out = std::panic::catch_unwind(|| execute(command, &cfg))
        .map_err(|_| UsageError("internal error while running the experiment".into()))??;
    let dir: PathBuf = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| UsageError(format!("cannot create {}: {e}", dir.display())))?;
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))
    };
    write("report.txt", &out.report.body())?;
    if let Some((name, text)) = &out.csv {
        write(name, text)?;
    }
    Ok(out.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn verify_defaults_pass() {
        let out = run_verify(&cfg("trials = 20")).unwrap();
        assert!(out.report.passed(), "{}", out.report.body());
    }

    #[test]
    fn negative_control_names_the_lmi() {
        let out = run_verify(&cfg("trials = 5\ninject = non_dissipative")).unwrap();
        assert_eq!(out.report.failed_checks(), vec!["passivity_lmi"]);
    }

    #[test]
    fn verify_is_deterministic() {
        let a = run_verify(&cfg("trials = 10\nseed = 4")).unwrap().report.body();
        let b = run_verify(&cfg("trials = 10\nseed = 4")).unwrap().report.body();
        assert_eq!(a, b);
    }

    #[test]
    fn viscous_energy_is_monotone() {
        let out = run_simulate(&cfg("experiment = viscous\nn = 16\nk_v = constant:1\nt_final = 5\ndt = 0.05")).unwrap();
        assert!(out.report.passed(), "{}", out.report.body());
        let (_, csv) = out.csv.unwrap();
        assert!(csv.starts_with("t,energy,norm_bound_ok\n"));
        assert_eq!(csv.lines().count(), 102);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn undamped_wave_conserves_energy() {
        let out = run_simulate(&cfg("experiment = viscous\nn = 16\nt_final = 2\ndt = 0.05")).unwrap();
        assert!(out.report.checks().iter().any(|c| c.name == "energy_conserved"));
        assert!(out.report.passed(), "{}", out.report.body());
    }

    #[test]
    fn degenerate_energy_is_nonincreasing() {
        let out = run_simulate(&cfg("experiment = degenerate\nn = 16\nalpha_exp = 0.5\nkappa = 1\ndt = 0.01")).unwrap();
        assert!(out.report.passed(), "{}", out.report.body());
    }

    #[test]
    fn wave_ionorm_is_bounded_below() {
        let out = run_ionorm(&cfg("experiment = wave_heat\nn = 8\ndt = 0.05")).unwrap();
        assert!(out.report.passed(), "{}", out.report.body());
        let (name, csv) = out.csv.unwrap();
        assert_eq!(name, "ionorm.csv");
        assert!(csv.starts_with("T,norm_estimate,nsteps\n"));
    }

    #[test]
    fn feedthrough_and_integrator_sweeps() {
        let out = run_ionorm(&cfg("experiment = ionorm\nfixture = feedthrough\nfeedthrough_d = 0.5")).unwrap();
        assert!(out.report.passed());
        let csv = out.csv.unwrap().1;
        for line in csv.lines().skip(1) {
            let est: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!((est - 0.5).abs() < 1e-12);
        }
        let out = run_ionorm(&cfg("experiment = ionorm\nfixture = integrator\ndt = 0.05")).unwrap();
        let csv = out.csv.unwrap().1;
        let est: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert!(est.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn wrong_experiment_is_a_usage_error() {
        assert!(run_simulate(&cfg("experiment = verify_random")).is_err());
        assert!(run_ionorm(&cfg("experiment = degenerate")).is_err());
    }

    #[test]
    fn ionorm_grid_has_matched_steps() {
        let grid = ionorm_grid(1.0, 1e-2);
        assert_eq!(grid.len(), 4);
        let dt0 = grid[0].0 / grid[0].1 as f64;
        assert!(grid.iter().all(|(t, n)| (t / *n as f64 - dt0).abs() < 1e-15 && *n >= 4));
    }
}
