//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;

use crate::pdelab::{CoefficientProfiles, Grid1D, PdeCoefficients, Profile};
use crate::simkit::Stepper;

pub const DEFAULT_N: usize = 32;
pub const DEFAULT_DT: f64 = 1e-2;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 50;
pub const MAX_N: usize = 4096;

/// Every accepted key, in the order they are echoed in reports.
pub const KEYS: &[&str] = &[
    "experiment",
    "n",
    "dt",
    "t_final",
    "seed",
    "tol",
    "trials",
    "alpha_exp",
    "kappa",
    "delta_floor",
    "rho",
    "young",
    "k_v",
    "k_s",
    "s_fun",
    "fixture",
    "feedthrough_d",
    "inject",
    "stepper",
    "output",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    VerifyRandom,
    WaveHeat,
    Viscous,
    Structural,
    Combined,
    Degenerate,
    Ionorm,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::VerifyRandom => "verify_random",
            Self::WaveHeat => "wave_heat",
            Self::Viscous => "viscous",
            Self::Structural => "structural",
            Self::Combined => "combined",
            Self::Degenerate => "degenerate",
            Self::Ionorm => "ionorm",
        }
    }

    fn parse(value: &str) -> Option<Self> {
        [
            Self::VerifyRandom,
            Self::WaveHeat,
            Self::Viscous,
            Self::Structural,
            Self::Combined,
            Self::Degenerate,
            Self::Ionorm,
        ]
        .into_iter()
        .find(|k| k.name() == value)
    }
}

/// Node used by the input/output sweep when `experiment = ionorm`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    WaveCayley,
    ViscousCayley,
    Feedthrough,
    Integrator,
    Transport,
}

impl Fixture {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WaveCayley => "wave_cayley",
            Self::ViscousCayley => "viscous_cayley",
            Self::Feedthrough => "feedthrough",
            Self::Integrator => "integrator",
            Self::Transport => "transport",
        }
    }

    fn parse(value: &str) -> Option<Self> {
        [Self::WaveCayley, Self::ViscousCayley, Self::Feedthrough, Self::Integrator, Self::Transport]
            .into_iter()
            .find(|f| f.name() == value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inject {
    Nothing,
    /// Adds a non-dissipative extended operator to the passivity suite.
    NonDissipative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub tol: f64,
    pub trials: usize,
    pub profiles: CoefficientProfiles,
    pub fixture: Fixture,
    pub feedthrough_d: f64,
    pub inject: Inject,
    pub stepper: Stepper,
    /// CSV file name inside the output directory.
    pub output: Option<String>,
    /// The raw values as written, for the report echo.
    pub echo: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::VerifyRandom,
            n: DEFAULT_N,
            dt: DEFAULT_DT,
            t_final: DEFAULT_T,
            seed: 0,
            tol: DEFAULT_TOL,
            trials: DEFAULT_TRIALS,
            profiles: CoefficientProfiles::default(),
            fixture: Fixture::WaveCayley,
            feedthrough_d: 0.5,
            inject: Inject::Nothing,
            stepper: Stepper::CrankNicolson,
            output: None,
            echo: BTreeMap::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Grid1D {
        Grid1D::new(self.n).expect("n validated at parse time")
    }

    pub fn coefficients(&self) -> PdeCoefficients {
        PdeCoefficients::sample(&self.grid(), &self.profiles).expect("profiles validated at parse time")
    }

    /// Every key with its effective value, defaults included.
    pub fn effective(&self) -> Vec<(&'static str, String)> {
        let p = &self.profiles;
        vec![
            ("experiment", self.experiment.name().to_string()),
            ("n", self.n.to_string()),
            ("dt", self.dt.to_string()),
            ("t_final", self.t_final.to_string()),
            ("seed", self.seed.to_string()),
            ("tol", self.tol.to_string()),
            ("trials", self.trials.to_string()),
            ("alpha_exp", p.alpha_exp.to_string()),
            ("kappa", p.kappa.to_string()),
            ("delta_floor", p.delta_floor.to_string()),
            ("rho", profile_text(&p.rho)),
            ("young", profile_text(&p.young)),
            ("k_v", profile_text(&p.k_v)),
            ("k_s", profile_text(&p.k_s)),
            ("s_fun", profile_text(&p.s_fun)),
            ("fixture", self.fixture.name().to_string()),
            ("feedthrough_d", self.feedthrough_d.to_string()),
            (
                "inject",
                match self.inject {
                    Inject::Nothing => "none".to_string(),
                    Inject::NonDissipative => "non_dissipative".to_string(),
                },
            ),
            (
                "stepper",
                match self.stepper {
                    Stepper::Expm => "expm".to_string(),
                    Stepper::CrankNicolson => "cn".to_string(),
                },
            ),
            ("output", self.output.clone().unwrap_or_default()),
        ]
    }
}

pub fn profile_text(p: &Profile) -> String {
    match p {
        Profile::Constant(v) => format!("constant:{v}"),
        Profile::Linear { a, b } => format!("linear:{a},{b}"),
        Profile::Power(e) => format!("power:{e}"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(line), Some(key)) => write!(f, "line {line}: `{key}`: {}", self.message),
            (Some(line), None) => write!(f, "line {line}: {}", self.message),
            (None, Some(key)) => write!(f, "`{key}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn at(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), key: Some(key.to_string()), message: message.into() }
}

fn range(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: None, key: Some(key.to_string()), message: message.into() }
}

/// `constant:<v>`, `linear:<a>,<b>`, `power:<p>`, or a bare number.
pub fn parse_profile(text: &str) -> Option<Profile> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        return Some(Profile::Constant(v));
    }
    let (kind, args) = text.split_once(':')?;
    let nums: Vec<f64> = args.split(',').map(|a| a.trim().parse::<f64>()).collect::<Result<_, _>>().ok()?;
    match (kind.trim(), nums.as_slice()) {
        ("constant", [v]) => Some(Profile::Constant(*v)),
        ("linear", [a, b]) => Some(Profile::Linear { a: *a, b: *b }),
        ("power", [p]) => Some(Profile::Power(*p)),
        _ => None,
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse::<T>().map_err(|_| at(line, key, format!("cannot parse `{value}`")))
}

fn finite(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = number(line, key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(at(line, key, format!("`{value}` is not finite")))
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError { line: Some(line), key: None, message: format!("expected `key = value`, got `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(at(line, key, "unknown key"));
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(at(line, key, format!("duplicate key (first set on line {first})")));
        }
        let profile = |v: &str| parse_profile(v).ok_or_else(|| at(line, key, format!("bad profile `{v}`")));
        match key {
            "experiment" => {
                cfg.experiment = ExperimentKind::parse(value).ok_or_else(|| at(line, key, format!("unknown experiment `{value}`")))?
            }
            "n" => cfg.n = number(line, key, value)?,
            "dt" => cfg.dt = finite(line, key, value)?,
            "t_final" => cfg.t_final = finite(line, key, value)?,
            "seed" => cfg.seed = number(line, key, value)?,
            "tol" => cfg.tol = finite(line, key, value)?,
            "trials" => cfg.trials = number(line, key, value)?,
            "alpha_exp" => cfg.profiles.alpha_exp = finite(line, key, value)?,
            "kappa" => cfg.profiles.kappa = finite(line, key, value)?,
            "delta_floor" => cfg.profiles.delta_floor = finite(line, key, value)?,
            "rho" => cfg.profiles.rho = profile(value)?,
            "young" => cfg.profiles.young = profile(value)?,
            "k_v" => cfg.profiles.k_v = profile(value)?,
            "k_s" => cfg.profiles.k_s = profile(value)?,
            "s_fun" => cfg.profiles.s_fun = profile(value)?,
            "fixture" => cfg.fixture = Fixture::parse(value).ok_or_else(|| at(line, key, format!("unknown fixture `{value}`")))?,
            "feedthrough_d" => cfg.feedthrough_d = finite(line, key, value)?,
            "inject" => {
                cfg.inject = match value {
                    "none" => Inject::Nothing,
                    "non_dissipative" => Inject::NonDissipative,
                    _ => return Err(at(line, key, format!("unknown injection `{value}`"))),
                }
            }
            "stepper" => {
                cfg.stepper = match value {
                    "cn" | "crank_nicolson" => Stepper::CrankNicolson,
                    "expm" => Stepper::Expm,
                    _ => return Err(at(line, key, format!("unknown stepper `{value}`"))),
                }
            }
            "output" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(at(line, key, "must be a plain file name"));
                }
                cfg.output = Some(value.to_string())
            }
            _ => unreachable!("key list checked above"),
        }
        cfg.echo.insert(key.to_string(), value.to_string());
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if !(2..=MAX_N).contains(&cfg.n) {
        return Err(range("n", format!("must be in [2, {MAX_N}], got {}", cfg.n)));
    }
    if !(cfg.dt > 0.0) {
        return Err(range("dt", format!("must be positive, got {}", cfg.dt)));
    }
    if !(cfg.t_final >= cfg.dt) {
        return Err(range("t_final", format!("must be at least dt = {}, got {}", cfg.dt, cfg.t_final)));
    }
    if !(cfg.tol > 0.0) {
        return Err(range("tol", format!("must be positive, got {}", cfg.tol)));
    }
    if !(1..=10_000).contains(&cfg.trials) {
        return Err(range("trials", format!("must be in [1, 10000], got {}", cfg.trials)));
    }
    PdeCoefficients::sample(&Grid1D::new(cfg.n).expect("n checked"), &cfg.profiles).map_err(|e| {
        let key = match &e {
            crate::LabError::InvalidParameter { name, .. } => (*name).to_string(),
            _ => "coefficients".to_string(),
        };
        range(&key, e.to_string())
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config("experiment = wave_heat\nn = 16").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::WaveHeat);
        assert_eq!(cfg.n, 16);
        assert_eq!((cfg.dt, cfg.t_final, cfg.seed, cfg.tol), (1e-2, 1.0, 0, 1e-9));
        assert_eq!(parse_config("").unwrap().n, 32);
    }

    #[test]
    fn range_error_names_key() {
        let err = parse_config("n = 0").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("n"));
        assert!(err.to_string().contains("`n`"));
        assert_eq!(parse_config("dt = 0.5\nt_final = 0.1").unwrap_err().key.as_deref(), Some("t_final"));
        assert_eq!(parse_config("alpha_exp = 1.5").unwrap_err().key.as_deref(), Some("alpha_exp"));
        assert_eq!(parse_config("rho = constant:-1").unwrap_err().key.as_deref(), Some("rho/young/s_fun"));
    }

    #[test]
    fn degenerate_config() {
        let cfg = parse_config("alpha_exp = 0.5\nexperiment = degenerate\nkappa = 1").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Degenerate);
        assert_eq!((cfg.profiles.alpha_exp, cfg.profiles.kappa), (0.5, 1.0));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("# header\nn = 8\nbogus = 1").unwrap_err();
        assert_eq!((err.line, err.key.as_deref()), (Some(3), Some("bogus")));
        assert_eq!(parse_config("n 8").unwrap_err().line, Some(1));
        assert_eq!(parse_config("n = 8\nn = 9").unwrap_err().line, Some(2));
        assert_eq!(parse_config("dt = fast").unwrap_err().key.as_deref(), Some("dt"));
        assert_eq!(parse_config("dt = NaN").unwrap_err().key.as_deref(), Some("dt"));
    }

    #[test]
    fn comments_and_profiles() {
        let cfg = parse_config("k_v = constant:1 # damping\n  s_fun = linear:1, 1\nrho = power:0.5\nyoung = 2").unwrap();
        assert_eq!(cfg.profiles.k_v, Profile::Constant(1.0));
        assert_eq!(cfg.profiles.s_fun, Profile::Linear { a: 1.0, b: 1.0 });
        assert_eq!(cfg.profiles.rho, Profile::Power(0.5));
        assert_eq!(cfg.profiles.young, Profile::Constant(2.0));
        assert!(parse_profile("cubic:1").is_none());
        assert!(parse_profile("linear:1").is_none());
    }
}
