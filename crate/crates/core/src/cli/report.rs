//! Run reports: a deterministic body (config echo and checks ordered by
//! name) plus a wall time kept out of the body.

use std::time::Duration;

use super::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `value <= threshold`.
    AtMost,
    /// Passes when `value >= threshold`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), value, threshold, bound: Bound::AtMost }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), value, threshold, bound: Bound::AtLeast }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.threshold,
            Bound::AtLeast => self.value >= self.threshold,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub config: Vec<(&'static str, String)>,
    pub rng: Option<&'static str>,
    pub notes: Vec<(String, String)>,
    checks: Vec<Check>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.effective(),
            rng: None,
            notes: Vec::new(),
            checks: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    /// Checks ordered by name.
    pub fn checks(&self) -> Vec<&Check> {
        let mut sorted: Vec<&Check> = self.checks.iter().collect();
        sorted.sort_by(|a, b| a.name.cmp(&b.name));
        sorted
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks().into_iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect()
    }

    /// Everything except the wall time; identical across repeated runs.
    pub fn body(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        for (k, v) in &self.config {
            out.push_str(&format!("config.{k} = {v}\n"));
        }
        if let Some(rng) = self.rng {
            out.push_str(&format!("rng = {rng}\n"));
        }
        let mut notes = self.notes.clone();
        notes.sort();
        for (k, v) in notes {
            out.push_str(&format!("note.{k} = {v}\n"));
        }
        for c in self.checks() {
            let op = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("check {} {verdict}: {} {op} {}\n", c.name, c.value, c.threshold));
        }
        out.push_str(&format!("overall = {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        out
    }
}
