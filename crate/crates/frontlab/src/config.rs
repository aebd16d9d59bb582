//! Config-file loading. A run is driven by a single TOML file with
//! sections `kernel`, `medium`, `grid`, `solver`, `experiment`, `output`.
//! Loading validates every cross-field constraint and reports the full
//! list of violations, not just the first; unknown keys are rejected with
//! a nearest-match suggestion.

use crate::error::{Error, Result};
use crate::evolve::{Scheme, SolverConfig};
use crate::grid::{Closure, Grid1D, Kernel, KernelFamily};
use crate::media::{Nonlinearity, TimeSignal};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSection {
    pub family: String,
    pub scale: f64,
    pub trunc_tol: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            family: "gaussian".into(),
            scale: 1.0,
            trunc_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MediumSection {
    pub family: String,
    pub theta_mean: f64,
    pub amplitude: f64,
    pub amplitude2: f64,
    pub period: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl Default for MediumSection {
    fn default() -> Self {
        MediumSection {
            family: "constant".into(),
            theta_mean: 0.25,
            amplitude: 0.05,
            amplitude2: 0.025,
            period: 2.0,
            theta0: 0.05,
            theta1: 0.9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    pub dx: f64,
    pub n: usize,
    pub x_left: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            dx: 0.1,
            n: 1201,
            x_left: -60.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSection {
    pub dt: f64,
    pub scheme: String,
    pub epsilon: f64,
    pub closure: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt: 0.1,
            scheme: "euler_monotone".into(),
            epsilon: 0.0,
            closure: "front".into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub name: String,
    /// Experiment-specific keys, interpreted by the selected experiment.
    #[serde(flatten)]
    pub extra: toml::Table,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub directory: String,
    pub cadence: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: "out".into(),
            cadence: 1.0,
        }
    }
}

/// Fully parsed, defaults-filled run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub kernel: KernelSection,
    pub medium: MediumSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Builds the kernel described by the config.
    pub fn build_kernel(&self) -> Result<Kernel> {
        let family = parse_kernel_family(&self.kernel.family)?;
        Kernel::make(family, self.kernel.scale, self.grid.dx, self.kernel.trunc_tol)
    }

    /// Builds the nonlinearity (medium) described by the config.
    pub fn build_medium(&self) -> Result<Nonlinearity> {
        let m = &self.medium;
        let signal = match m.family.as_str() {
            "constant" => TimeSignal::Constant { value: m.theta_mean },
            "periodic" => TimeSignal::Periodic {
                mean: m.theta_mean,
                amplitude: m.amplitude,
                period: m.period,
            },
            "quasiperiodic" => TimeSignal::Quasiperiodic {
                mean: m.theta_mean,
                amp1: m.amplitude,
                amp2: m.amplitude2,
            },
            other => {
                return Err(Error::Configuration(format!(
                    "medium.family '{other}' not one of constant, periodic, quasiperiodic"
                )))
            }
        };
        Nonlinearity::cubic(signal, m.theta0, m.theta1)
    }

    pub fn build_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.x_left, self.grid.dx, self.grid.n)
    }

    pub fn build_solver(&self) -> Result<SolverConfig> {
        let scheme = match self.solver.scheme.as_str() {
            "euler_monotone" => Scheme::EulerMonotone,
            "rk4" => Scheme::Rk4,
            other => {
                return Err(Error::Configuration(format!(
                    "solver.scheme '{other}' not one of euler_monotone, rk4"
                )))
            }
        };
        let closure = match self.solver.closure.as_str() {
            "front" => Closure::Front,
            "zero" => Closure::Zero,
            other => {
                return Err(Error::Configuration(format!(
                    "solver.closure '{other}' not one of front, zero"
                )))
            }
        };
        Ok(SolverConfig::new(self.solver.dt, scheme)
            .with_epsilon(self.solver.epsilon)
            .with_closure(closure))
    }

    /// Revalidates every cross-field constraint, collecting all violations.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        let medium = match self.build_medium() {
            Ok(nl) => Some(nl),
            Err(e) => {
                violations.push(format!("medium: {e}"));
                None
            }
        };
        if let Err(e) = self.build_kernel() {
            violations.push(format!("kernel: {e}"));
        }
        if let Err(e) = self.build_grid() {
            violations.push(format!("grid: {e}"));
        }
        match self.build_solver() {
            Ok(solver) => {
                if let Some(nl) = &medium {
                    if let Err(e) = solver.validate(nl, self.grid.dx) {
                        violations.push(format!("solver: {e}"));
                    }
                }
            }
            Err(e) => violations.push(format!("solver: {e}")),
        }
        if self.output.cadence <= 0.0 {
            violations.push("output: cadence must be positive".into());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigViolations(violations))
        }
    }
}

fn parse_kernel_family(name: &str) -> Result<KernelFamily> {
    match name {
        "gaussian" => Ok(KernelFamily::Gaussian),
        "uniform" => Ok(KernelFamily::Uniform),
        "laplace" => Ok(KernelFamily::Laplace),
        other => Err(Error::Configuration(format!(
            "kernel.family '{other}' not one of gaussian, uniform, laplace"
        ))),
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("kernel", &["family", "scale", "trunc_tol"]),
    (
        "medium",
        &[
            "family",
            "theta_mean",
            "amplitude",
            "amplitude2",
            "period",
            "theta0",
            "theta1",
        ],
    ),
    ("grid", &["dx", "n", "x_left"]),
    ("solver", &["dt", "scheme", "epsilon", "closure"]),
    ("experiment", &[]), // free-form, name + experiment keys
    ("output", &["directory", "cadence"]),
];

fn suggest(unknown: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::levenshtein(unknown, c), *c))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, c)| c.to_string())
}

/// Rejects unknown sections/keys with a nearest-match suggestion.
fn check_unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut problems = Vec::new();
    let section_names: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
    for (section, value) in table {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == section) else {
            let hint = suggest(section, &section_names)
                .map(|s| format!(" (did you mean '{s}'?)"))
                .unwrap_or_default();
            problems.push(format!("unknown section '{section}'{hint}"));
            continue;
        };
        if keys.is_empty() {
            continue; // free-form section
        }
        let toml::Value::Table(inner) = value else {
            problems.push(format!("section '{section}' must be a table"));
            continue;
        };
        for key in inner.keys() {
            if !keys.contains(&key.as_str()) {
                let hint = suggest(key, keys)
                    .map(|s| format!(" (did you mean '{s}'?)"))
                    .unwrap_or_default();
                problems.push(format!("unknown key '{section}.{key}'{hint}"));
            }
        }
    }
    problems
}

/// Loads, default-fills and fully validates a run configuration. All
/// violations (unknown keys and constraint failures alike) are collected
/// before returning.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_str(&text)
}

pub fn load_config_str(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Configuration(format!("parse error: {e}")))?;
    let mut violations = check_unknown_keys(&table);
    let config: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Configuration(format!("deserialize error: {e}")))?;
    match config.validate() {
        Ok(()) => {}
        Err(Error::ConfigViolations(mut v)) => violations.append(&mut v),
        Err(e) => violations.push(e.to_string()),
    }
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::ConfigViolations(violations))
    }
}

/// Serializes the defaults-filled configuration back to TOML (the
/// "effective config" echoed into the output directory).
pub fn effective_config(config: &RunConfig) -> Result<String> {
    toml::to_string_pretty(config)
        .map_err(|e| Error::Configuration(format!("serialize error: {e}")))
}
