//! Subcommand dispatch: builds the simulation objects from a [`RunConfig`],
//! runs the requested operation, and writes all artifacts (effective
//! config echo, `report.json`, CSVs) under the output directory.

use crate::config::{effective_config, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{evolve_to, FieldState, Observers, SolverConfig};
use crate::grid::Kernel;
use crate::media::Nonlinearity;
use crate::report::{
    write_interfaces_csv, write_json, write_series_csv, write_snapshots_csv, write_wave_csv,
};
use crate::theorems::{self, ExperimentReport, Perturbation};
use crate::waves::{check_unbalanced, compute_wave};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subcommand {
    Validate,
    Wave,
    Simulate,
    Experiment(String),
    Suite,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

/// Machine-readable outcome written as `report.json`.
#[derive(Debug, Serialize)]
pub struct RunOutcome {
    pub subcommand: String,
    pub pass: bool,
    pub seed: u64,
    pub detail: serde_json::Value,
}

const EXPERIMENTS: &[&str] = &[
    "construct_front",
    "stability",
    "squeezing",
    "decay",
    "uniqueness",
    "periodicity",
    "asymptotic_speed",
    "perturbation_limit",
];

fn extra_f64(config: &RunConfig, key: &str, default: f64) -> f64 {
    config
        .experiment
        .extra
        .get(key)
        .and_then(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
        .unwrap_or(default)
}

fn extra_str<'a>(config: &'a RunConfig, key: &str, default: &'a str) -> &'a str {
    config
        .experiment
        .extra
        .get(key)
        .and_then(|v| v.as_str())
        .unwrap_or(default)
}

fn extra_f64_list(config: &RunConfig, key: &str, default: &[f64]) -> Vec<f64> {
    config
        .experiment
        .extra
        .get(key)
        .and_then(|v| v.as_array())
        .map(|a| {
            a.iter()
                .filter_map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
                .collect()
        })
        .unwrap_or_else(|| default.to_vec())
}

/// Entry point shared by the CLI and tests. Returns the outcome; artifacts
/// land under `opts.out`.
pub fn run(sub: &Subcommand, opts: &RunOptions) -> Result<RunOutcome> {
    let config = &opts.config;
    config.validate()?;
    std::fs::create_dir_all(&opts.out)?;
    std::fs::write(
        opts.out.join("effective_config.toml"),
        effective_config(config)?,
    )?;

    let nl = config.build_medium()?;
    let kernel = config.build_kernel()?;
    let solver = config.build_solver()?;

    let outcome = match sub {
        Subcommand::Validate => run_validate(config, &nl, opts),
        Subcommand::Wave => run_wave(config, &nl, &kernel, &solver, opts),
        Subcommand::Simulate => run_simulate(config, &nl, &kernel, &solver, opts),
        Subcommand::Experiment(name) => {
            let report = run_experiment(name, config, &nl, &kernel, &solver, &opts.out)?;
            Ok(RunOutcome {
                subcommand: format!("experiment {name}"),
                pass: report.pass(),
                seed: opts.seed,
                detail: serde_json::to_value(&report)?,
            })
        }
        Subcommand::Suite => run_suite(config, &nl, &kernel, &solver, opts),
    }?;

    write_json(&opts.out.join("report.json"), &outcome)?;
    Ok(outcome)
}

fn run_validate(config: &RunConfig, nl: &Nonlinearity, opts: &RunOptions) -> Result<RunOutcome> {
    let window = config
        .build_medium()?
        .theta_signal()
        .and_then(|s| s.period())
        .map(|p| 4.0 * p)
        .unwrap_or(20.0);
    let report = nl.validate_hypotheses(512, 512, window);
    Ok(RunOutcome {
        subcommand: "validate".into(),
        pass: report.scan_pass(),
        seed: opts.seed,
        detail: serde_json::to_value(&report)?,
    })
}

fn run_wave(
    config: &RunConfig,
    nl: &Nonlinearity,
    kernel: &Kernel,
    solver: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    let t_relax = extra_f64(config, "t_relax", 400.0);
    let unbalanced = check_unbalanced(nl, kernel, solver, t_relax)?;
    let mut detail = serde_json::json!({ "unbalanced": unbalanced });
    let mut pass = unbalanced.pass && unbalanced.resolved;
    if nl.is_autonomous() {
        let wave = compute_wave(nl, kernel, solver, 0.5, t_relax)?;
        write_wave_csv(&opts.out.join("wave.csv"), &wave)?;
        detail["speed"] = serde_json::json!(wave.speed);
        detail["trailing_change"] = serde_json::json!(wave.trailing_change);
        pass = pass && wave.trailing_change < 1e-7;
    }
    Ok(RunOutcome {
        subcommand: "wave".into(),
        pass,
        seed: opts.seed,
        detail,
    })
}

fn run_simulate(
    config: &RunConfig,
    nl: &Nonlinearity,
    kernel: &Kernel,
    solver: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    let grid = config.build_grid()?;
    let t_end = extra_f64(config, "t_end", 50.0);
    let x0 = extra_f64(config, "front_position", 0.0);
    let state = FieldState::from_profile(grid, 0.0, |x| if x < x0 { 1.0 } else { 0.0 });
    let obs = Observers {
        snapshot_every: Some(config.output.cadence),
        interface_every: Some(config.output.cadence),
        levels: vec![0.1, 0.5, 0.9],
        recenter: true,
    };
    let (end, records) = evolve_to(state, nl, kernel, solver, t_end, &obs)?;
    write_snapshots_csv(&opts.out.join("snapshots.csv"), &records)?;
    write_interfaces_csv(&opts.out.join("interfaces.csv"), &records.interfaces)?;
    Ok(RunOutcome {
        subcommand: "simulate".into(),
        pass: true,
        seed: opts.seed,
        detail: serde_json::json!({
            "t_end": end.t,
            "snapshots": records.snapshots.len(),
            "interface_samples": records.interfaces.len(),
        }),
    })
}

fn run_experiment(
    name: &str,
    config: &RunConfig,
    nl: &Nonlinearity,
    kernel: &Kernel,
    solver: &SolverConfig,
    out: &Path,
) -> Result<ExperimentReport> {
    let report = match name {
        "construct_front" => {
            let s_list = extra_f64_list(config, "s_list", &[-4.0, -8.0, -16.0, -32.0]);
            let t_probe = extra_f64(config, "t_probe", 20.0);
            let (report, _) = theorems::construct_front(nl, kernel, solver, &s_list, t_probe)?;
            report
        }
        "stability" => {
            let perturbation = match extra_str(config, "perturbation", "bump") {
                "shift" => Perturbation::Shift {
                    shift: extra_f64(config, "shift", 2.0),
                },
                "step" => Perturbation::Step,
                _ => Perturbation::Bump {
                    amplitude: extra_f64(config, "amplitude", 0.02),
                    width: extra_f64(config, "width", 1.0),
                    offset: extra_f64(config, "offset", 0.0),
                },
            };
            let t_run = extra_f64(config, "t_run", 60.0);
            theorems::stability_experiment(nl, kernel, solver, perturbation, t_run)?
        }
        "squeezing" => {
            let t_run = extra_f64(config, "t_run", 40.0);
            let spread = extra_f64(config, "spread", 2.0);
            let u0 = theorems::reference_front(nl, kernel, solver, 60.0, 0.0, 30.0)?;
            // average of two translates: needs a sandwich of width `spread`
            // which must then contract
            let v0 = {
                let tw = crate::waves::TravelingWave {
                    grid: u0.grid,
                    profile: u0.values.clone(),
                    speed: 0.0,
                    pin_level: 0.5,
                    trailing_change: 0.0,
                };
                FieldState::from_profile(u0.grid, 0.0, |x| {
                    0.5 * (tw.value(x) + tw.value(x - spread))
                })
            };
            theorems::squeezing_diagnostic(
                nl,
                kernel,
                solver,
                &v0,
                extra_f64(config, "xi_hat", 0.0),
                extra_f64(config, "h_hat", spread),
                extra_f64(config, "delta_hat", 0.04),
                t_run,
            )?
        }
        "decay" => {
            let theta2 = extra_f64(config, "theta2", 0.04);
            let h = extra_f64(config, "h", 2.0);
            let t0_list = extra_f64_list(config, "t0_list", &[0.0, 5.0]);
            theorems::decay_experiment(nl, kernel, solver, theta2, h, &t0_list)?
        }
        "uniqueness" => {
            let t_run = extra_f64(config, "t_run", 80.0);
            theorems::uniqueness_experiment(
                nl,
                kernel,
                solver,
                |x| if x < 0.0 { 1.0 } else { 0.0 },
                |x| 0.5 * (1.0 - (x / 2.0).tanh()),
                t_run,
            )?
        }
        "periodicity" => {
            let n_periods = extra_f64(config, "n_periods", 10.0) as usize;
            theorems::periodicity_experiment(nl, kernel, solver, n_periods)?
        }
        "asymptotic_speed" => {
            let t_run = extra_f64(config, "t_run", 400.0);
            theorems::asymptotic_speed_experiment(nl, kernel, solver, t_run)?
        }
        "perturbation_limit" => {
            let eps_list = extra_f64_list(config, "eps_list", &[0.1, 0.05, 0.01]);
            let t_relax = extra_f64(config, "t_relax", 80.0);
            theorems::perturbation_limit(nl, kernel, solver, &eps_list, t_relax)?
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown experiment '{other}'; available: {}",
                EXPERIMENTS.join(", ")
            )))
        }
    };

    // per-experiment artifacts: series as CSVs, full report as JSON
    let dir = out.join(&report.name);
    std::fs::create_dir_all(&dir)?;
    for (series_name, series) in &report.series {
        write_series_csv(&dir.join(format!("{series_name}.csv")), series_name, series)?;
    }
    write_json(&dir.join("experiment.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
enum SuiteEntry {
    Completed { pass: bool, report: ExperimentReport },
    Skipped { reason: String },
    Failed { error: String },
}

fn run_suite(
    config: &RunConfig,
    nl: &Nonlinearity,
    kernel: &Kernel,
    solver: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    // gate: the medium must be unbalanced for any front experiment to make
    // sense; if the gate fails every experiment is skipped with the reason
    let t_relax = extra_f64(config, "t_relax", 400.0);
    let unbalanced = check_unbalanced(nl, kernel, solver, t_relax)?;
    let mut entries: Vec<(String, SuiteEntry)> = Vec::new();
    let mut pass = unbalanced.pass && unbalanced.resolved;

    let experiments: Vec<&str> = EXPERIMENTS
        .iter()
        .copied()
        .filter(|n| *n != "periodicity" || nl.theta_signal().is_some_and(|s| s.period().is_some()))
        .collect();

    if !pass {
        let reason = format!(
            "unbalanced-medium gate failed (bounding speed {:.6}, resolved: {})",
            unbalanced.speed_fb, unbalanced.resolved
        );
        for name in &experiments {
            entries.push((name.to_string(), SuiteEntry::Skipped { reason: reason.clone() }));
        }
    } else {
        let run_one = |name: &str| -> (String, SuiteEntry) {
            match run_experiment(name, config, nl, kernel, solver, &opts.out) {
                Ok(report) => (
                    name.to_string(),
                    SuiteEntry::Completed {
                        pass: report.pass(),
                        report,
                    },
                ),
                Err(e) => (name.to_string(), SuiteEntry::Failed { error: e.to_string() }),
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            entries = experiments.par_iter().map(|n| run_one(n)).collect();
        }
        #[cfg(not(feature = "parallel"))]
        {
            entries = experiments.iter().map(|n| run_one(n)).collect();
        }
        pass = entries.iter().all(|(_, e)| matches!(e, SuiteEntry::Completed { pass: true, .. }));
    }

    let detail = serde_json::json!({
        "unbalanced_gate": unbalanced,
        "experiments": entries
            .iter()
            .map(|(n, e)| serde_json::json!({ "name": n, "outcome": e }))
            .collect::<Vec<_>>(),
    });
    Ok(RunOutcome {
        subcommand: "suite".into(),
        pass,
        seed: opts.seed,
        detail,
    })
}
