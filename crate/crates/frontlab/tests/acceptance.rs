//! Acceptance gate: one pass/fail line per criterion, printed straight to
//! the terminal (bypassing harness capture) so plain `cargo test` shows them.

use frontlab::evolve::{evolve_to, step, FieldState, Observers, Scheme, SolverConfig};
use frontlab::fronts::{interface_locations, steepness};
use frontlab::grid::{Closure, Grid1D, Kernel, KernelFamily};
use frontlab::media::{Nonlinearity, TimeSignal};
use frontlab::theorems::{self, Perturbation};
use frontlab::waves::{compute_wave, compute_wave_from, optimal_shift, TravelingWave};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Steepness margin of the periodic-medium front (max u_x over all
/// sampling windows), recorded at first run; regression band is +/-20%.
const GOLDEN_STEEPNESS_MARGIN: f64 = -0.02814;

type CheckResult = Result<(bool, String), frontlab::Error>;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn run(&mut self, idx: usize, name: &str, check: impl FnOnce() -> CheckResult) {
        let started = Instant::now();
        let (pass, detail) = match check() {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let line = format!(
            "criterion {idx:2} [{}] {name}: {detail} ({:.1}s)\n",
            if pass { "pass" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        // Write to the process stdout directly: the harness only intercepts
        // the print macros, and these lines should show without --nocapture.
        use std::io::Write;
        match std::fs::OpenOptions::new().write(true).open("/dev/stdout") {
            Ok(mut f) => {
                let _ = f.write_all(line.as_bytes());
            }
            Err(_) => print!("{line}"),
        }
        if !pass {
            self.failures.push(format!("criterion {idx} {name}: {detail}"));
        }
    }
}

fn gaussian_kernel(dx: f64) -> Kernel {
    Kernel::make(KernelFamily::Gaussian, 1.0, dx, 1e-10).unwrap()
}

fn cubic_constant(theta: f64) -> Nonlinearity {
    Nonlinearity::cubic(TimeSignal::Constant { value: theta }, 0.05, 0.9).unwrap()
}

fn cubic_periodic() -> Nonlinearity {
    Nonlinearity::cubic(
        TimeSignal::Periodic {
            mean: 0.25,
            amplitude: 0.05,
            period: 2.0,
        },
        0.05,
        0.9,
    )
    .unwrap()
}

fn failing(report: &theorems::ExperimentReport) -> String {
    let names: Vec<&str> = report
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if names.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", names.join(", "))
    }
}

fn euler(dt: f64) -> SolverConfig {
    SolverConfig::new(dt, Scheme::EulerMonotone)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// 1. Discrete order preservation on random ordered pairs.
fn comparison_principle() -> CheckResult {
    let started = Instant::now();
    let nl = cubic_constant(0.25);
    let kernel = gaussian_kernel(0.1);
    let cfg = euler(0.1);
    let grid = Grid1D::new(-25.6, 0.1, 512)?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let lo: Vec<f64> = (0..grid.n).map(|_| rng.gen::<f64>()).collect();
        let hi: Vec<f64> = lo
            .iter()
            .map(|&v| v + rng.gen::<f64>() * (1.0 - v))
            .collect();
        let mut a = FieldState::new(grid, lo, 0.0)?;
        let mut b = FieldState::new(grid, hi, 0.0)?;
        for _ in 0..500 {
            a = step(&a, &nl, &kernel, &cfg)?;
            b = step(&b, &nl, &kernel, &cfg)?;
            for i in 0..grid.n {
                worst = worst.max(a.values[i] - b.values[i]);
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && elapsed < 30.0;
    Ok((pass, format!("max order defect {worst:.2e}, runtime {elapsed:.1}s (< 30s)")))
}

// 2. Constant equilibria are exact fixed points.
fn equilibria_exact() -> CheckResult {
    let grid = Grid1D::new(-12.8, 0.1, 256)?;
    let nl = cubic_constant(0.25);
    let mut worst = 0.0f64;
    for family in [KernelFamily::Gaussian, KernelFamily::Uniform, KernelFamily::Laplace] {
        let kernel = Kernel::make(family, 1.0, 0.1, 1e-10)?;
        for scheme in [Scheme::EulerMonotone, Scheme::Rk4] {
            let cases = [
                (0.0, Closure::Zero),
                (0.0, Closure::Constant { left: 0.0, right: 0.0 }),
                (1.0, Closure::Constant { left: 1.0, right: 1.0 }),
            ];
            for (value, closure) in cases {
                let cfg = SolverConfig::new(0.1, scheme).with_closure(closure);
                let mut state = FieldState::new(grid, vec![value; grid.n], 0.0)?;
                for _ in 0..5 {
                    let next = step(&state, &nl, &kernel, &cfg)?;
                    for i in 0..grid.n {
                        worst = worst.max((next.values[i] - value).abs());
                    }
                    state = next;
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("max per-step drift {worst:.2e}")))
}

// 3. Balanced cubic forces zero wave speed by odd symmetry.
fn balanced_speed() -> CheckResult {
    let started = Instant::now();
    let nl = Nonlinearity::cubic(TimeSignal::Constant { value: 0.5 }, 0.05, 0.92)?;
    let kernel = gaussian_kernel(0.05);
    let wave = compute_wave(&nl, &kernel, &euler(0.1), 0.5, 200.0)?;
    let elapsed = started.elapsed().as_secs_f64();
    let pass = wave.speed.abs() <= 2e-3 && elapsed < 120.0;
    Ok((pass, format!("|c| = {:.2e}, runtime {elapsed:.1}s (< 120s)", wave.speed.abs())))
}

// 4. Traveling wave: advection self-consistency and uniqueness up to shift.
fn wave_self_consistency() -> CheckResult {
    let nl = cubic_constant(0.25);
    let kernel = gaussian_kernel(0.1);
    let cfg = euler(0.1);
    let wave = compute_wave(&nl, &kernel, &cfg, 0.5, 400.0)?;

    let state = FieldState::new(wave.grid, wave.profile.clone(), 0.0)?;
    let (advected, _) = evolve_to(state, &nl, &kernel, &cfg, 1.0, &Observers::default())?;
    let margin = 2 * kernel.half_width();
    let mut advect_err = 0.0f64;
    for i in margin..wave.grid.n - margin {
        let expected = wave.value(wave.grid.x(i) - wave.speed);
        advect_err = advect_err.max((advected.values[i] - expected).abs());
    }

    let wave2 = compute_wave_from(&nl, &kernel, &cfg, 0.5, 400.0, |x| {
        0.5 * (1.0 - (x / 3.0).tanh())
    })?;
    let (_, agree) = optimal_shift(&wave.profile, &wave2.profile, wave.grid.dx);

    let pass = advect_err < 1e-3 && agree < 1e-4;
    Ok((pass, format!("advect error {advect_err:.2e} (< 1e-3), init agreement {agree:.2e} (< 1e-4)")))
}

// 5. Explicit envelope residuals stay one-sided up to discretization
//    tolerance.
fn envelope_residuals() -> CheckResult {
    let nl = cubic_constant(0.25);
    let kernel = gaussian_kernel(0.1);
    let cfg_burn = euler(0.1);
    let u0 = theorems::reference_front(&nl, &kernel, &cfg_burn, 60.0, 0.0, 30.0)?;

    let hyp = nl.validate_hypotheses(512, 128, 20.0);
    let omega = hyp.decay.beta0.min(hyp.decay.beta1);
    let c_star = nl.lipschitz();
    let (xf, _) = interface_locations(&u0, 0.5)?;
    let c_m = steepness(&u0, xf, 5.0)?;
    let a_const = 2.0 * c_star / (-c_m);
    let mu = 0.03;

    // discretization tolerance: 10x the rk4 self-convergence estimate
    let rk4 = SolverConfig::new(0.1, Scheme::Rk4);
    let rk4h = SolverConfig::new(0.05, Scheme::Rk4);
    let (coarse, _) = evolve_to(u0.clone(), &nl, &kernel, &rk4, 2.0, &Observers::default())?;
    let (fine, _) = evolve_to(u0.clone(), &nl, &kernel, &rk4h, 2.0, &Observers::default())?;
    let est = sup_diff(&coarse.values, &fine.values);
    let tol = 10.0 * est;

    let mut state = u0;
    let dx = state.grid.dx;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=40 {
        let t = 0.5 * k as f64;
        let delta = mu * (-omega * t).exp();
        for i in 1..state.grid.n - 1 {
            let u = state.values[i];
            let ux = (state.values[i + 1] - state.values[i - 1]) / (2.0 * dx);
            let f0 = nl.eval_f(t, u)?;
            // lower envelope residual must be <= 0
            let r_minus = f0 - nl.eval_f(t, u - delta)? + a_const * delta * ux + omega * delta;
            // upper envelope residual must be >= 0 (record its negation)
            let r_plus = f0 - nl.eval_f(t, u + delta)? - a_const * delta * ux - omega * delta;
            worst = worst.max(r_minus).max(-r_plus);
        }
        if k < 40 {
            let t_next = t + 0.5;
            let (s, _) = evolve_to(state, &nl, &kernel, &rk4, t_next, &Observers::default())?;
            state = s;
        }
    }
    let pass = worst <= tol;
    Ok((pass, format!("worst residual excess {worst:.2e}, tolerance {tol:.2e}")))
}

// 6. Uniform steepness in a periodic medium, with regression band.
fn uniform_steepness() -> CheckResult {
    let nl = cubic_periodic();
    // wide dispersal so the front slope is still below -0.01 at the edges
    // of the M = 5 window
    let kernel = Kernel::make(KernelFamily::Gaussian, 2.0, 0.1, 1e-10)?;
    let cfg = euler(0.1);
    let u0 = theorems::reference_front(&nl, &kernel, &cfg, 60.0, 0.0, 30.0)?;
    let obs = Observers {
        snapshot_every: Some(0.5),
        interface_every: None,
        levels: vec![],
        recenter: true,
    };
    // 20 periods of the T = 2 medium
    let (_, recs) = evolve_to(u0, &nl, &kernel, &cfg, 40.0, &obs)?;
    let mut margin = f64::NEG_INFINITY;
    for snap in &recs.snapshots {
        let (xf, _) = interface_locations(snap, 0.5)?;
        margin = margin.max(steepness(snap, xf, 5.0)?);
    }
    let within_band = (margin - GOLDEN_STEEPNESS_MARGIN).abs() <= 0.2 * GOLDEN_STEEPNESS_MARGIN.abs();
    let pass = margin < -0.01 && within_band;
    Ok((pass, format!(
        "max u_x over windows {margin:.5} (< -0.01), golden {GOLDEN_STEEPNESS_MARGIN} +/- 20%"
    )))
}

// 7. Exponential stability with trapping envelope.
fn exponential_stability() -> CheckResult {
    let nl = cubic_periodic();
    let kernel = gaussian_kernel(0.1);
    let report = theorems::stability_experiment(
        &nl,
        &kernel,
        &euler(0.1),
        Perturbation::Bump { amplitude: 0.02, width: 1.0, offset: 0.0 },
        60.0,
    )?;
    let has_envelope = report.criteria.iter().any(|c| c.metric == "envelope_violation");
    let pass = report.pass() && has_envelope;
    Ok((pass, format!(
        "omega_fit {:.4}, final distance {:.2e}, envelope violation {:.2e}",
        report.metrics["omega_fit"],
        report.metrics["final_distance"],
        report.metrics.get("envelope_violation").copied().unwrap_or(f64::NAN)
    ) + &failing(&report)))
}

// 8. Squeezing contraction of the certified sandwich width.
fn squeezing_contraction() -> CheckResult {
    let nl = cubic_periodic();
    let kernel = gaussian_kernel(0.1);
    let cfg = euler(0.1);
    let u0 = theorems::reference_front(&nl, &kernel, &cfg, 60.0, 0.0, 30.0)?;
    // average of two translates: genuinely needs sandwich width 2, which
    // must then contract as the solution collapses onto a single translate
    let tw = TravelingWave {
        grid: u0.grid,
        profile: u0.values.clone(),
        speed: 0.0,
        pin_level: 0.5,
        trailing_change: 0.0,
    };
    let v0 = FieldState::from_profile(u0.grid, 0.0, |x| {
        0.5 * (tw.value(x) + tw.value(x - 2.0))
    });
    let report = theorems::squeezing_diagnostic(&nl, &kernel, &cfg, &v0, 0.0, 2.0, 0.04, 40.0)?;
    Ok((report.pass(), format!(
        "fitted q {:.4} (< 1), final width {:.2e}",
        report.metrics["q_fit"], report.metrics["final_width"]
    ) + &failing(&report)))
}

// 9. Decay exponents stable across start times; autonomous case matches
//    the wave tail.
fn decay_exponents() -> CheckResult {
    let nl = cubic_constant(0.25);
    let kernel = gaussian_kernel(0.1);
    let report = theorems::decay_experiment(&nl, &kernel, &euler(0.1), 0.04, 2.0, &[0.0, 4.0, 8.0])?;
    Ok((report.pass(), format!(
        "c+ min {:.4}, spread {:.4}, wave-tail mismatch {:.4}",
        report.metrics["c_plus_min"],
        report.metrics["c_plus_rel_spread"],
        report.metrics.get("c_plus_vs_wave").copied().unwrap_or(f64::NAN)
    ) + &failing(&report)))
}

// 10. Uniqueness: different front-like data converge to the same orbit.
fn uniqueness() -> CheckResult {
    let nl = cubic_periodic();
    let kernel = gaussian_kernel(0.1);
    let report = theorems::uniqueness_experiment(
        &nl,
        &kernel,
        &euler(0.1),
        |x| if x < 0.0 { 1.0 } else { 0.0 },
        |x| 0.5 * (1.0 - (x / 2.0).tanh()),
        80.0,
    )?;
    Ok((report.pass(), format!(
        "final distance {:.2e} (< 1e-4), shift oscillation {:.2e} (< dx)",
        report.metrics["final_distance"], report.metrics["shift_oscillation"]
    ) + &failing(&report)))
}

// 11. Periodic traveling wave; autonomous degenerate case matches the wave
//     speed.
fn periodic_wave() -> CheckResult {
    let kernel = gaussian_kernel(0.1);
    let cfg = euler(0.1);
    let report = theorems::periodicity_experiment(&cubic_periodic(), &kernel, &cfg, 10)?;

    let nl_const = cubic_constant(0.25);
    let wave = compute_wave(&nl_const, &kernel, &cfg, 0.5, 400.0)?;
    let degenerate = theorems::periodicity_experiment(&nl_const, &kernel, &cfg, 10)?;
    let c_rel = (degenerate.metrics["c_mean"] - wave.speed).abs() / wave.speed.abs();

    let pass = report.pass() && degenerate.pass() && c_rel < 0.01;
    Ok((pass, format!(
        "periodic c {:.5} (spread {:.4}), mismatch {:.2e}, degenerate c vs wave {:.4}",
        report.metrics["c_mean"],
        report.metrics["c_rel_spread"],
        report.metrics["recurrence_mismatch"],
        c_rel
    ) + &failing(&report) + &failing(&degenerate)))
}

// 12. Asymptotic speed in a quasiperiodic medium.
fn asymptotic_speed() -> CheckResult {
    let nl = Nonlinearity::cubic(
        TimeSignal::Quasiperiodic { mean: 0.25, amp1: 0.03, amp2: 0.03 },
        0.05,
        0.9,
    )?;
    let kernel = gaussian_kernel(0.1);
    let report = theorems::asymptotic_speed_experiment(&nl, &kernel, &euler(0.1), 400.0)?;
    Ok((report.pass(), format!(
        "speed {:.5}, trailing oscillation {:.4}, formula mismatch {:.4}",
        report.metrics["asymptotic_speed"],
        report.metrics["average_oscillation_rel"],
        report.metrics["pointwise_vs_displacement"]
    ) + &failing(&report)))
}

// 13. Vanishing-viscosity family: profile convergence and uniform width.
fn perturbation_limit() -> CheckResult {
    let nl = cubic_constant(0.25);
    let kernel = gaussian_kernel(0.1);
    let report =
        theorems::perturbation_limit(&nl, &kernel, &euler(0.1), &[0.1, 0.01, 0.0], 80.0)?;
    let d_coarse = report.metrics["distance_0.1_0.01"];
    let d_fine = report.metrics["distance_0.01_0"];
    let pass = report.pass() && d_fine < d_coarse;
    Ok((pass, format!(
        "distance(0.01, 0) = {d_fine:.2e} < distance(0.1, 0.01) = {d_coarse:.2e}, width sup {:.2}",
        report.metrics["width_sup"]
    ) + &failing(&report)))
}

// 14. Iterated-kernel lower bound on ordered-pair separation.
fn iterated_kernel_bound() -> CheckResult {
    let started = Instant::now();
    let nl = cubic_constant(0.25);
    let kernel = Kernel::make(KernelFamily::Gaussian, 0.35, 0.1, 1e-10)?;
    let cfg = euler(0.05).with_closure(Closure::Zero);
    let grid = Grid1D::new(-6.4, 0.1, 128)?;
    let big_k = nl.lipschitz();
    let r_support = kernel.half_width() as f64 * kernel.dx();
    let x_idx = grid.n / 2;
    let combos: [(f64, f64); 2] = [(0.0, 1.0), (2.5, 1.0)]; // (|x - z|, h)

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_margin = f64::INFINITY;
    for _ in 0..50 {
        let lo: Vec<f64> = (0..grid.n).map(|_| 0.8 * rng.gen::<f64>()).collect();
        let gap: Vec<f64> = (0..grid.n).map(|_| 0.2 * rng.gen::<f64>()).collect();
        let hi: Vec<f64> = lo.iter().zip(&gap).map(|(a, g)| a + g).collect();
        let mut a = FieldState::new(grid, lo, 0.0)?;
        let mut b = FieldState::new(grid, hi, 0.0)?;
        for &tau in &[0.5, 1.0, 2.0] {
            while a.t < tau - 1e-9 {
                a = step(&a, &nl, &kernel, &cfg)?;
                b = step(&b, &nl, &kernel, &cfg)?;
            }
            let w_x = b.values[x_idx] - a.values[x_idx];
            for (dist, h) in combos {
                let z_idx = x_idx + (dist / grid.dx).round() as usize;
                let n_folds = ((dist + h) / r_support).ceil().max(1.0) as usize;
                let iterated = kernel.iterate(n_folds)?;
                let c_tilde = iterated.min_over(-(dist + h), dist + h);
                let c = c_tilde
                    * (-(1.0 + big_k) * tau).exp()
                    * (tau / n_folds as f64).powi(n_folds as i32);
                let reach = (h / grid.dx).round() as usize;
                let mass0: f64 = ((z_idx - reach)..=(z_idx + reach))
                    .map(|i| gap[i] * grid.dx)
                    .sum();
                min_margin = min_margin.min(w_x - c * mass0);
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = min_margin >= 0.0 && elapsed < 60.0;
    Ok((pass, format!("min margin {min_margin:.2e} (>= 0), runtime {elapsed:.1}s (< 60s)")))
}

#[test]
fn acceptance() {
    let mut gate = Gate { failures: Vec::new() };
    gate.run(1, "discrete comparison principle", comparison_principle);
    gate.run(2, "equilibria exactness", equilibria_exact);
    gate.run(3, "balanced-symmetry speed", balanced_speed);
    gate.run(4, "traveling-wave self-consistency", wave_self_consistency);
    gate.run(5, "envelope residual one-sidedness", envelope_residuals);
    gate.run(6, "uniform steepness", uniform_steepness);
    gate.run(7, "exponential stability", exponential_stability);
    gate.run(8, "squeezing contraction", squeezing_contraction);
    gate.run(9, "decay exponents", decay_exponents);
    gate.run(10, "uniqueness up to shift", uniqueness);
    gate.run(11, "periodic traveling wave", periodic_wave);
    gate.run(12, "asymptotic speed", asymptotic_speed);
    gate.run(13, "perturbation limit", perturbation_limit);
    gate.run(14, "iterated-kernel bound", iterated_kernel_bound);
    assert!(
        gate.failures.is_empty(),
        "failed criteria:\n{}",
        gate.failures.join("\n")
    );
}
