//! Time integration of `u_t = J*u - u + eps u_xx + f(t,u)` on a finite
//! window.
//!
//! Two schemes: `euler_monotone` is explicit Euler under the step-size
//! condition `dt (1 + L_f + 2 eps/dx^2) <= 1`, which makes each step a
//! monotone function of the field (discrete comparison principle) — every
//! ordering-sensitive experiment uses it. `rk4` is the classical fourth
//! order scheme for accuracy-sensitive fits (speeds, decay rates); it is
//! not order-preserving.
//!
//! The moving front is kept inside the window by integer-cell re-centering;
//! `Grid1D::shift_accum` converts window positions back to absolute ones.

use crate::error::{Error, Result};
use crate::fronts;
use crate::grid::{convolve_on_grid, Closure, Grid1D, Kernel};
use crate::media::{Nonlinearity, U_MAX, U_MIN};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMonotone,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Coefficient of the u_xx perturbation (0 for the unperturbed model).
    pub epsilon: f64,
    pub closure: Closure,
    pub recenter_level: f64,
    pub recenter_target: f64,
}

impl SolverConfig {
    pub fn new(dt: f64, scheme: Scheme) -> Self {
        SolverConfig {
            dt,
            scheme,
            epsilon: 0.0,
            closure: Closure::Front,
            recenter_level: 0.5,
            recenter_target: 0.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    /// Monotonicity condition for the Euler scheme.
    pub fn check_monotone(&self, nl: &Nonlinearity, dx: f64) -> Result<()> {
        if self.scheme != Scheme::EulerMonotone {
            return Ok(());
        }
        let budget = self.dt * (1.0 + nl.lipschitz() + 2.0 * self.epsilon / (dx * dx));
        if budget > 1.0 + 1e-12 {
            return Err(Error::Configuration(format!(
                "euler_monotone step condition violated: dt (1 + L_f + 2 eps/dx^2) = {budget:.6} > 1; \
                 reduce dt below {:.6}",
                self.dt / budget
            )));
        }
        Ok(())
    }

    pub fn validate(&self, nl: &Nonlinearity, dx: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Configuration(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Configuration(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if !(0.0 < self.recenter_level && self.recenter_level < 1.0) {
            return Err(Error::Configuration(format!(
                "recenter_level must be in (0,1), got {}",
                self.recenter_level
            )));
        }
        self.check_monotone(nl, dx)
    }
}

/// The field u(t, .) on its window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn new(grid: Grid1D, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::invalid(format!(
                "values length {} != grid n {}",
                values.len(),
                grid.n
            )));
        }
        Ok(FieldState { grid, values, t })
    }

    /// Builds a field by sampling a profile of the absolute coordinate.
    pub fn from_profile(grid: Grid1D, t: f64, profile: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|i| profile(grid.x_abs(i))).collect();
        FieldState { grid, values, t }
    }
}

/// Right-hand side J*u - u + eps u_xx + f(t,u) at the field's time.
pub fn rhs(
    state_t: f64,
    grid: &Grid1D,
    values: &[f64],
    nl: &Nonlinearity,
    kernel: &Kernel,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let conv = convolve_on_grid(kernel, grid, values, cfg.closure)?;
    let n = values.len();
    let dx2 = grid.dx * grid.dx;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let v = values[i];
        let lap = if cfg.epsilon > 0.0 {
            let left = if i == 0 { cfg.closure.left() } else { values[i - 1] };
            let right = if i + 1 == n {
                cfg.closure.right()
            } else {
                values[i + 1]
            };
            cfg.epsilon * (left - 2.0 * v + right) / dx2
        } else {
            0.0
        };
        out.push(conv[i] - v + lap + nl.f_any(state_t, v));
    }
    Ok(out)
}

fn check_domain(state: &FieldState) -> Result<()> {
    for (i, &v) in state.values.iter().enumerate() {
        if !(U_MIN..=U_MAX).contains(&v) {
            if v.is_nan() {
                return Err(nan_abort(state, i));
            }
            return Err(Error::Domain { u: v });
        }
    }
    Ok(())
}

fn nan_abort(state: &FieldState, node: usize) -> Error {
    let dump = std::env::temp_dir().join(format!(
        "frontlab-nan-t{:.3}-pid{}.json",
        state.t,
        std::process::id()
    ));
    let _ = std::fs::write(
        &dump,
        serde_json::to_vec(state).unwrap_or_default(),
    );
    Error::NanAbort {
        t: state.t,
        node,
        dump: dump.display().to_string(),
    }
}

/// One time step of length `cfg.dt`.
pub fn step(
    state: &FieldState,
    nl: &Nonlinearity,
    kernel: &Kernel,
    cfg: &SolverConfig,
) -> Result<FieldState> {
    cfg.validate(nl, state.grid.dx)?;
    step_by(state, nl, kernel, cfg, cfg.dt)
}

/// One step of explicit length `dt <= cfg.dt` (used to land exactly on
/// observer times); assumes the config was validated at the full dt.
fn step_by(
    state: &FieldState,
    nl: &Nonlinearity,
    kernel: &Kernel,
    cfg: &SolverConfig,
    dt: f64,
) -> Result<FieldState> {
    check_domain(state)?;
    let (grid, t, u) = (&state.grid, state.t, &state.values);
    let values = match cfg.scheme {
        Scheme::EulerMonotone => {
            let r = rhs(t, grid, u, nl, kernel, cfg)?;
            u.iter().zip(r.iter()).map(|(v, k)| v + dt * k).collect()
        }
        Scheme::Rk4 => {
            let k1 = rhs(t, grid, u, nl, kernel, cfg)?;
            let u2: Vec<f64> = u.iter().zip(&k1).map(|(v, k)| v + 0.5 * dt * k).collect();
            let k2 = rhs(t + 0.5 * dt, grid, &u2, nl, kernel, cfg)?;
            let u3: Vec<f64> = u.iter().zip(&k2).map(|(v, k)| v + 0.5 * dt * k).collect();
            let k3 = rhs(t + 0.5 * dt, grid, &u3, nl, kernel, cfg)?;
            let u4: Vec<f64> = u.iter().zip(&k3).map(|(v, k)| v + dt * k).collect();
            let k4 = rhs(t + dt, grid, &u4, nl, kernel, cfg)?;
            u.iter()
                .enumerate()
                .map(|(i, v)| v + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    let next = FieldState {
        grid: *grid,
        values,
        t: t + dt,
    };
    if let Some(i) = next.values.iter().position(|v| v.is_nan()) {
        return Err(nan_abort(&next, i));
    }
    Ok(next)
}

/// Translates the window by an integer number of cells so that the level
/// crossing X_level lands within dx of `target` (window coordinates).
/// Values scrolled in are filled from the closure; `shift_accum` keeps the
/// absolute frame.
pub fn recenter(
    state: &FieldState,
    level: f64,
    target: f64,
    closure: Closure,
) -> Result<FieldState> {
    let (x_minus, _) = fronts::crossing_window(&state.grid, &state.values, level)?;
    let cells = ((x_minus - target) / state.grid.dx).trunc() as i64;
    Ok(shift_cells(state, cells, closure))
}

/// Scrolls the field left by `cells` grid cells (negative scrolls right),
/// bumping `shift_accum` so absolute positions are preserved.
pub fn shift_cells(state: &FieldState, cells: i64, closure: Closure) -> FieldState {
    let n = state.grid.n;
    let mut values = vec![0.0; n];
    for i in 0..n {
        let src = i as i64 + cells;
        values[i] = if src < 0 {
            closure.left()
        } else if src >= n as i64 {
            closure.right()
        } else {
            state.values[src as usize]
        };
    }
    let mut grid = state.grid;
    grid.shift_accum += cells as f64 * grid.dx;
    FieldState {
        grid,
        values,
        t: state.t,
    }
}

/// Sampling directives for [`evolve_to`].
#[derive(Debug, Clone, Default)]
pub struct Observers {
    /// Record full snapshots at exact multiples of this cadence.
    pub snapshot_every: Option<f64>,
    /// Record interface locations at exact multiples of this cadence.
    pub interface_every: Option<f64>,
    /// Levels tracked by the interface observer.
    pub levels: Vec<f64>,
    /// Re-center the window after each observer event.
    pub recenter: bool,
}

/// One interface sample; positions are absolute (window + shift).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InterfaceSample {
    pub t: f64,
    pub level: f64,
    pub x_minus: f64,
    pub x_plus: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Records {
    pub snapshots: Vec<FieldState>,
    pub interfaces: Vec<InterfaceSample>,
}

/// Integrates to `t_end`, recording at observer cadences. Event times are
/// exact multiples of the cadence: the step is shortened to land on them
/// and the clock is snapped to the multiple to prevent drift.
pub fn evolve_to(
    state: FieldState,
    nl: &Nonlinearity,
    kernel: &Kernel,
    cfg: &SolverConfig,
    t_end: f64,
    observers: &Observers,
) -> Result<(FieldState, Records)> {
    if t_end < state.t {
        return Err(Error::invalid(format!(
            "t_end = {t_end} precedes state.t = {}",
            state.t
        )));
    }
    cfg.validate(nl, state.grid.dx)?;
    let mut records = Records::default();
    let mut state = state;
    let eps = 1e-9 * cfg.dt;

    // smallest cadence multiple strictly beyond t (beyond the firing slack,
    // so an event never reschedules itself)
    let next_multiple = |cadence: f64, t: f64| -> f64 {
        (((t + eps) / cadence).floor() + 1.0) * cadence
    };

    loop {
        // handle any events due at the current time
        let mut fired = false;
        if let Some(c) = observers.snapshot_every {
            if (state.t / c - (state.t / c).round()).abs() * c < eps {
                records.snapshots.push(state.clone());
                fired = true;
            }
        }
        if let Some(c) = observers.interface_every {
            if (state.t / c - (state.t / c).round()).abs() * c < eps {
                for &level in &observers.levels {
                    let (xm, xp) = fronts::interface_locations(&state, level)?;
                    records.interfaces.push(InterfaceSample {
                        t: state.t,
                        level,
                        x_minus: xm,
                        x_plus: xp,
                    });
                }
                fired = true;
            }
        }
        if fired && observers.recenter {
            state = recenter(&state, cfg.recenter_level, cfg.recenter_target, cfg.closure)?;
        }

        if state.t >= t_end - eps {
            break;
        }

        // next event horizon
        let mut horizon = t_end;
        for c in [observers.snapshot_every, observers.interface_every]
            .into_iter()
            .flatten()
        {
            let nm = next_multiple(c, state.t);
            if nm < horizon {
                horizon = nm;
            }
        }
        let dt = cfg.dt.min(horizon - state.t);
        state = step_by(&state, nl, kernel, cfg, dt)?;
        // snap the clock onto the event to avoid cadence drift
        if (state.t - horizon).abs() < eps {
            state.t = horizon;
        }
    }
    Ok((state, records))
}

/// Discretization residual R(t_i, x_j) = u_t - (J*u - u + eps u_xx) - f
/// with u_t from centered time differences of stored snapshots — an
/// independent check on the integrator and on constructed sub/super
/// solutions. Snapshots must be equally spaced in t; windows may differ by
/// integer-cell shifts (they are aligned through `shift_accum`).
///
/// Returns one row per interior sample time; entries cover the nodes at
/// least `kernel.half_width()` from both edges that exist in all three
/// aligned snapshots.
pub fn residual(
    samples: &[FieldState],
    nl: &Nonlinearity,
    kernel: &Kernel,
    cfg: &SolverConfig,
) -> Result<Vec<Vec<f64>>> {
    if samples.len() < 3 {
        return Err(Error::invalid("residual needs >= 3 snapshots"));
    }
    let dt = samples[1].t - samples[0].t;
    if !(dt > 0.0) {
        return Err(Error::invalid("snapshots must advance in time"));
    }
    for w in samples.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::invalid("snapshots must be equally spaced in t"));
        }
    }
    let dx = samples[0].grid.dx;
    let mut rows = Vec::with_capacity(samples.len() - 2);
    for k in 1..samples.len() - 1 {
        let (prev, cur, next) = (&samples[k - 1], &samples[k], &samples[k + 1]);
        let space = rhs(cur.t, &cur.grid, &cur.values, nl, kernel, cfg)?;
        // index offset of cur's node i in the other snapshots
        let off = |other: &FieldState| -> i64 {
            ((cur.grid.shift_accum - other.grid.shift_accum) / dx).round() as i64
        };
        let (op, on) = (off(prev), off(next));
        let hw = kernel.half_width() as i64;
        let n = cur.grid.n as i64;
        let lo = hw.max(-op).max(-on).max(1);
        let hi = (n - hw).min(n - op).min(n - on).min(n - 1);
        let mut row = Vec::new();
        for i in lo..hi {
            let u_t = (next.values[(i + on) as usize] - prev.values[(i + op) as usize])
                / (2.0 * dt);
            row.push(u_t - space[i as usize]);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Largest absolute residual entry.
pub fn residual_max(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &b| a.max(b.abs()))
}
