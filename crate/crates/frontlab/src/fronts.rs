//! Interface extraction and front-shape diagnostics.
//!
//! The interface at level lambda is located through the inf/sup definitions
//! `X^-(t) = inf{x : u <= lambda}`, `X^+(t) = sup{x : u >= lambda}` with
//! monotone piecewise-linear interpolation between nodes — no higher-order
//! interpolation, so the definitions hold exactly on monotone data. All
//! reported positions are absolute (window coordinate plus accumulated
//! window shift).

use crate::error::{Error, Result};
use crate::evolve::{FieldState, InterfaceSample};
use crate::grid::{convolve_on_grid, Closure, Grid1D, Kernel};
use crate::media::Nonlinearity;
use serde::Serialize;

/// Minimum |u_x| at a crossing for a conditioned pointwise speed.
pub const STEEPNESS_FLOOR: f64 = 1e-3;

/// Level crossings in window coordinates: (first crossing from above,
/// last crossing from above).
pub fn crossing_window(grid: &Grid1D, values: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::invalid(format!("level must be in (0,1), got {level}")));
    }
    let above = values.iter().any(|&v| v > level);
    let below = values.iter().any(|&v| v <= level);
    if !above || !below {
        return Err(Error::TrackingLost { level });
    }
    let n = values.len();

    // X^- : infimum of {x : u <= level}
    let i = values.iter().position(|&v| v <= level).unwrap();
    let x_minus = if i == 0 {
        grid.x(0)
    } else {
        let (u0, u1) = (values[i - 1], values[i]);
        grid.x(i - 1) + grid.dx * (u0 - level) / (u0 - u1)
    };

    // X^+ : supremum of {x : u >= level}
    let j = values.iter().rposition(|&v| v >= level).unwrap();
    let x_plus = if j == n - 1 {
        grid.x(n - 1)
    } else {
        let (u0, u1) = (values[j], values[j + 1]);
        grid.x(j) + grid.dx * (u0 - level) / (u0 - u1)
    };
    Ok((x_minus, x_plus))
}

/// Level crossings in absolute coordinates.
pub fn interface_locations(state: &FieldState, level: f64) -> Result<(f64, f64)> {
    let (xm, xp) = crossing_window(&state.grid, &state.values, level)?;
    Ok((xm + state.grid.shift_accum, xp + state.grid.shift_accum))
}

/// Maximum centered-difference slope u_x over |x - center| <= M (center in
/// absolute coordinates). Strictly negative on transition-front states.
pub fn steepness(state: &FieldState, center: f64, m: f64) -> Result<f64> {
    let grid = &state.grid;
    let c_win = center - grid.shift_accum;
    let lo = ((c_win - m - grid.x_left) / grid.dx).floor() as i64;
    let hi = ((c_win + m - grid.x_left) / grid.dx).ceil() as i64;
    if lo < 1 || hi > grid.n as i64 - 2 {
        return Err(Error::invalid(format!(
            "steepness window [{} - {m}, {} + {m}] leaves the grid interior",
            center, center
        )));
    }
    let mut max_slope = f64::NEG_INFINITY;
    for i in lo as usize..=hi as usize {
        let s = (state.values[i + 1] - state.values[i - 1]) / (2.0 * grid.dx);
        max_slope = max_slope.max(s);
    }
    Ok(max_slope)
}

/// Exponential tail fit around the reference position `x_ref` (absolute).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Right tail: u ~ exp(-c_plus (x - x_ref - h_plus)).
    pub c_plus: f64,
    pub h_plus: f64,
    pub residual_plus: f64,
    /// Left tail: 1 - u ~ exp(c_minus (x - x_ref + h_minus)).
    pub c_minus: f64,
    pub h_minus: f64,
    pub residual_minus: f64,
}

/// Ordinary least squares y = intercept + slope x; returns
/// (intercept, slope, max |deviation|).
pub fn linfit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::invalid("linfit needs >= 2 matched points"));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("linfit: degenerate abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0f64, f64::max);
    Ok((intercept, slope, res))
}

/// Fits one exponential tail: (rate, offset h, max fit deviation).
/// `right = true` fits log u on offsets [a, b] from `x_ref`; `right =
/// false` fits log(1 - u) on [-b, -a].
pub fn fit_decay_side(
    state: &FieldState,
    x_ref: f64,
    a: f64,
    b: f64,
    right: bool,
) -> Result<(f64, f64, f64)> {
    if !(0.0 < a && a < b) {
        return Err(Error::invalid("fit range must satisfy 0 < a < b"));
    }
    let grid = &state.grid;
    let collect = |lo: f64, hi: f64, transform: &dyn Fn(f64) -> Option<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..grid.n {
            let x = grid.x_abs(i) - x_ref;
            if x < lo || x > hi {
                continue;
            }
            match transform(state.values[i]) {
                Some(y) => {
                    xs.push(x);
                    ys.push(y);
                }
                None => {
                    return Err(Error::FitWindow(format!(
                        "non-positive tail value {} at offset {x}",
                        state.values[i]
                    )))
                }
            }
        }
        if xs.len() < 20 {
            return Err(Error::FitWindow(format!(
                "fit window [{lo}, {hi}] holds only {} nodes (need >= 20)",
                xs.len()
            )));
        }
        Ok((xs, ys))
    };

    let floor = 10.0 * f64::EPSILON;
    if right {
        let (xp, yp) = collect(a, b, &|u| (u > floor).then(|| u.ln()))?;
        let (intercept, slope, residual) = linfit(&xp, &yp)?;
        let c = -slope;
        if c <= 0.0 {
            return Err(Error::FitWindow(format!(
                "right tail does not decay (fitted rate {c})"
            )));
        }
        Ok((c, intercept / c, residual))
    } else {
        let (xm, ym) = collect(-b, -a, &|u| (1.0 - u > floor).then(|| (1.0 - u).ln()))?;
        let (intercept, slope, residual) = linfit(&xm, &ym)?;
        let c = slope;
        if c <= 0.0 {
            return Err(Error::FitWindow(format!(
                "left tail does not decay (fitted rate {c})"
            )));
        }
        Ok((c, intercept / c, residual))
    }
}

/// Fits both tails over offsets [a, b] (right) and [-b, -a] (left).
pub fn fit_decay(state: &FieldState, x_ref: f64, a: f64, b: f64) -> Result<DecayFit> {
    let (c_plus, h_plus, residual_plus) = fit_decay_side(state, x_ref, a, b, true)?;
    let (c_minus, h_minus, residual_minus) = fit_decay_side(state, x_ref, a, b, false)?;
    Ok(DecayFit {
        c_plus,
        h_plus,
        residual_plus,
        c_minus,
        h_minus,
        residual_minus,
    })
}

/// Diameter of the band {x : eps1 <= u <= eps2} at one time (0 if empty).
pub fn width_diagnostic(state: &FieldState, eps1: f64, eps2: f64) -> Result<f64> {
    if !(0.0 < eps1 && eps1 <= eps2 && eps2 < 1.0) {
        return Err(Error::invalid("need 0 < eps1 <= eps2 < 1"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in state.values.iter().enumerate() {
        if (eps1..=eps2).contains(&v) {
            let x = state.grid.x_abs(i);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if lo > hi {
        return Ok(0.0);
    }
    Ok(hi - lo)
}

/// Supremum of the band width over a sampled run.
pub fn width_sup(states: &[FieldState], eps1: f64, eps2: f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for s in states {
        sup = sup.max(width_diagnostic(s, eps1, eps2)?);
    }
    Ok(sup)
}

/// Centered-difference slopes of a position series (one-sided at the ends).
pub fn series_velocity(times: &[f64], xs: &[f64]) -> Vec<f64> {
    let n = times.len();
    assert_eq!(n, xs.len());
    if n < 2 {
        return vec![];
    }
    (0..n)
        .map(|k| {
            let (a, b) = match k {
                0 => (0, 1),
                _ if k == n - 1 => (n - 2, n - 1),
                _ => (k - 1, k + 1),
            };
            (xs[b] - xs[a]) / (times[b] - times[a])
        })
        .collect()
}

/// Instantaneous front speed at a level crossing, with u_t replaced by the
/// equation's right-hand side: -[(J*u)(X) - level + f(t, level)] / u_x(X).
pub fn pointwise_front_speed(
    state: &FieldState,
    nl: &Nonlinearity,
    kernel: &Kernel,
    closure: Closure,
    level: f64,
) -> Result<f64> {
    let grid = &state.grid;
    let (x_win, _) = crossing_window(grid, &state.values, level)?;
    let conv = convolve_on_grid(kernel, grid, &state.values, closure)?;

    let pos = (x_win - grid.x_left) / grid.dx;
    let i = (pos.floor() as usize).clamp(1, grid.n - 3);
    let w = pos - i as f64;
    let lerp = |arr: &[f64]| arr[i] * (1.0 - w) + arr[i + 1] * w;

    let slopes: Vec<f64> = (0..grid.n)
        .map(|j| match j {
            0 => (state.values[1] - state.values[0]) / grid.dx,
            j if j == grid.n - 1 => (state.values[j] - state.values[j - 1]) / grid.dx,
            j => (state.values[j + 1] - state.values[j - 1]) / (2.0 * grid.dx),
        })
        .collect();
    let ux = lerp(&slopes);
    if ux.abs() < STEEPNESS_FLOOR {
        return Err(Error::IllConditionedSpeed {
            slope: ux,
            floor: STEEPNESS_FLOOR,
            level,
        });
    }
    let u_t = lerp(&conv) - level + nl.f_any(state.t, level);
    Ok(-u_t / ux)
}

/// Per-level interface history with fitted drift slopes.
#[derive(Debug, Clone, Serialize)]
pub struct InterfaceTrack {
    pub levels: Vec<f64>,
    pub times: Vec<f64>,
    /// x_minus[k][j]: level k, time j (absolute positions).
    pub x_minus: Vec<Vec<f64>>,
    pub x_plus: Vec<Vec<f64>>,
    /// Least-squares slope of x_minus per level.
    pub speeds: Vec<f64>,
}

impl InterfaceTrack {
    pub fn from_samples(samples: &[InterfaceSample]) -> Result<InterfaceTrack> {
        let mut levels: Vec<f64> = samples.iter().map(|s| s.level).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        let mut times: Vec<f64> = samples
            .iter()
            .filter(|s| s.level == levels[0])
            .map(|s| s.t)
            .collect();
        times.dedup();
        let mut x_minus = vec![Vec::with_capacity(times.len()); levels.len()];
        let mut x_plus = vec![Vec::with_capacity(times.len()); levels.len()];
        for s in samples {
            let k = levels
                .iter()
                .position(|&l| l == s.level)
                .ok_or_else(|| Error::invalid("inconsistent levels in samples"))?;
            x_minus[k].push(s.x_minus);
            x_plus[k].push(s.x_plus);
        }
        for k in 0..levels.len() {
            if x_minus[k].len() != times.len() {
                return Err(Error::invalid("levels sampled at different times"));
            }
        }
        let speeds = x_minus
            .iter()
            .map(|xs| linfit(&times, xs).map(|(_, slope, _)| slope))
            .collect::<Result<Vec<f64>>>()?;
        Ok(InterfaceTrack {
            levels,
            times,
            x_minus,
            x_plus,
            speeds,
        })
    }

    /// max over sampled times of |X_level(t) - X_ref_level(t)| using x_minus.
    pub fn gap(&self, level: f64, ref_level: f64) -> Result<f64> {
        let k = self
            .levels
            .iter()
            .position(|&l| l == level)
            .ok_or_else(|| Error::invalid(format!("level {level} not tracked")))?;
        let r = self
            .levels
            .iter()
            .position(|&l| l == ref_level)
            .ok_or_else(|| Error::invalid(format!("level {ref_level} not tracked")))?;
        Ok(self.x_minus[k]
            .iter()
            .zip(&self.x_minus[r])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max))
    }
}
