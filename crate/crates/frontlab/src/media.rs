//! Time-dependent bistable media.
//!
//! The canonical reaction is the cubic `f(t,u) = u (u - theta(t)) (1 - u)`
//! whose unstable zero theta(t) drifts with a [`TimeSignal`]. Because the
//! cubic is decreasing in theta on [0,1], the autonomous cubics at the
//! extreme values of theta bound f from below and above, which is exactly
//! the sandwich the front theory needs. [`Nonlinearity::validate_hypotheses`]
//! exhibits the structural constants (bounding cubics, decay rates beta0 and
//! beta1 outside the bistable strip, common unstable zero) by brute-force
//! scanning rather than assuming them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Scalar signal t -> theta(t) driving the unstable zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TimeSignal {
    Constant {
        value: f64,
    },
    /// mean + amplitude * sin(2 pi t / period); evaluated through phase
    /// reduction so the period-T shift is exact in floating point.
    Periodic {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    /// mean + amp1 * sin(t) + amp2 * sin(sqrt(2) t): the standard uniquely
    /// ergodic two-frequency flow (irrational frequency ratio).
    Quasiperiodic {
        mean: f64,
        amp1: f64,
        amp2: f64,
    },
}

impl TimeSignal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeSignal::Constant { value } => value,
            TimeSignal::Periodic {
                mean,
                amplitude,
                period,
            } => {
                let phase = t.rem_euclid(period) / period;
                mean + amplitude * (2.0 * std::f64::consts::PI * phase).sin()
            }
            TimeSignal::Quasiperiodic { mean, amp1, amp2 } => {
                mean + amp1 * t.sin() + amp2 * (std::f64::consts::SQRT_2 * t).sin()
            }
        }
    }

    pub fn lower_bound(&self) -> f64 {
        match *self {
            TimeSignal::Constant { value } => value,
            TimeSignal::Periodic {
                mean, amplitude, ..
            } => mean - amplitude.abs(),
            TimeSignal::Quasiperiodic { mean, amp1, amp2 } => mean - amp1.abs() - amp2.abs(),
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match *self {
            TimeSignal::Constant { value } => value,
            TimeSignal::Periodic {
                mean, amplitude, ..
            } => mean + amplitude.abs(),
            TimeSignal::Quasiperiodic { mean, amp1, amp2 } => mean + amp1.abs() + amp2.abs(),
        }
    }

    pub fn period(&self) -> Option<f64> {
        match *self {
            TimeSignal::Periodic { period, .. } => Some(period),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            TimeSignal::Constant { .. } => true,
            TimeSignal::Periodic { amplitude, .. } => amplitude == 0.0,
            TimeSignal::Quasiperiodic { amp1, amp2, .. } => amp1 == 0.0 && amp2 == 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if let TimeSignal::Periodic { period, .. } = *self {
            if !(period > 0.0) {
                return Err(Error::invalid(format!(
                    "period must be positive, got {period}"
                )));
            }
        }
        Ok(())
    }
}

/// Autonomous cubic u (u - theta) (1 - u).
#[inline]
pub fn cubic(theta: f64, u: f64) -> f64 {
    u * (u - theta) * (1.0 - u)
}

/// d/du of the cubic: -3u^2 + 2(1+theta)u - theta.
#[inline]
pub fn cubic_du(theta: f64, u: f64) -> f64 {
    -3.0 * u * u + 2.0 * (1.0 + theta) * u - theta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
enum Reaction {
    /// Cubic with drifting unstable zero.
    CubicTheta { theta: TimeSignal },
    /// Autonomous tabulated reaction (piecewise linear in u), for stress
    /// tests; nodes must span [-1, 2] with f(0) = f(1) = 0.
    CustomTable { u_nodes: Vec<f64>, f_values: Vec<f64> },
}

/// Time-dependent bistable reaction plus the user-chosen strip margins
/// theta0 < theta_lo and theta1 > theta_hi that delimit the regions where
/// the reaction is uniformly decreasing in u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    reaction: Reaction,
    theta0: f64,
    theta1: f64,
}

pub const U_MIN: f64 = -1.0;
pub const U_MAX: f64 = 2.0;

impl Nonlinearity {
    /// Cubic family; `theta0`/`theta1` must leave room below/above the
    /// range of theta(t).
    pub fn cubic(theta: TimeSignal, theta0: f64, theta1: f64) -> Result<Self> {
        theta.validate()?;
        let (lo, hi) = (theta.lower_bound(), theta.upper_bound());
        if !(0.0 < lo && hi < 1.0) {
            return Err(Error::invalid(format!(
                "theta(t) range [{lo}, {hi}] must lie strictly inside (0, 1)"
            )));
        }
        if !(0.0 < theta0 && theta0 < lo) {
            return Err(Error::invalid(format!(
                "theta0 = {theta0} must lie in (0, inf theta) = (0, {lo})"
            )));
        }
        if !(hi < theta1 && theta1 < 1.0) {
            return Err(Error::invalid(format!(
                "theta1 = {theta1} must lie in (sup theta, 1) = ({hi}, 1)"
            )));
        }
        Ok(Nonlinearity {
            reaction: Reaction::CubicTheta { theta },
            theta0,
            theta1,
        })
    }

    /// Autonomous tabulated reaction (linear interpolation between nodes).
    pub fn custom_table(u_nodes: Vec<f64>, f_values: Vec<f64>, theta0: f64, theta1: f64) -> Result<Self> {
        if u_nodes.len() != f_values.len() || u_nodes.len() < 4 {
            return Err(Error::invalid("table needs >= 4 matched (u, f) nodes"));
        }
        if u_nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("table u nodes must be strictly increasing"));
        }
        if u_nodes[0] > U_MIN || *u_nodes.last().unwrap() < U_MAX {
            return Err(Error::invalid("table must span [-1, 2]"));
        }
        if !(0.0 < theta0 && theta0 < theta1 && theta1 < 1.0) {
            return Err(Error::invalid("need 0 < theta0 < theta1 < 1"));
        }
        Ok(Nonlinearity {
            reaction: Reaction::CustomTable { u_nodes, f_values },
            theta0,
            theta1,
        })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    /// Infimum of the unstable-zero signal (theta-tilde of the sandwich).
    pub fn theta_lo(&self) -> f64 {
        match &self.reaction {
            Reaction::CubicTheta { theta } => theta.lower_bound(),
            Reaction::CustomTable { .. } => self.zero_in_strip().unwrap_or(0.5),
        }
    }

    /// Supremum of the unstable-zero signal.
    pub fn theta_hi(&self) -> f64 {
        match &self.reaction {
            Reaction::CubicTheta { theta } => theta.upper_bound(),
            Reaction::CustomTable { .. } => self.zero_in_strip().unwrap_or(0.5),
        }
    }

    pub fn theta_signal(&self) -> Option<&TimeSignal> {
        match &self.reaction {
            Reaction::CubicTheta { theta } => Some(theta),
            Reaction::CustomTable { .. } => None,
        }
    }

    pub fn is_autonomous(&self) -> bool {
        match &self.reaction {
            Reaction::CubicTheta { theta } => theta.is_constant(),
            Reaction::CustomTable { .. } => true,
        }
    }

    /// Reaction value; `u` must stay in the certified range [-1, 2].
    pub fn eval_f(&self, t: f64, u: f64) -> Result<f64> {
        if !(U_MIN..=U_MAX).contains(&u) {
            return Err(Error::Domain { u });
        }
        Ok(self.f_any(t, u))
    }

    /// u-derivative; same domain contract as [`Self::eval_f`].
    pub fn eval_fu(&self, t: f64, u: f64) -> Result<f64> {
        if !(U_MIN..=U_MAX).contains(&u) {
            return Err(Error::Domain { u });
        }
        Ok(self.fu_any(t, u))
    }

    /// Internal infallible evaluation (solvers check the range once per step).
    #[inline]
    pub(crate) fn f_any(&self, t: f64, u: f64) -> f64 {
        match &self.reaction {
            Reaction::CubicTheta { theta } => cubic(theta.eval(t), u),
            Reaction::CustomTable { u_nodes, f_values } => interp(u_nodes, f_values, u),
        }
    }

    #[inline]
    pub(crate) fn fu_any(&self, t: f64, u: f64) -> f64 {
        match &self.reaction {
            Reaction::CubicTheta { theta } => cubic_du(theta.eval(t), u),
            Reaction::CustomTable { u_nodes, f_values } => {
                // slope of the active segment
                let i = segment(u_nodes, u);
                (f_values[i + 1] - f_values[i]) / (u_nodes[i + 1] - u_nodes[i])
            }
        }
    }

    /// Lower bounding autonomous reaction (cubic at the largest theta).
    pub fn f_lower(&self, u: f64) -> f64 {
        cubic(self.theta_hi(), u)
    }

    /// Upper bounding autonomous reaction (cubic at the smallest theta).
    pub fn f_upper(&self, u: f64) -> f64 {
        cubic(self.theta_lo(), u)
    }

    /// Uniform Lipschitz constant of u -> f(t,u) over [-1, 2]. The cubic's
    /// derivative is concave in u, so its absolute value peaks at an
    /// endpoint: |f_u(-1)| = 5 + 3 theta, |f_u(2)| = 8 - 3 theta.
    pub fn lipschitz(&self) -> f64 {
        match &self.reaction {
            Reaction::CubicTheta { theta } => {
                let lo = theta.lower_bound();
                let hi = theta.upper_bound();
                (5.0 + 3.0 * hi).max(8.0 - 3.0 * lo)
            }
            Reaction::CustomTable { u_nodes, f_values } => u_nodes
                .windows(2)
                .zip(f_values.windows(2))
                .map(|(u, f)| ((f[1] - f[0]) / (u[1] - u[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    fn zero_in_strip(&self) -> Option<f64> {
        // bisection of u -> f(0, u) on [theta0, theta1]
        let (mut a, mut b) = (self.theta0, self.theta1);
        let (fa, fb) = (self.f_any(0.0, a), self.f_any(0.0, b));
        if fa >= 0.0 || fb <= 0.0 {
            return None;
        }
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if self.f_any(0.0, m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }

    /// Scans the structural hypotheses and reports witnesses. Never fails:
    /// failures are encoded in the report.
    pub fn validate_hypotheses(
        &self,
        u_samples: usize,
        t_samples: usize,
        t_window: f64,
    ) -> HypothesisReport {
        let u_samples = u_samples.max(64);
        let t_samples = t_samples.max(64);
        let t_window = t_window.max(1.0);
        let tgrid: Vec<f64> = (0..t_samples)
            .map(|k| k as f64 * t_window / (t_samples - 1) as f64)
            .collect();

        // equilibria at 0 and 1, checked on the time sample
        let equilibria_err = tgrid
            .iter()
            .map(|&t| self.f_any(t, 0.0).abs().max(self.f_any(t, 1.0).abs()))
            .fold(0.0f64, f64::max);

        // sandwich f_lower <= f <= f_upper on [0,1] x window
        let mut sandwich_violation = 0.0f64;
        for &t in &tgrid {
            for iu in 0..u_samples {
                let u = iu as f64 / (u_samples - 1) as f64;
                let f = self.f_any(t, u);
                sandwich_violation = sandwich_violation
                    .max(self.f_lower(u) - f)
                    .max(f - self.f_upper(u));
            }
        }
        let h2 = BoundingCheck {
            pass: equilibria_err <= 1e-12 && sandwich_violation <= 1e-12,
            theta_lower_cubic: self.theta_hi(),
            theta_upper_cubic: self.theta_lo(),
            equilibria_err,
            sandwich_violation,
        };

        // decay rates outside the strip: beta = -sup f_u on the region
        let sup_fu = |lo: f64, hi: f64| -> f64 {
            let mut sup = f64::NEG_INFINITY;
            for &t in &tgrid {
                for iu in 0..u_samples {
                    let u = lo + iu as f64 * (hi - lo) / (u_samples - 1) as f64;
                    sup = sup.max(self.fu_any(t, u));
                }
            }
            sup
        };
        let beta0 = -sup_fu(U_MIN, self.theta0);
        let beta1 = -sup_fu(self.theta1, U_MAX);
        let h3 = DecayCheck {
            pass: beta0 > 0.0 && beta1 > 0.0,
            theta0: self.theta0,
            theta1: self.theta1,
            beta0,
            beta1,
        };

        // nondegenerate unstable branch: f_u > 0 along u = theta(t); for a
        // drifting theta this is finite-window evidence, not an entire
        // solution
        let branch_margin = match &self.reaction {
            Reaction::CubicTheta { theta } => tgrid
                .iter()
                .map(|&t| {
                    let th = theta.eval(t);
                    self.fu_any(t, th)
                })
                .fold(f64::INFINITY, f64::min),
            Reaction::CustomTable { .. } => match self.zero_in_strip() {
                Some(z) => self.fu_any(0.0, z),
                None => f64::NEG_INFINITY,
            },
        };
        let h4 = UnstableBranchCheck {
            pass: branch_margin > 0.0,
            margin: branch_margin,
            finite_window_only: !self.is_autonomous(),
        };

        // common unstable zero: requires a single theta_star with fixed
        // sign pattern for all t, which for the cubic family means a
        // constant theta
        let h5 = match (self.is_autonomous(), self.zero_in_strip()) {
            (true, Some(z)) => CommonZeroCheck {
                pass: true,
                theta_star: Some(z),
            },
            _ => CommonZeroCheck {
                pass: false,
                theta_star: None,
            },
        };

        HypothesisReport {
            bounding: h2,
            decay: h3,
            unstable_branch: h4,
            common_zero: h5,
            unbalanced: UnbalancedCheck::Pending,
        }
    }

    /// Solves the scalar ODE du/dt = f(t,u) from (t0, u0) to t1 with an
    /// embedded Bogacki-Shampine 3(2) pair, absolute local error <= tol.
    pub fn ode_flow(&self, t0: f64, u0: f64, t1: f64, tol: f64) -> Result<f64> {
        if t1 < t0 {
            return Err(Error::invalid("ode_flow requires t1 >= t0"));
        }
        if !(U_MIN..=U_MAX).contains(&u0) {
            return Err(Error::Domain { u: u0 });
        }
        if !(tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        let mut t = t0;
        let mut u = u0;
        let mut h = (t1 - t0).clamp(1e-12, 0.1);
        let h_min = 1e-13 * (1.0 + (t1 - t0));
        let clamp = |v: f64| v.clamp(U_MIN, U_MAX);

        while t < t1 {
            h = h.min(t1 - t);
            let k1 = self.f_any(t, u);
            let k2 = self.f_any(t + 0.5 * h, clamp(u + 0.5 * h * k1));
            let k3 = self.f_any(t + 0.75 * h, clamp(u + 0.75 * h * k2));
            let u3 = clamp(u + h * (2.0 * k1 + 3.0 * k2 + 4.0 * k3) / 9.0);
            let k4 = self.f_any(t + h, u3);
            // embedded 2nd-order estimate for the error
            let u2 = u + h * (7.0 * k1 + 6.0 * k2 + 8.0 * k3 + 3.0 * k4) / 24.0;
            let err = (u3 - u2).abs();

            if err <= tol || h <= h_min {
                if h <= h_min && err > tol {
                    return Err(Error::Stiffness { t });
                }
                t += h;
                u = u3;
            }
            let factor = if err > 0.0 {
                0.9 * (tol / err).powf(1.0 / 3.0)
            } else {
                2.0
            };
            h = (h * factor.clamp(0.2, 5.0)).max(h_min);
        }
        Ok(u)
    }
}

fn segment(nodes: &[f64], u: f64) -> usize {
    match nodes.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
        Ok(i) => i.min(nodes.len() - 2),
        Err(i) => i.saturating_sub(1).min(nodes.len() - 2),
    }
}

fn interp(nodes: &[f64], values: &[f64], u: f64) -> f64 {
    let i = segment(nodes, u);
    let w = (u - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Sandwich between the two autonomous bounding cubics.
#[derive(Debug, Clone, Serialize)]
pub struct BoundingCheck {
    pub pass: bool,
    /// theta of the lower bounding cubic (= sup theta(t)).
    pub theta_lower_cubic: f64,
    /// theta of the upper bounding cubic (= inf theta(t)).
    pub theta_upper_cubic: f64,
    pub equilibria_err: f64,
    pub sandwich_violation: f64,
}

/// Uniform decay of f_u outside the bistable strip.
#[derive(Debug, Clone, Serialize)]
pub struct DecayCheck {
    pub pass: bool,
    pub theta0: f64,
    pub theta1: f64,
    pub beta0: f64,
    pub beta1: f64,
}

/// Nondegeneracy of the unstable branch (f_u > 0 along it).
#[derive(Debug, Clone, Serialize)]
pub struct UnstableBranchCheck {
    pub pass: bool,
    pub margin: f64,
    /// True when theta(t) drifts: the scan is evidence on a finite window,
    /// not an entire-solution certificate.
    pub finite_window_only: bool,
}

/// Common unstable zero shared by all times.
#[derive(Debug, Clone, Serialize)]
pub struct CommonZeroCheck {
    pub pass: bool,
    pub theta_star: Option<f64>,
}

/// Positivity of the lower bounding wave speed; computed by the wave
/// module, so the scan alone reports it as pending.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum UnbalancedCheck {
    Pending,
    Checked { speed: f64, pass: bool },
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub bounding: BoundingCheck,
    pub decay: DecayCheck,
    pub unstable_branch: UnstableBranchCheck,
    pub common_zero: CommonZeroCheck,
    pub unbalanced: UnbalancedCheck,
}

impl HypothesisReport {
    pub fn with_unbalanced(mut self, speed: f64) -> Self {
        self.unbalanced = UnbalancedCheck::Checked {
            speed,
            pass: speed > 0.0,
        };
        self
    }

    /// All checks that can pass at scan time do pass (pending counts).
    pub fn scan_pass(&self) -> bool {
        self.bounding.pass && self.decay.pass && self.unstable_branch.pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn autonomous() -> Nonlinearity {
        Nonlinearity::cubic(TimeSignal::Constant { value: 0.25 }, 0.05, 0.9).unwrap()
    }

    fn periodic() -> Nonlinearity {
        Nonlinearity::cubic(
            TimeSignal::Periodic {
                mean: 0.25,
                amplitude: 0.05,
                period: 1.0,
            },
            0.05,
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn cubic_zeros_and_values() {
        let nl = autonomous();
        assert_eq!(nl.eval_f(3.7, 0.0).unwrap(), 0.0);
        assert_eq!(nl.eval_f(3.7, 1.0).unwrap(), 0.0);
        assert_eq!(nl.eval_f(3.7, 0.25).unwrap(), 0.0);
        assert!((nl.eval_f(0.0, 0.5).unwrap() - 0.0625).abs() < 1e-15);

        let pnl = periodic();
        // theta(0.25) = 0.25 + 0.05 sin(pi/2) = 0.30
        assert!((pnl.eval_f(0.25, 0.5).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let nl = periodic();
        for &t in &[0.0, 0.3, 1.7] {
            for iu in 0..=30 {
                let u = -1.0 + iu as f64 * 0.1;
                let h = 1e-4;
                let fd = (nl.f_any(t, u + h) - nl.f_any(t, u - h)) / (2.0 * h);
                assert!((nl.eval_fu(t, u).unwrap() - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn domain_is_enforced() {
        let nl = autonomous();
        assert!(matches!(nl.eval_f(0.0, 2.5), Err(Error::Domain { .. })));
        assert!(matches!(nl.eval_fu(0.0, -1.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn periodic_signal_exact_shift() {
        let s = TimeSignal::Periodic {
            mean: 0.25,
            amplitude: 0.05,
            period: 1.0,
        };
        // exactly-representable times: t + T is computed without rounding
        for &t in &[0.0, 0.25, 0.5, 1.75, 1024.125] {
            assert_eq!(s.eval(t), s.eval(t + 1.0));
        }
        let nl = periodic();
        assert_eq!(nl.f_any(0.25, 0.63), nl.f_any(1.25, 0.63));
    }

    #[test]
    fn hypothesis_scan_autonomous() {
        let nl = autonomous();
        let rep = nl.validate_hypotheses(128, 128, 10.0);
        assert!(rep.bounding.pass);
        assert_eq!(rep.bounding.theta_lower_cubic, 0.25);
        assert_eq!(rep.bounding.theta_upper_cubic, 0.25);
        assert!(rep.decay.pass);
        // f_u(0.05; 0.25) = -3*0.0025 + 2*1.25*0.05 - 0.25 = -0.1325
        assert!((rep.decay.beta0 - 0.1325).abs() < 1e-3);
        // f_u(0.9; 0.25) = -2.43 + 2.25 - 0.25 = -0.43... sup over [0.9, 2]
        assert!(rep.decay.beta1 > 0.3);
        assert!(rep.unstable_branch.pass);
        assert!(!rep.unstable_branch.finite_window_only);
        // margin = theta (1 - theta) = 0.1875
        assert!((rep.unstable_branch.margin - 0.1875).abs() < 1e-12);
        assert!(rep.common_zero.pass);
        assert!((rep.common_zero.theta_star.unwrap() - 0.25).abs() < 1e-10);
        assert!(matches!(rep.unbalanced, UnbalancedCheck::Pending));
        assert!(rep.scan_pass());
    }

    #[test]
    fn hypothesis_scan_periodic() {
        let nl = periodic();
        let rep = nl.validate_hypotheses(128, 200, 10.0);
        assert!(rep.bounding.pass);
        assert_eq!(rep.bounding.theta_lower_cubic, 0.30);
        assert_eq!(rep.bounding.theta_upper_cubic, 0.20);
        assert!(rep.decay.pass);
        assert!(rep.decay.beta0 > 0.05 && rep.decay.beta0 < 0.12);
        assert!(rep.unstable_branch.pass);
        assert!(rep.unstable_branch.finite_window_only);
        // no common zero once theta drifts
        assert!(!rep.common_zero.pass);
    }

    #[test]
    fn strip_margins_are_checked() {
        // theta0 = 0.1 is too close to theta range [0.20, 0.30]? it is
        // below, so allowed; but f_u(0.1; 0.2) > 0 shows up as beta0 <= 0
        let nl = Nonlinearity::cubic(
            TimeSignal::Periodic {
                mean: 0.25,
                amplitude: 0.05,
                period: 1.0,
            },
            0.1,
            0.9,
        )
        .unwrap();
        let rep = nl.validate_hypotheses(256, 128, 5.0);
        assert!(!rep.decay.pass, "beta0 = {}", rep.decay.beta0);

        // theta0 above the theta range is rejected outright
        assert!(Nonlinearity::cubic(TimeSignal::Constant { value: 0.25 }, 0.3, 0.9).is_err());
    }

    #[test]
    fn ode_flow_equilibria_and_basins() {
        let nl = autonomous();
        for &u0 in &[0.0, 0.25, 1.0] {
            let u = nl.ode_flow(0.0, u0, 50.0, 1e-10).unwrap();
            assert!((u - u0).abs() < 1e-9, "u0 = {u0} drifted to {u}");
        }
        let up = nl.ode_flow(0.0, 0.26, 200.0, 1e-10).unwrap();
        assert!((up - 1.0).abs() < 1e-6);
        let down = nl.ode_flow(0.0, 0.24, 200.0, 1e-10).unwrap();
        assert!(down.abs() < 1e-6);
    }

    #[test]
    fn ode_flow_is_monotone_in_data() {
        let nl = periodic();
        let mut prev = f64::NEG_INFINITY;
        for iu in 0..=40 {
            let u0 = iu as f64 * 0.025;
            let u = nl.ode_flow(0.0, u0, 7.3, 1e-10).unwrap();
            assert!(u >= prev - 1e-12);
            prev = u;
        }
    }

    #[test]
    fn custom_table_roundtrip() {
        // tabulate the autonomous cubic finely; behavior must match
        let n = 3001;
        let u_nodes: Vec<f64> = (0..n).map(|i| -1.0 + 3.0 * i as f64 / (n - 1) as f64).collect();
        let f_values: Vec<f64> = u_nodes.iter().map(|&u| cubic(0.25, u)).collect();
        let nl = Nonlinearity::custom_table(u_nodes, f_values, 0.05, 0.9).unwrap();
        assert!((nl.f_any(0.0, 0.5) - 0.0625).abs() < 1e-6);
        let rep = nl.validate_hypotheses(128, 64, 5.0);
        assert!(rep.decay.pass);
        assert!((rep.common_zero.theta_star.unwrap() - 0.25).abs() < 1e-3);
    }
}
