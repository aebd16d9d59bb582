//! Spatial discretization and convolution machinery.
//!
//! A [`Kernel`] holds the symmetric dispersal density J sampled at integer
//! multiples of the grid spacing and renormalized to unit discrete mass, so
//! that the constants 0 and 1 stay exact equilibria of the semi-discrete
//! scheme. Convolution switches from direct summation to an FFT path once
//! the stencil gets wide; both paths agree to 1e-10 and are tested against
//! each other.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const SQRT_2PI: f64 = 2.5066282746310002;

/// Direct summation below this stencil half width, FFT above.
pub const DIRECT_CONV_MAX_HALF_WIDTH: usize = 128;

/// Hard cap on iterated-kernel half width.
pub const KERNEL_HALF_WIDTH_CAP: usize = 1 << 22;

/// Uniform 1D grid. Node i sits at `x_left + i*dx` in window coordinates;
/// `shift_accum` records how far the window has been translated rightward,
/// so absolute positions are `x_left + i*dx + shift_accum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_left: f64,
    pub dx: f64,
    pub n: usize,
    /// Integer multiple of dx by construction.
    pub shift_accum: f64,
}

impl Grid1D {
    pub fn new(x_left: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::invalid(format!("dx must be positive, got {dx}")));
        }
        if n < 8 {
            return Err(Error::invalid(format!("n must be >= 8, got {n}")));
        }
        Ok(Grid1D {
            x_left,
            dx,
            n,
            shift_accum: 0.0,
        })
    }

    /// Window coordinate of node i.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.dx
    }

    /// Absolute coordinate of node i (window plus accumulated shift).
    #[inline]
    pub fn x_abs(&self, i: usize) -> f64 {
        self.x(i) + self.shift_accum
    }

    pub fn x_right(&self) -> f64 {
        self.x(self.n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Uniform,
    Laplace,
}

impl KernelFamily {
    /// The uniform density is not continuously differentiable at the
    /// support endpoints; kept as a stress case and flagged in validation.
    pub fn continuously_differentiable(self) -> bool {
        !matches!(self, KernelFamily::Uniform)
    }
}

/// Boundary closure: how field values are extended beyond the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Closure {
    /// Transition-front closure: 1 on the left, 0 on the right.
    Front,
    Constant { left: f64, right: f64 },
    Zero,
}

impl Closure {
    #[inline]
    pub fn left(&self) -> f64 {
        match self {
            Closure::Front => 1.0,
            Closure::Constant { left, .. } => *left,
            Closure::Zero => 0.0,
        }
    }

    #[inline]
    pub fn right(&self) -> f64 {
        match self {
            Closure::Front => 0.0,
            Closure::Constant { right, .. } => *right,
            Closure::Zero => 0.0,
        }
    }
}

/// Discretized symmetric dispersal kernel: `weights[M + m]` samples J at
/// offset `m*dx` for m in -M..=M, renormalized so `dx * sum = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    weights: Vec<f64>,
    dx: f64,
    half_width: usize,
}

/// Validation summary for a constructed kernel (the (H1) checks).
#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub half_width: usize,
    pub mass: f64,
    pub symmetric: bool,
    pub nonnegative: bool,
    /// dx * sum w[m] exp(gamma m dx) at gamma = 1 (finite by construction).
    pub exp_moment_gamma1: f64,
    /// False for the uniform family (kink at the support endpoints).
    pub continuously_differentiable: bool,
}

impl Kernel {
    /// Builds a kernel from an analytic family. `half_width` is chosen from
    /// the analytic tail integral so the omitted mass is below `trunc_tol`,
    /// then the samples are rescaled to exact unit discrete mass.
    pub fn make(family: KernelFamily, scale: f64, dx: f64, trunc_tol: f64) -> Result<Kernel> {
        if !(scale > 0.0) || !(dx > 0.0) || !(trunc_tol > 0.0) {
            return Err(Error::invalid(format!(
                "scale, dx, trunc_tol must be positive (got {scale}, {dx}, {trunc_tol})"
            )));
        }
        if trunc_tol >= 1e-3 {
            return Err(Error::invalid(format!(
                "trunc_tol must be < 1e-3, got {trunc_tol}"
            )));
        }
        if scale < dx / 2.0 {
            return Err(Error::Resolution {
                scale,
                half_dx: dx / 2.0,
            });
        }

        let half_width = match family {
            KernelFamily::Uniform => (scale / dx).ceil() as usize,
            KernelFamily::Gaussian => {
                // two-sided tail mass beyond x is bounded by exp(-x^2 / 2 scale^2)
                let x = scale * (2.0 * (1.0 / trunc_tol).ln()).sqrt();
                (x / dx).ceil() as usize
            }
            KernelFamily::Laplace => {
                // two-sided tail mass beyond x is exp(-x / scale)
                let x = scale * (1.0 / trunc_tol).ln();
                (x / dx).ceil() as usize
            }
        }
        .max(1);

        let mut weights = vec![0.0; 2 * half_width + 1];
        for m in 0..=half_width {
            let x = m as f64 * dx;
            let w = match family {
                KernelFamily::Gaussian => {
                    (-(x * x) / (2.0 * scale * scale)).exp() / (scale * SQRT_2PI)
                }
                KernelFamily::Uniform => {
                    // trapezoid sampling: half weight on the support endpoint
                    // keeps the kink from biasing the mass
                    if x < scale - 1e-12 * scale {
                        0.5 / scale
                    } else if (x - scale).abs() <= 1e-12 * scale {
                        0.25 / scale
                    } else {
                        0.0
                    }
                }
                KernelFamily::Laplace => (-(x / scale)).exp() / (2.0 * scale),
            };
            weights[half_width + m] = w;
            weights[half_width - m] = w;
        }

        let mut kernel = Kernel {
            weights,
            dx,
            half_width,
        };
        kernel.normalize();
        Ok(kernel)
    }

    /// Builds a kernel from raw samples (must be symmetric and nonnegative);
    /// renormalizes to unit mass.
    pub fn from_weights(weights: Vec<f64>, dx: f64) -> Result<Kernel> {
        if weights.len().is_multiple_of(2) || weights.is_empty() {
            return Err(Error::invalid("weights length must be odd"));
        }
        let half_width = weights.len() / 2;
        for m in 0..=half_width {
            let a = weights[half_width + m];
            let b = weights[half_width - m];
            if a < 0.0 || b < 0.0 {
                return Err(Error::invalid("kernel weights must be nonnegative"));
            }
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::invalid("kernel weights must be symmetric"));
            }
        }
        let mut kernel = Kernel {
            weights,
            dx,
            half_width,
        };
        kernel.normalize();
        Ok(kernel)
    }

    fn normalize(&mut self) {
        let mass: f64 = self.weights.iter().sum::<f64>() * self.dx;
        assert!(mass > 0.0, "kernel mass must be positive");
        for w in &mut self.weights {
            *w /= mass;
        }
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Weight at signed offset m (0 outside the stencil).
    #[inline]
    pub fn weight(&self, m: isize) -> f64 {
        let idx = self.half_width as isize + m;
        if idx < 0 || idx as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Discrete mass dx * sum(weights); 1 up to rounding after construction.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.dx
    }

    /// Discrete exponential moment dx * sum w[m] exp(gamma m dx).
    pub fn exp_moment(&self, gamma: f64) -> f64 {
        let hw = self.half_width as isize;
        (-hw..=hw)
            .map(|m| self.weight(m) * (gamma * m as f64 * self.dx).exp())
            .sum::<f64>()
            * self.dx
    }

    pub fn validate(&self, family: Option<KernelFamily>) -> KernelReport {
        let symmetric = (0..=self.half_width).all(|m| {
            let a = self.weights[self.half_width + m];
            let b = self.weights[self.half_width - m];
            (a - b).abs() <= 1e-12 * a.abs().max(1.0)
        });
        KernelReport {
            half_width: self.half_width,
            mass: self.mass(),
            symmetric,
            nonnegative: self.weights.iter().all(|&w| w >= 0.0),
            exp_moment_gamma1: self.exp_moment(1.0),
            continuously_differentiable: family
                .map(|f| f.continuously_differentiable())
                .unwrap_or(true),
        }
    }

    /// N-fold self-convolution J^N, renormalized to unit mass.
    pub fn iterate(&self, n: usize) -> Result<Kernel> {
        if n < 1 {
            return Err(Error::invalid("iterate requires N >= 1"));
        }
        if n * self.half_width > KERNEL_HALF_WIDTH_CAP {
            return Err(Error::Resource(format!(
                "iterated kernel half width {} exceeds cap {}",
                n * self.half_width,
                KERNEL_HALF_WIDTH_CAP
            )));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.convolve_kernel(self);
        }
        acc.normalize();
        Ok(acc)
    }

    /// Linear convolution of two kernels as densities:
    /// (a*b)[k] = dx * sum_m a[m] b[k-m].
    pub fn convolve_kernel(&self, other: &Kernel) -> Kernel {
        let hw = self.half_width + other.half_width;
        let mut weights = vec![0.0; 2 * hw + 1];
        let (sa, sb) = (self.half_width as isize, other.half_width as isize);
        for k in -(hw as isize)..=(hw as isize) {
            let mut acc = 0.0;
            let m_lo = (-sa).max(k - sb);
            let m_hi = sa.min(k + sb);
            for m in m_lo..=m_hi {
                acc += self.weight(m) * other.weight(k - m);
            }
            weights[(hw as isize + k) as usize] = acc * self.dx;
        }
        Kernel {
            weights,
            dx: self.dx,
            half_width: hw,
        }
    }

    /// Minimum of the kernel density over the offset interval [lo, hi]
    /// (physical units), evaluated on the stencil nodes covering it.
    pub fn min_over(&self, lo: f64, hi: f64) -> f64 {
        let m_lo = (lo / self.dx).floor() as isize;
        let m_hi = (hi / self.dx).ceil() as isize;
        (m_lo..=m_hi)
            .map(|m| self.weight(m))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Discrete convolution `result[i] = dx * sum_m w[m] * u_ext[i-m]`, with
/// `u_ext` extending the field beyond the window via `closure`.
pub fn convolve(kernel: &Kernel, values: &[f64], closure: Closure) -> Result<Vec<f64>> {
    if kernel.half_width <= DIRECT_CONV_MAX_HALF_WIDTH {
        Ok(convolve_direct(kernel, values, closure))
    } else {
        Ok(convolve_fft(kernel, values, closure))
    }
}

/// Convolution against a field wrapped in its grid; checks dx consistency.
pub fn convolve_on_grid(
    kernel: &Kernel,
    grid: &Grid1D,
    values: &[f64],
    closure: Closure,
) -> Result<Vec<f64>> {
    if (kernel.dx - grid.dx).abs() > 1e-14 * grid.dx {
        return Err(Error::InconsistentDiscretization {
            kernel_dx: kernel.dx,
            field_dx: grid.dx,
        });
    }
    if values.len() != grid.n {
        return Err(Error::invalid(format!(
            "field length {} != grid n {}",
            values.len(),
            grid.n
        )));
    }
    convolve(kernel, values, closure)
}

fn extend(values: &[f64], pad: usize, closure: Closure) -> Vec<f64> {
    let n = values.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend(std::iter::repeat_n(closure.left(), pad));
    ext.extend_from_slice(values);
    ext.extend(std::iter::repeat_n(closure.right(), pad));
    ext
}

/// Direct summation path (always available; used for cross-checking FFT).
pub fn convolve_direct(kernel: &Kernel, values: &[f64], closure: Closure) -> Vec<f64> {
    let m = kernel.half_width;
    let ext = extend(values, m, closure);
    let w = &kernel.weights;
    let dx = kernel.dx;
    let n = values.len();

    let body = |i: usize| -> f64 {
        // result[i] = dx * sum_m w[M+m] u_ext[i - m + M]
        //           = dx * sum_p w[p] u_ext[i + 2M - p]
        let mut acc = 0.0;
        let base = i + 2 * m;
        for (p, &wp) in w.iter().enumerate() {
            acc += wp * ext[base - p];
        }
        acc * dx
    };

    #[cfg(feature = "parallel")]
    {
        if n * (2 * m + 1) >= 1 << 16 {
            return (0..n).into_par_iter().map(body).collect();
        }
    }
    (0..n).map(body).collect()
}

/// Direct summation, always sequential regardless of the `parallel`
/// feature (benchmark baseline and determinism cross-check).
pub fn convolve_direct_serial(kernel: &Kernel, values: &[f64], closure: Closure) -> Vec<f64> {
    let m = kernel.half_width;
    let ext = extend(values, m, closure);
    let w = &kernel.weights;
    let dx = kernel.dx;
    (0..values.len())
        .map(|i| {
            let mut acc = 0.0;
            let base = i + 2 * m;
            for (p, &wp) in w.iter().enumerate() {
                acc += wp * ext[base - p];
            }
            acc * dx
        })
        .collect()
}

/// FFT path: linear convolution of the closure-extended field with the
/// stencil via zero-padded transforms, trimmed back to the window. The
/// closure padding plays the role of the edge-zone correction.
pub fn convolve_fft(kernel: &Kernel, values: &[f64], closure: Closure) -> Vec<f64> {
    use rustfft::{num_complex::Complex, FftPlanner};

    let m = kernel.half_width;
    let n = values.len();
    let ext = extend(values, m, closure);
    let len = (ext.len() + kernel.weights.len() - 1).next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);

    let mut a: Vec<Complex<f64>> = ext
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut b: Vec<Complex<f64>> = kernel
        .weights
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();

    fft.process(&mut a);
    fft.process(&mut b);
    let scale = kernel.dx / len as f64;
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= *y * scale;
    }
    ifft.process(&mut a);

    // full conv index of result[i] is i + 2M
    (0..n).map(|i| a[i + 2 * m].re).collect()
}
