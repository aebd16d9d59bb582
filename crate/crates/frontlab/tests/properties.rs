//! Property tests for the structural invariants of the core modules.

use frontlab::evolve::{step, FieldState, Scheme, SolverConfig};
use frontlab::fronts::crossing_window;
use frontlab::grid::{
    convolve_direct, convolve_direct_serial, convolve_fft, Closure, Grid1D, Kernel, KernelFamily,
};
use frontlab::media::{Nonlinearity, TimeSignal};
use frontlab::waves::optimal_shift;
use proptest::prelude::*;

fn kernel_family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![
        Just(KernelFamily::Gaussian),
        Just(KernelFamily::Uniform),
        Just(KernelFamily::Laplace),
    ]
}

fn nl(theta: f64) -> Nonlinearity {
    Nonlinearity::cubic(TimeSignal::Constant { value: theta }, 0.05, 0.9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_has_unit_mass_and_symmetry(
        family in kernel_family(),
        scale in 0.3f64..3.0,
        dx in 0.02f64..0.2,
    ) {
        let k = Kernel::make(family, scale, dx, 1e-10).unwrap();
        prop_assert!((k.mass() - 1.0).abs() < 1e-13);
        let w = k.weights();
        for (a, b) in w.iter().zip(w.iter().rev()) {
            prop_assert!((a - b).abs() < 1e-13);
        }
        prop_assert!(w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn convolution_preserves_constants_and_order(
        family in kernel_family(),
        scale in 0.3f64..2.0,
        c in 0.0f64..1.0,
        values in prop::collection::vec(0.0f64..1.0, 64..128),
        bumps in prop::collection::vec(0.0f64..0.5, 64..128),
    ) {
        let k = Kernel::make(family, scale, 0.1, 1e-10).unwrap();
        let closure = Closure::Constant { left: c, right: c };
        let flat = vec![c; values.len()];
        for v in convolve_direct(&k, &flat, closure) {
            prop_assert!((v - c).abs() < 1e-13);
        }
        // order preservation
        let n = values.len().min(bumps.len());
        let lo = &values[..n];
        let hi: Vec<f64> = lo.iter().zip(&bumps[..n]).map(|(a, b)| a + b).collect();
        let cl = convolve_direct(&k, lo, Closure::Zero);
        let ch = convolve_direct(&k, &hi, Closure::Zero);
        for (a, b) in cl.iter().zip(&ch) {
            prop_assert!(a <= &(b + 1e-13));
        }
    }

    #[test]
    fn convolution_paths_agree(
        values in prop::collection::vec(-1.0f64..2.0, 64..200),
        scale in 0.3f64..2.0,
    ) {
        let k = Kernel::make(KernelFamily::Gaussian, scale, 0.1, 1e-10).unwrap();
        let a = convolve_direct(&k, &values, Closure::Front);
        let b = convolve_fft(&k, &values, Closure::Front);
        let c = convolve_direct_serial(&k, &values, Closure::Front);
        for i in 0..values.len() {
            prop_assert!((a[i] - b[i]).abs() < 1e-10);
            prop_assert!((a[i] - c[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_signal_repeats_exactly(
        mean in 0.2f64..0.3,
        amplitude in 0.0f64..0.05,
        period in 0.5f64..8.0,
        t in -50.0f64..50.0,
        k in 1i32..4,
    ) {
        let s = TimeSignal::Periodic { mean, amplitude, period };
        let shifted = s.eval(t + k as f64 * period);
        prop_assert!((s.eval(t) - shifted).abs() < 1e-12);
        let v = s.eval(t);
        prop_assert!(v >= s.lower_bound() - 1e-12 && v <= s.upper_bound() + 1e-12);
    }

    #[test]
    fn reaction_is_bistable_and_lipschitz(
        theta in 0.15f64..0.35,
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
        t in 0.0f64..10.0,
    ) {
        let f = nl(theta);
        prop_assert!(f.eval_f(t, 0.0).unwrap().abs() < 1e-15);
        prop_assert!(f.eval_f(t, 1.0).unwrap().abs() < 1e-15);
        prop_assert!(f.eval_f(t, theta).unwrap().abs() < 1e-15);
        let du = (f.eval_f(t, u).unwrap() - f.eval_f(t, v).unwrap()).abs();
        prop_assert!(du <= f.lipschitz() * (u - v).abs() + 1e-13);
    }

    #[test]
    fn monotone_step_preserves_order_and_range(
        seed_lo in prop::collection::vec(0.0f64..1.0, 64),
        seed_gap in prop::collection::vec(0.0f64..1.0, 64),
        theta in 0.2f64..0.3,
    ) {
        let grid = Grid1D::new(-3.2, 0.1, 64).unwrap();
        let k = Kernel::make(KernelFamily::Gaussian, 0.5, 0.1, 1e-10).unwrap();
        let f = nl(theta);
        let cfg = SolverConfig::new(0.1, Scheme::EulerMonotone);
        let hi: Vec<f64> = seed_lo
            .iter()
            .zip(&seed_gap)
            .map(|(a, g)| a + g * (1.0 - a))
            .collect();
        let mut a = FieldState::new(grid, seed_lo, 0.0).unwrap();
        let mut b = FieldState::new(grid, hi, 0.0).unwrap();
        for _ in 0..10 {
            a = step(&a, &f, &k, &cfg).unwrap();
            b = step(&b, &f, &k, &cfg).unwrap();
            for i in 0..grid.n {
                prop_assert!(a.values[i] <= b.values[i] + 1e-13);
                prop_assert!((0.0..=1.0).contains(&a.values[i]));
                prop_assert!((0.0..=1.0).contains(&b.values[i]));
            }
        }
    }

    #[test]
    fn optimal_shift_recovers_translation(cells in -30i64..30) {
        let n = 400usize;
        let dx = 0.1;
        let profile: Vec<f64> = (0..n)
            .map(|i| 1.0 / (1.0 + ((i as f64 - 200.0) * dx).exp()))
            .collect();
        let shifted: Vec<f64> = (0..n)
            .map(|i| {
                let j = (i as i64 - cells).clamp(0, n as i64 - 1) as usize;
                profile[j]
            })
            .collect();
        let (s, sup) = optimal_shift(&profile, &shifted, dx);
        prop_assert!((s - cells as f64 * dx).abs() < dx / 2.0, "s = {s}, cells = {cells}");
        prop_assert!(sup < 1e-6, "sup = {sup}");
    }

    #[test]
    fn crossing_window_brackets_the_level(
        center in -5.0f64..5.0,
        width in 0.5f64..3.0,
        level in 0.1f64..0.9,
    ) {
        let grid = Grid1D::new(-12.8, 0.1, 256).unwrap();
        let values: Vec<f64> = (0..grid.n)
            .map(|i| 1.0 / (1.0 + ((grid.x(i) - center) / width).exp()))
            .collect();
        let (x_minus, x_plus) = crossing_window(&grid, &values, level).unwrap();
        prop_assert!(x_minus <= x_plus + 1e-12);
        // the monotone profile crosses the level at a single analytic point
        let exact = center + width * ((1.0 - level) / level).ln();
        prop_assert!((x_minus - exact).abs() < 0.2, "x_minus {x_minus}, exact {exact}");
    }
}
