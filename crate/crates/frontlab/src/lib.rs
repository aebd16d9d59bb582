//! Numerical laboratory for transition fronts of the nonlocal dispersal
//! equation `u_t = J*u - u + f(t,u)` in time heterogeneous bistable media.
//!
//! The crate is organized around the pipeline
//! kernel/grid -> medium -> time integration -> front diagnostics ->
//! experiments, with a config-driven CLI (`frontlab`) on top.
//!
//! Convolutions and independent experiment jobs are data parallel; the
//! `parallel` feature (on by default) routes them through rayon. With the
//! feature disabled everything runs sequentially with identical results.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with
// non-positive values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index-based loops are kept where the index participates in stencil
// arithmetic or parallel-offset indexing; iterator rewrites would obscure it.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod evolve;
pub mod fronts;
pub mod grid;
pub mod media;
pub mod report;
pub mod runner;
pub mod theorems;
pub mod waves;

pub use error::{Error, Result};
pub use evolve::{FieldState, Observers, Records, Scheme, SolverConfig};
pub use grid::{Closure, Grid1D, Kernel, KernelFamily};
pub use media::{HypothesisReport, Nonlinearity, TimeSignal};
pub use waves::TravelingWave;
