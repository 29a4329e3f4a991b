//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use phototherm::{solve_basic_state, BasicState, ModeProblem, Params};

/// Overstable onset with strong swimming and `G_c = 0.65`.
pub fn overstable() -> Params {
    Params {
        us: 15.0,
        ..Params::default()
    }
    .with_gc(0.65)
    .expect("G_c inside the taxis range")
}

pub fn basic(p: &Params) -> BasicState {
    solve_basic_state(p, 2000).expect("basic state converges")
}

/// A point near the oscillatory neutral curve of [`overstable`].
pub fn near_neutral() -> ModeProblem {
    ModeProblem::new(2.3, 86.0, Complex64::new(0.0, 1.96))
}
