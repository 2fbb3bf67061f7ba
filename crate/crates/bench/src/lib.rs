//! Shared fixtures for the benchmarks.

use front_forge_core::{builtin, Builtin, Grid, NormalizedPotential, Profile};

/// Cubic force with `beta = 0.4`.
pub fn cubic_force() -> NormalizedPotential {
    builtin(Builtin::CubicForce { beta: 0.4 }).expect("valid builtin")
}

pub fn tanh_profile(h: f64, m: usize) -> Profile {
    let grid = Grid::new(h, m).expect("valid grid");
    Profile::from_fn(grid, |x| (2.0 * x).tanh(), -1.0, 1.0)
}
