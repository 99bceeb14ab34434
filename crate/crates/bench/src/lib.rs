//! Fixtures shared by the benchmarks.

use laxlab_core::sine_gordon::SGState;
use laxlab_core::{sample_family, CoefficientSet, Family, GridSpec, KinkParams, SecondFormCoeffs};

/// `m x m` grid on `[-2, 2] x [0, 1]`.
pub fn square_grid(m: usize) -> GridSpec {
    GridSpec::new(-2.0, 2.0, m, 0.0, 1.0, m).expect("valid grid")
}

/// Sampled moving-kink coefficients (no closed forms, so derivatives use stencils).
pub fn sampled_kink(grid: GridSpec) -> (CoefficientSet, SecondFormCoeffs) {
    let (c, s) = sample_family(&Family::SineGordonKink(KinkParams::new(0.5, 0.0).expect("|v| < 1")), &grid)
        .expect("kink samples");
    (c.sampled_only(), s.sampled_only())
}

/// Moving kink on `[-10, 10]` with `dx = 20 / (nx - 1)` and `dt = dx / 2`, over `steps` steps.
pub fn kink_solver(nx: usize, steps: usize) -> SGState {
    let dx = 20.0 / (nx - 1) as f64;
    let grid = GridSpec::new(-10.0, 10.0, nx, 0.0, 0.5 * dx * steps as f64, steps + 1).expect("valid grid");
    SGState::kink(grid, KinkParams::new(0.5, 0.0).expect("|v| < 1"), 0.5).expect("CFL holds")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let (c, _) = sampled_kink(square_grid(11));
        assert!(!c.u12.has_closed_derivative());
        let state = kink_solver(201, 10);
        assert!(laxlab_core::sine_gordon::evolve(&state, 10).is_ok());
    }
}
