//! Shared fixtures for the criterion benchmarks.

use gls_obstacle::{smooth_case, BenchmarkCase, CoefficientVector, FeSpace, GammaMode, ProblemData};

pub struct Fixture {
    pub case: BenchmarkCase,
    pub data: ProblemData,
    pub space: FeSpace,
    /// Interpolant of the exact solution, a point near the discrete solution.
    pub state: CoefficientVector,
}

/// Smooth benchmark on the uniform square mesh with `n` subdivisions per side.
pub fn smooth_fixture(n: usize) -> Fixture {
    let case = smooth_case();
    let data = case.problem_data(0.01, GammaMode::Global);
    let space = FeSpace::new(case.build_mesh(n).expect("valid mesh size"));
    let state = space.interpolate(|p| (case.exact.u)(p));
    Fixture { case, data, space, state }
}
