//! Adaptive P2 finite elements for the membrane obstacle problem with a
//! multiplier-free Galerkin least-squares formulation.

pub mod assembly;
pub mod benchmarks;
pub mod error;
pub mod estimator;
pub mod fespace;
pub mod mesh;
pub mod output;
pub mod quadrature;
pub mod selfcheck;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod vtk;

pub use assembly::{field, GammaMode, ObstacleOperator, ProblemData, ScalarField};
pub use benchmarks::{error_norms, nonsmooth_case, smooth_case, BenchmarkCase, ErrorNorms, ExactSolution};
pub use estimator::{adapt_loop, dorfler_mark, element_indicators, AdaptOptions, IndicatorField};
pub use error::{Error, Result};
pub use fespace::{CoefficientVector, FeSpace};
pub use mesh::{Mesh, Point};
pub use solver::{linear_solve, newton_solve, SolveReport, SolverOptions};
pub use sparse::{SparseMatrix, SparsityPattern};
pub use study::{run_adaptive_study, run_uniform_study, StudyConfig, StudyMode, StudyRecord, StudyRow};
