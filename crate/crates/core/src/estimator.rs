//! Residual a posteriori indicators, bulk marking and the adaptive loop.
//!
//! ```text
//! η_T² = h_T² ‖f + Δu_h + γ⁻¹[Ψ - P(u_h)]₊‖²_T + ½ Σ_{e ⊂ ∂T interior} h_e ‖⟦∂_n u_h⟧‖²_e
//! ```

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{ObstacleOperator, ProblemData};
use crate::benchmarks::{error_norms, ErrorNorms, ExactSolution};
use crate::error::{Error, Result};
use crate::fespace::{CoefficientVector, FeSpace};
use crate::mesh::Mesh;
use crate::quadrature::edge_gauss3;
use crate::solver::{newton_solve, SolveReport, SolverOptions};

#[derive(Clone, Debug)]
pub struct IndicatorField {
    /// η_T per cell.
    pub eta: Vec<f64>,
    /// Squared volume part per cell.
    pub volume: Vec<f64>,
    /// Squared face-jump part per cell.
    pub jump: Vec<f64>,
    /// E = (Σ η_T²)^{1/2}
    pub global: f64,
}

impl IndicatorField {
    fn from_parts(volume: Vec<f64>, jump: Vec<f64>) -> IndicatorField {
        let eta: Vec<f64> = volume.iter().zip(&jump).map(|(v, j)| (v + j).sqrt()).collect();
        let global = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
        IndicatorField {
            eta,
            volume,
            jump,
            global,
        }
    }
}

/// Per-cell indicators for `u` computed with the operator's γ and data.
pub fn indicators(op: &ObstacleOperator<'_>, u: &[f64]) -> IndicatorField {
    let space = op.space();
    let mesh = space.mesh();
    let lambda = op.multiplier_field(u);
    let volume: Vec<f64> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|t| {
            let (_, _, lap) = space.evaluate(u, t, [1.0 / 3.0; 3]);
            let w = op.quadrature_weights(t);
            let f = op.load_at(t);
            let s: f64 = (0..w.len()).map(|q| w[q] * (f[q] + lap - lambda[t][q]).powi(2)).sum();
            mesh.cell_diameter(t).powi(2) * s
        })
        .collect();

    let gauss = edge_gauss3();
    let faces = mesh.interior_faces();
    let face_terms: Vec<f64> = faces
        .par_iter()
        .map(|face| {
            let [a, b] = mesh.edges()[face.edge];
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let len = mesh.edge_length(face.edge);
            let (gl, gr) = (space.geometry(face.left), space.geometry(face.right));
            let mut s = 0.0;
            for &(t, w) in &gauss {
                let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let (_, dl, _) = space.evaluate(u, face.left, gl.barycentric(p));
                let (_, dr, _) = space.evaluate(u, face.right, gr.barycentric(p));
                let j = (dl[0] - dr[0]) * face.normal[0] + (dl[1] - dr[1]) * face.normal[1];
                s += w * len * j * j;
            }
            0.5 * len * s
        })
        .collect();
    let mut jump = vec![0.0; mesh.n_cells()];
    for (face, v) in faces.iter().zip(face_terms) {
        jump[face.left] += v;
        jump[face.right] += v;
    }
    IndicatorField::from_parts(volume, jump)
}

pub fn element_indicators(u: &[f64], data: &ProblemData, space: &FeSpace) -> IndicatorField {
    indicators(&ObstacleOperator::new(space, data), u)
}

/// Smallest set of cells carrying at least θ² of E², chosen greedily by
/// descending η (ties by cell id). Returned in ascending id order.
pub fn dorfler_mark(ind: &IndicatorField, theta: f64) -> Vec<usize> {
    assert!(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    let mut marked: Vec<usize> = if theta >= 1.0 {
        (0..ind.eta.len()).filter(|&t| ind.eta[t] > 0.0).collect()
    } else {
        let mut order: Vec<usize> = (0..ind.eta.len()).filter(|&t| ind.eta[t] > 0.0).collect();
        order.sort_by(|&a, &b| ind.eta[b].total_cmp(&ind.eta[a]).then(a.cmp(&b)));
        let target = theta * theta * ind.global * ind.global;
        let mut sum = 0.0;
        let mut count = 0;
        for &t in &order {
            if sum >= target {
                break;
            }
            sum += ind.eta[t] * ind.eta[t];
            count += 1;
        }
        order.truncate(count);
        order
    };
    marked.sort_unstable();
    marked
}

#[derive(Clone, Debug)]
pub struct AdaptOptions {
    pub theta: f64,
    pub max_dofs: usize,
    pub max_levels: usize,
    pub solver: SolverOptions,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            theta: 0.5,
            max_dofs: 100_000,
            max_levels: 30,
            solver: SolverOptions::default(),
        }
    }
}

/// One solved level of the adaptive loop.
#[derive(Clone, Debug)]
pub struct AdaptLevel {
    pub level: usize,
    pub space: Arc<FeSpace>,
    pub report: SolveReport,
    pub indicators: IndicatorField,
    pub errors: Option<ErrorNorms>,
    /// Cells marked for the next refinement (empty on the last level).
    pub marked: Vec<usize>,
    /// Solve and estimate time.
    pub wall_ms: f64,
}

/// Solve, estimate, mark and refine, starting from `mesh`, until
/// `max_levels` levels are solved or the next mesh would exceed `max_dofs`.
/// Each level is passed to `on_level` as soon as it is finished.
pub fn adapt_loop_with(
    mesh: Mesh,
    data: &ProblemData,
    opts: &AdaptOptions,
    exact: Option<&ExactSolution>,
    mut on_level: impl FnMut(&AdaptLevel) -> Result<()>,
) -> Result<Vec<AdaptLevel>> {
    let mut levels: Vec<AdaptLevel> = Vec::new();
    let mut space = Arc::new(FeSpace::new(mesh));
    let mut init: Option<CoefficientVector> = None;
    for level in 0..opts.max_levels {
        let wrap = |e: Error| Error::Level {
            level,
            source: Box::new(e),
        };
        let start = Instant::now();
        let report = newton_solve(data, &space, init.take(), &opts.solver).map_err(wrap)?;
        if !report.converged {
            return Err(Error::NotConverged {
                level,
                iterations: report.iterations,
                residual: *report.residual_norms.last().unwrap(),
            });
        }
        let op = ObstacleOperator::new(&space, data).serial(opts.solver.serial);
        let ind = indicators(&op, &report.solution);
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let errors = exact.map(|e| error_norms(&report.solution, e, &space));

        let mut next = None;
        let mut marked = Vec::new();
        if level + 1 < opts.max_levels {
            let m = dorfler_mark(&ind, opts.theta);
            if !m.is_empty() {
                let refined = FeSpace::new(space.mesh().refine(&m));
                if refined.n_dofs() <= opts.max_dofs {
                    marked = m;
                    next = Some(Arc::new(refined));
                }
            }
        }
        let entry = AdaptLevel {
            level,
            space: space.clone(),
            report,
            indicators: ind,
            errors,
            marked,
            wall_ms,
        };
        on_level(&entry)?;
        match next {
            Some(fine) => {
                init = Some(fine.prolongate(&space, &entry.report.solution));
                levels.push(entry);
                space = fine;
            }
            None => {
                levels.push(entry);
                break;
            }
        }
    }
    Ok(levels)
}

pub fn adapt_loop(mesh: Mesh, data: &ProblemData, opts: &AdaptOptions, exact: Option<&ExactSolution>) -> Result<Vec<AdaptLevel>> {
    adapt_loop_with(mesh, data, opts, exact, |_| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(eta: Vec<f64>) -> IndicatorField {
        let n = eta.len();
        IndicatorField::from_parts(eta.iter().map(|e| e * e).collect(), vec![0.0; n])
    }

    #[test]
    fn marking_extremes() {
        let ind = field_of(vec![0.1, 0.5, 0.0, 0.5, 0.2]);
        assert_eq!(dorfler_mark(&ind, 1.0), vec![0, 1, 3, 4]);
        assert_eq!(dorfler_mark(&ind, 1e-9), vec![1]);
    }

    #[test]
    fn global_is_root_sum_of_squares() {
        let ind = field_of(vec![3.0, 4.0]);
        assert!((ind.global - 5.0).abs() < 1e-15);
    }
}
