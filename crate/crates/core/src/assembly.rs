//! Discrete forms of the multiplier-free obstacle method.
//!
//! With `P(w) = w + γΔw` and the shifted obstacle `Ψ = ψ - γf`, the residual
//! tested with a basis function `φ` is
//!
//! ```text
//! R(u)·φ = (∇u, ∇φ) - Σ_T ∫_T { γ⁻¹[Ψ - P(u)]₊ P(φ) + γ(Δu + f)Δφ } - (f, φ)
//! ```
//!
//! which is the gradient of
//!
//! ```text
//! F(u) = ½|∇u|² + Σ_T ∫_T { (2γ)⁻¹[Ψ - P(u)]₊² - ½γ(Δu + f)² } - (f, u).
//! ```
//!
//! The Jacobian switches the penalty term on at quadrature points where
//! `Ψ - P(u) > 0` (strictly).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::fespace::{CellGeometry, CoefficientVector, FeSpace, ReferenceTable, N_LOCAL};
use crate::mesh::{Mesh, Point};
use crate::sparse::SparseMatrix;

/// Quadrature points per cell (degree-6 rule).
pub const NQ: usize = 12;

/// A scalar field evaluable anywhere in the plane.
pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Wraps a closure as a [`ScalarField`].
pub fn field(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

/// How the penalty parameter γ is derived from γ₀.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMode {
    /// One γ = γ₀ h² per mesh with h = 1/√(number of vertices).
    Global,
    /// γ_T = γ₀ h_T² with h_T the longest edge of the cell.
    Local,
}

impl std::fmt::Display for GammaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GammaMode::Global => "global",
            GammaMode::Local => "local",
        })
    }
}

impl std::str::FromStr for GammaMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "global" => Ok(GammaMode::Global),
            "local" => Ok(GammaMode::Local),
            _ => Err(format!("unknown gamma mode '{s}' (expected global or local)")),
        }
    }
}

/// Load, obstacle, Dirichlet trace and penalty scaling.
#[derive(Clone)]
pub struct ProblemData {
    pub f: ScalarField,
    pub psi: ScalarField,
    pub g: ScalarField,
    pub gamma0: f64,
    pub gamma_mode: GammaMode,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemData")
            .field("gamma0", &self.gamma0)
            .field("gamma_mode", &self.gamma_mode)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    pub fn new(f: ScalarField, psi: ScalarField, g: ScalarField, gamma0: f64, gamma_mode: GammaMode) -> ProblemData {
        assert!(gamma0 > 0.0, "gamma0 must be positive");
        ProblemData {
            f,
            psi,
            g,
            gamma0,
            gamma_mode,
        }
    }

    /// Same data with the obstacle removed: the method reduces to a
    /// GLS-stabilized Poisson problem.
    pub fn without_obstacle(&self) -> ProblemData {
        ProblemData {
            psi: field(|_| f64::NEG_INFINITY),
            ..self.clone()
        }
    }

    pub fn gamma_per_cell(&self, mesh: &Mesh) -> Vec<f64> {
        match self.gamma_mode {
            GammaMode::Global => {
                let h2 = 1.0 / mesh.n_vertices() as f64;
                vec![self.gamma0 * h2; mesh.n_cells()]
            }
            GammaMode::Local => (0..mesh.n_cells())
                .map(|t| self.gamma0 * mesh.cell_diameter(t).powi(2))
                .collect(),
        }
    }
}

/// Outcome of checking γ against the inverse-inequality constant.
#[derive(Clone, Copy, Debug)]
pub struct StabilityCheck {
    pub inverse_constant: f64,
    /// max_T γ_T / h_T²
    pub effective_gamma0: f64,
    /// 1 / (2 C_i²)
    pub bound: f64,
    pub admissible: bool,
}

/// Compares γ with the monotonicity condition γ_T < h_T² / (2 C_i²) and logs
/// a warning when it is violated.
pub fn check_stability(data: &ProblemData, space: &FeSpace) -> StabilityCheck {
    let ci = estimate_inverse_constant(space);
    let mesh = space.mesh();
    let eff = data
        .gamma_per_cell(mesh)
        .iter()
        .enumerate()
        .map(|(t, g)| g / mesh.cell_diameter(t).powi(2))
        .fold(0.0, f64::max);
    let bound = 0.5 / (ci * ci);
    let check = StabilityCheck {
        inverse_constant: ci,
        effective_gamma0: eff,
        bound,
        admissible: eff < bound,
    };
    if !check.admissible {
        log::warn!(
            "penalty parameter violates the stability condition: effective gamma0 {:.4e} >= 1/(2 C_i^2) = {:.4e}",
            eff,
            bound
        );
    }
    check
}

#[derive(Clone, Debug)]
struct CellData {
    geo: CellGeometry,
    points: [Point; NQ],
    f: [f64; NQ],
    psi: [f64; NQ],
    lap: [f64; N_LOCAL],
    gamma: f64,
}

/// The nonlinear operator on a fixed space with field values cached at the
/// quadrature points. Local contributions may be computed in parallel; they
/// are always accumulated in ascending cell order, so results do not depend
/// on the thread count.
pub struct ObstacleOperator<'a> {
    space: &'a FeSpace,
    table: ReferenceTable,
    cells: Vec<CellData>,
    // value positions of the 36 local entries of each cell in the CSR pattern
    positions: Vec<[usize; N_LOCAL * N_LOCAL]>,
    parallel: bool,
}

type LocalVector = [f64; N_LOCAL];
type LocalMatrix = [[f64; N_LOCAL]; N_LOCAL];

impl<'a> ObstacleOperator<'a> {
    pub fn new(space: &'a FeSpace, data: &ProblemData) -> ObstacleOperator<'a> {
        let table = ReferenceTable::standard();
        assert_eq!(table.rule.len(), NQ);
        let mesh = space.mesh();
        let gammas = data.gamma_per_cell(mesh);
        let cells: Vec<CellData> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|t| {
                let geo = space.geometry(t);
                let points: [Point; NQ] = std::array::from_fn(|q| geo.map(table.rule.points[q]));
                let f = points.map(|p| (data.f)(p));
                let psi = points.map(|p| (data.psi)(p));
                let hess = &table.basis[0].hessians;
                let lap = std::array::from_fn(|i| geo.laplacian(hess[i]));
                CellData {
                    geo,
                    points,
                    f,
                    psi,
                    lap,
                    gamma: gammas[t],
                }
            })
            .collect();
        let pattern = space.pattern();
        let positions = space
            .dof_map()
            .iter()
            .map(|dofs| {
                std::array::from_fn(|k| {
                    let (i, j) = (dofs[k / N_LOCAL], dofs[k % N_LOCAL]);
                    pattern.find(i, j).expect("element couplings are in the pattern")
                })
            })
            .collect();
        ObstacleOperator {
            space,
            table,
            cells,
            positions,
            parallel: true,
        }
    }

    /// Disables rayon for the local computations.
    pub fn serial(mut self, serial: bool) -> Self {
        self.parallel = !serial;
        self
    }

    pub fn space(&self) -> &FeSpace {
        self.space
    }

    pub fn table(&self) -> &ReferenceTable {
        &self.table
    }

    pub fn gamma(&self, cell: usize) -> f64 {
        self.cells[cell].gamma
    }

    /// Physical quadrature points of a cell.
    pub fn quadrature_points(&self, cell: usize) -> &[Point; NQ] {
        &self.cells[cell].points
    }

    /// Physical weights (reference weight times |det J|) of a cell.
    pub fn quadrature_weights(&self, cell: usize) -> [f64; NQ] {
        let d = self.cells[cell].geo.abs_det();
        std::array::from_fn(|q| self.table.rule.weights[q] * d)
    }

    pub fn load_at(&self, cell: usize) -> &[f64; NQ] {
        &self.cells[cell].f
    }

    fn map_cells<T: Send>(&self, op: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        if self.parallel {
            (0..self.cells.len()).into_par_iter().map(op).collect()
        } else {
            (0..self.cells.len()).map(op).collect()
        }
    }

    fn local_coeffs(&self, u: &[f64], t: usize) -> LocalVector {
        self.space.cell_dofs(t).map(|d| u[d])
    }

    fn physical_gradients(&self, t: usize, q: usize) -> [[f64; 2]; N_LOCAL] {
        let geo = &self.cells[t].geo;
        self.table.basis[q].gradients.map(|g| geo.gradient(g))
    }

    /// Per quadrature point: (value, gradient) of u, and Δu on the cell.
    fn point_values(&self, c: &LocalVector, t: usize, q: usize) -> (f64, [f64; 2], [[f64; 2]; N_LOCAL]) {
        let b = &self.table.basis[q];
        let grads = self.physical_gradients(t, q);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for i in 0..N_LOCAL {
            v += c[i] * b.values[i];
            g[0] += c[i] * grads[i][0];
            g[1] += c[i] * grads[i][1];
        }
        (v, g, grads)
    }

    fn cell_laplacian(&self, c: &LocalVector, t: usize) -> f64 {
        (0..N_LOCAL).map(|i| c[i] * self.cells[t].lap[i]).sum()
    }

    /// `Ψ - P(u)` at each quadrature point of a cell.
    fn contact_gap(&self, c: &LocalVector, t: usize) -> [f64; NQ] {
        let cell = &self.cells[t];
        let lap = self.cell_laplacian(c, t);
        std::array::from_fn(|q| {
            let b = &self.table.basis[q];
            let v: f64 = (0..N_LOCAL).map(|i| c[i] * b.values[i]).sum();
            (cell.psi[q] - cell.gamma * cell.f[q]) - (v + cell.gamma * lap)
        })
    }

    fn local_residual(&self, u: &[f64], t: usize) -> LocalVector {
        let cell = &self.cells[t];
        let c = self.local_coeffs(u, t);
        let gamma = cell.gamma;
        let lap_u = self.cell_laplacian(&c, t);
        let gap = self.contact_gap(&c, t);
        let det = cell.geo.abs_det();
        let mut r = [0.0; N_LOCAL];
        for q in 0..NQ {
            let w = self.table.rule.weights[q] * det;
            let b = &self.table.basis[q];
            let (_, gu, grads) = self.point_values(&c, t, q);
            let s = gap[q].max(0.0);
            let f = cell.f[q];
            for i in 0..N_LOCAL {
                let p_phi = b.values[i] + gamma * cell.lap[i];
                r[i] += w
                    * (gu[0] * grads[i][0] + gu[1] * grads[i][1]
                        - s / gamma * p_phi
                        - gamma * (lap_u + f) * cell.lap[i]
                        - f * b.values[i]);
            }
        }
        r
    }

    fn local_jacobian(&self, u: &[f64], t: usize) -> LocalMatrix {
        let cell = &self.cells[t];
        let c = self.local_coeffs(u, t);
        let gamma = cell.gamma;
        let gap = self.contact_gap(&c, t);
        let det = cell.geo.abs_det();
        let mut k = [[0.0; N_LOCAL]; N_LOCAL];
        for q in 0..NQ {
            let w = self.table.rule.weights[q] * det;
            let b = &self.table.basis[q];
            let grads = self.physical_gradients(t, q);
            let active = gap[q] > 0.0;
            let p_phi: LocalVector = std::array::from_fn(|i| b.values[i] + gamma * cell.lap[i]);
            for i in 0..N_LOCAL {
                for j in 0..N_LOCAL {
                    let mut v = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1] - gamma * cell.lap[i] * cell.lap[j];
                    if active {
                        v += p_phi[i] * p_phi[j] / gamma;
                    }
                    k[i][j] += w * v;
                }
            }
        }
        k
    }

    fn scatter_vector(&self, locals: Vec<LocalVector>) -> Vec<f64> {
        let mut out = vec![0.0; self.space.n_dofs()];
        for (t, r) in locals.iter().enumerate() {
            for (i, &d) in self.space.cell_dofs(t).iter().enumerate() {
                out[d] += r[i];
            }
        }
        out
    }

    fn scatter_matrix(&self, locals: Vec<LocalMatrix>, constrained: Option<&[bool]>) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(self.space.pattern());
        let values = m.values_mut();
        for (t, k) in locals.iter().enumerate() {
            let dofs = self.space.cell_dofs(t);
            let pos = &self.positions[t];
            for i in 0..N_LOCAL {
                for j in 0..N_LOCAL {
                    if let Some(mask) = constrained {
                        if mask[dofs[i]] || mask[dofs[j]] {
                            continue;
                        }
                    }
                    values[pos[i * N_LOCAL + j]] += k[i][j];
                }
            }
        }
        if let Some(mask) = constrained {
            let pattern = m.pattern().clone();
            for (i, _) in mask.iter().enumerate().filter(|(_, &c)| c) {
                let k = pattern.find(i, i).expect("diagonal is in the pattern");
                m.values_mut()[k] = 1.0;
            }
        }
        m
    }

    /// Residual vector with Dirichlet rows set to zero.
    pub fn residual(&self, u: &[f64]) -> CoefficientVector {
        let locals = self.map_cells(|t| self.local_residual(u, t));
        let mut r = self.scatter_vector(locals);
        for (ri, &c) in r.iter_mut().zip(self.space.dirichlet_mask()) {
            if c {
                *ri = 0.0;
            }
        }
        CoefficientVector(r)
    }

    /// Semismooth Jacobian with Dirichlet rows and columns eliminated.
    pub fn jacobian(&self, u: &[f64]) -> SparseMatrix {
        let locals = self.map_cells(|t| self.local_jacobian(u, t));
        self.scatter_matrix(locals, Some(self.space.dirichlet_mask()))
    }

    /// Value of the discrete functional whose gradient is the residual.
    pub fn functional(&self, u: &[f64]) -> f64 {
        let parts = self.map_cells(|t| {
            let cell = &self.cells[t];
            let c = self.local_coeffs(u, t);
            let lap_u = self.cell_laplacian(&c, t);
            let gap = self.contact_gap(&c, t);
            let det = cell.geo.abs_det();
            let mut s = 0.0;
            for q in 0..NQ {
                let w = self.table.rule.weights[q] * det;
                let (v, g, _) = self.point_values(&c, t, q);
                let pos = gap[q].max(0.0);
                let f = cell.f[q];
                s += w
                    * (0.5 * (g[0] * g[0] + g[1] * g[1]) + pos * pos / (2.0 * cell.gamma)
                        - 0.5 * cell.gamma * (lap_u + f).powi(2)
                        - f * v);
            }
            s
        });
        parts.iter().sum()
    }

    /// Reconstructed multiplier λ_h = -γ⁻¹[Ψ - P(u)]₊ at each quadrature point.
    pub fn multiplier_field(&self, u: &[f64]) -> Vec<[f64; NQ]> {
        self.map_cells(|t| {
            let c = self.local_coeffs(u, t);
            let gamma = self.cells[t].gamma;
            self.contact_gap(&c, t).map(|g| -g.max(0.0) / gamma)
        })
    }

    /// Activity flag per quadrature point, cell-major.
    pub fn active_set(&self, u: &[f64]) -> Vec<bool> {
        let per_cell = self.map_cells(|t| {
            let c = self.local_coeffs(u, t);
            self.contact_gap(&c, t).map(|g| g > 0.0)
        });
        per_cell.into_iter().flatten().collect()
    }

    /// Smallest |Ψ - P(u)| over all quadrature points.
    pub fn min_kink_distance(&self, u: &[f64]) -> f64 {
        let per_cell = self.map_cells(|t| {
            let c = self.local_coeffs(u, t);
            self.contact_gap(&c, t).iter().fold(f64::INFINITY, |m, g| m.min(g.abs()))
        });
        per_cell.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Σ_T ∫_T P(φ_i) P(φ_j) with the operator's γ_T, no boundary conditions.
    pub fn penalty_gram(&self) -> SparseMatrix {
        let locals = self.map_cells(|t| {
            let cell = &self.cells[t];
            let det = cell.geo.abs_det();
            let mut k = [[0.0; N_LOCAL]; N_LOCAL];
            for q in 0..NQ {
                let w = self.table.rule.weights[q] * det;
                let b = &self.table.basis[q];
                let p: LocalVector = std::array::from_fn(|i| b.values[i] + cell.gamma * cell.lap[i]);
                for i in 0..N_LOCAL {
                    for j in 0..N_LOCAL {
                        k[i][j] += w * p[i] * p[j];
                    }
                }
            }
            k
        });
        self.scatter_matrix(locals, None)
    }

    /// Σ_T γ_T ∫_T Δφ_i Δφ_j, no boundary conditions.
    pub fn weighted_laplacian_gram(&self) -> SparseMatrix {
        let locals = self.map_cells(|t| {
            let cell = &self.cells[t];
            let area = 0.5 * cell.geo.abs_det();
            let mut k = [[0.0; N_LOCAL]; N_LOCAL];
            for i in 0..N_LOCAL {
                for j in 0..N_LOCAL {
                    k[i][j] = cell.gamma * area * cell.lap[i] * cell.lap[j];
                }
            }
            k
        });
        self.scatter_matrix(locals, None)
    }
}

fn local_stiffness(space: &FeSpace, table: &ReferenceTable, t: usize) -> LocalMatrix {
    let geo = space.geometry(t);
    let det = geo.abs_det();
    let mut k = [[0.0; N_LOCAL]; N_LOCAL];
    for (q, b) in table.basis.iter().enumerate() {
        let w = table.rule.weights[q] * det;
        let g = b.gradients.map(|g| geo.gradient(g));
        for i in 0..N_LOCAL {
            for j in 0..N_LOCAL {
                k[i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    k
}

/// Stiffness matrix ∫ ∇φ_i·∇φ_j without boundary conditions.
pub fn assemble_stiffness(space: &FeSpace) -> SparseMatrix {
    let table = ReferenceTable::standard();
    let mut m = SparseMatrix::zeros(space.pattern());
    for t in 0..space.mesh().n_cells() {
        let k = local_stiffness(space, &table, t);
        let dofs = space.cell_dofs(t);
        for i in 0..N_LOCAL {
            for j in 0..N_LOCAL {
                m.add(dofs[i], dofs[j], k[i][j]);
            }
        }
    }
    m
}

/// Load vector ∫ f φ_i.
pub fn assemble_load(f: impl Fn(Point) -> f64, space: &FeSpace) -> CoefficientVector {
    let table = ReferenceTable::standard();
    let mut b = vec![0.0; space.n_dofs()];
    for t in 0..space.mesh().n_cells() {
        let geo = space.geometry(t);
        let det = geo.abs_det();
        let dofs = space.cell_dofs(t);
        for (q, basis) in table.basis.iter().enumerate() {
            let w = table.rule.weights[q] * det * f(geo.map(table.rule.points[q]));
            for i in 0..N_LOCAL {
                b[dofs[i]] += w * basis.values[i];
            }
        }
    }
    CoefficientVector(b)
}

/// Residual of the discrete system with Dirichlet rows zeroed.
pub fn residual(u: &[f64], data: &ProblemData, space: &FeSpace) -> CoefficientVector {
    ObstacleOperator::new(space, data).residual(u)
}

/// Semismooth Jacobian with Dirichlet elimination.
pub fn jacobian(u: &[f64], data: &ProblemData, space: &FeSpace) -> SparseMatrix {
    ObstacleOperator::new(space, data).jacobian(u)
}

/// Reconstructed multiplier at every quadrature point, per cell.
pub fn multiplier_field(u: &[f64], data: &ProblemData, space: &FeSpace) -> Vec<[f64; NQ]> {
    ObstacleOperator::new(space, data).multiplier_field(u)
}

/// Discrete functional value.
pub fn discrete_functional(u: &[f64], data: &ProblemData, space: &FeSpace) -> f64 {
    ObstacleOperator::new(space, data).functional(u)
}

/// `h² |T| dᵀ G⁺ d`: the largest generalized eigenvalue of the pair
/// (h² · Laplacian Gram, gradient Gram) for a cell whose Laplacian Gram is the
/// rank-one `|T| d dᵀ`. The first local function is dropped to remove the
/// constants from the kernel of `G`.
pub fn cell_inverse_constant_sq(h: f64, area: f64, gradient_gram: &DMatrix<f64>, laplacians: &[f64]) -> f64 {
    let n = laplacians.len();
    if laplacians.iter().all(|&d| d == 0.0) {
        return 0.0;
    }
    let g = gradient_gram.view((1, 1), (n - 1, n - 1)).into_owned();
    let d = DVector::from_row_slice(&laplacians[1..]);
    let chol = g.cholesky().expect("gradient Gram matrix is positive definite modulo constants");
    let x = chol.solve(&d);
    h * h * area * d.dot(&x)
}

/// Inverse-inequality constant C_i with γ_T‖Δv‖²_T ≤ γ₀ C_i² ‖∇v‖²_T for γ_T = γ₀h_T².
pub fn estimate_inverse_constant(space: &FeSpace) -> f64 {
    let table = ReferenceTable::standard();
    let mesh = space.mesh();
    let mut max: f64 = 0.0;
    for t in 0..mesh.n_cells() {
        let k = local_stiffness(space, &table, t);
        let gram = DMatrix::from_fn(N_LOCAL, N_LOCAL, |i, j| k[i][j]);
        let geo = space.geometry(t);
        let lap: Vec<f64> = table.basis[0].hessians.iter().map(|&h| geo.laplacian(h)).collect();
        max = max.max(cell_inverse_constant_sq(mesh.cell_diameter(t), mesh.cell_area(t), &gram, &lap));
    }
    max.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_square_mesh;

    #[test]
    fn stiffness_basics() {
        let s = FeSpace::new(build_square_mesh(3).unwrap());
        let a = assemble_stiffness(&s);
        let ones = vec![1.0; s.n_dofs()];
        assert!(a.mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
        assert!(a.symmetry_defect() <= 1e-14 * a.max_abs());
        let x = s.interpolate(|p| p[0]);
        assert!((a.quadratic_form(&x) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn load_basics() {
        let s = FeSpace::new(build_square_mesh(2).unwrap());
        let b = assemble_load(|_| 1.0, &s);
        assert!((b.iter().sum::<f64>() - 4.0).abs() < 1e-13);
        assert!(assemble_load(|_| 0.0, &s).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_data_zero_residual() {
        let s = FeSpace::new(build_square_mesh(2).unwrap());
        let data = ProblemData::new(field(|_| 0.0), field(|_| 0.0), field(|_| 0.0), 0.01, GammaMode::Local);
        let r = residual(&vec![0.0; s.n_dofs()], &data, &s);
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gamma_modes() {
        let m = build_square_mesh(4).unwrap();
        let data = ProblemData::new(field(|_| 0.0), field(|_| 0.0), field(|_| 0.0), 0.01, GammaMode::Global);
        let g = data.gamma_per_cell(&m);
        assert!(g.iter().all(|&v| (v - 0.01 / 25.0).abs() < 1e-18));
        let local = ProblemData {
            gamma_mode: GammaMode::Local,
            ..data
        };
        let g = local.gamma_per_cell(&m);
        assert!(g.iter().all(|&v| (v - 0.01 * 0.5).abs() < 1e-15));
    }

    #[test]
    fn p1_restriction_has_zero_inverse_constant() {
        let gram = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5]);
        assert_eq!(cell_inverse_constant_sq(1.0, 0.5, &gram, &[0.0; 3]), 0.0);
    }

    #[test]
    fn inverse_constant_is_scale_invariant() {
        let m = build_square_mesh(2).unwrap();
        let scaled = Mesh::from_cells(m.vertices().iter().map(|p| [7.5 * p[0], 7.5 * p[1]]).collect(), m.cells().to_vec())
            .unwrap();
        let a = estimate_inverse_constant(&FeSpace::new(m));
        let b = estimate_inverse_constant(&FeSpace::new(scaled));
        assert!((a - b).abs() < 1e-10 * a);
    }
}
