//! Continuous piecewise quadratic Lagrange space on a triangulation.

use std::ops::{Deref, DerefMut};
use std::sync::{Arc, OnceLock};

use crate::mesh::{Mesh, Point};
use crate::quadrature::{quad_rule, QuadratureRule};
use crate::sparse::SparsityPattern;

/// Number of local basis functions of the P2 triangle.
pub const N_LOCAL: usize = 6;

/// Barycentric coordinates of the six local nodes: the three vertices, then
/// the midpoints of edges (0,1), (1,2), (2,0).
pub const LOCAL_NODES: [[f64; 3]; N_LOCAL] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];

// reference gradients of λ0, λ1, λ2 with respect to (ξ, η)
const DLAMBDA: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
// midpoint basis 3 + k couples vertices (k, k+1 mod 3)
const EDGE_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Values, reference gradients, reference Hessians `(ξξ, ξη, ηη)` and
/// reference Laplacians of the six shape functions at a point.
#[derive(Clone, Copy, Debug)]
pub struct BasisEval {
    pub values: [f64; N_LOCAL],
    pub gradients: [[f64; 2]; N_LOCAL],
    pub hessians: [[f64; 3]; N_LOCAL],
    pub laplacians: [f64; N_LOCAL],
}

fn outer_sym(a: [f64; 2], b: [f64; 2]) -> [f64; 3] {
    [2.0 * a[0] * b[0], a[0] * b[1] + a[1] * b[0], 2.0 * a[1] * b[1]]
}

/// Evaluates the quadratic Lagrange shape functions at a barycentric point.
pub fn eval_basis(bary: [f64; 3]) -> BasisEval {
    let mut values = [0.0; N_LOCAL];
    let mut gradients = [[0.0; 2]; N_LOCAL];
    let mut hessians = [[0.0; 3]; N_LOCAL];
    for i in 0..3 {
        let l = bary[i];
        let g = DLAMBDA[i];
        values[i] = l * (2.0 * l - 1.0);
        gradients[i] = [(4.0 * l - 1.0) * g[0], (4.0 * l - 1.0) * g[1]];
        let h = outer_sym(g, g);
        hessians[i] = [2.0 * h[0], 2.0 * h[1], 2.0 * h[2]];
    }
    for (k, &(a, b)) in EDGE_PAIRS.iter().enumerate() {
        let (la, lb) = (bary[a], bary[b]);
        let (ga, gb) = (DLAMBDA[a], DLAMBDA[b]);
        values[3 + k] = 4.0 * la * lb;
        gradients[3 + k] = [4.0 * (lb * ga[0] + la * gb[0]), 4.0 * (lb * ga[1] + la * gb[1])];
        let h = outer_sym(ga, gb);
        hessians[3 + k] = [4.0 * h[0], 4.0 * h[1], 4.0 * h[2]];
    }
    let laplacians = hessians.map(|h| h[0] + h[2]);
    BasisEval {
        values,
        gradients,
        hessians,
        laplacians,
    }
}

/// Affine map from the reference triangle onto a physical cell.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    origin: Point,
    jac: [[f64; 2]; 2],
    // J^{-T}
    inv_t: [[f64; 2]; 2],
    det: f64,
}

impl CellGeometry {
    pub fn new(p: [Point; 3]) -> CellGeometry {
        let jac = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
        CellGeometry {
            origin: p[0],
            jac,
            inv_t,
            det,
        }
    }

    pub fn of_cell(mesh: &Mesh, cell: usize) -> CellGeometry {
        CellGeometry::new(mesh.cell_points(cell))
    }

    /// |det J| = twice the cell area.
    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    pub fn map(&self, bary: [f64; 3]) -> Point {
        let (x, y) = (bary[1], bary[2]);
        [
            self.origin[0] + self.jac[0][0] * x + self.jac[0][1] * y,
            self.origin[1] + self.jac[1][0] * x + self.jac[1][1] * y,
        ]
    }

    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        // ξ = J^{-1} d = (J^{-T})^T d
        let xi = self.inv_t[0][0] * d[0] + self.inv_t[1][0] * d[1];
        let eta = self.inv_t[0][1] * d[0] + self.inv_t[1][1] * d[1];
        [1.0 - xi - eta, xi, eta]
    }

    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }

    /// Physical Laplacian tr(J^{-T} H J^{-1}) of a reference Hessian `(ξξ, ξη, ηη)`.
    pub fn laplacian(&self, h: [f64; 3]) -> f64 {
        let k = &self.inv_t;
        // M = K^T K
        let m00 = k[0][0] * k[0][0] + k[1][0] * k[1][0];
        let m01 = k[0][0] * k[0][1] + k[1][0] * k[1][1];
        let m11 = k[0][1] * k[0][1] + k[1][1] * k[1][1];
        h[0] * m00 + 2.0 * h[1] * m01 + h[2] * m11
    }
}

/// Shape functions tabulated at the points of a quadrature rule.
#[derive(Clone, Debug)]
pub struct ReferenceTable {
    pub rule: QuadratureRule,
    pub basis: Vec<BasisEval>,
}

impl ReferenceTable {
    pub fn new(rule: QuadratureRule) -> ReferenceTable {
        let basis = rule.points.iter().map(|&p| eval_basis(p)).collect();
        ReferenceTable { rule, basis }
    }

    /// The degree-6 table used throughout assembly and error computation.
    pub fn standard() -> ReferenceTable {
        ReferenceTable::new(quad_rule(6).expect("degree 6 is tabulated"))
    }
}

/// DOF-indexed coefficients of a field in the P2 space.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector(pub Vec<f64>);

impl CoefficientVector {
    pub fn zeros(n: usize) -> CoefficientVector {
        CoefficientVector(vec![0.0; n])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Deref for CoefficientVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for CoefficientVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for CoefficientVector {
    fn from(v: Vec<f64>) -> Self {
        CoefficientVector(v)
    }
}

/// Quadratic Lagrange space: vertex DOFs come first (same ids as the mesh
/// vertices), followed by one DOF per edge midpoint.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    dof_map: Vec<[usize; N_LOCAL]>,
    dirichlet: Vec<bool>,
    node_coords: Vec<Point>,
    pattern: OnceLock<Arc<SparsityPattern>>,
}

impl FeSpace {
    pub fn new(mesh: impl Into<Arc<Mesh>>) -> FeSpace {
        let mesh = mesh.into();
        let nv = mesh.n_vertices();
        let dof_map = mesh
            .cells()
            .iter()
            .zip(mesh.cell_edges())
            .map(|(c, e)| [c[0], c[1], c[2], nv + e[2], nv + e[0], nv + e[1]])
            .collect();
        let mut dirichlet = vec![false; nv + mesh.n_edges()];
        let mut node_coords = mesh.vertices().to_vec();
        for e in 0..mesh.n_edges() {
            node_coords.push(mesh.edge_midpoint(e));
            if mesh.is_boundary_edge(e) {
                let [a, b] = mesh.edges()[e];
                dirichlet[a] = true;
                dirichlet[b] = true;
                dirichlet[nv + e] = true;
            }
        }
        FeSpace {
            mesh,
            dof_map,
            dirichlet,
            node_coords,
            pattern: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.node_coords.len()
    }

    pub fn dof_map(&self) -> &[[usize; N_LOCAL]] {
        &self.dof_map
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize; N_LOCAL] {
        &self.dof_map[cell]
    }

    /// Per-DOF flag, true on nodes of boundary edges.
    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&i| self.dirichlet[i]).collect()
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn pattern(&self) -> Arc<SparsityPattern> {
        self.pattern
            .get_or_init(|| Arc::new(SparsityPattern::from_elements(self.n_dofs(), &self.dof_map)))
            .clone()
    }

    pub fn geometry(&self, cell: usize) -> CellGeometry {
        CellGeometry::of_cell(&self.mesh, cell)
    }

    fn local(&self, u: &[f64], cell: usize) -> [f64; N_LOCAL] {
        self.dof_map[cell].map(|d| u[d])
    }

    /// Value, physical gradient and physical Laplacian of `u` at a barycentric point of `cell`.
    pub fn evaluate(&self, u: &[f64], cell: usize, bary: [f64; 3]) -> (f64, [f64; 2], f64) {
        let geo = self.geometry(cell);
        let b = eval_basis(bary);
        let c = self.local(u, cell);
        let mut value = 0.0;
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for i in 0..N_LOCAL {
            value += c[i] * b.values[i];
            g[0] += c[i] * b.gradients[i][0];
            g[1] += c[i] * b.gradients[i][1];
            for k in 0..3 {
                h[k] += c[i] * b.hessians[i][k];
            }
        }
        (value, geo.gradient(g), geo.laplacian(h))
    }

    /// Nodal interpolant of `field`.
    pub fn interpolate(&self, field: impl Fn(Point) -> f64) -> CoefficientVector {
        CoefficientVector(self.node_coords.iter().map(|&p| field(p)).collect())
    }

    /// Overwrites the Dirichlet DOFs of `u` with the nodal values of `g`.
    pub fn impose_dirichlet(&self, u: &mut [f64], g: impl Fn(Point) -> f64) {
        for (i, &p) in self.node_coords.iter().enumerate() {
            if self.dirichlet[i] {
                u[i] = g(p);
            }
        }
    }

    /// Transfers a field from the space this mesh was refined from. Exact for
    /// P2 fields since every child cell lies inside its parent.
    pub fn prolongate(&self, coarse: &FeSpace, u: &[f64]) -> CoefficientVector {
        let mut out = vec![0.0; self.n_dofs()];
        for (t, dofs) in self.dof_map.iter().enumerate() {
            let p = self.mesh.parent()[t].expect("prolongation requires a refined mesh");
            let geo = coarse.geometry(p);
            let c = coarse.local(u, p);
            for &d in dofs {
                let b = eval_basis(geo.barycentric(self.node_coords[d]));
                out[d] = (0..N_LOCAL).map(|i| c[i] * b.values[i]).sum();
            }
        }
        CoefficientVector(out)
    }

    /// Interpolates a field given on an unrelated mesh of the same domain by
    /// locating every node of this space in `coarse`. Exact when the meshes
    /// are nested.
    pub fn transfer_from(&self, coarse: &FeSpace, u: &[f64]) -> CoefficientVector {
        let locator = PointLocator::new(&coarse.mesh);
        CoefficientVector(
            self.node_coords
                .iter()
                .map(|&p| {
                    let (cell, bary) = locator.locate(p);
                    let b = eval_basis(bary);
                    let c = coarse.local(u, cell);
                    (0..N_LOCAL).map(|i| c[i] * b.values[i]).sum()
                })
                .collect(),
        )
    }
}

/// Bucket grid over the bounding box of a mesh for point location.
struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    fn new(mesh: &'a Mesh) -> PointLocator<'a> {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let side = (mesh.n_cells() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell_size = [0, 1].map(|k| ((hi[k] - lo[k]) / side as f64).max(f64::MIN_POSITIVE));
        let mut locator = PointLocator {
            mesh,
            origin: lo,
            cell_size,
            dims,
            buckets: vec![Vec::new(); side * side],
        };
        for (t, c) in mesh.cells().iter().enumerate() {
            let pts = c.map(|v| mesh.vertices()[v]);
            let (i0, j0) = locator.bucket(pts.iter().fold([f64::INFINITY; 2], |m, p| [m[0].min(p[0]), m[1].min(p[1])]));
            let (i1, j1) = locator.bucket(pts.iter().fold([f64::NEG_INFINITY; 2], |m, p| [m[0].max(p[0]), m[1].max(p[1])]));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    locator.buckets[j * side + i].push(t);
                }
            }
        }
        locator
    }

    fn bucket(&self, p: Point) -> (usize, usize) {
        let idx = |k: usize| (((p[k] - self.origin[k]) / self.cell_size[k]).floor().max(0.0) as usize).min(self.dims[k] - 1);
        (idx(0), idx(1))
    }

    /// Containing cell and barycentric coordinates; for points outside the
    /// mesh, the cell of the bucket that is closest in barycentric terms.
    fn locate(&self, p: Point) -> (usize, [f64; 3]) {
        let (i, j) = self.bucket(p);
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        let mut candidates = self.buckets[j * self.dims[0] + i].iter().copied();
        let all = || 0..self.mesh.n_cells();
        let search = |cells: &mut dyn Iterator<Item = usize>, best: &mut Option<(f64, usize, [f64; 3])>| {
            for t in cells {
                let b = CellGeometry::of_cell(self.mesh, t).barycentric(p);
                let m = b[0].min(b[1]).min(b[2]);
                if best.is_none_or(|(bm, _, _)| m > bm) {
                    *best = Some((m, t, b));
                }
                if m >= -1e-12 {
                    return true;
                }
            }
            false
        };
        if !search(&mut candidates, &mut best) {
            search(&mut all(), &mut best);
        }
        let (_, t, b) = best.expect("mesh has cells");
        (t, b)
    }
}

/// Free-function form of [`FeSpace::new`].
pub fn build_space(mesh: impl Into<Arc<Mesh>>) -> FeSpace {
    FeSpace::new(mesh)
}

/// Free-function form of [`FeSpace::interpolate`].
pub fn interpolate(field: impl Fn(Point) -> f64, space: &FeSpace) -> CoefficientVector {
    space.interpolate(field)
}
