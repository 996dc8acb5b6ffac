//! Conforming triangulations of the two benchmark domains and their
//! refinement by newest-vertex bisection.
//!
//! Every cell is stored as `[z0, z1, z2]` in counterclockwise order where
//! `z0` is the newest vertex and `(z1, z2)` is the refinement edge. Local edge
//! `k` of a cell is the edge opposite local vertex `k`, so the refinement edge
//! is always local edge 0.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

const NO_CELL: usize = usize::MAX;

/// Conforming triangulation with edge topology and bisection ancestry.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_cells: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    parent: Vec<Option<usize>>,
}

/// An edge shared by two cells, with the unit normal pointing from `left` into `right`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteriorFace {
    pub edge: usize,
    pub left: usize,
    pub right: usize,
    pub normal: Point,
}

impl InteriorFace {
    /// The same face seen from the other side.
    pub fn flipped(&self) -> InteriorFace {
        InteriorFace {
            edge: self.edge,
            left: self.right,
            right: self.left,
            normal: [-self.normal[0], -self.normal[1]],
        }
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds the edge topology for a list of positively oriented cells whose
    /// first vertex is the newest vertex.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Result<Mesh> {
        let parent = vec![None; cells.len()];
        Mesh::assemble(vertices, cells, parent)
    }

    /// Like [`Mesh::from_cells`] but assigns each cell's refinement edge to its
    /// longest edge, ties broken by the lowest opposite-vertex index.
    pub fn from_cells_longest_edge(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Result<Mesh> {
        let cells = cells
            .into_iter()
            .map(|c| {
                let len = |k: usize| dist(vertices[c[(k + 1) % 3]], vertices[c[(k + 2) % 3]]);
                let mut best = 0;
                for k in 1..3 {
                    let (lk, lb) = (len(k), len(best));
                    // lengths from the same coordinates; a relative tolerance treats
                    // equal-length edges of a square split as ties
                    if lk > lb * (1.0 + 1e-12) || ((lk - lb).abs() <= lb * 1e-12 && c[k] < c[best]) {
                        best = k;
                    }
                }
                [c[best], c[(best + 1) % 3], c[(best + 2) % 3]]
            })
            .collect();
        Mesh::from_cells(vertices, cells)
    }

    fn assemble(vertices: Vec<Point>, cells: Vec<[usize; 3]>, parent: Vec<Option<usize>>) -> Result<Mesh> {
        let nv = vertices.len();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(cells.len() * 2);
        let mut edges = Vec::with_capacity(cells.len() * 3 / 2 + nv);
        let mut edge_cells: Vec<[usize; 2]> = Vec::with_capacity(edges.capacity());
        let mut cell_edges = Vec::with_capacity(cells.len());

        for (t, c) in cells.iter().enumerate() {
            if c.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("cell {t} references a missing vertex")));
            }
            if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                return Err(Error::InvalidMesh(format!("cell {t} has repeated vertices")));
            }
            let area = signed_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!("cell {t} has non-positive area {area:e}")));
            }
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let key = edge_key(c[(k + 1) % 3], c[(k + 2) % 3]);
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push([NO_CELL, NO_CELL]);
                    edges.len() - 1
                });
                let adj = &mut edge_cells[e];
                if adj[0] == NO_CELL {
                    adj[0] = t;
                } else if adj[1] == NO_CELL {
                    adj[1] = t;
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) has more than two incident cells",
                        key.0, key.1
                    )));
                }
                *slot = e;
            }
            cell_edges.push(local);
        }

        let mut boundary_vertex = vec![false; nv];
        for (e, adj) in edge_cells.iter().enumerate() {
            if adj[1] == NO_CELL {
                boundary_vertex[edges[e][0]] = true;
                boundary_vertex[edges[e][1]] = true;
            }
        }

        Ok(Mesh {
            vertices,
            cells,
            edges,
            edge_cells,
            cell_edges,
            boundary_vertex,
            parent,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Local edges of each cell; entry `k` is opposite local vertex `k`.
    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    /// Cell of the previous mesh this cell was obtained from, if any.
    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// The one or two cells adjacent to an edge.
    pub fn edge_cells(&self, edge: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_cells[edge];
        (a, (b != NO_CELL).then_some(b))
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_cells[edge][1] == NO_CELL
    }

    pub fn boundary_edge_flags(&self) -> Vec<bool> {
        (0..self.n_edges()).map(|e| self.is_boundary_edge(e)).collect()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        let c = self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_points(cell);
        signed_area(a, b, c)
    }

    /// Longest edge of the cell.
    pub fn cell_diameter(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_points(cell);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn cell_centroid(&self, cell: usize) -> Point {
        let [a, b, c] = self.cell_points(cell);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edges[edge];
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn edge_midpoint(&self, edge: usize) -> Point {
        let [a, b] = self.edges[edge];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|t| self.cell_area(t)).sum()
    }

    pub fn min_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|t| self.cell_diameter(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|t| self.cell_diameter(t)).fold(0.0, f64::max)
    }

    /// Smallest interior angle over all cells, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.n_cells() {
            let p = self.cell_points(t);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(a, b) * dist(a, c));
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    /// Euler characteristic #V - #E + #T.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_cells() as i64
    }

    /// Edges with two incident cells, normals pointing from the lower-id cell
    /// into the higher-id one.
    pub fn interior_faces(&self) -> Vec<InteriorFace> {
        let mut faces = Vec::with_capacity(self.n_edges());
        for (e, &[a, b]) in self.edge_cells.iter().enumerate() {
            if b == NO_CELL {
                continue;
            }
            let (left, right) = (a.min(b), a.max(b));
            let [p, q] = self.edges[e];
            let (p, q) = (self.vertices[p], self.vertices[q]);
            let len = dist(p, q);
            let mut normal = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let c = self.cell_centroid(left);
            if (mid[0] - c[0]) * normal[0] + (mid[1] - c[1]) * normal[1] < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            faces.push(InteriorFace {
                edge: e,
                left,
                right,
                normal,
            });
        }
        faces
    }

    /// Checks the structural invariants of a triangulation of a simply
    /// connected domain: positive areas, and a boundary that is one simple
    /// closed polygon. A hanging node splits one side of an interior edge and
    /// shows up as a second boundary cycle.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_cells() {
            if !(self.cell_area(t) > 0.0) {
                return Err(Error::InvalidMesh(format!("cell {t} is not positively oriented")));
            }
        }
        let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
        for (e, adj) in self.edge_cells.iter().enumerate() {
            if adj[0] == NO_CELL {
                return Err(Error::InvalidMesh(format!("edge {e} has no incident cell")));
            }
            if adj[1] == NO_CELL {
                let [a, b] = self.edges[e];
                adjacency.entry(a).or_default().push(b);
                adjacency.entry(b).or_default().push(a);
            }
        }
        if let Some((v, _)) = adjacency.iter().find(|(_, n)| n.len() != 2) {
            return Err(Error::InvalidMesh(format!("boundary vertex {v} does not have two boundary edges")));
        }
        let Some(&start) = adjacency.keys().min() else {
            return Err(Error::InvalidMesh("mesh has no boundary".into()));
        };
        let (mut prev, mut cur, mut walked) = (start, adjacency[&start][0], 1);
        while cur != start {
            let n = &adjacency[&cur];
            let next = if n[0] == prev { n[1] } else { n[0] };
            prev = cur;
            cur = next;
            walked += 1;
        }
        if walked != adjacency.len() {
            return Err(Error::InvalidMesh("boundary is not a single closed polygon (hanging node)".into()));
        }
        if self.euler_characteristic() != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic {} != 1",
                self.euler_characteristic()
            )));
        }
        Ok(())
    }

    /// Newest-vertex bisection of the marked cells plus the closure needed to
    /// keep the mesh conforming. Each output cell records the input cell it
    /// came from.
    pub fn refine(&self, marked: &[usize]) -> Mesh {
        let ne = self.n_edges();
        let mut edge_marked = vec![false; ne];
        let mut queue = Vec::new();
        for &t in marked {
            let e = self.cell_edges[t][0];
            if !edge_marked[e] {
                edge_marked[e] = true;
                queue.push(e);
            }
        }
        // closure: a cell with any marked edge must also bisect its refinement edge
        while let Some(e) = queue.pop() {
            for &t in &self.edge_cells[e] {
                if t == NO_CELL {
                    continue;
                }
                let r = self.cell_edges[t][0];
                if !edge_marked[r] {
                    edge_marked[r] = true;
                    queue.push(r);
                }
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![NO_CELL; ne];
        for e in 0..ne {
            if edge_marked[e] {
                midpoint[e] = vertices.len();
                vertices.push(self.edge_midpoint(e));
            }
        }

        let mut cells = Vec::with_capacity(self.n_cells() * 2);
        let mut parent = Vec::with_capacity(self.n_cells() * 2);
        for t in 0..self.n_cells() {
            let [z0, z1, z2] = self.cells[t];
            let [r, e2, e1] = [self.cell_edges[t][0], self.cell_edges[t][2], self.cell_edges[t][1]];
            if !edge_marked[r] {
                cells.push([z0, z1, z2]);
                parent.push(Some(t));
                continue;
            }
            let m = midpoint[r];
            // children (m, z0, z1) and (m, z2, z0); their refinement edges are
            // the old edges (z0, z1) = local edge 2 and (z2, z0) = local edge 1
            for (child, old_edge) in [([m, z0, z1], e2), ([m, z2, z0], e1)] {
                if edge_marked[old_edge] {
                    let mm = midpoint[old_edge];
                    let [a, b, c] = child;
                    cells.push([mm, a, b]);
                    cells.push([mm, c, a]);
                    parent.push(Some(t));
                    parent.push(Some(t));
                } else {
                    cells.push(child);
                    parent.push(Some(t));
                }
            }
        }

        Mesh::assemble(vertices, cells, parent).expect("bisection preserves mesh validity")
    }
}

/// Uniform triangulation of (-1, 1)^2 with `n` squares per side, each split
/// along the diagonal from its lower-left to its upper-right corner.
pub fn build_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidSubdivision(n));
    }
    let step = 2.0 / n as f64;
    let coord = |i: usize| if i == n { 1.0 } else { -1.0 + i as f64 * step };
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(i), coord(j)]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push([a, b, c]);
            cells.push([a, c, d]);
        }
    }
    Mesh::from_cells_longest_edge(vertices, cells)
}

/// Uniform triangulation of (-2, 2)^2 minus [0, 2) x (-2, 0] with `n` squares
/// per unit length.
pub fn build_lshape_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidSubdivision(n));
    }
    let m = 4 * n;
    let coord = |i: usize| -2.0 + i as f64 / n as f64;
    // square (i, j) is removed when it lies in the lower-right quadrant
    let removed = |i: usize, j: usize| i >= 2 * n && j < 2 * n;

    let mut index = vec![NO_CELL; (m + 1) * (m + 1)];
    let mut vertices = Vec::new();
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Point>| {
        let slot = &mut index[j * (m + 1) + i];
        if *slot == NO_CELL {
            *slot = vertices.len();
            vertices.push([coord(i), coord(j)]);
        }
        *slot
    };
    let mut cells = Vec::with_capacity(24 * n * n);
    for j in 0..m {
        for i in 0..m {
            if removed(i, j) {
                continue;
            }
            let a = vid(i, j, &mut vertices);
            let b = vid(i + 1, j, &mut vertices);
            let c = vid(i + 1, j + 1, &mut vertices);
            let d = vid(i, j + 1, &mut vertices);
            cells.push([a, b, c]);
            cells.push([a, c, d]);
        }
    }
    Mesh::from_cells_longest_edge(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let m = build_square_mesh(1).unwrap();
        assert_eq!((m.n_cells(), m.n_vertices(), m.n_edges()), (2, 4, 5));
        assert_eq!(m.interior_faces().len(), 1);

        let m = build_square_mesh(2).unwrap();
        assert_eq!((m.n_cells(), m.n_vertices()), (8, 9));
        assert!((m.total_area() - 4.0).abs() < 1e-14);
        let boundary = (0..m.n_edges()).filter(|&e| m.is_boundary_edge(e)).count();
        assert_eq!(boundary, 8);
        // 16 edges: 12 axis-aligned interior+boundary plus 4 diagonals
        assert_eq!(m.n_edges(), 16);
        assert_eq!(m.interior_faces().len(), m.n_edges() - boundary);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(build_square_mesh(0), Err(Error::InvalidSubdivision(0))));
        assert!(matches!(build_lshape_mesh(0), Err(Error::InvalidSubdivision(0))));
    }

    #[test]
    fn refinement_edge_is_the_diagonal() {
        let m = build_square_mesh(3).unwrap();
        for t in 0..m.n_cells() {
            let e = m.cell_edges()[t][0];
            assert!((m.edge_length(e) - m.cell_diameter(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn lshape_counts() {
        let m = build_lshape_mesh(1).unwrap();
        assert_eq!(m.n_cells(), 24);
        assert!((m.total_area() - 12.0).abs() < 1e-12);
        let origin = m.vertices().iter().position(|p| p[0] == 0.0 && p[1] == 0.0).unwrap();
        assert!(m.is_boundary_vertex(origin));
        assert_eq!(m.euler_characteristic(), 1);
        for n in [2, 3] {
            let m = build_lshape_mesh(n).unwrap();
            assert!((m.total_area() - 12.0).abs() < 1e-12);
            assert_eq!(m.euler_characteristic(), 1);
            m.validate().unwrap();
        }
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = build_lshape_mesh(1).unwrap();
        let r = m.refine(&[]);
        assert_eq!(r.vertices(), m.vertices());
        assert_eq!(r.cells(), m.cells());
    }

    #[test]
    fn bisect_both_cells_of_unit_square() {
        let m = build_square_mesh(1).unwrap();
        let r = m.refine(&[0, 1]);
        assert_eq!((r.n_cells(), r.n_vertices()), (4, 5));
        // 4 boundary edges + 4 half-diagonals
        assert_eq!(r.n_edges(), 8);
        r.validate().unwrap();
        assert_eq!(r.euler_characteristic(), 1);
        assert!(r.parent().iter().all(|p| p.is_some()));
    }

    #[test]
    fn single_mark_triggers_closure() {
        let m = build_square_mesh(2).unwrap();
        let r = m.refine(&[0]);
        r.validate().unwrap();
        assert_eq!(r.euler_characteristic(), 1);
        assert!((r.total_area() - 4.0).abs() < 1e-12);
        // the marked cell's diagonal is shared with cell 1, so both bisect
        assert!(r.n_cells() >= 4 + 6);
    }

    #[test]
    fn hanging_node_is_detected() {
        // split only the upper cell at the diagonal midpoint
        let mut v = build_square_mesh(1).unwrap().vertices().to_vec();
        v.push([0.0, 0.0]);
        let cells = vec![[0, 1, 3], [4, 3, 2], [4, 2, 0]];
        let m = Mesh::from_cells(v, cells).unwrap();
        assert!(m.validate().is_err());
    }

    #[test]
    fn face_normals() {
        let m = build_square_mesh(1).unwrap();
        let f = m.interior_faces()[0];
        let s = 1.0 / 2f64.sqrt();
        // cell 0 lies below the diagonal y = x
        assert!((f.normal[0] + s).abs() < 1e-15 && (f.normal[1] - s).abs() < 1e-15);
        let g = f.flipped();
        assert_eq!(g.normal, [-f.normal[0], -f.normal[1]]);
        assert_eq!((g.left, g.right), (f.right, f.left));
    }
}
