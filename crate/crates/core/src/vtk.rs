//! Legacy ASCII VTK export of the mesh with vertex values and cell fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fespace::FeSpace;

/// Vertex values of `u` as POINT_DATA, `eta` and `lambda` as CELL_DATA.
pub fn render_vtk(space: &FeSpace, u: &[f64], eta: &[f64], lambda: &[f64]) -> String {
    let mesh = space.mesh();
    let (nv, nc) = (mesh.n_vertices(), mesh.n_cells());
    assert!(u.len() >= nv && eta.len() == nc && lambda.len() == nc);
    let mut s = String::with_capacity(64 * (nv + nc));
    s.push_str("# vtk DataFile Version 3.0\nobstacle solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nc} {}", 4 * nc);
    for c in mesh.cells() {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {nv}\nSCALARS u double 1\nLOOKUP_TABLE default");
    for v in &u[..nv] {
        let _ = writeln!(s, "{v:e}");
    }
    let _ = writeln!(s, "CELL_DATA {nc}");
    for (name, values) in [("eta", eta), ("lambda", lambda)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v:e}");
        }
    }
    s
}

pub fn write_vtk(path: &Path, space: &FeSpace, u: &[f64], eta: &[f64], lambda: &[f64]) -> Result<()> {
    fs::write(path, render_vtk(space, u, eta, lambda)).map_err(|e| Error::io(path, e))
}
