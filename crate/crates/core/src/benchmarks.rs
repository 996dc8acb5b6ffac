//! Manufactured obstacle problems with known solutions, and error norms.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::{field, GammaMode, ProblemData, ScalarField};
use crate::error::Result;
use crate::fespace::{FeSpace, ReferenceTable};
use crate::mesh::{build_lshape_mesh, build_square_mesh, Mesh, Point};

pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Exact solution with first derivatives and Laplacian.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad: VectorField,
    pub lap: ScalarField,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// (-1, 1)²
    Square,
    /// (-2, 2)² minus [0, 2) x (-2, 0]
    LShape,
}

#[derive(Clone)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub domain: Domain,
    pub exact: ExactSolution,
    pub f: ScalarField,
    pub psi: ScalarField,
    pub regularity: &'static str,
}

impl std::fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl BenchmarkCase {
    pub fn by_name(name: &str) -> Option<BenchmarkCase> {
        match name {
            "smooth" => Some(smooth_case()),
            "nonsmooth" => Some(nonsmooth_case()),
            _ => None,
        }
    }

    pub fn build_mesh(&self, n: usize) -> Result<Mesh> {
        match self.domain {
            Domain::Square => build_square_mesh(n),
            Domain::LShape => build_lshape_mesh(n),
        }
    }

    /// Problem data with Dirichlet values taken from the exact solution.
    pub fn problem_data(&self, gamma0: f64, gamma_mode: GammaMode) -> ProblemData {
        ProblemData::new(self.f.clone(), self.psi.clone(), self.exact.u.clone(), gamma0, gamma_mode)
    }
}

pub const SMOOTH_R0: f64 = 0.25;

/// u = [r² - r₀²]₊² on (-1, 1)² with r₀ = 1/4; the contact set is the disc r ≤ r₀.
pub fn smooth_case() -> BenchmarkCase {
    let r0s = SMOOTH_R0 * SMOOTH_R0;
    let u = field(move |p| {
        let s = p[0] * p[0] + p[1] * p[1] - r0s;
        if s > 0.0 {
            s * s
        } else {
            0.0
        }
    });
    let grad: VectorField = Arc::new(move |p: Point| {
        let s = p[0] * p[0] + p[1] * p[1] - r0s;
        if s > 0.0 {
            [4.0 * s * p[0], 4.0 * s * p[1]]
        } else {
            [0.0, 0.0]
        }
    });
    let lap = field(move |p| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 > r0s {
            16.0 * r2 - 8.0 * r0s
        } else {
            0.0
        }
    });
    let f = field(move |p| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 <= r0s {
            -8.0 * r0s * (1.0 - (r2 - r0s))
        } else {
            -8.0 * (2.0 * r2 - r0s)
        }
    });
    BenchmarkCase {
        name: "smooth",
        domain: Domain::Square,
        exact: ExactSolution { u, grad, lap },
        f,
        psi: field(|_| 0.0),
        regularity: "u in H^3 (C^{1,1} across the free boundary r = 1/4)",
    }
}

/// Polar angle in [0, 3π/2] on the L-shape. Points just across the slit
/// (angles in (3π/2, 2π)) are snapped to the nearer slit edge.
pub fn lshape_angle(p: Point) -> f64 {
    let mut phi = p[1].atan2(p[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi > 1.5 * PI {
        phi = if phi > 1.75 * PI { 0.0 } else { 1.5 * PI };
    }
    phi
}

/// Blending function γ₁ and its first two derivatives with respect to r.
pub fn blend(r: f64) -> (f64, f64, f64) {
    let t = 2.0 * (r - 0.25);
    if t < 0.0 {
        (1.0, 0.0, 0.0)
    } else if t < 1.0 {
        let g = -6.0 * t.powi(5) + 15.0 * t.powi(4) - 10.0 * t.powi(3) + 1.0;
        let dg = -30.0 * t * t * (t - 1.0) * (t - 1.0);
        let ddg = -60.0 * t * (2.0 * t - 1.0) * (t - 1.0);
        (g, 2.0 * dg, 4.0 * ddg)
    } else {
        (0.0, 0.0, 0.0)
    }
}

/// u = r^{2/3} γ₁(r) sin(2φ/3) on the L-shape; contact where u = 0, r ≥ 3/4.
pub fn nonsmooth_case() -> BenchmarkCase {
    let u = field(|p| {
        let r = p[0].hypot(p[1]);
        let (g, _, _) = blend(r);
        if g == 0.0 {
            return 0.0;
        }
        r.powf(2.0 / 3.0) * g * (2.0 * lshape_angle(p) / 3.0).sin()
    });
    let grad: VectorField = Arc::new(|p: Point| {
        let r = p[0].hypot(p[1]);
        let (g1, dg1, _) = blend(r);
        if r == 0.0 || g1 == 0.0 {
            return [0.0, 0.0];
        }
        let phi = lshape_angle(p);
        let a = 2.0 * phi / 3.0;
        let g = r.powf(2.0 / 3.0) * g1;
        let dg = (2.0 / 3.0) * r.powf(-1.0 / 3.0) * g1 + r.powf(2.0 / 3.0) * dg1;
        let ur = dg * a.sin();
        let uphi = g / r * (2.0 / 3.0) * a.cos();
        let (c, s) = (phi.cos(), phi.sin());
        [ur * c - uphi * s, ur * s + uphi * c]
    });
    let lap = field(nonsmooth_laplacian);
    let f = field(|p| {
        let r = p[0].hypot(p[1]);
        let g2 = if r > 1.25 { 1.0 } else { 0.0 };
        -nonsmooth_laplacian(p) - g2
    });
    BenchmarkCase {
        name: "nonsmooth",
        domain: Domain::LShape,
        exact: ExactSolution { u, grad, lap },
        f,
        psi: field(|_| 0.0),
        regularity: "u in H^{5/3-eps} (reentrant corner singularity)",
    }
}

fn nonsmooth_laplacian(p: Point) -> f64 {
    let r = p[0].hypot(p[1]);
    let (_, dg1, ddg1) = blend(r);
    if dg1 == 0.0 && ddg1 == 0.0 {
        return 0.0;
    }
    let s = (2.0 * lshape_angle(p) / 3.0).sin();
    s * (r.powf(2.0 / 3.0) * ddg1 + (7.0 / 3.0) * r.powf(-1.0 / 3.0) * dg1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    /// Unweighted broken norm (Σ_T ‖Δ(u - u_h)‖²_T)^{1/2}.
    pub broken_laplacian: f64,
}

/// Errors of `u_h` against the exact solution, by the degree-6 cell rule.
pub fn error_norms(u_h: &[f64], exact: &ExactSolution, space: &FeSpace) -> ErrorNorms {
    let table = ReferenceTable::standard();
    let (mut l2, mut h1, mut lap) = (0.0, 0.0, 0.0);
    for t in 0..space.mesh().n_cells() {
        let geo = space.geometry(t);
        let det = geo.abs_det();
        for (q, &bary) in table.rule.points.iter().enumerate() {
            let w = table.rule.weights[q] * det;
            let p = geo.map(bary);
            let (v, g, l) = space.evaluate(u_h, t, bary);
            let ge = (exact.grad)(p);
            l2 += w * ((exact.u)(p) - v).powi(2);
            h1 += w * ((ge[0] - g[0]).powi(2) + (ge[1] - g[1]).powi(2));
            lap += w * ((exact.lap)(p) - l).powi(2);
        }
    }
    ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        broken_laplacian: lap.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_values() {
        let c = smooth_case();
        assert_eq!((c.exact.u)([1.0, 1.0]), 961.0 / 256.0);
        assert_eq!((c.f)([0.25, 0.0]), -0.5);
        assert!(((c.f)([0.25 + 1e-12, 0.0]) + 0.5).abs() < 1e-10);
        assert_eq!((c.f)([0.0, 0.0]), -17.0 / 32.0);
    }

    #[test]
    fn blend_endpoints() {
        assert_eq!(blend(0.25), (1.0, 0.0, 0.0));
        let (g, dg, ddg) = blend(0.75 - 1e-14);
        assert!(g.abs() < 1e-12 && dg.abs() < 1e-12 && ddg.abs() < 1e-10);
        assert_eq!(blend(0.75), (0.0, 0.0, 0.0));
    }

    #[test]
    fn angle_branch() {
        assert_eq!(lshape_angle([1.0, 0.0]), 0.0);
        assert!((lshape_angle([0.0, -1.0]) - 1.5 * PI).abs() < 1e-15);
        assert!((lshape_angle([-1.0, 0.0]) - PI).abs() < 1e-15);
        assert_eq!(lshape_angle([1.0, -1e-17]), 0.0);
    }
}
