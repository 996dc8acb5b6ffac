use gls_obstacle::mesh::{build_lshape_mesh, build_square_mesh};
use gls_obstacle::{error_norms, smooth_case, ExactSolution, FeSpace};

fn quadratic(p: [f64; 2]) -> f64 {
    0.3 + p[0] - 2.0 * p[1] + 0.7 * p[0] * p[0] - 1.1 * p[0] * p[1] + 0.4 * p[1] * p[1]
}

fn quadratic_exact() -> ExactSolution {
    ExactSolution {
        u: std::sync::Arc::new(quadratic),
        grad: std::sync::Arc::new(|p| [1.0 + 1.4 * p[0] - 1.1 * p[1], -2.0 - 1.1 * p[0] + 0.8 * p[1]]),
        lap: std::sync::Arc::new(|_| 1.4 + 0.8),
    }
}

#[test]
fn quadratics_are_reproduced_exactly() {
    for mesh in [build_square_mesh(3).unwrap(), build_lshape_mesh(1).unwrap()] {
        let space = FeSpace::new(mesh);
        let u = space.interpolate(quadratic);
        let e = error_norms(&u, &quadratic_exact(), &space);
        assert!(e.l2 < 1e-13 && e.h1_semi < 1e-12 && e.broken_laplacian < 1e-11, "{e:?}");
    }
}

#[test]
fn transfer_between_unrelated_meshes_is_exact_for_quadratics() {
    let coarse = FeSpace::new(build_square_mesh(3).unwrap());
    let fine = FeSpace::new(build_square_mesh(7).unwrap());
    let u = coarse.interpolate(quadratic);
    let v = fine.transfer_from(&coarse, &u);
    let w = fine.interpolate(quadratic);
    let err = v.iter().zip(w.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err:e}");
}

#[test]
fn transfer_agrees_with_prolongation_on_refined_meshes() {
    let coarse = FeSpace::new(build_lshape_mesh(1).unwrap());
    let marked: Vec<usize> = (0..coarse.mesh().n_cells()).step_by(3).collect();
    let fine = FeSpace::new(coarse.mesh().refine(&marked));
    let case = smooth_case();
    let u = coarse.interpolate(|p| (case.exact.u)(p) + p[0].sin());
    let a = fine.prolongate(&coarse, &u);
    let b = fine.transfer_from(&coarse, &u);
    let err = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err:e}");
}

#[test]
fn interpolation_error_decays_at_third_order() {
    let case = smooth_case();
    let errs: Vec<f64> = [8, 16]
        .iter()
        .map(|&n| {
            let space = FeSpace::new(case.build_mesh(n).unwrap());
            let u = space.interpolate(|p| (case.exact.u)(p));
            error_norms(&u, &case.exact, &space).l2
        })
        .collect();
    let rate = (errs[0] / errs[1]).log2();
    assert!(rate > 2.7, "rate {rate}");
}
