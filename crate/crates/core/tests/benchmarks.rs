use gls_obstacle::benchmarks::{blend, lshape_angle, SMOOTH_R0};
use gls_obstacle::{error_norms, nonsmooth_case, smooth_case, BenchmarkCase, CoefficientVector, FeSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;

fn fd_check(case: &BenchmarkCase, p: [f64; 2]) {
    let u = &case.exact.u;
    let at = |dx: f64, dy: f64| u([p[0] + dx, p[1] + dy]);
    let gx = (at(H, 0.0) - at(-H, 0.0)) / (2.0 * H);
    let gy = (at(0.0, H) - at(0.0, -H)) / (2.0 * H);
    let lap = (at(H, 0.0) + at(-H, 0.0) + at(0.0, H) + at(0.0, -H) - 4.0 * at(0.0, 0.0)) / (H * H);
    let g = (case.exact.grad)(p);
    let l = (case.exact.lap)(p);
    let scale = 1.0 + g[0].abs() + g[1].abs();
    assert!((gx - g[0]).abs() < 1e-6 * scale && (gy - g[1]).abs() < 1e-6 * scale, "{} grad at {p:?}", case.name);
    assert!((lap - l).abs() < 1e-4 * (1.0 + l.abs()), "{} laplacian at {p:?}: fd {lap}, exact {l}", case.name);
}

#[test]
fn smooth_derivatives_match_finite_differences() {
    let case = smooth_case();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 500 {
        let p: [f64; 2] = [rng.random_range(-0.99..0.99), rng.random_range(-0.99..0.99)];
        if (p[0].hypot(p[1]) - SMOOTH_R0).abs() < 0.01 {
            continue;
        }
        fd_check(&case, p);
        checked += 1;
    }
}

#[test]
fn nonsmooth_derivatives_match_finite_differences() {
    let case = nonsmooth_case();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    while checked < 500 {
        let p: [f64; 2] = [rng.random_range(-1.99..1.99), rng.random_range(-1.99..1.99)];
        let r = p[0].hypot(p[1]);
        let near_slit = p[0] > -0.01 && p[1] < 0.01;
        let near_blend_ends = (r - 0.25).abs() < 0.01 || (r - 0.75).abs() < 0.01;
        if near_slit || r < 0.05 || near_blend_ends {
            continue;
        }
        fd_check(&case, p);
        checked += 1;
    }
}

#[test]
fn nonsmooth_solution_vanishes_on_the_slit_and_far_away() {
    let case = nonsmooth_case();
    for t in [0.1, 0.5, 1.0, 1.9] {
        assert!((case.exact.u)([t, 0.0]).abs() < 1e-15);
        assert!((case.exact.u)([0.0, -t]).abs() < 1e-12);
    }
    assert_eq!((case.exact.u)([-1.0, 1.0]), 0.0);
    assert_eq!(lshape_angle([-1.0, 0.0]), std::f64::consts::PI);
    assert_eq!(blend(0.0).0, 1.0);
    assert_eq!(blend(2.0).0, 0.0);
}

#[test]
fn smooth_case_is_consistent_with_contact() {
    let case = smooth_case();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let u = (case.exact.u)(p);
        let lam = (case.exact.lap)(p) + (case.f)(p);
        assert!(u >= (case.psi)(p));
        // λ = Δu + f ≤ 0 with complementarity
        assert!(lam <= 1e-12);
        assert!((u * lam).abs() < 1e-12);
    }
}

/// ∫_{(-1,1)²} u² and ∫ |∇u|² by a composite tensor Gauss rule.
fn tensor_norms(case: &BenchmarkCase) -> (f64, f64) {
    let nodes = [-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683, 0.906179845938664];
    let weights = [0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366, 0.236926885056189];
    let m = 200;
    let step = 2.0 / m as f64;
    let (mut l2, mut h1) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            for (a, wa) in nodes.iter().zip(&weights) {
                for (b, wb) in nodes.iter().zip(&weights) {
                    let p = [-1.0 + step * (i as f64 + 0.5 * (a + 1.0)), -1.0 + step * (j as f64 + 0.5 * (b + 1.0))];
                    let w = wa * wb * 0.25 * step * step;
                    let u = (case.exact.u)(p);
                    let g = (case.exact.grad)(p);
                    l2 += w * u * u;
                    h1 += w * (g[0] * g[0] + g[1] * g[1]);
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

#[test]
fn error_norms_of_zero_match_independent_quadrature() {
    let case = smooth_case();
    let space = FeSpace::new(case.build_mesh(16).unwrap());
    let e = error_norms(&CoefficientVector::zeros(space.n_dofs()), &case.exact, &space);
    let (l2, h1) = tensor_norms(&case);
    assert!((e.l2 - l2).abs() < 1e-5 * l2, "{} vs {l2}", e.l2);
    assert!((e.h1_semi - h1).abs() < 1e-5 * h1, "{} vs {h1}", e.h1_semi);
}

#[test]
fn lookup_by_name() {
    assert_eq!(BenchmarkCase::by_name("smooth").unwrap().name, "smooth");
    assert_eq!(BenchmarkCase::by_name("nonsmooth").unwrap().name, "nonsmooth");
    assert!(BenchmarkCase::by_name("circle").is_none());
}
