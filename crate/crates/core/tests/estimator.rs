use gls_obstacle::assembly::field;
use gls_obstacle::estimator::{adapt_loop, AdaptOptions};
use gls_obstacle::mesh::build_square_mesh;
use gls_obstacle::{dorfler_mark, element_indicators, smooth_case, FeSpace, GammaMode, IndicatorField, ProblemData};
use proptest::prelude::*;

fn no_contact(f: f64) -> ProblemData {
    ProblemData::new(field(move |_| f), field(|_| f64::NEG_INFINITY), field(|_| 0.0), 0.01, GammaMode::Global)
}

fn from_eta(eta: &[f64]) -> IndicatorField {
    IndicatorField {
        eta: eta.to_vec(),
        volume: eta.iter().map(|e| e * e).collect(),
        jump: vec![0.0; eta.len()],
        global: eta.iter().map(|e| e * e).sum::<f64>().sqrt(),
    }
}

#[test]
fn exact_quadratic_has_zero_estimator() {
    let space = FeSpace::new(build_square_mesh(4).unwrap());
    let u = space.interpolate(|p| 1.0 - p[0] * p[0] - 0.5 * p[1] * p[1]);
    let ind = element_indicators(&u, &no_contact(3.0), &space);
    assert!(ind.global < 1e-10, "{}", ind.global);
}

#[test]
fn hat_function_jump_on_one_diagonal() {
    // two cells split along the diagonal from (-1,-1) to (1,1); the hat of
    // vertex (1,-1) has gradient (1/2, -1/2) below the diagonal and 0 above,
    // so the normal jump is 1/√2 on an edge of length 2√2: E² = (2√2)²/2 = 4.
    let space = FeSpace::new(build_square_mesh(1).unwrap());
    let u = space.interpolate(|p| (0.5 * (p[0] - p[1])).max(0.0));
    let ind = element_indicators(&u, &no_contact(0.0), &space);
    assert!(ind.volume.iter().all(|v| v.abs() < 1e-24));
    assert!((ind.global - 2.0).abs() < 1e-12, "{}", ind.global);
    assert!((ind.eta[0] - ind.eta[1]).abs() < 1e-12);
}

#[test]
fn single_level_loop_marks_nothing() {
    let case = smooth_case();
    let data = case.problem_data(0.0025, GammaMode::Local);
    let opts = AdaptOptions {
        max_levels: 1,
        ..AdaptOptions::default()
    };
    let levels = adapt_loop(case.build_mesh(2).unwrap(), &data, &opts, Some(&case.exact)).unwrap();
    assert_eq!(levels.len(), 1);
    assert!(levels[0].marked.is_empty());
    assert!(levels[0].errors.is_some());
}

#[test]
fn loop_respects_dof_budget() {
    let case = smooth_case();
    let data = case.problem_data(0.0025, GammaMode::Local);
    let opts = AdaptOptions {
        max_dofs: 600,
        ..AdaptOptions::default()
    };
    let levels = adapt_loop(case.build_mesh(2).unwrap(), &data, &opts, None).unwrap();
    assert!(levels.len() > 1);
    assert!(levels.iter().all(|l| l.space.n_dofs() <= 600));
    assert!(levels.windows(2).all(|w| w[1].space.n_dofs() > w[0].space.n_dofs()));
    assert!(levels.last().unwrap().marked.is_empty());
}

fn brute_force_min_count(eta: &[f64], target: f64) -> usize {
    let n = eta.len();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| eta[i] * eta[i]).sum();
        if s >= target {
            best = k;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dorfler_set_is_minimal(eta in proptest::collection::vec(0.0f64..1.0, 20), theta in 0.05f64..0.95) {
        let ind = from_eta(&eta);
        let marked = dorfler_mark(&ind, theta);
        let target = theta * theta * ind.global * ind.global;
        let s: f64 = marked.iter().map(|&t| eta[t] * eta[t]).sum();
        prop_assert!(s >= target * (1.0 - 1e-12));
        prop_assert_eq!(marked.len(), brute_force_min_count(&eta, target * (1.0 - 1e-12)));
        prop_assert!(marked.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn larger_theta_marks_a_superset(eta in proptest::collection::vec(0.0f64..1.0, 1..60), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let ind = from_eta(&eta);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = dorfler_mark(&ind, lo);
        let large = dorfler_mark(&ind, hi);
        prop_assert!(small.iter().all(|t| large.contains(t)));
    }
}
