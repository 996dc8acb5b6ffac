use gls_obstacle::mesh::{build_lshape_mesh, build_square_mesh};
use gls_obstacle::Mesh;
use proptest::prelude::*;

fn refine_randomly(mut mesh: Mesh, picks: &[Vec<u16>]) -> Vec<Mesh> {
    let mut history = vec![mesh.clone()];
    for pick in picks {
        let mut marked: Vec<usize> = pick.iter().map(|&i| i as usize % mesh.n_cells()).collect();
        marked.sort_unstable();
        marked.dedup();
        mesh = mesh.refine(&marked);
        history.push(mesh.clone());
    }
    history
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_keeps_conformity_area_and_angles(
        lshape in any::<bool>(),
        picks in proptest::collection::vec(proptest::collection::vec(any::<u16>(), 1..12), 1..6),
    ) {
        let (start, area) = if lshape {
            (build_lshape_mesh(1).unwrap(), 12.0)
        } else {
            (build_square_mesh(2).unwrap(), 4.0)
        };
        let min_angle = start.min_angle();
        let history = refine_randomly(start, &picks);
        for pair in history.windows(2) {
            let (coarse, fine) = (&pair[0], &pair[1]);
            prop_assert!(fine.validate().is_ok());
            prop_assert!((fine.total_area() - area).abs() < 1e-12 * area);
            prop_assert!(fine.min_angle() >= min_angle - 1e-12);
            prop_assert!(fine.n_cells() > coarse.n_cells());
            prop_assert_eq!(fine.euler_characteristic(), 1);
            prop_assert_eq!(fine.parent().len(), fine.n_cells());
            prop_assert!(fine.parent().iter().all(|p| p.map_or(true, |p| p < coarse.n_cells())));
        }
    }

    #[test]
    fn refinement_is_deterministic(picks in proptest::collection::vec(proptest::collection::vec(any::<u16>(), 1..8), 1..4)) {
        let a = refine_randomly(build_square_mesh(2).unwrap(), &picks);
        let b = refine_randomly(build_square_mesh(2).unwrap(), &picks);
        let (a, b) = (a.last().unwrap(), b.last().unwrap());
        prop_assert_eq!(a.vertices(), b.vertices());
        prop_assert_eq!(a.cells(), b.cells());
    }
}

#[test]
fn uniform_refinement_halves_diameters() {
    let mesh = build_square_mesh(4).unwrap();
    let all = |m: &Mesh| (0..m.n_cells()).collect::<Vec<_>>();
    let once = mesh.refine(&all(&mesh));
    assert_eq!(once.n_cells(), 2 * mesh.n_cells());
    let twice = once.refine(&all(&once));
    assert_eq!(twice.n_cells(), 4 * mesh.n_cells());
    assert!((twice.max_diameter() - 0.5 * mesh.max_diameter()).abs() < 1e-12);
}
