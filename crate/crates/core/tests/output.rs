use std::fs;

use gls_obstacle::output::{read_csv, render_svg, write_csv, StudyWriter, CSV_HEADER};
use gls_obstacle::study::run_study;
use gls_obstacle::vtk::render_vtk;
use gls_obstacle::{smooth_case, FeSpace, StudyConfig, StudyMode, StudyRecord, StudyRow};

fn row(level: usize, h: f64) -> StudyRow {
    StudyRow {
        level,
        ndof: 10 << (2 * level),
        h,
        err_l2: h.powi(3) / 7.0,
        err_h1: h * h / 3.0,
        estimator: 3.0 * h * h,
        newton_iters: 4 + level,
        wall_ms: 0.125 * level as f64,
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let rows: Vec<StudyRow> = (0..4).map(|l| row(l, 0.5f64.powi(l as i32) / 3.0)).collect();
    write_csv(&path, &rows).unwrap();
    assert_eq!(read_csv(&path).unwrap(), rows);
}

#[test]
fn empty_study_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_csv(&path, &[]).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim_end(), CSV_HEADER.join(","));
    assert!(read_csv(&path).unwrap().is_empty());
}

#[test]
fn foreign_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    fs::write(&path, "a,b\n1,2\n").unwrap();
    assert!(read_csv(&path).is_err());
}

#[test]
fn svg_renders_single_and_multiple_rows() {
    let single = StudyRecord {
        rows: vec![row(0, 0.25)],
        diagnostics: Vec::new(),
    };
    let svg = render_svg(&single, "one level");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("NaN") && !svg.contains("inf"));

    let many = StudyRecord {
        rows: (0..4).map(|l| row(l, 0.5f64.powi(l as i32))).collect(),
        diagnostics: Vec::new(),
    };
    let svg = render_svg(&many, "four levels");
    assert!(!svg.contains("NaN"));
    assert!(svg.contains("four levels"));
}

#[test]
fn vtk_lists_points_cells_and_fields() {
    let case = smooth_case();
    let space = FeSpace::new(case.build_mesh(2).unwrap());
    let u = space.interpolate(|p| (case.exact.u)(p));
    let cells = space.mesh().n_cells();
    let text = render_vtk(&space, &u, &vec![1.0; cells], &vec![0.0; cells]);
    assert!(text.starts_with("# vtk DataFile Version"));
    assert!(text.contains(&format!("POINTS {} double", space.mesh().n_vertices())));
    assert!(text.contains(&format!("CELLS {} {}", cells, 4 * cells)));
    assert!(text.contains("SCALARS u double"));
    assert!(text.contains("SCALARS eta double"));
    assert!(text.contains("SCALARS lambda double"));
}

fn small_config(out: &std::path::Path, mode: StudyMode) -> StudyConfig {
    let mut cfg = StudyConfig::defaults(mode);
    cfg.levels = 3;
    cfg.n0 = 2;
    cfg.max_dofs = 2000;
    cfg.serial = true;
    cfg.timing = false;
    cfg.out = out.to_path_buf();
    cfg
}

#[test]
fn repeated_serial_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for mode in [StudyMode::Uniform, StudyMode::Adaptive] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let cfg = small_config(&dir.path().join(format!("{mode}-{run}")), mode);
            let mut writer = StudyWriter::create(&cfg).unwrap();
            let record = run_study(&cfg, &mut writer).unwrap();
            writer.finish(&record, "determinism").unwrap();
            let csv = fs::read(cfg.out.join("results.csv")).unwrap();
            let svg = fs::read(cfg.out.join("convergence.svg")).unwrap();
            let config = fs::read_to_string(cfg.out.join("config.txt")).unwrap();
            assert_eq!(StudyConfig::from_text(mode, &config).unwrap(), cfg);
            outputs.push((csv, svg));
        }
        assert_eq!(outputs[0], outputs[1], "{mode} outputs differ");
    }
}
