//! Study outputs: CSV tables, log-log SVG plots and config echoes.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::study::{fit_slope, LevelSink, LevelSnapshot, StudyConfig, StudyRecord, StudyRow};
use crate::vtk::write_vtk;

pub const CSV_HEADER: [&str; 8] = ["level", "ndof", "h", "err_l2", "err_h1", "estimator", "newton_iters", "wall_ms"];

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn row_fields(r: &StudyRow) -> [String; 8] {
    [
        r.level.to_string(),
        r.ndof.to_string(),
        format!("{:e}", r.h),
        format!("{:e}", r.err_l2),
        format!("{:e}", r.err_h1),
        format!("{:e}", r.estimator),
        r.newton_iters.to_string(),
        format!("{:e}", r.wall_ms),
    ]
}

/// CSV writer that flushes after every row, so partial studies stay on disk.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvSink {
    pub fn create(path: impl Into<PathBuf>) -> Result<CsvSink> {
        let path = path.into();
        let mut writer = csv::Writer::from_path(&path).map_err(csv_error(&path))?;
        writer.write_record(CSV_HEADER).map_err(csv_error(&path))?;
        writer.flush().map_err(|e| Error::io(&path, e))?;
        Ok(CsvSink { path, writer })
    }

    pub fn push(&mut self, row: &StudyRow) -> Result<()> {
        self.writer.write_record(row_fields(row)).map_err(csv_error(&self.path))?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_csv(path: &Path, rows: &[StudyRow]) -> Result<()> {
    let mut sink = CsvSink::create(path)?;
    for r in rows {
        sink.push(r)?;
    }
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<StudyRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let header = reader.headers().map_err(csv_error(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.display())));
    }
    let bad = |what: &str| Error::Config(format!("{}: cannot parse {what}", path.display()));
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error(path))?;
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(CSV_HEADER[i]));
        let float = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(StudyRow {
            level: int(0)?,
            ndof: int(1)?,
            h: float(2)?,
            err_l2: float(3)?,
            err_h1: float(4)?,
            estimator: float(5)?,
            newton_iters: int(6)?,
            wall_ms: float(7)?,
        });
    }
    Ok(rows)
}

pub fn write_config(path: &Path, cfg: &StudyConfig) -> Result<()> {
    fs::write(path, cfg.to_text()).map_err(|e| Error::io(path, e))
}

const SERIES: [(&str, &str); 3] = [("err_l2", "#1f77b4"), ("err_h1", "#d62728"), ("estimator", "#2ca02c")];

/// Log-log plot of the L2 error, H1 error and estimator against h, with
/// reference-slope triangles for the fitted rates rounded to halves.
pub fn render_svg(record: &StudyRecord, title: &str) -> String {
    let (w, hgt) = (640.0, 480.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let series: Vec<Vec<(f64, f64)>> = [
        |r: &StudyRow| r.err_l2,
        |r: &StudyRow| r.err_h1,
        |r: &StudyRow| r.estimator,
    ]
    .iter()
    .map(|g| {
        record
            .rows
            .iter()
            .filter(|r| r.h > 0.0 && g(r) > 0.0)
            .map(|r| (r.h.log10(), g(r).log10()))
            .collect()
    })
    .collect();
    let pts: Vec<(f64, f64)> = series.iter().flatten().copied().collect();
    let range = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (-1.0, 0.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = range(pts.iter().map(|p| p.0).collect());
    let (y0, y1) = range(pts.iter().map(|p| p.1).collect());
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| hgt - bottom - (y - y0) / (y1 - y0) * (hgt - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{hgt}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        hgt - top - bottom
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"##,
            hgt - bottom,
            hgt - bottom + 18.0
        );
    }
    for d in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            w - right,
            left - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">h</text>"#, (left + w - right) / 2.0, hgt - 12.0);

    for (k, ((name, colour), pts)) in SERIES.iter().zip(&series).enumerate() {
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, path.join(" "));
        }
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(x), sy(y));
        }
        let ly = top + 20.0 + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            w - right + 10.0,
            w - right + 30.0,
            w - right + 36.0,
            ly + 4.0
        );
    }

    // slope triangles below the last two points of the L2 and H1 series
    for pts in series.iter().take(2) {
        let tail = &pts[pts.len().saturating_sub(3)..];
        if tail.len() < 2 {
            continue;
        }
        let xs: Vec<f64> = tail.iter().map(|p| 10f64.powf(p.0)).collect();
        let ys: Vec<f64> = tail.iter().map(|p| 10f64.powf(p.1)).collect();
        let slope = (2.0 * fit_slope(&xs, &ys)).round() / 2.0;
        if slope <= 0.0 {
            continue;
        }
        let (xa, ya) = tail[tail.len() - 1];
        let xb = xa + 0.5 * (tail[tail.len() - 2].0 - xa);
        let ya = ya - 0.15 * (y1 - y0);
        let yb = ya + slope * (xb - xa);
        let _ = writeln!(
            s,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="gray"/><text x="{:.2}" y="{:.2}" fill="gray">{slope}</text>"#,
            sx(xa),
            sy(ya),
            sx(xb),
            sy(ya),
            sx(xb),
            sy(yb),
            sx(xb) + 4.0,
            sy(0.5 * (ya + yb)) + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, record: &StudyRecord, title: &str) -> Result<()> {
    fs::write(path, render_svg(record, title)).map_err(|e| Error::io(path, e))
}

/// Writes `results.csv` (row by row), `config.txt` and, at the end,
/// `convergence.svg` into the configured output directory; VTK files per
/// level when enabled.
pub struct StudyWriter {
    dir: PathBuf,
    csv: CsvSink,
    vtk: bool,
}

impl StudyWriter {
    pub fn create(cfg: &StudyConfig) -> Result<StudyWriter> {
        let dir = cfg.out.clone();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_config(&dir.join("config.txt"), cfg)?;
        let csv = CsvSink::create(dir.join("results.csv"))?;
        Ok(StudyWriter { dir, csv, vtk: cfg.vtk })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn finish(&self, record: &StudyRecord, title: &str) -> Result<()> {
        write_svg(&self.dir.join("convergence.svg"), record, title)
    }
}

impl LevelSink for StudyWriter {
    fn level(&mut self, row: &StudyRow, snapshot: &LevelSnapshot<'_>) -> Result<()> {
        self.csv.push(row)?;
        if self.vtk {
            let path = self.dir.join(format!("level_{:02}.vtk", snapshot.level));
            write_vtk(&path, snapshot.space, snapshot.solution, &snapshot.indicators.eta, &snapshot.multiplier)?;
        }
        Ok(())
    }
}

/// Writes the CSV, plot and config echo of a finished record.
pub fn emit_outputs(record: &StudyRecord, cfg: &StudyConfig) -> Result<()> {
    let dir = &cfg.out;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_config(&dir.join("config.txt"), cfg)?;
    write_csv(&dir.join("results.csv"), &record.rows)?;
    write_svg(&dir.join("convergence.svg"), record, &format!("{} / {}", cfg.case, cfg.mode))
}
