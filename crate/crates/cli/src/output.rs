//! CSV and legacy-VTK writers.
//!
//! Floating-point values are written as `{:.16e}` (17 significant digits), so
//! every value parses back to the identical `f64`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fracplast_core::fem::Loads;
use fracplast_core::solver::{RunRecord, Snapshot};
use fracplast_core::sweep::FlowSample;
use fracplast_core::Mesh;

pub const NEWTON_HEADER: [&str; 3] = ["step", "iter", "residual"];
pub const SWEEP_HEADER: [&str; 8] =
    ["theta", "sigma11", "sigma22", "classical11", "classical22", "fractional11", "fractional22", "angle"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> io::Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn into_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::new(io::ErrorKind::Other, format!("{other:?}")),
    }
}

/// Magnitude of the largest peak traction (or of the body force if there is no traction).
pub fn peak_load_magnitude(loads: &Loads) -> f64 {
    let norm = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if loads.tractions.is_empty() {
        norm(&loads.body)
    } else {
        loads.tractions.iter().map(|(_, v)| norm(v)).fold(0.0, f64::max)
    }
}

pub fn timeseries_header(record: &RunRecord) -> Vec<String> {
    let mut h = vec!["t".to_string(), "load".to_string()];
    h.extend(record.probes.iter().map(|p| p.probe.name.clone()));
    h.push("max_eq_stress".into());
    h
}

/// One row per time instant `t_0 .. t_N`: time, applied load, probe values and `max |dev σ|`.
pub fn write_timeseries(path: &Path, record: &RunRecord, peak_load: f64) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(timeseries_header(record)).map_err(into_io)?;
    for s in &record.steps {
        let mut row = vec![fmt_f64(s.t), fmt_f64(s.load_factor * peak_load)];
        row.extend(s.measurements.iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(s.max_eq_stress));
        w.write_record(&row).map_err(into_io)?;
    }
    w.flush()
}

/// Residual norm of every Newton iterate; `iter` 0 is the warm start.
pub fn write_newton(path: &Path, record: &RunRecord) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(NEWTON_HEADER).map_err(into_io)?;
    for s in record.steps.iter().skip(1) {
        for (k, r) in s.residuals.iter().enumerate() {
            w.write_record([s.step.to_string(), k.to_string(), fmt_f64(*r)]).map_err(into_io)?;
        }
    }
    w.flush()
}

/// Requested probe points and the vertices they snapped to.
pub fn write_probes(path: &Path, record: &RunRecord, mesh: &Mesh) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["name", "component", "x", "y", "z", "vertex", "vertex_x", "vertex_y", "vertex_z", "snap_distance"])
        .map_err(into_io)?;
    for p in &record.probes {
        let v = mesh.vertex(p.vertex);
        let mut row = vec![p.probe.name.clone(), p.probe.component.to_string()];
        row.extend(p.probe.point.iter().map(|&x| fmt_f64(x)));
        row.push(p.vertex.to_string());
        row.extend(v.iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(p.snap_distance));
        w.write_record(&row).map_err(into_io)?;
    }
    w.flush()
}

pub fn write_sweep(path: &Path, samples: &[FlowSample]) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_HEADER).map_err(into_io)?;
    for s in samples {
        let row = [
            s.theta,
            s.sigma[0],
            s.sigma[1],
            s.classical[0],
            s.classical[1],
            s.fractional[0],
            s.fractional[1],
            s.angle,
        ];
        w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(into_io)?;
    }
    w.flush()
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("snapshot_{step:04}.vtk")
}

/// Legacy ASCII unstructured grid with the displacement as point data and
/// `eq_stress` and `eps_p_norm` as cell data.
pub fn write_vtk<W: Write>(out: &mut W, mesh: &Mesh, snap: &Snapshot, title: &str) -> io::Result<()> {
    let dim = mesh.dim();
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nv} double")?;
    for x in mesh.vertices() {
        writeln!(out, "{} {} {}", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(x[2]))?;
    }
    writeln!(out, "CELLS {nc} {}", nc * (dim + 2))?;
    for c in 0..nc {
        write!(out, "{}", dim + 1)?;
        for v in mesh.cell(c) {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {nc}")?;
    let cell_type = if dim == 2 { 5 } else { 10 };
    for _ in 0..nc {
        writeln!(out, "{cell_type}")?;
    }
    writeln!(out, "POINT_DATA {nv}")?;
    writeln!(out, "VECTORS displacement double")?;
    for v in 0..nv {
        let mut u = [0.0; 3];
        u[..dim].copy_from_slice(&snap.u[v * dim..(v + 1) * dim]);
        writeln!(out, "{} {} {}", fmt_f64(u[0]), fmt_f64(u[1]), fmt_f64(u[2]))?;
    }
    writeln!(out, "CELL_DATA {nc}")?;
    for (name, data) in [("eq_stress", &snap.eq_stress), ("eps_p_norm", &snap.eps_p_norm)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for &x in data.iter() {
            writeln!(out, "{}", fmt_f64(x))?;
        }
    }
    Ok(())
}

pub fn write_vtk_file(path: &Path, mesh: &Mesh, snap: &Snapshot, title: &str) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vtk(&mut w, mesh, snap, title)?;
    w.flush()
}

