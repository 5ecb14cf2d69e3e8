use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::grid::GridSpec;

/// Version written in the first column of every trajectory row.
pub const SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "schema_version",
    "step",
    "t",
    "fidelity",
    "mse",
    "log10_norm_ratio",
    "c_prime",
    "C_psi",
    "C_f",
    "fit_residual",
];

/// One trajectory row. `c_prime` is the linear factor applied during this step (1 at step 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub t: f64,
    pub fidelity: f64,
    pub mse: f64,
    pub log10_norm_ratio: f64,
    pub c_prime: f64,
    pub c_psi: f64,
    pub c_f: f64,
    pub fit_residual: f64,
}

pub struct TrajectoryWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl TrajectoryWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        inner.write_record(TRAJECTORY_HEADER)?;
        Ok(TrajectoryWriter { inner })
    }

    pub fn write(&mut self, r: &TrajectoryRecord) -> Result<()> {
        self.inner.write_record([
            SCHEMA_VERSION.to_string(),
            r.step.to_string(),
            r.t.to_string(),
            r.fidelity.to_string(),
            r.mse.to_string(),
            r.log10_norm_ratio.to_string(),
            r.c_prime.to_string(),
            r.c_psi.to_string(),
            r.c_f.to_string(),
            r.fit_residual.to_string(),
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Reads rows written by [`TrajectoryWriter`].
pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| -> f64 { rec.get(i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN) };
        out.push(TrajectoryRecord {
            step: rec.get(1).and_then(|s| s.parse().ok()).unwrap_or(0),
            t: f(2),
            fidelity: f(3),
            mse: f(4),
            log10_norm_ratio: f(5),
            c_prime: f(6),
            c_psi: f(7),
            c_f: f(8),
            fit_residual: f(9),
        });
    }
    Ok(out)
}

pub struct SnapshotWriter {
    inner: csv::Writer<BufWriter<File>>,
    grid: GridSpec,
}

impl SnapshotWriter {
    pub fn create(path: &Path, grid: &GridSpec) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        let header: &[&str] = if grid.dimension() == 1 {
            &["t", "axis_index_1", "x", "f_exact", "psi_qite"]
        } else {
            &[
                "t",
                "axis_index_1",
                "axis_index_2",
                "x",
                "y",
                "f_exact",
                "psi_qite",
            ]
        };
        inner.write_record(header)?;
        Ok(SnapshotWriter {
            inner,
            grid: grid.clone(),
        })
    }

    /// Writes one row per grid point; `exact` and `approx` are physical sample values.
    pub fn write(&mut self, t: f64, exact: &[f64], approx: &[f64]) -> Result<()> {
        for (flat, (e, a)) in exact.iter().zip(approx).enumerate() {
            let idx = self.grid.axis_indices(flat);
            let mut row = vec![t.to_string()];
            row.extend(idx.iter().map(|k| k.to_string()));
            row.extend(
                idx.iter()
                    .zip(&self.grid.axes)
                    .map(|(&k, axis)| axis.coordinate(k).to_string()),
            );
            row.push(e.to_string());
            row.push(a.to_string());
            self.inner.write_record(&row)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub step: Option<usize>,
    pub error: String,
    pub exit_code: i32,
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}
