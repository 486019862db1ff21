use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};
use sparse_recover::energy::Trajectory;
use sparse_recover::highdim::PointCloudND;

use crate::CliError;

pub const TRAJECTORY_HEADER: &str = "iter,particle,value,winf";
pub const CLOUD_HEADER: &str = "iter,particle,coord,value";

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Seventeen significant digits, enough to read back the same double.
fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_lines(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<(), CliError> {
    let err = |e| io_error(path)(e);
    let mut out = BufWriter::new(File::create(path).map_err(err)?);
    writeln!(out, "{header}").map_err(err)?;
    for row in rows {
        writeln!(out, "{row}").map_err(err)?;
    }
    out.flush().map_err(err)
}

/// One row per snapshot and particle; `winf` is empty when the distance to
/// the truth was not tracked.
pub fn emit_trajectory(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let rows = traj.snapshots.iter().flat_map(|snap| {
        let winf = snap.winf.map(fmt_value).unwrap_or_default();
        snap.positions
            .iter()
            .enumerate()
            .map(move |(i, &v)| format!("{},{},{},{}", snap.iter, i, fmt_value(v), winf))
    });
    write_lines(path, TRAJECTORY_HEADER, rows)
}

/// One row per snapshot, point and coordinate.
pub fn emit_clouds(snapshots: &[(usize, &PointCloudND)], path: &Path) -> Result<(), CliError> {
    let rows = snapshots.iter().flat_map(|&(iter, cloud)| {
        cloud.points().enumerate().flat_map(move |(i, point)| {
            point
                .iter()
                .enumerate()
                .map(move |(q, &v)| format!("{iter},{i},{q},{}", fmt_value(v)))
        })
    });
    write_lines(path, CLOUD_HEADER, rows)
}

/// Rows already formatted by the caller.
pub fn emit_table(header: &str, rows: &[String], path: &Path) -> Result<(), CliError> {
    write_lines(path, header, rows.iter().cloned())
}

/// A flat JSON object; keys come out sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    fields: Map<String, Value>,
}

impl Summary {
    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.to_string(), value.into());
        self
    }

    /// Non-finite numbers become `null`.
    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        let value = Number::from_f64(value).map_or(Value::Null, Value::Number);
        self.set(key, value)
    }

    pub fn set_opt_f64(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(x) => self.set_f64(key, x),
            None => self.set(key, Value::Null),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.fields).expect("a JSON map always serializes")
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(io_error(path))
    }
}
