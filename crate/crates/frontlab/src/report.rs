//! Artifact emission: CSV tables for field snapshots, interface tracks and
//! wave profiles, plus an aggregated JSON report. All floating-point output
//! uses 17 significant digits so files round-trip to the exact binary
//! values.

use crate::error::Result;
use crate::evolve::{InterfaceSample, Records};
use crate::waves::TravelingWave;
use serde::Serialize;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes all snapshots in `records` as one long-format CSV `t,x,u`
/// (x absolute).
pub fn write_snapshots_csv(path: &Path, records: &Records) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,x,u")?;
    for snap in &records.snapshots {
        for i in 0..snap.grid.n {
            writeln!(
                w,
                "{},{},{}",
                fmt(snap.t),
                fmt(snap.grid.x_abs(i)),
                fmt(snap.values[i])
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes interface samples as CSV `t,level,x_minus,x_plus` (x absolute).
pub fn write_interfaces_csv(path: &Path, samples: &[InterfaceSample]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,level,x_minus,x_plus")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{}",
            fmt(s.t),
            fmt(s.level),
            fmt(s.x_minus),
            fmt(s.x_plus)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a wave profile as CSV `x,phi`.
pub fn write_wave_csv(path: &Path, wave: &TravelingWave) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,phi")?;
    for i in 0..wave.grid.n {
        writeln!(w, "{},{}", fmt(wave.grid.x(i)), fmt(wave.profile[i]))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a named timeseries as CSV `t,value`.
pub fn write_series_csv(path: &Path, header: &str, series: &[(f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,{header}")?;
    for (t, v) in series {
        writeln!(w, "{},{}", fmt(*t), fmt(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Serializes any report structure as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Creates (if needed) and returns the output directory for a run.
pub fn ensure_out_dir(base: &Path, run_name: &str) -> Result<PathBuf> {
    let dir = base.join(run_name);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}
