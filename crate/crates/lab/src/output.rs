//! File formats written by experiment runs. Column names are part of the
//! interface consumed by the plotting scripts; `tests/golden_headers.rs`
//! pins them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nsda_core::spectral::{write_snapshot, WaveIndex};
use nsda_core::SpectralField64;
use serde::Serialize;

pub const ERROR_HEADER: [&str; 6] = ["t", "error_h", "error_v", "signal_h", "estimate_h", "relative_error"];
pub const ENSEMBLE_HEADER: [&str; 6] = ["t", "start", "member", "distance", "relative_error", "estimate_h"];
pub const LIMIT_HEADER: [&str; 4] = ["case", "h", "sup_error", "terminal_error"];

fn mode_tag(k: WaveIndex) -> String {
    format!("{}_{}", k.k1, k.k2)
}

/// `t`, then `u_re_k1_k2, u_im_k1_k2, m_re_k1_k2, m_im_k1_k2` per mode.
pub fn modes_header(tracked: &[WaveIndex]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for &k in tracked {
        let tag = mode_tag(k);
        for p in ["u_re", "u_im", "m_re", "m_im"] {
            h.push(format!("{p}_{tag}"));
        }
    }
    h
}

pub(crate) fn csv_writer(path: &Path, header: &[impl AsRef<str>]) -> anyhow::Result<csv::Writer<File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header.iter().map(|s| s.as_ref()))?;
    Ok(w)
}

pub(crate) fn num(x: f64) -> String {
    x.to_string()
}

pub(crate) fn modes_row(t: f64, tracked: &[WaveIndex], u: &SpectralField64, m: &SpectralField64) -> Vec<String> {
    let mut row = vec![num(t)];
    for &k in tracked {
        let (a, b) = (u.get(k), m.get(k));
        row.extend([num(a.re), num(a.im), num(b.re), num(b.im)]);
    }
    row
}

#[derive(Serialize)]
struct TrajectorySample<'a> {
    t: f64,
    modes: Vec<(i32, i32, f64, f64)>,
    norm_h: f64,
    norm_v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

/// Signal samples as NDJSON: `{t, modes: [[k1, k2, re, im]...], norm_h, norm_v}`.
pub(crate) struct TrajectoryWriter {
    out: BufWriter<File>,
}

impl TrajectoryWriter {
    pub fn create(path: &Path) -> anyhow::Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?) })
    }

    pub fn write(&mut self, t: f64, tracked: &[WaveIndex], u: &SpectralField64) -> anyhow::Result<()> {
        let s = TrajectorySample {
            t,
            modes: tracked
                .iter()
                .map(|&k| {
                    let c = u.get(k);
                    (k.k1, k.k2, c.re, c.im)
                })
                .collect(),
            norm_h: u.norm_h(),
            norm_v: u.norm_v(),
            note: None,
        };
        serde_json::to_writer(&mut self.out, &s)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub(crate) fn snapshot(dir: &Path, name: &str, field: &SpectralField64) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(format!("{name}.ndjson")))?);
    write_snapshot(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
