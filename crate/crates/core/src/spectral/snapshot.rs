//! NDJSON field snapshots: a header line `{"N":..,"L":..}` followed by one
//! `{"k1":..,"k2":..,"re":..,"im":..}` record per stored mode.

use std::io::{BufRead, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::lattice::{Lattice, WaveIndex};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    length: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    k1: i32,
    k2: i32,
    re: f64,
    im: f64,
}

pub fn write_snapshot<T: Real, W: Write>(f: &SpectralField<T>, mut out: W) -> Result<()> {
    let lat = f.lattice();
    let header = Header { n: lat.n(), length: lat.length().as_f64() };
    writeln!(out, "{}", serde_json::to_string(&header).map_err(|e| Error::Snapshot(e.to_string()))?)?;
    for (k, c) in lat.modes().iter().zip(f.coeffs()) {
        let r = Record { k1: k.k1, k2: k.k2, re: c.re.as_f64(), im: c.im.as_f64() };
        writeln!(out, "{}", serde_json::to_string(&r).map_err(|e| Error::Snapshot(e.to_string()))?)?;
    }
    Ok(())
}

/// Reads a snapshot onto a new lattice built from its header. Records for
/// mirrored wavevectors are accepted and folded through the reality
/// constraint; modes absent from the file are zero.
pub fn read_snapshot<T: Real, R: BufRead>(input: R) -> Result<SpectralField<T>> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Snapshot("missing header".into()))??;
    let header: Header = serde_json::from_str(&first).map_err(|e| Error::Snapshot(format!("header: {e}")))?;
    let lat: Arc<Lattice<T>> = Lattice::new(header.n, T::lit(header.length))?;
    let mut f = SpectralField::zeros(&lat);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record =
            serde_json::from_str(&line).map_err(|e| Error::Snapshot(format!("line {}: {e}", lineno + 2)))?;
        let k = WaveIndex::new(r.k1, r.k2)
            .ok_or_else(|| Error::Snapshot(format!("line {}: zero wavevector", lineno + 2)))?;
        if !f.set(k, Complex::new(T::lit(r.re), T::lit(r.im))) {
            return Err(Error::Snapshot(format!("line {}: mode {k} not resolved at N={}", lineno + 2, header.n)));
        }
    }
    Ok(f)
}
