//! Snapshot serialization.
//!
//! Binary layout (all little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `AKPZTRJ1` |
//! | 4     | cutoff `N` (u32) |
//! | 8     | `dt` (f64) |
//! | 4     | record stride (u32) |
//! | 4     | number of modes `M` (u32) |
//! | 8     | number of snapshots `S` (u64) |
//!
//! followed by `S` records of `time (f64)`, `zero mode (f64)` and `M` pairs
//! `(re, im)` of f64 in lattice order.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lattice::ModeLattice;
use crate::sim::Trajectory;

pub const MAGIC: &[u8; 8] = b"AKPZTRJ1";

/// Largest cutoff for which the CSV dump is offered.
pub const CSV_MAX_CUTOFF: u32 = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub cutoff_n: u32,
    pub dt: f64,
    pub record_stride: u32,
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

pub fn write_snapshots<W: Write>(tr: &Trajectory, mut w: W) -> Result<()> {
    let n_modes = tr.snapshots.first().map_or(0, |f| f.coeffs.len());
    w.write_all(MAGIC)?;
    w.write_all(&tr.config.cutoff_n.to_le_bytes())?;
    w.write_all(&tr.config.dt.to_le_bytes())?;
    w.write_all(&tr.config.record_stride.to_le_bytes())?;
    w.write_all(&(n_modes as u32).to_le_bytes())?;
    w.write_all(&(tr.snapshots.len() as u64).to_le_bytes())?;
    for (t, f) in tr.times.iter().zip(&tr.snapshots) {
        w.write_all(&t.to_le_bytes())?;
        w.write_all(&f.zero_mode.to_le_bytes())?;
        for c in &f.coeffs {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b).map_err(|e| Error::Format(e.to_string()))?;
    Ok(b)
}

pub fn read_snapshots<R: Read>(mut r: R) -> Result<SnapshotFile> {
    if &take::<8, _>(&mut r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let cutoff_n = u32::from_le_bytes(take(&mut r)?);
    let dt = f64::from_le_bytes(take(&mut r)?);
    let record_stride = u32::from_le_bytes(take(&mut r)?);
    let n_modes = u32::from_le_bytes(take(&mut r)?) as usize;
    let n_snap = u64::from_le_bytes(take(&mut r)?) as usize;
    let lattice = Arc::new(ModeLattice::new(cutoff_n)?);
    if n_snap > 0 && n_modes != lattice.len() {
        return Err(Error::Format(format!("{n_modes} modes stored, cutoff {cutoff_n} has {}", lattice.len())));
    }
    let mut times = Vec::with_capacity(n_snap);
    let mut fields = Vec::with_capacity(n_snap);
    for _ in 0..n_snap {
        times.push(f64::from_le_bytes(take(&mut r)?));
        let zero = f64::from_le_bytes(take(&mut r)?);
        let mut coeffs = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            let re = f64::from_le_bytes(take(&mut r)?);
            let im = f64::from_le_bytes(take(&mut r)?);
            coeffs.push(Complex64::new(re, im));
        }
        fields.push(SpectralField::from_coeffs(lattice.clone(), coeffs, zero)?);
    }
    Ok(SnapshotFile { cutoff_n, dt, record_stride, times, fields })
}

/// Rows `t,k1,k2,re,im`; the zero mode appears as `k = (0,0)`.
pub fn write_snapshots_csv<W: Write>(tr: &Trajectory, mut w: W) -> Result<()> {
    if tr.config.cutoff_n > CSV_MAX_CUTOFF {
        return Err(Error::InvalidConfig(format!(
            "csv snapshots are limited to N <= {CSV_MAX_CUTOFF}; use the binary layout"
        )));
    }
    writeln!(w, "t,k1,k2,re,im")?;
    for (t, f) in tr.times.iter().zip(&tr.snapshots) {
        writeln!(w, "{t:e},0,0,{:e},0e0", f.zero_mode)?;
        for (k, c) in f.lattice().modes().iter().zip(&f.coeffs) {
            writeln!(w, "{t:e},{},{},{:e},{:e}", k.0, k.1, c.re, c.im)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, SimConfig};

    #[test]
    fn binary_round_trip() {
        let mut cfg = SimConfig::new(3, 1.0, 0.01, 0.1);
        cfg.keep_snapshots = true;
        cfg.record_stride = 3;
        cfg.seed = 5;
        let tr = simulate(&cfg, &[]).unwrap();
        let mut buf = Vec::new();
        write_snapshots(&tr, &mut buf).unwrap();
        assert_eq!(buf.len(), 36 + tr.snapshots.len() * (16 + 16 * 28));
        let back = read_snapshots(&buf[..]).unwrap();
        assert_eq!(back.times, tr.times);
        assert_eq!(back.fields, tr.snapshots);
        assert_eq!(back.dt, 0.01);
        assert_eq!(back.record_stride, 3);
        assert!(read_snapshots(&buf[..20]).is_err());
    }

    #[test]
    fn csv_rows() {
        let mut cfg = SimConfig::new(1, 1.0, 0.1, 0.1);
        cfg.keep_snapshots = true;
        cfg.allow_large_dt = true;
        let tr = simulate(&cfg, &[]).unwrap();
        let mut buf = Vec::new();
        write_snapshots_csv(&tr, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1 + 2 * 5);
        assert!(s.starts_with("t,k1,k2,re,im\n0e0,0,0,"));
    }
}
