//! Flat little-endian binary layout for trajectories.
//!
//! ```text
//! magic      8 bytes  "HWTRAJ\0\x01"
//! version    u32
//! n_points   u64
//! spacing    f64
//! id_len     u32, then the potential id (UTF-8)
//! spec_len   u32, then the potential spec as JSON (UTF-8)
//! step       f64
//! n_times    u64, then n_times × f64
//! payload    n_times × n_points × (re f64, im f64)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::propagate::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{build_radial_grid, WaveFunction, C64};
use crate::operators::PotentialSpec;

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"HWTRAJ\0\x01";
pub const CHECKPOINT_VERSION: u32 = 1;

fn put_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

/// Writes `traj` to `path` (through a temporary file renamed on success).
pub fn write_checkpoint(path: &Path, traj: &Trajectory) -> Result<()> {
    let tmp = path.with_extension("partial");
    let result = (|| -> Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&(traj.grid.n_points() as u64).to_le_bytes())?;
        w.write_all(&traj.grid.spacing().to_le_bytes())?;
        put_str(&mut w, &traj.potential.id())?;
        put_str(&mut w, &serde_json::to_string(&traj.potential)?)?;
        w.write_all(&traj.step.to_le_bytes())?;
        w.write_all(&(traj.times.len() as u64).to_le_bytes())?;
        for t in &traj.times {
            w.write_all(&t.to_le_bytes())?;
        }
        for s in &traj.states {
            for z in s.values() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => {
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn bytes<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_str(r: &mut impl Read) -> Result<String> {
    let len = u32::from_le_bytes(bytes(r)?) as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Numerical(format!("checkpoint string is not UTF-8: {e}")))
}

/// Reads a checkpoint written by [`write_checkpoint`]. Norm drift is recomputed
/// relative to the first sample and the boundary mass beyond `0.9 L`.
pub fn read_checkpoint(path: &Path) -> Result<Trajectory> {
    let mut r = BufReader::new(File::open(path)?);
    if bytes::<8>(&mut r)? != CHECKPOINT_MAGIC {
        return Err(Error::Config(format!("{} is not a trajectory checkpoint", path.display())));
    }
    let version = u32::from_le_bytes(bytes(&mut r)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!("unsupported checkpoint version {version}")));
    }
    let n = u64::from_le_bytes(bytes(&mut r)?) as usize;
    let h = f64::from_le_bytes(bytes(&mut r)?);
    let _id = get_str(&mut r)?;
    let potential: PotentialSpec = serde_json::from_str(&get_str(&mut r)?)?;
    let step = f64::from_le_bytes(bytes(&mut r)?);
    let n_times = u64::from_le_bytes(bytes(&mut r)?) as usize;
    let mut times = Vec::with_capacity(n_times);
    for _ in 0..n_times {
        times.push(f64::from_le_bytes(bytes(&mut r)?));
    }
    let grid = build_radial_grid(n, h)?;
    let mut states = Vec::with_capacity(n_times);
    for _ in 0..n_times {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            let re = f64::from_le_bytes(bytes(&mut r)?);
            let im = f64::from_le_bytes(bytes(&mut r)?);
            v.push(C64::new(re, im));
        }
        states.push(WaveFunction::new(grid.clone(), v)?);
    }
    let n0 = states.first().map(|s| s.norm()).unwrap_or(0.0);
    let total = (n0 * n0).max(f64::MIN_POSITIVE);
    let norm_drift = states.iter().map(|s| (s.norm() - n0).abs()).collect();
    let boundary_mass: Vec<f64> = states.iter().map(|s| s.mass_beyond(0.9) / total).collect();
    let flagged = boundary_mass.iter().any(|m| *m > 1e-6);
    Ok(Trajectory {
        grid,
        potential,
        times,
        states,
        step,
        norm_drift,
        boundary_mass,
        flagged,
    })
}
