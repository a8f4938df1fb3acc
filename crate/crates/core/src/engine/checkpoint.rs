//! Binary checkpoints of a run in progress.
//!
//! Layout, little endian:
//!
//! ```text
//! magic    8 bytes  "STOPGRID"
//! version  u32      1
//! hash     32 bytes sha-256 of the run configuration
//! prec     u8       0 = standard, 1 = extended
//! level    u64
//! lo       i64      lattice index of the first cell
//! len      u64
//! cells    len x (upper.hi, upper.lo, lower.hi, lower.lo) as f64
//! table    u64 length + JSON of the partial boundary table
//! ```
//!
//! Values are stored as raw bits, so a resumed run continues with exactly
//! the numbers it stopped with.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

use super::{BoundaryTable, Lane, Precision, ValueSlice};

const MAGIC: &[u8; 8] = b"STOPGRID";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config_hash: [u8; 32],
    pub precision: Precision,
    pub level: u64,
    pub lo: i64,
    pub upper: Vec<(f64, f64)>,
    pub lower: Vec<(f64, f64)>,
    pub table: BoundaryTable,
}

impl Checkpoint {
    pub fn from_slice<L: Lane>(config_hash: [u8; 32], slice: &ValueSlice<L>, table: BoundaryTable) -> Self {
        Self {
            config_hash,
            precision: L::PRECISION,
            level: slice.level,
            lo: slice.lo,
            upper: slice.upper.iter().map(|v| v.parts()).collect(),
            lower: slice.lower.iter().map(|v| v.parts()).collect(),
            table,
        }
    }

    pub fn to_slice<L: Lane>(&self) -> Result<ValueSlice<L>> {
        if self.precision != L::PRECISION {
            return Err(Error::Checkpoint(format!(
                "stored with {:?} precision, run uses {:?}",
                self.precision,
                L::PRECISION
            )));
        }
        Ok(ValueSlice {
            level: self.level,
            lo: self.lo,
            upper: self.upper.iter().map(|&(h, l)| L::from_parts(h, l)).collect(),
            lower: self.lower.iter().map(|&(h, l)| L::from_parts(h, l)).collect(),
        })
    }
}

/// Writes `ckpt` to `path` through a temporary file and a rename, so an
/// interrupted write leaves the previous checkpoint intact.
pub fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_all(&ckpt.config_hash)?;
        w.write_u8(ckpt.precision.code())?;
        w.write_u64::<LittleEndian>(ckpt.level)?;
        w.write_i64::<LittleEndian>(ckpt.lo)?;
        w.write_u64::<LittleEndian>(ckpt.upper.len() as u64)?;
        for (u, l) in ckpt.upper.iter().zip(&ckpt.lower) {
            for v in [u.0, u.1, l.0, l.1] {
                w.write_u64::<LittleEndian>(v.to_bits())?;
            }
        }
        let table = serde_json::to_vec(&ckpt.table)?;
        w.write_u64::<LittleEndian>(table.len() as u64)?;
        w.write_all(&table)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let mut config_hash = [0u8; 32];
    r.read_exact(&mut config_hash)?;
    let precision = match r.read_u8()? {
        0 => Precision::Standard,
        1 => Precision::Extended,
        p => return Err(Error::Checkpoint(format!("unknown precision code {p}"))),
    };
    let level = r.read_u64::<LittleEndian>()?;
    let lo = r.read_i64::<LittleEndian>()?;
    let len = r.read_u64::<LittleEndian>()? as usize;
    let mut upper = Vec::with_capacity(len);
    let mut lower = Vec::with_capacity(len);
    let mut next = || r.read_u64::<LittleEndian>().map(f64::from_bits);
    for _ in 0..len {
        upper.push((next()?, next()?));
        lower.push((next()?, next()?));
    }
    let table_len = r.read_u64::<LittleEndian>()? as usize;
    let mut table = vec![0u8; table_len];
    r.read_exact(&mut table)?;
    Ok(Checkpoint {
        config_hash,
        precision,
        level,
        lo,
        upper,
        lower,
        table: serde_json::from_slice(&table)?,
    })
}
