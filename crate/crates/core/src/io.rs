//! Binary field dumps and JSON run reports.
//!
//! Dump layout (little endian): `MNLS`, u32 version, u32 dim, dim × u32
//! points, dim × f64 half extents, dim² × f64 field matrix (row major),
//! f64 p, then (re, im) f64 pairs in row-major node order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};
use crate::magnetics::MagneticData;

pub const DUMP_MAGIC: &[u8; 4] = b"MNLS";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub field: ComplexField,
    pub magnetic: MagneticData,
    pub p: f64,
}

pub fn write_dump_to(
    mut w: impl Write,
    field: &ComplexField,
    m: &MagneticData,
    p: f64,
) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.dim(),
        });
    }
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    for &n in grid.points() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in grid.half_extent() {
        w.write_all(&l.to_le_bytes())?;
    }
    for v in m.entries() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&p.to_le_bytes())?;
    for z in field.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dump(path: &Path, field: &ComplexField, m: &MagneticData, p: f64) -> Result<()> {
    write_dump_to(BufWriter::new(File::create(path)?), field, m, p)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("unexpected end of data".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_dump_from(mut r: impl Read) -> Result<FieldDump> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != DUMP_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    if !(2..=3).contains(&dim) {
        return Err(Error::Format(format!("dimension {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(read_u32(&mut r)? as usize);
    }
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        extents.push(read_f64(&mut r)?);
    }
    let grid = Grid::with_axes(&extents, &points).map_err(|e| Error::Format(e.to_string()))?;
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        entries.push(read_f64(&mut r)?);
    }
    let magnetic =
        MagneticData::from_matrix(dim, &entries).map_err(|e| Error::Format(e.to_string()))?;
    let p = read_f64(&mut r)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing data".into()));
    }
    let field =
        ComplexField::from_values(&grid, values).map_err(|e| Error::Format(e.to_string()))?;
    Ok(FieldDump { field, magnetic, p })
}

pub fn read_dump(path: &Path) -> Result<FieldDump> {
    read_dump_from(BufReader::new(File::open(path)?))
}

/// Writes `value` as pretty JSON with the crate version attached.
pub fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        version: &'static str,
        #[serde(flatten)]
        body: &'a T,
    }
    let env = Envelope {
        version: env!("CARGO_PKG_VERSION"),
        body: value,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &env)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
