//! Binary field files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 8    | magic `WPDFIELD`                          |
//! | 8      | 4    | format version (`u32`, currently 1)       |
//! | 12     | 8    | `n_x` (`u64`)                             |
//! | 20     | 8    | `n_t` (`u64`)                             |
//! | 28     | 32   | `delta_x, delta_t, origin_x, origin_t` (`f64`) |
//! | 60     | 8·n_x·n_t | values, row-major: `u[ix][it]`, `it` fastest |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::Field2D;
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"WPDFIELD";
pub const FIELD_VERSION: u32 = 1;
const HEADER_LEN: u64 = 60;

pub fn write_field(field: &Field2D, mut out: impl Write) -> Result<()> {
    let mut w = BufWriter::new(&mut out);
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    w.write_all(&(field.n_x() as u64).to_le_bytes())?;
    w.write_all(&(field.n_t() as u64).to_le_bytes())?;
    for v in [
        field.delta_x(),
        field.delta_t(),
        field.origin_x(),
        field.origin_t(),
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for ix in 0..field.n_x() {
        for it in 0..field.n_t() {
            w.write_all(&field.get(ix, it).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(input: impl Read) -> Result<Field2D> {
    let mut r = BufReader::new(input);
    let mut offset = 0u64;

    let mut magic = [0u8; 8];
    read_exact_at(&mut r, &mut magic, &mut offset, "magic")?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Parse {
            offset: 0,
            message: "not a field file (bad magic)".into(),
        });
    }
    let mut b4 = [0u8; 4];
    read_exact_at(&mut r, &mut b4, &mut offset, "version")?;
    let version = u32::from_le_bytes(b4);
    if version != FIELD_VERSION {
        return Err(Error::Parse {
            offset: 8,
            message: format!("unsupported format version {version}"),
        });
    }
    let mut b8 = [0u8; 8];
    read_exact_at(&mut r, &mut b8, &mut offset, "n_x")?;
    let n_x = u64::from_le_bytes(b8);
    read_exact_at(&mut r, &mut b8, &mut offset, "n_t")?;
    let n_t = u64::from_le_bytes(b8);
    let mut header = [0f64; 4];
    for (h, name) in header
        .iter_mut()
        .zip(["delta_x", "delta_t", "origin_x", "origin_t"])
    {
        read_exact_at(&mut r, &mut b8, &mut offset, name)?;
        *h = f64::from_le_bytes(b8);
    }
    debug_assert_eq!(offset, HEADER_LEN);

    let count = n_x.checked_mul(n_t).filter(|&c| c > 0 && c < (1 << 40));
    let Some(count) = count else {
        return Err(Error::Parse {
            offset: 12,
            message: format!("implausible grid size {n_x}x{n_t}"),
        });
    };
    let mut values = DMatrix::zeros(n_x as usize, n_t as usize);
    for ix in 0..n_x as usize {
        for it in 0..n_t as usize {
            read_exact_at(&mut r, &mut b8, &mut offset, "values").map_err(|_| Error::Parse {
                offset,
                message: format!(
                    "data ends early: header declares {n_x}x{n_t} values ({} bytes total), file ends at byte {offset}",
                    HEADER_LEN + 8 * count
                ),
            })?;
            values[(ix, it)] = f64::from_le_bytes(b8);
        }
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Parse {
            offset,
            message: format!("trailing bytes after {n_x}x{n_t} values"),
        });
    }
    Field2D::new(values, header[0], header[1], header[2], header[3]).map_err(|e| Error::Parse {
        offset: 28,
        message: e.to_string(),
    })
}

fn read_exact_at(r: &mut impl Read, buf: &mut [u8], offset: &mut u64, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Parse {
                offset: *offset,
                message: format!("unexpected end of file while reading {what}"),
            }
        } else {
            Error::Io(e)
        }
    })?;
    *offset += buf.len() as u64;
    Ok(())
}

impl Field2D {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_field(self, File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Field2D> {
        read_field(File::open(path)?)
    }
}
