//! Path-gain grid files.
//!
//! PGG1 is little-endian:
//!
//! | bytes  | field                     |
//! |--------|---------------------------|
//! | 0..4   | magic `"PGG1"`            |
//! | 4..8   | `u32` nx                  |
//! | 8..12  | `u32` ny                  |
//! | 12..16 | `u32` site id             |
//! | 16..24 | `f64` dx                  |
//! | 24..32 | `f64` dy                  |
//! | 32..   | `nx * ny` `f32` gains, row-major (`n = j * nx + i`) |
//!
//! The CSV alternative has no header: `ny` lines of `nx` comma-separated
//! values, line `j` holding row `j`. In both formats NaN and infinities load
//! as [`NO_PATH`](lora_place_core::NO_PATH).

use std::fs;
use std::io;
use std::path::Path;

use lora_place_core::{GridSpec, PathGainMap};

use crate::error::{Error, Result};

pub const PGG_MAGIC: &[u8; 4] = b"PGG1";
pub const PGG_HEADER_LEN: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum GainFileError {
    #[error("not a PGG1 file (bad magic)")]
    BadMagic,
    #[error("dimension mismatch: file is {found_nx}x{found_ny}, grid is {nx}x{ny}")]
    DimensionMismatch {
        nx: usize,
        ny: usize,
        found_nx: usize,
        found_ny: usize,
    },
    #[error("cell size mismatch: file has {found_dx}x{found_dy} m, grid has {dx}x{dy} m")]
    SpacingMismatch {
        dx: f64,
        dy: f64,
        found_dx: f64,
        found_dy: f64,
    },
    #[error("file is for site {found}, expected site {expected}")]
    SiteMismatch { expected: usize, found: usize },
    #[error("short read: expected {expected} bytes, found {found}")]
    ShortRead { expected: usize, found: usize },
    #[error("{found} trailing bytes after the gain payload")]
    TrailingBytes { found: usize },
    #[error("row {row}: non-numeric value {value:?}")]
    NonNumeric { row: usize, value: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl GainFileError {
    pub(crate) fn is_io(&self) -> bool {
        matches!(self, GainFileError::ShortRead { .. })
            || matches!(self, GainFileError::Csv(e) if e.is_io_error())
    }
}

/// Encodes a map as PGG1. Gains are narrowed to `f32`.
pub fn encode_pgg(map: &PathGainMap) -> Vec<u8> {
    let grid = map.grid();
    let mut out = Vec::with_capacity(PGG_HEADER_LEN + 4 * grid.cell_count());
    out.extend_from_slice(PGG_MAGIC);
    out.extend_from_slice(&(grid.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.ny() as u32).to_le_bytes());
    out.extend_from_slice(&(map.site_id() as u32).to_le_bytes());
    out.extend_from_slice(&grid.dx().to_le_bytes());
    out.extend_from_slice(&grid.dy().to_le_bytes());
    for &g in map.gains_db() {
        out.extend_from_slice(&(g as f32).to_le_bytes());
    }
    out
}

fn le_u32(b: &[u8]) -> usize {
    u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize
}

fn le_f64(b: &[u8]) -> f64 {
    f64::from_le_bytes(b.try_into().expect("8 bytes"))
}

/// Decodes PGG1 bytes against the expected grid and site.
pub fn decode_pgg(
    bytes: &[u8],
    grid: &GridSpec,
    site_id: usize,
) -> Result<PathGainMap, GainFileError> {
    if bytes.len() < 4 || &bytes[..4] != PGG_MAGIC {
        return Err(GainFileError::BadMagic);
    }
    if bytes.len() < PGG_HEADER_LEN {
        return Err(GainFileError::ShortRead {
            expected: PGG_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let (nx, ny) = (le_u32(&bytes[4..8]), le_u32(&bytes[8..12]));
    if (nx, ny) != (grid.nx(), grid.ny()) {
        return Err(GainFileError::DimensionMismatch {
            nx: grid.nx(),
            ny: grid.ny(),
            found_nx: nx,
            found_ny: ny,
        });
    }
    let found_site = le_u32(&bytes[12..16]);
    if found_site != site_id {
        return Err(GainFileError::SiteMismatch {
            expected: site_id,
            found: found_site,
        });
    }
    let (dx, dy) = (le_f64(&bytes[16..24]), le_f64(&bytes[24..32]));
    if dx != grid.dx() || dy != grid.dy() {
        return Err(GainFileError::SpacingMismatch {
            dx: grid.dx(),
            dy: grid.dy(),
            found_dx: dx,
            found_dy: dy,
        });
    }
    let expected = PGG_HEADER_LEN + 4 * nx * ny;
    if bytes.len() < expected {
        return Err(GainFileError::ShortRead {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(GainFileError::TrailingBytes {
            found: bytes.len() - expected,
        });
    }
    let gains = bytes[PGG_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    Ok(PathGainMap::imported(site_id, *grid, gains).expect("length checked above"))
}

/// Parses the header-less CSV grid format.
pub fn decode_csv<R: io::Read>(
    reader: R,
    grid: &GridSpec,
    site_id: usize,
) -> Result<PathGainMap, GainFileError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut gains = Vec::with_capacity(grid.cell_count());
    let mut rows = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != grid.nx() {
            return Err(GainFileError::DimensionMismatch {
                nx: grid.nx(),
                ny: grid.ny(),
                found_nx: rec.len(),
                found_ny: row + 1,
            });
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| GainFileError::NonNumeric {
                row,
                value: field.to_string(),
            })?;
            gains.push(v);
        }
        rows += 1;
    }
    if rows != grid.ny() {
        return Err(GainFileError::DimensionMismatch {
            nx: grid.nx(),
            ny: grid.ny(),
            found_nx: grid.nx(),
            found_ny: rows,
        });
    }
    Ok(PathGainMap::imported(site_id, *grid, gains).expect("length checked above"))
}

/// Loads a gain grid: `.csv` files use the CSV format, anything else must
/// be PGG1.
pub fn import_path_gain_map(path: &Path, grid: &GridSpec, site_id: usize) -> Result<PathGainMap> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let bytes = fs::read(path).map_err(Error::io(path))?;
    let decoded = if is_csv {
        decode_csv(bytes.as_slice(), grid, site_id)
    } else {
        decode_pgg(&bytes, grid, site_id)
    };
    decoded.map_err(|source| Error::GainFile {
        path: path.to_path_buf(),
        source,
    })
}

pub fn export_path_gain_map(map: &PathGainMap, path: &Path) -> Result<()> {
    fs::write(path, encode_pgg(map)).map_err(Error::io(path))
}
