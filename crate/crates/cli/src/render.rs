//! Binary PGM/PPM renders of grid rasters.
//!
//! Images are north-up: image row 0 is grid row `j = ny - 1`. Each file
//! carries one comment line after the magic number.

use lora_place_core::{AssociationMap, GridSpec, RedundancyMap, SNR_NONE};

/// Association colours, indexed by `site_id % 16`.
pub const PALETTE: [[u8; 3]; 16] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [188, 189, 34],
    [23, 190, 207],
    [255, 221, 0],
    [0, 0, 128],
    [128, 0, 0],
    [0, 255, 127],
    [255, 255, 255],
    [0, 0, 0],
    [174, 199, 232],
];

pub const UNCOVERED: [u8; 3] = [64, 64, 64];

/// SNR range mapped linearly onto grey levels 0..=255.
pub const SNR_RENDER_MIN_DB: f64 = -40.0;
pub const SNR_RENDER_MAX_DB: f64 = 40.0;

pub fn site_color(site_id: usize) -> [u8; 3] {
    PALETTE[site_id % PALETTE.len()]
}

fn header(magic: &str, comment: &str, grid: &GridSpec) -> Vec<u8> {
    debug_assert!(!comment.contains('\n'));
    format!(
        "{magic}\n# {comment}; row 0 is j = ny-1 (north up)\n{} {}\n255\n",
        grid.nx(),
        grid.ny()
    )
    .into_bytes()
}

/// Emits per-cell samples in image order.
fn north_up<T: Copy>(grid: &GridSpec, values: &[T], mut emit: impl FnMut(T)) {
    let nx = grid.nx();
    for j in (0..grid.ny()).rev() {
        for &v in &values[j * nx..(j + 1) * nx] {
            emit(v);
        }
    }
}

/// Greyscale image from one byte per cell (row-major grid order).
pub fn pgm(grid: &GridSpec, comment: &str, levels: &[u8]) -> Vec<u8> {
    assert_eq!(levels.len(), grid.cell_count());
    let mut out = header("P5", comment, grid);
    north_up(grid, levels, |v| out.push(v));
    out
}

/// Colour image from one RGB triple per cell (row-major grid order).
pub fn ppm(grid: &GridSpec, comment: &str, pixels: &[[u8; 3]]) -> Vec<u8> {
    assert_eq!(pixels.len(), grid.cell_count());
    let mut out = header("P6", comment, grid);
    north_up(grid, pixels, |v| out.extend_from_slice(&v));
    out
}

/// Pixel value is the covering-gateway count, saturated at 255.
pub fn redundancy_pgm(map: &RedundancyMap, comment: &str) -> Vec<u8> {
    let levels: Vec<u8> = map.counts().iter().map(|&c| c.min(255) as u8).collect();
    pgm(map.grid(), comment, &levels)
}

pub fn association_ppm(map: &AssociationMap, comment: &str) -> Vec<u8> {
    let pixels: Vec<[u8; 3]> = map
        .best()
        .iter()
        .map(|b| b.map_or(UNCOVERED, site_color))
        .collect();
    ppm(map.grid(), comment, &pixels)
}

pub fn snr_level(snr_db: f64) -> u8 {
    if snr_db == SNR_NONE || snr_db.is_nan() {
        return 0;
    }
    let t = (snr_db - SNR_RENDER_MIN_DB) / (SNR_RENDER_MAX_DB - SNR_RENDER_MIN_DB);
    (t.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn snr_pgm(grid: &GridSpec, snr_db: &[f64], comment: &str) -> Vec<u8> {
    let levels: Vec<u8> = snr_db.iter().map(|&s| snr_level(s)).collect();
    pgm(grid, comment, &levels)
}

/// Parsed header of a binary PNM file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnmInfo {
    pub magic: String,
    pub comment: String,
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Offset of the first sample byte.
    pub data_offset: usize,
}

/// Reads back the header layout written by [`pgm`] and [`ppm`].
pub fn parse_pnm_header(bytes: &[u8]) -> Option<PnmInfo> {
    let mut lines = Vec::with_capacity(4);
    let mut pos = 0;
    while lines.len() < 4 {
        let end = pos + bytes[pos..].iter().position(|&b| b == b'\n')?;
        lines.push(std::str::from_utf8(&bytes[pos..end]).ok()?);
        pos = end + 1;
    }
    let comment = lines[1].strip_prefix("# ")?;
    let (w, h) = lines[2].split_once(' ')?;
    Some(PnmInfo {
        magic: lines[0].to_string(),
        comment: comment.to_string(),
        width: w.parse().ok()?,
        height: h.parse().ok()?,
        maxval: lines[3].parse().ok()?,
        data_offset: pos,
    })
}
