//! Netpbm masks and snapshots: P1/P4 bitmaps and P2/P5 graymaps.
//!
//! Image rows run top to bottom, so image row `r` maps to grid row
//! `ny - 1 - r`. A 1D grid of `n` cells is an `n x 1` image.

use std::path::Path;

use super::{DomainPartition, Grid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmKind {
    Bitmap,
    Graymap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnmImage {
    pub kind: PnmKind,
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major, top row first.
    pub pixels: Vec<u16>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let c = self.data[self.pos];
            if c == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() && self.data[self.pos] != b'#' {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Mask("unexpected end of netpbm data".into()));
        }
        Ok(&self.data[start..self.pos])
    }

    fn number(&mut self) -> Result<usize> {
        let t = self.token()?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Mask(format!("bad number `{}`", String::from_utf8_lossy(t))))
    }
}

pub fn parse(data: &[u8]) -> Result<PnmImage> {
    let mut c = Cursor { data, pos: 0 };
    let magic = c.token()?;
    let width = c.number()?;
    let height = c.number()?;
    if width == 0 || height == 0 {
        return Err(Error::Mask("zero image dimension".into()));
    }
    let n = width * height;
    match magic {
        b"P1" => {
            let mut pixels = Vec::with_capacity(n);
            while pixels.len() < n {
                c.skip_space_and_comments();
                match c.data.get(c.pos) {
                    Some(b'0') => pixels.push(0),
                    Some(b'1') => pixels.push(1),
                    Some(&other) => return Err(Error::Mask(format!("bad P1 pixel `{}`", other as char))),
                    None => return Err(Error::Mask("truncated P1 data".into())),
                }
                c.pos += 1;
            }
            Ok(PnmImage { kind: PnmKind::Bitmap, width, height, maxval: 1, pixels })
        }
        b"P4" => {
            c.pos += 1; // single whitespace byte before raster
            let row_bytes = width.div_ceil(8);
            let raster = c
                .data
                .get(c.pos..c.pos + row_bytes * height)
                .ok_or_else(|| Error::Mask("truncated P4 data".into()))?;
            let mut pixels = Vec::with_capacity(n);
            for r in 0..height {
                for x in 0..width {
                    let byte = raster[r * row_bytes + x / 8];
                    pixels.push(((byte >> (7 - x % 8)) & 1) as u16);
                }
            }
            Ok(PnmImage { kind: PnmKind::Bitmap, width, height, maxval: 1, pixels })
        }
        b"P2" | b"P5" => {
            let maxval = c.number()?;
            if maxval == 0 || maxval > 65535 {
                return Err(Error::Mask(format!("bad maxval {maxval}")));
            }
            let mut pixels = Vec::with_capacity(n);
            if magic == b"P2" {
                for _ in 0..n {
                    let p = c.number()?;
                    if p > maxval {
                        return Err(Error::Mask(format!("gray level {p} exceeds maxval {maxval}")));
                    }
                    pixels.push(p as u16);
                }
            } else {
                c.pos += 1;
                let wide = maxval > 255;
                let bytes = if wide { 2 * n } else { n };
                let raster = c
                    .data
                    .get(c.pos..c.pos + bytes)
                    .ok_or_else(|| Error::Mask("truncated P5 data".into()))?;
                if wide {
                    pixels.extend(raster.chunks(2).map(|b| u16::from_be_bytes([b[0], b[1]])));
                } else {
                    pixels.extend(raster.iter().map(|&b| b as u16));
                }
            }
            Ok(PnmImage { kind: PnmKind::Graymap, width, height, maxval: maxval as u16, pixels })
        }
        other => Err(Error::Mask(format!(
            "unsupported netpbm magic `{}`",
            String::from_utf8_lossy(other)
        ))),
    }
}

fn grid_shape(grid: &Grid) -> (usize, usize) {
    (grid.nx(), grid.ny())
}

/// Reads a mask file into a partition.
///
/// Bitmaps give two regions (1-bits are region 2). Graymaps carry the region
/// index as gray level; `regions` defaults to the declared maxval.
pub fn load_mask(grid: &Grid, path: &Path, regions: Option<usize>) -> Result<DomainPartition> {
    let data = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    mask_from_bytes(grid, &data, regions)
}

pub fn mask_from_bytes(grid: &Grid, data: &[u8], regions: Option<usize>) -> Result<DomainPartition> {
    let img = parse(data)?;
    let (nx, ny) = grid_shape(grid);
    if img.width != nx || img.height != ny {
        return Err(Error::Mask(format!(
            "mask is {}x{}, grid is {nx}x{ny}",
            img.width, img.height
        )));
    }
    let (count, offset) = match img.kind {
        PnmKind::Bitmap => (2, 1),
        PnmKind::Graymap => (regions.unwrap_or(img.maxval as usize), 0),
    };
    let mut assign = vec![0usize; grid.cell_count()];
    for r in 0..img.height {
        let j = img.height - 1 - r;
        for i in 0..img.width {
            let p = img.pixels[r * img.width + i] as usize + offset;
            if p == 0 || p > count {
                return Err(Error::Mask(format!(
                    "pixel ({i}, {r}) has region index {p} outside 1..={count}"
                )));
            }
            assign[grid.index(i, j)] = p;
        }
    }
    DomainPartition::new(*grid, assign, count)
}

/// P1 bitmap of region 2 membership (two-region partitions only).
pub fn encode_pbm(partition: &DomainPartition) -> Result<String> {
    if partition.region_count() != 2 {
        return Err(Error::Mask("bitmaps hold two-region partitions only".into()));
    }
    let g = partition.grid();
    let mut s = format!("P1\n{} {}\n", g.nx(), g.ny());
    for r in 0..g.ny() {
        let j = g.ny() - 1 - r;
        let row: Vec<&str> = (0..g.nx())
            .map(|i| if partition.region(g.index(i, j)) == 2 { "1" } else { "0" })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    Ok(s)
}

/// P2 graymap with gray level = region index.
pub fn encode_region_pgm(partition: &DomainPartition) -> String {
    let g = partition.grid();
    let mut s = format!("P2\n{} {}\n{}\n", g.nx(), g.ny(), partition.region_count());
    for r in 0..g.ny() {
        let j = g.ny() - 1 - r;
        let row: Vec<String> = (0..g.nx()).map(|i| partition.region(g.index(i, j)).to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// 8-bit P5 snapshot of a grid function with linear min-max scaling.
/// Returns the bytes and the `(min, max)` used.
pub fn encode_snapshot(grid: &Grid, values: &[f64]) -> (Vec<u8>, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P5\n{} {}\n255\n", grid.nx(), grid.ny()).into_bytes();
    for r in 0..grid.ny() {
        let j = grid.ny() - 1 - r;
        for i in 0..grid.nx() {
            let x = values[grid.index(i, j)];
            let level = if span > 0.0 { ((x - min) / span * 255.0).round() } else { 0.0 };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    (out, min, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_round_trip_with_orientation() {
        let g = Grid::square(4, 4).unwrap();
        let mut assign = vec![1; 16];
        assign[g.index(0, 3)] = 2; // top-left in image space
        let p = DomainPartition::new(g, assign, 2).unwrap();
        let text = encode_pbm(&p).unwrap();
        assert!(text.starts_with("P1\n4 4\n1 0 0 0\n"));
        let back = mask_from_bytes(&g, text.as_bytes(), None).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn p4_matches_p1() {
        let g = Grid::square(10, 4).unwrap();
        let p1 = b"P1\n# comment\n10 4\n1 0 0 0 0 0 0 0 0 1\n0 0 0 0 0 0 0 0 0 0\n0 1 0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0 1 0\n";
        let mut p4 = b"P4\n10 4\n".to_vec();
        p4.extend_from_slice(&[0b1000_0000, 0b0100_0000, 0, 0, 0b0100_0000, 0, 0, 0b1000_0000]);
        assert_eq!(mask_from_bytes(&g, p1, None).unwrap(), mask_from_bytes(&g, &p4, None).unwrap());
    }

    #[test]
    fn all_zero_bitmap_has_empty_second_region() {
        let g = Grid::line(5).unwrap();
        let p = mask_from_bytes(&g, b"P1 5 1 0 0 0 0 0", None).unwrap();
        assert_eq!(p.measure(2), 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = Grid::line(6).unwrap();
        assert!(matches!(mask_from_bytes(&g, b"P1 5 1 0 0 0 0 0", None), Err(Error::Mask(_))));
    }

    #[test]
    fn graymap_regions() {
        let g = Grid::line(4).unwrap();
        let p = mask_from_bytes(&g, b"P2 4 1 3 1 2 3 1", None).unwrap();
        assert_eq!(p.regions(), &[1, 2, 3, 1]);
        assert!(mask_from_bytes(&g, b"P2 4 1 3 1 2 3 1", Some(2)).is_err());
        assert!(mask_from_bytes(&g, b"P2 4 1 3 1 0 3 1", None).is_err());
        let text = encode_region_pgm(&p);
        assert_eq!(mask_from_bytes(&g, text.as_bytes(), None).unwrap(), p);
    }
}
