use super::{DomainPartition, Grid};
use crate::error::{Error, Result};

/// Block-letter glyphs "E" and "Y" as unions of axis-aligned rectangles
/// `(x0, x1, y0, y1)` in font units. The glyph box is 11 x 7.
const GLYPHS: &[(f64, f64, f64, f64)] = &[
    // E
    (0.0, 1.0, 0.0, 7.0),
    (1.0, 5.0, 6.0, 7.0),
    (1.0, 4.0, 3.0, 4.0),
    (1.0, 5.0, 0.0, 1.0),
    // Y
    (8.0, 9.0, 0.0, 3.0),
    (6.0, 11.0, 3.0, 4.0),
    (6.0, 7.0, 4.0, 7.0),
    (10.0, 11.0, 4.0, 7.0),
];
const GLYPH_W: f64 = 11.0;
const GLYPH_H: f64 = 7.0;

fn rasterize(grid: &Grid, scale: f64) -> Vec<bool> {
    let x0 = 0.5 - 0.5 * GLYPH_W * scale;
    let y0 = 0.5 - 0.5 * GLYPH_H * scale;
    (0..grid.cell_count())
        .map(|k| {
            let (x, y) = grid.center(k);
            let (gx, gy) = ((x - x0) / scale, (y - y0) / scale);
            GLYPHS
                .iter()
                .any(|&(a, b, c, d)| gx >= a && gx < b && gy >= c && gy < d)
        })
        .collect()
}

/// Partition with region 2 shaped like the letters "EY", centered in the
/// unit square, with `|Omega_2|` equal to `fraction` within one cell.
pub fn generate_ey_mask(grid: &Grid, fraction: f64) -> Result<DomainPartition> {
    if grid.dim() != 2 {
        return Err(Error::InvalidInput("the EY mask needs a 2D grid".into()));
    }
    if !(0.0..0.5).contains(&fraction) {
        return Err(Error::InvalidInput(format!("EY fraction {fraction} outside [0, 0.5)")));
    }
    let target = (fraction * grid.cell_count() as f64).round() as usize;
    let count = |s: f64| rasterize(grid, s).iter().filter(|&&b| b).count();

    // Largest admissible scale keeps the glyph box inside the square.
    let (mut lo, mut hi) = (0.0, 1.0 / GLYPH_W);
    if count(hi) < target {
        return Err(Error::InvalidInput(format!("EY fraction {fraction} too large for the glyph box")));
    }
    if target == 0 {
        return DomainPartition::uniform(*grid, 2);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if count(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut inside = if lo > 0.0 { rasterize(grid, lo) } else { vec![false; grid.cell_count()] };
    let outer = rasterize(grid, hi);
    let mut have = inside.iter().filter(|&&b| b).count();
    // Top up with cells that switch on at the critical scale, in index order.
    for k in 0..grid.cell_count() {
        if have == target {
            break;
        }
        if outer[k] && !inside[k] {
            inside[k] = true;
            have += 1;
        }
    }
    let regions = inside.into_iter().map(|b| if b { 2 } else { 1 }).collect();
    DomainPartition::new(*grid, regions, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hits_area_fraction() {
        let g = Grid::square(128, 128).unwrap();
        let p = generate_ey_mask(&g, 0.05).unwrap();
        assert!((p.measure(2) - 0.05).abs() <= g.cell_area());
    }

    #[test]
    fn coarse_grid_and_zero() {
        let g = Grid::square(48, 48).unwrap();
        let p = generate_ey_mask(&g, 0.08).unwrap();
        assert!((p.measure(2) - 0.08).abs() <= g.cell_area());
        assert_eq!(generate_ey_mask(&g, 0.0).unwrap().measure(2), 0.0);
        assert!(generate_ey_mask(&Grid::line(32).unwrap(), 0.05).is_err());
    }
}
