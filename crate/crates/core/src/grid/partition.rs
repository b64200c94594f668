use serde::Serialize;

use super::Grid;
use crate::error::{Error, Result};

/// Assignment of every cell to one of the regions `1..=J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainPartition {
    grid: Grid,
    regions: Vec<usize>,
    region_count: usize,
    counts: Vec<usize>,
}

impl DomainPartition {
    pub fn new(grid: Grid, regions: Vec<usize>, region_count: usize) -> Result<Self> {
        if regions.len() != grid.cell_count() {
            return Err(Error::Mask(format!(
                "assignment has {} cells, grid has {}",
                regions.len(),
                grid.cell_count()
            )));
        }
        if region_count == 0 {
            return Err(Error::Mask("a partition needs at least one region".into()));
        }
        let mut counts = vec![0; region_count];
        for (k, &r) in regions.iter().enumerate() {
            if r == 0 || r > region_count {
                return Err(Error::Mask(format!(
                    "cell {k} has region index {r} outside 1..={region_count}"
                )));
            }
            counts[r - 1] += 1;
        }
        Ok(DomainPartition {
            grid,
            regions,
            region_count,
            counts,
        })
    }

    /// Whole domain in region 1, with `region_count` declared regions.
    pub fn uniform(grid: Grid, region_count: usize) -> Result<Self> {
        Self::new(grid, vec![1; grid.cell_count()], region_count)
    }

    /// Region 2 is the set of cells whose center has `x` in `(lo, hi)`.
    pub fn stripe(grid: Grid, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("empty stripe ({lo}, {hi})")));
        }
        let regions = (0..grid.cell_count())
            .map(|k| {
                let x = grid.center(k).0;
                if x > lo && x < hi {
                    2
                } else {
                    1
                }
            })
            .collect();
        Self::new(grid, regions, 2)
    }

    /// Centered stripe of (cell-counted) measure closest to `fraction`.
    pub fn centered_stripe(grid: Grid, fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::InvalidInput(format!("stripe fraction {fraction} outside [0, 1)")));
        }
        if fraction == 0.0 {
            return Self::uniform(grid, 2);
        }
        Self::stripe(grid, 0.5 - 0.5 * fraction, 0.5 + 0.5 * fraction)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn regions(&self) -> &[usize] {
        &self.regions
    }

    pub fn region(&self, k: usize) -> usize {
        self.regions[k]
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    /// Cell counts per region, indexed by `region - 1`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `|Omega_i|` as a cell count times the cell measure.
    pub fn measure(&self, region: usize) -> f64 {
        self.counts[region - 1] as f64 / self.grid.cell_count() as f64
    }

    pub fn measures(&self) -> Vec<f64> {
        (1..=self.region_count).map(|r| self.measure(r)).collect()
    }

    /// Cells within `width` cells (max-norm) of a cell in another region.
    pub fn interface_band(&self, width: usize) -> Vec<bool> {
        let g = &self.grid;
        let (nx, ny) = (g.nx() as isize, g.ny() as isize);
        let w = width as isize;
        let wy = if g.dim() == 1 { 0 } else { w };
        (0..g.cell_count())
            .map(|k| {
                let (i, j) = g.coords(k);
                let (i, j) = (i as isize, j as isize);
                let r = self.regions[k];
                for dj in -wy..=wy {
                    for di in -w..=w {
                        let (a, b) = (i + di, j + dj);
                        if a < 0 || b < 0 || a >= nx || b >= ny {
                            continue;
                        }
                        if self.regions[(a + nx * b) as usize] != r {
                            return true;
                        }
                    }
                }
                false
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stripe_measure_exact() {
        let g = Grid::line(100).unwrap();
        let p = DomainPartition::stripe(g, 0.45, 0.55).unwrap();
        assert_eq!(p.counts(), &[90, 10]);
        assert_eq!(p.measure(2), 0.10);
        assert_eq!(p.counts().iter().sum::<usize>(), g.cell_count());
    }

    #[test]
    fn out_of_range_index_rejected() {
        let g = Grid::line(4).unwrap();
        assert!(DomainPartition::new(g, vec![1, 2, 3, 1], 2).is_err());
        assert!(DomainPartition::new(g, vec![1, 0, 1, 1], 2).is_err());
        assert!(DomainPartition::new(g, vec![1, 1, 1], 2).is_err());
    }

    #[test]
    fn band_marks_neighbours_of_jump() {
        let g = Grid::line(10).unwrap();
        let p = DomainPartition::new(g, vec![1, 1, 1, 1, 1, 2, 2, 2, 2, 2], 2).unwrap();
        let band = p.interface_band(2);
        assert_eq!(band, vec![false, false, false, true, true, true, true, false, false, false]);
    }
}
