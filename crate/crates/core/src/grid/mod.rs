//! Cell-centered grids on `(0,1)` and `(0,1)^2`, the no-flux Laplacian,
//! its spectrum, and cell partitions of the domain.

mod ey;
mod laplacian;
mod partition;
pub mod pnm;
mod spectrum;

pub use ey::generate_ey_mask;
pub use laplacian::NeumannLaplacian;
pub use partition::DomainPartition;
pub use spectrum::{discrete_spectrum_all, laplacian_eigenvalues, EigenKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_CELLS: usize = 4;

/// Uniform cell-centered grid. Cell `(i, j)` has center
/// `((i + 1/2) hx, (j + 1/2) hy)` and flat index `i + nx * j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize, ny: Option<usize>) -> Result<Self> {
        match dim {
            1 => Self::line(n),
            2 => Self::square(n, ny.unwrap_or(n)),
            _ => Err(Error::InvalidInput(format!("dimension must be 1 or 2, got {dim}"))),
        }
    }

    pub fn line(n: usize) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(Error::InvalidInput(format!("grid needs at least {MIN_CELLS} cells, got {n}")));
        }
        Ok(Grid { dim: 1, nx: n, ny: 1 })
    }

    pub fn square(nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {MIN_CELLS} cells per side, got {nx}x{ny}"
            )));
        }
        Ok(Grid { dim: 2, nx, ny })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn hx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    /// Smallest spacing.
    pub fn h(&self) -> f64 {
        if self.dim == 1 {
            self.hx()
        } else {
            self.hx().min(self.hy())
        }
    }

    /// Measure of one cell, `h^dim`.
    pub fn cell_area(&self) -> f64 {
        if self.dim == 1 {
            self.hx()
        } else {
            self.hx() * self.hy()
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.nx as f64
    }

    pub fn y_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.ny as f64
    }

    /// Cell center of flat index `idx`; `y` is `0.5` in 1D.
    pub fn center(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.coords(idx);
        if self.dim == 1 {
            (self.x_center(i), 0.5)
        } else {
            (self.x_center(i), self.y_center(j))
        }
    }

    /// Half-bandwidth of the Laplacian in the flat ordering.
    pub fn bandwidth(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.nx
        }
    }

    pub fn laplacian(&self) -> NeumannLaplacian {
        NeumannLaplacian::new(*self)
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.cell_count())
            .map(|k| {
                let (x, y) = self.center(k);
                f(x, y)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_grid_examples() {
        let g = Grid::new(1, 4, None).unwrap();
        assert_eq!(g.h(), 0.25);
        let c: Vec<f64> = (0..4).map(|i| g.center(i).0).collect();
        assert_eq!(c, vec![0.125, 0.375, 0.625, 0.875]);

        let g2 = Grid::new(2, 128, Some(128)).unwrap();
        assert_eq!(g2.cell_count(), 16384);

        assert!(Grid::new(1, 3, None).is_err());
        assert!(Grid::new(2, 8, Some(3)).is_err());
        assert!(Grid::new(3, 8, None).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::square(7, 5).unwrap();
        for k in 0..g.cell_count() {
            let (i, j) = g.coords(k);
            assert_eq!(g.index(i, j), k);
        }
    }
}
