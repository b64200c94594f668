use rayon::prelude::*;

use super::Grid;

/// Three-point (1D) / five-point (2D) Laplacian with reflected ghost cells.
///
/// Stencil weights are integers applied to differences and scaled by `1/h^2`
/// once, so every row sums to exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannLaplacian {
    grid: Grid,
    inv_hx2: f64,
    inv_hy2: f64,
}

impl NeumannLaplacian {
    pub fn new(grid: Grid) -> Self {
        let inv_hx2 = (grid.nx() * grid.nx()) as f64;
        let inv_hy2 = if grid.dim() == 1 { 0.0 } else { (grid.ny() * grid.ny()) as f64 };
        NeumannLaplacian { grid, inv_hx2, inv_hy2 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn inv_hx2(&self) -> f64 {
        self.inv_hx2
    }

    pub fn inv_hy2(&self) -> f64 {
        self.inv_hy2
    }

    /// `(L v)_k` for a single cell.
    #[inline]
    pub fn apply_at(&self, v: &[f64], k: usize) -> f64 {
        let nx = self.grid.nx();
        let (i, j) = (k % nx, k / nx);
        let c = v[k];
        let mut dx = 0.0;
        if i > 0 {
            dx += v[k - 1] - c;
        }
        if i + 1 < nx {
            dx += v[k + 1] - c;
        }
        let mut out = dx * self.inv_hx2;
        if self.grid.dim() == 2 {
            let ny = self.grid.ny();
            let mut dy = 0.0;
            if j > 0 {
                dy += v[k - nx] - c;
            }
            if j + 1 < ny {
                dy += v[k + nx] - c;
            }
            out += dy * self.inv_hy2;
        }
        out
    }

    /// `out = L v`, parallel over grid rows.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.grid.cell_count());
        assert_eq!(out.len(), v.len());
        let nx = self.grid.nx();
        out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            for (i, o) in row.iter_mut().enumerate() {
                *o = self.apply_at(v, i + nx * j);
            }
        });
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply(v, &mut out);
        out
    }

    /// Nonzero entries of row `k`, as `(column, value)`.
    pub fn row(&self, k: usize) -> Vec<(usize, f64)> {
        let nx = self.grid.nx();
        let (i, j) = (k % nx, k / nx);
        let mut entries = Vec::with_capacity(5);
        let mut diag = 0.0;
        if self.grid.dim() == 2 && j > 0 {
            entries.push((k - nx, self.inv_hy2));
            diag -= self.inv_hy2;
        }
        if i > 0 {
            entries.push((k - 1, self.inv_hx2));
            diag -= self.inv_hx2;
        }
        let diag_pos = entries.len();
        if i + 1 < nx {
            entries.push((k + 1, self.inv_hx2));
            diag -= self.inv_hx2;
        }
        if self.grid.dim() == 2 && j + 1 < self.grid.ny() {
            entries.push((k + nx, self.inv_hy2));
            diag -= self.inv_hy2;
        }
        entries.insert(diag_pos, (k, diag));
        entries
    }

    /// Dense copy, row-major, for small grids.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.grid.cell_count();
        (0..n)
            .map(|k| {
                let mut r = vec![0.0; n];
                for (c, val) in self.row(k) {
                    r[c] = val;
                }
                r
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_rows_1d() {
        let g = Grid::line(4).unwrap();
        let l = g.laplacian();
        assert_eq!(l.row(0), vec![(0, -16.0), (1, 16.0)]);
        assert_eq!(l.row(1), vec![(0, 16.0), (1, -32.0), (2, 16.0)]);
        assert_eq!(l.row(3), vec![(2, 16.0), (3, -16.0)]);
    }

    #[test]
    fn rows_sum_to_zero_and_symmetric() {
        for g in [Grid::line(9).unwrap(), Grid::square(6, 5).unwrap()] {
            let l = g.laplacian();
            let d = l.to_dense();
            for (k, r) in d.iter().enumerate() {
                assert_eq!(r.iter().sum::<f64>(), 0.0, "row {k}");
                for (c, &val) in r.iter().enumerate() {
                    assert_eq!(val, d[c][k]);
                }
            }
        }
    }

    #[test]
    fn constant_in_kernel() {
        let g = Grid::square(8, 8).unwrap();
        let v = vec![0.37; g.cell_count()];
        assert!(g.laplacian().apply_vec(&v).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn apply_matches_rows() {
        let g = Grid::square(5, 4).unwrap();
        let l = g.laplacian();
        let v: Vec<f64> = (0..g.cell_count()).map(|k| (k as f64 * 0.37).sin()).collect();
        let out = l.apply_vec(&v);
        for (k, o) in out.iter().enumerate() {
            let r: f64 = l.row(k).iter().map(|&(c, a)| a * v[c]).sum();
            assert!((r - o).abs() < 1e-12 * 400.0);
        }
    }

    #[test]
    fn cosine_second_derivative() {
        let g = Grid::line(256).unwrap();
        let v = g.sample(|x, _| (std::f64::consts::PI * x).cos());
        let lv = g.laplacian().apply_vec(&v);
        let pi2 = std::f64::consts::PI.powi(2);
        let err = lv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a + pi2 * b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 5e-4, "max error {err}");
    }
}
