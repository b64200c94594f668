use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    /// Eigenvalues of `-Lap` on the continuous domain.
    Analytic,
    /// Eigenvalues of `-L` for the grid operator.
    Discrete,
}

fn discrete_1d(n: usize) -> Vec<f64> {
    let scale = 4.0 * (n * n) as f64;
    (0..n)
        .map(|k| {
            let s = (k as f64 * PI / (2.0 * n as f64)).sin();
            scale * s * s
        })
        .collect()
}

fn merge(mut values: Vec<f64>) -> Vec<(f64, usize)> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((last, m)) if (v - *last).abs() <= 1e-12 * last.abs().max(1.0) => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Every eigenvalue of `-L` with multiplicity merged, ascending.
pub fn discrete_spectrum_all(grid: &Grid) -> Vec<(f64, usize)> {
    let ex = discrete_1d(grid.nx());
    if grid.dim() == 1 {
        return ex.into_iter().map(|v| (v, 1)).collect();
    }
    let ey = discrete_1d(grid.ny());
    let mut all = Vec::with_capacity(ex.len() * ey.len());
    for &a in &ex {
        for &b in &ey {
            all.push(a + b);
        }
    }
    merge(all)
}

/// The `count` smallest distinct eigenvalues `mu_k` of the no-flux
/// Laplacian with their multiplicities.
pub fn laplacian_eigenvalues(grid: &Grid, count: usize, kind: EigenKind) -> Vec<(f64, usize)> {
    match (kind, grid.dim()) {
        (EigenKind::Analytic, 1) => (0..count).map(|k| ((k as f64 * PI).powi(2), 1)).collect(),
        (EigenKind::Analytic, _) => {
            // mu = pi^2 (j^2 + k^2); group by the integer j^2 + k^2.
            let mut radius = 1usize;
            loop {
                let mut sums: Vec<usize> = Vec::new();
                for j in 0..=radius {
                    for k in 0..=radius {
                        sums.push(j * j + k * k);
                    }
                }
                sums.sort_unstable();
                let cutoff = radius * radius;
                let mut out: Vec<(f64, usize)> = Vec::new();
                let mut last = None;
                for s in sums.into_iter().filter(|&s| s <= cutoff) {
                    if last == Some(s) {
                        out.last_mut().unwrap().1 += 1;
                    } else {
                        out.push((PI * PI * s as f64, 1));
                        last = Some(s);
                    }
                }
                if out.len() >= count {
                    out.truncate(count);
                    return out;
                }
                radius *= 2;
            }
        }
        (EigenKind::Discrete, _) => {
            let mut all = discrete_spectrum_all(grid);
            all.truncate(count);
            all
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_1d() {
        let g = Grid::line(16).unwrap();
        let e = laplacian_eigenvalues(&g, 3, EigenKind::Analytic);
        assert_eq!(e[0], (0.0, 1));
        assert!((e[1].0 - PI * PI).abs() < 1e-14);
        assert!((e[2].0 - 4.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn analytic_2d_multiplicities() {
        let g = Grid::square(16, 16).unwrap();
        let e = laplacian_eigenvalues(&g, 6, EigenKind::Analytic);
        let s: Vec<(f64, usize)> = e.iter().map(|&(m, k)| ((m / (PI * PI)).round(), k)).collect();
        // 0, 1 (1,0)(0,1), 2 (1,1), 4, 5, 8
        assert_eq!(s, vec![(0.0, 1), (1.0, 2), (2.0, 1), (4.0, 2), (5.0, 2), (8.0, 1)]);
    }

    #[test]
    fn discrete_first_mode() {
        let g = Grid::line(256).unwrap();
        let e = laplacian_eigenvalues(&g, 2, EigenKind::Discrete);
        let expected = 4.0 * 256.0 * 256.0 * (PI / 512.0).sin().powi(2);
        assert_eq!(e[1].0, expected);
        assert!((e[1].0 - PI * PI).abs() < 1.3e-3);
    }

    #[test]
    fn discrete_converges_quadratically() {
        let err = |n| {
            let g = Grid::line(n).unwrap();
            (laplacian_eigenvalues(&g, 2, EigenKind::Discrete)[1].0 - PI * PI).abs()
        };
        for n in [16, 32, 64] {
            let ratio = err(n) / err(2 * n);
            assert!((ratio - 4.0).abs() <= 4.0 * 0.2, "n = {n}: ratio {ratio}");
        }
    }
}
