//! Benchmark fixtures shared by the criterion targets.

use discstat::grid::generate_ey_mask;
use discstat::kinetics::{branches, find_steady};
use discstat::stationary::Construction;
use discstat::{DomainPartition, Grid, KineticModel, State, SteadyState};

pub fn predator_prey() -> (KineticModel, SteadyState) {
    let m = KineticModel::predator_prey(1.0, 3.5).expect("valid rates");
    let s = find_steady(&m, 1).expect("positive state");
    (m, s)
}

/// Constant predator-prey state on an `n x n` grid, with a bump in `v` so
/// the Laplacian has work to do.
pub fn square_state(n: usize) -> (Grid, State) {
    let grid = Grid::square(n, n).expect("grid");
    let (_, s) = predator_prey();
    let v = grid.sample(|x, y| s.v_bar + 1e-2 * (x * y * 7.0).sin());
    let u = vec![s.u_bar; grid.cell_count()];
    (grid, State { u, v })
}

/// Gray-Scott stripe construction on `n` cells.
pub fn gray_scott_construction(n: usize) -> Construction {
    let m = KineticModel::gray_scott(0.04, 0.1).expect("valid rates");
    let s = find_steady(&m, 1).expect("state 1");
    let set = branches(&m, &s, (0.3, 1.7)).expect("branches");
    let p = DomainPartition::centered_stripe(Grid::line(n).expect("grid"), 0.05).expect("stripe");
    Construction::new(set, s, p, vec![1, 2], 1.0).expect("construction")
}

/// Predator-prey construction on the `n x n` EY mask.
pub fn ey_construction(n: usize) -> Construction {
    let (m, s) = predator_prey();
    let grid = Grid::square(n, n).expect("grid");
    let set = branches(&m, &s, (s.v_bar - 0.2, s.v_bar + 0.2)).expect("branches");
    let p = generate_ey_mask(&grid, 0.05).expect("mask");
    Construction::new(set, s, p, vec![1, 3], 0.01).expect("construction")
}
