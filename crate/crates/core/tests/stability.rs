use discstat::grid::{discrete_spectrum_all, generate_ey_mask, DomainPartition, Grid};
use discstat::kinetics::{branches, find_steady, BranchSet, KineticModel, SteadyState};
use discstat::stability::*;
use discstat::stationary::{solve_discontinuous, Construction, StationaryField};

struct Setup {
    model: KineticModel,
    steady: SteadyState,
    set: BranchSet,
    field: StationaryField,
}

fn build(model: KineticModel, label: usize, window: (f64, f64), regions: Vec<usize>, gamma: f64, p: DomainPartition) -> Setup {
    let steady = find_steady(&model, label).unwrap();
    let set = branches(&model, &steady, window).unwrap();
    let c = Construction::new(set.clone(), steady, p, regions, gamma).unwrap();
    let field = solve_discontinuous(&c, 1e-10).unwrap();
    Setup {
        model,
        steady,
        set,
        field,
    }
}

fn stripe(n: usize, fraction: f64) -> DomainPartition {
    DomainPartition::centered_stripe(Grid::line(n).unwrap(), fraction).unwrap()
}

fn gray_scott(n: usize) -> Setup {
    build(KineticModel::gray_scott(0.04, 0.1).unwrap(), 1, (0.3, 1.7), vec![1, 2], 1.0, stripe(n, 0.05))
}

fn brusselator(n: usize) -> Setup {
    build(KineticModel::brusselator(1.0, 2.0).unwrap(), 1, (1.5, 2.2), vec![1, 2], 1.0, stripe(n, 0.05))
}

fn oregonator(n: usize) -> Setup {
    build(KineticModel::oregonator(0.1, 2.0).unwrap(), 2, (-2.29, 1.19), vec![2, 3], 0.1, stripe(n, 0.05))
}

fn predator_prey(p: DomainPartition) -> Setup {
    let m = KineticModel::predator_prey(1.0, 3.5).unwrap();
    let vb = find_steady(&m, 1).unwrap().v_bar;
    build(m, 1, (vb - 0.2, vb + 0.2), vec![1, 3], 0.01, p)
}

fn audit(s: &Setup, secondary: &[usize]) -> AssumptionAudit {
    audit_assumptions(&AuditRequest {
        model: &s.model,
        steady: &s.steady,
        branches: Some(&s.set),
        gamma: s.field.gamma,
        grid: &s.field.grid,
        eigen_count: 20,
        secondary_labels: secondary,
        field: Some(&s.field),
    })
    .unwrap()
}

#[test]
fn coefficients_are_the_cellwise_jacobian() {
    let s = gray_scott(200);
    let lin = assemble_linearization(&s.model, &s.field).unwrap();
    for k in 0..200 {
        let j = s.model.jacobian(s.field.u[k], s.field.v[k]).unwrap();
        assert_eq!((lin.a[k], lin.b[k], lin.c[k], lin.d[k]), (j.fu, j.fv, j.gu, j.gv));
        // f_u is -alpha where U = 0 and +alpha on U = alpha / V.
        let expected = if s.field.partition.region(k) == 1 { -0.04 } else { 0.04 };
        assert!((lin.a[k] - expected).abs() <= 1e-15, "cell {k}: {}", lin.a[k]);
    }
    let constant = Linearization::constant(&s.field.grid, 1.0, &s.steady);
    assert!(constant.a.iter().all(|&a| a == s.steady.a0));
    assert!(constant.d.iter().all(|&d| d == s.steady.d0));
}

#[test]
fn u_equation_has_no_coupling_between_cells() {
    let s = brusselator(16);
    let lin = assemble_linearization(&s.model, &s.field).unwrap();
    for (r, c, _) in lin.shifted_entries(0.0) {
        if r < 16 {
            assert!(c == r || c == r + 16);
        }
    }
}

#[test]
fn oregonator_singular_point_is_reported() {
    let m = KineticModel::oregonator(0.1, 2.0).unwrap();
    let grid = Grid::line(8).unwrap();
    let mut u = vec![0.5; 8];
    u[5] = -2.0;
    let r = Linearization::from_state(&m, &grid, 1.0, &u, &[0.5; 8]);
    let msg = r.unwrap_err().to_string();
    assert!(msg.contains("cell 5"), "{msg}");
}

#[test]
fn jump_fields_of_gray_scott_and_brusselator_are_unstable() {
    for s in [gray_scott(200), brusselator(200)] {
        let lin = assemble_linearization(&s.model, &s.field).unwrap();
        let rep = rightmost_spectrum(&lin, 5).unwrap();
        assert_eq!(rep.method, SpectrumMethod::Dense);
        assert_eq!(rep.verdict, Verdict::Unstable);
        assert!(rep.rightmost_re() > 1e-6);
        assert!(rep.eigenvalues.windows(2).all(|w| w[0][0] >= w[1][0]));
        assert!(rep.residuals.iter().all(|&r| r <= CERTIFY_TOL));
        let auto = autocatalysis_check(&s.model, &s.field).unwrap();
        assert!(auto.unstable && auto.fraction > 0.0);
    }
}

#[test]
fn autocatalysis_fraction_counts_cells() {
    let s = gray_scott(200);
    let auto = autocatalysis_check(&s.model, &s.field).unwrap();
    let omega2 = s.field.partition.counts()[1] as f64 / 200.0;
    assert_eq!(auto.fraction, omega2);
    let b = brusselator(200);
    let auto = autocatalysis_check(&b.model, &b.field).unwrap();
    assert!(auto.fraction >= b.field.partition.measure(1));
}

#[test]
fn oregonator_field_is_stable() {
    let s = oregonator(200);
    let lin = assemble_linearization(&s.model, &s.field).unwrap();
    assert!(lin.a.iter().all(|&a| a < 0.0));
    let rep = rightmost_spectrum(&lin, 5).unwrap();
    assert_eq!(rep.verdict, Verdict::Stable);
    let a = audit(&s, &[3]);
    assert!(a.assumption_5.pass && a.assumption_5.margin < 0.0);
    assert!(a.sec_branch[0].pass && a.sec_branch[0].margin < 0.0);
    assert_eq!(a.autocatalysis, Some(0.0));
    // c0 = 1, d0 = -1 and det = -a0 (1 - k2'(V2)).
    assert_eq!((s.steady.c0, s.steady.d0), (1.0, -1.0));
    let k2p = s.set.derivative(2, s.steady.v_bar).unwrap();
    assert!((s.steady.det() + s.steady.a0 * (1.0 - k2p)).abs() <= 1e-12);
}

#[test]
fn predator_prey_zero_branch_checks() {
    let s = predator_prey(stripe(200, 0.05));
    let a = audit(&s, &[3]);
    let sec = &a.sec_branch[0];
    assert_eq!(sec.u, 0.0);
    assert_eq!(sec.f_u, -s.steady.v_bar);
    assert_eq!(sec.g_v, -2.0 * s.steady.v_bar - 3.5);
    assert!(sec.pass && a.assumption_5.pass);
    let lin = assemble_linearization(&s.model, &s.field).unwrap();
    assert_eq!(rightmost_spectrum(&lin, 3).unwrap().verdict, Verdict::Stable);
}

#[test]
fn brusselator_audit_margins() {
    let s = brusselator(64);
    let a = audit(&s, &[2]);
    assert!(a.assumption_1.pass);
    assert_eq!(a.assumption_1.margin, 1.0);
    assert!(a.reg_det.pass && a.reg_det.margin == 1.0);
    assert!(!a.assumption_5.pass);
    let checks = a.checks();
    for name in ["assumption_1", "assumption_3", "assumption_4", "assumption_5", "reg_det", "sec_branch_k2"] {
        assert!(checks.contains_key(name), "{name}");
    }
}

#[test]
fn resonant_gamma_fails_assumption_three() {
    let m = KineticModel::brusselator(1.0, 2.0).unwrap();
    let s = find_steady(&m, 1).unwrap();
    let grid = Grid::line(64).unwrap();
    let a = audit_assumptions(&AuditRequest {
        model: &m,
        steady: &s,
        branches: None,
        gamma: 1.0 / (std::f64::consts::PI * std::f64::consts::PI),
        grid: &grid,
        eigen_count: 10,
        secondary_labels: &[],
        field: None,
    })
    .unwrap();
    assert!(!a.assumption_3.pass);
    assert!(a.assumption_3.margin.abs() < 1e-12);
    assert_eq!(a.assumption_3_mode, Some(1));
    assert!(a.assumption_4.is_none());
}

#[test]
fn assumption_five_matches_the_two_by_two_eigenvalues() {
    let states = [
        find_steady(&KineticModel::gray_scott(0.04, 0.1).unwrap(), 1).unwrap(),
        find_steady(&KineticModel::gray_scott(0.04, 0.1).unwrap(), 2).unwrap(),
        find_steady(&KineticModel::brusselator(1.0, 2.0).unwrap(), 1).unwrap(),
        find_steady(&KineticModel::brusselator(1.0, 0.5).unwrap(), 1).unwrap(),
        find_steady(&KineticModel::oregonator(0.1, 2.0).unwrap(), 2).unwrap(),
        find_steady(&KineticModel::predator_prey(1.0, 3.5).unwrap(), 1).unwrap(),
    ];
    for s in states {
        let tr = s.trace();
        let det = s.det();
        let disc = tr * tr - 4.0 * det;
        let max_re = if disc >= 0.0 { 0.5 * (tr + disc.sqrt()) } else { 0.5 * tr };
        let stable_kinetics = max_re < 0.0;
        let a5 = s.a0 < 0.0 && s.d0 < 0.0 && tr < 0.0 && det > 0.0;
        // The sign conditions ask more than kinetic stability, never less.
        if a5 {
            assert!(stable_kinetics, "{s:?}");
        }
        if s.a0 < 0.0 && s.d0 < 0.0 {
            assert_eq!(a5, stable_kinetics, "{s:?}");
        }
    }
}

#[test]
fn regular_gray_scott_fields_are_classified_by_sign() {
    let m = KineticModel::gray_scott(0.04, 0.1).unwrap();
    let grid = Grid::line(64).unwrap();
    let uniform = DomainPartition::uniform(grid, 1).unwrap();
    let k1 = build(m, 1, (0.3, 1.7), vec![1], 1.0, uniform.clone());
    let v3 = find_steady(&m, 3).unwrap().v_bar;
    let k2 = build(m, 3, (0.5 * v3, 2.0 * v3), vec![2], 1.0, uniform);
    let c1 = classify_regular(&m, &k1.field).unwrap();
    let c2 = classify_regular(&m, &k2.field).unwrap();
    assert_eq!(c1.class, RegularClass::UnstableConvex);
    assert!((c1.max_f_u + 0.04).abs() <= 1e-15);
    assert_eq!(c2.class, RegularClass::UnstableAutocatalytic);
    assert!((c2.max_f_u - 0.04).abs() <= 1e-15);
    assert_eq!(classify_coefficients(&[0.0; 8]).class, RegularClass::Degenerate);
}

fn assert_same_rightmost(lin: &Linearization, m: usize) {
    let d = rightmost_spectrum_with(lin, m, SpectrumMethod::Dense).unwrap();
    let i = rightmost_spectrum_with(lin, m, SpectrumMethod::Iterative).unwrap();
    assert_eq!(i.method, SpectrumMethod::Iterative);
    for (x, y) in d.eigenvalues.iter().zip(&i.eigenvalues) {
        assert!((x[0] - y[0]).abs() <= 1e-6 && (x[1] - y[1]).abs() <= 1e-6, "{:?} vs {:?}", d.eigenvalues, i.eigenvalues);
    }
    assert!(i.residuals.iter().all(|&r| r <= CERTIFY_TOL));
    assert_eq!(d.verdict, i.verdict);
}

#[test]
fn dense_and_iterative_paths_agree() {
    for s in [gray_scott(200), brusselator(200), oregonator(200), predator_prey(stripe(200, 0.05))] {
        let lin = assemble_linearization(&s.model, &s.field).unwrap();
        assert_same_rightmost(&lin, 5);
    }
}

#[test]
fn iterative_path_on_a_two_dimensional_mask() {
    let grid = Grid::square(24, 24).unwrap();
    let s = predator_prey(generate_ey_mask(&grid, 0.03).unwrap());
    let lin = assemble_linearization(&s.model, &s.field).unwrap();
    assert_same_rightmost(&lin, 4);
}

#[test]
fn large_constant_operator_uses_arnoldi_and_matches_modes() {
    // The rightmost group sits clear of the accumulation point at a0.
    let m = KineticModel::oregonator(0.1, 2.0).unwrap();
    let s = find_steady(&m, 2).unwrap();
    let grid = Grid::line(1001).unwrap();
    let gamma = 0.01;
    let lin = Linearization::constant(&grid, gamma, &s);
    let rep = rightmost_spectrum(&lin, 4).unwrap();
    assert_eq!(rep.method, SpectrumMethod::Iterative);
    let mut oracle: Vec<(f64, f64)> = Vec::new();
    for (mu, _) in discrete_spectrum_all(&grid) {
        let (a, d) = (s.a0, s.d0 - gamma * mu);
        let tr = a + d;
        let disc = tr * tr - 4.0 * (a * d - s.b0 * s.c0);
        if disc >= 0.0 {
            oracle.push((0.5 * (tr + disc.sqrt()), 0.0));
            oracle.push((0.5 * (tr - disc.sqrt()), 0.0));
        } else {
            oracle.push((0.5 * tr, 0.5 * (-disc).sqrt()));
            oracle.push((0.5 * tr, -0.5 * (-disc).sqrt()));
        }
    }
    oracle.sort_by(|x, y| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)));
    for (got, want) in rep.eigenvalues.iter().zip(&oracle) {
        assert!((got[0] - want.0).abs() <= 1e-8 && (got[1] - want.1).abs() <= 1e-8, "{got:?} vs {want:?}");
    }
}

#[test]
fn rightmost_eigenvalue_settles_under_refinement() {
    let re = |n: usize| {
        let s = oregonator(n);
        let lin = assemble_linearization(&s.model, &s.field).unwrap();
        rightmost_spectrum(&lin, 1).unwrap().rightmost_re()
    };
    let (a, b, c) = (re(100), re(200), re(400));
    assert!(a < 0.0 && b < 0.0 && c < 0.0);
    assert!((c - b).abs() <= (b - a).abs().max(1e-12), "{a} {b} {c}");
}

#[test]
fn zero_eigenvalues_requested_is_an_error() {
    let s = brusselator(16);
    let lin = assemble_linearization(&s.model, &s.field).unwrap();
    assert!(rightmost_spectrum(&lin, 0).is_err());
}
