use std::sync::Arc;

use nodal_mhd::elements::{reference_stencil, LagrangeSpace, NodalGeometry};
use nodal_mhd::mesh::{interval, perturbed_interval, perturbed_rectangle, rectangle};
use nodal_mhd::scalar::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn periodic_line(n: usize) -> LagrangeSpace<1> {
    let mesh = interval(n, 0.0, 1.0).unwrap().with_periodicity([Some(1.0)]).unwrap();
    LagrangeSpace::new(&mesh, 1).unwrap()
}

#[test]
fn linear_advection_viscosity_on_uniform_line() {
    let (n, beta) = (10, 1.7);
    let s = ScalarSolver::new(periodic_line(n), Arc::new(LinearAdvection { velocity: [beta] })).unwrap();
    let h = 1.0 / n as f64;
    let eps = s.viscosity(&vec![0.3; n]);
    for e in &eps {
        // nodal units: β/(2h); times J Jᵀ = h² it is the Lax-Friedrichs βh/2
        assert!((e - beta / (2.0 * h)).abs() < 1e-12 * e);
        assert!((e * h * h - 0.5 * beta * h).abs() < 1e-14);
    }
    // interior nodes of a non-periodic line
    let open = ScalarSolver::new(
        LagrangeSpace::new(&interval(n, 0.0, 1.0).unwrap(), 1).unwrap(),
        Arc::new(LinearAdvection { velocity: [beta] }),
    )
    .unwrap();
    let eps = open.viscosity(&vec![0.3; n + 1]);
    for e in &eps[1..n] {
        assert!((e - beta / (2.0 * h)).abs() < 1e-12 * e);
    }
}

#[test]
fn constant_burgers_state_viscosity() {
    let mesh = perturbed_interval(12, 0.0, 1.0, 0.3, 4).unwrap();
    let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(Burgers)).unwrap();
    let q = vec![-0.8; 13];
    let g = s.geometry();
    for (i, e) in s.viscosity(&q).iter().enumerate() {
        let expected = g.c[i] * g.lumped[i] * 0.8 * g.phi[i];
        assert!((e - expected).abs() < 1e-14 * expected);
    }
}

#[test]
fn viscosity_bounded_by_quality_estimate() {
    for seed in 0..5 {
        let mesh = perturbed_rectangle(7, 6, [-1.0, 1.0], [-1.0, 1.0], 0.3, seed).unwrap();
        let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(RotatingAdvection)).unwrap();
        let q = vec![1.0; s.space().ndof()];
        let g = s.geometry();
        let fmax = s.derivative_bound(&q).into_iter().fold(0.0, f64::max);
        let alpha = 2.0 / 3.0;
        for (i, e) in s.viscosity(&q).iter().enumerate() {
            let bound = g.kappa[i] / alpha / 3.0 * fmax * max_gradient(g);
            assert!(*e <= bound * (1.0 + 1e-12), "node {i}: {e} > {bound}");
        }
    }
}

#[test]
fn rotation_derivative_bound_samples_the_patch() {
    let mesh = rectangle(4, 4, [-1.0, 1.0], [-1.0, 1.0]).unwrap();
    let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(RotatingAdvection)).unwrap();
    let b = s.derivative_bound(&vec![0.0; s.space().ndof()]);
    // the corner patch reaches the corner itself
    let corner = (0..s.space().ndof())
        .find(|&i| s.space().dof_coord(i) == [1.0, 1.0])
        .unwrap();
    assert!((b[corner] - 2f64.sqrt()).abs() < 1e-14);
    let centre = (0..s.space().ndof()).find(|&i| s.space().dof_coord(i) == [0.0, 0.0]).unwrap();
    assert!((b[centre] - 2f64.sqrt() * 0.5).abs() < 1e-14);
}

#[test]
fn constant_state_is_a_fixed_point() {
    let mesh = perturbed_rectangle(6, 6, [-1.0, 1.0], [-1.0, 1.0], 0.25, 3).unwrap();
    let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(RotatingAdvection)).unwrap();
    let q = vec![0.37; s.space().ndof()];
    let next = s.step(&q, s.max_step(&q));
    for v in next {
        assert!((v - 0.37).abs() < 1e-15);
    }
    let b = ScalarSolver::new(periodic_line(9), Arc::new(Burgers)).unwrap();
    let q = vec![2.0; 9];
    assert_eq!(b.step(&q, 0.01), q);
}

#[test]
fn linear_advection_step_is_upwind() {
    let (n, beta, tau) = (8, 1.3, 0.04);
    let h = 1.0 / n as f64;
    let s = ScalarSolver::new(periodic_line(n), Arc::new(LinearAdvection { velocity: [beta] })).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // the dofs follow the vertex order
    for i in 0..n {
        assert!((s.space().dof_coord(i)[0] - i as f64 * h).abs() < 1e-15);
    }
    // hand assembly: central convection β(q_{i+1} − q_{i−1})/2, viscosity
    // ε̄ = β/(2h) against the stencil h [[1, −1], [−1, 1]] per cell
    let eps = beta / (2.0 * h);
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        dense[i][r] += beta / 2.0;
        dense[i][l] -= beta / 2.0;
        dense[i][i] += 2.0 * eps * h;
        dense[i][l] -= eps * h;
        dense[i][r] -= eps * h;
    }
    let next = s.step(&q, tau);
    for i in 0..n {
        let r: f64 = (0..n).map(|j| dense[i][j] * q[j]).sum();
        let hand = q[i] - tau / h * r;
        let upwind = q[i] - tau * beta / h * (q[i] - q[(i + n - 1) % n]);
        assert!((next[i] - hand).abs() < 1e-14, "node {i}");
        assert!((next[i] - upwind).abs() < 1e-14, "node {i}");
    }
}

#[test]
fn step_matrix_matches_probing() {
    let mesh = perturbed_rectangle(4, 5, [-1.0, 1.0], [-1.0, 1.0], 0.25, 9).unwrap();
    let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(RotatingAdvection)).unwrap();
    let n = s.space().ndof();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let eps = s.viscosity(&q);
    let tau = s.max_step(&q);
    let mat = s.step_matrix(&q, &eps, tau);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = s.step_with(&q, &eps, &e, tau);
        for i in 0..n {
            assert!((col[i] - mat.get(i, j)).abs() < 1e-14);
        }
    }
    // the map applied to q is the step itself
    let next = s.step(&q, tau);
    let via = mat.mul_vec(&q);
    for i in 0..n {
        assert!((next[i] - via[i]).abs() < 1e-14);
    }
}

#[test]
fn convex_combination_under_cfl() {
    for seed in 0..6 {
        let mesh = perturbed_rectangle(6, 5, [-1.0, 1.0], [-1.0, 1.0], 0.25, seed).unwrap();
        let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(RotatingAdvection)).unwrap();
        let n = s.space().ndof();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mat = s.step_matrix(&q, &s.viscosity(&q), s.max_step(&q));
        for i in 0..n {
            let (_, vals) = mat.row(i);
            assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(vals.iter().all(|&v| v >= -1e-12), "row {i}: {vals:?}");
        }
    }
}

#[test]
fn cfl_constants() {
    assert_eq!(cfl_constant(1, 1.0), 0.5);
    assert_eq!(cfl_constant(2, 1.0), 1.0 / 3.0);
    assert_eq!(cfl_constant(2, 2.0), 0.1);
}

#[test]
fn cfl_step_on_uniform_meshes() {
    let n = 16;
    let h = 1.0 / n as f64;
    let beta = 2.5;
    let g = NodalGeometry::new(&periodic_line(n)).unwrap();
    assert_eq!(max_quality(&g), 1.0);
    let tau = scalar_cfl(&g, beta, 1.0);
    assert!((tau - 0.5 * h / beta).abs() < 1e-15);
    assert_eq!(scalar_cfl(&g, 0.0, 1.0), f64::INFINITY);

    let mesh = rectangle(5, 5, [0.0, 1.0], [0.0, 1.0]).unwrap();
    let g = NodalGeometry::new(&LagrangeSpace::new(&mesh, 1).unwrap()).unwrap();
    assert!((max_quality(&g) - 1.0).abs() < 1e-12);
    // h = min_j |∇φ_j|⁻¹ = h_grid/√2 on right triangles
    let h2 = 1.0 / max_gradient(&g);
    assert!((h2 - 0.2 / 2f64.sqrt()).abs() < 1e-14);
    let tau = scalar_cfl(&g, beta, max_quality(&g));
    assert!((tau - cfl_constant(2, 1.0) * h2 / beta).abs() < 1e-14);
}

#[test]
fn cfl_policy() {
    let s = ScalarSolver::new(periodic_line(8), Arc::new(Burgers)).unwrap();
    let q: Vec<f64> = (0..8).map(|i| if i < 4 { 1.0 } else { -0.5 }).collect();
    let tmax = s.max_step(&q);
    assert!((tmax - 0.5 / (1.0 * 8.0)).abs() < 1e-15);
    assert!(s.checked_step(&q, 2.0 * tmax, CflPolicy::Reject).is_err());
    let warned = s.checked_step(&q, 2.0 * tmax, CflPolicy::Warn).unwrap();
    assert!(warned.cfl_violated);
    let ok = s.checked_step(&q, tmax, CflPolicy::Reject).unwrap();
    assert!(!ok.cfl_violated);
    assert_eq!(ok.q, s.step(&q, tmax));
}

#[test]
fn dmp_check_reports_raised_node() {
    let s = ScalarSolver::new(periodic_line(6), Arc::new(Burgers)).unwrap();
    let patch = &s.geometry().fine_patch;
    let q = vec![0.0, 1.0, 0.5, 0.2, 0.7, 0.1];
    assert!(dmp_check(&q, &q, patch).is_empty());
    let mut raised = q.clone();
    // patch of node 3 is {2, 3, 4} with max 0.7
    raised[3] = 0.75;
    let v = dmp_check(&q, &raised, patch);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].node, 3);
    assert_eq!((v[0].lower, v[0].upper), (0.2, 0.7));
}

#[test]
fn trapezoid_identity_constant_eps() {
    let mesh = perturbed_rectangle(3, 3, [0.0, 1.0], [0.0, 1.0], 0.3, 1).unwrap();
    let space = LagrangeSpace::new(&mesh, 1).unwrap();
    for c in 0..space.num_cells() {
        let st = reference_stencil(&space, c).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let (lhs, rhs) = trapezoid_identity(&space, c, &[2.5; 3], a, b).unwrap();
                assert!((lhs - 2.5 * st[a * 3 + b]).abs() < 1e-13);
                assert!((rhs - 2.5 * st[a * 3 + b]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn trapezoid_identity_random_triangle() {
    let mesh = nodal_mhd::mesh::Mesh::new(
        vec![[0.1, -0.2], [1.3, 0.4], [0.2, 0.9]],
        vec![0, 1, 2],
        vec![0, 1, 1, 2, 2, 0],
        vec![1, 1, 1],
    )
    .unwrap();
    let space = LagrangeSpace::new(&mesh, 1).unwrap();
    let area = space.measure(0);
    let alpha = 2.0 / 3.0;
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let (lhs, rhs) = trapezoid_identity(&space, 0, &[1.0, 2.0, 3.0], a, b).unwrap();
        assert!((lhs - rhs).abs() < 1e-13 * rhs.abs());
        // with the acute-angle stencil the right side is (1/3)(Σε)(−α|K|)
        assert!((rhs - 6.0 / 3.0 * (-alpha * area)).abs() < 1e-13);
    }
}

#[test]
fn suite_runs_clean_for_a_few_trials() {
    let r = dmp_suite(6, 5, 2024).unwrap();
    assert_eq!(r.violations, 0);
    assert_eq!(r.bound_violations, 0);
    assert!(r.min_coefficient >= -1e-12);
    assert!(r.max_row_sum_error <= 1e-12);
    assert!(r.control_violations > 0);
}

#[test]
fn corner_patch_where_the_coefficient_bound_is_not_guaranteed() {
    // Φ_j excludes ∇φ_j itself, so b_j ≥ 0 is not implied when |∇φ_j| on a
    // shared cell exceeds Φ_j; this trial has such a boundary corner
    let DmpTrial::Rotation(s, q) = dmp_trial(5, 17).unwrap() else {
        panic!("odd trials are two-dimensional");
    };
    let g = s.geometry();
    let tau = s.max_step(&q);
    let mat = s.step_matrix(&q, &s.viscosity(&q), tau);
    let c = g.fine_patch.shared_cells(0, 1)[0];
    let local = s.space().cell_dofs(c).iter().position(|&d| d == 1).unwrap();
    let grad = nodal_mhd::mesh::affine::norm(&s.space().bary_gradients(c)[local]);
    assert!(grad > g.phi[1]);
    assert!(mat.get(0, 1) < 0.0);
    // the maximum principle still holds on this data
    let (_, report) = s.run(&q, 10, 1.0).unwrap();
    assert!(report.iter().all(Vec::is_empty));
}

#[test]
fn inviscid_step_overshoots_a_jump() {
    let s = ScalarSolver::new(periodic_line(20), Arc::new(LinearAdvection { velocity: [1.0] })).unwrap();
    let q: Vec<f64> = (0..20).map(|i| if (5..10).contains(&i) { 1.0 } else { 0.0 }).collect();
    let (_, report) = s.run_inviscid(&q, 1, 0.5 * s.max_step(&q));
    assert!(!report[0].is_empty());
    let (_, report) = s.run(&q, 1, 1.0).unwrap();
    assert!(report[0].is_empty());
}

#[test]
fn non_p1_space_rejected() {
    let space = LagrangeSpace::new(&interval(4, 0.0, 1.0).unwrap(), 2).unwrap();
    assert!(ScalarSolver::new(space, Arc::new(Burgers)).is_err());
}

fn random_data(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5ca1a),
        ..ProptestConfig::default()
    })]

    #[test]
    fn burgers_preserves_local_maximum_principle(n in 8usize..48, mesh_seed in any::<u64>(), data_seed in any::<u64>()) {
        let mesh = perturbed_interval(n, 0.0, 1.0, 0.35, mesh_seed).unwrap().with_periodicity([Some(1.0)]).unwrap();
        let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(Burgers)).unwrap();
        let q0 = random_data(n, data_seed);
        let (q, report) = s.run(&q0, 8, 1.0).unwrap();
        prop_assert!(report.iter().all(Vec::is_empty));
        let (lo, hi) = q0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        prop_assert!(q.iter().all(|&v| v >= lo - 1e-12 * (hi - lo) && v <= hi + 1e-12 * (hi - lo)));
    }

    #[test]
    fn rotation_preserves_local_maximum_principle(n in 4usize..10, mesh_seed in any::<u64>(), data_seed in any::<u64>()) {
        let mesh = perturbed_rectangle(n, n, [-1.0, 1.0], [-1.0, 1.0], 0.3, mesh_seed).unwrap();
        let s = ScalarSolver::new(LagrangeSpace::new(&mesh, 1).unwrap(), Arc::new(RotatingAdvection)).unwrap();
        let q0 = random_data(s.space().ndof(), data_seed);
        let mat = s.step_matrix(&q0, &s.viscosity(&q0), s.max_step(&q0));
        for i in 0..mat.nrows() {
            let (_, vals) = mat.row(i);
            prop_assert!(vals.iter().all(|&v| v >= -1e-12));
            prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let (_, report) = s.run(&q0, 4, 1.0).unwrap();
        prop_assert!(report.iter().all(Vec::is_empty));
    }
}
