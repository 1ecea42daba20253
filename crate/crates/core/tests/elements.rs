use nodal_mhd::elements::{
    patch_indicator, reference_stencil, viscosity_constant, LagrangeSpace, NodalGeometry, SimplexQuadrature,
};
use nodal_mhd::mesh::{interval, perturbed_interval, perturbed_rectangle, rectangle, Mesh, PatchTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn partition_of_unity_at_quadrature_points() {
    let mesh2 = perturbed_rectangle(3, 3, [0.0, 1.0], [0.0, 1.0], 0.25, 1).unwrap();
    let mesh1 = perturbed_interval(5, 0.0, 1.0, 0.25, 1).unwrap();
    for k in 1..=3 {
        let s = LagrangeSpace::new(&mesh2, k).unwrap();
        let mut g = vec![[0.0; 2]; s.nloc()];
        for c in 0..s.num_cells() {
            for q in 0..s.quadrature().len() {
                assert!((s.values(q).iter().sum::<f64>() - 1.0).abs() < 1e-13);
                s.gradients(c, q, &mut g);
                let sum = g.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0], a[1] + v[1]]);
                assert!(sum[0].abs() < 1e-12 && sum[1].abs() < 1e-12);
            }
        }
        let s = LagrangeSpace::new(&mesh1, k).unwrap();
        let mut g = vec![[0.0; 1]; s.nloc()];
        for c in 0..s.num_cells() {
            for q in 0..s.quadrature().len() {
                assert!((s.values(q).iter().sum::<f64>() - 1.0).abs() < 1e-13);
                s.gradients(c, q, &mut g);
                assert!(g.iter().map(|v| v[0]).sum::<f64>().abs() < 1e-12);
            }
        }
    }
}

#[test]
fn degree_k_space_reproduces_polynomials() {
    let mesh = perturbed_rectangle(3, 2, [0.0, 1.0], [0.0, 1.0], 0.2, 4).unwrap();
    for k in 1..=3 {
        let s = LagrangeSpace::new(&mesh, k).unwrap();
        let f = |x: [f64; 2]| (0..=k).map(|p| x[0].powi(p as i32) * (1.0 - x[1]).powi((k - p) as i32)).sum::<f64>();
        let u = s.interpolate(f);
        let rule = SimplexQuadrature::new(2, 6);
        for c in 0..s.num_cells() {
            let verts = mesh.cell_coords(c);
            for q in 0..rule.len() {
                let x = rule.point(&verts, q);
                assert!((s.eval_field(&u, c, &rule.bary[q]) - f(x)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn lumped_mass_uniform_examples() {
    let h = 0.25;
    let s = LagrangeSpace::new(&interval(4, 0.0, 1.0).unwrap(), 1).unwrap();
    let m = s.lumped_mass();
    for (i, mi) in m.iter().enumerate() {
        let expected = if i == 0 || i == 4 { h / 2.0 } else { h };
        assert!((mi - expected).abs() < 1e-15);
    }
    let mesh = rectangle(4, 4, [0.0, 1.0], [0.0, 1.0]).unwrap();
    let s = LagrangeSpace::new(&mesh, 1).unwrap();
    let m = s.lumped_mass();
    let area = h * h / 2.0;
    for (i, mi) in m.iter().enumerate() {
        let nel = (0..mesh.num_cells()).filter(|&c| mesh.cell(c).contains(&i)).count();
        assert!((mi - nel as f64 * area / 3.0).abs() < 1e-15);
    }
}

#[test]
fn masses_sum_to_domain_measure() {
    let mesh = perturbed_rectangle(5, 4, [-1.0, 1.0], [0.0, 3.0], 0.3, 8)
        .unwrap()
        .with_periodicity([Some(2.0), None])
        .unwrap();
    for k in 1..=3 {
        let s = LagrangeSpace::new(&mesh, k).unwrap();
        let m = s.lumped_mass();
        assert!(rel(m.iter().sum(), 6.0) < 1e-12);
        let mass = s.consistent_mass();
        assert!(mass.asymmetry() < 1e-14);
        for (r, l) in mass.row_sums().iter().zip(&m) {
            assert!((r - l).abs() < 1e-12);
        }
        let g = NodalGeometry::new(&s).unwrap();
        assert!(rel(g.lumped_fine.iter().sum(), 6.0) < 1e-12);
        assert!(g.lumped_fine.iter().all(|&x| x > 0.0));
        assert!(g.phi.iter().all(|&x| x > 0.0));
        assert!(g.c.iter().all(|&x| x > 0.0));
    }
}

#[test]
fn unit_interval_consistent_mass() {
    let s = LagrangeSpace::new(&interval(1, 0.0, 1.0).unwrap(), 1).unwrap();
    let m = s.consistent_mass().to_dense();
    let exact = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
    for r in 0..2 {
        for c in 0..2 {
            assert!((m[r][c] - exact[r][c]).abs() < 1e-15);
        }
    }
}

fn fine_patch<const D: usize>(s: &LagrangeSpace<D>) -> PatchTable {
    PatchTable::new(s.ndof(), s.all_cell_dofs(), s.nloc(), s.measures())
}

#[test]
fn patch_indicator_uniform_1d() {
    let h = 0.125;
    let s = LagrangeSpace::new(&interval(8, 0.0, 1.0).unwrap(), 1).unwrap();
    let phi = patch_indicator(&s, &fine_patch(&s)).unwrap();
    assert!(phi.iter().all(|p| (p - 1.0 / h).abs() < 1e-12));
    let c = viscosity_constant(&fine_patch(&s), 1).unwrap();
    for ci in &c[1..8] {
        assert!((ci - 1.0 / (2.0 * h)).abs() < 1e-12);
    }
}

#[test]
fn patch_indicator_on_one_right_triangle() {
    // ∇φ_0 = (-1,-1), ∇φ_1 = (1,0), ∇φ_2 = (0,1)
    let mesh = Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![0, 1, 2],
        vec![0, 1, 1, 2, 2, 0],
        vec![1, 1, 1],
    )
    .unwrap();
    let s = LagrangeSpace::new(&mesh, 1).unwrap();
    let phi = patch_indicator(&s, &fine_patch(&s)).unwrap();
    let hand = [1.0, 2f64.sqrt(), 2f64.sqrt()];
    for i in 0..3 {
        assert!((phi[i] - hand[i]).abs() < 1e-14);
    }
}

#[test]
fn uniform_2d_viscosity_constant() {
    let h = 0.1;
    let mesh = rectangle(10, 10, [0.0, 1.0], [0.0, 1.0])
        .unwrap()
        .with_periodicity([Some(1.0), Some(1.0)])
        .unwrap();
    let s = LagrangeSpace::new(&mesh, 1).unwrap();
    let g = NodalGeometry::new(&s).unwrap();
    for i in 0..s.ndof() {
        assert_eq!(g.fine_patch.nel(i), 6);
        assert!(rel(g.c[i], 1.0 / (2.0 * h * h)) < 1e-12);
        // right-angle corners give |∇φ| = √2/h to some neighbour of every node
        assert!(rel(g.phi[i], 2f64.sqrt() / h) < 1e-12);
        assert!(rel(g.scale(i), 0.5 * g.phi[i]) < 1e-12);
    }
}

#[test]
fn viscosity_constant_scales_with_volume() {
    let mesh = perturbed_rectangle(4, 4, [0.0, 1.0], [0.0, 1.0], 0.3, 2).unwrap();
    let scaled = mesh.map_vertices(|x| [3.0 * x[0], 3.0 * x[1]]).unwrap();
    let a = NodalGeometry::new(&LagrangeSpace::new(&mesh, 2).unwrap()).unwrap();
    let b = NodalGeometry::new(&LagrangeSpace::new(&scaled, 2).unwrap()).unwrap();
    for i in 0..a.len() {
        assert!(rel(b.c[i], a.c[i] / 9.0) < 1e-12);
        assert!(rel(b.phi[i], a.phi[i] / 3.0) < 1e-12);
    }
}

#[test]
fn geometry_invariant_under_rigid_motion() {
    let mesh = perturbed_rectangle(5, 5, [0.0, 1.0], [0.0, 1.0], 0.3, 6).unwrap();
    let (s, c) = (0.7f64.sin(), 0.7f64.cos());
    let moved = mesh.map_vertices(|x| [c * x[0] - s * x[1] + 2.5, s * x[0] + c * x[1] - 1.0]).unwrap();
    for k in 1..=3 {
        let a = NodalGeometry::new(&LagrangeSpace::new(&mesh, k).unwrap()).unwrap();
        let b = NodalGeometry::new(&LagrangeSpace::new(&moved, k).unwrap()).unwrap();
        for i in 0..a.len() {
            assert!(rel(a.phi[i], b.phi[i]) < 1e-12);
            assert!(rel(a.c[i], b.c[i]) < 1e-12);
            assert!(rel(a.kappa[i], b.kappa[i]) < 1e-12);
        }
    }
}

#[test]
fn stencil_on_interval() {
    let mesh = interval(1, 0.0, 0.3).unwrap();
    let s = LagrangeSpace::new(&mesh, 1).unwrap();
    let st = reference_stencil(&s, 0).unwrap();
    let h = 0.3;
    assert!((st[0] - h).abs() < 1e-15 && (st[3] - h).abs() < 1e-15);
    assert!((st[1] + h).abs() < 1e-15 && (st[2] + h).abs() < 1e-15);
}

fn random_triangle(rng: &mut ChaCha8Rng) -> Mesh<2> {
    loop {
        let v: Vec<[f64; 2]> = (0..3).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let area = 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
        if area.abs() > 1e-2 {
            return Mesh::new(v, vec![0, 1, 2], vec![0, 1, 1, 2, 2, 0], vec![1, 1, 1]).unwrap();
        }
    }
}

#[test]
fn stencil_constants_on_random_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (alpha, gamma) = (2.0 / 3.0, 4.0 / 3.0);
    for _ in 0..100 {
        let mesh = random_triangle(&mut rng);
        let s = LagrangeSpace::new(&mesh, 1).unwrap();
        let st = reference_stencil(&s, 0).unwrap();
        let k = mesh.measure(0);
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { gamma * k } else { -alpha * k };
                assert!(rel(st[a * 3 + b], expected) < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_exact_on_random_polynomials(deg in 0usize..=9, seed in 0u64..1000) {
        // oracle: ∫_T s^a t^b = a! b! / (a + b + 2)!
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fact = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
        let mut coeffs = Vec::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                coeffs.push((a, b, rng.gen_range(-1.0..1.0)));
            }
        }
        let exact: f64 = coeffs.iter().map(|&(a, b, c)| c * fact(a) * fact(b) / fact(a + b + 2)).sum();
        let rule = SimplexQuadrature::new(2, deg);
        let approx: f64 = rule.bary.iter().zip(&rule.weights).map(|(l, w)| {
            w * 0.5 * coeffs.iter().map(|&(a, b, c)| c * l[1].powi(a as i32) * l[2].powi(b as i32)).sum::<f64>()
        }).sum();
        prop_assert!((approx - exact).abs() < 1e-13);
        let line = SimplexQuadrature::new(1, deg);
        let c1: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let exact1: f64 = c1.iter().enumerate().map(|(p, c)| c / (p as f64 + 1.0)).sum();
        let approx1: f64 = line.bary.iter().zip(&line.weights)
            .map(|(l, w)| w * c1.iter().enumerate().map(|(p, c)| c * l[1].powi(p as i32)).sum::<f64>())
            .sum();
        prop_assert!((approx1 - exact1).abs() < 1e-13);
    }
}
