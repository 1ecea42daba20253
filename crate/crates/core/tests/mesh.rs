use nodal_mhd::mesh::{
    affine, build_fine_submesh, interval, perturbed_interval, perturbed_rectangle, read_mesh, rectangle, write_mesh,
    Mesh, PatchTable,
};
use proptest::prelude::*;

fn one_triangle() -> Mesh<2> {
    Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![0, 1, 2],
        vec![0, 1, 1, 2, 2, 0],
        vec![1, 1, 1],
    )
    .unwrap()
}

fn vertex_patch(mesh: &Mesh<2>) -> PatchTable {
    let cells: Vec<usize> = (0..mesh.num_cells()).flat_map(|c| mesh.cell(c).to_vec()).collect();
    let measures: Vec<f64> = (0..mesh.num_cells()).map(|c| mesh.measure(c)).collect();
    PatchTable::new(mesh.num_vertices(), &cells, 3, &measures)
}

#[test]
fn fine_submesh_of_degree_one_is_identity() {
    let mesh = perturbed_rectangle(5, 4, [0.0, 1.0], [0.0, 1.0], 0.2, 3).unwrap();
    let fine = build_fine_submesh(&mesh, 1).unwrap();
    assert_eq!(fine.vertices(), mesh.vertices());
    for c in 0..mesh.num_cells() {
        assert_eq!(fine.cell(c), mesh.cell(c));
    }
}

#[test]
fn fine_submesh_counts_on_one_triangle() {
    let t = one_triangle();
    let p2 = build_fine_submesh(&t, 2).unwrap();
    assert_eq!((p2.num_vertices(), p2.num_cells()), (6, 4));
    let p3 = build_fine_submesh(&t, 3).unwrap();
    assert_eq!((p3.num_vertices(), p3.num_cells()), (10, 9));
    assert_eq!(p3.num_facets(), 9);
}

#[test]
fn fine_submesh_rejects_degree_four() {
    assert!(build_fine_submesh(&one_triangle(), 4).is_err());
}

#[test]
fn shared_edge_nodes_are_merged() {
    // 2×1 rectangle: 6 vertices, 4 cells, 9 edges; P3 adds 2 per edge and 1 per cell
    let mesh = rectangle(2, 1, [0.0, 2.0], [0.0, 1.0]).unwrap();
    let fine = build_fine_submesh(&mesh, 3).unwrap();
    assert_eq!(fine.num_vertices(), 6 + 2 * 9 + 4);
}

#[test]
fn periodic_images_propagate_to_fine_nodes() {
    let mesh = perturbed_rectangle(4, 3, [0.0, 2.0], [0.0, 1.0], 0.2, 11)
        .unwrap()
        .with_periodicity([Some(2.0), Some(1.0)])
        .unwrap();
    let fine = build_fine_submesh(&mesh, 3).unwrap();
    for v in 0..fine.num_vertices() {
        let x = fine.vertex(v);
        let r = fine.vertex(fine.representative(v));
        if (x[0] - 2.0).abs() < 1e-12 || (x[1] - 1.0).abs() < 1e-12 {
            assert_ne!(fine.representative(v), v);
        } else {
            assert_eq!(fine.representative(v), v);
        }
        assert!(r[0] < 2.0 - 1e-12 && r[1] < 1.0 - 1e-12);
    }
}

#[test]
fn uniform_mesh_quality_is_one() {
    let mesh = rectangle(6, 6, [0.0, 1.0], [0.0, 1.0]).unwrap();
    let patch = vertex_patch(&mesh);
    for i in 0..mesh.num_vertices() {
        assert!((patch.mesh_quality(i).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mesh_quality_matches_enumeration() {
    let mesh = perturbed_rectangle(7, 5, [0.0, 1.0], [0.0, 1.0], 0.3, 5).unwrap();
    let patch = vertex_patch(&mesh);
    for i in 0..mesh.num_vertices() {
        let areas: Vec<f64> = (0..mesh.num_cells())
            .filter(|&c| mesh.cell(c).contains(&i))
            .map(|c| {
                let v = mesh.cell_coords(c);
                0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs()
            })
            .collect();
        let max = areas.iter().cloned().fold(0.0, f64::max);
        let min = areas.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((patch.mesh_quality(i).unwrap() - max / min).abs() < 1e-12 * max / min);
        assert_eq!(patch.nel(i), areas.len());
    }
}

#[test]
fn io_round_trip() {
    let mesh = perturbed_rectangle(3, 2, [0.0, 1.0], [0.0, 1.0], 0.25, 9).unwrap();
    let mut buf = Vec::new();
    write_mesh(&mesh, &mut buf).unwrap();
    let back: Mesh<2> = read_mesh(buf.as_slice()).unwrap();
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.num_facets(), mesh.num_facets());
    for c in 0..mesh.num_cells() {
        assert_eq!(back.cell(c), mesh.cell(c));
    }
    let line = interval(3, 0.0, 1.0).unwrap();
    let mut buf = Vec::new();
    write_mesh(&line, &mut buf).unwrap();
    assert!(read_mesh::<2>(buf.as_slice()).is_err());
    assert_eq!(read_mesh::<1>(buf.as_slice()).unwrap().num_cells(), 3);
}

#[test]
fn io_reports_bad_lines() {
    let text = "2 3 1\n0 0\n1 0\n0 x\n0 1 2\n";
    let err = read_mesh::<2>(text.as_bytes()).unwrap_err();
    assert!(err.to_string().contains("line 4"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sub_simplex_measures_sum_to_parent(seed in 0u64..10_000, k in 1usize..=3, nx in 1usize..6, ny in 1usize..6) {
        let mesh = perturbed_rectangle(nx, ny, [0.0, 1.3], [-0.4, 0.9], 0.3, seed).unwrap();
        let fine = build_fine_submesh(&mesh, k).unwrap();
        let kd = k * k;
        for c in 0..mesh.num_cells() {
            let sum: f64 = (0..kd).map(|s| fine.measure(c * kd + s)).sum();
            prop_assert!((sum - mesh.measure(c)).abs() <= 1e-12 * mesh.measure(c));
        }
        let line = perturbed_interval(nx + 2, -1.0, 2.0, 0.3, seed).unwrap();
        let fine = build_fine_submesh(&line, k).unwrap();
        for c in 0..line.num_cells() {
            let sum: f64 = (0..k).map(|s| fine.measure(c * k + s)).sum();
            prop_assert!((sum - line.measure(c)).abs() <= 1e-12 * line.measure(c));
        }
    }

    #[test]
    fn jacobian_maps_reference_vertices(seed in 0u64..10_000) {
        let mesh = perturbed_rectangle(4, 4, [0.0, 1.0], [0.0, 1.0], 0.3, seed).unwrap();
        let reference = affine::equilateral_vertices::<2>();
        let ref_area = 3f64.sqrt() / 4.0;
        for c in 0..mesh.num_cells() {
            let j = mesh.equilateral_jacobian(c).unwrap();
            let b = mesh.equilateral_offset(c);
            for (m, xh) in reference.iter().enumerate() {
                let x = affine::mat_vec(&j, xh);
                let v = mesh.vertex(mesh.cell(c)[m]);
                prop_assert!((x[0] + b[0] - v[0]).abs() < 1e-12 && (x[1] + b[1] - v[1]).abs() < 1e-12);
            }
            prop_assert!((affine::det(&j).abs() - mesh.measure(c) / ref_area).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_adjacency_is_symmetric(seed in 0u64..10_000, nx in 1usize..8, ny in 1usize..8) {
        let mesh = perturbed_rectangle(nx, ny, [0.0, 1.0], [0.0, 1.0], 0.3, seed).unwrap();
        let patch = vertex_patch(&mesh);
        for i in 0..mesh.num_vertices() {
            prop_assert!(patch.neighbors(i).contains(&i));
            for &j in patch.neighbors(i) {
                prop_assert!(patch.neighbors(j).contains(&i));
            }
            let count = (0..mesh.num_cells()).filter(|&c| mesh.cell(c).contains(&i)).count();
            prop_assert_eq!(patch.nel(i), count);
        }
    }
}
