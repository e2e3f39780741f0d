mod common;

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfscan::field::{
    compute_field_map, field_magnitude_db, fields_at, parse_grid_text, write_grid_text, CVec3, Combine, FieldKind,
    FieldMap, Filament, GridText, GridUnits, ProbeGrid, RealGrid, DB_FLOOR,
};
use nfscan::geometry::{generate_wire_library, mesh_wire_refined, LibraryConfig, Placement, WireGeometry};
use nfscan::mom::quadrature::{GL8_NODES, GL8_WEIGHTS};
use nfscan::mom::{assemble_impedance_matrix, solve_currents, solve_geometry, CurrentSolution, SolveConfig};
use nfscan::Error;

use common::oracles::{dipole_kernel, hertzian};

type V3 = Vector3<Complex64>;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn to_v3(a: &CVec3) -> V3 {
    V3::new(a[0], a[1], a[2])
}

fn rel_err(got: &V3, want: &V3) -> f64 {
    (got - want).norm() / want.norm()
}

#[test]
fn short_segment_over_ground_matches_dipole_and_image() {
    let f = 1e9;
    let dl = 2e-4;
    let i0 = Complex64::new(0.7, -0.3);
    let at = Vector3::new(0.12, 0.15, 0.01);
    let dir = Vector3::new(0.6, 0.8, 0.0);
    let source = Filament::new(at - dir * (dl / 2.0), at + dir * (dl / 2.0), i0, i0);
    let filaments = vec![source.clone(), source.image()];
    let image_at = Vector3::new(at.x, at.y, -at.z);
    let image_dir = Vector3::new(-dir.x, -dir.y, dir.z);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let obs = loop {
            let p = Vector3::new(rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3), rng.gen_range(0.005..0.05));
            if (p - at).norm() > 0.01 {
                break p;
            }
        };
        let (e, h) = fields_at(&filaments, &obs, f);
        let (e1, h1) = hertzian(i0 * dl, &dir, &at, &obs, f);
        let (e2, h2) = hertzian(i0 * dl, &image_dir, &image_at, &obs, f);
        let (e_ref, h_ref) = (e1 + e2, h1 + h2);
        assert!(rel_err(&to_v3(&e), &e_ref) < 0.01, "E at {obs:?}: {:.3e}", rel_err(&to_v3(&e), &e_ref));
        assert!(rel_err(&to_v3(&h), &h_ref) < 0.01, "H at {obs:?}: {:.3e}", rel_err(&to_v3(&h), &h_ref));
    }
}

#[test]
fn small_loop_has_magnetic_dipole_pattern() {
    // The feed makes the current slightly non-uniform, which adds an in-plane
    // electric dipole of relative strength ~ k·side; keep the loop tiny.
    let cfg = SolveConfig { frequency: 10e6, source_voltage: 1.0, ground_plane: false };
    let lambda = cfg.wavelength();
    let k = cfg.wavenumber();
    let s = 0.002 * lambda;
    let v = vec![
        Vector3::new(-s / 2.0, -s / 2.0, 1.0),
        Vector3::new(s / 2.0, -s / 2.0, 1.0),
        Vector3::new(s / 2.0, s / 2.0, 1.0),
        Vector3::new(-s / 2.0, s / 2.0, 1.0),
        Vector3::new(-s / 2.0, -s / 2.0, 1.0),
    ];
    let centre = Vector3::new(0.0, 0.0, 1.0);
    let g = WireGeometry::new("small-loop", v, true, 0.001, Placement::Middle, 0).unwrap();
    let mesh = mesh_wire_refined(&g, cfg.frequency, 2).unwrap();
    let sol = solve_currents(&assemble_impedance_matrix(&mesh, &cfg), &mesh, &cfg).unwrap();
    let filaments = nfscan::field::solution_filaments(&sol, false);

    let mean_current = sol.coefficients.iter().sum::<Complex64>() / sol.coefficients.len() as f64;
    let m = V3::new(c(0.0), c(0.0), mean_current * s * s);
    let radius = 2.0 * lambda;
    let mut got = Vec::new();
    let mut want = Vec::new();
    for step in 0..24 {
        let theta = PI * (step as f64 + 0.5) / 24.0;
        let phi = 0.3 * step as f64;
        let offset = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()) * radius;
        let (_, h) = fields_at(&filaments, &(centre + offset), cfg.frequency);
        got.push(to_v3(&h).norm());
        want.push(dipole_kernel(&m, &offset, k).norm());
    }
    let gmax = got.iter().copied().fold(0.0, f64::max);
    let wmax = want.iter().copied().fold(0.0, f64::max);
    for (a, b) in got.iter().zip(&want) {
        let (a, b) = (a / gmax, b / wmax);
        assert!((a - b).abs() / b < 0.03, "pattern {a} vs {b}");
    }
}

/// Short centre-fed dipole solved by the moment method, laid along `dir`
/// about `centre`.
fn short_dipole(centre: Vector3<f64>, dir: Vector3<f64>, cfg: &SolveConfig) -> Vec<Filament> {
    let half = 0.05;
    let v = vec![centre - dir * half, centre + dir * half];
    let g = WireGeometry::new("probe", v, false, 0.0005, Placement::Middle, 0).unwrap();
    let sol = solve_geometry(&g, cfg).unwrap();
    nfscan::field::solution_filaments(&sol, false)
}

/// Reaction `∫ E_a · J_b dl`: the field of `a` integrated against the
/// current of `b` (8-point Gauss-Legendre per filament).
fn reaction(a: &[Filament], b: &[Filament], f: f64) -> Complex64 {
    let mut acc = c(0.0);
    for fil in b {
        let seg = &fil.segment;
        for (t, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            let (e, _) = fields_at(a, &seg.point_at(*t), f);
            let current = fil.current_start + (fil.current_end - fil.current_start) * *t;
            acc += to_v3(&e).dot(&seg.tangent.map(c)) * current * (w * seg.length);
        }
    }
    acc
}

#[test]
fn swapping_source_and_probe_is_reciprocal() {
    let cfg = SolveConfig { frequency: 1e9, source_voltage: 1.0, ground_plane: false };
    let cases = [
        (Vector3::new(0.0, 0.0, 0.5), Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.05, 0.25, 0.6), Vector3::new(0.0, 1.0, 0.0)),
        (Vector3::new(0.1, 0.1, 0.3), Vector3::new(0.6, 0.8, 0.0), Vector3::new(0.4, -0.2, 0.7), Vector3::new(0.8, -0.6, 0.0)),
    ];
    for (p1, u1, p2, u2) in cases {
        let (d1, d2) = (short_dipole(p1, u1, &cfg), short_dipole(p2, u2, &cfg));
        let a = reaction(&d1, &d2, cfg.frequency);
        let b = reaction(&d2, &d1, cfg.frequency);
        assert!((a - b).norm() / a.norm() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn tangential_e_vanishes_on_the_ground_plane() {
    let cfg = SolveConfig::default();
    let lib = generate_wire_library(&LibraryConfig::default(), 0).unwrap();
    let grid = ProbeGrid::default();
    for g in &lib {
        let sol = solve_geometry(g, &cfg).unwrap();
        let scan = compute_field_map(&sol, &grid, FieldKind::E, &cfg).unwrap();
        let reference = scan.samples.iter().map(|v| to_v3(v).norm()).fold(0.0, f64::max);
        let ground = compute_field_map(&sol, &grid.with_height(0.0), FieldKind::E, &cfg).unwrap();
        for v in &ground.samples {
            let tangential = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            let db = 20.0 * (tangential / reference).log10();
            assert!(db < -60.0, "{}: tangential E at {db:.1} dB", g.id);
        }
    }
}

fn library_solution(index: usize) -> (CurrentSolution, SolveConfig) {
    let cfg = SolveConfig::default();
    let lib = generate_wire_library(&LibraryConfig::default(), 2).unwrap();
    (solve_geometry(&lib[index], &cfg).unwrap(), cfg)
}

#[test]
fn probe_inside_wire_is_reported_with_its_index() {
    let (sol, cfg) = library_solution(5);
    let seg = &sol.mesh.segments[0];
    let mid = seg.point_at(0.5);
    let grid = ProbeGrid { nx: 2, ny: 2, x_min: mid.x, y_min: mid.y, extent_x: 0.05, extent_y: 0.05, plane_height: mid.z };
    match compute_field_map(&sol, &grid, FieldKind::H, &cfg) {
        Err(Error::ProbeInsideWire { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected probe error, got {other:?}"),
    }
}

#[test]
fn probe_positions_follow_the_fixed_ordering() {
    let grid = ProbeGrid::default();
    assert_eq!(grid.position(0, 0), Vector3::new(0.0, 0.0, 0.02));
    let p = grid.position(3, 7);
    assert!((p.x - 3.0 * 0.3 / 29.0).abs() < 1e-15);
    assert!((p.y - 7.0 * 0.3 / 29.0).abs() < 1e-15);
    let (sol, cfg) = library_solution(0);
    let small = ProbeGrid { nx: 3, ny: 4, ..grid };
    let map = compute_field_map(&sol, &small, FieldKind::H, &cfg).unwrap();
    let filaments = nfscan::field::solution_filaments(&sol, true);
    for i in 0..3 {
        for j in 0..4 {
            let (_, h) = fields_at(&filaments, &small.position(i, j), cfg.frequency);
            assert_eq!(&h, map.sample(i, j));
            assert_eq!(map.samples[i * 4 + j], h);
        }
    }
}

#[test]
fn db_map_has_zero_maximum_and_floor() {
    let (sol, cfg) = library_solution(40);
    let map = compute_field_map(&sol, &ProbeGrid::default(), FieldKind::H, &cfg).unwrap();
    for combine in Combine::ALL {
        let db = field_magnitude_db(&map, combine).unwrap();
        let max = db.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 0.0);
        assert!(db.values.iter().all(|v| (DB_FLOOR..=0.0).contains(v)));
    }
}

#[test]
fn total_magnitude_dominates_each_component() {
    let (sol, cfg) = library_solution(17);
    let map = compute_field_map(&sol, &ProbeGrid::default(), FieldKind::E, &cfg).unwrap();
    for v in &map.samples {
        let total = to_v3(v).norm();
        for comp in v {
            assert!(total >= comp.norm());
        }
    }
}

fn uniform_map(value: CVec3) -> FieldMap {
    let grid = ProbeGrid { nx: 4, ny: 5, ..ProbeGrid::default() };
    FieldMap { geometry_id: "u".into(), kind: FieldKind::E, samples: vec![value; grid.len()], grid }
}

#[test]
fn uniform_map_is_zero_db_everywhere() {
    let db = field_magnitude_db(&uniform_map([c(1.0), Complex64::new(0.0, 2.0), c(-0.5)]), Combine::Total).unwrap();
    assert!(db.values.iter().all(|&v| v == 0.0));
}

#[test]
fn all_zero_map_is_an_error() {
    let zero = c(0.0);
    assert!(matches!(field_magnitude_db(&uniform_map([zero; 3]), Combine::Total), Err(Error::ZeroField(_))));
}

#[test]
fn grid_text_round_trips() {
    let values: Vec<f64> = (0..12).map(|i| -(i as f64) * 4.3 / 7.0).collect();
    let grid = GridText {
        shape: "closed-03".into(),
        kind: Some(FieldKind::H),
        combine: Some(Combine::Z),
        units: GridUnits::Db,
        probes: Some(ProbeGrid { nx: 3, ny: 4, ..ProbeGrid::default() }),
        data: RealGrid::new(3, 4, values),
    };
    let text = write_grid_text(&grid);
    let back = parse_grid_text(&text, Path::new("x.grid")).unwrap();
    assert_eq!(back, grid);
}

#[test]
fn malformed_grid_text_is_a_format_error() {
    let err = parse_grid_text("# nfscan grid v1\nshape a\n", Path::new("bad.grid")).unwrap_err();
    assert!(matches!(err, Error::Format { .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Scaling the currents by α scales every sample by α; the dB map is
    /// unchanged.
    #[test]
    fn fields_are_linear_in_the_currents(re in -3.0f64..3.0, im in -3.0f64..3.0, index in 0usize..64) {
        let alpha = Complex64::new(re, im);
        prop_assume!(alpha.norm() > 1e-3);
        let (sol, cfg) = library_solution(index);
        let mut scaled = sol.clone();
        for x in &mut scaled.coefficients {
            *x *= alpha;
        }
        let grid = ProbeGrid { nx: 6, ny: 6, ..ProbeGrid::default() };
        for kind in [FieldKind::E, FieldKind::H] {
            let a = compute_field_map(&sol, &grid, kind, &cfg).unwrap();
            let b = compute_field_map(&scaled, &grid, kind, &cfg).unwrap();
            let expect = a.scaled(alpha);
            for (x, y) in b.samples.iter().zip(&expect.samples) {
                prop_assert!(rel_err(&to_v3(x), &to_v3(y)) < 1e-12);
            }
            let da = field_magnitude_db(&a, Combine::Total).unwrap();
            let db = field_magnitude_db(&b, Combine::Total).unwrap();
            for (x, y) in da.values.iter().zip(&db.values) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
