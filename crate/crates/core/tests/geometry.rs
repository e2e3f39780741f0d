use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::Vector3;
use proptest::prelude::*;

use nfscan::geometry::{
    generate_wire_library, mesh_wire, mesh_wire_refined, parse_library_manifest, write_library_manifest,
    EndCondition, LibraryConfig, Placement, WireGeometry, LABEL_CLOSED, LABEL_OPEN, POSITION_TOL,
};
use nfscan::{Error, SPEED_OF_LIGHT};

const F: f64 = 1e9;

fn straight(length: f64, radius: f64) -> WireGeometry {
    let v = vec![Vector3::new(0.1, 0.1, 0.01), Vector3::new(0.1 + length, 0.1, 0.01)];
    WireGeometry::new("straight", v, false, radius, Placement::Middle, 0).unwrap()
}

#[test]
fn seed_seven_gives_32_shapes_per_class() {
    let lib = generate_wire_library(&LibraryConfig::default(), 7).unwrap();
    assert_eq!(lib.len(), 64);
    assert_eq!(lib.iter().filter(|g| g.closed && g.label == LABEL_CLOSED).count(), 32);
    assert_eq!(lib.iter().filter(|g| !g.closed && g.label == LABEL_OPEN).count(), 32);
    let ids: BTreeSet<&str> = lib.iter().map(|g| g.id.as_str()).collect();
    assert_eq!(ids.len(), 64);
}

#[test]
fn same_seed_gives_identical_vertices() {
    let a = generate_wire_library(&LibraryConfig::default(), 7).unwrap();
    let b = generate_wire_library(&LibraryConfig::default(), 7).unwrap();
    assert_eq!(a, b);
    let c = generate_wire_library(&LibraryConfig::default(), 8).unwrap();
    assert_ne!(a, c);
}

#[test]
fn every_vertex_lies_inside_the_footprint_at_wire_height() {
    let lib = generate_wire_library(&LibraryConfig::default(), 7).unwrap();
    for g in &lib {
        for v in &g.vertices {
            assert!((0.0..=0.3).contains(&v.x) && (0.0..=0.3).contains(&v.y), "{}: {v:?}", g.id);
            assert!((v.z - 0.01).abs() <= POSITION_TOL, "{}: {v:?}", g.id);
        }
    }
}

#[test]
fn all_source_placements_occur() {
    let mut seen = BTreeSet::new();
    for seed in 0..3 {
        for g in generate_wire_library(&LibraryConfig::default(), seed).unwrap() {
            seen.insert((g.closed, g.placement.as_str()));
            if g.closed {
                assert_ne!(g.placement, Placement::Ending, "{}", g.id);
            }
        }
    }
    for p in ["middle", "corner"] {
        assert!(seen.contains(&(true, p)), "closed {p}");
    }
    for p in ["middle", "corner", "ending"] {
        assert!(seen.contains(&(false, p)), "open {p}");
    }
}

#[test]
fn footprint_smaller_than_a_side_is_rejected() {
    let cfg = LibraryConfig { extent: 0.05, ..LibraryConfig::default() };
    match generate_wire_library(&cfg, 0) {
        Err(Error::Config(msg)) => assert!(msg.contains("extent"), "{msg}"),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn ten_centimetre_wire_gets_at_least_seven_segments() {
    let mesh = mesh_wire(&straight(0.10, 0.001), F).unwrap();
    assert!(mesh.segments.len() >= 7, "{}", mesh.segments.len());
    assert!(mesh.segments.iter().all(|s| s.length <= 0.015));
    assert_eq!(mesh.basis_count, mesh.segments.len() - 1);
    assert_eq!(mesh.endpoint_condition, EndCondition::VanishingEnds);
}

#[test]
fn thirty_millimetre_radius_cannot_be_meshed() {
    match mesh_wire(&straight(0.10, 0.030), F) {
        Err(Error::Mesh { id, reason }) => {
            assert_eq!(id, "straight");
            assert!(reason.contains("radius"), "{reason}");
        }
        other => panic!("expected mesh error, got {other:?}"),
    }
}

#[test]
fn square_loop_basis_count_equals_segment_count() {
    for f in [1e8, 5e8, 1e9, 3e9] {
        let v = vec![
            Vector3::new(0.1, 0.1, 0.01),
            Vector3::new(0.2, 0.1, 0.01),
            Vector3::new(0.2, 0.2, 0.01),
            Vector3::new(0.1, 0.2, 0.01),
            Vector3::new(0.1, 0.1, 0.01),
        ];
        let g = WireGeometry::new("square", v, true, 0.0005, Placement::Corner, 2).unwrap();
        let mesh = mesh_wire(&g, f).unwrap();
        assert_eq!(mesh.basis_count, mesh.segments.len());
        assert_eq!(mesh.endpoint_condition, EndCondition::Periodic);
    }
}

#[test]
fn invalid_geometries_are_rejected() {
    let z = 0.01;
    let open_closed = vec![Vector3::new(0.0, 0.0, z), Vector3::new(0.1, 0.0, z), Vector3::new(0.0, 0.0, z)];
    assert!(matches!(
        WireGeometry::new("a", open_closed, false, 0.001, Placement::Middle, 0),
        Err(Error::Geometry { .. })
    ));
    let gap = vec![
        Vector3::new(0.0, 0.0, z),
        Vector3::new(0.1, 0.0, z),
        Vector3::new(0.1, 0.1, z),
        Vector3::new(0.0, 0.001, z),
    ];
    assert!(WireGeometry::new("b", gap, true, 0.001, Placement::Middle, 0).is_err());
    let tilted = vec![Vector3::new(0.0, 0.0, z), Vector3::new(0.1, 0.0, 2.0 * z)];
    assert!(WireGeometry::new("c", tilted, false, 0.001, Placement::Middle, 0).is_err());
    let on_ground = vec![Vector3::new(0.0, 0.0, 0.0), Vector3::new(0.1, 0.0, 0.0)];
    assert!(WireGeometry::new("d", on_ground, false, 0.001, Placement::Middle, 0).is_err());
    let fat = vec![Vector3::new(0.0, 0.0, z), Vector3::new(0.1, 0.0, z)];
    assert!(WireGeometry::new("e", fat, false, 0.2, Placement::Middle, 0).is_err());
}

#[test]
fn manifest_round_trips_exactly() {
    let lib = generate_wire_library(&LibraryConfig::default(), 4).unwrap();
    let text = write_library_manifest(&lib);
    let back = parse_library_manifest(&text, Path::new("library.txt")).unwrap();
    assert_eq!(back, lib);
}

#[test]
fn manifest_without_header_is_a_format_error() {
    let err = parse_library_manifest("shape id=x\n", Path::new("lib.txt")).unwrap_err();
    assert!(matches!(err, Error::Format { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Partition, label consistency and mesh invariants for any seed.
    #[test]
    fn library_and_mesh_invariants_hold(seed in any::<u64>(), refinement in 1usize..3) {
        let cfg = LibraryConfig::default();
        let lib = generate_wire_library(&cfg, seed).unwrap();
        prop_assert_eq!(lib.iter().filter(|g| g.label == LABEL_CLOSED).count(), 32);
        prop_assert_eq!(lib.iter().filter(|g| g.label == LABEL_OPEN).count(), 32);
        let max_len = SPEED_OF_LIGHT / F / 20.0;
        for g in &lib {
            let gap = (g.vertices[0] - g.vertices[g.vertices.len() - 1]).norm();
            prop_assert_eq!(g.label == LABEL_CLOSED, gap <= POSITION_TOL);
            prop_assert!(g.vertices.iter().all(|v| (0.0..=cfg.extent).contains(&v.x) && (0.0..=cfg.extent).contains(&v.y)));
            let mesh = match mesh_wire_refined(g, F, refinement) {
                Ok(m) => m,
                // Refinement may legitimately push short fillet chords below the floor.
                Err(Error::Mesh { .. }) if refinement > 1 => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{}: {e}", g.id))),
            };
            for s in &mesh.segments {
                prop_assert!(s.length >= 0.004 - 1e-12 && s.length <= max_len + 1e-12, "{}: {}", g.id, s.length);
                prop_assert!(s.length >= 4.0 * g.radius - 1e-12);
            }
            let expected = if g.closed { mesh.segments.len() } else { mesh.segments.len() - 1 };
            prop_assert_eq!(mesh.basis_count, expected);
            prop_assert!(mesh.source_basis < mesh.basis_count);
            // Every vertex is the start or end of some segment.
            for v in &g.vertices {
                prop_assert!(mesh.segments.iter().any(|s| (s.start - v).norm() < 1e-12 || (s.end - v).norm() < 1e-12));
            }
            // Consecutive segments are connected.
            for w in mesh.segments.windows(2) {
                prop_assert!((w[0].end - w[1].start).norm() < 1e-12);
            }
        }
    }
}
