use peeling::boltzmann::DiskSampler;
use peeling::chains::replica_rng;
use peeling::enumeration::hole_weight_f64;
use peeling::kernel::PeelEvent;
use peeling::mapbuild::*;
use peeling::Error;

#[test]
fn first_growth_glues_a_triangle() {
    let mut map = HalfEdgeMap::trivial();
    let mut rng = replica_rng(0, 0);
    let out = apply_peel(&mut map, 0, PeelEvent::C, &mut OpenHoles, &mut rng).unwrap();
    map.validate(false).unwrap();
    assert_eq!(out.perimeter, 3);
    assert_eq!(map.face_degree(map.face(out.revealed.boundary[0])), 3);
    assert_eq!(map.vertex_count() - 3, 0);
}

#[test]
fn empty_left_swallow_at_three() {
    let mut map = HalfEdgeMap::trivial();
    let mut rng = replica_rng(0, 0);
    let first = apply_peel(&mut map, 0, PeelEvent::C, &mut EmptyHoles, &mut rng).unwrap();
    let e = first.revealed.boundary[1];
    let out = apply_peel(&mut map, e, PeelEvent::L(1), &mut EmptyHoles, &mut rng).unwrap();
    map.validate(false).unwrap();
    assert_eq!(out.perimeter, 2);
    let outer = map.face(out.revealed.boundary[0]);
    assert_eq!(map.face_degree(outer), 2);
    // The revealed triangle takes two edges of the old boundary: the peeled one and the glued one.
    let (t0, t) = (first.revealed.face, out.revealed.face);
    let shared = map
        .face_cycle(t)
        .iter()
        .filter(|&&h| map.face(map.twin(h)) == t0)
        .count();
    assert_eq!(shared, 2);
}

#[test]
fn inadmissible_events_are_rejected() {
    let mut map = HalfEdgeMap::trivial();
    let mut rng = replica_rng(0, 0);
    let err = apply_peel(&mut map, 0, PeelEvent::R(1), &mut OpenHoles, &mut rng).unwrap_err();
    assert!(matches!(err, Error::Argument(_)));
    assert!(matches!(
        EmptyHoles.fill(&mut HalfEdgeMap::polygon(3).unwrap(), 0, &mut rng),
        Err(Error::Argument(_))
    ));
}

#[test]
fn layers_match_the_chain_and_the_sandwich() {
    for seed in 0..3 {
        let mut rng = replica_rng(11, seed);
        let mut explorer = LayerExplorer::new(DiskSampler::default()).with_checks();
        for _ in 0..10_000 {
            explorer.step(&mut rng).unwrap();
            let (exact, formula) = (
                explorer.layer_edges_absorbed(),
                explorer.layer_edges_formula(),
            );
            assert!(
                exact.abs_diff(formula) <= 1,
                "A map {exact} vs formula {formula}"
            );
        }
        explorer.map().validate(false).unwrap();
        explorer.verify_labels().unwrap();
        assert!(explorer.layer() >= 3);
    }
}

#[test]
fn boundary_at_sigma_is_one_sphere() {
    let mut rng = replica_rng(12, 0);
    let mut explorer = LayerExplorer::new(DiskSampler::default());
    let mut seen = 0;
    while explorer.layer() < 8 {
        explorer.step(&mut rng).unwrap();
        if explorer.layer() > seen {
            seen = explorer.layer();
            let map = explorer.map();
            let bfs = map.distances_from(map.root_vertex());
            let outer = map.face(explorer.next_edge());
            for h in map.face_cycle(outer) {
                assert_eq!(bfs[map.origin(h) as usize], seen);
            }
            let hull = hull_decompose(map, seen).unwrap();
            assert_eq!(hull.hull_boundary, Some(explorer.perimeter()));
            assert_eq!(hull.hull.len(), map.polygon_count());
            assert!(hull.holes.iter().all(|&l| l >= 2));
        }
    }
}

#[test]
fn open_holes_leave_the_ball_undetermined() {
    let mut rng = replica_rng(13, 0);
    let mut explorer = LayerExplorer::new(OpenHoles);
    while explorer.layer() < 4 {
        explorer.step(&mut rng).unwrap();
    }
    let has_hole = explorer
        .map()
        .faces()
        .any(|f| explorer.map().face_kind(f) == FaceKind::Hole);
    let result = hull_decompose(explorer.map(), 4);
    if has_hole {
        assert!(matches!(result, Err(Error::Undetermined(_))));
    }
    assert!(matches!(
        hull_decompose(explorer.map(), 6),
        Err(Error::Undetermined(_))
    ));
}

#[test]
fn radius_zero_and_exhausted_spheres() {
    let mut rng = replica_rng(14, 0);
    let mut sampler = DiskSampler::default();
    let mut checked = 0;
    while checked < 50 {
        let sphere = sampler.sample_sphere(&mut rng).unwrap();
        if sphere.polygon_count() == 0 {
            continue;
        }
        sphere.validate(false).unwrap();
        let zero = hull_decompose(&sphere, 0).unwrap();
        assert!(zero.holes.is_empty() && zero.ball.is_empty());
        let diameter = *sphere
            .distances_from(sphere.root_vertex())
            .iter()
            .max()
            .unwrap();
        let all = hull_decompose(&sphere, diameter + 2).unwrap();
        assert!(all.holes.is_empty());
        assert_eq!(all.ball.len(), sphere.polygon_count());
        assert_eq!(martingale_value(&sphere, diameter + 2).unwrap(), 0.0);
        checked += 1;
    }
}

#[test]
fn hole_weights() {
    assert_eq!(hole_weight_f64(2), 9.0);
    assert_eq!(hole_weight_f64(3), 9.0);
    assert_eq!(hole_weight_f64(4), 30.0);
}

#[test]
fn martingale_starts_at_one() {
    let report = martingale_check(2, 20_000, 15).unwrap();
    assert!(report.max_z() < 4.0, "{report:?}");
    assert!(martingale_check(1, 10, 0).is_err());
}

#[test]
fn dual_distances_from_the_root_face() {
    let mut rng = replica_rng(16, 0);
    let (explorer, rows) = peel_by_layers_map(3000, DiskSampler::default(), &mut rng).unwrap();
    assert_eq!(rows.len(), 3001);
    let map = explorer.map();
    let dual = dual_distances(map).unwrap();
    assert_eq!(dual[map.face(map.root()) as usize], 0);
    let radius = determined_dual_radius(map, &dual);
    assert!((1..u32::MAX).contains(&radius));
    assert!(dual_distances(&HalfEdgeMap::trivial()).is_err());
}

#[test]
fn exports_list_every_edge() {
    let mut rng = replica_rng(17, 0);
    let (explorer, _) = peel_by_layers_map(200, DiskSampler::default(), &mut rng).unwrap();
    let map = explorer.map();
    let text = map.export_edge_list();
    let edges = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('f'))
        .count();
    assert_eq!(edges, map.edge_count());
}
