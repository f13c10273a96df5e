//! Reference cases checked against the independent computations in `common`.

mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use npc_core::complex::{Complex, Subcomplex, VertexId};
use npc_core::diagram::{
    classify, gauss_bonnet_audit, is_reduced, reduced_diagram_search, validate_diagram, verify_tight, Classification,
};
use npc_core::generators::{
    cayley_ball, disc_coords, gen_cayley_ball, gen_equilateral_disc, gen_flat_parallelogram, gen_join_lines,
    gen_ladder_diagram, gen_polygon, LadderSpec,
};
use npc_core::metric::{self, delta_estimate, DeltaMethod, OrientedGeodesic};
use npc_core::presentation::Presentation;
use npc_core::sap::{sap_probe, tight_hexagon_probe, SampleSpec};
use npc_core::smallcancel::{
    check_c16_complex, check_c16_presentation, dehn_reduce, enumerate_pieces_complex, is_trivial,
};
use npc_core::wsys::{self, FillBackend, WsysContext};

/// Id of axial point `p` in `gen_equilateral_disc(r)`.
fn at(r: u32, p: (i32, i32)) -> VertexId {
    disc_coords(r).iter().position(|&q| q == p).expect("point in disc") as VertexId
}

fn cycle_graph(n: u64) -> Complex {
    Complex::simplicial(0..n, (0..n).map(|i| (i, (i + 1) % n)), [])
}

#[test]
fn generator_counts() {
    let d1 = gen_equilateral_disc(1);
    assert_eq!((d1.num_vertices(), d1.num_edges(), d1.num_cells()), (7, 12, 6));
    for r in 1..=5u32 {
        let d = gen_equilateral_disc(r);
        assert_eq!(d.num_vertices() as u32, 1 + 3 * r * (r + 1));
        assert_eq!(d.num_cells() as u32, 6 * r * r);
        assert_eq!(d.num_vertices() as i64 - d.num_edges() as i64 + d.num_cells() as i64, 1);
    }
    let p = gen_flat_parallelogram(2, 3).unwrap();
    assert_eq!((p.num_vertices(), p.num_cells()), (12, 12));
    let j = gen_join_lines(1).unwrap();
    assert_eq!((j.num_vertices(), j.num_edges(), j.num_cells()), (6, 13, 12));
}

#[test]
fn join_lines_have_diameter_two() {
    for r in 1..=4 {
        let c = gen_join_lines(r).unwrap();
        let dm = common::all_distances(&common::adjacency(&c));
        assert_eq!(dm.values().flat_map(|row| row.values()).max(), Some(&2));
    }
}

#[test]
fn distances_match_plain_bfs() {
    let c = gen_equilateral_disc(3);
    let adj = common::adjacency(&c);
    for &u in c.vertices() {
        let want = common::bfs(&adj, u);
        assert_eq!(metric::distances(&c, u).unwrap(), want);
    }
    let rim_corner = at(2, (-2, 2));
    assert_eq!(metric::distance(&gen_equilateral_disc(2), 0, rim_corner).unwrap(), 2);
}

#[test]
fn intervals_match_distance_sums() {
    for c in [gen_equilateral_disc(2), gen_join_lines(2).unwrap(), gen_flat_parallelogram(2, 3).unwrap()] {
        let adj = common::adjacency(&c);
        for &u in c.vertices() {
            for &v in c.vertices() {
                let got: BTreeSet<VertexId> = metric::interval(&c, u, v).unwrap().vertex_ids().into_iter().collect();
                assert_eq!(got, common::interval(&adj, u, v), "I({u},{v})");
            }
        }
    }
}

#[test]
fn join_lines_same_line_interval() {
    for r in 1..=4u32 {
        let c = gen_join_lines(r).unwrap();
        let iv = metric::interval(&c, 0, 2).unwrap();
        assert_eq!(iv.len() as u32, 3 + 2 * r + 1);
    }
}

#[test]
fn parallelogram_corners_span_the_parallelogram() {
    for (p, q) in [(1, 1), (2, 2), (2, 3), (3, 1)] {
        let c = gen_flat_parallelogram(p, q).unwrap();
        let far = (p * (q + 1) + q) as VertexId;
        assert_eq!(metric::interval(&c, 0, far).unwrap().len(), c.num_vertices());
    }
}

#[test]
fn geodesic_counts_match_path_enumeration() {
    let c = gen_flat_parallelogram(2, 2).unwrap();
    assert_eq!(metric::count_geodesics(&c, 0, 8).unwrap(), 6);
    for c in [gen_equilateral_disc(2), gen_flat_parallelogram(2, 3).unwrap()] {
        let adj = common::adjacency(&c);
        for &u in c.vertices() {
            for &v in c.vertices() {
                let mut want = common::geodesics(&adj, u, v);
                want.sort();
                let mut got: Vec<Vec<VertexId>> = metric::enumerate_geodesics(&c, u, v, 10_000)
                    .unwrap()
                    .into_iter()
                    .map(|g| g.vertices().to_vec())
                    .collect();
                got.sort();
                assert_eq!(got, want);
                assert_eq!(metric::count_geodesics(&c, u, v).unwrap(), want.len() as u64);
            }
        }
    }
}

#[test]
fn antipodes_of_a_hexagon_are_not_convex() {
    let c = cycle_graph(6);
    let k = Subcomplex::induced(&c, &[0, 3]).unwrap();
    let r = metric::is_convex(&c, &k, 100).unwrap();
    assert!(!r.passed());
    let path: Vec<VertexId> = serde_json::from_value(r.witness).unwrap();
    assert_eq!(path.len(), 4);
    OrientedGeodesic::new(&c, path).unwrap();
}

#[test]
fn delta_matches_four_point_oracle() {
    for c in [cycle_graph(6), gen_equilateral_disc(2), gen_join_lines(1).unwrap(), gen_polygon(7).unwrap()] {
        let want = common::four_point_twice(&common::adjacency(&c));
        let d = delta_estimate(&c, DeltaMethod::FourPointExhaustive).unwrap();
        assert_eq!(d.value.twice(), want);
        assert!(d.reverify(&c).unwrap());
    }
}

#[test]
fn disc_centre_satisfies_both_conditions() {
    let c = gen_equilateral_disc(2);
    assert!(wsys::check_edge_condition(&c, 0).unwrap().passed());
    assert!(wsys::check_vertex_condition(&c, 0).unwrap().passed());
}

#[test]
fn square_fails_the_vertex_condition() {
    let c = cycle_graph(4);
    for v in 0..4 {
        let r = wsys::check_vertex_condition(&c, v).unwrap();
        assert!(!r.passed());
        assert_eq!(r.witness["n"], 2);
    }
    let rep = wsys::check_weakly_systolic(&c).unwrap();
    assert!(!rep.passed);
    assert!(rep.witness.as_ref().unwrap().reproduces(&c));
}

#[test]
fn join_lines_verdicts_are_frozen() {
    // Recorded from the exhaustive sweep; no closed-form claim is made.
    for r in 1..=3 {
        let c = gen_join_lines(r).unwrap();
        assert!(c.is_flag().unwrap().passed());
        let rep = wsys::check_weakly_systolic(&c).unwrap();
        assert!(!rep.passed, "join-lines r={r}");
        let w = rep.witness.as_ref().unwrap();
        assert_eq!((w.vertex, w.n, w.condition), (0, 2, wsys::Condition::Vertex));
        assert!(w.reproduces(&c));
        assert!(!wsys::check_systolic(&c).unwrap().passed());
    }
}

#[test]
fn discs_are_systolic() {
    for r in 1..=3 {
        assert!(wsys::check_systolic(&gen_equilateral_disc(r)).unwrap().passed());
    }
    assert!(!wsys::check_systolic(&cycle_graph(4)).unwrap().passed());
}

#[test]
fn equilateral_corners_are_their_own_median() {
    let r = 3;
    let c = gen_equilateral_disc(r);
    for k in 1..=3i32 {
        let t = [at(r, (0, 0)), at(r, (k, 0)), at(r, (0, k))];
        let m = wsys::metric_triangle(&c, t[0], t[1], t[2]).unwrap();
        assert_eq!(m.median, t);
        assert_eq!(m.sizes, [k as u32; 3]);
    }
}

#[test]
fn weak_modularity_verdicts() {
    assert!(wsys::check_weak_modularity(&gen_equilateral_disc(2)).passed());
    assert!(!wsys::check_weak_modularity(&cycle_graph(6)).passed());
}

fn parallelogram_sides(p: u32, q: u32) -> (Complex, OrientedGeodesic, OrientedGeodesic) {
    let c = gen_flat_parallelogram(p, q).unwrap();
    let id = |a: u32, b: u32| (a * (q + 1) + b) as VertexId;
    let g1: Vec<VertexId> = (0..=p).map(|a| id(a, 0)).chain((1..=q).map(|b| id(p, b))).collect();
    let g2: Vec<VertexId> = (0..=q).map(|b| id(0, b)).chain((1..=p).map(|a| id(a, q))).collect();
    let (g1, g2) = (OrientedGeodesic::new(&c, g1).unwrap(), OrientedGeodesic::new(&c, g2).unwrap());
    (c, g1, g2)
}

#[test]
fn parallelogram_bigons_have_area_two_pq() {
    for (p, q) in [(1, 1), (1, 3), (2, 2), (2, 3)] {
        let (c, g1, g2) = parallelogram_sides(p, q);
        let ctx = WsysContext::new(&c);
        for backend in [FillBackend::Structured, FillBackend::Oracle] {
            let d = ctx.fill_bigon(&g1, &g2, backend).unwrap();
            assert_eq!(d.area() as u32, 2 * p * q, "{p}x{q} {backend:?}");
            assert!(validate_diagram(&d, &c).passed());
        }
    }
}

#[test]
fn random_bigons_match_the_oracle() {
    let c = gen_equilateral_disc(3);
    let ctx = WsysContext::new(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ids = c.vertices().to_vec();
    let mut filled = 0;
    while filled < 40 {
        let (u, v) = (ids[rng.gen_range(0..ids.len())], ids[rng.gen_range(0..ids.len())]);
        let gs = metric::enumerate_geodesics(&c, u, v, 10_000).unwrap();
        let (g1, g2) = (&gs[rng.gen_range(0..gs.len())], &gs[rng.gen_range(0..gs.len())]);
        let s = ctx.fill_bigon(g1, g2, FillBackend::Structured).unwrap();
        let o = ctx.fill_bigon(g1, g2, FillBackend::Oracle).unwrap();
        assert_eq!(s.area(), o.area(), "{:?} {:?}", g1.vertices(), g2.vertices());
        assert!(is_reduced(&s).passed());
        assert_eq!(gauss_bonnet_audit(&s).unwrap().total, 6);
        filled += 1;
    }
}

#[test]
fn flat_triangles_are_tight_at_six() {
    let r = 4;
    let c = gen_equilateral_disc(r);
    for k in 1..=4i32 {
        let d = wsys::fill_triangle(&c, at(r, (0, 0)), at(r, (k, 0)), at(r, (0, k))).unwrap();
        assert_eq!(d.area() as i32, k * k);
        assert_eq!(d.multiplicity(), 1);
        assert!(verify_tight(&d, 6).passed());
    }
}

#[test]
fn pieces_of_two_squares_sharing_a_path() {
    let c = Complex::polygonal(
        [1, 2, 3, 4, 5],
        [(1, 2), (2, 3), (3, 4), (4, 1), (3, 5), (5, 1)],
        [vec![1, 2, 3, 4], vec![1, 2, 3, 5]],
    );
    let pieces = enumerate_pieces_complex(&c).unwrap();
    assert_eq!(pieces.iter().map(|p| p.length).max(), Some(2));
}

#[test]
fn presentation_pieces_match_subword_scan() {
    for (gens, rels) in [
        (&["a", "b", "c", "d"][..], &["abABcdCD"][..]),
        (&["a", "b"], &["ababab"]),
        (&["a", "b"], &["aabbAB"]),
        (&["a", "b", "c"], &["abcabC", "aacbb"]),
        (&["a", "b", "c", "d", "e", "f"], &["abABcdCDefEF"]),
    ] {
        let p = Presentation::new(gens, rels).unwrap();
        let want = common::max_piece_per_relator(rels);
        let got: Vec<usize> = check_c16_presentation(&p).cells.iter().map(|c| c.1).collect();
        assert_eq!(got, want, "{rels:?}");
    }
    let surface = Presentation::surface(2).unwrap();
    assert!(check_c16_presentation(&surface).passed());
    let periodic = Presentation::new(&["a", "b"], &["ababab"]).unwrap();
    let r = check_c16_presentation(&periodic);
    assert!(!r.passed());
    assert_eq!(r.max_piece(), 4);
}

#[test]
fn surface_cayley_ball_is_c16() {
    let p = Presentation::surface(2).unwrap();
    for r in [2, 4] {
        assert!(check_c16_complex(&gen_cayley_ball(&p, r).unwrap()).unwrap().passed());
    }
}

#[test]
fn mobius_oracle_satisfies_exactly_the_surface_relator() {
    let g = common::SurfaceGroup::genus_two();
    assert!(g.is_identity("abABcdCD"));
    assert!(g.is_identity("cdCDabAB"));
    for w in ["a", "ab", "abAB", "abABcd", "aBAb", "abABcdCDa"] {
        assert!(!g.is_identity(w), "{w}");
    }
}

#[test]
fn dehn_reduction_examples() {
    let p = Presentation::surface(2).unwrap();
    let g = common::SurfaceGroup::genus_two();
    let rr = p.parse_word("abABcdCDabABcdCD").unwrap();
    assert!(dehn_reduce(&p, &rr).unwrap().is_empty());
    let ab = p.parse_word("ab").unwrap();
    assert_eq!(dehn_reduce(&p, &ab).unwrap(), ab);
    assert!(!is_trivial(&p, &ab).unwrap());
    assert!(!g.is_identity("ab"));
    // No walk in the radius-3 ball spells `ab` as a loop.
    let ball = cayley_ball(&p, 3).unwrap();
    let walk = ball.walk(0, &ab).unwrap();
    assert_ne!(walk.last(), Some(&0));
}

#[test]
fn small_loops_need_the_expected_area() {
    let j = gen_join_lines(1).unwrap();
    assert_eq!(reduced_diagram_search(&j, &[0, 1, 4, 3, 0], 8).unwrap().area(), 2);
    let c = gen_equilateral_disc(2);
    let rim: Vec<VertexId> = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)]
        .into_iter()
        .map(|p| at(2, p))
        .collect();
    let d = reduced_diagram_search(&c, &rim, 12).unwrap();
    assert_eq!(d.area(), 8);
    assert!(reduced_diagram_search(&c, &rim, 7).is_err());
}

#[test]
fn heptagon_chain_is_a_ladder() {
    let (d, _) = gen_ladder_diagram(&LadderSpec::chain(&[7, 7, 7])).unwrap();
    match classify(&d).unwrap() {
        Classification::Ladder { ladder } => {
            assert_eq!(ladder.rungs.len(), 2);
            assert!(ladder.rungs.iter().all(|r| r.len() == 2));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn probe_on_radius_three_disc() {
    let c = gen_equilateral_disc(3);
    let p = sap_probe(&c, 1, u32::MAX, 10_000).unwrap();
    assert!(p.exhaustive);
    assert_eq!(p.no_path, 0);
    assert!(p.r_emp.is_some());
    assert!(p.witness.as_ref().unwrap().reproduces(&c));
}

#[test]
fn cayley_ball_hexagons_are_tight() {
    let c = gen_cayley_ball(&Presentation::surface(2).unwrap(), 4).unwrap();
    let spec = SampleSpec::Exhaustive { max_len: 12 };
    assert!(tight_hexagon_probe(&c, 6, &spec, 16).unwrap().passed());
}
