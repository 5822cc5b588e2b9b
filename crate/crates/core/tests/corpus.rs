mod common;

use common::{knot_corpus, mirror_t};
use jones_core::bracket::{expand_piece, jones};
use jones_core::recombine::run_plan;
use jones_core::subdivide::subdivide;

#[test]
fn serial_jones_matches_knot_table() {
    for k in knot_corpus() {
        assert_eq!(jones(&k.diagram, None).unwrap().to_t(), k.jones, "{}", k.name);
        let m = jones(&k.diagram.mirror(), None).unwrap().to_t();
        assert_eq!(m, mirror_t(&k.jones), "{} mirror", k.name);
    }
}

#[test]
fn trefoil_is_right_handed() {
    let k = &knot_corpus()[0];
    assert_eq!(k.name, "3_1");
    assert_eq!(k.diagram.writhe(), 3);
    assert_eq!(jones(&k.diagram, None).unwrap().to_t(), k.jones);
}

#[test]
fn subdivided_runs_match_serial() {
    for k in knot_corpus() {
        let want = jones(&k.diagram, None).unwrap();
        for m in (0..=2).filter(|&m| 1usize << m <= k.diagram.n_crossings()) {
            let plan = subdivide(&k.diagram, m, 11).unwrap();
            let out = run_plan(&plan, 4, None).unwrap();
            assert_eq!(out.polynomial, want, "{} m={m}", k.name);
            assert!(out.stats.tables.iter().all(|t| t.within_catalan_bound()), "{}", k.name);
        }
    }
}

#[test]
fn whole_diagram_table_is_single_row() {
    for k in knot_corpus().into_iter().take(10) {
        let t = expand_piece(&k.diagram).unwrap();
        assert_eq!(t.rows.len(), 1);
    }
}
