mod common;

use levelgraph_core::collision::enumerate_collision_graphs;
use levelgraph_core::corpus;
use levelgraph_core::cover::{enumerate_double_covers, CoverGraph};
use levelgraph_core::graph::EnhancedLevelGraph;
use levelgraph_core::polarization::MultidegreeClass;
use levelgraph_core::spectral::{
    det_degree_feasible, line_bundle_on_top, prym_degree_feasible, pushforward_multidegree, twist_bundle_degrees,
    RankTwoDegrees,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Integer vectors in `[-bound, bound]^len` satisfying `check`.
fn box_solutions(len: usize, bound: i64, check: &dyn Fn(&[i64]) -> bool) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut m = vec![-bound; len];
    loop {
        if check(&m) {
            out.push(m.clone());
        }
        let mut i = 0;
        while i < len && m[i] == bound {
            m[i] = -bound;
            i += 1;
        }
        if i == len {
            return out;
        }
        m[i] += 1;
    }
}

/// The Prym system written per source component, NS corrections at the top
/// end of each NS edge and of its conjugate.
fn prym_holds(cover: &CoverGraph, class: &MultidegreeClass, ell: &[i64], m: &[i64]) -> bool {
    let s = cover.source();
    let t = cover.target();
    (0..s.num_vertices()).all(|w| {
        let v = cover.vertex_map()[w];
        let mut lhs = class.degrees[w] + class.degrees[cover.sigma_vertex()[w]];
        for x in 0..s.num_legs() {
            if s.leg_vertex(x) == w && t.legs()[cover.leg_map()[x]].order % 2 != 0 {
                lhs -= 1;
            }
        }
        for &f in &class.ns {
            lhs += i64::from(s.ends(f).0 == w) + i64::from(s.ends(cover.sigma_edge()[f]).0 == w);
        }
        let mut rhs = if cover.vertex_fiber(v).len() == 1 { 2 * ell[v] } else { ell[v] };
        for f in 0..s.num_edges() {
            let (a, b) = s.ends(f);
            let e = cover.edge_map()[f];
            rhs += m[e] * (i64::from(a == w) - i64::from(b == w));
        }
        lhs == rhs
    })
}

fn det_holds(graph: &EnhancedLevelGraph, data: &RankTwoDegrees, ell: &[i64], m: &[i64]) -> bool {
    (0..graph.num_vertices()).all(|v| {
        let mut lhs = data.degrees[v] - ell[v];
        let mut rhs = 0;
        for e in 0..graph.num_edges() {
            let (a, b) = graph.ends(e);
            if a == v {
                lhs += data.taxonomy[e].ns_rank();
            }
            rhs += m[e] * (i64::from(a == v) - i64::from(b == v));
        }
        lhs == rhs
    })
}

fn within(m: &[i64], bound: i64) -> bool {
    m.iter().all(|x| x.abs() <= bound)
}

#[test]
fn twist_bundles_count_simple_zeros() {
    let mut graphs = vec![corpus::fig1_left(2), corpus::fig1_right_pair(2), corpus::fig2_target(3)];
    for g in 2..=4 {
        graphs.extend(enumerate_collision_graphs(g, if g == 4 { 3 } else { 4 }));
    }
    for graph in graphs {
        let m = twist_bundle_degrees(&graph);
        for v in 0..graph.num_vertices() {
            let odd: i64 = graph
                .half_edges(v)
                .into_iter()
                .filter(|&(e, _)| graph.kappa(e) % 2 == 1)
                .count() as i64;
            assert_eq!(2 * m[v], graph.legs_at(v) + odd);
        }
    }
}

#[test]
fn pushforward_preserves_euler_characteristic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cover in common::collision_covers() {
        let g = cover.target().arithmetic_genus().unwrap();
        let g_hat = cover.source().arithmetic_genus().unwrap();
        let (class, _) = common::random_spectral_instance(&mut rng, &cover);
        let push = pushforward_multidegree(&cover, &class).unwrap();
        assert_eq!(push.total() + 2 * (1 - g), class.total() + 1 - g_hat);
        // One summand per odd node from the branch point, plus one per NS
        // source node.
        let ns_summands: i64 = push.taxonomy.iter().map(|t| t.ns_rank()).sum();
        let fix = push.taxonomy.iter().filter(|t| t.is_fix()).count() as i64;
        assert_eq!(ns_summands, class.ns.len() as i64 + fix);
    }
}

#[test]
fn prym_and_det_match_box_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut covers: Vec<CoverGraph> =
        common::collision_covers().into_iter().filter(|c| c.target().num_edges() <= 3).collect();
    covers.shuffle(&mut rng);
    let mut feasible = 0;
    for i in 0..300 {
        let cover = &covers[i % covers.len()];
        let (class, deg_l) = common::random_spectral_instance(&mut rng, cover);
        let t = cover.target();
        let bound = if t.num_edges() <= 2 { 40 } else { 20 };
        let ell = line_bundle_on_top(t, deg_l).unwrap();

        let lib = prym_degree_feasible(cover, &class, deg_l).unwrap();
        let found = box_solutions(t.num_edges(), bound, &|m| prym_holds(cover, &class, &ell, m));
        assert!(found.len() <= 1);
        match (&lib.witness, found.first()) {
            (Some(w), Some(m)) => assert_eq!(w, m),
            (Some(w), None) => assert!(!within(w, bound)),
            (None, Some(m)) => panic!("Prym system solvable by {m:?} but reported infeasible"),
            (None, None) => {}
        }
        if let Some(w) = &lib.witness {
            assert!(prym_holds(cover, &class, &ell, w));
            feasible += 1;
        }

        let push = pushforward_multidegree(cover, &class).unwrap();
        let lib = det_degree_feasible(cover, &push, deg_l).unwrap();
        let found = box_solutions(t.num_edges(), bound, &|m| det_holds(t, &push, &ell, m));
        match (&lib.witness, found.first()) {
            (Some(w), Some(m)) => assert_eq!(w, m),
            (Some(w), None) => assert!(!within(w, bound)),
            (None, Some(m)) => panic!("determinant system solvable by {m:?} but reported infeasible"),
            (None, None) => {}
        }
        if let Some(w) = &lib.witness {
            assert!(det_holds(t, &push, &ell, w));
        }
    }
    assert!(feasible > 50, "only {feasible} feasible instances");
}

#[test]
fn prym_is_symmetric_under_the_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for cover in common::collision_covers().iter().take(150) {
        let (class, deg_l) = common::random_spectral_instance(&mut rng, cover);
        let sv = cover.sigma_vertex();
        let degrees = (0..sv.len()).map(|w| class.degrees[sv[w]]).collect();
        let ns = class.ns.iter().map(|&f| cover.sigma_edge()[f]).collect();
        let pulled = MultidegreeClass::new(cover.source(), degrees, ns).unwrap();
        let a = prym_degree_feasible(cover, &class, deg_l).unwrap();
        let b = prym_degree_feasible(cover, &pulled, deg_l).unwrap();
        assert_eq!(a.feasible, b.feasible);
    }
}

#[test]
fn smooth_covers_reduce_to_one_relation() {
    for g in 2..=5u32 {
        let target = corpus::smooth(g, &vec![1; 4 * g as usize - 4]);
        let cover = &enumerate_double_covers(&target).unwrap()[0];
        assert_eq!(cover.source().genus(0), 4 * g as i64 - 3);
        for d_hat in -4..16 {
            let class = MultidegreeClass::locally_free(vec![d_hat]);
            let push = pushforward_multidegree(cover, &class).unwrap();
            for deg_l in -6..16 {
                let expected = d_hat == deg_l + 2 * g as i64 - 2;
                assert_eq!(prym_degree_feasible(cover, &class, deg_l).unwrap().feasible, expected);
                assert_eq!(det_degree_feasible(cover, &push, deg_l).unwrap().feasible, expected);
            }
        }
    }
}
