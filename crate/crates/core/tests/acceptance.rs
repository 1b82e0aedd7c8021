//! One line per acceptance criterion, printed straight to stdout so that it
//! shows up without `--nocapture`. Every comparison is exact.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use levelgraph_core::collision::enumerate_collision_graphs;
use levelgraph_core::compare::{compare_fibers, Parity};
use levelgraph_core::corpus;
use levelgraph_core::cover::{abelian_defects, count_double_covers, enumerate_double_covers, CoverGraph};
use levelgraph_core::graph::EnhancedLevelGraph;
use levelgraph_core::polarization::{
    check_degenerate_on, enumerate_semistable, gcd_nondegeneracy, phi_canonical, spanning_tree_count,
    MultidegreeClass,
};
use levelgraph_core::rational::Q;
use levelgraph_core::spectral::{
    det_degree_feasible, prym_degree_feasible, pushforward_multidegree, twist_bundle_degrees,
};
use levelgraph_core::symmetry::canonical_code;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(n: u32, pass: bool, detail: &str) {
    let line = format!("acceptance {n:>2} {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

/// Multidegree up to swapping the two tops and permuting the four bottoms.
fn fig2_orbit(d: &[i64]) -> Vec<i64> {
    let mut top = d[..2].to_vec();
    let mut bottom = d[2..].to_vec();
    top.sort_unstable();
    bottom.sort_unstable();
    top.extend(bottom);
    top
}

#[test]
fn criterion_01_figure_two_multidegrees() {
    let graph = corpus::fig2_cover();
    let phi = phi_canonical(&graph, 4).unwrap();
    let (stable, semi) = enumerate_semistable(&graph, &phi).unwrap();
    let orbits = |xs: &[Vec<i64>]| xs.iter().map(|d| fig2_orbit(d)).collect::<BTreeSet<_>>();
    // The six stable classes and the strictly semistable one.
    let want_stable: BTreeSet<Vec<i64>> = [
        vec![2, 2, 0, 0, 0, 0],
        vec![3, 1, 0, 0, 0, 0],
        vec![2, 3, -1, 0, 0, 0],
        vec![3, 3, -1, -1, 0, 0],
        vec![3, 4, -1, -1, -1, 0],
        vec![4, 4, -1, -1, -1, -1],
    ]
    .iter()
    .map(|d| fig2_orbit(d))
    .collect();
    let want_semi: BTreeSet<Vec<i64>> = [fig2_orbit(&[2, 4, -1, -1, 0, 0])].into_iter().collect();
    let (s, m) = (orbits(&stable), orbits(&semi));
    let pass = s == want_stable && m == want_semi;
    report(
        1,
        pass,
        &format!(
            "fig2 cover, canonical phi, d=4: {} stable + {} strictly semistable classes up to S2xS4 ({} + {} labeled); exact",
            s.len(),
            m.len(),
            stable.len(),
            semi.len()
        ),
    );
}

fn threshold_identities(n: u32, parity: Parity, name: &str) {
    let mut lines = Vec::new();
    let mut pass = true;
    for (g, k, d) in [(2, 1, 4), (2, 1, 7), (3, 2, 7), (4, 3, 10)] {
        let r = compare_fibers(g, k, parity, d).unwrap();
        let t = r.thresholds.unwrap();
        // Closed forms evaluated here, independently of the library.
        let (g, k, d) = (g as i64, k as i64, d as i64);
        let (top, bottom) = match parity {
            Parity::Even => (
                Q::from_integer(d) + Q::new(k - 2, 3) + Q::new(d * (1 - 2 * k), 6 * g - 6),
                Q::new(d * (2 * k - 1), 6 * g - 6) - Q::new(k + 4, 3),
            ),
            Parity::Odd => (
                Q::from_integer(d) - Q::new(d * k, 3 * g - 3) + Q::new(k, 3),
                Q::new(d * k, 3 * g - 3) - Q::new(k, 3) - 1,
            ),
        };
        let got = (Q::new(t.top.num, t.top.den), Q::new(t.bottom.num, t.bottom.den));
        pass &= got == (top, bottom);
        lines.push(format!("({g},{k},{d}): {} / {}", got.0, got.1));
    }
    report(n, pass, &format!("{name} thresholds top/bottom {}; exact rationals", lines.join(", ")));
}

#[test]
fn criterion_02_banana_thresholds() {
    threshold_identities(2, Parity::Even, "banana");
}

#[test]
fn criterion_03_compact_type_thresholds() {
    threshold_identities(3, Parity::Odd, "compact-type");
}

#[test]
fn criterion_04_component_matrix() {
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut skipped = Vec::new();
    for g in 2..=4u32 {
        let period = 6 * g as i64 - 6;
        for k in 1..=2u32 {
            let coprime: Vec<i64> = (1..=period).filter(|d| d.gcd(&period) == 1).collect();
            let aligned = [4 * g as i64 - 4, 4 * g as i64 - 4 + period];
            let mut cell_ok = true;
            let mut unknown = false;
            for &d in &coprime {
                let r = compare_fibers(g, k, Parity::Even, d).unwrap();
                let hit = r.hitchin.components.value();
                unknown |= hit.is_none();
                if r.jacobian.components != 2 || hit.map_or(false, |h| h != 1) {
                    cell_ok = false;
                    failures.push(format!("banana g={g} k={k} d={d}: {} vs {hit:?}", r.jacobian.components));
                }
            }
            for &d in &aligned {
                let r = compare_fibers(g, k, Parity::Even, d).unwrap();
                let hit = r.hitchin.components.value();
                unknown |= hit.is_none();
                if r.jacobian.components != 1 || hit.map_or(false, |h| h != 1) {
                    cell_ok = false;
                    failures.push(format!("banana g={g} k={k} d={d}: {} vs {hit:?}", r.jacobian.components));
                }
            }
            if unknown {
                cell_ok = false;
                failures.push(format!("banana g={g} k={k}: Hitchin count unknown (no odd zero in the profile)"));
            }
            if 2 * k + 1 > 4 * g - 4 {
                // No zero of order 2k+1 fits in genus g; the cell is empty.
                assert!(compare_fibers(g, k, Parity::Odd, 0).is_err());
                skipped.push(format!("compact g={g} k={k} (order {} > 4g-4)", 2 * k + 1));
                cells.push(cell_ok);
                continue;
            }
            for d in 0..=period {
                let r = compare_fibers(g, k, Parity::Odd, d).unwrap();
                let hit = r.hitchin.components.value();
                if r.jacobian.components != 1 || hit != Some(1) || !r.strata_nonisomorphic {
                    cell_ok = false;
                    failures.push(format!("compact g={g} k={k} d={d}: {} vs {hit:?}", r.jacobian.components));
                }
            }
            cells.push(cell_ok);
        }
    }
    let ok = cells.iter().filter(|&&c| c).count();
    let empty = if skipped.is_empty() { String::new() } else { format!("; empty: {}", skipped.join(", ")) };
    let detail = if failures.is_empty() {
        format!("{ok}/{} (g,k) cells: banana 2 vs 1 on coprime d, 1 vs 1 on d = 4g-4 mod 6g-6; compact 1 vs 1, strata differ{empty}", cells.len())
    } else {
        failures.dedup();
        format!("{ok}/{} (g,k) cells{empty}; {}", cells.len(), failures.join("; "))
    };
    report(4, failures.is_empty(), &detail);
}

/// Cover rules checked from the raw lists.
fn cover_rules_hold(target: &EnhancedLevelGraph, cover: &CoverGraph) -> bool {
    let s = cover.source();
    let g = target.arithmetic_genus().unwrap();
    let edges_ok = (0..target.num_edges()).all(|e| {
        let k = target.kappa(e);
        let fiber = cover.edge_fiber(e);
        if k % 2 == 1 {
            fiber.len() == 1 && s.kappa(fiber[0]) == k
        } else {
            fiber.len() == 2 && fiber.iter().all(|&f| s.kappa(f) == k / 2)
        }
    });
    let legs_ok = (0..target.num_legs()).all(|l| {
        let m = target.legs()[l].order as i64;
        let pre: Vec<usize> = (0..s.num_legs()).filter(|&x| cover.leg_map()[x] == l).collect();
        if m % 2 != 0 {
            pre.len() == 1 && s.legs()[pre[0]].order as i64 == m + 1
        } else {
            pre.len() == 2 && pre.iter().all(|&x| s.legs()[x].order as i64 == m / 2)
        }
    });
    let vertices_ok = (0..target.num_vertices()).all(|v| {
        let fiber = cover.vertex_fiber(v);
        let odd = target.legs_at(v) > 0 || target.half_edges(v).iter().any(|&(e, _)| target.kappa(e) % 2 == 1);
        !(odd && fiber.len() == 2)
    });
    edges_ok
        && legs_ok
        && vertices_ok
        && cover.invariant_failures().is_empty()
        && abelian_defects(cover).iter().all(|&d| d == 0)
        && s.validate_abelian().ok()
        && s.arithmetic_genus().unwrap() == 4 * g - 3
}

#[test]
fn criterion_05_cover_conservation() {
    let caps = [(2u32, 8u32), (3, 8), (4, 4)];
    let mut graphs = 0;
    let mut covers = 0;
    let mut bad = Vec::new();
    for (g, levels) in caps {
        for graph in enumerate_collision_graphs(g, levels) {
            graphs += 1;
            let list = enumerate_double_covers(&graph).unwrap();
            if list.len() as u64 != count_double_covers(&graph).unwrap().up_to_isomorphism {
                bad.push(format!("count mismatch at g={g}"));
            }
            for cover in &list {
                covers += 1;
                if !cover_rules_hold(&graph, cover) {
                    bad.push(format!("rule violation at g={g}"));
                }
            }
        }
    }
    // Example covers, node for node.
    let genera = |c: &CoverGraph| {
        let mut x: Vec<(i32, i64)> = (0..c.source().num_vertices()).map(|w| (c.source().level(w), c.source().genus(w))).collect();
        x.sort();
        x
    };
    let left = enumerate_double_covers(&corpus::fig1_left(2)).unwrap();
    let right = enumerate_double_covers(&corpus::fig1_right_pair(2)).unwrap();
    let fig2 = enumerate_double_covers(&corpus::fig2_target(3)).unwrap();
    let figures = left.len() == 1
        && genera(&left[0]) == vec![(-1, 0), (0, 4)]
        && left[0].source().num_edges() == 2
        && right.len() == 1
        && genera(&right[0]) == vec![(-1, 1), (0, 4)]
        && right[0].source().num_edges() == 1
        && right[0].source().kappa(0) == 5
        && fig2.len() == 2
        && fig2.iter().any(|c| canonical_code(c.source()) == canonical_code(&corpus::fig2_cover()))
        && fig2.iter().any(|c| !c.is_split(0) && c.source().genus(c.vertex_fiber(0)[0]) == 5);
    if !figures {
        bad.push("figure covers differ".into());
    }
    bad.dedup();
    report(
        5,
        bad.is_empty(),
        &format!(
            "{graphs} collision graphs (g=2, g=3 all levels; g=4 up to 4 levels), {covers} covers, genus 4g-3, fig1/fig2 node-for-node, fig2 target has {} covers{}",
            fig2.len(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    );
}

#[test]
fn criterion_06_gcd_equivalence() {
    let mut checked = 0;
    let mut graphs = 0;
    let mut counterexamples = Vec::new();
    for g in 0..=3u32 {
        for n in 0..=4usize {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            let family = common::stable_graphs(g, n, 4);
            graphs += family.len();
            for d in -12..=12i64 {
                let degenerate = family.iter().any(|x| {
                    let phi = phi_canonical(x, d).unwrap();
                    check_degenerate_on(x, &phi).unwrap().is_some()
                });
                checked += 1;
                if gcd_nondegeneracy(g as i64, n as i64, d) == degenerate {
                    counterexamples.push(format!("(g={g}, n={n}, d={d})"));
                }
            }
        }
    }
    report(
        6,
        counterexamples.is_empty(),
        &format!(
            "{checked} (g,n,d) triples, g<=3, n<=4, |d|<=12, over {graphs} stable graphs with <=4 vertices; counterexamples: {}",
            if counterexamples.is_empty() { "none".to_string() } else { counterexamples.join(" ") }
        ),
    );
}

#[test]
fn criterion_07_spanning_trees() {
    let mut instances: Vec<(EnhancedLevelGraph, i64)> = Vec::new();
    for g in 1..=3u32 {
        for n in 0..=2usize {
            if 2 * g as i64 - 2 + n as i64 > 0 {
                for graph in common::stable_graphs(g, n, 4) {
                    for d in -4..=8 {
                        instances.push((graph.clone(), d));
                    }
                }
            }
        }
    }
    for d in 0..=12 {
        instances.push((corpus::fig2_cover(), d));
    }
    for cover in common::collision_covers() {
        if cover.source().num_vertices() <= 8 {
            let g_hat = cover.source().arithmetic_genus().unwrap();
            for d in [g_hat - 1, g_hat, 2 * g_hat - 2] {
                instances.push((cover.source().clone(), d));
            }
        }
    }
    let mut nondegenerate = 0;
    let mut bad = Vec::new();
    for (graph, d) in &instances {
        let phi = phi_canonical(graph, *d).unwrap();
        if check_degenerate_on(graph, &phi).unwrap().is_some() {
            continue;
        }
        nondegenerate += 1;
        let (stable, semi) = enumerate_semistable(graph, &phi).unwrap();
        if stable.len() as i128 != spanning_tree_count(graph) || !semi.is_empty() {
            bad.push(format!("d={d}: {} stable vs {} trees", stable.len(), spanning_tree_count(graph)));
        }
    }
    report(
        7,
        bad.is_empty(),
        &format!("{nondegenerate} non-degenerate instances of {}; stable count = Kirchhoff count{}", instances.len(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }),
    );
}

#[test]
fn criterion_08_twist_bundles() {
    let mut graphs = vec![corpus::fig1_left(2), corpus::fig1_right_pair(2), corpus::fig2_target(3)];
    for g in 2..=5u32 {
        graphs.push(corpus::smooth(g, &vec![1; 4 * g as usize - 4]));
        for k in 1..=2 * g - 2 {
            graphs.push(corpus::banana_target(g, k));
        }
        for k in 1..2 * g - 2 {
            graphs.push(corpus::compact_target(g, k));
        }
    }
    graphs.extend(enumerate_collision_graphs(2, 8));
    graphs.extend(enumerate_collision_graphs(3, 8));
    graphs.extend(enumerate_collision_graphs(4, 4));
    let mut vertices = 0;
    let mut bad = 0;
    for graph in &graphs {
        assert!(graph.validate().ok());
        let m = twist_bundle_degrees(graph);
        for v in 0..graph.num_vertices() {
            vertices += 1;
            let odd = graph.half_edges(v).iter().filter(|&&(e, _)| graph.kappa(e) % 2 == 1).count() as i64;
            if 2 * m[v] != graph.legs_at(v) + odd {
                bad += 1;
            }
        }
    }
    report(
        8,
        bad == 0,
        &format!("2 deg M_v = legs + odd half-edges on {vertices} vertices of {} valid graphs; {bad} violations", graphs.len()),
    );
}

#[test]
fn criterion_09_spectral_transfer() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_901);
    let mut covers = common::collision_covers();
    covers.shuffle(&mut rng);
    let mut agree = 0;
    let mut feasible = 0;
    let mut bad = Vec::new();
    for i in 0..1000 {
        let cover = &covers[i % covers.len()];
        let (class, deg_l) = common::random_spectral_instance(&mut rng, cover);
        let prym = prym_degree_feasible(cover, &class, deg_l).unwrap();
        let push = pushforward_multidegree(cover, &class).unwrap();
        let det = det_degree_feasible(cover, &push, deg_l).unwrap();
        // Same verdict; the source twist equals the target twist on swap
        // nodes and is 2m - 1 on ramified nodes.
        let transferred = prym.witness.as_ref().map(|w| {
            (0..w.len()).map(|e| if push.taxonomy[e].is_fix() { w[e] + 1 } else { 2 * w[e] }).collect::<Vec<i64>>()
        });
        let expected = det.witness.as_ref().map(|m| m.iter().map(|x| 2 * x).collect::<Vec<i64>>());
        if prym.feasible == det.feasible && transferred == expected {
            agree += 1;
        } else if bad.len() < 5 {
            bad.push(format!("instance {i}"));
        }
        feasible += usize::from(prym.feasible);
    }
    let mut smooth_ok = true;
    for g in 2..=5u32 {
        let target = corpus::smooth(g, &vec![1; 4 * g as usize - 4]);
        let cover = &enumerate_double_covers(&target).unwrap()[0];
        for d_hat in -6..=20 {
            let class = MultidegreeClass::locally_free(vec![d_hat]);
            let push = pushforward_multidegree(cover, &class).unwrap();
            for deg_l in -8..=20 {
                let want = d_hat == deg_l + 2 * g as i64 - 2;
                smooth_ok &= prym_degree_feasible(cover, &class, deg_l).unwrap().feasible == want;
                smooth_ok &= det_degree_feasible(cover, &push, deg_l).unwrap().feasible == want;
            }
        }
    }
    report(
        9,
        bad.is_empty() && smooth_ok,
        &format!(
            "{agree}/1000 random instances agree on verdict and twist (m = m^ on swap nodes, 2m - 1 = m^ on fix nodes; {feasible} feasible); smooth covers g=2..5 reduce to d = degL + 2g - 2: {}{}",
            if smooth_ok { "yes" } else { "no" },
            if bad.is_empty() { String::new() } else { format!("; disagreements: {}", bad.join(" ")) }
        ),
    );
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("levelgraph-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_10_determinism() {
    let corpus_dir = scratch("corpus");
    for (name, text) in levelgraph_cli::corpus_files() {
        std::fs::write(corpus_dir.join(name), text).unwrap();
    }
    let file = |name: &str| corpus_dir.join(name).display().to_string();
    let mut invocations: Vec<Vec<String>> = Vec::new();
    for (_, args) in levelgraph_cli::golden_invocations() {
        let args: Vec<String> =
            args.iter().map(|a| if a.ends_with(".json") { file(a) } else { a.to_string() }).collect();
        invocations.push(args.clone());
        let mut json = vec!["--json".to_string()];
        json.extend(args);
        invocations.push(json);
    }
    for extra in [
        vec!["jac", "fig2-cover.json", "--degree", "4", "--strata"],
        vec!["jac", "fig1-left-g2.json", "--degree", "3", "--count"],
        vec!["covers", "fig2-cover.json"],
        vec!["boundary", "--genus", "3", "--levels", "3"],
        vec!["compare", "--genus", "3", "--zero-order", "4", "--degree", "7"],
        vec!["compare", "--genus", "4", "--zero-order", "3", "--degree", "5"],
        vec!["validate", "missing.json"],
        vec!["det", "fig2-target.cover-2.json", "--degrees", "1,0,0,0,0", "--taxonomy", "LF/swap,LF/swap,LF/swap,LF/swap", "--degL", "0"],
    ] {
        invocations.push(extra.iter().map(|a| if a.ends_with(".json") { file(a) } else { a.to_string() }).collect());
    }
    let mut runs = 0;
    let mut bad = Vec::new();
    for (i, args) in invocations.iter().enumerate() {
        let mut outputs = Vec::new();
        for (rep, threads) in [(0, 1), (1, 1), (2, 4), (3, 4), (4, 0)] {
            let dot = scratch(&format!("dot-{i}-{rep}"));
            let mut full = vec!["levelgraph".to_string(), "--threads".into(), threads.to_string(), "--dot".into()];
            full.push(dot.display().to_string());
            full.extend(args.iter().cloned());
            let o = levelgraph_cli::run(&full);
            let text = o.stdout.replace(&dot.display().to_string(), "<dot>");
            outputs.push((o.code, text, o.stderr.replace(&dot.display().to_string(), "<dot>"), read_tree(&dot)));
            let _ = std::fs::remove_dir_all(&dot);
            runs += 1;
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            bad.push(args.join(" "));
        }
    }
    // Seeding the corpus writes every golden file; compare whole trees.
    let trees: Vec<BTreeMap<String, Vec<u8>>> = [1, 4]
        .iter()
        .map(|t| {
            let dir = scratch(&format!("seed-{t}"));
            let o = levelgraph_cli::run(&[
                "levelgraph".into(),
                "--threads".into(),
                t.to_string(),
                "seed-corpus".into(),
                dir.display().to_string(),
            ]);
            assert_eq!(o.code, 0);
            let tree = read_tree(&dir);
            let _ = std::fs::remove_dir_all(&dir);
            tree
        })
        .collect();
    if trees[0] != trees[1] {
        bad.push("seed-corpus".into());
    }
    let _ = std::fs::remove_dir_all(&corpus_dir);
    report(
        10,
        bad.is_empty(),
        &format!(
            "{} invocations x 5 runs ({runs} total; threads 1,1,4,4,auto) byte-identical in stdout, stderr, exit code and DOT files; seed-corpus identical for 1 vs 4 threads{}",
            invocations.len(),
            if bad.is_empty() { String::new() } else { format!("; differing: {}", bad.join(" | ")) }
        ),
    );
}
