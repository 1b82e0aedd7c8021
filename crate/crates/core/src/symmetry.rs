//! Vertex symmetries of level graphs, by backtracking within invariant classes.

use std::collections::BTreeMap;

use crate::graph::EnhancedLevelGraph;

/// Edge multiset between an ordered pair of vertices: `(kappa, horizontal)`.
type Adjacency = BTreeMap<(usize, usize), Vec<(u32, bool)>>;

fn adjacency(graph: &EnhancedLevelGraph) -> Adjacency {
    let mut adj: Adjacency = BTreeMap::new();
    for e in 0..graph.num_edges() {
        let (t, b) = graph.ends(e);
        let h = graph.is_horizontal(e);
        let k = graph.edges()[e].kappa;
        adj.entry((t, b)).or_default().push((k, h));
        if h && t != b {
            adj.entry((b, t)).or_default().push((k, h));
        }
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }
    adj
}

fn between(adj: &Adjacency, a: usize, b: usize) -> &[(u32, bool)] {
    adj.get(&(a, b)).map(|v| v.as_slice()).unwrap_or(&[])
}

/// Per-vertex invariant: genus, level, leg orders, valence.
fn vertex_key(graph: &EnhancedLevelGraph, v: usize) -> (i64, i32, Vec<i32>, i64) {
    (graph.genus(v), graph.level(v), graph.leg_orders_at(v), graph.valence(v))
}

/// All vertex permutations `p` (as `p[v]`) preserving genus, level, legs and
/// enhanced edge multiplicities.
pub fn vertex_automorphisms(graph: &EnhancedLevelGraph) -> Vec<Vec<usize>> {
    let n = graph.num_vertices();
    let adj = adjacency(graph);
    let keys: Vec<_> = (0..n).map(|v| vertex_key(graph, v)).collect();
    let mut out = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        v: usize,
        n: usize,
        keys: &[(i64, i32, Vec<i32>, i64)],
        adj: &Adjacency,
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == n {
            out.push(image.clone());
            return;
        }
        for w in 0..n {
            if used[w] || keys[w] != keys[v] {
                continue;
            }
            image[v] = w;
            let consistent = (0..=v).all(|u| {
                between(adj, u, v) == between(adj, image[u], w) && between(adj, v, u) == between(adj, w, image[u])
            });
            if consistent {
                used[w] = true;
                rec(v + 1, n, keys, adj, image, used, out);
                used[w] = false;
            }
            image[v] = usize::MAX;
        }
    }
    rec(0, n, &keys, &adj, &mut image, &mut used, &mut out);
    out
}

/// Applies a vertex permutation to a per-vertex vector: `out[p[v]] = x[v]`.
pub fn permute<T: Clone>(x: &[T], p: &[usize]) -> Vec<T> {
    let mut out = x.to_vec();
    for (v, &w) in p.iter().enumerate() {
        out[w] = x[v].clone();
    }
    out
}

/// Lexicographically least image of `x` under `group`.
pub fn orbit_representative<T: Clone + Ord>(x: &[T], group: &[Vec<usize>]) -> Vec<T> {
    group.iter().map(|p| permute(x, p)).min().unwrap_or_else(|| x.to_vec())
}

/// Number of orbits of `items` under the vertex permutation group.
pub fn count_orbits<T: Clone + Ord>(items: &[Vec<T>], group: &[Vec<usize>]) -> usize {
    let reps: std::collections::BTreeSet<Vec<T>> = items.iter().map(|x| orbit_representative(x, group)).collect();
    reps.len()
}

/// An isomorphism-invariant code: the least encoding over all vertex orders
/// compatible with the vertex invariants.
pub fn canonical_code(graph: &EnhancedLevelGraph) -> Vec<i64> {
    let n = graph.num_vertices();
    let adj = adjacency(graph);
    let keys: Vec<_> = (0..n).map(|v| vertex_key(graph, v)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut header = vec![n as i64, graph.num_edges() as i64, graph.num_legs() as i64];
    for &v in &order {
        let (g, l, legs, val) = &keys[v];
        header.extend([*g, *l as i64, *val, legs.len() as i64]);
        header.extend(legs.iter().map(|&m| m as i64));
    }
    // Classes of equal keys, in sorted order; permute within each class.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match classes.last_mut() {
            Some(c) if keys[c[0]] == keys[v] => c.push(v),
            _ => classes.push(vec![v]),
        }
    }
    let mut best: Option<Vec<i64>> = None;
    let mut current = Vec::with_capacity(n);
    fn encode(seq: &[usize], adj: &Adjacency) -> Vec<i64> {
        let mut code = Vec::new();
        for &a in seq {
            for &b in seq {
                let list = between(adj, a, b);
                code.push(list.len() as i64);
                for &(k, h) in list {
                    code.push(k as i64);
                    code.push(h as i64);
                }
            }
        }
        code
    }
    fn rec(
        ci: usize,
        classes: &[Vec<usize>],
        current: &mut Vec<usize>,
        adj: &Adjacency,
        best: &mut Option<Vec<i64>>,
    ) {
        if ci == classes.len() {
            let code = encode(current, adj);
            if best.as_ref().map_or(true, |b| code < *b) {
                *best = Some(code);
            }
            return;
        }
        permutations(&classes[ci], &mut |perm| {
            let len = current.len();
            current.extend_from_slice(perm);
            rec(ci + 1, classes, current, adj, best);
            current.truncate(len);
        });
    }
    rec(0, &classes, &mut current, &adj, &mut best);
    header.push(-1);
    header.extend(best.unwrap_or_default());
    header
}

/// Calls `f` on every permutation of `items`.
pub fn permutations<T: Clone>(items: &[T], f: &mut dyn FnMut(&[T])) {
    let mut v = items.to_vec();
    fn heap<T: Clone>(k: usize, v: &mut Vec<T>, f: &mut dyn FnMut(&[T])) {
        if k <= 1 {
            f(v);
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, v, f);
            if k % 2 == 0 {
                v.swap(i, k - 1);
            } else {
                v.swap(0, k - 1);
            }
        }
        heap(k - 1, v, f);
    }
    let k = v.len();
    heap(k, &mut v, f);
}
