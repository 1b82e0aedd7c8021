//! Boundary graphs over a smooth base curve: a genus-`g` root on top and trees
//! of rational components below, recording collisions of the `4g - 4` simple
//! zeros.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Edge, EnhancedLevelGraph, Leg, Vertex};

/// A rational component in canonical form: level, direct legs, and children
/// sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    level: i32,
    legs: u32,
    children: Vec<Node>,
}

impl Node {
    fn total_legs(&self) -> u32 {
        self.legs + self.children.iter().map(Node::total_legs).sum::<u32>()
    }

    fn collect_levels(&self, out: &mut BTreeSet<i32>) {
        out.insert(self.level);
        for c in &self.children {
            c.collect_levels(out);
        }
    }
}

/// Unlevelled trees, memoized by leg count.
struct Shapes {
    memo: BTreeMap<(u32, u32), Vec<Node>>,
    forest_memo: BTreeMap<(u32, u32, u32), Vec<Vec<Node>>>,
}

impl Shapes {
    /// Shapes with exactly `n` legs and at most `height` edges below the
    /// root, whose root has at least two legs or children in total.
    fn subtrees(&mut self, n: u32, height: u32) -> Vec<Node> {
        if let Some(found) = self.memo.get(&(n, height)) {
            return found.clone();
        }
        let mut out = Vec::new();
        for legs in 0..=n {
            if height == 0 {
                if legs == n && legs >= 2 {
                    out.push(Node { level: 0, legs, children: Vec::new() });
                }
                continue;
            }
            for children in self.forests(n - legs, n - 1, height - 1) {
                if legs as usize + children.len() >= 2 {
                    out.push(Node { level: 0, legs, children });
                }
            }
        }
        out.sort();
        self.memo.insert((n, height), out.clone());
        out
    }

    /// Sorted multisets of shapes with `n` legs in total, none with more than
    /// `largest` legs or height above `height`.
    fn forests(&mut self, n: u32, largest: u32, height: u32) -> Vec<Vec<Node>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let largest = largest.min(n);
        if let Some(found) = self.forest_memo.get(&(n, largest, height)) {
            return found.clone();
        }
        let mut pool: Vec<Node> = Vec::new();
        for m in 2..=largest {
            pool.extend(self.subtrees(m, height));
        }
        pool.sort();
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn pick(pool: &[Node], start: usize, remaining: u32, current: &mut Vec<Node>, out: &mut Vec<Vec<Node>>) {
            if remaining == 0 {
                out.push(current.clone());
                return;
            }
            for i in start..pool.len() {
                let t = pool[i].total_legs();
                if t <= remaining {
                    current.push(pool[i].clone());
                    pick(pool, i, remaining - t, current, out);
                    current.pop();
                }
            }
        }
        pick(&pool, 0, n, &mut current, &mut out);
        self.forest_memo.insert((n, largest, height), out.clone());
        out
    }
}

/// Every levelling of `shape` with its root at `level` and all descendants
/// strictly lower, down to `lowest`.
fn levellings(shape: &Node, level: i32, lowest: i32) -> Vec<Node> {
    let mut partial: Vec<Vec<Node>> = vec![Vec::new()];
    for child in &shape.children {
        let options: Vec<Node> = (lowest..level).flat_map(|l| levellings(child, l, lowest)).collect();
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for p in &partial {
            for o in &options {
                let mut q = p.clone();
                q.push(o.clone());
                next.push(q);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|mut children| {
            children.sort();
            Node { level, legs: shape.legs, children }
        })
        .collect()
}

/// Every collision graph of genus `g` with between 2 and `max_levels` levels,
/// up to isomorphism. Ordered by number of levels, then vertices, then a
/// canonical code.
pub fn enumerate_collision_graphs(g: u32, max_levels: u32) -> Vec<EnhancedLevelGraph> {
    if g < 2 || max_levels < 2 {
        return Vec::new();
    }
    let total = 4 * g - 4;
    let mut shapes = Shapes { memo: BTreeMap::new(), forest_memo: BTreeMap::new() };
    let mut roots = BTreeSet::new();
    for direct in 0..total {
        for children in shapes.forests(total - direct, total, max_levels - 2) {
            let shape = Node { level: 0, legs: direct, children };
            let depth = max_levels.min(count_nodes(&shape) as u32);
            for levels in 2..=depth as i32 {
                for root in levellings(&shape, 0, 1 - levels) {
                    let mut used = BTreeSet::new();
                    root.collect_levels(&mut used);
                    if used.len() as i32 == levels {
                        roots.insert(root);
                    }
                }
            }
        }
    }
    let mut keyed: Vec<(usize, usize, Node)> = roots
        .into_iter()
        .map(|r| {
            let mut levels = BTreeSet::new();
            r.collect_levels(&mut levels);
            (levels.len(), count_nodes(&r), r)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, _, r)| to_graph(g, &r)).collect()
}

fn count_nodes(n: &Node) -> usize {
    1 + n.children.iter().map(count_nodes).sum::<usize>()
}

fn to_graph(g: u32, root: &Node) -> EnhancedLevelGraph {
    let mut vertices = vec![Vertex::new("v0", g, 0)];
    let mut edges = Vec::new();
    let mut legs: Vec<Leg> = (0..root.legs).map(|_| Leg::new("v0", 1)).collect();
    fn walk(node: &Node, parent: &str, vertices: &mut Vec<Vertex>, edges: &mut Vec<Edge>, legs: &mut Vec<Leg>) {
        for child in &node.children {
            let id = format!("v{}", vertices.len());
            vertices.push(Vertex::new(&id, 0, child.level));
            edges.push(Edge::new(format!("e{}", edges.len() + 1), parent, &id, child.total_legs() + 2));
            legs.extend((0..child.legs).map(|_| Leg::new(&id, 1)));
            walk(child, &id, vertices, edges, legs);
        }
    }
    walk(root, "v0", &mut vertices, &mut edges, &mut legs);
    EnhancedLevelGraph::new(vertices, edges, legs).expect("generated graphs are well formed")
}

/// The two-level collision graphs.
pub fn boundary_divisors(g: u32) -> Vec<EnhancedLevelGraph> {
    enumerate_collision_graphs(g, 2).into_iter().filter(|x| x.levels().len() == 2).collect()
}

/// Sorted enhancements of a graph.
pub fn enhancement_multiset(graph: &EnhancedLevelGraph) -> Vec<u32> {
    let mut k: Vec<u32> = graph.edges().iter().map(|e| e.kappa).collect();
    k.sort_unstable();
    k
}
