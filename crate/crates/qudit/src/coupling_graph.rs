//! Coupling graphs between qudit levels, spanning trees and edge colorings.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Names accepted by [`builtin_graph`].
pub const BUILTIN_GRAPHS: [&str; 2] = ["rb87", "cs133"];

const RB87_EDGES: [(usize, usize); 9] = [
    (0, 5),
    (0, 6),
    (0, 7),
    (1, 4),
    (1, 5),
    (1, 6),
    (2, 3),
    (2, 4),
    (2, 5),
];

const CS133_EDGES: [(usize, usize); 21] = [
    // outer chain 15-0-13-2-11-4-9-6-7
    (0, 15),
    (0, 13),
    (2, 13),
    (2, 11),
    (4, 11),
    (4, 9),
    (6, 9),
    (6, 7),
    // inner chain 14-1-12-3-10-5-8
    (1, 14),
    (1, 12),
    (3, 12),
    (3, 10),
    (5, 10),
    (5, 8),
    // ladder
    (0, 14),
    (1, 13),
    (2, 12),
    (3, 11),
    (4, 10),
    (5, 9),
    (6, 8),
];

/// Default cap on spanning-tree enumeration.
pub const DEFAULT_TREE_LIMIT: usize = 10_000;

fn norm_edge(j: usize, k: usize) -> (usize, usize) {
    if j <= k {
        (j, k)
    } else {
        (k, j)
    }
}

/// Undirected graph of allowed two-level couplings on levels `0..d`.
#[derive(Debug, Clone, Eq)]
pub struct CouplingGraph {
    d: usize,
    edges: BTreeSet<(usize, usize)>,
    name: Option<String>,
}

impl PartialEq for CouplingGraph {
    /// Graphs compare by level count and edge set; the name is metadata.
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.edges == other.edges
    }
}

impl CouplingGraph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn new(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidGraph(format!("d must be at least 2, got {d}")));
        }
        let mut set = BTreeSet::new();
        for (j, k) in edges {
            if j == k {
                return Err(Error::InvalidGraph(format!("self-loop at level {j}")));
            }
            if j >= d || k >= d {
                return Err(Error::LevelOutOfRange { level: j.max(k), d });
            }
            if !set.insert(norm_edge(j, k)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({j},{k})")));
            }
        }
        Ok(Self { d, edges: set, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Edges as `(j,k)` with `j < k`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edges.contains(&norm_edge(j, k))
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Copy of the graph without the listed edges (used for scheduler exclusions).
    pub fn without_edges(&self, excluded: &[(usize, usize)]) -> Self {
        let drop: BTreeSet<_> = excluded.iter().map(|&(j, k)| norm_edge(j, k)).collect();
        Self {
            d: self.d,
            edges: self.edges.difference(&drop).copied().collect(),
            name: self.name.clone(),
        }
    }

    /// Errors with the first node unreachable from `root`, if any.
    pub fn check_connected(&self, root: usize) -> Result<()> {
        if root >= self.d {
            return Err(Error::LevelOutOfRange { level: root, d: self.d });
        }
        let seen = self.reachable(root);
        match seen.iter().position(|&s| !s) {
            Some(node) => Err(Error::Disconnected { node, root }),
            None => Ok(()),
        }
    }

    fn reachable(&self, root: usize) -> Vec<bool> {
        let mut seen = vec![false; self.d];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Canonical text form: `d <n>` then edge lines sorted lexicographically.
    pub fn to_text(&self) -> String {
        let mut out = format!("d {}\n", self.d);
        for (j, k) in &self.edges {
            let _ = writeln!(out, "e {j} {k}");
        }
        out
    }
}

/// Returns one of the built-in atomic coupling graphs.
pub fn builtin_graph(name: &str) -> Result<CouplingGraph> {
    let (d, edges): (usize, &[(usize, usize)]) = match name {
        "rb87" => (8, &RB87_EDGES),
        "cs133" => (16, &CS133_EDGES),
        _ => {
            return Err(Error::UnknownGraph {
                name: name.to_string(),
                available: BUILTIN_GRAPHS.join(", "),
            })
        }
    };
    Ok(CouplingGraph::new(d, edges.iter().copied())?.with_name(name))
}

/// Parses the line-oriented graph format (`d <n>`, `e <j> <k>`, `#` comments).
pub fn load_graph(text: &str) -> Result<CouplingGraph> {
    let mut d: Option<usize> = None;
    let mut edges = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match (d, tokens.as_slice()) {
            (None, ["d", n]) => {
                let n: usize = n.parse().map_err(|_| err(format!("invalid level count `{n}`")))?;
                if n < 2 {
                    return Err(err(format!("level count must be at least 2, got {n}")));
                }
                d = Some(n);
            }
            (None, _) => return Err(err("expected `d <int>` before any edge".into())),
            (Some(_), ["d", _]) => return Err(err("duplicate `d` line".into())),
            (Some(n), ["e", a, b]) => {
                let parse = |s: &str| s.parse::<usize>().map_err(|_| err(format!("invalid level `{s}`")));
                let (j, k) = (parse(a)?, parse(b)?);
                if j == k {
                    return Err(err(format!("self-loop at level {j}")));
                }
                if j >= n || k >= n {
                    return Err(err(format!("endpoint {} out of range for d={n}", j.max(k))));
                }
                if !edges.insert(norm_edge(j, k)) {
                    return Err(err(format!("duplicate edge ({j},{k})")));
                }
            }
            (Some(_), _) => return Err(err(format!("malformed line `{line}`"))),
        }
    }
    let d = d.ok_or(Error::Parse {
        line: 0,
        message: "missing `d <int>` line".into(),
    })?;
    CouplingGraph::new(d, edges)
}

/// Spanning tree of a coupling graph, oriented toward `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<Option<usize>>,
    edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    /// Orients an undirected edge list toward `root`, checking that it is a spanning tree.
    pub fn from_edges(d: usize, root: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if root >= d {
            return Err(Error::LevelOutOfRange { level: root, d });
        }
        let mut sorted: Vec<(usize, usize)> = edges.iter().map(|&(j, k)| norm_edge(j, k)).collect();
        sorted.sort_unstable();
        if sorted.len() + 1 != d {
            return Err(Error::InvalidGraph(format!(
                "a spanning tree on {d} levels needs {} edges, got {}",
                d - 1,
                sorted.len()
            )));
        }
        let g = CouplingGraph::new(d, sorted.iter().copied())?;
        g.check_connected(root)?;
        let mut parent = vec![None; d];
        let mut seen = vec![false; d];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        Ok(Self { root, parent, edges: sorted })
    }

    pub fn d(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Tree edges as `(j,k)` with `j < k`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Children of `v` in ascending level order.
    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.d()).filter(|&w| self.parent[w] == Some(v)).collect()
    }

    /// Number of edges between `v` and the root.
    pub fn depth(&self, v: usize) -> usize {
        let mut depth = 0;
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            depth += 1;
            cur = p;
        }
        depth
    }

    pub fn valency(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_valency(&self) -> usize {
        (0..self.d()).map(|v| self.valency(v)).max().unwrap_or(0)
    }

    /// Levels in breadth-first order from the root, children ascending.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = vec![self.root];
        let mut i = 0;
        while i < order.len() {
            order.extend(self.children(order[i]));
            i += 1;
        }
        order
    }

    /// Independent structural check against a host graph.
    pub fn is_valid_in(&self, g: &CouplingGraph) -> bool {
        let d = g.d();
        if self.d() != d || self.edges.len() + 1 != d {
            return false;
        }
        if !self.edges.iter().all(|&(j, k)| g.has_edge(j, k)) {
            return false;
        }
        let mut uf = UnionFind::new(d);
        self.edges.iter().all(|&(j, k)| uf.union(j, k))
            && (0..d).all(|v| (v == self.root) == self.parent[v].is_none())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Enumerates spanning trees rooted at `root` in lexicographic order of sorted edge lists.
pub fn spanning_trees(g: &CouplingGraph, root: usize, limit: usize) -> Result<Vec<SpanningTree>> {
    g.check_connected(root)?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let d = g.d();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(d - 1);
    let mut parents: Vec<usize> = (0..d).collect();
    enumerate(&edges, 0, d, limit.max(1), &mut chosen, &mut parents, &mut out);
    out.into_iter()
        .map(|es| SpanningTree::from_edges(d, root, &es))
        .collect()
}

fn enumerate(
    edges: &[(usize, usize)],
    idx: usize,
    d: usize,
    limit: usize,
    chosen: &mut Vec<(usize, usize)>,
    components: &mut Vec<usize>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if out.len() >= limit {
        return;
    }
    if chosen.len() + 1 == d {
        out.push(chosen.clone());
        return;
    }
    if chosen.len() + (edges.len() - idx) + 1 < d || !still_connectable(edges, idx, chosen, d) {
        return;
    }
    let (j, k) = edges[idx];
    let (cj, ck) = (components[j], components[k]);
    if cj != ck {
        let saved = components.clone();
        for c in components.iter_mut() {
            if *c == ck {
                *c = cj;
            }
        }
        chosen.push((j, k));
        enumerate(edges, idx + 1, d, limit, chosen, components, out);
        chosen.pop();
        *components = saved;
    }
    enumerate(edges, idx + 1, d, limit, chosen, components, out);
}

fn still_connectable(edges: &[(usize, usize)], idx: usize, chosen: &[(usize, usize)], d: usize) -> bool {
    let mut uf = UnionFind::new(d);
    let mut joined = 0;
    for &(j, k) in chosen.iter().chain(&edges[idx..]) {
        if uf.union(j, k) {
            joined += 1;
        }
    }
    joined + 1 == d
}

/// Proper edge coloring of a spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    colors: BTreeMap<(usize, usize), usize>,
    count: usize,
}

impl EdgeColoring {
    /// Wraps an explicit assignment; properness is checked by [`EdgeColoring::check_proper`].
    pub fn from_assignment(assignment: impl IntoIterator<Item = ((usize, usize), usize)>) -> Self {
        let colors: BTreeMap<_, _> = assignment
            .into_iter()
            .map(|((j, k), c)| (norm_edge(j, k), c))
            .collect();
        let count = colors.values().map(|&c| c + 1).max().unwrap_or(0);
        Self { colors, count }
    }

    /// Number of colors used.
    pub fn c(&self) -> usize {
        self.count
    }

    pub fn color(&self, j: usize, k: usize) -> Option<usize> {
        self.colors.get(&norm_edge(j, k)).copied()
    }

    /// Edges grouped by color, each class sorted.
    pub fn classes(&self) -> Vec<Vec<(usize, usize)>> {
        let mut classes = vec![Vec::new(); self.count];
        for (&e, &c) in &self.colors {
            classes[c].push(e);
        }
        classes
    }

    pub fn check_proper(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (&(j, k), &c) in &self.colors {
            for node in [j, k] {
                if !seen.insert((node, c)) {
                    return Err(Error::ImproperColoring { node, color: c });
                }
            }
        }
        Ok(())
    }
}

/// Greedy coloring over edges in BFS order from the root, smallest free color first.
pub fn color_tree(t: &SpanningTree) -> EdgeColoring {
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); t.d()];
    let mut assignment = Vec::new();
    for v in t.bfs_order() {
        for child in t.children(v) {
            let c = (0..).find(|c| !used[v].contains(c) && !used[child].contains(c)).unwrap_or(0);
            used[v].insert(c);
            used[child].insert(c);
            assignment.push(((v, child), c));
        }
    }
    EdgeColoring::from_assignment(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rb87_matches_reference() {
        let g = builtin_graph("rb87").unwrap();
        assert_eq!(g.d(), 8);
        assert_eq!(g.edge_count(), 9);
        assert!(g.has_edge(1, 5));
        assert!(g.has_edge(3, 2));
        assert!(!g.has_edge(0, 1));
        assert_eq!(g.name(), Some("rb87"));
    }

    #[test]
    fn builtin_cs133_matches_reference() {
        let g = builtin_graph("cs133").unwrap();
        assert_eq!(g.d(), 16);
        assert_eq!(g.edge_count(), 21);
        for v in 0..16 {
            assert!(!g.neighbors(v).is_empty());
        }
    }

    #[test]
    fn unknown_builtin_lists_available() {
        let err = builtin_graph("k40").unwrap_err().to_string();
        assert!(err.contains("rb87") && err.contains("cs133"), "{err}");
    }

    #[test]
    fn load_simple_graph() {
        let g = load_graph("d 3\ne 0 1\ne 1 2").unwrap();
        assert_eq!(g.d(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn load_errors_report_lines() {
        let cases = [
            ("d 2\ne 0 0", 2),
            ("d 2\n# c\ne 0 2", 3),
            ("d 3\ne 0 1\ne 1 0", 3),
            ("e 0 1", 1),
            ("d 3\nx 0 1", 2),
        ];
        for (text, line) in cases {
            match load_graph(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(load_graph("d 2\ne 0 0").unwrap_err().to_string().contains("self-loop"));
    }

    #[test]
    fn builtin_round_trips() {
        for name in BUILTIN_GRAPHS {
            let g = builtin_graph(name).unwrap();
            let text = g.to_text();
            let back = load_graph(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn path_has_one_tree() {
        let g = load_graph("d 3\ne 0 1\ne 1 2").unwrap();
        let trees = spanning_trees(&g, 0, 10).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].parent(2), Some(1));
    }

    #[test]
    fn disconnected_graph_names_node() {
        let g = load_graph("d 4\ne 0 1\ne 2 3").unwrap();
        assert_eq!(
            spanning_trees(&g, 0, 10).unwrap_err(),
            Error::Disconnected { node: 2, root: 0 }
        );
    }

    #[test]
    fn limit_truncates() {
        let g = builtin_graph("cs133").unwrap();
        let trees = spanning_trees(&g, 3, 10).unwrap();
        assert_eq!(trees.len(), 10);
        let distinct: BTreeSet<_> = trees.iter().map(|t| t.edges().to_vec()).collect();
        assert_eq!(distinct.len(), 10);
        assert!(trees.iter().all(|t| t.is_valid_in(&g) && t.root() == 3));
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let g = builtin_graph("rb87").unwrap();
        let trees = spanning_trees(&g, 0, DEFAULT_TREE_LIMIT).unwrap();
        let lists: Vec<_> = trees.iter().map(|t| t.edges().to_vec()).collect();
        assert!(lists.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn coloring_star_and_path() {
        let star = SpanningTree::from_edges(5, 0, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(color_tree(&star).c(), 4);
        let path = SpanningTree::from_edges(4, 0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(color_tree(&path).c(), 2);
        let edge = SpanningTree::from_edges(2, 1, &[(0, 1)]).unwrap();
        assert_eq!(color_tree(&edge).c(), 1);
    }

    #[test]
    fn improper_coloring_detected() {
        let bad = EdgeColoring::from_assignment([((0, 1), 0), ((1, 2), 0)]);
        assert_eq!(bad.check_proper(), Err(Error::ImproperColoring { node: 1, color: 0 }));
    }
}
