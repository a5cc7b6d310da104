//! State-synthesis scheduling over spanning trees.

use std::collections::BTreeMap;

use super::{RotationLabel, Schedule};
use crate::coupling_graph::{spanning_trees, CouplingGraph, SpanningTree, DEFAULT_TREE_LIMIT};
use crate::error::Result;

/// Knobs for [`best_state_synthesis`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisOptions {
    /// Graph edges the scheduler may not use.
    pub excluded_edges: Vec<(usize, usize)>,
    /// Cap on enumerated spanning trees.
    pub tree_limit: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            excluded_edges: Vec::new(),
            tree_limit: DEFAULT_TREE_LIMIT,
        }
    }
}

impl SynthesisOptions {
    /// Defaults for a graph: the rb87 (1,5) coupling is left unused.
    pub fn for_graph(g: &CouplingGraph) -> Self {
        let excluded_edges = match g.name() {
            Some("rb87") => vec![(1, 5)],
            _ => Vec::new(),
        };
        Self {
            excluded_edges,
            ..Self::default()
        }
    }
}

/// Node of a binary computation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BctNode {
    /// A spanning-tree level.
    Leaf { level: usize },
    /// Rotation merging the subtree of `target` into `pivot`.
    /// `children[0]` is the target's subtree, `children[1]` continues the pivot's chain.
    Merge {
        pivot: usize,
        target: usize,
        children: [usize; 2],
    },
}

/// Binary tree obtained by replacing every node with `p` children by a chain of `p` merges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryComputationTree {
    nodes: Vec<BctNode>,
    root: usize,
    height: usize,
}

impl BinaryComputationTree {
    pub fn nodes(&self) -> &[BctNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Height counted in node levels (a single leaf has height 1).
    pub fn height(&self) -> usize {
        self.height
    }

    /// Spanning-tree levels at the leaves, in node order.
    pub fn leaves(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                BctNode::Leaf { level } => Some(*level),
                BctNode::Merge { .. } => None,
            })
            .collect()
    }

    fn node_height(&self, idx: usize) -> usize {
        match self.nodes[idx] {
            BctNode::Leaf { .. } => 1,
            BctNode::Merge { children, .. } => {
                1 + self.node_height(children[0]).max(self.node_height(children[1]))
            }
        }
    }
}

fn subtree_height(t: &SpanningTree, v: usize, memo: &mut BTreeMap<usize, usize>) -> usize {
    if let Some(&h) = memo.get(&v) {
        return h;
    }
    let kids = ordered_children(t, v, memo);
    let mut h = kids.len() + 1;
    for (i, &c) in kids.iter().enumerate() {
        h = h.max(i + 1 + subtree_height(t, c, memo));
    }
    memo.insert(v, h);
    h
}

/// Children ordered tallest subtree first, then by level index.
fn ordered_children(t: &SpanningTree, v: usize, memo: &mut BTreeMap<usize, usize>) -> Vec<usize> {
    let mut keyed: Vec<(usize, usize)> = t
        .children(v)
        .into_iter()
        .map(|c| (subtree_height(t, c, memo), c))
        .collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, c)| c).collect()
}

/// Bottom-up chain construction; the tallest child subtree hangs nearest the chain top.
pub fn build_bct(t: &SpanningTree) -> BinaryComputationTree {
    fn build(
        t: &SpanningTree,
        v: usize,
        memo: &mut BTreeMap<usize, usize>,
        nodes: &mut Vec<BctNode>,
    ) -> usize {
        let kids = ordered_children(t, v, memo);
        nodes.push(BctNode::Leaf { level: v });
        let mut next = nodes.len() - 1;
        for &c in kids.iter().rev() {
            let sub = build(t, c, memo, nodes);
            nodes.push(BctNode::Merge {
                pivot: v,
                target: c,
                children: [sub, next],
            });
            next = nodes.len() - 1;
        }
        next
    }
    let mut memo = BTreeMap::new();
    let mut nodes = Vec::new();
    let root = build(t, t.root(), &mut memo, &mut nodes);
    let mut bct = BinaryComputationTree { nodes, root, height: 0 };
    bct.height = bct.node_height(root);
    debug_assert_eq!(bct.height, subtree_height(t, t.root(), &mut memo));
    bct
}

/// Schedules each merge at step `K − 1 − depth`, with `K` the BCT height.
pub fn bct_schedule(b: &BinaryComputationTree) -> Schedule {
    let k = b.height();
    let mut assignment = Vec::new();
    let mut stack = vec![(b.root(), 0usize)];
    while let Some((idx, depth)) = stack.pop() {
        if let BctNode::Merge {
            pivot,
            target,
            children,
        } = b.nodes()[idx]
        {
            assignment.push((RotationLabel::new(pivot, target), k - 1 - depth));
            stack.push((children[1], depth + 1));
            stack.push((children[0], depth + 1));
        }
    }
    Schedule::from_assignment(assignment)
}

/// Removes leaves farthest-first; equidistant leaves go in descending level order.
pub fn greedy_schedule(t: &SpanningTree) -> Schedule {
    let d = t.d();
    let depth: Vec<usize> = (0..d).map(|v| t.depth(v)).collect();
    let mut alive = vec![true; d];
    let mut open_children: Vec<usize> = (0..d).map(|v| t.children(v).len()).collect();
    let mut remaining = d - 1;
    let mut steps = Vec::new();
    while remaining > 0 {
        let mut leaves: Vec<usize> = (0..d)
            .filter(|&v| alive[v] && v != t.root() && open_children[v] == 0)
            .collect();
        leaves.sort_by(|&a, &b| depth[b].cmp(&depth[a]).then(b.cmp(&a)));
        let mut used = vec![false; d];
        let mut step = Vec::new();
        for v in leaves {
            let p = t.parent(v).expect("non-root has a parent");
            if used[v] || used[p] {
                continue;
            }
            used[v] = true;
            used[p] = true;
            step.push(RotationLabel::new(p, v));
        }
        for r in &step {
            alive[r.target] = false;
            open_children[r.pivot] -= 1;
            remaining -= 1;
        }
        steps.push(step);
    }
    Schedule::new(steps)
}

/// List-schedules a tree schedule under a width budget `k`.
///
/// A rotation becomes ready once every rotation emptying into its target has
/// finished. Ready rotations are admitted by (original step, distance of the
/// target from the root descending, target level descending) while levels stay disjoint.
pub fn constrain_tree_schedule(s: &Schedule, k: usize) -> Schedule {
    let k = k.max(1);
    if s.width() <= k {
        return s.clone();
    }
    let original = s.step_of();
    let rotations: Vec<RotationLabel> = s.rotations().collect();
    let parent: BTreeMap<usize, usize> = rotations.iter().map(|r| (r.target, r.pivot)).collect();
    let distance = |mut v: usize| {
        let mut n = 0;
        while let Some(&p) = parent.get(&v) {
            n += 1;
            v = p;
        }
        n
    };
    let preds: Vec<Vec<usize>> = rotations
        .iter()
        .map(|r| {
            rotations
                .iter()
                .enumerate()
                .filter(|(_, q)| q.pivot == r.target)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut placed: Vec<Option<usize>> = vec![None; rotations.len()];
    let mut steps: Vec<Vec<RotationLabel>> = Vec::new();
    let mut done = 0;
    while done < rotations.len() {
        let t = steps.len() + 1;
        let mut ready: Vec<usize> = (0..rotations.len())
            .filter(|&i| placed[i].is_none() && preds[i].iter().all(|&p| placed[p].is_some_and(|s| s < t)))
            .collect();
        ready.sort_by(|&a, &b| {
            let (ra, rb) = (rotations[a], rotations[b]);
            original[&ra]
                .cmp(&original[&rb])
                .then(distance(rb.target).cmp(&distance(ra.target)))
                .then(rb.target.cmp(&ra.target))
        });
        let mut step: Vec<RotationLabel> = Vec::new();
        for i in ready {
            if step.len() == k {
                break;
            }
            let r = rotations[i];
            if step.iter().any(|q| q.touches(r.pivot) || q.touches(r.target)) {
                continue;
            }
            step.push(r);
            placed[i] = Some(t);
            done += 1;
        }
        steps.push(step);
    }
    Schedule::new(steps)
}

/// Minimum-depth state-synthesis schedule over the enumerated spanning trees rooted at `target`.
///
/// Ties keep the earliest tree in enumeration order.
pub fn best_state_synthesis(
    g: &CouplingGraph,
    target: usize,
    k: usize,
    opts: &SynthesisOptions,
) -> Result<(SpanningTree, Schedule)> {
    let usable = g.without_edges(&opts.excluded_edges);
    let trees = spanning_trees(&usable, target, opts.tree_limit)?;
    let mut best: Option<(SpanningTree, Schedule)> = None;
    for tree in trees {
        let schedule = constrain_tree_schedule(&bct_schedule(&build_bct(&tree)), k);
        if best.as_ref().is_none_or(|(_, b)| schedule.depth() < b.depth()) {
            best = Some((tree, schedule));
        }
    }
    Ok(best.expect("a connected graph has at least one spanning tree"))
}
