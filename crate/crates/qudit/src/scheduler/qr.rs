//! Precedence structure and column round-robin scheduling for Givens QR.
//!
//! Entry `(i, c)` is the elimination of the matrix element in row-order
//! position `i` and column `c` (both 0-based, `i > c`). Column 0 follows a
//! caller-supplied plan over a spanning tree; every later column pairs each row
//! with the row directly above it in the row order.

use std::collections::BTreeMap;

use super::{best_state_synthesis, RotationLabel, Schedule, SynthesisOptions};
use crate::coupling_graph::{CouplingGraph, SpanningTree};
use crate::error::{Error, Result};

const RB87_ROW_ORDER: [usize; 8] = [7, 5, 0, 6, 1, 4, 2, 3];
const RB87_PLAN: &str = "G70 G05 G06 [G52 G61] [G14 G23]";
const CS133_ROW_ORDER: [usize; 16] = [15, 14, 0, 13, 1, 12, 2, 11, 3, 10, 4, 9, 5, 8, 6, 7];
const CS133_PLAN: &str =
    "G15,0 G0,13 G13,2 G2,11 G11,4 G4,9 G9,5 G9,6 [G0,14 G13,1 G2,12 G11,3 G4,10 G5,8 G6,7]";

/// Row order plus first-column elimination plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrLayout {
    pub row_order: Vec<usize>,
    pub first_column_plan: Schedule,
}

impl QrLayout {
    /// Spanning tree formed by the first-column plan, rooted at the first row.
    pub fn plan_tree(&self) -> Result<SpanningTree> {
        let edges: Vec<(usize, usize)> = self.first_column_plan.rotations().map(|r| (r.pivot, r.target)).collect();
        SpanningTree::from_edges(self.row_order.len(), self.row_order[0], &edges)
    }
}

/// Hand-crafted layouts for the built-in graphs.
pub fn builtin_qr_layout(name: &str) -> Option<QrLayout> {
    let (order, plan): (&[usize], &str) = match name {
        "rb87" => (&RB87_ROW_ORDER, RB87_PLAN),
        "cs133" => (&CS133_ROW_ORDER, CS133_PLAN),
        _ => return None,
    };
    Some(QrLayout {
        row_order: order.to_vec(),
        first_column_plan: Schedule::parse_paper(plan).expect("built-in plan parses"),
    })
}

/// Built-in layout for built-in graphs, otherwise a searched row order.
///
/// Rows after the first must form a path in the graph so that every later
/// column pairs adjacent levels; the first row is the smallest level for which
/// such a path exists. The first-column plan is the best unconstrained
/// state-synthesis schedule toward that level.
pub fn default_qr_layout(g: &CouplingGraph) -> Result<QrLayout> {
    if let Some(name) = g.name() {
        if let Some(layout) = builtin_qr_layout(name) {
            if crate::coupling_graph::builtin_graph(name).is_ok_and(|b| &b == g) {
                return Ok(layout);
            }
        }
    }
    let d = g.d();
    g.check_connected(0)?;
    let mut budget = 2_000_000usize;
    for first in 0..d {
        let rest: Vec<usize> = (0..d).filter(|&v| v != first).collect();
        if let Some(path) = hamiltonian_path(g, &rest, &mut budget) {
            let mut row_order = vec![first];
            row_order.extend(path);
            let (_, plan) = best_state_synthesis(g, first, d, &SynthesisOptions::default())?;
            return Ok(QrLayout {
                row_order,
                first_column_plan: plan,
            });
        }
    }
    Err(Error::InvalidPlan(
        "no row order found whose rows 1..d-1 form a path in the graph".into(),
    ))
}

fn hamiltonian_path(g: &CouplingGraph, nodes: &[usize], budget: &mut usize) -> Option<Vec<usize>> {
    fn extend(
        g: &CouplingGraph,
        path: &mut Vec<usize>,
        free: &mut BTreeMap<usize, bool>,
        want: usize,
        budget: &mut usize,
    ) -> bool {
        if path.len() == want {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let last = *path.last().expect("path is seeded");
        for w in g.neighbors(last) {
            if free.get(&w) == Some(&true) {
                free.insert(w, false);
                path.push(w);
                if extend(g, path, free, want, budget) {
                    return true;
                }
                path.pop();
                free.insert(w, true);
            }
        }
        false
    }
    for &start in nodes {
        let mut free: BTreeMap<usize, bool> = nodes.iter().map(|&v| (v, v != start)).collect();
        let mut path = vec![start];
        if extend(g, &mut path, &mut free, nodes.len(), budget) {
            return Some(path);
        }
    }
    None
}

/// One elimination in the QR precedence structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagNode {
    /// Row-order position of the eliminated row.
    pub position: usize,
    pub column: usize,
    pub rotation: RotationLabel,
    /// Indices of nodes that must finish first.
    pub preds: Vec<usize>,
}

/// Precedence constraints among the `d(d−1)/2` subdiagonal eliminations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceDag {
    d: usize,
    row_order: Vec<usize>,
    nodes: Vec<DagNode>,
    index: BTreeMap<(usize, usize), usize>,
}

impl PrecedenceDag {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row_order(&self) -> &[usize] {
        &self.row_order
    }

    /// Nodes in a topological order (plan order for column 0, then column by column bottom-up).
    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    /// Node index for entry `(position, column)`.
    pub fn node_at(&self, position: usize, column: usize) -> Option<usize> {
        self.index.get(&(position, column)).copied()
    }

    /// The nodes as a serial schedule in topological order.
    pub fn topological_schedule(&self) -> Schedule {
        Schedule::new(self.nodes.iter().map(|n| vec![n.rotation]).collect())
    }
}

/// Builds the QR precedence structure for `row_order` and a first-column plan.
pub fn qr_precedence(
    g: &CouplingGraph,
    row_order: &[usize],
    first_column_plan: &Schedule,
) -> Result<PrecedenceDag> {
    let d = g.d();
    let mut pos = vec![usize::MAX; d];
    if row_order.len() != d {
        return Err(Error::InvalidPlan(format!(
            "row order has {} entries, expected {d}",
            row_order.len()
        )));
    }
    for (i, &r) in row_order.iter().enumerate() {
        if r >= d || pos[r] != usize::MAX {
            return Err(Error::InvalidPlan(format!("row order is not a permutation of 0..{d}")));
        }
        pos[r] = i;
    }
    first_column_plan
        .check_disjoint()
        .map_err(|e| Error::InvalidPlan(e.to_string()))?;

    let mut nodes: Vec<DagNode> = Vec::new();
    let mut index = BTreeMap::new();
    let mut eliminated = vec![false; d];
    for r in first_column_plan.rotations() {
        if !g.has_edge(r.pivot, r.target) {
            return Err(Error::NotAnEdge(r.pivot, r.target));
        }
        if r.target == row_order[0] {
            return Err(Error::InvalidPlan(format!("plan eliminates the first row {}", r.target)));
        }
        if eliminated[r.target] {
            return Err(Error::InvalidPlan(format!("row {} is eliminated twice", r.target)));
        }
        if eliminated[r.pivot] {
            return Err(Error::InvalidPlan(format!(
                "row {} receives weight after being eliminated",
                r.pivot
            )));
        }
        eliminated[r.target] = true;
        let preds = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.rotation.pivot == r.target)
            .map(|(i, _)| i)
            .collect();
        index.insert((pos[r.target], 0), nodes.len());
        nodes.push(DagNode {
            position: pos[r.target],
            column: 0,
            rotation: RotationLabel::new(r.pivot, r.target).with_column(0),
            preds,
        });
    }
    if let Some(missing) = row_order[1..].iter().find(|&&r| !eliminated[r]) {
        return Err(Error::InvalidPlan(format!("plan does not eliminate row {missing}")));
    }

    for c in 1..d.saturating_sub(1) {
        for i in (c + 1..d).rev() {
            let (upper, lower) = (row_order[i - 1], row_order[i]);
            if !g.has_edge(upper, lower) {
                return Err(Error::NotAnEdge(upper, lower));
            }
            let mut preds = vec![index[&(i, c - 1)], index[&(i - 1, c - 1)]];
            if i + 1 < d {
                preds.push(index[&(i + 1, c)]);
            }
            index.insert((i, c), nodes.len());
            nodes.push(DagNode {
                position: i,
                column: c,
                rotation: RotationLabel::new(upper, lower).with_column(c),
                preds,
            });
        }
    }
    Ok(PrecedenceDag {
        d,
        row_order: row_order.to_vec(),
        nodes,
        index,
    })
}

/// Column round-robin scheduling under a width budget `k`.
///
/// A pointer sweeps the columns right to left, repeatedly. At each column it
/// takes one ready elimination (all predecessors placed): the bottom-most for
/// later columns; in column 0, the one with the longest chain of eliminations
/// to the first row, ties to the larger pivot then target level. The rotation
/// is placed at the earliest step after its predecessors that has spare width
/// and no level conflict.
pub fn constrain_dag(dag: &PrecedenceDag, k: usize) -> Schedule {
    let k = k.max(1);
    let n = dag.nodes.len();
    let chain = first_column_chain(dag);
    let mut step: Vec<Option<usize>> = vec![None; n];
    let mut load: Vec<usize> = Vec::new();
    let mut busy: Vec<Vec<usize>> = Vec::new();
    let mut placed = 0;
    while placed < n {
        let before = placed;
        for c in (0..dag.d.saturating_sub(1)).rev() {
            let ready = (0..n).filter(|&i| {
                dag.nodes[i].column == c
                    && step[i].is_none()
                    && dag.nodes[i].preds.iter().all(|&p| step[p].is_some())
            });
            let pick = if c == 0 {
                ready.max_by_key(|&i| {
                    let r = dag.nodes[i].rotation;
                    (chain[i], r.pivot, r.target)
                })
            } else {
                ready.max_by_key(|&i| dag.nodes[i].position)
            };
            let Some(i) = pick else { continue };
            let r = dag.nodes[i].rotation;
            let mut t = dag.nodes[i].preds.iter().map(|&p| step[p].unwrap_or(0)).max().unwrap_or(0) + 1;
            loop {
                if load.len() <= t {
                    load.resize(t + 1, 0);
                    busy.resize(t + 1, Vec::new());
                }
                if load[t] < k && !busy[t].contains(&r.pivot) && !busy[t].contains(&r.target) {
                    break;
                }
                t += 1;
            }
            load[t] += 1;
            busy[t].extend([r.pivot, r.target]);
            step[i] = Some(t);
            placed += 1;
        }
        assert!(placed > before, "precedence structure must be acyclic");
    }
    Schedule::from_assignment(
        dag.nodes
            .iter()
            .zip(step)
            .map(|(node, s)| (node.rotation, s.expect("all nodes placed"))),
    )
}

/// Number of first-column eliminations from each node up to the first row, inclusive.
fn first_column_chain(dag: &PrecedenceDag) -> Vec<usize> {
    let by_target: BTreeMap<usize, usize> = dag
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.column == 0)
        .map(|(i, n)| (n.rotation.target, i))
        .collect();
    dag.nodes
        .iter()
        .map(|n| {
            if n.column != 0 {
                return 0;
            }
            let mut len = 1;
            let mut pivot = n.rotation.pivot;
            while let Some(&next) = by_target.get(&pivot) {
                len += 1;
                pivot = dag.nodes[next].rotation.pivot;
            }
            len
        })
        .collect()
}

/// Step of every entry as a lower-triangular matrix: row `i−1` lists columns `0..i`.
pub fn step_matrix(dag: &PrecedenceDag, schedule: &Schedule) -> Vec<Vec<usize>> {
    let steps = schedule.step_of();
    (1..dag.d)
        .map(|i| {
            (0..i)
                .map(|c| {
                    let node = &dag.nodes[dag.index[&(i, c)]];
                    steps.get(&node.rotation).copied().unwrap_or(0)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling_graph::{builtin_graph, load_graph};

    fn dag_for(name: &str) -> PrecedenceDag {
        let g = builtin_graph(name).unwrap();
        let layout = builtin_qr_layout(name).unwrap();
        qr_precedence(&g, &layout.row_order, &layout.first_column_plan).unwrap()
    }

    #[test]
    fn node_counts() {
        assert_eq!(dag_for("rb87").nodes().len(), 28);
        assert_eq!(dag_for("cs133").nodes().len(), 120);
    }

    #[test]
    fn topological_order_is_consistent() {
        for name in ["rb87", "cs133"] {
            let dag = dag_for(name);
            for (i, n) in dag.nodes().iter().enumerate() {
                assert!(n.preds.iter().all(|&p| p < i));
            }
        }
    }

    #[test]
    fn serial_budget_uses_every_step() {
        let dag = dag_for("rb87");
        let s = constrain_dag(&dag, 1);
        assert_eq!(s.depth(), 28);
    }

    #[test]
    fn last_entry_of_rb87_three_way() {
        let dag = dag_for("rb87");
        let m = step_matrix(&dag, &constrain_dag(&dag, 3));
        assert_eq!(m[6][6], 13);
    }

    #[test]
    fn plan_errors() {
        let g = builtin_graph("rb87").unwrap();
        let order = RB87_ROW_ORDER;
        let missing = Schedule::parse_paper("G70 G05 G06 [G52 G61] G14").unwrap();
        assert!(matches!(qr_precedence(&g, &order, &missing), Err(Error::InvalidPlan(_))));
        let non_edge = Schedule::parse_paper("G70 G05 G06 [G52 G61] [G14 G27]").unwrap();
        assert_eq!(qr_precedence(&g, &order, &non_edge), Err(Error::NotAnEdge(2, 7)));
        assert!(qr_precedence(&g, &[0, 1, 2], &missing).is_err());
    }

    #[test]
    fn path_graph_layout() {
        let g = load_graph("d 3\ne 0 1\ne 1 2").unwrap();
        let layout = default_qr_layout(&g).unwrap();
        let dag = qr_precedence(&g, &layout.row_order, &layout.first_column_plan).unwrap();
        assert_eq!(constrain_dag(&dag, 1).depth(), 3);
    }

    #[test]
    fn builtin_names_use_builtin_layout() {
        let g = builtin_graph("cs133").unwrap();
        assert_eq!(default_qr_layout(&g).unwrap(), builtin_qr_layout("cs133").unwrap());
    }
}
