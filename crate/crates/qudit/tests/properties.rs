//! Property tests over random graphs, trees, unitaries and protocol inputs.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use qudit::coupling_graph::{
    builtin_graph, color_tree, load_graph, spanning_trees, CouplingGraph, SpanningTree, BUILTIN_GRAPHS,
};
use qudit::givens_synthesis::{
    diag_solve, edge_phase_product, euler_rotations, givens_matrix, qr_decompose_in_order, state_reduce,
    DiagonalGate,
};
use qudit::linalg::{
    random_hermitian, random_special_unitary, random_state, random_unitary, seeded_rng, state_fidelity,
    unitarity_defect, ComplexMatrix,
};
use qudit::nonlocal_protocol::{nonlocal_cv, step4_commutator_norm, two_qudit_state_synth, BranchMode};
use qudit::scheduler::{
    bct_schedule, build_bct, builtin_qr_layout, constrain_dag, constrain_tree_schedule, greedy_schedule,
    lower_bound, qr_precedence, PrecedenceDag, Schedule,
};

/// Random tree on `d` levels plus up to `extra` random chords, labels shuffled.
fn random_graph(d: usize, extra: usize, seed: u64) -> CouplingGraph {
    let mut rng = seeded_rng(seed);
    let mut labels: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 1..d {
        edges.push((labels[i], labels[rng.random_range(0..i)]));
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..d), rng.random_range(0..d));
        let e = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
            edges.push(e);
        }
    }
    CouplingGraph::new(d, edges).unwrap()
}

fn random_tree(d: usize, seed: u64) -> SpanningTree {
    let g = random_graph(d, 0, seed);
    let edges: Vec<(usize, usize)> = g.edges().collect();
    SpanningTree::from_edges(d, (seed as usize) % d, &edges).unwrap()
}

fn tree_graph(t: &SpanningTree) -> CouplingGraph {
    CouplingGraph::new(t.d(), t.edges().iter().copied()).unwrap()
}

/// Independent check: `d−1` graph edges that connect every level.
fn is_spanning_tree(t: &SpanningTree, g: &CouplingGraph) -> bool {
    let d = g.d();
    if t.edges().len() + 1 != d || !t.edges().iter().all(|&(j, k)| g.has_edge(j, k)) {
        return false;
    }
    let mut comp: Vec<usize> = (0..d).collect();
    for &(j, k) in t.edges() {
        let (a, b) = (comp[j], comp[k]);
        if a == b {
            return false;
        }
        comp.iter_mut().filter(|c| **c == b).for_each(|c| *c = a);
    }
    comp.iter().all(|&c| c == comp[0])
}

fn reduces_to_root(t: &SpanningTree, s: &Schedule, seed: u64) -> bool {
    let g = tree_graph(t);
    let psi = random_state(t.d(), &mut seeded_rng(seed));
    let r = state_reduce(&g, s, &psi, t.root()).unwrap();
    r.leakage(t.root()) <= 1e-10
}

fn same_rotations(a: &Schedule, b: &Schedule) -> bool {
    let mut x: Vec<_> = a.rotations().collect();
    let mut y: Vec<_> = b.rotations().collect();
    x.sort();
    y.sort();
    x == y
}

fn builtin_dag(name: &str) -> PrecedenceDag {
    let g = builtin_graph(name).unwrap();
    let l = builtin_qr_layout(name).unwrap();
    qr_precedence(&g, &l.row_order, &l.first_column_plan).unwrap()
}

fn respects_precedence(dag: &PrecedenceDag, s: &Schedule) -> bool {
    let step = s.step_of();
    dag.nodes().iter().all(|n| {
        n.preds
            .iter()
            .all(|&p| step[&dag.nodes()[p].rotation] < step[&n.rotation])
    })
}

#[test]
fn qr_schedules_respect_precedence_at_every_width() {
    for name in BUILTIN_GRAPHS {
        let dag = builtin_dag(name);
        let d = dag.d();
        let m = d * (d - 1) / 2;
        let mut previous = usize::MAX;
        for k in 1..=d {
            let s = constrain_dag(&dag, k);
            s.check_disjoint().unwrap();
            assert!(s.width() <= k);
            assert_eq!(s.rotation_count(), m);
            assert!(respects_precedence(&dag, &s), "{name} k={k}");
            assert!(s.depth() >= lower_bound(d, m, k), "{name} k={k}");
            assert!(s.depth() <= previous, "{name} k={k}");
            previous = s.depth();
        }
    }
}

#[test]
fn builtin_graphs_round_trip() {
    for name in BUILTIN_GRAPHS {
        let g = builtin_graph(name).unwrap();
        let text = g.to_text();
        let back = load_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerated_trees_are_spanning(d in 2usize..8, extra in 0usize..5, seed in any::<u64>()) {
        let g = random_graph(d, extra, seed);
        let trees = spanning_trees(&g, 0, 500).unwrap();
        prop_assert!(!trees.is_empty());
        for t in &trees {
            prop_assert!(is_spanning_tree(t, &g));
        }
        let mut sorted = trees.iter().map(|t| t.edges().to_vec()).collect::<Vec<_>>();
        let before = sorted.clone();
        sorted.sort();
        prop_assert_eq!(sorted, before);
    }

    #[test]
    fn tree_coloring_is_proper_with_max_valency_colors(d in 2usize..12, seed in any::<u64>()) {
        let t = random_tree(d, seed);
        let c = color_tree(&t);
        prop_assert!(c.check_proper().is_ok());
        prop_assert_eq!(c.c(), t.max_valency());
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(j, k) in t.edges() {
            let color = c.color(j, k).unwrap();
            for v in [j, k] {
                prop_assert!(seen.insert((v, color), j).is_none());
            }
        }
    }

    #[test]
    fn graph_text_round_trips(d in 2usize..10, extra in 0usize..6, seed in any::<u64>()) {
        let g = random_graph(d, extra, seed);
        let back = load_graph(&g.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), g.to_text());
        prop_assert_eq!(back, g);
    }

    #[test]
    fn tree_schedules_are_disjoint_and_ordered(d in 2usize..12, seed in any::<u64>()) {
        let t = random_tree(d, seed);
        let b = build_bct(&t);
        let bct = bct_schedule(&b);
        let greedy = greedy_schedule(&t);
        prop_assert_eq!(bct.depth(), b.height() - 1);
        prop_assert_eq!(greedy.depth(), bct.depth());
        for s in [&bct, &greedy] {
            prop_assert!(s.check_disjoint().is_ok());
            prop_assert_eq!(s.rotation_count(), d - 1);
            prop_assert!(reduces_to_root(&t, s, seed ^ 1));
        }
    }

    #[test]
    fn width_constraint_keeps_precedence(d in 2usize..12, seed in any::<u64>()) {
        let t = random_tree(d, seed);
        let s = bct_schedule(&build_bct(&t));
        let mut previous = usize::MAX;
        for k in 1..d {
            let c = constrain_tree_schedule(&s, k);
            prop_assert!(c.check_disjoint().is_ok());
            prop_assert!(c.width() <= k);
            prop_assert!(same_rotations(&c, &s));
            prop_assert!(c.depth() >= s.depth());
            prop_assert!(c.depth() <= previous, "k={} depth {} after {}", k, c.depth(), previous);
            prop_assert!(reduces_to_root(&t, &c, seed ^ 2));
            previous = c.depth();
        }
    }

    #[test]
    fn qr_reconstructs_random_special_unitaries(seed in any::<u64>(), k in 1usize..9) {
        let g = builtin_graph("rb87").unwrap();
        let dag = builtin_dag("rb87");
        let u = random_special_unitary(8, &mut seeded_rng(seed));
        let qr = qr_decompose_in_order(&g, &dag, &constrain_dag(&dag, k), &u).unwrap();
        prop_assert_eq!(qr.rotations.len(), 28);
        prop_assert!((qr.reconstruct() - &u).norm() <= 1e-9);
        for (_, r) in &qr.rotations {
            prop_assert!(unitarity_defect(&givens_matrix(r, 8).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn diag_solve_is_exact(d in 2usize..12, seed in any::<u64>()) {
        let t = random_tree(d, seed);
        let mut rng = seeded_rng(seed ^ 3);
        let mut phases: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let sum: f64 = phases.iter().sum();
        phases[d - 1] -= sum;
        let gate = DiagonalGate::new(phases);
        let edges = diag_solve(&t, &gate).unwrap();
        prop_assert_eq!(edges.len(), d - 1);
        let rebuilt = edge_phase_product(d, &edges);
        prop_assert!((rebuilt.matrix() - gate.matrix()).norm() <= 1e-12);

        // Three Givens rotations per edge, 3(d−1) in total, realize the same gate.
        let mut m = ComplexMatrix::identity(d, d);
        let mut count = 0;
        for e in &edges {
            for r in euler_rotations(e) {
                r.apply_rows(&mut m);
                count += 1;
            }
        }
        prop_assert_eq!(count, 3 * (d - 1));
        prop_assert!((m - gate.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn cv_branches_agree(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let v = random_unitary(d, &mut rng);
        let psi = random_state(d * d, &mut rng);
        let run = nonlocal_cv(&v, &psi, &BranchMode::Exhaustive).unwrap();
        prop_assert_eq!(run.branches.len(), 4);
        let first = &run.branches[0].state;
        for b in &run.branches {
            prop_assert!(state_fidelity(first, &b.state) >= 1.0 - 1e-10);
            prop_assert!((b.probability - 0.25).abs() <= 1e-12);
        }
        prop_assert!(run.min_fidelity() >= 1.0 - 1e-10);
        prop_assert!(run.max_norm_drift() <= 1e-12);
        prop_assert!(run.min_disentanglement() >= 1.0 - 1e-10);
        prop_assert_eq!((run.trace.ebits, run.trace.cbits), (1, 2));
    }

    #[test]
    fn synthesis_branches_agree(d in 2usize..5, seed in any::<u64>()) {
        let psi = random_state(d * d, &mut seeded_rng(seed));
        let out = two_qudit_state_synth(&psi, d, &BranchMode::Exhaustive).unwrap();
        prop_assert!(out.dense_residual <= 1e-9);
        prop_assert_eq!(out.run.branches.len(), 1 << (2 * (d - 1)));
        prop_assert!(out.run.min_fidelity() >= 1.0 - 1e-10);
        prop_assert!(out.run.max_norm_drift() <= 1e-12);
        prop_assert!(out.run.min_disentanglement() >= 1.0 - 1e-10);
        let t = &out.run.trace;
        prop_assert_eq!((t.ebits, t.cbits, t.steps), (d - 1, 2 * (d - 1), 7));
    }

    #[test]
    fn step4_gates_commute(d in 2usize..6, j1 in 0usize..4, gap in 1usize..4, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let h1 = random_hermitian(d, &mut rng);
        let h2 = random_hermitian(d, &mut rng);
        let n = step4_commutator_norm(d, (j1, &h1), (j1 + gap, &h2)).unwrap();
        prop_assert!(n <= 1e-12);
    }
}

