//! Command implementations.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;

use qudit::coupling_graph::{builtin_graph, color_tree, load_graph, spanning_trees, CouplingGraph, BUILTIN_GRAPHS, DEFAULT_TREE_LIMIT};
use qudit::givens_synthesis::{
    default_diagonal_tree, diag_solve, edge_phase_product, parallel_diagonal_schedule, qr_decompose_in_order,
    state_reduce, DiagonalGate,
};
use qudit::linalg::{parse_matrix, random_special_unitary, random_state, random_unitary, seeded_rng};
use qudit::nonlocal_protocol::{
    full_unitary_resources, nonlocal_controlled_phase, nonlocal_cv, nonlocal_full_unitary, two_qudit_state_synth,
    BranchMode, BranchRun, ProtocolTrace,
};
use qudit::scheduler::{
    best_state_synthesis, constrain_dag, counting_bound, default_qr_layout, lower_bound, qr_precedence, step_matrix,
    Schedule, SynthesisOptions,
};

use crate::{
    CliError, Command, DiagArgs, GraphArgs, NonlocalArgs, NonlocalCommand, PhaseArgs, QrArgs, Report, ScheduleArgs,
};

const LEAKAGE_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-9;
const DIAG_TOL: f64 = 1e-12;
const BRANCH_TOL: f64 = 1e-10;
const SYNTH_TOL: f64 = 1e-9;
const FULL_TOL: f64 = 1e-8;
const VERIFY_SAMPLES: usize = 20;

pub(crate) fn dispatch(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Graph(a) => graph(a),
        Command::ScheduleState(a) => schedule_state(a),
        Command::Qr(a) => qr(a),
        Command::Bounds(a) => bounds(a),
        Command::Diag(a) => diag(a),
        Command::Nonlocal(NonlocalCommand::Cv(a)) => nonlocal_cv_cmd(a),
        Command::Nonlocal(NonlocalCommand::Synth(a)) => nonlocal_synth_cmd(a),
        Command::Nonlocal(NonlocalCommand::Phase(a)) => nonlocal_phase_cmd(a),
        Command::Nonlocal(NonlocalCommand::Full(a)) => nonlocal_full_cmd(a),
    }
}

/// Built-in name, or a path to a graph file.
fn resolve_graph(spec: &str) -> Result<CouplingGraph, CliError> {
    if BUILTIN_GRAPHS.contains(&spec) {
        return Ok(builtin_graph(spec)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {spec}: {e}")))?;
        return Ok(load_graph(&text)?);
    }
    Ok(builtin_graph(spec)?)
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn step_lines(s: &Schedule) -> Vec<String> {
    s.steps()
        .iter()
        .enumerate()
        .filter(|(_, st)| !st.is_empty())
        .map(|(i, st)| {
            let r: Vec<String> = st.iter().map(|r| r.to_string()).collect();
            format!("step={} rotations={}", i + 1, r.join(" "))
        })
        .collect()
}

fn edge_list(edges: impl IntoIterator<Item = (usize, usize)>) -> String {
    edges
        .into_iter()
        .map(|(j, k)| format!("{j}-{k}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn graph(a: &GraphArgs) -> Result<Report, CliError> {
    let g = resolve_graph(&a.graph)?;
    g.check_connected(0)?;
    let trees = spanning_trees(&g, 0, DEFAULT_TREE_LIMIT)?;
    let count = if trees.len() >= DEFAULT_TREE_LIMIT {
        format!("{}+", trees.len())
    } else {
        trees.len().to_string()
    };
    let max_degree = (0..g.d()).map(|v| g.neighbors(v).len()).max().unwrap_or(0);
    let mut r = Report::new();
    r.field("graph", g.name().unwrap_or("file"))
        .field("d", g.d())
        .field("edges", g.edge_count())
        .field("max_degree", max_degree)
        .field("spanning_trees", count)
        .block(
            "edge list",
            g.edges().map(|(j, k)| format!("edge={j} {k}")),
        );
    Ok(r)
}

fn schedule_state(a: &ScheduleArgs) -> Result<Report, CliError> {
    let g = resolve_graph(&a.graph)?;
    let k = a.k.unwrap_or(g.d());
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let (tree, s) = best_state_synthesis(&g, a.target, k, &SynthesisOptions::for_graph(&g))?;
    let mut r = Report::new();
    r.field("graph", g.name().unwrap_or("file"))
        .field("target", a.target)
        .field("k", k)
        .field("depth", s.depth())
        .field("width", s.width())
        .field("rotations", s.rotation_count())
        .field("tree", edge_list(tree.edges().iter().copied()))
        .field("sequence", s.render_paper())
        .block("steps", step_lines(&s));
    if a.verify {
        let mut rng = seeded_rng(a.seed);
        let worst = (0..VERIFY_SAMPLES)
            .map(|_| {
                let psi = random_state(g.d(), &mut rng);
                state_reduce(&g, &s, &psi, a.target).map(|red| red.leakage(a.target))
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        r.field("max_leakage", sci(worst));
        r.check("leakage", worst <= LEAKAGE_TOL);
        r.check("disjoint", s.check_disjoint().is_ok());
    }
    Ok(r)
}

fn qr(a: &QrArgs) -> Result<Report, CliError> {
    let g = resolve_graph(&a.graph)?;
    let d = g.d();
    let k = a.k.unwrap_or(d);
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let layout = default_qr_layout(&g)?;
    let dag = qr_precedence(&g, &layout.row_order, &layout.first_column_plan)?;
    let s = constrain_dag(&dag, k);
    let m = d * (d - 1) / 2;
    let matrix = step_matrix(&dag, &s);
    let mut r = Report::new();
    r.field("graph", g.name().unwrap_or("file"))
        .field("k", k)
        .field("depth", s.depth())
        .field("lower_bound", lower_bound(d, m, k))
        .field("counting_bound", counting_bound(m, k))
        .field("rotations", s.rotation_count())
        .field("row_order", layout.row_order.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .field("first_column_plan", layout.first_column_plan.render_paper())
        .block(
            "step matrix",
            matrix.iter().enumerate().map(|(i, row)| {
                let cells: Vec<String> = row.iter().map(usize::to_string).collect();
                format!("row={} level={} steps={}", i + 1, layout.row_order[i + 1], cells.join(" "))
            }),
        )
        .block("steps", step_lines(&s));
    if a.verify || a.matrix.is_some() {
        let u = match &a.matrix {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                parse_matrix(&text)?
            }
            None => random_special_unitary(d, &mut seeded_rng(a.seed)),
        };
        let dec = qr_decompose_in_order(&g, &dag, &s, &u)?;
        let err = (dec.reconstruct() - &u).norm();
        r.field("reconstruction_error", sci(err)).field(
            "diagonal_phases",
            dec.diagonal
                .phases()
                .iter()
                .map(|p| format!("{p:.12}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
        r.check("reconstruction", err <= RECONSTRUCTION_TOL);
        r.check("rotation_count", dec.rotations.len() == m);
    }
    Ok(r)
}

fn bounds(a: &GraphArgs) -> Result<Report, CliError> {
    let g = resolve_graph(&a.graph)?;
    let d = g.d();
    let m = d * (d - 1) / 2;
    let layout = default_qr_layout(&g)?;
    let dag = qr_precedence(&g, &layout.row_order, &layout.first_column_plan)?;
    let lines = (1..=7).rev().map(|k| {
        format!(
            "k={k} depth={} lower_bound={} counting_bound={}",
            constrain_dag(&dag, k).depth(),
            lower_bound(d, m, k),
            counting_bound(m, k)
        )
    });
    let mut r = Report::new();
    r.field("graph", g.name().unwrap_or("file"))
        .field("d", d)
        .field("rotations", m)
        .block("table", lines);
    Ok(r)
}

fn parse_phases(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad phase `{}`", t.trim())))
        })
        .collect()
}

fn diag(a: &DiagArgs) -> Result<Report, CliError> {
    let g = resolve_graph(&a.graph)?;
    let d = g.d();
    let phases = match &a.phases {
        Some(text) => parse_phases(text)?,
        None => {
            let mut rng = seeded_rng(a.seed);
            let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            DiagonalGate::new(raw).normalized().phases().to_vec()
        }
    };
    if phases.len() != d {
        return Err(CliError::Usage(format!("expected {d} phases, got {}", phases.len())));
    }
    let mut gate = DiagonalGate::new(phases);
    if !gate.is_special() {
        if !a.normalize {
            let sum: f64 = gate.phases().iter().sum();
            return Err(CliError::Usage(format!(
                "phases sum to {sum:.12} (not a multiple of 2π); pass --normalize to project onto SU(d)"
            )));
        }
        gate = gate.normalized();
    }
    let tree = default_diagonal_tree(&g)?;
    let coloring = color_tree(&tree);
    let edges = diag_solve(&tree, &gate)?;
    let schedule = parallel_diagonal_schedule(&tree, &coloring)?;
    let rebuilt = edge_phase_product(d, &edges);
    let err = (rebuilt.matrix() - gate.matrix()).norm();
    let mut r = Report::new();
    r.field("graph", g.name().unwrap_or("file"))
        .field("d", d)
        .field("tree", edge_list(tree.edges().iter().copied()))
        .field("colors", coloring.c())
        .field("steps", schedule.depth())
        .field(
            "phases",
            gate.phases().iter().map(|p| format!("{p:.12}")).collect::<Vec<_>>().join(" "),
        )
        .block(
            "edge phases",
            edges.iter().map(|e| {
                format!(
                    "edge={} {} color={} phi={:.12}",
                    e.j,
                    e.k,
                    coloring.color(e.j, e.k).unwrap_or(0),
                    e.phi.rem_euclid(TAU)
                )
            }),
        )
        .block("schedule", step_lines(&schedule))
        .field("reconstruction_error", sci(err));
    r.check("reconstruction", err <= DIAG_TOL);
    r.check("steps", schedule.depth() == 3 * coloring.c());
    Ok(r)
}

fn mode(sample: bool, seed: u64) -> BranchMode {
    if sample {
        BranchMode::Sampled(seed)
    } else {
        BranchMode::Exhaustive
    }
}

fn outcome_string(b: &BranchRun) -> String {
    b.outcomes.iter().map(|o| o.to_string()).collect()
}

fn trace_block(r: &mut Report, t: &ProtocolTrace) {
    r.block("trace", t.render().lines().map(str::to_string).collect::<Vec<_>>());
}

fn branch_block(r: &mut Report, branches: &[BranchRun], fidelities: &[f64]) {
    r.block(
        "branches",
        branches.iter().zip(fidelities).map(|(b, f)| {
            format!(
                "branch={} probability={:.6} infidelity={} disentanglement_defect={}",
                outcome_string(b),
                b.probability,
                sci((1.0 - f).max(0.0)),
                sci((1.0 - b.disentanglement).max(0.0))
            )
        }),
    );
}

fn nonlocal_cv_cmd(a: &NonlocalArgs) -> Result<Report, CliError> {
    let d = a.d.unwrap_or(3);
    if d < 2 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let mut rng = seeded_rng(a.seed);
    let v = random_unitary(d, &mut rng);
    let psi = random_state(d * d, &mut rng);
    let run = nonlocal_cv(&v, &psi, &mode(a.sample, a.seed))?;
    let mut r = Report::new();
    r.field("protocol", "cv").field("d", d);
    trace_block(&mut r, &run.trace);
    r.field("stages", run.trace.stages).field("branches", run.branches.len());
    branch_block(&mut r, &run.branches, &run.fidelities);
    r.field("min_fidelity", format!("{:.15}", run.min_fidelity()));
    r.check("fidelity", run.min_fidelity() >= 1.0 - BRANCH_TOL);
    r.check("disentanglement", run.min_disentanglement() >= 1.0 - BRANCH_TOL);
    r.check("counters", (run.trace.ebits, run.trace.cbits) == (1, 2));
    Ok(r)
}

fn nonlocal_synth_cmd(a: &NonlocalArgs) -> Result<Report, CliError> {
    let d = a.d.unwrap_or(3);
    if d < 2 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let psi = random_state(d * d, &mut seeded_rng(a.seed));
    let out = two_qudit_state_synth(&psi, d, &mode(a.sample, a.seed))?;
    let t = &out.run.trace;
    let mut r = Report::new();
    r.field("protocol", "synth").field("d", d);
    trace_block(&mut r, t);
    r.field("stages", t.stages)
        .field("branches", out.run.branches.len())
        .field("dense_residual", sci(out.dense_residual))
        .field(
            "block_weights",
            out.factors.t.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" "),
        );
    branch_block(&mut r, &out.run.branches, &out.run.fidelities);
    r.field("min_fidelity", format!("{:.15}", out.run.min_fidelity()));
    r.check("residual", out.dense_residual <= SYNTH_TOL);
    r.check("fidelity", out.run.min_fidelity() >= 1.0 - BRANCH_TOL);
    r.check("disentanglement", out.run.min_disentanglement() >= 1.0 - BRANCH_TOL);
    r.check("counters", (t.ebits, t.cbits, t.steps) == (d - 1, 2 * (d - 1), 7));
    Ok(r)
}

fn nonlocal_phase_cmd(a: &PhaseArgs) -> Result<Report, CliError> {
    if a.d < 2 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let out = nonlocal_controlled_phase(a.d, a.phi, &mode(a.sample, a.seed))?;
    let t = &out.trace;
    let worst = out.fidelities.iter().copied().fold(1.0, f64::min);
    let mut r = Report::new();
    r.field("protocol", "phase").field("d", a.d).field("phi", format!("{:.12}", a.phi));
    trace_block(&mut r, t);
    r.field("stages", t.stages)
        .field("branches", out.fidelities.len())
        .field("min_operator_fidelity", format!("{worst:.15}"));
    r.check("fidelity", worst >= 1.0 - BRANCH_TOL);
    r.check("counters", (t.steps, t.ebits, t.cbits) == (1, 1, 2));
    Ok(r)
}

fn nonlocal_full_cmd(a: &NonlocalArgs) -> Result<Report, CliError> {
    let d = a.d.unwrap_or(2);
    if d < 2 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let u = random_unitary(d * d, &mut seeded_rng(a.seed));
    let out = nonlocal_full_unitary(&u, d, &mode(a.sample, a.seed))?;
    let t = &out.trace;
    let expected = full_unitary_resources(d);
    let mut r = Report::new();
    r.field("protocol", "full").field("d", d);
    trace_block(&mut r, t);
    r.field("stages", t.stages)
        .field("fidelity", format!("{:.15}", out.fidelity))
        .field("min_branch_fidelity", format!("{:.15}", out.min_branch_fidelity));
    r.check("fidelity", out.fidelity >= 1.0 - FULL_TOL);
    r.check("branches", out.min_branch_fidelity >= 1.0 - BRANCH_TOL);
    r.check("counters", (t.steps, t.ebits, t.cbits) == expected);
    Ok(r)
}
