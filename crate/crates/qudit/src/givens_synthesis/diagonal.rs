//! Diagonal gates from edge phases `e^{iφ λᶻ_jk}` over a spanning tree.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use num_complex::Complex64;

use super::GivensRotation;
use crate::coupling_graph::{CouplingGraph, EdgeColoring, SpanningTree};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::scheduler::{default_qr_layout, PulseKind, RotationLabel, Schedule};

const TRACE_TOL: f64 = 1e-9;

/// `diag(e^{iθ_0}, …, e^{iθ_{d−1}})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGate {
    phases: Vec<f64>,
}

impl DiagonalGate {
    pub fn new(phases: Vec<f64>) -> Self {
        Self { phases }
    }

    pub fn d(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let diag = StateVector::from_iterator(
            self.d(),
            self.phases.iter().map(|&t| Complex64::from_polar(1.0, t)),
        );
        ComplexMatrix::from_diagonal(&diag)
    }

    /// Removes the mean phase so that the gate lies in SU(d).
    pub fn normalized(&self) -> Self {
        let mean = self.phases.iter().sum::<f64>() / self.d() as f64;
        Self::new(self.phases.iter().map(|t| t - mean).collect())
    }

    /// True when `Σθ ≡ 0 (mod 2π)`.
    pub fn is_special(&self) -> bool {
        let sum: f64 = self.phases.iter().sum();
        (sum - TAU * (sum / TAU).round()).abs() <= TRACE_TOL
    }
}

/// Phase `φ` on tree edge `(j,k)`, `j < k`, realizing `e^{iφ λᶻ_jk}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePhase {
    pub j: usize,
    pub k: usize,
    pub phi: f64,
}

/// Solves for edge phases whose product equals `gate` exactly.
///
/// The phase on level `v` is `Σ_m φ_m (δ_{v,j_m} − δ_{v,k_m})`; summing over the
/// subtree below `v` leaves only the edge to its parent, which fixes that edge's φ.
pub fn diag_solve(t: &SpanningTree, gate: &DiagonalGate) -> Result<Vec<EdgePhase>> {
    let d = t.d();
    if gate.d() != d {
        return Err(Error::Dimension(format!("gate has {} phases, tree has {d} levels", gate.d())));
    }
    let sum: f64 = gate.phases().iter().sum();
    let wraps = (sum / TAU).round();
    if (sum - TAU * wraps).abs() > TRACE_TOL {
        return Err(Error::NotTraceless { sum });
    }
    let mut theta = gate.phases().to_vec();
    theta[t.root()] -= TAU * wraps;
    let mut subtree = theta.clone();
    for &v in t.bfs_order().iter().rev() {
        if let Some(p) = t.parent(v) {
            subtree[p] += subtree[v];
        }
    }
    Ok(t.edges()
        .iter()
        .map(|&(j, k)| {
            let phi = if t.parent(k) == Some(j) { -subtree[k] } else { subtree[j] };
            EdgePhase { j, k, phi }
        })
        .collect())
}

/// Diagonal gate realized by a list of edge phases.
pub fn edge_phase_product(d: usize, phases: &[EdgePhase]) -> DiagonalGate {
    let mut theta = vec![0.0; d];
    for e in phases {
        theta[e.j] += e.phi;
        theta[e.k] -= e.phi;
    }
    DiagonalGate::new(theta)
}

/// Timings with `e^{it1 λˣ} e^{it2 λʸ} e^{it3 λˣ} = e^{iφ λᶻ}`.
///
/// Conjugating by a quarter turn about x maps λʸ onto λᶻ, so
/// `(t1, t2, t3) = (−π/4, φ, π/4)`; `φ = 0` needs no pulses.
pub fn euler_z_as_xyx(phi: f64) -> (f64, f64, f64) {
    if phi == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        (-FRAC_PI_4, phi, FRAC_PI_4)
    }
}

/// The three Givens rotations of an edge phase, in application order (x, y, x).
///
/// `e^{it λˣ} = G(−t, 0)` and `e^{it λʸ} = G(t, π/2)`.
pub fn euler_rotations(e: &EdgePhase) -> [GivensRotation; 3] {
    let (t1, t2, t3) = euler_z_as_xyx(e.phi);
    [
        GivensRotation::new(e.j, e.k, -t3, 0.0),
        GivensRotation::new(e.j, e.k, t2, FRAC_PI_2),
        GivensRotation::new(e.j, e.k, -t1, 0.0),
    ]
}

fn phase_pulses(j: usize, k: usize) -> [RotationLabel; 3] {
    let base = RotationLabel::new(j, k);
    [
        base.with_kind(PulseKind::PhaseX),
        base.with_kind(PulseKind::PhaseY),
        base.with_kind(PulseKind::PhaseX),
    ]
}

/// Tree used for diagonal gates by default: the one underlying the graph's QR first-column plan.
pub fn default_diagonal_tree(g: &CouplingGraph) -> Result<SpanningTree> {
    default_qr_layout(g)?.plan_tree()
}

/// Three layers (x, y, x) per color class: `3c` steps.
pub fn parallel_diagonal_schedule(t: &SpanningTree, coloring: &EdgeColoring) -> Result<Schedule> {
    coloring.check_proper()?;
    for &(j, k) in t.edges() {
        if coloring.color(j, k).is_none() {
            return Err(Error::InvalidSchedule(format!("tree edge ({j},{k}) has no color")));
        }
    }
    let classes = coloring.classes();
    if classes.iter().map(Vec::len).sum::<usize>() != t.edges().len() {
        return Err(Error::InvalidSchedule("coloring has edges outside the tree".into()));
    }
    let mut steps = Vec::with_capacity(3 * classes.len());
    for class in classes {
        for layer in 0..3 {
            steps.push(class.iter().map(|&(j, k)| phase_pulses(j, k)[layer]).collect());
        }
    }
    Ok(Schedule::new(steps))
}

fn finish_steps(qr: &Schedule, d: usize) -> Vec<usize> {
    let mut finish = vec![0; d];
    for (i, step) in qr.steps().iter().enumerate() {
        for r in step {
            finish[r.pivot] = i + 1;
            finish[r.target] = i + 1;
        }
    }
    finish
}

fn level_bound(layers: &[Vec<(usize, usize)>], qr: &Schedule) -> usize {
    qr.rotations()
        .flat_map(|r| [r.pivot, r.target])
        .chain(layers.iter().flatten().flat_map(|&(j, k)| [j, k]))
        .max()
        .map_or(0, |m| m + 1)
}

/// Start steps for phase layers: back-to-back three-step blocks, each after its rows finish,
/// shifted as late as the final block allows.
pub fn phase_layer_starts(qr: &Schedule, layers: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let finish = finish_steps(qr, level_bound(layers, qr));
    let mut starts = Vec::with_capacity(layers.len());
    let mut earliest = 1;
    for layer in layers {
        let ready = layer
            .iter()
            .map(|&(j, k)| finish[j].max(finish[k]) + 1)
            .max()
            .unwrap_or(1);
        let s = ready.max(earliest);
        starts.push(s);
        earliest = s + 3;
    }
    for i in (0..starts.len().saturating_sub(1)).rev() {
        starts[i] = starts[i + 1] - 3;
    }
    starts
}

/// Merges Euler-decomposed phase layers into a QR schedule at automatically chosen starts.
pub fn interleave_phasing(qr: &Schedule, layers: &[Vec<(usize, usize)>]) -> Result<Schedule> {
    let starts = phase_layer_starts(qr, layers);
    interleave_phasing_at(qr, layers, &starts)
}

/// Merges phase layers starting at the given 1-based steps, checking every ordering constraint.
pub fn interleave_phasing_at(
    qr: &Schedule,
    layers: &[Vec<(usize, usize)>],
    starts: &[usize],
) -> Result<Schedule> {
    if layers.len() != starts.len() {
        return Err(Error::Dimension(format!(
            "{} phase layers but {} start steps",
            layers.len(),
            starts.len()
        )));
    }
    let finish = finish_steps(qr, level_bound(layers, qr));
    let mut steps: Vec<Vec<RotationLabel>> = qr.steps().to_vec();
    for (layer, &start) in layers.iter().zip(starts) {
        for &(j, k) in layer {
            if j == k {
                return Err(Error::DegenerateRotation(j));
            }
            let finished = finish[j].max(finish[k]);
            if start == 0 || start <= finished {
                return Err(Error::PhaseOrdering { j, k, start, finished });
            }
            if steps.len() < start + 2 {
                steps.resize(start + 2, Vec::new());
            }
            for (offset, pulse) in phase_pulses(j, k).into_iter().enumerate() {
                steps[start - 1 + offset].push(pulse);
            }
        }
    }
    let merged = Schedule::new(steps);
    merged.check_disjoint()?;
    Ok(merged)
}
