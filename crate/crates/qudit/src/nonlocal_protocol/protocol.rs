//! Stage engine shared by every non-local protocol.
//!
//! One round runs any number of ∧₁ gates in parallel, each with its own ancilla pair:
//! CNOT `A → A_j`, Z-measure `A_j`, conditional `iσˣ` on `B_j`, `B_j`-controlled `V_j` on `B`,
//! X-measure `B_j`, conditional `−1` on `A = control`. Optional local gates run before and after.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::register::{Basis, HybridRegister};
use super::trace::{EventKind, ProtocolTrace};
use crate::error::{Error, Result};
use crate::linalg::{ensure_unitary, seeded_rng, ComplexMatrix, StateVector};

/// `Σ_{a≠control}|a⟩⟨a|⊗1 + |control⟩⟨control|⊗V`, with `A` as the control qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledGate {
    pub control_value: usize,
    pub v: ComplexMatrix,
}

impl ControlledGate {
    /// `∧₁(V)`: control on the top level `d−1`.
    pub fn standard(v: ComplexMatrix) -> Self {
        let d = v.nrows();
        Self {
            control_value: d.saturating_sub(1),
            v,
        }
    }

    /// `(F_j⊗1) ∧₁(V) (F_j†⊗1)`, which is the same as controlling on `j`.
    pub fn flipped(j: usize, v: ComplexMatrix) -> Self {
        Self { control_value: j, v }
    }

    pub fn d(&self) -> usize {
        self.v.nrows()
    }

    pub fn dense(&self) -> ComplexMatrix {
        let d = self.d();
        let mut m = ComplexMatrix::identity(d * d, d * d);
        let c = self.control_value;
        m.view_mut((c * d, c * d), (d, d)).copy_from(&self.v);
        m
    }
}

/// State flip `F_j`: swaps `|j⟩` and `|d−1⟩`.
pub fn flip(d: usize, j: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::identity(d, d);
    let top = d - 1;
    if j != top {
        f[(j, j)] = Complex64::new(0.0, 0.0);
        f[(top, top)] = Complex64::new(0.0, 0.0);
        f[(j, top)] = Complex64::new(1.0, 0.0);
        f[(top, j)] = Complex64::new(1.0, 0.0);
    }
    f
}

/// How measurement outcomes are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchMode {
    /// Every outcome combination.
    Exhaustive,
    /// One branch with the given outcomes, in measurement order.
    Fixed(Vec<u8>),
    /// One branch drawn with Born probabilities from a seeded generator.
    Sampled(u64),
}

/// Largest `d` for which exhaustive enumeration of a `d−1`-pair round is allowed.
pub const EXHAUSTIVE_CAP: usize = 6;

#[derive(Debug)]
pub(crate) enum Chooser {
    Forced(Vec<u8>, usize),
    Random(ChaCha8Rng),
}

impl Chooser {
    fn next(&mut self, p0: f64) -> u8 {
        match self {
            Chooser::Forced(v, i) => {
                let m = v.get(*i).copied().unwrap_or(0) & 1;
                *i += 1;
                m
            }
            Chooser::Random(rng) => u8::from(rng.random::<f64>() >= p0),
        }
    }
}

/// One choice of outcomes per branch to evaluate; `measurements` outcomes each.
pub(crate) fn choosers(mode: &BranchMode, measurements: usize) -> Vec<Chooser> {
    match mode {
        BranchMode::Exhaustive => (0..1usize << measurements)
            .map(|bits| {
                let v = (0..measurements)
                    .map(|i| ((bits >> (measurements - 1 - i)) & 1) as u8)
                    .collect();
                Chooser::Forced(v, 0)
            })
            .collect(),
        BranchMode::Fixed(v) => vec![Chooser::Forced(v.clone(), 0)],
        BranchMode::Sampled(seed) => vec![Chooser::Random(seeded_rng(*seed))],
    }
}

/// A local gate on `A` or `B` with a label for the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGate {
    pub matrix: ComplexMatrix,
    pub label: String,
}

impl LocalGate {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Self {
        Self {
            matrix,
            label: label.into(),
        }
    }
}

/// One parallel round of ∧₁ gates, with optional local gates around it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Round {
    pub gates: Vec<ControlledGate>,
    pub pre_a: Option<LocalGate>,
    pub pre_b: Option<LocalGate>,
    pub post_a: Option<LocalGate>,
    pub post_b: Option<LocalGate>,
    /// Account the whole round as a single step instead of one step per stage.
    pub single_step: bool,
}

/// Final state of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRun {
    /// Outcomes in measurement order: all `A_j` results, then all `B_j` results.
    pub outcomes: Vec<u8>,
    pub probability: f64,
    /// Normalized `A⊗B` state after contracting the ancillas with the measured record.
    pub state: StateVector,
    /// Squared overlap of the register with `state ⊗ record`.
    pub disentanglement: f64,
    /// Largest deviation of the register norm from 1 across all events.
    pub norm_drift: f64,
}

fn cnot(d: usize, control: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(2 * d, 2 * d);
    for x in 0..2 {
        let i = 2 * control + x;
        m[(i, i)] = Complex64::new(0.0, 0.0);
        m[(i, 2 * control + (1 - x))] = Complex64::new(1.0, 0.0);
    }
    m
}

fn qubit_controlled(v: &ComplexMatrix) -> ComplexMatrix {
    let d = v.nrows();
    let mut m = ComplexMatrix::identity(2 * d, 2 * d);
    m.view_mut((d, d), (d, d)).copy_from(v);
    m
}

fn i_sigma_x() -> ComplexMatrix {
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_row_slice(2, 2, &[z, i, i, z])
}

fn phase_on(d: usize, level: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(d, d);
    m[(level, level)] = Complex64::new(-1.0, 0.0);
    m
}

fn bell_pair() -> ComplexMatrix {
    // Maps |00⟩ to (|00⟩+|11⟩)/√2.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| Complex64::new(x, 0.0);
    ComplexMatrix::from_row_slice(
        4,
        4,
        &[
            r(h), r(0.0), r(0.0), r(h),
            r(0.0), r(h), r(h), r(0.0),
            r(0.0), r(h), r(-h), r(0.0),
            r(h), r(0.0), r(0.0), r(-h),
        ],
    )
}

impl Round {
    pub fn new(gates: Vec<ControlledGate>) -> Self {
        Self {
            gates,
            ..Self::default()
        }
    }

    pub fn measurements(&self) -> usize {
        2 * self.gates.len()
    }

    /// Validates dimensions and unitarity of every component.
    pub fn validate(&self, d: usize) -> Result<()> {
        for g in &self.gates {
            if g.v.nrows() != d || g.v.ncols() != d {
                return Err(Error::Dimension(format!("controlled target must be {d}x{d}")));
            }
            if g.control_value >= d {
                return Err(Error::LevelOutOfRange { level: g.control_value, d });
            }
            ensure_unitary(&g.v)?;
        }
        for l in [&self.pre_a, &self.pre_b, &self.post_a, &self.post_b].into_iter().flatten() {
            if l.matrix.nrows() != d {
                return Err(Error::Dimension(format!("local gate `{}` must be {d}x{d}", l.label)));
            }
            ensure_unitary(&l.matrix)?;
        }
        Ok(())
    }

    /// Runs the round on `psi`, choosing outcomes with `chooser`, and records events into `trace`.
    pub(crate) fn run(
        &self,
        d: usize,
        psi: &StateVector,
        chooser: &mut Chooser,
        trace: &mut ProtocolTrace,
    ) -> Result<BranchRun> {
        let n = self.gates.len();
        let mut reg = HybridRegister::new(d, n, psi)?;
        let start_norm = reg.norm();
        let mut drift = 0.0f64;
        let mut track = |reg: &HybridRegister| drift = drift.max((reg.norm() - start_norm).abs());
        let (a, b) = (reg.a(), reg.b());

        let bell = bell_pair();
        for j in 0..n {
            reg.apply(&bell, &[reg.a_anc(j), reg.b_anc(j)]);
            trace.push(0, 0, EventKind::Gate, format!("prepare |Φ+⟩ on A{0},B{0} (offline)", j + 1));
        }
        trace.ebits += n;
        track(&reg);

        let mut stage = 0usize;
        let mut next_stage = |trace: &mut ProtocolTrace| {
            stage += 1;
            trace.stages += 1;
            stage
        };
        let step_of = |s: usize| if self.single_step { 1 } else { s };

        if let Some(l) = &self.pre_a {
            let s = next_stage(trace);
            reg.apply(&l.matrix, &[a]);
            trace.push(step_of(s), s, EventKind::Gate, format!("{} on A", l.label));
            track(&reg);
        }

        let s = next_stage(trace);
        if let Some(l) = &self.pre_b {
            reg.apply(&l.matrix, &[b]);
            trace.push(step_of(s), s, EventKind::Gate, format!("{} on B", l.label));
        }
        for (j, g) in self.gates.iter().enumerate() {
            reg.apply(&cnot(d, g.control_value), &[a, reg.a_anc(j)]);
            trace.push(step_of(s), s, EventKind::Gate, format!("CNOT A=|{}⟩ -> A{}", g.control_value, j + 1));
        }
        track(&reg);

        let mut outcomes = Vec::with_capacity(2 * n);
        let mut probability = 1.0;
        let s = next_stage(trace);
        for j in 0..n {
            let q = reg.a_anc(j);
            let m = chooser.next(reg.probability(q, Basis::Z, 0));
            probability *= reg.measure(q, Basis::Z, m);
            outcomes.push(m);
            trace.push(step_of(s), s, EventKind::Measure, format!("Z A{} -> m1={m}", j + 1));
            trace.push(step_of(s), s, EventKind::Cbit, format!("A{0} -> B{0}: m1={m}", j + 1));
        }
        track(&reg);

        let s = next_stage(trace);
        for j in 0..n {
            if outcomes[j] == 1 {
                reg.apply(&i_sigma_x(), &[reg.b_anc(j)]);
                trace.push(step_of(s), s, EventKind::Gate, format!("iσx on B{}", j + 1));
            } else {
                trace.push(step_of(s), s, EventKind::Gate, format!("identity on B{} (m1=0)", j + 1));
            }
        }
        track(&reg);

        let s = next_stage(trace);
        for (j, g) in self.gates.iter().enumerate() {
            reg.apply(&qubit_controlled(&g.v), &[reg.b_anc(j), b]);
            trace.push(step_of(s), s, EventKind::Gate, format!("B{}-controlled V on B", j + 1));
        }
        track(&reg);

        let s = next_stage(trace);
        for j in 0..n {
            let q = reg.b_anc(j);
            let m = chooser.next(reg.probability(q, Basis::X, 0));
            probability *= reg.measure(q, Basis::X, m);
            outcomes.push(m);
            trace.push(step_of(s), s, EventKind::Measure, format!("X B{} -> m2={m}", j + 1));
            trace.push(step_of(s), s, EventKind::Cbit, format!("B{0} -> A{0}: m2={m}", j + 1));
        }
        track(&reg);

        let s = next_stage(trace);
        for (j, g) in self.gates.iter().enumerate() {
            if outcomes[n + j] == 1 {
                reg.apply(&phase_on(d, g.control_value), &[a]);
                trace.push(step_of(s), s, EventKind::Gate, format!("phase -1 on A=|{}⟩", g.control_value));
            } else {
                trace.push(step_of(s), s, EventKind::Gate, format!("identity on A (m2=0, pair {})", j + 1));
            }
        }
        if let Some(l) = &self.post_b {
            reg.apply(&l.matrix, &[b]);
            trace.push(step_of(s), s, EventKind::Gate, format!("{} on B", l.label));
        }
        track(&reg);

        if let Some(l) = &self.post_a {
            let s = next_stage(trace);
            reg.apply(&l.matrix, &[a]);
            trace.push(step_of(s), s, EventKind::Gate, format!("{} on A", l.label));
            track(&reg);
        }
        trace.steps += if self.single_step { 1 } else { stage };

        let record: Vec<StateVector> = (0..n)
            .map(|j| Basis::Z.state(outcomes[j]))
            .chain((0..n).map(|j| Basis::X.state(outcomes[n + j])))
            .collect();
        let projected = reg.contract_ancillas(&record);
        let disentanglement = projected.norm_squared() / reg.state().norm_squared();
        let norm = projected.norm();
        let state = if norm > 0.0 {
            projected / Complex64::new(norm, 0.0)
        } else {
            projected
        };
        Ok(BranchRun {
            outcomes,
            probability,
            state,
            disentanglement,
            norm_drift: drift,
        })
    }

    /// Dense `A⊗B` operator the round is meant to implement.
    pub fn dense(&self, d: usize) -> ComplexMatrix {
        let id = ComplexMatrix::identity(d, d);
        let local = |l: &Option<LocalGate>, on_a: bool| match l {
            Some(g) if on_a => g.matrix.kronecker(&id),
            Some(g) => id.kronecker(&g.matrix),
            None => ComplexMatrix::identity(d * d, d * d),
        };
        let mut m = local(&self.pre_b, false) * local(&self.pre_a, true);
        for g in &self.gates {
            m = g.dense() * m;
        }
        local(&self.post_a, true) * local(&self.post_b, false) * m
    }

    /// Runs every branch selected by `mode`; the returned trace is that of the first branch.
    pub fn run_branches(&self, d: usize, psi: &StateVector, mode: &BranchMode) -> Result<(Vec<BranchRun>, ProtocolTrace)> {
        self.validate(d)?;
        if matches!(mode, BranchMode::Exhaustive) && self.gates.len() + 1 > EXHAUSTIVE_CAP {
            return Err(Error::ExhaustiveCap {
                d: self.gates.len() + 1,
                cap: EXHAUSTIVE_CAP,
            });
        }
        let mut first = None;
        let mut runs = Vec::new();
        for mut chooser in choosers(mode, self.measurements()) {
            let mut trace = ProtocolTrace::default();
            runs.push(self.run(d, psi, &mut chooser, &mut trace)?);
            first.get_or_insert(trace);
        }
        Ok((runs, first.unwrap_or_default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_state, random_unitary, state_fidelity};

    #[test]
    fn flip_is_involution() {
        let f = flip(4, 1);
        assert!((&f * &f - ComplexMatrix::identity(4, 4)).norm() < 1e-15);
        assert_eq!(f[(1, 3)], Complex64::new(1.0, 0.0));
        assert_eq!(flip(4, 3), ComplexMatrix::identity(4, 4));
    }

    #[test]
    fn flipped_control_matches_conjugation() {
        let mut rng = seeded_rng(5);
        let v = random_unitary(3, &mut rng);
        let f = flip(3, 0).kronecker(&ComplexMatrix::identity(3, 3));
        let conj = &f * ControlledGate::standard(v.clone()).dense() * f.adjoint();
        assert!((conj - ControlledGate::flipped(0, v).dense()).norm() < 1e-14);
    }

    #[test]
    fn branch_probabilities_are_uniform() {
        let mut rng = seeded_rng(6);
        let d = 3;
        let round = Round::new(vec![
            ControlledGate::flipped(1, random_unitary(d, &mut rng)),
            ControlledGate::flipped(2, random_unitary(d, &mut rng)),
        ]);
        let psi = random_state(d * d, &mut rng);
        let (runs, trace) = round.run_branches(d, &psi, &BranchMode::Exhaustive).unwrap();
        assert_eq!(runs.len(), 16);
        let expect = round.dense(d) * &psi;
        for r in &runs {
            assert!((r.probability - 1.0 / 16.0).abs() < 1e-12);
            assert!(state_fidelity(&r.state, &expect) > 1.0 - 1e-12);
            assert!(r.disentanglement > 1.0 - 1e-12);
            assert!(r.norm_drift < 1e-12);
        }
        assert_eq!((trace.ebits, trace.cbits, trace.steps, trace.stages), (2, 4, 6, 6));
    }

    #[test]
    fn sampled_mode_is_reproducible() {
        let mut rng = seeded_rng(7);
        let round = Round::new(vec![ControlledGate::standard(random_unitary(2, &mut rng))]);
        let psi = random_state(4, &mut rng);
        let a = round.run_branches(2, &psi, &BranchMode::Sampled(11)).unwrap();
        let b = round.run_branches(2, &psi, &BranchMode::Sampled(11)).unwrap();
        assert_eq!(a.0[0].outcomes, b.0[0].outcomes);
        assert_eq!(a.1, b.1);
    }
}
