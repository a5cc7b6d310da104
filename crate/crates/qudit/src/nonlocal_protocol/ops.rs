//! Non-local ∧₁(V), two-qudit state synthesis, controlled phase and full two-qudit unitaries.

use num_complex::Complex64;

use super::protocol::{BranchMode, BranchRun, ControlledGate, LocalGate, Round, EXHAUSTIVE_CAP};
use super::trace::{EventKind, ProtocolTrace};
use crate::error::{Error, Result};
use crate::givens_synthesis::reduction_unitary;
use crate::linalg::{
    basis_state, ensure_unitary, state_fidelity, unitary_eigen, unitary_fidelity, ComplexMatrix, StateVector,
};

/// Largest `d` for which the full two-qudit construction enumerates every branch.
pub const FULL_EXHAUSTIVE_CAP: usize = 4;

/// Branch outcomes of one protocol on one input state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub branches: Vec<BranchRun>,
    /// Fidelity of each branch output with the dense oracle.
    pub fidelities: Vec<f64>,
    pub trace: ProtocolTrace,
}

impl ProtocolRun {
    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.iter().copied().fold(1.0, f64::min)
    }

    pub fn min_disentanglement(&self) -> f64 {
        self.branches.iter().map(|b| b.disentanglement).fold(1.0, f64::min)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.branches.iter().map(|b| b.norm_drift).fold(0.0, f64::max)
    }
}

fn dims_of(v: &ComplexMatrix, psi: &StateVector) -> Result<usize> {
    let d = v.nrows();
    if v.ncols() != d || psi.len() != d * d {
        return Err(Error::Dimension(format!(
            "V is {}x{}, state has {} amplitudes",
            v.nrows(),
            v.ncols(),
            psi.len()
        )));
    }
    Ok(d)
}

fn run_against_oracle(round: &Round, d: usize, psi: &StateVector, mode: &BranchMode) -> Result<ProtocolRun> {
    let (branches, trace) = round.run_branches(d, psi, mode)?;
    let expect = round.dense(d) * psi;
    let fidelities = branches.iter().map(|b| state_fidelity(&b.state, &expect)).collect();
    Ok(ProtocolRun {
        branches,
        fidelities,
        trace,
    })
}

/// ∧₁(V) between two parties holding `A` and `B`, using one e-bit and two c-bits.
pub fn nonlocal_cv(v: &ComplexMatrix, psi: &StateVector, mode: &BranchMode) -> Result<ProtocolRun> {
    let d = dims_of(v, psi)?;
    let mut round = Round::new(vec![ControlledGate::standard(v.clone())]);
    round.single_step = true;
    run_against_oracle(&round, d, psi, mode)
}

/// Local factors of `W = (V_d⊗1) ∏_j ∧₁^{(j)}(V_j) (1⊗V_0)`, which maps `ψ` to `|0,0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisFactors {
    /// `V_0, …, V_{d−1}` acting on `B`; `V_j` for `j ≥ 1` is controlled on `A = j`.
    pub v_b: Vec<ComplexMatrix>,
    /// `V_d` on `A`, mapping `Σ_j √t_j |j⟩` to `|0⟩`.
    pub v_a: ComplexMatrix,
    /// Block weights `t_j = ⟨ψ_j|ψ_j⟩`.
    pub t: Vec<f64>,
}

impl SynthesisFactors {
    pub fn d(&self) -> usize {
        self.v_a.nrows()
    }

    fn gates(&self) -> Vec<ControlledGate> {
        (1..self.d())
            .map(|j| ControlledGate::flipped(j, self.v_b[j].clone()))
            .collect()
    }

    /// Round implementing `W` in seven stages.
    pub fn forward_round(&self) -> Round {
        Round {
            gates: self.gates(),
            pre_b: Some(LocalGate::new(self.v_b[0].clone(), "V0")),
            post_a: Some(LocalGate::new(self.v_a.clone(), format!("V{}", self.d()))),
            ..Round::default()
        }
    }

    /// Round implementing `W†` in seven stages.
    pub fn inverse_round(&self) -> Round {
        Round {
            gates: self
                .gates()
                .into_iter()
                .map(|g| ControlledGate::flipped(g.control_value, g.v.adjoint()))
                .collect(),
            pre_a: Some(LocalGate::new(self.v_a.adjoint(), format!("V{}†", self.d()))),
            post_b: Some(LocalGate::new(self.v_b[0].adjoint(), "V0†")),
            ..Round::default()
        }
    }

    /// Dense `W`.
    pub fn w(&self) -> ComplexMatrix {
        self.forward_round().dense(self.d())
    }
}

/// Computes the factors for a normalized two-qudit state.
pub fn synthesis_factors(psi: &StateVector, d: usize) -> Result<SynthesisFactors> {
    if psi.len() != d * d || d < 2 {
        return Err(Error::Dimension(format!("state has {} amplitudes, expected {}", psi.len(), d * d)));
    }
    let block = |j: usize| StateVector::from_iterator(d, (0..d).map(|b| psi[j * d + b]));
    let t: Vec<f64> = (0..d).map(|j| block(j).norm_squared()).collect();
    let v0 = reduction_unitary(&block(0), 0);
    let mut v_b = vec![v0.clone()];
    for j in 1..d {
        v_b.push(reduction_unitary(&(&v0 * block(j)), 0));
    }
    let chi = StateVector::from_iterator(d, t.iter().map(|&x| Complex64::new(x.sqrt(), 0.0)));
    let v_a = reduction_unitary(&chi, 0);
    Ok(SynthesisFactors { v_b, v_a, t })
}

/// Result of the two-qudit state-synthesis protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome {
    pub factors: SynthesisFactors,
    /// `‖Wψ − |0,0⟩‖` for the dense `W`.
    pub dense_residual: f64,
    /// Protocol run on `ψ`; fidelities are against `|0,0⟩`.
    pub run: ProtocolRun,
}

/// Builds `W` with `Wψ = |0,0⟩` and runs it non-locally with `d−1` e-bits in seven steps.
pub fn two_qudit_state_synth(psi: &StateVector, d: usize, mode: &BranchMode) -> Result<SynthesisOutcome> {
    if matches!(mode, BranchMode::Exhaustive) && d > EXHAUSTIVE_CAP {
        return Err(Error::ExhaustiveCap { d, cap: EXHAUSTIVE_CAP });
    }
    let factors = synthesis_factors(psi, d)?;
    let target = basis_state(d * d, 0);
    let dense_residual = (factors.w() * psi - &target).norm();
    let run = run_against_oracle(&factors.forward_round(), d, psi, mode)?;
    Ok(SynthesisOutcome {
        factors,
        dense_residual,
        run,
    })
}

/// Operator realized by `round` on the branch chosen by `mode` (all-zero outcomes when exhaustive).
///
/// Every branch has probability `4^{−pairs}` for every input, so normalizing each column keeps
/// relative phases intact.
fn realized_operator(round: &Round, d: usize, mode: &BranchMode) -> Result<(ComplexMatrix, ProtocolTrace)> {
    let n = d * d;
    let mut m = ComplexMatrix::zeros(n, n);
    let mode = match mode {
        BranchMode::Exhaustive => &BranchMode::Fixed(Vec::new()),
        other => other,
    };
    let mut trace = None;
    for col in 0..n {
        let (runs, t) = round.run_branches(d, &basis_state(n, col), mode)?;
        m.set_column(col, &runs[0].state);
        trace.get_or_insert(t);
    }
    Ok((m, trace.unwrap_or_default()))
}

/// Per-branch operator fidelities of `round` against its dense oracle.
fn branch_operator_fidelities(round: &Round, d: usize, mode: &BranchMode) -> Result<Vec<f64>> {
    let oracle = round.dense(d);
    let outcomes: Vec<Vec<u8>> = match mode {
        BranchMode::Exhaustive => {
            let k = round.measurements();
            (0..1usize << k)
                .map(|bits| (0..k).map(|i| ((bits >> (k - 1 - i)) & 1) as u8).collect())
                .collect()
        }
        BranchMode::Fixed(v) => vec![v.clone()],
        BranchMode::Sampled(_) => {
            let (runs, _) = round.run_branches(d, &basis_state(d * d, 0), mode)?;
            vec![runs[0].outcomes.clone()]
        }
    };
    outcomes
        .into_iter()
        .map(|o| realized_operator(round, d, &BranchMode::Fixed(o)).map(|(m, _)| unitary_fidelity(&oracle, &m)))
        .collect()
}

/// Controlled phase on two qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    pub trace: ProtocolTrace,
    /// Operator fidelity of every evaluated branch with the dense oracle.
    pub fidelities: Vec<f64>,
    pub oracle: ComplexMatrix,
}

fn phase_round(d: usize, value: Complex64, control: usize) -> Round {
    let mut v = ComplexMatrix::identity(d, d);
    v[(control, control)] = value;
    let mut round = Round::new(vec![ControlledGate::flipped(control, v)]);
    round.single_step = true;
    round
}

/// `∧₁[1 + (e^{iφ}−1)|d−1⟩⟨d−1|]`, i.e. phase `e^{iφ}` on `|d−1, d−1⟩`, in one step.
pub fn nonlocal_controlled_phase(d: usize, phi: f64, mode: &BranchMode) -> Result<GateOutcome> {
    if d < 2 {
        return Err(Error::Dimension(format!("need d ≥ 2, got {d}")));
    }
    let round = phase_round(d, Complex64::from_polar(1.0, phi), d - 1);
    let fidelities = branch_operator_fidelities(&round, d, mode)?;
    let (_, trace) = round.run_branches(d, &basis_state(d * d, 0), mode)?;
    Ok(GateOutcome {
        trace,
        fidelities,
        oracle: round.dense(d),
    })
}

/// Phase on `|0,0⟩`: the top-level controlled phase conjugated by `F_0⊗F_0`.
fn zero_phase_round(d: usize, value: Complex64) -> Round {
    phase_round(d, value, 0)
}

/// Result of the full two-qudit construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FullOutcome {
    pub trace: ProtocolTrace,
    pub reconstructed: ComplexMatrix,
    pub fidelity: f64,
    /// Smallest operator fidelity of any evaluated branch of any sub-protocol.
    pub min_branch_fidelity: f64,
}

/// `U = ∏_ℓ W_ℓ† C_ℓ W_ℓ` over the `d²` eigenpairs, each factor run non-locally.
pub fn nonlocal_full_unitary(u: &ComplexMatrix, d: usize, mode: &BranchMode) -> Result<FullOutcome> {
    let n = d * d;
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Dimension(format!("matrix is {}x{}, expected {n}x{n}", u.nrows(), u.ncols())));
    }
    ensure_unitary(u)?;
    if matches!(mode, BranchMode::Exhaustive) && d > FULL_EXHAUSTIVE_CAP {
        return Err(Error::ExhaustiveCap {
            d,
            cap: FULL_EXHAUSTIVE_CAP,
        });
    }
    let (values, vectors) = unitary_eigen(u)?;
    let mut trace = ProtocolTrace::default();
    let mut reconstructed = ComplexMatrix::identity(n, n);
    let mut min_branch_fidelity = 1.0f64;
    for (l, value) in values.iter().enumerate() {
        let v: StateVector = vectors.column(l).into_owned();
        let factors = synthesis_factors(&v, d)?;
        let mut c_trace = ProtocolTrace::default();
        c_trace.push(1, 1, EventKind::Gate, format!("eigenpair {l}: F0⊗F0 conjugation folded into control |0⟩ and target level 0"));
        let rounds = [factors.forward_round(), zero_phase_round(d, *value), factors.inverse_round()];
        let mut product = ComplexMatrix::identity(n, n);
        for (i, round) in rounds.iter().enumerate() {
            for f in branch_operator_fidelities(round, d, mode)? {
                min_branch_fidelity = min_branch_fidelity.min(f);
            }
            let (m, t) = realized_operator(round, d, mode)?;
            product = m * product;
            if i == 1 {
                c_trace.append(&t);
                c_trace.steps = 1;
                trace.append(&c_trace);
            } else {
                trace.append(&t);
            }
        }
        reconstructed = product * reconstructed;
    }
    let fidelity = unitary_fidelity(u, &reconstructed);
    Ok(FullOutcome {
        trace,
        reconstructed,
        fidelity,
        min_branch_fidelity,
    })
}

/// Exact resource counts `(steps, e-bits, c-bits)` for the full construction.
pub fn full_unitary_resources(d: usize) -> (usize, usize, usize) {
    let ebits = 2 * d * d * d - d * d;
    (15 * d * d, ebits, 2 * ebits)
}

fn hermitian_check(h: &ComplexMatrix, d: usize) -> Result<()> {
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::Dimension(format!("Hamiltonian must be {d}x{d}")));
    }
    let defect = (h - h.adjoint()).norm();
    if defect > 1e-12 {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// `‖P [|1⟩⟨1|_{B_{j1}}⊗h₁, |1⟩⟨1|_{B_{j2}}⊗h₂] P‖` with `P` the span of ancilla states with at most one excitation.
///
/// Both operators are block diagonal in the ancilla basis, so the restriction is computed block by block.
pub fn step4_commutator_norm(
    d: usize,
    (j1, h1): (usize, &ComplexMatrix),
    (j2, h2): (usize, &ComplexMatrix),
) -> Result<f64> {
    hermitian_check(h1, d)?;
    hermitian_check(h2, d)?;
    let zero = ComplexMatrix::zeros(d, d);
    let n = j1.max(j2) + 1;
    let mut total = 0.0;
    // Ancilla states in P: none excited, or exactly ancilla `e` excited.
    for excited in std::iter::once(None).chain((0..n).map(Some)) {
        let a = if excited == Some(j1) { h1 } else { &zero };
        let b = if excited == Some(j2) { h2 } else { &zero };
        total += (a * b - b * a).norm_squared();
    }
    Ok(total.sqrt())
}

/// True when every pair of step-4 gates on distinct ancillas commutes on `P` to 1e−12.
pub fn step4_commutation_check(d: usize, hamiltonians: &[ComplexMatrix]) -> Result<bool> {
    for (i, h1) in hamiltonians.iter().enumerate() {
        for (j, h2) in hamiltonians.iter().enumerate().skip(i + 1) {
            if step4_commutator_norm(d, (i, h1), (j, h2))? > 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `e^{−ih}` restricted to the active ancilla is a valid step-4 target; used by tests.
pub fn exp_i_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = h.nrows();
    hermitian_check(h, d)?;
    let eig = h.clone().symmetric_eigen();
    let phases = ComplexMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::from_polar(1.0, -x)));
    Ok(&eig.eigenvectors * phases * eig.eigenvectors.adjoint())
}
