//! Numerical Givens rotations, state reduction, QR and spectral synthesis, diagonal gates.
//!
//! Convention: `G_jk(γ,φ) = exp(−iγ(cosφ λˣ − sinφ λʸ))` with `j` the pivot
//! (the level that keeps the weight) and `k` the target (the level emptied).
//! On `span{|j⟩,|k⟩}` the block is `[[cosγ, −i sinγ e^{iφ}], [−i sinγ e^{−iφ}, cosγ]]`.

mod diagonal;
mod qr;
mod spectral;

use num_complex::Complex64;

use crate::coupling_graph::CouplingGraph;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::scheduler::{RotationLabel, Schedule};

pub use diagonal::{
    default_diagonal_tree, diag_solve, edge_phase_product, euler_rotations, euler_z_as_xyx, interleave_phasing,
    interleave_phasing_at, parallel_diagonal_schedule, phase_layer_starts, DiagonalGate, EdgePhase,
};
pub use qr::{qr_decompose, qr_decompose_in_order, QrDecomposition};
pub use spectral::{
    spectral_product, spectral_synthesize, spectral_synthesize_on, SpectralFactor, SpectralReport,
};

/// Two-level rotation `G_jk(γ,φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub j: usize,
    pub k: usize,
    pub gamma: f64,
    pub phi: f64,
}

impl GivensRotation {
    pub fn new(j: usize, k: usize, gamma: f64, phi: f64) -> Self {
        Self { j, k, gamma, phi }
    }

    /// Action on the ordered pair `(|j⟩, |k⟩)`.
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.gamma.sin_cos();
        let mi = Complex64::new(0.0, -1.0);
        [
            [Complex64::new(c, 0.0), mi * s * Complex64::from_polar(1.0, self.phi)],
            [mi * s * Complex64::from_polar(1.0, -self.phi), Complex64::new(c, 0.0)],
        ]
    }

    /// Inverse rotation `G_jk(−γ,φ)`.
    pub fn inverse(&self) -> Self {
        Self {
            gamma: -self.gamma,
            ..*self
        }
    }

    /// Left-multiplies rows `j` and `k` of `m` in place.
    pub fn apply_rows(&self, m: &mut ComplexMatrix) {
        let b = self.block();
        for col in 0..m.ncols() {
            let (x, y) = (m[(self.j, col)], m[(self.k, col)]);
            m[(self.j, col)] = b[0][0] * x + b[0][1] * y;
            m[(self.k, col)] = b[1][0] * x + b[1][1] * y;
        }
    }

    /// Applies the rotation to a state in place.
    pub fn apply_state(&self, v: &mut StateVector) {
        let b = self.block();
        let (x, y) = (v[self.j], v[self.k]);
        v[self.j] = b[0][0] * x + b[0][1] * y;
        v[self.k] = b[1][0] * x + b[1][1] * y;
    }
}

/// Dense `d×d` matrix of a rotation.
pub fn givens_matrix(r: &GivensRotation, d: usize) -> Result<ComplexMatrix> {
    if r.j == r.k {
        return Err(Error::DegenerateRotation(r.j));
    }
    if r.j >= d || r.k >= d {
        return Err(Error::LevelOutOfRange { level: r.j.max(r.k), d });
    }
    let mut m = ComplexMatrix::identity(d, d);
    let b = r.block();
    m[(r.j, r.j)] = b[0][0];
    m[(r.j, r.k)] = b[0][1];
    m[(r.k, r.j)] = b[1][0];
    m[(r.k, r.k)] = b[1][1];
    Ok(m)
}

/// Rotation on `(pivot, target)` that empties `target`, keeping the pivot's phase.
///
/// With `a = v[pivot] = |a|e^{iα}` and `b = v[target] = |b|e^{iβ}` the choice is
/// `γ = atan2(|b|, |a|)` and `φ = α − β + π/2`; the pivot ends as `e^{iα}√(|a|²+|b|²)`
/// (α = 0 when `a = 0`). A zero target gives `γ = 0`.
pub fn zeroing_params(v: &StateVector, target: usize, pivot: usize) -> Result<GivensRotation> {
    if target == pivot {
        return Err(Error::DegenerateRotation(target));
    }
    let d = v.len();
    if target >= d || pivot >= d {
        return Err(Error::LevelOutOfRange { level: target.max(pivot), d });
    }
    Ok(zeroing_pair(v[pivot], v[target], pivot, target))
}

fn zeroing_pair(a: Complex64, b: Complex64, pivot: usize, target: usize) -> GivensRotation {
    if b.norm() == 0.0 {
        return GivensRotation::new(pivot, target, 0.0, 0.0);
    }
    let alpha = if a.norm() > 0.0 { a.arg() } else { 0.0 };
    let gamma = b.norm().atan2(a.norm());
    let phi = alpha - b.arg() + std::f64::consts::FRAC_PI_2;
    GivensRotation::new(pivot, target, gamma, phi)
}

/// Parameterized rotations of a state reduction, grouped by schedule step.
#[derive(Debug, Clone, PartialEq)]
pub struct StateReduction {
    pub steps: Vec<Vec<(RotationLabel, GivensRotation)>>,
    /// State after all rotations, ideally `e^{iθ}|target⟩`.
    pub residual: StateVector,
    /// The free phase θ left on the target level.
    pub phase: f64,
}

impl StateReduction {
    /// Largest magnitude left on a non-target level.
    pub fn leakage(&self, target: usize) -> f64 {
        self.residual
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != target)
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
    }

    /// Product of all rotations (maps the input state to the residual).
    pub fn unitary(&self, d: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(d, d);
        for (_, r) in self.steps.iter().flatten() {
            r.apply_rows(&mut m);
        }
        m
    }
}

/// Reduces `psi` toward `target` by following `s`, computing each rotation from the current state.
pub fn state_reduce(
    g: &CouplingGraph,
    s: &Schedule,
    psi: &StateVector,
    target: usize,
) -> Result<StateReduction> {
    if psi.len() != g.d() {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes, graph has {} levels",
            psi.len(),
            g.d()
        )));
    }
    if target >= g.d() {
        return Err(Error::LevelOutOfRange { level: target, d: g.d() });
    }
    let mut state = psi.clone();
    let mut steps = Vec::with_capacity(s.steps().len());
    for step in s.steps() {
        let mut params = Vec::with_capacity(step.len());
        for &label in step {
            if !g.has_edge(label.pivot, label.target) {
                return Err(Error::NotAnEdge(label.pivot, label.target));
            }
            params.push((label, zeroing_params(&state, label.target, label.pivot)?));
        }
        for (_, r) in &params {
            r.apply_state(&mut state);
        }
        steps.push(params);
    }
    let phase = state[target].arg();
    Ok(StateReduction {
        steps,
        residual: state,
        phase,
    })
}

/// Unitary `R` with `R v = ‖v‖ |target⟩` exactly (real non-negative amplitude).
///
/// Built from rotations emptying every other level into `target`, followed by
/// a phase on `target`.
pub fn reduction_unitary(v: &StateVector, target: usize) -> ComplexMatrix {
    let d = v.len();
    let mut state = v.clone();
    let mut m = ComplexMatrix::identity(d, d);
    for level in (0..d).rev().filter(|&l| l != target) {
        let r = zeroing_pair(state[target], state[level], target, level);
        r.apply_state(&mut state);
        r.apply_rows(&mut m);
    }
    let a = state[target];
    if a.norm() > 0.0 {
        let fix = Complex64::from_polar(1.0, -a.arg());
        for col in 0..d {
            m[(target, col)] *= fix;
        }
    }
    m
}
