//! Joint state of two qudits and their ancilla qubits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};

/// Measurement basis for an ancilla qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Outcomes `|0⟩`, `|1⟩`.
    Z,
    /// Outcomes `|+⟩` (0), `|−⟩` (1).
    X,
}

impl Basis {
    /// Qubit state selected by `outcome`.
    pub fn state(self, outcome: u8) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = match (self, outcome) {
            (Basis::Z, 0) => [1.0, 0.0],
            (Basis::Z, _) => [0.0, 1.0],
            (Basis::X, 0) => [h, h],
            (Basis::X, _) => [h, -h],
        };
        StateVector::from_iterator(2, v.iter().map(|&x| Complex64::new(x, 0.0)))
    }
}

/// Subsystems ordered `A, A_1..A_n, B_1..B_n, B`; the first subsystem is most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridRegister {
    d: usize,
    pairs: usize,
    dims: Vec<usize>,
    strides: Vec<usize>,
    state: StateVector,
}

impl HybridRegister {
    /// Places `psi` (on `A⊗B`) next to `pairs` ancilla pairs in `|0⟩`.
    pub fn new(d: usize, pairs: usize, psi: &StateVector) -> Result<Self> {
        if psi.len() != d * d {
            return Err(Error::Dimension(format!(
                "two-qudit state needs {} amplitudes, got {}",
                d * d,
                psi.len()
            )));
        }
        let mut dims = vec![d];
        dims.extend(std::iter::repeat_n(2, 2 * pairs));
        dims.push(d);
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len() - 1).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let total = strides[0] * dims[0];
        let anc = 1usize << (2 * pairs);
        let mut state = StateVector::zeros(total);
        for a in 0..d {
            for b in 0..d {
                state[a * strides[0] + b] = psi[a * d + b];
            }
        }
        debug_assert_eq!(total, d * d * anc);
        Ok(Self {
            d,
            pairs,
            dims,
            strides,
            state,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn a(&self) -> usize {
        0
    }

    pub fn b(&self) -> usize {
        2 * self.pairs + 1
    }

    /// Ancilla `A_{j+1}` on Alice's side.
    pub fn a_anc(&self, j: usize) -> usize {
        1 + j
    }

    /// Ancilla `B_{j+1}` on Bob's side.
    pub fn b_anc(&self, j: usize) -> usize {
        1 + self.pairs + j
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn norm(&self) -> f64 {
        self.state.norm()
    }

    fn offsets(&self, subs: &[usize]) -> Vec<usize> {
        let mut offsets = vec![0usize];
        for &s in subs {
            let mut next = Vec::with_capacity(offsets.len() * self.dims[s]);
            for &o in &offsets {
                for digit in 0..self.dims[s] {
                    next.push(o + digit * self.strides[s]);
                }
            }
            offsets = next;
        }
        offsets
    }

    /// Applies `op` to the listed subsystems (the first listed is most significant in `op`).
    pub fn apply(&mut self, op: &ComplexMatrix, subs: &[usize]) {
        let offsets = self.offsets(subs);
        assert_eq!(op.nrows(), offsets.len(), "operator dimension must match subsystems");
        let rest: Vec<usize> = (0..self.dims.len()).filter(|s| !subs.contains(s)).collect();
        let mut buf = StateVector::zeros(offsets.len());
        let mut out = StateVector::zeros(offsets.len());
        for base in self.offsets(&rest) {
            for (i, &o) in offsets.iter().enumerate() {
                buf[i] = self.state[base + o];
            }
            op.mul_to(&buf, &mut out);
            for (i, &o) in offsets.iter().enumerate() {
                self.state[base + o] = out[i];
            }
        }
    }

    /// Probability of `outcome` when measuring qubit `sub` in `basis`.
    pub fn probability(&self, sub: usize, basis: Basis, outcome: u8) -> f64 {
        let mut copy = self.clone();
        copy.project(sub, basis, outcome);
        copy.state.norm_squared() / self.state.norm_squared()
    }

    fn project(&mut self, sub: usize, basis: Basis, outcome: u8) {
        let v = basis.state(outcome);
        let p = &v * v.adjoint();
        self.apply(&p, &[sub]);
    }

    /// Projects qubit `sub` onto `outcome`, renormalizes, and returns the outcome probability.
    pub fn measure(&mut self, sub: usize, basis: Basis, outcome: u8) -> f64 {
        let before = self.state.norm_squared();
        self.project(sub, basis, outcome);
        let after = self.state.norm_squared();
        if after > 0.0 {
            self.state /= Complex64::new(after.sqrt(), 0.0);
        }
        after / before
    }

    /// Contracts every ancilla with the given qubit state, leaving the (unnormalized) `A⊗B` vector.
    ///
    /// Its squared norm is the overlap of the register with `ψ_AB ⊗ ancilla record`.
    pub fn contract_ancillas(&self, record: &[StateVector]) -> StateVector {
        assert_eq!(record.len(), 2 * self.pairs, "one state per ancilla");
        let d = self.d;
        let mut out = StateVector::zeros(d * d);
        let anc_count = 1usize << (2 * self.pairs);
        for a in 0..d {
            for b in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for bits in 0..anc_count {
                    let mut index = a * self.strides[0] + b;
                    let mut weight = Complex64::new(1.0, 0.0);
                    for (q, state) in record.iter().enumerate() {
                        let bit = (bits >> (2 * self.pairs - 1 - q)) & 1;
                        index += bit * self.strides[1 + q];
                        weight *= state[bit].conj();
                    }
                    acc += weight * self.state[index];
                }
                out[a * d + b] = acc;
            }
        }
        out
    }
}
