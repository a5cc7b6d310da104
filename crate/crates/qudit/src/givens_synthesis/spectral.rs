//! Spectral synthesis `U = ∏_ℓ W_ℓ C_ℓ W_ℓ†`.

use num_complex::Complex64;

use super::{reduction_unitary, state_reduce};
use crate::coupling_graph::CouplingGraph;
use crate::error::{Error, Result};
use crate::linalg::{unitary_eigen, ComplexMatrix, StateVector};
use crate::scheduler::{best_state_synthesis, SynthesisOptions};

/// One eigenpair factor: `W` maps `|level⟩` to the eigenvector, `C` applies the eigenvalue on `|level⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactor {
    pub level: usize,
    pub eigenvalue: Complex64,
    pub w: ComplexMatrix,
    pub c: ComplexMatrix,
}

/// Parallel-step accounting of the spectral route on a coupling graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralReport {
    /// `(level, state-synthesis depth)` for each eigenvector.
    pub depths: Vec<(usize, usize)>,
    /// Steps for all `W_ℓ` and `W_ℓ†`: twice the sum of depths.
    pub givens_steps: usize,
    /// Single-level phase operations `C_ℓ`, one per level.
    pub phase_operations: usize,
}

fn phase_matrix(d: usize, level: usize, value: Complex64) -> ComplexMatrix {
    let mut c = ComplexMatrix::identity(d, d);
    c[(level, level)] = value;
    c
}

/// Eigenvalues in ascending phase order; each `W_ℓ` built from unrestricted rotations.
pub fn spectral_synthesize(u: &ComplexMatrix) -> Result<Vec<SpectralFactor>> {
    let (values, vectors) = unitary_eigen(u)?;
    let d = u.nrows();
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(level, eigenvalue)| {
            let v: StateVector = vectors.column(level).into_owned();
            SpectralFactor {
                level,
                eigenvalue,
                w: reduction_unitary(&v, level).adjoint(),
                c: phase_matrix(d, level, eigenvalue),
            }
        })
        .collect())
}

/// Spectral synthesis where every `W_ℓ†` follows the best `k`-way state-synthesis schedule on `g`.
pub fn spectral_synthesize_on(
    g: &CouplingGraph,
    u: &ComplexMatrix,
    k: usize,
    opts: &SynthesisOptions,
) -> Result<(Vec<SpectralFactor>, SpectralReport)> {
    let d = g.d();
    if u.nrows() != d {
        return Err(Error::Dimension(format!("matrix is {}x{}, graph has {d} levels", u.nrows(), u.ncols())));
    }
    let (values, vectors) = unitary_eigen(u)?;
    let mut factors = Vec::with_capacity(d);
    let mut depths = Vec::with_capacity(d);
    for (level, eigenvalue) in values.into_iter().enumerate() {
        let (_, schedule) = best_state_synthesis(g, level, k, opts)?;
        let v: StateVector = vectors.column(level).into_owned();
        let reduction = state_reduce(g, &schedule, &v, level)?;
        let mut w_dag = reduction.unitary(d);
        let fix = Complex64::from_polar(1.0, -reduction.phase);
        for col in 0..d {
            w_dag[(level, col)] *= fix;
        }
        depths.push((level, schedule.depth()));
        factors.push(SpectralFactor {
            level,
            eigenvalue,
            w: w_dag.adjoint(),
            c: phase_matrix(d, level, eigenvalue),
        });
    }
    let givens_steps = 2 * depths.iter().map(|&(_, s)| s).sum::<usize>();
    Ok((
        factors,
        SpectralReport {
            depths,
            givens_steps,
            phase_operations: d,
        },
    ))
}

/// `∏_ℓ W_ℓ C_ℓ W_ℓ†`.
pub fn spectral_product(factors: &[SpectralFactor]) -> ComplexMatrix {
    let d = factors.first().map_or(0, |f| f.w.nrows());
    factors
        .iter()
        .fold(ComplexMatrix::identity(d, d), |acc, f| acc * &f.w * &f.c * f.w.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling_graph::builtin_graph;
    use crate::linalg::{random_unitary, seeded_rng};

    #[test]
    fn random_u4_reconstructs() {
        let u = random_unitary(4, &mut seeded_rng(4));
        let f = spectral_synthesize(&u).unwrap();
        assert!((spectral_product(&f) - &u).norm() <= 1e-9);
        for fac in &f {
            let col = fac.w.column(fac.level).into_owned();
            let image = &u * &col;
            assert!((image - col * fac.eigenvalue).norm() < 1e-9);
        }
    }

    #[test]
    fn diagonal_input() {
        let d = StateVector::from_vec(
            (0..3).map(|i| Complex64::from_polar(1.0, 0.4 * i as f64 - 0.3)).collect(),
        );
        let u = ComplexMatrix::from_diagonal(&d);
        let f = spectral_synthesize(&u).unwrap();
        assert!((spectral_product(&f) - &u).norm() <= 1e-12);
    }

    #[test]
    fn rb87_route_on_graph() {
        let g = builtin_graph("rb87").unwrap();
        let u = random_unitary(8, &mut seeded_rng(8));
        let (f, report) = spectral_synthesize_on(&g, &u, 2, &SynthesisOptions::for_graph(&g)).unwrap();
        assert!((spectral_product(&f) - &u).norm() <= 1e-9);
        assert_eq!(report.givens_steps, 68);
        assert_eq!(report.phase_operations, 8);
    }
}
