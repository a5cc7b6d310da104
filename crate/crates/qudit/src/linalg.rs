//! Dense complex matrices and vectors used for numerical verification.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense complex matrix (row-major semantics, column-major storage).
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex amplitude vector.
pub type StateVector = DVector<Complex64>;

/// Admission tolerance for unitarity checks.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Deterministic generator used for every seeded draw in the toolkit.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of R removed.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let (q, r) = g.qr().unpack();
    let mut q = q;
    for c in 0..n {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 {
            rc / rc.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Haar-random element of SU(n).
pub fn random_special_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let u = random_unitary(n, rng);
    let det = u.determinant();
    let fix = Complex64::from_polar(1.0, -det.arg() / n as f64);
    u * fix
}

/// Uniformly random normalized state.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let v = StateVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Frobenius norm of `M†M − I`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - ComplexMatrix::identity(n, n)).norm()
}

/// Errors unless `m` is square and unitary within `UNITARITY_TOL`.
pub fn ensure_unitary(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = unitarity_defect(m);
    if defect.is_finite() && defect <= UNITARITY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary { defect })
    }
}

/// `‖A − e^{iθ}B‖_F` minimized over the global phase θ.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    (a - b * phase).norm()
}

/// `(|tr(A†B)| / n)²`, equal to 1 exactly when the unitaries agree up to global phase.
pub fn unitary_fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows() as f64;
    let t = (a.adjoint() * b).trace().norm() / n;
    t * t
}

/// `|⟨a|b⟩|²` for normalized vectors.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Computational basis vector `|index⟩` of dimension `n`.
pub fn basis_state(n: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(n);
    v[index] = Complex64::new(1.0, 0.0);
    v
}

/// Eigen-decomposition of a unitary via complex Schur form.
///
/// Returns `(eigenvalues, eigenvectors as columns)` ordered by ascending phase
/// angle in (−π, π].
pub fn unitary_eigen(u: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    ensure_unitary(u)?;
    let n = u.nrows();
    let schur = nalgebra::linalg::Schur::try_new(u.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut off = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                off = off.max(t[(r, c)].norm());
            }
        }
    }
    if off > 1e-8 {
        return Err(Error::Eigen(format!(
            "Schur form is not diagonal (off-diagonal {off:.3e})"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let angle = |c: Complex64| {
        let a = c.arg();
        if a <= -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            a
        }
    };
    idx.sort_by(|&a, &b| angle(t[(a, a)]).total_cmp(&angle(t[(b, b)])).then(a.cmp(&b)));
    let values = idx.iter().map(|&i| t[(i, i)]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| q[(r, idx[c])]);
    Ok((values, vectors))
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.17e}{}{:.17e}j", z.re, sign, z.im.abs())
}

fn parse_complex(token: &str) -> Option<Complex64> {
    let t = token.trim();
    if let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().ok()?;
                let im_str = &body[i..];
                let im: f64 = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im: f64 = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0))
    }
}

/// Parses the matrix file format: `dim <n>` followed by `n` rows of `n` entries.
///
/// Entries are `re+imj` tokens; plain reals and scientific notation are accepted.
/// Blank lines and `#` comments are ignored.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut dim: Option<usize> = None;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        match dim {
            None => {
                let mut parts = line.split_whitespace();
                if parts.next() != Some("dim") {
                    return Err(err("expected `dim <n>` header".into()));
                }
                let n: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| err("invalid dimension".into()))?;
                if parts.next().is_some() {
                    return Err(err("trailing tokens after dimension".into()));
                }
                dim = Some(n);
            }
            Some(n) => {
                let row: Vec<Complex64> = line
                    .split_whitespace()
                    .map(|tok| parse_complex(tok).ok_or_else(|| err(format!("bad entry `{tok}`"))))
                    .collect::<Result<_>>()?;
                if row.len() != n {
                    return Err(err(format!("expected {n} entries, found {}", row.len())));
                }
                if rows.len() == n {
                    return Err(err("more rows than the declared dimension".into()));
                }
                rows.push(row);
            }
        }
    }
    let n = dim.ok_or(Error::Parse {
        line: 0,
        message: "missing `dim <n>` header".into(),
    })?;
    if rows.len() != n {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!("expected {n} rows, found {}", rows.len()),
        });
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

/// Serializes a square matrix in the format read by [`parse_matrix`].
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("dim {}\n", m.nrows());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_complex(m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = seeded_rng(1);
        for n in 1..6 {
            let u = random_unitary(n, &mut rng);
            assert!(unitarity_defect(&u) < 1e-12);
            let su = random_special_unitary(n, &mut rng);
            assert!((su.determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn seeding_is_reproducible() {
        let a = random_unitary(4, &mut seeded_rng(7));
        let b = random_unitary(4, &mut seeded_rng(7));
        assert_eq!(a, b);
    }

    #[test]
    fn complex_tokens_parse() {
        let cases = [
            ("1.5", Complex64::new(1.5, 0.0)),
            ("-2e-3+4.0j", Complex64::new(-2e-3, 4.0)),
            ("1e+2-3E-1j", Complex64::new(100.0, -0.3)),
            ("-0.5j", Complex64::new(0.0, -0.5)),
            ("j", Complex64::new(0.0, 1.0)),
        ];
        for (tok, want) in cases {
            assert_eq!(parse_complex(tok), Some(want), "{tok}");
        }
        assert_eq!(parse_complex("abc"), None);
    }

    #[test]
    fn matrix_format_round_trips() {
        let u = random_unitary(3, &mut seeded_rng(3));
        let back = parse_matrix(&format_matrix(&u)).unwrap();
        assert!((back - &u).norm() < 1e-15);
    }

    #[test]
    fn matrix_parse_errors_carry_line_numbers() {
        let err = parse_matrix("dim 2\n1 0\n0 x\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, message: "bad entry `x`".into() });
        assert!(parse_matrix("dim 2\n1 0\n").is_err());
    }

    #[test]
    fn eigen_reconstructs_unitary() {
        let u = random_unitary(5, &mut seeded_rng(11));
        let (vals, vecs) = unitary_eigen(&u).unwrap();
        let d = ComplexMatrix::from_diagonal(&StateVector::from_vec(vals.clone()));
        assert!((&vecs * d * vecs.adjoint() - &u).norm() < 1e-10);
        let angles: Vec<f64> = vals.iter().map(|v| v.arg()).collect();
        assert!(angles.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = ComplexMatrix::identity(2, 2) * Complex64::new(2.0, 0.0);
        assert!(matches!(ensure_unitary(&m), Err(Error::NotUnitary { .. })));
    }
}
