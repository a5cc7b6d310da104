//! Givens QR reduction of a unitary along a precedence structure.

use std::collections::BTreeMap;

use super::{zeroing_pair, DiagonalGate, GivensRotation};
use crate::coupling_graph::CouplingGraph;
use crate::error::{Error, Result};
use crate::linalg::{ensure_unitary, ComplexMatrix};
use crate::scheduler::{PrecedenceDag, RotationLabel, Schedule};

/// Result of reducing `U†` to diagonal form: `G_N ⋯ G_1 U† = D†`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrDecomposition {
    /// Rotations in application order.
    pub rotations: Vec<(RotationLabel, GivensRotation)>,
    pub diagonal: DiagonalGate,
}

impl QrDecomposition {
    /// `G_N ⋯ G_1`.
    pub fn rotation_product(&self, d: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(d, d);
        for (_, r) in &self.rotations {
            r.apply_rows(&mut m);
        }
        m
    }

    /// `U = D · G_N ⋯ G_1`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.diagonal.d();
        self.diagonal.matrix() * self.rotation_product(d)
    }
}

/// Reduces `u` using the precedence structure's own topological order.
pub fn qr_decompose(g: &CouplingGraph, dag: &PrecedenceDag, u: &ComplexMatrix) -> Result<QrDecomposition> {
    qr_decompose_in_order(g, dag, &dag.topological_schedule(), u)
}

/// Reduces `u` applying rotations in the order of `schedule`, which must cover the structure.
pub fn qr_decompose_in_order(
    g: &CouplingGraph,
    dag: &PrecedenceDag,
    schedule: &Schedule,
    u: &ComplexMatrix,
) -> Result<QrDecomposition> {
    let d = dag.d();
    if u.nrows() != d || g.d() != d {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, graph has {} levels, structure has {d}",
            u.nrows(),
            u.ncols(),
            g.d()
        )));
    }
    ensure_unitary(u)?;
    let by_label: BTreeMap<RotationLabel, usize> = dag
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.rotation, i))
        .collect();
    let mut done = vec![false; dag.nodes().len()];
    let mut m = u.adjoint();
    let mut rotations = Vec::with_capacity(done.len());
    for step in schedule.steps() {
        let mut params = Vec::with_capacity(step.len());
        for label in step {
            let &i = by_label
                .get(label)
                .ok_or_else(|| Error::InvalidSchedule(format!("{label} is not in the precedence structure")))?;
            let node = &dag.nodes()[i];
            if let Some(&p) = node.preds.iter().find(|&&p| !done[p]) {
                return Err(Error::InvalidSchedule(format!(
                    "{label} scheduled before its predecessor {}",
                    dag.nodes()[p].rotation
                )));
            }
            if !g.has_edge(label.pivot, label.target) {
                return Err(Error::NotAnEdge(label.pivot, label.target));
            }
            let col = dag.row_order()[node.column];
            params.push((*label, zeroing_pair(m[(label.pivot, col)], m[(label.target, col)], label.pivot, label.target)));
        }
        for (label, r) in &params {
            r.apply_rows(&mut m);
            done[by_label[label]] = true;
        }
        rotations.extend(params);
    }
    if let Some(i) = done.iter().position(|&x| !x) {
        return Err(Error::InvalidSchedule(format!(
            "schedule omits {}",
            dag.nodes()[i].rotation
        )));
    }
    let diagonal = DiagonalGate::new((0..d).map(|l| -m[(l, l)].arg()).collect());
    Ok(QrDecomposition { rotations, diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling_graph::builtin_graph;
    use crate::linalg::{random_special_unitary, seeded_rng};
    use crate::scheduler::{builtin_qr_layout, constrain_dag, qr_precedence};

    fn setup(name: &str) -> (CouplingGraph, PrecedenceDag) {
        let g = builtin_graph(name).unwrap();
        let l = builtin_qr_layout(name).unwrap();
        let dag = qr_precedence(&g, &l.row_order, &l.first_column_plan).unwrap();
        (g, dag)
    }

    #[test]
    fn identity_gives_trivial_rotations() {
        let (g, dag) = setup("rb87");
        let qr = qr_decompose(&g, &dag, &ComplexMatrix::identity(8, 8)).unwrap();
        assert!(qr.rotations.iter().all(|(_, r)| r.gamma == 0.0));
        assert!(qr.diagonal.phases().iter().all(|&p| p.abs() < 1e-15));
    }

    #[test]
    fn random_su8_reconstructs() {
        let (g, dag) = setup("rb87");
        let mut rng = seeded_rng(3);
        let u = random_special_unitary(8, &mut rng);
        let qr = qr_decompose_in_order(&g, &dag, &constrain_dag(&dag, 3), &u).unwrap();
        assert_eq!(qr.rotations.len(), 28);
        assert!((qr.reconstruct() - &u).norm() <= 1e-9);
        let lhs = qr.rotation_product(8) * u.adjoint();
        assert!((lhs - qr.diagonal.matrix().adjoint()).norm() <= 1e-9);
    }

    #[test]
    fn non_unitary_reports_defect() {
        let (g, dag) = setup("rb87");
        let m = ComplexMatrix::identity(8, 8) * num_complex::Complex64::new(1.1, 0.0);
        assert!(matches!(qr_decompose(&g, &dag, &m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn out_of_order_schedule_rejected() {
        let (g, dag) = setup("rb87");
        let mut steps: Vec<Vec<RotationLabel>> = constrain_dag(&dag, 1).steps().to_vec();
        steps.swap(0, 27);
        let err = qr_decompose_in_order(&g, &dag, &Schedule::new(steps), &ComplexMatrix::identity(8, 8));
        assert!(matches!(err, Err(Error::InvalidSchedule(_))));
    }
}
