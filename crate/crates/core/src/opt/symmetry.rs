//! Symmetry diagnostics of `U|0...0>` for operators such as particle number.

use crate::circuit::LadderCircuit;
use crate::dense;
use crate::error::{check_dim, Result};
use crate::heisenberg::{transform, zero_state_energy};
use crate::pauli::PauliSum;
use serde::{Deserialize, Serialize};

/// Eigenvalues closer than this are merged into one histogram bin.
const EIG_MERGE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryStats {
    pub mean: f64,
    pub variance: f64,
    /// `(eigenvalue, weight)` of the state in each eigenspace; `None` above
    /// the dense size limit.
    pub histogram: Option<Vec<(f64, f64)>>,
}

/// Mean and variance through the Heisenberg path, plus the eigenspace
/// weights from a dense projection when `n <= 10`.
pub fn symmetry_report(c: &LadderCircuit, ops: &[PauliSum]) -> Result<Vec<SymmetryStats>> {
    let mut out = Vec::with_capacity(ops.len());
    let state = if c.n <= dense::CIRCUIT_LIMIT {
        Some(dense::simulate(&c.to_circuit(), &dense::zero_state(c.n))?)
    } else {
        None
    };
    for op in ops {
        check_dim(c.n, op.n())?;
        let mean = zero_state_energy(&transform(op, c)?);
        let second = zero_state_energy(&transform(&op.mul(op)?, c)?);
        let variance = (second - mean * mean).max(0.0);
        let histogram = match &state {
            Some(psi) => Some(eigen_weights(op, psi)?),
            None => None,
        };
        out.push(SymmetryStats { mean, variance, histogram });
    }
    Ok(out)
}

fn eigen_weights(op: &PauliSum, psi: &[num_complex::Complex64]) -> Result<Vec<(f64, f64)>> {
    let m = dense::pauli_sum_to_dense(op)?;
    let (vals, vecs) = m.eigh()?;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    for (j, &e) in vals.iter().enumerate() {
        let amp: num_complex::Complex64 = vecs.column(j).iter().zip(psi).map(|(v, p)| v.conj() * p).sum();
        let w = amp.norm_sqr();
        match bins.last_mut() {
            Some(last) if (e - last.0).abs() < EIG_MERGE => last.1 += w,
            _ => bins.push((e, w)),
        }
    }
    Ok(bins)
}
