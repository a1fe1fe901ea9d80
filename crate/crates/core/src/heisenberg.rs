//! Operator-space conjugation of Pauli sums through Clifford + Rz circuits.
//!
//! For a circuit applied as `g_1, ..., g_m` the unitary is `U = g_m ... g_1`
//! and the transformed operator `U^dag H U` is built by conjugating with
//! `g_m` first.

use crate::circuit::{Circuit, Gate, LadderCircuit};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::tableau::CliffordGate;

/// Coefficients below this are treated as exact zeros while merging.
const MERGE_TOL: f64 = 1e-15;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `U^dag H U`
    Heisenberg,
    /// `U H U^dag`
    Schrodinger,
}

fn merge(n: usize, terms: Vec<(f64, PauliString)>) -> Result<PauliSum> {
    PauliSum::from_complex(
        n,
        terms
            .into_iter()
            .map(|(c, p)| (p.x().clone(), p.z().clone(), p.sign_complex() * c)),
        MERGE_TOL,
    )
}

fn terms_of(h: &PauliSum) -> Vec<(f64, PauliString)> {
    h.terms().iter().map(|t| (t.coeff, t.op.clone())).collect()
}

pub(crate) fn clifford_pass(terms: &mut [(f64, PauliString)], axis: &PauliString, forward: bool) {
    for (c, op) in terms.iter_mut() {
        if !op.commutes_unchecked(axis) {
            let r = op.conjugate_by_rotation(axis, forward);
            match r.sign_exp() {
                0 => {}
                2 => *c = -*c,
                _ => unreachable!("Clifford conjugation of a Hermitian word stays Hermitian"),
            }
            *op = r.word();
        }
    }
}

/// Conjugates by a list of Clifford rotations given in application order.
/// Coefficients change only in sign.
pub fn conjugate_by_clifford(h: &PauliSum, gates: &[CliffordGate], dir: Direction) -> Result<PauliSum> {
    let n = h.n();
    let mut terms = terms_of(h);
    let axes = gates
        .iter()
        .filter(|g| !g.is_identity())
        .map(|g| g.axis(n))
        .collect::<Result<Vec<_>>>()?;
    match dir {
        Direction::Heisenberg => axes.iter().rev().for_each(|a| clifford_pass(&mut terms, a, false)),
        Direction::Schrodinger => axes.iter().for_each(|a| clifford_pass(&mut terms, a, true)),
    }
    merge(n, terms)
}

/// Conjugates by `R = exp(-i theta P / 2)` for a Hermitian Pauli `P`.
/// In the Heisenberg direction an anticommuting term `T` maps to
/// `cos(theta) T + sin(theta) (i P T)`.
pub fn conjugate_by_pauli_rotation(h: &PauliSum, axis: &PauliString, theta: f64, dir: Direction) -> Result<PauliSum> {
    check_dim(h.n(), axis.n())?;
    if !axis.is_hermitian() {
        return Err(Error::NotHermitian(format!("rotation axis {axis} is not Hermitian")));
    }
    if !theta.is_finite() {
        return Err(Error::Invalid(format!("non-finite rotation angle {theta}")));
    }
    let (s, c) = theta.sin_cos();
    let s = match dir {
        Direction::Heisenberg => s,
        Direction::Schrodinger => -s,
    };
    let mut out = Vec::with_capacity(2 * h.len());
    for t in h.terms() {
        if t.op.commutes_unchecked(axis) {
            out.push((t.coeff, t.op.clone()));
        } else {
            out.push((t.coeff * c, t.op.clone()));
            out.push((t.coeff * s, axis.mul_unchecked(&t.op).times_i_pow(1)));
        }
    }
    merge(h.n(), out)
}

/// `Rz(theta)^dag H Rz(theta)` with `Rz(theta) = exp(-i theta Z_q / 2)`.
pub fn conjugate_by_rz(h: &PauliSum, q: usize, theta: f64) -> Result<PauliSum> {
    let axis = PauliString::single(h.n(), q, Pauli::Z)?;
    conjugate_by_pauli_rotation(h, &axis, theta, Direction::Heisenberg)
}

/// `U^dag H U` for a general circuit.
pub fn transform_circuit(h: &PauliSum, c: &Circuit) -> Result<PauliSum> {
    check_dim(c.n, h.n())?;
    c.validate()?;
    let n = h.n();
    let mut pending = terms_of(h);
    for g in c.gates.iter().rev() {
        match g {
            Gate::Clifford(cg) => {
                if !cg.is_identity() {
                    clifford_pass(&mut pending, &cg.axis(n)?, false);
                }
            }
            Gate::Rz { site, theta } => {
                let cur = merge(n, std::mem::take(&mut pending))?;
                pending = terms_of(&conjugate_by_rz(&cur, *site, *theta)?);
            }
        }
    }
    merge(n, pending)
}

/// `U^dag H U` for a ladder circuit.
pub fn transform(h: &PauliSum, c: &LadderCircuit) -> Result<PauliSum> {
    c.validate()?;
    transform_circuit(h, &c.to_circuit())
}

/// `<0...0| H |0...0>`: the sum of diagonal coefficients of a canonical sum.
pub fn zero_state_energy(h: &PauliSum) -> f64 {
    h.terms()
        .iter()
        .filter(|t| t.op.is_diagonal())
        .map(|t| t.coeff * t.op.hermitian_sign().unwrap_or(1.0))
        .sum()
}

/// `<0...0| U^dag H U |0...0>`.
pub fn ground_energy_objective(h: &PauliSum, c: &LadderCircuit) -> Result<f64> {
    Ok(zero_state_energy(&transform(h, c)?))
}

/// `<0...0| U^dag H U |0...0>` for a general circuit.
pub fn circuit_energy(h: &PauliSum, c: &Circuit) -> Result<f64> {
    Ok(zero_state_energy(&transform_circuit(h, c)?))
}
