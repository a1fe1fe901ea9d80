//! Clifford warm start by pinning dominant off-diagonal terms to single-site
//! Z operators, and basis-state seeding.

use crate::bits::Bits;
use crate::error::Result;
use crate::heisenberg::{conjugate_by_clifford, Direction};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::tableau::CliffordGate;

/// Off-diagonal weight below which the warm start stops.
const FLOOR: f64 = 1e-12;

fn partner(n: usize, q: usize) -> usize {
    (q + 1) % n
}

/// Single-site rotation `exp(i pi P_q / 4)` written as a two-qubit gate with
/// identity on a partner site.
fn single(n: usize, q: usize, p: Pauli) -> CliffordGate {
    CliffordGate::new(q, partner(n, q), p.code() << 2).expect("distinct sites")
}

/// Gates, in Heisenberg processing order, whose conjugation maps the word `t`
/// to a single-site Z (up to sign).
fn pin_sequence(t: &PauliString) -> Vec<CliffordGate> {
    let n = t.n();
    let mut gates = Vec::new();
    let mut cur = t.word();
    let mut push = |g: CliffordGate, cur: &mut PauliString| {
        let axis = g.axis(n).expect("in range");
        *cur = cur.conjugate_by_rotation(&axis, false).word();
        gates.push(g);
    };
    for q in 0..n {
        match cur.get(q) {
            Pauli::X => push(single(n, q, Pauli::Y), &mut cur),
            Pauli::Y => push(single(n, q, Pauli::X), &mut cur),
            _ => {}
        }
    }
    // Now a Z string; fold its support onto the last site.
    let support: Vec<usize> = (0..n).filter(|&q| cur.get(q) == Pauli::Z).collect();
    if let Some((&last, rest)) = support.split_last() {
        for &a in rest {
            // Z_a Z_last -> Y_last under exp(i pi Z_a X_last / 4), then Y -> Z.
            let g = CliffordGate::new(a, last, (Pauli::Z.code() << 2) | Pauli::X.code()).expect("distinct sites");
            push(g, &mut cur);
            push(single(n, last, Pauli::X), &mut cur);
        }
    }
    debug_assert!(cur.is_diagonal() && cur.weight() <= 1);
    gates
}

/// Zeroth-order warm start. Repeatedly takes the off-diagonal term of
/// largest magnitude whose pinning lowers the off-diagonal weight and maps it
/// to a single-site Z. Stops after `n` accepted rounds or when no term helps.
///
/// The returned gates are in application order, so that
/// `conjugate_by_clifford(h, &gates, Heisenberg)` is the reduced Hamiltonian.
pub fn warm_start_tableau(h: &PauliSum) -> Result<Vec<CliffordGate>> {
    let n = h.n();
    let mut processing: Vec<CliffordGate> = Vec::new();
    if n < 2 {
        return Ok(processing);
    }
    let mut cur = h.canonicalize(crate::pauli::DEFAULT_TOL)?;
    let mut weight = cur.offdiag_weight()?;
    for _ in 0..n {
        if weight <= FLOOR {
            break;
        }
        let mut candidates: Vec<&crate::pauli::Term> = cur.terms().iter().filter(|t| !t.op.is_diagonal()).collect();
        // Stable sort keeps canonical order among equal magnitudes.
        candidates.sort_by(|a, b| b.coeff.abs().total_cmp(&a.coeff.abs()));
        let mut accepted = None;
        for t in candidates {
            let seq = pin_sequence(&t.op);
            let app: Vec<CliffordGate> = seq.iter().rev().copied().collect();
            let next = conjugate_by_clifford(&cur, &app, Direction::Heisenberg)?;
            let w = next.offdiag_weight()?;
            if w < weight {
                accepted = Some((seq, next, w));
                break;
            }
        }
        match accepted {
            Some((seq, next, w)) => {
                processing.extend(seq);
                cur = next;
                weight = w;
            }
            None => break,
        }
    }
    processing.reverse();
    Ok(processing)
}

/// `argmin_x <x|H|x>`: exhaustive for `n <= 20`, otherwise greedy single
/// bit flips from the all-zeros string. Ties go to the smallest index.
pub fn best_basis_state(h: &PauliSum) -> Bits {
    let n = h.n();
    if n <= 20 {
        let mut best = (f64::INFINITY, 0u64);
        for x in 0..(1u64 << n) {
            let e = h.basis_expectation(&Bits::from_u64(n, x));
            if e < best.0 {
                best = (e, x);
            }
        }
        return Bits::from_u64(n, best.1);
    }
    let mut x = Bits::zeros(n);
    let mut e = h.basis_expectation(&x);
    loop {
        let mut improved = false;
        for q in 0..n {
            x.flip(q);
            let ne = h.basis_expectation(&x);
            if ne < e {
                e = ne;
                improved = true;
            } else {
                x.flip(q);
            }
        }
        if !improved {
            return x;
        }
    }
}

/// Gates preparing `|x>` from `|0...0>`: `exp(i pi X_q / 2) = i X_q` as two
/// quarter rotations per set bit.
pub fn basis_flip_gates(x: &Bits) -> Vec<CliffordGate> {
    let n = x.len();
    x.iter_ones()
        .flat_map(|q| {
            let g = single(n, q, Pauli::X);
            [g, g]
        })
        .collect()
}
