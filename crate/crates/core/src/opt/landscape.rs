//! Cost as an explicit trigonometric polynomial in the Rz angles.
//!
//! After moving the Clifford part of the circuit onto the Hamiltonian, the
//! Rz layer becomes a product of commuting Pauli rotations
//! `exp(-i theta_j P_j / 2)`. Each Hamiltonian term either commutes with
//! `P_j` or splits into a `cos(theta_j)` and a `sin(theta_j)` branch, and the
//! resulting branch Paulis do not depend on the angles. Only diagonal
//! branches matter for every objective, so they are stored grouped by their
//! Z pattern.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::thermal::{closed_form_free_energy, fwht};
use std::collections::BTreeMap;

/// Limit on the qubit count for objectives that enumerate all basis states.
pub const ENUMERATION_LIMIT: usize = 20;
/// Maximum number of Rz gates (two pattern bits per angle in a `u64`).
pub const MAX_RZ: usize = 32;

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Objective {
    /// `<0...0| U^dag H U |0...0>`
    GroundEnergy,
    /// Closed-form free energy `-(1/beta) log sum_x exp(-beta E_x)` of the
    /// diagonal of `U^dag H U`.
    FreeEnergy { beta: f64 },
    /// Squared-coefficient mass of the off-diagonal part of `U^dag H U`.
    OffdiagWeight,
}

impl Objective {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Objective::FreeEnergy { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::Invalid(format!("beta must be positive and finite, got {beta}")));
                }
                if n > ENUMERATION_LIMIT {
                    return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

const PASS: u64 = 0;
const COS: u64 = 1;
const SIN: u64 = 2;

#[derive(Clone, Debug)]
struct Group {
    z: Bits,
    /// `(coefficient, pattern)`; two bits per angle.
    branches: Vec<(f64, u64)>,
}

/// Diagonal part of `R(theta)^dag H' R(theta)` as a function of the angles.
#[derive(Clone, Debug)]
pub struct ThetaLandscape {
    n: usize,
    k: usize,
    objective: Objective,
    frobenius: f64,
    groups: Vec<Group>,
}

impl ThetaLandscape {
    /// `h` is the Clifford-conjugated Hamiltonian and `axes` the conjugated
    /// rotation axes, which must pairwise commute.
    pub fn new(h: &PauliSum, axes: &[PauliString], objective: Objective) -> Result<Self> {
        let n = h.n();
        let k = axes.len();
        if k > MAX_RZ {
            return Err(Error::Invalid(format!("at most {MAX_RZ} Rz gates are supported, got {k}")));
        }
        objective.validate(n)?;
        let mut map: BTreeMap<Bits, Vec<(f64, u64)>> = BTreeMap::new();
        let mut work: Vec<(f64, u64, PauliString)> = Vec::new();
        for t in h.terms() {
            work.clear();
            work.push((t.coeff * t.op.hermitian_sign().unwrap_or(1.0), PASS, t.op.word()));
            for (j, axis) in axes.iter().enumerate() {
                if t.op.commutes_unchecked(axis) {
                    continue;
                }
                // Commuting axes: the branch Paulis share the term's pattern.
                let mut next = Vec::with_capacity(2 * work.len());
                for (c, pat, op) in work.drain(..) {
                    let rotated = axis.mul_unchecked(&op).times_i_pow(1);
                    let sign = rotated.hermitian_sign().expect("i P T is Hermitian for anticommuting P, T");
                    next.push((c, pat | (COS << (2 * j)), op));
                    next.push((c * sign, pat | (SIN << (2 * j)), rotated.word()));
                }
                work = next;
            }
            for (c, pat, op) in work.drain(..) {
                if op.is_diagonal() {
                    map.entry(op.z().clone()).or_default().push((c, pat));
                }
            }
        }
        Ok(Self {
            n,
            k,
            objective,
            frobenius: h.frobenius_weight(),
            groups: map.into_iter().map(|(z, branches)| Group { z, branches }).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    /// Number of stored diagonal branches.
    pub fn branch_count(&self) -> usize {
        self.groups.iter().map(|g| g.branches.len()).sum()
    }

    /// True when no angle enters the cost.
    pub fn is_constant(&self) -> bool {
        self.groups.iter().all(|g| g.branches.iter().all(|&(_, p)| p == PASS))
    }

    fn trig(theta: &[f64]) -> Vec<(f64, f64)> {
        theta.iter().map(|t| (t.cos(), t.sin())).collect()
    }

    #[inline]
    fn branch_value(c: f64, pat: u64, trig: &[(f64, f64)]) -> f64 {
        let mut v = c;
        let mut p = pat;
        let mut j = 0;
        while p != 0 {
            match p & 3 {
                COS => v *= trig[j].0,
                SIN => v *= trig[j].1,
                _ => {}
            }
            p >>= 2;
            j += 1;
        }
        v
    }

    fn polys(&self, trig: &[(f64, f64)]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| {
                let mut s = 0.0;
                for &(c, pat) in &g.branches {
                    s += Self::branch_value(c, pat, trig);
                }
                s
            })
            .collect()
    }

    /// Per-group polynomial values and their angle derivatives
    /// (`dpoly[group * k + j]`).
    fn polys_and_grads(&self, trig: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let mut vals = Vec::with_capacity(self.groups.len());
        let mut grads = vec![0.0; self.groups.len() * k];
        for (gi, g) in self.groups.iter().enumerate() {
            let mut s = 0.0;
            for &(c, pat) in &g.branches {
                s += Self::branch_value(c, pat, trig);
                for j in 0..k {
                    let f = (pat >> (2 * j)) & 3;
                    if f == PASS {
                        continue;
                    }
                    let mut d = c;
                    for l in 0..k {
                        let fl = (pat >> (2 * l)) & 3;
                        let (cl, sl) = trig[l];
                        d *= match (l == j, fl) {
                            (true, COS) => -sl,
                            (true, _) => cl,
                            (false, COS) => cl,
                            (false, SIN) => sl,
                            _ => 1.0,
                        };
                    }
                    grads[gi * k + j] += d;
                }
            }
            vals.push(s);
        }
        (vals, grads)
    }

    fn diagonal_vector(&self, polys: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; 1usize << self.n];
        for (g, p) in self.groups.iter().zip(polys) {
            v[g.z.to_u64() as usize] = *p;
        }
        v
    }

    /// Basis-state energies `E_x = <x| diag |x>` at the given angles.
    pub fn basis_energies(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if self.n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge { n: self.n, limit: ENUMERATION_LIMIT });
        }
        let polys = self.polys(&Self::trig(theta));
        let mut e = self.diagonal_vector(&polys);
        fwht(&mut e);
        Ok(e)
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        debug_assert_eq!(theta.len(), self.k);
        let polys = self.polys(&Self::trig(theta));
        let v = match self.objective {
            Objective::GroundEnergy => {
                let mut s = 0.0;
                for p in &polys {
                    s += p;
                }
                s
            }
            Objective::OffdiagWeight => {
                let mut s = 0.0;
                for p in &polys {
                    s += p * p;
                }
                self.frobenius - s
            }
            Objective::FreeEnergy { beta } => {
                let mut e = self.diagonal_vector(&polys);
                fwht(&mut e);
                closed_form_free_energy(&e, beta)?.0
            }
        };
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite cost at theta = {theta:?}")));
        }
        Ok(v)
    }

    pub fn value_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let k = self.k;
        let trig = Self::trig(theta);
        let (polys, dp) = self.polys_and_grads(&trig);
        let mut grad = vec![0.0; k];
        let v = match self.objective {
            Objective::GroundEnergy => {
                for gi in 0..polys.len() {
                    for j in 0..k {
                        grad[j] += dp[gi * k + j];
                    }
                }
                let mut s = 0.0;
                for p in &polys {
                    s += p;
                }
                s
            }
            Objective::OffdiagWeight => {
                let mut s = 0.0;
                for (gi, p) in polys.iter().enumerate() {
                    s += p * p;
                    for j in 0..k {
                        grad[j] -= 2.0 * p * dp[gi * k + j];
                    }
                }
                self.frobenius - s
            }
            Objective::FreeEnergy { beta } => {
                let mut e = self.diagonal_vector(&polys);
                fwht(&mut e);
                let (f, mut p) = closed_form_free_energy(&e, beta)?;
                // dF/dtheta = sum_x p_x dE_x/dtheta = sum_z dpoly_z phat_z.
                fwht(&mut p);
                for (gi, g) in self.groups.iter().enumerate() {
                    let w = p[g.z.to_u64() as usize];
                    for j in 0..k {
                        grad[j] += dp[gi * k + j] * w;
                    }
                }
                f
            }
        };
        if !v.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical(format!("non-finite cost at theta = {theta:?}")));
        }
        Ok((v, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::heisenberg;
    use crate::pauli::Pauli;

    #[test]
    fn matches_full_transform() {
        let h = PauliSum::from_words(&[(0.8, "XZI"), (-0.5, "YYZ"), (0.3, "ZIX"), (1.1, "IXX"), (0.2, "ZZZ")]).unwrap();
        let axes: Vec<_> = [0, 2].iter().map(|&q| PauliString::single(3, q, Pauli::Z).unwrap()).collect();
        let land = ThetaLandscape::new(&h, &axes, Objective::GroundEnergy).unwrap();
        let theta = [0.4, -1.3];
        let c = Circuit::new(
            3,
            vec![Gate::Rz { site: 0, theta: theta[0] }, Gate::Rz { site: 2, theta: theta[1] }],
        )
        .unwrap();
        let direct = heisenberg::circuit_energy(&h, &c).unwrap();
        assert!((land.value(&theta).unwrap() - direct).abs() < 1e-14);
        let off = ThetaLandscape::new(&h, &axes, Objective::OffdiagWeight).unwrap();
        let t = heisenberg::transform_circuit(&h, &c).unwrap();
        assert!((off.value(&theta).unwrap() - t.offdiag_weight().unwrap()).abs() < 1e-13);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = PauliSum::from_words(&[(0.8, "XZ"), (-0.5, "YY"), (0.3, "ZX"), (0.7, "XI"), (0.2, "ZZ")]).unwrap();
        let axes: Vec<_> = [0, 1].iter().map(|&q| PauliString::single(2, q, Pauli::Z).unwrap()).collect();
        for obj in [Objective::GroundEnergy, Objective::OffdiagWeight, Objective::FreeEnergy { beta: 2.5 }] {
            let land = ThetaLandscape::new(&h, &axes, obj).unwrap();
            let theta = [0.9, 2.1];
            let (_, g) = land.value_grad(&theta).unwrap();
            for j in 0..2 {
                let mut tp = theta;
                let mut tm = theta;
                tp[j] += 1e-5;
                tm[j] -= 1e-5;
                let fd = (land.value(&tp).unwrap() - land.value(&tm).unwrap()) / 2e-5;
                assert!((fd - g[j]).abs() < 1e-7 * (1.0 + g[j].abs()), "{obj:?} {j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn zero_angle_axis_is_neutral() {
        let h = PauliSum::from_words(&[(0.8, "XZ"), (-0.5, "YY"), (0.3, "ZX")]).unwrap();
        let a0 = PauliString::single(2, 0, Pauli::Z).unwrap();
        let a1 = PauliString::single(2, 1, Pauli::Z).unwrap();
        for obj in [Objective::GroundEnergy, Objective::FreeEnergy { beta: 3.0 }] {
            let one = ThetaLandscape::new(&h, &[a0.clone()], obj).unwrap();
            let two = ThetaLandscape::new(&h, &[a0.clone(), a1.clone()], obj).unwrap();
            assert_eq!(one.value(&[0.77]).unwrap(), two.value(&[0.77, 0.0]).unwrap());
        }
    }
}
