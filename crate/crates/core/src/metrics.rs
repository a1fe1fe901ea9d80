//! Quantumness diagnostics: stabilizer Renyi entropy (magic), entanglement
//! negativity and the off-diagonal mass of Gibbs states.

use crate::dense::{self, CMatrix};
use crate::error::{check_dim, Error, Result};
use crate::genstab::GenStabState;
use crate::pauli::PauliSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const MAGIC_LIMIT: usize = 8;
pub const HIST_BINS: usize = 64;
/// Histogram range in log10 |rho_ij|.
pub const HIST_LOG_MIN: f64 = -16.0;
pub const HIST_LOG_MAX: f64 = 0.0;

fn qubits_of(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::Invalid(format!("dimension {dim} is not 2^n with n >= 1")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn fwht_complex(v: &mut [Complex64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let a = v[j];
                let b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `Xi(P) = <psi|P|psi>^2 / 2^n` over all `4^n` Pauli words, indexed by
/// `x * 2^n + z` for the word `X^x Z^z` (up to phase).
pub fn pauli_spectrum(psi: &[Complex64]) -> Result<Vec<f64>> {
    let n = qubits_of(psi.len())?;
    if n > MAGIC_LIMIT {
        return Err(Error::TooLarge { n, limit: MAGIC_LIMIT });
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("state norm^2 is {norm}, expected 1")));
    }
    let dim = psi.len();
    let mut xi = Vec::with_capacity(dim * dim);
    let mut u = vec![Complex64::new(0.0, 0.0); dim];
    for x in 0..dim {
        // <psi| X^x Z^z |psi> = sum_b conj(psi[b ^ x]) (-1)^{z.b} psi[b]
        for (b, ub) in u.iter_mut().enumerate() {
            *ub = psi[b ^ x].conj() * psi[b];
        }
        fwht_complex(&mut u);
        xi.extend(u.iter().map(|v| v.norm_sqr() / dim as f64));
    }
    Ok(xi)
}

/// `M = H_2(Xi) - n` in bits (n <= 8).
pub fn stabilizer_entropy(psi: &[Complex64]) -> Result<f64> {
    let n = qubits_of(psi.len())?;
    let xi = pauli_spectrum(psi)?;
    let total: f64 = xi.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical(format!("Pauli spectrum sums to {total}, expected 1")));
    }
    let h: f64 = xi.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum();
    Ok(h - n as f64)
}

/// Magic of a pure generalized stabilizer state.
pub fn stabilizer_entropy_state(s: &GenStabState) -> Result<f64> {
    stabilizer_entropy(&s.to_dense_vector()?)
}

/// Partial transpose on the qubits in `partition`.
pub fn partial_transpose(rho: &CMatrix, partition: &[usize]) -> Result<CMatrix> {
    let n = qubits_of(rho.nrows())?;
    check_dim(rho.nrows(), rho.ncols())?;
    let mut mask = 0usize;
    for &q in partition {
        if q >= n {
            return Err(Error::OutOfRange { index: q, n });
        }
        mask |= 1 << q;
    }
    let dim = rho.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let ii = (i & !mask) | (j & mask);
            let jj = (j & !mask) | (i & mask);
            out[(i, j)] = rho[(ii, jj)];
        }
    }
    Ok(out)
}

/// `(||rho^{T_A}||_1 - 1) / 2` (n <= 10).
pub fn negativity(rho: &CMatrix, partition: &[usize]) -> Result<f64> {
    let n = qubits_of(rho.nrows())?;
    if n > dense::GIBBS_LIMIT {
        return Err(Error::TooLarge { n, limit: dense::GIBBS_LIMIT });
    }
    let defect = dense::hermiticity_defect(rho);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(format!("density matrix deviates from Hermitian by {defect:e}")));
    }
    let pt = partial_transpose(rho, partition)?;
    let (vals, _) = dense::eigh(&pt);
    let trace_norm: f64 = vals.iter().map(|v| v.abs()).sum();
    let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    Ok((trace_norm - tr) / 2.0)
}

/// Negativity of each single-site bipartition and their mean.
pub fn site_averaged_negativity(rho: &CMatrix) -> Result<(Vec<f64>, f64)> {
    let n = qubits_of(rho.nrows())?;
    partition_averaged_negativity(rho, &(0..n).map(|q| vec![q]).collect::<Vec<_>>())
}

/// Negativity for an explicit list of partitions and their mean.
pub fn partition_averaged_negativity(rho: &CMatrix, partitions: &[Vec<usize>]) -> Result<(Vec<f64>, f64)> {
    let v = partitions
        .iter()
        .map(|a| negativity(rho, a))
        .collect::<Result<Vec<_>>>()?;
    let mean = if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    Ok((v, mean))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffdiagDensity {
    /// Counts over `HIST_BINS` equal bins of log10 |rho_ij| in
    /// `[HIST_LOG_MIN, HIST_LOG_MAX]`.
    pub counts: Vec<u64>,
    /// Entries below `10^HIST_LOG_MIN`, including exact zeros.
    pub underflow: u64,
    /// `sum_{i != j} |rho_ij|`.
    pub mass: f64,
}

/// Histogram and mass of the off-diagonal entries of a matrix.
pub fn offdiag_density(rho: &CMatrix) -> OffdiagDensity {
    let mut counts = vec![0u64; HIST_BINS];
    let mut underflow = 0;
    let mut mass = 0.0;
    let width = (HIST_LOG_MAX - HIST_LOG_MIN) / HIST_BINS as f64;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            if i == j {
                continue;
            }
            let a = rho[(i, j)].norm();
            mass += a;
            if a < 10f64.powf(HIST_LOG_MIN) {
                underflow += 1;
            } else {
                let b = ((a.log10() - HIST_LOG_MIN) / width).floor() as usize;
                counts[b.min(HIST_BINS - 1)] += 1;
            }
        }
    }
    OffdiagDensity { counts, underflow, mass }
}

/// Exact Gibbs state of `H_eff - mu N_eff` and its off-diagonal statistics
/// (n <= 10, `beta >= 0`).
pub fn gibbs_offdiag_density(h_eff: &PauliSum, beta: f64, mu: f64, number_op: &PauliSum) -> Result<OffdiagDensity> {
    Ok(offdiag_density(&gibbs_state(h_eff, beta, mu, number_op)?))
}

/// `exp(-beta (H - mu N)) / Z` (n <= 10, `beta >= 0`).
pub fn gibbs_state(h: &PauliSum, beta: f64, mu: f64, number_op: &PauliSum) -> Result<CMatrix> {
    check_dim(h.n(), number_op.n())?;
    let g = h.add_scaled(number_op, -mu)?;
    Ok(dense::gibbs_matrix(&g, beta)?.0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub magic_m: Option<f64>,
    pub negativity_per_site: Option<Vec<f64>>,
    pub negativity_mean: Option<f64>,
    pub offdiag: Option<OffdiagDensity>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn t_state_spectrum_and_magic() {
        let psi = [c(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, PI / 4.0)];
        let xi = pauli_spectrum(&psi).unwrap();
        // index x * 2 + z: I = 0, Z = 1, X = 2, Y = 3
        let expect = [0.5, 0.0, 0.25, 0.25];
        for (a, b) in xi.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((stabilizer_entropy(&psi).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_states_have_no_magic() {
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        assert!(stabilizer_entropy(&zero).unwrap().abs() < 1e-12);
        let bell = [c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)];
        assert!(stabilizer_entropy(&bell).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_negativity_is_half() {
        let bell = [c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)];
        let rho = dense::outer(&bell);
        assert!((negativity(&rho, &[0]).unwrap() - 0.5).abs() < 1e-12);
        let mixed = CMatrix::identity(4, 4) * c(0.25, 0.0);
        assert!(negativity(&mixed, &[0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let psi: Vec<Complex64> = (0..8).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<Complex64> = psi.iter().map(|a| a / norm).collect();
        let rho = dense::outer(&psi);
        let twice = partial_transpose(&partial_transpose(&rho, &[0, 2]).unwrap(), &[0, 2]).unwrap();
        assert_eq!(twice, rho);
    }

    #[test]
    fn offdiag_of_diagonal_and_infinite_temperature() {
        let h = PauliSum::from_words(&[(0.3, "ZZ"), (-0.5, "ZI")]).unwrap();
        let n = PauliSum::zero(2);
        assert_eq!(gibbs_offdiag_density(&h, 4.0, 0.0, &n).unwrap().mass, 0.0);
        let h = PauliSum::from_words(&[(0.3, "XZ"), (-0.5, "YY")]).unwrap();
        let d = gibbs_offdiag_density(&h, 0.0, 0.0, &n).unwrap();
        assert!(d.mass < 1e-15);
        assert_eq!(d.counts.len(), HIST_BINS);
    }
}
