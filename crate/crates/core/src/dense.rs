//! Brute-force dense linear algebra used as ground truth at small n.
//!
//! Computational basis index `b` encodes qubit `q` in bit `q` of `b`.

use crate::circuit::{Circuit, Gate};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{i_pow, PauliString, PauliSum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub type CMatrix = DMatrix<Complex64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Size caps for dense routines.
pub const OPERATOR_LIMIT: usize = 12;
pub const CIRCUIT_LIMIT: usize = 10;
pub const GIBBS_LIMIT: usize = 10;

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooLarge { n, limit })
    } else {
        Ok(())
    }
}

/// A dense `2^n x 2^n` operator.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub n: usize,
    pub matrix: CMatrix,
    pub hermitian: bool,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entry of `M - M^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// Eigenvalues ascending with matching eigenvector columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        if !self.hermitian {
            return Err(Error::NotHermitian("eigh requires a Hermitian operator".into()));
        }
        Ok(eigh(&self.matrix))
    }
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian eigendecomposition, eigenvalues sorted ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `P v` for a Pauli string.
pub fn apply_pauli(p: &PauliString, v: &[Complex64]) -> Vec<Complex64> {
    let x = p.x().to_u64() as usize;
    let z = p.z().to_u64() as usize;
    let ph = i_pow(p.phase());
    let mut out = vec![C0; v.len()];
    for (b, &a) in v.iter().enumerate() {
        let s = if (z & b).count_ones() & 1 == 1 { -ph } else { ph };
        out[b ^ x] = s * a;
    }
    out
}

/// `H v` without building the matrix.
pub fn apply_pauli_sum(h: &PauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![C0; v.len()];
    for t in h.terms() {
        let x = t.op.x().to_u64() as usize;
        let z = t.op.z().to_u64() as usize;
        let ph = i_pow(t.op.phase()) * t.coeff;
        for (b, &a) in v.iter().enumerate() {
            let s = if (z & b).count_ones() & 1 == 1 { -ph } else { ph };
            out[b ^ x] += s * a;
        }
    }
    out
}

pub fn pauli_to_dense(p: &PauliString) -> Result<CMatrix> {
    check_size(p.n(), OPERATOR_LIMIT)?;
    let dim = 1usize << p.n();
    let x = p.x().to_u64() as usize;
    let z = p.z().to_u64() as usize;
    let ph = i_pow(p.phase());
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let s = if (z & b).count_ones() & 1 == 1 { -ph } else { ph };
        m[(b ^ x, b)] = s;
    }
    Ok(m)
}

/// Exact dense matrix of a Pauli sum.
pub fn pauli_sum_to_dense(h: &PauliSum) -> Result<DenseOperator> {
    check_size(h.n(), OPERATOR_LIMIT)?;
    let dim = 1usize << h.n();
    let mut m = CMatrix::zeros(dim, dim);
    for t in h.terms() {
        let x = t.op.x().to_u64() as usize;
        let z = t.op.z().to_u64() as usize;
        let ph = i_pow(t.op.phase()) * t.coeff;
        for b in 0..dim {
            let s = if (z & b).count_ones() & 1 == 1 { -ph } else { ph };
            m[(b ^ x, b)] += s;
        }
    }
    let hermitian = hermiticity_defect(&m) <= 1e-12;
    Ok(DenseOperator {
        n: h.n(),
        matrix: m,
        hermitian,
    })
}

/// `exp(i angle P) v` for a Hermitian Pauli `P`.
pub fn apply_pauli_rotation(v: &mut [Complex64], axis: &PauliString, angle: f64) {
    let pv = apply_pauli(axis, v);
    let (c, s) = if angle == std::f64::consts::FRAC_PI_4 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else {
        (angle.cos(), angle.sin())
    };
    let is = Complex64::new(0.0, s);
    for (a, b) in v.iter_mut().zip(pv) {
        *a = *a * c + is * b;
    }
}

/// `Rz(theta) = exp(-i theta Z / 2)` on qubit `q`.
pub fn apply_rz(v: &mut [Complex64], q: usize, theta: f64) {
    let lo = Complex64::from_polar(1.0, -theta / 2.0);
    let hi = Complex64::from_polar(1.0, theta / 2.0);
    for (b, a) in v.iter_mut().enumerate() {
        *a *= if (b >> q) & 1 == 1 { hi } else { lo };
    }
}

pub fn apply_gate(v: &mut [Complex64], n: usize, g: &Gate) -> Result<()> {
    match g {
        Gate::Clifford(cg) => {
            if !cg.is_identity() {
                let axis = cg.axis(n)?;
                apply_pauli_rotation(v, &axis, std::f64::consts::FRAC_PI_4);
            }
        }
        Gate::Rz { site, theta } => {
            if *site >= n {
                return Err(Error::OutOfRange { index: *site, n });
            }
            apply_rz(v, *site, *theta)
        }
    }
    Ok(())
}

/// `U v` for a circuit `U` given in application order.
pub fn simulate(c: &Circuit, v: &[Complex64]) -> Result<Vec<Complex64>> {
    check_dim(1usize << c.n, v.len())?;
    let mut out = v.to_vec();
    for g in &c.gates {
        apply_gate(&mut out, c.n, g)?;
    }
    Ok(out)
}

pub fn zero_state(n: usize) -> Vec<Complex64> {
    let mut v = vec![C0; 1usize << n];
    v[0] = C1;
    v
}

/// Dense unitary of a circuit (n <= 10).
pub fn circuit_to_dense(c: &Circuit) -> Result<DenseOperator> {
    check_size(c.n, CIRCUIT_LIMIT)?;
    let dim = 1usize << c.n;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![C0; dim];
        e[col] = C1;
        let u = simulate(c, &e)?;
        for (row, a) in u.into_iter().enumerate() {
            m[(row, col)] = a;
        }
    }
    Ok(DenseOperator {
        n: c.n,
        matrix: m,
        hermitian: false,
    })
}

/// `<v| H |v>`; the imaginary part is returned for consistency checks.
pub fn expectation(v: &[Complex64], h: &PauliSum) -> Complex64 {
    let hv = apply_pauli_sum(h, v);
    v.iter().zip(hv).map(|(a, b)| a.conj() * b).sum()
}

pub fn outer(v: &[Complex64]) -> CMatrix {
    let col = DVector::from_column_slice(v);
    &col * col.adjoint()
}

/// Lowest eigenpair.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: Vec<Complex64>,
}

/// Ground energy and state: full diagonalization for n <= 10, Lanczos for
/// n in 11..=12.
pub fn exact_ground(h: &PauliSum) -> Result<GroundState> {
    check_size(h.n(), OPERATOR_LIMIT)?;
    let gs = if h.n() <= GIBBS_LIMIT {
        let op = pauli_sum_to_dense(h)?;
        let (vals, vecs) = op.eigh()?;
        GroundState {
            energy: vals[0],
            state: vecs.column(0).iter().copied().collect(),
        }
    } else {
        lanczos_ground(h, 200)?
    };
    let r = residual(h, &gs);
    if r > 1e-8 {
        return Err(Error::Numerical(format!("ground-state residual {r:e} above 1e-8")));
    }
    Ok(gs)
}

fn residual(h: &PauliSum, gs: &GroundState) -> f64 {
    let hv = apply_pauli_sum(h, &gs.state);
    hv.iter()
        .zip(&gs.state)
        .map(|(a, b)| (a - b * gs.energy).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Matrix-free Lanczos with full reorthogonalization, restarted from the Ritz
/// vector until the residual is below 1e-10.
pub fn lanczos_ground(h: &PauliSum, krylov: usize) -> Result<GroundState> {
    let dim = 1usize << h.n();
    let m = krylov.min(dim).max(1);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::new(((k as f64) * 0.754_877_666).sin() + 0.5, ((k as f64) * 0.569_840_29).cos()))
        .collect();
    normalize(&mut start);
    let mut best = None;
    for _ in 0..50 {
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = apply_pauli_sum(h, &basis[j]);
            let a: f64 = basis[j].iter().zip(&w).map(|(v, w)| (v.conj() * w).re).sum();
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let proj: Complex64 = v.iter().zip(&w).map(|(v, w)| v.conj() * w).sum();
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= proj * vi;
                    }
                }
            }
            let b = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if j + 1 == m || b < 1e-13 {
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|a| *a /= b);
            basis.push(w);
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let (imin, &emin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty Krylov space");
        let mut ritz = vec![C0; dim];
        for (i, v) in basis.iter().enumerate().take(k) {
            let c = eig.eigenvectors[(i, imin)];
            for (r, a) in ritz.iter_mut().zip(v) {
                *r += a * c;
            }
        }
        normalize(&mut ritz);
        let gs = GroundState {
            energy: emin,
            state: ritz.clone(),
        };
        let r = residual(h, &gs);
        best = Some(gs);
        if r < 1e-10 {
            break;
        }
        start = ritz;
    }
    Ok(best.expect("at least one Lanczos pass"))
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= n);
}

/// Exact grand-canonical Gibbs state of `H - mu N`.
#[derive(Clone, Debug)]
pub struct GibbsState {
    pub free_energy: f64,
    pub rho: CMatrix,
    /// Spectrum of `H - mu N`, ascending.
    pub spectrum: Vec<f64>,
}

/// Gibbs state `exp(-beta G) / Tr exp(-beta G)` for `beta >= 0`, with the
/// ascending spectrum of `G` and `log Tr exp(-beta (G - min G))`.
pub fn gibbs_matrix(g: &PauliSum, beta: f64) -> Result<(CMatrix, Vec<f64>, f64)> {
    check_size(g.n(), GIBBS_LIMIT)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Invalid(format!("beta must be non-negative, got {beta}")));
    }
    let op = pauli_sum_to_dense(g)?;
    let (vals, vecs) = op.eigh()?;
    let emin = vals[0];
    let weights: Vec<f64> = vals.iter().map(|e| (-beta * (e - emin)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = vecs.clone();
    for (j, w) in weights.iter().enumerate() {
        let p = w / z;
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= p;
        }
    }
    Ok((scaled * vecs.adjoint(), vals, z.ln()))
}

/// `F0 = -(1/beta) log Tr exp(-beta (H - mu N))` and the Gibbs state (n <= 10).
pub fn exact_grand_free_energy(h: &PauliSum, number_op: &PauliSum, beta: f64, mu: f64) -> Result<GibbsState> {
    check_size(h.n(), GIBBS_LIMIT)?;
    check_dim(h.n(), number_op.n())?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
    }
    let g = h.add_scaled(number_op, -mu)?;
    let (rho, spectrum, log_z) = gibbs_matrix(&g, beta)?;
    Ok(GibbsState {
        free_energy: spectrum[0] - log_z / beta,
        rho,
        spectrum,
    })
}

/// `-Tr rho ln rho`.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    let (vals, _) = eigh(rho);
    vals.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `exp(-i H t)` for a Hermitian matrix.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let mut scaled = vecs.clone();
    for (j, e) in vals.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -e * t);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::CliffordGate;

    #[test]
    fn z_and_xx_matrices() {
        let z = pauli_sum_to_dense(&PauliSum::from_words(&[(1.0, "Z")]).unwrap()).unwrap();
        assert_eq!(z.matrix[(0, 0)], C1);
        assert_eq!(z.matrix[(1, 1)], -C1);
        assert!(z.hermitian);
        let xx = pauli_sum_to_dense(&PauliSum::from_words(&[(1.0, "XX")]).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { C1 } else { C0 };
                assert_eq!(xx.matrix[(i, j)], expect);
            }
        }
    }

    #[test]
    fn y_matrix_convention() {
        let y = pauli_to_dense(&PauliString::from_word("Y").unwrap()).unwrap();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn circuit_matrices() {
        let id = circuit_to_dense(&Circuit::identity(3)).unwrap();
        assert!((id.matrix.clone() - CMatrix::identity(8, 8)).norm() < 1e-15);

        let rz = Circuit::new(1, vec![Gate::Rz { site: 0, theta: std::f64::consts::FRAC_PI_4 }]).unwrap();
        let u = circuit_to_dense(&rz).unwrap().matrix;
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -std::f64::consts::PI / 8.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, std::f64::consts::PI / 8.0)).norm() < 1e-15);

        let c = Circuit::new(
            3,
            vec![
                Gate::Clifford(CliffordGate::from_label(0, 1, "XY").unwrap()),
                Gate::Rz { site: 2, theta: 0.7 },
                Gate::Clifford(CliffordGate::from_label(2, 0, "ZX").unwrap()),
            ],
        )
        .unwrap();
        let u = circuit_to_dense(&c).unwrap().matrix;
        let err = (u.adjoint() * &u - CMatrix::identity(8, 8)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn ground_energies() {
        let h = PauliSum::from_words(&[(-1.0, "ZII"), (-1.0, "IZI"), (-1.0, "IIZ")]).unwrap();
        let gs = exact_ground(&h).unwrap();
        assert!((gs.energy + 3.0).abs() < 1e-12);
        assert!((gs.state[0].norm() - 1.0).abs() < 1e-10);
        let h = PauliSum::from_words(&[(-1.0, "X")]).unwrap();
        assert!((exact_ground(&h).unwrap().energy + 1.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_full_diagonalization() {
        let h = PauliSum::from_words(&[
            (0.7, "XYZ"),
            (-0.3, "ZZI"),
            (0.45, "IXX"),
            (-1.1, "YIY"),
            (0.2, "ZII"),
            (0.9, "XXI"),
        ])
        .unwrap();
        let full = exact_ground(&h).unwrap();
        let lz = lanczos_ground(&h, 8).unwrap();
        assert!((full.energy - lz.energy).abs() < 1e-9);
    }

    #[test]
    fn free_energy_of_diagonal_operator() {
        let h = PauliSum::from_words(&[(0.5, "ZI"), (-0.25, "IZ"), (0.1, "ZZ")]).unwrap();
        let n = PauliSum::zero(2);
        let beta = 1.7;
        let g = exact_grand_free_energy(&h, &n, beta, 0.0).unwrap();
        let z: f64 = (0..4u64)
            .map(|x| (-beta * h.basis_expectation(&crate::bits::Bits::from_u64(2, x))).exp())
            .sum();
        assert!((g.free_energy + z.ln() / beta).abs() < 1e-12);
        let tr: Complex64 = (0..4).map(|i| g.rho[(i, i)]).sum();
        assert!((tr.re - 1.0).abs() < 1e-12);
    }
}
