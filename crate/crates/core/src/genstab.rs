//! Generalized stabilizer states `rho = sum_ij chi_ij d_i rho_S d_j` over the
//! stabilizer basis of a full tableau, evolved by Clifford gates (frame update
//! only) and Pauli channels (chi update).
//!
//! With `P = alpha d_b s_c` from [`FullTableau::decompose_pauli`],
//! `P d_i |psi_S> = alpha (-1)^{c.i} d_{i^b} |psi_S>`, which drives both the
//! channel update and expectation values.

use crate::bits::Bits;
use crate::circuit::{Circuit, Gate};
use crate::dense::{self, CMatrix};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::tableau::{BasisIndex, CliffordGate, Decomposition, FullTableau};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Entries with smaller magnitude are dropped after every update.
pub const PRUNE_TOL: f64 = 1e-14;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// `rho -> sum_mn phi_mn P_m rho P_n^dag`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    n: usize,
    terms: Vec<(PauliString, PauliString, Complex64)>,
}

impl PauliChannel {
    pub fn new(n: usize, terms: Vec<(PauliString, PauliString, Complex64)>) -> Result<Self> {
        for (m, k, _) in &terms {
            check_dim(n, m.n())?;
            check_dim(n, k.n())?;
        }
        Ok(Self { n, terms })
    }

    pub fn identity(n: usize) -> Self {
        let id = PauliString::identity(n);
        Self {
            n,
            terms: vec![(id.clone(), id, C1)],
        }
    }

    /// Channel of a set of Kraus operators, each given as a Pauli expansion
    /// `K = sum_m kappa_m P_m`; `phi_mn = sum_K kappa_m conj(kappa_n)`.
    pub fn from_kraus(n: usize, kraus: &[Vec<(Complex64, PauliString)>]) -> Result<Self> {
        let mut acc: BTreeMap<(Bits, Bits, Bits, Bits), (PauliString, PauliString, Complex64)> = BTreeMap::new();
        for k in kraus {
            for (km, pm) in k {
                check_dim(n, pm.n())?;
                for (kn, pn) in k {
                    let key = (pm.x().clone(), pm.z().clone(), pn.x().clone(), pn.z().clone());
                    // Fold the string phases into phi so both operators are words.
                    let w = km * pm.sign_complex() * (kn * pn.sign_complex()).conj();
                    acc.entry(key)
                        .or_insert_with(|| (pm.word(), pn.word(), C0))
                        .2 += w;
                }
            }
        }
        let terms = acc.into_values().filter(|t| t.2.norm() > PRUNE_TOL).collect();
        Ok(Self { n, terms })
    }

    /// `Rz(theta) = exp(-i theta Z_q / 2)` as a channel over `{I, Z_q}`:
    /// `phi_II = cos^2(theta/2)`, `phi_ZZ = sin^2(theta/2)`,
    /// `phi_IZ = (i/2) sin(theta)`, `phi_ZI = -(i/2) sin(theta)`.
    pub fn rz(n: usize, q: usize, theta: f64) -> Result<Self> {
        let z = PauliString::single(n, q, Pauli::Z)?;
        let (s, c) = (theta / 2.0).sin_cos();
        Self::from_kraus(n, &[vec![(Complex64::new(c, 0.0), PauliString::identity(n)), (Complex64::new(0.0, -s), z)]])
    }

    /// The T gate `diag(1, e^{i pi/4})` on qubit `q`. Up to a global phase
    /// `T = cos(pi/8) I - i sin(pi/8) Z`.
    pub fn t_gate(n: usize, q: usize) -> Result<Self> {
        let z = PauliString::single(n, q, Pauli::Z)?;
        let (s, c) = (std::f64::consts::PI / 8.0).sin_cos();
        Self::from_kraus(n, &[vec![(Complex64::new(c, 0.0), PauliString::identity(n)), (Complex64::new(0.0, -s), z)]])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(PauliString, PauliString, Complex64)] {
        &self.terms
    }

    /// Number of nonzero `phi_mn`.
    pub fn lambda(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &PauliString, k: &PauliString) -> Complex64 {
        self.terms
            .iter()
            .filter(|(a, b, _)| a.x() == m.x() && a.z() == m.z() && b.x() == k.x() && b.z() == k.z())
            .map(|(_, _, c)| c * m.sign_complex().conj() * k.sign_complex())
            .sum()
    }

    /// Largest `|phi_mn - conj(phi_nm)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (m, k, c) in &self.terms {
            let mirror = self.coefficient(k, m);
            worst = worst.max((c - mirror.conj()).norm());
        }
        worst
    }

    /// Largest deviation of `sum_mn phi_mn P_n^dag P_m` from the identity.
    pub fn trace_defect(&self) -> f64 {
        let mut acc: BTreeMap<(Bits, Bits), Complex64> = BTreeMap::new();
        for (m, k, c) in &self.terms {
            let p = k.inverse().mul_unchecked(m);
            *acc.entry((p.x().clone(), p.z().clone())).or_insert(C0) += c * p.sign_complex();
        }
        let zero = Bits::zeros(self.n);
        let mut worst = 0.0f64;
        let mut saw_identity = false;
        for ((x, z), v) in acc {
            if x == zero && z == zero {
                saw_identity = true;
                worst = worst.max((v - C1).norm());
            } else {
                worst = worst.max(v.norm());
            }
        }
        if !saw_identity {
            worst = worst.max(1.0);
        }
        worst
    }

    /// Dense action `sum phi_mn P_m rho P_n^dag`.
    pub fn apply_dense(&self, rho: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (m, k, c) in &self.terms {
            let pm = dense::pauli_to_dense(m)?;
            let pk = dense::pauli_to_dense(k)?;
            out += (pm * rho * pk.adjoint()) * *c;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// `|psi> = sum_i a_i d_i |psi_S>`, so `chi_ij = a_i conj(a_j)`.
    Pure(BTreeMap<Bits, Complex64>),
    Mixed(BTreeMap<(Bits, Bits), Complex64>),
}

/// A tableau frame plus a sparse chi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GenStabState {
    frame: FullTableau,
    repr: Repr,
}

impl GenStabState {
    /// `chi_bb = 1`, stored as a pure amplitude vector.
    pub fn from_basis_state(frame: FullTableau, b: &BasisIndex) -> Result<Self> {
        check_dim(frame.n(), b.len())?;
        let mut amp = BTreeMap::new();
        amp.insert(b.bits().clone(), C1);
        Ok(Self {
            frame,
            repr: Repr::Pure(amp),
        })
    }

    /// Computational `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::from_basis_state(FullTableau::computational(n)?, &BasisIndex::zero(n))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.frame.n()
    }

    pub fn frame(&self) -> &FullTableau {
        &self.frame
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    /// Full chi map (expanded from amplitudes when pure).
    pub fn chi(&self) -> BTreeMap<(Bits, Bits), Complex64> {
        match &self.repr {
            Repr::Mixed(m) => m.clone(),
            Repr::Pure(a) => {
                let mut out = BTreeMap::new();
                for (i, ai) in a {
                    for (j, aj) in a {
                        out.insert((i.clone(), j.clone()), ai * aj.conj());
                    }
                }
                out
            }
        }
    }

    /// `Lambda(chi)`, the number of stored nonzero chi entries.
    pub fn lambda(&self) -> usize {
        match &self.repr {
            Repr::Pure(a) => a.len() * a.len(),
            Repr::Mixed(m) => m.len(),
        }
    }

    /// Switches to the explicit chi-matrix representation.
    pub fn into_mixed(self) -> Self {
        let chi = self.chi();
        Self {
            frame: self.frame,
            repr: Repr::Mixed(chi),
        }
    }

    pub fn trace(&self) -> Complex64 {
        match &self.repr {
            Repr::Pure(a) => Complex64::new(a.values().map(|v| v.norm_sqr()).sum(), 0.0),
            Repr::Mixed(m) => m.iter().filter(|((i, j), _)| i == j).map(|(_, v)| *v).sum(),
        }
    }

    /// `Tr rho^2 = sum_ij |chi_ij|^2` for a Hermitian chi.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(a) => {
                let t: f64 = a.values().map(|v| v.norm_sqr()).sum();
                t * t
            }
            Repr::Mixed(m) => m
                .iter()
                .map(|((i, j), v)| {
                    let mirror = m.get(&(j.clone(), i.clone())).copied().unwrap_or(C0);
                    (v * mirror).re
                })
                .sum(),
        }
    }

    /// Largest `|chi_ij - conj(chi_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0,
            Repr::Mixed(m) => m
                .iter()
                .map(|((i, j), v)| {
                    let mirror = m.get(&(j.clone(), i.clone())).copied().unwrap_or(C0);
                    (v - mirror.conj()).norm()
                })
                .fold(0.0, f64::max),
        }
    }

    /// Frame update only; chi is unchanged.
    pub fn evolve_clifford(&mut self, g: &CliffordGate) -> Result<()> {
        self.frame.apply_clifford_mut(g)
    }

    fn decompose_all(&self, ops: &[&PauliString]) -> Result<Vec<Decomposition>> {
        ops.iter().map(|p| self.frame.decompose_pauli(p)).collect()
    }

    /// General chi update. The state is converted to the explicit chi
    /// representation.
    pub fn evolve_pauli_channel(&mut self, ch: &PauliChannel) -> Result<()> {
        check_dim(self.n(), ch.n())?;
        let chi = match &self.repr {
            Repr::Mixed(m) => m.clone(),
            Repr::Pure(_) => self.chi(),
        };
        let mut dec_cache: BTreeMap<(Bits, Bits, u8), (Complex64, Bits, Bits)> = BTreeMap::new();
        let mut decompose = |p: &PauliString, frame: &FullTableau| -> Result<(Complex64, Bits, Bits)> {
            let key = (p.x().clone(), p.z().clone(), p.phase());
            if let Some(v) = dec_cache.get(&key) {
                return Ok(v.clone());
            }
            let d = frame.decompose_pauli(p)?;
            let v = (d.alpha_complex(), d.b, d.c);
            dec_cache.insert(key, v.clone());
            Ok(v)
        };
        let mut out: BTreeMap<(Bits, Bits), Complex64> = BTreeMap::new();
        for (pm, pk, phi) in ch.terms() {
            let (am, bm, cm) = decompose(pm, &self.frame)?;
            let (ak, bk, ck) = decompose(pk, &self.frame)?;
            let w = phi * am * ak.conj();
            for ((i, j), v) in &chi {
                let sign = cm.dot(i) ^ ck.dot(j);
                let val = if sign { -w * v } else { w * v };
                *out.entry((i.xor(&bm), j.xor(&bk))).or_insert(C0) += val;
            }
        }
        out.retain(|_, v| v.norm() >= PRUNE_TOL);
        self.repr = Repr::Mixed(out);
        let tr = self.trace();
        if (tr - C1).norm() > 1e-10 && ch.trace_defect() <= 1e-10 {
            return Err(Error::Numerical(format!("trace drifted to {tr} after a trace-preserving channel")));
        }
        Ok(())
    }

    /// Applies the unitary `K = sum_m kappa_m P_m`. Pure states stay pure.
    pub fn apply_unitary(&mut self, kraus: &[(Complex64, PauliString)]) -> Result<()> {
        match &self.repr {
            Repr::Mixed(_) => {
                let ch = PauliChannel::from_kraus(self.n(), &[kraus.to_vec()])?;
                self.evolve_pauli_channel(&ch)
            }
            Repr::Pure(a) => {
                let ops: Vec<&PauliString> = kraus.iter().map(|(_, p)| p).collect();
                let decs = self.decompose_all(&ops)?;
                let mut out: BTreeMap<Bits, Complex64> = BTreeMap::new();
                for ((k, _), d) in kraus.iter().zip(&decs) {
                    let w = k * d.alpha_complex();
                    for (i, v) in a {
                        let val = if d.c.dot(i) { -w * v } else { w * v };
                        *out.entry(i.xor(&d.b)).or_insert(C0) += val;
                    }
                }
                out.retain(|_, v| v.norm() >= PRUNE_TOL);
                self.repr = Repr::Pure(out);
                Ok(())
            }
        }
    }

    /// `Rz(theta) = cos(theta/2) I - i sin(theta/2) Z_q`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) -> Result<()> {
        let n = self.n();
        let z = PauliString::single(n, q, Pauli::Z)?;
        let (s, c) = (theta / 2.0).sin_cos();
        self.apply_unitary(&[(Complex64::new(c, 0.0), PauliString::identity(n)), (Complex64::new(0.0, -s), z)])
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        match g {
            Gate::Clifford(cg) => self.evolve_clifford(cg),
            Gate::Rz { site, theta } => self.apply_rz(*site, *theta),
        }
    }

    /// `U |0...0>` for a circuit.
    pub fn run(c: &Circuit) -> Result<Self> {
        c.validate()?;
        let mut s = Self::zero(c.n)?;
        for g in &c.gates {
            s.apply_gate(g)?;
        }
        Ok(s)
    }

    /// `Tr(rho P)` for a Pauli string with any phase.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        let d = self.frame.decompose_pauli(p)?;
        let alpha = d.alpha_complex();
        let mut acc = C0;
        match &self.repr {
            Repr::Pure(a) => {
                for (i, v) in a {
                    if let Some(w) = a.get(&i.xor(&d.b)) {
                        let t = w.conj() * v * alpha;
                        acc += if d.c.dot(i) { -t } else { t };
                    }
                }
            }
            Repr::Mixed(m) => {
                for ((i, j), v) in m {
                    if *j == i.xor(&d.b) {
                        let t = v * alpha;
                        acc += if d.c.dot(i) { -t } else { t };
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `Tr(rho H)`. An imaginary residue above 1e-9 is reported as an error.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        check_dim(self.n(), h.n())?;
        let mut acc = C0;
        for t in h.terms() {
            acc += self.pauli_expectation(&t.op)? * t.coeff;
        }
        if acc.im.abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "expectation has imaginary residue {:e}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    /// Dense `sum chi_ij d_i rho_S d_j` (n <= 10).
    pub fn to_dense(&self) -> Result<CMatrix> {
        let n = self.n();
        if n > dense::CIRCUIT_LIMIT {
            return Err(Error::TooLarge { n, limit: dense::CIRCUIT_LIMIT });
        }
        let dim = 1usize << n;
        let mut vecs: BTreeMap<Bits, Vec<Complex64>> = BTreeMap::new();
        let mut basis_vec = |b: &Bits| -> Result<Vec<Complex64>> {
            if let Some(v) = vecs.get(b) {
                return Ok(v.clone());
            }
            let v = self.frame.state_dense(&BasisIndex(b.clone()))?;
            vecs.insert(b.clone(), v.clone());
            Ok(v)
        };
        let mut rho = CMatrix::zeros(dim, dim);
        for ((i, j), c) in self.chi() {
            let vi = basis_vec(&i)?;
            let vj = basis_vec(&j)?;
            for r in 0..dim {
                if vi[r] == C0 {
                    continue;
                }
                let a = vi[r] * c;
                for s in 0..dim {
                    rho[(r, s)] += a * vj[s].conj();
                }
            }
        }
        Ok(rho)
    }

    /// Dense state vector for pure states (n <= 10), defined up to the
    /// global phase of `|psi_S>`.
    pub fn to_dense_vector(&self) -> Result<Vec<Complex64>> {
        let n = self.n();
        if n > dense::CIRCUIT_LIMIT {
            return Err(Error::TooLarge { n, limit: dense::CIRCUIT_LIMIT });
        }
        let Repr::Pure(a) = &self.repr else {
            return Err(Error::Invalid("state is stored as a chi matrix".into()));
        };
        let mut out = vec![C0; 1usize << n];
        for (b, v) in a {
            let bv = self.frame.state_dense(&BasisIndex(b.clone()))?;
            for (o, x) in out.iter_mut().zip(bv) {
                *o += v * x;
            }
        }
        Ok(out)
    }
}
