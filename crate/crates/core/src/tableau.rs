//! Full stabilizer/destabilizer tableaux, two-qubit Pauli-rotation Clifford
//! gates, the stabilizer basis and Pauli decomposition against a tableau.
//!
//! Destabilizer generators are kept mutually commuting. Clifford conjugation
//! preserves every commutation relation, so starting from the computational
//! frame (`s_i = Z_i`, `d_i = X_i`) this holds for every reachable tableau and
//! products `d_b = prod_j d_j^{b_j}` are order-independent and Hermitian.

use crate::bits::Bits;
use crate::dense;
use crate::error::{check_dim, Error, Result};
use crate::pauli::{i_pow, Pauli, PauliString};
use num_complex::Complex64;
use std::fmt;

/// The rotation `exp(i pi P / 4)` with `P` a two-qubit Pauli word acting on
/// the ordered site pair `(a, b)`.
///
/// `code = 4 * p_a + p_b` with `I = 0, X = 1, Y = 2, Z = 3`; code 0 is the
/// identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CliffordGate {
    a: usize,
    b: usize,
    code: u8,
}

impl CliffordGate {
    pub fn new(a: usize, b: usize, code: u8) -> Result<Self> {
        if a == b {
            return Err(Error::Invalid(format!("gate sites must differ, got ({a}, {b})")));
        }
        if code >= 16 {
            return Err(Error::Invalid(format!("gate code {code} outside 0..16")));
        }
        Ok(Self { a, b, code })
    }

    /// From a two-letter label such as `"XY"`.
    pub fn from_label(a: usize, b: usize, label: &str) -> Result<Self> {
        let chars: Vec<char> = label.chars().collect();
        if chars.len() != 2 {
            return Err(Error::Invalid(format!("rotation label must have length 2, got '{label}'")));
        }
        let pa = Pauli::from_char(chars[0])
            .ok_or_else(|| Error::Invalid(format!("invalid Pauli label '{label}'")))?;
        let pb = Pauli::from_char(chars[1])
            .ok_or_else(|| Error::Invalid(format!("invalid Pauli label '{label}'")))?;
        Self::new(a, b, 4 * pa.code() + pb.code())
    }

    #[inline]
    pub fn sites(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    #[inline]
    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn label(&self) -> String {
        let pa = Pauli::from_code(self.code >> 2);
        let pb = Pauli::from_code(self.code & 3);
        [pa.to_char(), pb.to_char()].iter().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.code == 0
    }

    /// The rotation axis embedded in `n` qubits.
    pub fn axis(&self, n: usize) -> Result<PauliString> {
        for s in [self.a, self.b] {
            if s >= n {
                return Err(Error::OutOfRange { index: s, n });
            }
        }
        let mut x = Bits::zeros(n);
        let mut z = Bits::zeros(n);
        for (site, p) in [(self.a, self.code >> 2), (self.b, self.code & 3)] {
            match Pauli::from_code(p) {
                Pauli::I => {}
                Pauli::X => x.set(site, true),
                Pauli::Y => {
                    x.set(site, true);
                    z.set(site, true)
                }
                Pauli::Z => z.set(site, true),
            }
        }
        Ok(PauliString::hermitian(x, z))
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(i pi {}/4)@({},{})", self.label(), self.a, self.b)
    }
}

/// Index `b` of the stabilizer-basis element `d_b |psi_S>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub Bits);

impl BasisIndex {
    pub fn zero(n: usize) -> Self {
        BasisIndex(Bits::zeros(n))
    }

    pub fn from_u64(n: usize, v: u64) -> Self {
        BasisIndex(Bits::from_u64(n, v))
    }

    pub fn bits(&self) -> &Bits {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Result of decomposing a Pauli string as `i^alpha * d_b * s_c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub alpha: u8,
    pub b: Bits,
    pub c: Bits,
}

impl Decomposition {
    pub fn alpha_complex(&self) -> Complex64 {
        i_pow(self.alpha)
    }
}

/// `n` stabilizer and `n` destabilizer generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullTableau {
    n: usize,
    stabilizers: Vec<PauliString>,
    destabilizers: Vec<PauliString>,
}

impl FullTableau {
    /// Stabilizers `+Z_i`, destabilizers `+X_i`.
    pub fn computational(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("tableau needs at least one qubit".into()));
        }
        let stabilizers = (0..n)
            .map(|q| PauliString::single(n, q, Pauli::Z))
            .collect::<Result<Vec<_>>>()?;
        let destabilizers = (0..n)
            .map(|q| PauliString::single(n, q, Pauli::X))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            stabilizers,
            destabilizers,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.destabilizers
    }

    /// Conjugates every generator by the gate: `Q -> i P Q` when `Q`
    /// anticommutes with the axis `P`.
    pub fn apply_clifford(&self, g: &CliffordGate) -> Result<FullTableau> {
        let mut out = self.clone();
        out.apply_clifford_mut(g)?;
        Ok(out)
    }

    pub fn apply_clifford_mut(&mut self, g: &CliffordGate) -> Result<()> {
        let axis = g.axis(self.n)?;
        if g.is_identity() {
            return Ok(());
        }
        for q in self.stabilizers.iter_mut().chain(self.destabilizers.iter_mut()) {
            if !q.commutes_unchecked(&axis) {
                *q = q.conjugate_by_rotation(&axis, true);
                assert!(
                    q.is_hermitian(),
                    "tableau generator acquired an imaginary sign: {q}"
                );
            }
        }
        Ok(())
    }

    /// Writes `p = i^alpha d_b s_c`.
    ///
    /// `b_i` is set when `p` anticommutes with `s_i` and `c_i` when it
    /// anticommutes with `d_i`; the phase is recovered by accumulating the
    /// product `d_b s_c` and comparing with `p`.
    pub fn decompose_pauli(&self, p: &PauliString) -> Result<Decomposition> {
        check_dim(self.n, p.n())?;
        let mut b = Bits::zeros(self.n);
        let mut c = Bits::zeros(self.n);
        let mut acc = PauliString::identity(self.n);
        for (i, s) in self.stabilizers.iter().enumerate() {
            if !p.commutes_unchecked(s) {
                b.set(i, true);
                acc = acc.mul_unchecked(&self.destabilizers[i]);
            }
        }
        for (i, d) in self.destabilizers.iter().enumerate() {
            if !p.commutes_unchecked(d) {
                c.set(i, true);
                acc = acc.mul_unchecked(&self.stabilizers[i]);
            }
        }
        debug_assert!(acc.x() == p.x() && acc.z() == p.z());
        if acc.x() != p.x() || acc.z() != p.z() {
            return Err(Error::Numerical(format!(
                "decomposition of {p} did not reproduce its symplectic bits"
            )));
        }
        let alpha = (p.phase() + 4 - acc.phase()) & 3;
        Ok(Decomposition { alpha, b, c })
    }

    /// Destabilizer product `d_b`.
    pub fn destabilizer_product(&self, b: &Bits) -> PauliString {
        b.iter_ones().fold(PauliString::identity(self.n), |acc, i| {
            acc.mul_unchecked(&self.destabilizers[i])
        })
    }

    /// Stabilizer product `s_c`.
    pub fn stabilizer_product(&self, c: &Bits) -> PauliString {
        c.iter_ones().fold(PauliString::identity(self.n), |acc, i| {
            acc.mul_unchecked(&self.stabilizers[i])
        })
    }

    /// `<psi_S| d_a p d_a |psi_S>` for a Hermitian `p`; one of -1, 0, +1.
    pub fn stabilizer_expectation(&self, basis: &BasisIndex, p: &PauliString) -> Result<i8> {
        check_dim(self.n, basis.len())?;
        let dec = self.decompose_pauli(p)?;
        if !dec.b.is_zero() {
            return Ok(0);
        }
        let sign = match dec.alpha {
            0 => 1i8,
            2 => -1i8,
            _ => {
                return Err(Error::NotHermitian(format!(
                    "{p} has a non-real expectation in a stabilizer state"
                )))
            }
        };
        Ok(if dec.c.dot(basis.bits()) { -sign } else { sign })
    }

    /// Dense vector of `d_basis |psi_S>` (n <= 12). The global phase is fixed
    /// so that the largest amplitude of `|psi_S>` is real and positive.
    pub fn state_dense(&self, basis: &BasisIndex) -> Result<Vec<Complex64>> {
        const LIMIT: usize = 12;
        if self.n > LIMIT {
            return Err(Error::TooLarge { n: self.n, limit: LIMIT });
        }
        check_dim(self.n, basis.len())?;
        let psi = self.stabilizer_state_dense();
        let d = self.destabilizer_product(basis.bits());
        Ok(dense::apply_pauli(&d, &psi))
    }

    /// `|psi_S>` obtained by projecting a fixed generic vector with
    /// `prod_i (I + s_i) / 2`.
    fn stabilizer_state_dense(&self) -> Vec<Complex64> {
        let dim = 1usize << self.n;
        // Any vector with nonzero overlap works; this one has no special
        // structure with respect to Pauli operators.
        let mut v: Vec<Complex64> = (0..dim)
            .map(|k| {
                let t = (k as f64 + 1.0) * 0.618_033_988_749_894_9;
                Complex64::new((t * 7.3).sin() + 1.1, (t * 3.1).cos())
            })
            .collect();
        for s in &self.stabilizers {
            let sv = dense::apply_pauli(s, &v);
            for (a, b) in v.iter_mut().zip(sv) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, a)| {
                if a.norm() > best.1 + 1e-12 {
                    (i, a.norm())
                } else {
                    best
                }
            });
        let phase = v[imax].conj() / v[imax].norm();
        v.iter().map(|a| a * phase / norm).collect()
    }

    /// Checks commutation pattern, Hermitian signs and GF(2) independence.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.n;
        for i in 0..n {
            let (s, d) = (&self.stabilizers[i], &self.destabilizers[i]);
            if !s.is_hermitian() || !d.is_hermitian() {
                return Err(format!("generator {i} is not Hermitian"));
            }
            for j in 0..n {
                let ss = s.commutes_unchecked(&self.stabilizers[j]);
                let dd = d.commutes_unchecked(&self.destabilizers[j]);
                let ds = d.commutes_unchecked(&self.stabilizers[j]);
                if !ss {
                    return Err(format!("stabilizers {i} and {j} anticommute"));
                }
                if !dd {
                    return Err(format!("destabilizers {i} and {j} anticommute"));
                }
                if ds != (i != j) {
                    return Err(format!("destabilizer {i} / stabilizer {j} pattern broken"));
                }
            }
        }
        let rows: Vec<Bits> = self
            .stabilizers
            .iter()
            .chain(&self.destabilizers)
            .map(|p| {
                let mut r = Bits::zeros(2 * n);
                for q in p.x().iter_ones() {
                    r.set(q, true);
                }
                for q in p.z().iter_ones() {
                    r.set(n + q, true);
                }
                r
            })
            .collect();
        let rank = gf2_rank(rows);
        if rank != 2 * n {
            return Err(format!("generators have GF(2) rank {rank}, expected {}", 2 * n));
        }
        Ok(())
    }
}

pub(crate) fn gf2_rank(mut rows: Vec<Bits>) -> usize {
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(w: &str) -> PauliString {
        PauliString::from_word(w).unwrap()
    }

    #[test]
    fn computational_frames() {
        let t1 = FullTableau::computational(1).unwrap();
        assert_eq!(t1.stabilizers(), &[p("Z")]);
        assert_eq!(t1.destabilizers(), &[p("X")]);
        let t2 = FullTableau::computational(2).unwrap();
        assert_eq!(t2.stabilizers(), &[p("ZI"), p("IZ")]);
        assert_eq!(t2.destabilizers(), &[p("XI"), p("IX")]);
        for n in 1..20 {
            FullTableau::computational(n).unwrap().check_invariants().unwrap();
        }
        assert!(FullTableau::computational(0).is_err());
    }

    #[test]
    fn identity_rotation_is_noop() {
        let t = FullTableau::computational(2).unwrap();
        let g = CliffordGate::new(0, 1, 0).unwrap();
        assert_eq!(t.apply_clifford(&g).unwrap(), t);
    }

    #[test]
    fn x_rotation_maps_z_to_y() {
        let t = FullTableau::computational(2).unwrap();
        let g = CliffordGate::from_label(0, 1, "XI").unwrap();
        let t2 = t.apply_clifford(&g).unwrap();
        // exp(i pi X/4) Z exp(-i pi X/4) = i X Z = Y
        assert_eq!(t2.stabilizers()[0], p("YI"));
        assert_eq!(t2.stabilizers()[1], p("IZ"));
        t2.check_invariants().unwrap();
    }

    #[test]
    fn gate_validation() {
        assert!(CliffordGate::new(1, 1, 3).is_err());
        assert!(CliffordGate::new(0, 1, 16).is_err());
        let g = CliffordGate::new(0, 5, 3).unwrap();
        let t = FullTableau::computational(2).unwrap();
        assert!(matches!(t.apply_clifford(&g), Err(Error::OutOfRange { .. })));
        assert_eq!(CliffordGate::from_label(0, 1, "YZ").unwrap().code(), 4 * 2 + 3);
        assert_eq!(CliffordGate::new(0, 1, 9).unwrap().label(), "YX");
    }

    #[test]
    fn decompose_on_computational_frame() {
        let t = FullTableau::computational(3).unwrap();
        let d = t.decompose_pauli(&p("ZII")).unwrap();
        assert_eq!(d.alpha, 0);
        assert!(d.b.is_zero());
        assert_eq!(d.c, Bits::from_u64(3, 0b001));

        let d = t.decompose_pauli(&p("XII")).unwrap();
        assert_eq!(d.alpha, 0);
        assert_eq!(d.b, Bits::from_u64(3, 0b001));
        assert!(d.c.is_zero());

        let t1 = FullTableau::computational(1).unwrap();
        let d = t1.decompose_pauli(&p("Y")).unwrap();
        // Y = i X Z
        assert_eq!(d.alpha, 1);
        assert_eq!(d.b, Bits::from_u64(1, 1));
        assert_eq!(d.c, Bits::from_u64(1, 1));
    }

    #[test]
    fn expectation_on_computational_frame() {
        let t = FullTableau::computational(2).unwrap();
        let zero = BasisIndex::zero(2);
        let one = BasisIndex::from_u64(2, 0b01);
        assert_eq!(t.stabilizer_expectation(&zero, &p("ZI")).unwrap(), 1);
        assert_eq!(t.stabilizer_expectation(&one, &p("ZI")).unwrap(), -1);
        for b in 0..4 {
            let bi = BasisIndex::from_u64(2, b);
            assert_eq!(t.stabilizer_expectation(&bi, &p("XI")).unwrap(), 0);
        }
    }

    #[test]
    fn dense_state_of_computational_frame() {
        let t = FullTableau::computational(3).unwrap();
        let v = t.state_dense(&BasisIndex::zero(3)).unwrap();
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(v[1..].iter().all(|a| a.norm() < 1e-12));
        let v5 = t.state_dense(&BasisIndex::from_u64(3, 5)).unwrap();
        assert!((v5[5].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![Bits::from_u64(3, 0b011), Bits::from_u64(3, 0b110), Bits::from_u64(3, 0b101)];
        assert_eq!(gf2_rank(rows), 2);
    }
}
