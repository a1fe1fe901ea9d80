//! Pauli group algebra in binary-symplectic form and real-weighted Pauli sums.
//!
//! A [`PauliString`] stores `i^phase * prod_q X_q^{x_q} Z_q^{z_q}`. With this
//! ordering (all X factors to the left of the Z factors on each site) the
//! product of two strings is
//!
//! ```text
//! (i^a X^x1 Z^z1)(i^b X^x2 Z^z2) = i^(a + b + 2|z1 & x2|) X^(x1^x2) Z^(z1^z2)
//! ```
//!
//! so the phase is tracked exactly with a popcount. The Hermitian Pauli word
//! with Y on the overlapping sites is `i^{|x & z|} X^x Z^z`; the *sign exponent*
//! of a string is its phase measured relative to that word.

use crate::bits::Bits;
use crate::error::{check_dim, Error, Result};
use num_complex::Complex64;
use std::fmt;

/// Default threshold below which coefficients are dropped.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Two-bit code: I = 0, X = 1, Y = 2, Z = 3.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Self {
        match code & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// An element of the n-qubit Pauli group.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Bits,
    z: Bits,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: Bits::zeros(n),
            z: Bits::zeros(n),
            phase: 0,
        }
    }

    /// Raw constructor: the operator `i^phase X^x Z^z`.
    pub fn from_parts(x: Bits, z: Bits, phase: u8) -> Result<Self> {
        check_dim(x.len(), z.len())?;
        Ok(Self {
            n: x.len(),
            x,
            z,
            phase: phase & 3,
        })
    }

    /// The Hermitian Pauli word with the given symplectic bits (+1 sign).
    pub fn hermitian(x: Bits, z: Bits) -> Self {
        debug_assert_eq!(x.len(), z.len());
        let phase = (x.and_count(&z) & 3) as u8;
        Self {
            n: x.len(),
            x,
            z,
            phase,
        }
    }

    /// Single-site Hermitian Pauli `p` on qubit `q`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self> {
        if q >= n {
            return Err(Error::OutOfRange { index: q, n });
        }
        let mut x = Bits::zeros(n);
        let mut z = Bits::zeros(n);
        let (px, pz) = p.xz();
        x.set(q, px);
        z.set(q, pz);
        Ok(Self::hermitian(x, z))
    }

    /// Parses a word such as `XIZY`; character `q` acts on qubit `q`.
    /// An optional leading `+`, `-`, `+i`, `-i` sets the sign.
    pub fn from_word(word: &str) -> Result<Self> {
        let (sign, body) = if let Some(rest) = word.strip_prefix("+i") {
            (1u8, rest)
        } else if let Some(rest) = word.strip_prefix("-i") {
            (3u8, rest)
        } else if let Some(rest) = word.strip_prefix('+') {
            (0u8, rest)
        } else if let Some(rest) = word.strip_prefix('-') {
            (2u8, rest)
        } else {
            (0u8, word)
        };
        let n = body.chars().count();
        let mut x = Bits::zeros(n);
        let mut z = Bits::zeros(n);
        for (q, c) in body.chars().enumerate() {
            let p = Pauli::from_char(c)
                .ok_or_else(|| Error::Invalid(format!("invalid Pauli character '{c}' in '{word}'")))?;
            let (px, pz) = p.xz();
            x.set(q, px);
            z.set(q, pz);
        }
        let mut out = Self::hermitian(x, z);
        out.phase = (out.phase + sign) & 3;
        Ok(out)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x(&self) -> &Bits {
        &self.x
    }

    #[inline]
    pub fn z(&self) -> &Bits {
        &self.z
    }

    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Phase exponent relative to the Hermitian word: the operator equals
    /// `i^sign_exp` times the word.
    #[inline]
    pub fn sign_exp(&self) -> u8 {
        (self.phase + 4 - (self.x.and_count(&self.z) & 3) as u8) & 3
    }

    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.sign_exp() & 1 == 0
    }

    /// True when the operator is diagonal in the computational basis.
    #[inline]
    pub fn is_diagonal(&self) -> bool {
        self.x.is_zero()
    }

    #[inline]
    pub fn is_identity_word(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn get(&self, q: usize) -> Pauli {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// The same operator with its sign stripped (the +1 Hermitian word).
    pub fn word(&self) -> PauliString {
        Self::hermitian(self.x.clone(), self.z.clone())
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Multiplies by `i^k`.
    pub fn times_i_pow(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) & 3;
        self
    }

    /// Exact group product `self * other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_dim(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        let swap = (2 * (self.z.and_count(&other.x) & 1)) as u8;
        PauliString {
            n: self.n,
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
            phase: (self.phase + other.phase + swap) & 3,
        }
    }

    /// Phase exponent produced by `self * other` beyond the two input phases.
    #[inline]
    pub fn product_phase(&self, other: &PauliString) -> u8 {
        (2 * (self.z.and_count(&other.x) & 1)) as u8
    }

    pub fn inverse(&self) -> PauliString {
        let overlap = (2 * (self.x.and_count(&self.z) & 1)) as u8;
        PauliString {
            n: self.n,
            x: self.x.clone(),
            z: self.z.clone(),
            phase: (4 - self.phase + overlap) & 3,
        }
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        (self.x.and_count(&other.z) + other.x.and_count(&self.z)) & 1 == 0
    }

    /// Conjugation by the Clifford rotation `exp(i pi P / 4)` about a Hermitian
    /// Pauli `axis`. With `forward` the map is `G Q G^dag` (state picture),
    /// otherwise `G^dag Q G` (operator picture). Anticommuting `Q` maps to
    /// `+i P Q` or `-i P Q` respectively.
    pub fn conjugate_by_rotation(&self, axis: &PauliString, forward: bool) -> PauliString {
        if self.commutes_unchecked(axis) {
            self.clone()
        } else {
            let k = if forward { 1 } else { 3 };
            axis.mul_unchecked(self).times_i_pow(k)
        }
    }

    /// Real sign of a Hermitian string relative to its word (+1 or -1).
    pub fn hermitian_sign(&self) -> Option<f64> {
        match self.sign_exp() {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    /// Multiplicative phase `i^sign_exp` as a complex number.
    pub fn sign_complex(&self) -> Complex64 {
        i_pow(self.sign_exp())
    }

    /// Word representation, qubit 0 first.
    pub fn word_string(&self) -> String {
        (0..self.n).map(|q| self.get(q).to_char()).collect()
    }
}

/// `i^k` as a complex number.
pub fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.sign_exp() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.word_string())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

/// One weighted term of a [`PauliSum`].
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub op: PauliString,
}

/// A Hermitian operator `sum_i c_i P_i` with real coefficients.
///
/// In canonical form every `op` is a +1 Hermitian word, keys are unique and
/// sorted by `(x, z)`, and no coefficient is below the tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<Term>,
    canonical: bool,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
            canonical: true,
        }
    }

    /// Builds a sum from raw terms. Call [`PauliSum::canonicalize`] to fold
    /// phases and merge duplicates.
    pub fn from_terms(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (c, op) in terms {
            check_dim(n, op.n())?;
            if !c.is_finite() {
                return Err(Error::Invalid(format!("non-finite coefficient {c}")));
            }
            out.push(Term { coeff: c, op });
        }
        Ok(Self {
            n,
            terms: out,
            canonical: false,
        })
    }

    /// Canonical sum from `(coeff, word)` pairs, e.g. `(0.5, "XZ")`.
    pub fn from_words(terms: &[(f64, &str)]) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, w)| w.trim_start_matches(['+', '-', 'i']).len())
            .unwrap_or(0);
        let raw = terms
            .iter()
            .map(|(c, w)| PauliString::from_word(w).map(|p| (*c, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, raw)?.canonicalize(DEFAULT_TOL)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Merges duplicate keys, folds signs into coefficients, drops terms with
    /// `|coeff| < tol` and sorts by symplectic key.
    pub fn canonicalize(&self, tol: f64) -> Result<PauliSum> {
        let items = self
            .terms
            .iter()
            .map(|t| (t.op.x().clone(), t.op.z().clone(), t.op.sign_complex() * t.coeff));
        Self::from_complex(self.n, items, tol)
    }

    pub(crate) fn from_complex(
        n: usize,
        items: impl Iterator<Item = (Bits, Bits, Complex64)>,
        tol: f64,
    ) -> Result<PauliSum> {
        let mut items: Vec<_> = items.collect();
        items.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        let mut terms = Vec::with_capacity(items.len());
        let mut iter = items.into_iter().peekable();
        while let Some((x, z, mut c)) = iter.next() {
            while let Some(next) = iter.peek() {
                if next.0 == x && next.1 == z {
                    c += next.2;
                    iter.next();
                } else {
                    break;
                }
            }
            if c.im.abs() > tol {
                let op = PauliString::hermitian(x, z);
                return Err(Error::NotHermitian(format!(
                    "term {op} has imaginary coefficient {}",
                    c.im
                )));
            }
            if c.re.abs() >= tol {
                terms.push(Term {
                    coeff: c.re,
                    op: PauliString::hermitian(x, z),
                });
            }
        }
        Ok(PauliSum {
            n,
            terms,
            canonical: true,
        })
    }

    pub(crate) fn from_canonical_terms(n: usize, terms: Vec<Term>) -> PauliSum {
        PauliSum {
            n,
            terms,
            canonical: true,
        }
    }

    fn require_canonical(&self) -> Result<()> {
        if self.canonical {
            Ok(())
        } else {
            Err(Error::Invalid("operation requires a canonical PauliSum".into()))
        }
    }

    /// Splits into (diagonal, off-diagonal) parts; a term is diagonal iff it
    /// has no X component.
    pub fn diagonal_split(&self) -> Result<(PauliSum, PauliSum)> {
        self.require_canonical()?;
        let (d, o): (Vec<_>, Vec<_>) = self.terms.iter().cloned().partition(|t| t.op.is_diagonal());
        Ok((
            Self::from_canonical_terms(self.n, d),
            Self::from_canonical_terms(self.n, o),
        ))
    }

    /// Sum of squared coefficients over off-diagonal terms.
    pub fn offdiag_weight(&self) -> Result<f64> {
        self.require_canonical()?;
        Ok(self
            .terms
            .iter()
            .filter(|t| !t.op.is_diagonal())
            .map(|t| t.coeff * t.coeff)
            .sum())
    }

    /// Sum of squared coefficients, equal to `Tr(H^2) / 2^n` for canonical sums.
    pub fn frobenius_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.coeff).sum()
    }

    /// Coefficient of the identity word (`Tr(H) / 2^n`).
    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.op.is_identity_word())
            .map(|t| t.coeff)
            .sum()
    }

    /// `<x| H |x>` for the computational basis state with bits `x`.
    pub fn basis_expectation(&self, x: &Bits) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.op.is_diagonal())
            .map(|t| {
                let s = if t.op.z().dot(x) { -1.0 } else { 1.0 };
                t.coeff * t.op.hermitian_sign().unwrap_or(1.0) * s
            })
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Result<PauliSum> {
        let terms = self
            .terms
            .iter()
            .map(|t| (t.coeff * s, t.op.clone()))
            .collect();
        Self::from_terms(self.n, terms)?.canonicalize(DEFAULT_TOL)
    }

    /// `self + s * other`, canonicalized.
    pub fn add_scaled(&self, other: &PauliSum, s: f64) -> Result<PauliSum> {
        check_dim(self.n, other.n)?;
        let terms = self
            .terms
            .iter()
            .map(|t| (t.coeff, t.op.clone()))
            .chain(other.terms.iter().map(|t| (t.coeff * s, t.op.clone())))
            .collect();
        Self::from_terms(self.n, terms)?.canonicalize(DEFAULT_TOL)
    }

    /// `self + c * I`.
    pub fn add_identity(&self, c: f64) -> Result<PauliSum> {
        let mut terms: Vec<_> = self.terms.iter().map(|t| (t.coeff, t.op.clone())).collect();
        terms.push((c, PauliString::identity(self.n)));
        Self::from_terms(self.n, terms)?.canonicalize(DEFAULT_TOL)
    }

    /// Operator product `self * other`; fails if the product is not Hermitian.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        check_dim(self.n, other.n)?;
        let mut items = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let p = a.op.mul_unchecked(&b.op);
                let c = p.sign_complex() * (a.coeff * b.coeff);
                items.push((p.x().clone(), p.z().clone(), c));
            }
        }
        Self::from_complex(self.n, items.into_iter(), DEFAULT_TOL)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{} {}", t.coeff, t.op)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(w: &str) -> PauliString {
        PauliString::from_word(w).unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let r = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(r.word_string(), "Y");
        assert_eq!(r.sign_exp(), 3);
        assert_eq!(r, p("-iY"));
    }

    #[test]
    fn hermitian_squares_to_identity() {
        for w in ["X", "Y", "Z", "XYZ", "-YY", "ZIYX"] {
            let a = p(w);
            let sq = a.multiply(&a).unwrap();
            assert!(sq.is_identity_word());
            assert_eq!(sq.sign_exp(), 0, "{w}");
        }
    }

    #[test]
    fn disjoint_supports_keep_phase() {
        let r = p("XI").multiply(&p("IZ")).unwrap();
        assert_eq!(r, p("XZ"));
    }

    #[test]
    fn inverse_gives_identity() {
        for w in ["+iXY", "-YZ", "Y", "-iZZX"] {
            let a = p(w);
            let e = a.multiply(&a.inverse()).unwrap();
            assert_eq!(e, PauliString::identity(a.n()));
        }
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("YIZ").commutes(&p("IXI")).unwrap());
        assert!(matches!(
            p("X").commutes(&p("XX")),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn canonicalize_examples() {
        let s = PauliSum::from_terms(1, vec![(0.5, p("Z")), (0.5, p("Z"))]).unwrap();
        let c = s.canonicalize(DEFAULT_TOL).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.terms()[0].coeff, 1.0);

        let s = PauliSum::from_terms(1, vec![(1.0, p("-X"))]).unwrap();
        let c = s.canonicalize(DEFAULT_TOL).unwrap();
        assert_eq!(c.terms()[0].coeff, -1.0);
        assert_eq!(c.terms()[0].op, p("X"));

        let s = PauliSum::from_terms(1, vec![(1e-14, p("Y"))]).unwrap();
        assert!(s.canonicalize(1e-12).unwrap().is_empty());
    }

    #[test]
    fn canonicalize_rejects_imaginary() {
        let s = PauliSum::from_terms(1, vec![(1.0, p("+iX"))]).unwrap();
        assert!(matches!(
            s.canonicalize(DEFAULT_TOL),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn diagonal_split_and_weight() {
        let s = PauliSum::from_words(&[(1.0, "ZZ"), (0.3, "XI")]).unwrap();
        let (d, o) = s.diagonal_split().unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.terms()[0].op, p("ZZ"));
        assert_eq!(o.terms()[0].op, p("XI"));

        let all_z = PauliSum::from_words(&[(1.0, "ZI"), (2.0, "IZ")]).unwrap();
        assert!(all_z.diagonal_split().unwrap().1.is_empty());
        let no_z = PauliSum::from_words(&[(1.0, "X"), (2.0, "Y")]).unwrap();
        assert!(no_z.diagonal_split().unwrap().0.is_empty());

        assert_eq!(PauliSum::from_words(&[(1.0, "Z")]).unwrap().offdiag_weight().unwrap(), 0.0);
        assert_eq!(PauliSum::from_words(&[(2.0, "X")]).unwrap().offdiag_weight().unwrap(), 4.0);
        let mixed = PauliSum::from_words(&[(1.0, "Z"), (0.5, "X"), (0.5, "Y")]).unwrap();
        assert!((mixed.offdiag_weight().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn product_of_sums() {
        let a = PauliSum::from_words(&[(1.0, "X"), (1.0, "Z")]).unwrap();
        let sq = a.mul(&a).unwrap();
        // (X + Z)^2 = 2 I
        assert_eq!(sq.len(), 1);
        assert!((sq.identity_coeff() - 2.0).abs() < 1e-15);
    }
}
