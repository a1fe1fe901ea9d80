//! Circuits of Pauli rotations and Z rotations, and the brickwork
//! Clifford + kRz ladder ansatz.

use crate::error::{Error, Result};
use crate::tableau::CliffordGate;

/// One gate in application order. `Rz(theta) = exp(-i theta Z / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Clifford(CliffordGate),
    Rz { site: usize, theta: f64 },
}

/// A general gate list on `n` qubits, applied first to last.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Self { n, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn identity(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            match g {
                Gate::Clifford(c) => {
                    let (a, b) = c.sites();
                    for s in [a, b] {
                        if s >= self.n {
                            return Err(Error::OutOfRange { index: s, n: self.n });
                        }
                    }
                }
                Gate::Rz { site, theta } => {
                    if *site >= self.n {
                        return Err(Error::OutOfRange { index: *site, n: self.n });
                    }
                    if !theta.is_finite() {
                        return Err(Error::Invalid(format!("non-finite Rz angle {theta}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rz_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Rz { .. })).count()
    }
}

/// Brickwork ansatz: `layers` layers of `n` two-qubit Pauli rotations on
/// nearest-neighbour bonds with periodic wrap, `k` Z rotations inserted after
/// layer `rz_layer - 1`, and an optional fixed Clifford tail (warm start or
/// basis-state seed) applied after everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderCircuit {
    pub n: usize,
    pub layers: usize,
    /// Gate codes, layer-major: `codes[l * n + g]`.
    pub codes: Vec<u8>,
    pub rz_sites: Vec<usize>,
    pub thetas: Vec<f64>,
    pub rz_layer: usize,
    pub tail: Vec<CliffordGate>,
}

impl LadderCircuit {
    /// All-identity ladder with the Rz layer at the end.
    pub fn identity(n: usize, layers: usize) -> Result<Self> {
        let c = Self {
            n,
            layers,
            codes: vec![0; n * layers],
            rz_sites: Vec::new(),
            thetas: Vec::new(),
            rz_layer: layers,
            tail: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    /// Bond of gate `g` within a layer. Every periodic nearest-neighbour
    /// bond is visited once per layer: even bonds first, then odd bonds.
    pub fn bond(n: usize, g: usize) -> (usize, usize) {
        let s = if n % 2 == 0 {
            (2 * g) % n + (2 * g) / n
        } else {
            (2 * g) % n
        };
        (s, (s + 1) % n)
    }

    pub fn k(&self) -> usize {
        self.rz_sites.len()
    }

    /// Number of discrete coordinates: Clifford slots then Rz-site slots.
    pub fn discrete_len(&self) -> usize {
        self.codes.len() + self.rz_sites.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Invalid("ladder circuits need at least two qubits".into()));
        }
        if self.codes.len() != self.n * self.layers {
            return Err(Error::Invalid(format!(
                "expected {} gate codes, got {}",
                self.n * self.layers,
                self.codes.len()
            )));
        }
        if let Some(&c) = self.codes.iter().find(|&&c| c >= 16) {
            return Err(Error::Invalid(format!("gate code {c} outside 0..16")));
        }
        if self.rz_sites.len() != self.thetas.len() {
            return Err(Error::Invalid("rz_sites and thetas differ in length".into()));
        }
        if let Some(&s) = self.rz_sites.iter().find(|&&s| s >= self.n) {
            return Err(Error::OutOfRange { index: s, n: self.n });
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::Invalid("non-finite Rz angle".into()));
        }
        if self.rz_layer > self.layers {
            return Err(Error::Invalid(format!(
                "rz_layer {} exceeds layer count {}",
                self.rz_layer, self.layers
            )));
        }
        for g in &self.tail {
            let (a, b) = g.sites();
            if a >= self.n || b >= self.n {
                return Err(Error::OutOfRange { index: a.max(b), n: self.n });
            }
        }
        Ok(())
    }

    fn layer_gates(&self, layer: usize) -> impl Iterator<Item = CliffordGate> + '_ {
        (0..self.n).map(move |g| {
            let (a, b) = Self::bond(self.n, g);
            CliffordGate::new(a, b, self.codes[layer * self.n + g]).expect("validated ladder")
        })
    }

    /// Clifford gates applied before the Rz layer, in application order.
    pub fn clifford_before(&self) -> Vec<CliffordGate> {
        (0..self.rz_layer).flat_map(|l| self.layer_gates(l)).collect()
    }

    /// Clifford gates applied after the Rz layer (including the tail).
    pub fn clifford_after(&self) -> Vec<CliffordGate> {
        (self.rz_layer..self.layers)
            .flat_map(|l| self.layer_gates(l))
            .chain(self.tail.iter().copied())
            .collect()
    }

    pub fn to_circuit(&self) -> Circuit {
        let mut gates: Vec<Gate> = self.clifford_before().into_iter().map(Gate::Clifford).collect();
        gates.extend(
            self.rz_sites
                .iter()
                .zip(&self.thetas)
                .map(|(&site, &theta)| Gate::Rz { site, theta }),
        );
        gates.extend(self.clifford_after().into_iter().map(Gate::Clifford));
        Circuit { n: self.n, gates }
    }

    /// Rebuilds a ladder from its flattened gate list given the layer count,
    /// the Rz insertion layer and the tail length.
    pub fn from_circuit(c: &Circuit, layers: usize, rz_layer: usize, tail_len: usize) -> Result<Self> {
        let n = c.n;
        let brick = n * layers;
        if c.gates.len() < brick + tail_len || rz_layer > layers {
            return Err(Error::Invalid("circuit does not match the ladder layout".into()));
        }
        let k = c.gates.len() - brick - tail_len;
        let before = rz_layer * n;
        let mut codes = Vec::with_capacity(brick);
        let mut rz_sites = Vec::with_capacity(k);
        let mut thetas = Vec::with_capacity(k);
        let mut tail = Vec::with_capacity(tail_len);
        for (i, g) in c.gates.iter().enumerate() {
            let brick_slot = if i < before {
                Some(i)
            } else if i < before + k {
                None
            } else if i < brick + k {
                Some(i - k)
            } else {
                match g {
                    Gate::Clifford(cg) => tail.push(*cg),
                    Gate::Rz { .. } => return Err(Error::Invalid("Rz gate inside the ladder tail".into())),
                }
                continue;
            };
            match (brick_slot, g) {
                (Some(slot), Gate::Clifford(cg)) => {
                    if cg.sites() != Self::bond(n, slot % n) {
                        return Err(Error::Invalid(format!(
                            "gate {i} acts on {:?}, expected brickwork bond {:?}",
                            cg.sites(),
                            Self::bond(n, slot % n)
                        )));
                    }
                    codes.push(cg.code());
                }
                (None, Gate::Rz { site, theta }) => {
                    rz_sites.push(*site);
                    thetas.push(*theta);
                }
                _ => return Err(Error::Invalid(format!("gate {i} does not match the ladder layout"))),
            }
        }
        let out = Self {
            n,
            layers,
            codes,
            rz_sites,
            thetas,
            rz_layer,
            tail,
        };
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn bonds(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|g| LadderCircuit::bond(n, g)).collect()
    }

    #[test]
    fn brickwork_covers_every_bond_once() {
        assert_eq!(bonds(8)[..4], [(0, 1), (2, 3), (4, 5), (6, 7)]);
        assert_eq!(bonds(8)[4..], [(1, 2), (3, 4), (5, 6), (7, 0)]);
        for n in 3..12 {
            let set: BTreeSet<_> = bonds(n).into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            assert_eq!(set.len(), n, "n = {n}");
        }
    }

    #[test]
    fn circuit_round_trip() {
        let mut c = LadderCircuit::identity(5, 3).unwrap();
        c.codes.iter_mut().enumerate().for_each(|(i, v)| *v = (i * 7 % 16) as u8);
        c.rz_sites = vec![1, 4];
        c.thetas = vec![0.3, -1.2];
        c.rz_layer = 2;
        c.tail = vec![CliffordGate::new(3, 0, 5).unwrap()];
        let flat = c.to_circuit();
        assert_eq!(flat.gates.len(), 15 + 2 + 1);
        let back = LadderCircuit::from_circuit(&flat, 3, 2, 1).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation_errors() {
        let mut c = LadderCircuit::identity(4, 1).unwrap();
        c.rz_sites = vec![4];
        c.thetas = vec![0.0];
        assert!(c.validate().is_err());
        assert!(LadderCircuit::identity(1, 1).is_err());
    }
}
