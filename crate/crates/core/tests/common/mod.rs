#![allow(dead_code)]

use magic_ladder::bits::Bits;
use magic_ladder::circuit::{Circuit, Gate, LadderCircuit};
use magic_ladder::dense;
use magic_ladder::pauli::{PauliString, PauliSum};
use magic_ladder::tableau::CliffordGate;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Bits {
    Bits::from_bools(&(0..n).map(|_| rng.gen::<bool>()).collect::<Vec<_>>())
}

pub fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    PauliString::from_parts(random_bits(rng, n), random_bits(rng, n), rng.gen_range(0..4)).unwrap()
}

pub fn random_word(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    PauliString::hermitian(random_bits(rng, n), random_bits(rng, n))
}

/// Sum of `terms` random Hermitian words with coefficients in [-1, 1].
pub fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
    let t = (0..terms).map(|_| (rng.gen_range(-1.0..=1.0), random_word(rng, n))).collect();
    PauliSum::from_terms(n, t).unwrap().canonicalize(1e-14).unwrap()
}

pub fn random_clifford(rng: &mut ChaCha8Rng, n: usize) -> CliffordGate {
    let a = rng.gen_range(0..n);
    let b = (a + rng.gen_range(1..n)) % n;
    CliffordGate::new(a, b, rng.gen_range(0..16)).unwrap()
}

/// `depth` random Clifford gates with `k` Rz gates at random positions.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, depth: usize, k: usize) -> Circuit {
    let mut gates: Vec<Gate> = (0..depth).map(|_| Gate::Clifford(random_clifford(rng, n))).collect();
    for _ in 0..k {
        let pos = rng.gen_range(0..=gates.len());
        let g = Gate::Rz { site: rng.gen_range(0..n), theta: rng.gen_range(-3.2..3.2) };
        gates.insert(pos, g);
    }
    Circuit::new(n, gates).unwrap()
}

pub fn random_ladder(rng: &mut ChaCha8Rng, n: usize, layers: usize, k: usize) -> LadderCircuit {
    let mut c = LadderCircuit::identity(n, layers).unwrap();
    for code in c.codes.iter_mut() {
        *code = rng.gen_range(0..16);
    }
    c.rz_sites = (0..k).map(|_| rng.gen_range(0..n)).collect();
    c.thetas = (0..k).map(|_| rng.gen_range(-3.2..3.2)).collect();
    c.rz_layer = rng.gen_range(0..=layers);
    c.tail = (0..rng.gen_range(0..3)).map(|_| random_clifford(rng, n)).collect();
    c.validate().unwrap();
    c
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn random_stabilizer_state(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> Vec<Complex64> {
    let c = random_circuit(rng, n, depth, 0);
    dense::simulate(&c, &dense::zero_state(n)).unwrap()
}

fn word_with(n: usize, sites: &[(usize, char)]) -> String {
    let mut w = vec!['I'; n];
    for &(q, p) in sites {
        w[q] = p;
    }
    w.into_iter().collect()
}

/// Periodic transverse-field Ising ring `-sum Z_i Z_{i+1} - g sum X_i`.
pub fn tfim(n: usize, g: f64) -> PauliSum {
    let mut terms: Vec<(f64, String)> = Vec::new();
    for i in 0..n {
        terms.push((-1.0, word_with(n, &[(i, 'Z'), ((i + 1) % n, 'Z')])));
        terms.push((-g, word_with(n, &[(i, 'X')])));
    }
    let refs: Vec<(f64, &str)> = terms.iter().map(|(c, w)| (*c, w.as_str())).collect();
    PauliSum::from_words(&refs).unwrap()
}

/// `sum_j (1 - Z_j) / 2`.
pub fn number_op(n: usize) -> PauliSum {
    let mut terms: Vec<(f64, String)> = vec![(n as f64 / 2.0, "I".repeat(n))];
    for j in 0..n {
        terms.push((-0.5, word_with(n, &[(j, 'Z')])));
    }
    let refs: Vec<(f64, &str)> = terms.iter().map(|(c, w)| (*c, w.as_str())).collect();
    PauliSum::from_words(&refs).unwrap()
}

pub fn max_abs_diff(a: &dense::CMatrix, b: &dense::CMatrix) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
