//! Grand-canonical free energy with the ansatz
//! `rho = sum_x p(x) U|x><x|U^dag`, where `p` is solved in closed form for
//! each circuit: `p_x ~ exp(-beta E_x)` with `E_x = <x| U^dag (H - mu N) U |x>`.

use crate::circuit::LadderCircuit;
use crate::dense::{self, CMatrix};
use crate::error::{check_dim, Error, Result};
use crate::heisenberg::transform;
use crate::opt::{self, Objective, OptResult, OptimizerConfig, TraceEntry, ENUMERATION_LIMIT};
use crate::pauli::PauliSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// In-place Walsh-Hadamard transform: `out[x] = sum_z v[z] (-1)^{popcount(x & z)}`.
pub fn fwht(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
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

/// `F = -(1/beta) log sum_k exp(-beta E_k)` and `p_k = exp(-beta E_k) / Z`,
/// shifted by `min E` for stability.
pub fn closed_form_free_energy(e: &[f64], beta: f64) -> Result<(f64, Vec<f64>)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Invalid(format!("beta must be positive and finite, got {beta}")));
    }
    if e.is_empty() || e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("energies must be finite and non-empty".into()));
    }
    let emin = e.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p: Vec<f64> = e.iter().map(|v| (-beta * (v - emin)).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    Ok((emin - z.ln() / beta, p))
}

/// Diagonal of a Pauli sum over all basis states (`n <= 20`).
pub fn diagonal_energies(h: &PauliSum) -> Result<Vec<f64>> {
    let n = h.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
    }
    let mut v = vec![0.0; 1usize << n];
    for t in h.terms() {
        if t.op.is_diagonal() {
            v[t.op.z().to_u64() as usize] += t.coeff * t.op.hermitian_sign().unwrap_or(1.0);
        }
    }
    fwht(&mut v);
    Ok(v)
}

/// `E_x = <x| U^dag H U |x>` for every basis state.
pub fn basis_energies(c: &LadderCircuit, h: &PauliSum) -> Result<Vec<f64>> {
    check_dim(c.n, h.n())?;
    if c.n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n: c.n, limit: ENUMERATION_LIMIT });
    }
    diagonal_energies(&transform(h, c)?)
}

fn mean_number(p: &[f64], nums: &[f64]) -> f64 {
    p.iter().zip(nums).map(|(a, b)| a * b).sum()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chem {
    Mu(f64),
    TargetNumber(f64),
}

#[derive(Clone, Debug)]
pub struct ThermalProblem {
    pub h: PauliSum,
    pub number_op: PauliSum,
    pub beta: f64,
    pub chem: Chem,
    pub cfg: OptimizerConfig,
}

impl ThermalProblem {
    pub fn validate(&self) -> Result<()> {
        check_dim(self.h.n(), self.number_op.n())?;
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Invalid(format!("beta must be positive and finite, got {}", self.beta)));
        }
        if let Chem::TargetNumber(t) = self.chem {
            if !(0.0..=self.h.n() as f64).contains(&t) {
                return Err(Error::Invalid(format!("target number {t} outside [0, {}]", self.h.n())));
            }
        }
        Ok(())
    }

    fn config(&self) -> OptimizerConfig {
        let mut c = self.cfg.clone();
        c.objective = Objective::FreeEnergy { beta: self.beta };
        c
    }

    /// `H - mu N`.
    pub fn grand_hamiltonian(&self, mu: f64) -> Result<PauliSum> {
        self.h.add_scaled(&self.number_op, -mu)
    }

    /// Circuit used to fix `mu` in target-number mode: identity brickwork
    /// with the warm-start tail when enabled.
    pub fn initial_circuit(&self) -> Result<LadderCircuit> {
        let mut c = LadderCircuit::identity(self.h.n(), self.cfg.layers.max(1))?;
        if self.cfg.warm_start {
            c.tail = opt::warm_start_tableau(&self.h.canonicalize(crate::pauli::DEFAULT_TOL)?)?;
        }
        Ok(c)
    }

    /// The chemical potential: given directly or by bisection on the initial
    /// circuit.
    pub fn resolve_mu(&self) -> Result<f64> {
        self.validate()?;
        match self.chem {
            Chem::Mu(mu) => Ok(mu),
            Chem::TargetNumber(t) => solve_mu(&self.initial_circuit()?, &self.h, &self.number_op, self.beta, t),
        }
    }
}

/// `mu` with `|<N>(mu) - target| <= 1e-8` for the Gibbs family on a fixed
/// circuit. The bracket `[-B, B]` starts at `B = 1` and doubles up to `2^10`.
pub fn solve_mu(c: &LadderCircuit, h: &PauliSum, number_op: &PauliSum, beta: f64, target: f64) -> Result<f64> {
    let e = basis_energies(c, h)?;
    let nums = basis_energies(c, number_op)?;
    let number_at = |mu: f64| -> Result<f64> {
        let g: Vec<f64> = e.iter().zip(&nums).map(|(a, b)| a - mu * b).collect();
        let (_, p) = closed_form_free_energy(&g, beta)?;
        Ok(mean_number(&p, &nums))
    };
    let mut b = 1.0;
    loop {
        let lo = number_at(-b)?;
        let hi = number_at(b)?;
        if lo <= target + 1e-8 && hi >= target - 1e-8 {
            break;
        }
        b *= 2.0;
        if b > 1024.0 {
            return Err(Error::Numerical(format!(
                "target number {target} not reachable with |mu| <= 1024 (range {lo}..{hi})"
            )));
        }
    }
    let (mut lo, mut hi) = (-b, b);
    let mut mid = 0.0;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let n = number_at(mid)?;
        if (n - target).abs() <= 1e-8 {
            return Ok(mid);
        }
        if n < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * b {
            break;
        }
    }
    let n = number_at(mid)?;
    if (n - target).abs() <= 1e-8 {
        Ok(mid)
    } else {
        Err(Error::Numerical(format!("bisection stalled at mu = {mid} with <N> = {n}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisWeight {
    pub state: u64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalResult {
    pub best_circuit: LadderCircuit,
    pub free_energy: f64,
    pub mu_used: f64,
    pub mean_number: f64,
    /// Most probable basis states, descending.
    pub p_summary: Vec<BasisWeight>,
    pub trace: Vec<TraceEntry>,
    pub opt: OptResult,
}

const SUMMARY_LEN: usize = 16;

fn summarize(problem: &ThermalProblem, mu: f64, res: OptResult) -> Result<ThermalResult> {
    let g = problem.grand_hamiltonian(mu)?;
    let e = basis_energies(&res.best_circuit, &g)?;
    let (_, p) = closed_form_free_energy(&e, problem.beta)?;
    let nums = basis_energies(&res.best_circuit, &problem.number_op)?;
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let p_summary = order
        .iter()
        .take(SUMMARY_LEN)
        .map(|&i| BasisWeight { state: i as u64, p: p[i] })
        .collect();
    Ok(ThermalResult {
        best_circuit: res.best_circuit.clone(),
        free_energy: res.best_cost,
        mu_used: mu,
        mean_number: mean_number(&p, &nums),
        p_summary,
        trace: res.trace.clone(),
        opt: res,
    })
}

/// Minimizes the closed-form free energy of `H - mu N` over circuits.
pub fn optimize_thermal(problem: &ThermalProblem) -> Result<ThermalResult> {
    let mu = problem.resolve_mu()?;
    let g = problem.grand_hamiltonian(mu)?;
    let res = opt::optimize(&g, &problem.config())?;
    summarize(problem, mu, res)
}

/// Free-energy ladder for `k = 0..=k_max` at a common `mu`.
pub fn thermal_ladder(problem: &ThermalProblem, k_max: usize) -> Result<Vec<ThermalResult>> {
    let mu = problem.resolve_mu()?;
    let g = problem.grand_hamiltonian(mu)?;
    opt::ladder_run(&g, k_max, &problem.config())?
        .into_iter()
        .map(|r| summarize(problem, mu, r))
        .collect()
}

/// Dense ansatz state `U diag(p) U^dag` (n <= 10).
pub fn ansatz_density(c: &LadderCircuit, p: &[f64]) -> Result<CMatrix> {
    let u = dense::circuit_to_dense(&c.to_circuit())?.matrix;
    check_dim(u.nrows(), p.len())?;
    let mut scaled = u.clone();
    for (j, &w) in p.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= Complex64::new(w, 0.0);
        }
    }
    Ok(scaled * u.adjoint())
}

/// `-sum p ln p`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
}
