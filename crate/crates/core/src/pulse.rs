//! Rydberg-atom chain with piecewise-constant controls: dense time evolution
//! and pulse optimization against a qubit Hamiltonian.
//!
//! Units are microseconds and angular MHz. Qubit `|0>` is the ground state
//! `|g>` and `|1>` the Rydberg state, so `n_j = (1 - Z_j) / 2`.

use crate::circuit::Circuit;
use crate::dense::{self, CMatrix};
use crate::error::{check_dim, Error, Result};
use crate::heisenberg::transform_circuit;
use crate::opt::restart_rng;
use crate::pauli::{Pauli, PauliString, PauliSum, DEFAULT_TOL};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `2 pi * 862690 MHz um^6`.
pub const C6: f64 = 2.0 * PI * 8.627e5;
pub const DEFAULT_SPACING: f64 = 9.37;
pub const DEFAULT_SEGMENTS: usize = 10;
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomChain {
    /// Positions in micrometers, strictly increasing.
    pub positions: Vec<f64>,
    pub c6: f64,
    /// Keep only nearest-neighbor interactions.
    pub nearest_only: bool,
}

impl AtomChain {
    pub fn new(positions: Vec<f64>, nearest_only: bool) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Invalid("atom chain needs at least one atom".into()));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite atom position".into()));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("atom positions must be strictly increasing".into()));
        }
        Ok(Self { positions, c6: C6, nearest_only })
    }

    pub fn uniform(n: usize, spacing: f64) -> Result<Self> {
        Self::new((0..n).map(|j| j as f64 * spacing).collect(), false)
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// `C6 / |x_i - x_j|^6`.
    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        self.c6 / (self.positions[i] - self.positions[j]).abs().powi(6)
    }

    /// Interacting pairs `(i, j, V_ij)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            let end = if self.nearest_only { (i + 2).min(n) } else { n };
            for j in i + 1..end {
                out.push((i, j, self.interaction(i, j)));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Total duration in microseconds.
    pub duration: f64,
    /// `(Omega_j / 2) cos phi_j`, indexed `[atom][segment]`.
    pub ux: Vec<Vec<f64>>,
    /// `-(Omega_j / 2) sin phi_j`.
    pub uy: Vec<Vec<f64>>,
    /// Detuning `Delta_j`.
    pub delta: Vec<Vec<f64>>,
}

impl PulseSchedule {
    pub fn zeros(atoms: usize, segments: usize, duration: f64) -> Self {
        let z = vec![vec![0.0; segments]; atoms];
        Self { duration, ux: z.clone(), uy: z.clone(), delta: z }
    }

    pub fn atoms(&self) -> usize {
        self.ux.len()
    }

    pub fn segments(&self) -> usize {
        self.ux.first().map_or(0, |r| r.len())
    }

    pub fn validate(&self, atoms: usize) -> Result<()> {
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(Error::Invalid(format!("duration {} must be finite and >= 0", self.duration)));
        }
        let s = self.segments();
        if s == 0 {
            return Err(Error::Invalid("schedule has no segments".into()));
        }
        for table in [&self.ux, &self.uy, &self.delta] {
            check_dim(atoms, table.len())?;
            for row in table {
                check_dim(s, row.len())?;
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Invalid("non-finite control value".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of free control values.
    pub fn len(&self) -> usize {
        3 * self.atoms() * self.segments()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn flat_index(&self, k: usize) -> (usize, usize, usize) {
        let per = self.atoms() * self.segments();
        let (t, r) = (k / per, k % per);
        (t, r / self.segments(), r % self.segments())
    }

    pub fn get(&self, k: usize) -> f64 {
        let (t, a, s) = self.flat_index(k);
        [&self.ux, &self.uy, &self.delta][t][a][s]
    }

    pub fn set(&mut self, k: usize, v: f64) {
        let (t, a, s) = self.flat_index(k);
        [&mut self.ux, &mut self.uy, &mut self.delta][t][a][s] = v;
    }

    /// Splits each segment into `m` equal pieces with the same controls.
    pub fn refine(&self, m: usize) -> Self {
        let rep = |t: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            t.iter().map(|r| r.iter().flat_map(|&v| std::iter::repeat(v).take(m)).collect()).collect()
        };
        Self { duration: self.duration, ux: rep(&self.ux), uy: rep(&self.uy), delta: rep(&self.delta) }
    }
}

/// Hamiltonian of segment `s`:
/// `sum_j (ux X_j + uy Y_j) + sum_j (Delta_j/2 - sum_i V_ij/4) Z_j
///  + sum_{i<j} V_ij/4 Z_i Z_j + sum V_ij/4 - sum Delta_j/2`.
pub fn rydberg_pauli_hamiltonian(chain: &AtomChain, sched: &PulseSchedule, s: usize) -> Result<PauliSum> {
    let n = chain.n();
    sched.validate(n)?;
    if s >= sched.segments() {
        return Err(Error::OutOfRange { index: s, n: sched.segments() });
    }
    let mut terms = Vec::new();
    let mut constant = 0.0;
    for j in 0..n {
        terms.push((sched.ux[j][s], PauliString::single(n, j, Pauli::X)?));
        terms.push((sched.uy[j][s], PauliString::single(n, j, Pauli::Y)?));
        terms.push((sched.delta[j][s] / 2.0, PauliString::single(n, j, Pauli::Z)?));
        constant -= sched.delta[j][s] / 2.0;
    }
    for (i, j, v) in chain.pairs() {
        let zi = PauliString::single(n, i, Pauli::Z)?;
        let zj = PauliString::single(n, j, Pauli::Z)?;
        terms.push((v / 4.0, zi.multiply(&zj)?));
        terms.push((-v / 4.0, zi));
        terms.push((-v / 4.0, zj));
        constant += v / 4.0;
    }
    terms.push((constant, PauliString::identity(n)));
    PauliSum::from_terms(n, terms)?.canonicalize(DEFAULT_TOL)
}

/// `|g...g>`.
pub fn ground_state(n: usize) -> Vec<Complex64> {
    dense::zero_state(n)
}

/// Dense pieces of the segment Hamiltonians: the control-independent
/// interaction part and one matrix per control in `get`/`set` order of a
/// single segment (`X_j`, `Y_j`, then `-n_j` for the detunings).
struct DenseModel {
    n: usize,
    fixed: CMatrix,
    ops: Vec<CMatrix>,
    target: CMatrix,
}

impl DenseModel {
    fn new(chain: &AtomChain, target: &PauliSum) -> Result<Self> {
        let n = chain.n();
        if n > dense::CIRCUIT_LIMIT {
            return Err(Error::TooLarge { n, limit: dense::CIRCUIT_LIMIT });
        }
        check_dim(n, target.n())?;
        let fixed = rydberg_pauli_hamiltonian(chain, &PulseSchedule::zeros(n, 1, 0.0), 0)?;
        let mut ops = Vec::with_capacity(3 * n);
        for p in [Pauli::X, Pauli::Y] {
            for j in 0..n {
                ops.push(dense::pauli_to_dense(&PauliString::single(n, j, p)?)?);
            }
        }
        let id = CMatrix::identity(1 << n, 1 << n);
        for j in 0..n {
            let z = dense::pauli_to_dense(&PauliString::single(n, j, Pauli::Z)?)?;
            ops.push((z - &id) * Complex64::new(0.5, 0.0));
        }
        Ok(Self {
            n,
            fixed: dense::pauli_sum_to_dense(&fixed)?.matrix,
            ops,
            target: dense::pauli_sum_to_dense(target)?.matrix,
        })
    }

    fn segment(&self, sched: &PulseSchedule, s: usize) -> CMatrix {
        let mut h = self.fixed.clone();
        for (t, table) in [&sched.ux, &sched.uy, &sched.delta].into_iter().enumerate() {
            for j in 0..self.n {
                h += &self.ops[t * self.n + j] * Complex64::new(table[j][s], 0.0);
            }
        }
        h
    }

    fn evolve(&self, sched: &PulseSchedule, psi0: &[Complex64]) -> Result<Vec<Complex64>> {
        sched.validate(self.n)?;
        check_dim(1 << self.n, psi0.len())?;
        let dt = sched.duration / sched.segments() as f64;
        let mut psi = CMatrix::from_column_slice(psi0.len(), 1, psi0);
        for s in 0..sched.segments() {
            psi = dense::unitary_propagator(&self.segment(sched, s), dt) * psi;
        }
        Ok(psi.as_slice().to_vec())
    }

    fn objective(&self, sched: &PulseSchedule) -> Result<f64> {
        let psi = CMatrix::from_vec(1 << self.n, 1, self.evolve(sched, &ground_state(self.n))?);
        Ok((psi.adjoint() * &self.target * &psi)[(0, 0)].re)
    }

    /// Central differences. Only the propagator of the perturbed segment is
    /// recomputed: with `phi` the state entering segment `s` and `A` the
    /// target pulled back through the later segments, each probe is
    /// `<phi| U'^dag A U' |phi>`.
    fn fd_gradient(&self, sched: &PulseSchedule, step: f64) -> Result<Vec<f64>> {
        sched.validate(self.n)?;
        let segs = sched.segments();
        let dt = sched.duration / segs as f64;
        let hs: Vec<CMatrix> = (0..segs).map(|s| self.segment(sched, s)).collect();
        let us: Vec<CMatrix> = hs.iter().map(|h| dense::unitary_propagator(h, dt)).collect();
        let mut phis = Vec::with_capacity(segs);
        let mut phi = CMatrix::from_vec(1 << self.n, 1, ground_state(self.n));
        for u in &us {
            phis.push(phi.clone());
            phi = u * phi;
        }
        let mut pulled = vec![self.target.clone(); segs];
        for s in (0..segs.saturating_sub(1)).rev() {
            pulled[s] = us[s + 1].adjoint() * &pulled[s + 1] * &us[s + 1];
        }
        let probe = |s: usize, op: &CMatrix, d: f64| -> f64 {
            let h = &hs[s] + op * Complex64::new(d, 0.0);
            let v = dense::unitary_propagator(&h, dt) * &phis[s];
            (v.adjoint() * &pulled[s] * &v)[(0, 0)].re
        };
        let mut g = vec![0.0; sched.len()];
        for (k, gk) in g.iter_mut().enumerate() {
            let (t, a, s) = sched.flat_index(k);
            let op = &self.ops[t * self.n + a];
            *gk = (probe(s, op, step) - probe(s, op, -step)) / (2.0 * step);
        }
        Ok(g)
    }
}

/// Exact piecewise propagation of `psi0` (n <= 10).
pub fn evolve(chain: &AtomChain, sched: &PulseSchedule, psi0: &[Complex64]) -> Result<Vec<Complex64>> {
    DenseModel::new(chain, &PauliSum::zero(chain.n()))?.evolve(sched, psi0)
}

/// `<psi(T)|target|psi(T)>` from `|g...g>`.
pub fn pulse_objective(chain: &AtomChain, sched: &PulseSchedule, target: &PauliSum) -> Result<f64> {
    DenseModel::new(chain, target)?.objective(sched)
}

/// Central finite-difference gradient over all controls in `get`/`set` order.
pub fn fd_gradient(chain: &AtomChain, sched: &PulseSchedule, target: &PauliSum, step: f64) -> Result<Vec<f64>> {
    DenseModel::new(chain, target)?.fd_gradient(sched, step)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    pub duration: f64,
    pub segments: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Initial controls are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub fd_step: f64,
    /// Line search gives up once the step drops below this.
    pub min_step: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            duration: 0.1,
            segments: DEFAULT_SEGMENTS,
            restarts: 20,
            max_iters: 30,
            seed: 0,
            init_scale: 5.0,
            fd_step: FD_STEP,
            min_step: 1e-10,
        }
    }
}

impl PulseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 || self.restarts == 0 {
            return Err(Error::Invalid("segments and restarts must be >= 1".into()));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::Invalid("duration must be finite and >= 0".into()));
        }
        if !(self.fd_step > 0.0 && self.init_scale >= 0.0 && self.min_step > 0.0) {
            return Err(Error::Invalid("fd_step, min_step must be > 0 and init_scale >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseRestart {
    pub restart_id: usize,
    pub initial: f64,
    pub cost: f64,
    pub schedule: PulseSchedule,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseResult {
    pub best: PulseSchedule,
    pub best_cost: f64,
    pub best_restart: usize,
    pub restarts: Vec<PulseRestart>,
}

impl PulseResult {
    pub fn endpoints(&self) -> Vec<f64> {
        self.restarts.iter().map(|r| r.cost).collect()
    }
}

fn random_schedule(n: usize, cfg: &PulseConfig, restart_id: usize) -> PulseSchedule {
    let mut rng = restart_rng(cfg.seed, restart_id);
    let mut s = PulseSchedule::zeros(n, cfg.segments, cfg.duration);
    for k in 0..s.len() {
        s.set(k, rng.gen_range(-1.0..=1.0) * cfg.init_scale);
    }
    s
}

fn descend(model: &DenseModel, cfg: &PulseConfig, restart_id: usize) -> Result<PulseRestart> {
    let mut cur = random_schedule(model.n, cfg, restart_id);
    let mut f = model.objective(&cur)?;
    let initial = f;
    let mut trace = vec![f];
    let mut step = 1.0;
    for _ in 0..cfg.max_iters {
        let g = model.fd_gradient(&cur, cfg.fd_step)?;
        let gnorm2: f64 = g.iter().map(|v| v * v).sum();
        if gnorm2 == 0.0 {
            break;
        }
        let mut accepted = None;
        while step >= cfg.min_step {
            let mut trial = cur.clone();
            for (k, gk) in g.iter().enumerate() {
                trial.set(k, cur.get(k) - step * gk);
            }
            let ft = model.objective(&trial)?;
            if ft <= f - 1e-4 * step * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((s, ft)) => {
                cur = s;
                f = ft;
                trace.push(f);
                step *= 2.0;
            }
            None => break,
        }
    }
    Ok(PulseRestart { restart_id, initial, cost: f, schedule: cur, trace })
}

/// Random-restart gradient descent on all control tables. Each restart's
/// trace is non-increasing; the lowest endpoint wins, ties to the lowest id.
pub fn optimize_pulses(chain: &AtomChain, target: &PauliSum, cfg: &PulseConfig) -> Result<PulseResult> {
    cfg.validate()?;
    let model = DenseModel::new(chain, target)?;
    let restarts = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| descend(&model, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let best = restarts
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.restart_id.cmp(&b.restart_id)))
        .expect("at least one restart");
    Ok(PulseResult {
        best: best.schedule.clone(),
        best_cost: best.cost,
        best_restart: best.restart_id,
        restarts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseComparison {
    pub original: PulseResult,
    pub transformed: PulseResult,
}

/// Optimizes pulses against `h` and against `U^dag H U` with the same seeds.
pub fn compare(chain: &AtomChain, h: &PauliSum, c: &Circuit, cfg: &PulseConfig) -> Result<PulseComparison> {
    let h_eff = transform_circuit(h, c)?;
    Ok(PulseComparison {
        original: optimize_pulses(chain, h, cfg)?,
        transformed: optimize_pulses(chain, &h_eff, cfg)?,
    })
}
